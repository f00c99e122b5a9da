//! Entropy-regularized optimal transport between embedding sets: squared
//! Euclidean cost matrices, Sinkhorn scaling in the direct and log domains,
//! the resulting graph Wasserstein distance, an exact small-instance oracle,
//! and frozen-plan gradients.
//!
//! Conventions, fixed across the module:
//!
//! - Marginals are uniform: every row of a plan sums to 1/n and every column
//!   to 1/m, where the cost matrix is n x m.
//! - `lambda` scales the cost inside the kernel `K = exp(-lambda * M)`, so
//!   larger lambda tracks the unregularized optimum more closely at the price
//!   of slower, stiffer iterations.
//! - The reported distance is always the linear cost `<T, M>` of the returned
//!   plan, never the regularized objective, so it is directly comparable with
//!   [`exact_ot`].
//! - Running out of iterations is not an error; the plan carries its
//!   iteration count and worst marginal violation so callers can judge it.

use crate::assignment::solve_assignment;
use crate::embedding::{squared_distance, EmbeddingMatrix};
use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot transport to or from an empty embedding set")]
    EmptySide,
    #[error("non-finite cost entry at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },
    #[error("negative cost entry at ({row}, {col})")]
    NegativeCost { row: usize, col: usize },
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("scaling produced a non-finite value; the instance needs the log-domain solver")]
    Unstable,
    #[error("exact solver limited to rows*cols <= {limit}, got {rows}x{cols}")]
    ExactSizeGuard {
        rows: usize,
        cols: usize,
        limit: usize,
    },
    #[error("plan is {plan_rows}x{plan_cols} but embeddings give {rows}x{cols}")]
    PlanShapeMismatch {
        plan_rows: usize,
        plan_cols: usize,
        rows: usize,
        cols: usize,
    },
}

/// Pairwise squared Euclidean distances between two embedding sets; entries
/// are finite and nonnegative by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
}

impl CostMatrix {
    /// Wraps raw entries, enforcing finiteness and nonnegativity.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self, TransportError> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(TransportError::EmptySide);
        }
        for ((row, col), &value) in entries.indexed_iter() {
            if !value.is_finite() {
                return Err(TransportError::NonFiniteCost { row, col });
            }
            if value < 0.0 {
                return Err(TransportError::NegativeCost { row, col });
            }
        }
        Ok(CostMatrix { entries })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |acc, &v| acc.max(v))
    }
}

/// Cost matrix `M[i][j] = ||xv_i - xw_j||^2` between two embedding sets of a
/// shared dimension.
pub fn cost_matrix(
    left: &EmbeddingMatrix,
    right: &EmbeddingMatrix,
) -> Result<CostMatrix, TransportError> {
    if left.dim() != right.dim() {
        return Err(TransportError::DimensionMismatch {
            left: left.dim(),
            right: right.dim(),
        });
    }
    if left.node_count() == 0 || right.node_count() == 0 {
        return Err(TransportError::EmptySide);
    }
    let mut entries = Array2::zeros((left.node_count(), right.node_count()));
    for i in 0..left.node_count() {
        for j in 0..right.node_count() {
            entries[[i, j]] = squared_distance(left.rows().row(i), right.rows().row(j));
        }
    }
    CostMatrix::from_entries(entries)
}

/// Sinkhorn solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornConfig {
    /// Cost scale inside the kernel; must be positive and finite.
    pub lambda: f64,
    /// Upper bound on scaling sweeps; at least 1.
    pub max_iterations: usize,
    /// Convergence threshold on the worst marginal violation; positive.
    pub tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            lambda: 100.0,
            max_iterations: 1000,
            tolerance: 1e-9,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<(), TransportError> {
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(TransportError::InvalidConfig(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(TransportError::InvalidConfig(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(TransportError::InvalidConfig(
                "max_iterations must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// A coupling with uniform marginals plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    entries: Array2<f64>,
    iterations: usize,
    marginal_violation: f64,
}

impl TransportPlan {
    /// Wraps raw entries (e.g. re-read from disk), computing the violation
    /// diagnostics against uniform marginals for the given shape.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self, TransportError> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(TransportError::EmptySide);
        }
        for ((row, col), &value) in entries.indexed_iter() {
            if !value.is_finite() {
                return Err(TransportError::NonFiniteCost { row, col });
            }
        }
        let violation = uniform_marginal_violation(&entries);
        Ok(TransportPlan {
            entries,
            iterations: 0,
            marginal_violation: violation,
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Scaling sweeps actually performed (0 for plans not produced by a
    /// solver).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Worst absolute deviation of any row or column sum from its uniform
    /// marginal.
    pub fn marginal_violation(&self) -> f64 {
        self.marginal_violation
    }

    /// Linear transport cost `<T, M>` of this plan under the given costs.
    pub fn cost(&self, costs: &CostMatrix) -> f64 {
        self.entries
            .iter()
            .zip(costs.entries().iter())
            .map(|(t, m)| t * m)
            .sum()
    }
}

/// Projects a nonnegative matrix onto the uniform-marginal polytope: rows and
/// then columns are scaled down where they overshoot their marginal, and the
/// remaining deficit is reinstated along the outer product of the row and
/// column gaps. Entries stay nonnegative, and the total mass moved is on the
/// order of the pre-projection violation, so a converged plan is perturbed
/// only at roundoff scale. Rows and columns that already meet their marginal
/// exactly are left bit-identical.
fn project_to_polytope(entries: &mut Array2<f64>, a: f64, b: f64) {
    let (n, m) = (entries.nrows(), entries.ncols());
    for i in 0..n {
        let row_sum = entries.row(i).sum();
        if row_sum > a {
            let scale = a / row_sum;
            entries.row_mut(i).mapv_inplace(|t| t * scale);
        }
    }
    for j in 0..m {
        let col_sum = entries.column(j).sum();
        if col_sum > b {
            let scale = b / col_sum;
            entries.column_mut(j).mapv_inplace(|t| t * scale);
        }
    }
    let row_gap: Vec<f64> = (0..n)
        .map(|i| (a - entries.row(i).sum()).max(0.0))
        .collect();
    let col_gap: Vec<f64> = (0..m)
        .map(|j| (b - entries.column(j).sum()).max(0.0))
        .collect();
    let total: f64 = row_gap.iter().sum();
    if total > 0.0 {
        for i in 0..n {
            if row_gap[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                entries[[i, j]] += row_gap[i] * col_gap[j] / total;
            }
        }
    }
}

fn uniform_marginal_violation(entries: &Array2<f64>) -> f64 {
    let (n, m) = (entries.nrows(), entries.ncols());
    let a = 1.0 / n as f64;
    let b = 1.0 / m as f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((entries.row(i).sum() - a).abs());
    }
    for j in 0..m {
        worst = worst.max((entries.column(j).sum() - b).abs());
    }
    worst
}

/// Above this value of `lambda * max(M)` the direct kernel would underflow
/// badly, so [`sinkhorn`] switches to the log-domain solver.
pub const LOG_SWITCH_THRESHOLD: f64 = 50.0;

/// Entropic transport plan for the given costs, dispatching between the
/// direct and log-domain solvers on kernel stability.
pub fn sinkhorn(costs: &CostMatrix, config: &SinkhornConfig) -> Result<TransportPlan, TransportError> {
    config.validate()?;
    if config.lambda * costs.max_entry() > LOG_SWITCH_THRESHOLD {
        sinkhorn_log(costs, config)
    } else {
        sinkhorn_direct(costs, config)
    }
}

/// Direct-domain Sinkhorn: alternating scaling of `K = exp(-lambda M)`.
/// Fast and simple, but only safe while the kernel stays well above the
/// underflow floor; prefer [`sinkhorn`] unless the regime is known.
pub fn sinkhorn_direct(
    costs: &CostMatrix,
    config: &SinkhornConfig,
) -> Result<TransportPlan, TransportError> {
    config.validate()?;
    let (n, m) = (costs.nrows(), costs.ncols());
    let a = 1.0 / n as f64;
    let b = 1.0 / m as f64;
    let kernel = costs.entries().mapv(|c| (-config.lambda * c).exp());
    let mut u = Array1::from_elem(n, 1.0);
    let mut v = Array1::from_elem(m, 1.0);
    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    while iterations < config.max_iterations {
        iterations += 1;
        let kv = kernel.dot(&v);
        for i in 0..n {
            u[i] = a / kv[i];
        }
        let ktu = kernel.t().dot(&u);
        for j in 0..m {
            v[j] = b / ktu[j];
        }
        if !u.iter().all(|x| x.is_finite()) || !v.iter().all(|x| x.is_finite()) {
            return Err(TransportError::Unstable);
        }
        // Column sums match b exactly by construction of v; rows drift, so
        // they need a fresh kernel pass.
        let kv = kernel.dot(&v);
        violation = 0.0f64;
        for i in 0..n {
            violation = violation.max((u[i] * kv[i] - a).abs());
        }
        for j in 0..m {
            violation = violation.max((v[j] * ktu[j] - b).abs());
        }
        if violation <= config.tolerance {
            break;
        }
    }
    let mut entries = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            entries[[i, j]] = u[i] * kernel[[i, j]] * v[j];
        }
    }
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(TransportError::Unstable);
    }
    // The scaling iterate satisfies the marginals only up to the measured
    // violation, and a truncated run can sit below the exact transport cost
    // by about violation * max(M). Projecting onto the polytope restores
    // exact feasibility, so the reported cost never undercuts the exact
    // optimum. The sweep violation stays the convergence diagnostic.
    project_to_polytope(&mut entries, a, b);
    let violation = violation.max(uniform_marginal_violation(&entries));
    Ok(TransportPlan {
        entries,
        iterations,
        marginal_violation: violation,
    })
}

/// Log-domain Sinkhorn: the same fixed point computed through dual potentials
/// and log-sum-exp, stable for any `lambda * max(M)`.
pub fn sinkhorn_log(
    costs: &CostMatrix,
    config: &SinkhornConfig,
) -> Result<TransportPlan, TransportError> {
    config.validate()?;
    let (n, m) = (costs.nrows(), costs.ncols());
    let a = 1.0 / n as f64;
    let b = 1.0 / m as f64;
    let log_a = -(n as f64).ln();
    let log_b = -(m as f64).ln();
    // scaled[i][j] = -lambda * M[i][j] is the log kernel.
    let scaled = costs.entries().mapv(|c| -config.lambda * c);
    let mut phi = Array1::zeros(n);
    let mut psi = Array1::zeros(m);
    let mut col_lse = Array1::zeros(m);
    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    while iterations < config.max_iterations {
        iterations += 1;
        for i in 0..n {
            let lse = logsumexp(m, |j| psi[j] + scaled[[i, j]]);
            phi[i] = log_a - lse;
        }
        for j in 0..m {
            let lse = logsumexp(n, |i| phi[i] + scaled[[i, j]]);
            col_lse[j] = lse;
            psi[j] = log_b - lse;
        }
        violation = 0.0f64;
        for i in 0..n {
            let row_sum = (phi[i] + logsumexp(m, |j| psi[j] + scaled[[i, j]])).exp();
            violation = violation.max((row_sum - a).abs());
        }
        for j in 0..m {
            let col_sum = (psi[j] + col_lse[j]).exp();
            violation = violation.max((col_sum - b).abs());
        }
        if violation <= config.tolerance {
            break;
        }
    }
    let mut entries = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            entries[[i, j]] = (phi[i] + psi[j] + scaled[[i, j]]).exp();
        }
    }
    // Same feasibility projection as the direct solver; see the note there.
    project_to_polytope(&mut entries, a, b);
    let violation = violation.max(uniform_marginal_violation(&entries));
    Ok(TransportPlan {
        entries,
        iterations,
        marginal_violation: violation,
    })
}

fn logsumexp(len: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for i in 0..len {
        max = max.max(term(i));
    }
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = (0..len).map(|i| (term(i) - max).exp()).sum();
    max + sum.ln()
}

/// Graph Wasserstein distance between two embedded graphs: the linear cost of
/// the entropic plan on their squared-Euclidean cost matrix.
///
/// The solve runs in a canonical orientation chosen from M and its transpose.
/// The choice flips under transposition and is blind to row and column
/// order, so swapping the arguments reruns the identical iteration (the
/// distance is bitwise-equal), and permuting either node set replays the
/// same sweeps up to roundoff even when the run stops before convergence.
pub fn gwd(
    left: &EmbeddingMatrix,
    right: &EmbeddingMatrix,
    config: &SinkhornConfig,
) -> Result<(f64, TransportPlan), TransportError> {
    let costs = cost_matrix(left, right)?;
    if !solve_transposed(costs.entries()) {
        let plan = sinkhorn(&costs, config)?;
        let distance = plan.cost(&costs);
        return Ok((distance, plan));
    }
    let flipped = CostMatrix::from_entries(costs.entries().t().to_owned())?;
    let plan = sinkhorn(&flipped, config)?;
    let distance = plan.cost(&flipped);
    let entries = plan.entries().t().to_owned();
    Ok((
        distance,
        TransportPlan {
            entries,
            iterations: plan.iterations(),
            marginal_violation: plan.marginal_violation(),
        },
    ))
}

/// True when the canonical orientation of the instance is the transpose of
/// `m`. The predicate must flip under transposition (so both gwd argument
/// orders solve the same oriented instance, making the distance symmetric
/// bitwise) and must not move under row or column permutations (so shuffled
/// node order replays the same sweeps, keeping even truncated runs
/// permutation-stable instead of only converged ones).
///
/// Shapes decide first. Square instances compare sorted-row-multiset keys,
/// which are pure comparisons with no arithmetic: sorting inside each row
/// discards column order, sorting the rows discards row order, and the key
/// of the transpose plays the same role for columns. Only when both keys
/// coincide does the raw entry order break the tie; that fallback is not
/// permutation-stable, but key ties other than exact symmetry do not occur
/// for generic costs, and for a symmetric matrix both orientations are the
/// same instance anyway.
fn solve_transposed(m: &Array2<f64>) -> bool {
    if m.nrows() != m.ncols() {
        return m.nrows() > m.ncols();
    }
    match canonical_key(&m.t()).cmp(&canonical_key(&m.view())) {
        std::cmp::Ordering::Less => return true,
        std::cmp::Ordering::Greater => return false,
        std::cmp::Ordering::Equal => {}
    }
    for (a, b) in m.t().iter().zip(m.iter()) {
        if a < b {
            return true;
        }
        if a > b {
            return false;
        }
    }
    false
}

/// Row-and-column-order-free fingerprint of a matrix: every row sorted, then
/// the rows sorted lexicographically. Costs are finite and nonnegative, so
/// `total_cmp` agrees with the usual order.
fn canonical_key(m: &ndarray::ArrayView2<f64>) -> Vec<Vec<TotalF64>> {
    let mut rows: Vec<Vec<TotalF64>> = m
        .rows()
        .into_iter()
        .map(|row| {
            let mut sorted: Vec<TotalF64> = row.iter().map(|&x| TotalF64(x)).collect();
            sorted.sort_unstable();
            sorted
        })
        .collect();
    rows.sort_unstable();
    rows
}

/// f64 wrapper ordered by `total_cmp`, so keys built from it derive `Ord`.
#[derive(PartialEq)]
struct TotalF64(f64);

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Largest `rows * cols` the exact oracle accepts.
pub const EXACT_SIZE_LIMIT: usize = 400;

/// Exact (unregularized) optimal transport with uniform marginals.
///
/// Expands the instance to an lcm(n, m)-sized assignment problem, where every
/// row is replicated lcm/n times and every column lcm/m times; an optimal
/// assignment there collapses to an optimal plan with entries that are
/// integer multiples of 1/lcm. Intended as a ground-truth oracle for small
/// instances, hence the size guard.
pub fn exact_ot(costs: &CostMatrix) -> Result<(f64, TransportPlan), TransportError> {
    let (n, m) = (costs.nrows(), costs.ncols());
    if n * m > EXACT_SIZE_LIMIT {
        return Err(TransportError::ExactSizeGuard {
            rows: n,
            cols: m,
            limit: EXACT_SIZE_LIMIT,
        });
    }
    let l = lcm(n, m);
    let row_rep = l / n;
    let col_rep = l / m;
    let expanded = Array2::from_shape_fn((l, l), |(r, c)| costs.entries()[[r / row_rep, c / col_rep]]);
    let (_, col_of_row) = solve_assignment(&expanded);
    let mut counts = vec![vec![0u64; m]; n];
    for (r, &c) in col_of_row.iter().enumerate() {
        counts[r / row_rep][c / col_rep] += 1;
    }
    let scale = l as f64;
    let mut entries = Array2::zeros((n, m));
    let mut cost = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            let mass = count as f64 / scale;
            entries[[i, j]] = mass;
            cost += mass * costs.entries()[[i, j]];
        }
    }
    let violation = uniform_marginal_violation(&entries);
    Ok((
        cost,
        TransportPlan {
            entries,
            iterations: 0,
            marginal_violation: violation,
        },
    ))
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Gradient of `<T, M(Xv, Xw)>` with respect to both embedding sets, holding
/// the plan fixed:
///
/// `d/dxv_i = 2 (rowmass_i xv_i - sum_j T_ij xw_j)` and symmetrically for xw.
pub fn gwd_gradient(
    left: &EmbeddingMatrix,
    right: &EmbeddingMatrix,
    plan: &TransportPlan,
) -> Result<(Array2<f64>, Array2<f64>), TransportError> {
    if left.dim() != right.dim() {
        return Err(TransportError::DimensionMismatch {
            left: left.dim(),
            right: right.dim(),
        });
    }
    let t = plan.entries();
    if t.nrows() != left.node_count() || t.ncols() != right.node_count() {
        return Err(TransportError::PlanShapeMismatch {
            plan_rows: t.nrows(),
            plan_cols: t.ncols(),
            rows: left.node_count(),
            cols: right.node_count(),
        });
    }
    let row_mass = t.sum_axis(ndarray::Axis(1));
    let col_mass = t.sum_axis(ndarray::Axis(0));
    let t_right = t.dot(right.rows());
    let t_left = t.t().dot(left.rows());
    let mut grad_left = Array2::zeros(left.rows().raw_dim());
    for i in 0..left.node_count() {
        for d in 0..left.dim() {
            grad_left[[i, d]] = 2.0 * (row_mass[i] * left.rows()[[i, d]] - t_right[[i, d]]);
        }
    }
    let mut grad_right = Array2::zeros(right.rows().raw_dim());
    for j in 0..right.node_count() {
        for d in 0..right.dim() {
            grad_right[[j, d]] = 2.0 * (col_mass[j] * right.rows()[[j, d]] - t_left[[j, d]]);
        }
    }
    Ok((grad_left, grad_right))
}
