//! Minimum-cost perfect assignment on a square cost matrix via shortest
//! augmenting paths with dual potentials (Jonker-Volgenant style, O(n^3)).
//! Backs the exact transport oracle.

use ndarray::Array2;

/// Solves the square assignment problem. Returns the total cost and, for each
/// row, the column assigned to it.
///
/// Panics if the matrix is not square, is empty, or contains a non-finite
/// entry; callers are expected to have validated their costs.
pub fn solve_assignment(cost: &Array2<f64>) -> (f64, Vec<usize>) {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square matrix");
    assert!(n > 0, "assignment needs at least one row");
    assert!(
        cost.iter().all(|v| v.is_finite()),
        "assignment needs finite costs"
    );

    // Column n is the virtual start of every augmenting path.
    let mut row_potential = vec![0.0f64; n];
    let mut col_potential = vec![0.0f64; n + 1];
    let mut matched_row = vec![n; n + 1];

    for row in 0..n {
        matched_row[n] = row;
        let mut j0 = n;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut prev = vec![n; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if !used[j] {
                    let reduced = cost[[i0, j]] - row_potential[i0] - col_potential[j];
                    if reduced < min_to[j] {
                        min_to[j] = reduced;
                        prev[j] = j0;
                    }
                    if min_to[j] < delta {
                        delta = min_to[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    row_potential[matched_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == n {
                break;
            }
        }
        // Augment along the recorded path back to the virtual column.
        loop {
            let j1 = prev[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    let mut total = 0.0;
    for j in 0..n {
        let i = matched_row[j];
        col_of_row[i] = j;
        total += cost[[i, j]];
    }
    (total, col_of_row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn brute_force(cost: &Array2<f64>) -> f64 {
        fn recurse(cost: &Array2<f64>, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
            let n = cost.nrows();
            if row == n {
                if acc < *best {
                    *best = acc;
                }
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    recurse(cost, row + 1, used, acc + cost[[row, j]], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        recurse(cost, 0, &mut vec![false; cost.ncols()], 0.0, &mut best);
        best
    }

    #[test]
    fn one_by_one() {
        let (cost, cols) = solve_assignment(&ndarray::array![[3.5]]);
        assert_eq!(cost, 3.5);
        assert_eq!(cols, vec![0]);
    }

    #[test]
    fn picks_off_diagonal_when_cheaper() {
        let (cost, cols) = solve_assignment(&ndarray::array![[10.0, 1.0], [1.0, 10.0]]);
        assert_eq!(cost, 2.0);
        assert_eq!(cols, vec![1, 0]);
    }

    #[test]
    fn assignment_is_a_permutation() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let cost = Array2::from_shape_fn((12, 12), |_| rng.random::<f64>());
        let (_, cols) = solve_assignment(&cost);
        let mut seen = [false; 12];
        for &j in &cols {
            assert!(!seen[j]);
            seen[j] = true;
        }
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for case in 0..200 {
            let n = 1 + (case % 7);
            let cost = Array2::from_shape_fn((n, n), |_| {
                if rng.random::<f64>() < 0.2 {
                    // Exact ties exercise degenerate pivots.
                    1.0
                } else {
                    (rng.random::<f64>() * 8.0).round() / 4.0
                }
            });
            let (fast, cols) = solve_assignment(&cost);
            let direct: f64 = cols.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
            let slow = brute_force(&cost);
            assert!(
                (fast - slow).abs() <= 1e-12 && (direct - slow).abs() <= 1e-12,
                "case {case}: fast={fast} direct={direct} slow={slow}"
            );
        }
    }

    #[test]
    fn handles_negative_costs() {
        let cost = ndarray::array![[-5.0, 0.0], [0.0, -7.0]];
        let (total, cols) = solve_assignment(&cost);
        assert_eq!(total, -12.0);
        assert_eq!(cols, vec![0, 1]);
    }
}
