//! Rectangular linear assignment (Hungarian algorithm with potentials).

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::RMat;

/// Assigns every row of `cost` to a distinct column minimizing the total cost.
///
/// Requires `rows ≤ cols`. Returns the chosen column per row.
pub fn min_cost_assignment(cost: &RMat) -> Vec<usize> {
    let (n, m) = cost.shape();
    assert!(n <= m, "more rows than columns");
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row (1-based) matched to column j; 0 = free.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

pub fn assignment_cost(cost: &RMat, choice: &[usize]) -> f64 {
    choice.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(cost: &RMat) -> f64 {
        fn rec(cost: &RMat, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.nrows() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost.ncols() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[(row, j)] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.ncols()])
    }

    #[test]
    fn hand_example() {
        let cost = RMat::from_row_slice(2, 3, &[1.0, 0.0, 3.0, 0.0, 2.0, 5.0]);
        assert_eq!(min_cost_assignment(&cost), vec![1, 0]);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(n..=6);
            let cost = RMat::from_fn(n, m, |_, _| rng.gen_range(-5.0..5.0));
            let choice = min_cost_assignment(&cost);
            let mut sorted = choice.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), n);
            assert!((assignment_cost(&cost, &choice) - brute(&cost)).abs() < 1e-12);
        }
    }
}
