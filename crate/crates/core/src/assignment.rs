//! Dense Hungarian solver for rectangular maximum-weight assignment.
//!
//! Weights are integers so that optimal totals are exact.

/// Returns, for each row, the column assigned to it (or `None` when the row
/// is matched to padding), maximizing the total weight. Non-negative weights
/// are assumed; the matrix is padded to a square with zeros.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    debug_assert!(weights.iter().all(|r| r.len() == cols));
    let n = rows.max(cols);
    if n == 0 {
        return vec![None; rows];
    }
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0);
    // Minimization over cost = max_w - weight; padding cells cost max_w.
    let cost = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            max_w - weights[i][j]
        } else {
            max_w
        }
    };

    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
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

    let mut assignment = vec![None; rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(w: &[Vec<i64>], a: &[Option<usize>]) -> i64 {
        a.iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| w[i][j]))
            .sum()
    }

    #[test]
    fn square() {
        let w = vec![vec![1, 5, 0], vec![4, 2, 0], vec![0, 0, 3]];
        let a = max_weight_assignment(&w);
        assert_eq!(total(&w, &a), 12);
    }

    #[test]
    fn rectangular_both_ways() {
        let w = vec![vec![3, 1, 4, 1]];
        assert_eq!(max_weight_assignment(&w), vec![Some(2)]);
        let w = vec![vec![3], vec![1], vec![4]];
        let a = max_weight_assignment(&w);
        assert_eq!(a, vec![None, None, Some(0)]);
    }

    #[test]
    fn empty() {
        assert!(max_weight_assignment(&[]).is_empty());
        assert_eq!(max_weight_assignment(&[vec![], vec![]]), vec![None, None]);
    }
}
