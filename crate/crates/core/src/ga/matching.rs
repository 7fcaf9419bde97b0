use crate::model::Schedule;

/// `distances[i][j]` = Hamming distance between parent `i` and offspring `j`.
pub fn calc_crowding_distances(parents: &[Schedule], offspring: &[Schedule]) -> Vec<Vec<u64>> {
    assert_eq!(
        parents.len(),
        offspring.len(),
        "parent and offspring counts differ"
    );
    parents
        .iter()
        .map(|p| offspring.iter().map(|c| p.hamming(c) as u64).collect())
        .collect()
}

pub fn assignment_cost(costs: &[Vec<u64>], perm: &[usize]) -> u64 {
    perm.iter().enumerate().map(|(i, &j)| costs[i][j]).sum()
}

/// Shortest augmenting path Hungarian algorithm; returns the row assignment
/// and the dual potentials `(u, v)` with `c[i][j] - u[i] - v[j] >= 0`.
fn hungarian(costs: &[Vec<u64>]) -> (Vec<usize>, Vec<i64>, Vec<i64>) {
    let n = costs.len();
    let inf = i64::MAX / 4;
    // 1-based; index 0 is the virtual column
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
                let cur = costs[i0 - 1][j - 1] as i64 - u[i0] - v[j];
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
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    (assignment, u[1..].to_vec(), v[1..].to_vec())
}

/// Minimum-cost perfect matching of rows to columns; among optimal matchings
/// the lexicographically smallest permutation is returned.
///
/// Every optimal assignment uses only edges with zero reduced cost under the
/// optimal duals, so the tie-break is a lexicographically-first perfect
/// matching in that tight subgraph, built row by row with alternating paths.
pub fn find_matchings(costs: &[Vec<u64>]) -> Vec<usize> {
    let n = costs.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(
        costs.iter().all(|r| r.len() == n),
        "cost matrix must be square"
    );
    let (mut row_to_col, u, v) = hungarian(costs);
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    let reduced = costs[i][j] as i64 - u[i] - v[j];
                    debug_assert!(reduced >= 0);
                    reduced == 0
                })
                .collect()
        })
        .collect();
    let mut col_to_row = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    let mut locked_col = vec![false; n];

    for i in 0..n {
        for &j in &tight[i] {
            if locked_col[j] {
                continue;
            }
            if row_to_col[i] == j {
                break;
            }
            // re-route the row holding j onto i's current column
            let freed = row_to_col[i];
            let holder = col_to_row[j];
            let mut visited = vec![false; n];
            visited[j] = true;
            let mut path = Vec::new();
            if augment(
                holder,
                freed,
                &tight,
                &col_to_row,
                &locked_col,
                &mut visited,
                &mut path,
            ) {
                // path holds (row, new column) pairs
                for &(r, c) in &path {
                    row_to_col[r] = c;
                    col_to_row[c] = r;
                }
                row_to_col[i] = j;
                col_to_row[j] = i;
                break;
            }
        }
        locked_col[row_to_col[i]] = true;
    }
    row_to_col
}

fn augment(
    row: usize,
    target: usize,
    tight: &[Vec<usize>],
    col_to_row: &[usize],
    locked_col: &[bool],
    visited: &mut [bool],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    for &c in &tight[row] {
        if locked_col[c] || visited[c] {
            continue;
        }
        visited[c] = true;
        if c == target
            || augment(
                col_to_row[c],
                target,
                tight,
                col_to_row,
                locked_col,
                visited,
                path,
            )
        {
            path.push((row, c));
            return true;
        }
    }
    false
}
