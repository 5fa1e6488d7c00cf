//! Transportation simplex (the network simplex method on a complete bipartite
//! graph) with `u`/`v` potentials as the dual certificate.

use super::lp::LpError;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub value: f64,
    /// Nonzero shipments `(source, sink, amount)`.
    pub flow: Vec<(usize, usize, f64)>,
    /// Source potentials.
    pub u: Vec<f64>,
    /// Sink potentials; `u_i + v_j ≤ cost(i, j)` at optimality.
    pub v: Vec<f64>,
    /// `|Σ cost·flow − (Σ supply·u + Σ demand·v)|`.
    pub gap: f64,
    /// Largest violation of `u_i + v_j ≤ cost(i, j)`.
    pub dual_violation: f64,
}

const MAX_ITERS: usize = 100_000;

/// Minimizes `Σ cost(i,j) f_ij` subject to row sums `supply` and column sums
/// `demand`, `f ≥ 0`. Totals must agree to `1e-9` relative.
pub fn solve_transportation<C>(supply: &[f64], demand: &[f64], cost: C) -> Result<TransportSolution, LpError>
where
    C: Fn(usize, usize) -> f64,
{
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(LpError::Malformed("empty transportation problem".into()));
    }
    if supply.iter().chain(demand).any(|&s| !(s >= 0.0 && s.is_finite())) {
        return Err(LpError::Malformed("supplies and demands must be finite and nonnegative".into()));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * (1.0 + total_s.abs()) {
        return Err(LpError::Infeasible((total_s - total_d).abs()));
    }
    let c: Vec<Vec<f64>> = (0..m).map(|i| (0..n).map(|j| cost(i, j)).collect()).collect();

    // Northwest corner: exactly m + n − 1 basic cells, some possibly zero.
    let mut flow = vec![vec![0.0; n]; m];
    let mut basic = vec![vec![false; n]; m];
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let q = s[i].min(d[j]);
        flow[i][j] = q;
        basic[i][j] = true;
        s[i] -= q;
        d[j] -= q;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut iters = 0;
    let (u, v) = loop {
        let (u, v) = potentials(&basic, &c);
        // Most negative reduced cost; ties to the first cell in row-major order.
        let mut enter: Option<(usize, usize, f64)> = None;
        for a in 0..m {
            for b in 0..n {
                if basic[a][b] {
                    continue;
                }
                let r = c[a][b] - u[a] - v[b];
                if r < -1e-12 * (1.0 + c[a][b].abs()) && enter.map_or(true, |(_, _, br)| r < br) {
                    enter = Some((a, b, r));
                }
            }
        }
        let Some((ea, eb, _)) = enter else { break (u, v) };
        iters += 1;
        if iters > MAX_ITERS {
            return Err(LpError::IterationLimit(MAX_ITERS));
        }
        let cycle = tree_path(&basic, ea, eb);
        // cycle alternates: entering (+), then cells along the path starting with (−).
        let mut theta = f64::INFINITY;
        let mut leave = None;
        for (k, &(a, b)) in cycle.iter().enumerate() {
            if k % 2 == 1 && flow[a][b] < theta {
                theta = flow[a][b];
                leave = Some((a, b));
            }
        }
        let (la, lb) = leave.expect("cycle has a minus cell");
        for (k, &(a, b)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                flow[a][b] += theta;
            } else {
                flow[a][b] -= theta;
            }
        }
        basic[ea][eb] = true;
        basic[la][lb] = false;
        flow[la][lb] = 0.0;
    };

    let mut value = 0.0;
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..n {
            if flow[a][b] > 0.0 {
                value += c[a][b] * flow[a][b];
                out.push((a, b, flow[a][b]));
            }
        }
    }
    let dual_value: f64 = supply.iter().zip(&u).map(|(s, x)| s * x).sum::<f64>() + demand.iter().zip(&v).map(|(d, y)| d * y).sum::<f64>();
    let mut dual_violation = 0.0f64;
    for a in 0..m {
        for b in 0..n {
            dual_violation = dual_violation.max(u[a] + v[b] - c[a][b]);
        }
    }
    Ok(TransportSolution { value, flow: out, u, v, gap: (value - dual_value).abs(), dual_violation })
}

/// Solves `u_i + v_j = c_ij` on the basis tree with `u_0 = 0`.
fn potentials(basic: &[Vec<bool>], c: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (basic.len(), basic[0].len());
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut stack = vec![(true, 0usize)];
    while let Some((is_row, k)) = stack.pop() {
        if is_row {
            for b in 0..n {
                if basic[k][b] && v[b].is_nan() {
                    v[b] = c[k][b] - u[k];
                    stack.push((false, b));
                }
            }
        } else {
            for a in 0..m {
                if basic[a][k] && u[a].is_nan() {
                    u[a] = c[a][k] - v[k];
                    stack.push((true, a));
                }
            }
        }
    }
    // The basis is a spanning tree, so every node is reached; NaN would only
    // survive a broken basis.
    for x in u.iter_mut().chain(v.iter_mut()) {
        if x.is_nan() {
            *x = 0.0;
        }
    }
    (u, v)
}

/// Cells of the unique cycle closed by adding `(ea, eb)` to the basis tree,
/// starting with the entering cell.
fn tree_path(basic: &[Vec<bool>], ea: usize, eb: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    // Nodes: rows 0..m, columns m..m+n. BFS from column eb to row ea.
    let total = m + n;
    let mut parent = vec![usize::MAX; total];
    let start = m + eb;
    parent[start] = start;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == ea {
            break;
        }
        if node < m {
            for b in 0..n {
                if basic[node][b] && parent[m + b] == usize::MAX {
                    parent[m + b] = node;
                    queue.push_back(m + b);
                }
            }
        } else {
            let b = node - m;
            for a in 0..m {
                if basic[a][b] && parent[a] == usize::MAX {
                    parent[a] = node;
                    queue.push_back(a);
                }
            }
        }
    }
    let mut cells = vec![(ea, eb)];
    let mut node = ea;
    while node != start {
        let p = parent[node];
        let cell = if node < m { (node, p - m) } else { (p, node - m) };
        cells.push(cell);
        node = p;
    }
    cells
}
