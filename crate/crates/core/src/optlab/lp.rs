//! Dense two-phase simplex with Bland's rule.
//!
//! The tableau carries one artificial column per row for the whole solve, so
//! `B⁻¹` can be read off those columns at the end and the dual vector comes
//! for free. Sizes here are desk scale (tens of rows, up to a few hundred
//! thousand columns), which a dense tableau handles fine.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rel: Relation, rhs: f64) -> Self {
        Self { coeffs, rel, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { sense, objective, constraints: Vec::new(), bounds: vec![VarBound::NonNegative; n] }
    }

    pub fn with_bounds(mut self, bounds: Vec<VarBound>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn push(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, rel, rhs));
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible (phase one residual {0:.3e})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

/// Optimal primal/dual pair.
///
/// `dual[i]` is the multiplier of constraint `i` with `value = Σ dual[i] rhs[i]`
/// at optimality; it is the derivative of the optimal value in `rhs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    /// `|cᵀx − bᵀy|`.
    pub gap: f64,
    /// Max of primal infeasibility, dual infeasibility, and complementary
    /// slackness violation.
    pub slackness_residual: f64,
    pub pivots: usize,
}

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

struct Tableau {
    rows: Vec<Vec<f64>>, // m rows, ncols + 1 (rhs last)
    basis: Vec<usize>,
    ncols: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (rj, a) in r.iter_mut().zip(row.iter()) {
                    *rj -= cb * a;
                }
            }
        }
        r
    }

    /// Runs Bland-rule simplex on `cost` over columns `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpError> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::IterationLimit(MAX_PIVOTS));
            }
            let r = self.reduced_costs(cost);
            let scale = 1.0 + cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let entering = (0..allowed).find(|&j| r[j] < -1e-10 * scale && !self.basis.contains(&j));
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            // Relative pivot threshold; tiny pivots amplify rounding into cycling.
            let col_max = self.rows.iter().fold(0.0f64, |m, row| m.max(row[c].abs()));
            let eps = PIVOT_EPS.max(1e-9 * col_max);
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > eps {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Err(LpError::Unbounded),
                Some((row, _)) => self.pivot(row, c),
            }
        }
    }
}

/// Solves a linear program and returns an optimal primal/dual pair.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    let n = problem.num_vars();
    if problem.bounds.len() != n {
        return Err(LpError::Malformed(format!("{} bounds for {} variables", problem.bounds.len(), n)));
    }
    for (k, c) in problem.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::Malformed(format!("constraint {k} has {} coefficients, expected {n}", c.coeffs.len())));
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed(format!("constraint {k} has non-finite data")));
        }
    }
    let m = problem.constraints.len();
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    // Column layout: structural (free vars split in two), slack/surplus, artificials.
    let mut col_of_var = Vec::with_capacity(n);
    let mut nstruct = 0;
    for b in &problem.bounds {
        col_of_var.push(nstruct);
        nstruct += match b {
            VarBound::NonNegative => 1,
            VarBound::Free => 2,
        };
    }
    let nslack = problem.constraints.iter().filter(|c| c.rel != Relation::Eq).count();
    let art0 = nstruct + nslack;
    let ncols = art0 + m;

    let mut rows = vec![vec![0.0; ncols + 1]; m];
    let mut flip = vec![1.0; m];
    let mut next_slack = nstruct;
    for (i, con) in problem.constraints.iter().enumerate() {
        let row = &mut rows[i];
        for (v, &a) in con.coeffs.iter().enumerate() {
            let c = col_of_var[v];
            row[c] = a;
            if problem.bounds[v] == VarBound::Free {
                row[c + 1] = -a;
            }
        }
        match con.rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
            }
            Relation::Eq => {}
        }
        row[ncols] = con.rhs;
        if con.rhs < 0.0 {
            flip[i] = -1.0;
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[art0 + i] = 1.0;
    }

    let mut tab = Tableau { rows, basis: (art0..art0 + m).collect(), ncols, pivots: 0 };

    // Phase one.
    let mut phase1 = vec![0.0; ncols];
    for c in phase1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    tab.optimize(&phase1, art0)?;
    let infeas: f64 = (0..m).filter(|&i| tab.basis[i] >= art0).map(|i| tab.rhs(i).abs()).sum();
    let bscale = 1.0 + problem.constraints.iter().fold(0.0f64, |s, c| s.max(c.rhs.abs()));
    if infeas > 1e-9 * bscale {
        return Err(LpError::Infeasible(infeas));
    }
    for i in 0..m {
        if tab.basis[i] >= art0 {
            if let Some(c) = (0..art0).find(|&j| tab.rows[i][j].abs() > 1e-9) {
                tab.pivot(i, c);
            }
        }
    }

    // Phase two.
    let mut cost = vec![0.0; ncols];
    for (v, &cv) in problem.objective.iter().enumerate() {
        let c = col_of_var[v];
        cost[c] = sign * cv;
        if problem.bounds[v] == VarBound::Free {
            cost[c + 1] = -sign * cv;
        }
    }
    tab.optimize(&cost, art0)?;

    let mut xcol = vec![0.0; ncols];
    for i in 0..m {
        xcol[tab.basis[i]] = tab.rhs(i);
    }
    let primal: Vec<f64> = (0..n)
        .map(|v| {
            let c = col_of_var[v];
            match problem.bounds[v] {
                VarBound::NonNegative => xcol[c],
                VarBound::Free => xcol[c] - xcol[c + 1],
            }
        })
        .collect();

    // y_trans = c_Bᵀ B⁻¹ with B⁻¹ in the artificial columns.
    let dual: Vec<f64> = (0..m)
        .map(|i| {
            let y: f64 = (0..m).map(|l| cost[tab.basis[l]] * tab.rows[l][art0 + i]).sum();
            sign * flip[i] * y
        })
        .collect();

    let value = dot(&problem.objective, &primal);
    let dual_value: f64 = problem.constraints.iter().zip(&dual).map(|(c, y)| c.rhs * y).sum();
    let gap = (value - dual_value).abs();
    let slackness_residual = certificate_residual(problem, &primal, &dual);
    Ok(LpSolution { value, primal, dual, gap, slackness_residual, pivots: tab.pivots })
}

/// Max violation of primal feasibility, dual feasibility, and complementary
/// slackness for a claimed optimal pair.
pub fn certificate_residual(problem: &LpProblem, x: &[f64], y: &[f64]) -> f64 {
    let s = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut worst = 0.0f64;
    for (con, &yi) in problem.constraints.iter().zip(y) {
        let ax = dot(&con.coeffs, x);
        let slack = ax - con.rhs;
        let (viol, sign_viol) = match con.rel {
            Relation::Le => (slack.max(0.0), (s * yi).max(0.0)),
            Relation::Ge => ((-slack).max(0.0), (-s * yi).max(0.0)),
            Relation::Eq => (slack.abs(), 0.0),
        };
        worst = worst.max(viol).max(sign_viol).max((yi * slack).abs());
    }
    for (v, b) in problem.bounds.iter().enumerate() {
        let col: f64 = problem.constraints.iter().zip(y).map(|(c, yi)| c.coeffs[v] * yi).sum();
        let d = s * (problem.objective[v] - col);
        match b {
            VarBound::NonNegative => {
                worst = worst.max((-d).max(0.0)).max((-x[v]).max(0.0)).max((x[v] * d).abs());
            }
            VarBound::Free => worst = worst.max(d.abs()),
        }
    }
    worst
}
