//! Dense two-phase simplex for small linear programs
//! `max c·x  s.t.  rows,  x ≥ 0`.
//!
//! Pivot columns follow Dantzig's rule and fall back to Bland's rule after a
//! run of degenerate pivots. Ties in the ratio test go to the largest pivot
//! magnitude.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> LinearProgram {
        LinearProgram { num_vars, constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::Invalid(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars
            )));
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite constraint data".into()));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    /// Maximizes `objective · x`.
    pub fn maximize(&self, objective: &[f64]) -> Result<LpOutcome> {
        if objective.len() != self.num_vars {
            return Err(Error::Invalid("objective length does not match variables".into()));
        }
        Tableau::build(self).solve(objective)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// First artificial column; columns `>= art_start` are artificial.
    art_start: usize,
    num_cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        // slack/surplus per inequality, artificial per Ge/Eq row
        let mut num_slack = 0;
        let mut num_art = 0;
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs)
                }
            })
            .collect();
        for (_, rel, _) in &normalized {
            match rel {
                Relation::Le => num_slack += 1,
                Relation::Ge => {
                    num_slack += 1;
                    num_art += 1
                }
                Relation::Eq => num_art += 1,
            }
        }
        let art_start = n + num_slack;
        let num_cols = art_start + num_art;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (n, art_start);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![0.0; num_cols + 1];
            row[..n].copy_from_slice(&coeffs);
            row[num_cols] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, num_vars: n, art_start, num_cols }
    }

    /// Reduced-cost row for maximizing `cost · x` under the current basis.
    fn objective_row(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj = vec![0.0; self.num_cols + 1];
        for (j, c) in cost.iter().enumerate() {
            obj[j] = -c;
        }
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(row) {
                    *o += cb * v;
                }
            }
        }
        obj
    }

    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
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
        let f = obj[c];
        if f != 0.0 {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on `obj` over columns `< allowed`.
    /// Returns `false` when the objective is unbounded.
    fn iterate(&mut self, obj: &mut [f64], allowed: usize) -> Result<bool> {
        let rhs = self.num_cols;
        let max_iter = 50 * (self.num_cols + self.rows.len()) + 1000;
        let mut degenerate = 0;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -TOL;
            for (j, &v) in obj[..allowed].iter().enumerate() {
                if v < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = v;
                }
            }
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > TOL {
                    let ratio = row[rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr, la)) => {
                            if ratio < lr - TOL {
                                true
                            } else if ratio <= lr + TOL {
                                if bland {
                                    self.basis[i] < self.basis[li]
                                } else {
                                    a > la
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some((i, ratio, a));
                    }
                }
            }
            let Some((r, ratio, _)) = leave else {
                return Ok(false);
            };
            if ratio.abs() <= TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(obj, r, c);
        }
        Err(Error::Numeric("simplex iteration limit reached".into()))
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpOutcome> {
        let rhs = self.num_cols;
        if self.art_start < self.num_cols {
            let mut phase1_cost = vec![0.0; self.num_cols];
            for c in phase1_cost[self.art_start..].iter_mut() {
                *c = -1.0;
            }
            let mut obj = self.objective_row(&phase1_cost);
            if !self.iterate(&mut obj, self.num_cols)? {
                return Err(Error::Numeric("phase one reported unbounded".into()));
            }
            let scale = 1.0 + self.rows.iter().map(|r| r[rhs].abs()).fold(0.0, f64::max);
            if obj[rhs] < -1e-7 * scale {
                return Ok(LpOutcome::Infeasible);
            }
            // Drive remaining artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.art_start {
                    let col = (0..self.art_start)
                        .filter(|&j| self.rows[i][j].abs() > TOL)
                        .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
                    match col {
                        Some(j) => self.pivot(&mut obj, i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![0.0; self.num_cols];
        cost[..self.num_vars].copy_from_slice(objective);
        let mut obj = self.objective_row(&cost);
        if !self.iterate(&mut obj, self.art_start)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; self.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.num_vars {
                x[b] = row[rhs].max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}
