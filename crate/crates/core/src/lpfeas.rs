//! Linear programs over the probability simplex.
//!
//! Variables are world probabilities `p_w >= 0` with `sum p_w = 1`; callers add
//! linear constraints over them. Solved with a dense two-phase simplex using
//! Bland's rule, which cannot cycle.

use thiserror::Error;

/// Phase-one residual at or below which a problem is feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Tolerance for comparisons made by callers and for certificate checks.
pub const COMPARISON_TOLERANCE: f64 = 1e-7;

const PIVOT_TOLERANCE: f64 = 1e-11;
const REDUCED_COST_TOLERANCE: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Ge => Relation::Le,
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Eq => "==",
            Relation::Le => "<=",
        }
    }

    /// Whether `lhs rel rhs` holds within `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Ge => lhs >= rhs - tol,
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

/// `sum coef_w * p_w  rel  bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<(usize, f64)>,
    pub relation: Relation,
    pub bound: f64,
}

impl LinearConstraint {
    pub fn new<I>(coefficients: I, relation: Relation, bound: f64) -> Self
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        LinearConstraint {
            coefficients: coefficients.into_iter().collect(),
            relation,
            bound,
        }
    }

    /// Constraint on the total probability of a set of worlds.
    pub fn on_worlds<I>(worlds: I, relation: Relation, bound: f64) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        Self::new(worlds.into_iter().map(|w| (w, 1.0)), relation, bound)
    }

    fn dense(&self, worlds: usize) -> Vec<f64> {
        let mut row = vec![0.0; worlds];
        for &(w, c) in &self.coefficients {
            row[w] += c;
        }
        row
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(w, c)| c * point[w]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    worlds: usize,
    constraints: Vec<LinearConstraint>,
}

/// An optimal vertex and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: f64,
    pub point: Vec<f64>,
}

impl FeasibilityProblem {
    pub fn new(worlds: usize, constraints: Vec<LinearConstraint>) -> Result<Self, LpError> {
        if worlds == 0 {
            return Err(LpError::InvalidProblem("no worlds".into()));
        }
        for (i, c) in constraints.iter().enumerate() {
            if !c.bound.is_finite() {
                return Err(LpError::InvalidProblem(format!(
                    "constraint {i} has a non-finite bound"
                )));
            }
            for &(w, coef) in &c.coefficients {
                if w >= worlds {
                    return Err(LpError::InvalidProblem(format!(
                        "constraint {i} references world {w} of {worlds}"
                    )));
                }
                if !coef.is_finite() {
                    return Err(LpError::InvalidProblem(format!(
                        "constraint {i} has a non-finite coefficient"
                    )));
                }
            }
        }
        Ok(FeasibilityProblem {
            worlds,
            constraints,
        })
    }

    pub fn worlds(&self) -> usize {
        self.worlds
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn feasible(&self) -> Result<bool, LpError> {
        match Tableau::build(self).phase_one() {
            Ok(_) => Ok(true),
            Err(LpError::Infeasible) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Minimum of `objective . p` over the feasible region.
    pub fn minimize(&self, objective: &[f64]) -> Result<f64, LpError> {
        Ok(self.solve(objective)?.value)
    }

    pub fn maximize(&self, objective: &[f64]) -> Result<f64, LpError> {
        let negated: Vec<f64> = objective.iter().map(|c| -c).collect();
        Ok(-self.solve(&negated)?.value)
    }

    /// Minimizes `objective . p`, returning the optimal vertex.
    pub fn solve(&self, objective: &[f64]) -> Result<Solution, LpError> {
        if objective.len() != self.worlds {
            return Err(LpError::InvalidProblem(format!(
                "objective has {} entries for {} worlds",
                objective.len(),
                self.worlds
            )));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::InvalidProblem("non-finite objective".into()));
        }
        let mut tableau = Tableau::build(self);
        tableau.phase_one()?;
        let value = tableau.phase_two(objective)?;
        let point = tableau.point();
        self.certify(&point)?;
        Ok(Solution { value, point })
    }

    fn certify(&self, point: &[f64]) -> Result<(), LpError> {
        let total: f64 = point.iter().sum();
        if point.iter().any(|&p| p < -COMPARISON_TOLERANCE)
            || (total - 1.0).abs() > COMPARISON_TOLERANCE
        {
            return Err(LpError::NumericalFailure(
                "solution is not a probability vector".into(),
            ));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c
                .relation
                .holds(c.evaluate(point), c.bound, COMPARISON_TOLERANCE)
            {
                return Err(LpError::NumericalFailure(format!(
                    "solution violates constraint {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Dense simplex tableau in equality form `A x = b`, `x >= 0`, `b >= 0`.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    structural: usize,
    artificial_start: usize,
    columns: usize,
}

impl Tableau {
    fn build(problem: &FeasibilityProblem) -> Self {
        let w = problem.worlds;
        let mut specs: Vec<(Vec<f64>, Relation, f64)> =
            Vec::with_capacity(problem.constraints.len() + 1);
        specs.push((vec![1.0; w], Relation::Eq, 1.0));
        for c in &problem.constraints {
            let mut row = c.dense(w);
            let (mut rel, mut b) = (c.relation, c.bound);
            if b < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                rel = rel.flipped();
                b = -b;
            }
            specs.push((row, rel, b));
        }

        let slack_count = specs.iter().filter(|s| s.1 != Relation::Eq).count();
        let artificial_count = specs.iter().filter(|s| s.1 != Relation::Le).count();
        let artificial_start = w + slack_count;
        let columns = artificial_start + artificial_count;

        let mut rows = Vec::with_capacity(specs.len());
        let mut rhs = Vec::with_capacity(specs.len());
        let mut basis = Vec::with_capacity(specs.len());
        let (mut next_slack, mut next_art) = (w, artificial_start);
        for (coefs, rel, b) in specs {
            let mut row = coefs;
            row.resize(columns, 0.0);
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        Tableau {
            rows,
            rhs,
            basis,
            structural: w,
            artificial_start,
            columns,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                self.rhs[i] -= factor * pivot_rhs;
                if self.rhs[i].abs() < 1e-15 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost . x` over columns below `allowed`, returning the optimum.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<f64, LpError> {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(r, &b)| cost[b] * r[j])
                        .sum::<f64>();
                if reduced < -REDUCED_COST_TOLERANCE {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(self
                    .rhs
                    .iter()
                    .zip(&self.basis)
                    .map(|(b, &j)| cost[j] * b)
                    .sum());
            };

            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a <= PIVOT_TOLERANCE {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((best, r)) => {
                        if ratio < r - 1e-12
                            || ((ratio - r).abs() <= 1e-12 && self.basis[i] < self.basis[best])
                        {
                            Some((i, ratio))
                        } else {
                            Some((best, r))
                        }
                    }
                };
            }
            let Some((row, _)) = leaving else {
                return Err(LpError::NumericalFailure(
                    "unbounded direction on a bounded region".into(),
                ));
            };
            self.pivot(row, col);
        }
        Err(LpError::NumericalFailure("pivot limit reached".into()))
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        let mut cost = vec![0.0; self.columns];
        cost[self.artificial_start..]
            .iter_mut()
            .for_each(|c| *c = 1.0);
        let residual = self.optimize(&cost, self.columns)?;
        if residual > COMPARISON_TOLERANCE {
            return Err(LpError::Infeasible);
        }
        if residual > FEASIBILITY_TOLERANCE {
            return Err(LpError::NumericalFailure(format!(
                "phase-one residual {residual:e} is neither clearly zero nor clearly positive"
            )));
        }
        // Drive remaining artificial variables out of the basis; rows where
        // that is impossible are linearly dependent and are dropped.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                let col = (0..self.artificial_start)
                    .filter(|j| !self.basis.contains(j))
                    .max_by(|&a, &b| {
                        self.rows[i][a]
                            .abs()
                            .partial_cmp(&self.rows[i][b].abs())
                            .unwrap()
                    })
                    .filter(|&j| self.rows[i][j].abs() > 1e-9);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        Ok(())
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<f64, LpError> {
        let mut cost = vec![0.0; self.columns];
        cost[..self.structural].copy_from_slice(objective);
        self.optimize(&cost, self.artificial_start)
    }

    fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.structural];
        for (&b, &v) in self.basis.iter().zip(&self.rhs) {
            if b < self.structural {
                x[b] = v;
            }
        }
        x
    }
}
