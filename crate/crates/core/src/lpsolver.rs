//! Dense two-phase primal simplex with Bland's rule.
//!
//! Problems are small (a few hundred rows at most), so the solver keeps a full
//! tableau and favors determinism over speed. Every optimal solve reports
//! duals for the constraint rows and reduced costs for the variables, enough
//! to certify optimality through [`LpSolution::check_certificate`].

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `opt c·x` subject to rows `a_i·x (sense) b_i` and `lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `objective.len()` variables, each bounded to `[0, ∞)`.
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            direction,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> usize {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    fn validate(&self) -> Result<()> {
        let n = self.var_count();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Precondition("bound vectors do not match variable count".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("objective has non-finite coefficients".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Precondition(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::Precondition(format!("row {i} has non-finite entries")));
            }
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Precondition(format!("variable {j} has bounds [{l}, {u}]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// One dual per constraint row, in the sign convention of the stated
    /// direction (for maximization, `≤` rows have nonnegative duals).
    pub duals: Vec<f64>,
    /// `c_j - a_j·y` for each variable.
    pub reduced_costs: Vec<f64>,
}

impl LpSolution {
    /// Value of the dual objective `b·y + Σ_j d_j x_j`; the second term
    /// collects the bound multipliers of variables sitting at a bound.
    pub fn dual_value(&self, lp: &LinearProgram) -> f64 {
        let rows: f64 = lp.constraints.iter().zip(&self.duals).map(|(r, y)| r.rhs * y).sum();
        let bounds: f64 = self
            .reduced_costs
            .iter()
            .enumerate()
            .map(|(j, d)| {
                if (self.x[j] - lp.lower[j]).abs() <= FEAS_TOL {
                    d * lp.lower[j]
                } else if (self.x[j] - lp.upper[j]).abs() <= FEAS_TOL {
                    d * lp.upper[j]
                } else {
                    0.0
                }
            })
            .sum();
        rows + bounds
    }

    /// Checks primal feasibility, dual sign conditions and strong duality.
    /// Returns the largest violation found.
    pub fn check_certificate(&self, lp: &LinearProgram) -> f64 {
        let sign = match lp.direction {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        };
        let mut worst = 0.0f64;
        for (j, &xj) in self.x.iter().enumerate() {
            worst = worst.max(lp.lower[j] - xj).max(xj - lp.upper[j]);
            let d = sign * self.reduced_costs[j];
            let at_lower = (xj - lp.lower[j]).abs() <= FEAS_TOL;
            let at_upper = (xj - lp.upper[j]).abs() <= FEAS_TOL;
            // maximize: d <= 0 at lower, d >= 0 at upper, d = 0 in between
            if !at_lower {
                worst = worst.max(-d);
            }
            if !at_upper {
                worst = worst.max(d);
            }
        }
        for (row, &y) in lp.constraints.iter().zip(&self.duals) {
            let lhs: f64 = row.coeffs.iter().zip(&self.x).map(|(a, x)| a * x).sum();
            let ys = sign * y;
            match row.sense {
                Sense::Le => {
                    worst = worst.max(lhs - row.rhs).max(-ys);
                }
                Sense::Ge => {
                    worst = worst.max(row.rhs - lhs).max(ys);
                }
                Sense::Eq => worst = worst.max((lhs - row.rhs).abs()),
            }
        }
        let gap = (self.value - self.dual_value(lp)).abs() / (1.0 + self.value.abs());
        worst.max(gap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Result<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(Error::Infeasible("linear program is infeasible".into())),
            LpOutcome::Unbounded => Err(Error::SolverFailure("linear program is unbounded".into())),
        }
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = shift + col`
    Shifted { col: usize, shift: f64 },
    /// `x = shift - col`
    Mirrored { col: usize, shift: f64 },
    /// `x = pos - neg`
    Free { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows` constraint rows followed by the objective row; the last column
    /// holds right-hand sides.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    artificial_start: usize,
    pivots: usize,
    pivot_cap: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.pivot_cap {
            return Err(Error::SolverFailure(format!(
                "simplex exceeded {} pivots",
                self.pivot_cap
            )));
        }
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f == 0.0 {
                continue;
            }
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
                if v.abs() < 1e-13 {
                    *v = 0.0;
                }
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Installs the objective row for minimizing `cost·x`.
    fn set_objective(&mut self, cost: &[f64]) {
        let mut obj = vec![0.0; self.cols + 1];
        obj[..self.cols].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (o, &v) in obj.iter_mut().zip(&self.t[i]) {
                    *o -= cb * v;
                }
            }
        }
        self.t[self.rows] = obj;
    }

    /// Runs Bland's rule minimization on the current objective row. Columns
    /// at or beyond `enter_limit` never enter.
    fn minimize(&mut self, enter_limit: usize) -> Result<bool> {
        loop {
            let obj = &self.t[self.rows];
            let Some(c) = (0..enter_limit).find(|&j| obj[j] < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - RATIO_TOL || (ratio <= br + RATIO_TOL && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, c)?;
        }
    }
}

/// Solves `lp` to optimality or reports infeasibility or unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.var_count();

    // Column layout for the standard-form variables.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        if l.is_finite() {
            maps.push(VarMap::Shifted { col: ncols, shift: l });
            if u.is_finite() {
                bound_rows.push((ncols, u - l));
            }
            ncols += 1;
        } else if u.is_finite() {
            maps.push(VarMap::Mirrored { col: ncols, shift: u });
            ncols += 1;
        } else {
            maps.push(VarMap::Free {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }
    let structural = ncols;

    // Rows in standard form: (coeffs over structural columns, sense, rhs).
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for row in &lp.constraints {
        let mut a = vec![0.0; structural];
        let mut rhs = row.rhs;
        for (j, &coef) in row.coeffs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, shift } => {
                    a[col] += coef;
                    rhs -= coef * shift;
                }
                VarMap::Mirrored { col, shift } => {
                    a[col] -= coef;
                    rhs -= coef * shift;
                }
                VarMap::Free { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        rows.push((a, row.sense, rhs));
    }
    for &(col, width) in &bound_rows {
        let mut a = vec![0.0; structural];
        a[col] = 1.0;
        rows.push((a, Sense::Le, width));
    }

    // Make every right-hand side nonnegative.
    let mut flipped = vec![false; rows.len()];
    for (i, (a, sense, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            for v in a.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            flipped[i] = true;
        }
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let artificial_count = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let artificial_start = structural + slack_count;
    let cols = artificial_start + artificial_count;

    let mut t = vec![vec![0.0; cols + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let mut identity_col = vec![0usize; m];
    let mut slack = structural;
    let mut art = artificial_start;
    for (i, (a, sense, rhs)) in rows.iter().enumerate() {
        t[i][..structural].copy_from_slice(a);
        t[i][cols] = *rhs;
        match sense {
            Sense::Le => {
                t[i][slack] = 1.0;
                basis[i] = slack;
                identity_col[i] = slack;
                slack += 1;
            }
            Sense::Ge => {
                t[i][slack] = -1.0;
                slack += 1;
                t[i][art] = 1.0;
                basis[i] = art;
                identity_col[i] = art;
                art += 1;
            }
            Sense::Eq => {
                t[i][art] = 1.0;
                basis[i] = art;
                identity_col[i] = art;
                art += 1;
            }
        }
    }
    let span = m + cols;
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        basis,
        artificial_start,
        pivots: 0,
        pivot_cap: 10 * span * span,
    };

    // Phase 1: minimize the sum of artificials.
    if artificial_count > 0 {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(artificial_start) {
            *c = 1.0;
        }
        tab.set_objective(&cost);
        tab.minimize(cols)?;
        let infeasibility = -tab.t[m][cols];
        let scale = 1.0 + rows.iter().fold(0.0f64, |s, r| s.max(r.2.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= artificial_start {
                if let Some(c) = (0..artificial_start).find(|&j| tab.t[i][j].abs() > PIVOT_TOL) {
                    tab.pivot(i, c)?;
                }
            }
        }
    }

    // Phase 2 in minimization form.
    let sign = match lp.direction {
        Direction::Maximize => -1.0,
        Direction::Minimize => 1.0,
    };
    let mut cost = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        let c = sign * lp.objective[j];
        match *map {
            VarMap::Shifted { col, .. } => cost[col] = c,
            VarMap::Mirrored { col, .. } => cost[col] = -c,
            VarMap::Free { pos, neg } => {
                cost[pos] = c;
                cost[neg] = -c;
            }
        }
    }
    tab.set_objective(&cost);
    if !tab.minimize(tab.artificial_start)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut col_value = vec![0.0; cols];
    for i in 0..m {
        col_value[tab.basis[i]] = tab.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, shift } => shift + col_value[col],
            VarMap::Mirrored { col, shift } => shift - col_value[col],
            VarMap::Free { pos, neg } => col_value[pos] - col_value[neg],
        })
        .collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // y_i = c_B · (B^{-1} e_i); the current column of the row's initial
    // identity variable is B^{-1} e_i.
    let duals: Vec<f64> = (0..lp.constraints.len())
        .map(|i| {
            let col = identity_col[i];
            let y: f64 = (0..m).map(|r| cost[tab.basis[r]] * tab.t[r][col]).sum();
            let y = if flipped[i] { -y } else { y };
            sign * y
        })
        .collect();
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| {
            let ay: f64 = lp
                .constraints
                .iter()
                .zip(&duals)
                .map(|(row, y)| row.coeffs[j] * y)
                .sum();
            lp.objective[j] - ay
        })
        .collect();

    Ok(LpOutcome::Optimal(LpSolution {
        x,
        value,
        duals,
        reduced_costs,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Sense::Le, 1.0);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_face() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Sense::Le, 1.0);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(s.check_certificate(&lp) < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Sense::Ge, 2.0);
        lp.add_constraint(vec![1.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn bounds_and_free_variables() {
        // min x - y with -2 <= x <= 3, y free, x + y = 1, y <= 4
        let mut lp = LinearProgram::new(Direction::Minimize, vec![1.0, -1.0]);
        lp.set_bounds(0, -2.0, 3.0);
        lp.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.add_constraint(vec![0.0, 1.0], Sense::Le, 4.0);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.x[0] + 2.0).abs() < 1e-9);
        assert!((s.x[1] - 3.0).abs() < 1e-9);
        assert!((s.value + 5.0).abs() < 1e-9);
        assert!(s.check_certificate(&lp) < 1e-9);
    }

    #[test]
    fn degenerate_redundant_equalities() {
        // duplicated equality row leaves an artificial in the basis
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Sense::Eq, 2.0);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
        assert!(s.check_certificate(&lp) < 1e-9);
    }

    #[test]
    fn mirrored_upper_bound_only() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, 2.5);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        assert!((s.x[0] - 2.5).abs() < 1e-12);
        assert!(s.check_certificate(&lp) < 1e-9);
    }

    #[test]
    fn rejects_malformed() {
        let mut lp = LinearProgram::new(Direction::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0, 2.0], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Precondition(_))));
    }
}
