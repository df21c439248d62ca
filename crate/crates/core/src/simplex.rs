//! Dense two-phase primal simplex with Bland's anti-cycling rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bounds on one decision variable; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableBound<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T> VariableBound<T> {
    pub fn free() -> Self {
        Self { lower: None, upper: None }
    }
}

/// `minimize cᵀz  subject to  G z ≤ h` and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T: Real> {
    pub objective: DVector<T>,
    pub constraints: DMatrix<T>,
    pub rhs: DVector<T>,
    /// One entry per variable. Empty means every variable is free.
    pub bounds: Vec<VariableBound<T>>,
}

impl<T: Real> LinearProgram<T> {
    /// A program over free variables.
    pub fn new(objective: DVector<T>, constraints: DMatrix<T>, rhs: DVector<T>) -> Self {
        Self { objective, constraints, rhs, bounds: Vec::new() }
    }

    pub fn with_bounds(mut self, bounds: Vec<VariableBound<T>>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T: Real> {
    Optimal { x: DVector<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Real> LpOutcome<T> {
    pub fn optimal(self) -> Option<(DVector<T>, T)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

/// How an original variable is expressed through non-negative columns.
#[derive(Debug, Clone, Copy)]
enum Substitution<T> {
    /// z = offset + w
    Shifted { col: usize, offset: T },
    /// z = offset − w
    Mirrored { col: usize, offset: T },
    /// z = w⁺ − w⁻
    Split { pos: usize, neg: usize },
}

struct Tableau<T: Real> {
    /// (rows + 1) × (cols + 1); last row holds reduced costs, last column the rhs.
    t: DMatrix<T>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
    tol: T,
}

enum Phase {
    Optimal,
    Unbounded,
}

const MAX_PIVOTS: usize = 100_000;

impl<T: Real> Tableau<T> {
    fn rhs(&self, r: usize) -> T {
        self.t[(r, self.cols)]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[(r, c)];
        let width = self.cols + 1;
        for j in 0..width {
            self.t[(r, j)] /= p;
        }
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let factor = self.t[(i, c)];
            if factor == T::zero() {
                continue;
            }
            for j in 0..width {
                let v = self.t[(r, j)];
                self.t[(i, j)] -= factor * v;
            }
            self.t[(i, c)] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Loads reduced costs for `costs` (length `cols`) against the current basis.
    fn set_objective(&mut self, costs: &[T]) {
        for j in 0..self.cols {
            self.t[(self.rows, j)] = costs[j];
        }
        self.t[(self.rows, self.cols)] = T::zero();
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb == T::zero() {
                continue;
            }
            for j in 0..=self.cols {
                let v = self.t[(r, j)];
                self.t[(self.rows, j)] -= cb * v;
            }
        }
    }

    fn run(&mut self, allowed: usize) -> Result<Phase> {
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index improving column.
            let Some(enter) = (0..allowed).find(|&j| self.t[(self.rows, j)] < -self.tol) else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.rows {
                let a = self.t[(r, enter)];
                if a > self.tol {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, best)) => {
                            if ratio < best - self.tol || ((ratio - best).abs() <= self.tol && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, best))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Phase::Unbounded),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(Error::Numerical("simplex pivot limit reached".into()))
    }
}

/// Solves the program; infeasibility and unboundedness are outcomes, not errors.
pub fn simplex_solve<T: Real>(lp: &LinearProgram<T>) -> Result<LpOutcome<T>> {
    let k = lp.num_vars();
    let m = lp.constraints.nrows();
    if lp.constraints.ncols() != k || lp.rhs.len() != m || !(lp.bounds.is_empty() || lp.bounds.len() == k) {
        return Err(Error::InvalidArgument(format!(
            "LP dimensions: objective {k}, constraints {:?}, rhs {}, bounds {}",
            lp.constraints.shape(),
            lp.rhs.len(),
            lp.bounds.len()
        )));
    }
    let all_finite = lp.objective.iter().chain(lp.constraints.iter()).chain(lp.rhs.iter()).all(|v| v.is_finite())
        && lp.bounds.iter().all(|b| b.lower.is_none_or(|v| v.is_finite()) && b.upper.is_none_or(|v| v.is_finite()));
    if !all_finite {
        return Err(Error::InvalidArgument("non-finite LP entry".into()));
    }
    let tol = T::lit(T::LP_TOL);

    // Standard form: rows A w ≤ b over w ≥ 0.
    let mut subs = Vec::with_capacity(k);
    let mut columns: Vec<DVector<T>> = Vec::new();
    let mut costs: Vec<T> = Vec::new();
    let mut b = lp.rhs.clone();
    let mut extra_rows: Vec<(usize, T)> = Vec::new();
    for i in 0..k {
        let g = lp.constraints.column(i).into_owned();
        let c = lp.objective[i];
        let bound = lp.bounds.get(i).copied().unwrap_or_else(VariableBound::free);
        match (bound.lower, bound.upper) {
            (Some(lo), upper) => {
                if let Some(hi) = upper {
                    if hi < lo - tol {
                        return Ok(LpOutcome::Infeasible);
                    }
                }
                let col = columns.len();
                b -= &g * lo;
                columns.push(g);
                costs.push(c);
                if let Some(hi) = upper {
                    extra_rows.push((col, hi - lo));
                }
                subs.push(Substitution::Shifted { col, offset: lo });
            }
            (None, Some(hi)) => {
                let col = columns.len();
                b -= &g * hi;
                columns.push(-g);
                costs.push(-c);
                subs.push(Substitution::Mirrored { col, offset: hi });
            }
            (None, None) => {
                let pos = columns.len();
                columns.push(g.clone());
                columns.push(-g);
                costs.push(c);
                costs.push(-c);
                subs.push(Substitution::Split { pos, neg: pos + 1 });
            }
        }
    }
    let nw = columns.len();
    let rows = m + extra_rows.len();
    let mut a = DMatrix::zeros(rows, nw);
    for (j, col) in columns.iter().enumerate() {
        a.view_mut((0, j), (m, 1)).copy_from(col);
    }
    let mut full_b = DVector::zeros(rows);
    full_b.rows_mut(0, m).copy_from(&b);
    for (r, &(col, cap)) in extra_rows.iter().enumerate() {
        a[(m + r, col)] = T::one();
        full_b[m + r] = cap;
    }

    // Columns: structural | slacks | artificials (one per negative-rhs row).
    let negative: Vec<usize> = (0..rows).filter(|&r| full_b[r] < T::zero()).collect();
    let cols = nw + rows + negative.len();
    let mut t = DMatrix::zeros(rows + 1, cols + 1);
    let mut basis = vec![0; rows];
    for r in 0..rows {
        let sign = if full_b[r] < T::zero() { -T::one() } else { T::one() };
        for j in 0..nw {
            t[(r, j)] = sign * a[(r, j)];
        }
        t[(r, nw + r)] = sign;
        t[(r, cols)] = sign * full_b[r];
        basis[r] = nw + r;
    }
    for (q, &r) in negative.iter().enumerate() {
        t[(r, nw + rows + q)] = T::one();
        basis[r] = nw + rows + q;
    }
    let mut tab = Tableau { t, basis, rows, cols, tol };

    if !negative.is_empty() {
        let mut phase1 = vec![T::zero(); cols];
        for q in 0..negative.len() {
            phase1[nw + rows + q] = T::one();
        }
        tab.set_objective(&phase1);
        tab.run(cols)?;
        let infeasibility = -tab.t[(rows, cols)];
        let scale = T::one().max(full_b.amax());
        if infeasibility > tol * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..rows {
            if tab.basis[r] >= nw + rows {
                if let Some(j) = (0..nw + rows).find(|&j| tab.t[(r, j)].abs() > tol) {
                    tab.pivot(r, j);
                }
            }
        }
    }

    let mut phase2 = vec![T::zero(); cols];
    phase2[..nw].copy_from_slice(&costs);
    tab.set_objective(&phase2);
    if let Phase::Unbounded = tab.run(nw + rows)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut w = vec![T::zero(); cols];
    for r in 0..rows {
        w[tab.basis[r]] = tab.rhs(r);
    }
    let x = DVector::from_iterator(
        k,
        subs.iter().map(|s| match *s {
            Substitution::Shifted { col, offset } => offset + w[col],
            Substitution::Mirrored { col, offset } => offset - w[col],
            Substitution::Split { pos, neg } => w[pos] - w[neg],
        }),
    );
    let value = lp.objective.dot(&x);
    Ok(LpOutcome::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_maximum() {
        // minimize −z s.t. z ≤ 1, z ≥ 0
        let lp = LinearProgram::new(DVector::from_vec(vec![-1.0]), DMatrix::from_row_slice(1, 1, &[1.0]), DVector::from_vec(vec![1.0]))
            .with_bounds(vec![VariableBound { lower: Some(0.0), upper: None }]);
        let (x, v) = simplex_solve(&lp).unwrap().optimal().unwrap();
        assert!((x[0] - 1.0f64).abs() < 1e-12 && (v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_constraints() {
        // z ≤ −1 and −z ≤ 0
        let lp = LinearProgram::new(DVector::from_vec(vec![0.0]), DMatrix::from_row_slice(2, 1, &[1.0, -1.0]), DVector::from_vec(vec![-1.0, 0.0]));
        assert_eq!(simplex_solve(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let lp = LinearProgram::new(DVector::from_vec(vec![-1.0, 0.0]), DMatrix::from_row_slice(1, 2, &[0.0, 1.0]), DVector::from_vec(vec![1.0]));
        assert_eq!(simplex_solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn bounds_shift_and_mirror() {
        // minimize z1 − z2 with 2 ≤ z1 ≤ 5, z2 ≤ 3, z1 + z2 ≤ 7
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0, -1.0]), DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), DVector::from_vec(vec![7.0]))
            .with_bounds(vec![
                VariableBound { lower: Some(2.0), upper: Some(5.0) },
                VariableBound { lower: None, upper: Some(3.0) },
            ]);
        let (x, v) = simplex_solve(&lp).unwrap().optimal().unwrap();
        assert!((x[0] - 2.0f64).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12 && (v + 1.0).abs() < 1e-12);
        let crossed = lp.clone().with_bounds(vec![
            VariableBound { lower: Some(2.0), upper: Some(1.0) },
            VariableBound::free(),
        ]);
        assert_eq!(simplex_solve(&crossed).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn dimension_mismatch() {
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0, 1.0]), DMatrix::zeros(1, 3), DVector::zeros(1));
        assert!(matches!(simplex_solve::<f64>(&lp), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn degenerate_program_terminates() {
        // Classic cycling example for Dantzig's rule (Beale); Bland terminates.
        let g = DMatrix::from_row_slice(3, 4, &[0.25, -8.0, -1.0, 9.0, 0.5, -12.0, -0.5, 3.0, 0.0, 0.0, 1.0, 0.0]);
        let lp = LinearProgram::new(DVector::from_vec(vec![-0.75, 20.0, -0.5, 6.0]), g, DVector::from_vec(vec![0.0, 0.0, 1.0]))
            .with_bounds(vec![VariableBound { lower: Some(0.0), upper: None }; 4]);
        let (_, v) = simplex_solve(&lp).unwrap().optimal().unwrap();
        assert!((v + 1.25f64).abs() < 1e-9);
    }
}
