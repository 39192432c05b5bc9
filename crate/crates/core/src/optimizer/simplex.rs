//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Sized for the rate programs (a few dozen variables and rows), so no
//! sparsity or revised-simplex machinery.

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// `max c·x` over box-bounded variables and linear rows. Lower bounds are
/// removed by shifting, upper bounds become rows.
#[derive(Debug, Clone, Default)]
pub(crate) struct LinearProgram {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(0.0);
        self.lower.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] = coef;
    }

    pub fn clear_objective(&mut self) {
        self.objective.iter_mut().for_each(|c| *c = 0.0);
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push((terms, sense, rhs));
    }

    pub fn maximize(&self) -> LpOutcome {
        let n = self.lower.len();
        // shifted rows: a·(x' + lo) ⋈ b  =>  a·x' ⋈ b - a·lo
        let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(self.rows.len() + n);
        for (terms, sense, rhs) in &self.rows {
            let mut dense = vec![0.0; n];
            let mut b = *rhs;
            for &(j, a) in terms {
                dense[j] += a;
                b -= a * self.lower[j];
            }
            rows.push((dense, *sense, b));
        }
        for j in 0..n {
            if self.upper[j].is_finite() {
                let mut dense = vec![0.0; n];
                dense[j] = 1.0;
                rows.push((dense, Sense::Le, self.upper[j] - self.lower[j]));
            }
        }
        let offset: f64 = self.objective.iter().zip(&self.lower).map(|(c, l)| c * l).sum();
        match Tableau::solve(n, &rows, &self.objective) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal {
                x: x.iter().zip(&self.lower).map(|(v, l)| v + l).collect(),
                value: value + offset,
            },
            other => other,
        }
    }
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Reduced-cost row, `z - c·x` convention: negative entries improve.
    obj: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn solve(n: usize, rows: &[(Vec<f64>, Sense, f64)], c: &[f64]) -> LpOutcome {
        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        // normalize to nonnegative rhs
        let norm: Vec<(Vec<f64>, Sense, f64)> = rows
            .iter()
            .map(|(a, s, b)| {
                if *b < 0.0 {
                    let flipped = match s {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (a.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (a.clone(), *s, *b)
                }
            })
            .collect();
        let art_count = norm.iter().filter(|r| r.1 != Sense::Le).count();
        let cols = n + slack_count + art_count;
        let art_start = n + slack_count;
        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s_idx, mut a_idx) = (n, art_start);
        for (i, (a, sense, b)) in norm.iter().enumerate() {
            t[i][..n].copy_from_slice(a);
            t[i][cols] = *b;
            match sense {
                Sense::Le => {
                    t[i][s_idx] = 1.0;
                    basis[i] = s_idx;
                    s_idx += 1;
                }
                Sense::Ge => {
                    t[i][s_idx] = -1.0;
                    s_idx += 1;
                    t[i][a_idx] = 1.0;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
                Sense::Eq => {
                    t[i][a_idx] = 1.0;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
            }
        }
        let mut tab = Tableau {
            t,
            obj: vec![0.0; cols + 1],
            basis,
            cols,
        };

        if art_count > 0 {
            // phase 1: maximize -Σ artificials
            for j in art_start..cols {
                tab.obj[j] = 1.0;
            }
            for i in 0..m {
                if tab.basis[i] >= art_start {
                    for j in 0..=cols {
                        tab.obj[j] -= tab.t[i][j];
                    }
                }
            }
            if !tab.run(cols) {
                return LpOutcome::Unbounded;
            }
            if tab.obj[cols] < -EPS * (1.0 + norm.iter().map(|r| r.2).sum::<f64>()) {
                return LpOutcome::Infeasible;
            }
            tab.evict_artificials(art_start);
        }

        // phase 2
        tab.obj = vec![0.0; cols + 1];
        for j in 0..n {
            tab.obj[j] = -c[j];
        }
        for i in 0..tab.t.len() {
            let bj = tab.basis[i];
            let coef = tab.obj[bj];
            if coef != 0.0 {
                for j in 0..=cols {
                    tab.obj[j] -= coef * tab.t[i][j];
                }
            }
        }
        if !tab.run(art_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; n];
        for (i, &bj) in tab.basis.iter().enumerate() {
            if bj < n {
                x[bj] = tab.t[i][cols];
            }
        }
        LpOutcome::Optimal {
            value: c.iter().zip(&x).map(|(a, b)| a * b).sum(),
            x,
        }
    }

    /// Pivots until optimal; columns `>= allowed` never enter. Returns false
    /// if unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let cols = self.cols;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j] < -EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][enter];
                if a > EPS {
                    let ratio = self.t[i][cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, enter);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i != row {
                let f = r[col];
                if f != 0.0 {
                    for (v, pv) in r.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[row] = col;
    }

    /// After phase 1, pivots zero-valued artificials out of the basis and
    /// drops rows that turn out redundant.
    fn evict_artificials(&mut self, art_start: usize) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= art_start {
                match (0..art_start).find(|&j| self.t[i][j].abs() > EPS) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match lp.maximize() {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, f64::INFINITY);
        let y = lp.add_var(0.0, f64::INFINITY);
        lp.set_objective(x, 3.0);
        lp.set_objective(y, 5.0);
        lp.add_row(vec![(x, 1.0)], Sense::Le, 4.0);
        lp.add_row(vec![(y, 2.0)], Sense::Le, 12.0);
        lp.add_row(vec![(x, 3.0), (y, 2.0)], Sense::Le, 18.0);
        let (sol, v) = optimal(&lp);
        assert_relative_eq!(v, 36.0, epsilon = 1e-12);
        assert_relative_eq!(sol[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(sol[1], 6.0, epsilon = 1e-12);
    }

    #[test]
    fn ge_eq_and_shifted_bounds() {
        // min x + y (max -x - y) with x + y >= 1.5, x - y = 0.5, x,y in [-1, 1]
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 1.0);
        let y = lp.add_var(-1.0, 1.0);
        lp.set_objective(x, -1.0);
        lp.set_objective(y, -1.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 1.5);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Eq, 0.5);
        let (sol, v) = optimal(&lp);
        assert_relative_eq!(v, -1.5, epsilon = 1e-12);
        assert_relative_eq!(sol[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(sol[1], 0.5, epsilon = 1e-12);
        // negative lower bounds reachable
        let mut lp = LinearProgram::new();
        let z = lp.add_var(-1.0, 0.0);
        lp.set_objective(z, -1.0);
        let (sol, v) = optimal(&lp);
        assert_eq!((sol[0], v), (-1.0, 1.0));
        lp.set_objective(z, 1.0);
        lp.add_row(vec![(z, 1.0)], Sense::Le, -0.25);
        let (sol, _) = optimal(&lp);
        assert_relative_eq!(sol[0], -0.25, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 1.0);
        lp.add_row(vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(lp.maximize(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        assert_eq!(lp.maximize(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 10.0);
        let y = lp.add_var(0.0, 10.0);
        lp.set_objective(x, 1.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 4.0);
        lp.add_row(vec![(x, 2.0), (y, 2.0)], Sense::Eq, 8.0);
        let (sol, v) = optimal(&lp);
        assert_relative_eq!(v, 4.0, epsilon = 1e-12);
        assert_relative_eq!(sol[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example; Bland's rule must terminate
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = (0..4).map(|_| lp.add_var(0.0, f64::INFINITY)).collect();
        for (j, c) in [0.75, -150.0, 0.02, -6.0].iter().enumerate() {
            lp.set_objective(v[j], *c);
        }
        lp.add_row(vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], Sense::Le, 0.0);
        lp.add_row(vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], Sense::Le, 0.0);
        lp.add_row(vec![(v[2], 1.0)], Sense::Le, 1.0);
        let (_, val) = optimal(&lp);
        assert_relative_eq!(val, 0.05, epsilon = 1e-12);
    }
}
