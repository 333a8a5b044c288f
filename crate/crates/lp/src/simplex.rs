//! Bounded-variable two-phase revised simplex.
//!
//! The basis inverse is kept as a dense column-major matrix and updated with
//! rank-one operations on each pivot; reduced costs are maintained
//! incrementally and refreshed from the inverse at fixed intervals. A full
//! refactorisation of the basis runs only when the refreshed iterate fails a
//! residual check, so the per-iteration cost stays at one rank-one update.
//! All tie-breaks are by lowest index, which makes a solve deterministic for
//! a fixed problem and tolerance set.

use crate::problem::{LinearProgram, RowSense};
use crate::solver::Tolerances;

const FREE_VALUE: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
    Singular,
}

#[derive(Debug)]
pub(crate) enum RawOutcome {
    Optimal(RawSolution),
    Infeasible,
    Unbounded,
    Numerical,
}

#[derive(Debug)]
pub(crate) struct RawSolution {
    /// Values of the structural columns.
    pub x: Vec<f64>,
    /// One dual per row, signed as the derivative of the optimal objective
    /// with respect to that row's right-hand side.
    pub duals: Vec<f64>,
    /// Reduced cost per structural column.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub(crate) struct Simplex {
    m: usize,
    n_struct: usize,
    /// Total number of variables including slacks and artificials.
    n_total: usize,
    n_without_artificials: usize,

    // Constraint matrix in compressed sparse column form, covering
    // structural, slack and artificial columns.
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,

    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,

    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Dense basis inverse, column-major: entry (i, k) lives at `k * m + i`.
    binv: Vec<f64>,
    x_basic: Vec<f64>,
    /// Reduced costs under `active_cost`.
    d: Vec<f64>,
    active_cost: Vec<f64>,

    iterations: usize,
    degenerate_streak: usize,
    bland: bool,

    tol: Tolerances,
    // scratch buffers
    work_w: Vec<f64>,
    work_rho: Vec<f64>,
    work_b: Vec<f64>,
}

impl Simplex {
    pub fn new(lp: &LinearProgram, tol: &Tolerances) -> Self {
        let m = lp.num_rows();
        let n_struct = lp.num_cols();
        let n_total = n_struct + m;

        let mut col_ptr = Vec::with_capacity(n_total + 1);
        let mut col_rows = Vec::new();
        let mut col_vals = Vec::new();
        let mut lower = Vec::with_capacity(n_total);
        let mut upper = Vec::with_capacity(n_total);
        let mut cost = Vec::with_capacity(n_total);

        // Structural columns. Row coefficient lists are transposed into CSC.
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
        for (rid, row) in lp.rows() {
            for &(c, v) in &row.coeffs {
                per_col[c].push((rid.index(), v));
            }
        }
        col_ptr.push(0);
        for (cid, col) in lp.cols() {
            for &(r, v) in &per_col[cid.index()] {
                col_rows.push(r);
                col_vals.push(v);
            }
            col_ptr.push(col_rows.len());
            lower.push(col.lower);
            upper.push(col.upper);
            cost.push(col.objective);
        }

        // One slack per row with coefficient +1; its bounds encode the sense.
        let mut rhs = Vec::with_capacity(m);
        for (rid, row) in lp.rows() {
            col_rows.push(rid.index());
            col_vals.push(1.0);
            col_ptr.push(col_rows.len());
            let (lo, hi) = match row.sense {
                RowSense::LessEq => (0.0, f64::INFINITY),
                RowSense::Equal => (0.0, 0.0),
                RowSense::GreaterEq => (f64::NEG_INFINITY, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            cost.push(0.0);
            rhs.push(row.rhs);
        }

        Self {
            m,
            n_struct,
            n_total,
            n_without_artificials: n_total,
            col_ptr,
            col_rows,
            col_vals,
            lower,
            upper,
            cost,
            rhs,
            state: vec![VarState::AtLower; n_total],
            basis: Vec::new(),
            binv: Vec::new(),
            x_basic: Vec::new(),
            d: Vec::new(),
            active_cost: Vec::new(),
            iterations: 0,
            degenerate_streak: 0,
            bland: false,
            tol: tol.clone(),
            work_w: vec![0.0; m],
            work_rho: vec![0.0; m],
            work_b: vec![0.0; m],
        }
    }

    fn col_entries(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.col_rows[range.clone()]
            .iter()
            .copied()
            .zip(self.col_vals[range].iter().copied())
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => FREE_VALUE,
            VarState::Basic(r) => self.x_basic[r],
        }
    }

    /// Drive the problem to an optimum and extract the solution.
    pub fn solve(&mut self) -> RawOutcome {
        if self.m == 0 {
            return self.solve_unconstrained();
        }
        self.install_initial_basis();

        if self.has_artificials() {
            let phase1: Vec<f64> = (0..self.n_total)
                .map(|j| if j >= self.n_without_artificials { 1.0 } else { 0.0 })
                .collect();
            self.set_active_cost(phase1);
            match self.run_phase() {
                PhaseOutcome::Optimal => {}
                PhaseOutcome::Unbounded | PhaseOutcome::Singular => {
                    return RawOutcome::Numerical
                }
                PhaseOutcome::IterationLimit => return RawOutcome::Numerical,
            }
            let infeasibility: f64 = (self.n_without_artificials..self.n_total)
                .map(|j| self.nonbasic_value(j).max(0.0))
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            if infeasibility > self.tol.feasibility * scale {
                return RawOutcome::Infeasible;
            }
            self.retire_artificials();
        }

        let phase2 = self.cost.clone();
        self.set_active_cost(phase2);
        match self.run_phase() {
            PhaseOutcome::Optimal => RawOutcome::Optimal(self.extract()),
            PhaseOutcome::Unbounded => RawOutcome::Unbounded,
            PhaseOutcome::IterationLimit | PhaseOutcome::Singular => RawOutcome::Numerical,
        }
    }

    /// A problem with no rows minimises each column independently.
    fn solve_unconstrained(&mut self) -> RawOutcome {
        let mut x = vec![0.0; self.n_struct];
        for j in 0..self.n_struct {
            let c = self.cost[j];
            x[j] = if c > 0.0 {
                if self.lower[j].is_finite() {
                    self.lower[j]
                } else {
                    return RawOutcome::Unbounded;
                }
            } else if c < 0.0 {
                if self.upper[j].is_finite() {
                    self.upper[j]
                } else {
                    return RawOutcome::Unbounded;
                }
            } else if self.lower[j].is_finite() {
                self.lower[j]
            } else if self.upper[j].is_finite() {
                self.upper[j].min(0.0)
            } else {
                0.0
            };
        }
        let objective = x.iter().zip(&self.cost).map(|(a, b)| a * b).sum();
        RawOutcome::Optimal(RawSolution {
            reduced_costs: self.cost[..self.n_struct].to_vec(),
            x,
            duals: Vec::new(),
            objective,
            iterations: 0,
        })
    }

    fn has_artificials(&self) -> bool {
        self.n_total > self.n_without_artificials
    }

    /// Start from the slack basis; rows whose slack cannot absorb the
    /// residual get an artificial column carrying the violation instead.
    fn install_initial_basis(&mut self) {
        for j in 0..self.n_struct {
            self.state[j] = if self.lower[j].is_finite() {
                VarState::AtLower
            } else if self.upper[j].is_finite() {
                VarState::AtUpper
            } else {
                VarState::Free
            };
        }

        let mut residual = self.rhs.clone();
        for j in 0..self.n_struct {
            let xj = self.nonbasic_value(j);
            if xj != 0.0 {
                for (r, v) in self.col_entries(j) {
                    residual[r] -= v * xj;
                }
            }
        }

        self.basis = Vec::with_capacity(self.m);
        self.x_basic = vec![0.0; self.m];
        self.binv = vec![0.0; self.m * self.m];
        for i in 0..self.m {
            let slack = self.n_struct + i;
            let r = residual[i];
            if r >= self.lower[slack] && r <= self.upper[slack] {
                self.state[slack] = VarState::Basic(i);
                self.basis.push(slack);
                self.x_basic[i] = r;
                self.binv[i * self.m + i] = 1.0;
            } else {
                let at = r.clamp(self.lower[slack], self.upper[slack]);
                self.state[slack] = if at == self.lower[slack] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                let leftover = r - at;
                let sigma = leftover.signum();
                let art = self.n_total;
                self.col_rows.push(i);
                self.col_vals.push(sigma);
                self.col_ptr.push(self.col_rows.len());
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.cost.push(0.0);
                self.state.push(VarState::Basic(i));
                self.n_total += 1;
                self.basis.push(art);
                self.x_basic[i] = leftover.abs();
                self.binv[i * self.m + i] = sigma;
            }
        }
        self.d = vec![0.0; self.n_total];
    }

    /// After phase one, basic artificials sit at zero; pivot them onto a
    /// genuine column where possible and pin every artificial at zero.
    fn retire_artificials(&mut self) {
        for r in 0..self.m {
            let v = self.basis[r];
            if v < self.n_without_artificials {
                continue;
            }
            self.compute_rho(r);
            let mut entering = None;
            for j in 0..self.n_without_artificials {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                if self.lower[j] == self.upper[j] {
                    continue;
                }
                let alpha: f64 = self
                    .col_entries(j)
                    .map(|(k, val)| val * self.work_rho[k])
                    .sum();
                if alpha.abs() > 1e-7 {
                    entering = Some(j);
                    break;
                }
            }
            if let Some(q) = entering {
                self.ftran(q);
                self.pivot(q, r, 1.0, 0.0, true);
            }
            // Either replaced, or the row is linearly dependent and the
            // artificial stays basic at zero.
        }
        for j in self.n_without_artificials..self.n_total {
            self.upper[j] = 0.0;
            if !matches!(self.state[j], VarState::Basic(_)) {
                self.state[j] = VarState::AtLower;
            }
        }
    }

    fn set_active_cost(&mut self, cost: Vec<f64>) {
        self.active_cost = cost;
        self.refresh_reduced_costs();
        self.bland = false;
        self.degenerate_streak = 0;
    }

    fn run_phase(&mut self) -> PhaseOutcome {
        let mut verified = false;
        loop {
            self.iterations += 1;
            if self.iterations > self.tol.max_iterations {
                return PhaseOutcome::IterationLimit;
            }
            if self.iterations % self.tol.refresh_interval == 0 {
                if !self.refresh_iterate() {
                    return PhaseOutcome::Singular;
                }
                verified = false;
            }

            let entering = self.price();
            let q = match entering {
                Some(q) => q,
                None => {
                    // Confirm optimality on a freshly recomputed iterate so a
                    // drifted inverse can never certify a wrong optimum.
                    if verified {
                        return PhaseOutcome::Optimal;
                    }
                    if !self.refresh_iterate() {
                        return PhaseOutcome::Singular;
                    }
                    verified = true;
                    continue;
                }
            };
            verified = false;

            let dir = match self.state[q] {
                VarState::AtLower => 1.0,
                VarState::AtUpper => -1.0,
                VarState::Free => -self.d[q].signum(),
                VarState::Basic(_) => unreachable!("basic column priced"),
            };

            self.ftran(q);

            let range = self.upper[q] - self.lower[q];
            let mut theta = f64::INFINITY;
            let mut blocking: Option<usize> = None;
            for i in 0..self.m {
                let g = dir * self.work_w[i];
                let var = self.basis[i];
                let candidate = if g > self.tol.pivot {
                    let lo = self.lower[var];
                    if lo.is_finite() {
                        (self.x_basic[i] - lo) / g
                    } else {
                        continue;
                    }
                } else if g < -self.tol.pivot {
                    let hi = self.upper[var];
                    if hi.is_finite() {
                        (self.x_basic[i] - hi) / g
                    } else {
                        continue;
                    }
                } else {
                    continue;
                };
                let candidate = candidate.max(0.0);
                // Prefer strictly smaller ratios; on near-ties keep the row
                // with the larger pivot magnitude, then the lower index.
                if candidate < theta - 1e-10 {
                    theta = candidate;
                    blocking = Some(i);
                } else if candidate < theta + 1e-10 {
                    if let Some(b) = blocking {
                        if self.work_w[i].abs() > self.work_w[b].abs() {
                            theta = theta.min(candidate);
                            blocking = Some(i);
                        }
                    }
                }
            }

            if range <= theta {
                if !range.is_finite() {
                    return PhaseOutcome::Unbounded;
                }
                // Bound flip: the entering column swaps bounds without any
                // change of basis.
                for i in 0..self.m {
                    let w = self.work_w[i];
                    if w != 0.0 {
                        self.x_basic[i] -= dir * w * range;
                    }
                }
                self.state[q] = match self.state[q] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    other => other,
                };
                self.note_step(range);
                continue;
            }

            let r = match blocking {
                Some(r) => r,
                None => return PhaseOutcome::Unbounded,
            };
            self.pivot(q, r, dir, theta, false);
            self.note_step(theta);
        }
    }

    fn note_step(&mut self, theta: f64) {
        if theta <= 1e-12 {
            self.degenerate_streak += 1;
            if self.degenerate_streak > 64 + self.m {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
            self.bland = false;
        }
    }

    /// Choose the entering column: Dantzig pricing, or Bland's rule while a
    /// degenerate streak is being broken.
    fn price(&self) -> Option<usize> {
        let tol = self.tol.reduced_cost;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n_total {
            let score = match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower => {
                    if self.lower[j] == self.upper[j] {
                        continue;
                    }
                    -self.d[j]
                }
                VarState::AtUpper => self.d[j],
                VarState::Free => self.d[j].abs(),
            };
            if score > tol {
                if self.bland {
                    return Some(j);
                }
                match best {
                    Some((_, s)) if s >= score => {}
                    _ => best = Some((j, score)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// FTRAN: `work_w = B^-1 a_q`.
    fn ftran(&mut self, q: usize) {
        self.work_w.fill(0.0);
        let range = self.col_ptr[q]..self.col_ptr[q + 1];
        for idx in range {
            let k = self.col_rows[idx];
            let v = self.col_vals[idx];
            let col = &self.binv[k * self.m..(k + 1) * self.m];
            for (wi, ci) in self.work_w.iter_mut().zip(col) {
                *wi += v * ci;
            }
        }
    }

    /// Row `r` of the basis inverse into `work_rho`.
    fn compute_rho(&mut self, r: usize) {
        for k in 0..self.m {
            self.work_rho[k] = self.binv[k * self.m + r];
        }
    }

    /// Replace the basic variable of row `r` by column `q`, moving the
    /// entering variable by `dir * theta` from its current value. `work_w`
    /// must hold the FTRAN of column `q`.
    fn pivot(&mut self, q: usize, r: usize, dir: f64, theta: f64, artificial_swap: bool) {
        let w_r = self.work_w[r];
        debug_assert!(w_r.abs() > 0.0, "zero pivot element");
        let step = dir * theta;
        let leaving = self.basis[r];
        let x_entering = self.nonbasic_value(q) + step;

        if step != 0.0 {
            for i in 0..self.m {
                if i != r {
                    self.x_basic[i] -= step * self.work_w[i];
                }
            }
        }
        self.x_basic[r] = x_entering;

        // Leaving variable settles on the bound it ran into.
        self.state[leaving] = if artificial_swap || leaving >= self.n_without_artificials {
            VarState::AtLower
        } else if dir * w_r > 0.0 || self.upper[leaving].is_infinite() {
            VarState::AtLower
        } else {
            VarState::AtUpper
        };

        // Update the reduced costs using row r of the pre-pivot inverse.
        self.compute_rho(r);
        let dq_over_pivot = self.d[q] / w_r;
        if dq_over_pivot != 0.0 {
            for j in 0..self.n_total {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                let alpha: f64 = self
                    .col_entries(j)
                    .map(|(k, v)| v * self.work_rho[k])
                    .sum();
                if alpha != 0.0 {
                    self.d[j] -= dq_over_pivot * alpha;
                }
            }
            self.d[leaving] = -dq_over_pivot;
        } else {
            self.d[leaving] = 0.0;
        }

        // Rank-one update of the dense inverse, column by column. While the
        // FTRAN image is sparse the update only touches its support;
        // skipping exact zeros leaves the arithmetic unchanged.
        let m = self.m;
        let nnz = self.work_w.iter().filter(|v| **v != 0.0).count();
        if nnz * 4 < m {
            let w_nz: Vec<(u32, f64)> = self
                .work_w
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (i as u32, v))
                .collect();
            for k in 0..m {
                let col = &mut self.binv[k * m..(k + 1) * m];
                let old = col[r];
                if old == 0.0 {
                    continue;
                }
                let f = old / w_r;
                for &(i, wv) in &w_nz {
                    col[i as usize] -= f * wv;
                }
                col[r] = f;
            }
        } else {
            for k in 0..m {
                let col = &mut self.binv[k * m..(k + 1) * m];
                let old = col[r];
                if old == 0.0 {
                    continue;
                }
                let f = old / w_r;
                for (ci, wi) in col.iter_mut().zip(&self.work_w) {
                    *ci -= f * wi;
                }
                col[r] = f;
            }
        }

        self.basis[r] = q;
        self.state[q] = VarState::Basic(r);
        self.d[q] = 0.0;
    }

    /// Recompute the basic values and reduced costs from the inverse, and
    /// refactorise from scratch if the iterate fails its residual check.
    fn refresh_iterate(&mut self) -> bool {
        self.compute_effective_rhs();
        let b_eff = self.work_b.clone();
        self.solve_basic_from(&b_eff);

        // Residual of B x_B = b_eff, evaluated against the sparse basis
        // columns rather than the inverse.
        let mut residual = b_eff.clone();
        for r in 0..self.m {
            let var = self.basis[r];
            let xb = self.x_basic[r];
            if xb != 0.0 {
                for idx in self.col_ptr[var]..self.col_ptr[var + 1] {
                    residual[self.col_rows[idx]] -= self.col_vals[idx] * xb;
                }
            }
        }
        let scale = 1.0 + b_eff.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let drift = residual.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if drift > 1e-9 * scale {
            if !self.refactorize() {
                return false;
            }
            self.solve_basic_from(&b_eff);
        }
        self.refresh_reduced_costs();
        true
    }

    /// `work_b` := rhs minus the contribution of all nonbasic columns.
    fn compute_effective_rhs(&mut self) {
        self.work_b.copy_from_slice(&self.rhs);
        for j in 0..self.n_total {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xj = self.nonbasic_value(j);
            if xj != 0.0 {
                for idx in self.col_ptr[j]..self.col_ptr[j + 1] {
                    self.work_b[self.col_rows[idx]] -= self.col_vals[idx] * xj;
                }
            }
        }
    }

    fn solve_basic_from(&mut self, b_eff: &[f64]) {
        let m = self.m;
        self.x_basic.fill(0.0);
        for k in 0..m {
            let bk = b_eff[k];
            if bk != 0.0 {
                let col = &self.binv[k * m..(k + 1) * m];
                for (xi, ci) in self.x_basic.iter_mut().zip(col) {
                    *xi += bk * ci;
                }
            }
        }
    }

    fn refresh_reduced_costs(&mut self) {
        let duals = self.duals_for(&self.active_cost);
        for j in 0..self.n_total {
            if matches!(self.state[j], VarState::Basic(_)) {
                self.d[j] = 0.0;
                continue;
            }
            let mut dj = self.active_cost[j];
            for idx in self.col_ptr[j]..self.col_ptr[j + 1] {
                dj -= self.col_vals[idx] * duals[self.col_rows[idx]];
            }
            self.d[j] = dj;
        }
    }

    /// Duals `y = c_B^T B^-1` for an arbitrary cost vector.
    fn duals_for(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for k in 0..m {
            let col = &self.binv[k * m..(k + 1) * m];
            let mut acc = 0.0;
            for (i, ci) in col.iter().enumerate() {
                let cb = cost[self.basis[i]];
                if cb != 0.0 {
                    acc += cb * ci;
                }
            }
            y[k] = acc;
        }
        y
    }

    /// Rebuild the dense inverse from the basis columns by Gauss-Jordan
    /// elimination with partial pivoting. Returns false on a singular basis.
    fn refactorize(&mut self) -> bool {
        let m = self.m;
        // Augmented [B | I], row-major so eliminations run on contiguous rows.
        let width = 2 * m;
        let mut aug = vec![0.0f64; m * width];
        for (r, &var) in self.basis.iter().enumerate() {
            for idx in self.col_ptr[var]..self.col_ptr[var + 1] {
                aug[self.col_rows[idx] * width + r] = self.col_vals[idx];
            }
        }
        for i in 0..m {
            aug[i * width + m + i] = 1.0;
        }
        for k in 0..m {
            let mut piv = k;
            let mut best = aug[k * width + k].abs();
            for i in (k + 1)..m {
                let v = aug[i * width + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-12 {
                return false;
            }
            if piv != k {
                for c in 0..width {
                    aug.swap(k * width + c, piv * width + c);
                }
            }
            let pivot = aug[k * width + k];
            let inv = 1.0 / pivot;
            for c in k..width {
                aug[k * width + c] *= inv;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = aug[i * width + k];
                if f != 0.0 {
                    for c in k..width {
                        aug[i * width + c] -= f * aug[k * width + c];
                    }
                }
            }
        }
        for k in 0..m {
            for i in 0..m {
                self.binv[k * m + i] = aug[i * width + m + k];
            }
        }
        true
    }

    fn extract(&mut self) -> RawSolution {
        let mut x = vec![0.0; self.n_struct];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = self.nonbasic_value(j);
        }
        let duals = self.duals_for(&self.cost);
        let mut reduced = vec![0.0; self.n_struct];
        for (j, red) in reduced.iter_mut().enumerate() {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let mut dj = self.cost[j];
            for idx in self.col_ptr[j]..self.col_ptr[j + 1] {
                dj -= self.col_vals[idx] * duals[self.col_rows[idx]];
            }
            *red = dj;
        }
        let objective = x
            .iter()
            .zip(&self.cost[..self.n_struct])
            .map(|(a, b)| a * b)
            .sum();
        RawSolution {
            x,
            duals,
            reduced_costs: reduced,
            objective,
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::LinearProgram;

    fn solved_instance() -> Simplex {
        // min 2a + 3b + c subject to a + b = 10, b + c >= 4, a <= 4.
        let mut lp = LinearProgram::new("refactor");
        let a = lp.add_column("a", 0.0, 4.0, 2.0).unwrap();
        let b = lp.add_column("b", 0.0, f64::INFINITY, 3.0).unwrap();
        let c = lp.add_column("c", 0.0, f64::INFINITY, 1.0).unwrap();
        lp.add_row("sum", RowSense::Equal, 10.0, &[(a, 1.0), (b, 1.0)])
            .unwrap();
        lp.add_row("floor", RowSense::GreaterEq, 4.0, &[(b, 1.0), (c, 1.0)])
            .unwrap();
        lp.add_row("cap", RowSense::LessEq, 4.0, &[(a, 1.0)]).unwrap();
        let mut simplex = Simplex::new(&lp, &Tolerances::default());
        match simplex.solve() {
            RawOutcome::Optimal(_) => {}
            other => panic!("expected optimal, got {other:?}"),
        }
        simplex
    }

    #[test]
    fn corrupted_inverse_is_repaired_by_the_residual_check() {
        let mut simplex = solved_instance();
        let clean_basics = simplex.x_basic.clone();

        // Knock the inverse over; the refreshed iterate then fails its
        // residual check and a refactorisation must restore it.
        for v in simplex.binv.iter_mut() {
            *v += 0.37;
        }
        assert!(simplex.refresh_iterate(), "refactorisation failed");

        for (a, b) in simplex.x_basic.iter().zip(&clean_basics) {
            assert!(
                (a - b).abs() <= 1e-9 * (1.0 + b.abs()),
                "basic values not restored: {a} vs {b}"
            );
        }
    }

    #[test]
    fn refactorize_reports_singular_bases() {
        let mut simplex = solved_instance();
        // Force two basis positions onto the same column: B is singular.
        simplex.basis[1] = simplex.basis[0];
        assert!(!simplex.refactorize());
    }
}
