//! Predictor-corrector path tracking.
//!
//! Homotopies run from `s = 0` (start) to `s = 1` (target). The predictor is a
//! classical RK4 step on the Davidenko equation `H_x ẋ = −H_s`; the corrector is
//! a short Newton iteration with a contraction test. Step sizes double after a
//! run of successes and halve on failure.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{self, Scalar, C64};
use crate::poly::{CompiledSystem, PolySystem};

/// A square polynomial system `f(x; p) = 0` with `n` unknowns and `m` parameters.
pub trait ParamSystem {
    fn num_vars(&self) -> usize;
    fn num_params(&self) -> usize;
    /// Values `f` (length `n`), the unknown Jacobian `jx` (`n × n`) and the
    /// parameter Jacobian `jp` (`n × m`), all row-major and overwritten.
    fn eval(
        &self,
        x: &[C64],
        p: &[C64],
        f: &mut [C64],
        jx: Option<&mut [C64]>,
        jp: Option<&mut [C64]>,
    );
}

/// [`ParamSystem`] backed by a compiled [`PolySystem`] whose trailing
/// variables are the parameters.
#[derive(Clone, Debug)]
pub struct PolyParamSystem {
    compiled: CompiledSystem,
    nvars: usize,
    nparams: usize,
}

impl PolyParamSystem {
    /// Panics unless the system is square in its unknowns.
    pub fn new(sys: &PolySystem) -> Self {
        assert!(sys.is_square(), "system must be square in its unknowns");
        PolyParamSystem {
            compiled: sys.compile(),
            nvars: sys.num_vars(),
            nparams: sys.num_params,
        }
    }
}

impl ParamSystem for PolyParamSystem {
    fn num_vars(&self) -> usize {
        self.nvars
    }
    fn num_params(&self) -> usize {
        self.nparams
    }
    fn eval(
        &self,
        x: &[C64],
        p: &[C64],
        f: &mut [C64],
        jx: Option<&mut [C64]>,
        jp: Option<&mut [C64]>,
    ) {
        let n = self.nvars;
        let m = self.nparams;
        let mut point = Vec::with_capacity(n + m);
        point.extend_from_slice(x);
        point.extend_from_slice(p);
        if jx.is_none() && jp.is_none() {
            self.compiled.eval(&point, f, None);
            return;
        }
        let mut full = vec![C64::zero(); n * (n + m)];
        self.compiled.eval(&point, f, Some(&mut full));
        if let Some(jx) = jx {
            for i in 0..n {
                jx[i * n..(i + 1) * n].copy_from_slice(&full[i * (n + m)..i * (n + m) + n]);
            }
        }
        if let Some(jp) = jp {
            for i in 0..n {
                jp[i * m..(i + 1) * m]
                    .copy_from_slice(&full[i * (n + m) + n..(i + 1) * (n + m)]);
            }
        }
    }
}

/// `H(x, s)` with `s ∈ [0, 1]`.
pub trait Homotopy {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[C64], s: f64, h: &mut [C64], hx: &mut [C64], hs: Option<&mut [C64]>);
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Newton iterations per corrector call.
    pub max_newton: usize,
    /// Relative corrector tolerance during tracking.
    pub corrector_tol: f64,
    /// Paths whose iterate exceeds this norm are declared divergent.
    pub divergence_norm: f64,
    pub max_steps: usize,
    /// Relative tolerance of the final Newton polish at `s = 1`.
    pub final_tol: f64,
    /// Endpoints closer than this (max-norm) are identified.
    pub dedup_tol: f64,
}

impl Default for TrackerSettings {
    fn default() -> Self {
        TrackerSettings {
            initial_step: 0.02,
            min_step: 1e-13,
            max_step: 0.1,
            max_newton: 3,
            corrector_tol: 1e-9,
            divergence_norm: 1e8,
            max_steps: 50_000,
            final_tol: 1e-12,
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStatus {
    Success,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackedSolution {
    pub x: Vec<C64>,
    pub status: PathStatus,
    /// Max-norm residual of the target system at the endpoint.
    pub residual: f64,
    /// Infinity-norm condition number of the target Jacobian at the endpoint.
    pub condition: f64,
    pub steps: usize,
}

struct Work {
    n: usize,
    h: Vec<C64>,
    hx: Vec<C64>,
    hs: Vec<C64>,
    piv: Vec<usize>,
}

impl Work {
    fn new(n: usize) -> Self {
        Work {
            n,
            h: vec![C64::zero(); n],
            hx: vec![C64::zero(); n * n],
            hs: vec![C64::zero(); n],
            piv: vec![0; n],
        }
    }

    /// Tangent `dx/ds` at `(x, s)`.
    fn tangent<H: Homotopy>(&mut self, hom: &H, x: &[C64], s: f64, out: &mut [C64]) -> bool {
        hom.eval(x, s, &mut self.h, &mut self.hx, Some(&mut self.hs));
        if !math::lu_factor(&mut self.hx, self.n, &mut self.piv) {
            return false;
        }
        for (o, v) in out.iter_mut().zip(&self.hs) {
            *o = -*v;
        }
        math::lu_solve(&self.hx, self.n, &self.piv, out);
        out.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// One Newton step at fixed `s`; returns the step norm.
    fn newton<H: Homotopy>(&mut self, hom: &H, x: &mut [C64], s: f64) -> Option<f64> {
        hom.eval(x, s, &mut self.h, &mut self.hx, None);
        if !math::lu_factor(&mut self.hx, self.n, &mut self.piv) {
            return None;
        }
        let mut dx: Vec<C64> = self.h.iter().map(|v| -*v).collect();
        math::lu_solve(&self.hx, self.n, &self.piv, &mut dx);
        let norm = math::norm_inf(&dx);
        if !norm.is_finite() {
            return None;
        }
        for (a, b) in x.iter_mut().zip(&dx) {
            *a += *b;
        }
        Some(norm)
    }
}

fn rk4_predict<H: Homotopy>(w: &mut Work, hom: &H, x: &[C64], s: f64, ds: f64) -> Option<Vec<C64>> {
    let n = x.len();
    let mut k1 = vec![C64::zero(); n];
    let mut k2 = vec![C64::zero(); n];
    let mut k3 = vec![C64::zero(); n];
    let mut k4 = vec![C64::zero(); n];
    let mut tmp = vec![C64::zero(); n];
    let half = C64::new(0.5 * ds, 0.0);
    let full = C64::new(ds, 0.0);
    if !w.tangent(hom, x, s, &mut k1) {
        return None;
    }
    for i in 0..n {
        tmp[i] = x[i] + half * k1[i];
    }
    if !w.tangent(hom, &tmp, s + 0.5 * ds, &mut k2) {
        return None;
    }
    for i in 0..n {
        tmp[i] = x[i] + half * k2[i];
    }
    if !w.tangent(hom, &tmp, s + 0.5 * ds, &mut k3) {
        return None;
    }
    for i in 0..n {
        tmp[i] = x[i] + full * k3[i];
    }
    if !w.tangent(hom, &tmp, s + ds, &mut k4) {
        return None;
    }
    let sixth = C64::new(ds / 6.0, 0.0);
    for i in 0..n {
        tmp[i] = x[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Some(tmp)
}

/// Corrector: Newton with a contraction test. Returns `false` on rejection.
fn correct<H: Homotopy>(w: &mut Work, hom: &H, x: &mut [C64], s: f64, st: &TrackerSettings) -> bool {
    let scale = 1.0 + math::norm_inf(x);
    let mut prev = f64::INFINITY;
    for it in 0..st.max_newton {
        let Some(step) = w.newton(hom, x, s) else {
            return false;
        };
        if it == 0 && step > 1e-2 * scale {
            return false;
        }
        if it > 0 && step > 0.5 * prev {
            return false;
        }
        if step <= st.corrector_tol * scale {
            return true;
        }
        prev = step;
    }
    false
}

/// Tracks one path from `start` at `s = 0` to `s = 1`.
pub fn track<H: Homotopy>(hom: &H, start: &[C64], st: &TrackerSettings) -> TrackedSolution {
    let n = hom.dim();
    let mut w = Work::new(n);
    let mut x = start.to_vec();
    let mut s = 0.0;
    let mut ds = st.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    let mut status = PathStatus::Success;
    while s < 1.0 {
        if steps >= st.max_steps {
            status = PathStatus::Failed;
            break;
        }
        steps += 1;
        let h = f64::min(ds, 1.0 - s);
        let accepted = match rk4_predict(&mut w, hom, &x, s, h) {
            Some(mut pred) => {
                if correct(&mut w, hom, &mut pred, s + h, st) {
                    x = pred;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if accepted {
            s = if h == 1.0 - s { 1.0 } else { s + h };
            streak += 1;
            if streak >= 3 {
                ds = f64::min(2.0 * ds, st.max_step);
                streak = 0;
            }
            if math::norm_inf(&x) > st.divergence_norm {
                status = PathStatus::Diverged;
                break;
            }
        } else {
            streak = 0;
            ds *= 0.5;
            if ds < st.min_step {
                status = if s > 0.9 && math::norm_inf(&x) > 1e4 {
                    PathStatus::Diverged
                } else {
                    PathStatus::Failed
                };
                break;
            }
        }
    }
    let mut residual = f64::INFINITY;
    let mut condition = f64::INFINITY;
    if status == PathStatus::Success {
        let scale = 1.0 + math::norm_inf(&x);
        let mut converged = false;
        for _ in 0..8 {
            match w.newton(hom, &mut x, 1.0) {
                Some(step) if step <= st.final_tol * scale => {
                    converged = true;
                    break;
                }
                Some(_) => {}
                None => break,
            }
        }
        hom.eval(&x, 1.0, &mut w.h, &mut w.hx, None);
        residual = math::norm_inf(&w.h);
        condition = math::condition_inf(&w.hx, n);
        if !converged && !(residual <= 1e-8 * scale) {
            status = PathStatus::Failed;
        }
        if math::norm_inf(&x) > st.divergence_norm {
            status = PathStatus::Diverged;
        }
    }
    TrackedSolution {
        x,
        status,
        residual,
        condition,
        steps,
    }
}

/// Removes endpoints within `tol` (max-norm) of an earlier one.
pub fn dedup(points: Vec<Vec<C64>>, tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(points.len());
    for p in points {
        let dup = out.iter().any(|q| {
            q.iter()
                .zip(&p)
                .all(|(a, b)| (a - b).norm() <= tol)
        });
        if !dup {
            out.push(p);
        }
    }
    out
}

/// A block of unknowns for a multihomogeneous structure. Projective groups
/// carry an affine chart row `Σ r_k x_k = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct VarGroup {
    pub vars: Vec<usize>,
    pub projective: bool,
}

/// Degree structure of a square system: the first `degrees.len()` rows have
/// the given degree in each group; they are followed by one chart row per
/// projective group, in group order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductStructure {
    pub groups: Vec<VarGroup>,
    pub degrees: Vec<Vec<u32>>,
    pub charts: Vec<Vec<C64>>,
}

impl ProductStructure {
    pub fn dim(&self) -> usize {
        self.groups.iter().map(|g| g.vars.len()).sum()
    }

    /// Number of equations a group's linear factors must supply.
    fn needed(&self, g: usize) -> usize {
        self.groups[g].vars.len() - usize::from(self.groups[g].projective)
    }

    pub fn bezout_count(&self) -> u128 {
        let dims: Vec<usize> = (0..self.groups.len()).map(|g| self.needed(g)).collect();
        crate::poly::multihomogeneous_bezout(&self.degrees, &dims)
    }
}

#[derive(Clone, Debug)]
struct LinearFactor {
    group: usize,
    coeffs: Vec<C64>,
    constant: C64,
}

impl LinearFactor {
    fn eval(&self, groups: &[VarGroup], x: &[C64]) -> C64 {
        let mut acc = self.constant;
        for (a, &v) in self.coeffs.iter().zip(&groups[self.group].vars) {
            acc += *a * x[v];
        }
        acc
    }
}

/// Random linear-product start system for a [`ProductStructure`].
#[derive(Clone, Debug)]
pub struct LinearProductStart {
    structure: ProductStructure,
    factors: Vec<Vec<LinearFactor>>,
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let a = rng.gen_range(0.0..core::f64::consts::TAU);
    C64::new(math::cos(a), math::sin(a))
}

fn random_coeff<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    random_unit(rng) * rng.gen_range(0.5..1.5)
}

impl LinearProductStart {
    pub fn new<R: Rng + ?Sized>(structure: ProductStructure, rng: &mut R) -> Self {
        let factors = structure
            .degrees
            .iter()
            .map(|row| {
                let mut fs = Vec::new();
                for (g, &d) in row.iter().enumerate() {
                    for _ in 0..d {
                        let grp = &structure.groups[g];
                        fs.push(LinearFactor {
                            group: g,
                            coeffs: grp.vars.iter().map(|_| random_coeff(rng)).collect(),
                            constant: if grp.projective {
                                C64::zero()
                            } else {
                                random_coeff(rng)
                            },
                        });
                    }
                }
                fs
            })
            .collect();
        LinearProductStart { structure, factors }
    }

    pub fn structure(&self) -> &ProductStructure {
        &self.structure
    }

    /// Evaluates the start system and its Jacobian.
    pub fn eval(&self, x: &[C64], f: &mut [C64], jx: Option<&mut [C64]>) {
        let n = self.structure.dim();
        let groups = &self.structure.groups;
        let m = self.factors.len();
        let mut jx = jx;
        if let Some(j) = jx.as_deref_mut() {
            for v in j.iter_mut() {
                *v = C64::zero();
            }
        }
        for (i, fs) in self.factors.iter().enumerate() {
            let vals: Vec<C64> = fs.iter().map(|l| l.eval(groups, x)).collect();
            f[i] = vals.iter().fold(C64::one(), |a, b| a * b);
            if let Some(j) = jx.as_deref_mut() {
                for (k, l) in fs.iter().enumerate() {
                    let mut others = C64::one();
                    for (kk, v) in vals.iter().enumerate() {
                        if kk != k {
                            others *= *v;
                        }
                    }
                    for (a, &var) in l.coeffs.iter().zip(&groups[l.group].vars) {
                        j[i * n + var] += *a * others;
                    }
                }
            }
        }
        let mut row = m;
        let mut ci = 0;
        for g in groups.iter() {
            if !g.projective {
                continue;
            }
            let r = &self.structure.charts[ci];
            let mut acc = -C64::one();
            for (a, &v) in r.iter().zip(&g.vars) {
                acc += *a * x[v];
                if let Some(j) = jx.as_deref_mut() {
                    j[row * n + v] = *a;
                }
            }
            f[row] = acc;
            row += 1;
            ci += 1;
        }
    }

    /// All start solutions: one per admissible choice of a linear factor in
    /// every row.
    pub fn solutions(&self) -> Vec<Vec<C64>> {
        let ng = self.structure.groups.len();
        let mut remaining: Vec<usize> = (0..ng).map(|g| self.structure.needed(g)).collect();
        let mut choice = Vec::with_capacity(self.factors.len());
        let mut out = Vec::new();
        self.enumerate(0, &mut remaining, &mut choice, &mut out);
        out
    }

    fn enumerate(
        &self,
        row: usize,
        remaining: &mut [usize],
        choice: &mut Vec<usize>,
        out: &mut Vec<Vec<C64>>,
    ) {
        if row == self.factors.len() {
            if remaining.iter().all(|&r| r == 0) {
                if let Some(x) = self.solve_choice(choice) {
                    out.push(x);
                }
            }
            return;
        }
        let left = self.factors.len() - row;
        if remaining.iter().sum::<usize>() != left {
            return;
        }
        for (k, l) in self.factors[row].iter().enumerate() {
            if remaining[l.group] == 0 {
                continue;
            }
            remaining[l.group] -= 1;
            choice.push(k);
            self.enumerate(row + 1, remaining, choice, out);
            choice.pop();
            remaining[l.group] += 1;
        }
    }

    fn solve_choice(&self, choice: &[usize]) -> Option<Vec<C64>> {
        let n = self.structure.dim();
        let mut x = vec![C64::zero(); n];
        let mut ci = 0;
        for (g, grp) in self.structure.groups.iter().enumerate() {
            let k = grp.vars.len();
            let mut a = Vec::with_capacity(k * k);
            let mut b = Vec::with_capacity(k);
            for (row, &c) in choice.iter().enumerate() {
                let l = &self.factors[row][c];
                if l.group == g {
                    a.extend_from_slice(&l.coeffs);
                    b.push(-l.constant);
                }
            }
            if grp.projective {
                a.extend_from_slice(&self.structure.charts[ci]);
                b.push(C64::one());
                ci += 1;
            }
            let sol = math::solve(a, b)?;
            for (v, &var) in sol.iter().zip(&grp.vars) {
                x[var] = *v;
            }
        }
        Some(x)
    }
}

/// `H = γ (1 − s) G + s F(·; p)`.
struct StartTarget<'a, S: ParamSystem> {
    start: &'a LinearProductStart,
    target: &'a S,
    params: &'a [C64],
    gamma: C64,
}

impl<S: ParamSystem> Homotopy for StartTarget<'_, S> {
    fn dim(&self) -> usize {
        self.target.num_vars()
    }
    fn eval(&self, x: &[C64], s: f64, h: &mut [C64], hx: &mut [C64], hs: Option<&mut [C64]>) {
        let n = self.dim();
        let mut g = vec![C64::zero(); n];
        let mut gx = vec![C64::zero(); n * n];
        self.start.eval(x, &mut g, Some(&mut gx));
        self.target.eval(x, self.params, h, Some(hx), None);
        let a = self.gamma * (1.0 - s);
        if let Some(hs) = hs {
            for i in 0..n {
                hs[i] = h[i] - self.gamma * g[i];
            }
        }
        for i in 0..n {
            h[i] = a * g[i] + s * h[i];
        }
        for i in 0..n * n {
            hx[i] = a * gx[i] + s * hx[i];
        }
    }
}

/// Solves `f(x; p) = 0` with a linear-product start system built from
/// `structure`.
pub fn solve_linear_product<S: ParamSystem, R: Rng + ?Sized>(
    sys: &S,
    params: &[C64],
    structure: &ProductStructure,
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<TrackedSolution> {
    assert_eq!(structure.dim(), sys.num_vars());
    let start = LinearProductStart::new(structure.clone(), rng);
    let gamma = random_unit(rng);
    let hom = StartTarget {
        start: &start,
        target: sys,
        params,
        gamma,
    };
    start
        .solutions()
        .iter()
        .map(|x0| track(&hom, x0, st))
        .collect()
}

/// Total-degree homotopy for a square system without parameters.
pub fn solve_total_degree<S: ParamSystem, R: Rng + ?Sized>(
    sys: &S,
    degrees: &[u32],
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<TrackedSolution> {
    let n = sys.num_vars();
    let structure = ProductStructure {
        groups: vec![VarGroup {
            vars: (0..n).collect(),
            projective: false,
        }],
        degrees: degrees.iter().map(|&d| vec![d]).collect(),
        charts: Vec::new(),
    };
    solve_linear_product(sys, &[], &structure, rng, st)
}

/// `H(x, s) = f(x; p(s))` with
/// `p(s) = ((1 − s) γ p0 + s p1) / ((1 − s) γ + s)`.
pub struct ParameterHomotopy<'a, S: ParamSystem> {
    pub sys: &'a S,
    pub from: &'a [C64],
    pub to: &'a [C64],
    pub gamma: C64,
}

impl<S: ParamSystem> ParameterHomotopy<'_, S> {
    fn params_at(&self, s: f64) -> (Vec<C64>, C64) {
        let den = self.gamma * (1.0 - s) + s;
        if s == 1.0 {
            return (self.to.to_vec(), den);
        }
        let a = self.gamma * (1.0 - s) / den;
        let b = s / den;
        let p = self
            .from
            .iter()
            .zip(self.to)
            .map(|(p0, p1)| a * *p0 + b * *p1)
            .collect();
        (p, den)
    }
}

impl<S: ParamSystem> Homotopy for ParameterHomotopy<'_, S> {
    fn dim(&self) -> usize {
        self.sys.num_vars()
    }
    fn eval(&self, x: &[C64], s: f64, h: &mut [C64], hx: &mut [C64], hs: Option<&mut [C64]>) {
        let (p, den) = self.params_at(s);
        match hs {
            None => self.sys.eval(x, &p, h, Some(hx), None),
            Some(hs) => {
                let n = self.dim();
                let m = p.len();
                let mut jp = vec![C64::zero(); n * m];
                self.sys.eval(x, &p, h, Some(hx), Some(&mut jp));
                let scale = self.gamma / (den * den);
                let dp: Vec<C64> = self
                    .from
                    .iter()
                    .zip(self.to)
                    .map(|(p0, p1)| scale * (*p1 - *p0))
                    .collect();
                for i in 0..n {
                    let mut acc = C64::zero();
                    for k in 0..m {
                        acc += jp[i * m + k] * dp[k];
                    }
                    hs[i] = acc;
                }
            }
        }
    }
}

/// Start data for parameter homotopies: all isolated solutions at generic
/// complex parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct StartSet {
    pub params: Vec<C64>,
    pub solutions: Vec<Vec<C64>>,
    /// `γ` for the parameter path.
    pub gamma: C64,
}

impl StartSet {
    /// Tracks every start solution to the target parameters.
    pub fn track_to<S: ParamSystem>(
        &self,
        sys: &S,
        target: &[C64],
        st: &TrackerSettings,
    ) -> Vec<TrackedSolution> {
        let hom = ParameterHomotopy {
            sys,
            from: &self.params,
            to: target,
            gamma: self.gamma,
        };
        self.solutions.iter().map(|x0| track(&hom, x0, st)).collect()
    }
}

/// Newton refinement of `f(x; p) = 0` in complex arithmetic.
pub fn newton_refine<S: ParamSystem>(
    sys: &S,
    x: &mut [C64],
    p: &[C64],
    tol: f64,
    max_iter: usize,
) -> bool {
    let n = sys.num_vars();
    let mut f = vec![C64::zero(); n];
    let mut j = vec![C64::zero(); n * n];
    let mut piv = vec![0; n];
    for _ in 0..max_iter {
        sys.eval(x, p, &mut f, Some(&mut j), None);
        if !math::lu_factor(&mut j, n, &mut piv) {
            return false;
        }
        let mut dx: Vec<C64> = f.iter().map(|v| -*v).collect();
        math::lu_solve(&j, n, &piv, &mut dx);
        for (a, b) in x.iter_mut().zip(&dx) {
            *a += *b;
        }
        if math::norm_inf(&dx) <= tol * (1.0 + math::norm_inf(x)) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle_line() -> PolySystem {
        // x² + y² − 4 = 0, x − y − p = 0 (one parameter)
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let p = Polynomial::var(3, 2);
        let f1 = &(&(&x * &x) + &(&y * &y)) - &Polynomial::constant(3, 4.0);
        let f2 = &(&x - &y) - &p;
        let mut sys = PolySystem::with_generic_names(3, vec![f1, f2]);
        sys.num_params = 1;
        sys
    }

    #[test]
    fn total_degree_finds_circle_line_intersections() {
        let sys = PolyParamSystem::new(&circle_line());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // p fixed through the structure: treat as parameters [0]
        let structure = ProductStructure {
            groups: vec![VarGroup {
                vars: vec![0, 1],
                projective: false,
            }],
            degrees: vec![vec![2], vec![1]],
            charts: vec![],
        };
        let sols = solve_linear_product(&sys, &[C64::new(0.0, 0.0)], &structure, &mut rng, &TrackerSettings::default());
        let ok: Vec<_> = sols.iter().filter(|s| s.status == PathStatus::Success).collect();
        assert_eq!(ok.len(), 2);
        for s in ok {
            let r = s.x[0].re;
            assert!((r.abs() - 2f64.sqrt()).abs() < 1e-10);
            assert!((s.x[0] - s.x[1]).norm() < 1e-10);
        }
    }

    #[test]
    fn parallel_lines_diverge() {
        // x + y − 1 = 0 and x + y − 2 = 0 plus a quadratic perturbation-free row
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let f1 = &(&x * &x) - &(&y * &y);
        let f2 = &(&x - &y) - &Polynomial::constant(2, 1.0);
        let sys = PolyParamSystem::new(&PolySystem::with_generic_names(2, vec![f1, f2]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sols = solve_total_degree(&sys, &[2, 1], &mut rng, &TrackerSettings::default());
        let statuses: Vec<_> = sols.iter().map(|s| s.status).collect();
        assert_eq!(statuses.iter().filter(|&&s| s == PathStatus::Success).count(), 1);
        assert_eq!(statuses.iter().filter(|&&s| s == PathStatus::Diverged).count(), 1);
    }

    #[test]
    fn parameter_homotopy_moves_solutions() {
        let sys = PolyParamSystem::new(&circle_line());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p0 = vec![C64::new(0.3, 0.7)];
        let structure = ProductStructure {
            groups: vec![VarGroup {
                vars: vec![0, 1],
                projective: false,
            }],
            degrees: vec![vec![2], vec![1]],
            charts: vec![],
        };
        let st = TrackerSettings::default();
        let sols: Vec<Vec<C64>> = solve_linear_product(&sys, &p0, &structure, &mut rng, &st)
            .into_iter()
            .filter(|s| s.status == PathStatus::Success)
            .map(|s| s.x)
            .collect();
        assert_eq!(sols.len(), 2);
        let start = StartSet {
            params: p0,
            solutions: sols,
            gamma: random_unit(&mut rng),
        };
        let target = [C64::new(1.0, 0.0)];
        let out = start.track_to(&sys, &target, &st);
        for s in &out {
            assert_eq!(s.status, PathStatus::Success);
            let (x, y) = (s.x[0], s.x[1]);
            assert!((x * x + y * y - 4.0).norm() < 1e-10);
            assert!((x - y - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn projective_group_start_solutions() {
        // 2-homogeneous: (w) affine of dim 1, (l0, l1) projective P¹
        let structure = ProductStructure {
            groups: vec![
                VarGroup {
                    vars: vec![0],
                    projective: false,
                },
                VarGroup {
                    vars: vec![1, 2],
                    projective: true,
                },
            ],
            degrees: vec![vec![2, 0], vec![1, 1]],
            charts: vec![vec![C64::new(1.0, 0.2), C64::new(-0.4, 1.0)]],
        };
        assert_eq!(structure.bezout_count(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = LinearProductStart::new(structure, &mut rng);
        let sols = start.solutions();
        assert_eq!(sols.len(), 2);
        for x in sols {
            let mut f = vec![C64::zero(); 3];
            start.eval(&x, &mut f, None);
            assert!(math::norm_inf(&f) < 1e-12);
        }
    }

    #[test]
    fn dedup_merges_close_points() {
        let a = vec![C64::new(1.0, 0.0)];
        let b = vec![C64::new(1.0 + 1e-9, 0.0)];
        let c = vec![C64::new(2.0, 0.0)];
        assert_eq!(dedup(vec![a, b, c], 1e-6).len(), 2);
    }
}
