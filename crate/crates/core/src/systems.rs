//! Polynomial systems of the five-bar: the configuration equations `F`, the
//! input-singularity determinant `g`, the output-singularity functions and the
//! Fritz John system for the segment-to-singularity distance problem.
//!
//! Variable order for configurations is `z = (x, y, cφ, sφ, cψ, sψ)`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::fivebar::CanonicalDesign;
use crate::homotopy::{ParamSystem, ProductStructure, VarGroup};
use crate::math::{self, Scalar, C64};
use crate::poly::{multihomogeneous_bezout, CompiledSystem, PolySystem, Polynomial};

pub const Z_NAMES: [&str; 6] = ["x", "y", "c_phi", "s_phi", "c_psi", "s_psi"];

const X: usize = 0;
const Y: usize = 1;
const CF: usize = 2;
const SF: usize = 3;
const CP: usize = 4;
const SP: usize = 5;

fn z_names() -> Vec<String> {
    Z_NAMES.iter().map(|s| s.to_string()).collect()
}

fn v(i: usize) -> Polynomial {
    Polynomial::var(6, i)
}

fn k(c: f64) -> Polynomial {
    Polynomial::constant(6, c)
}

/// Coupler point `F` as a pair of affine polynomials in `z`.
fn coupler_joint(d: &CanonicalDesign) -> [Polynomial; 2] {
    let kk = d.l2 / d.rho2();
    let cx = v(CF).scale(d.l1);
    let cy = v(SF).scale(d.l1);
    let pcx = &v(X) - &cx;
    let pcy = &v(Y) - &cy;
    let ux = &pcx.scale(d.p * kk) + &pcy.scale(d.q * kk);
    let uy = &pcx.scale(-d.q * kk) + &pcy.scale(d.p * kk);
    [&cx + &ux, &cy + &uy]
}

fn pruned(mut p: Polynomial) -> Polynomial {
    p.prune(1e-14);
    p
}

/// The four configuration equations:
/// `F1 = |P − C|² − (p² + q²)`, `F2` the loop closure `|F − D|² − l4²`
/// (expanded with `F` eliminated through the coupler frame, reduced by the
/// Pythagorean identities and divided by `p² + q²`), `F3`, `F4` the
/// Pythagorean identities.
pub fn build_f(d: &CanonicalDesign) -> PolySystem {
    let s = d.rho2();
    let f1 = &(&(&v(X) * &v(X)) + &(&v(Y) * &v(Y)))
        - &(&(&v(X) * &v(CF)) + &(&v(Y) * &v(SF))).scale(2.0 * d.l1);
    let f1 = &f1 + &k(d.l1 * d.l1 - s);

    // G = s (F − D) = s C + l2 Qᵀ (P − C) − s D
    let cx = v(CF).scale(d.l1);
    let cy = v(SF).scale(d.l1);
    let pcx = &v(X) - &cx;
    let pcy = &v(Y) - &cy;
    let gx = &(&cx.scale(s) + &(&pcx.scale(d.l2 * d.p) + &pcy.scale(d.l2 * d.q)))
        - &(&k(s * d.b) + &v(CP).scale(s * d.l3));
    let gy = &(&cy.scale(s) + &(&pcx.scale(-d.l2 * d.q) + &pcy.scale(d.l2 * d.p)))
        - &v(SP).scale(s * d.l3);
    let f2 = &(&(&gx * &gx) + &(&gy * &gy)) - &k(s * s * d.l4 * d.l4);
    let f2 = f2
        .reduce_pythagorean(CF, SF)
        .reduce_pythagorean(CP, SP)
        .scale(1.0 / s);

    let f3 = &(&(&v(CF) * &v(CF)) + &(&v(SF) * &v(SF))) - &k(1.0);
    let f4 = &(&(&v(CP) * &v(CP)) + &(&v(SP) * &v(SP))) - &k(1.0);
    let mut sys = PolySystem::new(z_names(), vec![pruned(f1), pruned(f2), f3, f4]);
    sys.manifold_dim = Some(2);
    sys
}

/// `g = det ∂(F1, F2)/∂(x, y)`; vanishes on the configuration space exactly at
/// input singularities.
pub fn build_g(d: &CanonicalDesign) -> PolySystem {
    let f = build_f(d);
    let (f1, f2) = (&f.polys[0], &f.polys[1]);
    let g = &(&f1.derivative(X) * &f2.derivative(Y)) - &(&f1.derivative(Y) * &f2.derivative(X));
    let mut sys = PolySystem::new(z_names(), vec![pruned(g)]);
    sys.manifold_dim = Some(1);
    sys
}

/// `F` followed by `g`: five equations cutting out the input-singularity curve.
pub fn build_input_singular_curve(d: &CanonicalDesign) -> PolySystem {
    let mut sys = build_f(d);
    sys.polys.push(build_g(d).polys.remove(0));
    sys.manifold_dim = Some(1);
    sys
}

/// Output-singularity functions as polynomials:
/// `h1 = cross(C, P − C)` and `h2 = cross(D − B, F − D)`.
pub fn build_output_sing(d: &CanonicalDesign) -> PolySystem {
    let h1 = (&(&v(CF) * &v(Y)) - &(&v(SF) * &v(X))).scale(d.l1);
    let [fx, fy] = coupler_joint(d);
    // cross(l3 eψ, F − B − l3 eψ) = l3 (cψ (Fy) − sψ (Fx − b))
    let h2 = (&(&v(CP) * &fy) - &(&v(SP) * &(&fx - &k(d.b)))).scale(d.l3);
    PolySystem::new(z_names(), vec![pruned(h1), pruned(h2)])
}

/// `F` plus one output-singularity function (`which` = 0 for `h1`, 1 for `h2`).
pub fn build_output_singular_curve(d: &CanonicalDesign, which: usize) -> PolySystem {
    let mut sys = build_f(d);
    sys.polys.push(build_output_sing(d).polys.remove(which));
    sys.manifold_dim = Some(1);
    sys
}

/// Gauss-Newton projection of a point onto `{F = 0}` using minimum-norm steps.
pub fn project_to_zero_set(
    f: &CompiledSystem,
    z: &[f64],
    tol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let n = f.nvars();
    let m = f.npolys();
    let mut x = z.to_vec();
    let mut val = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    for _ in 0..max_iter {
        f.eval(&x, &mut val, Some(&mut jac));
        if math::norm_inf(&val) <= tol {
            return Some(x);
        }
        let rhs: Vec<f64> = val.iter().map(|v| -v).collect();
        let dx = math::min_norm_solve(&jac, m, n, &rhs)?;
        for (a, b) in x.iter_mut().zip(&dx) {
            *a += b;
        }
    }
    f.eval(&x, &mut val, None);
    (math::norm_inf(&val) <= tol).then_some(x)
}

/// Number of `F`/`g` constraint polynomials in the Fritz John system.
pub const NUM_CONSTRAINTS: usize = 5;

/// The Fritz John system of `min ‖c(t) − w‖²` over `w ∈ I`, `0 ≤ t ≤ 1`.
///
/// Unknowns are `(w0..w5, t, λ0..λ7)` followed by the parameters
/// `(c0, c1) ∈ R⁶ × R⁶`. Equation blocks: `F(w)` (4), `g(w)` (1), gradient
/// stationarity in `(w, t)` (7), complementary slackness `λ6 t`,
/// `λ7 (1 − t)` (2). `λ` is projective; the chart is chosen by the solver.
#[derive(Clone, Debug)]
pub struct FritzJohnSystem {
    pub base: PolySystem,
    /// Indices of the affine group `(w, t)`.
    pub group_wt: Vec<usize>,
    /// Indices of the projective group `λ`.
    pub group_lambda: Vec<usize>,
}

const FJ_W: usize = 0;
const FJ_T: usize = 6;
const FJ_L: usize = 7;
const FJ_C0: usize = 15;
const FJ_C1: usize = 21;
const FJ_NV: usize = 27;

fn embed(p: &Polynomial, nvars: usize, map: &[usize]) -> Polynomial {
    Polynomial::from_terms(
        nvars,
        p.terms().map(|(e, c)| {
            let mut e2 = vec![0u32; nvars];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    e2[map[i]] += k;
                }
            }
            (e2, *c)
        }),
    )
}

/// Substitutes variable `i` by a polynomial.
fn compose(p: &Polynomial, i: usize, by: &Polynomial) -> Polynomial {
    let n = p.nvars();
    let mut out = Polynomial::zero(n);
    for (e, c) in p.terms() {
        let mut e2 = e.clone();
        let deg = e2[i];
        e2[i] = 0;
        let mut term = Polynomial::from_terms(n, [(e2, *c)]);
        for _ in 0..deg {
            term = &term * by;
        }
        out = &out + &term;
    }
    out
}

/// Keeps the listed variables (in the given order) and drops the rest; the
/// dropped variables must not occur.
fn compact(p: &Polynomial, keep: &[usize]) -> Polynomial {
    let n = keep.len();
    Polynomial::from_terms(
        n,
        p.terms().map(|(e, c)| {
            let total: u32 = e.iter().sum();
            let e2: Vec<u32> = keep.iter().map(|&v| e[v]).collect();
            assert_eq!(total, e2.iter().sum::<u32>(), "dropped variable occurs");
            (e2, *c)
        }),
    )
}

pub fn build_fritz_john(d: &CanonicalDesign) -> FritzJohnSystem {
    let cons = build_input_singular_curve(d);
    let n = FJ_NV;
    let wmap: Vec<usize> = (0..6).map(|j| FJ_W + j).collect();
    let lifted: Vec<Polynomial> = cons.polys.iter().map(|p| embed(p, n, &wmap)).collect();
    let var = |i: usize| Polynomial::var(n, i);
    let t = var(FJ_T);
    // ‖c0 + t (c1 − c0) − w‖²
    let mut obj = Polynomial::zero(n);
    for j in 0..6 {
        let c0 = var(FJ_C0 + j);
        let dc = &var(FJ_C1 + j) - &c0;
        let r = &(&c0 + &(&t * &dc)) - &var(FJ_W + j);
        obj = &obj + &(&r * &r);
    }
    let one_minus_t = &Polynomial::constant(n, 1.0) - &t;
    let mut polys = lifted.clone();
    for vi in (0..6).map(|j| FJ_W + j).chain(core::iter::once(FJ_T)) {
        let mut e = &var(FJ_L) * &obj.derivative(vi);
        for (k, f) in lifted.iter().enumerate() {
            e = &e + &(&var(FJ_L + 1 + k) * &f.derivative(vi));
        }
        e = &e + &(&var(FJ_L + 6) * &t.derivative(vi));
        e = &e + &(&var(FJ_L + 7) * &one_minus_t.derivative(vi));
        polys.push(e);
    }
    polys.push(&var(FJ_L + 6) * &t);
    polys.push(&var(FJ_L + 7) * &one_minus_t);

    let mut names: Vec<String> = (0..6).map(|j| alloc::format!("w{j}")).collect();
    names.push("t".into());
    names.extend((0..8).map(|j| alloc::format!("l{j}")));
    names.extend((0..6).map(|j| alloc::format!("a{j}")));
    names.extend((0..6).map(|j| alloc::format!("b{j}")));
    let mut base = PolySystem::new(names, polys);
    base.num_params = 12;
    FritzJohnSystem {
        base,
        group_wt: (0..7).collect(),
        group_lambda: (FJ_L..FJ_L + 8).collect(),
    }
}

impl FritzJohnSystem {
    /// Per-equation degrees in the groups `(w, t)` and `λ`.
    pub fn group_degrees(&self) -> Vec<Vec<u32>> {
        self.base
            .polys
            .iter()
            .map(|p| vec![p.degree_in(&self.group_wt), p.degree_in(&self.group_lambda)])
            .collect()
    }

    /// Two-homogeneous Bézout number with `(w, t) ∈ C⁷` and `λ ∈ P⁷`.
    pub fn bezout_count(&self) -> u128 {
        multihomogeneous_bezout(
            &self.group_degrees(),
            &[self.group_wt.len(), self.group_lambda.len() - 1],
        )
    }

    /// The `t = 0` sub-problem (critical points of the distance from a single
    /// point `c` to the singular curve).
    ///
    /// Unknowns `(w0..w5, λ0..λ5)`, parameters `c ∈ R⁶`. Obtained by setting
    /// `t = 0`, `λ7 = 0` and dropping the `t`-stationarity and slackness rows
    /// (they only determine `λ6`).
    pub fn node_restriction(&self) -> PolySystem {
        let zero = C64::new(0.0, 0.0);
        let polys: Vec<Polynomial> = self.base.polys[..11]
            .iter()
            .map(|p| {
                p.substitute(FJ_T, zero)
                    .substitute(FJ_L + 6, zero)
                    .substitute(FJ_L + 7, zero)
            })
            .collect();
        let mut keep: Vec<usize> = (0..6).collect();
        keep.extend(FJ_L..FJ_L + 6);
        keep.extend(FJ_C0..FJ_C0 + 6);
        let names = keep.iter().map(|&i| self.base.var_names[i].clone()).collect();
        let polys = polys.iter().map(|p| compact(p, &keep)).collect();
        let mut sys = PolySystem::new(names, polys);
        sys.num_params = 6;
        sys
    }

    /// The interior sub-problem `0 < t < 1` with `λ6 = λ7 = 0`.
    ///
    /// The segment is re-parameterised as `c(t) = c0 + t v` with parameters
    /// `(c0, v)`, and the `t`-stationarity row `λ0 · 2 (c(t) − w)·v` is divided
    /// by `2 λ0` (no solution has `λ0 = 0` when the singular curve is smooth).
    /// Unknowns `(w0..w5, t, λ0..λ5)`.
    pub fn interior_restriction(&self) -> PolySystem {
        let zero = C64::new(0.0, 0.0);
        let n = FJ_NV;
        let mut polys: Vec<Polynomial> = self.base.polys[..12]
            .iter()
            .map(|p| p.substitute(FJ_L + 6, zero).substitute(FJ_L + 7, zero))
            .collect();
        polys[11] = polys[11]
            .substitute(FJ_L, C64::new(1.0, 0.0))
            .scale(0.5);
        // c1 = c0 + v, reusing the c1 slots for v
        for p in polys.iter_mut() {
            for j in 0..6 {
                let by = &Polynomial::var(n, FJ_C0 + j) + &Polynomial::var(n, FJ_C1 + j);
                *p = compose(p, FJ_C1 + j, &by);
            }
        }
        let mut keep: Vec<usize> = (0..7).collect();
        keep.extend(FJ_L..FJ_L + 6);
        keep.extend(FJ_C0..FJ_C0 + 12);
        let mut names: Vec<String> = keep.iter().map(|&i| self.base.var_names[i].clone()).collect();
        for (j, name) in names[19..].iter_mut().enumerate() {
            *name = alloc::format!("v{j}");
        }
        let polys = polys
            .iter()
            .map(|p| {
                let mut q = compact(p, &keep);
                q.prune(1e-14);
                q
            })
            .collect();
        let mut sys = PolySystem::new(names, polys);
        sys.num_params = 12;
        sys
    }
}

/// Appends the affine chart `Σ r_i λ_i = 1` for the listed `λ` variables.
pub fn with_chart(sys: &PolySystem, lambda_vars: &[usize], r: &[C64]) -> PolySystem {
    let n = sys.num_vars_total();
    let mut chart = Polynomial::constant(n, -1.0);
    for (&i, &ri) in lambda_vars.iter().zip(r) {
        chart = &chart + &Polynomial::var(n, i).scale(ri);
    }
    let mut out = sys.clone();
    out.polys.push(chart);
    out
}

/// Dense real quadratic `q(w) = wᵀ A w + b·w + c` on `R⁶`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadric {
    pub a: [[f64; 6]; 6],
    pub b: [f64; 6],
    pub c: f64,
}

impl Quadric {
    /// Extracts the quadric from a real polynomial of degree ≤ 2 in 6 variables.
    pub fn from_polynomial(p: &Polynomial) -> Option<Quadric> {
        if p.nvars() != 6 || p.total_degree() > 2 {
            return None;
        }
        let mut q = Quadric {
            a: [[0.0; 6]; 6],
            b: [0.0; 6],
            c: 0.0,
        };
        for (e, c) in p.terms() {
            if c.im != 0.0 {
                return None;
            }
            let nz: Vec<(usize, u32)> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (i, k))
                .collect();
            match nz.as_slice() {
                [] => q.c += c.re,
                [(i, 1)] => q.b[*i] += c.re,
                [(i, 2)] => q.a[*i][*i] += c.re,
                [(i, 1), (j, 1)] => {
                    q.a[*i][*j] += 0.5 * c.re;
                    q.a[*j][*i] += 0.5 * c.re;
                }
                _ => return None,
            }
        }
        Some(q)
    }

    /// Value and gradient at `w`.
    #[inline]
    pub fn eval<T: Scalar>(&self, w: &[T]) -> (T, [T; 6]) {
        let mut grad = [T::zero(); 6];
        let mut val = T::from_f64(self.c);
        for i in 0..6 {
            let mut aw = T::zero();
            for j in 0..6 {
                if self.a[i][j] != 0.0 {
                    aw += T::from_f64(self.a[i][j]) * w[j];
                }
            }
            val += (aw + T::from_f64(self.b[i])) * w[i];
            grad[i] = aw + aw + T::from_f64(self.b[i]);
        }
        (val, grad)
    }
}

/// The five constraint quadrics `(F1, F2, F3, F4, g)`.
pub fn constraint_quadrics(d: &CanonicalDesign) -> [Quadric; NUM_CONSTRAINTS] {
    let sys = build_input_singular_curve(d);
    let q: Vec<Quadric> = sys
        .polys
        .iter()
        .map(|p| Quadric::from_polynomial(p).expect("constraints are real quadrics"))
        .collect();
    [q[0], q[1], q[2], q[3], q[4]]
}

/// Which Fritz John problem a [`FritzJohnEval`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FjKind {
    /// Unknowns `(w, λ0..λ5)`, parameters `c`.
    Node,
    /// Unknowns `(w, t, λ0..λ5)`, parameters `(c0, v)`.
    Interior,
    /// Unknowns `(w, t, λ0..λ7)`, parameters `(c0, c1)`.
    Full,
}

impl FjKind {
    pub fn num_lambdas(self) -> usize {
        match self {
            FjKind::Full => 8,
            _ => 6,
        }
    }

    pub fn num_vars(self) -> usize {
        match self {
            FjKind::Node => 12,
            FjKind::Interior => 13,
            FjKind::Full => 15,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            FjKind::Node => 6,
            _ => 12,
        }
    }

    /// Offset of `λ0` among the unknowns.
    pub fn lambda_offset(self) -> usize {
        match self {
            FjKind::Node => 6,
            _ => 7,
        }
    }

    /// Degree structure with `(w[, t])` affine and `λ` projective.
    pub fn product_structure(self, chart: &[C64]) -> ProductStructure {
        let lo = self.lambda_offset();
        let nl = self.num_lambdas();
        let mut degrees = vec![vec![2, 0]; NUM_CONSTRAINTS];
        degrees.extend(core::iter::repeat(vec![1, 1]).take(6));
        match self {
            FjKind::Node => {}
            FjKind::Interior => degrees.push(vec![1, 0]),
            FjKind::Full => degrees.extend(core::iter::repeat(vec![1, 1]).take(3)),
        }
        ProductStructure {
            groups: vec![
                VarGroup {
                    vars: (0..lo).collect(),
                    projective: false,
                },
                VarGroup {
                    vars: (lo..lo + nl).collect(),
                    projective: true,
                },
            ],
            degrees,
            charts: vec![chart.to_vec()],
        }
    }
}

/// Dense evaluator of the Fritz John systems (with the `λ` chart row
/// appended) exploiting that every constraint is a quadric.
#[derive(Clone, Debug)]
pub struct FritzJohnEval {
    pub kind: FjKind,
    quads: [Quadric; NUM_CONSTRAINTS],
    chart: Vec<C64>,
}

impl FritzJohnEval {
    pub fn new(kind: FjKind, quads: [Quadric; NUM_CONSTRAINTS], chart: Vec<C64>) -> Self {
        assert_eq!(chart.len(), kind.num_lambdas());
        FritzJohnEval { kind, quads, chart }
    }

    pub fn chart(&self) -> &[C64] {
        &self.chart
    }

    /// The same system through the generic polynomial route.
    pub fn to_poly_system(&self, d: &CanonicalDesign) -> PolySystem {
        let fj = build_fritz_john(d);
        let sys = match self.kind {
            FjKind::Node => fj.node_restriction(),
            FjKind::Interior => fj.interior_restriction(),
            FjKind::Full => fj.base,
        };
        let lo = self.kind.lambda_offset();
        let lambdas: Vec<usize> = (lo..lo + self.kind.num_lambdas()).collect();
        with_chart(&sys, &lambdas, &self.chart)
    }
}

impl ParamSystem for FritzJohnEval {
    fn num_vars(&self) -> usize {
        self.kind.num_vars()
    }

    fn num_params(&self) -> usize {
        self.kind.num_params()
    }

    fn eval(
        &self,
        x: &[C64],
        p: &[C64],
        f: &mut [C64],
        jx: Option<&mut [C64]>,
        jp: Option<&mut [C64]>,
    ) {
        let kind = self.kind;
        let n = kind.num_vars();
        let np = kind.num_params();
        let lo = kind.lambda_offset();
        let w = &x[..6];
        let lam = &x[lo..lo + kind.num_lambdas()];
        let zero = C64::zero();
        let two = C64::new(2.0, 0.0);
        let t = if kind == FjKind::Node { zero } else { x[6] };
        let c0 = &p[..6];
        // direction of the segment
        let mut v = [zero; 6];
        match kind {
            FjKind::Node => {}
            FjKind::Interior => v.copy_from_slice(&p[6..12]),
            FjKind::Full => {
                for j in 0..6 {
                    v[j] = p[6 + j] - p[j];
                }
            }
        }
        let mut ct = [zero; 6];
        for j in 0..6 {
            ct[j] = c0[j] + t * v[j];
        }
        let mut grads = [[zero; 6]; NUM_CONSTRAINTS];
        for (k, q) in self.quads.iter().enumerate() {
            let (val, g) = q.eval(w);
            f[k] = val;
            grads[k] = g;
        }
        let l0 = lam[0];
        for j in 0..6 {
            let mut acc = two * l0 * (w[j] - ct[j]);
            for k in 0..NUM_CONSTRAINTS {
                acc += lam[k + 1] * grads[k][j];
            }
            f[NUM_CONSTRAINTS + j] = acc;
        }
        let mut row = NUM_CONSTRAINTS + 6;
        let mut resid_v = zero;
        let mut vv = zero;
        for j in 0..6 {
            resid_v += (ct[j] - w[j]) * v[j];
            vv += v[j] * v[j];
        }
        match kind {
            FjKind::Node => {}
            FjKind::Interior => {
                f[row] = resid_v;
                row += 1;
            }
            FjKind::Full => {
                f[row] = two * l0 * resid_v + lam[6] - lam[7];
                f[row + 1] = lam[6] * t;
                f[row + 2] = lam[7] * (C64::one() - t);
                row += 3;
            }
        }
        let chart_row = row;
        let mut acc = -C64::one();
        for (r, l) in self.chart.iter().zip(lam) {
            acc += *r * *l;
        }
        f[chart_row] = acc;

        if let Some(jx) = jx {
            for e in jx.iter_mut() {
                *e = zero;
            }
            for k in 0..NUM_CONSTRAINTS {
                jx[k * n..k * n + 6].copy_from_slice(&grads[k]);
            }
            for j in 0..6 {
                let r = (NUM_CONSTRAINTS + j) * n;
                jx[r + j] += two * l0;
                for k in 0..NUM_CONSTRAINTS {
                    let lk = lam[k + 1];
                    let a = &self.quads[k].a[j];
                    for m in 0..6 {
                        if a[m] != 0.0 {
                            jx[r + m] += lk * (2.0 * a[m]);
                        }
                    }
                    jx[r + lo + k + 1] = grads[k][j];
                }
                jx[r + lo] = two * (w[j] - ct[j]);
                if kind != FjKind::Node {
                    jx[r + 6] = -two * l0 * v[j];
                }
            }
            let r = (NUM_CONSTRAINTS + 6) * n;
            match kind {
                FjKind::Node => {}
                FjKind::Interior => {
                    for j in 0..6 {
                        jx[r + j] = -v[j];
                    }
                    jx[r + 6] = vv;
                }
                FjKind::Full => {
                    for j in 0..6 {
                        jx[r + j] = -two * l0 * v[j];
                    }
                    jx[r + 6] = two * l0 * vv;
                    jx[r + lo] = two * resid_v;
                    jx[r + lo + 6] = C64::one();
                    jx[r + lo + 7] = -C64::one();
                    let r1 = r + n;
                    jx[r1 + 6] = lam[6];
                    jx[r1 + lo + 6] = t;
                    let r2 = r1 + n;
                    jx[r2 + 6] = -lam[7];
                    jx[r2 + lo + 7] = C64::one() - t;
                }
            }
            for (i, rc) in self.chart.iter().enumerate() {
                jx[chart_row * n + lo + i] = *rc;
            }
        }

        if let Some(jp) = jp {
            for e in jp.iter_mut() {
                *e = zero;
            }
            let one = C64::one();
            for j in 0..6 {
                let r = (NUM_CONSTRAINTS + j) * np;
                match kind {
                    FjKind::Node => jp[r + j] = -two * l0,
                    FjKind::Interior => {
                        jp[r + j] = -two * l0;
                        jp[r + 6 + j] = -two * l0 * t;
                    }
                    FjKind::Full => {
                        jp[r + j] = -two * l0 * (one - t);
                        jp[r + 6 + j] = -two * l0 * t;
                    }
                }
            }
            let r = (NUM_CONSTRAINTS + 6) * np;
            match kind {
                FjKind::Node => {}
                FjKind::Interior => {
                    for j in 0..6 {
                        jp[r + j] = v[j];
                        jp[r + 6 + j] = (ct[j] - w[j]) + t * v[j];
                    }
                }
                FjKind::Full => {
                    for j in 0..6 {
                        let e = ct[j] - w[j];
                        jp[r + j] = two * l0 * ((one - t) * v[j] - e);
                        jp[r + 6 + j] = two * l0 * (t * v[j] + e);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fivebar::{canonicalize, forward_kinematics, input_sing_value, FiveBarDesign};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case(i: usize) -> CanonicalDesign {
        canonicalize(if i == 1 {
            &FiveBarDesign::CASE_1
        } else {
            &FiveBarDesign::CASE_2
        })
        .unwrap()
    }

    #[test]
    fn f_degrees() {
        let f = build_f(&case(1));
        let degs: Vec<u32> = f.polys.iter().map(|p| p.total_degree()).collect();
        assert_eq!(degs, vec![2, 2, 2, 2]);
        assert_eq!(build_g(&case(1)).polys[0].total_degree(), 2);
    }

    #[test]
    fn pythagorean_rows_vanish_on_unit_circle() {
        let f = build_f(&case(2));
        let z = [0.3, -0.1, 1.0, 0.0, 0.0, 1.0];
        let v = f.evaluate(&z).unwrap();
        assert_eq!(v[2], 0.0);
        assert_eq!(v[3], 0.0);
    }

    #[test]
    fn f_vanishes_on_fk_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in [1, 2] {
            let d = case(i);
            let f = build_f(&d);
            let mut checked = 0;
            while checked < 100 {
                let phi = rng.gen_range(-3.2..3.2);
                let psi = rng.gen_range(-3.2..3.2);
                for s in forward_kinematics(&d, phi, psi) {
                    let r = f.evaluate(&s.config.to_array()).unwrap();
                    assert!(math::norm_inf(&r) <= 1e-10, "{r:?}");
                    checked += 1;
                }
            }
        }
    }

    #[test]
    fn g_sign_matches_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in [1, 2] {
            let d = case(i);
            let g = build_g(&d);
            let mut global: Option<f64> = None;
            let mut n = 0;
            while n < 1000 {
                let sols = forward_kinematics(&d, rng.gen_range(-3.2..3.2), rng.gen_range(-3.2..3.2));
                for s in sols {
                    let gv = g.evaluate(&s.config.to_array()).unwrap()[0];
                    let iv = input_sing_value(&d, &s.config);
                    if iv.abs() < 1e-9 {
                        continue;
                    }
                    let sign = (gv * iv).signum();
                    match global {
                        None => global = Some(sign),
                        Some(gs) => assert_eq!(gs, sign),
                    }
                    n += 1;
                }
            }
        }
    }

    #[test]
    fn output_sing_polys_match_geometry() {
        let d = case(1);
        let h = build_output_sing(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            for s in forward_kinematics(&d, rng.gen_range(-3.2..3.2), rng.gen_range(-3.2..3.2)) {
                let (h1, h2) = crate::fivebar::output_sing_values(&d, &s.config);
                let v = h.evaluate(&s.config.to_array()).unwrap();
                assert!((v[0] - h1).abs() < 1e-12 && (v[1] - h2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fritz_john_bezout_count() {
        let fj = build_fritz_john(&case(1));
        assert_eq!(fj.base.len(), 14);
        assert_eq!(fj.base.num_vars(), 15);
        assert_eq!(fj.bezout_count(), 1152);
    }

    #[test]
    fn zero_distance_stationary_point() {
        // w = c0 on I, t = 0, λ = (1, 0, ..., 0) except λ6 balancing the t row
        let d = case(1);
        let fj = build_fritz_john(&d);
        let curve = build_input_singular_curve(&d).compile();
        // find a point of I: FK near a tangency, then project
        let mut w = None;
        for k in 0..2000 {
            let phi = -3.1 + 6.2 * (k as f64) / 2000.0;
            for psi_k in 0..200 {
                let psi = -3.1 + 6.2 * (psi_k as f64) / 200.0;
                let sols = forward_kinematics(&d, phi, psi);
                if let Some(s) = sols.first() {
                    if input_sing_value(&d, &s.config).abs() < 1e-3 {
                        w = project_to_zero_set(&curve, &s.config.to_array(), 1e-13, 30);
                    }
                }
                if w.is_some() {
                    break;
                }
            }
            if w.is_some() {
                break;
            }
        }
        let w = w.expect("a point on I");
        let c1 = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let mut x = vec![0.0; 27];
        x[..6].copy_from_slice(&w);
        x[7] = 1.0;
        // t row: λ0·2(c(0) − w)·(c1 − c0) + λ6 − λ7 = 0, with c(0) = w → λ6 = 0
        x[15..21].copy_from_slice(&w);
        x[21..27].copy_from_slice(&c1);
        let r = fj.base.evaluate(&x).unwrap();
        assert!(math::norm_inf(&r) <= 1e-8, "{r:?}");
    }

    #[test]
    fn restrictions_have_expected_shape() {
        let fj = build_fritz_john(&case(2));
        let node = fj.node_restriction();
        assert_eq!((node.len(), node.num_vars(), node.num_params), (11, 12, 6));
        let int = fj.interior_restriction();
        assert_eq!((int.len(), int.num_vars(), int.num_params), (12, 13, 12));
    }

    #[test]
    fn quadric_extraction_reproduces_values() {
        let d = case(2);
        let sys = build_input_singular_curve(&d);
        let qs = constraint_quadrics(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let z: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let vals = sys.evaluate(&z).unwrap();
            let jac = sys.jacobian(&z).unwrap();
            for (i, q) in qs.iter().enumerate() {
                let (v, g) = q.eval(&z);
                assert!((v - vals[i]).abs() < 1e-12);
                for j in 0..6 {
                    assert!((g[j] - jac[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    fn random_c<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn fast_evaluator_matches_polynomial_route() {
        use crate::homotopy::PolyParamSystem;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case_id in [1, 2] {
            let d = case(case_id);
            for kind in [FjKind::Node, FjKind::Interior, FjKind::Full] {
                let chart = random_c(&mut rng, kind.num_lambdas());
                let fast = FritzJohnEval::new(kind, constraint_quadrics(&d), chart);
                let slow = PolyParamSystem::new(&fast.to_poly_system(&d));
                assert_eq!(slow.num_vars(), fast.num_vars());
                assert_eq!(slow.num_params(), fast.num_params());
                let (n, m) = (kind.num_vars(), kind.num_params());
                for _ in 0..5 {
                    let x = random_c(&mut rng, n);
                    let p = random_c(&mut rng, m);
                    let mut f1 = vec![C64::zero(); n];
                    let mut f2 = vec![C64::zero(); n];
                    let mut jx1 = vec![C64::zero(); n * n];
                    let mut jx2 = vec![C64::zero(); n * n];
                    let mut jp1 = vec![C64::zero(); n * m];
                    let mut jp2 = vec![C64::zero(); n * m];
                    fast.eval(&x, &p, &mut f1, Some(&mut jx1), Some(&mut jp1));
                    slow.eval(&x, &p, &mut f2, Some(&mut jx2), Some(&mut jp2));
                    let diff = |a: &[C64], b: &[C64]| {
                        a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
                    };
                    assert!(diff(&f1, &f2) < 1e-11, "{kind:?} values");
                    assert!(diff(&jx1, &jx2) < 1e-11, "{kind:?} jx");
                    assert!(diff(&jp1, &jp2) < 1e-11, "{kind:?} jp");
                }
            }
        }
    }

    #[test]
    fn product_structures_have_expected_root_counts() {
        let c = vec![C64::one(); 6];
        assert_eq!(FjKind::Node.product_structure(&c).bezout_count(), 192);
        assert_eq!(FjKind::Interior.product_structure(&c).bezout_count(), 192);
        let c8 = vec![C64::one(); 8];
        assert_eq!(FjKind::Full.product_structure(&c8).bezout_count(), 1152);
    }
}
