//! Sparse multivariate polynomials with complex coefficients.
//!
//! [`Polynomial`] is the construction-time representation (a map from
//! exponent vectors to coefficients). [`PolySystem::compile`] produces a flat
//! evaluator that computes values and Jacobians in one pass.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math::{Scalar, C64};

/// Exponent vector of a monomial; its length equals the number of variables.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<C64>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    /// The polynomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, C64::new(1.0, 0.0));
        p
    }

    /// Builds a polynomial from terms, summing duplicate exponent vectors.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == C64::new(0.0, 0.0) {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> C64 {
        self.terms.get(exps).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Degree in the subset of variables `vars`.
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&v| e[v]).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(e, v)| (e.clone(), *v * c)))
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, *c * e[i] as f64);
            }
        }
        out
    }

    /// Replaces variable `i` by the constant `value`.
    pub fn substitute(&self, i: usize, value: C64) -> Self {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] = 0;
            out.add_term(e2, *c * value.powu(k));
        }
        out
    }

    /// Drops terms whose coefficient modulus is below `rel_tol` times the largest.
    pub fn prune(&mut self, rel_tol: f64) {
        let max = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = max * rel_tol;
        self.terms.retain(|_, c| c.norm() > cut);
    }

    /// Rewrites the polynomial modulo `v_s² = 1 − v_c²` (a Pythagorean identity).
    pub fn reduce_pythagorean(&self, v_c: usize, v_s: usize) -> Self {
        let mut work: Vec<(Monomial, C64)> =
            self.terms.iter().map(|(e, c)| (e.clone(), *c)).collect();
        let mut out = Polynomial::zero(self.nvars);
        while let Some((e, c)) = work.pop() {
            if e[v_s] >= 2 {
                let mut a = e.clone();
                a[v_s] -= 2;
                let mut b = a.clone();
                b[v_c] += 2;
                work.push((a, c));
                work.push((b, -c));
            } else {
                out.add_term(e, c);
            }
        }
        out
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut t = T::from_c64(*c);
            for (v, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= x[v];
                }
            }
            acc += t;
        }
        acc
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, *c1 * *c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// A system of polynomials. The trailing `num_params` variables are
/// parameters: they are inputs to evaluation but not unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    pub var_names: Vec<String>,
    pub num_params: usize,
    /// Dimension of the solution set this system is meant to cut out, if known.
    pub manifold_dim: Option<usize>,
    pub polys: Vec<Polynomial>,
}

impl PolySystem {
    pub fn new(var_names: Vec<String>, polys: Vec<Polynomial>) -> Self {
        let n = var_names.len();
        assert!(polys.iter().all(|p| p.nvars() == n));
        PolySystem {
            var_names,
            num_params: 0,
            manifold_dim: None,
            polys,
        }
    }

    pub fn with_generic_names(nvars: usize, polys: Vec<Polynomial>) -> Self {
        Self::new((0..nvars).map(|i| alloc::format!("x{i}")).collect(), polys)
    }

    /// Total variable count including parameters.
    pub fn num_vars_total(&self) -> usize {
        self.var_names.len()
    }

    /// Number of unknowns (excluding parameters).
    pub fn num_vars(&self) -> usize {
        self.var_names.len() - self.num_params
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.len() == self.num_vars()
    }

    fn check_point(&self, n: usize) -> Result<()> {
        if n != self.num_vars_total() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars_total(),
                got: n,
            });
        }
        Ok(())
    }

    pub fn evaluate<T: Scalar>(&self, point: &[T]) -> Result<Vec<T>> {
        self.check_point(point.len())?;
        Ok(self.polys.iter().map(|p| p.eval(point)).collect())
    }

    /// Jacobian with respect to every variable (parameters included), row-major.
    pub fn jacobian<T: Scalar>(&self, point: &[T]) -> Result<Vec<Vec<T>>> {
        self.check_point(point.len())?;
        let compiled = self.compile();
        let n = self.num_vars_total();
        let mut f = vec![T::zero(); self.len()];
        let mut j = vec![T::zero(); self.len() * n];
        compiled.eval(point, &mut f, Some(&mut j));
        Ok(j.chunks(n).map(|r| r.to_vec()).collect())
    }

    pub fn compile(&self) -> CompiledSystem {
        CompiledSystem::new(self)
    }

    /// Plain-text export: a header line with the variable names, then one
    /// polynomial per line as `+ (re,im)*x^2*y` terms.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "variables {} params {}: {}",
            self.num_vars(),
            self.num_params,
            self.var_names.join(" ")
        );
        for p in &self.polys {
            if p.is_zero() {
                s.push_str("0\n");
                continue;
            }
            let mut first = true;
            for (e, c) in p.terms() {
                if !first {
                    s.push_str(" + ");
                }
                first = false;
                let _ = write!(s, "({:e},{:e})", c.re, c.im);
                for (v, &k) in e.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => {
                            let _ = write!(s, "*{}", self.var_names[v]);
                        }
                        _ => {
                            let _ = write!(s, "*{}^{}", self.var_names[v], k);
                        }
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    /// Inverse of [`PolySystem::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Numerical(alloc::format!("malformed system text: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let (counts, names) = header.split_once(':').ok_or_else(|| bad("header"))?;
        let nums: Vec<usize> = counts
            .split_whitespace()
            .filter_map(|t| t.parse().ok())
            .collect();
        if nums.len() != 2 {
            return Err(bad("header counts"));
        }
        let var_names: Vec<String> = names.split_whitespace().map(|s| s.to_string()).collect();
        let nvars = var_names.len();
        if nvars != nums[0] + nums[1] {
            return Err(bad("variable count"));
        }
        let mut polys = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut p = Polynomial::zero(nvars);
            if line.trim() != "0" {
                for term in line.split(" + ") {
                    let mut factors = term.split('*');
                    let coef = factors.next().ok_or_else(|| bad("term"))?;
                    let coef = coef.trim().trim_start_matches('(').trim_end_matches(')');
                    let (re, im) = coef.split_once(',').ok_or_else(|| bad("coefficient"))?;
                    let c = C64::new(
                        re.parse().map_err(|_| bad("re"))?,
                        im.parse().map_err(|_| bad("im"))?,
                    );
                    let mut e = vec![0u32; nvars];
                    for f in factors {
                        let (name, k) = match f.split_once('^') {
                            Some((n, k)) => (n, k.parse().map_err(|_| bad("exponent"))?),
                            None => (f, 1),
                        };
                        let v = var_names
                            .iter()
                            .position(|s| s == name)
                            .ok_or_else(|| bad("unknown variable"))?;
                        e[v] += k;
                    }
                    p.add_term(e, c);
                }
            }
            polys.push(p);
        }
        let mut sys = PolySystem::new(var_names, polys);
        sys.num_params = nums[1];
        Ok(sys)
    }
}

/// Flat evaluator for a [`PolySystem`]. Each term is stored as a coefficient
/// plus a short list of `(variable, exponent)` factors.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    npolys: usize,
    max_deg: usize,
    coeffs: Vec<C64>,
    /// per term: range into `factors`
    term_ranges: Vec<(u32, u32)>,
    /// per polynomial: range into `coeffs`/`term_ranges`
    poly_ranges: Vec<(u32, u32)>,
    factors: Vec<(u16, u16)>,
}

impl CompiledSystem {
    fn new(sys: &PolySystem) -> Self {
        let nvars = sys.num_vars_total();
        let mut out = CompiledSystem {
            nvars,
            npolys: sys.len(),
            max_deg: 1,
            coeffs: Vec::new(),
            term_ranges: Vec::new(),
            poly_ranges: Vec::new(),
            factors: Vec::new(),
        };
        for p in &sys.polys {
            let start = out.coeffs.len() as u32;
            for (e, c) in p.terms() {
                let f0 = out.factors.len() as u32;
                for (v, &k) in e.iter().enumerate() {
                    if k > 0 {
                        out.factors.push((v as u16, k as u16));
                        out.max_deg = out.max_deg.max(k as usize);
                    }
                }
                out.coeffs.push(*c);
                out.term_ranges.push((f0, out.factors.len() as u32));
            }
            out.poly_ranges.push((start, out.coeffs.len() as u32));
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn npolys(&self) -> usize {
        self.npolys
    }

    /// Evaluates all polynomials at `x` and, when requested, the full
    /// `npolys × nvars` Jacobian (row-major; overwritten).
    pub fn eval<T: Scalar>(&self, x: &[T], f: &mut [T], jac: Option<&mut [T]>) {
        let n = self.nvars;
        let md = self.max_deg;
        // powers[v * (md + 1) + k] = x_v^k
        let mut powers = vec![T::one(); n * (md + 1)];
        for v in 0..n {
            for k in 1..=md {
                powers[v * (md + 1) + k] = powers[v * (md + 1) + k - 1] * x[v];
            }
        }
        let pw = |v: usize, k: usize| powers[v * (md + 1) + k];
        match jac {
            None => {
                for (pi, &(a, b)) in self.poly_ranges.iter().enumerate() {
                    let mut acc = T::zero();
                    for t in a as usize..b as usize {
                        let (f0, f1) = self.term_ranges[t];
                        let mut val = T::from_c64(self.coeffs[t]);
                        for &(v, k) in &self.factors[f0 as usize..f1 as usize] {
                            val *= pw(v as usize, k as usize);
                        }
                        acc += val;
                    }
                    f[pi] = acc;
                }
            }
            Some(jac) => {
                for v in jac.iter_mut() {
                    *v = T::zero();
                }
                for (pi, &(a, b)) in self.poly_ranges.iter().enumerate() {
                    let mut acc = T::zero();
                    let row = &mut jac[pi * n..(pi + 1) * n];
                    for t in a as usize..b as usize {
                        let (f0, f1) = self.term_ranges[t];
                        let fs = &self.factors[f0 as usize..f1 as usize];
                        let c = T::from_c64(self.coeffs[t]);
                        let mut val = c;
                        for &(v, k) in fs {
                            val *= pw(v as usize, k as usize);
                        }
                        acc += val;
                        for (idx, &(v, k)) in fs.iter().enumerate() {
                            let mut d = c * T::from_f64(k as f64) * pw(v as usize, k as usize - 1);
                            for (jdx, &(w, kw)) in fs.iter().enumerate() {
                                if jdx != idx {
                                    d *= pw(w as usize, kw as usize);
                                }
                            }
                            row[v as usize] += d;
                        }
                    }
                    f[pi] = acc;
                }
            }
        }
    }
}

/// Multihomogeneous Bézout number: the coefficient of `Π α_k^{n_k}` in
/// `Π_i Σ_k d_{ik} α_k`, where `degrees[i][k]` is the degree of equation `i`
/// in group `k` and `group_dims[k] = n_k`.
pub fn multihomogeneous_bezout(degrees: &[Vec<u32>], group_dims: &[usize]) -> u128 {
    let mut states: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
    states.insert(group_dims.to_vec(), 1);
    for row in degrees {
        let mut next: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
        for (rem, count) in &states {
            for (k, &d) in row.iter().enumerate() {
                if d > 0 && rem[k] > 0 {
                    let mut r = rem.clone();
                    r[k] -= 1;
                    *next.entry(r).or_insert(0) += count * d as u128;
                }
            }
        }
        states = next;
    }
    states
        .into_iter()
        .filter(|(r, _)| r.iter().all(|&x| x == 0))
        .map(|(_, c)| c)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cubic(rng: &mut ChaCha8Rng, n: usize) -> Polynomial {
        let mut p = Polynomial::zero(n);
        for _ in 0..12 {
            let mut e = vec![0u32; n];
            for _ in 0..rng.gen_range(0..=3) {
                e[rng.gen_range(0..n)] += 1;
            }
            p.add_term(e, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        p
    }

    #[test]
    fn constant_evaluates_to_coefficient() {
        let p = Polynomial::constant(3, C64::new(2.5, -1.0));
        let sys = PolySystem::with_generic_names(3, vec![p]);
        let v = sys.evaluate(&[C64::new(9.0, 1.0); 3]).unwrap();
        assert_eq!(v[0], C64::new(2.5, -1.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let sys = PolySystem::with_generic_names(2, vec![Polynomial::var(2, 0)]);
        assert!(matches!(
            sys.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 4;
            let polys: Vec<_> = (0..3).map(|_| random_cubic(&mut rng, n)).collect();
            let sys = PolySystem::with_generic_names(n, polys);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let j = sys.jacobian(&x).unwrap();
            let h = 1e-6;
            for v in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[v] += h;
                xm[v] -= h;
                let fp = sys.evaluate(&xp).unwrap();
                let fm = sys.evaluate(&xm).unwrap();
                for r in 0..sys.len() {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    let denom = f64::max(1.0, j[r][v].abs());
                    assert!((fd - j[r][v]).abs() / denom < 1e-6, "{fd} vs {}", j[r][v]);
                }
            }
        }
    }

    #[test]
    fn compiled_matches_naive_complex() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let polys: Vec<_> = (0..4).map(|_| random_cubic(&mut rng, 5)).collect();
        let sys = PolySystem::with_generic_names(5, polys);
        let x: Vec<C64> = (0..5)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let naive = sys.evaluate(&x).unwrap();
        let mut f = vec![C64::new(0.0, 0.0); 4];
        sys.compile().eval(&x, &mut f, None);
        for (a, b) in naive.iter().zip(&f) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn pythagorean_reduction() {
        // s² + c² - 1 reduces to 0
        let c = Polynomial::var(2, 0);
        let s = Polynomial::var(2, 1);
        let p = &(&c * &c) + &(&s * &s);
        let p = &p - &Polynomial::constant(2, 1.0);
        assert!(p.reduce_pythagorean(0, 1).is_zero());
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let polys: Vec<_> = (0..3).map(|_| random_cubic(&mut rng, 3)).collect();
        let mut sys = PolySystem::with_generic_names(3, polys);
        sys.num_params = 1;
        let back = PolySystem::from_text(&sys.to_text()).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn bezout_small_cases() {
        // two quadrics in one group of dimension 2
        assert_eq!(multihomogeneous_bezout(&[vec![2], vec![2]], &[2]), 4);
        // bilinear pair in groups (1,1): coefficient of αβ in (α+β)² = 2
        assert_eq!(multihomogeneous_bezout(&[vec![1, 1], vec![1, 1]], &[1, 1]), 2);
    }
}
