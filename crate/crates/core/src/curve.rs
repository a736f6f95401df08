//! Real algebraic curves in `R⁶` cut out by five quadrics: seeding by linear
//! slices, pseudo-arclength tracing, and point/segment distances with local
//! Lagrange-Newton refinement.
//!
//! This is the independent check for the homotopy-based distances and also
//! traces the output-singularity loci.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::fivebar::CanonicalDesign;
use crate::homotopy::{solve_total_degree, PathStatus, PolyParamSystem, TrackerSettings};
use crate::math::{self, C64};
use crate::poly::{PolySystem, Polynomial};
use crate::singdist::point_segment_distance;
use crate::systems::{build_input_singular_curve, Quadric};

/// A traced piece of a curve; closed loops repeat no vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 6]>,
    pub closed: bool,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Consecutive vertex pairs, including the closing edge of a loop.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64; 6], &[f64; 6])> {
        let n = self.points.len();
        let m = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (&self.points[i], &self.points[(i + 1) % n]))
    }

    pub fn arc_length(&self) -> f64 {
        self.segments().map(|(a, b)| math::dist(a, b)).sum()
    }
}

/// A one-dimensional set `{q_1 = … = q_5 = 0}` of quadrics in `R⁶`.
#[derive(Clone, Debug)]
pub struct QuadricCurve {
    pub quads: Vec<Quadric>,
    pub system: PolySystem,
}

impl QuadricCurve {
    /// Panics unless the system has five quadrics in six variables.
    pub fn new(system: PolySystem) -> Self {
        assert_eq!(system.len(), 5);
        let quads = system
            .polys
            .iter()
            .map(|p| Quadric::from_polynomial(p).expect("curve equations must be real quadrics"))
            .collect();
        QuadricCurve { quads, system }
    }

    pub fn input_singular(d: &CanonicalDesign) -> Self {
        Self::new(build_input_singular_curve(d))
    }

    /// Values and the 5 × 6 Jacobian.
    pub fn eval(&self, z: &[f64]) -> ([f64; 5], [[f64; 6]; 5]) {
        let mut f = [0.0; 5];
        let mut j = [[0.0; 6]; 5];
        for (i, q) in self.quads.iter().enumerate() {
            let (v, g) = q.eval(z);
            f[i] = v;
            j[i] = g;
        }
        (f, j)
    }

    pub fn residual(&self, z: &[f64]) -> f64 {
        self.eval(z).0.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// Newton projection onto the curve keeping `a·(z − z0) = 0`.
    fn correct(&self, z0: &[f64; 6], normal: &[f64; 6], max_iter: usize) -> Option<[f64; 6]> {
        let mut z = *z0;
        for _ in 0..max_iter {
            let (f, j) = self.eval(&z);
            let mut a = Vec::with_capacity(36);
            let mut b = Vec::with_capacity(6);
            for i in 0..5 {
                a.extend_from_slice(&j[i]);
                b.push(-f[i]);
            }
            a.extend_from_slice(normal);
            b.push(-(0..6).map(|k| normal[k] * (z[k] - z0[k])).sum::<f64>());
            let dz = math::solve(a, b)?;
            for k in 0..6 {
                z[k] += dz[k];
            }
            if math::norm_inf(&dz) <= 1e-13 * (1.0 + math::norm_inf(&z)) {
                return (self.residual(&z) <= 1e-10).then_some(z);
            }
        }
        (self.residual(&z) <= 1e-10).then_some(z)
    }

    /// Unit tangent at `z` oriented along `guide`.
    fn tangent(&self, z: &[f64], guide: &[f64; 6]) -> Option<[f64; 6]> {
        let (_, j) = self.eval(z);
        let mut a = Vec::with_capacity(36);
        for row in &j {
            a.extend_from_slice(row);
        }
        a.extend_from_slice(guide);
        let mut b = vec![0.0; 6];
        b[5] = 1.0;
        let t = math::solve(a, b)?;
        let n = math::norm2(&t);
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        let mut out = [0.0; 6];
        for k in 0..6 {
            out[k] = t[k] / n;
        }
        Some(out)
    }

    /// Traces the component through `seed` in both directions (a single pass
    /// if it closes up).
    pub fn trace(&self, seed: &[f64; 6], arc_step: f64, max_points: usize) -> Polyline {
        let guide0 = {
            // any direction not orthogonal to the tangent line
            let (_, j) = self.eval(seed);
            let mut best = [0.0; 6];
            let mut best_n = -1.0;
            for k in 0..6 {
                let mut e = [0.0; 6];
                e[k] = 1.0;
                let mut a = Vec::with_capacity(36);
                for row in &j {
                    a.extend_from_slice(row);
                }
                a.extend_from_slice(&e);
                let mut b = vec![0.0; 6];
                b[5] = 1.0;
                if let Some(t) = math::solve(a, b) {
                    let n = 1.0 / math::norm2(&t);
                    if n > best_n {
                        best_n = n;
                        best = e;
                    }
                }
            }
            best
        };
        let Some(t0) = self.tangent(seed, &guide0) else {
            return Polyline {
                points: vec![*seed],
                closed: false,
            };
        };
        let (fwd, closed) = self.march(seed, t0, arc_step, max_points);
        if closed {
            return Polyline {
                points: fwd,
                closed: true,
            };
        }
        let back_dir = t0.map(|v| -v);
        let (mut back, _) = self.march(seed, back_dir, arc_step, max_points);
        back.reverse();
        back.pop();
        back.extend(fwd);
        Polyline {
            points: back,
            closed: false,
        }
    }

    fn march(
        &self,
        seed: &[f64; 6],
        dir: [f64; 6],
        arc_step: f64,
        max_points: usize,
    ) -> (Vec<[f64; 6]>, bool) {
        let mut pts = vec![*seed];
        let mut z = *seed;
        let mut tau = dir;
        let mut h = arc_step;
        let mut travelled = 0.0;
        while pts.len() < max_points {
            let Some(t) = self.tangent(&z, &tau) else {
                break;
            };
            let mut pred = [0.0; 6];
            for k in 0..6 {
                pred[k] = z[k] + h * t[k];
            }
            match self.correct(&pred, &t, 12) {
                Some(next) if math::dist(&next, &pred) <= 0.5 * h => {
                    // closure: the new step passes near the seed
                    if travelled > 4.0 * arc_step {
                        let (d, _) = point_segment_distance(seed, &z, &next);
                        if d < 0.5 * arc_step {
                            return (pts, true);
                        }
                    }
                    travelled += math::dist(&z, &next);
                    tau = t;
                    z = next;
                    pts.push(z);
                    h = f64::min(2.0 * h, arc_step);
                }
                _ => {
                    h *= 0.5;
                    if h < 1e-6 * arc_step {
                        break;
                    }
                }
            }
        }
        (pts, false)
    }
}

/// Solutions of the curve equations with one linear slice `a·z = b`.
pub fn slice_solutions<R: Rng + ?Sized>(
    curve: &PolySystem,
    a: &[C64; 6],
    b: C64,
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<Vec<C64>> {
    let mut slice = Polynomial::constant(6, -b);
    for (k, ak) in a.iter().enumerate() {
        slice = &slice + &Polynomial::var(6, k).scale(*ak);
    }
    let mut polys = curve.polys.clone();
    polys.push(slice);
    let sys = PolySystem::with_generic_names(6, polys);
    let degrees: Vec<u32> = sys.polys.iter().map(|p| p.total_degree()).collect();
    let ps = PolyParamSystem::new(&sys);
    let sols = solve_total_degree(&ps, &degrees, rng, st);
    crate::homotopy::dedup(
        sols.into_iter()
            .filter(|s| s.status == PathStatus::Success && s.condition < 1e10)
            .map(|s| s.x)
            .collect(),
        st.dedup_tol,
    )
}

/// Number of intersection points with a random complex hyperplane (the degree
/// of the curve when the slice is generic).
pub fn slice_degree<R: Rng + ?Sized>(curve: &PolySystem, rng: &mut R, st: &TrackerSettings) -> usize {
    let mut a = [C64::new(0.0, 0.0); 6];
    for v in a.iter_mut() {
        *v = crate::homotopy::random_unit(rng);
    }
    let b = crate::homotopy::random_unit(rng);
    slice_solutions(curve, &a, b, rng, st).len()
}

/// Real seed points from random real slices and coordinate-level slices.
pub fn real_seeds<R: Rng + ?Sized>(
    curve: &PolySystem,
    bound: f64,
    random_slices: usize,
    levels: usize,
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<[f64; 6]> {
    let mut out = Vec::new();
    let push = |sols: Vec<Vec<C64>>, out: &mut Vec<[f64; 6]>| {
        for s in sols {
            if s.iter().all(|v| v.im.abs() <= 1e-8) {
                let mut z = [0.0; 6];
                for k in 0..6 {
                    z[k] = s[k].re;
                }
                out.push(z);
            }
        }
    };
    for _ in 0..random_slices {
        let mut a = [C64::new(0.0, 0.0); 6];
        for v in a.iter_mut() {
            *v = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        }
        let b = C64::new(rng.gen_range(-0.5..0.5) * bound, 0.0);
        push(slice_solutions(curve, &a, b, rng, st), &mut out);
    }
    for k in 0..6 {
        let half = if k < 2 { bound } else { 1.0 };
        for l in 0..levels {
            let level = half * (-1.0 + (2.0 * l as f64 + 1.0) / levels as f64);
            // tiny generic tilt keeps the slice transversal
            let mut a = [C64::new(0.0, 0.0); 6];
            for (i, v) in a.iter_mut().enumerate() {
                *v = C64::new(if i == k { 1.0 } else { rng.gen_range(-1e-3..1e-3) }, 0.0);
            }
            push(slice_solutions(curve, &a, C64::new(level, 0.0), rng, st), &mut out);
        }
    }
    out
}

/// Settings for tracing a real curve.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSettings {
    pub arc_step: f64,
    pub max_points: usize,
    pub random_slices: usize,
    pub levels: usize,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            arc_step: 2e-3,
            max_points: 200_000,
            random_slices: 12,
            levels: 9,
        }
    }
}

/// Traces every real component found from the seeds.
pub fn trace_real_curve<R: Rng + ?Sized>(
    curve: &QuadricCurve,
    bound: f64,
    ts: &TraceSettings,
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<Polyline> {
    let seeds = real_seeds(&curve.system, bound, ts.random_slices, ts.levels, rng, st);
    let mut lines: Vec<Polyline> = Vec::new();
    for seed in seeds {
        let covered = lines.iter().any(|l| {
            l.points
                .iter()
                .any(|p| math::dist(p, &seed) < 3.0 * ts.arc_step)
        });
        if covered || curve.residual(&seed) > 1e-8 {
            continue;
        }
        let line = curve.trace(&seed, ts.arc_step, ts.max_points);
        if line.len() > 1 {
            lines.push(line);
        }
    }
    lines
}

/// The real input-singularity curve of a design.
pub fn trace_input_singular<R: Rng + ?Sized>(
    d: &CanonicalDesign,
    ts: &TraceSettings,
    rng: &mut R,
    st: &TrackerSettings,
) -> Vec<Polyline> {
    let bound = d.l1 + d.rho();
    trace_real_curve(&QuadricCurve::input_singular(d), bound, ts, rng, st)
}

/// Distance from the segment `[c0, c1]` to a traced curve: the best vertex,
/// refined by Lagrange-Newton from every local minimum close to it.
pub fn oracle_distance(curve: &QuadricCurve, lines: &[Polyline], c0: &[f64; 6], c1: &[f64; 6]) -> f64 {
    let mut cands: Vec<(f64, [f64; 6], f64)> = Vec::new();
    let mut best = f64::INFINITY;
    for line in lines {
        let n = line.points.len();
        let ds: Vec<(f64, f64)> = line
            .points
            .iter()
            .map(|p| point_segment_distance(p, c0, c1))
            .collect();
        for i in 0..n {
            best = best.min(ds[i].0);
            let prev = if i > 0 {
                Some(ds[i - 1].0)
            } else if line.closed {
                Some(ds[n - 1].0)
            } else {
                None
            };
            let next = if i + 1 < n {
                Some(ds[i + 1].0)
            } else if line.closed {
                Some(ds[0].0)
            } else {
                None
            };
            if prev.map_or(true, |p| ds[i].0 <= p) && next.map_or(true, |q| ds[i].0 <= q) {
                cands.push((ds[i].0, line.points[i], ds[i].1));
            }
        }
    }
    if !best.is_finite() {
        return best;
    }
    let step = lines
        .iter()
        .flat_map(|l| l.segments().map(|(a, b)| math::dist(a, b)))
        .fold(0.0, f64::max);
    let mut out = best;
    for (dv, w, t) in cands {
        if dv > best + 2.0 * step {
            continue;
        }
        if let Some(r) = refine_segment_distance(curve, c0, c1, &w, t) {
            if r <= dv + 1e-9 {
                out = out.min(r);
            }
        }
    }
    out
}

/// Newton on the Lagrange system of `min ½‖c(t) − w‖²` over the curve, with
/// `t` clamped to the segment.
pub fn refine_segment_distance(
    curve: &QuadricCurve,
    c0: &[f64; 6],
    c1: &[f64; 6],
    w0: &[f64; 6],
    t0: f64,
) -> Option<f64> {
    let v: Vec<f64> = (0..6).map(|j| c1[j] - c0[j]).collect();
    let vv = math::dot(&v, &v);
    let mut w = *w0;
    let mut t = t0;
    let mut free_t = vv > 0.0 && t0 > 0.0 && t0 < 1.0;
    let mut mu = initial_multipliers(curve, &w, c0, &v, t)?;
    for _round in 0..3 {
        let mut converged = false;
        for _ in 0..30 {
            let (f, j) = curve.eval(&w);
            let n = if free_t { 12 } else { 11 };
            let mut a = vec![0.0; n * n];
            let mut r = vec![0.0; n];
            // rows 0..6: w − c(t) + Σ μ_i ∇q_i
            for k in 0..6 {
                r[k] = w[k] - (c0[k] + t * v[k]) + (0..5).map(|i| mu[i] * j[i][k]).sum::<f64>();
                a[k * n + k] += 1.0;
                for m in 0..6 {
                    let h: f64 = (0..5).map(|i| mu[i] * 2.0 * curve.quads[i].a[k][m]).sum();
                    a[k * n + m] += h;
                }
                for i in 0..5 {
                    a[k * n + 6 + i] = j[i][k];
                }
                if free_t {
                    a[k * n + 11] = -v[k];
                }
            }
            for i in 0..5 {
                r[6 + i] = f[i];
                for m in 0..6 {
                    a[(6 + i) * n + m] = j[i][m];
                }
            }
            if free_t {
                // (c(t) − w)·v = 0
                r[11] = (0..6).map(|k| (c0[k] + t * v[k] - w[k]) * v[k]).sum();
                for m in 0..6 {
                    a[11 * n + m] = -v[m];
                }
                a[11 * n + 11] = vv;
            }
            let dx = math::solve(a, r.iter().map(|x| -x).collect())?;
            for k in 0..6 {
                w[k] += dx[k];
            }
            for i in 0..5 {
                mu[i] += dx[6 + i];
            }
            if free_t {
                t += dx[11];
            }
            if math::norm_inf(&dx) <= 1e-13 * (1.0 + math::norm_inf(&w)) {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }
        if free_t && !(0.0..=1.0).contains(&t) {
            t = t.clamp(0.0, 1.0);
            free_t = false;
            continue;
        }
        if curve.residual(&w) > 1e-10 {
            return None;
        }
        let ct: Vec<f64> = (0..6).map(|k| c0[k] + t * v[k]).collect();
        return Some(math::dist(&ct, &w));
    }
    None
}

/// Least-squares multipliers for `w − c(t) + Jᵀ μ = 0`.
fn initial_multipliers(
    curve: &QuadricCurve,
    w: &[f64; 6],
    c0: &[f64; 6],
    v: &[f64],
    t: f64,
) -> Option<[f64; 5]> {
    let (_, j) = curve.eval(w);
    let r: Vec<f64> = (0..6).map(|k| c0[k] + t * v[k] - w[k]).collect();
    // (J Jᵀ) μ = J r
    let mut a = vec![0.0; 25];
    let mut b = vec![0.0; 5];
    for i in 0..5 {
        for l in 0..5 {
            a[i * 5 + l] = math::dot(&j[i], &j[l]);
        }
        b[i] = math::dot(&j[i], &r);
    }
    let mu = math::solve(a, b)?;
    Some([mu[0], mu[1], mu[2], mu[3], mu[4]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Unit circle in the (z0, z1) plane with z2..z5 = 0.
    fn circle() -> QuadricCurve {
        let v = |i| Polynomial::var(6, i);
        let c = &(&(&v(0) * &v(0)) + &(&v(1) * &v(1))) - &Polynomial::constant(6, 1.0);
        QuadricCurve::new(PolySystem::with_generic_names(
            6,
            vec![c, v(2), v(3), v(4), v(5)],
        ))
    }

    #[test]
    fn traces_closed_circle() {
        let c = circle();
        let line = c.trace(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.01, 10_000);
        assert!(line.closed);
        assert!((line.arc_length() - 2.0 * core::f64::consts::PI).abs() < 1e-3);
        for p in &line.points {
            assert!(c.residual(p) < 1e-10);
        }
    }

    #[test]
    fn refined_distance_to_circle() {
        let c = circle();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let lines = trace_real_curve(&c, 1.5, &TraceSettings { arc_step: 0.05, ..Default::default() }, &mut rng, &TrackerSettings::default());
        assert_eq!(lines.len(), 1);
        // segment from (3, -1) to (3, 1): nearest point (1, 0), distance 2
        let c0 = [3.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let c1 = [3.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let d = oracle_distance(&c, &lines, &c0, &c1);
        assert!((d - 2.0).abs() < 1e-12, "{d}");
        // off-plane point segment: distance sqrt(1 + 0.25)
        let p = [0.0, 0.0, 0.5, 0.0, 0.0, 0.0];
        let d = oracle_distance(&c, &lines, &p, &p);
        assert!((d - 1.25f64.sqrt()).abs() < 1e-12, "{d}");
    }
}
