//! Minimum distance from a straight segment `c(t) = c0 + t (c1 − c0)` to the
//! input-singularity curve `I = {F = 0, g = 0}`.
//!
//! The Fritz John system splits into three square sub-problems: the two
//! endpoints (`t = 0` and `t = 1`, same system, independent start data) and
//! the interior. Each is solved once at generic complex parameters; queries
//! then run parameter homotopies from those start sets and keep the real,
//! feasible endpoints.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fivebar::CanonicalDesign;
use crate::homotopy::{
    dedup, newton_refine, random_unit, solve_linear_product, ParamSystem, PathStatus, StartSet,
    TrackerSettings,
};
use crate::math::{self, Scalar, C64};
use crate::systems::{constraint_quadrics, FjKind, FritzJohnEval, Quadric, NUM_CONSTRAINTS};

/// Finite nonsingular solutions of the endpoint sub-problem at generic parameters.
pub const NODE_SOLUTIONS: usize = 24;
/// Finite nonsingular solutions of the interior sub-problem at generic parameters.
pub const INTERIOR_SOLUTIONS: usize = 36;

/// Endpoints whose Jacobian condition number exceeds this are treated as singular.
const SINGULAR_CONDITION: f64 = 1e10;
const REAL_TOL: f64 = 1e-8;
const BORDERLINE_TOL: f64 = 1e-5;
const FEASIBILITY_TOL: f64 = 1e-8;
const T_TOL: f64 = 1e-10;
const MAX_ATTEMPTS: usize = 3;
const MAX_ROUNDS: usize = 3;

/// Start data for one sub-problem: the `λ` chart and the solutions at generic
/// parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemStart {
    pub kind: FjKind,
    pub chart: Vec<C64>,
    pub start: StartSet,
}

/// Start data for the three sub-problems.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceStarts {
    pub first: SubproblemStart,
    pub last: SubproblemStart,
    pub interior: SubproblemStart,
}

impl DistanceStarts {
    pub fn counts(&self) -> [usize; 3] {
        [
            self.first.start.solutions.len(),
            self.last.start.solutions.len(),
            self.interior.start.solutions.len(),
        ]
    }
}

fn random_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_unit(rng) * rng.gen_range(0.5..1.5)).collect()
}

/// Solves one sub-problem at random complex parameters, retrying with fresh
/// start systems and taking the union until `expected` solutions are found.
pub fn solve_subproblem<R: Rng + ?Sized>(
    d: &CanonicalDesign,
    kind: FjKind,
    expected: usize,
    rng: &mut R,
    st: &TrackerSettings,
) -> Result<SubproblemStart> {
    let mut diag = Vec::new();
    let mut best = 0;
    // a generic parameter choice rarely puts a solution near a singular
    // point; when it does, the same solution is missed on every retry
    for round in 0..MAX_ROUNDS {
        let chart = random_vec(rng, kind.num_lambdas());
        let params = random_vec(rng, kind.num_params());
        let sys = FritzJohnEval::new(kind, constraint_quadrics(d), chart.clone());
        let structure = kind.product_structure(&chart);
        let mut found: Vec<Vec<C64>> = Vec::new();
        for attempt in 0..MAX_ATTEMPTS {
            let paths = solve_linear_product(&sys, &params, &structure, rng, st);
            let mut failed = 0;
            let mut singular = 0;
            let mut finite = Vec::new();
            for p in paths.iter() {
                match p.status {
                    PathStatus::Success if p.condition < SINGULAR_CONDITION => finite.push(p.x.clone()),
                    PathStatus::Success => singular += 1,
                    PathStatus::Failed => failed += 1,
                    PathStatus::Diverged => {}
                }
            }
            diag.push(format!(
                "round {round} attempt {attempt}: {} paths, {} finite, {singular} singular, {failed} failed",
                paths.len(),
                finite.len()
            ));
            found.extend(finite);
            found = dedup(found, st.dedup_tol);
            if found.len() == expected {
                return Ok(SubproblemStart {
                    kind,
                    chart,
                    start: StartSet {
                        params,
                        solutions: found,
                        gamma: random_unit(rng),
                    },
                });
            }
            if found.len() > expected {
                break;
            }
        }
        best = best.max(found.len());
    }
    Err(Error::UnhealthyStart {
        problem: format!("{kind:?}"),
        expected,
        found: best,
        diagnostics: diag.join("; "),
    })
}

/// Ab initio solve of the three sub-problems.
pub fn ab_initio<R: Rng + ?Sized>(
    d: &CanonicalDesign,
    rng: &mut R,
    st: &TrackerSettings,
) -> Result<DistanceStarts> {
    Ok(DistanceStarts {
        first: solve_subproblem(d, FjKind::Node, NODE_SOLUTIONS, rng, st)?,
        last: solve_subproblem(d, FjKind::Node, NODE_SOLUTIONS, rng, st)?,
        interior: solve_subproblem(d, FjKind::Interior, INTERIOR_SOLUTIONS, rng, st)?,
    })
}

/// A validated real critical point of the distance problem.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    /// Point of `I`.
    pub w: [f64; 6],
    /// Segment parameter in `[0, 1]`.
    pub t: f64,
    /// `‖c(t) − w‖`.
    pub distance: f64,
    /// Multipliers `(λ0..λ5)` normalised so the largest has modulus one.
    pub lambda: Vec<f64>,
}

/// Real critical points of one sub-problem plus path bookkeeping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubResult {
    pub points: Vec<CriticalPoint>,
    pub paths: usize,
    pub failed: usize,
}

impl SubResult {
    pub fn min_distance(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.distance)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> Option<&CriticalPoint> {
        self.points
            .iter()
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
    }
}

/// A segment query and its per-sub-problem results.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentQuery {
    pub c0: [f64; 6],
    pub c1: [f64; 6],
    pub first: SubResult,
    pub last: SubResult,
    pub interior: SubResult,
}

impl SegmentQuery {
    /// Minimum distance; `+∞` when no real feasible critical point exists.
    pub fn distance(&self) -> f64 {
        self.first
            .min_distance()
            .min(self.last.min_distance())
            .min(self.interior.min_distance())
    }

    pub fn argmin(&self) -> Option<&CriticalPoint> {
        [&self.first, &self.last, &self.interior]
            .into_iter()
            .filter_map(|r| r.argmin())
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
    }

    pub fn failure_fraction(&self) -> f64 {
        let paths = self.first.paths + self.last.paths + self.interior.paths;
        let failed = self.first.failed + self.last.failed + self.interior.failed;
        if paths == 0 {
            0.0
        } else {
            failed as f64 / paths as f64
        }
    }

    /// More than 10% of the paths failed; the result is not trusted.
    pub fn flagged(&self) -> bool {
        self.failure_fraction() > 0.10
    }
}

fn to_c(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Exact segment-to-`I` distance queries against cached start data.
#[derive(Clone, Debug)]
pub struct SingularityDistance {
    quads: [Quadric; NUM_CONSTRAINTS],
    starts: DistanceStarts,
    first: FritzJohnEval,
    last: FritzJohnEval,
    interior: FritzJohnEval,
    settings: TrackerSettings,
}

impl SingularityDistance {
    pub fn new(d: &CanonicalDesign, starts: DistanceStarts, settings: TrackerSettings) -> Self {
        let quads = constraint_quadrics(d);
        let mk = |s: &SubproblemStart| FritzJohnEval::new(s.kind, quads, s.chart.clone());
        SingularityDistance {
            first: mk(&starts.first),
            last: mk(&starts.last),
            interior: mk(&starts.interior),
            quads,
            starts,
            settings,
        }
    }

    pub fn starts(&self) -> &DistanceStarts {
        &self.starts
    }

    /// Residual of `F` and `g` at a real point.
    pub fn constraint_residual(&self, w: &[f64]) -> f64 {
        self.quads
            .iter()
            .map(|q| q.eval(w).0.abs())
            .fold(0.0, f64::max)
    }

    /// Critical points of the distance from `c` to `I` (the `t = 0` problem).
    pub fn point(&self, c: &[f64; 6]) -> SubResult {
        self.point_with(false, c)
    }

    fn point_with(&self, use_last: bool, c: &[f64; 6]) -> SubResult {
        let (sys, start) = if use_last {
            (&self.last, &self.starts.last)
        } else {
            (&self.first, &self.starts.first)
        };
        let target = to_c(c);
        let paths = start.start.track_to(sys, &target, &self.settings);
        let mut out = SubResult {
            paths: paths.len(),
            ..SubResult::default()
        };
        let mut pts = Vec::new();
        for p in &paths {
            match p.status {
                PathStatus::Failed => out.failed += 1,
                PathStatus::Diverged => {}
                PathStatus::Success => {
                    if let Some(cp) = self.classify(FjKind::Node, &p.x, &target, c, c, 1.0) {
                        pts.push(cp);
                    }
                }
            }
        }
        out.points = dedup_points(pts);
        out
    }

    /// Full segment query.
    pub fn segment(&self, c0: &[f64; 6], c1: &[f64; 6]) -> SegmentQuery {
        self.segment_with(c0, c1, None, None)
    }

    /// Segment query reusing already computed endpoint results.
    pub fn segment_with(
        &self,
        c0: &[f64; 6],
        c1: &[f64; 6],
        first: Option<SubResult>,
        last: Option<SubResult>,
    ) -> SegmentQuery {
        let first = first.unwrap_or_else(|| self.point_with(false, c0));
        let last = last.unwrap_or_else(|| self.point_with(true, c1));
        let interior = self.interior_critical_points(c0, c1);
        SegmentQuery {
            c0: *c0,
            c1: *c1,
            first,
            last,
            interior,
        }
    }

    /// Real critical points with `0 < t < 1`.
    pub fn interior_critical_points(&self, c0: &[f64; 6], c1: &[f64; 6]) -> SubResult {
        let len = math::dist(c0, c1);
        if len == 0.0 {
            return SubResult::default();
        }
        let mut params = to_c(c0);
        params.extend((0..6).map(|j| C64::new((c1[j] - c0[j]) / len, 0.0)));
        let paths = self
            .starts
            .interior
            .start
            .track_to(&self.interior, &params, &self.settings);
        let mut out = SubResult {
            paths: paths.len(),
            ..SubResult::default()
        };
        let mut pts = Vec::new();
        for p in &paths {
            match p.status {
                PathStatus::Failed => out.failed += 1,
                PathStatus::Diverged => {}
                PathStatus::Success => {
                    if let Some(cp) = self.classify(FjKind::Interior, &p.x, &params, c0, c1, len) {
                        pts.push(cp);
                    }
                }
            }
        }
        out.points = dedup_points(pts);
        out
    }

    /// Real classification, optional real Newton polish, and feasibility.
    fn classify(
        &self,
        kind: FjKind,
        x: &[C64],
        params: &[C64],
        c0: &[f64; 6],
        c1: &[f64; 6],
        len: f64,
    ) -> Option<CriticalPoint> {
        let lo = kind.lambda_offset();
        let nl = kind.num_lambdas();
        let (k, _) = x[lo..lo + nl]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        let pivot = x[lo + k];
        if pivot.norm() == 0.0 {
            return None;
        }
        let mut y: Vec<C64> = x.to_vec();
        for v in y[lo..lo + nl].iter_mut() {
            *v /= pivot;
        }
        let imag = y.iter().fold(0.0, |m: f64, v| m.max(v.im.abs()));
        if imag > BORDERLINE_TOL {
            return None;
        }
        let mut real: Vec<C64> = y.iter().map(|v| C64::new(v.re, 0.0)).collect();
        if imag > REAL_TOL {
            let mut chart = vec![C64::zero(); nl];
            chart[k] = C64::one();
            let sys = FritzJohnEval::new(kind, self.quads, chart);
            if !newton_refine(&sys, &mut real, params, 1e-14, 20) {
                return None;
            }
            let mut f = vec![C64::zero(); sys.num_vars()];
            sys.eval(&real, params, &mut f, None, None);
            if math::norm_inf(&f) > FEASIBILITY_TOL {
                return None;
            }
        }
        let mut w = [0.0; 6];
        for j in 0..6 {
            w[j] = real[j].re;
        }
        if self.constraint_residual(&w) > FEASIBILITY_TOL {
            return None;
        }
        let t = match kind {
            FjKind::Node => 0.0,
            _ => {
                let t = real[6].re / len;
                if !(-T_TOL..=1.0 + T_TOL).contains(&t) {
                    return None;
                }
                t.clamp(0.0, 1.0)
            }
        };
        let mut ct = [0.0; 6];
        for j in 0..6 {
            ct[j] = c0[j] + t * (c1[j] - c0[j]);
        }
        Some(CriticalPoint {
            w,
            t,
            distance: math::dist(&ct, &w),
            lambda: real[lo..lo + nl].iter().map(|v| v.re).collect(),
        })
    }
}

fn dedup_points(mut pts: Vec<CriticalPoint>) -> Vec<CriticalPoint> {
    pts.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    let mut out: Vec<CriticalPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out
            .iter()
            .any(|q| math::dist(&q.w, &p.w) < 1e-7 && (q.t - p.t).abs() < 1e-7)
        {
            out.push(p);
        }
    }
    out
}

/// Distance from `p` to the segment `[a, b]` and the minimising parameter.
pub fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for j in 0..p.len() {
        let ab = b[j] - a[j];
        ab2 += ab * ab;
        ap_ab += (p[j] - a[j]) * ab;
    }
    let t = if ab2 > 0.0 {
        (ap_ab / ab2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d2: f64 = (0..p.len())
        .map(|j| {
            let q = a[j] + t * (b[j] - a[j]);
            (p[j] - q) * (p[j] - q)
        })
        .sum();
    (math::sqrt(d2), t)
}

/// Bounds on a segment clearance from its endpoint clearances `d0`, `d1`
/// and its length `len`, using that the distance to `I` is 1-Lipschitz.
pub fn lipschitz_lower_bound(d0: f64, d1: f64, len: f64) -> f64 {
    if !d0.is_finite() || !d1.is_finite() {
        return d0.min(d1) - 0.5 * len;
    }
    f64::max(0.5 * (d0 + d1 - len), d0.min(d1) - len).max(0.0)
}

/// Upper bound on a segment clearance from known points of `I`.
pub fn witness_upper_bound<'a>(
    c0: &[f64],
    c1: &[f64],
    witnesses: impl IntoIterator<Item = &'a [f64; 6]>,
) -> f64 {
    witnesses
        .into_iter()
        .map(|w| point_segment_distance(w, c0, c1).0)
        .fold(f64::INFINITY, f64::min)
}

/// Renders a short textual summary of a query, used in diagnostics.
pub fn describe(q: &SegmentQuery) -> alloc::string::String {
    let d = q.distance();
    let mut s = if d.is_finite() {
        format!("{d:.9}")
    } else {
        "inf".to_string()
    };
    s.push_str(&format!(
        " ({} + {} + {} real critical points, {} failed paths)",
        q.first.points.len(),
        q.last.points.len(),
        q.interior.points.len(),
        q.first.failed + q.last.failed + q.interior.failed
    ));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_segment_distance_basics() {
        let a = [0.0, 0.0];
        let b = [2.0, 0.0];
        assert_eq!(point_segment_distance(&[1.0, 1.0], &a, &b), (1.0, 0.5));
        assert_eq!(point_segment_distance(&[-1.0, 0.0], &a, &b), (1.0, 0.0));
        assert_eq!(point_segment_distance(&[0.0, 3.0], &a, &a), (3.0, 0.0));
    }

    #[test]
    fn lipschitz_bound_is_tight_for_a_point_obstacle() {
        // obstacle at the origin of the line, endpoints at ±1: true distance 0
        assert_eq!(lipschitz_lower_bound(1.0, 1.0, 2.0), 0.0);
        // equal clearances, obstacle perpendicular at distance h from the midpoint
        let h: f64 = 0.5;
        let d0 = (1.0 + h * h).sqrt();
        assert!(lipschitz_lower_bound(d0, d0, 2.0) <= h);
    }
}
