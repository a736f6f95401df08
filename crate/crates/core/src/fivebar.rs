//! Closed-form five-bar geometry.
//!
//! The chain is `A → C → F ← D ← B` with the end-effector `P` rigidly attached
//! to the coupler `CF`:
//!
//! * `C = A + l1 (cos φ, sin φ)` and `D = B + l3 (cos ψ, sin ψ)`,
//! * `|CF| = l2`, `|DF| = l4`,
//! * `P = C + p u + q u⊥` with `u = (F − C)/l2` and `u⊥` the +90° rotation of `u`.
//!
//! All computations happen in the canonical frame (`A` at the origin, `B` on the
//! positive x axis).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, abs, atan2, cos, hypot, sin, sqrt};

/// Raw link dimensions in the user's frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiveBarDesign {
    pub a_x: f64,
    pub a_y: f64,
    pub b_x: f64,
    pub b_y: f64,
    /// |AC|
    pub l1: f64,
    /// |CF|
    pub l2: f64,
    /// |BD|
    pub l3: f64,
    /// |DF|
    pub l4: f64,
    pub p: f64,
    pub q: f64,
}

impl FiveBarDesign {
    /// First nonsymmetric example (perpendicular velocity ellipses).
    pub const CASE_1: FiveBarDesign = FiveBarDesign {
        a_x: 0.259,
        a_y: 0.586,
        b_x: 0.060,
        b_y: 0.590,
        l1: 0.465,
        l2: 0.349,
        l3: 0.249,
        l4: 0.411,
        p: 0.049,
        q: 0.328,
    };

    /// Second nonsymmetric example (ceiling and floor).
    pub const CASE_2: FiveBarDesign = FiveBarDesign {
        a_x: 0.066,
        a_y: 0.815,
        b_x: -0.642,
        b_y: 0.845,
        l1: 0.775,
        l2: 0.832,
        l3: 0.291,
        l4: 0.522,
        p: 0.298,
        q: 1.304,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.a_x, self.a_y, self.b_x, self.b_y, self.l1, self.l2, self.l3, self.l4, self.p,
            self.q,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDesign("non-finite dimension".into()));
        }
        for (name, l) in [("l1", self.l1), ("l2", self.l2), ("l3", self.l3), ("l4", self.l4)] {
            if l <= 0.0 {
                return Err(Error::InvalidDesign(alloc::format!("{name} must be positive")));
            }
        }
        if self.p == 0.0 && self.q == 0.0 {
            return Err(Error::InvalidDesign("(p, q) must not be (0, 0)".into()));
        }
        if self.a_x == self.b_x && self.a_y == self.b_y {
            return Err(Error::DegenerateGroundLink);
        }
        Ok(())
    }
}

/// Rigid transform taking canonical coordinates back to the original frame:
/// `original = R(angle) · canonical + (tx, ty)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub angle: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        angle: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn to_original(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = (sin(self.angle), cos(self.angle));
        (c * x - s * y + self.tx, s * x + c * y + self.ty)
    }

    pub fn to_canonical(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = (sin(self.angle), cos(self.angle));
        let (dx, dy) = (x - self.tx, y - self.ty);
        (c * dx + s * dy, -s * dx + c * dy)
    }
}

/// Design expressed in the canonical frame: `A = (0, 0)`, `B = (b, 0)`, `b > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalDesign {
    pub b: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub p: f64,
    pub q: f64,
    pub frame: Frame,
}

/// Translates `A` to the origin and rotates `B − A` onto the +x axis.
pub fn canonicalize(design: &FiveBarDesign) -> Result<CanonicalDesign> {
    design.validate()?;
    let dx = design.b_x - design.a_x;
    let dy = design.b_y - design.a_y;
    let b = hypot(dx, dy);
    if b == 0.0 {
        return Err(Error::DegenerateGroundLink);
    }
    Ok(CanonicalDesign {
        b,
        l1: design.l1,
        l2: design.l2,
        l3: design.l3,
        l4: design.l4,
        p: design.p,
        q: design.q,
        frame: Frame {
            angle: atan2(dy, dx),
            tx: design.a_x,
            ty: design.a_y,
        },
    })
}

impl CanonicalDesign {
    /// `p² + q²`, the squared distance `|CP|`.
    pub fn rho2(&self) -> f64 {
        self.p * self.p + self.q * self.q
    }

    pub fn rho(&self) -> f64 {
        sqrt(self.rho2())
    }

    /// Characteristic length used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.b + self.l1 + self.l2 + self.l3 + self.l4 + self.rho()
    }

    /// Joint positions for a configuration.
    pub fn joints(&self, z: &Configuration) -> Joints {
        let c = [self.l1 * z.c_phi, self.l1 * z.s_phi];
        let d = [self.b + self.l3 * z.c_psi, self.l3 * z.s_psi];
        let pc = [z.x - c[0], z.y - c[1]];
        let k = self.l2 / self.rho2();
        // u = Qᵀ (P − C) / ρ², Q = [[p, −q], [q, p]]
        let u = [
            (self.p * pc[0] + self.q * pc[1]) * k,
            (-self.q * pc[0] + self.p * pc[1]) * k,
        ];
        let f = [c[0] + u[0], c[1] + u[1]];
        Joints {
            c,
            d,
            f,
            p: [z.x, z.y],
        }
    }

    fn end_effector(&self, c: [f64; 2], f: [f64; 2]) -> [f64; 2] {
        let u = [(f[0] - c[0]) / self.l2, (f[1] - c[1]) / self.l2];
        [
            c[0] + self.p * u[0] - self.q * u[1],
            c[1] + self.p * u[1] + self.q * u[0],
        ]
    }

    /// Maps an original-frame point into the canonical frame.
    pub fn point_to_canonical(&self, x: f64, y: f64) -> (f64, f64) {
        self.frame.to_canonical(x, y)
    }
}

/// Joint locations `C`, `D`, `F`, `P` in the canonical frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Joints {
    pub c: [f64; 2],
    pub d: [f64; 2],
    pub f: [f64; 2],
    pub p: [f64; 2],
}

/// A point `z = (x, y, cφ, sφ, cψ, sψ)` of the configuration manifold.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Configuration {
    pub x: f64,
    pub y: f64,
    pub c_phi: f64,
    pub s_phi: f64,
    pub c_psi: f64,
    pub s_psi: f64,
}

impl Configuration {
    pub fn from_array(a: [f64; 6]) -> Self {
        Configuration {
            x: a[0],
            y: a[1],
            c_phi: a[2],
            s_phi: a[3],
            c_psi: a[4],
            s_psi: a[5],
        }
    }

    pub fn from_slice(a: &[f64]) -> Self {
        Configuration::from_array([a[0], a[1], a[2], a[3], a[4], a[5]])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.c_phi, self.s_phi, self.c_psi, self.s_psi]
    }

    pub fn phi(&self) -> f64 {
        atan2(self.s_phi, self.c_phi)
    }

    pub fn psi(&self) -> f64 {
        atan2(self.s_psi, self.c_psi)
    }

    pub fn distance(&self, other: &Configuration) -> f64 {
        math::dist(&self.to_array(), &other.to_array())
    }

    /// Largest deviation from the two Pythagorean identities.
    pub fn trig_residual(&self) -> f64 {
        f64::max(
            abs(self.c_phi * self.c_phi + self.s_phi * self.s_phi - 1.0),
            abs(self.c_psi * self.c_psi + self.s_psi * self.s_psi - 1.0),
        )
    }
}

/// One forward-kinematics solution with its branch label
/// `σ = sign(cross(D − C, F − C))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FkSolution {
    pub config: Configuration,
    pub branch: i8,
    /// Set when the circles are tangent (`C`, `D`, `F` collinear).
    pub singular: bool,
}

/// Tangency tolerance relative to `l2 + l4`.
pub const TANGENCY_TOL: f64 = 1e-9;

#[inline]
pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Intersections of circle(c0, r0) and circle(c1, r1). The second element of
/// each returned pair is the sign of the perpendicular offset (+1 means the
/// point lies to the left of `c0 → c1`). A single point with offset 0 is
/// returned on tangency.
fn circle_intersections(c0: [f64; 2], r0: f64, c1: [f64; 2], r1: f64) -> Vec<([f64; 2], i8)> {
    let mut out = Vec::with_capacity(2);
    let dv = sub(c1, c0);
    let d = hypot(dv[0], dv[1]);
    if d == 0.0 {
        return out;
    }
    let tol = TANGENCY_TOL * (r0 + r1);
    let outer = d - (r0 + r1);
    let inner = abs(r0 - r1) - d;
    if outer > tol || inner > tol {
        return out;
    }
    let e = [dv[0] / d, dv[1] / d];
    let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
    let base = [c0[0] + a * e[0], c0[1] + a * e[1]];
    // tangent when the half-chord, not the gap, is below the tolerance; a
    // gap of δ already moves the two points √(2rδ) apart
    let h2 = r0 * r0 - a * a;
    if h2 <= tol * tol {
        out.push((base, 0));
        return out;
    }
    let h = sqrt(h2);
    let perp = [-e[1], e[0]];
    out.push(([base[0] + h * perp[0], base[1] + h * perp[1]], 1));
    out.push(([base[0] - h * perp[0], base[1] - h * perp[1]], -1));
    out
}

/// Forward kinematics from input angles (radians).
pub fn forward_kinematics(d: &CanonicalDesign, phi: f64, psi: f64) -> Vec<FkSolution> {
    forward_kinematics_cs(d, cos(phi), sin(phi), cos(psi), sin(psi))
}

/// Forward kinematics from cosine/sine pairs of the input angles.
pub fn forward_kinematics_cs(
    d: &CanonicalDesign,
    c_phi: f64,
    s_phi: f64,
    c_psi: f64,
    s_psi: f64,
) -> Vec<FkSolution> {
    let c = [d.l1 * c_phi, d.l1 * s_phi];
    let dd = [d.b + d.l3 * c_psi, d.l3 * s_psi];
    circle_intersections(c, d.l2, dd, d.l4)
        .into_iter()
        .map(|(f, side)| {
            let p = d.end_effector(c, f);
            FkSolution {
                config: Configuration {
                    x: p[0],
                    y: p[1],
                    c_phi,
                    s_phi,
                    c_psi,
                    s_psi,
                },
                branch: side,
                singular: side == 0,
            }
        })
        .collect()
}

/// Inverse kinematics of the canonical-frame end-effector point `(x, y)`;
/// at most four configurations.
pub fn inverse_kinematics(d: &CanonicalDesign, x: f64, y: f64) -> Vec<Configuration> {
    let mut out = Vec::with_capacity(4);
    let p = [x, y];
    let rho = d.rho();
    let k = d.l2 / d.rho2();
    let b = [d.b, 0.0];
    for (c, _) in circle_intersections([0.0, 0.0], d.l1, p, rho) {
        let pc = sub(p, c);
        let f = [
            c[0] + k * (d.p * pc[0] + d.q * pc[1]),
            c[1] + k * (-d.q * pc[0] + d.p * pc[1]),
        ];
        for (dj, _) in circle_intersections(b, d.l3, f, d.l4) {
            out.push(Configuration {
                x,
                y,
                c_phi: c[0] / d.l1,
                s_phi: c[1] / d.l1,
                c_psi: (dj[0] - d.b) / d.l3,
                s_psi: dj[1] / d.l3,
            });
        }
    }
    out
}

/// Output-singularity functions `h1 = cross(C − A, P − C)` and
/// `h2 = cross(D − B, F − D)`.
pub fn output_sing_values(d: &CanonicalDesign, z: &Configuration) -> (f64, f64) {
    let j = d.joints(z);
    let h1 = cross(j.c, sub(j.p, j.c));
    let h2 = cross(sub(j.d, [d.b, 0.0]), sub(j.f, j.d));
    (h1, h2)
}

/// Input-singularity function `cross(D − C, F − C)`; its sign is the FK branch.
pub fn input_sing_value(d: &CanonicalDesign, z: &Configuration) -> f64 {
    let j = d.joints(z);
    cross(sub(j.d, j.c), sub(j.f, j.c))
}

/// Image of the unit circle of input rates under the input → output velocity map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityEllipse {
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis in the canonical frame (radians).
    pub major_axis_angle: f64,
}

impl VelocityEllipse {
    pub fn aspect_ratio(&self) -> f64 {
        self.semi_major / self.semi_minor
    }
}

/// Velocity Jacobian `∂(x, y)/∂(φ, ψ)` as a row-major 2×2 matrix.
pub fn velocity_jacobian(d: &CanonicalDesign, z: &Configuration) -> Result<[f64; 4]> {
    let j = d.joints(z);
    let pc = sub(j.p, j.c);
    let e = sub(j.f, j.d);
    let k = d.l2 / d.rho2();
    let qe = [k * (d.p * e[0] - d.q * e[1]), k * (d.q * e[0] + d.p * e[1])];
    let det = pc[0] * qe[1] - pc[1] * qe[0];
    let scale = hypot(pc[0], pc[1]) * hypot(qe[0], qe[1]);
    if scale == 0.0 || abs(det) <= 1e-10 * scale {
        return Err(Error::SingularJacobian);
    }
    let dc = [-d.l1 * z.s_phi, d.l1 * z.c_phi];
    let dd = [-d.l3 * z.s_psi, d.l3 * z.c_psi];
    // e − k Q e, contracted with dC/dφ
    let b11 = pc[0] * dc[0] + pc[1] * dc[1];
    let b21 = -((e[0] - qe[0]) * dc[0] + (e[1] - qe[1]) * dc[1]);
    let b22 = e[0] * dd[0] + e[1] * dd[1];
    // A⁻¹ = [[qe_y, −pc_y], [−qe_x, pc_x]] / det
    let inv = [qe[1] / det, -pc[1] / det, -qe[0] / det, pc[0] / det];
    Ok([
        inv[0] * b11 + inv[1] * b21,
        inv[1] * b22,
        inv[2] * b11 + inv[3] * b21,
        inv[3] * b22,
    ])
}

pub fn velocity_ellipse(d: &CanonicalDesign, z: &Configuration) -> Result<VelocityEllipse> {
    let m = velocity_jacobian(d, z)?;
    let (s1, s2, theta) = math::svd2(m[0], m[1], m[2], m[3]);
    Ok(VelocityEllipse {
        semi_major: s1,
        semi_minor: s2,
        major_axis_angle: theta,
    })
}
