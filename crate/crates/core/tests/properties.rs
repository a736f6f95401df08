use fivebar_core::fivebar::{
    canonicalize, forward_kinematics, inverse_kinematics, velocity_ellipse, FiveBarDesign,
};
use fivebar_core::graph::{radius_pairs, Dsu};
use fivebar_core::poly::Polynomial;
use fivebar_core::systems::build_f;
use num_complex::Complex64;
use proptest::prelude::*;

fn design() -> impl Strategy<Value = FiveBarDesign> {
    (
        (-1.0..1.0f64, -1.0..1.0f64, 0.2..1.0f64, 0.0..std::f64::consts::TAU),
        (0.2..0.9f64, 0.2..0.9f64, 0.2..0.9f64, 0.2..0.9f64),
        (-0.4..0.4f64, 0.05..0.8f64),
    )
        .prop_map(|((ax, ay, base, ang), (l1, l2, l3, l4), (p, q))| FiveBarDesign {
            a_x: ax,
            a_y: ay,
            b_x: ax + base * ang.cos(),
            b_y: ay + base * ang.sin(),
            l1,
            l2,
            l3,
            l4,
            p,
            q,
        })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frame_maps_canonical_pivots_back(des in design()) {
        let d = canonicalize(&des).unwrap();
        let (ax, ay) = d.frame.to_original(0.0, 0.0);
        let (bx, by) = d.frame.to_original(d.b, 0.0);
        prop_assert!((ax - des.a_x).abs() <= 1e-12 && (ay - des.a_y).abs() <= 1e-12);
        prop_assert!((bx - des.b_x).abs() <= 1e-12 && (by - des.b_y).abs() <= 1e-12);
    }

    #[test]
    fn kinematic_solutions_lie_on_the_manifold(des in design(), phi in -3.2..3.2f64, psi in -3.2..3.2f64) {
        let d = canonicalize(&des).unwrap();
        let f = build_f(&d);
        let fk = forward_kinematics(&d, phi, psi);
        prop_assert!(fk.len() <= 2);
        for s in &fk {
            let z = s.config;
            prop_assert!(z.trig_residual() <= 1e-10);
            prop_assert!(max_abs(&f.evaluate(&z.to_array()).unwrap()) <= 1e-8);
            let ik = inverse_kinematics(&d, z.x, z.y);
            prop_assert!(!ik.is_empty() && ik.len() <= 4);
            for c in &ik {
                prop_assert!(c.trig_residual() <= 1e-10);
                prop_assert!(max_abs(&f.evaluate(&c.to_array()).unwrap()) <= 1e-8);
            }
            if let Ok(e) = velocity_ellipse(&d, &z) {
                prop_assert!(e.semi_major >= e.semi_minor && e.semi_minor >= 0.0);
            }
        }
    }

    #[test]
    fn polynomial_terms_stay_unique(a in prop::collection::vec((0u32..3, 0u32..3, -2.0..2.0f64), 0..8),
                                    b in prop::collection::vec((0u32..3, 0u32..3, -2.0..2.0f64), 0..8)) {
        let make = |t: &[(u32, u32, f64)]| {
            Polynomial::from_terms(2, t.iter().map(|&(i, j, c)| (vec![i, j], Complex64::new(c, 0.0))))
        };
        let (p, q) = (make(&a), make(&b));
        for r in [&p + &q, &p * &q, &p - &p] {
            let exps: Vec<&Vec<u32>> = r.terms().map(|(e, _)| e).collect();
            let mut uniq = exps.clone();
            uniq.dedup();
            prop_assert_eq!(uniq.len(), exps.len());
            prop_assert!(r.terms().all(|(e, c)| e.len() == 2 && *c != Complex64::new(0.0, 0.0)));
        }
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn radius_pairs_are_exactly_the_close_pairs(pts in prop::collection::vec(prop::array::uniform6(-1.0..1.0f64), 0..60), r in 0.1..1.5f64) {
        let pairs = radius_pairs(&pts, r);
        let dist = |a: &[f64; 6], b: &[f64; 6]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let mut expected = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if dist(&pts[i], &pts[j]) <= r {
                    expected.push((i as u32, j as u32));
                }
            }
        }
        let got: Vec<(u32, u32)> = pairs.iter().map(|&(a, b, _)| (a, b)).collect();
        prop_assert_eq!(got, expected);
        for &(a, b, w) in &pairs {
            prop_assert!(w <= r);
            prop_assert_eq!(w, dist(&pts[b as usize], &pts[a as usize]));
        }
    }

    #[test]
    fn union_find_is_a_partition(n in 1usize..50, unions in prop::collection::vec((0usize..50, 0usize..50), 0..80)) {
        let mut dsu = Dsu::new(n);
        let mut naive: Vec<usize> = (0..n).collect();
        for &(a, b) in &unions {
            let (a, b) = (a % n, b % n);
            dsu.union(a, b);
            let (la, lb) = (naive[a], naive[b]);
            for l in naive.iter_mut() {
                if *l == lb {
                    *l = la;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(dsu.find(i) == dsu.find(j), naive[i] == naive[j]);
            }
        }
    }
}
