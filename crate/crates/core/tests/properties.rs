use circlock_core::circle_map::{CircleFamily, ComposedCircleMap, FamilyHarmonic, ParamFamily};
use circlock_core::rotation::{classify, displacement, rho_estimate, Classification, ClassifyOptions};
use circlock_core::trig::TPoly;
use circlock_core::windows::{boundary_functions, enumerate_windows, locked_measure};
use proptest::prelude::*;

fn family(amp1: f64, amp2: f64, slope: f64) -> CircleFamily {
    CircleFamily::new(
        1,
        TPoly::default(),
        vec![
            FamilyHarmonic {
                j: 1,
                a: TPoly(vec![0.0, slope]),
                b: TPoly::constant(amp1),
            },
            FamilyHarmonic {
                j: 2,
                a: TPoly::constant(amp2),
                b: TPoly::default(),
            },
        ],
        "prop",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rigid_rotation_within_error_bar(alpha in 0.0f64..1.0, n in 10u64..5000) {
        let r = rho_estimate(&ComposedCircleMap::rotation(alpha), 0.3, n);
        prop_assert!((r.mean_displacement - alpha).abs() <= r.error_bound);
    }

    #[test]
    fn rotation_number_nondecreasing_in_t(
        a1 in -0.1f64..0.1, a2 in -0.03f64..0.03, s in -0.05f64..0.05,
        t1 in 0.0f64..1.0, dt in 0.0f64..0.2,
    ) {
        let f = family(a1, a2, s);
        let n = 4000;
        let r1 = rho_estimate(&f.map_at(t1), 0.0, n);
        let r2 = rho_estimate(&f.map_at((t1 + dt).min(1.0)), 0.0, n);
        prop_assert!(r2.mean_displacement >= r1.mean_displacement - r1.error_bound - r2.error_bound);
    }

    #[test]
    fn locked_classification_has_periodic_witness(
        a1 in -0.15f64..0.15, t in 0.0f64..1.0,
    ) {
        let f = CircleFamily::arnold(a1).unwrap();
        let map = f.map_at(t);
        let r = classify(&map, &ClassifyOptions::with_q_max(12));
        if let Classification::Locked { p, q } = r.classification {
            let w = r.witness.unwrap();
            let lift_p = (r.mean_displacement * q as f64).round() as i64;
            prop_assert!(displacement(&map, lift_p, q, w).abs() <= 1e-9, "{p}/{q}");
            prop_assert_eq!(lift_p.rem_euclid(q as i64), p);
        }
    }

    #[test]
    fn boundary_functions_strictly_increase(
        a1 in -0.1f64..0.1, a2 in -0.03f64..0.03, s in -0.05f64..0.05,
        t in 0.0f64..0.95,
    ) {
        let f = family(a1, a2, s);
        let (m0, p0) = boundary_functions(&f, 0, 1, t);
        let (m1, p1) = boundary_functions(&f, 0, 1, t + 0.05);
        prop_assert!(m1 > m0 && p1 > p0);
        prop_assert!(m0 <= p0 && m1 <= p1);
    }

    #[test]
    fn window_midpoints_lock_and_windows_disjoint(
        a1 in 0.02f64..0.15, a2 in -0.02f64..0.02,
    ) {
        let f = family(a1, a2, 0.0);
        let ws = enumerate_windows(&f, 6, 1e-7);
        let opts = ClassifyOptions::with_q_max(6);
        for w in ws.iter().filter(|w| !w.narrow) {
            let c = classify(&f.map_at(w.midpoint().rem_euclid(1.0)), &opts).classification;
            prop_assert_eq!(c, Classification::Locked { p: w.p, q: w.q });
        }
        for a in &ws {
            for b in &ws {
                if (a.p, a.q) != (b.p, b.q) && !a.narrow && !b.narrow {
                    let overlap = a.t_hi.min(b.t_hi) - a.t_lo.max(b.t_lo);
                    prop_assert!(overlap <= a.bracket_radius + b.bracket_radius);
                }
            }
        }
    }
}

#[test]
fn measure_consistency() {
    for amp in [0.05, 0.12] {
        let f = CircleFamily::arnold(amp).unwrap();
        let m = locked_measure(&f, 10, 2000, 1e-7, 3);
        assert!(m.lower <= m.mc + m.unresolved_frac + 3.0 * m.mc_stderr, "{m:?}");
    }
}

#[test]
fn outside_window_is_not_locked() {
    let f = CircleFamily::arnold(0.1).unwrap();
    let ws = enumerate_windows(&f, 5, 1e-8);
    let opts = ClassifyOptions::with_q_max(5);
    for w in ws.iter().filter(|w| !w.narrow) {
        for t in [w.t_lo - 1e-4, w.t_hi + 1e-4] {
            let c = classify(&f.map_at(t.rem_euclid(1.0)), &opts).classification;
            assert_ne!(c, Classification::Locked { p: w.p, q: w.q }, "{w:?} at {t}");
        }
    }
}
