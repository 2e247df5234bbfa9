use proptest::prelude::*;
use radshoot::fowler::{from_fowler, rescale, to_fowler};
use radshoot::integrator::vector_field;
use radshoot::num::{lift_near, spow, wrap_pi};
use radshoot::shooting::{lines_crossed, shoot, ShotClass};
use radshoot::{ExponentSet, PhaseState, Problem, ProblemSpec, RadialState, StopPolicy};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn rescale_round_trip(
        l in 2.5f64..30.0, big_l in 2.5f64..30.0,
        t in -8.0f64..8.0, x in -3.0f64..3.0, y in -3.0f64..3.0,
    ) {
        let a = ExponentSet::for_index(3.0, 2.0, l);
        let b = ExponentSet::for_index(3.0, 2.0, big_l);
        let s = PhaseState::new(t, x, y);
        let back = rescale(rescale(s, &a, &b), &b, &a);
        prop_assert!(close(back.x, x, 1e-12) && close(back.y, y, 1e-12));
    }

    #[test]
    fn fowler_round_trip(
        p in 1.2f64..2.0, l in 6.0f64..20.0,
        r in 1e-3f64..1e3, u in -1.0f64..1.0, du in -5.0f64..5.0,
    ) {
        let e = ExponentSet::for_index(3.0, p, l);
        let back = from_fowler(to_fowler(RadialState { r, u, du }, &e), &e);
        prop_assert!(close(back.r, r, 1e-12));
        prop_assert!(close(back.u, u, 1e-11));
        prop_assert!(close(back.du, du, 1e-9));
    }

    #[test]
    fn signed_power_is_odd_and_invertible(v in -1e3f64..1e3, e in 0.3f64..4.0) {
        prop_assert_eq!(spow(-v, e), -spow(v, e));
        prop_assert!(close(spow(spow(v, e), 1.0 / e), v, 1e-12));
    }

    #[test]
    fn lifted_angles_stay_within_half_turn(a in -50.0f64..50.0, target in -50.0f64..50.0) {
        let lifted = lift_near(a, target);
        prop_assert!((lifted - target).abs() <= std::f64::consts::PI + 1e-12);
        prop_assert!(wrap_pi(lifted - a).abs() < 1e-9);
    }

    #[test]
    fn line_count_is_monotone(a in -40.0f64..0.0, gap in 0.0f64..5.0) {
        prop_assert!(lines_crossed(a - gap) >= lines_crossed(a));
    }

    #[test]
    fn field_is_odd_for_odd_nonlinearity(t in -5.0f64..5.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let pb = Problem::new(ProblemSpec::config_a()).unwrap();
        let [dx, dy] = vector_field(&pb, t, x, y);
        let [mx, my] = vector_field(&pb, t, -x, -y);
        prop_assert!(close(mx, -dx, 1e-14) && close(my, -dy, 1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mirrored_shots_have_mirrored_outcomes(d in 0.01f64..0.99) {
        let pb = Problem::new(ProblemSpec::config_a()).unwrap();
        let policy = StopPolicy::default();
        let plus = shoot(d, &pb, &policy).unwrap();
        let minus = shoot(-d, &pb, &policy).unwrap();
        prop_assert_eq!(plus.zeros, minus.zeros);
        prop_assert!((plus.total_angle - minus.total_angle).abs() < 1e-9);
        match (plus.class, minus.class) {
            (ShotClass::SlowDecay { target: a }, ShotClass::SlowDecay { target: b }) => {
                prop_assert_ne!(a, b)
            }
            (ShotClass::FastDecay { limit: a }, ShotClass::FastDecay { limit: b }) => {
                prop_assert!(close(a, -b, 1e-9))
            }
            (a, b) => prop_assert_eq!(a.label(), b.label()),
        }
    }
}
