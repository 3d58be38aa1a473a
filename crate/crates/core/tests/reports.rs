use charflow::report::convergence_order;
use charflow::{merge, Entry, VerificationReport};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = Entry> {
    (
        prop_oneof![Just("flux.n"), Just("chart.grad_s"), Just("theta.s"), Just("tracer.unit_speed")],
        prop::collection::vec(-1e3f64..1e3, 1..6),
        1e-12f64..1.0,
        prop::option::of(-3.0f64..5.0),
    )
        .prop_map(|(check, res, tol, order)| {
            let mut e = Entry::from_residuals(check, "a = b", &res, tol);
            e.order = order;
            e
        })
}

fn report() -> impl Strategy<Value = VerificationReport> {
    (
        prop::collection::vec(entry(), 0..5),
        prop::collection::btree_map("[a-c]", "[x-z]{1,3}", 0..3),
    )
        .prop_map(|(entries, metadata)| VerificationReport { entries, metadata })
}

proptest! {
    #[test]
    fn merge_ignores_input_order(mut reps in prop::collection::vec(report(), 0..5)) {
        let a = merge(&reps);
        reps.reverse();
        let b = merge(&reps);
        if !reps.is_empty() {
            reps.rotate_left(1);
        }
        let c = merge(&reps);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
        prop_assert_eq!(a.entries.len(), reps.iter().map(|r| r.entries.len()).sum::<usize>());
        prop_assert!(a.entries.windows(2).all(|w| w[0].check <= w[1].check));
    }

    #[test]
    fn json_round_trip_is_exact(r in report()) {
        prop_assert_eq!(VerificationReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn pass_flag_tracks_the_tolerance(res in prop::collection::vec(-1.0f64..1.0, 1..20), tol in 0.0f64..1.0) {
        let e = Entry::from_residuals("flux.n", "", &res, tol);
        let max = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        prop_assert_eq!(e.pass, max <= tol);
        prop_assert_eq!(e.max_residual, max);
    }
}

#[test]
fn merge_of_nothing_is_empty() {
    assert_eq!(merge(&[]), VerificationReport::new());
}

#[test]
fn conflicting_metadata_is_joined() {
    let mut a = VerificationReport::new();
    a.set_meta("field", "radial");
    let mut b = VerificationReport::new();
    b.set_meta("field", "bilinear");
    assert_eq!(merge(&[a, b]).metadata["field"], "bilinear; radial");
}

#[test]
fn order_of_a_second_order_study() {
    let steps = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = steps.iter().map(|h| 3.0 * h * h).collect();
    assert!((convergence_order(&steps, &errs).unwrap() - 2.0).abs() < 1e-12);
}
