//! Explicit trajectories: integration, interface segments, regularity, and
//! discounted costs.

use hjbhomog_core::control_model::{preset, MixedControl, PresetParams, Region, Side, Variant};
use hjbhomog_core::trajectory::{
    classify_regularity, discounted_cost, integrate, named_signal, ControlSignal, SegmentControl,
};
use hjbhomog_core::Error;

fn oned() -> hjbhomog_core::ControlProblem {
    preset("oned_example", &PresetParams::default()).unwrap()
}

#[test]
fn control_signals_validate_their_breakpoints() {
    let ctl = SegmentControl::Side {
        side: Side::One,
        alpha: 1.0,
    };
    assert!(ControlSignal::new(vec![0.5, 1.0], vec![ctl]).is_err());
    assert!(ControlSignal::new(vec![0.0, 1.0, 1.0], vec![ctl, ctl]).is_err());
    assert!(ControlSignal::new(vec![0.0, 1.0], vec![ctl, ctl]).is_err());
    let sig = ControlSignal::new(vec![0.0, 1.0, 3.0], vec![ctl, ctl]).unwrap();
    assert_eq!(sig.total_time(), 3.0);
    assert_eq!(sig.breakpoints(), &[0.0, 1.0, 3.0]);
}

#[test]
fn integration_preconditions_are_enforced() {
    let prob = oned();
    let (sig, _) = named_signal(&prob, "crossing", 1.0).unwrap();
    assert!(integrate(&prob, -0.1, 0.0, &sig, 1.0, 1e-3).is_err());
    // dt must resolve the fast scale: eps g / 2 = 0.05 here.
    assert!(matches!(
        integrate(&prob, 0.1, 0.0, &sig, 1.0, 0.06),
        Err(Error::Precondition { .. })
    ));
    // The signal must cover the requested horizon.
    assert!(integrate(&prob, 0.1, 0.0, &sig, 2.0, 1e-3).is_err());
}

#[test]
fn singular_stay_rides_the_interface_for_free() {
    let prob = oned();
    let (sig, variant) = named_signal(&prob, "singular_stay", 5.0).unwrap();
    assert_eq!(variant, Variant::Minus);
    let traj = integrate(&prob, 0.1, 0.0, &sig, 5.0, 1e-3).unwrap();
    assert_eq!(traj.final_state(), 0.0);
    assert!(traj.samples.iter().all(|s| s.region == Region::Interface));
    assert_eq!(traj.interface_segments.len(), 1);
    let seg = traj.interface_segments[0];
    assert!(!seg.regular);
    assert_eq!(seg.max_abs_normal_velocity, 0.0);
    assert_eq!(seg.t_start, 0.0);
    assert!((seg.t_end - 5.0).abs() <= 1e-12);
    let cost = discounted_cost(&prob, &traj, 1.0, 0.1).unwrap();
    assert_eq!(cost.value, 0.0);
    assert!((cost.tail_bound - 2.0 * (-5.0f64).exp()).abs() <= 1e-12);
}

#[test]
fn regular_stay_pays_the_unit_rate() {
    let prob = oned();
    let (sig, variant) = named_signal(&prob, "regular_stay", 5.0).unwrap();
    assert_eq!(variant, Variant::Plus);
    let traj = integrate(&prob, 0.1, 0.0, &sig, 5.0, 1e-3).unwrap();
    assert_eq!(traj.final_state(), 0.0);
    let segs = classify_regularity(&prob, &traj).unwrap();
    assert_eq!(segs.len(), 1);
    assert!(segs[0].regular);
    let cost = discounted_cost(&prob, &traj, 1.0, 0.1).unwrap();
    let exact = 1.0 - (-5.0f64).exp();
    assert!((cost.value - exact).abs() <= 1e-6, "cost {}", cost.value);
    assert!(cost.upper >= cost.value);
}

#[test]
fn crossing_signal_traverses_without_interface_segments() {
    let prob = oned();
    let (sig, _) = named_signal(&prob, "crossing", 2.0).unwrap();
    let traj = integrate(&prob, 0.1, 0.0, &sig, 2.0, 1e-3).unwrap();
    // Unit speed to the right for two time units.
    assert!((traj.final_state() - 2.0).abs() <= 1e-9);
    assert!(traj.interface_segments.is_empty());
    // Interface touches are instantaneous and transversal.
    let touches = traj
        .samples
        .iter()
        .filter(|s| s.region == Region::Interface)
        .count();
    assert!(touches >= 10);
    // The fast variable x / eps classifies the occupied region.
    let at = |t: f64| -> Region {
        traj.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
            .unwrap()
            .region
    };
    assert_eq!(at(0.05), Region::Omega1);
    assert_eq!(at(0.15), Region::Omega2);
}

#[test]
fn samples_move_no_faster_than_the_dynamics_bound() {
    let prob = oned();
    let (sig, _) = named_signal(&prob, "crossing", 2.0).unwrap();
    let traj = integrate(&prob, 0.1, 0.0, &sig, 2.0, 1e-3).unwrap();
    for w in traj.samples.windows(2) {
        let dx = (w[1].x - w[0].x).abs();
        let dt = w[1].t - w[0].t;
        assert!(dt >= 0.0);
        assert!(dx <= prob.bounds.m_b * dt + 1e-12);
    }
    // Discounted accumulation is nondecreasing for nonnegative rates.
    for w in traj.samples.windows(2) {
        assert!(w[1].cost_accum >= w[0].cost_accum - 1e-15);
    }
}

#[test]
fn breakpoints_split_integration_steps_exactly() {
    let prob = oned();
    let push = SegmentControl::Mixed(MixedControl::new(1.0, 1.0, 0.5).unwrap());
    let hold = SegmentControl::Mixed(MixedControl::new(1.0, -1.0, 0.5).unwrap());
    // An awkward breakpoint that is not a multiple of dt.
    let sig = ControlSignal::new(vec![0.0, 0.30047, 1.0], vec![hold, push]).unwrap();
    let traj = integrate(&prob, 0.5, 0.0, &sig, 1.0, 1e-3).unwrap();
    assert!(traj.samples.iter().any(|s| (s.t - 0.30047).abs() <= 1e-12));
    // Held at the interface first, then pushed at unit speed.
    let final_x = traj.final_state();
    assert!((final_x - (1.0 - 0.30047)).abs() <= 1e-9, "x = {final_x}");
}

#[test]
fn cost_estimates_check_their_inputs() {
    let prob = oned();
    let (sig, _) = named_signal(&prob, "singular_stay", 1.0).unwrap();
    let traj = integrate(&prob, 0.1, 0.0, &sig, 1.0, 1e-3).unwrap();
    assert!(matches!(
        discounted_cost(&prob, &traj, 1.0, 0.2),
        Err(Error::GridMismatch { .. })
    ));
    assert!(discounted_cost(&prob, &traj, 0.0, 0.1).is_err());
    assert!(named_signal(&prob, "warp", 1.0).is_err());
}
