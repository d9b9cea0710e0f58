//! Geometry, control blending, one-sided Hamiltonians, and the interface
//! regularization of the bundled presets.

use hjbhomog_core::control_model::{
    preset, DomainPartition, MixedControl, PresetParams, ProblemBounds, Region, Side, Variant,
    PRESET_NAMES, TANGENTIAL_TOL,
};
use hjbhomog_core::Error;

fn oned() -> hjbhomog_core::ControlProblem {
    preset("oned_example", &PresetParams::default()).unwrap()
}

fn ident() -> hjbhomog_core::ControlProblem {
    preset("identical_sides", &PresetParams::default()).unwrap()
}

#[test]
fn presets_build_and_unknown_name_is_rejected() {
    let params = PresetParams::default();
    for name in PRESET_NAMES {
        let p = preset(name, &params).unwrap();
        assert_eq!(p.preset_id, *name);
        assert_eq!(p.partition.period(), 2.0);
        assert_eq!(p.partition.interface_points(), &[0.0, 1.0]);
    }
    assert!(matches!(
        preset("nope", &params),
        Err(Error::Invalid { what: "preset", .. })
    ));
}

#[test]
fn partition_classifies_points_periodically() {
    let p = oned();
    let part = &p.partition;
    assert_eq!(part.classify_point(0.5), Region::Omega1);
    assert_eq!(part.classify_point(1.5), Region::Omega2);
    assert_eq!(part.classify_point(2.5), Region::Omega1);
    assert_eq!(part.classify_point(-0.5), Region::Omega2);
    assert_eq!(part.classify_point(0.0), Region::Interface);
    assert_eq!(part.classify_point(1.0), Region::Interface);
    assert_eq!(part.classify_point(2.0), Region::Interface);
    assert_eq!(part.min_interface_gap(), 1.0);
}

#[test]
fn interface_normals_point_out_of_region_one() {
    let p = oned();
    assert_eq!(p.partition.interface_normal(0.0).unwrap(), -1.0);
    assert_eq!(p.partition.interface_normal(1.0).unwrap(), 1.0);
    assert_eq!(p.partition.interface_normal(3.0).unwrap(), 1.0);
    assert!(matches!(
        p.partition.interface_normal(0.5),
        Err(Error::NotInterfacePoint { .. })
    ));
}

#[test]
fn partition_rejects_bad_construction() {
    assert!(DomainPartition::new(1, 2.0, vec![0.0, 0.0], Side::One).is_err());
    assert!(DomainPartition::new(1, 2.0, vec![0.0, 2.5], Side::One).is_err());
    assert!(DomainPartition::new(1, -1.0, vec![0.0], Side::One).is_err());
    assert!(DomainPartition::new(2, 2.0, vec![0.0, 1.0], Side::One).is_err());
}

#[test]
fn mixed_control_validates_its_weight() {
    assert!(MixedControl::new(0.0, 0.0, 1.2).is_err());
    assert!(MixedControl::new(0.0, 0.0, -0.1).is_err());
    assert!(MixedControl::new(f64::NAN, 0.0, 0.5).is_err());
    let a = MixedControl::new(1.0, -1.0, 0.25).unwrap();
    assert_eq!((a.alpha1, a.alpha2, a.mu), (1.0, -1.0, 0.25));
}

#[test]
fn bounds_require_delta_below_the_speed_bound() {
    assert!(ProblemBounds::new(1.0, 2.0, 1.5, 0.0, 0.0).is_err());
    assert!(ProblemBounds::new(1.0, 2.0, 0.0, 0.0, 0.0).is_err());
    assert!(ProblemBounds::new(1.0, 2.0, 1.0, -1.0, 0.0).is_err());
    assert!(ProblemBounds::new(1.0, 2.0, 1.0, 0.0, 0.0).is_ok());
}

#[test]
fn one_sided_hamiltonians_hit_exact_values() {
    let p = oned();
    // Midcell the cost is |alpha| + 1: the sup sits at alpha = 0.
    assert!((p.hamiltonian(Side::One, 0.0, 0.5, 0.0) + 1.0).abs() <= 1e-12);
    // At the interface the cost vanishes at alpha = 1 (side 1).
    assert_eq!(p.hamiltonian(Side::One, 0.0, 0.0, 0.0), 0.0);
    assert_eq!(p.hamiltonian(Side::Two, 0.0, 0.0, 0.0), 0.0);

    let q = ident();
    for pp in [-2.0f64, -0.5, 0.0, 1.5, 3.0] {
        let expected = pp.abs() - 1.0;
        for side in [Side::One, Side::Two] {
            assert!((q.hamiltonian(side, 0.0, 0.3, pp) - expected).abs() <= 1e-12);
        }
    }
}

#[test]
fn oned_sides_mirror_each_other_in_momentum() {
    let p = oned();
    for y in [0.1, 0.35, 0.5, 0.8] {
        for pp in [-3.0, -1.0, 0.0, 0.4, 2.0] {
            let h1 = p.hamiltonian(Side::One, 0.0, y, pp);
            let h2 = p.hamiltonian(Side::Two, 0.0, y, -pp);
            assert!((h1 - h2).abs() <= 1e-12, "y = {y}, p = {pp}");
        }
    }
}

#[test]
fn stay_costs_split_the_strategy_classes() {
    let p = oned();
    for y in [0.0, 1.0] {
        assert_eq!(p.stay_cost(0.0, y, Variant::Minus).unwrap(), 0.0);
        assert_eq!(p.stay_cost(0.0, y, Variant::Plus).unwrap(), 1.0);
    }
    let q = ident();
    assert_eq!(q.stay_cost(0.0, 0.0, Variant::Minus).unwrap(), 1.0);
    assert_eq!(q.stay_cost(0.0, 0.0, Variant::Plus).unwrap(), 1.0);
}

#[test]
fn tangential_controls_are_tangential_and_regulars_are_a_subset() {
    let p = oned();
    for y in [0.0, 1.0] {
        let set = p.tangential_control_set(0.0, y, TANGENTIAL_TOL).unwrap();
        assert!(!set.is_empty());
        let n1 = p.partition.interface_normal(y).unwrap();
        for a in &set {
            let (bh, _) = p.mixed_dynamics_cost(0.0, y, *a);
            assert!((bh * n1).abs() <= TANGENTIAL_TOL);
        }
        let regs = p.regular_filter(0.0, y, &set).unwrap();
        assert!(!regs.is_empty());
        assert!(regs.len() < set.len());
        for a in &regs {
            let b1 = p.b(Side::One, 0.0, y, a.alpha1);
            let b2 = p.b(Side::Two, 0.0, y, a.alpha2);
            assert!(b1 * n1 >= -TANGENTIAL_TOL);
            assert!(b2 * (-n1) >= -TANGENTIAL_TOL);
        }
    }
}

#[test]
fn tangential_hamiltonians_order_the_variants() {
    let p = oned();
    for y in [0.0, 1.0] {
        for pp in [-2.0, 0.0, 2.0] {
            let minus = p
                .tangential_hamiltonian(0.0, y, pp, Variant::Minus)
                .unwrap();
            let plus = p.tangential_hamiltonian(0.0, y, pp, Variant::Plus).unwrap();
            assert!(plus <= minus + 1e-12);
        }
        // Tangential blends have zero velocity here (within tolerance), so
        // the momentum drops out and the values are the negated stay costs.
        let minus3 = p
            .tangential_hamiltonian(0.0, y, 3.0, Variant::Minus)
            .unwrap();
        let plus3 = p
            .tangential_hamiltonian(0.0, y, 3.0, Variant::Plus)
            .unwrap();
        assert!(minus3.abs() <= 1e-8);
        assert!((plus3 + 1.0).abs() <= 1e-8);
    }
}

#[test]
fn lemma_constant_matches_the_bounds() {
    assert_eq!(oned().lemma_constant(), 4.0);
    assert_eq!(ident().lemma_constant(), 2.0);
}

#[test]
fn regularization_blends_opposed_unit_pushes_for_free() {
    let p = oned();
    let a = MixedControl::new(1.0, -1.0, 0.8).unwrap();
    let push = MixedControl::new(1.0, -1.0, 0.0).unwrap();
    let out = p.regularize_control(0.0, 0.0, a, push).unwrap();
    let (bh, lh) = p.mixed_dynamics_cost(0.0, 0.0, out);
    assert!(bh.abs() <= TANGENTIAL_TOL);
    assert!(lh.abs() <= 1e-9);
}

#[test]
fn regularization_pays_the_blended_cost_exactly() {
    let p = oned();
    let a = MixedControl::new(0.5, -1.0, 0.9).unwrap();
    let push = MixedControl::new(1.0, -1.0, 0.0).unwrap();
    let (ba, la) = p.mixed_dynamics_cost(0.0, 0.0, a);
    let n1 = -1.0;
    let q = ba * n1;
    let mu_bar = 1.0 / (q.abs() + 1.0);
    let (_, lp) = p.mixed_dynamics_cost(0.0, 0.0, push);
    let target = mu_bar * la + (1.0 - mu_bar) * lp;

    let out = p.regularize_control(0.0, 0.0, a, push).unwrap();
    let (bh, lh) = p.mixed_dynamics_cost(0.0, 0.0, out);
    assert!(bh.abs() <= TANGENTIAL_TOL);
    assert!((lh - target).abs() <= 1e-9);
    assert!((lh - la).abs() <= p.lemma_constant() * q.abs() + 1e-9);
}

#[test]
fn regularization_preconditions_are_enforced() {
    let p = oned();
    let tangential = MixedControl::new(1.0, -1.0, 0.5).unwrap();
    let push = MixedControl::new(1.0, -1.0, 0.0).unwrap();
    assert!(matches!(
        p.regularize_control(0.0, 0.0, tangential, push),
        Err(Error::Precondition { .. })
    ));
    // A push with the wrong normal velocity sign is refused.
    let a = MixedControl::new(1.0, -1.0, 0.8).unwrap();
    let bad_push = MixedControl::new(1.0, -1.0, 1.0).unwrap();
    assert!(matches!(
        p.regularize_control(0.0, 0.0, a, bad_push),
        Err(Error::Precondition { .. })
    ));
    // Off the interface there is no normal direction.
    assert!(p.regularize_control(0.0, 0.5, a, push).is_err());
}

#[test]
fn offset_preset_scales_its_constant_cost() {
    let params = PresetParams {
        offset_cost: 0.7,
        ..PresetParams::default()
    };
    let p = preset("identical_sides_offset", &params).unwrap();
    assert!((p.hamiltonian(Side::One, 0.0, 0.5, 0.0) + 0.7).abs() <= 1e-12);
    assert!((p.stay_cost(0.0, 0.0, Variant::Plus).unwrap() - 0.7).abs() <= 1e-12);
    let bad = PresetParams {
        offset_cost: -1.0,
        ..PresetParams::default()
    };
    assert!(preset("identical_sides_offset", &bad).is_err());
}
