//! Discounted cell solves, ergodic extraction, and corrector certificates.

use hjbhomog_core::cell_solver::{
    cell_residual, corrector_dpp_check, extract_ergodic, solve_discounted, PeriodicGrid,
    SolverParams, ValueField,
};
use hjbhomog_core::control_model::{preset, PresetParams, Variant};
use hjbhomog_core::Error;

fn oned() -> hjbhomog_core::ControlProblem {
    preset("oned_example", &PresetParams::default()).unwrap()
}

fn ident() -> hjbhomog_core::ControlProblem {
    preset("identical_sides", &PresetParams::default()).unwrap()
}

#[test]
fn cell_grid_places_interfaces_on_nodes() {
    let g = PeriodicGrid::cell(&oned(), 400).unwrap();
    assert_eq!(g.n(), 400);
    assert_eq!(g.h(), 0.005);
    assert_eq!(g.interface_nodes(), &[0, 200]);
    assert!(g.is_interface(0) && g.is_interface(200) && !g.is_interface(1));
    // A node count that misses an interface point is refused.
    assert!(matches!(
        PeriodicGrid::cell(&oned(), 401),
        Err(Error::GridMismatch { .. })
    ));
    assert!(PeriodicGrid::with_interfaces(3, 2.0, vec![]).is_err());
    assert!(PeriodicGrid::with_interfaces(8, 2.0, vec![9]).is_err());
}

#[test]
fn value_field_interpolates_periodically() {
    let g = PeriodicGrid::with_interfaces(4, 2.0, vec![]).unwrap();
    let f = ValueField::new(&g, vec![0.0, 1.0, 0.0, -1.0]).unwrap();
    assert_eq!(f.interp(0.5), 1.0);
    assert_eq!(f.interp(0.25), 0.5);
    // The last cell wraps back to node 0.
    assert_eq!(f.interp(1.75), -0.5);
    assert!((f.interp(0.25 + 2.0) - 0.5).abs() <= 1e-12);
    assert!((f.interp(0.25 - 2.0) - 0.5).abs() <= 1e-12);
    assert_eq!(f.sup_abs(), 1.0);
    assert_eq!(f.max_slope(), 2.0);
    assert!(ValueField::new(&g, vec![0.0; 3]).is_err());
}

#[test]
fn uniform_cost_gives_the_exact_ergodic_constant() {
    let prob = ident();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let sol = extract_ergodic(
        &prob,
        &g,
        0.0,
        0.0,
        Variant::Minus,
        &SolverParams::default(),
    )
    .unwrap();
    // The constant field is the exact fixed point at every discount.
    assert!((sol.hbar + 1.0).abs() <= 1e-12);
    for d in &sol.diagnostics {
        assert!((d.lambda_rho + 1.0).abs() <= 1e-12);
    }
    assert!(sol.corrector.sup_abs() <= 1e-12);
    let res = cell_residual(
        &prob,
        &g,
        0.0,
        0.0,
        Variant::Minus,
        &sol.corrector,
        sol.hbar,
    )
    .unwrap();
    assert!(res <= 1e-12);
}

#[test]
fn uniform_cost_momentum_sweep_matches_abs_p_minus_one() {
    let prob = ident();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let params = SolverParams::default();
    for p in [-4.0, -1.0, 1.0, 2.5, 4.0] {
        for v in [Variant::Minus, Variant::Plus] {
            let sol = extract_ergodic(&prob, &g, 0.0, p, v, &params).unwrap();
            assert!(
                (sol.hbar - (p.abs() - 1.0)).abs() <= 1e-3,
                "p = {p}, {v:?}: {h}",
                h = sol.hbar
            );
        }
    }
}

#[test]
fn oscillatory_cell_problem_separates_the_variants() {
    let prob = oned();
    let g = PeriodicGrid::cell(&prob, 400).unwrap();
    let params = SolverParams::default();
    let minus = extract_ergodic(&prob, &g, 0.0, 0.0, Variant::Minus, &params).unwrap();
    let plus = extract_ergodic(&prob, &g, 0.0, 0.0, Variant::Plus, &params).unwrap();
    // Free singular riding at the interface flattens the all-strategy value.
    assert!(minus.hbar.abs() <= 2e-3, "minus: {}", minus.hbar);
    // The regular class pays the unit stay rate.
    assert!((plus.hbar + 1.0).abs() <= 2e-3, "plus: {}", plus.hbar);
    assert!(minus.hbar - plus.hbar >= 0.9);

    // Extrapolated correctors certify the stationary equation tightly.
    for sol in [&minus, &plus] {
        let res =
            cell_residual(&prob, &g, 0.0, 0.0, sol.variant, &sol.corrector, sol.hbar).unwrap();
        assert!(res <= 1e-4, "{v:?}: residual {res}", v = sol.variant);
        assert_eq!(sol.corrector.node_value(0), 0.0);
    }
}

#[test]
fn discounted_solve_respects_the_hard_bounds() {
    let prob = oned();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let (field, diag) =
        solve_discounted(&prob, &g, 0.0, 1.0, 0.08, Variant::Minus, 400_000).unwrap();
    let bound = prob.bounds.m_l + prob.bounds.m_b;
    assert!(0.08 * diag.sup_value <= bound + 1e-9);
    // The upper-bound initialization decreases monotonically, so the fixed
    // point sits below it everywhere.
    let init = bound / 0.08;
    assert!(field.values().iter().all(|v| *v <= init + 1e-12));
    assert!(diag.sweeps > 0 && diag.final_change * 0.08 <= 1e-8);
    assert!((diag.lambda_rho + 0.08 * field.node_value(0)).abs() <= 1e-15);
    assert!(solve_discounted(&prob, &g, 0.0, 0.0, -0.1, Variant::Minus, 1000).is_err());
}

#[test]
fn sweep_cap_failure_is_a_numerical_error() {
    let prob = oned();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let err = solve_discounted(&prob, &g, 0.0, 0.0, 0.01, Variant::Minus, 5).unwrap_err();
    assert!(err.is_numerical());
    assert!(matches!(err, Error::NoConvergence { sweeps: 5, .. }));
}

#[test]
fn single_entry_schedule_skips_the_extrapolation() {
    let prob = ident();
    let g = PeriodicGrid::cell(&prob, 64).unwrap();
    let params = SolverParams {
        rho_schedule: vec![0.05],
        ..SolverParams::default()
    };
    let sol = extract_ergodic(&prob, &g, 0.0, 0.0, Variant::Minus, &params).unwrap();
    assert_eq!(sol.diagnostics.len(), 1);
    assert!((sol.hbar - sol.diagnostics[0].lambda_rho).abs() <= 1e-15);
    let bad = SolverParams {
        rho_schedule: vec![0.02, 0.04],
        ..SolverParams::default()
    };
    assert!(extract_ergodic(&prob, &g, 0.0, 0.0, Variant::Minus, &bad).is_err());
}

#[test]
fn offset_cost_shifts_the_ergodic_constant_exactly() {
    let params = PresetParams {
        offset_cost: 0.7,
        ..PresetParams::default()
    };
    let prob = preset("identical_sides_offset", &params).unwrap();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let sol =
        extract_ergodic(&prob, &g, 0.0, 0.0, Variant::Plus, &SolverParams::default()).unwrap();
    assert!((sol.hbar + 0.7).abs() <= 1e-12);
}

#[test]
fn dpp_check_accepts_the_uniform_corrector_and_rejects_foreign_grids() {
    let prob = ident();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let sol =
        extract_ergodic(&prob, &g, 0.0, 0.0, Variant::Plus, &SolverParams::default()).unwrap();
    let dev = corrector_dpp_check(
        &prob,
        &g,
        0.0,
        0.0,
        &sol.corrector,
        sol.hbar,
        &[0.1, 0.5, 1.0],
    )
    .unwrap();
    assert!(dev <= 1e-9, "deviation {dev}");

    let other = PeriodicGrid::cell(&prob, 64).unwrap();
    assert!(matches!(
        corrector_dpp_check(&prob, &other, 0.0, 0.0, &sol.corrector, sol.hbar, &[0.5]),
        Err(Error::GridMismatch { .. })
    ));
    assert!(matches!(
        cell_residual(
            &prob,
            &other,
            0.0,
            0.0,
            Variant::Plus,
            &sol.corrector,
            sol.hbar
        ),
        Err(Error::GridMismatch { .. })
    ));
}
