//! Effective Hamiltonian tables and their structural checks.

use hjbhomog_core::cell_solver::{PeriodicGrid, SolverParams};
use hjbhomog_core::control_model::{preset, PresetParams, ProblemBounds, Variant};
use hjbhomog_core::effective_hamiltonian::{
    default_p_grid, tabulate, verify_coercivity, verify_lipschitz_p, verify_variant_order,
    HBarTable, Method, TableMeta, DEFAULT_SLACK,
};
use hjbhomog_core::Error;

fn ident() -> hjbhomog_core::ControlProblem {
    preset("identical_sides", &PresetParams::default()).unwrap()
}

fn ident_table(variant: Variant, p_samples: &[f64]) -> HBarTable {
    let prob = ident();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    tabulate(
        &prob,
        &g,
        &[0.0],
        p_samples,
        variant,
        Method::Horizon,
        &SolverParams::default(),
        30.0,
    )
    .unwrap()
}

fn hand_table(p_samples: Vec<f64>, values: Vec<f64>) -> HBarTable {
    HBarTable {
        variant: Variant::Minus,
        x_samples: vec![0.0],
        p_samples,
        values,
        method: Method::Horizon,
        meta: TableMeta {
            h: 0.02,
            rho_schedule: vec![0.01],
            horizon_t: 30.0,
            control_samples: 41,
            mu_samples: 21,
            m_b: 1.0,
        },
    }
}

#[test]
fn method_names_round_trip() {
    for m in [Method::Discount, Method::Horizon, Method::Crossing] {
        assert_eq!(m.tag().parse::<Method>().unwrap(), m);
    }
    assert!("ergodic".parse::<Method>().is_err());
}

#[test]
fn default_momentum_grid_is_symmetric() {
    let g = default_p_grid();
    assert_eq!(g.len(), 49);
    assert_eq!((g[0], *g.last().unwrap()), (-6.0, 6.0));
    for (a, b) in g.iter().zip(g.iter().rev()) {
        assert!((a + b).abs() <= 1e-12);
    }
    for w in g.windows(2) {
        assert!((w[1] - w[0] - 0.25).abs() <= 1e-12);
    }
}

#[test]
fn uniform_cost_table_matches_the_analytic_hamiltonian() {
    let ps = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let table = ident_table(Variant::Minus, &ps);
    for (i, p) in ps.iter().enumerate() {
        assert!(
            (table.value(0, i) - (p.abs() - 1.0)).abs() <= 5e-3,
            "p = {p}"
        );
    }
    assert_eq!(table.meta.h, 0.02);
    assert_eq!(table.meta.control_samples, 41);
    assert_eq!(table.meta.mu_samples, 21);
    assert!((table.max_p_slope() - 1.0).abs() <= 0.01);
}

#[test]
fn table_interpolation_is_linear_and_range_checked() {
    let table = hand_table(vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 1.0]);
    assert_eq!(table.interp(0.0, -1.0).unwrap(), 1.0);
    assert_eq!(table.interp(0.0, 0.0).unwrap(), -1.0);
    assert_eq!(table.interp(0.0, 0.5).unwrap(), 0.0);
    // Constant extension in the slow variable.
    assert_eq!(table.interp(7.0, 0.5).unwrap(), 0.0);
    assert!(matches!(
        table.interp(0.0, 1.5),
        Err(Error::PGridExceeded { .. })
    ));
    assert!(table.interp(0.0, 1.5).unwrap_err().is_numerical());
}

#[test]
fn tabulate_validates_its_axes() {
    let prob = ident();
    let g = PeriodicGrid::cell(&prob, 100).unwrap();
    let solver = SolverParams::default();
    assert!(tabulate(
        &prob,
        &g,
        &[],
        &[0.0],
        Variant::Minus,
        Method::Horizon,
        &solver,
        30.0
    )
    .is_err());
    assert!(tabulate(
        &prob,
        &g,
        &[0.0],
        &[0.0, 0.0],
        Variant::Minus,
        Method::Horizon,
        &solver,
        30.0
    )
    .is_err());
}

#[test]
fn structural_checks_pass_on_the_uniform_preset() {
    let ps: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.5).collect();
    let minus = ident_table(Variant::Minus, &ps);
    let plus = ident_table(Variant::Plus, &ps);
    let bounds = ident().bounds;

    let co = verify_coercivity(&minus, &bounds, DEFAULT_SLACK);
    assert!(co.ok, "coercivity margin {}", co.worst);
    let li = verify_lipschitz_p(&minus, &bounds, 0.1);
    assert!(li.ok, "lipschitz margin {}", li.worst);
    let ord = verify_variant_order(&minus, &plus, DEFAULT_SLACK).unwrap();
    assert!(ord.ok);
    assert!(ord.max_gap.abs() <= 5e-3);
}

#[test]
fn structural_checks_flag_doctored_tables() {
    let bounds = ProblemBounds::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    // Dips below -M_l + delta |p|.
    let bad_co = hand_table(vec![-1.0, 0.0, 1.0], vec![0.0, -2.0, 0.0]);
    let co = verify_coercivity(&bad_co, &bounds, DEFAULT_SLACK);
    assert!(!co.ok);
    assert_eq!(co.at_p, 0.0);
    // Jumps faster than M_b in p.
    let bad_li = hand_table(vec![-1.0, 0.0, 1.0], vec![0.0, 2.5, 3.0]);
    let li = verify_lipschitz_p(&bad_li, &bounds, 0.1);
    assert!(!li.ok);
    // The regular class can never improve on all strategies.
    let minus = hand_table(vec![-1.0, 0.0, 1.0], vec![0.0, -1.0, 0.0]);
    let plus = hand_table(vec![-1.0, 0.0, 1.0], vec![0.3, -1.0, 0.0]);
    let ord = verify_variant_order(&minus, &plus, DEFAULT_SLACK).unwrap();
    assert!(!ord.ok);
    assert!((ord.worst + 0.25).abs() <= 1e-12);
    // Mismatched axes are refused outright.
    let other = hand_table(vec![-1.0, 1.0], vec![0.0, 0.0]);
    assert!(verify_variant_order(&minus, &other, DEFAULT_SLACK).is_err());
}
