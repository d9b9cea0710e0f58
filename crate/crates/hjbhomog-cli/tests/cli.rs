//! Config parsing, canonical rendering, and the binary's output contract:
//! deterministic CSV bytes and the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use hjbhomog_cli::{parse_config, RunConfig, VariantSel};
use hjbhomog_core::effective_hamiltonian::Method;

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hjbhomog"))
}

#[test]
fn absent_keys_take_their_defaults() {
    let cfg = parse_config("preset = oned_example\n").unwrap();
    assert_eq!(cfg, RunConfig::default());

    let empty = parse_config("# nothing but a comment\n\n").unwrap();
    assert_eq!(empty, RunConfig::default());
}

#[test]
fn canonical_render_round_trips() {
    let cfg = RunConfig::default();
    assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);

    let custom = RunConfig {
        preset: "identical_sides".into(),
        offset_cost: 0.5,
        lambda: 2.0,
        cell_n: 128,
        macro_n: 96,
        control_samples: 11,
        mu_samples: 5,
        rho_schedule: vec![0.1, 0.05],
        horizon_t: 12.5,
        max_sweeps: 9000,
        x: 0.25,
        p: -1.5,
        p_min: -3.0,
        p_max: 3.0,
        p_step: 0.5,
        eps_list: vec![0.5, 0.25, 0.125],
        variant: VariantSel::Plus,
        method: Method::Horizon,
        traj_signal: "regular_stay".into(),
        traj_eps: 0.2,
        traj_t: 7.0,
        traj_dt: 2e-3,
        traj_x0: 0.75,
        out_dir: "results/run1".into(),
    };
    assert_eq!(parse_config(&custom.render()).unwrap(), custom);
}

#[test]
fn comments_and_spacing_are_tolerated() {
    let text = "
        # experiment setup
        preset = identical_sides   # trailing comment
        lambda=2.0

        variant =  minus
    ";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.preset, "identical_sides");
    assert_eq!(cfg.lambda, 2.0);
    assert_eq!(cfg.variant, VariantSel::Minus);
}

#[test]
fn bad_lines_are_reported_with_their_number() {
    let unknown = parse_config("preset = oned_example\nfoo = 1\n").unwrap_err();
    let msg = unknown.to_string();
    assert!(
        msg.contains("line 2") && msg.contains("unknown key"),
        "{msg}"
    );

    let dup = parse_config("lambda = 1\n\nlambda = 2\n").unwrap_err();
    let msg = dup.to_string();
    assert!(msg.contains("line 3") && msg.contains("duplicate"), "{msg}");

    let noeq = parse_config("lambda\n").unwrap_err();
    assert!(noeq.to_string().contains("line 1"), "{noeq}");

    let badnum = parse_config("lambda = abc\n").unwrap_err();
    let msg = badnum.to_string();
    assert!(
        msg.contains("line 1") && msg.contains("cannot parse"),
        "{msg}"
    );
}

#[test]
fn validation_rejects_inconsistent_settings() {
    for text in [
        "preset = bogus\n",
        "lambda = 0\n",
        "p_step = -0.5\n",
        "p_min = 2\np_max = -2\n",
        "eps_list = 0.3\n",
        "eps_list = 0.25,0.5\n",
        "variant = sideways\n",
        "method = magic\n",
        "rho_schedule = 0.08,-0.01\n",
        "traj_dt = 0\n",
    ] {
        assert!(parse_config(text).is_err(), "accepted: {text}");
    }
}

#[test]
fn momentum_grid_spans_the_requested_range() {
    let cfg = RunConfig::default();
    let grid = cfg.p_grid();
    assert_eq!(grid.len(), 49);
    assert_eq!(grid[0], -6.0);
    assert_eq!(*grid.last().unwrap(), 6.0);

    let small = parse_config("p_min = -2\np_max = 2\np_step = 1\n").unwrap();
    assert_eq!(small.p_grid(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
}

#[test]
fn effective_output_is_byte_identical_across_runs() {
    let cfg_path = tmp("det.cfg");
    std::fs::write(
        &cfg_path,
        "preset = identical_sides\ncell_n = 64\nmethod = horizon\nhorizon_t = 30\n\
         p_min = -1\np_max = 1\np_step = 1\nvariant = minus\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["det_a", "det_b"] {
        let out = tmp(run);
        let status = bin()
            .args(["effective", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("hbar_table.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "CSV bytes differ between runs");
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.starts_with("variant,x,p,hbar,method,h,param\n"));
    assert_eq!(text.lines().count(), 4, "one header plus three momenta");
}

#[test]
fn stay_trajectory_run_writes_the_sampled_path() {
    let cfg_path = tmp("traj.cfg");
    std::fs::write(&cfg_path, "traj_signal = singular_stay\ntraj_t = 5\n").unwrap();
    let out = tmp("traj_out");
    let output = bin()
        .args(["trajectory", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("J = 0.000000"), "{stdout}");
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,y,region,alpha1,alpha2,mu,cost_accum,regular_flag"
    );
    assert!(lines.clone().count() >= 2);
    for line in lines {
        assert!(
            line.contains(",interface,"),
            "stay path left the interface: {line}"
        );
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let missing = bin()
        .args(["cell", "--config", "/definitely/not/here.cfg"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8(missing.stderr)
        .unwrap()
        .contains("kind=validation"));

    let bad_path = tmp("bad.cfg");
    std::fs::write(&bad_path, "eps_list = 0.3\n").unwrap();
    let bad = bin()
        .args(["cell", "--config"])
        .arg(&bad_path)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));

    let good_path = tmp("good.cfg");
    std::fs::write(&good_path, "preset = identical_sides\ncell_n = 64\n").unwrap();
    let good = bin()
        .args(["cell", "--config"])
        .arg(&good_path)
        .arg("--out")
        .arg(tmp("good_out"))
        .status()
        .unwrap();
    assert_eq!(good.code(), Some(0));
}
