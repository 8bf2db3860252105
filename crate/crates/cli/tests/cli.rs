use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn photosub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photosub"))
        .args(args)
        .output()
        .unwrap()
}

fn csv(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn fig1_schema() {
    let out = photosub(&["figure", "fig1", "--grid", "0.01:100:7"]);
    assert!(out.status.success());
    let rows = csv(&out);
    assert_eq!(
        rows[0],
        ["lambda", "qfi_thermal", "qfi_ideal_sub", "qfi_realistic"]
    );
    assert_eq!(rows.len(), 8);
    let l = column(&rows, "lambda");
    assert!(l.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(l[0], 0.01);
    assert_eq!(l[6], 100.0);
}

#[test]
fn fig7_schema_and_compact_column() {
    let out = photosub(&["figure", "fig7", "--grid", "0.1:10:3"]);
    assert!(out.status.success());
    assert_eq!(csv(&out)[0], ["lambda", "rate_ps", "rate_0"]);
    let out = photosub(&[
        "figure",
        "fig7",
        "--grid",
        "0.1:10:3",
        "--compact",
        "--accepted-meas",
        "hom",
    ]);
    assert!(out.status.success());
    let rows = csv(&out);
    assert_eq!(rows[0], ["lambda", "rate_ps", "rate_0", "rate_ps_compact"]);
    assert!((column(&rows, "rate_0")[0] - 0.826_446_280_991_735_5).abs() < 1e-12);
}

#[test]
fn every_figure_emits_finite_rows() {
    for fig in ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"] {
        let out = photosub(&["figure", fig, "--grid", "0.01:100:4"]);
        assert!(
            out.status.success(),
            "{fig}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let rows = csv(&out);
        assert_eq!(rows.len(), 5);
        for r in &rows[1..] {
            assert!(r.iter().all(|c| c.parse::<f64>().unwrap().is_finite()));
        }
    }
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        &["figure", "fig1", "--grid", "0:100:10"][..],
        &["figure", "fig1", "--grid", "-1:100:10"],
        &["figure", "fig1", "--grid", "10:1:10"],
        &["figure", "fig1", "--grid", "0.1:1:1"],
        &["figure", "fig9"],
        &["figure", "fig1", "--eta", "1.5"],
        &["figure", "fig1", "--epsilon", "0"],
        &["figure", "fig7", "--cm", "-1"],
        &["figure", "fig7", "--accepted-meas", "pnr"],
        &["figure", "fig1", "--diagnostics"],
        &["sweep", "--quantity", "nonsense"],
        &["frobnicate"],
    ] {
        let out = photosub(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn undefined_heralded_state_is_a_bad_input() {
    let out = photosub(&["figure", "fig1", "--eta", "1", "--grid", "0.1:1:2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = photosub(&["figure", "fig4", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let spec = [
        "sweep",
        "--quantity",
        "branches",
        "--oracle",
        "--trials",
        "20000",
        "--grid",
        "0.5:5:3",
    ];
    assert_eq!(photosub(&spec).stdout, photosub(&spec).stdout);
}

#[test]
fn two_point_grid_gives_two_rows() {
    let out = photosub(&["sweep", "--quantity", "rates", "--grid", "0.1:1:2"]);
    assert!(out.status.success());
    assert_eq!(csv(&out).len(), 3);
}

#[test]
fn total_information_sweep_stays_within_bounds() {
    let out = photosub(&["sweep", "--quantity", "total", "--grid", "0.01:100:50"]);
    assert!(out.status.success());
    let rows = csv(&out);
    assert_eq!(rows.len(), 51);
    let total = column(&rows, "total");
    let lo = column(&rows, "lower_bound");
    let hi = column(&rows, "upper_bound");
    for i in 0..50 {
        assert!(
            lo[i] <= total[i] && total[i] <= hi[i] * (1.0 + 1e-6),
            "row {i}"
        );
    }
}

#[test]
fn oracle_columns_are_appended() {
    let out = photosub(&[
        "sweep",
        "--quantity",
        "branches",
        "--oracle",
        "--trials",
        "100000",
        "--seed",
        "5",
        "--grid",
        "0.5:5:3",
    ]);
    assert!(out.status.success());
    let rows = csv(&out);
    assert_eq!(
        rows[0],
        [
            "lambda",
            "p_success",
            "accepted_mean",
            "rejected_mean",
            "mc_p1",
            "mc_p1_se",
            "mc_accepted_mean",
            "mc_accepted_mean_se"
        ]
    );
    let (p, mc, se) = (
        column(&rows, "p_success"),
        column(&rows, "mc_p1"),
        column(&rows, "mc_p1_se"),
    );
    for i in 0..3 {
        assert!((p[i] - mc[i]).abs() <= 5.0 * se[i]);
    }
}

#[test]
fn oracle_with_too_few_accepted_trials_fails_as_computation() {
    let out = photosub(&[
        "sweep",
        "--quantity",
        "branches",
        "--oracle",
        "--trials",
        "1",
        "--grid",
        "0.01:0.02:2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnostics_file_tags_every_fi_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fig2.csv");
    let out = photosub(&[
        "figure",
        "fig2",
        "--grid",
        "0.1:10:3",
        "--out",
        out_path.to_str().unwrap(),
        "--diagnostics",
    ]);
    assert!(out.status.success());
    let diag = fs::read_to_string(Path::new(&format!("{}.diag.csv", out_path.display()))).unwrap();
    let lines: Vec<&str> = diag.lines().collect();
    assert_eq!(
        lines[0],
        "lambda,column,method,terms_or_nodes,est_error,capped"
    );
    // Five FI columns on three grid points.
    assert_eq!(lines.len(), 1 + 15);
    assert!(lines
        .iter()
        .any(|l| l.contains(",fi_hom_realistic,quadrature,")));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# fig 7 settings\ngrid = 0.1:1:2\ncm = 20\n").unwrap();
    let from_file = csv(&photosub(&[
        "figure",
        "fig7",
        "--config",
        cfg.to_str().unwrap(),
    ]));
    assert_eq!(from_file.len(), 3);
    // R_0 = QFI / (C_P + C_M) at lambda = 0.1.
    assert!((column(&from_file, "rate_0")[0] - (1.0 / 0.11) / 21.0).abs() < 1e-12);
    let overridden = csv(&photosub(&[
        "figure",
        "fig7",
        "--config",
        cfg.to_str().unwrap(),
        "--cm",
        "10",
    ]));
    assert!((column(&overridden, "rate_0")[0] - 0.826_446_280_991_735_5).abs() < 1e-12);
    fs::write(&cfg, "cm = ten\n").unwrap();
    assert_eq!(
        photosub(&["figure", "fig7", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
