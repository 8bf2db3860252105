//! Acceptance criteria 1-9. Each test writes one `criterion N: PASS|FAIL`
//! line to stderr (bypassing libtest's capture) and then asserts the result.

use std::io::Write;
use std::time::{Duration, Instant};

use photosub::fisher::{fi_continuous, fi_discrete, ContinuousMeasurement};
use photosub::oracle::{chi_square_gof, empirical_fi, simulate_protocol, SimConfig};
use photosub::protocol::{
    convexity_bounds, fi_rejected_onoff, fi_rejected_onoff_composed, rate_direct,
    rate_postselected, total_information,
};
use photosub::states::{realistic_subtracted_pmf, rejected_mean, success_probability, thermal_pmf};
use photosub::{
    fisher_information, BranchMeasurement, CostModel, DerivativeSpec, Measurement, ProtocolParams,
    StateModel, ThermalParams,
};

const POINTS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
const ETA: f64 = 0.95;

fn verdict(n: u32, pass: bool, detail: &str) {
    let line = format!(
        "criterion {n}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / (points - 1) as f64))
        .collect()
}

fn analytic() -> DerivativeSpec {
    DerivativeSpec::analytic()
}

#[test]
fn criterion_1_closed_form_qfi() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for l in POINTS {
        let q = 1.0 / (l * (1.0 + l));
        worst = worst.max(rel(
            fi_discrete(&StateModel::thermal(l).unwrap(), analytic())
                .unwrap()
                .value,
            q,
        ));
        for m in [
            StateModel::subtracted(l).unwrap(),
            StateModel::added(l).unwrap(),
        ] {
            worst = worst.max(rel(fi_discrete(&m, analytic()).unwrap().value, 2.0 * q));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        &format!("max rel err {worst:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_fig1_endpoints() {
    let start = Instant::now();
    let accepted = |l: f64| {
        let p = ProtocolParams::new(l, ETA, 0.99).unwrap();
        fi_discrete(&StateModel::realistic_accepted(p).unwrap(), analytic())
            .unwrap()
            .value
    };
    let low = accepted(1e-3)
        / fi_discrete(&StateModel::subtracted(1e-3).unwrap(), analytic())
            .unwrap()
            .value;
    let high = accepted(1e2)
        / fi_discrete(&StateModel::thermal(1e2).unwrap(), analytic())
            .unwrap()
            .value;
    let elapsed = start.elapsed();
    let pass = (0.98..=1.0).contains(&low)
        && (0.95..=1.05).contains(&high)
        && elapsed < Duration::from_secs(10);
    verdict(
        2,
        pass,
        &format!("accepted/ideal at 1e-3 = {low:.6} (need [0.98, 1]), accepted/thermal at 1e2 = {high:.6} (need [0.95, 1.05]), {elapsed:.2?}"),
    );
}

#[test]
fn criterion_3_gaussian_measurement_oracles() {
    let mut worst: f64 = 0.0;
    for l in POINTS {
        let th = StateModel::thermal(l).unwrap();
        let hom = fi_continuous(&th, ContinuousMeasurement::Homodyne, analytic())
            .unwrap()
            .value;
        let het = fi_continuous(&th, ContinuousMeasurement::HeterodyneRadial, analytic())
            .unwrap()
            .value;
        worst = worst
            .max(rel(hom, 2.0 / (1.0 + 2.0 * l).powi(2)))
            .max(rel(het, 1.0 / (1.0 + l).powi(2)));
    }
    verdict(3, worst <= 1e-7, &format!("max rel err {worst:.2e}"));
}

#[test]
fn criterion_4_mixture_identity() {
    let mut worst: f64 = 0.0;
    for l in [0.1, 1.0, 10.0] {
        for eps in [0.97, 0.99] {
            let p = ProtocolParams::new(l, ETA, eps).unwrap();
            let p1 = success_probability(p);
            let rej = ThermalParams::new(rejected_mean(p)).unwrap();
            let att = ThermalParams::new(ETA * l).unwrap();
            for n in 0..=200 {
                let lhs =
                    p1 * realistic_subtracted_pmf(p, n).unwrap() + (1.0 - p1) * thermal_pmf(rej, n);
                worst = worst.max((lhs - thermal_pmf(att, n)).abs());
            }
        }
    }
    verdict(4, worst <= 1e-12, &format!("max abs err {worst:.2e}"));
}

#[test]
fn criterion_5_rejected_onoff_consistency() {
    let mut worst: f64 = 0.0;
    for l in log_grid(200) {
        for eps in [0.97, 0.99] {
            let p = ProtocolParams::new(l, ETA, eps).unwrap();
            worst = worst.max(rel(
                fi_rejected_onoff_composed(&p).unwrap(),
                fi_rejected_onoff(&p),
            ));
        }
    }
    verdict(5, worst <= 1e-12, &format!("max rel err {worst:.2e}"));
}

#[test]
fn criterion_6_convexity_sandwich() {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_gap: f64 = 0.0;
    for eps in [0.97, 0.99] {
        for l in log_grid(200) {
            let p = ProtocolParams::new(l, ETA, eps).unwrap();
            let (lo, hi) = convexity_bounds(&p);
            let t =
                total_information(&p, BranchMeasurement::both(Measurement::PhotonNumber)).unwrap();
            ok &= lo <= t.total && t.total <= hi * (1.0 + 1e-6);
            worst_gap = worst_gap.max((t.total - hi).abs() / hi);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        6,
        ok && worst_gap < 1e-2 && elapsed < Duration::from_secs(60),
        &format!("bounds hold: {ok}, max |F_tot - QFI|/QFI = {worst_gap:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_7_regime_claims() {
    let qfi_th = |l: f64| 1.0 / (l * (1.0 + l));
    let het = Measurement::HeterodyneRadial;

    let sub_het = fisher_information(&StateModel::subtracted(5.0).unwrap(), het, analytic())
        .unwrap()
        .value;
    let a = sub_het > qfi_th(5.0);

    let onoff = Measurement::on_off(0.97).unwrap();
    let sub_onoff = fisher_information(&StateModel::subtracted(0.2).unwrap(), onoff, analytic())
        .unwrap()
        .value;
    let b = sub_onoff > qfi_th(0.2);

    let p = ProtocolParams::new(0.1, ETA, 0.99).unwrap();
    let tot_het = total_information(&p, BranchMeasurement::both(het))
        .unwrap()
        .total;
    let th_het = fisher_information(&StateModel::thermal(0.1).unwrap(), het, analytic())
        .unwrap()
        .value;
    let c = tot_het > th_het;

    let p = ProtocolParams::new(5.0, ETA, 0.99).unwrap();
    let onoff = Measurement::on_off(0.99).unwrap();
    let tot_onoff = total_information(&p, BranchMeasurement::both(onoff))
        .unwrap()
        .total;
    let th_onoff = fisher_information(&StateModel::thermal(5.0).unwrap(), onoff, analytic())
        .unwrap()
        .value;
    let d = tot_onoff > th_onoff;

    verdict(
        7,
        a && b && c && d,
        &format!(
            "sub het {sub_het:.4} vs {:.4}; sub on-off {sub_onoff:.4} vs {:.4}; F_tot het {tot_het:.4} vs {th_het:.4}; F_tot on-off {tot_onoff:.3e} vs {th_onoff:.3e}",
            qfi_th(5.0),
            qfi_th(0.2)
        ),
    );
}

#[test]
fn criterion_8_rate_crossover() {
    let costs = CostModel::new(1.0, 0.5, 10.0).unwrap();
    let het = Measurement::HeterodyneRadial;
    let diff = |l: f64| {
        let p = ProtocolParams::new(l, ETA, 0.99).unwrap();
        let r0 = rate_direct(l, &costs, 1.0 / (l * (1.0 + l))).unwrap();
        (rate_postselected(&p, &costs, het).unwrap(), r0)
    };
    let (ps_low, r0_low) = diff(0.1);
    let r0_ok = (r0_low - 0.82645).abs() <= 1e-5;
    let grid: Vec<f64> = (0..400)
        .map(|i| 10f64.powf(-1.0 + 3.0 * i as f64 / 399.0))
        .collect();
    let signs: Vec<bool> = grid
        .iter()
        .map(|&l| {
            let (ps, r0) = diff(l);
            ps > r0
        })
        .collect();
    let crossing = signs
        .windows(2)
        .position(|w| w[0] != w[1])
        .map(|i| grid[i + 1]);
    let (ps_high, r0_high) = diff(100.0);
    verdict(
        8,
        ps_low > r0_low && r0_ok && crossing.is_some(),
        &format!(
            "R_ps(0.1) = {ps_low:.5} vs R_0(0.1) = {r0_low:.5}; first sign change on [0.1, 100]: {crossing:?}; R_ps/R_0 at 100 = {:.4}",
            ps_high / r0_high
        ),
    );
}

#[test]
fn criterion_9_monte_carlo() {
    let start = Instant::now();
    let p = ProtocolParams::new(1.0, ETA, 0.99).unwrap();
    let trials = 10_000_000;
    let report = simulate_protocol(&SimConfig::new(p, trials, 20_231_117).unwrap()).unwrap();
    let p1 = 0.047_165_316_817_532_16;
    let sigma = (p1 * (1.0 - p1) / trials as f64).sqrt();
    let z = (report.empirical_p1 - p1) / sigma;
    let chi = chi_square_gof(&report.accepted_hist, |n| {
        realistic_subtracted_pmf(p, n as u64).unwrap()
    })
    .unwrap();
    let th = StateModel::thermal(1.0).unwrap();
    let fi = empirical_fi(&th, Measurement::PhotonNumber, 1e-3, trials, 7).unwrap();
    let fi_z = (fi.estimate - 0.5) / fi.std_error;
    let elapsed = start.elapsed();
    verdict(
        9,
        z.abs() <= 4.0 && chi.p_value > 1e-4 && fi_z.abs() <= 3.0 && elapsed < Duration::from_secs(120),
        &format!(
            "P1 z = {z:.2}; chi-square p = {:.3} (dof {}); empirical FI {:.5} +/- {:.5}; {elapsed:.2?}",
            chi.p_value, chi.dof, fi.estimate, fi.std_error
        ),
    );
}
