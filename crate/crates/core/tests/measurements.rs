//! Closed-form outcome densities against Fock-basis series and direct
//! numerical integration.

use photosub::measurements::{
    heterodyne_cutoff, heterodyne_radial_pdf, homodyne_half_width, homodyne_pdf, onoff_pmf,
    onoff_pmf_series,
};
use photosub::states::{pmf, success_probability, truncation};
use photosub::{ProtocolParams, StateModel};

fn families(lambda: f64) -> Vec<StateModel> {
    let p = ProtocolParams::new(lambda, 0.95, 0.99).unwrap();
    vec![
        StateModel::thermal(lambda).unwrap(),
        StateModel::subtracted(lambda).unwrap(),
        StateModel::added(lambda).unwrap(),
        StateModel::realistic_accepted(p).unwrap(),
        StateModel::realistic_rejected(p),
    ]
}

/// Composite Simpson rule on `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `sum_n p_n |psi_n(x)|^2` with Hermite functions normalized for `x = (a + a^dag)/sqrt 2`.
fn homodyne_series(m: &StateModel, x: f64) -> f64 {
    let n_max = truncation(m).n_max;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    let mut total = 0.0;
    for n in 0..=n_max {
        total += pmf(m, n as u64).unwrap() * cur * cur;
        let next =
            (2.0 / (n as f64 + 1.0)).sqrt() * x * cur - (n as f64 / (n as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    total
}

/// `sum_n p_n e^{-u} u^n / n!`, the radial Husimi density as a Poisson mixture.
fn heterodyne_series(m: &StateModel, u: f64) -> f64 {
    // Poisson weights at large u reach past the pmf truncation.
    let n_max = truncation(m).n_max + (4.0 * u) as usize + 200;
    let mut log_poisson = -u;
    let mut total = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            log_poisson += u.ln() - (n as f64).ln();
        }
        total += pmf(m, n as u64).unwrap() * log_poisson.exp();
    }
    total
}

#[test]
fn homodyne_matches_fock_series() {
    for lambda in [0.1, 1.0, 5.0] {
        for m in families(lambda) {
            for x in [0.0, 0.3, 1.0, 2.5, 4.0] {
                let closed = homodyne_pdf(&m, x).unwrap();
                let series = homodyne_series(&m, x);
                assert!(
                    (closed - series).abs() <= 1e-10 * closed.max(1e-3),
                    "{:?} lambda={lambda} x={x}: {closed} vs {series}",
                    m.kind()
                );
            }
        }
    }
}

#[test]
fn heterodyne_matches_fock_series() {
    for lambda in [0.1, 1.0, 10.0] {
        for m in families(lambda) {
            for u in [0.0, 0.5, 2.0, 10.0, 40.0] {
                let closed = heterodyne_radial_pdf(&m, u).unwrap();
                let series = heterodyne_series(&m, u);
                assert!(
                    (closed - series).abs() <= 1e-11 * closed.max(1e-6),
                    "{:?} lambda={lambda} u={u}: {closed} vs {series}",
                    m.kind()
                );
            }
        }
    }
}

#[test]
fn densities_integrate_to_one() {
    for lambda in [0.1, 1.0, 10.0] {
        for m in families(lambda) {
            let half = homodyne_half_width(&m);
            let hom = simpson(|x| homodyne_pdf(&m, x).unwrap(), -half, half, 20_000);
            assert!(
                (hom - 1.0).abs() < 1e-9,
                "{:?} homodyne at {lambda}: {hom}",
                m.kind()
            );
            let cut = heterodyne_cutoff(&m);
            let het = simpson(|u| heterodyne_radial_pdf(&m, u).unwrap(), 0.0, cut, 200_000);
            assert!(
                (het - 1.0).abs() < 1e-9,
                "{:?} heterodyne at {lambda}: {het}",
                m.kind()
            );
        }
    }
}

#[test]
fn densities_satisfy_the_mixture_identity() {
    for lambda in [0.1, 1.0, 10.0] {
        let p = ProtocolParams::new(lambda, 0.95, 0.97).unwrap();
        let p1 = success_probability(p);
        let acc = StateModel::realistic_accepted(p).unwrap();
        let rej = StateModel::realistic_rejected(p);
        let att = StateModel::thermal(0.95 * lambda).unwrap();
        for x in [0.0, 0.7, 2.0, 5.0] {
            let mix =
                p1 * homodyne_pdf(&acc, x).unwrap() + (1.0 - p1) * homodyne_pdf(&rej, x).unwrap();
            assert!((mix - homodyne_pdf(&att, x).unwrap()).abs() < 1e-10);
            let mix = p1 * heterodyne_radial_pdf(&acc, x).unwrap()
                + (1.0 - p1) * heterodyne_radial_pdf(&rej, x).unwrap();
            assert!((mix - heterodyne_radial_pdf(&att, x).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn onoff_closed_forms_match_series() {
    for lambda in [0.01, 0.1, 1.0, 10.0, 100.0] {
        for m in families(lambda) {
            for eff in [0.5, 0.97, 0.99] {
                let c = onoff_pmf(&m, eff).unwrap();
                let s = onoff_pmf_series(&m, eff).unwrap();
                assert!(
                    (c.p_off - s.p_off).abs() < 1e-12,
                    "{:?} {lambda} {eff}",
                    m.kind()
                );
                assert_eq!(c.p_off + c.p_on, 1.0);
            }
        }
    }
}

#[test]
fn negative_radial_outcome_is_rejected() {
    let m = StateModel::thermal(1.0).unwrap();
    assert!(heterodyne_radial_pdf(&m, -1e-3).is_err());
}
