//! Seeded Monte Carlo simulation of the heralded subtraction and of single
//! measurements, used as ground truth for the analytic distributions.
//!
//! Each trial draws a thermal photon number, splits it binomially at the
//! beam splitter and fires the herald with probability `1 - (1-eps)^k` for
//! `k` reflected photons. Trials are split into [`PARTITIONS`] blocks; block
//! `i` uses `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so a report is
//! bit-identical for a given seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::measurements::{HeterodyneRadial, Homodyne, Measurement, OnOffVacuum};
use crate::states::{PhotonNumber, ProtocolParams, StateModel};

/// Number of independent RNG streams a run is split into.
pub const PARTITIONS: u64 = 64;
/// Below this photon number binomial thinning is sampled photon by photon.
const PER_PHOTON_LIMIT: u64 = 64;
/// Expected count below which chi-square bins are pooled.
const MIN_EXPECTED: f64 = 5.0;

fn partition_rng(seed: u64, partition: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition);
    rng
}

fn partition_sizes(trials: u64) -> impl Iterator<Item = (u64, u64)> {
    let base = trials / PARTITIONS;
    let extra = trials % PARTITIONS;
    (0..PARTITIONS).map(move |i| (i, base + u64::from(i < extra)))
}

/// Thermal photon number by inverse CDF: `P(n >= k) = q^k`.
fn sample_thermal<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    let ln_q = -(1.0 / mean).ln_1p();
    let u: f64 = 1.0 - rng.random::<f64>();
    let n = (u.ln() / ln_q).floor();
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        n as u64
    }
}

fn sample_binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n < PER_PHOTON_LIMIT {
        (0..n).filter(|_| rng.random::<f64>() < p).count() as u64
    } else {
        Binomial::new(n, p).expect("valid binomial").sample(rng)
    }
}

/// `(transmitted photons, clicked)` for one pass through the beam splitter and herald.
fn protocol_trial<R: Rng>(rng: &mut R, p: &ProtocolParams) -> (u64, bool) {
    let n = sample_thermal(rng, p.lambda());
    let reflected = sample_binomial(rng, n, 1.0 - p.eta());
    let click = reflected > 0 && {
        let p_click = -((reflected as f64) * (-p.epsilon()).ln_1p()).exp_m1();
        rng.random::<f64>() < p_click
    };
    (n - reflected, click)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ProtocolParams,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(params: ProtocolParams, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", 0.0, "must be >= 1"));
        }
        Ok(Self {
            params,
            trials,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClickRecord {
    pub clicks: u64,
    pub no_clicks: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub trials: u64,
    pub n_accepted: u64,
    pub empirical_p1: f64,
    /// Transmitted photon-number counts after a click.
    pub accepted_hist: Vec<u64>,
    /// Transmitted photon-number counts after no click.
    pub rejected_hist: Vec<u64>,
    pub click_record: ClickRecord,
}

impl SimReport {
    /// Binomial standard error of `empirical_p1`.
    pub fn p1_std_error(&self) -> f64 {
        let p = self.empirical_p1;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Sample mean and standard error of the accepted photon number.
    pub fn accepted_mean(&self) -> Option<(f64, f64)> {
        histogram_mean(&self.accepted_hist)
    }

    pub fn rejected_mean(&self) -> Option<(f64, f64)> {
        histogram_mean(&self.rejected_hist)
    }
}

fn histogram_mean(hist: &[u64]) -> Option<(f64, f64)> {
    let count: u64 = hist.iter().sum();
    if count < 2 {
        return None;
    }
    let c = count as f64;
    let mean = hist
        .iter()
        .enumerate()
        .map(|(n, &k)| n as f64 * k as f64)
        .sum::<f64>()
        / c;
    let var = hist
        .iter()
        .enumerate()
        .map(|(n, &k)| k as f64 * (n as f64 - mean).powi(2))
        .sum::<f64>()
        / (c - 1.0);
    Some((mean, (var / c).sqrt()))
}

#[derive(Default)]
struct Tally {
    accepted: Vec<u64>,
    rejected: Vec<u64>,
    clicks: u64,
    no_clicks: u64,
}

fn bump(hist: &mut Vec<u64>, n: u64) {
    let i = n as usize;
    if hist.len() <= i {
        hist.resize(i + 1, 0);
    }
    hist[i] += 1;
}

fn add_hist(into: &mut Vec<u64>, from: &[u64]) {
    if into.len() < from.len() {
        into.resize(from.len(), 0);
    }
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        add_hist(&mut self.accepted, &other.accepted);
        add_hist(&mut self.rejected, &other.rejected);
        self.clicks += other.clicks;
        self.no_clicks += other.no_clicks;
        self
    }
}

/// Runs `cfg.trials` independent passes of the heralded subtraction.
pub fn simulate_protocol(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", 0.0, "must be >= 1"));
    }
    let params = cfg.params;
    let tallies: Vec<Tally> = partition_sizes(cfg.trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, count)| {
            let mut rng = partition_rng(cfg.seed, i);
            let mut t = Tally::default();
            for _ in 0..count {
                let (transmitted, click) = protocol_trial(&mut rng, &params);
                if click {
                    t.clicks += 1;
                    bump(&mut t.accepted, transmitted);
                } else {
                    t.no_clicks += 1;
                    bump(&mut t.rejected, transmitted);
                }
            }
            t
        })
        .collect();
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    Ok(SimReport {
        trials: cfg.trials,
        n_accepted: total.clicks,
        empirical_p1: total.clicks as f64 / cfg.trials as f64,
        accepted_hist: total.accepted,
        rejected_hist: total.rejected,
        click_record: ClickRecord {
            clicks: total.clicks,
            no_clicks: total.no_clicks,
        },
    })
}

/// Photon number of one copy of `model`. The heralded families are drawn by
/// running the protocol until the wanted herald outcome occurs.
fn sample_photon_number<R: Rng>(rng: &mut R, model: &StateModel) -> u64 {
    match model {
        StateModel::Thermal(t) => sample_thermal(rng, t.lambda()),
        // Negative binomial of order two: sum of two geometric draws.
        StateModel::Subtracted(t) => {
            sample_thermal(rng, t.lambda()) + sample_thermal(rng, t.lambda())
        }
        StateModel::Added(t) => {
            1 + sample_thermal(rng, t.lambda()) + sample_thermal(rng, t.lambda())
        }
        StateModel::RealisticAccepted(p) => loop {
            let (n, click) = protocol_trial(rng, p);
            if click {
                break n;
            }
        },
        StateModel::RealisticRejected(p) => loop {
            let (n, click) = protocol_trial(rng, p);
            if !click {
                break n;
            }
        },
    }
}

/// `sigma * chi_3` with a random sign: density proportional to `x^2 exp(-x^2/(2 sigma^2))`.
fn sample_signed_chi3<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    let r2: f64 = (0..3)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z * z
        })
        .sum();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    sign * sigma * r2.sqrt()
}

fn sample_homodyne<R: Rng>(rng: &mut R, model: &StateModel) -> Result<f64> {
    let gaussian = |rng: &mut R, mean: f64| {
        let z: f64 = rng.sample(StandardNormal);
        z * ((1.0 + 2.0 * mean) / 2.0).sqrt()
    };
    // The ideal densities are two-component mixtures of N(0, s/2) and its
    // x^2-weighted partner, with weights (1+l)/s, l/s (subtracted) and l/s,
    // (1+l)/s (added), s = 1 + 2l.
    let mixture = |rng: &mut R, lambda: f64, gaussian_weight: f64| {
        let sigma = ((1.0 + 2.0 * lambda) / 2.0).sqrt();
        if rng.random::<f64>() < gaussian_weight {
            let z: f64 = rng.sample(StandardNormal);
            z * sigma
        } else {
            sample_signed_chi3(rng, sigma)
        }
    };
    Ok(match model {
        StateModel::Thermal(t) => gaussian(rng, t.lambda()),
        StateModel::RealisticRejected(p) => gaussian(rng, p.rejected_mean()),
        StateModel::Subtracted(t) => {
            let l = t.lambda();
            mixture(rng, l, (1.0 + l) / (1.0 + 2.0 * l))
        }
        StateModel::Added(t) => {
            let l = t.lambda();
            mixture(rng, l, l / (1.0 + 2.0 * l))
        }
        StateModel::RealisticAccepted(_) => {
            return Err(Error::UnsupportedFamily("homodyne sampling"));
        }
    })
}

/// One outcome of `meas` on one copy of `model`, as a real number
/// (photon count, 1.0 for an on-off click, quadrature, or `|alpha|^2`).
fn sample_outcome<R: Rng>(rng: &mut R, model: &StateModel, meas: Measurement) -> Result<f64> {
    Ok(match meas {
        Measurement::PhotonNumber => sample_photon_number(rng, model) as f64,
        Measurement::OnOff { efficiency } => {
            let n = sample_photon_number(rng, model);
            let p_silent = ((n as f64) * (-efficiency).ln_1p()).exp();
            if rng.random::<f64>() < p_silent {
                0.0
            } else {
                1.0
            }
        }
        Measurement::HeterodyneRadial => {
            // Given n photons the radial outcome is Gamma(n + 1, 1).
            let n = sample_photon_number(rng, model);
            Gamma::new(n as f64 + 1.0, 1.0)
                .expect("valid gamma")
                .sample(rng)
        }
        Measurement::Homodyne => sample_homodyne(rng, model)?,
    })
}

/// Draws `count` independent outcomes of `meas` on copies of `model`.
pub fn sample_outcomes(
    model: &StateModel,
    meas: Measurement,
    count: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate()?;
    meas.validate()?;
    let blocks: Vec<Vec<f64>> = partition_sizes(count)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, n)| {
            let mut rng = partition_rng(seed, i);
            (0..n)
                .map(|_| sample_outcome(&mut rng, model, meas))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

fn likelihood(model: &StateModel, meas: Measurement, outcome: f64) -> f64 {
    match meas {
        Measurement::PhotonNumber => model.evaluate(&PhotonNumber, outcome as u64).value,
        Measurement::OnOff { efficiency } => {
            let p_off = model.evaluate(&OnOffVacuum { efficiency }, ()).value;
            if outcome == 0.0 {
                p_off
            } else {
                1.0 - p_off
            }
        }
        Measurement::Homodyne => model.evaluate(&Homodyne, outcome).value,
        Measurement::HeterodyneRadial => model.evaluate(&HeterodyneRadial, outcome).value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalFisher {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Monte Carlo Fisher information: the mean squared score over simulated
/// outcomes, with the score taken as the symmetric log-likelihood ratio
/// between `lambda + delta` and `lambda - delta`.
pub fn empirical_fi(
    model: &StateModel,
    meas: Measurement,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalFisher> {
    model.validate()?;
    meas.validate()?;
    let lambda = model.lambda();
    if !(delta > 1e-4 * lambda && delta < 1e-1 * lambda) {
        return Err(Error::invalid(
            "delta",
            delta,
            "must lie in (1e-4 lambda, 1e-1 lambda)",
        ));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", trials as f64, "must be >= 2"));
    }
    let up = model.at_lambda(lambda + delta)?;
    let down = model.at_lambda(lambda - delta)?;
    let sums: Vec<(f64, f64)> = partition_sizes(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, n)| -> Result<(f64, f64)> {
            let mut rng = partition_rng(seed, i);
            let (mut s2, mut s4) = (0.0, 0.0);
            for _ in 0..n {
                let x = sample_outcome(&mut rng, model, meas)?;
                let (lu, ld) = (likelihood(&up, meas, x), likelihood(&down, meas, x));
                if lu > 0.0 && ld > 0.0 {
                    let score = (lu.ln() - ld.ln()) / (2.0 * delta);
                    let sq = score * score;
                    s2 += sq;
                    s4 += sq * sq;
                }
            }
            Ok((s2, s4))
        })
        .collect::<Result<_>>()?;
    let (s2, s4) = sums
        .iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = trials as f64;
    let mean = s2 / n;
    let var = (s4 / n - mean * mean) * n / (n - 1.0);
    Ok(EmpiricalFisher {
        estimate: mean,
        std_error: (var.max(0.0) / n).sqrt(),
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of a count histogram against a pmf on the
/// non-negative integers. Adjacent bins are pooled until each holds at least
/// five expected counts; the unobserved tail is folded into the last bin.
pub fn chi_square_gof<F: Fn(usize) -> f64>(
    observed: &[u64],
    expected_pmf: F,
) -> Result<ChiSquareTest> {
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::Domain("empty histogram".into()));
    }
    let n = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp, mut cum) = (0.0, 0.0, 0.0);
    for (k, &o) in observed.iter().enumerate() {
        let p = expected_pmf(k);
        cum += p;
        obs += o as f64;
        exp += n * p;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    exp += n * (1.0 - cum).max(0.0);
    match bins.last_mut() {
        Some(last) if exp < MIN_EXPECTED => {
            last.0 += obs;
            last.1 += exp;
        }
        _ => bins.push((obs, exp)),
    }
    if bins.len() < 2 {
        return Err(Error::Domain(
            "too few populated bins for a chi-square test".into(),
        ));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Computation(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{thermal_pmf, ThermalParams};

    #[test]
    fn reproducible() {
        let p = ProtocolParams::new(1.0, 0.95, 0.99).unwrap();
        let cfg = SimConfig::new(p, 20_000, 7).unwrap();
        assert_eq!(
            simulate_protocol(&cfg).unwrap(),
            simulate_protocol(&cfg).unwrap()
        );
        let other = SimConfig::new(p, 20_000, 8).unwrap();
        assert_ne!(
            simulate_protocol(&cfg).unwrap(),
            simulate_protocol(&other).unwrap()
        );
    }

    #[test]
    fn report_bookkeeping() {
        let p = ProtocolParams::new(2.0, 0.9, 0.8).unwrap();
        let r = simulate_protocol(&SimConfig::new(p, 12_345, 1).unwrap()).unwrap();
        assert_eq!(r.accepted_hist.iter().sum::<u64>(), r.n_accepted);
        assert_eq!(r.rejected_hist.iter().sum::<u64>(), r.trials - r.n_accepted);
        assert_eq!(r.click_record.clicks + r.click_record.no_clicks, r.trials);
    }

    #[test]
    fn unit_transmittance_never_clicks() {
        let p = ProtocolParams::new(3.0, 1.0, 1.0).unwrap();
        let r = simulate_protocol(&SimConfig::new(p, 50_000, 3).unwrap()).unwrap();
        assert_eq!(r.n_accepted, 0);
    }

    #[test]
    fn blind_herald_leaves_attenuated_thermal() {
        let p = ProtocolParams::new(1.0, 0.95, 1e-15).unwrap();
        let r = simulate_protocol(&SimConfig::new(p, 400_000, 11).unwrap()).unwrap();
        let att = ThermalParams::new(0.95).unwrap();
        let chi = chi_square_gof(&r.rejected_hist, |n| thermal_pmf(att, n as u64)).unwrap();
        assert!(chi.p_value > 1e-3, "{chi:?}");
    }

    #[test]
    fn thermal_sampler_matches_pmf() {
        let mut rng = partition_rng(5, 0);
        let mut hist = Vec::new();
        for _ in 0..200_000 {
            bump(&mut hist, sample_thermal(&mut rng, 2.0));
        }
        let t = ThermalParams::new(2.0).unwrap();
        let chi = chi_square_gof(&hist, |n| thermal_pmf(t, n as u64)).unwrap();
        assert!(chi.p_value > 1e-4, "{chi:?}");
    }

    #[test]
    fn large_photon_numbers_use_binomial_sampler() {
        let mut rng = partition_rng(9, 0);
        let draws: Vec<u64> = (0..20_000)
            .map(|_| sample_binomial(&mut rng, 1000, 0.05))
            .collect();
        let mean = draws.iter().sum::<u64>() as f64 / draws.len() as f64;
        // sd of the mean: sqrt(1000 * 0.05 * 0.95 / 20000) = 0.049
        assert!((mean - 50.0).abs() < 0.25, "{mean}");
    }

    #[test]
    fn empirical_fi_rejects_degenerate_step() {
        let m = StateModel::thermal(1.0).unwrap();
        assert!(empirical_fi(&m, Measurement::PhotonNumber, 0.0, 100, 1).is_err());
        assert!(empirical_fi(&m, Measurement::PhotonNumber, 0.5, 100, 1).is_err());
    }

    #[test]
    fn chi_square_detects_wrong_model() {
        let mut rng = partition_rng(2, 0);
        let mut hist = Vec::new();
        for _ in 0..100_000 {
            bump(&mut hist, sample_thermal(&mut rng, 1.0));
        }
        let wrong = ThermalParams::new(1.1).unwrap();
        assert!(
            chi_square_gof(&hist, |n| thermal_pmf(wrong, n as u64))
                .unwrap()
                .p_value
                < 1e-6
        );
        assert!(chi_square_gof(&[], |_| 1.0).is_err());
    }
}
