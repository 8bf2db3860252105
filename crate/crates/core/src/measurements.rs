//! Outcome distributions of homodyne, heterodyne and on-off detection.
//!
//! Homodyne measures `x = (a + a^dag)/sqrt(2)`; a thermal state gives a
//! Gaussian with variance `(1 + 2 lambda)/2`. Every state here is
//! phase-invariant, so heterodyne detection is reduced to the radial variable
//! `u = |alpha|^2` with density `f(u) = pi Q(alpha)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::states::{truncation, Eval, Kernel, PhotonNumber, StateModel};

/// Extra variance factor applied to the homodyne integration window.
const HOMODYNE_MARGIN: f64 = 0.5;

/// A detection strategy applied to one copy of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurement {
    /// Photon counting; its Fisher information is the QFI for every family here.
    PhotonNumber,
    Homodyne,
    HeterodyneRadial,
    OnOff {
        efficiency: f64,
    },
}

impl Measurement {
    pub fn on_off(efficiency: f64) -> Result<Self> {
        check_efficiency(efficiency)?;
        Ok(Measurement::OnOff { efficiency })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Measurement::OnOff { efficiency } => check_efficiency(*efficiency),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measurement::PhotonNumber => "photon-number",
            Measurement::Homodyne => "homodyne",
            Measurement::HeterodyneRadial => "heterodyne",
            Measurement::OnOff { .. } => "on-off",
        }
    }
}

fn check_efficiency(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(
            "detector efficiency",
            eps,
            "must lie in (0, 1]",
        ));
    }
    Ok(())
}

/// On-off detector statistics. `p_on` is defined as `1 - p_off`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOffDistribution {
    pub p_off: f64,
    pub p_on: f64,
}

impl OnOffDistribution {
    fn from_off(p_off: f64) -> Self {
        Self {
            p_off,
            p_on: 1.0 - p_off,
        }
    }
}

/// Quadrature density.
pub(crate) struct Homodyne;

impl Kernel for Homodyne {
    type Outcome = f64;

    fn thermal(&self, x: f64, mu: f64) -> Eval {
        let s = 1.0 + 2.0 * mu;
        let value = (-x * x / s).exp() / (PI * s).sqrt();
        Eval {
            value,
            deriv: value * (2.0 * x * x / (s * s) - 1.0 / s),
        }
    }

    fn subtracted(&self, x: f64, lambda: f64) -> Eval {
        let s = 1.0 + 2.0 * lambda;
        let x2 = x * x;
        let numer = 1.0 + lambda * (3.0 + 2.0 * x2 + 2.0 * lambda);
        let d_numer = 3.0 + 2.0 * x2 + 4.0 * lambda;
        polynomial_gaussian(numer, d_numer, x2, s)
    }

    fn added(&self, x: f64, lambda: f64) -> Eval {
        let s = 1.0 + 2.0 * lambda;
        let x2 = x * x;
        let numer = lambda + 2.0 * (lambda * lambda + x2 * (1.0 + lambda));
        let d_numer = 1.0 + 4.0 * lambda + 2.0 * x2;
        polynomial_gaussian(numer, d_numer, x2, s)
    }
}

/// `numer * exp(-x^2/s) / (sqrt(pi) s^(5/2))` and its lambda-derivative, with `ds/dlambda = 2`.
fn polynomial_gaussian(numer: f64, d_numer: f64, x2: f64, s: f64) -> Eval {
    let g = (-x2 / s).exp() / (PI.sqrt() * s * s * s.sqrt());
    Eval {
        value: numer * g,
        deriv: g * (d_numer + numer * (2.0 * x2 / (s * s) - 5.0 / s)),
    }
}

/// Radial heterodyne density in `u = |alpha|^2`.
pub(crate) struct HeterodyneRadial;

impl Kernel for HeterodyneRadial {
    type Outcome = f64;

    fn thermal(&self, u: f64, mu: f64) -> Eval {
        let m = 1.0 + mu;
        let value = (-u / m).exp() / m;
        Eval {
            value,
            deriv: value * (u / (m * m) - 1.0 / m),
        }
    }

    fn subtracted(&self, u: f64, lambda: f64) -> Eval {
        let m = 1.0 + lambda;
        let g = (-u / m).exp() / (m * m * m);
        let numer = 1.0 + lambda * (1.0 + u);
        Eval {
            value: numer * g,
            deriv: g * ((1.0 + u) + numer * (u / (m * m) - 3.0 / m)),
        }
    }

    fn added(&self, u: f64, lambda: f64) -> Eval {
        let m = 1.0 + lambda;
        let value = u * (-u / m).exp() / (m * m);
        Eval {
            value,
            deriv: value * (u / (m * m) - 2.0 / m),
        }
    }
}

/// Probability that an on-off detector of the given efficiency stays silent.
pub(crate) struct OnOffVacuum {
    pub efficiency: f64,
}

impl Kernel for OnOffVacuum {
    type Outcome = ();

    fn thermal(&self, _: (), mu: f64) -> Eval {
        let e = self.efficiency;
        let d = 1.0 + e * mu;
        Eval {
            value: 1.0 / d,
            deriv: -e / (d * d),
        }
    }

    fn subtracted(&self, _: (), lambda: f64) -> Eval {
        let e = self.efficiency;
        let d = 1.0 + e * lambda;
        Eval {
            value: 1.0 / (d * d),
            deriv: -2.0 * e / (d * d * d),
        }
    }

    fn added(&self, _: (), lambda: f64) -> Eval {
        let e = self.efficiency;
        let d = 1.0 + e * lambda;
        Eval {
            value: (1.0 - e) / (d * d),
            deriv: -2.0 * e * (1.0 - e) / (d * d * d),
        }
    }
}

pub fn homodyne_pdf(model: &StateModel, x: f64) -> Result<f64> {
    model.validate()?;
    Ok(model.evaluate(&Homodyne, x).value)
}

pub fn heterodyne_radial_pdf(model: &StateModel, u: f64) -> Result<f64> {
    model.validate()?;
    if u.is_nan() || u < 0.0 {
        return Err(Error::Domain(format!(
            "heterodyne radial variable u = {u} must be >= 0"
        )));
    }
    Ok(model.evaluate(&HeterodyneRadial, u).value)
}

/// On-off statistics from the closed-form vacuum probability.
pub fn onoff_pmf(model: &StateModel, detector_epsilon: f64) -> Result<OnOffDistribution> {
    model.validate()?;
    check_efficiency(detector_epsilon)?;
    let eval = model.evaluate(
        &OnOffVacuum {
            efficiency: detector_epsilon,
        },
        (),
    );
    Ok(OnOffDistribution::from_off(eval.value))
}

/// On-off statistics by summing `p_n (1 - eps)^n` over the truncated photon-number series.
pub fn onoff_pmf_series(model: &StateModel, detector_epsilon: f64) -> Result<OnOffDistribution> {
    model.validate()?;
    check_efficiency(detector_epsilon)?;
    let t = truncation(model);
    let miss = 1.0 - detector_epsilon;
    let mut p_off = 0.0;
    let mut weight = 1.0;
    for n in 0..=t.n_max as u64 {
        p_off += model.evaluate(&PhotonNumber, n).value * weight;
        weight *= miss;
        if weight == 0.0 {
            break;
        }
    }
    Ok(OnOffDistribution::from_off(p_off))
}

/// Half-width `L` of the symmetric homodyne integration window.
pub fn homodyne_half_width(model: &StateModel) -> f64 {
    let s = 1.0 + 2.0 * model.envelope_mean();
    8.0 * (s / 2.0 * (1.0 + HOMODYNE_MARGIN)).sqrt()
}

/// Upper limit `U` of the heterodyne radial integration window.
pub fn heterodyne_cutoff(model: &StateModel) -> f64 {
    let m = 1.0 + model.envelope_mean();
    m * f64::max(60.0, 40.0 + 10.0 * m.ln())
}
