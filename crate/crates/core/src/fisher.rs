//! Fisher information of the photon-number, homodyne, heterodyne and on-off
//! statistics, plus the closed-form QFIs and the chain-rule reparameterization.
//!
//! Every family here is diagonal in a lambda-independent Fock basis, so the
//! classical FI of the photon-number pmf is the QFI.

use crate::error::{Error, Result};
use crate::measurements::{
    heterodyne_cutoff, homodyne_half_width, HeterodyneRadial, Homodyne, Measurement, OnOffVacuum,
};
use crate::quadrature::{integrate, QuadOptions};
use crate::states::{truncation, Kernel, PhotonNumber, StateModel};

/// Relative error above which a capped series or a quadrature is rejected.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;
/// Densities below this are treated as zero inside FI integrands.
const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FisherMethod {
    ClosedForm,
    Series,
    Quadrature,
    FiniteDifference,
}

impl FisherMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FisherMethod::ClosedForm => "closed-form",
            FisherMethod::Series => "series",
            FisherMethod::Quadrature => "quadrature",
            FisherMethod::FiniteDifference => "finite-difference",
        }
    }
}

/// A Fisher-information value (units `1/lambda^2`) with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub value: f64,
    pub method: FisherMethod,
    /// Fock terms summed or integrand evaluations spent.
    pub terms_or_nodes: usize,
    /// Absolute a-posteriori error estimate.
    pub est_error: f64,
    /// The Fock-space hard cap was reached.
    pub capped: bool,
}

impl FisherResult {
    fn closed(value: f64) -> Self {
        Self {
            value,
            method: FisherMethod::ClosedForm,
            terms_or_nodes: 0,
            est_error: 0.0,
            capped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    CentralDifference,
}

/// How `d/dlambda` of the outcome distribution is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeSpec {
    mode: DerivativeMode,
    rel_step: f64,
}

impl Default for DerivativeSpec {
    fn default() -> Self {
        Self::analytic()
    }
}

impl DerivativeSpec {
    pub const DEFAULT_REL_STEP: f64 = 1e-4;

    pub fn analytic() -> Self {
        Self {
            mode: DerivativeMode::Analytic,
            rel_step: Self::DEFAULT_REL_STEP,
        }
    }

    pub fn central_difference(rel_step: f64) -> Result<Self> {
        if !(rel_step > 1e-9 && rel_step < 1e-3) {
            return Err(Error::invalid(
                "rel_step",
                rel_step,
                "must lie in (1e-9, 1e-3)",
            ));
        }
        Ok(Self {
            mode: DerivativeMode::CentralDifference,
            rel_step,
        })
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn rel_step(&self) -> f64 {
        self.rel_step
    }

    /// Step `h = rel_step * lambda`; the range check on `rel_step` keeps both
    /// shifted models valid.
    fn step(&self, lambda: f64) -> f64 {
        self.rel_step * lambda
    }

    fn method(&self, analytic: FisherMethod) -> FisherMethod {
        match self.mode {
            DerivativeMode::Analytic => analytic,
            DerivativeMode::CentralDifference => FisherMethod::FiniteDifference,
        }
    }
}

/// Evaluates a kernel's value at lambda and its derivative in the requested mode.
struct Differentiator {
    model: StateModel,
    shifted: Option<(StateModel, StateModel, f64)>,
}

impl Differentiator {
    fn new(model: &StateModel, d: DerivativeSpec) -> Result<Self> {
        model.validate()?;
        let shifted = match d.mode {
            DerivativeMode::Analytic => None,
            DerivativeMode::CentralDifference => {
                let lambda = model.lambda();
                let h = d.step(lambda);
                Some((
                    model.at_lambda(lambda + h)?,
                    model.at_lambda(lambda - h)?,
                    h,
                ))
            }
        };
        Ok(Self {
            model: *model,
            shifted,
        })
    }

    fn eval<K: Kernel>(&self, kernel: &K, x: K::Outcome) -> (f64, f64) {
        let e = self.model.evaluate(kernel, x);
        match &self.shifted {
            None => (e.value, e.deriv),
            Some((up, down, h)) => {
                let fd =
                    (up.evaluate(kernel, x).value - down.evaluate(kernel, x).value) / (2.0 * h);
                (e.value, fd)
            }
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `sum_n (d p_n / d lambda)^2 / p_n` over the truncated photon-number series.
pub fn fi_discrete(model: &StateModel, d: DerivativeSpec) -> Result<FisherResult> {
    let diff = Differentiator::new(model, d)?;
    let trunc = truncation(model);
    let mut acc = CompensatedSum::default();
    let (mut prev, mut last) = (0.0, 0.0);
    for n in 0..=trunc.n_max as u64 {
        let (p, dp) = diff.eval(&PhotonNumber, n);
        if p > DENSITY_FLOOR {
            let term = dp * dp / p;
            acc.add(term);
            prev = last;
            last = term;
        }
    }
    let value = acc.total();
    // Terms decay geometrically at the cut; bound the tail by their last ratio.
    let est_error = if prev > 0.0 && last < prev {
        let r = last / prev;
        last * r / (1.0 - r)
    } else {
        last * (trunc.n_max as f64 + 1.0)
    };
    if trunc.capped && est_error > CONVERGENCE_TOLERANCE * value {
        return Err(Error::Nonconvergence {
            what: "photon-number Fisher series",
            est_error,
            tolerance: CONVERGENCE_TOLERANCE * value,
        });
    }
    Ok(FisherResult {
        value,
        method: d.method(FisherMethod::Series),
        terms_or_nodes: trunc.n_max + 1,
        est_error,
        capped: trunc.capped,
    })
}

/// Continuous measurements handled by [`fi_continuous`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousMeasurement {
    Homodyne,
    HeterodyneRadial,
}

/// `integral (d f / d lambda)^2 / f` of the homodyne or radial heterodyne density.
pub fn fi_continuous(
    model: &StateModel,
    meas: ContinuousMeasurement,
    d: DerivativeSpec,
) -> Result<FisherResult> {
    let diff = Differentiator::new(model, d)?;
    // FI values span many decades; only the relative target is meaningful.
    let mut opts = QuadOptions {
        abs_tol: f64::MIN_POSITIVE,
        ..QuadOptions::default()
    };
    if d.mode() == DerivativeMode::CentralDifference {
        // Difference quotients carry ~1e-10 relative noise; ask for no more.
        opts.rel_tol = CONVERGENCE_TOLERANCE / 10.0;
    }
    let (result, scale) = match meas {
        ContinuousMeasurement::Homodyne => {
            let half = homodyne_half_width(model);
            let sigma = half / 8.0;
            let points = breakpoints(0.0, half, &[sigma, 2.0 * sigma, 4.0 * sigma]);
            // All densities are even in x.
            let r = integrate(|x| score_density(diff.eval(&Homodyne, x)), &points, opts);
            (r, 2.0)
        }
        ContinuousMeasurement::HeterodyneRadial => {
            let cutoff = heterodyne_cutoff(model);
            let m = 1.0 + model.envelope_mean();
            let points = breakpoints(0.0, cutoff, &[m, 4.0 * m, 16.0 * m]);
            let r = integrate(
                |u| score_density(diff.eval(&HeterodyneRadial, u)),
                &points,
                opts,
            );
            (r, 1.0)
        }
    };
    let value = scale * result.value;
    let est_error = scale * result.abs_error;
    if est_error > CONVERGENCE_TOLERANCE * value {
        return Err(Error::Nonconvergence {
            what: "Fisher-information quadrature",
            est_error,
            tolerance: CONVERGENCE_TOLERANCE * value,
        });
    }
    Ok(FisherResult {
        value,
        method: d.method(FisherMethod::Quadrature),
        terms_or_nodes: result.evaluations,
        est_error,
        capped: false,
    })
}

fn breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend(interior.iter().copied().filter(|&x| x > lo && x < hi));
    pts.push(hi);
    pts
}

fn score_density((f, df): (f64, f64)) -> f64 {
    if f < DENSITY_FLOOR {
        0.0
    } else {
        df * df / f
    }
}

/// Fisher information of a two-outcome distribution, `dp^2 / (p (1 - p))`.
pub fn fi_binary(p: f64, dp_dlambda: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "binary outcome probability {p} must lie in (0, 1)"
        )));
    }
    Ok(dp_dlambda * dp_dlambda / (p * (1.0 - p)))
}

/// Fisher information of on-off detection with the given efficiency.
///
/// A deterministic detector outcome carries no information; that case
/// returns zero instead of the `fi_binary` domain error.
pub fn fi_onoff(model: &StateModel, efficiency: f64, d: DerivativeSpec) -> Result<FisherResult> {
    Measurement::on_off(efficiency)?;
    let diff = Differentiator::new(model, d)?;
    let (p_off, dp) = diff.eval(&OnOffVacuum { efficiency }, ());
    let value = if (p_off <= 0.0 || p_off >= 1.0) && dp == 0.0 {
        0.0
    } else {
        fi_binary(p_off, dp)?
    };
    Ok(FisherResult {
        value,
        method: d.method(FisherMethod::ClosedForm),
        terms_or_nodes: 0,
        est_error: 0.0,
        capped: false,
    })
}

/// Closed-form QFI: `1/(l(1+l))` for thermal, twice that for the ideal
/// subtracted and added states, and the chain-ruled thermal QFI for the
/// no-click branch. The heralded state has no closed form.
pub fn qfi_closed(model: &StateModel) -> Result<FisherResult> {
    model.validate()?;
    let l = model.lambda();
    let value = match model {
        StateModel::Thermal(_) => 1.0 / (l * (1.0 + l)),
        StateModel::Subtracted(_) | StateModel::Added(_) => 2.0 / (l * (1.0 + l)),
        StateModel::RealisticRejected(p) => {
            let k = p.herald_rate();
            let eta = p.eta();
            let d = 1.0 + k * l;
            eta / (d * d) / (l * (1.0 + eta * l + k * l))
        }
        StateModel::RealisticAccepted(_) => {
            return Err(Error::UnsupportedFamily("closed-form QFI"));
        }
    };
    Ok(FisherResult::closed(value))
}

/// Fisher information with respect to `lambda` of a statistic whose
/// information `f_wrt_tilde` is known with respect to `tilde(lambda)`.
pub fn reparameterize_fi(f_wrt_tilde: f64, dtilde_dlambda: f64) -> f64 {
    f_wrt_tilde * dtilde_dlambda * dtilde_dlambda
}

/// Dispatches to the engine that matches the measurement.
pub fn fisher_information(
    model: &StateModel,
    meas: Measurement,
    d: DerivativeSpec,
) -> Result<FisherResult> {
    match meas {
        Measurement::PhotonNumber => fi_discrete(model, d),
        Measurement::Homodyne => fi_continuous(model, ContinuousMeasurement::Homodyne, d),
        Measurement::HeterodyneRadial => {
            fi_continuous(model, ContinuousMeasurement::HeterodyneRadial, d)
        }
        Measurement::OnOff { efficiency } => fi_onoff(model, efficiency, d),
    }
}
