//! Photon-number statistics of single-mode thermal light and of the states
//! obtained from it by ideal photon subtraction, ideal photon addition, and
//! beam-splitter subtraction heralded by an on-off detector.
//!
//! All families are diagonal in the Fock basis. The heralded (accepted)
//! state is carried as a difference of two thermal states,
//!
//! ```text
//! rho = (nu[eta*lambda] - P0 * nu[lambda_rej]) / P1
//! ```
//!
//! which gives every measurement density of the accepted branch in closed
//! form from the thermal one. The rejected (no-click) branch is exactly
//! thermal with mean `lambda_rej`.

use crate::error::{Error, Result};

/// Relative tail mass below which Fock-space sums are truncated.
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Hard cap on the number of Fock terms in any sum.
pub const MAX_TERMS: usize = 1_000_000;
/// Polynomial degree of the envelope `(n+1)^d q^n` that dominates every
/// summand used here (pmf times squared score).
const ENVELOPE_DEGREE: i32 = 3;

/// Mean photon number of a thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    lambda: f64,
}

impl ThermalParams {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Settings of the heralded subtraction: input mean photon number,
/// beam-splitter transmittance and herald detector efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    lambda: f64,
    eta: f64,
    epsilon: f64,
}

impl ProtocolParams {
    pub fn new(lambda: f64, eta: f64, epsilon: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_unit_interval("eta", eta)?;
        check_unit_interval("epsilon", epsilon)?;
        Ok(Self {
            lambda,
            eta,
            epsilon,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.eta, self.epsilon)
    }

    pub fn thermal(&self) -> ThermalParams {
        ThermalParams {
            lambda: self.lambda,
        }
    }

    /// Probability that a single input photon is reflected and detected.
    pub(crate) fn herald_rate(&self) -> f64 {
        (1.0 - self.eta) * self.epsilon
    }

    /// Probability of a herald click, `P1`.
    pub fn success_probability(&self) -> f64 {
        let c = self.herald_rate() * self.lambda;
        c / (1.0 + c)
    }

    /// Probability of no click, `P0 = 1 - P1`.
    pub fn failure_probability(&self) -> f64 {
        1.0 / (1.0 + self.herald_rate() * self.lambda)
    }

    /// `dP1/dlambda`; `dP0/dlambda` is its negative.
    pub fn success_probability_derivative(&self) -> f64 {
        let k = self.herald_rate();
        let d = 1.0 + k * self.lambda;
        k / (d * d)
    }

    /// Mean photon number of the (thermal) state left after a no-click event.
    pub fn rejected_mean(&self) -> f64 {
        self.eta * self.lambda / (1.0 + self.herald_rate() * self.lambda)
    }

    /// `d lambda_rej / d lambda`.
    pub fn rejected_mean_derivative(&self) -> f64 {
        let d = 1.0 + self.herald_rate() * self.lambda;
        self.eta / (d * d)
    }

    /// Mean photon number of the transmitted state when the herald is ignored.
    pub fn attenuated_mean(&self) -> f64 {
        self.eta * self.lambda
    }

    fn require_herald(&self) -> Result<()> {
        if self.eta >= 1.0 {
            return Err(Error::UndefinedConditionalState {
                eta: self.eta,
                epsilon: self.epsilon,
            });
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", lambda, "must be finite and > 0"));
    }
    Ok(())
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::invalid(name, v, "must lie in (0, 1]"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Thermal,
    Subtracted,
    Added,
    RealisticAccepted,
    RealisticRejected,
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Thermal => "thermal",
            StateKind::Subtracted => "subtracted",
            StateKind::Added => "added",
            StateKind::RealisticAccepted => "realistic-accepted",
            StateKind::RealisticRejected => "realistic-rejected",
        }
    }
}

/// A member of one of the five Fock-diagonal families.
///
/// Build through the constructors; they enforce that the heralded state is
/// only formed when a click is possible (`eta < 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateModel {
    Thermal(ThermalParams),
    Subtracted(ThermalParams),
    Added(ThermalParams),
    RealisticAccepted(ProtocolParams),
    RealisticRejected(ProtocolParams),
}

impl StateModel {
    pub fn thermal(lambda: f64) -> Result<Self> {
        Ok(StateModel::Thermal(ThermalParams::new(lambda)?))
    }

    pub fn subtracted(lambda: f64) -> Result<Self> {
        Ok(StateModel::Subtracted(ThermalParams::new(lambda)?))
    }

    pub fn added(lambda: f64) -> Result<Self> {
        Ok(StateModel::Added(ThermalParams::new(lambda)?))
    }

    pub fn realistic_accepted(p: ProtocolParams) -> Result<Self> {
        p.require_herald()?;
        Ok(StateModel::RealisticAccepted(p))
    }

    pub fn realistic_rejected(p: ProtocolParams) -> Self {
        StateModel::RealisticRejected(p)
    }

    pub fn kind(&self) -> StateKind {
        match self {
            StateModel::Thermal(_) => StateKind::Thermal,
            StateModel::Subtracted(_) => StateKind::Subtracted,
            StateModel::Added(_) => StateKind::Added,
            StateModel::RealisticAccepted(_) => StateKind::RealisticAccepted,
            StateModel::RealisticRejected(_) => StateKind::RealisticRejected,
        }
    }

    /// The estimation parameter: the mean photon number of the input thermal state.
    pub fn lambda(&self) -> f64 {
        match self {
            StateModel::Thermal(t) | StateModel::Subtracted(t) | StateModel::Added(t) => t.lambda(),
            StateModel::RealisticAccepted(p) | StateModel::RealisticRejected(p) => p.lambda(),
        }
    }

    pub fn protocol(&self) -> Option<&ProtocolParams> {
        match self {
            StateModel::RealisticAccepted(p) | StateModel::RealisticRejected(p) => Some(p),
            _ => None,
        }
    }

    /// Same family and protocol settings at a different input mean.
    pub fn at_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(match self {
            StateModel::Thermal(_) => StateModel::thermal(lambda)?,
            StateModel::Subtracted(_) => StateModel::subtracted(lambda)?,
            StateModel::Added(_) => StateModel::added(lambda)?,
            StateModel::RealisticAccepted(p) => {
                StateModel::realistic_accepted(p.with_lambda(lambda)?)?
            }
            StateModel::RealisticRejected(p) => {
                StateModel::realistic_rejected(p.with_lambda(lambda)?)
            }
        })
    }

    /// Re-checks the invariants that public enum construction can bypass.
    pub fn validate(&self) -> Result<()> {
        match self {
            StateModel::Thermal(t) | StateModel::Subtracted(t) | StateModel::Added(t) => {
                check_lambda(t.lambda)
            }
            StateModel::RealisticAccepted(p) => {
                ProtocolParams::new(p.lambda, p.eta, p.epsilon)?;
                p.require_herald()
            }
            StateModel::RealisticRejected(p) => {
                ProtocolParams::new(p.lambda, p.eta, p.epsilon).map(|_| ())
            }
        }
    }

    /// Largest thermal mean that appears in the state's photon statistics;
    /// it sets the geometric decay of every Fock sum.
    pub fn envelope_mean(&self) -> f64 {
        match self {
            StateModel::Thermal(t) | StateModel::Subtracted(t) | StateModel::Added(t) => t.lambda(),
            StateModel::RealisticAccepted(p) => p.attenuated_mean(),
            StateModel::RealisticRejected(p) => p.rejected_mean(),
        }
    }

    /// Closed-form mean photon number.
    pub fn mean_photon_number(&self) -> f64 {
        match self {
            StateModel::Thermal(t) => t.lambda(),
            StateModel::Subtracted(t) => 2.0 * t.lambda(),
            StateModel::Added(t) => 2.0 * t.lambda() + 1.0,
            StateModel::RealisticAccepted(p) => {
                (p.attenuated_mean() - p.failure_probability() * p.rejected_mean())
                    / p.success_probability()
            }
            StateModel::RealisticRejected(p) => p.rejected_mean(),
        }
    }

    /// Value of a family-resolved quantity together with its derivative in
    /// `lambda`, composed from the kernel's per-family closed forms.
    pub(crate) fn evaluate<K: Kernel>(&self, kernel: &K, outcome: K::Outcome) -> Eval {
        match self {
            StateModel::Thermal(t) => kernel.thermal(outcome, t.lambda()),
            StateModel::Subtracted(t) => kernel.subtracted(outcome, t.lambda()),
            StateModel::Added(t) => kernel.added(outcome, t.lambda()),
            StateModel::RealisticRejected(p) => {
                let e = kernel.thermal(outcome, p.rejected_mean());
                Eval {
                    value: e.value,
                    deriv: e.deriv * p.rejected_mean_derivative(),
                }
            }
            StateModel::RealisticAccepted(p) => {
                let attenuated = kernel.thermal(outcome, p.attenuated_mean());
                let rejected = kernel.thermal(outcome, p.rejected_mean());
                let p1 = p.success_probability();
                let p0 = p.failure_probability();
                let dp1 = p.success_probability_derivative();
                let value = (attenuated.value - p0 * rejected.value) / p1;
                let numer_deriv = attenuated.deriv * p.eta() + dp1 * rejected.value
                    - p0 * rejected.deriv * p.rejected_mean_derivative();
                Eval {
                    value,
                    deriv: numer_deriv / p1 - value * dp1 / p1,
                }
            }
        }
    }
}

/// A value and its derivative with respect to the family's own parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Eval {
    pub value: f64,
    pub deriv: f64,
}

/// Per-family closed forms of one outcome distribution. `thermal` is
/// differentiated with respect to the thermal mean, the ideal families with
/// respect to their input `lambda`.
pub(crate) trait Kernel {
    type Outcome: Copy;
    fn thermal(&self, x: Self::Outcome, mean: f64) -> Eval;
    fn subtracted(&self, x: Self::Outcome, lambda: f64) -> Eval;
    fn added(&self, x: Self::Outcome, lambda: f64) -> Eval;
}

/// Photon-number distribution.
pub(crate) struct PhotonNumber;

/// `ln(mu / (1 + mu))`
fn log_ratio(mu: f64) -> f64 {
    -(1.0 / mu).ln_1p()
}

/// `q^n` from `ln q`, with `q^0 = 1` even when `ln q = -inf`.
fn geometric_power(n: u64, ln_q: f64) -> f64 {
    if n == 0 {
        1.0
    } else {
        (n as f64 * ln_q).exp()
    }
}

impl Kernel for PhotonNumber {
    type Outcome = u64;

    fn thermal(&self, n: u64, mu: f64) -> Eval {
        let value = geometric_power(n, log_ratio(mu)) / (1.0 + mu);
        Eval {
            value,
            deriv: value * (n as f64 - mu) / (mu * (1.0 + mu)),
        }
    }

    fn subtracted(&self, n: u64, lambda: f64) -> Eval {
        let nf = n as f64;
        let value =
            (nf + 1.0) * geometric_power(n, log_ratio(lambda)) / ((1.0 + lambda) * (1.0 + lambda));
        Eval {
            value,
            deriv: value * (nf / lambda - (nf + 2.0) / (1.0 + lambda)),
        }
    }

    fn added(&self, n: u64, lambda: f64) -> Eval {
        if n == 0 {
            return Eval {
                value: 0.0,
                deriv: 0.0,
            };
        }
        let nf = n as f64;
        let value = nf * geometric_power(n, log_ratio(lambda)) / (lambda * (1.0 + lambda));
        Eval {
            value,
            deriv: value * ((nf - 1.0) / lambda - (nf + 1.0) / (1.0 + lambda)),
        }
    }
}

/// `(1/(1+lambda)) (lambda/(1+lambda))^n`
pub fn thermal_pmf(p: ThermalParams, n: u64) -> f64 {
    PhotonNumber.thermal(n, p.lambda()).value
}

/// `(n+1)/(1+lambda)^2 (lambda/(1+lambda))^n`; mean photon number `2 lambda`.
pub fn subtracted_pmf(p: ThermalParams, n: u64) -> f64 {
    PhotonNumber.subtracted(n, p.lambda()).value
}

/// `n/(lambda(1+lambda)) (lambda/(1+lambda))^n`; mean photon number `2 lambda + 1`.
pub fn added_pmf(p: ThermalParams, n: u64) -> f64 {
    PhotonNumber.added(n, p.lambda()).value
}

/// Probability that the on-off herald clicks.
pub fn success_probability(p: ProtocolParams) -> f64 {
    p.success_probability()
}

/// Mean photon number of the no-click branch.
pub fn rejected_mean(p: ProtocolParams) -> f64 {
    p.rejected_mean()
}

/// Photon-number distribution of the heralded state, evaluated from its
/// difference-of-thermals representation.
pub fn realistic_subtracted_pmf(p: ProtocolParams, n: u64) -> Result<f64> {
    p.require_herald()?;
    Ok(StateModel::RealisticAccepted(p)
        .evaluate(&PhotonNumber, n)
        .value)
}

/// The same distribution in its bracketed single-series form,
///
/// ```text
/// (1/P1) (1/(1+eta l)) (eta l/(1+eta l))^n [1 - ((1+eta l)/(1+l(eta+(1-eta)eps)))^(n+1)]
/// ```
///
/// evaluated with `expm1`/`ln_1p` so that it stays accurate when `P1` is tiny.
pub fn realistic_subtracted_pmf_bracketed(p: ProtocolParams, n: u64) -> Result<f64> {
    p.require_herald()?;
    let l = p.lambda();
    let el = p.attenuated_mean();
    // (1+eta l)/(1+l(eta+(1-eta)eps)) = 1/(1+a)
    let a = p.herald_rate() * l / (1.0 + el);
    let bracket = -(-((n + 1) as f64) * a.ln_1p()).exp_m1();
    let thermal = PhotonNumber.thermal(n, el).value;
    Ok(thermal * bracket / p.success_probability())
}

/// Photon-number distribution of any family.
pub fn pmf(model: &StateModel, n: u64) -> Result<f64> {
    model.validate()?;
    Ok(model.evaluate(&PhotonNumber, n).value)
}

/// Where a Fock-space sum is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    /// Last photon number included.
    pub n_max: usize,
    /// The hard cap was hit before the tail bound was met.
    pub capped: bool,
}

/// Truncation for sums over `model`'s photon statistics.
pub fn truncation(model: &StateModel) -> Truncation {
    truncation_for_mean(model.envelope_mean(), TAIL_TOLERANCE)
}

/// Smallest `N` such that the relative tail of `sum_n (n+1)^3 q^n`,
/// `q = mu/(1+mu)`, beyond `N` is below `tol`.
pub fn truncation_for_mean(mu: f64, tol: f64) -> Truncation {
    let ln_q = log_ratio(mu);
    let q = ln_q.exp();
    let d = ENVELOPE_DEGREE;
    // ln of sum_{n>=0} (n+1)^3 q^n = (1 + 4q + q^2)/(1-q)^4
    let ln_total = (1.0 + 4.0 * q + q * q).ln() + 4.0 * mu.ln_1p();
    let rel_tail = |n: usize| -> f64 {
        let n = n as f64;
        let ratio = q * ((n + 3.0) / (n + 2.0)).powi(d);
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        let ln_tail = d as f64 * (n + 2.0).ln() + (n + 1.0) * ln_q - (1.0 - ratio).ln();
        (ln_tail - ln_total).exp()
    };
    if rel_tail(0) < tol {
        return Truncation {
            n_max: 0,
            capped: false,
        };
    }
    // The bound decreases once the term ratio drops below one; bracket then bisect.
    let mut hi = 1usize;
    while rel_tail(hi) >= tol {
        if hi >= MAX_TERMS {
            return Truncation {
                n_max: MAX_TERMS,
                capped: true,
            };
        }
        hi = (hi * 2).min(MAX_TERMS);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if rel_tail(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Truncation {
        n_max: hi,
        capped: false,
    }
}
