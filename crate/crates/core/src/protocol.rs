//! Information bookkeeping for the heralded subtraction: the click record,
//! the accepted and rejected branches, bounds on their total, and
//! information-per-cost rates with and without post-selection.

use crate::error::{Error, Result};
use crate::fisher::{fi_binary, fisher_information, qfi_closed, DerivativeSpec, FisherResult};
use crate::measurements::Measurement;
use crate::states::{ProtocolParams, StateModel};

/// Per-copy costs of preparation, herald (selection) and final measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    c_prep: f64,
    c_select: f64,
    c_measure: f64,
}

impl CostModel {
    pub fn new(c_prep: f64, c_select: f64, c_measure: f64) -> Result<Self> {
        for (name, v) in [
            ("c_prep", c_prep),
            ("c_select", c_select),
            ("c_measure", c_measure),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, v, "costs must be finite and >= 0"));
            }
        }
        if c_prep + c_measure <= 0.0 {
            return Err(Error::invalid(
                "c_prep + c_measure",
                c_prep + c_measure,
                "must be > 0",
            ));
        }
        Ok(Self {
            c_prep,
            c_select,
            c_measure,
        })
    }

    pub fn c_prep(&self) -> f64 {
        self.c_prep
    }

    pub fn c_select(&self) -> f64 {
        self.c_select
    }

    pub fn c_measure(&self) -> f64 {
        self.c_measure
    }
}

/// Final measurements applied to the accepted and rejected outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchMeasurement {
    pub accepted: Measurement,
    pub rejected: Measurement,
}

impl BranchMeasurement {
    pub fn both(m: Measurement) -> Self {
        Self {
            accepted: m,
            rejected: m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.accepted.validate()?;
        self.rejected.validate()
    }
}

/// Click-record information plus probability-weighted branch informations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalInformation {
    pub click_fi: f64,
    /// `P1 * F[accepted]`
    pub accepted_term: f64,
    /// `P0 * F[rejected]`
    pub rejected_term: f64,
    pub total: f64,
    pub accepted: FisherResult,
    pub rejected: FisherResult,
}

/// Fisher information of the herald record `{P0, P1}`.
pub fn click_fi(p: &ProtocolParams) -> Result<f64> {
    fi_binary(p.success_probability(), p.success_probability_derivative())
}

fn branch_fi(model: &StateModel, meas: Measurement) -> Result<FisherResult> {
    match (model, meas) {
        (StateModel::RealisticRejected(_), Measurement::PhotonNumber) => qfi_closed(model),
        _ => fisher_information(model, meas, DerivativeSpec::analytic()),
    }
}

/// `F[{P0,P1}] + P1 F[accepted] + P0 F[rejected]`.
pub fn total_information(p: &ProtocolParams, m: BranchMeasurement) -> Result<TotalInformation> {
    m.validate()?;
    let accepted_model = StateModel::realistic_accepted(*p)?;
    let rejected_model = StateModel::realistic_rejected(*p);
    let click = click_fi(p)?;
    let accepted = branch_fi(&accepted_model, m.accepted)?;
    let rejected = branch_fi(&rejected_model, m.rejected)?;
    let accepted_term = p.success_probability() * accepted.value;
    let rejected_term = p.failure_probability() * rejected.value;
    Ok(TotalInformation {
        click_fi: click,
        accepted_term,
        rejected_term,
        total: click + accepted_term + rejected_term,
        accepted,
        rejected,
    })
}

/// Bounds on the total photon-number information: the QFI of the attenuated
/// thermal state (extended convexity) below and the input QFI above.
pub fn convexity_bounds(p: &ProtocolParams) -> (f64, f64) {
    let l = p.lambda();
    let eta = p.eta();
    (eta / (l * (1.0 + eta * l)), 1.0 / (l * (1.0 + l)))
}

/// Information of on-off detection (herald efficiency) on the rejected
/// branch, with respect to `lambda`:
/// `eps eta / (l (1 + eps l)^2 (1 + eps (1 - eta) l))`.
pub fn fi_rejected_onoff(p: &ProtocolParams) -> f64 {
    let l = p.lambda();
    let e = p.epsilon();
    let d = 1.0 + e * l;
    e * p.eta() / (l * d * d * (1.0 + p.herald_rate() * l))
}

/// The same quantity composed from the thermal on-off distribution at
/// `lambda_rej` and the chain rule.
pub fn fi_rejected_onoff_composed(p: &ProtocolParams) -> Result<f64> {
    let mean = p.rejected_mean();
    let e = p.epsilon();
    let p_off = 1.0 / (1.0 + e * mean);
    let dp_off = -e * p_off * p_off;
    Ok(crate::fisher::reparameterize_fi(
        fi_binary(p_off, dp_off)?,
        p.rejected_mean_derivative(),
    ))
}

/// Numerator terms of the post-selected rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub accepted_fi: FisherResult,
    /// `P1 F_M[accepted]`
    pub accepted_term: f64,
    /// `P0 F_rejected_onoff`
    pub rejected_term: f64,
    pub click_fi: f64,
    pub rate: f64,
    /// Rate without the rejected term and its selection cost.
    pub compact_rate: f64,
}

/// Information-cost rate of the post-selected strategy: measurement `accepted`
/// on clicks, on-off detection (herald efficiency) on no-clicks,
///
/// ```text
/// (P1 F_M + P0 F_rej + F_click) / (C_P + C_S + P1 C_M + P0 C_S)
/// ```
pub fn rate_postselected(p: &ProtocolParams, c: &CostModel, accepted: Measurement) -> Result<f64> {
    Ok(rate_postselected_breakdown(p, c, accepted)?.rate)
}

pub fn rate_postselected_breakdown(
    p: &ProtocolParams,
    c: &CostModel,
    accepted: Measurement,
) -> Result<RateBreakdown> {
    accepted.validate()?;
    let model = StateModel::realistic_accepted(*p)?;
    let accepted_fi = branch_fi(&model, accepted)?;
    let p1 = p.success_probability();
    let p0 = p.failure_probability();
    let click = click_fi(p)?;
    let accepted_term = p1 * accepted_fi.value;
    let rejected_term = p0 * fi_rejected_onoff(p);
    let denom = c.c_prep + c.c_select + p1 * c.c_measure + p0 * c.c_select;
    let compact_denom = c.c_prep + c.c_select + p1 * c.c_measure;
    Ok(RateBreakdown {
        accepted_fi,
        accepted_term,
        rejected_term,
        click_fi: click,
        rate: (accepted_term + rejected_term + click) / denom,
        compact_rate: (accepted_term + click) / compact_denom,
    })
}

/// Information-cost rate without post-selection, `F_M / (C_P + C_M)`.
pub fn rate_direct(lambda: f64, c: &CostModel, meas_fi: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", lambda, "must be finite and > 0"));
    }
    if !(meas_fi.is_finite() && meas_fi >= 0.0) {
        return Err(Error::invalid(
            "meas_fi",
            meas_fi,
            "must be finite and >= 0",
        ));
    }
    Ok(meas_fi / (c.c_prep + c.c_measure))
}
