//! Figure datasets and custom sweeps over a log-spaced grid of mean photon
//! numbers, rendered as CSV.
//!
//! Floats are written with Rust's `{:?}` formatting, the shortest decimal
//! that round-trips to the same `f64`, so identical runs give identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fisher::{fi_discrete, fisher_information, qfi_closed, DerivativeSpec, FisherResult};
use crate::measurements::Measurement;
use crate::oracle::{simulate_protocol, SimConfig};
use crate::protocol::{
    convexity_bounds, rate_direct, rate_postselected_breakdown, total_information,
    BranchMeasurement, CostModel,
};
use crate::states::{ProtocolParams, StateModel};

pub const DEFAULT_ETA: f64 = 0.95;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    min: f64,
    max: f64,
    points: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            min: 1e-2,
            max: 1e2,
            points: 200,
        }
    }
}

impl LambdaGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && min > 0.0) {
            return Err(Error::invalid("grid min", min, "must be finite and > 0"));
        }
        if !(max.is_finite() && max > min) {
            return Err(Error::invalid("grid max", max, "must be finite and > min"));
        }
        if points < 2 {
            return Err(Error::invalid("grid points", points as f64, "must be >= 2"));
        }
        Ok(Self { min, max, points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Log-spaced values; the endpoints are exactly `min` and `max`.
    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.min.log10(), self.max.log10());
        let last = self.points - 1;
        (0..self.points)
            .map(|i| match i {
                0 => self.min,
                i if i == last => self.max,
                i => 10f64.powf(a + (b - a) * i as f64 / last as f64),
            })
            .collect()
    }
}

impl FromStr for LambdaGrid {
    type Err = Error;

    /// Parses `min:max:points`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [min, max, points] = parts[..] else {
            return Err(Error::Parse(format!(
                "grid '{s}' is not of the form min:max:points"
            )));
        };
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad grid bound '{t}'")))
        };
        let points = points
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad grid point count '{points}'")))?;
        LambdaGrid::new(num(min)?, num(max)?, points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }

    /// Herald efficiency used by the figure unless overridden.
    pub fn default_epsilon(&self) -> f64 {
        match self {
            FigureId::Fig2 | FigureId::Fig3 | FigureId::Fig4 => 0.97,
            _ => 0.99,
        }
    }

    pub fn columns(&self, compact: bool) -> Vec<&'static str> {
        let mut cols = vec!["lambda"];
        cols.extend_from_slice(match self {
            FigureId::Fig1 => &["qfi_thermal", "qfi_ideal_sub", "qfi_realistic"][..],
            FigureId::Fig2 => &[
                "fi_hom_thermal",
                "fi_hom_sub",
                "fi_hom_add",
                "fi_hom_realistic",
                "qfi_thermal",
            ],
            FigureId::Fig3 => &[
                "fi_het_thermal",
                "fi_het_sub",
                "fi_het_add",
                "fi_het_realistic",
                "qfi_thermal",
            ],
            FigureId::Fig4 => &[
                "fi_onoff_thermal",
                "fi_onoff_sub",
                "fi_onoff_add",
                "fi_onoff_realistic",
                "f_tot",
                "ftot_lower_bound",
                "qfi_thermal",
            ],
            FigureId::Fig5 => &["ftot_het", "fi_het_thermal"],
            FigureId::Fig6 => &["ftot_onoff", "fi_onoff_thermal", "fi_het_thermal"],
            FigureId::Fig7 => &["rate_ps", "rate_0"],
        });
        if compact && *self == FigureId::Fig7 {
            cols.push("rate_ps_compact");
        }
        cols
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown figure '{s}' (expected fig1..fig7)")))
    }
}

/// Measurement on the heralded branch for rate computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AcceptedMeasurement {
    #[default]
    Heterodyne,
    Homodyne,
}

impl AcceptedMeasurement {
    pub fn measurement(&self) -> Measurement {
        match self {
            AcceptedMeasurement::Heterodyne => Measurement::HeterodyneRadial,
            AcceptedMeasurement::Homodyne => Measurement::Homodyne,
        }
    }
}

impl FromStr for AcceptedMeasurement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "het" => Ok(AcceptedMeasurement::Heterodyne),
            "hom" => Ok(AcceptedMeasurement::Homodyne),
            _ => Err(Error::Parse(format!(
                "unknown accepted measurement '{s}' (expected het or hom)"
            ))),
        }
    }
}

/// Parameter overrides; `None` keeps the figure default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub c_prep: Option<f64>,
    pub c_select: Option<f64>,
    pub c_measure: Option<f64>,
    pub grid: Option<LambdaGrid>,
    pub accepted: Option<AcceptedMeasurement>,
    pub compact: bool,
}

impl Overrides {
    fn eta(&self) -> f64 {
        self.eta.unwrap_or(DEFAULT_ETA)
    }

    fn costs(&self) -> Result<CostModel> {
        CostModel::new(
            self.c_prep.unwrap_or(1.0),
            self.c_select.unwrap_or(0.5),
            self.c_measure.unwrap_or(10.0),
        )
    }

    fn grid(&self) -> LambdaGrid {
        self.grid.unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepQuantity {
    /// Click information, branch terms, total and the convexity bounds.
    TotalInformation(BranchMeasurement),
    /// Post-selected and direct information-cost rates.
    Rates,
    /// Success probability and branch mean photon numbers.
    Branches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSpec {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub quantity: SweepQuantity,
    pub overrides: Overrides,
    pub oracle: Option<OracleSpec>,
}

/// One diagnostics record: which engine produced an FI cell and how well it converged.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub lambda: f64,
    pub column: &'static str,
    pub fisher: FisherResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("lambda,column,method,terms_or_nodes,est_error,capped\n");
        for d in &self.diagnostics {
            let _ = writeln!(
                out,
                "{:?},{},{},{},{:?},{}",
                d.lambda,
                d.column,
                d.fisher.method.name(),
                d.fisher.terms_or_nodes,
                d.fisher.est_error,
                d.fisher.capped
            );
        }
        out
    }
}

/// Accumulates one CSV row and the diagnostics of its FI cells.
struct RowBuilder {
    lambda: f64,
    values: Vec<f64>,
    diagnostics: Vec<Diagnostic>,
}

impl RowBuilder {
    fn new(lambda: f64) -> Self {
        Self {
            lambda,
            values: vec![lambda],
            diagnostics: Vec::new(),
        }
    }

    fn value(&mut self, v: f64) -> &mut Self {
        self.values.push(v);
        self
    }

    fn fisher(&mut self, column: &'static str, f: FisherResult) -> &mut Self {
        self.derived(column, f.value, f)
    }

    /// A cell computed from the FI `source`, whose diagnostics it carries.
    fn derived(&mut self, column: &'static str, v: f64, source: FisherResult) -> &mut Self {
        self.diagnostics.push(Diagnostic {
            lambda: self.lambda,
            column,
            fisher: source,
        });
        self.value(v)
    }
}

fn analytic_fi(model: StateModel, meas: Measurement) -> Result<FisherResult> {
    fisher_information(&model, meas, DerivativeSpec::analytic())
}

fn figure_row(fig: FigureId, lambda: f64, o: &Overrides) -> Result<RowBuilder> {
    let eps = o.epsilon.unwrap_or(fig.default_epsilon());
    let p = ProtocolParams::new(lambda, o.eta(), eps)?;
    let thermal = StateModel::thermal(lambda)?;
    let sub = StateModel::subtracted(lambda)?;
    let add = StateModel::added(lambda)?;
    let acc = StateModel::realistic_accepted(p)?;
    let qfi_thermal = qfi_closed(&thermal)?;
    let mut row = RowBuilder::new(lambda);
    match fig {
        FigureId::Fig1 => {
            row.fisher("qfi_thermal", qfi_thermal)
                .fisher("qfi_ideal_sub", qfi_closed(&sub)?)
                .fisher(
                    "qfi_realistic",
                    fi_discrete(&acc, DerivativeSpec::analytic())?,
                );
        }
        FigureId::Fig2 | FigureId::Fig3 | FigureId::Fig4 => {
            let (meas, names) = match fig {
                FigureId::Fig2 => (
                    Measurement::Homodyne,
                    [
                        "fi_hom_thermal",
                        "fi_hom_sub",
                        "fi_hom_add",
                        "fi_hom_realistic",
                    ],
                ),
                FigureId::Fig3 => (
                    Measurement::HeterodyneRadial,
                    [
                        "fi_het_thermal",
                        "fi_het_sub",
                        "fi_het_add",
                        "fi_het_realistic",
                    ],
                ),
                _ => (
                    Measurement::on_off(eps)?,
                    [
                        "fi_onoff_thermal",
                        "fi_onoff_sub",
                        "fi_onoff_add",
                        "fi_onoff_realistic",
                    ],
                ),
            };
            for (name, model) in names.into_iter().zip([thermal, sub, add, acc]) {
                row.fisher(name, analytic_fi(model, meas)?);
            }
            if fig == FigureId::Fig4 {
                let tot =
                    total_information(&p, BranchMeasurement::both(Measurement::PhotonNumber))?;
                // The accepted branch is the only approximated term.
                row.derived("f_tot", tot.total, tot.accepted)
                    .value(convexity_bounds(&p).0);
            }
            row.fisher("qfi_thermal", qfi_thermal);
        }
        FigureId::Fig5 => {
            let het = Measurement::HeterodyneRadial;
            let tot = total_information(&p, BranchMeasurement::both(het))?;
            row.derived("ftot_het", tot.total, tot.accepted)
                .fisher("fi_het_thermal", analytic_fi(thermal, het)?);
        }
        FigureId::Fig6 => {
            let onoff = Measurement::on_off(eps)?;
            let tot = total_information(&p, BranchMeasurement::both(onoff))?;
            row.derived("ftot_onoff", tot.total, tot.accepted)
                .fisher("fi_onoff_thermal", analytic_fi(thermal, onoff)?)
                .fisher(
                    "fi_het_thermal",
                    analytic_fi(thermal, Measurement::HeterodyneRadial)?,
                );
        }
        FigureId::Fig7 => {
            let costs = o.costs()?;
            let b = rate_postselected_breakdown(
                &p,
                &costs,
                o.accepted.unwrap_or_default().measurement(),
            )?;
            row.derived("rate_ps", b.rate, b.accepted_fi)
                .value(rate_direct(lambda, &costs, qfi_thermal.value)?);
            if o.compact {
                row.value(b.compact_rate);
            }
        }
    }
    Ok(row)
}

fn assemble(
    header: Vec<&'static str>,
    grid: LambdaGrid,
    f: impl Fn(usize, f64) -> Result<RowBuilder> + Sync,
) -> Result<Table> {
    let built: Vec<RowBuilder> = grid
        .values()
        .into_par_iter()
        .enumerate()
        .map(|(i, l)| f(i, l))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(built.len());
    let mut diagnostics = Vec::new();
    for r in built {
        debug_assert_eq!(r.values.len(), header.len());
        if let Some(pos) = r.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Computation(format!(
                "non-finite value in column {} at lambda = {:?}",
                header[pos], r.lambda
            )));
        }
        rows.push(r.values);
        diagnostics.extend(r.diagnostics);
    }
    Ok(Table {
        header,
        rows,
        diagnostics,
    })
}

/// Dataset behind one of the seven figures.
pub fn run_figure(fig: FigureId, overrides: &Overrides) -> Result<Table> {
    assemble(fig.columns(overrides.compact), overrides.grid(), |_, l| {
        figure_row(fig, l, overrides)
    })
}

const ORACLE_COLUMNS: [&str; 4] = [
    "mc_p1",
    "mc_p1_se",
    "mc_accepted_mean",
    "mc_accepted_mean_se",
];

/// Custom sweep at herald efficiency `epsilon` (default 0.99).
///
/// With an oracle spec, every grid point also runs the protocol simulation
/// (seed offset by the grid index) and appends the empirical success
/// probability and accepted-branch mean with their standard errors.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    let o = &spec.overrides;
    let mut header = vec!["lambda"];
    header.extend_from_slice(match spec.quantity {
        SweepQuantity::TotalInformation(_) => &[
            "click_fi",
            "accepted_term",
            "rejected_term",
            "total",
            "lower_bound",
            "upper_bound",
        ][..],
        SweepQuantity::Rates => &["rate_ps", "rate_0", "rate_ps_compact"],
        SweepQuantity::Branches => &["p_success", "accepted_mean", "rejected_mean"],
    });
    if spec.oracle.is_some() {
        header.extend_from_slice(&ORACLE_COLUMNS);
    }
    let costs = o.costs()?;
    assemble(header, o.grid(), |i, lambda| {
        let p = ProtocolParams::new(lambda, o.eta(), o.epsilon.unwrap_or(0.99))?;
        let mut row = RowBuilder::new(lambda);
        match spec.quantity {
            SweepQuantity::TotalInformation(m) => {
                let t = total_information(&p, m)?;
                let (lo, hi) = convexity_bounds(&p);
                row.value(t.click_fi)
                    .derived("accepted_term", t.accepted_term, t.accepted)
                    .derived("rejected_term", t.rejected_term, t.rejected)
                    .value(t.total)
                    .value(lo)
                    .value(hi);
            }
            SweepQuantity::Rates => {
                let b = rate_postselected_breakdown(
                    &p,
                    &costs,
                    o.accepted.unwrap_or_default().measurement(),
                )?;
                let qfi = qfi_closed(&StateModel::thermal(lambda)?)?.value;
                row.derived("rate_ps", b.rate, b.accepted_fi)
                    .value(rate_direct(lambda, &costs, qfi)?)
                    .value(b.compact_rate);
            }
            SweepQuantity::Branches => {
                let acc = StateModel::realistic_accepted(p)?;
                row.value(p.success_probability())
                    .value(acc.mean_photon_number())
                    .value(p.rejected_mean());
            }
        }
        if let Some(oracle) = spec.oracle {
            let cfg = SimConfig::new(p, oracle.trials, oracle.seed.wrapping_add(i as u64))?;
            let report = simulate_protocol(&cfg)?;
            let (mean, se) = report.accepted_mean().ok_or_else(|| {
                Error::Computation(format!(
                    "only {} accepted trials at lambda = {lambda:?}; increase --trials",
                    report.n_accepted
                ))
            })?;
            row.value(report.empirical_p1)
                .value(report.p1_std_error())
                .value(mean)
                .value(se);
        }
        Ok(row)
    })
}
