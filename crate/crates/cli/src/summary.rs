//! The JSON run summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wgchain_core::analytic::RegimeReport;
use wgchain_core::dynamics::{Overlap, Propagator, RateFit};
use wgchain_core::emission::EnergyLedger;
use wgchain_core::spectral::SpectralGrid;

use crate::config::{Method, RunConfig};
use crate::fit::{JcFit, Oscillation};

/// Bumped whenever a CSV column or summary field changes meaning.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Log-slope of p over the first collective lifetime.
    pub early: Option<RateFit>,
    /// Log-slope of p over the second half of the run.
    pub late: Option<RateFit>,
    /// Rate of the fast component after removing the late exponential,
    /// relative to the late rate.
    pub fast_component: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub propagator: Propagator,
    pub eigen_condition: Option<f64>,
    pub max_balance_error: f64,
    /// max |p0 − pa|/p over the run.
    pub witness_p0_pa: f64,
    pub overlap: Option<Overlap>,
    pub spectral_grid: Option<SpectralGrid>,
    pub max_solve_residual: Option<f64>,
    pub profile_capture_left: Option<f64>,
    pub profile_capture_right: Option<f64>,
    pub profiles_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub seed: u64,
    pub ledger: EnergyLedger,
    pub early_rate: Option<f64>,
    pub late_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub format_version: u32,
    pub config: RunConfig,
    pub method_used: Method,
    pub regime: RegimeReport,
    pub rates: Rates,
    pub oscillation: Oscillation,
    pub jc_fit: Option<JcFit>,
    pub ledger: EnergyLedger,
    pub converged: bool,
    pub diagnostics: Diagnostics,
    pub members: Vec<MemberSummary>,
    /// Wall-clock seconds per stage; not part of the reproducible output.
    pub timings: BTreeMap<String, f64>,
}

/// Keeps finite values only.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
