//! Directional guided spectra, outgoing pulse profiles and the energy ledger.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{populations, AmplitudeTrajectory, ChannelFluxes, ProbabilitySeries};
use crate::error::{Error, Result};
use crate::model::{AtomArray, PhysParams, StateVector};
use crate::spectral::{cumulative_energy, synthesize, PoleExpansion, PoleTerm, ResolventSweep, SpectralGrid};
use crate::C64;

/// Default number of samples of a spatial profile.
pub const DEFAULT_PROFILE_SAMPLES: usize = 4096;
/// Fraction of the spectral weight a profile grid must capture.
pub const CAPTURE_THRESHOLD: f64 = 0.99;
/// Largest accepted gap between the spectral and time-domain ledgers.
pub const LEDGER_DISCREPANCY_LIMIT: f64 = 1e-2;
/// Largest accepted deviation of the ledger sum from one.
pub const LEDGER_BALANCE_LIMIT: f64 = 3e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Towards −z, referenced to the first atom.
    Left,
    /// Towards +z, referenced to the last atom.
    Right,
}

/// M(δ) on the spectral grid together with its analytic leading terms.
#[derive(Debug, Clone)]
pub struct EmissionSpectrum {
    pub direction: Direction,
    pub grid: SpectralGrid,
    pub values: Vec<C64>,
    pub reference: PoleExpansion,
    /// Exit plane the phases are referenced to.
    pub z_ref: f64,
}

impl EmissionSpectrum {
    /// ∫|M|²dδ/2π. The analytic reference is integrated exactly (in the
    /// time domain); only the remainder |M|² − |M_ref|² is summed on the grid.
    pub fn weight(&self) -> f64 {
        let dd = self.grid.spacing();
        let remainder: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(j, m)| m.norm_sqr() - self.reference.frequency(self.grid.delta(j)).norm_sqr())
            .sum::<f64>()
            * dd;
        remainder / (2.0 * std::f64::consts::PI) + self.reference.energy()
    }

    /// Power-weighted mean detuning.
    pub fn centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (j, m) in self.values.iter().enumerate() {
            let w = m.norm_sqr();
            num += w * self.grid.delta(j);
            den += w;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

/// M±(δ) = √(Γ_wg/2)·Σ_a e^{ik(δ)d_a}·x_a(δ), d_a the distance from atom a
/// to the exit plane on the emission side.
pub fn emission_spectrum(
    sweep: &ResolventSweep,
    array: &AtomArray,
    params: &PhysParams,
    direction: Direction,
) -> Result<EmissionSpectrum> {
    let n = array.len();
    if sweep.n_atoms() != n || sweep.slices.len() != sweep.grid.n_points {
        return Err(Error::Usage("resolvent sweep does not match the array or its grid".into()));
    }
    let z = &array.positions;
    let z_ref = match direction {
        Direction::Right => z[n - 1],
        Direction::Left => z[0],
    };
    let dist: Vec<f64> = z.iter().map(|&za| (za - z_ref).abs()).collect();
    let amp = (0.5 * params.gamma_wg()).sqrt();
    let values = sweep
        .slices
        .iter()
        .map(|s| {
            let probe = match sweep.kernel {
                crate::spectral::Kernel::Retarded => s.delta,
                crate::spectral::Kernel::Instantaneous => 0.0,
            };
            amp * s
                .x
                .iter()
                .zip(&dist)
                .map(|(x, &d)| C64::from_polar(1.0, params.guided_phase(d, probe)) * x)
                .sum::<C64>()
        })
        .collect();
    let mut terms = Vec::new();
    for (a, &d) in dist.iter().enumerate() {
        let phase = amp * C64::from_polar(1.0, params.guided_phase(d, 0.0));
        let tau = sweep.delay(d);
        for t in sweep.atom_reference(a).terms {
            terms.push(PoleTerm {
                coef: t.coef * phase,
                delay: t.delay + tau,
                order: t.order,
            });
        }
    }
    Ok(EmissionSpectrum {
        direction,
        grid: sweep.grid,
        values,
        reference: PoleExpansion {
            rate: params.gamma_tot(),
            terms,
        }
        .compact(),
        z_ref,
    })
}

/// Outgoing amplitude α(u) at the exit plane, u in units of 1/γ.
pub fn outgoing_amplitude(spectrum: &EmissionSpectrum, times: &[f64]) -> Result<Vec<C64>> {
    synthesize(&spectrum.values, &spectrum.reference, &spectrum.grid, times)
}

/// ∫_0^t|α_out|² at each of the increasing `times`.
pub fn outgoing_energy(spectrum: &EmissionSpectrum, times: &[f64]) -> Result<Vec<f64>> {
    cumulative_energy(&spectrum.values, &spectrum.reference, &spectrum.grid, times)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialProfile {
    /// Distance travelled past the exit plane, in units of v_g/γ.
    pub z: Vec<f64>,
    pub alpha2: Vec<f64>,
    /// ∫|α|²dz over the grid.
    pub energy: f64,
    /// `energy` over the spectral weight.
    pub captured: f64,
    pub complete: bool,
}

/// `n` uniform samples on [0, z_max].
pub fn uniform_z_grid(z_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| z_max * i as f64 / (n - 1) as f64).collect()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (yw[0] + yw[1]) * (xw[1] - xw[0]))
        .sum()
}

/// |α(z)|² on `z_grid`; a pulse leaving at time u sits at z = v_g·u.
pub fn spatial_profile(spectrum: &EmissionSpectrum, z_grid: &[f64]) -> Result<SpatialProfile> {
    if z_grid.windows(2).any(|w| w[1] <= w[0]) || z_grid.iter().any(|z| *z < 0.0) {
        return Err(Error::Usage("z grid must be non-negative and strictly increasing".into()));
    }
    let alpha = outgoing_amplitude(spectrum, z_grid)?;
    let alpha2: Vec<f64> = alpha.iter().map(|a| a.norm_sqr()).collect();
    let energy = trapezoid(z_grid, &alpha2);
    let weight = spectrum.weight();
    let captured = if weight > 0.0 { energy / weight } else { 1.0 };
    Ok(SpatialProfile {
        z: z_grid.to_vec(),
        alpha2,
        energy,
        captured,
        complete: captured >= CAPTURE_THRESHOLD,
    })
}

/// CSV with columns `z_over_vg_per_gamma,alpha2_left,alpha2_right`.
pub fn profiles_csv(left: &SpatialProfile, right: &SpatialProfile) -> String {
    let mut out = String::from("z_over_vg_per_gamma,alpha2_left,alpha2_right\n");
    for i in 0..left.z.len().min(right.z.len()) {
        let _ = writeln!(out, "{},{},{}", left.z[i], left.alpha2[i], right.alpha2[i]);
    }
    out
}

/// Probability series of a synthesized trajectory; the guided energies are
/// the outgoing fluxes |α±|² at the two exit planes.
pub fn series_from_outgoing(
    traj: &AmplitudeTrajectory,
    psi0: &StateVector,
    array: &AtomArray,
    params: &PhysParams,
    left: &EmissionSpectrum,
    right: &EmissionSpectrum,
) -> Result<ProbabilitySeries> {
    if traj.n_atoms() != array.len() || psi0.len() != array.len() {
        return Err(Error::Usage("trajectory, state and array sizes differ".into()));
    }
    let (p, p0, pa) = populations(traj, psi0, array);
    let fl = ChannelFluxes {
        left: vec![0.0; p.len()],
        right: vec![0.0; p.len()],
        raman: p.iter().map(|x| params.gamma_raman() * x).collect(),
        ext: p.iter().map(|x| params.gamma_ext * x).collect(),
    };
    let mut series = ProbabilitySeries::from_fluxes(traj.t_grid.clone(), p, p0, pa, &fl);
    // The guided fluxes jump at the retarded arrival times, which a trapezoid
    // rule on the output grid resolves poorly.
    series.e_left = outgoing_energy(left, &traj.t_grid)?;
    series.e_right = outgoing_energy(right, &traj.t_grid)?;
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub p_left: f64,
    pub p_right: f64,
    pub p_raman: f64,
    pub p_ext: f64,
    pub residual: f64,
    /// |sum − 1|.
    pub balance_error: f64,
    /// Gap between spectral and time-domain guided energies.
    pub discrepancy: f64,
    pub converged: bool,
}

impl EnergyLedger {
    pub fn sum(&self) -> f64 {
        self.p_left + self.p_right + self.p_raman + self.p_ext + self.residual
    }
}

/// Guided energies from the spectra, losses and residual from the series.
pub fn energy_ledger(series: &ProbabilitySeries, left: &EmissionSpectrum, right: &EmissionSpectrum) -> EnergyLedger {
    let last = series.len() - 1;
    let p_left = left.weight();
    let p_right = right.weight();
    let p_raman = series.e_raman[last];
    let p_ext = series.e_ext[last];
    let residual = series.p[last];
    let balance_error = (p_left + p_right + p_raman + p_ext + residual - 1.0).abs();
    let discrepancy = (p_left - series.e_left[last]).abs() + (p_right - series.e_right[last]).abs();
    EnergyLedger {
        p_left,
        p_right,
        p_raman,
        p_ext,
        residual,
        balance_error,
        discrepancy,
        converged: discrepancy <= LEDGER_DISCREPANCY_LIMIT && balance_error <= LEDGER_BALANCE_LIMIT,
    }
}

/// Everything a run reports about the guided emission.
#[derive(Debug, Clone)]
pub struct EmissionRecord {
    pub left: EmissionSpectrum,
    pub right: EmissionSpectrum,
    pub profile_left: SpatialProfile,
    pub profile_right: SpatialProfile,
    pub ledger: EnergyLedger,
}
