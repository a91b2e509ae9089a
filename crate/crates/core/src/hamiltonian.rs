//! Non-Hermitian single-excitation Hamiltonian and its decay channels.

use std::f64::consts::PI;
use std::fmt::Write as _;

use faer::Mat;

use crate::error::{Error, Result};
use crate::model::{AtomArray, PhysParams};
use crate::C64;

/// Complex symmetric effective Hamiltonian in units of γ, measured from the
/// atomic resonance.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: Mat<C64>,
    pub gamma_wg_coh: f64,
    pub gamma_raman_guided: f64,
    pub gamma_ext: f64,
    /// Set when the exchange kernel was evaluated with k(δ) at `detuning`.
    pub retarded: bool,
    pub detuning: f64,
    pub free_space: bool,
}

impl EffectiveHamiltonian {
    /// Wraps an arbitrary matrix, with all rate labels zero.
    pub fn from_matrix(matrix: Mat<C64>) -> Self {
        Self {
            matrix,
            gamma_wg_coh: 0.0,
            gamma_raman_guided: 0.0,
            gamma_ext: 0.0,
            retarded: false,
            detuning: 0.0,
            free_space: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full decay matrix −2·Im(H).
    pub fn decay_matrix(&self) -> Mat<f64> {
        Mat::from_fn(self.dim(), self.dim(), |i, j| -2.0 * self.matrix[(i, j)].im)
    }

    /// CSV with columns `row,col,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let h = self.matrix[(i, j)];
                let _ = writeln!(out, "{},{},{},{}", i, j, h.re, h.im);
            }
        }
        out
    }
}

/// Guided exchange element −(i/2)Γ_wg·e^{iφ} for a pair at distance `d`.
pub fn guided_exchange(params: &PhysParams, d: f64, delta: f64) -> C64 {
    let phase = params.guided_phase(d, delta);
    C64::new(0.0, -0.5 * params.gamma_wg()) * C64::from_polar(1.0, phase)
}

/// Builds H at resonance (`probe_detuning = None`) or with the retarded
/// kernel k(δ) = k_wg + δ/v_g.
pub fn effective_hamiltonian(
    array: &AtomArray,
    params: &PhysParams,
    probe_detuning: Option<f64>,
) -> Result<EffectiveHamiltonian> {
    params.validate()?;
    let delta = probe_detuning.unwrap_or(0.0);
    if !delta.is_finite() {
        return Err(Error::Usage("probe detuning must be finite".into()));
    }
    let n = array.len();
    let z = &array.positions;
    let diag = C64::new(0.0, -0.5 * params.gamma_tot());
    let mut m = Mat::<C64>::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = diag;
        for b in 0..a {
            let h = guided_exchange(params, (z[a] - z[b]).abs(), delta);
            m[(a, b)] = h;
            m[(b, a)] = h;
        }
    }
    Ok(EffectiveHamiltonian {
        matrix: m,
        gamma_wg_coh: params.gamma_wg(),
        gamma_raman_guided: params.gamma_raman(),
        gamma_ext: params.gamma_ext,
        retarded: probe_detuning.is_some(),
        detuning: delta,
        free_space: false,
    })
}

/// Split of −2·Im(H) into guided-coherent, guided-Raman and external parts.
#[derive(Debug, Clone)]
pub struct DecayPartition {
    pub guided_coherent: Mat<f64>,
    pub raman_guided_rate: f64,
    pub external_rate: f64,
    /// Off-diagonal free-space decay, present when that coupling is enabled.
    pub external_offdiag: Option<Mat<f64>>,
    /// Wavenumber used for the guided Gram matrix and the directional fluxes.
    pub k: f64,
    pub gamma_wg: f64,
}

impl DecayPartition {
    /// Reassembles Γ^g + raman·I + ext·I (+ free-space part).
    pub fn total(&self) -> Mat<f64> {
        let n = self.guided_coherent.nrows();
        Mat::from_fn(n, n, |i, j| {
            let mut v = self.guided_coherent[(i, j)];
            if i == j {
                v += self.raman_guided_rate + self.external_rate;
            }
            if let Some(off) = &self.external_offdiag {
                v += off[(i, j)];
            }
            v
        })
    }

    /// Guided Gram matrix at an arbitrary wavenumber, used for directional
    /// bookkeeping when the kernel itself is frequency dependent.
    pub fn at_wavenumber(array: &AtomArray, params: &PhysParams, k: f64) -> Self {
        Self {
            guided_coherent: guided_gram(array, params.gamma_wg(), k),
            raman_guided_rate: params.gamma_raman(),
            external_rate: params.gamma_ext,
            external_offdiag: None,
            k,
            gamma_wg: params.gamma_wg(),
        }
    }
}

fn guided_gram(array: &AtomArray, gamma_wg: f64, k: f64) -> Mat<f64> {
    let z = &array.positions;
    let n = z.len();
    // cos(k z_a − k z_b) from precomputed phases keeps the Gram structure exact.
    let ph: Vec<(f64, f64)> = z
        .iter()
        .map(|&za| {
            let x = k * za / (2.0 * PI);
            (2.0 * PI * (x - x.floor())).sin_cos()
        })
        .collect();
    Mat::from_fn(n, n, |a, b| gamma_wg * (ph[a].1 * ph[b].1 + ph[a].0 * ph[b].0))
}

pub fn decay_partition(h: &EffectiveHamiltonian, array: &AtomArray, params: &PhysParams) -> Result<DecayPartition> {
    if h.detuning != 0.0 {
        return Err(Error::Unsupported(
            "decay partition is defined only for the resonant Hamiltonian".into(),
        ));
    }
    if h.dim() != array.len() {
        return Err(Error::Usage("Hamiltonian and array sizes differ".into()));
    }
    let external_offdiag = if h.free_space {
        let n = array.len();
        let z = &array.positions;
        let k0 = 2.0 * PI / params.lambda_0;
        Some(Mat::from_fn(n, n, |a, b| {
            if a == b {
                0.0
            } else {
                free_space_terms(k0 * (z[a] - z[b]).abs(), params.gamma).1
            }
        }))
    } else {
        None
    };
    let mut part = DecayPartition::at_wavenumber(array, params, params.k_wg());
    part.external_offdiag = external_offdiag;
    Ok(part)
}

/// Scalar perpendicular-dipole free-space terms `(J, Γ^fs)` at ξ = k₀|z|.
pub fn free_space_terms(xi: f64, gamma: f64) -> (f64, f64) {
    let (s, c) = xi.sin_cos();
    let x2 = xi * xi;
    let x3 = x2 * xi;
    let g = 1.5 * gamma * (s / xi + c / x2 - s / x3);
    let j = 0.75 * gamma * (-c / xi + s / x2 + c / x3);
    (j, g)
}

/// Adds free-space dipole-dipole exchange J − (i/2)Γ^fs to the off-diagonals.
pub fn add_free_space_coupling(
    h: &EffectiveHamiltonian,
    array: &AtomArray,
    params: &PhysParams,
) -> Result<EffectiveHamiltonian> {
    if h.detuning != 0.0 {
        return Err(Error::Unsupported(
            "free-space coupling is defined only for the resonant Hamiltonian".into(),
        ));
    }
    if h.dim() != array.len() {
        return Err(Error::Usage("Hamiltonian and array sizes differ".into()));
    }
    let floor = params.min_separation();
    let k0 = 2.0 * PI / params.lambda_0;
    let z = &array.positions;
    let mut out = h.clone();
    for a in 0..z.len() {
        for b in 0..a {
            let d = (z[a] - z[b]).abs();
            if d < floor {
                return Err(Error::Geometry(format!(
                    "atoms {b} and {a} are {d} apart, below the floor {floor}"
                )));
            }
            let (j, g) = free_space_terms(k0 * d, params.gamma);
            let add = C64::new(j, -0.5 * g);
            out.matrix[(a, b)] += add;
            out.matrix[(b, a)] += add;
        }
    }
    out.free_space = true;
    Ok(out)
}
