//! Markovian evolution and the probability / emitted-energy bookkeeping.

use std::fmt::Write as _;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{DecayPartition, EffectiveHamiltonian};
use crate::linalg;
use crate::model::{AtomArray, StateVector};
use crate::C64;

/// Eigenvector condition number above which evolution switches to the
/// stepwise exponential.
pub const CONDITION_THRESHOLD: f64 = 1e8;

/// Default number of log-spaced samples after t = 0.
pub const DEFAULT_TIME_SAMPLES: usize = 2048;

/// `t = 0` followed by `n` log-spaced samples from `t_first` to `t_max`.
pub fn log_time_grid(t_first: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_first > 0.0 && t_max > t_first && t_first.is_finite() && t_max.is_finite()) {
        return Err(Error::Usage(format!(
            "log grid needs 0 < t_first < t_max, got {t_first} and {t_max}"
        )));
    }
    if n < 2 {
        return Err(Error::Usage("log grid needs at least two samples".into()));
    }
    let r = (t_max / t_first).ln() / (n - 1) as f64;
    let mut t = Vec::with_capacity(n + 1);
    t.push(0.0);
    t.extend((0..n).map(|i| t_first * (r * i as f64).exp()));
    t[n] = t_max;
    Ok(t)
}

/// Default grid resolving the collective stage (`gamma_fast`) and the
/// external-loss tail up to 12/γ_ext.
pub fn default_time_grid(gamma_fast: f64, gamma_ext: f64) -> Result<Vec<f64>> {
    log_time_grid(0.01 / gamma_fast, 12.0 / gamma_ext, DEFAULT_TIME_SAMPLES)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Propagator {
    Eigen,
    Exponential,
    Spectral,
}

/// Amplitudes `amplitudes[i][a]` = b_a(t_i).
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub t_grid: Vec<f64>,
    pub amplitudes: Vec<Vec<C64>>,
    pub propagator: Propagator,
    /// Eigenvector condition number, when the eigen route was attempted.
    pub condition: Option<f64>,
}

impl AmplitudeTrajectory {
    pub fn n_atoms(&self) -> usize {
        self.amplitudes.first().map_or(0, |b| b.len())
    }

    pub fn norms(&self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|b| b.iter().map(|c| c.norm_sqr()).sum())
            .collect()
    }

    /// Largest absolute amplitude difference against another trajectory on
    /// the same grid.
    pub fn max_abs_diff(&self, other: &AmplitudeTrajectory) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

fn check_time_grid(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::Usage("empty time grid".into()));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::Usage("time grid has non-finite entries".into()));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_inputs(h: &EffectiveHamiltonian, psi0: &StateVector, t_grid: &[f64]) -> Result<()> {
    if h.retarded && h.detuning != 0.0 {
        return Err(Error::Usage("Markovian evolution needs the resonant Hamiltonian".into()));
    }
    if h.dim() != psi0.len() {
        return Err(Error::Usage(format!(
            "Hamiltonian is {}x{} but the state has {} entries",
            h.dim(),
            h.dim(),
            psi0.len()
        )));
    }
    check_time_grid(t_grid)?;
    if t_grid[0] != 0.0 {
        return Err(Error::Usage("time grid must start at 0".into()));
    }
    let n = h.dim();
    for j in 0..n {
        for i in 0..n {
            if !h.matrix[(i, j)].is_finite() {
                return Err(Error::Numerical(format!("non-finite Hamiltonian entry ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// b(t) = exp(−iHt)ψ0 on `t_grid`.
///
/// Uses the eigendecomposition when the eigenvector matrix is well
/// conditioned and the stepwise exponential otherwise.
pub fn evolve_markovian(h: &EffectiveHamiltonian, psi0: &StateVector, t_grid: &[f64]) -> Result<AmplitudeTrajectory> {
    check_inputs(h, psi0, t_grid)?;
    let eig = match linalg::eigen(&h.matrix) {
        Ok(e) if e.condition <= CONDITION_THRESHOLD => e,
        Ok(e) => {
            let mut traj = evolve_exponential(h, psi0, t_grid)?;
            traj.condition = Some(e.condition);
            return Ok(traj);
        }
        Err(_) => return evolve_exponential(h, psi0, t_grid),
    };
    let c = linalg::matvec(&eig.inverse, &psi0.amplitudes);
    let n = h.dim();
    let amplitudes = t_grid
        .iter()
        .map(|&t| {
            let w: Vec<C64> = eig
                .values
                .iter()
                .zip(&c)
                .map(|(lam, ck)| ck * (C64::new(0.0, -t) * lam).exp())
                .collect();
            let mut b = linalg::matvec(&eig.vectors, &w);
            if t == 0.0 {
                b.copy_from_slice(&psi0.amplitudes[..n]);
            }
            b
        })
        .collect::<Vec<_>>();
    if amplitudes.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("eigen propagation produced non-finite amplitudes".into()));
    }
    Ok(AmplitudeTrajectory {
        t_grid: t_grid.to_vec(),
        amplitudes,
        propagator: Propagator::Eigen,
        condition: Some(eig.condition),
    })
}

/// exp(−iHΔt)v by scaling and a truncated Taylor series on the vector.
fn expmv(h: &Mat<C64>, h_norm: f64, dt: f64, v: &[C64]) -> Vec<C64> {
    let steps = ((h_norm * dt) / 0.5).ceil().max(1.0) as usize;
    let tau = dt / steps as f64;
    let scale = C64::new(0.0, -tau);
    let mut out = v.to_vec();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        let base = linalg::vec_norm(&acc).max(f64::MIN_POSITIVE);
        for k in 1..80 {
            term = linalg::matvec(h, &term);
            let f = scale / k as f64;
            for x in term.iter_mut() {
                *x *= f;
            }
            for (a, x) in acc.iter_mut().zip(&term) {
                *a += x;
            }
            if linalg::vec_norm(&term) <= 1e-17 * base {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Stepwise exponential propagation, independent of the eigensolver.
pub fn evolve_exponential(h: &EffectiveHamiltonian, psi0: &StateVector, t_grid: &[f64]) -> Result<AmplitudeTrajectory> {
    check_inputs(h, psi0, t_grid)?;
    let h_norm = linalg::norm1(&h.matrix);
    let mut amplitudes = Vec::with_capacity(t_grid.len());
    let mut b = psi0.amplitudes.clone();
    amplitudes.push(b.clone());
    for w in t_grid.windows(2) {
        b = expmv(&h.matrix, h_norm, w[1] - w[0], &b);
        amplitudes.push(b.clone());
    }
    if amplitudes.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("exponential propagation produced non-finite amplitudes".into()));
    }
    Ok(AmplitudeTrajectory {
        t_grid: t_grid.to_vec(),
        amplitudes,
        propagator: Propagator::Exponential,
        condition: None,
    })
}

/// Cumulative integral of samples `f` on the non-uniform grid `t`.
///
/// Each interval is integrated with the quadratic through its two end points
/// and one neighbour; where both neighbours exist the two quadratics are
/// averaged.
pub fn cumulative_integral(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (f[0] + f[1]) * (t[1] - t[0]);
        return out;
    }
    // Integral over [a, b] of the quadratic through (x0,f0),(x1,f1),(x2,f2).
    let quad = |x: [f64; 3], y: [f64; 3], a: f64, b: f64| -> f64 {
        let d1 = (y[1] - y[0]) / (x[1] - x[0]);
        let d2 = ((y[2] - y[1]) / (x[2] - x[1]) - d1) / (x[2] - x[0]);
        let h1 = x[1] - x[0];
        let prim = |u: f64| y[0] * u + 0.5 * d1 * u * u + d2 * (u * u * u / 3.0 - 0.5 * h1 * u * u);
        prim(b - x[0]) - prim(a - x[0])
    };
    for i in 0..n - 1 {
        let mut acc = 0.0;
        let mut cnt = 0.0;
        if i >= 1 {
            acc += quad([t[i - 1], t[i], t[i + 1]], [f[i - 1], f[i], f[i + 1]], t[i], t[i + 1]);
            cnt += 1.0;
        }
        if i + 2 < n {
            acc += quad([t[i], t[i + 1], t[i + 2]], [f[i], f[i + 1], f[i + 2]], t[i], t[i + 1]);
            cnt += 1.0;
        }
        out[i + 1] = out[i] + acc / cnt;
    }
    out
}

/// Probabilities and cumulative emitted energy per channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilitySeries {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub p0: Vec<f64>,
    pub pa: Vec<f64>,
    pub e_left: Vec<f64>,
    pub e_right: Vec<f64>,
    pub e_raman: Vec<f64>,
    pub e_ext: Vec<f64>,
}

/// Instantaneous channel fluxes sampled on a time grid.
#[derive(Debug, Clone, Default)]
pub struct ChannelFluxes {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub raman: Vec<f64>,
    pub ext: Vec<f64>,
}

impl ProbabilitySeries {
    pub fn from_fluxes(t: Vec<f64>, p: Vec<f64>, p0: Vec<f64>, pa: Vec<f64>, fluxes: &ChannelFluxes) -> Self {
        let e_left = cumulative_integral(&t, &fluxes.left);
        let e_right = cumulative_integral(&t, &fluxes.right);
        let e_raman = cumulative_integral(&t, &fluxes.raman);
        let e_ext = cumulative_integral(&t, &fluxes.ext);
        Self {
            t,
            p,
            p0,
            pa,
            e_left,
            e_right,
            e_raman,
            e_ext,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn observable(&self, obs: Observable) -> &[f64] {
        match obs {
            Observable::P => &self.p,
            Observable::P0 => &self.p0,
            Observable::Pa => &self.pa,
        }
    }

    /// |p + ΣE − 1| at sample `i`.
    pub fn balance_error_at(&self, i: usize) -> f64 {
        (self.p[i] + self.e_left[i] + self.e_right[i] + self.e_raman[i] + self.e_ext[i] - 1.0).abs()
    }

    pub fn max_balance_error(&self) -> f64 {
        (0..self.len()).map(|i| self.balance_error_at(i)).fold(0.0, f64::max)
    }

    /// CSV with columns `t,p,p0,pa,E_left,E_right,E_raman,E_ext`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,p0,pa,E_left,E_right,E_raman,E_ext\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.t[i],
                self.p[i],
                self.p0[i],
                self.pa[i],
                self.e_left[i],
                self.e_right[i],
                self.e_raman[i],
                self.e_ext[i]
            );
        }
        out
    }
}

/// p, p0 and pa of a trajectory.
pub fn populations(traj: &AmplitudeTrajectory, psi0: &StateVector, array: &AtomArray) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = Vec::with_capacity(traj.t_grid.len());
    let mut p0 = Vec::with_capacity(traj.t_grid.len());
    let mut pa = Vec::with_capacity(traj.t_grid.len());
    for b in &traj.amplitudes {
        p.push(b.iter().map(|c| c.norm_sqr()).sum());
        p0.push(psi0.inner(b).norm_sqr());
        pa.push(b[array.emitter_indices.clone()].iter().map(|c| c.norm_sqr()).sum());
    }
    (p, p0, pa)
}

/// Φ₊ (right-going) and Φ₋ (left-going) for one amplitude vector.
pub fn directional_fluxes(b: &[C64], phases: &[C64], gamma_wg: f64) -> (f64, f64) {
    let mut right = C64::new(0.0, 0.0);
    let mut left = C64::new(0.0, 0.0);
    for (x, e) in b.iter().zip(phases) {
        right += e.conj() * x;
        left += e * x;
    }
    (0.5 * gamma_wg * right.norm_sqr(), 0.5 * gamma_wg * left.norm_sqr())
}

/// e^{i k z_a} with k·z reduced modulo 2π.
pub fn plane_wave(array: &AtomArray, k: f64) -> Vec<C64> {
    array
        .positions
        .iter()
        .map(|&z| {
            let x = k * z / (2.0 * std::f64::consts::PI);
            C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (x - x.floor()))
        })
        .collect()
}

pub fn probabilities(
    traj: &AmplitudeTrajectory,
    psi0: &StateVector,
    array: &AtomArray,
    partition: &DecayPartition,
) -> Result<ProbabilitySeries> {
    let n = array.len();
    if psi0.len() != n || partition.guided_coherent.nrows() != n || traj.n_atoms() != n {
        return Err(Error::Usage(format!(
            "dimension mismatch: array {n}, state {}, partition {}, trajectory {}",
            psi0.len(),
            partition.guided_coherent.nrows(),
            traj.n_atoms()
        )));
    }
    let (p, p0, pa) = populations(traj, psi0, array);
    let phases = plane_wave(array, partition.k);
    let mut fl = ChannelFluxes::default();
    for (b, &pt) in traj.amplitudes.iter().zip(&p) {
        let (r, l) = directional_fluxes(b, &phases, partition.gamma_wg);
        fl.right.push(r);
        fl.left.push(l);
        fl.raman.push(partition.raman_guided_rate * pt);
        let mut ext = partition.external_rate * pt;
        if let Some(off) = &partition.external_offdiag {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += off[(i, j)] * (b[i].conj() * b[j]).re;
                }
            }
            ext += acc;
        }
        fl.ext.push(ext);
    }
    Ok(ProbabilitySeries::from_fluxes(traj.t_grid.clone(), p, p0, pa, &fl))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    P,
    P0,
    Pa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    /// ln of the fitted prefactor.
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
}

/// Least-squares line through ln y over `window` (inclusive).
pub fn fit_log_slope(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(&ti, _)| ti >= window.0 && ti <= window.1)
        .map(|(&ti, &yi)| (ti, yi))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Usage(format!(
            "fit window [{}, {}] holds {} samples, need at least 3",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, yi)| !(yi > 0.0)) {
        return Err(Error::Usage("log fit needs positive values over the window".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, yv) in &pts {
        let dx = x - mx;
        let dy = yv.ln() - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Usage("fit window has no time extent".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        rate: -slope,
        intercept: my - slope * mx,
        r2,
        samples: pts.len(),
    })
}

pub fn fit_decay_rate(series: &ProbabilitySeries, window: (f64, f64), obs: Observable) -> Result<RateFit> {
    fit_log_slope(&series.t, series.observable(obs), window)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub value: f64,
    /// More than one eigenvalue shares the largest decay rate.
    pub degenerate: bool,
    pub cluster_size: usize,
    pub decay_rate: f64,
}

/// Relative tolerance for grouping eigenvalues with the largest decay rate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Biorthogonal weight of ψ0 on the most superradiant eigenmode(s).
///
/// For complex symmetric H the left eigenvector is vᵀ, so the projector is
/// P = v vᵀ/(vᵀv) and the reported value is |ψ0† P ψ0|.
pub fn superradiant_overlap(h: &EffectiveHamiltonian, psi0: &StateVector) -> Result<Overlap> {
    if h.dim() != psi0.len() {
        return Err(Error::Usage("Hamiltonian and state sizes differ".into()));
    }
    let eig = linalg::eigen(&h.matrix)?;
    let rates: Vec<f64> = eig.values.iter().map(|l| -2.0 * l.im).collect();
    let max_rate = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = DEGENERACY_TOLERANCE * max_rate.abs().max(f64::MIN_POSITIVE);
    let cluster: Vec<usize> = (0..rates.len()).filter(|&k| (rates[k] - max_rate).abs() <= tol).collect();
    let n = h.dim();
    let mut acc = C64::new(0.0, 0.0);
    for &k in &cluster {
        let v: Vec<C64> = (0..n).map(|i| eig.vectors[(i, k)]).collect();
        let vtv: C64 = v.iter().map(|x| x * x).sum();
        let right = psi0.inner(&v);
        let left: C64 = v.iter().zip(&psi0.amplitudes).map(|(x, y)| x * y).sum();
        acc += right * left / vtv;
    }
    Ok(Overlap {
        value: acc.norm(),
        degenerate: cluster.len() > 1,
        cluster_size: cluster.len(),
        decay_rate: max_rate,
    })
}
