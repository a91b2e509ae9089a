//! Frequency-resolved resolvent and Fourier synthesis of the time evolution.
//!
//! The amplitudes follow from b(t) = (i/2π)∫ x(δ) e^{−iδt} dδ with
//! x(δ) = [δ − H(δ)]⁻¹ψ0. Before the discrete transform the first two terms
//! of the expansion of x in powers of H_off/D, D = δ + iΓ/2, are removed and
//! transformed analytically, so the sampled remainder decays like 1/δ³.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dynamics::{AmplitudeTrajectory, Propagator};
use crate::error::{Error, Result};
use crate::hamiltonian::guided_exchange;
use crate::linalg;
use crate::model::{AtomArray, PhysParams, StateVector};
use crate::C64;

/// Largest allowed number of grid points.
pub const MAX_GRID_POINTS: usize = 1 << 20;
/// Half-span of the grid in units of the fastest rate.
pub const SPAN_FACTOR: f64 = 20.0;
/// Ratio between the alias-free window and the longest time of interest.
pub const WINDOW_FACTOR: f64 = 8.0;
/// Zero-padding factor of the synthesis transform.
pub const PAD_FACTOR: usize = 8;
/// Default tapered fraction at each end of the grid.
pub const DEFAULT_TAPER: f64 = 0.1;
/// Relative residual accepted for every resolvent solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    None,
    /// Raised-cosine taper over this fraction of the points at each end.
    RaisedCosine { fraction: f64 },
}

/// Uniform detuning samples δ_j = delta_min + j·Δ, j < n_points, with
/// Δ = (delta_max − delta_min)/n_points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
    pub window: Window,
}

impl SpectralGrid {
    pub fn spacing(&self) -> f64 {
        (self.delta_max - self.delta_min) / self.n_points as f64
    }

    pub fn delta(&self, j: usize) -> f64 {
        self.delta_min + j as f64 * self.spacing()
    }

    pub fn deltas(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.delta(j)).collect()
    }

    /// Period 2π/Δ of the discrete transform.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    /// Times with |t| up to this value are free of aliasing.
    pub fn time_limit(&self) -> f64 {
        0.5 * self.period()
    }

    pub fn weight(&self, j: usize) -> f64 {
        match self.window {
            Window::None => 1.0,
            Window::RaisedCosine { fraction } => {
                let edge = (fraction * self.n_points as f64).max(1.0);
                let s = j.min(self.n_points - 1 - j) as f64 / edge;
                if s >= 1.0 {
                    1.0
                } else {
                    0.5 * (1.0 - (PI * s).cos())
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_max > self.delta_min) || !self.delta_min.is_finite() || !self.delta_max.is_finite() {
            return Err(Error::Usage("spectral grid bounds are invalid".into()));
        }
        if !self.n_points.is_power_of_two() || self.n_points < 4 {
            return Err(Error::Usage(format!(
                "spectral grid size must be a power of two >= 4, got {}",
                self.n_points
            )));
        }
        if let Window::RaisedCosine { fraction } = self.window {
            if !(0.0..0.5).contains(&fraction) {
                return Err(Error::Usage(format!("taper fraction must lie in [0, 0.5), got {fraction}")));
            }
        }
        Ok(())
    }
}

/// Rate and length scales that set the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridScales {
    pub gamma_c: f64,
    pub gamma_m: f64,
    /// Longest propagation length in the array.
    pub length: f64,
}

/// Smallest power-of-two grid that spans ±20·max(Γ_C, Γ_M) with spacing
/// at most 2π/(8·max(t_max, 2L/v_g)).
pub fn build_grid(params: &PhysParams, scales: GridScales, t_max: f64) -> Result<SpectralGrid> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Usage(format!("t_max must be positive, got {t_max}")));
    }
    let fast = scales.gamma_c.max(scales.gamma_m);
    if !(fast > 0.0 && fast.is_finite()) || !(scales.length >= 0.0) {
        return Err(Error::Usage("grid scales must be positive".into()));
    }
    let half = SPAN_FACTOR * fast;
    let horizon = t_max.max(2.0 * scales.length / params.v_g);
    let max_spacing = 2.0 * PI / (WINDOW_FACTOR * horizon);
    let needed = (2.0 * half / max_spacing).ceil() as usize;
    let n = needed.max(4).next_power_of_two();
    if n > MAX_GRID_POINTS {
        return Err(Error::Resolution(format!(
            "spectral grid needs {n} points (cap {MAX_GRID_POINTS}); reduce t_max or the system size"
        )));
    }
    Ok(SpectralGrid {
        delta_min: -half,
        delta_max: half,
        n_points: n,
        window: Window::RaisedCosine { fraction: DEFAULT_TAPER },
    })
}

/// Whether the exchange kernel carries the δ/v_g retardation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Retarded,
    Instantaneous,
}

#[derive(Debug, Clone)]
pub struct ResolventSlice {
    pub delta: f64,
    pub x: Vec<C64>,
}

/// One term c·e^{iδτ}/Dᵐ of an analytic reference, m ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub coef: C64,
    pub delay: f64,
    pub order: u8,
}

/// Sum of pole terms sharing D = δ + i·rate/2.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoleExpansion {
    pub rate: f64,
    pub terms: Vec<PoleTerm>,
}

impl PoleExpansion {
    pub fn frequency(&self, delta: f64) -> C64 {
        let d_inv = 1.0 / C64::new(delta, 0.5 * self.rate);
        self.terms
            .iter()
            .map(|p| {
                let ph = if p.delay == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(1.0, delta * p.delay)
                };
                match p.order {
                    1 => p.coef * ph * d_inv,
                    _ => p.coef * ph * d_inv * d_inv,
                }
            })
            .sum()
    }

    /// Transform (i/2π)∫(·)e^{−iδt}dδ of [`Self::frequency`].
    pub fn time(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .filter(|p| t >= p.delay)
            .map(|p| {
                let s = t - p.delay;
                let env = (-0.5 * self.rate * s).exp();
                match p.order {
                    1 => p.coef * env,
                    _ => p.coef * C64::new(0.0, -s) * env,
                }
            })
            .sum()
    }

    /// `time` at increasing `times`, in one sweep over the sorted terms.
    pub fn time_sorted(&self, times: &[f64]) -> Vec<C64> {
        let g = 0.5 * self.rate;
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let zero = C64::new(0.0, 0.0);
        // Order 1: Σ c e^{−g(t−τ)}; order 2: Σ c e^{−g(t−τ)} and Σ c τ e^{−g(t−τ)}.
        let (mut s1, mut s2, mut s2t) = (zero, zero, zero);
        let mut next = 0;
        let mut now = f64::NEG_INFINITY;
        times
            .iter()
            .map(|&t| {
                let mut advance = |to: f64, s1: &mut C64, s2: &mut C64, s2t: &mut C64| {
                    if now.is_finite() {
                        let d = (-g * (to - now)).exp();
                        *s1 *= d;
                        *s2 *= d;
                        *s2t *= d;
                    }
                    now = to;
                };
                while next < terms.len() && terms[next].delay <= t {
                    let p = terms[next];
                    advance(p.delay, &mut s1, &mut s2, &mut s2t);
                    match p.order {
                        1 => s1 += p.coef,
                        _ => {
                            s2 += p.coef;
                            s2t += p.coef * p.delay;
                        }
                    }
                    next += 1;
                }
                advance(t, &mut s1, &mut s2, &mut s2t);
                s1 + C64::new(0.0, -1.0) * (s2 * t - s2t)
            })
            .collect()
    }

    /// ∫|time(t)|²dt in closed form.
    ///
    /// Pair integrals factor as e^{−Γ(τ_l−τ_k)/2}·(a + b·(τ_l−τ_k)), so a
    /// sweep over the delay-sorted terms with decaying running sums gives
    /// the double sum in O(T log T).
    pub fn energy(&self) -> f64 {
        let g = 0.5 * self.rate;
        let w = 2.0 * g;
        let i = C64::new(0.0, 1.0);
        // (a, b) of the pair integral for (earlier order, later order).
        let coeffs = |ok: u8, ol: u8| -> (C64, C64) {
            match (ok, ol) {
                (1, 1) => (C64::from(1.0 / w), C64::from(0.0)),
                (1, _) => (i / (w * w), C64::from(0.0)),
                (_, 1) => (-i / (w * w), -i / w),
                _ => (C64::from(2.0 / (w * w * w)), C64::from(1.0 / (w * w))),
            }
        };
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        // s0[o] = Σ c_k e^{−g(τ − τ_k)}, s1[o] = Σ c_k τ_k e^{−g(τ − τ_k)}.
        let mut s0 = [C64::new(0.0, 0.0); 2];
        let mut s1 = [C64::new(0.0, 0.0); 2];
        let mut tau = terms.first().map_or(0.0, |t| t.delay);
        let mut total = 0.0;
        for t in &terms {
            let decay = (-g * (t.delay - tau)).exp();
            for o in 0..2 {
                s0[o] *= decay;
                s1[o] *= decay;
            }
            tau = t.delay;
            let mut cross = C64::new(0.0, 0.0);
            for (o, order) in [1u8, 2].into_iter().enumerate() {
                let (a, b) = coeffs(order, t.order);
                cross += a * s0[o] + b * (tau * s0[o] - s1[o]);
            }
            let (a_self, _) = coeffs(t.order, t.order);
            total += t.coef.norm_sqr() * a_self.re + 2.0 * (cross * t.coef.conj()).re;
            let o = usize::from(t.order != 1);
            s0[o] += t.coef;
            s1[o] += t.coef * tau;
        }
        total
    }

    /// Merges terms with equal order and delay.
    pub fn compact(mut self) -> Self {
        let mut out: Vec<PoleTerm> = Vec::with_capacity(self.terms.len());
        self.terms.sort_by(|a, b| a.order.cmp(&b.order).then(a.delay.total_cmp(&b.delay)));
        for t in self.terms {
            match out.last_mut() {
                Some(last) if last.order == t.order && last.delay == t.delay => last.coef += t.coef,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coef != C64::new(0.0, 0.0));
        Self { rate: self.rate, terms: out }
    }
}

/// Resolvent solutions on every grid point plus what is needed to rebuild
/// the analytic references.
#[derive(Debug, Clone)]
pub struct ResolventSweep {
    pub grid: SpectralGrid,
    pub kernel: Kernel,
    pub slices: Vec<ResolventSlice>,
    pub psi0: Vec<C64>,
    pub positions: Vec<f64>,
    pub params: PhysParams,
    pub max_residual: f64,
}

impl ResolventSweep {
    pub fn n_atoms(&self) -> usize {
        self.psi0.len()
    }

    /// Propagation delay |z_a − z_b|/v_g under the sweep's kernel.
    pub fn delay(&self, d: f64) -> f64 {
        match self.kernel {
            Kernel::Retarded => d / self.params.v_g,
            Kernel::Instantaneous => 0.0,
        }
    }

    /// First two orders of x_a(δ) in H_off/D.
    pub fn atom_reference(&self, a: usize) -> PoleExpansion {
        let z = &self.positions;
        let mut terms = Vec::new();
        if self.psi0[a] != C64::new(0.0, 0.0) {
            terms.push(PoleTerm {
                coef: self.psi0[a],
                delay: 0.0,
                order: 1,
            });
        }
        for (b, &pb) in self.psi0.iter().enumerate() {
            if b == a || pb == C64::new(0.0, 0.0) {
                continue;
            }
            let d = (z[a] - z[b]).abs();
            terms.push(PoleTerm {
                coef: guided_exchange(&self.params, d, 0.0) * pb,
                delay: self.delay(d),
                order: 2,
            });
        }
        PoleExpansion {
            rate: self.params.gamma_tot(),
            terms,
        }
        .compact()
    }

    /// CSV of |x_a(δ)|² with columns `delta,atom,abs2`.
    pub fn spectra_csv(&self) -> String {
        let mut out = String::from("delta,atom,abs2\n");
        for s in &self.slices {
            for (a, x) in s.x.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", s.delta, a, x.norm_sqr());
            }
        }
        out
    }
}

/// Retarded (or instantaneous) H(δ) for the resolvent.
fn kernel_matrix(positions: &[f64], params: &PhysParams, delta: f64, kernel: Kernel) -> Mat<C64> {
    let n = positions.len();
    let probe = match kernel {
        Kernel::Retarded => delta,
        Kernel::Instantaneous => 0.0,
    };
    let diag = C64::new(0.0, -0.5 * params.gamma_tot());
    let mut m = Mat::<C64>::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = diag;
        for b in 0..a {
            let h = guided_exchange(params, (positions[a] - positions[b]).abs(), probe);
            m[(a, b)] = h;
            m[(b, a)] = h;
        }
    }
    m
}

/// Solves [δ − H(δ)]x = ψ0 at every grid point, in parallel, and checks
/// each residual.
pub fn resolvent_sweep(
    array: &AtomArray,
    params: &PhysParams,
    psi0: &StateVector,
    grid: &SpectralGrid,
    kernel: Kernel,
) -> Result<ResolventSweep> {
    params.validate()?;
    grid.validate()?;
    if psi0.len() != array.len() {
        return Err(Error::Usage("state and array sizes differ".into()));
    }
    let positions = array.positions.clone();
    let b = &psi0.amplitudes;
    let b_norm = linalg::vec_norm(b);
    let results: Vec<Result<(ResolventSlice, f64)>> = (0..grid.n_points)
        .into_par_iter()
        .map(|j| {
            let delta = grid.delta(j);
            let mut m = kernel_matrix(&positions, params, delta, kernel);
            for i in 0..m.nrows() {
                for k in 0..m.ncols() {
                    m[(i, k)] = -m[(i, k)];
                }
                m[(i, i)] += delta;
            }
            let x = linalg::solve(&m, b);
            let r = linalg::matvec(&m, &x);
            let res = r.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
            if !(res <= RESIDUAL_TOLERANCE * b_norm) || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "resolvent solve at delta = {delta} has residual {res:e}; the Hamiltonian is broken"
                )));
            }
            Ok((ResolventSlice { delta, x }, res))
        })
        .collect();
    let mut slices = Vec::with_capacity(grid.n_points);
    let mut max_residual: f64 = 0.0;
    for r in results {
        let (s, res) = r?;
        max_residual = max_residual.max(res);
        slices.push(s);
    }
    Ok(ResolventSweep {
        grid: *grid,
        kernel,
        slices,
        psi0: psi0.amplitudes.clone(),
        positions,
        params: *params,
        max_residual,
    })
}

fn plan(grid: &SpectralGrid) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(grid.n_points * PAD_FACTOR)
}

fn check_times(grid: &SpectralGrid, times: &[f64]) -> Result<()> {
    let lim = grid.time_limit();
    if let Some(t) = times.iter().find(|t| !(t.abs() <= lim)) {
        return Err(Error::Usage(format!(
            "time {t} lies outside the alias-free window [-{lim}, {lim}]"
        )));
    }
    Ok(())
}

/// (i/2π)∫ values(δ) e^{−iδt} dδ at `times`, with `reference` removed from
/// the samples before the transform and added back analytically.
pub fn synthesize(
    values: &[C64],
    reference: &PoleExpansion,
    grid: &SpectralGrid,
    times: &[f64],
) -> Result<Vec<C64>> {
    check_times(grid, times)?;
    if values.len() != grid.n_points {
        return Err(Error::Usage("sample count does not match the grid".into()));
    }
    Ok(synthesize_with(values, reference, grid, times, &plan(grid)))
}

fn remainder_with(
    values: &[C64],
    reference: &PoleExpansion,
    grid: &SpectralGrid,
    times: &[f64],
    fft: &Arc<dyn Fft<f64>>,
) -> Vec<C64> {
    let n = grid.n_points;
    let nf = n * PAD_FACTOR;
    let dd = grid.spacing();
    let mut buf = vec![C64::new(0.0, 0.0); nf];
    for j in 0..n {
        let delta = grid.delta(j);
        buf[j] = (values[j] - reference.frequency(delta)) * grid.weight(j);
    }
    fft.process(&mut buf);
    let dt = 2.0 * PI / (nf as f64 * dd);
    let pref = C64::new(0.0, dd / (2.0 * PI));
    let sample = |m: i64| -> C64 {
        let idx = m.rem_euclid(nf as i64) as usize;
        let t = m as f64 * dt;
        pref * C64::from_polar(1.0, -grid.delta_min * t) * buf[idx]
    };
    times
        .iter()
        .map(|&t| {
            let u = t / dt;
            let i = u.floor() as i64;
            let f = u - i as f64;
            let (p0, p1, p2, p3) = (sample(i - 1), sample(i), sample(i + 1), sample(i + 2));
            // Catmull-Rom
            let rem = p1
                + 0.5
                    * f
                    * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
            rem
        })
        .collect()
}

fn synthesize_with(
    values: &[C64],
    reference: &PoleExpansion,
    grid: &SpectralGrid,
    times: &[f64],
    fft: &Arc<dyn Fft<f64>>,
) -> Vec<C64> {
    remainder_with(values, reference, grid, times, fft)
        .into_iter()
        .zip(times)
        .map(|(r, &t)| r + reference.time(t))
        .collect()
}

/// ∫_0^t|α|² at each of the increasing `times`, for the amplitude that
/// `synthesize` returns.
///
/// The reference jumps at its delays, so those become breakpoints; between
/// them three-point Gauss rules run on cells no wider than the synthesis
/// step.
pub fn cumulative_energy(
    values: &[C64],
    reference: &PoleExpansion,
    grid: &SpectralGrid,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_times(grid, times)?;
    if values.len() != grid.n_points {
        return Err(Error::Usage("sample count does not match the grid".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Usage("times must be non-negative and strictly increasing".into()));
    }
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    let step = 2.0 * PI / ((grid.n_points * PAD_FACTOR) as f64 * grid.spacing());
    let mut breaks: Vec<f64> = std::iter::once(0.0)
        .chain(times.iter().copied())
        .chain(reference.terms.iter().map(|p| p.delay).filter(|&d| d > 0.0 && d < t_end))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let gauss = [
        (-(0.6f64).sqrt(), 5.0 / 18.0),
        (0.0, 8.0 / 18.0),
        ((0.6f64).sqrt(), 5.0 / 18.0),
    ];
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    // Node count at the end of each break interval.
    let mut ends = Vec::with_capacity(breaks.len());
    ends.push(0);
    for w in breaks.windows(2) {
        let cells = ((w[1] - w[0]) / step).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / cells as f64;
        for c in 0..cells {
            let mid = w[0] + (c as f64 + 0.5) * h;
            for &(x, wt) in &gauss {
                nodes.push(mid + 0.5 * h * x);
                weights.push(wt * h);
            }
        }
        ends.push(nodes.len());
    }
    let rem = remainder_with(values, reference, grid, &nodes, &plan(grid));
    let refs = reference.time_sorted(&nodes);
    let mut running = 0.0;
    let mut acc = Vec::with_capacity(breaks.len());
    acc.push(0.0);
    for b in 1..breaks.len() {
        running += (ends[b - 1]..ends[b]).map(|k| weights[k] * (rem[k] + refs[k]).norm_sqr()).sum::<f64>();
        acc.push(running);
    }
    Ok(times
        .iter()
        .map(|t| acc[breaks.partition_point(|b| b < t)])
        .collect())
}

/// Synthesized amplitudes on `t_grid`.
pub fn time_domain(sweep: &ResolventSweep, t_grid: &[f64]) -> Result<AmplitudeTrajectory> {
    let grid = &sweep.grid;
    check_times(grid, t_grid)?;
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("time grid must be strictly increasing".into()));
    }
    if sweep.slices.len() != grid.n_points {
        return Err(Error::Usage("slices do not cover the grid".into()));
    }
    let fft = plan(grid);
    let n_atoms = sweep.n_atoms();
    let per_atom: Vec<Vec<C64>> = (0..n_atoms)
        .into_par_iter()
        .map(|a| {
            let values: Vec<C64> = sweep.slices.iter().map(|s| s.x[a]).collect();
            synthesize_with(&values, &sweep.atom_reference(a), grid, t_grid, &fft)
        })
        .collect();
    let amplitudes: Vec<Vec<C64>> = (0..t_grid.len())
        .map(|i| per_atom.iter().map(|col| col[i]).collect())
        .collect();
    if amplitudes.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("synthesis produced non-finite amplitudes".into()));
    }
    Ok(AmplitudeTrajectory {
        t_grid: t_grid.to_vec(),
        amplitudes,
        propagator: Propagator::Spectral,
        condition: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rule_example() {
        let p = PhysParams::default();
        let s = GridScales {
            gamma_c: 5.0,
            gamma_m: 0.0,
            length: 0.0,
        };
        let g = build_grid(&p, s, 12.0).unwrap();
        assert_eq!(g.n_points, 4096);
        assert!(g.delta_min <= -100.0 && g.delta_max >= 100.0);
        assert!(g.spacing() <= 2.0 * PI / 96.0);
        let g2 = build_grid(&p, s, 24.0).unwrap();
        assert_eq!(g2.n_points, 8192);
        assert!(matches!(build_grid(&p, s, 0.0), Err(Error::Usage(_))));
    }

    #[test]
    fn grid_cap() {
        let p = PhysParams::default();
        let s = GridScales {
            gamma_c: 5.0,
            gamma_m: 0.0,
            length: 0.0,
        };
        assert!(matches!(build_grid(&p, s, 1e5), Err(Error::Resolution(_))));
    }

    #[test]
    fn pole_pair_transforms() {
        let grid = SpectralGrid {
            delta_min: -400.0,
            delta_max: 400.0,
            n_points: 1 << 16,
            window: Window::None,
        };
        let e = PoleExpansion {
            rate: 1.3,
            terms: vec![PoleTerm {
                coef: C64::new(0.2, -0.1),
                delay: 0.7,
                order: 2,
            }],
        };
        let values: Vec<C64> = grid.deltas().iter().map(|&d| e.frequency(d)).collect();
        let empty = PoleExpansion {
            rate: 1.3,
            terms: vec![],
        };
        let times = [0.3, 1.0, 2.5];
        let direct = synthesize(&values, &empty, &grid, &times).unwrap();
        for (t, v) in times.iter().zip(direct) {
            assert!((v - e.time(*t)).norm() < 1e-3, "t={t}");
        }
    }
}
