//! Oscillation and cavity-model fits to probability traces.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};
use wgchain_core::analytic::jc_population_lossy;

/// Minimum number of extrema for an oscillation fit.
pub const MIN_EXTREMA: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Local extrema of `y`, ignoring ripples below a relative prominence of
/// 1e-6 and values below 1e-10 of the peak.
pub fn extrema(t: &[f64], y: &[f64]) -> Vec<Extremum> {
    let peak = y.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-10 * peak;
    let mut out: Vec<Extremum> = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let kind = if b < a && b <= c {
            ExtremumKind::Min
        } else if b > a && b >= c {
            ExtremumKind::Max
        } else {
            continue;
        };
        if b.max(a) < floor {
            continue;
        }
        let reference = out.last().map_or(y[0], |e| e.value);
        if (b - reference).abs() <= 1e-6 * b.abs().max(reference.abs()) {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if last.kind == kind {
                // Keep the more extreme of two same-kind neighbours.
                let better = match kind {
                    ExtremumKind::Min => b < last.value,
                    ExtremumKind::Max => b > last.value,
                };
                if better {
                    *last = Extremum { index: i, t: t[i], value: b, kind };
                }
                continue;
            }
        }
        out.push(Extremum { index: i, t: t[i], value: b, kind });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationFit {
    /// Angular frequency of the fitted cosine, in units of γ.
    pub frequency: f64,
    pub damping: f64,
    /// (max − min)/(max + min) of the first revival.
    pub contrast: f64,
    pub extrema: usize,
    /// Residual norm relative to the data norm over the fit window.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Oscillation {
    NotApplicable { extrema: usize },
    Fitted(OscillationFit),
}

impl Oscillation {
    pub fn fitted(&self) -> Option<&OscillationFit> {
        match self {
            Self::Fitted(f) => Some(f),
            Self::NotApplicable { .. } => None,
        }
    }
}

fn nelder_mead<C>(cost: C, start: Vec<Vec<f64>>, iters: u64) -> Option<Vec<f64>>
where
    C: CostFunction<Param = Vec<f64>, Output = f64>,
{
    let solver = NelderMead::new(start).with_sd_tolerance(1e-14).ok()?;
    let res = Executor::new(cost, solver).configure(|s| s.max_iters(iters)).run().ok()?;
    res.state().get_best_param().cloned()
}

/// Solves the small normal equations; `None` if singular.
fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = cols.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = cols[i].iter().zip(&cols[j]).map(|(x, z)| x * z).sum();
        }
        a[i][k] = cols[i].iter().zip(y).map(|(x, z)| x * z).sum();
    }
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        a.swap(c, p);
        if a[c][c].abs() < 1e-300 {
            return None;
        }
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    let ss = y
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let m: f64 = (0..k).map(|i| coef[i] * cols[i][n]).sum();
            (v - m).powi(2)
        })
        .sum();
    Some((coef, ss))
}

struct DampedCosine<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl DampedCosine<'_> {
    fn residual(&self, lambda: f64, omega: f64) -> f64 {
        let t0 = self.t[0];
        let env: Vec<f64> = self.t.iter().map(|t| (-lambda * (t - t0)).exp()).collect();
        let cols = vec![
            env.clone(),
            self.t.iter().zip(&env).map(|(t, e)| e * (omega * (t - t0)).cos()).collect(),
            self.t.iter().zip(&env).map(|(t, e)| e * (omega * (t - t0)).sin()).collect(),
        ];
        least_squares(&cols, self.y).map_or(f64::INFINITY, |(_, ss)| ss)
    }
}

impl CostFunction for DampedCosine<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok(self.residual(p[0].abs(), p[1].abs()))
    }
}

/// Fits e^{−λt}(a + b·cos Ωt + c·sin Ωt) to `y` from its first minimum on.
/// The linear coefficients are eliminated; (λ, Ω) go to Nelder–Mead.
pub fn oscillation_fit(t: &[f64], y: &[f64]) -> Oscillation {
    let ext = extrema(t, y);
    if ext.len() < MIN_EXTREMA {
        return Oscillation::NotApplicable { extrema: ext.len() };
    }
    let Some(first_min) = ext.iter().position(|e| e.kind == ExtremumKind::Min) else {
        return Oscillation::NotApplicable { extrema: ext.len() };
    };
    let Some(revival) = ext[first_min..].iter().find(|e| e.kind == ExtremumKind::Max) else {
        return Oscillation::NotApplicable { extrema: ext.len() };
    };
    let lo = ext[first_min];
    let contrast = (revival.value - lo.value) / (revival.value + lo.value);

    let gaps: Vec<f64> = ext.windows(2).map(|w| w[1].t - w[0].t).collect();
    let omega0 = std::f64::consts::PI / (gaps.iter().sum::<f64>() / gaps.len() as f64);
    let maxima: Vec<&Extremum> = ext.iter().filter(|e| e.kind == ExtremumKind::Max).collect();
    let lambda0 = if maxima.len() >= 2 && maxima[1].value > 0.0 {
        ((maxima[0].value / maxima[1].value).ln() / (maxima[1].t - maxima[0].t)).max(1e-3 * omega0)
    } else {
        0.1 * omega0
    };

    let ts = &t[lo.index..];
    let ys = &y[lo.index..];
    let cost = DampedCosine { t: ts, y: ys };
    let start = vec![
        vec![lambda0, omega0],
        vec![1.2 * lambda0 + 1e-3, omega0],
        vec![lambda0, 1.05 * omega0],
    ];
    let Some(best) = nelder_mead(cost, start, 4000) else {
        return Oscillation::NotApplicable { extrema: ext.len() };
    };
    let (lambda, omega) = (best[0].abs(), best[1].abs());
    let norm: f64 = ys.iter().map(|v| v * v).sum();
    let ss = DampedCosine { t: ts, y: ys }.residual(lambda, omega);
    Oscillation::Fitted(OscillationFit {
        frequency: omega,
        damping: lambda,
        contrast,
        extrema: ext.len(),
        relative_residual: (ss / norm).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcFit {
    pub g: f64,
    pub kappa: f64,
    /// Fixed emitter loss rate used in the model.
    pub gamma_a: f64,
    /// Angular frequency of the population oscillation implied by (g, κ);
    /// `None` when the fit is overdamped.
    pub frequency: Option<f64>,
    /// Root-mean-square residual of ln p over the fit window.
    pub rms_log: f64,
    pub samples: usize,
}

struct JcCost<'a> {
    t: &'a [f64],
    y: &'a [f64],
    gamma_a: f64,
}

/// Floor applied before taking logarithms of near-zero populations.
const LOG_FLOOR: f64 = 1e-12;

impl CostFunction for JcCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        let (g, kappa) = (p[0].exp(), p[1].exp());
        let ss = self
            .t
            .iter()
            .zip(self.y)
            .map(|(&t, &y)| {
                let m = jc_population_lossy(g, kappa, self.gamma_a, t);
                (m.max(LOG_FLOOR).ln() - y.max(LOG_FLOOR).ln()).powi(2)
            })
            .sum::<f64>();
        Ok(if ss.is_finite() { ss } else { f64::INFINITY })
    }
}

/// Oscillation angular frequency of the lossy cavity model.
pub fn jc_frequency(g: f64, kappa: f64, gamma_a: f64) -> Option<f64> {
    let k = kappa - gamma_a;
    let w2 = 16.0 * g * g - k * k;
    (w2 > 0.0).then(|| 0.5 * w2.sqrt())
}

/// Fit of the lossy cavity model to ln y over [0, second revival maximum]
/// (the first one if there is only one). Multi-start Nelder–Mead in
/// (ln g, ln κ); `None` without a revival.
pub fn jc_fit(t: &[f64], y: &[f64], gamma_a: f64, guess: Option<&OscillationFit>) -> Option<JcFit> {
    let ext = extrema(t, y);
    let first_min = ext.iter().position(|e| e.kind == ExtremumKind::Min)?;
    let maxima: Vec<&Extremum> = ext[first_min..].iter().filter(|e| e.kind == ExtremumKind::Max).collect();
    let end = maxima.get(1).or(maxima.first())?.index + 1;
    let (ts, ys) = (&t[..end], &y[..end]);
    let g_scale = guess.map_or(std::f64::consts::PI / (2.0 * ext[first_min].t), |o| 0.5 * o.frequency);
    let cost = |q: &Vec<f64>| JcCost { t: ts, y: ys, gamma_a }.cost(q).unwrap_or(f64::INFINITY);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for gf in [0.5, 1.0, 1.5] {
        for k0 in [0.5, 1.5, 3.0, 10.0] {
            let (lg, lk) = ((gf * g_scale).ln(), f64::ln(k0));
            let start = vec![vec![lg, lk], vec![lg + 0.1, lk], vec![lg, lk + 0.2]];
            let Some(q) = nelder_mead(JcCost { t: ts, y: ys, gamma_a }, start, 2000) else {
                continue;
            };
            let c = cost(&q);
            if best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((q, c));
            }
        }
    }
    let (q, ss) = best?;
    let (g, kappa) = (q[0].exp(), q[1].exp());
    Some(JcFit {
        g,
        kappa,
        gamma_a,
        frequency: jc_frequency(g, kappa, gamma_a),
        rms_log: (ss / ts.len() as f64).sqrt(),
        samples: ts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn damped_cos_squared() {
        let t = grid(4000, 6.0);
        let y: Vec<f64> = t.iter().map(|t| (-t).exp() * (3.0 * t).cos().powi(2)).collect();
        let fit = *oscillation_fit(&t, &y).fitted().unwrap();
        assert!((fit.frequency - 6.0).abs() < 0.06, "{fit:?}");
        assert!((fit.damping - 1.0).abs() < 0.01);
        assert!((fit.contrast - 1.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_is_not_applicable() {
        let t = grid(500, 10.0);
        let y: Vec<f64> = t.iter().map(|t| (-0.7 * t).exp()).collect();
        assert_eq!(oscillation_fit(&t, &y), Oscillation::NotApplicable { extrema: 0 });
        assert!(jc_fit(&t, &y, 1.0, None).is_none());
    }

    #[test]
    fn jc_fit_recovers_parameters() {
        let t = grid(2000, 4.0);
        let y: Vec<f64> = t.iter().map(|&t| jc_population_lossy(2.0, 1.5, 1.0, t)).collect();
        let osc = oscillation_fit(&t, &y);
        let fit = jc_fit(&t, &y, 1.0, osc.fitted()).unwrap();
        assert!((fit.g - 2.0).abs() < 1e-5, "{fit:?}");
        assert!((fit.kappa - 1.5).abs() < 1e-4, "{fit:?}");
    }
}
