//! Closed-form cavity reference model, mirror reflectance and the regime
//! classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_chain, ChainSpec, PhysParams, SegmentRole};
use crate::C64;

/// Rate ratio Γ_M/Γ_C from which mirrors count as dominant.
pub const MIRROR_DOMINANCE_RATIO: f64 = 3.0;
/// Markovian when the transit time is below this fraction of 1/Γ.
pub const MARKOVIAN_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub g: f64,
    pub kappa: f64,
    /// Collective enhancement g → √N·g when present.
    pub n_atoms: Option<u32>,
}

impl JcParams {
    pub fn coupling(&self) -> f64 {
        match self.n_atoms {
            Some(n) => self.g * (n as f64).sqrt(),
            None => self.g,
        }
    }
}

/// Upper-state population of the damped two-mode model for any real κ.
///
/// Written with C(x) = (cosh x − 1)/x² and S(x) = sinh x/x, x = Dt/2,
/// D² = κ² − 16g², so the removable singularity at D = 0 is handled by the
/// same expression.
pub fn jc_core(g: f64, kappa: f64, t: f64) -> f64 {
    if g == 0.0 {
        return 1.0;
    }
    let d2 = kappa * kappa - 16.0 * g * g;
    let y = 0.25 * d2 * t * t;
    let a = (kappa * kappa + d2) * t * t / 16.0;
    let b = 0.25 * kappa * t;
    if y > 400.0 {
        // Large real x: plain exponentials, no cancellation.
        let x = y.sqrt();
        let ep = (x - 0.5 * kappa * t).exp();
        let em = (-x - 0.5 * kappa * t).exp();
        let e0 = (-0.5 * kappa * t).exp();
        return 2.0 * (a * (0.5 * (ep + em) - e0) / y + 0.5 * e0 + b * 0.5 * (ep - em) / x);
    }
    let (c, s) = if y.abs() < 1e-6 {
        (0.5 + y / 24.0 + y * y / 720.0, 1.0 + y / 6.0 + y * y / 120.0)
    } else if y > 0.0 {
        let x = y.sqrt();
        let h = (0.5 * x).sinh();
        (2.0 * h * h / y, x.sinh() / x)
    } else {
        let w = (-y).sqrt();
        let h = (0.5 * w).sin();
        (2.0 * h * h / (-y), w.sin() / w)
    };
    2.0 * (-0.5 * kappa * t).exp() * (a * c + 0.5 + b * s)
}

/// Population of the emitter mode coupled at g (or g_C) to a cavity of
/// leakage κ.
pub fn jc_population(params: &JcParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Usage(format!("time must be non-negative, got {t}")));
    }
    if !(params.g >= 0.0 && params.kappa >= 0.0) {
        return Err(Error::Usage("g and kappa must be non-negative".into()));
    }
    Ok(jc_core(params.coupling(), params.kappa, t))
}

/// Same model with an additional emitter loss rate `gamma_a`.
pub fn jc_population_lossy(g: f64, kappa: f64, gamma_a: f64, t: f64) -> f64 {
    (-gamma_a * t).exp() * jc_core(g, kappa - gamma_a, t)
}

/// R(δ) = (Γ_M/2)²/(δ² + (Γ_M/2)²).
pub fn mirror_reflectance_lorentzian(gamma_m: f64, delta: f64) -> f64 {
    let h = 0.5 * gamma_m;
    h * h / (delta * delta + h * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scattering {
    pub r: C64,
    pub t: C64,
}

impl Scattering {
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }
}

type M2 = [[C64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Single-atom guided reflection amplitude −(Γ_wg/2)/(Γ_tot/2 − iδ).
pub fn single_atom_reflection(params: &PhysParams, delta: f64) -> C64 {
    -0.5 * params.gamma_wg() / C64::new(0.5 * params.gamma_tot(), -delta)
}

/// Reflection and transmission of a chain of point scatterers, r referenced
/// to the first atom's plane.
pub fn transfer_matrix_reflectance(mirror: &[f64], params: &PhysParams, delta: f64) -> Result<Scattering> {
    if mirror.is_empty() {
        return Err(Error::Usage("mirror has no atoms".into()));
    }
    let r1 = single_atom_reflection(params, delta);
    let t1 = 1.0 + r1;
    let inv_t = 1.0 / t1;
    let atom: M2 = [[(t1 * t1 - r1 * r1) * inv_t, r1 * inv_t], [-r1 * inv_t, inv_t]];
    let mut m = atom;
    for w in mirror.windows(2) {
        let ph = params.guided_phase((w[1] - w[0]).abs(), delta);
        let prop: M2 = [
            [C64::from_polar(1.0, ph), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::from_polar(1.0, -ph)],
        ];
        m = mul(&atom, &mul(&prop, &m));
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Ok(Scattering {
        r: -m[1][0] / m[1][1],
        t: det / m[1][1],
    })
}

/// Full width at half maximum of a peak at δ = 0, by bracketing and
/// bisection on each side. `scale` sets the initial bracket.
pub fn peak_fwhm(f: impl Fn(f64) -> f64, scale: f64) -> Option<f64> {
    let half = 0.5 * f(0.0);
    let side = |sign: f64| -> Option<f64> {
        let mut hi = scale.abs().max(1e-12);
        let mut tries = 0;
        while f(sign * hi) > half {
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return None;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(sign * mid) > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    };
    Some(side(1.0)? + side(-1.0)?)
}

/// κ = (1 − R)·v_g/L.
pub fn kappa_estimate(reflectance: f64, length: f64, v_g: f64) -> f64 {
    (1.0 - reflectance) * v_g / length
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n_emitter: usize,
    pub n_mirror: usize,
    /// Cooperative rates N·γ_1D/2.
    pub gamma_c: f64,
    pub gamma_m: Option<f64>,
    /// Lattice superradiant rates γ_ext + γ_1D + (N − 1)Γ_wg.
    pub gamma_c_total: f64,
    pub gamma_m_total: Option<f64>,
    /// Transit time across the whole array.
    pub array_transit: f64,
    /// Transit time between the inner mirror edges.
    pub cavity_transit: Option<f64>,
    pub inv_gamma_c: f64,
    pub inv_gamma_m: Option<f64>,
    pub mirror_ratio: Option<f64>,
    /// On-resonance transfer-matrix reflectance of each mirror.
    pub reflectance_left: Option<f64>,
    pub reflectance_right: Option<f64>,
    pub kappa: Option<f64>,
    pub g_c: Option<f64>,
    pub markovian: bool,
    pub cavity_retardation: Option<bool>,
    pub coherence_fit: Option<bool>,
    pub mirror_dominance: Option<bool>,
    pub strong_coupling: Option<bool>,
}

impl RegimeReport {
    /// Recomputes every flag from the stored numbers.
    pub fn recompute_flags(&mut self) {
        let fast = self.inv_gamma_m.unwrap_or(self.inv_gamma_c);
        self.markovian = self.array_transit < MARKOVIAN_FRACTION * fast;
        self.cavity_retardation = match (self.cavity_transit, self.inv_gamma_m) {
            (Some(l), Some(m)) => Some(l > m),
            _ => None,
        };
        self.coherence_fit = self.cavity_transit.map(|l| l < self.inv_gamma_c);
        self.mirror_dominance = self.mirror_ratio.map(|r| r >= MIRROR_DOMINANCE_RATIO);
        self.strong_coupling = match (self.g_c, self.kappa) {
            (Some(g), Some(k)) => Some(g > 0.25 * k),
            _ => None,
        };
    }

    /// Fills in a fitted collective coupling and its flag.
    pub fn with_coupling(mut self, g_c: f64) -> Self {
        self.g_c = Some(g_c);
        self.recompute_flags();
        self
    }
}

pub fn classify_regime(chain: &ChainSpec, params: &PhysParams) -> Result<RegimeReport> {
    let array = build_chain(chain, params)?;
    let n_c = array.n_emitter();
    let n_l = chain.count(SegmentRole::LeftMirror);
    let n_r = chain.count(SegmentRole::RightMirror);
    let n_m = n_l.max(n_r);
    let has_mirror = n_m > 0;
    let gamma_c = params.cooperative_rate(n_c);
    let gamma_m = has_mirror.then(|| params.cooperative_rate(n_m));

    let refl = |role| -> Result<Option<f64>> {
        let m = array.mirror_positions(role);
        if m.is_empty() {
            Ok(None)
        } else {
            Ok(Some(transfer_matrix_reflectance(&m, params, 0.0)?.reflectance()))
        }
    };
    let reflectance_left = refl(SegmentRole::LeftMirror)?;
    let reflectance_right = refl(SegmentRole::RightMirror)?;
    let cavity_length = array.cavity_length();
    let kappa = match (cavity_length, reflectance_left, reflectance_right) {
        (Some(l), Some(rl), Some(rr)) => Some(kappa_estimate(0.5 * (rl + rr), l, params.v_g)),
        _ => None,
    };

    let mut report = RegimeReport {
        n_emitter: n_c,
        n_mirror: n_m,
        gamma_c,
        gamma_m,
        gamma_c_total: params.lattice_superradiant_rate(n_c),
        gamma_m_total: has_mirror.then(|| params.lattice_superradiant_rate(n_m)),
        array_transit: array.length() / params.v_g,
        cavity_transit: cavity_length.map(|l| l / params.v_g),
        inv_gamma_c: 1.0 / gamma_c,
        inv_gamma_m: gamma_m.map(|g| 1.0 / g),
        mirror_ratio: gamma_m.map(|g| g / gamma_c),
        reflectance_left,
        reflectance_right,
        kappa,
        g_c: None,
        markovian: false,
        cavity_retardation: None,
        coherence_fit: None,
        mirror_dominance: None,
        strong_coupling: None,
    };
    report.recompute_flags();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jc_limits() {
        for &t in &[0.0, 0.3, 2.0, 9.0] {
            assert_eq!(jc_core(0.0, 1.3, t), 1.0);
            assert!((jc_core(1.0, 0.0, t) - (t).cos().powi(2)).abs() < 1e-12);
        }
        let k: f64 = 2.0;
        let t: f64 = 1.7;
        let exact = (-0.5 * k * t).exp() * (1.0 + 0.25 * k * t).powi(2);
        assert!((jc_core(0.5, k, t) - exact).abs() < 1e-12);
        assert!(jc_population(&JcParams { g: 1.0, kappa: 1.0, n_atoms: None }, -1.0).is_err());
    }

    #[test]
    fn lorentzian_points() {
        assert_eq!(mirror_reflectance_lorentzian(3.0, 0.0), 1.0);
        assert!((mirror_reflectance_lorentzian(3.0, 1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_atom_mirror() {
        let p = PhysParams::default();
        let s = transfer_matrix_reflectance(&[0.0], &p, 0.0).unwrap();
        assert!((s.reflectance() - (0.05f64 / 1.05).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_estimate(1.0, 3.0, 2.0), 0.0);
        assert!((kappa_estimate(0.99, 5.0, 5.0) - 0.01).abs() < 1e-15);
        assert_eq!(kappa_estimate(0.0, 2.0, 6.0), 3.0);
    }
}
