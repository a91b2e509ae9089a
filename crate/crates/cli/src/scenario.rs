//! Named geometries.

use wgchain_core::model::{ChainSpec, PhysParams, SegmentRole, SegmentSpec, RB_D2_WAVELENGTH};

use crate::config::scaled;

/// Physical gap of the long-cavity scenarios at full scale, in metres.
pub const LONG_CAVITY_GAP_M: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// 100/100/100 half-wave chain.
    Fig2,
    /// Emitter with a disordered right mirror, 0/100/200.
    Fig3b,
    /// Both mirrors disordered, 100/100/100.
    Fig3c,
    /// Quarter-wave gaps, 100/100/100.
    Fig4,
    /// One-sided quarter-wave chain, 0/100/200.
    Fig5,
    /// Long cavity, 500/100/500, gap a multiple of λ/2.
    Fig7a,
    /// Long cavity shifted by λ/4.
    Fig7b,
    /// Emitter alone.
    Bare,
}

impl Scenario {
    pub const NAMES: [&'static str; 8] = ["fig2", "fig3b", "fig3c", "fig4", "fig5", "fig7a", "fig7b", "bare"];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "fig2" => Self::Fig2,
            "fig3b" => Self::Fig3b,
            "fig3c" => Self::Fig3c,
            "fig4" => Self::Fig4,
            "fig5" => Self::Fig5,
            "fig7a" => Self::Fig7a,
            "fig7b" => Self::Fig7b,
            "bare" => Self::Bare,
            _ => return None,
        })
    }

    /// Chain at `scale`; `n_bare` sets the emitter size of `bare` (default 100).
    ///
    /// The long-cavity gap grows as 1/scale so that the cavity transit time
    /// keeps its ratio to the collective lifetimes, which shrink with N.
    pub fn chain(self, scale: f64, params: &PhysParams, n_bare: Option<usize>) -> ChainSpec {
        let half = 0.5 * params.lambda_wg;
        let lattice = |role, n| SegmentSpec::lattice(role, scaled(n, scale), params);
        let random = |role, n| SegmentSpec::disordered(role, scaled(n, scale), 1.0, params);
        use SegmentRole::*;
        let (segments, gap) = match self {
            Self::Fig2 => (vec![lattice(LeftMirror, 100), lattice(Emitter, 100), lattice(RightMirror, 100)], half),
            Self::Fig3b => (vec![lattice(Emitter, 100), random(RightMirror, 200)], half),
            Self::Fig3c => (vec![random(LeftMirror, 100), lattice(Emitter, 100), random(RightMirror, 100)], half),
            Self::Fig4 => (
                vec![lattice(LeftMirror, 100), lattice(Emitter, 100), lattice(RightMirror, 100)],
                0.5 * half,
            ),
            Self::Fig5 => (vec![lattice(Emitter, 100), lattice(RightMirror, 200)], 0.5 * half),
            Self::Fig7a | Self::Fig7b => {
                let lambda_wg_m = RB_D2_WAVELENGTH * params.lambda_wg / params.lambda_0;
                let target = LONG_CAVITY_GAP_M / scale / lambda_wg_m * params.lambda_wg;
                let mut gap = (target / half).round().max(1.0) * half;
                if self == Self::Fig7b {
                    gap += 0.5 * half;
                }
                (
                    vec![lattice(LeftMirror, 500), lattice(Emitter, 100), lattice(RightMirror, 500)],
                    gap,
                )
            }
            Self::Bare => (
                vec![SegmentSpec::lattice(Emitter, scaled(n_bare.unwrap_or(100), scale), params)],
                half,
            ),
        };
        ChainSpec {
            segments,
            gap_d0: gap,
            rng_seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_counts() {
        let p = PhysParams::default();
        let c = Scenario::Fig5.chain(0.3, &p, None);
        assert_eq!(c.count(SegmentRole::Emitter), 30);
        assert_eq!(c.count(SegmentRole::RightMirror), 60);
        assert_eq!(c.count(SegmentRole::LeftMirror), 0);
        assert_eq!(Scenario::Bare.chain(1.0, &p, Some(7)).total_atoms(), 7);
    }

    #[test]
    fn long_cavity_gap() {
        let p = PhysParams::default();
        let a = Scenario::Fig7a.chain(0.1, &p, None).gap_d0;
        let b = Scenario::Fig7b.chain(0.1, &p, None).gap_d0;
        assert_eq!((2.0 * a).fract(), 0.0);
        assert!((b - a - 0.25).abs() < 1e-9);
        let metres = a * RB_D2_WAVELENGTH / p.lambda_0;
        assert!((metres - 2.0).abs() < 1e-6);
    }
}
