//! Physical constants, chain geometry and the phased Dicke initial state.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Rb D2 vacuum wavelength in m.
pub const RB_D2_WAVELENGTH: f64 = 780e-9;
/// Rb D2 natural linewidth in Hz (the angular rate is 2π times this).
pub const RB_D2_LINEWIDTH_HZ: f64 = 6.07e6;
/// Default effective index of the guided mode.
pub const DEFAULT_EFFECTIVE_INDEX: f64 = 1.2;
/// Default group velocity as a fraction of c.
pub const DEFAULT_GROUP_VELOCITY_FRACTION: f64 = 0.7;

/// Smallest allowed separation between two atoms, in units of `lambda_wg`.
pub const MIN_SEPARATION_FRACTION: f64 = 0.01;

/// Rate and length constants.
///
/// Rates are in units of `gamma`, lengths in units of `lambda_wg` when the
/// defaults are used. `lambda_0` is only read by the optional free-space
/// coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub gamma: f64,
    pub beta: f64,
    pub gamma_ext: f64,
    pub v_g: f64,
    pub lambda_wg: f64,
    pub lambda_0: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self::from_physical(
            RB_D2_WAVELENGTH,
            RB_D2_LINEWIDTH_HZ,
            DEFAULT_EFFECTIVE_INDEX,
            DEFAULT_GROUP_VELOCITY_FRACTION,
            0.1,
            0.95,
        )
    }
}

impl PhysParams {
    /// Reduced parameters from laboratory values.
    ///
    /// `lambda0_m` is the vacuum wavelength in metres, `linewidth_hz` the
    /// natural linewidth γ/2π, `n_eff` the guided-mode effective index and
    /// `vg_fraction` the group velocity in units of c.
    pub fn from_physical(
        lambda0_m: f64,
        linewidth_hz: f64,
        n_eff: f64,
        vg_fraction: f64,
        beta: f64,
        gamma_ext: f64,
    ) -> Self {
        let gamma_si = 2.0 * PI * linewidth_hz;
        let lambda_wg_m = lambda0_m / n_eff;
        Self {
            gamma: 1.0,
            beta,
            gamma_ext,
            v_g: vg_fraction * SPEED_OF_LIGHT / (gamma_si * lambda_wg_m),
            lambda_wg: 1.0,
            lambda_0: n_eff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma,
            self.beta,
            self.gamma_ext,
            self.v_g,
            self.lambda_wg,
            self.lambda_0,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("physical parameters must be finite".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.gamma_ext <= 0.0 || self.v_g <= 0.0 || self.lambda_wg <= 0.0 || self.lambda_0 <= 0.0 {
            return Err(Error::Config(
                "gamma_ext, v_g, lambda_wg and lambda_0 must be positive".into(),
            ));
        }
        if self.gamma_ext >= self.gamma {
            return Err(Error::Config(format!(
                "gamma_ext ({}) must be smaller than gamma ({})",
                self.gamma_ext, self.gamma
            )));
        }
        if self.gamma_ext + self.gamma_1d() <= self.gamma {
            return Err(Error::Config(format!(
                "gamma_ext + beta*gamma ({}) must exceed gamma ({})",
                self.gamma_ext + self.gamma_1d(),
                self.gamma
            )));
        }
        Ok(())
    }

    /// Guided decay rate γ_1D = β·γ.
    pub fn gamma_1d(&self) -> f64 {
        self.beta * self.gamma
    }

    /// Coherent guided exchange rate Γ_wg = γ_1D/2.
    pub fn gamma_wg(&self) -> f64 {
        0.5 * self.gamma_1d()
    }

    /// Guided Raman loss γ_1D − Γ_wg.
    pub fn gamma_raman(&self) -> f64 {
        self.gamma_1d() - self.gamma_wg()
    }

    /// Single-atom total decay rate γ_ext + γ_1D.
    pub fn gamma_tot(&self) -> f64 {
        self.gamma_ext + self.gamma_1d()
    }

    pub fn k_wg(&self) -> f64 {
        2.0 * PI / self.lambda_wg
    }

    /// Guided phase k(δ)·d for a non-negative distance `d`.
    ///
    /// The k_wg part is reduced modulo 2π before it is combined with the
    /// dispersive part so that long distances keep full precision.
    pub fn guided_phase(&self, d: f64, delta: f64) -> f64 {
        let cycles = d / self.lambda_wg;
        2.0 * PI * (cycles - cycles.floor()) + delta * d / self.v_g
    }

    pub fn min_separation(&self) -> f64 {
        MIN_SEPARATION_FRACTION * self.lambda_wg
    }

    /// Collective rate γ_ext + γ_1D + (n − 1)Γ_wg of an n-atom half-wave lattice.
    pub fn lattice_superradiant_rate(&self, n: usize) -> f64 {
        self.gamma_tot() + (n.max(1) - 1) as f64 * self.gamma_wg()
    }

    /// Cooperative rate n·γ_1D/2.
    pub fn cooperative_rate(&self, n: usize) -> f64 {
        n as f64 * self.gamma_wg()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentRole {
    LeftMirror,
    Emitter,
    RightMirror,
}

impl SegmentRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentRole::LeftMirror => "left_mirror",
            SegmentRole::Emitter => "emitter",
            SegmentRole::RightMirror => "right_mirror",
        }
    }

    fn order(&self) -> usize {
        match self {
            SegmentRole::LeftMirror => 0,
            SegmentRole::Emitter => 1,
            SegmentRole::RightMirror => 2,
        }
    }
}

/// Uniform random placement, `density` atoms per half guided wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disorder {
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub role: SegmentRole,
    pub count: usize,
    pub spacing: f64,
    pub disorder: Option<Disorder>,
}

impl SegmentSpec {
    /// Half-wave lattice segment.
    pub fn lattice(role: SegmentRole, count: usize, params: &PhysParams) -> Self {
        Self {
            role,
            count,
            spacing: 0.5 * params.lambda_wg,
            disorder: None,
        }
    }

    pub fn disordered(role: SegmentRole, count: usize, density: f64, params: &PhysParams) -> Self {
        Self {
            role,
            count,
            spacing: 0.5 * params.lambda_wg,
            disorder: Some(Disorder { density }),
        }
    }

    /// Length of the segment interval (first to last lattice site, or the
    /// sampling interval for disordered segments).
    pub fn extent(&self, params: &PhysParams) -> f64 {
        match self.disorder {
            Some(d) => self.count as f64 / d.density * 0.5 * params.lambda_wg,
            None => self.count.saturating_sub(1) as f64 * self.spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub segments: Vec<SegmentSpec>,
    pub gap_d0: f64,
    pub rng_seed: u64,
}

impl ChainSpec {
    /// Ordered half-wave chain `n_left / n_center / n_right` with gap `gap_d0`.
    pub fn ordered(n_left: usize, n_center: usize, n_right: usize, gap_d0: f64, params: &PhysParams) -> Self {
        Self {
            segments: vec![
                SegmentSpec::lattice(SegmentRole::LeftMirror, n_left, params),
                SegmentSpec::lattice(SegmentRole::Emitter, n_center, params),
                SegmentSpec::lattice(SegmentRole::RightMirror, n_right, params),
            ],
            gap_d0,
            rng_seed: 0,
        }
    }

    /// Bare emitter on a half-wave lattice.
    pub fn bare(n_center: usize, params: &PhysParams) -> Self {
        Self::ordered(0, n_center, 0, 0.5 * params.lambda_wg, params)
    }

    pub fn segment(&self, role: SegmentRole) -> Option<&SegmentSpec> {
        self.segments.iter().find(|s| s.role == role && s.count > 0)
    }

    pub fn count(&self, role: SegmentRole) -> usize {
        self.segments.iter().filter(|s| s.role == role).map(|s| s.count).sum()
    }

    pub fn total_atoms(&self) -> usize {
        self.segments.iter().map(|s| s.count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let emitters: Vec<_> = self.segments.iter().filter(|s| s.role == SegmentRole::Emitter).collect();
        if emitters.len() != 1 {
            return Err(Error::Config(format!(
                "exactly one emitter segment required, found {}",
                emitters.len()
            )));
        }
        if emitters[0].count == 0 {
            return Err(Error::Config("emitter segment has zero atoms".into()));
        }
        let mut last_order = None;
        for s in &self.segments {
            if let Some(prev) = last_order {
                if s.role.order() <= prev {
                    return Err(Error::Config(
                        "segments must be ordered left mirror, emitter, right mirror".into(),
                    ));
                }
            }
            last_order = Some(s.role.order());
            if !(s.spacing > 0.0 && s.spacing.is_finite()) {
                return Err(Error::Config(format!(
                    "{} spacing must be positive, got {}",
                    s.role.as_str(),
                    s.spacing
                )));
            }
            if let Some(d) = s.disorder {
                if !(d.density > 0.0 && d.density.is_finite()) {
                    return Err(Error::Config(format!(
                        "{} disorder density must be positive, got {}",
                        s.role.as_str(),
                        d.density
                    )));
                }
            }
        }
        let non_empty = self.segments.iter().filter(|s| s.count > 0).count();
        if non_empty >= 2 && !(self.gap_d0 > 0.0 && self.gap_d0.is_finite()) {
            return Err(Error::Config(format!("gap_d0 must be positive, got {}", self.gap_d0)));
        }
        Ok(())
    }
}

/// Placement of one non-empty segment inside an [`AtomArray`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentExtent {
    pub role: SegmentRole,
    pub indices: Range<usize>,
    /// Interval edges; for lattice segments these are the outer atoms.
    pub z_start: f64,
    pub z_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomArray {
    pub positions: Vec<f64>,
    pub roles: Vec<SegmentRole>,
    pub emitter_indices: Range<usize>,
    pub segments: Vec<SegmentExtent>,
}

impl AtomArray {
    /// Array from explicit positions; all atoms are emitters unless
    /// `emitter_indices` says otherwise. Positions must be increasing.
    pub fn from_positions(positions: Vec<f64>, emitter_indices: Range<usize>, params: &PhysParams) -> Result<Self> {
        let n = positions.len();
        if emitter_indices.is_empty() || emitter_indices.end > n {
            return Err(Error::Config("emitter index range is empty or out of bounds".into()));
        }
        check_separation(&positions, params)?;
        let roles = (0..n)
            .map(|i| {
                if i < emitter_indices.start {
                    SegmentRole::LeftMirror
                } else if i < emitter_indices.end {
                    SegmentRole::Emitter
                } else {
                    SegmentRole::RightMirror
                }
            })
            .collect::<Vec<_>>();
        let mut segments = Vec::new();
        for (role, range) in [
            (SegmentRole::LeftMirror, 0..emitter_indices.start),
            (SegmentRole::Emitter, emitter_indices.clone()),
            (SegmentRole::RightMirror, emitter_indices.end..n),
        ] {
            if !range.is_empty() {
                segments.push(SegmentExtent {
                    role,
                    z_start: positions[range.start],
                    z_end: positions[range.end - 1],
                    indices: range,
                });
            }
        }
        Ok(Self {
            positions,
            roles,
            emitter_indices,
            segments,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn n_emitter(&self) -> usize {
        self.emitter_indices.len()
    }

    pub fn segment(&self, role: SegmentRole) -> Option<&SegmentExtent> {
        self.segments.iter().find(|s| s.role == role)
    }

    /// Distance from the first to the last atom.
    pub fn length(&self) -> f64 {
        match (self.positions.first(), self.positions.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Distance between the inner edges of the two mirrors, if both exist.
    pub fn cavity_length(&self) -> Option<f64> {
        let l = self.segment(SegmentRole::LeftMirror)?;
        let r = self.segment(SegmentRole::RightMirror)?;
        Some(r.z_start - l.z_end)
    }

    pub fn mirror_positions(&self, role: SegmentRole) -> Vec<f64> {
        self.segment(role)
            .map(|s| self.positions[s.indices.clone()].to_vec())
            .unwrap_or_default()
    }

    /// CSV with columns `index,z_over_lambda_wg,segment_role`.
    pub fn to_csv(&self, params: &PhysParams) -> String {
        let mut out = String::from("index,z_over_lambda_wg,segment_role\n");
        for (i, (z, role)) in self.positions.iter().zip(&self.roles).enumerate() {
            let _ = writeln!(out, "{},{},{}", i, z / params.lambda_wg, role.as_str());
        }
        out
    }
}

fn check_separation(positions: &[f64], params: &PhysParams) -> Result<()> {
    if positions.iter().any(|z| !z.is_finite()) {
        return Err(Error::Geometry("non-finite atom position".into()));
    }
    let floor = params.min_separation();
    for (i, w) in positions.windows(2).enumerate() {
        if w[1] - w[0] < floor {
            return Err(Error::Geometry(format!(
                "atoms {} and {} are {} apart, below the floor {}",
                i,
                i + 1,
                w[1] - w[0],
                floor
            )));
        }
    }
    Ok(())
}

/// Uniform draws on `[start, start + len]` with every accepted atom at least
/// `floor` away from the others. Draws that violate the floor are redrawn.
fn draw_disordered(rng: &mut ChaCha8Rng, count: usize, start: f64, len: f64, floor: f64) -> Result<Vec<f64>> {
    if count as f64 * floor > len {
        return Err(Error::Geometry(format!(
            "{count} atoms cannot fit in a disordered segment of length {len} with floor {floor}"
        )));
    }
    let max_attempts = 1000 * count.max(1);
    let mut out: Vec<f64> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Geometry(
                "disordered segment too dense for the minimum-separation floor".into(),
            ));
        }
        let z = start + len * rng.random::<f64>();
        let pos = out.partition_point(|&x| x < z);
        let clash = (pos > 0 && z - out[pos - 1] < floor) || (pos < out.len() && out[pos] - z < floor);
        if !clash {
            out.insert(pos, z);
        }
    }
    Ok(out)
}

/// Places every segment along the axis and shifts the origin to the first atom.
pub fn build_chain(spec: &ChainSpec, params: &PhysParams) -> Result<AtomArray> {
    params.validate()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let floor = params.min_separation();

    let mut positions = Vec::with_capacity(spec.total_atoms());
    let mut roles = Vec::with_capacity(spec.total_atoms());
    let mut segments = Vec::new();
    let mut emitter_indices = 0..0;
    let mut cursor: Option<f64> = None;

    for seg in spec.segments.iter().filter(|s| s.count > 0) {
        let start = cursor.map_or(0.0, |c| c + spec.gap_d0);
        let len = seg.extent(params);
        let zs = match seg.disorder {
            Some(_) => draw_disordered(&mut rng, seg.count, start, len, floor)?,
            None => (0..seg.count).map(|j| start + j as f64 * seg.spacing).collect(),
        };
        let first = positions.len();
        positions.extend_from_slice(&zs);
        roles.extend(std::iter::repeat_n(seg.role, seg.count));
        let indices = first..positions.len();
        if seg.role == SegmentRole::Emitter {
            emitter_indices = indices.clone();
        }
        segments.push(SegmentExtent {
            role: seg.role,
            indices,
            z_start: start,
            z_end: start + len,
        });
        cursor = Some(start + len);
    }

    let origin = positions[0];
    if origin != 0.0 {
        for z in positions.iter_mut() {
            *z -= origin;
        }
        for s in segments.iter_mut() {
            s.z_start -= origin;
            s.z_end -= origin;
        }
    }
    check_separation(&positions, params)?;
    Ok(AtomArray {
        positions,
        roles,
        emitter_indices,
        segments,
    })
}

/// Single-excitation amplitudes over the atoms of an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &[C64]) -> C64 {
        self.amplitudes.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Phased Dicke state on the emitter segment, ϑ_a = k_wg·z_a mod 2π.
pub fn dicke_initial_state(array: &AtomArray, params: &PhysParams) -> StateVector {
    let n_c = array.n_emitter();
    let norm = 1.0 / (n_c as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); array.len()];
    for a in array.emitter_indices.clone() {
        let theta = params.guided_phase(array.positions[a], 0.0);
        amps[a] = C64::from_polar(norm, theta);
    }
    StateVector::new(amps)
}
