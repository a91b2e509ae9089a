//! Executes a resolved configuration and writes its artifacts.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use wgchain_core::analytic::{classify_regime, RegimeReport};
use wgchain_core::dynamics::{
    default_time_grid, evolve_markovian, fit_decay_rate, fit_log_slope, log_time_grid, probabilities,
    superradiant_overlap, AmplitudeTrajectory, Observable, Overlap, ProbabilitySeries, DEFAULT_TIME_SAMPLES,
};
use wgchain_core::emission::{
    emission_spectrum, energy_ledger, profiles_csv, series_from_outgoing, spatial_profile, uniform_z_grid,
    Direction, EmissionSpectrum, EnergyLedger, SpatialProfile, DEFAULT_PROFILE_SAMPLES, LEDGER_BALANCE_LIMIT,
    LEDGER_DISCREPANCY_LIMIT,
};
use wgchain_core::hamiltonian::{add_free_space_coupling, decay_partition, effective_hamiltonian};
use wgchain_core::model::{build_chain, dicke_initial_state, AtomArray, ChainSpec, SegmentRole, StateVector};
use wgchain_core::spectral::{build_grid, resolvent_sweep, time_domain, GridScales, Kernel, SpectralGrid, Window};
use wgchain_core::{Error, PhysParams, Result};

use crate::config::{Method, RunConfig};
use crate::fit::{jc_fit, oscillation_fit};
use crate::summary::{finite, Diagnostics, MemberSummary, Rates, RunSummary, FORMAT_VERSION};

/// One realization of the chain.
#[derive(Debug, Clone)]
pub struct MemberResult {
    pub seed: u64,
    pub array: AtomArray,
    pub psi0: StateVector,
    pub trajectory: AmplitudeTrajectory,
    pub series: ProbabilitySeries,
    pub spectra: Option<(EmissionSpectrum, EmissionSpectrum)>,
    pub profiles: Option<(SpatialProfile, SpatialProfile)>,
    pub ledger: EnergyLedger,
    pub grid: Option<SpectralGrid>,
    pub max_residual: Option<f64>,
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub series: ProbabilitySeries,
    pub profiles: Option<(SpatialProfile, SpatialProfile)>,
    pub members: Vec<MemberResult>,
}

fn mirror_count(chain: &ChainSpec) -> usize {
    chain.count(SegmentRole::LeftMirror).max(chain.count(SegmentRole::RightMirror))
}

pub fn grid_scales(chain: &ChainSpec, array: &AtomArray, params: &PhysParams) -> GridScales {
    let n_m = mirror_count(chain);
    GridScales {
        gamma_c: params.lattice_superradiant_rate(chain.count(SegmentRole::Emitter)),
        gamma_m: if n_m > 0 { params.lattice_superradiant_rate(n_m) } else { 0.0 },
        length: array.length(),
    }
}

pub fn time_grid(config: &RunConfig) -> Result<Vec<f64>> {
    let p = &config.params;
    let n_m = mirror_count(&config.chain);
    let fast = p
        .lattice_superradiant_rate(config.chain.count(SegmentRole::Emitter))
        .max(if n_m > 0 { p.lattice_superradiant_rate(n_m) } else { 0.0 });
    let tm = config.time;
    if tm == Default::default() {
        return default_time_grid(fast, p.gamma_ext);
    }
    let t_max = tm.t_max.unwrap_or(12.0 / p.gamma_ext);
    let t_first = tm.t_first.unwrap_or(0.01 / fast).min(0.5 * t_max);
    log_time_grid(t_first, t_max, tm.samples.unwrap_or(DEFAULT_TIME_SAMPLES))
}

pub fn spectral_grid(config: &RunConfig, scales: GridScales, t_max: f64) -> Result<SpectralGrid> {
    let mut grid = build_grid(&config.params, scales, t_max)?;
    let sp = config.spectral;
    if let Some(h) = sp.half_width {
        grid.delta_min = -h;
        grid.delta_max = h;
    }
    if let Some(n) = sp.n_points {
        grid.n_points = n;
    }
    if let Some(f) = sp.taper {
        grid.window = if f > 0.0 { Window::RaisedCosine { fraction: f } } else { Window::None };
    }
    grid.validate()?;
    Ok(grid)
}

/// Method actually used for `requested` given the regime.
pub fn select_method(requested: Method, regime: &RegimeReport) -> Method {
    match requested {
        Method::Auto if regime.markovian => Method::Markovian,
        Method::Auto => Method::Spectral,
        m => m,
    }
}

/// Ledger when no spectra are available: the time-domain energies stand in
/// for the spectral weights.
fn series_ledger(series: &ProbabilitySeries) -> EnergyLedger {
    let last = series.len() - 1;
    let (l, r) = (series.e_left[last], series.e_right[last]);
    let raman = series.e_raman[last];
    let ext = series.e_ext[last];
    let residual = series.p[last];
    let balance_error = (l + r + raman + ext + residual - 1.0).abs();
    EnergyLedger {
        p_left: l,
        p_right: r,
        p_raman: raman,
        p_ext: ext,
        residual,
        balance_error,
        discrepancy: 0.0,
        converged: balance_error <= LEDGER_BALANCE_LIMIT,
    }
}

fn lap(timings: &mut BTreeMap<String, f64>, stage: &str, start: &mut Instant) {
    timings.insert(stage.into(), start.elapsed().as_secs_f64());
    *start = Instant::now();
}

/// Runs one realization with `seed` and `method` (not `Auto`).
pub fn run_member(config: &RunConfig, seed: u64, method: Method) -> Result<MemberResult> {
    let params = &config.params;
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut chain = config.chain.clone();
    chain.rng_seed = seed;
    let array = build_chain(&chain, params)?;
    let psi0 = dicke_initial_state(&array, params);
    let t = time_grid(config)?;
    let t_max = *t.last().unwrap();
    let scales = grid_scales(&chain, &array, params);
    lap(&mut timings, "geometry", &mut clock);

    let (trajectory, series, spectra, grid, max_residual) = match method {
        Method::Markovian => {
            let mut h = effective_hamiltonian(&array, params, None)?;
            if config.free_space {
                h = add_free_space_coupling(&h, &array, params)?;
            }
            let traj = evolve_markovian(&h, &psi0, &t)?;
            let series = probabilities(&traj, &psi0, &array, &decay_partition(&h, &array, params)?)?;
            lap(&mut timings, "evolution", &mut clock);
            if config.free_space {
                (traj, series, None, None, None)
            } else {
                let grid = spectral_grid(config, scales, t_max)?;
                let sweep = resolvent_sweep(&array, params, &psi0, &grid, Kernel::Instantaneous)?;
                let left = emission_spectrum(&sweep, &array, params, Direction::Left)?;
                let right = emission_spectrum(&sweep, &array, params, Direction::Right)?;
                lap(&mut timings, "spectra", &mut clock);
                (traj, series, Some((left, right)), Some(grid), Some(sweep.max_residual))
            }
        }
        Method::Spectral => {
            if config.free_space {
                return Err(Error::Unsupported(
                    "free-space coupling is available with the markovian method only".into(),
                ));
            }
            let grid = spectral_grid(config, scales, t_max)?;
            let sweep = resolvent_sweep(&array, params, &psi0, &grid, Kernel::Retarded)?;
            lap(&mut timings, "resolvent", &mut clock);
            let traj = time_domain(&sweep, &t)?;
            let left = emission_spectrum(&sweep, &array, params, Direction::Left)?;
            let right = emission_spectrum(&sweep, &array, params, Direction::Right)?;
            let series = series_from_outgoing(&traj, &psi0, &array, params, &left, &right)?;
            lap(&mut timings, "synthesis", &mut clock);
            (traj, series, Some((left, right)), Some(grid), Some(sweep.max_residual))
        }
        Method::Auto => return Err(Error::Usage("method must be resolved before running a member".into())),
    };

    let (profiles, ledger) = match &spectra {
        Some((left, right)) => {
            let z = uniform_z_grid(t_max, DEFAULT_PROFILE_SAMPLES);
            let pl = spatial_profile(left, &z)?;
            let pr = spatial_profile(right, &z)?;
            lap(&mut timings, "profiles", &mut clock);
            (Some((pl, pr)), energy_ledger(&series, left, right))
        }
        None => (None, series_ledger(&series)),
    };
    Ok(MemberResult {
        seed,
        array,
        psi0,
        trajectory,
        series,
        spectra,
        profiles,
        ledger,
        grid,
        max_residual,
        timings,
    })
}

fn mean_series(members: &[MemberResult]) -> ProbabilitySeries {
    let n = members.len() as f64;
    let first = &members[0].series;
    let avg = |f: fn(&ProbabilitySeries) -> &Vec<f64>| -> Vec<f64> {
        (0..first.len())
            .map(|i| members.iter().map(|m| f(&m.series)[i]).sum::<f64>() / n)
            .collect()
    };
    ProbabilitySeries {
        t: first.t.clone(),
        p: avg(|s| &s.p),
        p0: avg(|s| &s.p0),
        pa: avg(|s| &s.pa),
        e_left: avg(|s| &s.e_left),
        e_right: avg(|s| &s.e_right),
        e_raman: avg(|s| &s.e_raman),
        e_ext: avg(|s| &s.e_ext),
    }
}

fn mean_profiles(members: &[MemberResult]) -> Option<(SpatialProfile, SpatialProfile)> {
    let all: Vec<&(SpatialProfile, SpatialProfile)> = members.iter().filter_map(|m| m.profiles.as_ref()).collect();
    if all.len() != members.len() {
        return None;
    }
    let n = all.len() as f64;
    let avg = |pick: fn(&(SpatialProfile, SpatialProfile)) -> &SpatialProfile| {
        let base = pick(all[0]);
        let alpha2: Vec<f64> = (0..base.z.len())
            .map(|i| all.iter().map(|p| pick(p).alpha2[i]).sum::<f64>() / n)
            .collect();
        SpatialProfile {
            z: base.z.clone(),
            alpha2,
            energy: all.iter().map(|p| pick(p).energy).sum::<f64>() / n,
            captured: all.iter().map(|p| pick(p).captured).sum::<f64>() / n,
            complete: all.iter().all(|p| pick(p).complete),
        }
    };
    Some((avg(|p| &p.0), avg(|p| &p.1)))
}

fn mean_ledger(members: &[MemberResult]) -> EnergyLedger {
    let n = members.len() as f64;
    let avg = |f: fn(&EnergyLedger) -> f64| members.iter().map(|m| f(&m.ledger)).sum::<f64>() / n;
    let discrepancy = avg(|l| l.discrepancy);
    let balance_error = avg(|l| l.balance_error);
    EnergyLedger {
        p_left: avg(|l| l.p_left),
        p_right: avg(|l| l.p_right),
        p_raman: avg(|l| l.p_raman),
        p_ext: avg(|l| l.p_ext),
        residual: avg(|l| l.residual),
        balance_error,
        discrepancy,
        converged: members.iter().all(|m| m.ledger.converged)
            && discrepancy <= LEDGER_DISCREPANCY_LIMIT
            && balance_error <= LEDGER_BALANCE_LIMIT,
    }
}

/// Early, late and fast-component rates of p.
pub fn fit_rates(series: &ProbabilitySeries, gamma_early: f64, gamma_hybrid: f64) -> Rates {
    let t_max = *series.t.last().unwrap();
    let early = fit_decay_rate(series, (0.0, 1.0 / gamma_early), Observable::P).ok();
    let late = fit_decay_rate(series, (0.5 * t_max, t_max), Observable::P).ok();
    let fast_component = late.and_then(|l| {
        let fast: Vec<f64> = series
            .t
            .iter()
            .zip(&series.p)
            .map(|(t, p)| p - (l.intercept - l.rate * t).exp())
            .collect();
        let f = fit_log_slope(&series.t, &fast, (0.0, 3.0 / gamma_hybrid)).ok()?;
        finite(f.rate - l.rate)
    });
    Rates {
        early,
        late,
        fast_component,
    }
}

/// max |p0 − pa|/p where p is above 1e-300.
pub fn witness(series: &ProbabilitySeries) -> f64 {
    (0..series.len())
        .filter(|&i| series.p[i] > 1e-300)
        .map(|i| (series.p0[i] - series.pa[i]).abs() / series.p[i])
        .fold(0.0, f64::max)
}

pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let params = &config.params;
    params.validate()?;
    config.chain.validate()?;
    let regime = classify_regime(&config.chain, params)?;
    let method = select_method(config.method, &regime);

    let seeds: Vec<u64> = (0..config.ensemble as u64).map(|i| config.seed.wrapping_add(i)).collect();
    let members = seeds
        .par_iter()
        .map(|&s| run_member(config, s, method))
        .collect::<Result<Vec<_>>>()?;
    let mut fit_clock = Instant::now();

    let series = mean_series(&members);
    let profiles = mean_profiles(&members);
    let ledger = if members.len() == 1 {
        members[0].ledger
    } else {
        mean_ledger(&members)
    };

    let n_c = config.chain.count(SegmentRole::Emitter);
    let gamma_early = params.lattice_superradiant_rate(n_c);
    let gamma_hybrid = params.lattice_superradiant_rate(config.chain.total_atoms());
    let rates = fit_rates(&series, gamma_early, gamma_hybrid);
    let oscillation = oscillation_fit(&series.t, &series.p0);
    let gamma_a = params.gamma_tot() - params.gamma_wg();
    // The cavity model only describes runs in the retarded-cavity regime.
    let jc = oscillation
        .fitted()
        .filter(|_| regime.cavity_retardation == Some(true))
        .and_then(|o| jc_fit(&series.t, &series.p0, gamma_a, Some(o)));
    let regime = match &jc {
        Some(f) => regime.with_coupling(f.g),
        None => regime,
    };
    let overlap: Option<Overlap> = {
        let m = &members[0];
        effective_hamiltonian(&m.array, params, None)
            .and_then(|h| superradiant_overlap(&h, &m.psi0))
            .ok()
    };
    let first = &members[0];
    let diagnostics = Diagnostics {
        propagator: first.trajectory.propagator,
        eigen_condition: first.trajectory.condition.and_then(finite),
        max_balance_error: members.iter().map(|m| m.series.max_balance_error()).fold(0.0, f64::max),
        witness_p0_pa: members.iter().map(|m| witness(&m.series)).fold(0.0, f64::max),
        overlap,
        spectral_grid: first.grid,
        max_solve_residual: members.iter().filter_map(|m| m.max_residual).reduce(f64::max),
        profile_capture_left: profiles.as_ref().map(|p| p.0.captured),
        profile_capture_right: profiles.as_ref().map(|p| p.1.captured),
        profiles_complete: profiles.as_ref().is_some_and(|p| p.0.complete && p.1.complete),
    };
    let summaries = members
        .iter()
        .map(|m| {
            let r = fit_rates(&m.series, gamma_early, gamma_hybrid);
            MemberSummary {
                seed: m.seed,
                ledger: m.ledger,
                early_rate: r.early.map(|f| f.rate),
                late_rate: r.late.map(|f| f.rate),
            }
        })
        .collect();

    let mut timings = first.timings.clone();
    lap(&mut timings, "fits", &mut fit_clock);
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    let summary = RunSummary {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        method_used: method,
        regime,
        rates,
        oscillation,
        jc_fit: jc,
        ledger,
        converged: ledger.converged,
        diagnostics,
        members: summaries,
        timings,
    };
    Ok(RunOutput {
        summary,
        series,
        profiles,
        members,
    })
}

/// Writes `probabilities.csv`, `profiles.csv` and `summary.json` to `dir`.
pub fn write_artifacts(output: &RunOutput, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("probabilities.csv"), output.series.to_csv())?;
    let profiles = match &output.profiles {
        Some((l, r)) => profiles_csv(l, r),
        None => "z_over_vg_per_gamma,alpha2_left,alpha2_right\n".to_string(),
    };
    std::fs::write(dir.join("profiles.csv"), profiles)?;
    let json = serde_json::to_string_pretty(&output.summary).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}

/// Runs on a dedicated pool when `workers` is set.
pub fn execute_with_workers(config: &RunConfig) -> Result<RunOutput> {
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {n} workers: {e}")))?
            .install(|| execute(config)),
        None => execute(config),
    }
}
