#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgchain_core::model::{build_chain, dicke_initial_state, AtomArray, ChainSpec, PhysParams, StateVector};
use wgchain_core::C64;

pub fn params() -> PhysParams {
    PhysParams::default()
}

/// Random sorted geometry with gaps in [0.05, 1.5) wavelengths and the
/// emitter in the middle third.
pub fn random_array(n: usize, seed: u64, p: &PhysParams) -> AtomArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0];
    for _ in 1..n {
        let last = *z.last().unwrap();
        z.push(last + 0.05 + 1.45 * rng.random::<f64>());
    }
    let lo = n / 3;
    let hi = (2 * n / 3).max(lo + 1);
    AtomArray::from_positions(z, lo..hi, p).unwrap()
}

/// Random normalized state supported on the emitter segment.
pub fn random_state(array: &AtomArray, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut amps = vec![C64::new(0.0, 0.0); array.len()];
    for a in array.emitter_indices.clone() {
        amps[a] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    StateVector::new(amps.into_iter().map(|c| c / norm).collect())
}

pub fn chain(n_l: usize, n_c: usize, n_r: usize, d0: f64) -> (AtomArray, StateVector, PhysParams) {
    let p = params();
    let a = build_chain(&ChainSpec::ordered(n_l, n_c, n_r, d0, &p), &p).unwrap();
    let s = dicke_initial_state(&a, &p);
    (a, s, p)
}

/// Classical fourth-order Runge-Kutta for y' = f(t, y) on complex vectors.
pub fn rk4<F>(f: F, y0: Vec<C64>, t_end: f64, steps: usize) -> Vec<Vec<C64>>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let h = t_end / steps as f64;
    let mut out = vec![y0.clone()];
    let mut y = y0;
    let axpy = |y: &[C64], k: &[C64], s: f64| -> Vec<C64> { y.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &axpy(&y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &axpy(&y, &k2, 0.5 * h));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        y = y
            .iter()
            .enumerate()
            .map(|(j, v)| v + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0))
            .collect();
        out.push(y.clone());
    }
    out
}
