mod common;

use faer::Mat;
use proptest::prelude::*;
use wgchain_core::dynamics::*;
use wgchain_core::hamiltonian::{decay_partition, effective_hamiltonian, EffectiveHamiltonian};
use wgchain_core::model::*;
use wgchain_core::{Error, C64};

fn grid(t_max: f64) -> Vec<f64> {
    log_time_grid(1e-3, t_max, 400).unwrap()
}

#[test]
fn single_atom_closed_form() {
    let (a, s, p) = common::chain(0, 1, 0, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let t = grid(12.0);
    let traj = evolve_markovian(&h, &s, &t).unwrap();
    let part = decay_partition(&h, &a, &p).unwrap();
    let series = probabilities(&traj, &s, &a, &part).unwrap();
    for (ti, pi) in t.iter().zip(&series.p) {
        assert!((pi - (-p.gamma_tot() * ti).exp()).abs() < 1e-13);
    }
    let i1 = t.iter().position(|&x| x >= 1.0).unwrap();
    let p1 = (-1.05f64 * t[i1]).exp();
    assert!((series.p[i1] - p1).abs() < 1e-13);
    assert!(((-1.05f64).exp() - 0.3499).abs() < 1e-4);
    let fit = fit_decay_rate(&series, (0.0, 12.0), Observable::P).unwrap();
    assert!((fit.rate - p.gamma_tot()).abs() < 1e-9);
    let last = series.len() - 1;
    assert!((series.e_left[last] - series.e_right[last]).abs() < 1e-12);
}

#[test]
fn pair_closed_form() {
    let (a, s, p) = common::chain(0, 2, 0, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let t = grid(8.0);
    let traj = evolve_markovian(&h, &s, &t).unwrap();
    let rate = p.gamma_tot() + p.gamma_wg();
    for (ti, b) in t.iter().zip(&traj.amplitudes) {
        let env = (-0.5 * rate * ti).exp();
        for (x, x0) in b.iter().zip(&s.amplitudes) {
            assert!((x - x0 * env).norm() < 1e-13);
        }
    }
}

#[test]
fn zero_hamiltonian_is_identity() {
    let a = common::random_array(6, 1, &common::params());
    let s = common::random_state(&a, 1);
    let h = EffectiveHamiltonian::from_matrix(Mat::zeros(6, 6));
    let t = grid(5.0);
    for traj in [evolve_markovian(&h, &s, &t).unwrap(), evolve_exponential(&h, &s, &t).unwrap()] {
        for b in &traj.amplitudes {
            for (x, x0) in b.iter().zip(&s.amplitudes) {
                assert!((x - x0).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let (a, s, p) = common::chain(0, 3, 0, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    assert!(matches!(evolve_markovian(&h, &s, &[0.1, 0.2]), Err(Error::Usage(_))));
    assert!(matches!(evolve_markovian(&h, &s, &[0.0, 0.2, 0.1]), Err(Error::Usage(_))));
    let hr = effective_hamiltonian(&a, &p, Some(0.5)).unwrap();
    assert!(matches!(evolve_markovian(&hr, &s, &[0.0, 1.0]), Err(Error::Usage(_))));
    let mut hn = h.clone();
    hn.matrix[(0, 1)] = C64::new(f64::NAN, 0.0);
    assert!(matches!(evolve_markovian(&hn, &s, &[0.0, 1.0]), Err(Error::Numerical(_))));
    let other = common::chain(0, 4, 0, 0.5);
    let traj = evolve_markovian(&h, &s, &[0.0, 1.0]).unwrap();
    let part = decay_partition(&h, &a, &p).unwrap();
    assert!(matches!(probabilities(&traj, &other.1, &other.0, &part), Err(Error::Usage(_))));
}

#[test]
fn overlap_examples() {
    let p = common::params();
    let (a, s, _) = common::chain(0, 30, 0, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let ov = superradiant_overlap(&h, &s).unwrap();
    assert!((ov.value - 1.0).abs() < 1e-3, "{}", ov.value);

    let (a, s, _) = common::chain(30, 30, 30, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let ov = superradiant_overlap(&h, &s).unwrap();
    assert!((ov.value - 1.0 / 3.0).abs() < 0.1 / 3.0, "{}", ov.value);

    // Brute force for N_C = 1 inside a 3-atom half-wave chain: the
    // superradiant mode of [[d, o, -o], [o, d, o], [-o, o, d]] style
    // matrices is the alternating vector, overlap exactly 1/3.
    let (a, s, _) = common::chain(1, 1, 1, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let ov = superradiant_overlap(&h, &s).unwrap();
    assert!((ov.value - 1.0 / 3.0).abs() < 1e-12, "{}", ov.value);
    assert!(!ov.degenerate);
}

#[test]
fn degenerate_cluster_is_flagged() {
    let mut m = Mat::<C64>::zeros(3, 3);
    m[(0, 0)] = C64::new(0.0, -1.0);
    m[(1, 1)] = C64::new(0.0, -1.0);
    m[(2, 2)] = C64::new(0.0, -0.2);
    let h = EffectiveHamiltonian::from_matrix(m);
    let s = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.6), C64::new(0.529_150_262_212_918_1, 0.0)]);
    let ov = superradiant_overlap(&h, &s).unwrap();
    assert!(ov.degenerate);
    assert_eq!(ov.cluster_size, 2);
    assert!((ov.value - 0.72).abs() < 1e-12);
}

#[test]
fn case_one_witness_and_symmetry() {
    let (a, s, p) = common::chain(30, 30, 30, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let t = default_time_grid(p.lattice_superradiant_rate(90), p.gamma_ext).unwrap();
    let traj = evolve_markovian(&h, &s, &t).unwrap();
    let part = decay_partition(&h, &a, &p).unwrap();
    let series = probabilities(&traj, &s, &a, &part).unwrap();
    for i in 0..series.len() {
        assert!((series.p0[i] - series.pa[i]).abs() <= 1e-6 * series.p[i]);
    }
    let last = series.len() - 1;
    assert!((series.e_left[last] - series.e_right[last]).abs() < 1e-6);
    assert!(series.max_balance_error() < 1e-6);
}

#[test]
fn fast_stage_rate_matches_full_array_mode() {
    let (a, s, p) = common::chain(30, 30, 30, 0.5);
    let h = effective_hamiltonian(&a, &p, None).unwrap();
    let t = default_time_grid(p.lattice_superradiant_rate(90), p.gamma_ext).unwrap();
    let traj = evolve_markovian(&h, &s, &t).unwrap();
    let series = probabilities(&traj, &s, &a, &decay_partition(&h, &a, &p).unwrap()).unwrap();
    let late = fit_decay_rate(&series, (6.0, 12.0), Observable::P).unwrap();
    // Subtract the slow tail, then fit the remaining fast component.
    let fast: Vec<f64> = series
        .t
        .iter()
        .zip(&series.p)
        .map(|(t, p)| p - (late.intercept - late.rate * t).exp())
        .collect();
    let fit = fit_log_slope(&series.t, &fast, (0.0, 0.5)).unwrap();
    let n_tot_rate = 90.0 * p.gamma_1d() / 2.0;
    assert!(((fit.rate - late.rate) - n_tot_rate).abs() < 0.1 * n_tot_rate, "{}", fit.rate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigen_and_exponential_agree(seed in any::<u64>()) {
        let p = common::params();
        let a = common::random_array(20, seed, &p);
        let s = common::random_state(&a, seed);
        let h = effective_hamiltonian(&a, &p, None).unwrap();
        let t = log_time_grid(0.01, 10.0, 200).unwrap();
        let e = evolve_markovian(&h, &s, &t).unwrap();
        let x = evolve_exponential(&h, &s, &t).unwrap();
        prop_assert_eq!(e.propagator, Propagator::Eigen);
        prop_assert!(e.max_abs_diff(&x) < 1e-8);
    }

    #[test]
    fn invariants_on_random_geometries(seed in any::<u64>(), n in 2usize..30) {
        let p = common::params();
        let a = common::random_array(n, seed, &p);
        let s = common::random_state(&a, seed);
        let h = effective_hamiltonian(&a, &p, None).unwrap();
        let t = default_time_grid(p.lattice_superradiant_rate(n), p.gamma_ext).unwrap();
        let traj = evolve_markovian(&h, &s, &t).unwrap();
        let part = decay_partition(&h, &a, &p).unwrap();
        let series = probabilities(&traj, &s, &a, &part).unwrap();
        prop_assert!((series.p[0] - 1.0).abs() < 1e-12);
        prop_assert!((series.p0[0] - 1.0).abs() < 1e-12);
        prop_assert!((series.pa[0] - 1.0).abs() < 1e-12);
        for i in 0..series.len() {
            prop_assert!(series.p0[i] <= series.pa[i] + 1e-12);
            prop_assert!(series.pa[i] <= series.p[i] + 1e-12);
            prop_assert!(series.p[i] <= 1.0 + 1e-9);
        }
        for w in series.p.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        prop_assert!(series.max_balance_error() < 1e-6, "{}", series.max_balance_error());
        let phases = plane_wave(&a, part.k);
        for b in traj.amplitudes.iter().step_by(97) {
            let (r, l) = directional_fluxes(b, &phases, part.gamma_wg);
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += part.guided_coherent[(i, j)] * (b[i].conj() * b[j]).re;
                }
            }
            prop_assert!((r + l - quad).abs() < 1e-10);
        }
    }
}
