mod common;

use proptest::prelude::*;
use wgchain_core::model::*;
use wgchain_core::Error;

fn disordered_left(seed: u64, p: &PhysParams) -> ChainSpec {
    ChainSpec {
        segments: vec![
            SegmentSpec::disordered(SegmentRole::LeftMirror, 100, 1.0, p),
            SegmentSpec::lattice(SegmentRole::Emitter, 1, p),
        ],
        gap_d0: 0.5,
        rng_seed: seed,
    }
}

#[test]
fn disordered_mirror_matches_recorded_stream() {
    let p = common::params();
    let a = build_chain(&disordered_left(42, &p), &p).unwrap();
    let mirror = &a.positions[0..100];
    assert!(mirror.windows(2).all(|w| w[1] > w[0]));
    let seg = a.segment(SegmentRole::LeftMirror).unwrap();
    assert!((seg.z_end - seg.z_start - 50.0).abs() < 1e-12);
    assert!(mirror.iter().all(|&z| z >= seg.z_start && z <= seg.z_end));
    assert_eq!(a.positions[0], 0.0);

    let fixture = include_str!("fixtures/disorder_seed42.txt");
    let expected: Vec<u64> = fixture
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| u64::from_str_radix(l.trim(), 16).unwrap())
        .collect();
    let got: Vec<u64> = a.positions.iter().map(|z| z.to_bits()).collect();
    assert_eq!(got, expected);

    let again = build_chain(&disordered_left(42, &p), &p).unwrap();
    assert_eq!(again.positions, a.positions);
    let other = build_chain(&disordered_left(43, &p), &p).unwrap();
    assert_ne!(other.positions, a.positions);
}

#[test]
fn disordered_guard_gap_is_edge_to_edge() {
    let p = common::params();
    let a = build_chain(&disordered_left(7, &p), &p).unwrap();
    let seg = a.segment(SegmentRole::LeftMirror).unwrap();
    let em = a.segment(SegmentRole::Emitter).unwrap();
    assert!((em.z_start - seg.z_end - 0.5).abs() < 1e-12);
}

#[test]
fn dicke_examples() {
    let p = common::params();
    let single = build_chain(&ChainSpec::bare(1, &p), &p).unwrap();
    let s = dicke_initial_state(&single, &p);
    assert_eq!(s.amplitudes[0], wgchain_core::C64::new(1.0, 0.0));

    let mut spec = ChainSpec::bare(4, &p);
    spec.segments[1].spacing = 1.0;
    let full = build_chain(&spec, &p).unwrap();
    for c in dicke_initial_state(&full, &p).amplitudes {
        assert!((c - wgchain_core::C64::new(0.5, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn dicke_lives_on_emitter() {
    let (a, s, _) = common::chain(3, 4, 2, 0.25);
    for (i, c) in s.amplitudes.iter().enumerate() {
        if a.emitter_indices.contains(&i) {
            assert!((c.norm() - 0.5).abs() < 1e-15);
        } else {
            assert_eq!(c.norm(), 0.0);
        }
    }
}

#[test]
fn config_errors() {
    let p = common::params();
    let mut spec = ChainSpec::ordered(2, 2, 2, 0.5, &p);
    spec.segments.swap(0, 2);
    assert!(matches!(build_chain(&spec, &p), Err(Error::Config(_))));
    let spec = ChainSpec::ordered(2, 2, 0, 0.0, &p);
    assert!(matches!(build_chain(&spec, &p), Err(Error::Config(_))));
    let mut spec = ChainSpec::ordered(0, 3, 0, 0.5, &p);
    spec.segments[1].spacing = 0.001;
    assert!(matches!(build_chain(&spec, &p), Err(Error::Geometry(_))));
}

#[test]
fn array_csv_columns() {
    let (a, _, p) = common::chain(1, 1, 1, 0.25);
    let csv = a.to_csv(&p);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,z_over_lambda_wg,segment_role"));
    assert_eq!(lines.next(), Some("0,0,left_mirror"));
    assert_eq!(lines.next(), Some("1,0.25,emitter"));
    assert_eq!(lines.next(), Some("2,0.5,right_mirror"));
}

proptest! {
    #[test]
    fn lattice_is_exactly_periodic(n_l in 0usize..20, n_c in 1usize..20, n_r in 0usize..20, q in 1u32..8) {
        let p = common::params();
        let d0 = 0.25 * q as f64;
        let a = build_chain(&ChainSpec::ordered(n_l, n_c, n_r, d0, &p), &p).unwrap();
        prop_assert_eq!(a.len(), n_l + n_c + n_r);
        for seg in &a.segments {
            let z = &a.positions[seg.indices.clone()];
            for (j, w) in z.windows(2).enumerate() {
                prop_assert_eq!(w[1] - w[0], 0.5, "segment {:?} step {}", seg.role, j);
            }
        }
        for w in a.segments.windows(2) {
            prop_assert_eq!(w[1].z_start - w[0].z_end, d0);
        }
    }

    #[test]
    fn dicke_state_norm_and_phases(n_l in 0usize..10, n_c in 1usize..40, q in 1u32..8) {
        let p = common::params();
        let a = build_chain(&ChainSpec::ordered(n_l, n_c, 3, 0.25 * q as f64, &p), &p).unwrap();
        let s = dicke_initial_state(&a, &p);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let e = &s.amplitudes[a.emitter_indices.clone()];
        for w in e.windows(2) {
            prop_assert!((w[1] + w[0]).norm() < 1e-14);
        }
    }

    #[test]
    fn disorder_is_deterministic(seed in any::<u64>(), count in 1usize..80, density in 0.5f64..2.0) {
        let p = common::params();
        let spec = ChainSpec {
            segments: vec![
                SegmentSpec::lattice(SegmentRole::Emitter, 3, &p),
                SegmentSpec::disordered(SegmentRole::RightMirror, count, density, &p),
            ],
            gap_d0: 0.5,
            rng_seed: seed,
        };
        let a = build_chain(&spec, &p).unwrap();
        let b = build_chain(&spec, &p).unwrap();
        prop_assert_eq!(&a.positions, &b.positions);
        prop_assert!(a.positions.windows(2).all(|w| w[1] - w[0] >= p.min_separation()));
    }
}
