use std::collections::BTreeSet;

use cellfree_isac::channel::{pathloss_db, steering_vector, ArrayGeometry, LinkKind};
use cellfree_isac::clustering::ClusterAssignment;
use cellfree_isac::config::{ExperimentConfig, ScalabilityMode};
use cellfree_isac::deployment::{build_scan_schedule, generate_layout, Position3D};
use cellfree_isac::linalg::{cn_matrix, cn_vector, CMat};
use cellfree_isac::metrics::empirical_cdf;
use cellfree_isac::precoding::{allocate_power, zf_sense_beam};
use cellfree_isac::rng::{stream, Purpose};
use cellfree_isac::sensing::{glrt_statistic, Dictionary};
use proptest::prelude::*;

fn mode_strategy() -> impl Strategy<Value = ScalabilityMode> {
    prop::sample::select(ScalabilityMode::ALL.to_vec())
}

fn assignment(seed: u64, mode: ScalabilityMode, q: usize, tx: usize, rx: usize) -> (usize, ClusterAssignment) {
    let cfg = ExperimentConfig::default();
    let layout = generate_layout(&cfg, &mut stream(seed, 0, Purpose::Layout, 0)).unwrap();
    let gain = |k: usize, m: usize| 1.0 / (1.0 + layout.ues[k].distance(&layout.aps[m]));
    (cfg.aps, ClusterAssignment::build(&layout, gain, mode, q, tx, rx).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assignment_invariants(seed in 0u64..1000, mode in mode_strategy(), q in 1usize..6, tx in 1usize..8, rx in 1usize..4) {
        let (m_aps, a) = assignment(seed, mode, q, tx, rx);
        let txs: BTreeSet<usize> = a.tx_aps.iter().copied().collect();
        let rxs: BTreeSet<usize> = a.rx_aps.iter().copied().collect();
        prop_assert!(txs.is_disjoint(&rxs));
        prop_assert_eq!(txs.len() + rxs.len(), m_aps);
        for (k, serving) in a.serving.iter().enumerate() {
            for m in serving {
                prop_assert!(txs.contains(m));
                prop_assert!(a.served[*m].contains(&k));
            }
        }
        for (m, served) in a.served.iter().enumerate() {
            for k in served {
                prop_assert!(a.serving[*k].contains(&m));
            }
        }
        for c in &a.clusters {
            prop_assert!(!c.tx.is_empty() && !c.rx.is_empty());
        }
        if mode.target_centric() {
            let mut seen = BTreeSet::new();
            for c in &a.clusters {
                for m in c.tx.iter().chain(&c.rx) {
                    prop_assert!(seen.insert(*m), "AP {} in two clusters", m);
                }
            }
        }
        // a power plan sums to the budget on every AP that transmits
        for &m in &a.tx_aps {
            let active = a.sensing_active(m);
            let n = a.served[m].len();
            let (ue, s) = allocate_power(2.0, n, active, None).unwrap();
            if n > 0 || active {
                prop_assert!((n as f64 * ue + s - 2.0).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn power_split_conserves(n in 0usize..64, active: bool, share in prop::option::of(0.0f64..=1.0), p in 0.1f64..10.0) {
        let (ue, s) = allocate_power(p, n, active, share).unwrap();
        prop_assert!(ue >= 0.0 && s >= 0.0);
        if !active {
            prop_assert_eq!(s, 0.0);
        }
        if n > 0 || active {
            prop_assert!((n as f64 * ue + s - p).abs() <= 4.0 * f64::EPSILON * p);
        }
    }

    #[test]
    fn zf_annuls_chosen_channels(seed: u64, k in 0usize..8, x in -500.0f64..500.0, y in -500.0f64..500.0) {
        let mut rng = stream(seed, 0, Purpose::Calibration, 0);
        let geom = ArrayGeometry::new(8, 0.5, 0.0).unwrap();
        let chans: Vec<_> = (0..7).map(|_| cn_vector(8, &mut rng)).collect();
        let refs: Vec<_> = chans.iter().collect();
        let k = k.min(7);
        let ap = Position3D::new(0.0, 0.0, 10.0);
        let zf = zf_sense_beam(&geom, &Position3D::new(x, y, 110.0), &ap, &refs, k).unwrap();
        prop_assert!((zf.beam.norm() - 1.0).abs() < 1e-12);
        if !zf.fallback {
            for h in &chans[..k] {
                prop_assert!(h.dotc(&zf.beam).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn glrt_nonnegative_and_monotone_in_receivers(seed: u64, cols in 1usize..7, extra in 1usize..4) {
        let mut rng = stream(seed, 1, Purpose::Calibration, 0);
        let dicts: Vec<Dictionary> = (0..1 + extra)
            .map(|i| Dictionary::from_columns(i, cn_matrix(8, cols, &mut rng)).unwrap())
            .collect();
        let ys: Vec<_> = (0..1 + extra).map(|_| cn_vector(8, &mut rng)).collect();
        let mut prev = 0.0;
        for r in 1..=dicts.len() {
            let d: Vec<&Dictionary> = dicts[..r].iter().collect();
            let y: Vec<_> = ys[..r].iter().collect();
            let s = glrt_statistic(&d, &y).unwrap();
            prop_assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn glrt_column_space_invariance(seed: u64, cols in 1usize..7) {
        let mut rng = stream(seed, 2, Purpose::Calibration, 0);
        let d = cn_matrix(8, cols, &mut rng);
        let t: CMat = cn_matrix(cols, cols, &mut rng);
        prop_assume!(t.clone().try_inverse().is_some());
        let y = cn_vector(8, &mut rng);
        let a = glrt_statistic(&[&Dictionary::from_columns(0, d.clone()).unwrap()], &[&y]).unwrap();
        let b = glrt_statistic(&[&Dictionary::from_columns(0, &d * t).unwrap()], &[&y]).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(b));
    }

    #[test]
    fn cdf_of_concatenation(a in prop::collection::vec(-1e6f64..1e6, 1..50), b in prop::collection::vec(-1e6f64..1e6, 1..50)) {
        let mut joined = a.clone();
        joined.extend(&b);
        let mut swapped = b.clone();
        swapped.extend(&a);
        let x = empirical_cdf(&joined).unwrap();
        prop_assert_eq!(&x, &empirical_cdf(&swapped).unwrap());
        prop_assert!(x.probabilities.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(x.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*x.probabilities.last().unwrap(), 1.0);
    }

    #[test]
    fn steering_entries_have_unit_modulus(n in 1usize..16, az in -3.2f64..3.2, el in -1.5f64..1.5, spacing in 0.1f64..2.0) {
        let geom = ArrayGeometry::new(n, spacing, 0.0).unwrap();
        let a = steering_vector(&geom, az, el);
        prop_assert_eq!(a.len(), n);
        for z in a.iter() {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!((a[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pathloss_increases_with_distance(d in 1.0f64..5000.0, step in 0.01f64..1000.0) {
        for kind in [LinkKind::UeApNlos, LinkKind::ApApLos, LinkKind::ApTargetLos] {
            prop_assert!(pathloss_db(d + step, kind, 2e9) > pathloss_db(d, kind, 2e9));
        }
    }

    #[test]
    fn schedule_sweeps_every_cell(seed: u64, regions in prop::sample::select(vec![1usize, 2, 4, 6, 8, 9])) {
        let cfg = ExperimentConfig { regions, ..ExperimentConfig::default() };
        let layout = generate_layout(&cfg, &mut stream(seed, 0, Purpose::Layout, 0)).unwrap();
        let sched = build_scan_schedule(&layout.regions, &mut stream(seed, 0, Purpose::Schedule, 0));
        for (l, region) in layout.regions.iter().enumerate() {
            let seen: BTreeSet<usize> = sched.epochs.iter().map(|e| e[l]).collect();
            prop_assert_eq!(seen.len(), region.cells.len());
        }
    }

    #[test]
    fn config_text_round_trip(seed: u64, drops in 1usize..500, pfa in 1e-4f64..0.5, mode in mode_strategy()) {
        let cfg = ExperimentConfig { seed, drops, pfa, mode, ..ExperimentConfig::default() };
        prop_assert_eq!(ExperimentConfig::parse_kv(&cfg.to_kv()).unwrap(), cfg);
    }
}
