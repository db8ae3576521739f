use proptest::prelude::*;
use xchan::channel::ChannelLevels;
use xchan::outage::{
    groshev_bound, groshev_event, mac_min_distance, mac_outage_map, mc_groshev_measure, mc_outage_det,
    replay_det_sample, wilson95, GroshevParams, OutageEstimate,
};
use xchan::rates::allocate;
use xchan::Error;

proptest! {
    #[test]
    fn wilson_contains_estimate(samples in 1u64..100_000, frac in 0.0f64..=1.0) {
        let failures = (samples as f64 * frac) as u64;
        let (lo, hi) = wilson95(failures, samples);
        let p = failures as f64 / samples as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12 && 0.0 <= lo && hi <= 1.0);
    }

    #[test]
    fn groshev_event_matches_full_search(g in proptest::array::uniform3(1.0f64..4.0), beta in 0.01f64..1.0, q in (0u64..4, 0u64..4, 0u64..4), a in (1u64..4, 1u64..4)) {
        let p = GroshevParams::new(beta, a.0, a.1, q.0, q.1, q.2).unwrap();
        let mut brute = false;
        let (q0, q1, q2) = (q.0 as i64, q.1 as i64, q.2 as i64);
        for x in -q0..=q0 {
            for y in -q1..=q1 {
                for z in -q2..=q2 {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    let v = g[0] * x as f64 + a.0 as f64 * g[1] * y as f64 + a.1 as f64 * g[2] * z as f64;
                    brute |= v.abs() < beta;
                }
            }
        }
        prop_assert_eq!(groshev_event(&p, g), brute);
    }

    #[test]
    fn mac_witness_is_minimal(n in 0u32..12, h1 in 1.0f64..2.0, h2 in 1.0f64..2.0) {
        let (d, (k1, k2)) = mac_min_distance(n, h1, h2, 8, 2);
        let scale = 2f64.powi(n as i32);
        prop_assert!((d - scale * (h1 * k1 as f64 / 8.0 + h2 * k2 as f64 / 2.0).abs()).abs() < 1e-9);
        for a in -7i32..=7 {
            for b in -1i32..=1 {
                if (a, b) != (0, 0) {
                    prop_assert!(scale * (h1 * a as f64 / 8.0 + h2 * b as f64 / 2.0).abs() >= d - 1e-12);
                }
            }
        }
    }
}

#[test]
fn det_outage_is_replayable_and_thread_independent() {
    let n = ChannelLevels::symmetric(9);
    let a = allocate(&n).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| mc_outage_det(&n, &a, 3000, 42).unwrap())
    };
    let est: OutageEstimate = run(1);
    assert_eq!(est, run(3));
    assert!(est.failures > 0);
    for &i in &est.first_failures {
        assert!(replay_det_sample(&n, &a, 42, i).unwrap());
    }
    let first = est.first_failures[0];
    for i in 0..first {
        assert!(!replay_det_sample(&n, &a, 42, i).unwrap());
    }
}

#[test]
fn groshev_edge_cases() {
    // Only q0 free: |g0 q0| >= g0 > 1 >= beta, so the event is empty.
    let p = GroshevParams::new(1.0, 1, 1, 5, 0, 0).unwrap();
    assert_eq!(mc_groshev_measure(&p, 2000, 1).unwrap().fraction.failures, 0);
    // Large box, beta = 1: almost everything is in the event.
    let p = GroshevParams::new(1.0, 1, 1, 40, 40, 40).unwrap();
    let e = mc_groshev_measure(&p, 2000, 2).unwrap();
    assert!(e.measure > 26.0 && e.bound > 27.0);
    let p = GroshevParams::new(1.0, 1, 1, 1000, 1000, 1000).unwrap();
    assert!(matches!(mc_groshev_measure(&p, 10, 3), Err(Error::BudgetExceeded { .. })));
    assert!(GroshevParams::new(0.0, 1, 1, 1, 1, 1).is_err());
    assert!(GroshevParams::new(0.5, 0, 1, 1, 1, 1).is_err());
    assert_eq!(groshev_bound(&GroshevParams::new(0.5, 1, 1, 1, 1, 1).unwrap()), 1512.0);
}

#[test]
fn mac_map_is_mostly_constant_on_dyadic_cells() {
    // Cells of side 2^-(n+4) in gain space; a cell is constant when its
    // four corners agree. Strip edges cut through a minority of cells.
    let n = 6;
    let side = 1usize << (n + 4);
    let black = |h1: f64, h2: f64| mac_min_distance(n, h1, h2, 8, 2).0 <= 2.0;
    let mut constant = 0;
    let step = 1.0 / side as f64;
    for i in 0..side {
        for j in 0..side {
            let (x, y) = (1.0 + i as f64 * step, 1.0 + j as f64 * step);
            let c = [black(x, y), black(x + step, y), black(x, y + step), black(x + step, y + step)];
            constant += usize::from(c.iter().all(|&b| b == c[0]));
        }
    }
    assert!(constant as f64 >= 0.8 * (side * side) as f64, "{constant} of {}", side * side);
}

#[test]
fn mac_map_outputs() {
    let m = mac_outage_map(6, 32, 8, 2).unwrap();
    let mut pgm = Vec::new();
    m.write_pgm(&mut pgm).unwrap();
    assert!(pgm.starts_with(b"P5\n32 32\n255\n"));
    assert_eq!(pgm.len(), b"P5\n32 32\n255\n".len() + 32 * 32);
    let mut csv = Vec::new();
    m.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 32 * 32);
    assert!(text.starts_with("row,col,h1,h2,outage\n"));
    assert!(m.strip_count() > 0);
    assert!(mac_outage_map(6, 1, 8, 2).is_err());
}
