use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xchan::bounds::{
    allocation_rates, det_bounds, gauss_bounds, gauss_sum_gap, max_sum_rate, sandwich_check, BoundSet, COEFFS,
    RATIO_TERMS,
};
use xchan::channel::{ChannelLevels, FineGains};
use xchan::rates::{allocate, capacity_approx, rate_to_f64};
use xchan::Rate;

fn strong_direct(max: u32) -> impl Strategy<Value = ChannelLevels> {
    (0..=max, 0..=max)
        .prop_flat_map(|(a, d)| {
            let m = a.min(d);
            (Just(a), 0..=m, 0..=m, Just(d))
        })
        .prop_map(|(a, b, c, d)| ChannelLevels::new(a, b, c, d))
}

fn any_levels(max: u32) -> impl Strategy<Value = ChannelLevels> {
    proptest::array::uniform4(0..=max).prop_map(|[a, b, c, d]| ChannelLevels::new(a, b, c, d))
}

fn fine_gains() -> impl Strategy<Value = FineGains> {
    proptest::array::uniform4(0.0f64..1.0).prop_map(|u| FineGains::new(2.0 - u[0], 2.0 - u[1], 2.0 - u[2], 2.0 - u[3]).unwrap())
}

/// Best sum found by hit-and-run sampling inside the region.
fn hit_and_run(b: &BoundSet<f64>, steps: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = [0.0f64; 4];
    let mut best = 0.0f64;
    for _ in 0..steps {
        let mut d = [0.0f64; 4].map(|_| rng.random::<f64>() - 0.5);
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.iter_mut().for_each(|v| *v /= norm);
        // feasible interval [lo, hi] of t along x + t d
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut cut = |a: [f64; 4], rhs: f64| {
            let ad: f64 = (0..4).map(|i| a[i] * d[i]).sum();
            let slack = rhs - (0..4).map(|i| a[i] * x[i]).sum::<f64>();
            if ad > 1e-15 {
                hi = hi.min(slack / ad);
            } else if ad < -1e-15 {
                lo = lo.max(slack / ad);
            }
        };
        for k in 0..10 {
            cut(COEFFS[k].map(|c| c as f64), b.rhs[k]);
        }
        for i in 0..4 {
            let mut a = [0.0; 4];
            a[i] = -1.0;
            cut(a, 0.0);
        }
        let t = lo + (hi - lo) * rng.random::<f64>();
        for i in 0..4 {
            x[i] += t * d[i];
        }
        best = best.max(x.iter().sum::<f64>());
    }
    best
}

proptest! {
    #[test]
    fn gauss_bounds_bracket_det_bounds(n in any_levels(30), h in fine_gains()) {
        let det = det_bounds(&n);
        let g = gauss_bounds(&n, &h);
        let cap = 0.5 * 405f64.log2();
        for k in 0..10 {
            let d = rate_to_f64(&det.rhs[k]);
            let lower = d - 0.5 * 5f64.log2() * RATIO_TERMS[k] as f64 - 1e-9;
            prop_assert!(g.rhs[k] >= lower, "({}) {} < {}", k, g.rhs[k], lower);
            prop_assert!(g.rhs[k] <= d + cap + 1e-9, "({}) {} > {}", k, g.rhs[k], d + cap);
        }
    }

    #[test]
    fn relabeling_permutes_bounds(n in any_levels(30), h in fine_gains()) {
        // swapping user labels maps (a..j) to (b, a, d, c, e, f, j, i, h, g)
        let perm = [1, 0, 3, 2, 4, 5, 9, 8, 7, 6];
        let d0 = det_bounds(&n);
        let d1 = det_bounds(&n.relabeled());
        let g0 = gauss_bounds(&n, &h);
        let g1 = gauss_bounds(&n.relabeled(), &h.relabeled());
        for k in 0..10 {
            prop_assert_eq!(d1.rhs[k], d0.rhs[perm[k]]);
            prop_assert!((g1.rhs[k] - g0.rhs[perm[k]]).abs() < 1e-9);
        }
    }

    #[test]
    fn combined_gauss_sum_within_four(n in strong_direct(30), h in fine_gains()) {
        prop_assert!(gauss_sum_gap(&n, &h).unwrap() <= 4.0 + 1e-9);
    }

    #[test]
    fn lp_vertex_is_feasible_and_optimal(n in strong_direct(25), seed in any::<u64>()) {
        let b = det_bounds(&n);
        let lp = max_sum_rate(&b).unwrap();
        prop_assert!(b.violations(&lp.vertex).is_empty());
        prop_assert!(lp.vertex.iter().all(|v| *v >= Rate::from_integer(0)));
        prop_assert_eq!(lp.vertex.iter().copied().fold(Rate::from_integer(0), |a, v| a + v), lp.optimum);
        let sampled = hit_and_run(&b.map(rate_to_f64), 400, seed);
        prop_assert!(rate_to_f64(&lp.optimum) >= sampled - 1e-9);
    }

    #[test]
    fn sandwich_holds(n in strong_direct(40)) {
        let r = sandwich_check(&n).unwrap();
        prop_assert!(r.ok(), "{:?}", r.violations);
    }
}

#[test]
fn worked_examples() {
    let n = ChannelLevels::new(10, 8, 4, 13);
    let r = sandwich_check(&n).unwrap();
    assert_eq!((r.lp_optimum, r.capacity, r.allocation_sum), (Rate::from_integer(13), Rate::from_integer(13), 13));
    let r = sandwich_check(&ChannelLevels::symmetric(9)).unwrap();
    assert!(r.lp_tight() && r.capacity == Rate::from_integer(12));
    let zero = det_bounds(&ChannelLevels::new(0, 0, 0, 0));
    assert!(zero.rhs.iter().all(|v| *v == Rate::from_integer(0)));
    let lp = max_sum_rate(&zero).unwrap();
    assert_eq!(lp.optimum, Rate::from_integer(0));
}

#[test]
fn vacuous_set_is_cut_by_its_sum_bound() {
    let mut rhs = [Rate::from_integer(1000); 10];
    rhs[4] = Rate::from_integer(17);
    let lp = max_sum_rate(&BoundSet::new(rhs)).unwrap();
    assert_eq!(lp.optimum, Rate::from_integer(17));
    let lp = max_sum_rate(&BoundSet::new(rhs.map(|v| rate_to_f64(&v)))).unwrap();
    assert!((lp.optimum - 17.0).abs() < 1e-9);
}

#[test]
fn ideal_allocation_meets_bounds() {
    let n = ChannelLevels::new(10, 8, 4, 13);
    let a = allocate(&n).unwrap();
    assert!(det_bounds(&n).violations(&allocation_rates(&a)).is_empty());
    assert_eq!(capacity_approx(&n).unwrap().d, Rate::from_integer(13));
}
