use proptest::prelude::*;
use xchan::channel::{effective_gains, ChannelLevels, FineGains, ReceiverGains, Rx};
use xchan::gauss_link::{
    build_constellation, chernoff_error_bound, demodulate, mc_symbol_error, min_distance, q_function,
    ReceiverConstellation, ReceiverSymbols, SimOptions, DEFAULT_BUDGET,
};
use xchan::rates::{allocate_penalized, Case, Model, OutageTarget, RateAllocation};
use xchan::Error;

fn alloc(t: [u32; 6]) -> RateAllocation {
    let [r11p, r22p, r11c, r22c, r12, r21] = t;
    RateAllocation { r11c, r11p, r12, r21, r22c, r22p, case: Case::V }
}

fn fine_gains() -> impl Strategy<Value = FineGains> {
    proptest::array::uniform4(0.0f64..1.0).prop_map(|u| FineGains::new(2.0 - u[0], 2.0 - u[1], 2.0 - u[2], 2.0 - u[3]).unwrap())
}

fn small_alloc() -> impl Strategy<Value = RateAllocation> {
    proptest::array::uniform6(0u32..=2).prop_map(alloc)
}

fn triples(rc: &ReceiverConstellation) -> Vec<ReceiverSymbols> {
    let (a, b, c) = rc.symbol_sets();
    let mut out = Vec::new();
    for &s1 in a {
        for &s2 in b {
            for &s0 in c {
                out.push(ReceiverSymbols { s1, s2, s0 });
            }
        }
    }
    out
}

fn brute_min_distance(g: &ReceiverGains, rc: &ReceiverConstellation) -> f64 {
    let t = triples(rc);
    let v: Vec<f64> = t.iter().map(|x| rc.value(g, x)).collect();
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.min((v[i] - v[j]).abs());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn min_distance_matches_all_pairs(a in small_alloc(), h in fine_gains(), k in 10u32..16, rx1 in any::<bool>()) {
        let n = ChannelLevels::new(k, k - 3, k - 2, k + 1);
        let Ok(c) = build_constellation(&a, &n) else { return Ok(()) };
        let rx = if rx1 { Rx::One } else { Rx::Two };
        let rc = ReceiverConstellation::new(&c, rx, DEFAULT_BUDGET).unwrap();
        let g = effective_gains(&h).receiver(rx);
        let d = min_distance(&g, &rc, DEFAULT_BUDGET).unwrap().d;
        let want = brute_min_distance(&g, &rc);
        if want.is_infinite() {
            prop_assert!(d.is_infinite());
        } else {
            prop_assert!((d - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", d, want);
        }
    }

    #[test]
    fn demodulator_finds_nearest(a in small_alloc(), h in fine_gains(), k in 8u32..14, y in 0.0f64..1.0) {
        let n = ChannelLevels::symmetric(k);
        let Ok(c) = build_constellation(&a, &n) else { return Ok(()) };
        let rc = ReceiverConstellation::new(&c, Rx::One, DEFAULT_BUDGET).unwrap();
        let g = effective_gains(&h).receiver(Rx::One);
        let y = y * 2f64.powi(k as i32);
        let got = rc.value(&g, &demodulate(y, &g, &rc));
        let best = triples(&rc).iter().map(|t| (rc.value(&g, t) - y).abs()).fold(f64::INFINITY, f64::min);
        prop_assert!(((got - y).abs() - best).abs() <= 1e-9 * best.max(1.0));
    }

    #[test]
    fn penalized_layouts_build(k in 20u32..=50, delta in 0.1f64..=1.0) {
        let n = ChannelLevels::new(k, k - 4, k - 6, k);
        if let Ok(a) = allocate_penalized(&n, OutageTarget::new(delta).unwrap(), Model::Gauss) {
            let c = build_constellation(&a, &n).unwrap();
            // every window stays inside its transmitter's levels
            for w in c.windows {
                prop_assert!(w.width == 0 || w.start + w.width - 1 <= k);
            }
        }
    }
}

#[test]
fn budget_is_enforced() {
    let n = ChannelLevels::symmetric(30);
    let c = build_constellation(&alloc([0, 0, 6, 6, 6, 6]), &n).unwrap();
    match ReceiverConstellation::new(&c, Rx::One, 100) {
        Err(Error::BudgetExceeded { size, budget }) => assert!(size > budget),
        other => panic!("expected budget error, got {other:?}"),
    }
}

#[test]
fn oversized_levels_are_rejected() {
    let n = ChannelLevels::symmetric(51);
    assert!(build_constellation(&alloc([0, 0, 1, 1, 0, 0]), &n).is_err());
}

#[test]
fn symbol_error_is_reproducible_across_thread_counts() {
    let n = ChannelLevels::new(12, 9, 9, 12);
    let a = alloc([1, 1, 1, 1, 1, 1]);
    let h = FineGains::new(1.3, 1.6, 1.2, 1.9).unwrap();
    let opts = SimOptions { noise_std: 4.0, ..SimOptions::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_symbol_error(&h, &n, &a, 20_000, 99, &opts).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert!(one.either.failures > 0);
}

#[test]
fn mismatched_simulation_runs() {
    let n = ChannelLevels::new(16, 10, 10, 16);
    let a = alloc([1, 1, 1, 1, 1, 1]);
    let h = FineGains::new(1.31, 1.77, 1.52, 1.09).unwrap();
    let opts = SimOptions { mismatched: true, ..SimOptions::default() };
    let r = mc_symbol_error(&h, &n, &a, 10_000, 5, &opts).unwrap();
    assert!(r.either.estimate <= 1.0);
}

#[test]
fn tail_functions() {
    assert!((q_function(0.0) - 0.5).abs() < 1e-15);
    assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for d in [10.0, 16.0, 24.0, 32.0, 48.0] {
        let b = chernoff_error_bound(d);
        assert!(b < prev);
        prev = b;
    }
}
