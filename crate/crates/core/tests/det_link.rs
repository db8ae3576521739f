use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xchan::channel::{det_channel_apply, ChannelLevels, DetChannelGains, DetInputs, ReceiverGains};
use xchan::det_link::{alignment_ok, pack_inputs, roundtrip_ok, unpack_inputs, DetMessages};
use xchan::gf2::BitVec;
use xchan::outage::mc_outage_det;
use xchan::rates::{allocate, allocate_penalized, Model, OutageTarget};

fn levels(max: u32) -> impl Strategy<Value = ChannelLevels> {
    (1..=max, 1..=max)
        .prop_flat_map(|(a, d)| {
            let m = a.min(d);
            (Just(a), 0..=m, 0..=m, Just(d))
        })
        .prop_map(|(a, b, c, d)| ChannelLevels::new(a, b, c, d))
}

fn gains() -> impl Strategy<Value = DetChannelGains> {
    proptest::array::uniform6(0.0f64..1.0).prop_map(|u| DetChannelGains::from_array(u.map(|v| 2.0 - v)).unwrap())
}

/// Bit `k` after the binary point of `g`, with bit 0 the integer part.
fn gain_bit(g: f64, k: usize) -> bool {
    if k == 0 || g == 2.0 {
        return true;
    }
    ((g - 1.0) * 2f64.powi(k as i32)).floor() as u64 % 2 == 1
}

/// Dense evaluation of `T(g) v` with `v` shifted down by `shift`.
fn dense(g: f64, v: &BitVec, shift: usize, n: usize) -> Vec<bool> {
    (1..=n)
        .map(|i| {
            // input level j lands on level j + shift
            (1..=n)
                .filter(|&j| j + shift <= i && v.get(j))
                .fold(false, |acc, j| acc ^ gain_bit(g, i - j - shift))
        })
        .collect()
}

fn xor(a: Vec<bool>, b: Vec<bool>) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn oracle(g: &ReceiverGains, n: usize, shift: usize, direct: &BitVec, cross: &BitVec, own: &BitVec, other: &BitVec, swap: bool) -> BitVec {
    let (gd, gc) = if swap { (g.g2, g.g1) } else { (g.g1, g.g2) };
    let y = xor(dense(gd, direct, 0, n), dense(gc, cross, shift, n));
    let y = xor(y, dense(g.g0, own, 0, n));
    let y = xor(y, dense(g.g0, other, shift, n));
    BitVec::from_bools(&y)
}

proptest! {
    #[test]
    fn channel_matches_dense_model(n in levels(20), g in gains(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, d) = (n.n11 as usize, n.n22 as usize);
        let u = DetInputs {
            u11: BitVec::random(a, &mut rng),
            u12: BitVec::random(d, &mut rng),
            u21: BitVec::random(a, &mut rng),
            u22: BitVec::random(d, &mut rng),
        };
        let (y1, y2) = det_channel_apply(&g, &u, &n).unwrap();
        prop_assert_eq!(y1, oracle(&g.rx1, a, a - n.n12 as usize, &u.u11, &u.u12, &u.u21, &u.u22, false));
        prop_assert_eq!(y2, oracle(&g.rx2, d, d - n.n21 as usize, &u.u22, &u.u21, &u.u12, &u.u11, true));
    }

    #[test]
    fn pack_unpack_roundtrip(n in levels(30), seed in any::<u64>()) {
        let a = allocate(&n).unwrap();
        let m = DetMessages::random(&a, &mut ChaCha8Rng::seed_from_u64(seed));
        let u = pack_inputs(&m, &a, &n).unwrap();
        prop_assert_eq!(unpack_inputs(&u, &a, &n).unwrap(), m);
    }

    #[test]
    fn roundtrip_iff_aligned(n in levels(30), g in gains(), seed in any::<u64>()) {
        let a = allocate(&n).unwrap();
        let m = DetMessages::random(&a, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(roundtrip_ok(&m, &a, &n, &g).unwrap(), alignment_ok(&g, &a, &n).unwrap());
    }

    #[test]
    fn exact_and_float_gains_decode_alike(n in levels(16), k in proptest::array::uniform6(1i64..(1 << 20)), seed in any::<u64>()) {
        let den = 1i64 << 20;
        let gf = DetChannelGains::from_array(k.map(|v| 1.0 + v as f64 / den as f64)).unwrap();
        let r = |v: i64| num_rational::Ratio::new(den + v, den);
        let ge = DetChannelGains {
            rx1: ReceiverGains { g0: r(k[0]), g1: r(k[1]), g2: r(k[2]) },
            rx2: ReceiverGains { g0: r(k[3]), g1: r(k[4]), g2: r(k[5]) },
        };
        let a = allocate(&n).unwrap();
        let m = DetMessages::random(&a, &mut ChaCha8Rng::seed_from_u64(seed));
        let u = pack_inputs(&m, &a, &n).unwrap();
        prop_assert_eq!(det_channel_apply(&gf, &u, &n).unwrap(), det_channel_apply(&ge, &u, &n).unwrap());
        prop_assert_eq!(alignment_ok(&gf, &a, &n).unwrap(), alignment_ok(&ge, &a, &n).unwrap());
    }
}

#[test]
fn penalized_outage_stays_below_target() {
    for (n, delta) in [(ChannelLevels::symmetric(12), 0.5), (ChannelLevels::new(14, 9, 11, 16), 0.25), (ChannelLevels::new(20, 18, 16, 20), 1.0)] {
        let t = OutageTarget::new(delta).unwrap();
        let a = allocate_penalized(&n, t, Model::Det).unwrap();
        let est = mc_outage_det(&n, &a, 4000, 3).unwrap();
        assert!(est.wilson_hi <= delta, "{n}: {est:?}");
    }
}

#[test]
fn ideal_allocation_usually_decodes() {
    // A generic channel aligns with positive probability at the ideal rates.
    let n = ChannelLevels::new(11, 8, 9, 13);
    let a = allocate(&n).unwrap();
    let est = mc_outage_det(&n, &a, 2000, 11).unwrap();
    assert!(est.estimate < 1.0, "{est:?}");
}

#[test]
fn misfit_allocation_is_rejected() {
    let n = ChannelLevels::symmetric(4);
    let mut a = allocate(&n).unwrap();
    a.r11p = 5;
    assert!(pack_inputs(&DetMessages::zeros(&a), &a, &n).is_err());
}
