use proptest::prelude::*;
use xchan::gf2::{rank, toeplitz_from_gain, BitVec, Gf2System, LowerToeplitz, SolveError};
use xchan::ExactGain;

fn bits(len: usize) -> impl Strategy<Value = BitVec> {
    proptest::collection::vec(any::<bool>(), len).prop_map(|b| BitVec::from_bools(&b))
}

/// Rank by exhaustive span enumeration, for up to ~12 columns.
fn rank_by_span(cols: &[BitVec], len: usize) -> usize {
    let mut span = std::collections::HashSet::new();
    for mask in 0u32..1 << cols.len() {
        let mut v = BitVec::zeros(len);
        for (j, c) in cols.iter().enumerate() {
            if mask >> j & 1 == 1 {
                v.xor_assign(c);
            }
        }
        span.insert(v);
    }
    span.len().trailing_zeros() as usize
}

proptest! {
    #[test]
    fn matvec_is_linear(n in 1usize..70, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut col = BitVec::random(n, &mut rng);
        col.set(1, true);
        let m = LowerToeplitz::new(col).unwrap();
        let a = BitVec::random(n, &mut rng);
        let b = BitVec::random(n, &mut rng);
        prop_assert_eq!(m.matvec(&a.xor(&b)).unwrap(), m.matvec(&a).unwrap().xor(&m.matvec(&b).unwrap()));
    }

    #[test]
    fn matvec_matches_entries(n in 1usize..20, col in bits(20), x in bits(20)) {
        let mut col = col.slice(1, n);
        col.set(1, true);
        let x = x.slice(1, n);
        let m = LowerToeplitz::new(col).unwrap();
        let y = m.matvec(&x).unwrap();
        for i in 1..=n {
            let want = (1..=n).fold(false, |acc, j| acc ^ (m.entry(i, j) && x.get(j)));
            prop_assert_eq!(y.get(i), want);
        }
    }

    #[test]
    fn toeplitz_is_lower_unitriangular(g in 1.0f64..2.0, n in 1usize..40) {
        prop_assume!(g > 1.0);
        let m = toeplitz_from_gain(&g, n).unwrap();
        for i in 1..=n {
            prop_assert!(m.entry(i, i));
            for j in i + 1..=n {
                prop_assert!(!m.entry(i, j));
            }
        }
    }

    #[test]
    fn rank_matches_span(cols in proptest::collection::vec(bits(10), 0..10)) {
        prop_assert_eq!(rank(&cols), rank_by_span(&cols, 10));
    }

    #[test]
    fn solve_recovers_combination(cols in proptest::collection::vec(bits(16), 1..10), coeff in bits(10)) {
        let k = cols.len();
        let coeff = coeff.slice(1, k);
        let mut rhs = BitVec::zeros(16);
        for (j, c) in cols.iter().enumerate() {
            if coeff.get(j + 1) {
                rhs.xor_assign(c);
            }
        }
        let sys = Gf2System::new(cols.clone(), rhs).unwrap();
        match sys.solve_unique() {
            Ok(x) => {
                prop_assert_eq!(rank(&cols), k);
                prop_assert_eq!(x, coeff);
            }
            Err(SolveError::NotUnique) => prop_assert!(rank(&cols) < k),
            Err(SolveError::NoSolution) => prop_assert!(false, "rhs is in the span by construction"),
        }
    }

    #[test]
    fn shift_then_leading_index(x in bits(130), k in 0usize..140) {
        let s = x.shifted_down(k);
        prop_assert_eq!(s.len(), x.len());
        let want = x.leading_index().map(|i| i + k).filter(|&i| i <= x.len());
        prop_assert_eq!(s.leading_index(), want);
    }

    #[test]
    fn u64_roundtrip(v in any::<u64>(), len in 1usize..=64) {
        let masked = if len == 64 { v } else { v & ((1 << len) - 1) };
        prop_assert_eq!(BitVec::from_u64(masked, len).to_u64(), masked);
    }
}

#[test]
fn example_gain_column() {
    let m = toeplitz_from_gain(&1.3125, 4).unwrap();
    assert_eq!(m.first_column(), &BitVec::from_bit_str("1010"));
    assert_eq!(m.matvec(&BitVec::from_bit_str("1010")).unwrap(), BitVec::from_bit_str("1000"));
}

#[test]
fn exact_gain_beyond_double_precision() {
    let g = ExactGain::new(1 + (1i128 << 60), 1i128 << 60);
    let m = toeplitz_from_gain(&g, 62).unwrap();
    let col = m.first_column();
    assert!(col.get(1) && col.get(61));
    assert_eq!(col.count_ones(), 2);
    assert!(toeplitz_from_gain(&(1.0 + 2f64.powi(-60)), 62).is_err());
}

#[test]
fn float_and_rational_agree_on_dyadics() {
    for (num, den) in [(21i64, 16i64), (3, 2), (255, 128), (2, 1)] {
        let f = num as f64 / den as f64;
        let a = toeplitz_from_gain(&f, 12).unwrap();
        let b = toeplitz_from_gain(&num_rational::Ratio::new(num, den), 12).unwrap();
        let c = toeplitz_from_gain(&(f as f32), 12).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

#[test]
fn irrational_like_rational_expansion() {
    // 4/3 = 1.010101...
    let m = toeplitz_from_gain(&num_rational::Ratio::new(4i64, 3), 9).unwrap();
    assert_eq!(m.first_column(), &BitVec::from_bit_str("101010101"));
}
