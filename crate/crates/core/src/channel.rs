//! Channel parameters and forward maps for the Gaussian X-channel and its
//! lower-triangular deterministic counterpart.

use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVec, LowerToeplitz};
use crate::scalar::Gain;

/// Receiver index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rx {
    One,
    Two,
}

impl Rx {
    pub const BOTH: [Rx; 2] = [Rx::One, Rx::Two];

    pub fn index(self) -> usize {
        match self {
            Rx::One => 1,
            Rx::Two => 2,
        }
    }
}

impl fmt::Display for Rx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rx{}", self.index())
    }
}

/// Gain exponents `n_mk`: link from transmitter `k` to receiver `m` has
/// SNR about `2^(2 n_mk)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelLevels {
    pub n11: u32,
    pub n12: u32,
    pub n21: u32,
    pub n22: u32,
}

impl ChannelLevels {
    pub const fn new(n11: u32, n12: u32, n21: u32, n22: u32) -> Self {
        Self { n11, n12, n21, n22 }
    }

    pub const fn symmetric(n: u32) -> Self {
        Self::new(n, n, n, n)
    }

    /// `min(n11, n22) >= max(n12, n21)`.
    pub fn strong_direct(&self) -> bool {
        self.n11.min(self.n22) >= self.n12.max(self.n21)
    }

    pub fn require_strong_direct(&self) -> Result<()> {
        if self.strong_direct() {
            Ok(())
        } else {
            Err(Error::NotStrongDirect(*self))
        }
    }

    /// Swaps the roles of the two transmitter/receiver pairs.
    pub fn relabeled(&self) -> Self {
        Self::new(self.n22, self.n21, self.n12, self.n11)
    }

    pub fn max_level(&self) -> u32 {
        self.n11.max(self.n12).max(self.n21).max(self.n22)
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.n11, self.n12, self.n21, self.n22]
    }
}

impl fmt::Display for ChannelLevels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.n11, self.n12, self.n21, self.n22)
    }
}

fn check_unit_offset<F: Float>(v: F, hi: F) -> Result<F> {
    if v > F::one() && v <= hi {
        Ok(v)
    } else {
        Err(Error::GainDomain(v.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Fine channel gains `h_mk` in (1, 2].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineGains<F = f64> {
    pub h11: F,
    pub h12: F,
    pub h21: F,
    pub h22: F,
}

impl<F: Float> FineGains<F> {
    pub fn new(h11: F, h12: F, h21: F, h22: F) -> Result<Self> {
        let two = F::one() + F::one();
        Ok(Self {
            h11: check_unit_offset(h11, two)?,
            h12: check_unit_offset(h12, two)?,
            h21: check_unit_offset(h21, two)?,
            h22: check_unit_offset(h22, two)?,
        })
    }

    pub fn as_array(&self) -> [F; 4] {
        [self.h11, self.h12, self.h21, self.h22]
    }

    /// Swaps the two transmitter/receiver pairs, matching
    /// [`ChannelLevels::relabeled`].
    pub fn relabeled(&self) -> Self {
        Self { h11: self.h22, h12: self.h21, h21: self.h12, h22: self.h11 }
    }
}

/// Gains of the three signal components at receiver `m`: `g0` multiplies
/// the aligned interference, `g1` and `g2` the streams from transmitters
/// one and two.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverGains<G = f64> {
    pub g0: G,
    pub g1: G,
    pub g2: G,
}

impl<G: Clone> ReceiverGains<G> {
    /// `(direct, cross)` gains at `rx`.
    pub fn desired(&self, rx: Rx) -> (G, G) {
        match rx {
            Rx::One => (self.g1.clone(), self.g2.clone()),
            Rx::Two => (self.g2.clone(), self.g1.clone()),
        }
    }
}

/// Products of fine gains and modulation gains, each in (1, 4].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGains<F = f64> {
    pub g10: F,
    pub g11: F,
    pub g12: F,
    pub g20: F,
    pub g21: F,
    pub g22: F,
}

impl<F: Float> EffectiveGains<F> {
    pub fn receiver(&self, rx: Rx) -> ReceiverGains<F> {
        match rx {
            Rx::One => ReceiverGains { g0: self.g10, g1: self.g11, g2: self.g12 },
            Rx::Two => ReceiverGains { g0: self.g20, g1: self.g21, g2: self.g22 },
        }
    }
}

pub fn effective_gains<F: Float>(h: &FineGains<F>) -> EffectiveGains<F> {
    EffectiveGains {
        g10: h.h11 * h.h12,
        g11: h.h11 * h.h22,
        g12: h.h12 * h.h21,
        g20: h.h22 * h.h21,
        g21: h.h21 * h.h12,
        g22: h.h22 * h.h11,
    }
}

/// Deterministic-model gains, sampled directly from (1, 2] per receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetChannelGains<G = f64> {
    pub rx1: ReceiverGains<G>,
    pub rx2: ReceiverGains<G>,
}

impl<G: Gain> DetChannelGains<G> {
    pub fn receiver(&self, rx: Rx) -> &ReceiverGains<G> {
        match rx {
            Rx::One => &self.rx1,
            Rx::Two => &self.rx2,
        }
    }
}

impl DetChannelGains<f64> {
    pub fn from_array(g: [f64; 6]) -> Result<Self> {
        for &v in &g {
            check_unit_offset(v, 2.0)?;
        }
        Ok(Self {
            rx1: ReceiverGains { g0: g[0], g1: g[1], g2: g[2] },
            rx2: ReceiverGains { g0: g[3], g1: g[4], g2: g[5] },
        })
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.rx1.g0, self.rx1.g1, self.rx1.g2, self.rx2.g0, self.rx2.g1, self.rx2.g2]
    }
}

/// Bit-level channel inputs. `u11`, `u21` come from transmitter one and
/// have `n11` levels; `u12`, `u22` come from transmitter two and have
/// `n22` levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetInputs {
    pub u11: BitVec,
    pub u12: BitVec,
    pub u21: BitVec,
    pub u22: BitVec,
}

impl DetInputs {
    pub fn zeros(n: &ChannelLevels) -> Self {
        let (a, b) = (n.n11 as usize, n.n22 as usize);
        Self { u11: BitVec::zeros(a), u12: BitVec::zeros(b), u21: BitVec::zeros(a), u22: BitVec::zeros(b) }
    }

    fn check(&self, n: &ChannelLevels) -> Result<()> {
        let (a, b) = (n.n11 as usize, n.n22 as usize);
        for (v, want) in [(&self.u11, a), (&self.u21, a), (&self.u12, b), (&self.u22, b)] {
            if v.len() != want {
                return Err(Error::Dimension { expected: want, got: v.len() });
            }
        }
        Ok(())
    }
}

/// The three Toeplitz matrices seen at one receiver, at its own dimension.
pub(crate) struct ReceiverMatrices {
    pub g0: LowerToeplitz,
    pub g1: LowerToeplitz,
    pub g2: LowerToeplitz,
}

impl ReceiverMatrices {
    pub fn new<G: Gain>(g: &ReceiverGains<G>, dim: usize) -> Result<Self> {
        Ok(Self {
            g0: LowerToeplitz::from_gain(&g.g0, dim)?,
            g1: LowerToeplitz::from_gain(&g.g1, dim)?,
            g2: LowerToeplitz::from_gain(&g.g2, dim)?,
        })
    }
}

/// Output at one receiver. `direct` is that receiver's own-transmitter
/// input (`n` levels); `cross` comes from the other transmitter and is
/// seen `shift` levels lower; `own_interf` and `other_interf` are the
/// inputs intended for the other receiver.
pub(crate) fn receiver_output(
    mats: &ReceiverMatrices,
    rx: Rx,
    n: usize,
    shift: usize,
    direct: &BitVec,
    cross: &BitVec,
    own_interf: &BitVec,
    other_interf: &BitVec,
) -> Result<BitVec> {
    let (m_direct, m_cross) = match rx {
        Rx::One => (&mats.g1, &mats.g2),
        Rx::Two => (&mats.g2, &mats.g1),
    };
    let visible = n - shift;
    let mut y = m_direct.matvec(direct)?;
    y.xor_assign(&m_cross.matvec(&cross.slice(1, visible).embed(shift, n))?);
    let mut interf = own_interf.clone();
    interf.xor_assign(&other_interf.slice(1, visible).embed(shift, n));
    y.xor_assign(&mats.g0.matvec(&interf)?);
    Ok(y)
}

/// Noiseless deterministic channel at both receivers.
pub fn det_channel_apply<G: Gain>(
    g: &DetChannelGains<G>,
    inputs: &DetInputs,
    n: &ChannelLevels,
) -> Result<(BitVec, BitVec)> {
    n.require_strong_direct()?;
    inputs.check(n)?;
    let (n11, n12, n21, n22) = (n.n11 as usize, n.n12 as usize, n.n21 as usize, n.n22 as usize);
    let y1 = if n11 == 0 {
        BitVec::zeros(0)
    } else {
        let m1 = ReceiverMatrices::new(&g.rx1, n11)?;
        receiver_output(&m1, Rx::One, n11, n11 - n12, &inputs.u11, &inputs.u12, &inputs.u21, &inputs.u22)?
    };
    let y2 = if n22 == 0 {
        BitVec::zeros(0)
    } else {
        let m2 = ReceiverMatrices::new(&g.rx2, n22)?;
        receiver_output(&m2, Rx::Two, n22, n22 - n21, &inputs.u22, &inputs.u21, &inputs.u12, &inputs.u11)?
    };
    Ok((y1, y2))
}

fn pow2<F: Float>(e: u32) -> F {
    (F::one() + F::one()).powi(e as i32)
}

/// `y_m = 2^{n_m1} h_m1 x1 + 2^{n_m2} h_m2 x2 + z_m`.
pub fn gauss_channel_apply<F: Float>(
    h: &FineGains<F>,
    n: &ChannelLevels,
    x1: F,
    x2: F,
    z1: F,
    z2: F,
) -> (F, F) {
    let y1 = pow2::<F>(n.n11) * h.h11 * x1 + pow2::<F>(n.n12) * h.h12 * x2 + z1;
    let y2 = pow2::<F>(n.n21) * h.h21 * x1 + pow2::<F>(n.n22) * h.h22 * x2 + z2;
    (y1, y2)
}

/// `x1 = hq22 u11 + hq12 u21`, `x2 = hq11 u22 + hq21 u12`.
pub fn modulate_inputs<F: Float>(hq: &FineGains<F>, u11: F, u12: F, u21: F, u22: F) -> Result<(F, F)> {
    let quarter = F::one() / (F::one() + F::one()).powi(2);
    for u in [u11, u12, u21, u22] {
        if !(u.abs() <= quarter) {
            return Err(Error::PowerConstraint(u.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Ok((hq.h22 * u11 + hq.h12 * u21, hq.h11 * u22 + hq.h21 * u12))
}

/// Floor quantization to `bits` fractional digits, clamped into (1, 2].
pub fn quantize_gains<F: Float>(h: &FineGains<F>, bits: u32) -> Result<FineGains<F>> {
    if bits == 0 {
        return Err(Error::InvalidParameter("quantization needs at least one bit".into()));
    }
    let scale = pow2::<F>(bits);
    let q = |v: F| {
        let floor = F::one() + ((v - F::one()) * scale).floor() / scale;
        floor.max(F::one() + F::one() / scale)
    };
    Ok(FineGains { h11: q(h.h11), h12: q(h.h12), h21: q(h.h21), h22: q(h.h22) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_gain_products() {
        let h = FineGains::new(1.5, 1.25, 1.75, 1.1).unwrap();
        let g = effective_gains(&h);
        assert_eq!(g.g10, 1.875);
        assert_eq!(g.g12, 2.1875);
        assert_eq!(g.g21, 2.1875);
        assert!((g.g11 - 1.65).abs() < 1e-15);
        assert!((g.g20 - 1.925).abs() < 1e-15);
        assert!((g.g22 - 1.65).abs() < 1e-15);
        let all_two = effective_gains(&FineGains::new(2.0, 2.0, 2.0, 2.0).unwrap());
        assert_eq!(all_two.g10, 4.0);
    }

    #[test]
    fn quantizer_examples() {
        let h = FineGains::new(1.3125, 1.3, 1.0 + 1e-9, 2.0).unwrap();
        let q4 = quantize_gains(&h, 4).unwrap();
        assert_eq!(q4.h11, 1.3125);
        assert_eq!(q4.h21, 1.0625);
        assert_eq!(q4.h22, 2.0);
        assert_eq!(quantize_gains(&h, 2).unwrap().h12, 1.25);
    }

    #[test]
    fn modulation_bounds() {
        let hq = FineGains::new(2.0, 2.0, 2.0, 2.0).unwrap();
        assert_eq!(modulate_inputs(&hq, 0.25, 0.0, 0.0, 0.0).unwrap(), (0.5, 0.0));
        assert_eq!(modulate_inputs(&hq, 0.25, 0.25, 0.25, 0.25).unwrap(), (1.0, 1.0));
        assert!(modulate_inputs(&hq, 0.26, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn strong_direct_predicate() {
        assert!(ChannelLevels::new(10, 8, 4, 13).strong_direct());
        assert!(!ChannelLevels::new(3, 5, 5, 3).strong_direct());
    }
}
