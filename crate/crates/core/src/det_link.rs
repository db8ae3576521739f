//! Bit packing, GF(2) decoding and round-trip checks for the
//! deterministic X-channel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{det_channel_apply, ChannelLevels, DetChannelGains, DetInputs, ReceiverGains, Rx};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2System, LowerToeplitz, SolveError};
use crate::rates::RateAllocation;
use crate::scalar::Gain;

/// Payload bits of the six message slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetMessages {
    pub m11c: BitVec,
    pub m11p: BitVec,
    pub m12: BitVec,
    pub m21: BitVec,
    pub m22c: BitVec,
    pub m22p: BitVec,
}

impl DetMessages {
    pub fn zeros(a: &RateAllocation) -> Self {
        let z = |r: u32| BitVec::zeros(r as usize);
        Self { m11c: z(a.r11c), m11p: z(a.r11p), m12: z(a.r12), m21: z(a.r21), m22c: z(a.r22c), m22p: z(a.r22p) }
    }

    pub fn random<R: Rng + ?Sized>(a: &RateAllocation, rng: &mut R) -> Self {
        let mut r = |len: u32| BitVec::random(len as usize, rng);
        Self {
            m11c: r(a.r11c),
            m11p: r(a.r11p),
            m12: r(a.r12),
            m21: r(a.r21),
            m22c: r(a.r22c),
            m22p: r(a.r22p),
        }
    }

    fn check(&self, a: &RateAllocation) -> Result<()> {
        let pairs = [
            (&self.m11c, a.r11c),
            (&self.m11p, a.r11p),
            (&self.m12, a.r12),
            (&self.m21, a.r21),
            (&self.m22c, a.r22c),
            (&self.m22p, a.r22p),
        ];
        for (m, r) in pairs {
            if m.len() != r as usize {
                return Err(Error::Dimension { expected: r as usize, got: m.len() });
            }
        }
        Ok(())
    }

    pub fn receiver_part(&self, rx: Rx) -> ReceiverMessages {
        match rx {
            Rx::One => ReceiverMessages {
                common: self.m11c.clone(),
                private: self.m11p.clone(),
                cross: self.m12.clone(),
            },
            Rx::Two => ReceiverMessages {
                common: self.m22c.clone(),
                private: self.m22p.clone(),
                cross: self.m21.clone(),
            },
        }
    }
}

/// The two messages a receiver wants: its direct message (common and
/// private part) and the cross message from the other transmitter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReceiverMessages {
    pub common: BitVec,
    pub private: BitVec,
    pub cross: BitVec,
}

/// Level `(start, width)` of each slot inside its input vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotLayout {
    pub u11c: (usize, usize),
    pub u11p: (usize, usize),
    pub u21: (usize, usize),
    pub u12: (usize, usize),
    pub u22c: (usize, usize),
    pub u22p: (usize, usize),
}

impl SlotLayout {
    /// Deterministic layout: commons at the top, privates at the bottom,
    /// cross messages right below the levels shared with the other
    /// receiver's common part.
    pub fn new(a: &RateAllocation, n: &ChannelLevels) -> Result<Self> {
        n.require_strong_direct()?;
        let (n11, n12, n21, n22) = (n.n11 as usize, n.n12 as usize, n.n21 as usize, n.n22 as usize);
        let r = |x: u32| x as usize;
        let fits = r(a.r11c) + r(a.r11p) <= n11
            && r(a.r22c) + r(a.r22p) <= n22
            && r(a.r21) <= n12
            && r(a.r12) <= n21;
        if !fits {
            return Err(Error::InvalidParameter(format!("allocation {:?} does not fit levels {n}", a.as_tuple())));
        }
        let layout = Self {
            u11c: (1, r(a.r11c)),
            u11p: (n11 + 1 - r(a.r11p), r(a.r11p)),
            u21: (n11 - n12 + 1, r(a.r21)),
            u12: (n22 - n21 + 1, r(a.r12)),
            u22c: (1, r(a.r22c)),
            u22p: (n22 + 1 - r(a.r22p), r(a.r22p)),
        };
        Ok(layout)
    }
}

fn place(v: &mut BitVec, (start, _): (usize, usize), bits: &BitVec) {
    for k in 1..=bits.len() {
        v.set(start + k - 1, bits.get(k));
    }
}

fn take(v: &BitVec, (start, width): (usize, usize)) -> BitVec {
    v.slice(start, width)
}

pub fn pack_inputs(msgs: &DetMessages, a: &RateAllocation, n: &ChannelLevels) -> Result<DetInputs> {
    msgs.check(a)?;
    let l = SlotLayout::new(a, n)?;
    let mut u = DetInputs::zeros(n);
    place(&mut u.u11, l.u11c, &msgs.m11c);
    place(&mut u.u11, l.u11p, &msgs.m11p);
    place(&mut u.u21, l.u21, &msgs.m21);
    place(&mut u.u12, l.u12, &msgs.m12);
    place(&mut u.u22, l.u22c, &msgs.m22c);
    place(&mut u.u22, l.u22p, &msgs.m22p);
    Ok(u)
}

pub fn unpack_inputs(u: &DetInputs, a: &RateAllocation, n: &ChannelLevels) -> Result<DetMessages> {
    let l = SlotLayout::new(a, n)?;
    Ok(DetMessages {
        m11c: take(&u.u11, l.u11c),
        m11p: take(&u.u11, l.u11p),
        m12: take(&u.u12, l.u12),
        m21: take(&u.u21, l.u21),
        m22c: take(&u.u22, l.u22c),
        m22p: take(&u.u22, l.u22p),
    })
}

/// Columns of the stacked decoding system at one receiver, grouped as
/// desired direct, desired cross, and aligned interference.
#[derive(Clone, Debug)]
pub struct DecodingColumns {
    pub direct: Vec<BitVec>,
    pub cross: Vec<BitVec>,
    pub interference: Vec<BitVec>,
}

impl DecodingColumns {
    pub fn all(&self) -> Vec<BitVec> {
        self.direct.iter().chain(&self.cross).chain(&self.interference).cloned().collect()
    }
}

/// Builds the decoding columns at `rx`. A desired level the receiver
/// cannot see contributes a zero column, which makes decoding fail.
pub fn decoding_columns<G: Gain>(
    g: &ReceiverGains<G>,
    a: &RateAllocation,
    n: &ChannelLevels,
    rx: Rx,
) -> Result<DecodingColumns> {
    let layout = SlotLayout::new(a, n)?;
    let (n11, n12, n21, n22) = (n.n11 as usize, n.n12 as usize, n.n21 as usize, n.n22 as usize);
    // dim, shift of the other transmitter's input, levels of it visible here
    let (dim, shift, visible) = match rx {
        Rx::One => (n11, n11 - n12, n12),
        Rx::Two => (n22, n22 - n21, n21),
    };
    if dim == 0 {
        return Ok(DecodingColumns { direct: Vec::new(), cross: Vec::new(), interference: Vec::new() });
    }
    let m0 = LowerToeplitz::from_gain(&g.g0, dim)?;
    let m1 = LowerToeplitz::from_gain(&g.g1, dim)?;
    let m2 = LowerToeplitz::from_gain(&g.g2, dim)?;
    let (m_direct, m_cross) = match rx {
        Rx::One => (&m1, &m2),
        Rx::Two => (&m2, &m1),
    };
    let (common, private, cross, own_interf, other_interf) = match rx {
        Rx::One => (layout.u11c, layout.u11p, layout.u12, layout.u21, a.r22c as usize),
        Rx::Two => (layout.u22c, layout.u22p, layout.u21, layout.u12, a.r11c as usize),
    };
    let levels = |(start, width): (usize, usize)| start..start + width;

    let direct = levels(common).chain(levels(private)).map(|j| m_direct.column(j)).collect();
    let cross = levels(cross)
        .map(|j| if j <= visible { m_cross.column(shift + j) } else { BitVec::zeros(dim) })
        .collect();
    // Both interfering streams start right after the shift and share g0.
    debug_assert_eq!(own_interf.0, shift + 1);
    let span = own_interf.1.max(other_interf.min(visible));
    let interference = (shift + 1..=shift + span).map(|j| m0.column(j)).collect();
    Ok(DecodingColumns { direct, cross, interference })
}

/// Recovers the desired messages at `rx` from its output, or reports an
/// alignment failure when the decoding columns are dependent.
pub fn decode_receiver<G: Gain>(
    y: &BitVec,
    g: &ReceiverGains<G>,
    a: &RateAllocation,
    n: &ChannelLevels,
    rx: Rx,
) -> Result<ReceiverMessages> {
    let cols = decoding_columns(g, a, n, rx)?;
    let expected = match rx {
        Rx::One => n.n11 as usize,
        Rx::Two => n.n22 as usize,
    };
    if y.len() != expected {
        return Err(Error::Dimension { expected, got: y.len() });
    }
    let (n_direct, n_cross) = (cols.direct.len(), cols.cross.len());
    let all = cols.all();
    if all.len() > expected {
        return Err(Error::AlignmentFailure);
    }
    let coeffs = Gf2System::new(all, y.clone())?.solve_unique().map_err(|e| match e {
        SolveError::NotUnique => Error::AlignmentFailure,
        SolveError::NoSolution => Error::InconsistentOutput,
    })?;
    let (n_common, n_private) = match rx {
        Rx::One => (a.r11c as usize, a.r11p as usize),
        Rx::Two => (a.r22c as usize, a.r22p as usize),
    };
    debug_assert_eq!(n_common + n_private, n_direct);
    Ok(ReceiverMessages {
        common: coeffs.slice(1, n_common),
        private: coeffs.slice(n_common + 1, n_private),
        cross: coeffs.slice(n_direct + 1, n_cross),
    })
}

/// True when both receivers are free of alignment failures for `g`.
pub fn alignment_ok<G: Gain>(g: &DetChannelGains<G>, a: &RateAllocation, n: &ChannelLevels) -> Result<bool> {
    for rx in Rx::BOTH {
        let cols = decoding_columns(g.receiver(rx), a, n, rx)?;
        let all = cols.all();
        let dim = match rx {
            Rx::One => n.n11 as usize,
            Rx::Two => n.n22 as usize,
        };
        if all.len() > dim || crate::gf2::rank(&all) < all.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pack, transmit and decode at both receivers; true iff every message
/// comes back intact.
pub fn roundtrip_ok<G: Gain>(
    msgs: &DetMessages,
    a: &RateAllocation,
    n: &ChannelLevels,
    g: &DetChannelGains<G>,
) -> Result<bool> {
    let inputs = pack_inputs(msgs, a, n)?;
    let (y1, y2) = det_channel_apply(g, &inputs, n)?;
    for (rx, y) in [(Rx::One, &y1), (Rx::Two, &y2)] {
        match decode_receiver(y, g.receiver(rx), a, n, rx) {
            Ok(got) if got == msgs.receiver_part(rx) => {}
            Ok(_) | Err(Error::AlignmentFailure) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}
