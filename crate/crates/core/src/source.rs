//! Seeded, addressable randomness.
//!
//! Every Poisson clock of the graphical construction owns a ChaCha8 stream
//! selected by a [`ClockKey`]. Keys are built from lattice coordinates with
//! trailing zeros stripped, so a vertex keeps its stream when the box grows
//! (restriction) and when a `(d-1)`-dimensional vertex is embedded in the
//! hyperplane `x_d = 0` (projection). Within a stream, ring `k` consumes two
//! draws in order: the inter-ring increment and the coin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

const KIND_SITE: u64 = 0;
const KIND_EDGE: u64 = 1;
const KIND_AUX: u64 = 2;
const SLOT_BITS: u32 = 14;
const SLOTS: usize = 4;
const HASHED: u64 = 1 << 63;

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identity of a clock, independent of the box it lives in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClockKey {
    /// Site clock at a vertex (East clocks and the origin clock of both models).
    Site(Vec<i64>),
    /// Clock on the edge `head - e_axis -> head`.
    Edge { head: Vec<i64>, axis: usize },
}

impl ClockKey {
    pub fn site(x: &[i64]) -> Self {
        ClockKey::Site(trim(x))
    }

    pub fn edge(head: &[i64], axis: usize) -> Self {
        ClockKey::Edge { head: trim(head), axis }
    }

    /// 64-bit ChaCha stream selector. Injective whenever the trimmed
    /// coordinates fit four 14-bit slots and the axis fits two bits, which
    /// covers every box this crate simulates; otherwise a mixed hash with the
    /// top bit set is used.
    pub fn stream_id(&self) -> u64 {
        let (kind, axis, coords) = match self {
            ClockKey::Site(c) => (KIND_SITE, 0, c.as_slice()),
            ClockKey::Edge { head, axis } => (KIND_EDGE, *axis as u64, head.as_slice()),
        };
        let packable = coords.len() <= SLOTS && axis < 4 && coords.iter().all(|&c| (0..1 << SLOT_BITS).contains(&c));
        if packable {
            let mut id = (kind << 61) | (axis << 56);
            for (i, &c) in coords.iter().enumerate() {
                id |= (c as u64) << (SLOT_BITS * i as u32);
            }
            id
        } else {
            let mut h = splitmix64(kind ^ (axis << 8) ^ ((coords.len() as u64) << 16));
            for &c in coords {
                h = splitmix64(h ^ c as u64);
            }
            HASHED | (h >> 1)
        }
    }
}

fn trim(x: &[i64]) -> Vec<i64> {
    let keep = x.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
    x[..keep].to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSource {
    seed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent source for replica `index`.
    pub fn replica(&self, index: u64) -> Self {
        Self::new(splitmix64(
            splitmix64(self.seed) ^ splitmix64(index ^ 0xA5A5_5A5A_0F0F_F0F0),
        ))
    }

    fn key_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        let mut z = self.seed;
        for chunk in out.chunks_exact_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        out
    }

    fn raw_stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key_bytes());
        rng.set_stream(id);
        rng
    }

    pub fn clock(&self, key: &ClockKey) -> ClockStream {
        ClockStream::new(self.raw_stream(key.stream_id()))
    }

    /// General-purpose generator for draws that are not clock rings
    /// (percolation fields, sampled initial states, ...). Disjoint from every
    /// clock stream.
    pub fn aux(&self, label: u64) -> ChaCha8Rng {
        self.raw_stream((KIND_AUX << 61) | (label & ((1 << 61) - 1)))
    }
}

/// Exp(1) by the ziggurat method, redrawn on the (2^-52) zero so that it
/// is strictly positive.
#[inline]
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.sample(Exp1);
        if x > 0.0 {
            return x;
        }
    }
}

/// A rate-one Poisson clock started at time 0. Holds the pending (next
/// unconsumed) ring together with its coin.
#[derive(Debug, Clone)]
pub struct ClockStream {
    rng: ChaCha8Rng,
    time: f64,
    coin: f64,
    consumed: u64,
}

impl ClockStream {
    fn new(rng: ChaCha8Rng) -> Self {
        let mut s = Self {
            rng,
            time: 0.0,
            coin: 0.0,
            consumed: 0,
        };
        s.draw();
        s
    }

    fn draw(&mut self) {
        self.time += exp1(&mut self.rng);
        self.coin = self.rng.random::<f64>();
    }

    /// Time of the next ring that has not been consumed.
    #[inline]
    pub fn pending_time(&self) -> f64 {
        self.time
    }

    /// Uniform coin attached to the pending ring; the resample is healthy
    /// iff `coin < p`.
    #[inline]
    pub fn pending_coin(&self) -> f64 {
        self.coin
    }

    pub fn rings_consumed(&self) -> u64 {
        self.consumed
    }

    /// Consume the pending ring and draw the next one.
    #[inline]
    pub fn advance(&mut self) {
        self.consumed += 1;
        self.draw();
    }

    /// Discard every ring at or before `t`; the pending ring is then the
    /// first one strictly after `t`.
    #[inline]
    pub fn skip_through(&mut self, t: f64) {
        while self.time <= t {
            self.advance();
        }
    }

    /// Time of the first ring strictly after `t`.
    pub fn first_ring_after(&mut self, t: f64) -> f64 {
        self.skip_through(t);
        self.time
    }
}
