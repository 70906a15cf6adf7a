//! Counter-style random streams.
//!
//! Every unit of Monte Carlo work (a batch, a time sample, a trial) gets its
//! own ChaCha8 generator keyed by `(master seed, domain)` and positioned on
//! stream `index`. No generator state is shared between units, so the order
//! in which rayon schedules them cannot change any drawn value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Domain tags keep independent uses of one master seed apart.
pub mod domain {
    pub const BATCH: u64 = 1;
    pub const TIME_SAMPLE: u64 = 2;
    pub const LASER_JITTER: u64 = 3;
    pub const ELECTRONIC: u64 = 4;
    pub const TRIAL: u64 = 5;
    pub const SEGMENT: u64 = 6;
    pub const SWEEP: u64 = 7;
}

/// Identifies one random stream: `(master, domain, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub master: u64,
    pub domain: u64,
    pub index: u64,
}

impl StreamId {
    pub fn new(master: u64, domain: u64, index: u64) -> Self {
        Self { master, domain, index }
    }

    /// A stream in a nested domain, e.g. per-sample streams inside one
    /// segment: the new domain mixes the parent identity with `domain`.
    pub fn child(&self, domain: u64, index: u64) -> Self {
        Self {
            master: self.master,
            domain: splitmix(splitmix(self.domain ^ domain.rotate_left(17)) ^ self.index),
            index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(self.master) ^ splitmix(!self.domain));
        rng.set_stream(self.index);
        rng
    }
}

impl std::fmt::Display for StreamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.master, self.domain, self.index)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_id_same_sequence() {
        let id = StreamId::new(42, domain::BATCH, 7);
        let a: Vec<u64> = (0..8)
            .map({
                let mut r = id.rng();
                move |_| r.random()
            })
            .collect();
        let b: Vec<u64> = (0..8)
            .map({
                let mut r = id.rng();
                move |_| r.random()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn neighbouring_ids_differ() {
        let first = |id: StreamId| -> u64 { id.rng().random() };
        let base = StreamId::new(42, domain::BATCH, 7);
        let variants = [
            StreamId::new(43, domain::BATCH, 7),
            StreamId::new(42, domain::TRIAL, 7),
            StreamId::new(42, domain::BATCH, 8),
            base.child(domain::TIME_SAMPLE, 0),
        ];
        for v in variants {
            assert_ne!(first(base), first(v), "{v}");
        }
        assert_ne!(
            first(base.child(domain::TIME_SAMPLE, 0)),
            first(StreamId::new(42, domain::BATCH, 8).child(domain::TIME_SAMPLE, 0))
        );
    }
}
