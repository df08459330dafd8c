//! Named, counter-style random streams.
//!
//! Every random draw in the crate comes from a [`StreamId`]: a tuple of
//! `(seed, purpose, epoch, example, replica)`. The first four words form the
//! ChaCha8 key and the replica index selects the ChaCha stream, so the
//! sequence a replica sees depends only on its name, never on which worker
//! evaluated it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share key material.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Shuffle = 2,
    Dither = 3,
    Dropout = 4,
    SignalDither = 5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub seed: u64,
    pub purpose: Purpose,
    pub epoch: u64,
    pub example: u64,
    pub replica: u64,
}

impl StreamId {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        Self {
            seed,
            purpose,
            epoch: 0,
            example: 0,
            replica: 0,
        }
    }

    pub fn epoch(self, epoch: u64) -> Self {
        Self { epoch, ..self }
    }

    pub fn example(self, example: u64) -> Self {
        Self { example, ..self }
    }

    pub fn replica(self, replica: u64) -> Self {
        Self { replica, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(self.purpose as u64).to_le_bytes());
        key[16..24].copy_from_slice(&self.epoch.to_le_bytes());
        key[24..32].copy_from_slice(&self.example.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.replica);
        rng
    }
}

/// The streams that drive one `parallel_gradient` call: one training example
/// at one epoch of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamFamily {
    pub seed: u64,
    pub epoch: u64,
    pub example: u64,
}

impl StreamFamily {
    pub fn new(seed: u64, epoch: u64, example: u64) -> Self {
        Self {
            seed,
            epoch,
            example,
        }
    }

    pub fn dither(&self, replica: u64) -> StreamId {
        self.named(Purpose::Dither, replica)
    }

    pub fn dropout(&self, replica: u64) -> StreamId {
        self.named(Purpose::Dropout, replica)
    }

    fn named(&self, purpose: Purpose, replica: u64) -> StreamId {
        StreamId::new(self.seed, purpose)
            .epoch(self.epoch)
            .example(self.example)
            .replica(replica)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn head(id: StreamId) -> Vec<u64> {
        let mut rng = id.rng();
        (0..8).map(|_| rng.random()).collect()
    }

    #[test]
    fn same_name_same_sequence() {
        let id = StreamId::new(7, Purpose::Dither).epoch(3).example(11).replica(42);
        assert_eq!(head(id), head(id));
    }

    #[test]
    fn every_coordinate_separates_streams() {
        let base = StreamId::new(7, Purpose::Dither).epoch(3).example(11).replica(42);
        let variants = [
            StreamId { seed: 8, ..base },
            StreamId { purpose: Purpose::Dropout, ..base },
            base.epoch(4),
            base.example(12),
            base.replica(43),
        ];
        for v in variants {
            assert_ne!(head(base), head(v), "{v:?}");
        }
    }

    #[test]
    fn family_names_are_distinct_by_purpose() {
        let fam = StreamFamily::new(1, 0, 0);
        assert_ne!(head(fam.dither(0)), head(fam.dropout(0)));
    }
}
