//! Counter-based random streams.
//!
//! Every random draw in an experiment is addressed by a [`StreamKey`]. The
//! key maps to a ChaCha8 nonce and word offset, so the numbers a trial sees
//! depend only on its key and never on which thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per `(lane, index)` block. One Gaussian draw uses two or
/// occasionally a few more words, so this is far more than any block needs.
const WORDS_PER_INDEX: u128 = 1 << 12;
const INDEX_BITS: u32 = 24;

/// Lane for channel-gain draws; the index is the antenna.
pub const LANE_CHANNEL: u32 = 0;
/// Lane for random training phases; the index is the mini-slot.
pub const LANE_THETA: u32 = 1;
/// Lane for the true phase of synthetic instances.
pub const LANE_PHI: u32 = 2;
/// First noise lane. Pair slot `k` (antennas 1 and `k`) uses `LANE_NOISE + k`,
/// and the index is the mini-slot.
pub const LANE_NOISE: u32 = 16;

/// Address of one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    /// Experiment cell (e.g. one `(SNR, N)` combination).
    pub cell: u32,
    pub trial: u32,
    pub lane: u32,
    pub index: u32,
}

/// Root of all streams for one seed.
#[derive(Debug, Clone)]
pub struct StreamFactory {
    root: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            root: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn stream(&self, key: StreamKey) -> ChaCha8Rng {
        assert!(
            key.index < 1 << INDEX_BITS,
            "stream index {} out of range",
            key.index
        );
        let mut rng = self.root.clone();
        rng.set_stream((u64::from(key.cell) << 32) | u64::from(key.trial));
        let block = (u128::from(key.lane) << INDEX_BITS) | u128::from(key.index);
        rng.set_word_pos(block * WORDS_PER_INDEX);
        rng
    }

    /// Streams for a single trial.
    pub fn trial(&self, cell: u32, trial: u32) -> TrialStreams<'_> {
        TrialStreams {
            factory: self,
            cell,
            trial,
        }
    }
}

/// The streams belonging to one `(cell, trial)` pair.
#[derive(Debug, Clone, Copy)]
pub struct TrialStreams<'a> {
    factory: &'a StreamFactory,
    cell: u32,
    trial: u32,
}

impl TrialStreams<'_> {
    pub fn stream(&self, lane: u32, index: u32) -> ChaCha8Rng {
        self.factory.stream(StreamKey {
            cell: self.cell,
            trial: self.trial,
            lane,
            index,
        })
    }
}
