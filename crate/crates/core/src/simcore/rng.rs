use crate::numerics::normal_quantile;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// The Philox4x32 block function with 10 rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Blocks generated per refill once a stream is in steady use; independent
/// blocks pipeline well.
const BATCH: usize = 8;

/// Counter-based random stream.
///
/// Block `i` of stream `(master_seed, stream_id)` is
/// `philox(counter = (i, stream_id), key = master_seed)`, so the sequence
/// depends on nothing but those two numbers and how far it has been read.
/// Streams are single-owner; clone one to fork an identical copy.
#[derive(Clone, Debug)]
pub struct RandomStream {
    master_seed: u64,
    stream_id: u64,
    /// Index of the first block in `buffer`.
    base: u64,
    buffer: [u32; 4 * BATCH],
    filled: usize,
    used: usize,
}

/// Returns the stream addressed by `(master_seed, stream_id)`, positioned at
/// its start.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> RandomStream {
    RandomStream::new(master_seed, stream_id)
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
            base: 0,
            buffer: [0; 4 * BATCH],
            filled: 0,
            used: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 128-bit blocks generated so far.
    pub fn counter(&self) -> u64 {
        self.base.wrapping_add(self.used.div_ceil(4) as u64)
    }

    // The first refill makes a single block so that streams drawing only a
    // few numbers stay cheap.
    #[cold]
    fn refill(&mut self) {
        self.base = self.base.wrapping_add((self.filled / 4) as u64);
        let blocks = if self.filled == 0 && self.base == 0 {
            1
        } else {
            BATCH
        };
        let key = [self.master_seed as u32, (self.master_seed >> 32) as u32];
        for b in 0..blocks {
            let i = self.base.wrapping_add(b as u64);
            let ctr = [
                i as u32,
                (i >> 32) as u32,
                self.stream_id as u32,
                (self.stream_id >> 32) as u32,
            ];
            self.buffer[4 * b..4 * b + 4].copy_from_slice(&philox4x32_10(ctr, key));
        }
        self.filled = 4 * blocks;
        self.used = 0;
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.used == self.filled {
            self.refill();
        }
        let x = self.buffer[self.used];
        self.used += 1;
        x
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let lo = u64::from(self.next_u32());
        let hi = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Standard normal variate by inversion of one uniform.
    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `0..n` (multiply-shift; `n` must be nonzero).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.gaussian();
        }
    }
}

/// Samples a standard normal variate and advances the stream.
pub fn sample_gaussian(stream: &mut RandomStream) -> f64 {
    stream.gaussian()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32_10([0; 4], [0; 2]),
            [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344],
                [0xa4093822, 0x299f31d0]
            ),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn same_address_same_sequence() {
        let a: Vec<u64> = {
            let mut s = derive_stream(7, 0);
            (0..1000).map(|_| s.uniform().to_bits()).collect()
        };
        let mut s = derive_stream(7, 0);
        // Interleaving with other streams cannot matter: there is no shared state.
        let mut other = derive_stream(7, 5);
        let b: Vec<u64> = (0..1000)
            .map(|_| {
                other.next_u32();
                s.uniform().to_bits()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_ids_differ() {
        let mut s0 = derive_stream(7, 0);
        let mut s1 = derive_stream(7, 1);
        let same = (0..1000).filter(|_| s0.uniform() == s1.uniform()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn counter_tracks_blocks() {
        let mut s = derive_stream(1, 2);
        assert_eq!(s.counter(), 0);
        s.next_u64();
        assert_eq!(s.counter(), 1);
        s.next_u64();
        s.next_u32();
        assert_eq!(s.counter(), 2);
        assert_eq!((s.master_seed(), s.stream_id()), (1, 2));
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = derive_stream(3, 3);
        let mut seen = [0u32; 6];
        for _ in 0..6000 {
            seen[s.below(6) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800 && c < 1200), "{seen:?}");
    }
}
