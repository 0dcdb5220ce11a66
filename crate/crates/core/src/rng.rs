//! Seedable, platform-independent random streams.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014). With a 64-bit
//! state `s`, each draw does:
//!
//! ```text
//! s = s + 0x9E3779B97F4A7C15            (wrapping)
//! z = s
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (wrapping)
//! return z ^ (z >> 31)
//! ```
//!
//! Derived values:
//! - `next_f64` = `(next_u64 >> 11) * 2^-53`, uniform in `[0, 1)`.
//! - `below(n)` = high 64 bits of the 128-bit product `next_u64 * n`.
//!
//! Independent streams are keyed by hashing their labels with 64-bit FNV-1a
//! (offset basis `0xcbf29ce484222325`, prime `0x100000001b3`) over the
//! seed's 8 little-endian bytes followed by each label's UTF-8 bytes, with a
//! `0x1f` byte after every label.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// A stream keyed by `seed` and a sequence of labels.
    pub fn for_stream(seed: u64, labels: &[&str]) -> Self {
        let mut bytes = seed.to_le_bytes().to_vec();
        for label in labels {
            bytes.extend_from_slice(label.as_bytes());
            bytes.push(0x1f);
        }
        SplitMix64::new(fnv1a64(&bytes))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`; `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
