//! Counter-based uniforms keyed by `(seed, replication, stream, z)`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    mix(h.wrapping_add(GOLDEN) ^ word.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Independent sub-streams derived from one root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Driving noise `Y_z` of the field.
    Field = 1,
    /// Uniform cluster selection.
    ClusterDraw = 2,
}

/// Seed for a per-replication stream, e.g. to initialise a ChaCha generator.
pub fn stream_seed(seed: u64, replication: u64, stream: Stream) -> u64 {
    absorb(absorb(absorb(mix(seed), replication), stream as u64), 0)
}

/// Hash prefix for one `(seed, replication, stream)` triple.
#[derive(Debug, Clone, Copy)]
pub struct NoiseKey(u64);

impl NoiseKey {
    pub fn new(seed: u64, replication: u64, stream: Stream) -> Self {
        Self(absorb(absorb(mix(seed), replication), stream as u64))
    }

    /// Extends the key with leading coordinates.
    #[inline]
    pub fn prefix(self, coords: &[i64]) -> Self {
        Self(coords.iter().fold(self.0, |h, c| absorb(h, *c as u64)))
    }

    /// Uniform on the open interval `(0, 1)` for the full coordinate `z`.
    #[inline]
    pub fn uniform(self, z: &[i64]) -> f64 {
        to_open_unit(self.prefix(z).0)
    }

    /// Uniform for a key already extended by all but the last coordinate.
    #[inline]
    pub fn uniform_last(self, last: i64) -> f64 {
        to_open_unit(absorb(self.0, last as u64))
    }
}

#[inline]
fn to_open_unit(h: u64) -> f64 {
    ((h >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniforms_are_open_and_keyed() {
        let k = NoiseKey::new(7, 3, Stream::Field);
        let a = k.uniform(&[1, 2]);
        assert!(a > 0.0 && a < 1.0);
        assert_eq!(a, k.prefix(&[1]).uniform_last(2));
        assert_ne!(a, k.uniform(&[2, 1]));
        assert_ne!(a, NoiseKey::new(7, 4, Stream::Field).uniform(&[1, 2]));
        assert_ne!(a, NoiseKey::new(8, 3, Stream::Field).uniform(&[1, 2]));
        assert_ne!(a, NoiseKey::new(7, 3, Stream::ClusterDraw).uniform(&[1, 2]));
        assert!(to_open_unit(0) > 0.0 && to_open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn moments_look_uniform() {
        let k = NoiseKey::new(1, 0, Stream::Field);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let u = k.uniform(&[i, -i]);
            s += u;
            s2 += u * u;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.003);
        assert!((var - 1.0 / 12.0).abs() < 0.001);
    }
}
