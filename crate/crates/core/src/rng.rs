//! Seeded random streams.
//!
//! Every unit of work (a trial, a trial pair, a chunk of Pickands paths) owns a
//! ChaCha8 stream derived from `(master seed, purpose, index)`, so results do
//! not depend on how work is scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::special::inverse_normal_cdf;

pub type Stream = ChaCha8Rng;

/// Separates the streams of different consumers sharing one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    PathNoise = 0x9e37_79b9_7f4a_7c15,
    Horizon = 0xbf58_476d_1ce4_e5b9,
    Pickands = 0x94d0_49bb_1331_11eb,
    Generic = 0x2545_f491_4f6c_dd1d,
}

/// Stream number `index` for `purpose` under `master`.
pub fn substream(master: u64, purpose: Purpose, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(master ^ purpose as u64));
    rng.set_stream(index);
    rng
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform on the open interval (0, 1), 53 bits.
#[inline]
pub fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by inversion of one open uniform.
#[inline]
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    inverse_normal_cdf(open_uniform(rng))
}

pub fn fill_standard_normal<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for z in out {
        *z = standard_normal(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        fn draw(mut r: Stream) -> Vec<u64> {
            (0..4).map(|_| r.next_u64()).collect()
        }
        let a = draw(substream(7, Purpose::PathNoise, 3));
        assert_eq!(a, draw(substream(7, Purpose::PathNoise, 3)));
        assert_ne!(a, draw(substream(7, Purpose::PathNoise, 4)));
        assert_ne!(a, draw(substream(7, Purpose::Horizon, 3)));
        assert_ne!(a, draw(substream(8, Purpose::PathNoise, 3)));
    }

    #[test]
    fn open_uniform_stays_inside() {
        let mut rng = substream(1, Purpose::Generic, 0);
        for _ in 0..10_000 {
            let u = open_uniform(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = substream(11, Purpose::Generic, 0);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            s += z;
            s2 += z * z;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }
}
