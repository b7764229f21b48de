//! IID charge sequences `ω_1..ω_N` with mean zero and unit variance.
//!
//! Each draw comes from a ChaCha8 stream keyed by `(seed, replica_index)`, so a
//! replica's charges do not depend on which worker generates them or in what
//! order.

use alloc::vec::Vec;

use libm::{exp, fabs, log, log1p, sqrt};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Law of a single charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisorderLaw {
    Gaussian,
    /// `±1` with probability 1/2 each.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    Uniform,
}

/// Distinct sub-streams drawn from the same `(seed, replica)` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Disorder = 0,
    PathSampling = 1,
}

impl DisorderLaw {
    pub fn name(&self) -> &'static str {
        match self {
            DisorderLaw::Gaussian => "gaussian",
            DisorderLaw::Rademacher => "rademacher",
            DisorderLaw::Uniform => "uniform",
        }
    }

    pub fn from_name(name: &str) -> Option<DisorderLaw> {
        match name {
            "gaussian" | "normal" => Some(DisorderLaw::Gaussian),
            "rademacher" | "binary" => Some(DisorderLaw::Rademacher),
            "uniform" => Some(DisorderLaw::Uniform),
            _ => None,
        }
    }

    /// Support bound `C` with every draw in `[-C, C]`, if bounded.
    pub fn bound(&self) -> Option<f64> {
        match self {
            DisorderLaw::Gaussian => None,
            DisorderLaw::Rademacher => Some(1.0),
            DisorderLaw::Uniform => Some(SQRT3),
        }
    }

    /// `log E e^{β ω}`.
    pub fn log_mgf(&self, beta: f64) -> f64 {
        match self {
            DisorderLaw::Gaussian => 0.5 * beta * beta,
            DisorderLaw::Rademacher => {
                let b = fabs(beta);
                // log cosh b without overflow
                b + log1p(exp(-2.0 * b)) - core::f64::consts::LN_2
            }
            DisorderLaw::Uniform => {
                let x = fabs(beta) * SQRT3;
                if x < 1e-3 {
                    let x2 = x * x;
                    x2 / 6.0 - x2 * x2 / 180.0
                } else {
                    // log(sinh x / x) = x - log(2x) + log(1 - e^{-2x})
                    x - log(2.0 * x) + log1p(-exp(-2.0 * x))
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            DisorderLaw::Gaussian => StandardNormal.sample(rng),
            DisorderLaw::Rademacher => {
                if rng.next_u32() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            DisorderLaw::Uniform => {
                // 53 random bits mapped to [0, 1)
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                (2.0 * u - 1.0) * SQRT3
            }
        }
    }
}

/// Deterministic generator for the sub-stream `purpose` of `(seed, replica)`.
pub fn stream_rng(seed: u64, replica_index: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica_index.wrapping_mul(4).wrapping_add(purpose as u64));
    rng
}

/// One realization of the charges together with the key that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub replica_index: u64,
    pub law: DisorderLaw,
}

impl DisorderSample {
    /// Wrap a hand-chosen charge sequence (seed and replica set to zero).
    pub fn explicit(values: Vec<f64>, law: DisorderLaw) -> DisorderSample {
        DisorderSample {
            values,
            seed: 0,
            replica_index: 0,
            law,
        }
    }

    /// `ω_n` for `n = 1..=N`.
    #[inline]
    pub fn omega(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sample(law: DisorderLaw, n: usize, seed: u64, replica_index: u64) -> DisorderSample {
    let mut rng = stream_rng(seed, replica_index, StreamPurpose::Disorder);
    let values = (0..n).map(|_| law.draw(&mut rng)).collect();
    DisorderSample {
        values,
        seed,
        replica_index,
        law,
    }
}

/// Standard normal CDF, used by goodness-of-fit checks.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / sqrt(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_mgf_values() {
        assert_eq!(DisorderLaw::Gaussian.log_mgf(1.0), 0.5);
        for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher, DisorderLaw::Uniform] {
            assert_eq!(law.log_mgf(0.0), 0.0);
        }
        let by_hand = log(0.5 * (exp(2.0) + exp(-2.0)));
        assert!((DisorderLaw::Rademacher.log_mgf(2.0) - by_hand).abs() < 1e-15);
        assert!((DisorderLaw::Rademacher.log_mgf(2.0) - 1.325_002_747_357_86).abs() < 1e-12);
        // uniform: direct formula agrees in the overlap of both branches
        for b in [5e-4, 2e-3, 0.3, 1.0, 4.0] {
            let x = b * SQRT3;
            let direct = log(libm::sinh(x) / x);
            assert!((DisorderLaw::Uniform.log_mgf(b) - direct).abs() < 1e-13, "{b}");
        }
        // no overflow for large arguments
        assert!(DisorderLaw::Rademacher.log_mgf(1000.0).is_finite());
        assert!(DisorderLaw::Uniform.log_mgf(1000.0).is_finite());
    }

    #[test]
    fn sampling_is_deterministic_and_stream_separated() {
        let a = sample(DisorderLaw::Gaussian, 50, 7, 3);
        let b = sample(DisorderLaw::Gaussian, 50, 7, 3);
        assert_eq!(a, b);
        for seed in 0..100u64 {
            let r0 = sample(DisorderLaw::Rademacher, 64, seed, 0);
            let r1 = sample(DisorderLaw::Rademacher, 64, seed, 1);
            assert_ne!(r0.values, r1.values);
        }
        // prefix property: shorter samples are prefixes of longer ones
        let long = sample(DisorderLaw::Uniform, 100, 1, 0);
        let short = sample(DisorderLaw::Uniform, 10, 1, 0);
        assert_eq!(&long.values[..10], &short.values[..]);
    }

    #[test]
    fn bounded_laws_stay_in_support() {
        for law in [DisorderLaw::Rademacher, DisorderLaw::Uniform] {
            let c = law.bound().unwrap();
            for v in sample(law, 10_000, 11, 0).values {
                assert!(v.abs() <= c);
            }
        }
    }
}
