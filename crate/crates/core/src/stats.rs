//! Monte Carlo summaries over disorder replicas.

use libm::sqrt;

use crate::math::NeumaierSum;

/// Replica mean with its standard error `sd/√replicas`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
    /// System size the replicas were evaluated at.
    pub n: usize,
}

impl EstimateWithError {
    /// Summarize `values` in their given order. Fewer than two values give a
    /// zero standard error.
    pub fn from_samples(values: &[f64], n: usize) -> EstimateWithError {
        let r = values.len();
        let mean = values.iter().copied().collect::<NeumaierSum>().total() / r as f64;
        let stderr = if r >= 2 {
            let ss = values
                .iter()
                .map(|&v| (v - mean) * (v - mean))
                .collect::<NeumaierSum>()
                .total();
            sqrt(ss / (r as f64 - 1.0) / r as f64)
        } else {
            0.0
        };
        EstimateWithError {
            mean,
            stderr,
            replicas: r,
            n,
        }
    }

    /// Standard error of a difference of independent estimates.
    pub fn combined_stderr(&self, other: &EstimateWithError) -> f64 {
        sqrt(self.stderr * self.stderr + other.stderr * other.stderr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sample() {
        let e = EstimateWithError::from_samples(&[1.0, 2.0, 3.0, 4.0], 10);
        assert_eq!(e.mean, 2.5);
        // sd = sqrt(5/3), stderr = sd / 2
        assert!((e.stderr - sqrt(5.0 / 3.0) / 2.0).abs() < 1e-15);
        let c = EstimateWithError::from_samples(&[2.0, 2.0, 2.0], 1);
        assert_eq!(c.stderr, 0.0);
    }
}
