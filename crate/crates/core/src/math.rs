//! Small numerical helpers shared by the kernel, solver and engine code.

use libm::{exp, log};

/// `log(sum(exp(x_i)))` with the max-shift trick. Empty input gives `-inf`.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let mut acc = NeumaierSum::default();
    for &v in values {
        acc.add(exp(v - max));
    }
    max + log(acc.total())
}

/// `log(mean(exp(x_i)))`.
pub fn logmeanexp(values: &[f64]) -> f64 {
    logsumexp(values) - log(values.len() as f64)
}

/// Compensated (Kahan–Babuška–Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let ra = ca.remainder();
    let rb = cb.remainder();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Natural log of the gamma function for positive arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `log binom(2n, n)`.
pub fn ln_central_binomial(n: u64) -> f64 {
    let n = n as f64;
    ln_gamma(2.0 * n + 1.0) - 2.0 * ln_gamma(n + 1.0)
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        s += w * (f(mid - half * x) + f(mid + half * x));
    }
    s * half
}

/// `∫_0^1 f(s) ds` for integrands with an integrable endpoint singularity at
/// `s = 1`: dyadic panels `[1 - 2^{-k+1}, 1 - 2^{-k}]` each get a GL8 rule.
pub fn integrate_unit_graded<F: Fn(f64) -> f64>(f: &F) -> f64 {
    let mut total = NeumaierSum::default();
    let mut lo = 0.0;
    let mut width = 0.5;
    for _ in 0..52 {
        // two panels per dyadic layer
        let mid = lo + 0.5 * width;
        total.add(gauss_legendre8(f, lo, mid));
        total.add(gauss_legendre8(f, mid, lo + width));
        lo += width;
        width *= 0.5;
    }
    total.total()
}
