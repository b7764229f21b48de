//! Renewal inter-arrival laws `K(n)`, their renewal mass function and tail
//! asymptotics.
//!
//! Every kernel is truncated at `n_max` and renormalized. The log of the
//! retained source mass is kept in [`RenewalKernel::log_sigma`]: a model built
//! on the renormalized masses at pinning strength `h` is the source model at
//! `h - log_sigma`, i.e. using the renormalized kernel requires shifting `h`
//! by `+log_sigma`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, expm1, log, log1p, pow, sin, sqrt};

use crate::error::{Error, Result};
use crate::math::{ln_central_binomial, ln_gamma, integrate_unit_graded, NeumaierSum};

/// Slowly varying modulation `L(x)` of a power-law tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying {
    /// `L(x) = c`.
    Constant(f64),
    /// `L(x) = c (log(1 + x))^gamma`.
    LogPower { c: f64, gamma: f64 },
}

impl SlowlyVarying {
    pub const ONE: SlowlyVarying = SlowlyVarying::Constant(1.0);

    pub fn validate(&self) -> Result<()> {
        let c = match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogPower { c, gamma } => {
                if !gamma.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "gamma",
                        value: gamma,
                        reason: "must be finite",
                    });
                }
                c
            }
        };
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                reason: "slowly varying prefactor must be positive and finite",
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogPower { c, gamma } => c * pow(log1p(x), gamma),
        }
    }

    pub fn ln_eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => log(c),
            SlowlyVarying::LogPower { c, gamma } => log(c) + gamma * log(log1p(x)),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(_) => 0.0,
            SlowlyVarying::LogPower { c, gamma } => {
                c * gamma * pow(log1p(x), gamma - 1.0) / (1.0 + x)
            }
        }
    }

    /// Multiply the prefactor by `factor`.
    pub fn scaled(&self, factor: f64) -> SlowlyVarying {
        match *self {
            SlowlyVarying::Constant(c) => SlowlyVarying::Constant(c * factor),
            SlowlyVarying::LogPower { c, gamma } => SlowlyVarying::LogPower {
                c: c * factor,
                gamma,
            },
        }
    }
}

/// Power-law tail metadata: `K_source(n) ≈ L(n) / n^{1+alpha}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub alpha: f64,
    pub slowly_varying: SlowlyVarying,
}

/// Named kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// `K(n) ∝ L(n)/n^{1+alpha}`, normalized over the infinite support.
    PowerLaw {
        alpha: f64,
        slowly_varying: SlowlyVarying,
    },
    /// `K(n) = (e^rate - 1) e^{-rate n}`.
    Geometric { rate: f64 },
    /// First return to zero of the simple random walk, `τ = {n : S_2n = 0}`.
    SrwReturn,
    /// Poland–Scheraga loop law: `K(n) = sigma n^{-1-alpha}` for `n >= 2`,
    /// `K(1)` fixed by normalization.
    PolandScheraga { alpha: f64, sigma: f64 },
}

/// Non-fatal conditions noticed while building a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWarning {
    /// The truncated kernel retains less than `1 - 1e-6` of the source mass.
    TruncationLoss { retained: f64 },
}

/// A normalized, truncated inter-arrival law.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalKernel {
    /// `masses[n - 1] = K(n)` for `n = 1..=n_max`.
    masses: Vec<f64>,
    log_masses: Vec<f64>,
    tail: Option<PowerTail>,
    log_sigma: f64,
    warning: Option<KernelWarning>,
}

impl RenewalKernel {
    fn from_raw_logs(
        raw_logs: Vec<f64>,
        log_total: f64,
        tail: Option<PowerTail>,
        log_sigma: f64,
    ) -> RenewalKernel {
        let log_masses: Vec<f64> = raw_logs.iter().map(|&l| l - log_total).collect();
        let masses: Vec<f64> = log_masses.iter().map(|&l| exp(l)).collect();
        let warning = if log_sigma < log1p(-1e-6) {
            Some(KernelWarning::TruncationLoss {
                retained: exp(log_sigma),
            })
        } else {
            None
        };
        RenewalKernel {
            masses,
            log_masses,
            tail,
            log_sigma,
            warning,
        }
    }

    #[cfg(test)]
    pub(crate) fn unchecked(masses: Vec<f64>) -> RenewalKernel {
        let log_masses = masses.iter().map(|&m| log(m)).collect();
        RenewalKernel {
            masses,
            log_masses,
            tail: None,
            log_sigma: 0.0,
            warning: None,
        }
    }

    pub fn n_max(&self) -> usize {
        self.masses.len()
    }

    /// `K(n)`, zero outside `1..=n_max`.
    pub fn mass(&self, n: usize) -> f64 {
        if n == 0 || n > self.masses.len() {
            0.0
        } else {
            self.masses[n - 1]
        }
    }

    /// `log K(n)`, `-inf` outside `1..=n_max`.
    pub fn log_mass(&self, n: usize) -> f64 {
        if n == 0 || n > self.masses.len() {
            f64::NEG_INFINITY
        } else {
            self.log_masses[n - 1]
        }
    }

    /// `K(1..=n_max)`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn log_masses(&self) -> &[f64] {
        &self.log_masses
    }

    pub fn tail(&self) -> Option<PowerTail> {
        self.tail
    }

    pub fn alpha(&self) -> Option<f64> {
        self.tail.map(|t| t.alpha)
    }

    /// Log of the retained source mass before renormalization (`<= 0`).
    pub fn log_sigma(&self) -> f64 {
        self.log_sigma
    }

    pub fn warning(&self) -> Option<KernelWarning> {
        self.warning
    }

    /// `Σ K(n)` with compensated summation.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().copied().collect::<NeumaierSum>().total()
    }

    /// `Σ n K(n)`.
    pub fn mean_gap(&self) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &k)| (i + 1) as f64 * k)
            .collect::<NeumaierSum>()
            .total()
    }

    /// Source-law masses `K(n) e^{log_sigma}`, exact for `n <= n_max`.
    pub fn source_masses(&self) -> Vec<f64> {
        let s = exp(self.log_sigma);
        self.masses.iter().map(|&k| k * s).collect()
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let sum = self.total_mass();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Unnormalized { sum });
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

/// Build a normalized kernel of the given family truncated at `n_max`.
pub fn build_kernel(family: KernelFamily, n_max: usize) -> Result<RenewalKernel> {
    if n_max < 2 {
        return Err(invalid("n_max", n_max as f64, "must be at least 2"));
    }
    match family {
        KernelFamily::PowerLaw {
            alpha,
            slowly_varying,
        } => power_law(alpha, slowly_varying, n_max),
        KernelFamily::Geometric { rate } => geometric(rate, n_max),
        KernelFamily::SrwReturn => Ok(srw_return(n_max)),
        KernelFamily::PolandScheraga { alpha, sigma } => poland_scheraga(alpha, sigma, n_max),
    }
}

fn power_law(alpha: f64, sv: SlowlyVarying, n_max: usize) -> Result<RenewalKernel> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", alpha, "must be nonnegative"));
    }
    sv.validate()?;
    let raw_logs: Vec<f64> = (1..=n_max)
        .map(|n| {
            let x = n as f64;
            sv.ln_eval(x) - (1.0 + alpha) * log(x)
        })
        .collect();
    let partial: NeumaierSum = raw_logs.iter().map(|&l| exp(l)).collect();
    let partial = partial.total();
    let tail = power_series_tail(alpha, sv, n_max).ok_or(Error::NonNormalizable {
        partial_sum: partial,
        n: n_max,
    })?;
    let z = partial + tail;
    let log_partial = log(partial);
    let log_z = log(z);
    // retained fraction of the infinite-support law
    let log_sigma = -log1p(tail / partial);
    Ok(RenewalKernel::from_raw_logs(
        raw_logs,
        log_partial,
        Some(PowerTail {
            alpha,
            slowly_varying: sv.scaled(exp(-log_z)),
        }),
        log_sigma,
    ))
}

fn geometric(rate: f64, n_max: usize) -> Result<RenewalKernel> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(invalid("rate", rate, "must be positive"));
    }
    let log_norm = log(expm1(rate));
    let raw_logs: Vec<f64> = (1..=n_max).map(|n| log_norm - rate * n as f64).collect();
    // Σ_{n<=n_max} = 1 - e^{-rate n_max}
    let log_sigma = log1p(-exp(-rate * n_max as f64));
    Ok(RenewalKernel::from_raw_logs(raw_logs, log_sigma, None, log_sigma))
}

/// `log K_srw(n) = log binom(2n, n) - n log 4 - log(2n - 1)`.
pub(crate) fn srw_log_mass(n: usize) -> f64 {
    let m = n as u64;
    ln_central_binomial(m) - (n as f64) * log(4.0) - log(2.0 * n as f64 - 1.0)
}

fn srw_return(n_max: usize) -> RenewalKernel {
    let raw_logs: Vec<f64> = (1..=n_max).map(srw_log_mass).collect();
    // P(τ_1 > n) = u(n) = binom(2n, n) 4^{-n}
    let survival = exp(ln_central_binomial(n_max as u64) - n_max as f64 * log(4.0));
    let log_sigma = log1p(-survival);
    RenewalKernel::from_raw_logs(
        raw_logs,
        log_sigma,
        Some(PowerTail {
            alpha: 0.5,
            slowly_varying: SlowlyVarying::Constant(0.5 / sqrt(PI)),
        }),
        log_sigma,
    )
}

fn poland_scheraga(alpha: f64, sigma: f64, n_max: usize) -> Result<RenewalKernel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", alpha, "must be positive"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", sigma, "must be positive"));
    }
    let sv = SlowlyVarying::Constant(1.0);
    let head: NeumaierSum = (2..=n_max).map(|n| pow(n as f64, -1.0 - alpha)).collect();
    let head = head.total();
    let tail = power_series_tail(alpha, sv, n_max).unwrap_or(f64::INFINITY);
    let loop_mass = sigma * (head + tail);
    if loop_mass >= 1.0 {
        return Err(Error::NonNormalizable {
            partial_sum: sigma * head,
            n: n_max,
        });
    }
    let k1 = 1.0 - loop_mass;
    let mut raw_logs = Vec::with_capacity(n_max);
    raw_logs.push(log(k1));
    raw_logs.extend((2..=n_max).map(|n| log(sigma) - (1.0 + alpha) * log(n as f64)));
    let retained = 1.0 - sigma * tail;
    let log_sigma = log1p(-sigma * tail);
    Ok(RenewalKernel::from_raw_logs(
        raw_logs,
        log(retained),
        Some(PowerTail {
            alpha,
            slowly_varying: SlowlyVarying::Constant(sigma),
        }),
        log_sigma,
    ))
}

/// `Σ_{n > m} L(n) n^{-1-alpha}`, or `None` when the series diverges.
///
/// Terms up to `max(m, 2000)` are summed explicitly; the remainder uses
/// Euler–Maclaurin with the integral evaluated by quadrature.
pub fn power_series_tail(alpha: f64, sv: SlowlyVarying, m: usize) -> Option<f64> {
    let converges = match sv {
        _ if alpha > 0.0 => true,
        SlowlyVarying::Constant(_) => false,
        SlowlyVarying::LogPower { gamma, .. } => gamma < -1.0,
    };
    if !converges {
        return None;
    }
    let f = |x: f64| sv.eval(x) * pow(x, -1.0 - alpha);
    let df = |x: f64| {
        sv.derivative(x) * pow(x, -1.0 - alpha) - (1.0 + alpha) * sv.eval(x) * pow(x, -2.0 - alpha)
    };
    let cut = m.max(2000);
    let mut acc = NeumaierSum::default();
    for n in (m + 1)..=cut {
        acc.add(f(n as f64));
    }
    let big_m = cut as f64;
    let integral = match sv {
        SlowlyVarying::Constant(c) => c * pow(big_m, -alpha) / alpha,
        SlowlyVarying::LogPower { c, gamma } if alpha == 0.0 => {
            // ∫_M^∞ c (log(1+x))^γ / x dx ≈ c Y^{γ+1}/(-γ-1), Y = log(1+M)
            let y = log1p(big_m);
            c * pow(y, gamma + 1.0) / (-gamma - 1.0)
        }
        SlowlyVarying::LogPower { .. } => {
            // x = M (1-s)^{-1/alpha}
            let g = |s: f64| {
                let x = big_m * pow(1.0 - s, -1.0 / alpha);
                if x.is_finite() {
                    sv.eval(x)
                } else {
                    0.0
                }
            };
            integrate_unit_graded(&g) * pow(big_m, -alpha) / alpha
        }
    };
    acc.add(integral - 0.5 * f(big_m) - df(big_m) / 12.0);
    Some(acc.total())
}

/// Normalize a nonnegative sub-probability sequence `raw(1..)`.
///
/// Returns the kernel and `log Σ raw`. A model built on the returned kernel
/// reproduces the raw-mass model once `h` is replaced by `h + log Σ`.
pub fn renormalize_subprobability(raw: &[f64]) -> Result<(RenewalKernel, f64)> {
    if let Some(bad) = raw.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
        return Err(invalid("raw mass", *bad, "must be nonnegative and finite"));
    }
    if raw.is_empty() {
        return Err(Error::ZeroMass);
    }
    let sum = raw.iter().copied().collect::<NeumaierSum>().total();
    if sum <= 0.0 {
        return Err(Error::ZeroMass);
    }
    if sum > 1.0 + 1e-12 {
        return Err(Error::NotSubProbability { sum });
    }
    let log_sigma = if sum == 1.0 { 0.0 } else { log(sum).min(0.0) };
    let raw_logs: Vec<f64> = raw.iter().map(|&x| log(x)).collect();
    let kernel = RenewalKernel::from_raw_logs(raw_logs, log(sum), None, log_sigma);
    Ok((kernel, log_sigma))
}

/// `u(n) = P(n ∈ τ)` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalMassTable {
    u: Vec<f64>,
    doney: Option<Vec<f64>>,
}

impl RenewalMassTable {
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `u(n) L(n) n^{1-α} π / (α sin πα)` for `n = 0..=N` (entry 0 is NaN).
    /// Only present for power tails with `0 < α < 1`.
    pub fn doney_ratio(&self) -> Option<&[f64]> {
        self.doney.as_deref()
    }

    /// Min and max of the Doney ratio over the top decade `[N/10, N]`.
    pub fn doney_top_decade(&self) -> Option<(f64, f64)> {
        let d = self.doney.as_ref()?;
        let n = d.len() - 1;
        let lo = (n / 10).max(1);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &r in &d[lo..=n] {
            min = min.min(r);
            max = max.max(r);
        }
        Some((min, max))
    }
}

/// Solve the renewal equation `u(m) = Σ_{j=1}^{min(m, n_max)} K(j) u(m-j)`.
///
/// The source-law masses are used, so `u(n)` is the exact renewal mass of the
/// untruncated law for every `n <= n_max`.
pub fn renewal_mass(kernel: &RenewalKernel, n: usize) -> Result<RenewalMassTable> {
    if n < 1 {
        return Err(invalid("N", n as f64, "must be at least 1"));
    }
    let u = renewal_recursion(&kernel.source_masses(), n);
    let doney = kernel.tail().and_then(|t| {
        if t.alpha > 0.0 && t.alpha < 1.0 {
            let c = PI / (t.alpha * sin(PI * t.alpha));
            Some(
                u.iter()
                    .enumerate()
                    .map(|(m, &um)| {
                        if m == 0 {
                            f64::NAN
                        } else {
                            let x = m as f64;
                            um * t.slowly_varying.eval(x) * pow(x, 1.0 - t.alpha) * c
                        }
                    })
                    .collect(),
            )
        } else {
            None
        }
    });
    Ok(RenewalMassTable { u, doney })
}

/// Plain renewal recursion on the given masses (`masses[j-1] = K(j)`).
pub(crate) fn renewal_recursion(masses: &[f64], n: usize) -> Vec<f64> {
    let support = masses.len();
    // reversed kernel so each step is a contiguous dot product
    let krev: Vec<f64> = masses.iter().rev().copied().collect();
    let mut u = Vec::with_capacity(n + 1);
    u.push(1.0);
    for m in 1..=n {
        let lo = m.saturating_sub(support);
        // Σ_{i=lo}^{m-1} u(i) K(m - i); K(m - i) = krev[support - (m - i)]
        let k_start = support - (m - lo);
        let s = crate::math::dot(&u[lo..m], &krev[k_start..support]);
        u.push(s);
    }
    u
}

/// Tauberian diagnostics for `ℓ = L`, exponent `gamma` and size `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauberianReport {
    pub gamma: f64,
    pub n: usize,
    /// `Σ_{n<=N} n^γ ℓ(n) / (N^{γ+1} ℓ(N) / (γ+1))`.
    pub partial_sum_ratio: f64,
    /// `Q̂(1/N) / (Γ(1+ρ) N^ρ ℓ(N))` for `Q(n) = ρ n^{ρ-1} ℓ(n)`, `ρ = γ+1`.
    pub laplace_ratio: f64,
}

/// Numerically check the partial-sum asymptotics of regularly varying
/// sequences and Karamata's Tauberian correspondence.
pub fn check_tauberian(gamma: f64, sv: SlowlyVarying, n: usize) -> Result<TauberianReport> {
    if !(gamma > -1.0 && gamma.is_finite()) {
        return Err(invalid("gamma", gamma, "partial sums need gamma > -1"));
    }
    if n < 1000 {
        return Err(invalid("N", n as f64, "must be at least 1000"));
    }
    sv.validate()?;
    let nf = n as f64;
    let term = |k: usize| {
        let x = k as f64;
        pow(x, gamma) * sv.eval(x)
    };
    let partial: NeumaierSum = (1..=n).map(term).collect();
    let asymptotic = pow(nf, gamma + 1.0) / (gamma + 1.0) * sv.eval(nf);
    let partial_sum_ratio = partial.total() / asymptotic;

    let rho = gamma + 1.0;
    let cutoff = n.saturating_mul(60);
    let laplace: NeumaierSum = (1..=cutoff)
        .map(|k| rho * term(k) * exp(-(k as f64) / nf))
        .collect();
    let laplace_ratio =
        laplace.total() / (exp(ln_gamma(1.0 + rho)) * pow(nf, rho) * sv.eval(nf));
    Ok(TauberianReport {
        gamma,
        n,
        partial_sum_ratio,
        laplace_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn geometric_half(n_max: usize) -> RenewalKernel {
        build_kernel(KernelFamily::Geometric { rate: core::f64::consts::LN_2 }, n_max).unwrap()
    }

    #[test]
    fn geometric_masses_are_powers_of_two() {
        let k = geometric_half(64);
        assert!((k.mass(1) - 0.5).abs() < 1e-15);
        assert!((k.mass(2) - 0.25).abs() < 1e-15);
        assert!((k.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(k.mass(0), 0.0);
        assert_eq!(k.mass(65), 0.0);
    }

    /// Count 2n-step ±1 paths whose first return to zero happens at step 2n.
    fn first_return_by_enumeration(n: usize) -> f64 {
        let steps = 2 * n;
        let mut hits = 0u64;
        for bits in 0u64..(1 << steps) {
            let mut s = 0i64;
            let mut first = None;
            for t in 0..steps {
                s += if bits >> t & 1 == 1 { 1 } else { -1 };
                if s == 0 {
                    first = Some(t + 1);
                    break;
                }
            }
            if first == Some(steps) {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << steps) as f64
    }

    #[test]
    fn srw_return_matches_path_enumeration() {
        let k = build_kernel(KernelFamily::SrwReturn, 64).unwrap();
        let src = k.source_masses();
        for n in 1..=3 {
            let oracle = first_return_by_enumeration(n);
            assert!((src[n - 1] - oracle).abs() < 1e-15, "n={n}");
        }
        assert!((src[0] - 0.5).abs() < 1e-15);
        assert!((src[1] - 0.125).abs() < 1e-15);
        assert!((src[2] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn srw_log_gamma_has_no_overflow() {
        let k = build_kernel(KernelFamily::SrwReturn, 5000).unwrap();
        assert!(k.masses().iter().all(|m| m.is_finite() && *m > 0.0));
        // tail metadata within 10% over the top decade
        let t = k.tail().unwrap();
        for n in 500..=5000 {
            let x = n as f64;
            let r = k.mass(n) * pow(x, 1.5) / t.slowly_varying.eval(x);
            assert!((r - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn poland_scheraga_k1_from_normalization() {
        let sigma = 1e-5;
        let k = build_kernel(
            KernelFamily::PolandScheraga { alpha: 2.12, sigma },
            100_000,
        )
        .unwrap();
        // oracle: direct summation with an integral remainder bound
        let mut s = 0.0;
        for n in 2..=2_000_000u64 {
            s += pow(n as f64, -3.12);
        }
        let rem_hi = pow(2_000_000.0, -2.12) / 2.12;
        let k1_lo = 1.0 - sigma * (s + rem_hi);
        let k1_hi = 1.0 - sigma * s;
        let src = k.source_masses();
        assert!(src[0] >= k1_lo - 1e-15 && src[0] <= k1_hi + 1e-15);
        // ζ(3.12) - 1 = 0.179906326805256
        assert!((s - 0.179_906_326_805_256).abs() < 1e-6, "{s}");
        assert!((k.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_zero_alpha_constant_is_rejected() {
        let err = build_kernel(
            KernelFamily::PowerLaw {
                alpha: 0.0,
                slowly_varying: SlowlyVarying::ONE,
            },
            100,
        )
        .unwrap_err();
        match err {
            Error::NonNormalizable { partial_sum, n } => {
                assert_eq!(n, 100);
                assert!(partial_sum > 1.0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn power_law_truncation_loss_is_recorded() {
        let k = build_kernel(
            KernelFamily::PowerLaw {
                alpha: 0.5,
                slowly_varying: SlowlyVarying::ONE,
            },
            10_000,
        )
        .unwrap();
        // Σ_{n>10^4} n^{-3/2} ≈ 2·10^{-2}; ζ(3/2) ≈ 2.612375348685488
        let zeta = 2.612_375_348_685_488;
        let partial: f64 = (1..=10_000).map(|n| pow(n as f64, -1.5)).sum();
        let expected = log(partial / zeta);
        assert!((k.log_sigma() - expected).abs() < 1e-9);
        assert!(k.log_sigma() < 0.0);
        assert!((k.total_mass() - 1.0).abs() < 1e-12);
        assert!(k.warning().is_some());
    }

    #[test]
    fn power_series_tail_matches_zeta() {
        // ζ(2) - Σ_{n<=10} 1/n²
        let head: f64 = (1..=10).map(|n| 1.0 / (n * n) as f64).sum();
        let tail = power_series_tail(1.0, SlowlyVarying::ONE, 10).unwrap();
        assert!((tail - (PI * PI / 6.0 - head)).abs() < 1e-13);
        // log-power at alpha > 0: compare with long explicit sum + same remainder
        let sv = SlowlyVarying::LogPower { c: 1.0, gamma: 2.0 };
        let a = power_series_tail(1.0, sv, 10).unwrap();
        let direct: f64 = (11..=200_000).map(|n| {
            let x = n as f64;
            sv.eval(x) / (x * x)
        }).sum::<f64>() + power_series_tail(1.0, sv, 200_000).unwrap();
        assert!((a - direct).abs() < 1e-10, "{a} vs {direct}");
    }

    #[test]
    fn renormalize_already_normalized_is_identity() {
        let raw = vec![0.5, 0.25, 0.25];
        let (k, ls) = renormalize_subprobability(&raw).unwrap();
        assert_eq!(ls, 0.0);
        assert_eq!(k.log_sigma(), 0.0);
        assert_eq!(k.masses(), raw.as_slice());
    }

    #[test]
    fn renormalize_halved_srw() {
        let srw = build_kernel(KernelFamily::SrwReturn, 1000).unwrap();
        let raw: Vec<f64> = srw.masses().iter().map(|m| m / 2.0).collect();
        let (k, ls) = renormalize_subprobability(&raw).unwrap();
        assert!((ls + log(2.0)).abs() < 1e-12);
        for (a, b) in k.masses().iter().zip(srw.masses()) {
            assert!((a - b).abs() < 1e-13 * b, "{a} {b}");
        }
    }

    #[test]
    fn renormalize_rejects_zero_and_excess() {
        assert_eq!(
            renormalize_subprobability(&[0.0, 0.0]).unwrap_err(),
            Error::ZeroMass
        );
        assert!(matches!(
            renormalize_subprobability(&[0.7, 0.7]).unwrap_err(),
            Error::NotSubProbability { .. }
        ));
    }

    #[test]
    fn srw_renewal_mass_unrolled() {
        let k = build_kernel(KernelFamily::SrwReturn, 64).unwrap();
        let t = renewal_mass(&k, 10).unwrap();
        assert_eq!(t.u()[0], 1.0);
        assert!((t.u()[1] - 0.5).abs() < 1e-15);
        assert!((t.u()[2] - 0.375).abs() < 1e-15);
        // u(n) = binom(2n,n) 4^{-n}
        for n in 0..=10u64 {
            let exact = exp(ln_central_binomial(n) - n as f64 * log(4.0));
            assert!((t.u()[n as usize] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_renewal_theorem() {
        let k = geometric_half(256);
        let t = renewal_mass(&k, 200).unwrap();
        assert!((t.u()[200] - 0.5).abs() < 1e-9);
        assert!(t.doney_ratio().is_none());
    }

    #[test]
    fn tauberian_examples() {
        let r = check_tauberian(0.0, SlowlyVarying::ONE, 10_000).unwrap();
        assert!((r.partial_sum_ratio - 1.0).abs() < 1e-12);
        let r = check_tauberian(1.0, SlowlyVarying::LogPower { c: 1.0, gamma: 1.0 }, 1_000_000)
            .unwrap();
        assert!((r.partial_sum_ratio - 1.0).abs() < 0.05);
        assert!(check_tauberian(-1.0, SlowlyVarying::ONE, 1000).is_err());
        assert!(check_tauberian(0.5, SlowlyVarying::ONE, 999).is_err());
    }

    #[test]
    fn slowly_varying_ratio_tends_to_one() {
        let sv = SlowlyVarying::LogPower { c: 2.0, gamma: -2.0 };
        let mut prev = f64::INFINITY;
        let mut x = 10.0;
        while x <= 1e8 {
            let dev = (sv.eval(3.0 * x) / sv.eval(x) - 1.0).abs();
            assert!(dev < prev);
            prev = dev;
            x *= 10.0;
        }
        assert!(prev < 0.2);
    }
}
