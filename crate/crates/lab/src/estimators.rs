//! Disorder-ensemble Monte Carlo estimators.
//!
//! Replica `r` always uses the disorder stream `(seed, r)`, and per-replica
//! results are collected in replica order before any reduction. Results are
//! therefore bit-identical for every rayon pool size.

use pinning_core::disorder::{sample, stream_rng, DisorderLaw, DisorderSample, StreamPurpose};
use pinning_core::engine::{
    backward_table, expected_contacts, forward_table, sample_path, two_point_from_tables,
    ModelParams,
};
use pinning_core::fit::{decay_fit, linear_fit, DecayFit, LinearFit};
use pinning_core::kernels::RenewalKernel;
use pinning_core::{EstimateWithError, Error, Result};
use rayon::prelude::*;

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < 2 {
        return Err(Error::InvalidParameter {
            name: "replicas",
            value: replicas as f64,
            reason: "at least two replicas are needed for an error bar",
        });
    }
    Ok(())
}

/// The disorder samples `(seed, 0..replicas)` of length `n`.
pub fn replica_samples(law: DisorderLaw, n: usize, replicas: usize, seed: u64) -> Vec<DisorderSample> {
    (0..replicas)
        .into_par_iter()
        .map(|r| sample(law, n, seed, r as u64))
        .collect()
}

/// `log Z_{N,ω}` for each sample, in sample order.
pub fn log_partitions_over(
    kernel: &RenewalKernel,
    samples: &[DisorderSample],
    params: ModelParams,
) -> Vec<f64> {
    if params.beta == 0.0 && !samples.is_empty() {
        // the charges carry zero weight, so every replica has the same table
        let lz = forward_table(kernel, &samples[0], params).log_partition();
        return vec![lz; samples.len()];
    }
    samples
        .par_iter()
        .map(|s| forward_table(kernel, s, params).log_partition())
        .collect()
}

pub fn replica_log_partitions(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    params: ModelParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Vec<f64> {
    if params.beta == 0.0 {
        let s = DisorderSample::explicit(vec![0.0; n], law);
        let lz = forward_table(kernel, &s, params).log_partition();
        return vec![lz; replicas];
    }
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let s = sample(law, n, seed, r as u64);
            forward_table(kernel, &s, params).log_partition()
        })
        .collect()
}

/// Quenched free energy from replica log-partitions.
pub fn free_energy_from_log_z(log_z: &[f64], n: usize) -> EstimateWithError {
    let per: Vec<f64> = log_z.iter().map(|&l| l / n as f64).collect();
    EstimateWithError::from_samples(&per, n)
}

/// `E (1/N) log Z_{N,ω}(β, h)` estimated over `replicas` disorder draws.
pub fn quenched_free_energy(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    params: ModelParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    check_replicas(replicas)?;
    let lz = replica_log_partitions(kernel, law, params, n, replicas, seed);
    Ok(free_energy_from_log_z(&lz, n))
}

/// Estimate of `μ_N = -(1/N) log E[1/Z]`.
///
/// `E[1/Z]` is heavy-tailed: a handful of badly localized replicas can carry
/// most of the mass. The largest single-replica share is reported and runs
/// where it exceeds one half are flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuEstimate {
    pub estimate: EstimateWithError,
    pub max_weight_share: f64,
    pub unreliable: bool,
}

pub fn mu_from_log_z(log_z: &[f64], n: usize) -> MuEstimate {
    let r = log_z.len();
    let m = log_z.iter().map(|&l| -l).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_z.iter().map(|&l| (-l - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let mean_w = total / r as f64;
    let nf = n as f64;
    let mu = -(m + mean_w.ln()) / nf;
    let spread = EstimateWithError::from_samples(&w, n);
    // delta method: se(log mean) = se(mean) / mean
    let stderr = spread.stderr / mean_w / nf;
    let share = w.iter().copied().fold(0.0, f64::max) / total;
    MuEstimate {
        estimate: EstimateWithError {
            mean: mu,
            stderr,
            replicas: r,
            n,
        },
        max_weight_share: share,
        unreliable: share > 0.5,
    }
}

pub fn mu_estimate(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    params: ModelParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<MuEstimate> {
    check_replicas(replicas)?;
    let lz = replica_log_partitions(kernel, law, params, n, replicas, seed);
    Ok(mu_from_log_z(&lz, n))
}

/// `[E Z]² / E[Z²]` with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRatio {
    /// The ratio itself, with a delta-method standard error.
    pub estimate: EstimateWithError,
    pub log_ratio: f64,
    pub log_ratio_stderr: f64,
}

pub fn moment_ratio_from_log_z(log_z: &[f64], n: usize) -> MomentRatio {
    let r = log_z.len() as f64;
    let m = log_z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a: Vec<f64> = log_z.iter().map(|&l| (l - m).exp()).collect();
    let mean_a = a.iter().sum::<f64>() / r;
    let mean_a2 = a.iter().map(|x| x * x).sum::<f64>() / r;
    let log_ratio = 2.0 * mean_a.ln() - mean_a2.ln();
    // influence function of 2 log A - log B
    let psi: Vec<f64> = a
        .iter()
        .map(|&x| 2.0 * (x / mean_a - 1.0) - (x * x / mean_a2 - 1.0))
        .collect();
    let log_ratio_stderr = EstimateWithError::from_samples(&psi, n).stderr;
    let ratio = log_ratio.exp();
    MomentRatio {
        estimate: EstimateWithError {
            mean: ratio,
            stderr: ratio * log_ratio_stderr,
            replicas: log_z.len(),
            n,
        },
        log_ratio,
        log_ratio_stderr,
    }
}

pub fn second_moment_ratio(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    params: ModelParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<MomentRatio> {
    check_replicas(replicas)?;
    let lz = replica_log_partitions(kernel, law, params, n, replicas, seed);
    Ok(moment_ratio_from_log_z(&lz, n))
}

/// Second-moment ratio where the given samples are the whole (equally
/// weighted) disorder ensemble.
pub fn second_moment_ratio_over(
    kernel: &RenewalKernel,
    samples: &[DisorderSample],
    params: ModelParams,
) -> Result<MomentRatio> {
    check_replicas(samples.len())?;
    let n = samples[0].len();
    Ok(moment_ratio_from_log_z(&log_partitions_over(kernel, samples, params), n))
}

/// Threshold crossing at one system size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeCrossing {
    pub n: usize,
    pub threshold: f64,
    /// `h` where the quenched estimate crosses the threshold.
    pub raw: f64,
    /// `h` where the pure finite-volume free energy crosses the same threshold.
    pub pure: f64,
    /// `raw - pure`, the finite-size calibrated critical point.
    pub h_c: f64,
    /// Final bisection bracket for `raw`.
    pub bracket: (f64, f64),
    /// Quenched estimates at the bracket ends.
    pub f_at_bracket: (EstimateWithError, EstimateWithError),
    /// `∂_h F̂` across the final bracket.
    pub slope: f64,
}

/// Finite-size estimate of `h_c(β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointEstimate {
    pub h_c: f64,
    /// Statistical error `σ_F / slope` plus both bisection widths.
    pub err: f64,
    /// The statistical part `σ_F / slope` of `err`.
    pub statistical: f64,
    /// Width of the final bisection bracket at the largest size.
    pub bisection_width: f64,
    /// Interval expected to hold `h_c(β)` in infinite volume: it spans
    /// `h_c` and `extrapolated`, widened by `err` on both sides.
    pub bracket: (f64, f64),
    /// Geometric-tail extrapolation of the calibrated sequence in `N`.
    pub extrapolated: f64,
    pub n_sequence: Vec<usize>,
    pub threshold: f64,
    /// One entry per size in `n_sequence`.
    pub per_size: Vec<SizeCrossing>,
    /// Difference of the calibrated estimates at the two largest sizes.
    pub drift: f64,
}

/// Options for [`locate_critical_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingOptions {
    /// Fixed threshold; `None` uses `max(10 σ, 1/N)` with `σ` the standard
    /// error of the quenched estimate at the annealed critical point.
    pub threshold: Option<f64>,
    /// Stop bisecting when the bracket is narrower than this.
    pub tolerance: f64,
    /// Half-width of the search interval around `h_c^a(β)`.
    pub search_half_width: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions {
            threshold: None,
            tolerance: 1e-4,
            search_half_width: 5.0,
        }
    }
}

fn bisect_monotone<F: FnMut(f64) -> f64>(mut f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn crossing_at_size(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    beta: f64,
    n: usize,
    replicas: usize,
    seed: u64,
    opts: &CrossingOptions,
) -> Result<SizeCrossing> {
    let samples = replica_samples(law, n, replicas, seed);
    let h_a = -law.log_mgf(beta);
    let quenched = |h: f64| -> Result<EstimateWithError> {
        let p = ModelParams::new(beta, h)?;
        Ok(free_energy_from_log_z(&log_partitions_over(kernel, &samples, p), n))
    };
    let threshold = match opts.threshold {
        Some(t) => t,
        None => (10.0 * quenched(h_a)?.stderr).max(1.0 / n as f64),
    };
    let (mut lo, mut hi) = (h_a - opts.search_half_width, h_a + opts.search_half_width);
    let f_lo = quenched(lo)?;
    let f_hi = quenched(hi)?;
    if !(f_lo.mean < threshold && f_hi.mean > threshold) {
        return Err(Error::Solver("threshold not crossed inside the search interval"));
    }
    let mut cache = (f_lo, f_hi);
    while hi - lo > opts.tolerance {
        let mid = 0.5 * (lo + hi);
        let f = quenched(mid)?;
        if f.mean < threshold {
            lo = mid;
            cache.0 = f;
        } else {
            hi = mid;
            cache.1 = f;
        }
    }
    let raw = 0.5 * (lo + hi);
    let slope = (cache.1.mean - cache.0.mean) / (hi - lo);

    let pure_sample = DisorderSample::explicit(vec![0.0; n], law);
    let pure = |h: f64| forward_table(kernel, &pure_sample, ModelParams { beta: 0.0, h }).free_energy();
    let (plo, phi) = bisect_monotone(pure, threshold, -opts.search_half_width, opts.search_half_width, opts.tolerance);
    let pure_crossing = 0.5 * (plo + phi);
    Ok(SizeCrossing {
        n,
        threshold,
        raw,
        pure: pure_crossing,
        h_c: raw - pure_crossing,
        bracket: (lo, hi),
        f_at_bracket: cache,
        slope,
    })
}

/// Limit of a sequence measured at geometrically growing sizes, assuming the
/// increments shrink geometrically. The ratio is capped at 3/4. When the last
/// two increments disagree in sign the drift is treated as noise: the last
/// value is kept and the last increment is returned as a symmetric spread.
pub fn extrapolate_sequence(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (d1, d2) = (b - a, c - b);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return (c, d2.abs());
    }
    let r = (d2 / d1).min(0.75);
    (c + d2 * r / (1.0 - r), 0.0)
}

/// Locate `h_c(β)` by threshold crossing of the quenched free energy.
///
/// At every size the crossing of the quenched estimate is calibrated by the
/// crossing of the pure finite-volume free energy at the same threshold, which
/// removes the common finite-size offset (`h_c(0) = 0`).
pub fn locate_critical_point(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    beta: f64,
    n_sequence: &[usize],
    opts: CrossingOptions,
    replicas: usize,
    seed: u64,
) -> Result<CriticalPointEstimate> {
    check_replicas(replicas)?;
    if n_sequence.len() < 3 || n_sequence.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridTooSmall {
            required: 3,
            got: n_sequence.len(),
        });
    }
    let per_size = n_sequence
        .iter()
        .map(|&n| crossing_at_size(kernel, law, beta, n, replicas, seed, &opts))
        .collect::<Result<Vec<_>>>()?;
    let last = *per_size.last().unwrap();
    let prev = per_size[per_size.len() - 2];
    let sigma = last.f_at_bracket.1.stderr.max(last.f_at_bracket.0.stderr);
    let width = last.bracket.1 - last.bracket.0;
    let statistical = if last.slope > 0.0 { sigma / last.slope } else { f64::INFINITY };
    let err = statistical + width + opts.tolerance;
    let before = per_size[per_size.len() - 3];
    let (extrapolated, spread) = extrapolate_sequence(before.h_c, prev.h_c, last.h_c);
    let lo = last.h_c.min(extrapolated) - spread - err;
    let hi = last.h_c.max(extrapolated) + spread + err;
    Ok(CriticalPointEstimate {
        h_c: last.h_c,
        err,
        statistical,
        bisection_width: width,
        bracket: (lo, hi),
        extrapolated,
        n_sequence: n_sequence.to_vec(),
        threshold: last.threshold,
        per_size,
        drift: last.h_c - prev.h_c,
    })
}

/// Typical and averaged correlation lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub xi_typical: f64,
    pub xi_average: f64,
    /// `1/ξ`: mean of per-replica decay rates.
    pub inverse_xi_typical: f64,
    /// Standard error of `1/ξ` across replicas.
    pub inverse_xi_typical_stderr: f64,
    /// `1/ξ^av`: decay rate of the replica mean of `|C|`.
    pub inverse_xi_average: f64,
    pub per_replica_rates: Vec<f64>,
    pub average_fit: DecayFit,
    /// `(k, E|C(ℓ + k, ℓ)|)` over the requested grid.
    pub average_profile: Vec<(usize, f64)>,
    pub mu: MuEstimate,
    pub free_energy: EstimateWithError,
    /// Left point `ℓ` of the bulk window.
    pub ell: usize,
}

pub fn correlation_lengths(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    params: ModelParams,
    n: usize,
    k_grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<CorrelationReport> {
    check_replicas(replicas)?;
    let k_max = *k_grid.iter().max().ok_or(Error::GridTooSmall { required: 4, got: 0 })?;
    if k_grid.len() < 4 || k_max + 2 > n || k_grid.contains(&0) {
        return Err(Error::GridTooSmall {
            required: 4,
            got: k_grid.len(),
        });
    }
    // window centered in the bulk
    let ell = (n - k_max) / 2;
    struct Rep {
        log_z: f64,
        profile: Vec<f64>,
    }
    let reps: Vec<Rep> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let s = sample(law, n, seed, r as u64);
            let f = forward_table(kernel, &s, params);
            let b = backward_table(kernel, &s, params);
            let c = two_point_from_tables(kernel, &s, &f, &b, ell, ell + k_max);
            Rep {
                log_z: f.log_partition(),
                profile: k_grid.iter().map(|&k| c[k]).collect(),
            }
        })
        .collect();
    let log_z: Vec<f64> = reps.iter().map(|r| r.log_z).collect();
    let free_energy = free_energy_from_log_z(&log_z, n);
    let localized = if params.beta == 0.0 {
        free_energy.mean > 0.0
    } else {
        free_energy.mean > 4.0 * free_energy.stderr
    };
    if !localized {
        return Err(Error::NotLocalized { delta: params.h });
    }
    let mu = mu_from_log_z(&log_z, n);
    let ks: Vec<f64> = k_grid.iter().map(|&k| k as f64).collect();
    let mut rates = Vec::with_capacity(replicas);
    for rep in &reps {
        let (x, y): (Vec<f64>, Vec<f64>) = ks
            .iter()
            .zip(&rep.profile)
            .filter(|(_, c)| c.abs() > 0.0)
            .map(|(&k, c)| (k, c.abs().ln()))
            .unzip();
        rates.push(decay_fit(&x, &y)?.rate);
    }
    let rate_est = EstimateWithError::from_samples(&rates, n);
    let average_profile: Vec<(usize, f64)> = k_grid
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let m = reps.iter().map(|r| r.profile[i].abs()).sum::<f64>() / replicas as f64;
            (k, m)
        })
        .collect();
    let ys: Vec<f64> = average_profile.iter().map(|&(_, m)| m.ln()).collect();
    let average_fit = decay_fit(&ks, &ys)?;
    Ok(CorrelationReport {
        xi_typical: 1.0 / rate_est.mean,
        xi_average: 1.0 / average_fit.rate,
        inverse_xi_typical: rate_est.mean,
        inverse_xi_typical_stderr: rate_est.stderr,
        inverse_xi_average: average_fit.rate,
        per_replica_rates: rates,
        average_fit,
        average_profile,
        mu,
        free_energy,
        ell,
    })
}

/// Largest-gap statistics of Gibbs paths.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub n: usize,
    /// `Δ_N / log N`, one entry per replica.
    pub ratios: Vec<f64>,
    pub largest_gaps: Vec<usize>,
    pub median: f64,
    pub mu: MuEstimate,
    pub free_energy: EstimateWithError,
    /// `median · μ̂`, which the gap law puts at 1.
    pub median_times_mu: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn gap_statistics(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    params: ModelParams,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<GapReport> {
    check_replicas(replicas)?;
    let per: Vec<(f64, usize)> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<(f64, usize)> {
            let s = sample(law, n, seed, r as u64);
            let f = forward_table(kernel, &s, params);
            let mut rng = stream_rng(seed, r as u64, StreamPurpose::PathSampling);
            let path = sample_path(&f, kernel, &s, params, &mut rng)?;
            Ok((f.log_partition(), path.observables().largest_gap))
        })
        .collect::<Result<Vec<_>>>()?;
    let log_z: Vec<f64> = per.iter().map(|p| p.0).collect();
    let free_energy = free_energy_from_log_z(&log_z, n);
    let localized = if params.beta == 0.0 {
        free_energy.mean > 0.0
    } else {
        free_energy.mean > 4.0 * free_energy.stderr
    };
    if !localized {
        return Err(Error::NotLocalized { delta: params.h });
    }
    let mu = mu_from_log_z(&log_z, n);
    let largest_gaps: Vec<usize> = per.iter().map(|p| p.1).collect();
    let ln_n = (n as f64).ln();
    let ratios: Vec<f64> = largest_gaps.iter().map(|&g| g as f64 / ln_n).collect();
    let med = median(&ratios);
    Ok(GapReport {
        n,
        median_times_mu: med * mu.estimate.mean,
        median: med,
        ratios,
        largest_gaps,
        mu,
        free_energy,
    })
}

/// Mean contact number at one size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRow {
    pub n: usize,
    pub contacts: EstimateWithError,
}

/// Growth of the contact number at (an estimate of) the critical point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGrowthReport {
    pub h: f64,
    pub rows: Vec<ContactRow>,
    /// Log-log fit of mean contact number against `N`.
    pub fit: LinearFit,
    pub exponent: f64,
    /// `2/3`, valid for every `α`.
    pub general_ceiling: f64,
    /// `2α/(1+α)` for kernels with a power tail of exponent `α < 1`.
    pub irrelevant_ceiling: Option<f64>,
}

pub fn critical_contact_fraction(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    beta: f64,
    h: f64,
    n_grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<ContactGrowthReport> {
    check_replicas(replicas)?;
    let params = ModelParams::new(beta, h)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let per: Vec<f64> = if beta == 0.0 {
            let s = DisorderSample::explicit(vec![0.0; n], law);
            let c = expected_contacts(&forward_table(kernel, &s, params), &backward_table(kernel, &s, params))?;
            vec![c; replicas]
        } else {
            (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let s = sample(law, n, seed, r as u64);
                    expected_contacts(&forward_table(kernel, &s, params), &backward_table(kernel, &s, params))
                })
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(ContactRow {
            n,
            contacts: EstimateWithError::from_samples(&per, n),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.contacts.mean.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let irrelevant_ceiling = kernel
        .alpha()
        .filter(|&a| a > 0.0 && a < 1.0)
        .map(|a| 2.0 * a / (1.0 + a));
    Ok(ContactGrowthReport {
        h,
        exponent: fit.slope,
        fit,
        rows,
        general_ceiling: 2.0 / 3.0,
        irrelevant_ceiling,
    })
}
