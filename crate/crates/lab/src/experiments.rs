//! Multi-run studies of disorder relevance.
//!
//! Each study is a pure function of its inputs and seed. Grid points run
//! concurrently and are collected in grid order, so reports do not depend on
//! the size of the worker pool.

use pinning_core::disorder::{DisorderLaw, DisorderSample};
use pinning_core::engine::{forward_table, ModelParams};
use pinning_core::fit::{linear_fit, LinearFit};
use pinning_core::homogeneous::{annealed_critical_point, solve_free_energy};
use pinning_core::kernels::{build_kernel, KernelFamily, RenewalKernel, SlowlyVarying};
use pinning_core::{EstimateWithError, Error, Result};
use rayon::prelude::*;

use crate::estimators::{
    free_energy_from_log_z, locate_critical_point, log_partitions_over, replica_samples,
    CriticalPointEstimate, CrossingOptions,
};

/// Outcome of a single assertion made by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }

    fn from_margin(margin: f64) -> Status {
        if margin >= 0.0 {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One summary line: what was checked, the outcome and the margin by which
/// it held (negative when it failed).
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub status: Status,
    pub margin: f64,
}

impl Assertion {
    fn check(name: String, margin: f64) -> Assertion {
        Assertion {
            name,
            status: Status::from_margin(margin),
            margin,
        }
    }

    fn info(name: String, margin: f64) -> Assertion {
        Assertion {
            name,
            status: Status::Info,
            margin,
        }
    }
}

/// Full descriptor of a parameter scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Largest system size. Critical points use `N/4, N/2, N`.
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    pub law: DisorderLaw,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("alpha", &self.alphas), ("beta", &self.betas), ("delta", &self.deltas)] {
            if grid.is_empty() {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "grid must not be empty",
                });
            }
        }
        if let Some(&d) = self.deltas.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: d,
                reason: "must be strictly positive",
            });
        }
        if self.n < 64 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: self.n as f64,
                reason: "scans need N >= 64",
            });
        }
        Ok(())
    }

    pub fn n_sequence(&self) -> Vec<usize> {
        vec![self.n / 4, self.n / 2, self.n]
    }
}

/// Power-law kernel with constant slowly varying part, truncated at `n_max`.
pub fn power_law_kernel(alpha: f64, n_max: usize) -> Result<RenewalKernel> {
    build_kernel(
        KernelFamily::PowerLaw {
            alpha,
            slowly_varying: SlowlyVarying::ONE,
        },
        n_max,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `|gap| <= 4 err`.
    ConsistentEqual,
    /// `gap > 4 err`.
    StrictlyAbove,
    /// Anything else, including a gap below the annealed bound.
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ConsistentEqual => "consistent-equal",
            Verdict::StrictlyAbove => "strictly-above",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceRow {
    pub alpha: f64,
    pub beta: f64,
    pub hc_quenched: f64,
    pub hc_err: f64,
    pub hc_annealed: f64,
    /// `hc_quenched - hc_annealed`.
    pub gap: f64,
    pub verdict: Verdict,
    /// `β^{2α/(2α-1)}` for `α > 1/2`, the expected scale of the gap.
    pub guide: Option<f64>,
    pub critical: CriticalPointEstimate,
}

impl RelevanceRow {
    /// `gap + 4 err`; the annealed bound forbids this from being negative.
    pub fn annealed_margin(&self) -> f64 {
        self.gap + 4.0 * self.hc_err
    }

    /// `4σ + bisection width - |gap|`, where `σ` is the statistical part of
    /// the error only.
    pub fn equality_margin(&self) -> f64 {
        4.0 * self.critical.statistical + self.critical.bisection_width - self.gap.abs()
    }
}

fn verdict(gap: f64, err: f64) -> Verdict {
    if gap.abs() <= 4.0 * err {
        Verdict::ConsistentEqual
    } else if gap > 4.0 * err {
        Verdict::StrictlyAbove
    } else {
        Verdict::Inconclusive
    }
}

/// Quenched against annealed critical points over the `(α, β)` grid.
pub fn harris_scan(grid: &ScanGrid) -> Result<Vec<RelevanceRow>> {
    grid.validate()?;
    let points: Vec<(f64, f64)> = grid
        .alphas
        .iter()
        .flat_map(|&a| grid.betas.iter().map(move |&b| (a, b)))
        .collect();
    let n_seq = grid.n_sequence();
    points
        .par_iter()
        .map(|&(alpha, beta)| {
            let kernel = power_law_kernel(alpha, grid.n)?;
            let critical = locate_critical_point(
                &kernel,
                grid.law,
                beta,
                &n_seq,
                CrossingOptions::default(),
                grid.replicas,
                grid.seed,
            )?;
            let hc_annealed = annealed_critical_point(beta, grid.law);
            let gap = critical.h_c - hc_annealed;
            let guide = (alpha > 0.5).then(|| beta.powf(2.0 * alpha / (2.0 * alpha - 1.0)));
            Ok(RelevanceRow {
                alpha,
                beta,
                hc_quenched: critical.h_c,
                hc_err: critical.err,
                hc_annealed,
                gap,
                verdict: verdict(gap, critical.err),
                guide,
                critical,
            })
        })
        .collect()
}

pub fn harris_assertions(rows: &[RelevanceRow]) -> Vec<Assertion> {
    let mut out = Vec::new();
    for r in rows {
        let tag = format!("alpha={} beta={}", r.alpha, r.beta);
        out.push(Assertion::check(format!("harris annealed bound {tag}"), r.annealed_margin()));
        if r.alpha < 0.5 {
            out.push(Assertion::check(format!("harris equality {tag}"), r.equality_margin()));
        } else {
            let guide = r.guide.unwrap_or(f64::NAN);
            out.push(Assertion::info(format!("harris gap vs guide {tag}"), guide - r.gap));
        }
    }
    out
}

/// Quenched free-energy estimate over a fixed set of disorder samples.
fn quenched_at(kernel: &RenewalKernel, samples: &[DisorderSample], beta: f64, h: f64) -> Result<EstimateWithError> {
    let n = samples.first().map_or(0, |s| s.len());
    let params = ModelParams::new(beta, h)?;
    Ok(free_energy_from_log_z(&log_partitions_over(kernel, samples, params), n))
}

/// Pure finite-volume free energy `(1/N) log Z_N(0, h)`.
fn pure_finite_volume(kernel: &RenewalKernel, n: usize, h: f64, law: DisorderLaw) -> f64 {
    let s = DisorderSample::explicit(vec![0.0; n], law);
    forward_table(kernel, &s, ModelParams { beta: 0.0, h }).free_energy()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingRow {
    pub delta: f64,
    pub h: f64,
    pub f_hat: EstimateWithError,
    /// `(1+α) Δ² / (2β²)`.
    pub ceiling: f64,
    /// Quenched estimate at `h - w`, `w` the critical-point bracket width.
    pub f_shifted: EstimateWithError,
    /// Finite-difference slope of `F̂` over `[h - w, h]`.
    pub slope: f64,
    /// `4σ + w · slope`.
    pub slack: f64,
    /// `ceiling + slack - F̂`.
    pub margin: f64,
}

/// Homogeneous comparison at `β = 0`: `F(0, Δ)` against the same ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastRow {
    pub delta: f64,
    pub free_energy: f64,
    pub ceiling: f64,
}

/// Points of the `β = 0` contrast grid on `[1e-3, 1e-2]`.
const CONTRAST_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub critical: CriticalPointEstimate,
    pub rows: Vec<SmoothingRow>,
    pub contrast: Vec<ContrastRow>,
    /// Log-log fit of `F(0, Δ)` on the contrast grid.
    pub contrast_fit: LinearFit,
}

impl SmoothingReport {
    pub fn assertions(&self) -> Vec<Assertion> {
        let mut out: Vec<Assertion> = self
            .rows
            .iter()
            .map(|r| Assertion::check(format!("smoothing ceiling delta={}", r.delta), r.margin))
            .collect();
        out.push(Assertion::check(
            "smoothing contrast slope one".into(),
            0.05 - (self.contrast_fit.slope - 1.0).abs(),
        ));
        // the first-order contrast is a small-Δ statement
        let excess = self.contrast[self.contrast.len() - CONTRAST_POINTS..]
            .iter()
            .map(|c| c.free_energy - c.ceiling)
            .fold(f64::INFINITY, f64::min);
        out.push(Assertion::check("smoothing contrast exceeds ceiling".into(), excess));
        out
    }
}

/// Checks `F(β, h_c(β) + Δ) <= (1+α) Δ² / (2β²)` with Gaussian disorder.
///
/// `h_c` is located on `n/4, n/2, n` first. Its bracket width `w` enters the
/// slack through a finite-difference slope, so a row passes when
/// `F̂(ĥ_c + Δ - w) <= ceiling + 4σ`.
pub fn smoothing_check(
    kernel: &RenewalKernel,
    beta: f64,
    deltas: &[f64],
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<SmoothingReport> {
    let alpha = kernel.alpha().filter(|&a| a > 0.0).ok_or(Error::InvalidParameter {
        name: "kernel",
        value: f64::NAN,
        reason: "a power-law tail with alpha > 0 is required",
    })?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be positive",
        });
    }
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: deltas.first().copied().unwrap_or(f64::NAN),
            reason: "deltas must be a nonempty set of positive numbers",
        });
    }
    let law = DisorderLaw::Gaussian;
    let critical = locate_critical_point(
        kernel,
        law,
        beta,
        &[n / 4, n / 2, n],
        CrossingOptions::default(),
        replicas,
        seed,
    )?;
    let samples = replica_samples(law, n, replicas, seed);
    let w = critical.bracket.1 - critical.bracket.0;
    let rows = deltas
        .iter()
        .map(|&delta| {
            let h = critical.h_c + delta;
            let f_hat = quenched_at(kernel, &samples, beta, h)?;
            let f_shifted = quenched_at(kernel, &samples, beta, h - w)?;
            let slope = ((f_hat.mean - f_shifted.mean) / w).max(0.0);
            let ceiling = (1.0 + alpha) * delta * delta / (2.0 * beta * beta);
            let slack = 4.0 * f_hat.stderr + w * slope;
            Ok(SmoothingRow {
                delta,
                h,
                f_hat,
                ceiling,
                f_shifted,
                slope,
                slack,
                margin: ceiling + slack - f_hat.mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let contrast_grid: Vec<f64> = (0..CONTRAST_POINTS)
        .map(|i| 1e-3 * 10f64.powf(i as f64 / (CONTRAST_POINTS - 1) as f64))
        .collect();
    let contrast = deltas
        .iter()
        .chain(contrast_grid.iter())
        .map(|&delta| {
            Ok(ContrastRow {
                delta,
                free_energy: solve_free_energy(kernel, delta)?.free_energy,
                ceiling: (1.0 + alpha) * delta * delta / (2.0 * beta * beta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = contrast[deltas.len()..]
        .iter()
        .map(|c| (c.delta.ln(), c.free_energy.ln()))
        .unzip();
    let contrast_fit = linear_fit(&xs, &ys)?;
    Ok(SmoothingReport {
        alpha,
        beta,
        n,
        critical,
        rows,
        contrast,
        contrast_fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub beta: f64,
    pub delta: f64,
    pub f_hat: EstimateWithError,
    /// `(1/N) log Z_N(0, Δ)`, the annealed value at this size.
    pub pure_finite: f64,
    /// `F(0, Δ)`.
    pub pure: f64,
    /// `pure_finite - pure`, the finite-volume excess.
    pub excess: f64,
    /// `pure_finite + 4σ - F̂`.
    pub upper_margin: f64,
    /// `F̂ + 4σ - (1-ε) pure - excess`.
    pub lower_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub n: usize,
    pub rows: Vec<WindowRow>,
    /// For every Δ, the largest β on the grid such that the sandwich holds
    /// at all β up to it.
    pub largest_passing_beta: Vec<(f64, Option<f64>)>,
}

impl WindowReport {
    pub fn assertions(&self) -> Vec<Assertion> {
        let mut out = Vec::new();
        for r in &self.rows {
            let tag = format!("beta={} delta={}", r.beta, r.delta);
            out.push(Assertion::check(format!("window upper {tag}"), r.upper_margin));
            out.push(Assertion::check(format!("window lower {tag}"), r.lower_margin));
        }
        out
    }
}

/// `(1-ε) F(0,Δ) <= F(β, h_c^a(β) + Δ) <= F(0,Δ)` for `α < 1/2`.
///
/// Both sides are compared at the same size `N`. The upper side is Jensen's
/// inequality, which holds exactly in finite volume. On the lower side the
/// pure finite-volume excess `F_N(0,Δ) - F(0,Δ)` is added to the infinite
/// volume bound, so that boundary terms common to both models cancel.
#[allow(clippy::too_many_arguments)]
pub fn irrelevance_window_check(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    betas: &[f64],
    deltas: &[f64],
    epsilon: f64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<WindowReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must lie in (0, 1)",
        });
    }
    let alpha = kernel.alpha().unwrap_or(f64::NAN);
    let samples = replica_samples(law, n, replicas, seed);
    let points: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| deltas.iter().map(move |&d| (b, d)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(beta, delta)| {
            let f_hat = quenched_at(kernel, &samples, beta, annealed_critical_point(beta, law) + delta)?;
            let pure_finite = pure_finite_volume(kernel, n, delta, law);
            let pure = solve_free_energy(kernel, delta)?.free_energy;
            let slack = 4.0 * f_hat.stderr;
            Ok(WindowRow {
                beta,
                delta,
                f_hat,
                pure_finite,
                pure,
                excess: pure_finite - pure,
                upper_margin: pure_finite + slack - f_hat.mean,
                lower_margin: f_hat.mean + slack - (1.0 - epsilon) * pure - (pure_finite - pure),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sorted_betas = betas.to_vec();
    sorted_betas.sort_by(f64::total_cmp);
    let largest_passing_beta = deltas
        .iter()
        .map(|&d| {
            let mut best = None;
            for &b in &sorted_betas {
                let ok = rows
                    .iter()
                    .filter(|r| r.beta == b && r.delta == d)
                    .all(|r| r.lower_margin >= 0.0 && r.upper_margin >= 0.0);
                if !ok {
                    break;
                }
                best = Some(b);
            }
            (d, best)
        })
        .collect();
    Ok(WindowReport {
        alpha,
        epsilon,
        n,
        rows,
        largest_passing_beta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCell {
    pub beta: f64,
    pub delta: f64,
    pub f_hat: EstimateWithError,
    /// `(1/N) log Z_N(0, Δ)`.
    pub pure_finite: f64,
    /// `F̂ / pure_finite`.
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// `e^{-1/β²}`, the scale below which disorder may shift the transition.
    pub guide: f64,
    /// `(h + log K(N)) / N`, from the path with a single contact at `N`.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReport {
    pub n: usize,
    pub cells: Vec<MarginalCell>,
}

impl MarginalReport {
    /// Jensen and positivity checks. The comparison with the guide curve
    /// carries no assertion.
    pub fn assertions(&self) -> Vec<Assertion> {
        let mut out = Vec::new();
        for c in &self.cells {
            let tag = format!("beta={} delta={}", c.beta, c.delta);
            out.push(Assertion::check(
                format!("marginal jensen {tag}"),
                1.0 + 4.0 * c.ratio_stderr - c.ratio,
            ));
            out.push(Assertion::check(
                format!("marginal lower bound {tag}"),
                c.f_hat.mean + 4.0 * c.f_hat.stderr - c.lower_bound,
            ));
            out.push(Assertion::info(format!("marginal guide {tag}"), c.delta - c.guide));
        }
        out
    }
}

/// Ratio `F̂(β, h_c^a + Δ) / F_N(0, Δ)` over a `(β, Δ)` grid, for the
/// `α = 1/2` kernels.
pub fn marginal_case_diagnostic(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    betas: &[f64],
    deltas: &[f64],
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<MarginalReport> {
    let samples = replica_samples(law, n, replicas, seed);
    let log_k_n = if n <= kernel.n_max() { kernel.log_mass(n) } else { f64::NEG_INFINITY };
    let points: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| deltas.iter().map(move |&d| (b, d)))
        .collect();
    let cells = points
        .par_iter()
        .map(|&(beta, delta)| {
            let h = annealed_critical_point(beta, law) + delta;
            let f_hat = quenched_at(kernel, &samples, beta, h)?;
            let pure_finite = pure_finite_volume(kernel, n, delta, law);
            let guide = if beta > 0.0 { (-1.0 / (beta * beta)).exp() } else { 0.0 };
            Ok(MarginalCell {
                beta,
                delta,
                f_hat,
                pure_finite,
                ratio: f_hat.mean / pure_finite,
                ratio_stderr: f_hat.stderr / pure_finite,
                guide,
                lower_bound: (h + log_k_n) / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalReport { n, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        let mut g = ScanGrid {
            alphas: vec![0.3],
            betas: vec![0.1],
            deltas: vec![0.1],
            n: 256,
            replicas: 4,
            seed: 1,
            law: DisorderLaw::Gaussian,
        };
        assert!(g.validate().is_ok());
        g.deltas = vec![0.1, 0.0];
        assert!(g.validate().is_err());
        g.deltas = vec![];
        assert!(g.validate().is_err());
        assert_eq!(g.n_sequence(), vec![64, 128, 256]);
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(verdict(0.01, 0.01), Verdict::ConsistentEqual);
        assert_eq!(verdict(0.05, 0.01), Verdict::StrictlyAbove);
        assert_eq!(verdict(-0.05, 0.01), Verdict::Inconclusive);
    }

    #[test]
    fn window_is_tight_at_zero_beta() {
        let k = power_law_kernel(0.3, 512).unwrap();
        let r = irrelevance_window_check(&k, DisorderLaw::Gaussian, &[0.0], &[0.05, 0.2], 0.3, 512, 4, 3).unwrap();
        for row in &r.rows {
            assert_eq!(row.f_hat.mean, row.pure_finite);
            assert_eq!(row.f_hat.stderr, 0.0);
        }
        assert!(r.assertions().iter().all(|a| a.status == Status::Pass));
    }

    #[test]
    fn marginal_ratio_is_one_at_zero_beta() {
        let k = build_kernel(KernelFamily::SrwReturn, 4096).unwrap();
        let r = marginal_case_diagnostic(&k, DisorderLaw::Gaussian, &[0.0], &[0.1, 0.3], 512, 3, 9).unwrap();
        for c in &r.cells {
            assert!((c.ratio - 1.0).abs() < 1e-15);
            assert_eq!(c.guide, 0.0);
        }
    }
}
