//! The disorder-free model: free energy from the implicit equation
//! `Σ_n e^{-bn} K(n) = e^{-h}`, its `h`-derivative, tilted kernels,
//! annealed free energy, specific-heat exponent fits and the variational
//! upper bound on the quenched free energy.

use alloc::vec::Vec;

use libm::{exp, expm1, log};

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::kernels::RenewalKernel;
use crate::math::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousSolution {
    pub h: f64,
    /// `F(0, h)`.
    pub free_energy: f64,
    /// `∂_h F(0, h)`, the limiting contact fraction.
    pub derivative: f64,
    /// `Σ e^{-bn} K(n) - e^{-h}` at the returned root.
    pub residual: f64,
}

/// `Σ K(n) (1 - e^{-bn})`, accurate for small `b`.
fn deficit(masses: &[f64], b: f64) -> f64 {
    masses
        .iter()
        .enumerate()
        .map(|(i, &k)| -k * expm1(-b * (i + 1) as f64))
        .collect::<NeumaierSum>()
        .total()
}

/// `Σ n K(n) e^{-bn}`.
fn first_moment(masses: &[f64], b: f64) -> f64 {
    masses
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let n = (i + 1) as f64;
            n * k * exp(-b * n)
        })
        .collect::<NeumaierSum>()
        .total()
}

/// Free energy of the homogeneous model at pinning strength `h`.
pub fn solve_free_energy(kernel: &RenewalKernel, h: f64) -> Result<HomogeneousSolution> {
    kernel.check_normalized()?;
    if !h.is_finite() {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "must be finite",
        });
    }
    let masses = kernel.masses();
    let total = kernel.total_mass();
    if h <= 0.0 {
        return Ok(HomogeneousSolution {
            h,
            free_energy: 0.0,
            derivative: 0.0,
            residual: total - exp(-h),
        });
    }
    // Σ e^{-bn}K = e^{-h}  <=>  deficit(b) = (total - 1) + (1 - e^{-h})
    let target = (total - 1.0) - expm1(-h);
    if target >= total {
        return Err(Error::Solver("target exceeds total mass"));
    }
    let mean = first_moment(masses, 0.0);
    // deficit(b) <= b·mean and e^{-b}K(1) <= e^{-h}
    let mut lo = (target / mean).max(h + kernel.log_mass(1)).max(0.0);
    let mut hi = h + log(total).max(0.0) + 1e-12 * h;
    if deficit(masses, hi) < target {
        hi = h + 1.0;
    }
    // geometric bisection to a relative bracket of 1e-3, then safeguarded Newton
    let mut b = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo <= 1e-3 * hi {
            break;
        }
        let mid = if lo > 0.0 { libm::sqrt(lo * hi) } else { 0.5 * hi };
        if deficit(masses, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        b = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let g = deficit(masses, b) - target;
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = lo.max(b);
        } else {
            hi = hi.min(b);
        }
        let slope = first_moment(masses, b);
        let mut next = b - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - b).abs() <= 1e-16 * b.max(1e-300);
        b = next;
        if done {
            break;
        }
    }
    let moment = first_moment(masses, b);
    let residual = (total - deficit(masses, b)) - exp(-h);
    Ok(HomogeneousSolution {
        h,
        free_energy: b,
        derivative: exp(-h) / moment,
        residual,
    })
}

/// Free energy of the untruncated source law, `F_K̂(h + log_sigma)`.
///
/// Exact up to corrections of order `e^{-F n_max}` from the discarded tail.
/// Returns zero when `h` does not exceed the truncation shift.
pub fn solve_source_free_energy(kernel: &RenewalKernel, h: f64) -> Result<HomogeneousSolution> {
    let mut s = solve_free_energy(kernel, h + kernel.log_sigma())?;
    s.h = h;
    Ok(s)
}

/// `F^a(β, h) = F(0, h + log M(β))`.
pub fn annealed_free_energy(
    kernel: &RenewalKernel,
    beta: f64,
    h: f64,
    law: DisorderLaw,
) -> Result<f64> {
    Ok(solve_free_energy(kernel, h + law.log_mgf(beta))?.free_energy)
}

/// Annealed critical point `h_c(0) - log M(β) = -log M(β)`.
pub fn annealed_critical_point(beta: f64, law: DisorderLaw) -> f64 {
    -law.log_mgf(beta)
}

/// Exponentially tilted kernel `K̃_h(n) = K(n) e^{-F(0,h) n} e^h`, the
/// inter-arrival law of the localized homogeneous Gibbs measure.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedKernel {
    pub h: f64,
    pub free_energy: f64,
    masses: Vec<f64>,
}

impl TiltedKernel {
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, n: usize) -> f64 {
        if n == 0 || n > self.masses.len() {
            0.0
        } else {
            self.masses[n - 1]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().copied().collect::<NeumaierSum>().total()
    }

    /// `Σ n K̃_h(n)`.
    pub fn mean_gap(&self) -> f64 {
        first_moment(&self.masses, 0.0)
    }

    /// Limiting contact density `1 / Σ n K̃_h(n)`.
    pub fn contact_density(&self) -> f64 {
        1.0 / self.mean_gap()
    }
}

pub fn tilted_kernel(kernel: &RenewalKernel, h: f64) -> Result<TiltedKernel> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "tilting needs h > 0",
        });
    }
    let sol = solve_free_energy(kernel, h)?;
    let f = sol.free_energy;
    let masses = kernel
        .log_masses()
        .iter()
        .enumerate()
        .map(|(i, &lk)| exp(lk + h - f * (i + 1) as f64))
        .collect();
    Ok(TiltedKernel {
        h,
        free_energy: f,
        masses,
    })
}

/// Log-log fit of `F(0, Δ)` against `Δ`, with `F` taken from the source law
/// (see [`solve_source_free_energy`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    /// Specific-heat exponent `ν = 2 - slope`.
    pub exponent: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 8;

pub fn fit_specific_heat_exponent(kernel: &RenewalKernel, deltas: &[f64]) -> Result<ExponentFit> {
    if deltas.len() < MIN_FIT_POINTS {
        return Err(Error::GridTooSmall {
            required: MIN_FIT_POINTS,
            got: deltas.len(),
        });
    }
    let mut xs = Vec::with_capacity(deltas.len());
    let mut ys = Vec::with_capacity(deltas.len());
    for &d in deltas {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: d,
                reason: "grid must be positive",
            });
        }
        let f = solve_source_free_energy(kernel, d)?.free_energy;
        if !(f > 0.0) {
            return Err(Error::NotLocalized { delta: d });
        }
        xs.push(log(d));
        ys.push(log(f));
    }
    let LinearFit {
        slope,
        intercept,
        r_squared,
        ..
    } = linear_fit(&xs, &ys)?;
    let (lo, hi) = deltas
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    Ok(ExponentFit {
        exponent: 2.0 - slope,
        slope,
        intercept,
        r_squared,
        window: (lo, hi),
        points: deltas.len(),
    })
}

/// Result of minimizing `β²q²/2 + F(0, Δ - β²q)` over `q ∈ [0, Δ/β²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalBound {
    pub bound: f64,
    pub q_star: f64,
}

/// The objective `g(q) = β²q²/2 + F(0, Δ - β²q)`.
pub fn variational_objective(kernel: &RenewalKernel, beta: f64, delta: f64, q: f64) -> Result<f64> {
    let b2 = beta * beta;
    Ok(0.5 * b2 * q * q + solve_free_energy(kernel, delta - b2 * q)?.free_energy)
}

/// Upper bound on `F(β, h_c^a(β) + Δ)` for gaussian disorder.
pub fn variational_upper_bound(
    kernel: &RenewalKernel,
    law: DisorderLaw,
    beta: f64,
    delta: f64,
) -> Result<VariationalBound> {
    if law != DisorderLaw::Gaussian {
        return Err(Error::UnsupportedLaw);
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be positive",
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let q_max = delta / (beta * beta);
    let tol = 1e-10 * q_max;
    // golden-section search; g is strictly convex on [0, q_max]
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (0.0, q_max);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = variational_objective(kernel, beta, delta, c)?;
    let mut gd = variational_objective(kernel, beta, delta, d)?;
    while b - a > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = variational_objective(kernel, beta, delta, c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = variational_objective(kernel, beta, delta, d)?;
        }
    }
    let mut best = VariationalBound {
        bound: variational_objective(kernel, beta, delta, 0.5 * (a + b))?,
        q_star: 0.5 * (a + b),
    };
    // first-order kernels put the minimum on the boundary
    for q in [0.0, q_max] {
        let g = variational_objective(kernel, beta, delta, q)?;
        if g < best.bound {
            best = VariationalBound { bound: g, q_star: q };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_kernel, KernelFamily, SlowlyVarying};
    use core::f64::consts::LN_2;

    fn geometric() -> RenewalKernel {
        build_kernel(KernelFamily::Geometric { rate: LN_2 }, 64).unwrap()
    }

    #[test]
    fn geometric_closed_form_root() {
        let s = solve_free_energy(&geometric(), log(3.0)).unwrap();
        assert!((s.free_energy - LN_2).abs() < 1e-13);
        assert!((s.derivative - 0.75).abs() < 1e-12);
        assert!(s.residual.abs() <= 1e-12);
    }

    #[test]
    fn nonpositive_h_is_delocalized() {
        let k = geometric();
        for h in [0.0, -0.1, -3.0] {
            let s = solve_free_energy(&k, h).unwrap();
            assert_eq!(s.free_energy, 0.0);
            assert_eq!(s.derivative, 0.0);
        }
    }

    #[test]
    fn unnormalized_kernel_is_rejected() {
        let k = RenewalKernel::unchecked(alloc::vec![0.5, 0.4]);
        assert!(matches!(
            solve_free_energy(&k, 1.0),
            Err(Error::Unnormalized { .. })
        ));
    }

    #[test]
    fn tilted_geometric_is_quarter_powers() {
        let t = tilted_kernel(&geometric(), log(3.0)).unwrap();
        assert!((t.mass(1) - 0.75).abs() < 1e-13);
        assert!((t.mass(2) - 3.0 / 16.0).abs() < 1e-13);
        assert!((t.total_mass() - 1.0).abs() < 1e-10);
        assert!((t.mean_gap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(tilted_kernel(&geometric(), 0.0).is_err());
    }

    #[test]
    fn annealed_gaussian_shift() {
        let k = geometric();
        let fa = annealed_free_energy(&k, 1.0, log(3.0) - 0.5, DisorderLaw::Gaussian).unwrap();
        assert!((fa - LN_2).abs() < 1e-12);
        for beta in [0.1, 0.7, 2.0] {
            let f = annealed_free_energy(&k, beta, -beta * beta / 2.0, DisorderLaw::Gaussian)
                .unwrap();
            assert_eq!(f, 0.0);
        }
    }

    #[test]
    fn geometric_slope_one() {
        let grid: Vec<f64> = (0..10).map(|i| 1e-4 * libm::pow(10.0, i as f64 / 9.0)).collect();
        let fit = fit_specific_heat_exponent(&geometric(), &grid).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.01);
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn fit_rejects_small_or_delocalized_grids() {
        let k = geometric();
        assert!(matches!(
            fit_specific_heat_exponent(&k, &[0.1, 0.2]),
            Err(Error::GridTooSmall { .. })
        ));
        let grid = [-0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
        assert!(fit_specific_heat_exponent(&k, &grid).is_err());
    }

    #[test]
    fn variational_endpoints_and_bound() {
        let k = geometric();
        let (beta, delta) = (1.0, 0.1);
        let f0 = solve_free_energy(&k, delta).unwrap().free_energy;
        assert!((variational_objective(&k, beta, delta, 0.0).unwrap() - f0).abs() < 1e-15);
        let end = variational_objective(&k, beta, delta, delta).unwrap();
        assert!((end - delta * delta / 2.0).abs() < 1e-15);
        let vb = variational_upper_bound(&k, DisorderLaw::Gaussian, beta, delta).unwrap();
        // oracle: fine grid
        let mut best = f64::INFINITY;
        for i in 0..=10_000 {
            let q = delta * i as f64 / 10_000.0;
            best = best.min(variational_objective(&k, beta, delta, q).unwrap());
        }
        assert!(vb.bound <= best + 1e-12, "{} {}", vb.bound, best);
        // minimum sits at q = Δ/β² for this first-order kernel
        assert!(vb.bound <= f0.min(delta * delta / 2.0));
        assert_eq!(vb.q_star, delta);
        let srw = build_kernel(KernelFamily::SrwReturn, 20_000).unwrap();
        let vs = variational_upper_bound(&srw, DisorderLaw::Gaussian, beta, delta).unwrap();
        let fs = solve_free_energy(&srw, delta).unwrap().free_energy;
        assert!(vs.bound < fs.min(0.005));
        assert!(vs.q_star > 0.0 && vs.q_star < delta);
        assert!(variational_upper_bound(&k, DisorderLaw::Rademacher, beta, delta).is_err());
    }

    #[test]
    fn alpha_zero_vanishes_faster_than_powers() {
        let k = build_kernel(
            KernelFamily::PowerLaw {
                alpha: 0.0,
                slowly_varying: SlowlyVarying::LogPower { c: 1.0, gamma: -2.0 },
            },
            200_000,
        )
        .unwrap();
        // F/Δ^k decreases along a grid shrinking to 1e-4, for k = 1, 2, 3
        let grid = [0.1, 0.07, 0.05, 0.03, 0.02, 0.01, 1e-3, 1e-4];
        for pow_k in [1, 2, 3] {
            let ratios: Vec<f64> = grid
                .iter()
                .map(|&d| {
                    solve_source_free_energy(&k, d).unwrap().free_energy / libm::pow(d, pow_k as f64)
                })
                .collect();
            for w in ratios.windows(2) {
                assert!(w[1] <= w[0], "k={pow_k}: {ratios:?}");
            }
            assert!(ratios.last().unwrap().abs() < 1e-12);
        }
    }
}
