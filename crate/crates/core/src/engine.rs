//! Exact finite-volume computations for one disorder realization.
//!
//! All tables use the both-ends-pinned ensemble: `0 ∈ τ` and `N ∈ τ`. The
//! system size `N` is the length of the disorder sample.
//!
//! The `O(N²)` recursion runs in the linear domain. The kernel is tilted by
//! `e^{λj}` so that light tails do not underflow, and partition values are
//! stored as mantissas grouped in blocks that share one log scale. Each step
//! then costs one dot product per block plus a log-sum-exp across blocks.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, expm1, log};
use rand_core::RngCore;

use crate::disorder::DisorderSample;
use crate::error::{Error, Result};
use crate::kernels::RenewalKernel;
use crate::math::{dot, logsumexp};

/// Largest `N` accepted by the enumeration oracles.
pub const BRUTE_FORCE_LIMIT: usize = 20;

const BLOCK_LEN: usize = 256;
const BLOCK_LOG_SPREAD: f64 = 200.0;

/// Inverse temperature and pinning strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(beta: f64, h: f64) -> Result<ModelParams> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must be finite and nonnegative",
            });
        }
        if !h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "must be finite",
            });
        }
        Ok(ModelParams { beta, h })
    }

    /// Site weight `βω + h`.
    #[inline]
    pub fn site_weight(&self, omega: f64) -> f64 {
        self.beta * omega + self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Identity of the inputs a table was built from, for mismatch checks.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TableKey {
    params: ModelParams,
    n: usize,
    omega_hash: u64,
    kernel_hash: u64,
    cutoff: usize,
}

fn fnv(values: impl Iterator<Item = f64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl TableKey {
    fn new(kernel: &RenewalKernel, sample: &DisorderSample, params: ModelParams, cutoff: usize) -> TableKey {
        TableKey {
            params,
            n: sample.len(),
            omega_hash: fnv(sample.values.iter().copied()),
            kernel_hash: fnv(kernel.log_masses().iter().copied()),
            cutoff,
        }
    }
}

/// Log-domain pinned partition values.
///
/// Forward: `log_z[m] = log Z_{0,m}`, weights on sites `1..=m`.
/// Backward: `log_z[m]` is the log partition of `(m, N]` given `m ∈ τ`, with
/// weights on sites `m+1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    log_z: Vec<f64>,
    direction: Direction,
    key: TableKey,
}

impl PartitionTable {
    pub fn log_z(&self) -> &[f64] {
        &self.log_z
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn params(&self) -> ModelParams {
        self.key.params
    }

    /// System size `N`.
    pub fn n(&self) -> usize {
        self.key.n
    }

    /// `log Z_{N,ω}`, read from whichever end of the table holds it.
    pub fn log_partition(&self) -> f64 {
        match self.direction {
            Direction::Forward => self.log_z[self.key.n],
            Direction::Backward => self.log_z[0],
        }
    }

    /// `(1/N) log Z_{N,ω}`; zero for an empty system.
    pub fn free_energy(&self) -> f64 {
        if self.key.n == 0 {
            0.0
        } else {
            self.log_partition() / self.key.n as f64
        }
    }
}

/// Core recursion `Y(r) = lw[r] + log Σ_{r'<r} e^{Y(r')} K(r - r')` with
/// `Y(0) = lw[0]`, restricted to gaps `<= reach`.
pub(crate) fn pinned_recursion(lw: &[f64], kernel: &RenewalKernel, reach: usize) -> Vec<f64> {
    let n = lw.len() - 1;
    let reach = reach.min(kernel.n_max()).min(n);
    let mut y = vec![0.0; n + 1];
    y[0] = lw[0];
    if n == 0 {
        return y;
    }
    let lk = &kernel.log_masses()[..reach];
    let first = lk.iter().position(|v| v.is_finite());
    let last = lk.iter().rposition(|v| v.is_finite());
    let lambda = match (first, last) {
        (Some(a), Some(b)) if b > a => ((lk[a] - lk[b]) / (b - a) as f64).max(0.0),
        _ => 0.0,
    };
    let kappa = lk
        .iter()
        .enumerate()
        .map(|(i, &v)| v + lambda * (i + 1) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    // rk[reach - j] = K̃(j) e^{-kappa}, rk[reach] = K̃(0) = 0
    let mut rk = vec![0.0; reach + 1];
    for j in 1..=reach {
        rk[reach - j] = exp(lk[j - 1] + lambda * j as f64 - kappa);
    }

    let mut mant = vec![0.0; n + 1];
    let mut starts: Vec<usize> = vec![0];
    let mut scales: Vec<f64> = vec![lw[0]];
    mant[0] = 1.0;
    let mut first_block = 0;
    let mut parts: Vec<f64> = Vec::new();
    for m in 1..=n {
        let lo = m.saturating_sub(reach);
        while first_block + 1 < starts.len() && starts[first_block + 1] <= lo {
            first_block += 1;
        }
        parts.clear();
        for b in first_block..starts.len() {
            let s = starts[b].max(lo);
            let e = if b + 1 < starts.len() { starts[b + 1] } else { m };
            if s >= e {
                continue;
            }
            let off = reach + s - m;
            let d = dot(&mant[s..e], &rk[off..off + (e - s)]);
            if d > 0.0 {
                parts.push(scales[b] + log(d));
            }
        }
        let acc = logsumexp(&parts) + kappa;
        let v = lw[m] + acc;
        y[m] = v;
        let cur = starts.len() - 1;
        if v == f64::NEG_INFINITY {
            mant[m] = 0.0;
        } else if (v - scales[cur]).abs() > BLOCK_LOG_SPREAD
            || m - starts[cur] >= BLOCK_LEN
            || scales[cur] == f64::NEG_INFINITY
        {
            starts.push(m);
            scales.push(v);
            mant[m] = 1.0;
        } else {
            mant[m] = exp(v - scales[cur]);
        }
    }
    for (r, v) in y.iter_mut().enumerate() {
        *v -= lambda * r as f64;
    }
    y
}

fn forward_weights(sample: &DisorderSample, params: ModelParams, from: usize, to: usize) -> Vec<f64> {
    let mut lw = Vec::with_capacity(to - from + 1);
    lw.push(0.0);
    for site in from + 1..=to {
        lw.push(params.site_weight(sample.omega(site)));
    }
    lw
}

/// Forward table `log Z_{0,m}` for `m = 0..=N`.
pub fn forward_table(kernel: &RenewalKernel, sample: &DisorderSample, params: ModelParams) -> PartitionTable {
    forward_table_with_cutoff(kernel, sample, params, usize::MAX)
}

/// Forward table with gaps longer than `cutoff` given zero weight.
pub fn forward_table_with_cutoff(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    cutoff: usize,
) -> PartitionTable {
    let n = sample.len();
    let lw = forward_weights(sample, params, 0, n);
    PartitionTable {
        log_z: pinned_recursion(&lw, kernel, cutoff),
        direction: Direction::Forward,
        key: TableKey::new(kernel, sample, params, cutoff),
    }
}

/// Backward table: log partition of `(m, N]` given `m ∈ τ`.
pub fn backward_table(kernel: &RenewalKernel, sample: &DisorderSample, params: ModelParams) -> PartitionTable {
    backward_table_with_cutoff(kernel, sample, params, usize::MAX)
}

pub fn backward_table_with_cutoff(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    cutoff: usize,
) -> PartitionTable {
    let n = sample.len();
    let key = TableKey::new(kernel, sample, params, cutoff);
    if n == 0 {
        return PartitionTable {
            log_z: vec![0.0],
            direction: Direction::Backward,
            key,
        };
    }
    // reversed index r = N - m; the weight of site N - r rides on index r
    let mut lw = Vec::with_capacity(n + 1);
    for r in 0..n {
        lw.push(params.site_weight(sample.omega(n - r)));
    }
    lw.push(0.0);
    let y = pinned_recursion(&lw, kernel, cutoff);
    let mut log_z = vec![0.0; n + 1];
    for r in 0..=n {
        log_z[n - r] = y[r] - lw[r];
    }
    log_z[n] = 0.0;
    PartitionTable {
        log_z,
        direction: Direction::Backward,
        key,
    }
}

fn check_pair(forward: &PartitionTable, backward: &PartitionTable) -> Result<()> {
    if forward.direction != Direction::Forward
        || backward.direction != Direction::Backward
        || forward.key != backward.key
    {
        return Err(Error::TableMismatch);
    }
    Ok(())
}

/// `P(k ∈ τ)` under the finite-volume Gibbs measure.
pub fn marginal_contact(forward: &PartitionTable, backward: &PartitionTable, k: usize) -> Result<f64> {
    check_pair(forward, backward)?;
    let n = forward.n();
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, lo: 0, hi: n });
    }
    Ok(exp(forward.log_z[k] + backward.log_z[k] - forward.log_z[n]).min(1.0))
}

/// `P(k ∈ τ)` for every `k = 0..=N`.
pub fn marginals(forward: &PartitionTable, backward: &PartitionTable) -> Result<Vec<f64>> {
    check_pair(forward, backward)?;
    let n = forward.n();
    let total = forward.log_z[n];
    Ok((0..=n)
        .map(|k| exp(forward.log_z[k] + backward.log_z[k] - total).min(1.0))
        .collect())
}

/// Expected number of contacts `E|τ ∩ {1..N}|`.
pub fn expected_contacts(forward: &PartitionTable, backward: &PartitionTable) -> Result<f64> {
    let m = marginals(forward, backward)?;
    Ok(m[1..].iter().copied().collect::<crate::math::NeumaierSum>().total())
}

/// Two-point function `C(k, ℓ) = P(k∈τ | ℓ∈τ) - P(k∈τ)` for `k = ℓ..=k_max`.
///
/// The conditional probability factorizes at `ℓ` by the renewal property:
/// `P(k | ℓ) = Z_{ℓ,k} Z_{k,N} / Z_{ℓ,N}`. The difference is formed as
/// `P(k)·expm1(log P(k|ℓ) - log P(k))`, with the common factor `Z_{k,N}`
/// cancelled analytically.
pub fn two_point_profile(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    ell: usize,
    k_max: usize,
) -> Result<Vec<f64>> {
    let n = sample.len();
    if ell == 0 || k_max >= n || ell > k_max {
        return Err(Error::IndexOutOfRange {
            index: if ell == 0 || ell > k_max { ell } else { k_max },
            lo: 1,
            hi: n.saturating_sub(1),
        });
    }
    let fwd = forward_table(kernel, sample, params);
    let bwd = backward_table(kernel, sample, params);
    Ok(two_point_from_tables(kernel, sample, &fwd, &bwd, ell, k_max))
}

/// As [`two_point_profile`], reusing already computed tables.
pub fn two_point_from_tables(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    forward: &PartitionTable,
    backward: &PartitionTable,
    ell: usize,
    k_max: usize,
) -> Vec<f64> {
    let n = forward.n();
    let params = forward.params();
    let lw = forward_weights(sample, params, ell, k_max);
    let restart = pinned_recursion(&lw, kernel, forward.key.cutoff);
    let f = &forward.log_z;
    let b = &backward.log_z;
    (ell..=k_max)
        .map(|k| {
            let log_p = f[k] + b[k] - f[n];
            // log P(k|ℓ) - log P(k) with Z_{k,N} cancelled
            let diff = restart[k - ell] - b[ell] - f[k] + f[n];
            exp(log_p) * expm1(diff)
        })
        .collect()
}

/// `C(k, ℓ)` for a single pair `0 < ℓ <= k < N`.
pub fn two_point(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    ell: usize,
    k: usize,
) -> Result<f64> {
    Ok(*two_point_profile(kernel, sample, params, ell, k)?.last().unwrap())
}

/// A renewal set `τ ∩ {0..N}` drawn from the Gibbs measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GibbsPath {
    /// Strictly increasing, starting at 0 and ending at `N`.
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathObservables {
    /// `|τ ∩ {1..N}| / N`.
    pub contact_fraction: f64,
    /// Largest gap between consecutive points.
    pub largest_gap: usize,
}

impl GibbsPath {
    pub fn n(&self) -> usize {
        *self.points.last().unwrap_or(&0)
    }

    pub fn contains(&self, site: usize) -> bool {
        self.points.binary_search(&site).is_ok()
    }

    pub fn observables(&self) -> PathObservables {
        let n = self.n();
        let largest_gap = self.points.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        let contact_fraction = if n == 0 {
            0.0
        } else {
            (self.points.len() - 1) as f64 / n as f64
        };
        PathObservables {
            contact_fraction,
            largest_gap,
        }
    }
}

fn unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exact draw from the Gibbs measure by backward sampling from `m = N`.
pub fn sample_path<R: RngCore + ?Sized>(
    forward: &PartitionTable,
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    rng: &mut R,
) -> Result<GibbsPath> {
    if forward.direction != Direction::Forward
        || forward.key != TableKey::new(kernel, sample, params, forward.key.cutoff)
    {
        return Err(Error::TableMismatch);
    }
    let n = forward.n();
    let reach = forward.key.cutoff.min(kernel.n_max());
    let lz = &forward.log_z;
    let mut points = vec![n];
    let mut m = n;
    while m > 0 {
        let base = params.site_weight(sample.omega(m)) - lz[m];
        let lo = m.saturating_sub(reach);
        let u = unit_uniform(rng);
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last_positive = None;
        for prev in (lo..m).rev() {
            let p = exp(lz[prev] + kernel.log_mass(m - prev) + base);
            if p > 0.0 {
                last_positive = Some(prev);
            }
            acc += p;
            if u < acc {
                chosen = Some(prev);
                break;
            }
        }
        // rounding can leave u just above the accumulated total
        let prev = chosen.or(last_positive).ok_or(Error::Solver("no admissible predecessor"))?;
        points.push(prev);
        m = prev;
    }
    points.reverse();
    Ok(GibbsPath { points })
}

/// Transition probabilities `P(previous point = n | m ∈ τ)` for `n = 0..m`.
pub fn transition_probabilities(
    forward: &PartitionTable,
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    m: usize,
) -> Vec<f64> {
    let params = forward.params();
    let lz = &forward.log_z;
    let base = params.site_weight(sample.omega(m)) - lz[m];
    (0..m)
        .map(|prev| exp(lz[prev] + kernel.log_mass(m - prev) + base))
        .collect()
}

fn check_brute_size(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(())
}

/// Log weight of the renewal set with interior points given by `mask` on
/// `(a, b)`; bit `i` marks site `a + 1 + i`.
fn segment_log_weight(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    a: usize,
    b: usize,
    mask: u32,
) -> f64 {
    let mut total = 0.0;
    let mut prev = a;
    for site in a + 1..=b {
        let inside = site == b || mask & (1 << (site - a - 1)) != 0;
        if inside {
            total += kernel.log_mass(site - prev) + params.site_weight(sample.omega(site));
            prev = site;
        }
    }
    total
}

/// Log partition of `(a, b]` pinned at both ends, by enumerating all
/// `2^{b-a-1}` interior subsets.
pub fn brute_force_segment_log_partition(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    a: usize,
    b: usize,
) -> Result<f64> {
    check_brute_size(b - a)?;
    if b == a {
        return Ok(0.0);
    }
    let count = 1u32 << (b - a - 1);
    let weights: Vec<f64> = (0..count)
        .map(|mask| segment_log_weight(kernel, sample, params, a, b, mask))
        .collect();
    Ok(logsumexp(&weights))
}

/// `log Z_{N,ω}` by enumeration of all `2^{N-1}` renewal sets (`N <= 20`).
pub fn brute_force_log_partition(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
) -> Result<f64> {
    brute_force_segment_log_partition(kernel, sample, params, 0, sample.len())
}

/// Log Gibbs weight of every path, indexed by the interior mask
/// (bit `i` marks site `i + 1`).
pub fn brute_force_path_log_weights(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
) -> Result<Vec<f64>> {
    let n = sample.len();
    check_brute_size(n)?;
    if n == 0 {
        return Ok(vec![0.0]);
    }
    Ok((0..1u32 << (n - 1))
        .map(|mask| segment_log_weight(kernel, sample, params, 0, n, mask))
        .collect())
}

fn path_has(mask: u32, n: usize, site: usize) -> bool {
    site == 0 || site == n || mask & (1 << (site - 1)) != 0
}

/// `P(k ∈ τ)` for `k = 0..=N` by enumeration.
pub fn brute_force_marginals(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
) -> Result<Vec<f64>> {
    let n = sample.len();
    let lw = brute_force_path_log_weights(kernel, sample, params)?;
    let total = logsumexp(&lw);
    let mut out = vec![0.0; n + 1];
    for (mask, &w) in lw.iter().enumerate() {
        let p = exp(w - total);
        for (k, o) in out.iter_mut().enumerate() {
            if path_has(mask as u32, n, k) {
                *o += p;
            }
        }
    }
    Ok(out)
}

/// `P(k∈τ | ℓ∈τ) - P(k∈τ)` by enumeration over full paths.
pub fn brute_force_two_point(
    kernel: &RenewalKernel,
    sample: &DisorderSample,
    params: ModelParams,
    ell: usize,
    k: usize,
) -> Result<f64> {
    let n = sample.len();
    let lw = brute_force_path_log_weights(kernel, sample, params)?;
    let total = logsumexp(&lw);
    let (mut with_ell, mut with_both, mut with_k) = (Vec::new(), Vec::new(), Vec::new());
    for (mask, &w) in lw.iter().enumerate() {
        let mask = mask as u32;
        let has_l = path_has(mask, n, ell);
        let has_k = path_has(mask, n, k);
        if has_l {
            with_ell.push(w);
            if has_k {
                with_both.push(w);
            }
        }
        if has_k {
            with_k.push(w);
        }
    }
    let cond = exp(logsumexp(&with_both) - logsumexp(&with_ell));
    Ok(cond - exp(logsumexp(&with_k) - total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample, DisorderLaw};
    use crate::kernels::{build_kernel, KernelFamily};
    use core::f64::consts::LN_2;

    fn geometric(n_max: usize) -> RenewalKernel {
        build_kernel(KernelFamily::Geometric { rate: LN_2 }, n_max).unwrap()
    }

    #[test]
    fn single_site_base_case() {
        let k = geometric(8);
        let s = DisorderSample::explicit(vec![0.7], DisorderLaw::Gaussian);
        let p = ModelParams::new(0.4, -0.3).unwrap();
        let t = forward_table(&k, &s, p);
        let expected = k.log_mass(1) + 0.4 * 0.7 - 0.3;
        assert!((t.log_z()[1] - expected).abs() < 1e-15);
        assert_eq!(t.log_z()[0], 0.0);
        assert!((brute_force_log_partition(&k, &s, p).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn three_sites_by_hand() {
        let k = geometric(64);
        let s = DisorderSample::explicit(vec![0.0; 3], DisorderLaw::Gaussian);
        let p = ModelParams::new(1.3, 0.0).unwrap();
        let bf = brute_force_log_partition(&k, &s, p).unwrap();
        assert!((bf - log(0.5)).abs() < 1e-15);
        assert!((forward_table(&k, &s, p).log_partition() - log(0.5)).abs() < 1e-15);
    }

    #[test]
    fn empty_system() {
        let k = geometric(8);
        let s = DisorderSample::explicit(vec![], DisorderLaw::Gaussian);
        let p = ModelParams::new(0.0, 0.0).unwrap();
        assert_eq!(forward_table(&k, &s, p).log_z(), &[0.0]);
        assert_eq!(backward_table(&k, &s, p).log_z(), &[0.0]);
    }

    #[test]
    fn forward_and_backward_match_segment_enumeration() {
        let k = build_kernel(KernelFamily::SrwReturn, 64).unwrap();
        let s = sample(DisorderLaw::Gaussian, 12, 5, 0);
        let p = ModelParams::new(0.8, 0.1).unwrap();
        let f = forward_table(&k, &s, p);
        let b = backward_table(&k, &s, p);
        for m in 0..=12 {
            let bf_f = brute_force_segment_log_partition(&k, &s, p, 0, m).unwrap();
            let bf_b = brute_force_segment_log_partition(&k, &s, p, m, 12).unwrap();
            assert!((f.log_z()[m] - bf_f).abs() < 1e-12);
            assert!((b.log_z()[m] - bf_b).abs() < 1e-12);
        }
        assert!((f.log_partition() - b.log_partition()).abs() < 1e-12);
    }

    #[test]
    fn marginals_and_two_point_match_enumeration() {
        let k = build_kernel(KernelFamily::SrwReturn, 64).unwrap();
        let s = sample(DisorderLaw::Rademacher, 10, 9, 2);
        let p = ModelParams::new(0.6, 0.2).unwrap();
        let f = forward_table(&k, &s, p);
        let b = backward_table(&k, &s, p);
        let bf = brute_force_marginals(&k, &s, p).unwrap();
        for kk in 0..=10 {
            assert!((marginal_contact(&f, &b, kk).unwrap() - bf[kk]).abs() < 1e-12);
        }
        for (l, kk) in [(1, 1), (2, 5), (3, 9), (4, 6)] {
            let c = two_point(&k, &s, p, l, kk).unwrap();
            let o = brute_force_two_point(&k, &s, p, l, kk).unwrap();
            assert!((c - o).abs() < 1e-12, "{l} {kk}: {c} {o}");
        }
        let c = two_point(&k, &s, p, 4, 4).unwrap();
        assert!((c - (1.0 - bf[4])).abs() < 1e-12);
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let k = geometric(16);
        let s = sample(DisorderLaw::Gaussian, 8, 1, 0);
        let f = forward_table(&k, &s, ModelParams::new(0.5, 0.1).unwrap());
        let b = backward_table(&k, &s, ModelParams::new(0.5, 0.2).unwrap());
        assert_eq!(marginal_contact(&f, &b, 3), Err(Error::TableMismatch));
        assert_eq!(marginal_contact(&f, &f, 3), Err(Error::TableMismatch));
    }

    #[test]
    fn transition_rows_are_normalized() {
        let k = build_kernel(KernelFamily::SrwReturn, 64).unwrap();
        let s = sample(DisorderLaw::Gaussian, 40, 3, 0);
        let p = ModelParams::new(1.0, 0.3).unwrap();
        let f = forward_table(&k, &s, p);
        for m in 1..=40 {
            let total: f64 = transition_probabilities(&f, &k, &s, m).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_refuses_large_systems() {
        let k = geometric(32);
        let s = DisorderSample::explicit(vec![0.0; 21], DisorderLaw::Gaussian);
        let p = ModelParams::new(0.0, 0.0).unwrap();
        assert!(matches!(
            brute_force_log_partition(&k, &s, p),
            Err(Error::TooLarge { .. })
        ));
    }
}
