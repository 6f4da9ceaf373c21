//! Spectral Monte Carlo for the free-boundary Gaussian field on a finite
//! cylinder, restricted to its two boundary circles.
//!
//! The field is expanded in Neumann cosine modes along the cylinder and
//! periodic modes around it; restricted to the boundaries, each transverse
//! frequency carries an independent 2x2 Gaussian block whose covariance the
//! longitudinal sum gives in closed form. Boundary fields are assembled per
//! sample by an inverse FFT, exponentiated into Wick-ordered chaos lengths,
//! and the characteristic function of the log length ratio is estimated
//! with jackknife errors.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::inverse_fft;
use crate::samplers::RngStream;

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// Geometry and truncation of the simulated cylinder.
#[derive(Clone, Copy, Debug)]
pub struct CylinderSpec {
    /// Modulus (cylinder length; circumference is 1).
    pub tau: f64,
    /// Points per boundary circle; a power of two.
    pub n_boundary: usize,
    /// Transverse frequency cutoff, at most `n_boundary/2`; this is the
    /// regularization scale of the chaos lengths.
    pub m_cut: usize,
    /// Longitudinal cutoff. `None` sums the cosine series in closed form
    /// (zero tail); `Some(k)` truncates explicitly and errors if the
    /// truncation tail exceeds 1e-10.
    pub k_cut: Option<usize>,
}

impl CylinderSpec {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            n_boundary: 1024,
            m_cut: 512,
            k_cut: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Domain("CylinderSpec.tau must be positive"));
        }
        if self.n_boundary < 128 || !self.n_boundary.is_power_of_two() {
            return Err(Error::Domain(
                "CylinderSpec.n_boundary must be a power of two >= 128",
            ));
        }
        if self.m_cut == 0 || self.m_cut > self.n_boundary / 2 {
            return Err(Error::Domain(
                "CylinderSpec.m_cut must be in 1..=n_boundary/2",
            ));
        }
        Ok(())
    }
}

/// One transverse frequency's 2x2 cross-boundary covariance with its
/// Cholesky factor.
#[derive(Clone, Copy, Debug)]
pub struct CovBlock {
    /// Common variance of both boundary values.
    pub diag: f64,
    /// Covariance between the two boundaries.
    pub cross: f64,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl CovBlock {
    fn new(diag: f64, mut cross: f64) -> Self {
        // clamp to positive semidefinite (|cross| <= diag)
        if cross > diag {
            cross = diag;
        }
        if cross < -diag {
            cross = -diag;
        }
        let l11 = diag.sqrt();
        let l21 = if l11 > 0.0 { cross / l11 } else { 0.0 };
        let l22 = (diag - l21 * l21).max(0.0).sqrt();
        Self {
            diag,
            cross,
            l11,
            l21,
            l22,
        }
    }

    fn sample(&self, rng: &mut RngStream) -> (f64, f64) {
        let z0 = rng.normal();
        let z1 = rng.normal();
        (self.l11 * z0, self.l21 * z0 + self.l22 * z1)
    }
}

/// Per-frequency covariance blocks of the boundary-restricted field.
#[derive(Clone, Debug)]
pub struct BoundaryCov {
    pub spec: CylinderSpec,
    /// Blocks for transverse frequencies `0..=m_cut`.
    pub blocks: Vec<CovBlock>,
    /// Pointwise variance of either boundary field on the sample grid.
    pub point_variance: f64,
}

// closed-form longitudinal sums of the boundary Green function:
//   m = 0 (constant mode removed):  diag = 2 pi tau/3, cross = -pi tau/3
//   m >= 1, mu = 2 pi m:            diag = (2 pi/mu) coth(mu tau),
//                                   cross = (2 pi/mu) / sinh(mu tau)
fn block_closed(m: usize, tau: f64) -> (f64, f64) {
    if m == 0 {
        (2.0 * PI * tau / 3.0, -PI * tau / 3.0)
    } else {
        let mu = 2.0 * PI * m as f64;
        let e = (-2.0 * mu * tau).exp();
        // coth and csch via e^{-2 mu tau} to stay finite at large mu tau
        let diag = (2.0 * PI / mu) * (1.0 + e) / (1.0 - e);
        let cross = (2.0 * PI / mu) * 2.0 * (-mu * tau).exp() / (1.0 - e);
        (diag, cross)
    }
}

// truncated longitudinal sums, for explicit k_cut
fn block_truncated(m: usize, tau: f64, k_cut: usize) -> (f64, f64) {
    if m == 0 {
        let mut d = 0.0;
        let mut o = 0.0;
        for j in 1..=k_cut {
            let term = 4.0 * tau / (PI * j as f64 * j as f64);
            d += term;
            o += if j % 2 == 0 { term } else { -term };
        }
        (d, o)
    } else {
        let mu = 2.0 * PI * m as f64;
        let mut d = 2.0 * PI / (mu * mu * tau);
        let mut o = d;
        for j in 1..=k_cut {
            let lam = (j as f64 * PI / tau) * (j as f64 * PI / tau) + mu * mu;
            let term = 4.0 * PI / (tau * lam);
            d += term;
            o += if j % 2 == 0 { term } else { -term };
        }
        (d, o)
    }
}

/// Covariance of the mode-truncated boundary field.
pub fn boundary_covariance(spec: &CylinderSpec) -> Result<BoundaryCov> {
    spec.validate()?;
    let tau = spec.tau;
    if let Some(k) = spec.k_cut {
        // truncation tail of the j-sum is ~ (4 tau/pi)/k per entry
        let tail = 4.0 * tau / (PI * k.max(1) as f64);
        if tail > 1e-10 {
            return Err(Error::Accuracy {
                what: "boundary_covariance: k_cut too small for the 1e-10 tail tolerance",
                best: tail,
                err_est: tail,
            });
        }
    }
    let mut blocks = Vec::with_capacity(spec.m_cut + 1);
    let mut var = 0.0;
    for m in 0..=spec.m_cut {
        let (d, o) = match spec.k_cut {
            None => block_closed(m, tau),
            Some(k) => block_truncated(m, tau, k),
        };
        var += if m == 0 { d } else { 2.0 * d };
        blocks.push(CovBlock::new(d, o));
    }
    Ok(BoundaryCov {
        spec: *spec,
        blocks,
        point_variance: var,
    })
}

fn sample_fields(
    cov: &BoundaryCov,
    rng: &mut RngStream,
    include_zero_mode: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = cov.spec.n_boundary;
    let m_cut = cov.spec.m_cut;
    let mut spec0 = vec![Complex64::new(0.0, 0.0); n];
    let mut spec1 = vec![Complex64::new(0.0, 0.0); n];
    // zero mode
    if include_zero_mode {
        let (a0, a1) = cov.blocks[0].sample(rng);
        spec0[0] = Complex64::new(a0, 0.0);
        spec1[0] = Complex64::new(a1, 0.0);
    } else {
        let _ = cov.blocks[0].sample(rng); // keep the stream aligned
    }
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    for m in 1..=m_cut {
        let block = &cov.blocks[m];
        if m == n / 2 {
            // Nyquist: cosine coefficient only
            let (a0, a1) = block.sample(rng);
            spec0[m] = Complex64::new(2.0f64.sqrt() * a0, 0.0);
            spec1[m] = Complex64::new(2.0f64.sqrt() * a1, 0.0);
        } else {
            let (ca0, ca1) = block.sample(rng);
            let (sb0, sb1) = block.sample(rng);
            // h = sqrt(2)[a cos + b sin] <=> c_m = (a - i b)/sqrt(2)
            spec0[m] = Complex64::new(ca0 * inv_sqrt2, -sb0 * inv_sqrt2);
            spec0[n - m] = spec0[m].conj();
            spec1[m] = Complex64::new(ca1 * inv_sqrt2, -sb1 * inv_sqrt2);
            spec1[n - m] = spec1[m].conj();
        }
    }
    inverse_fft(&mut spec0);
    inverse_fft(&mut spec1);
    (
        spec0.iter().map(|c| c.re).collect(),
        spec1.iter().map(|c| c.re).collect(),
    )
}

/// One joint sample of the two boundary fields at the `n_boundary` grid
/// points (transverse positions `i/n`).
pub fn sample_boundary_field(cov: &BoundaryCov, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    sample_fields(cov, rng, true)
}

/// Wick-ordered chaos length of one boundary circle:
/// `(1/n) sum_i exp((gamma/2) h_i - (gamma^2/8) Var(h_i))`.
pub fn gmc_length(field: &[f64], gamma: f64, cov: &BoundaryCov) -> Result<f64> {
    if !(gamma >= 0.0 && gamma < 2.0) {
        return Err(Error::Domain("gmc_length: gamma must lie in [0, 2)"));
    }
    let wick = gamma * gamma / 8.0 * cov.point_variance;
    let n = field.len() as f64;
    Ok(field.iter().map(|&h| (gamma / 2.0 * h - wick).exp()).sum::<f64>() / n)
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    #[cfg(feature = "std")]
    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    // standard error of the mean; the jackknife SE of a sample mean
    // reduces to exactly this
    fn se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n as f64 - 1.0) / self.n as f64).sqrt()
    }
}

/// Result of a characteristic-function Monte Carlo run.
#[derive(Clone, Debug)]
pub struct McRun {
    pub seed: u64,
    pub stream_id: u64,
    pub n_samples: u64,
    pub gamma: f64,
    pub spec: CylinderSpec,
    pub xs: Vec<f64>,
    pub estimates_re: Vec<f64>,
    pub estimates_im: Vec<f64>,
    pub std_errs_re: Vec<f64>,
    pub std_errs_im: Vec<f64>,
}

#[derive(Clone, Debug)]
struct CfAccumulator {
    xs: Vec<f64>,
    cos: Vec<Welford>,
    sin: Vec<Welford>,
}

impl CfAccumulator {
    fn new(xs: &[f64]) -> Self {
        Self {
            xs: xs.to_vec(),
            cos: vec![Welford::default(); xs.len()],
            sin: vec![Welford::default(); xs.len()],
        }
    }

    fn push_log_ratio(&mut self, w: f64) {
        for (i, &x) in self.xs.iter().enumerate() {
            self.cos[i].push((x * w).cos());
            self.sin[i].push((x * w).sin());
        }
    }

    #[cfg(feature = "std")]
    fn merge(&mut self, other: &CfAccumulator) {
        for i in 0..self.cos.len() {
            self.cos[i].merge(&other.cos[i]);
            self.sin[i].merge(&other.sin[i]);
        }
    }
}

fn run_cf_chunk(
    cov: &BoundaryCov,
    gamma: f64,
    xs: &[f64],
    n_samples: u64,
    rng: &mut RngStream,
) -> Result<CfAccumulator> {
    let mut acc = CfAccumulator::new(xs);
    for _ in 0..n_samples {
        let (h0, h1) = sample_boundary_field(cov, rng);
        let l0 = gmc_length(&h0, gamma, cov)?;
        let l1 = gmc_length(&h1, gamma, cov)?;
        acc.push_log_ratio(l1.ln() - l0.ln());
    }
    Ok(acc)
}

fn mc_run_from(acc: &CfAccumulator, spec: &CylinderSpec, gamma: f64, rng_seed: (u64, u64)) -> McRun {
    McRun {
        seed: rng_seed.0,
        stream_id: rng_seed.1,
        n_samples: acc.cos.first().map(|w| w.n).unwrap_or(0),
        gamma,
        spec: *spec,
        xs: acc.xs.clone(),
        estimates_re: acc.cos.iter().map(|w| w.mean).collect(),
        estimates_im: acc.sin.iter().map(|w| w.mean).collect(),
        std_errs_re: acc.cos.iter().map(|w| w.se()).collect(),
        std_errs_im: acc.sin.iter().map(|w| w.se()).collect(),
    }
}

/// Estimates `E[e^{i x (log L_1 - log L_0)}]` at each `x` from `n_samples`
/// field samples, with jackknife standard errors.
pub fn estimate_log_ratio_cf(
    spec: &CylinderSpec,
    gamma: f64,
    xs: &[f64],
    n_samples: u64,
    rng: &mut RngStream,
) -> Result<McRun> {
    let cov = boundary_covariance(spec)?;
    let acc = run_cf_chunk(&cov, gamma, xs, n_samples, rng)?;
    Ok(mc_run_from(&acc, spec, gamma, (rng.seed, rng.stream_id)))
}

/// Samples of the lateral-field length ratio `L_1^Y / L_0^Y`: the same
/// pipeline with the transverse zero mode removed from both boundaries.
pub fn lateral_ratio_samples(
    spec: &CylinderSpec,
    gamma: f64,
    n_samples: u64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let cov = boundary_covariance(spec)?;
    let mut out = Vec::with_capacity(n_samples as usize);
    for _ in 0..n_samples {
        let (h0, h1) = sample_fields(&cov, rng, false);
        let l0 = gmc_length(&h0, gamma, &cov)?;
        let l1 = gmc_length(&h1, gamma, &cov)?;
        out.push(l1 / l0);
    }
    Ok(out)
}

/// Deterministic multi-stream drivers; stream results merge in stream-id
/// order, so the output is identical for any thread count.
#[cfg(feature = "std")]
pub mod parallel {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    fn chunk_sizes(total: u64, streams: u64) -> Vec<u64> {
        let base = total / streams;
        let extra = (total % streams) as usize;
        (0..streams as usize)
            .map(|i| base + if i < extra { 1 } else { 0 })
            .collect()
    }

    fn run_indexed<T, F>(n_jobs: usize, n_threads: usize, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync,
    {
        let n_threads = n_threads.max(1).min(n_jobs.max(1));
        let next = AtomicUsize::new(0);
        let results: Vec<Mutex<Option<Result<T>>>> =
            (0..n_jobs).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..n_threads {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= n_jobs {
                        break;
                    }
                    let out = job(idx);
                    *results[idx].lock().unwrap() = Some(out);
                });
            }
        });
        results
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("job ran"))
            .collect()
    }

    /// Multi-stream version of [`estimate_log_ratio_cf`]; stream `s` uses
    /// `RngStream::new(seed, s)`.
    pub fn estimate_log_ratio_cf_streams(
        spec: &CylinderSpec,
        gamma: f64,
        xs: &[f64],
        n_samples: u64,
        seed: u64,
        n_streams: u64,
        n_threads: usize,
    ) -> Result<McRun> {
        let cov = boundary_covariance(spec)?;
        let sizes = chunk_sizes(n_samples, n_streams.max(1));
        let accs = run_indexed(sizes.len(), n_threads, |i| {
            let mut rng = RngStream::new(seed, i as u64);
            run_cf_chunk(&cov, gamma, xs, sizes[i], &mut rng)
        })?;
        let mut total = CfAccumulator::new(xs);
        for acc in &accs {
            total.merge(acc);
        }
        Ok(mc_run_from(&total, spec, gamma, (seed, 0)))
    }

    /// Multi-stream version of [`lateral_ratio_samples`]; samples are
    /// concatenated in stream order.
    pub fn lateral_ratio_samples_streams(
        spec: &CylinderSpec,
        gamma: f64,
        n_samples: u64,
        seed: u64,
        n_streams: u64,
        n_threads: usize,
    ) -> Result<Vec<f64>> {
        let sizes = chunk_sizes(n_samples, n_streams.max(1));
        let spec = *spec;
        let chunks = run_indexed(sizes.len(), n_threads, |i| {
            let mut rng = RngStream::new(seed, i as u64);
            lateral_ratio_samples(&spec, gamma, sizes[i], &mut rng)
        })?;
        Ok(chunks.into_iter().flatten().collect())
    }

    /// Runs a per-path sampler across streams, concatenating in stream
    /// order; censored paths are dropped and counted.
    pub fn path_samples_streams<F>(
        n_samples: u64,
        seed: u64,
        n_streams: u64,
        n_threads: usize,
        sampler: F,
    ) -> Result<(Vec<f64>, u64)>
    where
        F: Fn(&mut RngStream) -> Result<f64> + Sync,
    {
        let sizes = chunk_sizes(n_samples, n_streams.max(1));
        let chunks = run_indexed(sizes.len(), n_threads, |i| {
            let mut rng = RngStream::new(seed, i as u64);
            let mut kept = Vec::with_capacity(sizes[i] as usize);
            let mut censored = 0u64;
            for _ in 0..sizes[i] {
                match sampler(&mut rng) {
                    Ok(v) => kept.push(v),
                    Err(Error::Censored) => censored += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((kept, censored))
        })?;
        let mut out = Vec::with_capacity(n_samples as usize);
        let mut censored = 0;
        for (kept, c) in chunks {
            out.extend(kept);
            censored += c;
        }
        Ok((out, censored))
    }

    /// As [`path_samples_streams`] for samplers yielding a pair per path.
    pub fn path_pair_samples_streams<F>(
        n_samples: u64,
        seed: u64,
        n_streams: u64,
        n_threads: usize,
        sampler: F,
    ) -> Result<(Vec<(f64, f64)>, u64)>
    where
        F: Fn(&mut RngStream) -> Result<(f64, f64)> + Sync,
    {
        let sizes = chunk_sizes(n_samples, n_streams.max(1));
        let chunks = run_indexed(sizes.len(), n_threads, |i| {
            let mut rng = RngStream::new(seed, i as u64);
            let mut kept = Vec::with_capacity(sizes[i] as usize);
            let mut censored = 0u64;
            for _ in 0..sizes[i] {
                match sampler(&mut rng) {
                    Ok(v) => kept.push(v),
                    Err(Error::Censored) => censored += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((kept, censored))
        })?;
        let mut out = Vec::with_capacity(n_samples as usize);
        let mut censored = 0;
        for (kept, c) in chunks {
            out.extend(kept);
            censored += c;
        }
        Ok((out, censored))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{gmc_ratio_cf, lateral_ratio_cf, LqgParams};
    use crate::samplers::{ks_two_sample, ks_two_sample_critical};
    use approx::assert_relative_eq;

    fn small_spec(tau: f64) -> CylinderSpec {
        CylinderSpec {
            tau,
            n_boundary: 256,
            m_cut: 128,
            k_cut: None,
        }
    }

    #[test]
    fn covariance_blocks_match_truncated_sums() {
        // the closed forms are the k -> infinity limit of the mode sums
        for &tau in &[0.5, 2.0] {
            for &m in &[0usize, 1, 5, 40] {
                let (d, o) = block_closed(m, tau);
                let (dk, ok) = block_truncated(m, tau, 200_000);
                let tol = 4.0 * tau / (PI * 200_000.0) * 1.5;
                assert!((d - dk).abs() < tol, "diag m={m} tau={tau}");
                assert!((o - ok).abs() < tol, "cross m={m} tau={tau}");
            }
        }
    }

    #[test]
    fn covariance_zero_mode_matches_radial_variance() {
        // Var(R(tau) - R(0)) = 2 pi tau for the zero mode
        let (d, o) = block_closed(0, 1.3);
        assert_relative_eq!(2.0 * (d - o), 2.0 * PI * 1.3, max_relative = 1e-13);
    }

    #[test]
    fn cross_boundary_coupling_decays_with_tau() {
        let (_, o_short) = block_closed(1, 0.5);
        let (_, o_long) = block_closed(1, 2.0);
        assert!(o_long < o_short);
        assert!(o_long > 0.0);
    }

    #[test]
    fn k_cut_too_small_is_an_error() {
        let spec = CylinderSpec {
            k_cut: Some(1000),
            ..CylinderSpec::new(1.0)
        };
        assert!(matches!(
            boundary_covariance(&spec),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn sampled_fields_match_covariance() {
        let spec = small_spec(0.7);
        let cov = boundary_covariance(&spec).unwrap();
        let mut rng = RngStream::new(42, 0);
        let n = 20_000;
        let mut mean0 = 0.0;
        let mut var0 = 0.0;
        let mut cross0 = 0.0;
        let mut lag_cov = 0.0;
        let lag = 16usize;
        for _ in 0..n {
            let (h0, h1) = sample_boundary_field(&cov, &mut rng);
            mean0 += h0[0];
            var0 += h0[0] * h0[0];
            cross0 += h0[0] * h1[0];
            lag_cov += h0[0] * h0[lag];
        }
        let nf = n as f64;
        mean0 /= nf;
        var0 /= nf;
        cross0 /= nf;
        lag_cov /= nf;
        // target same-point variance and same-position cross covariance
        let want_var = cov.point_variance;
        let want_cross: f64 = (0..=spec.m_cut)
            .map(|m| {
                let c = cov.blocks[m].cross;
                if m == 0 {
                    c
                } else {
                    2.0 * c
                }
            })
            .sum();
        // 5 standard errors of a variance estimate ~ 5 var sqrt(2/n)
        let band = 5.0 * want_var * (2.0 / nf).sqrt();
        assert!(mean0.abs() < 5.0 * (want_var / nf).sqrt());
        assert!((var0 - want_var).abs() < band, "var {var0} vs {want_var}");
        assert!((cross0 - want_cross).abs() < band);
        // transverse stationarity: lag covariance from the mode sum
        let want_lag: f64 = (0..=spec.m_cut)
            .map(|m| {
                let d = cov.blocks[m].diag;
                let c = (2.0 * PI * m as f64 * lag as f64 / spec.n_boundary as f64).cos();
                if m == 0 {
                    d
                } else {
                    2.0 * d * c
                }
            })
            .sum();
        assert!((lag_cov - want_lag).abs() < band);
    }

    #[test]
    fn field_assembly_is_real() {
        let spec = small_spec(1.0);
        let cov = boundary_covariance(&spec).unwrap();
        let mut rng = RngStream::new(3, 0);
        let n = spec.n_boundary;
        let mut spec0 = vec![Complex64::new(0.0, 0.0); n];
        let (a0, _) = cov.blocks[0].sample(&mut rng);
        spec0[0] = Complex64::new(a0, 0.0);
        for m in 1..=spec.m_cut {
            let (ca, _) = cov.blocks[m].sample(&mut rng);
            let (sb, _) = cov.blocks[m].sample(&mut rng);
            if m == n / 2 {
                spec0[m] = Complex64::new(2.0f64.sqrt() * ca, 0.0);
            } else {
                spec0[m] = Complex64::new(ca, -sb) * core::f64::consts::FRAC_1_SQRT_2;
                spec0[n - m] = spec0[m].conj();
            }
        }
        inverse_fft(&mut spec0);
        for c in &spec0 {
            assert!(c.im.abs() < 1e-9);
        }
    }

    #[test]
    fn gmc_length_identities() {
        let spec = small_spec(1.0);
        let cov = boundary_covariance(&spec).unwrap();
        let mut rng = RngStream::new(9, 0);
        let (h0, _) = sample_boundary_field(&cov, &mut rng);
        // empty chaos
        assert_eq!(gmc_length(&h0, 0.0, &cov).unwrap(), 1.0);
        // constant shift factors out exactly
        let gamma = 1.5;
        let shifted: Vec<f64> = h0.iter().map(|&h| h + 2.0).collect();
        let base = gmc_length(&h0, gamma, &cov).unwrap();
        let moved = gmc_length(&shifted, gamma, &cov).unwrap();
        assert_relative_eq!(moved, (gamma * 2.0 / 2.0_f64).exp() * base, max_relative = 1e-12);
        assert!(base > 0.0);
        assert!(gmc_length(&h0, 2.0, &cov).is_err());
    }

    #[test]
    fn wick_normalization_gives_mean_one_lengths() {
        // E[gmc_length] = 1 by the Wick ordering
        let spec = small_spec(0.8);
        let cov = boundary_covariance(&spec).unwrap();
        let mut rng = RngStream::new(13, 0);
        let gamma = 1.0;
        let n = 4000;
        let mut mean = 0.0;
        for _ in 0..n {
            let (h0, _) = sample_boundary_field(&cov, &mut rng);
            mean += gmc_length(&h0, gamma, &cov).unwrap();
        }
        mean /= n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean = {mean}");
    }

    #[test]
    fn cf_estimate_brackets_closed_form() {
        // at gamma = 0.8 the chaos truncation error is far below the
        // statistical band even at this coarse resolution, so the bracket
        // is tight; see the acceptance suite for the gamma = sqrt(8/3) runs
        let spec = small_spec(1.0);
        let gamma = 0.8;
        let lqg = LqgParams::new(gamma).unwrap();
        let xs = [0.0, 0.5, 1.0, 2.0];
        let mut rng = RngStream::new(7, 0);
        let run = estimate_log_ratio_cf(&spec, gamma, &xs, 8000, &mut rng).unwrap();
        // x = 0 is exactly 1 with zero error
        assert_eq!(run.estimates_re[0], 1.0);
        assert_eq!(run.std_errs_re[0], 0.0);
        for i in 1..xs.len() {
            let want = gmc_ratio_cf(xs[i], &lqg, spec.tau).unwrap();
            let err = (run.estimates_re[i] - want).abs();
            assert!(
                err < 3.0 * run.std_errs_re[i] + 0.002,
                "x={} est={} want={} se={}",
                xs[i],
                run.estimates_re[i],
                want,
                run.std_errs_re[i]
            );
        }
    }

    #[test]
    fn cf_truncation_bias_shrinks_with_m_cut() {
        // at gamma = sqrt(8/3) the truncated chaos overshoots the closed
        // form by an m_cut^{-1/3} bias; it must shrink as m_cut grows
        let gamma = (8.0f64 / 3.0).sqrt();
        let lqg = LqgParams::new(gamma).unwrap();
        let want = gmc_ratio_cf(1.0, &lqg, 1.0).unwrap();
        let mut biases = [0.0f64; 2];
        for (i, &(n, m)) in [(256usize, 128usize), (2048, 1024)].iter().enumerate() {
            let spec = CylinderSpec {
                tau: 1.0,
                n_boundary: n,
                m_cut: m,
                k_cut: None,
            };
            let mut rng = RngStream::new(70, 0);
            let run = estimate_log_ratio_cf(&spec, gamma, &[1.0], 8000, &mut rng).unwrap();
            biases[i] = run.estimates_re[0] - want;
        }
        assert!(biases[0] > 0.0);
        assert!(biases[1] < biases[0]);
    }

    #[test]
    fn cf_estimates_conjugate_symmetric() {
        let spec = small_spec(0.6);
        let xs = [0.7, -0.7];
        let mut rng = RngStream::new(21, 0);
        let run = estimate_log_ratio_cf(&spec, 1.2, &xs, 500, &mut rng).unwrap();
        assert_eq!(run.estimates_re[0], run.estimates_re[1]);
        assert_eq!(run.estimates_im[0], -run.estimates_im[1]);
    }

    #[test]
    fn lateral_ratio_tau_independent_and_reciprocal_symmetric() {
        let gamma = (8.0f64 / 3.0).sqrt();
        let n = 6000;
        let mut rng_a = RngStream::new(100, 0);
        let mut rng_b = RngStream::new(101, 0);
        let mut at_half = lateral_ratio_samples(&small_spec(0.5), gamma, n, &mut rng_a).unwrap();
        let mut at_one = lateral_ratio_samples(&small_spec(1.0), gamma, n, &mut rng_b).unwrap();
        let d = ks_two_sample(&mut at_half, &mut at_one);
        let crit = ks_two_sample_critical(n as usize, n as usize, 0.01);
        assert!(d < crit, "d = {d}, crit = {crit}");
        // ratio and reciprocal identically distributed
        let mut rng_c = RngStream::new(102, 0);
        let mut recip: Vec<f64> = lateral_ratio_samples(&small_spec(1.0), gamma, n, &mut rng_c)
            .unwrap()
            .into_iter()
            .map(|r| 1.0 / r)
            .collect();
        let d2 = ks_two_sample(&mut at_one, &mut recip);
        assert!(d2 < crit, "d2 = {d2}");
    }

    #[test]
    fn lateral_ratio_cf_matches_log_logistic_at_tame_gamma() {
        // the closed-form lateral law is resolved tightly at gamma = 0.8,
        // where the chaos truncation bias is negligible
        let gamma = 0.8;
        let lqg = LqgParams::new(gamma).unwrap();
        let n = 8000;
        let mut rng = RngStream::new(103, 0);
        let at_one = lateral_ratio_samples(&small_spec(1.0), gamma, n, &mut rng).unwrap();
        let want = lateral_ratio_cf(1.0, &lqg);
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &r) in at_one.iter().enumerate() {
            let v = (r.ln()).cos();
            let delta = v - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (v - mean);
        }
        let se = (m2 / (n as f64 - 1.0) / n as f64).sqrt();
        assert!(
            (mean - want).abs() < 3.0 * se + 0.002,
            "mean={mean} want={want} se={se}"
        );
    }

    #[cfg(feature = "std")]
    #[test]
    fn parallel_driver_is_thread_count_invariant() {
        let spec = small_spec(0.9);
        let xs = [0.5, 1.0];
        let a = parallel::estimate_log_ratio_cf_streams(&spec, 1.3, &xs, 600, 5, 4, 1).unwrap();
        let b = parallel::estimate_log_ratio_cf_streams(&spec, 1.3, &xs, 600, 5, 4, 2).unwrap();
        assert_eq!(a.estimates_re, b.estimates_re);
        assert_eq!(a.std_errs_re, b.std_errs_re);
        let la = parallel::lateral_ratio_samples_streams(&spec, 1.3, 500, 6, 4, 1).unwrap();
        let lb = parallel::lateral_ratio_samples_streams(&spec, 1.3, 500, 6, 4, 2).unwrap();
        assert_eq!(la, lb);
    }

    #[test]
    fn doubling_resolution_keeps_cf_within_band() {
        // regularization stability: doubling n_boundary and m_cut moves the
        // CF estimate by less than the combined 3 sigma band
        let gamma = 1.4;
        let xs = [1.0];
        let coarse = small_spec(0.8);
        let fine = CylinderSpec {
            n_boundary: 512,
            m_cut: 256,
            ..coarse
        };
        let mut r1 = RngStream::new(55, 0);
        let mut r2 = RngStream::new(56, 0);
        let a = estimate_log_ratio_cf(&coarse, gamma, &xs, 4000, &mut r1).unwrap();
        let b = estimate_log_ratio_cf(&fine, gamma, &xs, 4000, &mut r2).unwrap();
        let band = 3.0
            * (a.std_errs_re[0] * a.std_errs_re[0] + b.std_errs_re[0] * b.std_errs_re[0]).sqrt();
        assert!((a.estimates_re[0] - b.estimates_re[0]).abs() < band + 0.005);
    }
}
