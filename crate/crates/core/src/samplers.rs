//! Random-variate generation: deterministic seeded streams, inverse-CDF
//! table samplers, bridge-corrected Brownian first-passage simulation, and
//! the composite modulus samplers built from them.

use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::laws::{cle_mod_density, default_modulus_grid};
use crate::qseries::CleParams;
use crate::transforms::DensityTable;

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// A seeded, stream-split random source. Identical `(seed, stream_id)`
/// pairs reproduce identical sequences; distinct stream ids are
/// statistically independent, so callers parallelize across them.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: rand_chacha::ChaCha8Rng,
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            rng,
            seed,
            stream_id,
        }
    }

    /// Uniform in (0, 1).
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard normal (ziggurat).
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Discretization for the Brownian path samplers.
#[derive(Clone, Copy, Debug)]
pub struct PathConfig {
    /// Euler step; the bridge correction removes the leading
    /// O(sqrt(dt)) crossing bias, leaving O(dt).
    pub dt: f64,
    /// Paths still running at this time are reported as censored.
    pub max_time: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            max_time: 1e3,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(Error::Domain("PathConfig.dt must be in (0, 1e-2]"));
        }
        if !self.max_time.is_finite() || self.max_time <= 0.0 {
            return Err(Error::Domain("PathConfig.max_time must be finite positive"));
        }
        Ok(())
    }
}

/// Inverse-CDF sample from a normalized density table.
pub fn sample_density(d: &DensityTable, rng: &mut RngStream) -> Result<f64> {
    let mass = d.cdf[d.cdf.len() - 1];
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("sample_density: table is not normalized"));
    }
    d.inverse_cdf(rng.uniform())
}

/// First exit time of Brownian motion started at `a` from `(-1, 1)`,
/// simulated with Euler steps plus a Brownian-bridge crossing correction.
pub fn sample_bm_exit(a: f64, cfg: &PathConfig, rng: &mut RngStream) -> Result<f64> {
    cfg.validate()?;
    if !(a.abs() < 1.0) {
        return Err(Error::Domain("sample_bm_exit: |a| must be < 1"));
    }
    let (t, _, _) = walk_to_exit(a, cfg, rng)?;
    Ok(t)
}

/// Last zero of the path before its exit from `(-1, 1)`, started at 0.
pub fn sample_last_zero(cfg: &PathConfig, rng: &mut RngStream) -> Result<f64> {
    Ok(sample_exit_and_last_zero(cfg, rng)?.1)
}

/// `(exit time, last zero before exit)` of one path started at 0.
pub fn sample_exit_and_last_zero(cfg: &PathConfig, rng: &mut RngStream) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (t, last, _) = walk_to_exit(0.0, cfg, rng)?;
    Ok((t, last))
}

// Simulates until |B| reaches 1. Returns (exit_time, last_zero, steps).
// Bridge corrections: the probability that the bridge between consecutive
// Euler points crossed a level is exp(-2 d0 d1/dt) in the distances to the
// level; checked only when the endpoints are close enough to matter.
fn walk_to_exit(a: f64, cfg: &PathConfig, rng: &mut RngStream) -> Result<(f64, f64, u64)> {
    let dt = cfg.dt;
    let sigma = dt.sqrt();
    // exp(-2 d0 d1/dt) < 2^-64 when d0 d1 > 22.2 dt; skip the bridge
    // check outside that window
    let window = 22.2 * dt;
    let mut b = a;
    let mut t = 0.0;
    let mut last_zero = 0.0;
    let mut steps_left = (cfg.max_time / dt) as u64 + 1;
    loop {
        if steps_left == 0 {
            return Err(Error::Censored);
        }
        steps_left -= 1;
        let b_next = b + sigma * rng.normal();
        let t_next = t + dt;
        // hard exit at the endpoint
        if b_next.abs() >= 1.0 {
            return Ok((t_next, last_zero, 0));
        }
        // bridge crossing of +1 / -1
        let d_up = (1.0 - b) * (1.0 - b_next);
        if d_up < window && rng.uniform() < (-2.0 * d_up / dt).exp() {
            return Ok((t_next, last_zero, 0));
        }
        let d_dn = (1.0 + b) * (1.0 + b_next);
        if d_dn < window && rng.uniform() < (-2.0 * d_dn / dt).exp() {
            return Ok((t_next, last_zero, 0));
        }
        // zero touch: sign change, or bridge dip while same-signed
        if b == 0.0 || b.signum() != b_next.signum() {
            last_zero = t_next;
        } else {
            let d0 = b * b_next;
            if d0 < window && rng.uniform() < (-2.0 * d0 / dt).exp() {
                last_zero = t_next;
            }
        }
        b = b_next;
        t = t_next;
    }
}

/// Density of the exit time of standard Brownian motion from `(-1, 1)`
/// started at 0 (Laplace transform `1/cosh(sqrt(2s))`). Image expansion for
/// small `t`, spectral expansion for large `t`; the two agree to ~1e-15 at
/// the switch point.
pub fn y0_exit_density(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t < 1.0 {
        // sqrt(2/(pi t^3)) sum (-1)^n (2n+1) e^{-(2n+1)^2/(2t)}
        let mut sum = 0.0;
        for n in 0..64 {
            let m = (2 * n + 1) as f64;
            let term = m * (-m * m / (2.0 * t)).exp();
            sum += if n % 2 == 0 { term } else { -term };
            if term < 1e-18 * sum.abs() || term == 0.0 {
                break;
            }
        }
        (2.0 / (PI * t * t * t)).sqrt() * sum
    } else {
        // (pi/2) sum (-1)^n (2n+1) e^{-(2n+1)^2 pi^2 t/8}
        let mut sum = 0.0;
        for n in 0..64 {
            let m = (2 * n + 1) as f64;
            let term = m * (-m * m * PI * PI * t / 8.0).exp();
            sum += if n % 2 == 0 { term } else { -term };
            if term < 1e-18 * sum.abs() || term == 0.0 {
                break;
            }
        }
        PI / 2.0 * sum
    }
}

/// Inverse-CDF sample of the modulus of the `j`-th nested-loop annulus.
///
/// Builds the density table on every call; for bulk sampling build the
/// table once with [`cle_mod_density`] and loop [`sample_density`].
pub fn sample_cle_modulus(p: &CleParams, j: u32, rng: &mut RngStream) -> Result<f64> {
    let grid = default_modulus_grid(p, 2048);
    let d = cle_mod_density(p, j, &grid)?;
    sample_density(&d, rng)
}

/// Path-based sampler for the `j = 1` modulus, used as an independent
/// cross-check of the table route. Draws the two hitting-time components
/// and applies the exponential tilt by acceptance-rejection per component:
/// `2 pi Mod = tilt[(kappa pi^2/4) T0] + tilt[(4 pi^2/kappa) Y_{kappa/4}]`
/// with tilt rate `kappa u0^2/8` on the `2 pi Mod` scale.
///
/// The A/R weight `e^{beta(x - cap)}` is capped where the neglected tilted
/// mass is below 1e-9 (component tail rate `pi^2/8` against tilt rates
/// bounded by `pi^2/8 * (kappa u0/2)^2 < pi^2/8`), a bias far below the
/// resolution of the distributional tests this sampler serves.
pub fn sample_cle_modulus_path(p: &CleParams, cfg: &PathConfig, rng: &mut RngStream) -> Result<f64> {
    cfg.validate()?;
    let u0 = p.u0();
    let beta_mod = p.kappa * u0 * u0 / 8.0; // tilt rate per unit of 2 pi Mod
    let scale_t = p.kappa * PI * PI / 4.0;
    let scale_y = 4.0 * PI * PI / p.kappa;
    let t0 = sample_tilted(
        |rng, cfg| Ok(sample_exit_and_last_zero(cfg, rng)?.1),
        beta_mod * scale_t,
        PI * PI / 8.0,
        cfg,
        rng,
    )?;
    let y = sample_tilted(
        |rng, cfg| sample_bm_exit(p.kappa / 4.0, cfg, rng),
        beta_mod * scale_y,
        PI * PI / 8.0,
        cfg,
        rng,
    )?;
    Ok((scale_t * t0 + scale_y * y) / (2.0 * PI))
}

// exponential-tilt A/R with a capped weight: accept x with probability
// e^{beta (x - cap)} clamped to 1; cap chosen so the distorted tail mass
// (rate `tail_rate - beta`) is below 1e-9
fn sample_tilted<F>(
    mut draw: F,
    beta: f64,
    tail_rate: f64,
    cfg: &PathConfig,
    rng: &mut RngStream,
) -> Result<f64>
where
    F: FnMut(&mut RngStream, &PathConfig) -> Result<f64>,
{
    if beta <= 0.0 {
        return draw(rng, cfg);
    }
    if beta >= tail_rate {
        return Err(Error::Domain("tilt rate exceeds the component tail rate"));
    }
    let cap = 21.0 / (tail_rate - beta);
    loop {
        let x = match draw(rng, cfg) {
            Ok(x) => x,
            Err(Error::Censored) => continue,
            Err(e) => return Err(e),
        };
        if x >= cap || rng.uniform() < (beta * (x - cap)).exp() {
            return Ok(x);
        }
    }
}

/// Inverse-CDF sample of the Brownian-annulus modulus at boundary lengths
/// `(a, b)`; builds the table per call, see [`sample_cle_modulus`].
pub fn sample_ba_modulus(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    let grid = crate::transforms::Grid::Uniform {
        min: 1e-3,
        max: 40.0,
        count: 1024,
    };
    let d = crate::laws::ba_modulus_density(a, b, &grid)?;
    sample_density(&d, rng)
}

/// One-sample Kolmogorov-Smirnov distance between samples and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        let hi = (i + 1) as f64 / n - c;
        let lo = c - i as f64 / n;
        d = d.max(hi.max(lo));
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at significance `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Interpolated CDF of a density table, for KS tests against it.
pub fn table_cdf(d: &DensityTable, x: f64) -> f64 {
    let g = &d.grid;
    if x <= g[0] {
        return 0.0;
    }
    if x >= g[g.len() - 1] {
        return 1.0;
    }
    let idx = g.partition_point(|&p| p < x);
    let (x0, x1) = (g[idx - 1], g[idx]);
    let t = (x - x0) / (x1 - x0);
    d.cdf[idx - 1] * (1.0 - t) + d.cdf[idx] * t
}

/// Mean and jackknife standard error of `e^{-s X}` over path samples.
pub fn transform_estimate(samples: &[f64], s: f64) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let v = (-s * x).exp();
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = samples.len() as f64;
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::LqgParams;
    use crate::transforms::Grid;
    use approx::assert_relative_eq;

    #[test]
    fn stream_determinism_and_independence() {
        let mut a = RngStream::new(7, 0);
        let mut b = RngStream::new(7, 0);
        let first: Vec<f64> = (0..100).map(|_| a.uniform()).collect();
        let second: Vec<f64> = (0..100).map(|_| b.uniform()).collect();
        assert_eq!(first, second);
        let mut c = RngStream::new(7, 1);
        assert_ne!(first[0], c.uniform());
    }

    #[test]
    fn density_sampling_ks_against_table() {
        // rho_tau at tau = 1, 1e5 samples, KS <= 0.01
        let grid = Grid::Explicit((0..2400).map(|i| ((i as f64 - 1200.0) * 0.014).exp()).collect());
        let d = crate::laws::rho_tau_density(1.0, &grid).unwrap();
        let mut rng = RngStream::new(11, 0);
        let mut samples: Vec<f64> = (0..100_000)
            .map(|_| sample_density(&d, &mut rng).unwrap())
            .collect();
        for &s in &samples {
            assert!(s >= d.grid[0] && s <= d.grid[d.grid.len() - 1]);
        }
        let ks = ks_distance(&mut samples, |x| table_cdf(&d, x));
        assert!(ks <= 0.01, "ks = {ks}");
    }

    #[test]
    fn density_sampler_is_deterministic() {
        let grid = Grid::Uniform {
            min: 0.0,
            max: 1.0,
            count: 65,
        };
        let pts = grid.points().unwrap();
        let vals = alloc::vec![1.0; pts.len()];
        let d = DensityTable::from_raw(pts, vals, 0.0).unwrap();
        let mut r1 = RngStream::new(3, 9);
        let mut r2 = RngStream::new(3, 9);
        let s1: Vec<f64> = (0..100).map(|_| sample_density(&d, &mut r1).unwrap()).collect();
        let s2: Vec<f64> = (0..100).map(|_| sample_density(&d, &mut r2).unwrap()).collect();
        assert_eq!(s1, s2);
    }

    #[test]
    fn exit_time_transform_matches_closed_form() {
        // E[e^{-theta^2 Y_a/2}] = cosh(a theta)/cosh(theta) at theta = 1
        let cfg = PathConfig {
            dt: 1e-4,
            max_time: 1e3,
        };
        let n = 20_000;
        for &a in &[0.0, 0.6] {
            let mut rng = RngStream::new(5, 0);
            let samples: Vec<f64> = (0..n)
                .map(|_| sample_bm_exit(a, &cfg, &mut rng).unwrap())
                .collect();
            let (mean, se) = transform_estimate(&samples, 0.5);
            let want = (a as f64).cosh() / 1.0f64.cosh();
            assert!(
                (mean - want).abs() < 3.0 * se + 1e-3,
                "a={a} mean={mean} want={want} se={se}"
            );
        }
    }

    #[test]
    fn exit_time_near_boundary_is_fast() {
        let cfg = PathConfig {
            dt: 1e-5,
            max_time: 1e3,
        };
        let mut rng = RngStream::new(1, 0);
        let mut samples: Vec<f64> = (0..2001)
            .map(|_| sample_bm_exit(0.999, &cfg, &mut rng).unwrap())
            .collect();
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(samples[samples.len() / 2] < 0.01);
    }

    #[test]
    fn exit_time_symmetric_in_start_sign() {
        let cfg = PathConfig {
            dt: 1e-3,
            max_time: 1e3,
        };
        let n = 10_000;
        let mut r1 = RngStream::new(21, 0);
        let mut r2 = RngStream::new(22, 0);
        let mut plus: Vec<f64> = (0..n)
            .map(|_| sample_bm_exit(0.4, &cfg, &mut r1).unwrap())
            .collect();
        let mut minus: Vec<f64> = (0..n)
            .map(|_| sample_bm_exit(-0.4, &cfg, &mut r2).unwrap())
            .collect();
        let d = ks_two_sample(&mut plus, &mut minus);
        assert!(d < ks_two_sample_critical(n, n, 0.01), "d = {d}");
    }

    #[test]
    fn last_zero_transform_and_ordering() {
        // E[e^{-theta^2 T0/2}] = tanh(theta)/theta at theta = 1
        let cfg = PathConfig {
            dt: 1e-4,
            max_time: 1e3,
        };
        let mut rng = RngStream::new(9, 0);
        let n = 20_000;
        let mut t0s = Vec::with_capacity(n);
        for _ in 0..n {
            let (y, t0) = sample_exit_and_last_zero(&cfg, &mut rng).unwrap();
            assert!(t0 <= y);
            t0s.push(t0);
        }
        let (mean, se) = transform_estimate(&t0s, 0.5);
        let want = 1.0f64.tanh();
        assert!((mean - want).abs() < 3.0 * se + 1e-3, "mean={mean} want={want} se={se}");
    }

    #[test]
    fn y0_density_branches_agree_and_normalize() {
        // continuity at the branch switch
        for &t in &[0.8, 0.9, 1.0, 1.1, 1.3] {
            let image = {
                let mut sum = 0.0;
                for n in 0..40 {
                    let m = (2 * n + 1) as f64;
                    let term = m * (-m * m / (2.0 * t)).exp();
                    sum += if n % 2 == 0 { term } else { -term };
                }
                (2.0 / (PI * t * t * t)).sqrt() * sum
            };
            assert_relative_eq!(y0_exit_density(t), image, max_relative = 1e-13);
        }
        // mass and Laplace transform against 1/cosh(sqrt(2s))
        let qcfg = crate::transforms::QuadratureConfig::default();
        let mass = crate::transforms::integrate_halfline(y0_exit_density, &qcfg)
            .unwrap()
            .value;
        assert_relative_eq!(mass, 1.0, max_relative = 1e-9);
        let s = 0.5f64;
        let lap = crate::transforms::integrate_halfline(
            |t| (-s * t).exp() * y0_exit_density(t),
            &qcfg,
        )
        .unwrap()
        .value;
        assert_relative_eq!(lap, 1.0 / (2.0 * s).sqrt().cosh(), max_relative = 1e-9);
    }

    #[test]
    fn y0_density_validated_against_paths() {
        // the sampler-facing oracle: simulated exit times vs the table
        let cfg = PathConfig {
            dt: 2e-4,
            max_time: 1e3,
        };
        let n = 40_000;
        let mut rng = RngStream::new(123, 0);
        let mut samples: Vec<f64> = (0..n)
            .map(|_| sample_bm_exit(0.0, &cfg, &mut rng).unwrap())
            .collect();
        let grid = Grid::Uniform {
            min: 0.0,
            max: 30.0,
            count: 3001,
        };
        let pts = grid.points().unwrap();
        let vals: Vec<f64> = pts.iter().map(|&t| y0_exit_density(t)).collect();
        let d = DensityTable::from_raw(pts, vals, 1e-10).unwrap();
        let ks = ks_distance(&mut samples, |x| table_cdf(&d, x));
        // one-sample critical value at the 1% level
        let crit = 1.628 / (n as f64).sqrt();
        assert!(ks < crit, "ks = {ks}, crit = {crit}");
    }

    #[test]
    fn cle_modulus_table_sampler_matches_mgf() {
        let p = CleParams::new(3.5).unwrap();
        let grid = default_modulus_grid(&p, 8192);
        let d = cle_mod_density(&p, 1, &grid).unwrap();
        let mut rng = RngStream::new(40, 0);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_density(&d, &mut rng).unwrap())
            .collect();
        let lambda = 1.0;
        let (mean, se) = transform_estimate(&samples, 2.0 * PI * lambda);
        let want = crate::laws::cle_mod_mgf(lambda, &p, 1).unwrap();
        assert!((mean - want).abs() < 3.0 * se + 1e-4, "mean={mean} want={want} se={se}");
    }

    #[test]
    fn cle_modulus_path_sampler_agrees_with_table() {
        let p = CleParams::new(3.5).unwrap();
        let cfg = PathConfig {
            dt: 1e-4,
            max_time: 1e3,
        };
        let n = 10_000;
        let mut rng = RngStream::new(77, 0);
        let mut path: Vec<f64> = (0..n)
            .map(|_| sample_cle_modulus_path(&p, &cfg, &mut rng).unwrap())
            .collect();
        let grid = default_modulus_grid(&p, 2048);
        let d = cle_mod_density(&p, 1, &grid).unwrap();
        let mut rng2 = RngStream::new(78, 0);
        let mut table: Vec<f64> = (0..n)
            .map(|_| sample_density(&d, &mut rng2).unwrap())
            .collect();
        let ks = ks_two_sample(&mut path, &mut table);
        let crit = ks_two_sample_critical(n, n, 0.01);
        assert!(ks < crit, "ks = {ks}, crit = {crit}");
    }

    #[test]
    fn cle_modulus_j2_dominates_j1() {
        let p = CleParams::new(3.5).unwrap();
        let grid = default_modulus_grid(&p, 2048);
        let d1 = cle_mod_density(&p, 1, &grid).unwrap();
        let d2 = cle_mod_density(&p, 2, &grid).unwrap();
        let mut r1 = RngStream::new(50, 0);
        let mut r2 = RngStream::new(50, 1);
        let n = 20_000;
        let mut s1: Vec<f64> = (0..n).map(|_| sample_density(&d1, &mut r1).unwrap()).collect();
        let mut s2: Vec<f64> = (0..n).map(|_| sample_density(&d2, &mut r2).unwrap()).collect();
        s1.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        s2.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        // empirical CDF ordering at the deciles
        for i in 1..10 {
            let q1 = s1[n * i / 10];
            let q2 = s2[n * i / 10];
            assert!(q2 >= q1);
        }
    }

    #[test]
    fn ba_modulus_sampler_properties() {
        let grid = Grid::Uniform {
            min: 1e-3,
            max: 40.0,
            count: 1024,
        };
        let d_ab = crate::laws::ba_modulus_density(1.0, 2.0, &grid).unwrap();
        let d_ba = crate::laws::ba_modulus_density(2.0, 1.0, &grid).unwrap();
        let n = 10_000;
        let mut r1 = RngStream::new(31, 0);
        let mut r2 = RngStream::new(32, 0);
        let mut s_ab: Vec<f64> = (0..n).map(|_| sample_density(&d_ab, &mut r1).unwrap()).collect();
        let mut s_ba: Vec<f64> = (0..n).map(|_| sample_density(&d_ba, &mut r2).unwrap()).collect();
        let ks = ks_two_sample(&mut s_ab, &mut s_ba);
        assert!(ks < ks_two_sample_critical(n, n, 0.01), "ks = {ks}");
        // fixed seed determinism
        let mut r3 = RngStream::new(31, 0);
        let again: Vec<f64> = (0..10).map(|_| sample_density(&d_ab, &mut r3).unwrap()).collect();
        let mut r4 = RngStream::new(31, 0);
        let base: Vec<f64> = (0..10).map(|_| sample_density(&d_ab, &mut r4).unwrap()).collect();
        assert_eq!(again, base);
        // Laplace moment against the table quadrature
        let mut r5 = RngStream::new(33, 0);
        let samples: Vec<f64> = (0..50_000)
            .map(|_| sample_density(&d_ab, &mut r5).unwrap())
            .collect();
        let (mean, se) = transform_estimate(&samples, 2.0 * PI);
        let want = d_ab.integrate(|tau| (-2.0 * PI * tau).exp());
        assert!((mean - want).abs() < 3.0 * se + 1e-4);
    }

    #[test]
    fn halving_dt_keeps_transform_estimates_within_band() {
        let n = 40_000;
        let mut means = [0.0f64; 2];
        let mut ses = [0.0f64; 2];
        for (i, &dt) in [1e-4, 5e-5].iter().enumerate() {
            let cfg = PathConfig { dt, max_time: 1e3 };
            let mut rng = RngStream::new(60 + i as u64, 0);
            let samples: Vec<f64> = (0..n)
                .map(|_| sample_bm_exit(0.0, &cfg, &mut rng).unwrap())
                .collect();
            let (m, s) = transform_estimate(&samples, 0.5);
            means[i] = m;
            ses[i] = s;
        }
        let band = 3.0 * (ses[0] * ses[0] + ses[1] * ses[1]).sqrt();
        assert!((means[0] - means[1]).abs() < band);
    }

    #[test]
    fn censoring_is_reported() {
        let cfg = PathConfig {
            dt: 1e-3,
            max_time: 1e-2,
        };
        let mut rng = RngStream::new(0, 0);
        let mut censored = 0;
        for _ in 0..50 {
            match sample_bm_exit(0.0, &cfg, &mut rng) {
                Err(Error::Censored) => censored += 1,
                Ok(t) => assert!(t <= cfg.max_time + cfg.dt),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(censored > 0);
    }

    #[test]
    fn lateral_cf_value_used_by_mc_checks() {
        // frozen identity: the log-logistic CF at x = 1
        let lqg = LqgParams::sqrt_8_3();
        let c = crate::laws::lateral_ratio_cf(1.0, &lqg);
        let want = PI * lqg.gamma * lqg.gamma / (4.0 * (lqg.gamma * lqg.gamma * PI / 4.0).sinh());
        assert_relative_eq!(c, want, max_relative = 1e-14);
    }
}
