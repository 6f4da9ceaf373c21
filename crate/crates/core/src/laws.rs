//! Closed-form laws and weights of random annulus moduli: the boundary
//! length-ratio characteristic function of the free-boundary field, modulus
//! densities and weights for the Brownian and loop-decorated annuli, moment
//! generating functions of nested-loop moduli, conformal-radius moments,
//! boundary-length moment formulas, and the one-point bootstrap integral.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qseries::{z_eta_laplace_closed, z_eta_product, CleParams, WindingWeight};
use crate::samplers::y0_exit_density;
use crate::specfun::{dedekind_eta, gamma_one_plus_ix, gamma_real, jacobi_theta1, SeriesConfig};
use crate::transforms::{
    cf_to_density, integrate_halfline, tilt_convolve, DensityTable, Grid, QuadratureConfig,
};

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// Liouville coupling bundle: `gamma in (0,2)`, `Q = gamma/2 + 2/gamma`,
/// `c_L = 1 + 6 Q^2`.
#[derive(Clone, Copy, Debug)]
pub struct LqgParams {
    pub gamma: f64,
    pub q: f64,
    pub c_l: f64,
}

impl LqgParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(Error::Domain("gamma must lie in (0, 2)"));
        }
        let q = gamma / 2.0 + 2.0 / gamma;
        Ok(Self {
            gamma,
            q,
            c_l: 1.0 + 6.0 * q * q,
        })
    }

    /// The pure-gravity point `gamma = sqrt(8/3)`.
    pub fn sqrt_8_3() -> Self {
        Self::new((8.0f64 / 3.0).sqrt()).unwrap()
    }
}

// sin(y)/y and sinh(y)/y, stable near 0
fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-6 {
        1.0 - y * y / 6.0 + y * y * y * y / 120.0
    } else {
        y.sin() / y
    }
}

fn sinhc(y: f64) -> f64 {
    if y.abs() < 1e-6 {
        1.0 + y * y / 6.0 + y * y * y * y / 120.0
    } else {
        y.sinh() / y
    }
}

/// Characteristic function of `log L_1 - log L_0`, the log-ratio of the two
/// boundary lengths of the free-boundary field on the cylinder of modulus
/// `tau`:  `pi gamma^2 x e^{-pi gamma^2 tau x^2/4} / (4 sinh(gamma^2 pi x/4))`.
pub fn gmc_ratio_cf(x: f64, lqg: &LqgParams, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("gmc_ratio_cf: tau must be positive"));
    }
    let g2 = lqg.gamma * lqg.gamma;
    let u = g2 * PI * x / 4.0;
    Ok((-PI * g2 * tau * x * x / 4.0).exp() / sinhc(u))
}

/// The `tau`-independent lateral factor of [`gmc_ratio_cf`]: the
/// characteristic function of the log of a log-logistic ratio,
/// `pi gamma^2 x / (4 sinh(gamma^2 pi x/4))`.
pub fn lateral_ratio_cf(x: f64, lqg: &LqgParams) -> f64 {
    let u = lqg.gamma * lqg.gamma * PI * x / 4.0;
    1.0 / sinhc(u)
}

/// Density table of the log boundary-length ratio on a symmetric grid,
/// for arbitrary `gamma`; the inversion kernel behind [`rho_tau_density`]
/// and the bootstrap cross-checks.
pub fn log_ratio_density(lqg: &LqgParams, tau: f64, grid: &Grid) -> Result<DensityTable> {
    let lqg = *lqg;
    let d = cf_to_density(
        move |t| {
            let u = lqg.gamma * lqg.gamma * PI * t / 4.0;
            (-PI * lqg.gamma * lqg.gamma * tau * t * t / 4.0).exp() / sinhc(u)
        },
        grid,
    )?;
    // the log-ratio density decays at the rate of the nearest CF pole,
    // |s| rate 4/gamma^2; bound the off-grid mass accordingly
    let rate = 4.0 / (lqg.gamma * lqg.gamma);
    let edge = d.values[0].max(d.values[d.values.len() - 1]);
    let tail = 2.0 * edge / rate;
    if tail > 1e-8 {
        return Err(Error::Accuracy {
            what: "log_ratio_density: grid leaves more than 1e-8 tail mass",
            best: tail,
            err_est: tail,
        });
    }
    Ok(DensityTable { tail_bound: tail, ..d })
}

/// Density of the boundary-length ratio itself (`gamma = sqrt(8/3)`), the
/// variable whose Mellin transform is
/// `2 pi t e^{-2 pi tau t^2/3}/(3 sinh(2 pi t/3))`.
///
/// `grid` is the grid of ratio values (positive reals).
pub fn rho_tau_density(tau: f64, grid: &Grid) -> Result<DensityTable> {
    let lqg = LqgParams::sqrt_8_3();
    let pts = grid.points()?;
    if pts[0] <= 0.0 {
        return Err(Error::Domain("rho_tau_density: grid must be positive"));
    }
    let qcfg = QuadratureConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_subdivisions: 1 << 15,
        tail_decay_hint: None,
    };
    let mut values = Vec::with_capacity(pts.len());
    for &x in &pts {
        let s = x.ln();
        let q = integrate_halfline(
            |t| {
                let u = lqg.gamma * lqg.gamma * PI * t / 4.0;
                (t * s).cos() * (-PI * lqg.gamma * lqg.gamma * tau * t * t / 4.0).exp() / sinhc(u)
            },
            &qcfg,
        )?;
        values.push(q.value / (PI * x));
    }
    // the log-ratio tail decays at rate 4/gamma^2 = 3/2
    let n = pts.len();
    let edge = (values[0] * pts[0]).max(values[n - 1] * pts[n - 1]);
    let tail = 2.0 * edge / 1.5;
    if tail > 1e-8 {
        return Err(Error::Accuracy {
            what: "rho_tau_density: grid leaves more than 1e-8 tail mass",
            best: tail,
            err_est: tail,
        });
    }
    DensityTable::from_raw(pts, values, tail)
}

/// Free-field annulus partition function `1/(sqrt(2) eta(2 i tau))`.
pub fn z_gff(tau: f64) -> Result<f64> {
    Ok(1.0 / (2.0f64.sqrt() * dedekind_eta(2.0 * tau, &SeriesConfig::default())?))
}

/// Ghost-sector annulus partition function `eta(2 i tau)^2`.
pub fn z_ghost(tau: f64) -> Result<f64> {
    let e = dedekind_eta(2.0 * tau, &SeriesConfig::default())?;
    Ok(e * e)
}

/// Modulus weight of the free Brownian annulus: `2^{-1/2} eta(2 i tau)`.
pub fn ba_weight(tau: f64) -> Result<f64> {
    Ok(dedekind_eta(2.0 * tau, &SeriesConfig::default())? / 2.0f64.sqrt())
}

/// Modulus weight of the quantum annulus for `gamma in (sqrt(8/3), 2)`:
/// `cos(pi(4/gamma^2 - 1)) (gamma/2 pi) theta_1(gamma^2/8, i gamma^2 tau/4)`.
pub fn qa_weight(tau: f64, lqg: &LqgParams) -> Result<f64> {
    let g2 = lqg.gamma * lqg.gamma;
    if !(g2 > 8.0 / 3.0 && lqg.gamma < 2.0) {
        return Err(Error::Domain("qa_weight: gamma must lie in (sqrt(8/3), 2)"));
    }
    let theta = jacobi_theta1(g2 / 8.0, g2 * tau / 4.0, &SeriesConfig::default())?;
    Ok((PI * (4.0 / g2 - 1.0)).cos() * lqg.gamma / (2.0 * PI) * theta)
}

/// Normalized modulus density of the Brownian annulus with boundary lengths
/// `(a, b)`: proportional to `eta(2 i tau) rho_tau(b/a)` on the `tau` grid.
pub fn ba_modulus_density(a: f64, b: f64, grid: &Grid) -> Result<DensityTable> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain("ba_modulus_density: lengths must be positive"));
    }
    let lqg = LqgParams::sqrt_8_3();
    let r = b / a;
    let s = r.ln();
    let pts = grid.points()?;
    let scfg = SeriesConfig::default();
    let qcfg = QuadratureConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_subdivisions: 1 << 15,
        tail_decay_hint: None,
    };
    let mut values = Vec::with_capacity(pts.len());
    for &tau in &pts {
        if tau <= 0.0 {
            values.push(0.0);
            continue;
        }
        let eta = dedekind_eta(2.0 * tau, &scfg)?;
        if eta == 0.0 {
            values.push(0.0);
            continue;
        }
        let q = integrate_halfline(
            |t| {
                let u = lqg.gamma * lqg.gamma * PI * t / 4.0;
                (t * s).cos() * (-PI * lqg.gamma * lqg.gamma * tau * t * t / 4.0).exp() / sinhc(u)
            },
            &qcfg,
        )?;
        values.push(eta * (q.value / (PI * r)).max(0.0));
    }
    // eta(2 i tau) decays at rate pi/6
    let tail = values[pts.len() - 1] * 6.0 / PI * 2.0;
    DensityTable::from_raw(pts, values, tail)
}

// spectral parameter continuation: D = u0^2 - 8 lambda/kappa, u = sqrt(D)
// possibly imaginary.
fn spectral_d(p: &CleParams, lambda: f64) -> Result<f64> {
    let threshold = 3.0 * p.kappa / 32.0 + 2.0 / p.kappa - 1.0;
    if !(lambda > threshold) {
        return Err(Error::Domain(
            "lambda must exceed the MGF pole threshold 3 kappa/32 + 2/kappa - 1",
        ));
    }
    let u0 = p.u0();
    Ok(u0 * u0 - 8.0 * lambda / p.kappa)
}

// sin(kappa pi u/4)/u continued through u^2 = D < 0
fn sin_ratio(p: &CleParams, d: f64) -> f64 {
    let c = p.kappa * PI / 4.0;
    if d >= 0.0 {
        c * sinc(c * d.sqrt())
    } else {
        c * sinhc(c * (-d).sqrt())
    }
}

// cos(pi u) continued through u^2 = D < 0
fn cos_u(d: f64) -> f64 {
    if d >= 0.0 {
        (PI * d.sqrt()).cos()
    } else {
        (PI * (-d).sqrt()).cosh()
    }
}

// u0 / sin(pi (1 - kappa/4)) with its removable kappa -> 4 limit, using
// sin(pi(1 - kappa/4)) = sin(kappa pi u0/4) exactly
fn u0_over_sin0(p: &CleParams) -> f64 {
    let c = p.kappa * PI / 4.0;
    1.0 / (c * sinc(c * p.u0()))
}

/// Moment generating function `E[e^{-2 pi lambda Mod}]` of the modulus of
/// the `j`-th nested-loop annulus.
pub fn cle_mod_mgf(lambda: f64, p: &CleParams, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("cle_mod_mgf: j must be >= 1"));
    }
    let d = spectral_d(p, lambda)?;
    let cos_ratio = (PI * p.u0()).cos() / cos_u(d);
    Ok(u0_over_sin0(p) * sin_ratio(p, d) * cos_ratio.powi(j as i32))
}

/// `E[CR^lambda]` of the `j`-th nested loop's conformal radius:
/// `(cos(pi u0)/cos(pi u))^j`.
pub fn cr_moment(lambda: f64, p: &CleParams, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("cr_moment: j must be >= 1"));
    }
    let d = spectral_d(p, lambda)?;
    let cos_ratio = (PI * p.u0()).cos() / cos_u(d);
    Ok(cos_ratio.powi(j as i32))
}

/// `cr_moment / cle_mod_mgf`: the moment function of the factor
/// `e^{2 pi Mod} CR`, which is independent of `j`. Closed form
/// `u sin(pi(1 - kappa/4)) / ((4/kappa - 1) sin(kappa pi u/4))`.
pub fn mod_cr_factor(lambda: f64, p: &CleParams) -> Result<f64> {
    let d = spectral_d(p, lambda)?;
    Ok(1.0 / (u0_over_sin0(p) * sin_ratio(p, d)))
}

/// Laplace transform of the hitting-time representation of the *untilted*
/// modulus weight: `P(s) = sinh(theta')/(theta' cosh theta)` with
/// `theta = pi sqrt(8 s/kappa)`, `theta' = kappa theta/4`, continued to
/// `s < 0` by `sin`/`cos`.
///
/// The modulus law itself satisfies
/// `cle_mod_mgf(lambda, kappa, 1) = P(lambda - kappa u0^2/8)/P(-kappa u0^2/8)`,
/// the exponential-tilt bookkeeping between the weight and the law.
pub fn m1_hitting_time_transform(s: f64, p: &CleParams) -> f64 {
    let e = 8.0 * s / p.kappa;
    if e >= 0.0 {
        let theta = PI * e.sqrt();
        let tp = p.kappa * theta / 4.0;
        sinhc(tp) / theta.cosh()
    } else {
        let theta = PI * (-e).sqrt();
        let tp = p.kappa * theta / 4.0;
        sinc(tp) / theta.cos()
    }
}

/// Uniform grid spanning `[0, tau_max]` where the tilted modulus weight at
/// these parameters has decayed to ~1e-12 of its peak.
pub fn default_modulus_grid(p: &CleParams, count: usize) -> Grid {
    let u0 = p.u0();
    let rate = PI * p.kappa / 16.0 * (1.0 - 4.0 * u0 * u0);
    let tau_max = (22.0 / rate).min(120.0);
    Grid::Uniform {
        min: 0.0,
        max: tau_max,
        count,
    }
}

// tilted increment density on the modulus scale: (2 pi/kappa) Y_0 exit time,
// tilted by e^{pi kappa u0^2 tau/4} and normalized
fn tilted_increment_density(p: &CleParams, grid: &Grid) -> Result<DensityTable> {
    let pts = grid.points()?;
    let scale = p.kappa / (2.0 * PI);
    let c = PI * p.kappa * p.u0() * p.u0() / 4.0;
    let values: Vec<f64> = pts
        .iter()
        .map(|&tau| {
            if tau <= 0.0 {
                0.0
            } else {
                scale * y0_exit_density(scale * tau) * (c * tau).exp()
            }
        })
        .collect();
    let rate = PI * p.kappa / 16.0 * (1.0 - 4.0 * p.u0() * p.u0());
    let tail = values[pts.len() - 1] / rate * 2.0;
    DensityTable::from_raw(pts, values, tail)
}

// Tabulates f on a uniform grid with cell averaging below `avg_below`:
// values[i] becomes the mean of f over [x_i - h/2, x_i + h/2] (clipped at
// x_0). The trapezoid rule on cell averages is a mass-weighted midpoint
// rule, so tables built this way integrate smooth functions accurately
// even when f has an integrable spike inside a cell (the theta-type
// densities behave like tau^{-1/2} e^{-a/tau} with small a near kappa = 4).
fn tabulate_cell_averaged<F: Fn(f64) -> Result<f64>>(
    pts: &[f64],
    avg_below: f64,
    f: F,
) -> Result<Vec<f64>> {
    let h = pts[1] - pts[0];
    let sub = 32;
    let mut values = Vec::with_capacity(pts.len());
    for (i, &x) in pts.iter().enumerate() {
        if x >= avg_below {
            values.push(f(x)?.max(0.0));
            continue;
        }
        let lo = if i == 0 { x } else { x - h / 2.0 };
        let hi = x + h / 2.0;
        let mut acc = 0.0;
        if i == 0 {
            // the first cell may contain a tau^{-1/2}-type endpoint
            // singularity (kappa -> 4); substitute tau = lo + v^2 so the
            // midpoint rule sees a bounded integrand
            let v_hi = (hi - lo).sqrt();
            let step = v_hi / sub as f64;
            for k in 0..sub {
                let v = (k as f64 + 0.5) * step;
                acc += f(lo + v * v)?.max(0.0) * 2.0 * v * step;
            }
            values.push(acc / (hi - lo));
        } else {
            let step = (hi - lo) / sub as f64;
            for k in 0..sub {
                acc += f(lo + (k as f64 + 0.5) * step)?.max(0.0);
            }
            values.push(acc / sub as f64);
        }
    }
    Ok(values)
}

/// Normalized modulus density of the `j`-th nested-loop annulus.
///
/// `j = 1` tabulates `e^{pi kappa u0^2 tau/4} theta_1(kappa/8, i kappa tau/4)`;
/// `j >= 2` convolves it with `j - 1` tilted exit-time increments, so the
/// grid must be uniform. The returned grid extends to `j` times the input
/// span.
pub fn cle_mod_density(p: &CleParams, j: u32, grid: &Grid) -> Result<DensityTable> {
    if j == 0 {
        return Err(Error::Domain("cle_mod_density: j must be >= 1"));
    }
    let pts = grid.points()?;
    let scfg = SeriesConfig::default();
    let u0 = p.u0();
    let c = PI * p.kappa * u0 * u0 / 4.0;
    let g2 = p.kappa; // gamma^2 = kappa
    let values = tabulate_cell_averaged(&pts, 2.0, |tau| {
        if tau <= 0.0 {
            Ok(0.0)
        } else {
            let th = jacobi_theta1(g2 / 8.0, g2 * tau / 4.0, &scfg)?;
            Ok((c * tau).exp() * th)
        }
    })?;
    let rate = PI * p.kappa / 16.0 * (1.0 - 4.0 * u0 * u0);
    let tail = values[pts.len() - 1] / rate * 2.0;
    let mut density = DensityTable::from_raw(pts, values, tail)?;
    if j > 1 {
        let inc = tilted_increment_density(p, grid)?;
        for _ in 1..j {
            density = tilt_convolve(&density, &inc, 0.0)?;
        }
    }
    Ok(density)
}

/// Result of the nested-loop expectation sum.
#[derive(Clone, Copy, Debug)]
pub struct NestedExpectation {
    /// Value of the truncated `j`-sum.
    pub value: f64,
    /// Geometric bound on the truncated tail.
    pub tail_bound: f64,
    /// Number of terms actually accumulated.
    pub terms: u32,
}

/// Left side of the nested-loop identity for the tilted-exponential test
/// function `f(tau) = e^{-t tau} e^{-pi kappa u0^2 tau/4}`:
/// `sum_{j <= j_max} (n'/n)^{j-1} E[f(Mod_j)]`.
///
/// Each expectation integrates `f` against the tabulated modulus density;
/// since the `j`-th density is the `(j-1)`-fold tilted convolution of the
/// first one with the increment table, the integrals factor into a product
/// of two tabulated transforms, which is how the sum is accumulated.
pub fn nested_expectation(
    t: f64,
    p: &CleParams,
    w: &WindingWeight,
    j_max: u32,
) -> Result<NestedExpectation> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain("nested_expectation: t must be positive"));
    }
    if j_max == 0 {
        return Err(Error::Domain("nested_expectation: j_max must be >= 1"));
    }
    let grid = default_modulus_grid(p, 8192);
    let d1 = cle_mod_density(p, 1, &grid)?;
    let inc = tilted_increment_density(p, &grid)?;
    let c = PI * p.kappa * p.u0() * p.u0() / 4.0;
    let s = t + c; // f(tau) = e^{-s tau}
    let e1 = d1.integrate(|tau| (-s * tau).exp());
    let b = inc.integrate(|tau| (-s * tau).exp());
    let beta = w.n_prime / p.n;
    let ratio = beta * b;
    if ratio.abs() >= 1.0 {
        return Err(Error::Domain(
            "nested_expectation: the j-sum does not converge for these parameters",
        ));
    }
    let mut value = 0.0;
    let mut term = e1;
    let mut terms = 0;
    for _ in 0..j_max {
        value += term;
        terms += 1;
        term *= ratio;
        if term.abs() < 1e-14 * value.abs() {
            break;
        }
    }
    // remaining terms form a geometric series with ratio |ratio|
    let tail_bound = term.abs() / (1.0 - ratio.abs());
    Ok(NestedExpectation {
        value,
        tail_bound,
        terms,
    })
}

/// Right side of the nested-loop identity for the same test function:
/// `sqrt(kappa) u0 cos(pi u0) / (sqrt(2) sin(pi(1-kappa/4)))
///  int e^{-t tau} Z(tau, kappa, chi') eta(2 i tau) dtau`,
/// with the integral done by quadrature over the stable product form.
pub fn nested_expectation_partition_side(t: f64, p: &CleParams, w: &WindingWeight) -> Result<f64> {
    let scfg = SeriesConfig::default();
    let qcfg = QuadratureConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-9,
        max_subdivisions: 1 << 15,
        tail_decay_hint: None,
    };
    let q = integrate_halfline(
        |tau| (-t * tau).exp() * z_eta_product(tau, p, w, &scfg).unwrap_or(0.0),
        &qcfg,
    )?;
    let pref = p.kappa.sqrt() * (PI * p.u0()).cos() * u0_over_sin0(p) / 2.0f64.sqrt();
    Ok(pref * q.value)
}

/// Same right side with the integral replaced by its closed form.
pub fn nested_expectation_partition_closed(
    t: f64,
    p: &CleParams,
    w: &WindingWeight,
) -> Result<f64> {
    let pref = p.kappa.sqrt() * (PI * p.u0()).cos() * u0_over_sin0(p) / 2.0f64.sqrt();
    Ok(pref * z_eta_laplace_closed(t, p, w)?)
}

/// Boundary-length moment `pi gamma x Gamma(1+ix) e^{-pi gamma^2 tau x^2/4}
/// / (2 sinh(gamma^2 pi x/4))` of the annulus Liouville field.
pub fn lf_boundary_moment(x: f64, lqg: &LqgParams, tau: f64) -> Result<Complex64> {
    let cf = gmc_ratio_cf(x, lqg, tau)?;
    Ok(gamma_one_plus_ix(x) * (2.0 / lqg.gamma) * cf)
}

/// Both evaluations of the one-point bootstrap integral at `mu_1 = 1`.
#[derive(Clone, Copy, Debug)]
pub struct BootstrapRhs {
    /// `(2 pi)^{-1} int dU(Q+iP, mu0) dU(Q-iP, 1) e^{-pi tau P^2} dP`,
    /// assembled from complex gamma factors.
    pub spectral: f64,
    /// The reduced real form with the gamma pairs collapsed into `sinh`s.
    pub reduced: f64,
}

/// Bootstrap integral `LF[L_0 L_1 e^{-mu0 L_0 - L_1}]` evaluated two ways.
pub fn bootstrap_rhs(tau: f64, lqg: &LqgParams, mu0: f64) -> Result<BootstrapRhs> {
    if !(tau > 0.0) || !(mu0 > 0.0) {
        return Err(Error::Domain("bootstrap_rhs: tau and mu0 must be positive"));
    }
    let gamma = lqg.gamma;
    let ln_mu = mu0.ln();
    let qcfg = QuadratureConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_subdivisions: 1 << 15,
        tail_decay_hint: None,
    };
    // spectral form: the integrand is even in P with a cos(2 P ln(mu0)/gamma)
    // phase; the gamma factors pair into |Gamma(1 + i a)|^2
    let spectral = {
        let q = integrate_halfline(
            |pp| {
                let g1 = gamma_one_plus_ix(2.0 * pp / gamma).norm_sqr();
                let g2 = gamma_one_plus_ix(gamma * pp / 2.0).norm_sqr();
                g1 * g2 * (2.0 * pp / gamma * ln_mu).cos() * (-PI * tau * pp * pp).exp()
            },
            &qcfg,
        )?;
        2.0 * q.value * (4.0 / (gamma * gamma * mu0)) / (2.0 * PI)
    };
    // reduced form: (gamma pi/(4 mu0)) int mu0^{iu} u^2 e^{-pi gamma^2 tau u^2/4}
    //   / (sinh(pi u) sinh(gamma^2 pi u/4)) du, the u^2/(sinh sinh) kernel
    //   written with stable sinhc factors
    let reduced = {
        let q = integrate_halfline(
            |u| {
                let a = 1.0 / sinhc(PI * u);
                let b = 1.0 / sinhc(gamma * gamma * PI * u / 4.0);
                (u * ln_mu).cos() * a * b * (-PI * gamma * gamma * tau * u * u / 4.0).exp()
            },
            &qcfg,
        )?;
        2.0 * q.value * gamma * PI / (4.0 * mu0) / (PI * PI * gamma * gamma / 4.0)
    };
    Ok(BootstrapRhs { spectral, reduced })
}

/// `LF[L_0 L_1 e^{-mu0 L_0 - L_1}]` through the length-factorization route:
/// `(2/gamma) E[X/(mu0 + X)^2]` for the boundary-length ratio `X`.
pub fn lf_pair_moment_via_ratio_law(tau: f64, lqg: &LqgParams, mu0: f64) -> Result<f64> {
    let half_span = 31.0 * lqg.gamma * lqg.gamma / 4.0;
    let grid = Grid::Uniform {
        min: -half_span,
        max: half_span,
        count: 2501,
    };
    let d = log_ratio_density(lqg, tau, &grid)?;
    let val = d.integrate(|s| {
        let x = s.exp();
        x / ((mu0 + x) * (mu0 + x))
    });
    Ok(2.0 / lqg.gamma * val)
}

/// Total mass of the disk Liouville field with an `alpha` insertion at
/// fixed boundary length `ell`.
pub fn lf_disk_mass(alpha: f64, lqg: &LqgParams, ell: f64) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(Error::Domain("lf_disk_mass: ell must be positive"));
    }
    let gamma = lqg.gamma;
    let q = lqg.q;
    if !(alpha > gamma / 2.0) {
        return Err(Error::Domain("lf_disk_mass: alpha must exceed gamma/2"));
    }
    let g2 = gamma * gamma;
    Ok((2.0 / gamma)
        * 2.0f64.powf(alpha * alpha / 2.0 - alpha * q)
        * (2.0 * PI / gamma_real(1.0 - g2 / 4.0)).powf(2.0 / gamma * (q - alpha))
        * gamma_real(gamma * alpha / 2.0 - g2 / 4.0)
        * ell.powf(2.0 / gamma * (alpha - q) - 1.0))
}

/// Which annulus family a modulus weight describes.
#[derive(Clone, Debug)]
pub enum ModulusWeight {
    /// Brownian annulus: `2^{-1/2} eta(2 i tau)`.
    Ba,
    /// Quantum annulus at coupling `gamma`.
    Qa(LqgParams),
    /// `j`-th nested-loop annulus weight, tabulated by convolution.
    QaJ {
        lqg: LqgParams,
        j: u32,
        table: DensityTable,
        scale: f64,
    },
}

impl ModulusWeight {
    pub fn ba() -> Self {
        ModulusWeight::Ba
    }

    pub fn qa(lqg: LqgParams) -> Result<Self> {
        let g2 = lqg.gamma * lqg.gamma;
        if !(g2 > 8.0 / 3.0 && lqg.gamma < 2.0) {
            return Err(Error::Domain("qa weight needs gamma in (sqrt(8/3), 2)"));
        }
        Ok(ModulusWeight::Qa(lqg))
    }

    /// Builds the `j`-th weight, `cos^{j-1}(pi u0) (m_1 * f_inc^{*(j-1)})`
    /// with the untilted increment, tabulated on the given uniform grid.
    pub fn qa_j(lqg: LqgParams, j: u32, grid: &Grid) -> Result<Self> {
        let g2 = lqg.gamma * lqg.gamma;
        if !(g2 > 8.0 / 3.0 && lqg.gamma < 2.0) {
            return Err(Error::Domain("qa weight needs gamma in (sqrt(8/3), 2)"));
        }
        if j == 0 {
            return Err(Error::Domain("qa_j: j must be >= 1"));
        }
        let pts = grid.points()?;
        let values = tabulate_cell_averaged(&pts, 2.0, |tau| {
            if tau <= 0.0 {
                Ok(0.0)
            } else {
                qa_weight(tau, &lqg)
            }
        })?;
        let rate = PI * g2 / 16.0;
        let tail = values[pts.len() - 1] / rate * 2.0;
        let mut table = DensityTable::from_raw(pts, values, tail)?;
        let mut scale = table.mass;
        if j > 1 {
            // untilted increment: (2 pi/gamma^2) Y_0 on the modulus scale
            let sc = g2 / (2.0 * PI);
            let pts2 = grid.points()?;
            let ivals: Vec<f64> = pts2
                .iter()
                .map(|&tau| if tau <= 0.0 { 0.0 } else { sc * y0_exit_density(sc * tau) })
                .collect();
            let inc = DensityTable::from_raw(pts2, ivals, 1e-12)?;
            let u0 = 4.0 / g2 - 1.0;
            let cos0 = (PI * u0).cos();
            for _ in 1..j {
                table = tilt_convolve(&table, &inc, 0.0)?;
                scale *= cos0 * table.mass;
            }
        }
        Ok(ModulusWeight::QaJ {
            lqg,
            j,
            table,
            scale,
        })
    }

    /// Pointwise weight `m(tau)`.
    pub fn weight(&self, tau: f64) -> Result<f64> {
        match self {
            ModulusWeight::Ba => ba_weight(tau),
            ModulusWeight::Qa(lqg) => qa_weight(tau, lqg),
            ModulusWeight::QaJ { table, scale, .. } => Ok(scale * table.value_at(tau)),
        }
    }

    /// Closed-form mixed boundary-length moment `<L_1 e^{-L_1} L_0^{ix}>`
    /// of the corresponding annulus family.
    pub fn length_moment(&self, x: f64) -> Complex64 {
        let g = gamma_one_plus_ix(x);
        match self {
            ModulusWeight::Ba => g * (PI / (2.0 * (PI * x).cosh())),
            ModulusWeight::Qa(lqg) => {
                let g2 = lqg.gamma * lqg.gamma;
                g * ((PI * (4.0 / g2 - 1.0)).cos() / (PI * x).cosh())
            }
            ModulusWeight::QaJ { lqg, j, .. } => {
                let g2 = lqg.gamma * lqg.gamma;
                let f = (PI * (4.0 / g2 - 1.0)).cos() / (PI * x).cosh();
                g * f.powi(*j as i32)
            }
        }
    }

    /// The coupling `gamma` of the family.
    pub fn gamma(&self) -> f64 {
        match self {
            ModulusWeight::Ba => (8.0f64 / 3.0).sqrt(),
            ModulusWeight::Qa(lqg) | ModulusWeight::QaJ { lqg, .. } => lqg.gamma,
        }
    }
}

/// Closed-form mixed boundary-length moment for a weight kind; the
/// transform-level counterpart of the weight's Laplace transform.
pub fn annulus_length_moment(kind: &ModulusWeight, x: f64) -> Complex64 {
    kind.length_moment(x)
}
