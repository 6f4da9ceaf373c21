//! Special functions: Dedekind eta, Jacobi theta_1 with imaginary modulus,
//! and the gamma function on and off the real axis.
//!
//! Conventions (all arguments real):
//!
//! * `eta(i tau) = e^{-pi tau/12} prod_{k>=1} (1 - e^{-2 pi k tau})`
//! * `theta_1(x, i tau) = 2 e^{-pi tau/4} sum_{n>=0} (-1)^n e^{-n(n+1) pi tau}
//!   sin((2n+1) pi x)`, the folded real form of the bilateral sum
//!
//! Both series converge slowly when `tau` is small, so small arguments are
//! routed through the modular transform (`eta(i/tau) = sqrt(tau) eta(i tau)`)
//! and the image expansion of theta_1 respectively.

use num_complex::Complex64;

use crate::error::{Error, Result};

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// Truncation control for the eta/theta series.
#[derive(Clone, Copy, Debug)]
pub struct SeriesConfig {
    /// Stop once the next term's relative contribution is below this.
    pub rel_tol: f64,
    /// Hard cap on the number of series or product terms.
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            max_terms: 256,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::Domain("SeriesConfig.rel_tol must be in (0, 1e-6]"));
        }
        if self.max_terms < 8 {
            return Err(Error::Domain("SeriesConfig.max_terms must be >= 8"));
        }
        Ok(())
    }
}

/// Dedekind eta evaluated at `i tau`, `tau > 0`.
///
/// For `tau < 1` the modular relation `eta(i/tau) = sqrt(tau) eta(i tau)`
/// keeps the worst-case nome at `e^{-2 pi}`.
pub fn dedekind_eta(tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("dedekind_eta: tau must be positive"));
    }
    if tau < 1.0 {
        // eta(i tau) = tau^{-1/2} eta(i / tau)
        return Ok(eta_product(1.0 / tau, cfg)? / tau.sqrt());
    }
    eta_product(tau, cfg)
}

fn eta_product(tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    let q = (-2.0 * PI * tau).exp();
    let mut prod = 1.0;
    let mut qk = q;
    for _ in 0..cfg.max_terms {
        if qk < cfg.rel_tol {
            return Ok((-PI * tau / 12.0).exp() * prod * (1.0 - qk));
        }
        prod *= 1.0 - qk;
        qk *= q;
    }
    Err(Error::Convergence("dedekind_eta: term cap exceeded"))
}

/// Jacobi theta_1 at real `x` and modulus `i tau`, `tau > 0`.
///
/// Odd and 1-antiperiodic in `x`: `theta_1(-x) = -theta_1(x)` and
/// `theta_1(x+1) = -theta_1(x)`.
pub fn jacobi_theta1(x: f64, tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("jacobi_theta1: tau must be positive"));
    }
    if !x.is_finite() {
        return Err(Error::Domain("jacobi_theta1: x must be finite"));
    }
    // Reduce to x in [0, 1/2]: theta_1 is odd, theta_1(x+1) = -theta_1(x),
    // and theta_1(1-x) = theta_1(x). Oddness is applied first so that
    // theta_1(-x) == -theta_1(x) holds bit-exactly.
    let mut sign = 1.0;
    let mut xr = x;
    if xr < 0.0 {
        xr = -xr;
        sign = -sign;
    }
    xr -= 2.0 * (xr / 2.0).floor(); // mod 2, now in [0, 2)
    if xr >= 1.0 {
        xr -= 1.0;
        sign = -sign;
    }
    if xr > 0.5 {
        xr = 1.0 - xr;
    }
    if xr == 0.0 {
        return Ok(0.0);
    }
    let val = if tau >= 0.5 {
        theta1_sine_series(xr, tau, cfg)?
    } else {
        theta1_image_series(xr, tau, cfg)?
    };
    Ok(sign * val)
}

fn theta1_sine_series(x: f64, tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    let mut sum = 0.0;
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        let amp = (-nf * (nf + 1.0) * PI * tau).exp();
        let term = if n % 2 == 0 { amp } else { -amp } * ((2.0 * nf + 1.0) * PI * x).sin();
        sum += term;
        if n >= 2 && (amp == 0.0 || amp < cfg.rel_tol * sum.abs()) {
            return Ok(2.0 * (-PI * tau / 4.0).exp() * sum);
        }
    }
    Err(Error::Convergence("jacobi_theta1: term cap exceeded"))
}

// Image expansion from the theta transformation, rapidly convergent for
// small tau:
//   theta_1(x, i tau) = tau^{-1/2} sum_{n>=0} (-1)^n
//       [e^{-pi (n+1/2-x)^2 / tau} - e^{-pi (n+1/2+x)^2 / tau}]
fn theta1_image_series(x: f64, tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    let mut sum = 0.0;
    for n in 0..cfg.max_terms {
        let nf = n as f64 + 0.5;
        let a = (-PI * (nf - x) * (nf - x) / tau).exp();
        let b = (-PI * (nf + x) * (nf + x) / tau).exp();
        let term = if n % 2 == 0 { a - b } else { b - a };
        sum += term;
        if n >= 1 && (a == 0.0 || a < cfg.rel_tol * sum.abs()) {
            return Ok(sum / tau.sqrt());
        }
    }
    Err(Error::Convergence("jacobi_theta1: term cap exceeded"))
}

// Lanczos approximation, g = 7, 9 coefficients. Relative accuracy ~1e-14
// on the right half plane.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for complex argument (Lanczos; reflection for Re z < 1/2).
///
/// Accuracy is certified by tests only on the lines `1 + i x` and the real
/// axis, the arguments the annulus formulas need.
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let pi_z = Complex64::new(PI, 0.0) * z;
        return Complex64::new(PI, 0.0) / (complex_sin(pi_z) * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += Complex64::new(c, 0.0) / (z + Complex64::new(i as f64, 0.0));
    }
    let t = z + Complex64::new(LANCZOS_G + 0.5, 0.0);
    let sqrt_two_pi = (2.0 * PI).sqrt();
    Complex64::new(sqrt_two_pi, 0.0) * complex_pow(t, z + Complex64::new(0.5, 0.0)) * complex_exp(-t) * acc
}

/// Gamma function for real argument (positive or negative non-integer).
pub fn gamma_real(x: f64) -> f64 {
    gamma_complex(Complex64::new(x, 0.0)).re
}

/// `Gamma(1 + i x)` for real `x`.
pub fn gamma_one_plus_ix(x: f64) -> Complex64 {
    gamma_complex(Complex64::new(1.0, x))
}

// num-complex's own exp/sin/powc need float features we keep behind the
// shim; these three cover what the Lanczos path uses.
fn complex_exp(z: Complex64) -> Complex64 {
    let r = z.re.exp();
    Complex64::new(r * z.im.cos(), r * z.im.sin())
}

fn complex_sin(z: Complex64) -> Complex64 {
    Complex64::new(z.re.sin() * z.im.cosh(), z.re.cos() * z.im.sinh())
}

fn complex_ln(z: Complex64) -> Complex64 {
    Complex64::new(z.norm_sqr().ln() * 0.5, z.im.atan2(z.re))
}

fn complex_pow(base: Complex64, exp: Complex64) -> Complex64 {
    complex_exp(exp * complex_ln(base))
}
