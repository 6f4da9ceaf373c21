//! Annulus partition functions of the O(n) loop matter: the open- and
//! closed-channel q-series `Z(tau, kappa, chi')`, the Cardy-type partition
//! function of the self-avoiding loop, nesting ratios, and the closed-form
//! Laplace transform of `Z * eta(2 i tau)`.
//!
//! Nome conventions: `q = e^{-pi/tau}` (open channel, fast for small tau)
//! and `q~ = e^{-2 pi tau}` (closed channel, fast for large tau). The two
//! channel expansions agree by modular invariance; both are exposed and the
//! [`z_annulus`] selector picks the faster-converging one.

use crate::error::{Error, Result};
use crate::specfun::{dedekind_eta, SeriesConfig};

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// Loop-model parameter bundle derived from `kappa in (8/3, 4]`.
#[derive(Clone, Copy, Debug)]
pub struct CleParams {
    pub kappa: f64,
    /// `g = 4/kappa in [1, 3/2)`
    pub g: f64,
    /// `chi = (1-g) pi in (-pi/2, 0]`
    pub chi: f64,
    /// loop weight `n = 2 cos(chi) in (0, 2]`
    pub n: f64,
    /// central charge `c = 1 - 6 (1-g)^2 / g in (0, 1]`
    pub c: f64,
}

impl CleParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 8.0 / 3.0 && kappa <= 4.0) {
            return Err(Error::Domain("kappa must lie in (8/3, 4]"));
        }
        let g = 4.0 / kappa;
        let chi = (1.0 - g) * PI;
        Ok(Self {
            kappa,
            g,
            chi,
            n: 2.0 * chi.cos(),
            c: 1.0 - 6.0 * (1.0 - g) * (1.0 - g) / g,
        })
    }

    /// `u0 = 4/kappa - 1`, the spectral parameter of the modulus laws.
    pub fn u0(&self) -> f64 {
        self.g - 1.0
    }
}

/// Convenience constructor matching the operation name.
pub fn cle_params(kappa: f64) -> Result<CleParams> {
    CleParams::new(kappa)
}

/// Weight `n' = 2 cos(chi')` assigned to non-contractible loops.
#[derive(Clone, Copy, Debug)]
pub struct WindingWeight {
    pub chi_prime: f64,
    pub n_prime: f64,
}

impl WindingWeight {
    pub fn new(chi_prime: f64) -> Self {
        Self {
            chi_prime,
            n_prime: 2.0 * chi_prime.cos(),
        }
    }
}

/// The paired nomes of a modulus.
#[derive(Clone, Copy, Debug)]
pub struct NomePair {
    pub tau: f64,
    /// `e^{-pi/tau}`
    pub q: f64,
    /// `e^{-2 pi tau}`
    pub q_tilde: f64,
}

impl NomePair {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain("tau must be positive"));
        }
        Ok(Self {
            tau,
            q: (-PI / tau).exp(),
            q_tilde: (-2.0 * PI * tau).exp(),
        })
    }
}

// prod_{r>=1} (1 - e^{-2 pi r s})^{-1} = e^{-pi s/12} / eta(i s), with eta
// handling small s through its modular transform.
fn inv_euler_product(s: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok((-PI * s / 12.0).exp() / dedekind_eta(s, cfg)?)
}

/// Open-channel (`q`-expansion) partition function `Z(tau, kappa, chi')`.
pub fn z_open(tau: f64, p: &CleParams, w: &WindingWeight, cfg: &SeriesConfig) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("z_open: tau must be positive"));
    }
    let g = p.g;
    let ln_q = -PI / tau;
    // weights sin((p+1) chi') / sin(chi'); the Chebyshev recurrence
    // U_p(cos chi') is the exact same sequence and stays finite at the
    // removable points chi' = k pi.
    let use_direct = w.chi_prime.sin().abs() >= 1e-8;
    let sin_chi = w.chi_prime.sin();
    let cos_chi = w.chi_prime.cos();
    let weight = |idx: i64| -> f64 {
        // weight for the summation index p = idx
        if use_direct {
            ((idx + 1) as f64 * w.chi_prime).sin() / sin_chi
        } else {
            // U_{idx}(cos chi') with U_{-1} = 0, U_{-m-2} = -U_m
            let (order, sign) = if idx >= 0 {
                (idx, 1.0)
            } else if idx == -1 {
                return 0.0;
            } else {
                (-idx - 2, -1.0)
            };
            let mut um1 = 0.0; // U_{-1}
            let mut u = 1.0; // U_0
            for _ in 0..order {
                let next = 2.0 * cos_chi * u - um1;
                um1 = u;
                u = next;
            }
            sign * u
        }
    };
    let exponent = |pf: f64| g * pf * pf / 4.0 - (1.0 - g) * pf / 2.0;
    let mut sum = 0.0;
    let mut converged = false;
    for k in 0..cfg.max_terms as i64 {
        // enumerate p = 0, -1, 1, -2, 2, ...; after an even step the set
        // {-n..n} is complete and the tail bound below is valid
        let idx = if k % 2 == 0 { k / 2 } else { -(k / 2) - 1 };
        let pf = idx as f64;
        sum += weight(idx) * (exponent(pf) * ln_q).exp();
        // both wings decay monotonically once g p^2/4 dominates; bound the
        // tail with |sin((p+1)chi')/sin(chi')| <= |p|+1
        if k >= 4 && k % 2 == 0 {
            let next = pf.abs() + 1.0;
            let bound = 2.0
                * (next + 1.0)
                * ((exponent(next) * ln_q).exp()).max((exponent(-next) * ln_q).exp());
            if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence("z_open: p-sum term cap exceeded"));
    }
    // prefactor q^{-c/24} prod (1-q^r)^{-1}; the product equals the inverse
    // Euler product at s = 1/(2 tau)
    let pref = (-p.c / 24.0 * ln_q).exp() * inv_euler_product(0.5 / tau, cfg)?;
    let z = pref * sum;
    if !z.is_finite() {
        return Err(Error::Convergence("z_open: non-finite result"));
    }
    Ok(z)
}

/// Closed-channel (`q~`-expansion) partition function `Z(tau, kappa, chi')`.
pub fn z_closed(tau: f64, p: &CleParams, w: &WindingWeight, cfg: &SeriesConfig) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("z_closed: tau must be positive"));
    }
    let g = p.g;
    let ln_qt = -2.0 * PI * tau;
    let sum = closed_channel_sum(tau, p, w, cfg)?;
    // prefactor (2/g)^{1/2} q~^{-c/12 - (1-g)^2/(2g)} prod (1-q~^{2r})^{-1};
    // the product is the inverse Euler product at s = 2 tau
    let shift = -p.c / 12.0 - (1.0 - g) * (1.0 - g) / (2.0 * g);
    let pref = (2.0 / g).sqrt() * (shift * ln_qt).exp() * inv_euler_product(2.0 * tau, cfg)?;
    let z = pref * sum;
    if !z.is_finite() {
        return Err(Error::Convergence("z_closed: non-finite result"));
    }
    Ok(z)
}

// sum_m [sin((chi'+2 pi m)/g)/sin(chi')] q~^{(chi'+2 pi m)^2/(2 pi^2 g)}
fn closed_channel_sum(tau: f64, p: &CleParams, w: &WindingWeight, cfg: &SeriesConfig) -> Result<f64> {
    let g = p.g;
    let ln_qt = -2.0 * PI * tau;
    // the sum is invariant under chi' -> chi' + 2 pi (an m-shift); reduce to
    // (-pi, pi] so the tail bound below can assume |chi'| <= pi
    let chi = w.chi_prime - 2.0 * PI * (w.chi_prime / (2.0 * PI)).round();
    // exponent (chi' + 2 pi m)^2 / (2 pi^2 g), without the constant shift
    let expo = |arg: f64| arg * arg / (2.0 * PI * PI * g);

    if chi.sin().abs() >= 1e-8 {
        let sin_chi = chi.sin();
        let mut sum = 0.0;
        let mut converged = false;
        for k in 0..cfg.max_terms as i64 {
            let m = if k % 2 == 0 { k / 2 } else { -(k / 2) - 1 };
            let arg = chi + 2.0 * PI * m as f64;
            let term = (arg / g).sin() / sin_chi * (expo(arg) * ln_qt).exp();
            sum += term;
            if k >= 4 && k % 2 == 0 {
                // the set {-n..n} is complete; both unadded wings have
                // |chi' + 2 pi m| >= 2 pi (n+1) - pi
                let next = (k / 2 + 1) as f64;
                let worst = 2.0 * PI * next - PI;
                let bound = 4.0 / sin_chi.abs() * (expo(worst) * ln_qt).exp();
                if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return Err(Error::Convergence("z_closed: m-sum term cap exceeded"));
        }
        Ok(sum)
    } else {
        // chi' within ~1e-8 of k pi: pair the summands m and -k-m, whose
        // sine factors cancel to first order, and evaluate the pair with
        // the stable kernels sinh(y)/y and sin(y)/y. Writing
        // chi' = k pi + delta and M = k + 2m:
        //   pair(M) = 2 cos(delta/g) sin(M pi/g) e^{beta(M^2 pi^2 + delta^2)}
        //             sinh(2 beta M pi delta)/sin(delta)
        //           + 2 cos(M pi/g) (sin(delta/g)/sin(delta))
        //             e^{beta(M^2 pi^2 + delta^2)} cosh(2 beta M pi delta)
        // with beta = ln(q~) / (2 pi^2 g); the M = 0 term is unpaired.
        let kf = (chi / PI).round();
        let delta = chi - kf * PI;
        let beta = ln_qt / (2.0 * PI * PI * g);
        let sign_k = if (kf as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        // sin(x)/x and delta/sin(delta) kernels, stable at 0
        let sinc = |y: f64| if y.abs() < 1e-8 { 1.0 - y * y / 6.0 } else { y.sin() / y };
        let sinhc = |y: f64| if y.abs() < 1e-8 { 1.0 + y * y / 6.0 } else { y.sinh() / y };
        let inv_sinc_delta = 1.0 / sinc(delta);
        let m_parity = (kf as i64).rem_euclid(2);
        let mut sum = 0.0;
        if m_parity == 0 {
            // unpaired M = 0 term: sin(delta/g)/sin(delta) * q~^{expo(delta)}
            sum += (1.0 / g) * sinc(delta / g) * inv_sinc_delta * (expo(delta) * ln_qt).exp();
        }
        let mut converged = false;
        let mut m = if m_parity == 0 { 2i64 } else { 1i64 };
        for _ in 0..cfg.max_terms {
            let mf = m as f64;
            let e = (beta * (mf * mf * PI * PI + delta * delta)).exp();
            let a = 2.0 * beta * mf * PI; // sinh(a delta)/delta kernel argument
            let pair = 2.0 * (delta / g).cos() * (mf * PI / g).sin() * e * a * sinhc(a * delta)
                * inv_sinc_delta
                + 2.0 * (mf * PI / g).cos() * (1.0 / g) * sinc(delta / g) * inv_sinc_delta
                    * e
                    * (a * delta).cosh();
            sum += pair;
            let bound = 4.0 * inv_sinc_delta.abs() * (1.0 + a.abs())
                * (beta * (mf + 2.0) * (mf + 2.0) * PI * PI).exp();
            if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                converged = true;
                break;
            }
            m += 2;
        }
        if !converged {
            return Err(Error::Convergence("z_closed: m-sum term cap exceeded"));
        }
        Ok(sum * sign_k)
    }
}

/// Channel-selecting evaluator: closed channel for `tau >= 1`, open channel
/// below, so the working nome never exceeds `e^{-pi}`.
pub fn z_annulus(tau: f64, p: &CleParams, w: &WindingWeight, cfg: &SeriesConfig) -> Result<f64> {
    if tau >= 1.0 {
        z_closed(tau, p, w, cfg)
    } else {
        z_open(tau, p, w, cfg)
    }
}

/// The product `Z(tau, kappa, chi') eta(2 i tau)`, evaluated in a form whose
/// exponential prefactors cancel algebraically:
///
/// * `tau >= 1`:  `(2/g)^{1/2} sum_m [sin((chi'+2 pi m)/g)/sin chi'] q~^{(chi'+2 pi m)^2/(2 pi^2 g)}`
/// * `tau < 1`:   `(2 tau)^{-1/2} sum_p [sin((p+1)chi')/sin chi'] q^{(g/4)(p - (1-g)/g)^2}`
///
/// Unlike the naive product this stays finite for arbitrarily large `tau`
/// (the factors grow/decay like `e^{+/- pi tau/6}` individually), which the
/// half-line Laplace quadratures rely on.
pub fn z_eta_product(tau: f64, p: &CleParams, w: &WindingWeight, cfg: &SeriesConfig) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("z_eta_product: tau must be positive"));
    }
    let g = p.g;
    if tau >= 1.0 {
        return Ok((2.0 / g).sqrt() * closed_channel_sum(tau, p, w, cfg)?);
    }
    // open-channel form: exponents (g/4)(p - (1-g)/g)^2 are >= 0
    let ln_q = -PI / tau;
    let center = (1.0 - g) / g;
    let use_direct = w.chi_prime.sin().abs() >= 1e-8;
    let sin_chi = w.chi_prime.sin();
    let cos_chi = w.chi_prime.cos();
    let weight = |idx: i64| -> f64 {
        if use_direct {
            ((idx + 1) as f64 * w.chi_prime).sin() / sin_chi
        } else {
            let (order, sign) = if idx >= 0 {
                (idx, 1.0)
            } else if idx == -1 {
                return 0.0;
            } else {
                (-idx - 2, -1.0)
            };
            let mut um1 = 0.0;
            let mut u = 1.0;
            for _ in 0..order {
                let next = 2.0 * cos_chi * u - um1;
                um1 = u;
                u = next;
            }
            sign * u
        }
    };
    let mut sum = 0.0;
    let mut converged = false;
    for k in 0..cfg.max_terms as i64 {
        let idx = if k % 2 == 0 { k / 2 } else { -(k / 2) - 1 };
        let pf = idx as f64;
        let d = pf - center;
        sum += weight(idx) * (g / 4.0 * d * d * ln_q).exp();
        if k >= 4 && k % 2 == 0 {
            // the set {-n..n} is complete; |center| < 1/2
            let next = pf.abs() + 1.0;
            let worst = (next - 0.5).max(0.0);
            let bound = 2.0 * (next + 1.0) * (g / 4.0 * worst * worst * ln_q).exp();
            if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence("z_eta_product: p-sum term cap exceeded"));
    }
    Ok(sum / (2.0 * tau).sqrt())
}

/// Cardy-type annulus partition function of the self-avoiding loop:
/// `prod (1-q^r)^{-1} sum_k k (-1)^{k-1} q^{3k^2/2 - k + 1/8}`, `q = e^{-pi/tau}`.
pub fn z_cardy(tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("z_cardy: tau must be positive"));
    }
    if tau >= 1.0 {
        // the alternating k-sum cancels down to O(e^{-pi tau/6}) of its
        // leading terms, so divide the resummed product by eta instead
        let z = cardy_eta_product(tau, cfg)? / dedekind_eta(2.0 * tau, cfg)?;
        if !z.is_finite() {
            return Err(Error::Convergence("z_cardy: eta underflow at large tau"));
        }
        return Ok(z);
    }
    let ln_q = -PI / tau;
    let expo = |kf: f64| 1.5 * kf * kf - kf + 0.125;
    let mut sum = 0.0;
    let mut converged = false;
    for j in 0..cfg.max_terms as i64 {
        let k = if j % 2 == 0 { j / 2 + 1 } else { -(j / 2) - 1 };
        let kf = k as f64;
        let sign = if (k - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sum += kf * sign * (expo(kf) * ln_q).exp();
        // check once the pair {k, -k} is complete; positive k has the
        // smaller exponent 3k^2/2 - k, so it bounds both tail wings
        if j >= 3 && j % 2 == 1 {
            let next = (j / 2 + 2) as f64;
            let bound = 4.0 * next * (expo(next) * ln_q).exp();
            if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence("z_cardy: k-sum term cap exceeded"));
    }
    Ok(inv_euler_product(0.5 / tau, cfg)? * sum)
}

/// The product `z_cardy(tau) eta(2 i tau)` in its cancelled form
/// `(2 tau)^{-1/2} S(a)` with `S(a) = sum_k k (-1)^{k-1} e^{-a(k-1/3)^2}`
/// and `a = 3 pi/(2 tau)`, stable at large `tau` where the factors
/// individually over/underflow.
pub fn cardy_eta_product(tau: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain("cardy_eta_product: tau must be positive"));
    }
    let a = 1.5 * PI / tau;
    let sum = if tau < 1.0 {
        // direct k-sum; terms decay fast since a is large
        let mut sum = 0.0;
        let mut converged = false;
        for j in 0..cfg.max_terms as i64 {
            let k = if j % 2 == 0 { j / 2 + 1 } else { -(j / 2) - 1 };
            let kf = k as f64;
            let sign = if (k - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sum += kf * sign * (-a * (kf - 1.0 / 3.0) * (kf - 1.0 / 3.0)).exp();
            // check once the pair {k, -k} is complete; the positive wing
            // (k - 1/3)^2 decays slower and bounds both tails
            if j >= 3 && j % 2 == 1 {
                let next = (j / 2 + 2) as f64;
                let bound = 4.0 * next * (-a * (next - 1.0 / 3.0) * (next - 1.0 / 3.0)).exp();
                if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return Err(Error::Convergence("cardy_eta_product: k-sum term cap exceeded"));
        }
        sum
    } else {
        // Poisson resummation of S(a), free of the alternating-sum
        // cancellation that ruins the direct form as q -> 1:
        //   S(a) = sqrt(pi/a) sum_{j>=1} e^{-b^2/(4a)}
        //          * 2 [ (b/(2a)) sin(b/3) - cos(b/3)/3 ],  b = (2j-1) pi
        let mut sum = 0.0;
        let mut converged = false;
        for j in 1..=cfg.max_terms {
            let b = (2 * j - 1) as f64 * PI;
            let e = (-b * b / (4.0 * a)).exp();
            sum += e * 2.0 * ((b / (2.0 * a)) * (b / 3.0).sin() - (b / 3.0).cos() / 3.0);
            let bn = (2 * j + 1) as f64 * PI;
            let bound = (-bn * bn / (4.0 * a)).exp() * 2.0 * (bn / (2.0 * a) + 1.0);
            if bound == 0.0 || bound < cfg.rel_tol * sum.abs() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence("cardy_eta_product: resummation cap exceeded"));
        }
        (PI / a).sqrt() * sum
    };
    Ok(sum / (2.0 * tau).sqrt())
}

/// `Z(tau, kappa, chi') / Z(tau, kappa, chi)`: the generating value
/// `E[(n'/n)^N]` of the non-contractible loop count.
pub fn nesting_ratio(tau: f64, p: &CleParams, w: &WindingWeight) -> Result<f64> {
    let cfg = SeriesConfig::default();
    if (w.chi_prime - p.chi).abs() == 0.0 {
        return Ok(1.0);
    }
    let num = z_annulus(tau, p, w, &cfg)?;
    let den = z_annulus(tau, p, &WindingWeight::new(p.chi), &cfg)?;
    Ok(num / den)
}

/// Closed form of `int_0^inf e^{-t tau} Z(tau,kappa,chi') eta(2 i tau) dtau`:
/// `sqrt(pi) sinh(sqrt(kappa pi t/4)) / (sqrt(2t) (cosh(sqrt(4 pi t/kappa)) - cos chi'))`.
pub fn z_eta_laplace_closed(t: f64, p: &CleParams, w: &WindingWeight) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain("z_eta_laplace_closed: t must be positive"));
    }
    let num = PI.sqrt() * (p.kappa * PI * t / 4.0).sqrt().sinh();
    let den = (2.0 * t).sqrt() * ((4.0 * PI * t / p.kappa).sqrt().cosh() - w.chi_prime.cos());
    Ok(num / den)
}
