//! Numerical infrastructure: double-exponential half-line quadrature,
//! characteristic-function inversion, tilted convolution of tabulated
//! densities, and inverse-CDF lookup.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

crate::math::use_float_shim!();

use core::f64::consts::PI;

/// Decay of an integrand at infinity; lets the quadrature pick its
/// truncation point.
#[derive(Clone, Copy, Debug)]
pub enum DecayHint {
    /// `|f(t)| <~ e^{-rate t}`
    Exponential(f64),
    /// `|f(t)| <~ e^{-rate t^2}`
    Gaussian(f64),
}

/// Tolerances for [`integrate_halfline`].
#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on the total number of integrand evaluations.
    pub max_subdivisions: usize,
    pub tail_decay_hint: Option<DecayHint>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1 << 14,
            tail_decay_hint: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |t: f64| t > 0.0 && t <= 1e-2;
        if !ok(self.abs_tol) || !ok(self.rel_tol) {
            return Err(Error::Domain("quadrature tolerances must be in (0, 1e-2]"));
        }
        if self.max_subdivisions < 64 {
            return Err(Error::Domain("max_subdivisions must be >= 64"));
        }
        Ok(())
    }
}

/// Value and error estimate returned by the quadrature.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub err_est: f64,
    pub evaluations: usize,
}

/// Adaptive double-exponential (exp-sinh) integration of `f` over `(0, inf)`.
///
/// The substitution `t = exp(pi/2 sinh(u))` clusters nodes near 0 and grows
/// double-exponentially at the far end, so integrable endpoint singularities
/// like `t^{-1/2}` and exponential or Gaussian tails converge
/// superalgebraically. Levels double the node density until two successive
/// levels agree within tolerance.
pub fn integrate_halfline<F: FnMut(f64) -> f64>(mut f: F, cfg: &QuadratureConfig) -> Result<Quadrature> {
    cfg.validate()?;
    // Truncation of the u-axis: |u| <= u_max keeps both the t -> 0 and
    // t -> inf transformed tails below machine precision even for
    // integrable endpoint singularities as strong as t^{-3/4}.
    let u_max = 6.0f64;
    let mut evals = 0usize;
    let eval = |u: f64, f: &mut F| -> f64 {
        let s = (PI / 2.0) * u.sinh();
        // guard exp overflow; the weight kills these nodes anyway
        if s > 690.0 {
            return 0.0;
        }
        let t = s.exp();
        let w = t * (PI / 2.0) * u.cosh();
        if !w.is_finite() {
            return 0.0;
        }
        let v = f(t);
        if v == 0.0 {
            return 0.0;
        }
        let tv = v * w;
        if tv.is_finite() {
            tv
        } else {
            0.0
        }
    };

    // level 0: h = 1
    let mut h = 1.0f64;
    let mut nodes_sum = eval(0.0, &mut f);
    evals += 1;
    let mut k = 1;
    loop {
        let u = k as f64 * h;
        if u > u_max {
            break;
        }
        nodes_sum += eval(u, &mut f) + eval(-u, &mut f);
        evals += 2;
        k += 1;
    }
    let mut prev = h * nodes_sum;
    let mut level = 0;

    loop {
        // refine: add midpoints at the new half-step
        h *= 0.5;
        level += 1;
        let mut add = 0.0;
        let mut k = 1;
        loop {
            let u = k as f64 * h;
            if u > u_max {
                break;
            }
            add += eval(u, &mut f) + eval(-u, &mut f);
            evals += 2;
            k += 2; // only odd multiples are new
        }
        let cur = prev / 2.0 + h * add;
        // the DE error roughly squares per level, so the level-to-level
        // difference is a conservative estimate for the finer level;
        // oscillatory integrands can alias into false agreement on coarse
        // levels, hence the minimum level count before accepting
        let err = (cur - prev).abs();
        let tol = cfg.abs_tol.max(cfg.rel_tol * cur.abs());
        if err <= tol && level >= 5 {
            return Ok(Quadrature {
                value: cur,
                err_est: err,
                evaluations: evals,
            });
        }
        if evals >= cfg.max_subdivisions {
            return Err(Error::Accuracy {
                what: "integrate_halfline failed to meet tolerance",
                best: cur,
                err_est: err,
            });
        }
        prev = cur;
    }
}

/// Uniform or explicit grid specification.
#[derive(Clone, Debug)]
pub enum Grid {
    Uniform { min: f64, max: f64, count: usize },
    Explicit(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Uniform { min, max, count } => {
                if *count < 64 {
                    return Err(Error::Domain("grid count must be >= 64"));
                }
                if !(min.is_finite() && max.is_finite() && max > min) {
                    return Err(Error::Domain("grid endpoints must be finite and increasing"));
                }
                let n = *count;
                let step = (max - min) / (n - 1) as f64;
                Ok((0..n).map(|i| min + step * i as f64).collect())
            }
            Grid::Explicit(pts) => {
                if pts.len() < 64 {
                    return Err(Error::Domain("grid count must be >= 64"));
                }
                if !pts.windows(2).all(|w| w[1] > w[0] && w[0].is_finite()) {
                    return Err(Error::Domain("grid must be strictly increasing and finite"));
                }
                Ok(pts.clone())
            }
        }
    }
}

/// A tabulated probability density with its CDF, trapezoid mass,
/// and bookkeeping from construction.
#[derive(Clone, Debug)]
pub struct DensityTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Trapezoid CDF at each grid point, normalized to end at 1.
    pub cdf: Vec<f64>,
    /// Trapezoid integral of `values` over `grid` before normalization.
    pub mass: f64,
    /// Bound on the probability mass outside the grid.
    pub tail_bound: f64,
    /// Mass removed by clamping negative values to zero.
    pub clamp_mass: f64,
}

impl DensityTable {
    /// Builds a normalized table from raw nonneg-up-to-noise values.
    /// Negative entries are clamped to zero and their mass recorded.
    pub fn from_raw(grid: Vec<f64>, mut values: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Domain("grid/value length mismatch"));
        }
        if grid.len() < 64 {
            return Err(Error::Domain("density table needs >= 64 points"));
        }
        if !grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Domain("density grid must be strictly increasing"));
        }
        let mut clamp_mass = 0.0;
        for i in 0..values.len() {
            if values[i] < 0.0 {
                let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
                let right = if i + 1 < values.len() { grid[i + 1] - grid[i] } else { 0.0 };
                clamp_mass += -values[i] * 0.5 * (left + right);
                values[i] = 0.0;
            }
            if !values[i].is_finite() {
                return Err(Error::Domain("density values must be finite"));
            }
        }
        let mut cdf = vec![0.0; grid.len()];
        let mut acc = 0.0;
        for i in 1..grid.len() {
            acc += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
            cdf[i] = acc;
        }
        let mass = acc;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Accuracy {
                what: "density table mass underflow",
                best: mass,
                err_est: f64::INFINITY,
            });
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        for c in cdf.iter_mut() {
            *c /= mass;
        }
        Ok(Self {
            grid,
            values,
            cdf,
            mass,
            tail_bound: tail_bound / mass,
            clamp_mass: clamp_mass / mass,
        })
    }

    /// Trapezoid mass of the (normalized) table; 1 up to rounding.
    pub fn normalized_mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            acc += 0.5 * (self.values[i] + self.values[i - 1]) * (self.grid[i] - self.grid[i - 1]);
        }
        acc
    }

    /// Linear interpolation of the density; 0 outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let idx = match g.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (g[idx - 1], g[idx]);
        let t = (x - x0) / (x1 - x0);
        self.values[idx - 1] * (1.0 - t) + self.values[idx] * t
    }

    /// Trapezoid integral of `f(x) density(x)` over the grid.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        let mut prev = f(self.grid[0]) * self.values[0];
        for i in 1..self.grid.len() {
            let cur = f(self.grid[i]) * self.values[i];
            acc += 0.5 * (cur + prev) * (self.grid[i] - self.grid[i - 1]);
            prev = cur;
        }
        acc
    }

    /// Mean of the tabulated density.
    pub fn mean(&self) -> f64 {
        self.integrate(|x| x)
    }

    /// Piecewise-linear CDF inversion; `u` must lie in (0, 1).
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain("inverse_cdf: u must be in (0,1)"));
        }
        let cdf = &self.cdf;
        let idx = cdf.partition_point(|&c| c < u);
        if idx == 0 {
            return Ok(self.grid[0]);
        }
        if idx >= cdf.len() {
            return Ok(self.grid[cdf.len() - 1]);
        }
        let (c0, c1) = (cdf[idx - 1], cdf[idx]);
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        if c1 <= c0 {
            return Ok(x0);
        }
        Ok(x0 + (x1 - x0) * (u - c0) / (c1 - c0))
    }
}

/// Piecewise-linear CDF inversion on a normalized table.
pub fn inverse_cdf(d: &DensityTable, u: f64) -> Result<f64> {
    d.inverse_cdf(u)
}

/// Inverts a real, even characteristic function into a density table:
/// `f(s) = (1/pi) int_0^inf cos(t s) cf(t) dt` evaluated on `grid`.
///
/// `cf` must satisfy `cf(0) = 1` and be absolutely integrable.
pub fn cf_to_density<F: Fn(f64) -> f64>(cf: F, grid: &Grid) -> Result<DensityTable> {
    let pts = grid.points()?;
    let qcfg = QuadratureConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_subdivisions: 1 << 15,
        tail_decay_hint: None,
    };
    if (cf(0.0) - 1.0).abs() > 1e-10 {
        return Err(Error::Domain("cf_to_density: cf(0) must equal 1"));
    }
    let mut values = Vec::with_capacity(pts.len());
    for &s in &pts {
        let q = integrate_halfline(|t| (t * s).cos() * cf(t), &qcfg)?;
        values.push(q.value / PI);
    }
    // Tail mass outside the grid, bounded by the CF envelope at the edges:
    // record the larger of the two edge densities times a unit scale.
    let edge = values[0].abs().max(values[pts.len() - 1].abs());
    DensityTable::from_raw(pts, values, edge)
}

/// Convolution of two tabulated densities after tilting both by
/// `e^{tilt_rate x}`, renormalized. Grids must be uniform with equal step.
pub fn tilt_convolve(d1: &DensityTable, d2: &DensityTable, tilt_rate: f64) -> Result<DensityTable> {
    let h1 = uniform_step(&d1.grid)?;
    let h2 = uniform_step(&d2.grid)?;
    if (h1 - h2).abs() > 1e-12 * h1 {
        return Err(Error::Domain("tilt_convolve: grids must share the same step"));
    }
    let h = h1;
    let f: Vec<f64> = d1
        .grid
        .iter()
        .zip(&d1.values)
        .map(|(&x, &v)| v * (tilt_rate * x).exp())
        .collect();
    let g: Vec<f64> = d2
        .grid
        .iter()
        .zip(&d2.values)
        .map(|(&x, &v)| v * (tilt_rate * x).exp())
        .collect();
    let n = f.len();
    let m = g.len();
    let a0 = d1.grid[0] + d2.grid[0];
    let out_len = n + m - 1;
    let mut out = vec![0.0; out_len];
    // direct convolution; sizes here are a few thousand points
    for i in 0..n {
        let fi = f[i];
        if fi == 0.0 {
            continue;
        }
        for (j, &gj) in g.iter().enumerate() {
            out[i + j] += fi * gj;
        }
    }
    // trapezoid endpoint correction: the plain sum gives rectangle weights,
    // which is first-order wrong when the densities are nonzero at their
    // grid edges (e.g. exponential-like laws at 0)
    for (s, v) in out.iter_mut().enumerate() {
        let i_min = s.saturating_sub(m - 1);
        let i_max = s.min(n - 1);
        *v -= 0.5 * (f[i_min] * g[s - i_min] + f[i_max] * g[s - i_max]);
    }
    for v in out.iter_mut() {
        *v *= h;
    }
    let grid: Vec<f64> = (0..out_len).map(|i| a0 + h * i as f64).collect();
    let tail = d1.tail_bound + d2.tail_bound;
    DensityTable::from_raw(grid, out, tail)
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    let h = grid[1] - grid[0];
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::Domain("grid must be uniform"));
        }
    }
    Ok(h)
}
