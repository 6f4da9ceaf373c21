//! The verification suite: every acceptance identity as a named check with
//! its pinned tolerance. The `verify` subcommand and the acceptance test
//! target both run through this registry.

use std::f64::consts::PI;
use std::time::Instant;

use annulus_core::gmc::{parallel, CylinderSpec};
use annulus_core::laws::{
    annulus_length_moment, ba_modulus_density, cle_mod_density, cle_mod_mgf, cr_moment,
    default_modulus_grid, gmc_ratio_cf, lateral_ratio_cf, lf_pair_moment_via_ratio_law,
    m1_hitting_time_transform, mod_cr_factor, nested_expectation,
    nested_expectation_partition_closed, nested_expectation_partition_side, LqgParams,
    ModulusWeight,
};
use annulus_core::qseries::{
    cardy_eta_product, nesting_ratio, z_closed, z_eta_laplace_closed, z_open, CleParams,
    WindingWeight,
};
use annulus_core::samplers::{
    ks_distance, ks_two_sample, ks_two_sample_critical, sample_density, table_cdf, PathConfig,
    RngStream,
};
use annulus_core::specfun::{dedekind_eta, gamma_one_plus_ix, jacobi_theta1, SeriesConfig};
use annulus_core::transforms::{integrate_halfline, Grid, QuadratureConfig};

/// One verified identity.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The identity the check verifies.
    pub identity: String,
    pub computed: f64,
    pub reference: f64,
    /// Relative tolerance unless the name says otherwise.
    pub tolerance: f64,
    pub passed: bool,
    pub wall_ms: u128,
}

/// Settings shared by all checks.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    /// Multiplies every tolerance; 1.0 reproduces the published suite.
    pub tol_scale: f64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol_scale: 1.0,
            threads: 1,
        }
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub suite: &'static str,
    pub run: fn(&RunConfig) -> Vec<CheckResult>,
}

fn result(
    name: String,
    identity: &str,
    computed: f64,
    reference: f64,
    rel_tol: f64,
    started: Instant,
) -> CheckResult {
    let denom = reference.abs().max(1e-300);
    let passed = (computed - reference).abs() <= rel_tol * denom;
    CheckResult {
        name,
        identity: identity.to_string(),
        computed,
        reference,
        tolerance: rel_tol,
        passed,
        wall_ms: started.elapsed().as_millis(),
    }
}

// absolute comparison, for MC brackets where the band is the 3-sigma width
fn result_abs(
    name: String,
    identity: &str,
    computed: f64,
    reference: f64,
    abs_tol: f64,
    started: Instant,
) -> CheckResult {
    CheckResult {
        name,
        identity: identity.to_string(),
        computed,
        reference,
        tolerance: abs_tol,
        passed: (computed - reference).abs() <= abs_tol,
        wall_ms: started.elapsed().as_millis(),
    }
}

fn scfg() -> SeriesConfig {
    SeriesConfig::default()
}

fn qcfg() -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_subdivisions: 1 << 15,
        tail_decay_hint: None,
    }
}

fn c01_special_function_identities(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-12 * cfg.tol_scale;
    for &tau in &[0.2, 0.37, 1.0, 2.7, 5.0] {
        let t0 = Instant::now();
        let lhs = dedekind_eta(1.0 / tau, &scfg()).unwrap();
        let rhs = tau.sqrt() * dedekind_eta(tau, &scfg()).unwrap();
        out.push(result(
            format!("c01.eta-modular tau={tau}"),
            "eta(i/tau) = sqrt(tau) eta(i tau)",
            lhs,
            rhs,
            tol,
            t0,
        ));
        let t0 = Instant::now();
        let lhs = jacobi_theta1(1.0 / 3.0, tau, &scfg()).unwrap();
        let rhs = 3.0f64.sqrt() * dedekind_eta(3.0 * tau, &scfg()).unwrap();
        out.push(result(
            format!("c01.theta-pentagonal tau={tau}"),
            "theta_1(1/3, i tau) = sqrt(3) eta(3 i tau)",
            lhs,
            rhs,
            tol,
            t0,
        ));
    }
    out
}

fn c02_modular_invariance(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-10 * cfg.tol_scale;
    for &kappa in &[2.9, 3.3, 4.0] {
        let p = CleParams::new(kappa).unwrap();
        for &tau in &[0.4, 1.0, 2.5] {
            for (label, chi) in [("0.3", 0.3), ("chi", p.chi), ("1.2", 1.2)] {
                let t0 = Instant::now();
                let w = WindingWeight::new(chi);
                let zo = z_open(tau, &p, &w, &scfg()).unwrap();
                let zc = z_closed(tau, &p, &w, &scfg()).unwrap();
                out.push(result(
                    format!("c02.open-closed kappa={kappa} tau={tau} chi'={label}"),
                    "open-channel and closed-channel series agree",
                    zo,
                    zc,
                    tol,
                    t0,
                ));
            }
        }
    }
    out
}

fn c03_laplace_transforms(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-8 * cfg.tol_scale;
    for &a in &[0.5, 2.0] {
        let t0 = Instant::now();
        let q = integrate_halfline(
            |t| (-a * t).exp() * dedekind_eta(t, &scfg()).unwrap(),
            &qcfg(),
        )
        .unwrap();
        let closed =
            (PI / a).sqrt() * (2.0 * (PI * a / 3.0).sqrt()).sinh() / (3.0 * PI * a).sqrt().cosh();
        out.push(result(
            format!("c03.eta-laplace a={a}"),
            "int e^{-a tau} eta(i tau) dtau closed form",
            q.value,
            closed,
            tol,
            t0,
        ));
        let t0 = Instant::now();
        let (x, b) = (0.25, 0.5);
        let q = integrate_halfline(
            |t| (-a * t).exp() * jacobi_theta1(x, b * t, &scfg()).unwrap(),
            &qcfg(),
        )
        .unwrap();
        let r = (PI * a / b).sqrt();
        let closed = (PI / (a * b)).sqrt() * (2.0 * x * r).sinh() / r.cosh();
        out.push(result(
            format!("c03.theta-laplace a={a} x=0.25 b=0.5"),
            "int e^{-a tau} theta_1(x, i b tau) dtau closed form",
            q.value,
            closed,
            tol,
            t0,
        ));
    }
    out
}

fn c04_z_eta_laplace(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-6 * cfg.tol_scale;
    for &t in &[1.0, 3.0] {
        for &kappa in &[3.0, 3.7] {
            let p = CleParams::new(kappa).unwrap();
            for (label, chi) in [("chi", p.chi), ("0.7", 0.7)] {
                let t0 = Instant::now();
                let w = WindingWeight::new(chi);
                let q = integrate_halfline(
                    |tau| {
                        (-t * tau).exp()
                            * annulus_core::qseries::z_eta_product(tau, &p, &w, &scfg()).unwrap()
                    },
                    &qcfg(),
                )
                .unwrap();
                let closed = z_eta_laplace_closed(t, &p, &w).unwrap();
                out.push(result(
                    format!("c04.partition-laplace t={t} kappa={kappa} chi'={label}"),
                    "quadrature of e^{-t tau} Z eta(2 i tau) equals its closed form",
                    q.value,
                    closed,
                    tol,
                    t0,
                ));
            }
        }
    }
    out
}

fn c05_kpz_identities(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-6 * cfg.tol_scale;
    for (label, kind) in [
        ("ba gamma=sqrt(8/3)", ModulusWeight::ba()),
        (
            "qa gamma=1.7",
            ModulusWeight::qa(LqgParams::new(1.7).unwrap()).unwrap(),
        ),
    ] {
        let gamma = kind.gamma();
        let g2 = gamma * gamma;
        for &x in &[0.5, 1.0, 2.0] {
            let t0 = Instant::now();
            let moment = annulus_length_moment(&kind, x);
            let rhs =
                (moment * (2.0 * (g2 * PI * x / 4.0).sinh() / (PI * gamma * x)) / gamma_one_plus_ix(x))
                    .re;
            let lhs = integrate_halfline(
                |tau| {
                    let damp = (-PI * g2 * x * x * tau / 4.0).exp();
                    if damp == 0.0 || tau == 0.0 {
                        0.0
                    } else {
                        damp * kind.weight(tau).unwrap()
                    }
                },
                &qcfg(),
            )
            .unwrap()
            .value;
            out.push(result(
                format!("c05.weight-transform {label} x={x}"),
                "Laplace transform of the modulus weight equals its length-moment form",
                lhs,
                rhs,
                tol,
                t0,
            ));
        }
    }
    // the double Mellin integral against pi Gamma(1+ix)/cosh(pi x) at x = 1
    let t0 = Instant::now();
    let x = 1.0;
    let icfg = QuadratureConfig {
        abs_tol: 1e-11,
        rel_tol: 1e-9,
        max_subdivisions: 1 << 14,
        tail_decay_hint: None,
    };
    let ocfg = QuadratureConfig {
        abs_tol: 1e-10,
        rel_tol: 1e-8,
        max_subdivisions: 1 << 14,
        tail_decay_hint: None,
    };
    let inner = |a: f64, trig: fn(f64) -> f64| {
        integrate_halfline(move |b| trig(x * b.ln()) / (b.sqrt() * (a + b)), &icfg)
            .unwrap()
            .value
    };
    // the a < 1e-8 head contributes less than pi * 1e-8 and keeps the inner
    // quadrature out of its underflow regime
    let outer = |trig: fn(f64) -> f64| {
        integrate_halfline(
            |a| {
                if a < 1e-8 {
                    0.0
                } else {
                    a.sqrt() * (-a).exp() * inner(a, trig)
                }
            },
            &ocfg,
        )
        .unwrap()
        .value
    };
    let got = outer(f64::cos);
    let want = (gamma_one_plus_ix(x) * (PI / (PI * x).cosh())).re;
    out.push(result(
        "c05.mellin-real x=1".into(),
        "double integral of a e^{-a} b^{ix}/(sqrt(ab)(a+b)) equals pi Gamma(1+ix)/cosh(pi x)",
        got,
        want,
        tol,
        t0,
    ));
    let t0 = Instant::now();
    let got_im = outer(f64::sin);
    let want_im = (gamma_one_plus_ix(x) * (PI / (PI * x).cosh())).im;
    out.push(result(
        "c05.mellin-imag x=1".into(),
        "imaginary part of the same double integral",
        got_im,
        want_im,
        tol,
        t0,
    ));
    out
}

fn c06_mgf_normalization_and_round_trip(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol0 = 1e-10 * cfg.tol_scale;
    let tol_rt = 1e-4 * cfg.tol_scale;
    for &kappa in &[2.9, 3.5, 4.0] {
        let p = CleParams::new(kappa).unwrap();
        let grid = default_modulus_grid(&p, 8192);
        for j in 1..=3u32 {
            let t0 = Instant::now();
            out.push(result(
                format!("c06.mgf-at-zero kappa={kappa} j={j}"),
                "modulus MGF equals 1 at lambda = 0",
                cle_mod_mgf(0.0, &p, j).unwrap(),
                1.0,
                tol0,
                t0,
            ));
            let t0 = Instant::now();
            let d = cle_mod_density(&p, j, &grid).unwrap();
            let lambda = 0.5;
            let got = d.integrate(|tau| (-2.0 * PI * lambda * tau).exp());
            let want = cle_mod_mgf(lambda, &p, j).unwrap();
            out.push(result(
                format!("c06.density-mgf-round-trip kappa={kappa} j={j}"),
                "tabulated density transforms back to the closed-form MGF",
                got,
                want,
                tol_rt,
                t0,
            ));
        }
    }
    out
}

fn c07_mod_cr_factorization(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-10 * cfg.tol_scale;
    for &kappa in &[3.3, 3.9] {
        let p = CleParams::new(kappa).unwrap();
        for &lambda in &[0.2, 0.4] {
            let t0 = Instant::now();
            let f = mod_cr_factor(lambda, &p).unwrap();
            for j in 1..=3u32 {
                let ratio =
                    cr_moment(lambda, &p, j).unwrap() / cle_mod_mgf(lambda, &p, j).unwrap();
                out.push(result(
                    format!("c07.cr-factor kappa={kappa} lambda={lambda} j={j}"),
                    "CR moment / modulus MGF is independent of j",
                    ratio,
                    f,
                    tol,
                    t0,
                ));
            }
        }
    }
    out
}

fn c08_hitting_time_representation(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-10 * cfg.tol_scale;
    let p = CleParams::new(3.5).unwrap();
    let shift = p.kappa * p.u0() * p.u0() / 8.0;
    for &lambda in &[0.3, 1.0] {
        let t0 = Instant::now();
        let got = m1_hitting_time_transform(lambda - shift, &p)
            / m1_hitting_time_transform(-shift, &p);
        let want = cle_mod_mgf(lambda, &p, 1).unwrap();
        out.push(result(
            format!("c08.hitting-product kappa=3.5 lambda={lambda}"),
            "exit/last-zero product transform reproduces the modulus MGF (tilt-shifted)",
            got,
            want,
            tol,
            t0,
        ));
    }
    // path Monte Carlo: 1e5 paths at dt = 1e-5, pinned seed 8
    let pcfg = PathConfig {
        dt: 1e-5,
        max_time: 1e3,
    };
    let n = 100_000u64;
    let streams = 64;
    let t0 = Instant::now();
    let (pairs, _censored) = parallel::path_pair_samples_streams(n, 8, streams, cfg.threads, |rng| {
        annulus_core::samplers::sample_exit_and_last_zero(&pcfg, rng)
    })
    .unwrap();
    let (mean_y, se_y) = mean_se(pairs.iter().map(|&(y, _)| (-0.5 * y).exp()));
    let (mean_t, se_t) = mean_se(pairs.iter().map(|&(_, t)| (-0.5 * t).exp()));
    out.push(result_abs(
        "c08.path-exit a=0 theta=1".into(),
        "E[e^{-Y_0/2}] brackets 1/cosh(1) within 3 sigma",
        mean_y,
        1.0 / 1.0f64.cosh(),
        3.0 * se_y * cfg.tol_scale,
        t0,
    ));
    out.push(result_abs(
        "c08.path-last-zero theta=1".into(),
        "E[e^{-T_0/2}] brackets tanh(1) within 3 sigma",
        mean_t,
        1.0f64.tanh(),
        3.0 * se_t * cfg.tol_scale,
        t0,
    ));
    let t0 = Instant::now();
    let a = p.kappa / 4.0;
    let (ys, _censored) = parallel::path_samples_streams(n, 80, streams, cfg.threads, |rng| {
        annulus_core::samplers::sample_bm_exit(a, &pcfg, rng)
    })
    .unwrap();
    let (mean_ya, se_ya) = mean_se(ys.iter().map(|&y| (-0.5 * y).exp()));
    out.push(result_abs(
        format!("c08.path-exit a={a} theta=1"),
        "E[e^{-Y_a/2}] brackets cosh(a)/cosh(1) within 3 sigma",
        mean_ya,
        a.cosh() / 1.0f64.cosh(),
        3.0 * se_ya * cfg.tol_scale,
        t0,
    ));
    out
}

fn c09_nested_loop_identity(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-4 * cfg.tol_scale;
    let p = CleParams::new(3.5).unwrap();
    let t = 1.0;
    for (label, chi) in [("chi", p.chi), ("0.7", 0.7)] {
        let t0 = Instant::now();
        let w = WindingWeight::new(chi);
        let lhs = nested_expectation(t, &p, &w, 40).unwrap();
        let rhs = nested_expectation_partition_side(t, &p, &w).unwrap();
        out.push(result(
            format!("c09.nested-sum kappa=3.5 chi'={label} t=1"),
            "truncated j-sum of tilted-exponential expectations equals the partition side",
            lhs.value,
            rhs,
            tol,
            t0,
        ));
        let t0 = Instant::now();
        let closed = nested_expectation_partition_closed(t, &p, &w).unwrap();
        out.push(result(
            format!("c09.partition-closed chi'={label}"),
            "quadrature partition side equals its closed form",
            rhs,
            closed,
            1e-6 * cfg.tol_scale,
            t0,
        ));
    }
    let t0 = Instant::now();
    let unit = nesting_ratio(1.3, &p, &WindingWeight::new(p.chi)).unwrap();
    out.push(CheckResult {
        name: "c09.nesting-ratio-at-chi".into(),
        identity: "Z(tau,kappa,chi)/Z(tau,kappa,chi) is exactly 1".into(),
        computed: unit,
        reference: 1.0,
        tolerance: 0.0,
        passed: unit == 1.0,
        wall_ms: t0.elapsed().as_millis(),
    });
    out
}

fn c10_cardy_proportionality(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-6 * cfg.tol_scale;
    let xs = [0.5, 1.0, 1.5, 2.0];
    let mut consts = Vec::new();
    let t0 = Instant::now();
    for &x in &xs {
        let q = integrate_halfline(
            |t| {
                let damp = (-2.0 * PI * x * x * t / 3.0).exp();
                if damp == 0.0 {
                    0.0
                } else {
                    damp * cardy_eta_product(t, &scfg()).unwrap()
                }
            },
            &qcfg(),
        )
        .unwrap();
        let shape = (2.0 * PI * x / 3.0).sinh() / (x * (PI * x).cosh() * (PI * x).cosh());
        consts.push(q.value / shape);
    }
    for i in 1..consts.len() {
        out.push(result(
            format!("c10.cardy-constant x={} vs x={}", xs[i], xs[0]),
            "Laplace transform of eta z_cardy is proportional to sinh(2 pi x/3)/(x cosh^2(pi x))",
            consts[i],
            consts[0],
            tol,
            t0,
        ));
    }
    out
}

fn c11_bootstrap_consistency(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = 1e-4 * cfg.tol_scale;
    for &gamma in &[1.2, (8.0f64 / 3.0).sqrt()] {
        let lqg = LqgParams::new(gamma).unwrap();
        for &mu0 in &[0.7, 1.3] {
            let t0 = Instant::now();
            let b = annulus_core::laws::bootstrap_rhs(1.0, &lqg, mu0).unwrap();
            out.push(result(
                format!("c11.bootstrap-raw-vs-reduced gamma={gamma:.4} mu0={mu0}"),
                "spectral-form integral equals the reduced real form",
                b.spectral,
                b.reduced,
                1e-6 * cfg.tol_scale,
                t0,
            ));
            let t0 = Instant::now();
            let lhs = lf_pair_moment_via_ratio_law(1.0, &lqg, mu0).unwrap();
            out.push(result(
                format!("c11.bootstrap-vs-ratio-law gamma={gamma:.4} mu0={mu0}"),
                "bootstrap integral equals the length-factorization route (unit constant)",
                lhs,
                b.reduced,
                tol,
                t0,
            ));
        }
    }
    out
}

fn c12_gmc_ratio_mc(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let gamma = (8.0f64 / 3.0).sqrt();
    let lqg = LqgParams::new(gamma).unwrap();
    let xs = [0.0, 0.5, 1.0, 2.0];
    for &tau in &[0.5, 1.0] {
        let spec = CylinderSpec::new(tau); // n_boundary = 2^10, m_cut = 2^9
        let t0 = Instant::now();
        let run = parallel::estimate_log_ratio_cf_streams(
            &spec,
            gamma,
            &xs,
            1 << 14,
            12,
            64,
            cfg.threads,
        )
        .unwrap();
        let t_done = Instant::now();
        out.push(CheckResult {
            name: format!("c12.cf-at-zero tau={tau}"),
            identity: "estimate at x = 0 is exactly 1".into(),
            computed: run.estimates_re[0],
            reference: 1.0,
            tolerance: 0.0,
            passed: run.estimates_re[0] == 1.0 && run.std_errs_re[0] == 0.0,
            wall_ms: (t_done - t0).as_millis(),
        });
        for i in 1..xs.len() {
            let want = gmc_ratio_cf(xs[i], &lqg, tau).unwrap();
            out.push(result_abs(
                format!("c12.cf-bracket tau={tau} x={}", xs[i]),
                "MC estimate brackets the closed-form CF within 3 sigma",
                run.estimates_re[i],
                want,
                3.0 * run.std_errs_re[i] * cfg.tol_scale,
                t0,
            ));
        }
    }
    out
}

fn c13_lateral_ratio_mc(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let gamma = (8.0f64 / 3.0).sqrt();
    let lqg = LqgParams::new(gamma).unwrap();
    // two-sample KS between tau = 0.5 and tau = 1 at the default resolution
    let n = 10_000u64;
    let t0 = Instant::now();
    let mut at_half = parallel::lateral_ratio_samples_streams(
        &CylinderSpec::new(0.5),
        gamma,
        n,
        13,
        32,
        cfg.threads,
    )
    .unwrap();
    let mut at_one = parallel::lateral_ratio_samples_streams(
        &CylinderSpec::new(1.0),
        gamma,
        n,
        130,
        32,
        cfg.threads,
    )
    .unwrap();
    let d = ks_two_sample(&mut at_half, &mut at_one);
    let crit = ks_two_sample_critical(n as usize, n as usize, 0.01);
    out.push(result_abs(
        "c13.lateral-ks tau=0.5 vs tau=1".into(),
        "lateral ratio law does not depend on tau (KS, 1% level)",
        d,
        0.0,
        crit * cfg.tol_scale,
        t0,
    ));
    // CF bracket at x = 1 at high transverse resolution, where the chaos
    // truncation bias sits well inside the band
    let t0 = Instant::now();
    let spec = CylinderSpec {
        tau: 1.0,
        n_boundary: 1 << 17,
        m_cut: 1 << 16,
        k_cut: None,
    };
    let samples =
        parallel::lateral_ratio_samples_streams(&spec, gamma, 2500, 131, 32, cfg.threads).unwrap();
    let (mean, se) = mean_se(samples.iter().map(|&r| r.ln().cos()));
    let want = lateral_ratio_cf(1.0, &lqg);
    out.push(result_abs(
        "c13.lateral-cf x=1".into(),
        "empirical lateral CF brackets the log-logistic closed form within 3 sigma",
        mean,
        want,
        3.0 * se * cfg.tol_scale,
        t0,
    ));
    out
}

fn c14_ba_modulus_end_to_end(cfg: &RunConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let grid = Grid::Uniform {
        min: 1e-3,
        max: 40.0,
        count: 1024,
    };
    let t0 = Instant::now();
    let d_ab = ba_modulus_density(1.0, 2.0, &grid).unwrap();
    let d_ba = ba_modulus_density(2.0, 1.0, &grid).unwrap();
    let mut worst = 0.0f64;
    for i in 0..d_ab.grid.len() {
        let diff = (d_ab.values[i] - d_ba.values[i]).abs() / (1.0 + d_ab.values[i].abs());
        worst = worst.max(diff);
    }
    out.push(result_abs(
        "c14.ba-symmetry (a,b)=(1,2)".into(),
        "modulus density is symmetric under swapping the boundary lengths",
        worst,
        0.0,
        1e-6 * cfg.tol_scale,
        t0,
    ));
    let t0 = Instant::now();
    out.push(result_abs(
        "c14.ba-mass".into(),
        "normalized table has unit trapezoid mass",
        d_ab.normalized_mass(),
        1.0,
        1e-6 * cfg.tol_scale,
        t0,
    ));
    let t0 = Instant::now();
    let n = 100_000usize;
    let mut rng = RngStream::new(14, 0);
    let mut samples: Vec<f64> = (0..n)
        .map(|_| sample_density(&d_ab, &mut rng).unwrap())
        .collect();
    let ks = ks_distance(&mut samples, |x| table_cdf(&d_ab, x));
    let crit = 1.628 / (n as f64).sqrt();
    out.push(result_abs(
        "c14.ba-sampler-ks".into(),
        "inverse-CDF samples pass KS against the table (1% level)",
        ks,
        0.0,
        crit * cfg.tol_scale,
        t0,
    ));
    out
}

fn mean_se<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let mut n = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    (mean, (m2 / (n as f64 - 1.0) / n as f64).sqrt())
}

/// The full criterion registry, in order.
pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: "c01",
            title: "special-function identities (eta modular, theta pentagonal)",
            suite: "specfun",
            run: c01_special_function_identities,
        },
        Criterion {
            id: "c02",
            title: "modular invariance of the two-channel partition function",
            suite: "partition",
            run: c02_modular_invariance,
        },
        Criterion {
            id: "c03",
            title: "eta and theta Laplace transforms",
            suite: "specfun",
            run: c03_laplace_transforms,
        },
        Criterion {
            id: "c04",
            title: "closed form of the partition-function Laplace transform",
            suite: "partition",
            run: c04_z_eta_laplace,
        },
        Criterion {
            id: "c05",
            title: "weight-transform identities and the Mellin double integral",
            suite: "laws",
            run: c05_kpz_identities,
        },
        Criterion {
            id: "c06",
            title: "modulus MGF normalization and density round trip",
            suite: "laws",
            run: c06_mgf_normalization_and_round_trip,
        },
        Criterion {
            id: "c07",
            title: "modulus/conformal-radius factorization",
            suite: "laws",
            run: c07_mod_cr_factorization,
        },
        Criterion {
            id: "c08",
            title: "hitting-time representation (transform and path MC)",
            suite: "mc",
            run: c08_hitting_time_representation,
        },
        Criterion {
            id: "c09",
            title: "nested-loop expectation identity",
            suite: "laws",
            run: c09_nested_loop_identity,
        },
        Criterion {
            id: "c10",
            title: "Cardy-type Laplace proportionality",
            suite: "partition",
            run: c10_cardy_proportionality,
        },
        Criterion {
            id: "c11",
            title: "one-point bootstrap consistency",
            suite: "laws",
            run: c11_bootstrap_consistency,
        },
        Criterion {
            id: "c12",
            title: "boundary-length-ratio CF Monte Carlo",
            suite: "mc",
            run: c12_gmc_ratio_mc,
        },
        Criterion {
            id: "c13",
            title: "lateral-ratio Monte Carlo",
            suite: "mc",
            run: c13_lateral_ratio_mc,
        },
        Criterion {
            id: "c14",
            title: "Brownian-annulus modulus density end to end",
            suite: "laws",
            run: c14_ba_modulus_end_to_end,
        },
    ]
}

/// Criteria belonging to a suite name (`all` selects everything).
pub fn suite(name: &str) -> Option<Vec<Criterion>> {
    let all = criteria();
    match name {
        "all" => Some(all),
        "specfun" | "partition" | "laws" | "mc" => {
            Some(all.into_iter().filter(|c| c.suite == name).collect())
        }
        _ => None,
    }
}
