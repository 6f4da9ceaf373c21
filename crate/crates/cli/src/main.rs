//! Command-line front end for the annulus-moduli library: evaluate any
//! formula, tabulate densities, run samplers and Monte Carlo experiments,
//! and execute the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

mod checks;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand};

use annulus_core::gmc::{parallel, CylinderSpec};
use annulus_core::laws::{
    annulus_length_moment, ba_modulus_density, ba_weight, bootstrap_rhs, cle_mod_density,
    cle_mod_mgf, cr_moment, gmc_ratio_cf, lateral_ratio_cf, lf_boundary_moment, lf_disk_mass,
    mod_cr_factor, nested_expectation, nested_expectation_partition_closed, qa_weight, rho_tau_density,
    LqgParams, ModulusWeight,
};
use annulus_core::qseries::{
    cle_params, nesting_ratio, z_annulus, z_cardy, z_closed, z_eta_laplace_closed, z_open,
    CleParams, WindingWeight,
};
use annulus_core::samplers::{
    sample_bm_exit, sample_cle_modulus_path, sample_density, sample_exit_and_last_zero,
    PathConfig, RngStream,
};
use annulus_core::specfun::{dedekind_eta, gamma_one_plus_ix, jacobi_theta1, SeriesConfig};
use annulus_core::transforms::Grid;

use output::{emit, fmt_f64, Format, Table};

#[derive(Parser)]
#[command(
    name = "annulus-moduli",
    about = "Exact laws of random annulus moduli: evaluators, densities, samplers, Monte Carlo, verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a single formula; parameters are key=value pairs.
    Eval {
        /// Target name; run `eval list` to print the catalog.
        target: String,
        /// Parameters as key=value (e.g. tau=1.0 kappa=3.5).
        params: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Tabulate a probability density on a grid.
    Density {
        /// One of: rho-tau, ba-modulus, cle-modulus.
        law: String,
        /// Parameters as key=value.
        params: Vec<String>,
        /// Grid as min,max,count (densities pick a sensible default).
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Draw samples from a law.
    Sample {
        /// One of: rho-tau, ba-modulus, cle-modulus, cle-modulus-path,
        /// bm-exit, last-zero.
        law: String,
        /// Parameters as key=value.
        params: Vec<String>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a Monte Carlo experiment.
    Mc {
        /// One of: gmc-ratio, lateral-ratio.
        experiment: String,
        /// Parameters as key=value (gamma, tau, samples, n-boundary, ...).
        params: Vec<String>,
        /// Comma-separated x values for gmc-ratio.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run the verification suite and report per-check pass/fail.
    Verify {
        /// One of: specfun, partition, laws, mc, all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Write the report as JSON to this path (atomically).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the report as CSV to this path (atomically).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Scale factor applied to every tolerance (1 = published values).
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

fn thread_count() -> usize {
    if let Ok(v) = std::env::var("ANNULUS_MODULI_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

struct Params {
    map: BTreeMap<String, f64>,
}

impl Params {
    fn parse(pairs: &[String], allowed: &[&str]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value, got `{pair}`"))?;
            if !allowed.contains(&k) {
                bail!("unknown parameter `{k}` (allowed: {})", allowed.join(", "));
            }
            let value: f64 = v
                .parse()
                .map_err(|_| anyhow!("parameter `{k}` is not a number: `{v}`"))?;
            map.insert(k.to_string(), value);
        }
        Ok(Self { map })
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| anyhow!("missing required parameter `{key}`"))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }

    fn stamp(&self, table: &mut Table) {
        for (k, v) in &self.map {
            table.param(k, fmt_f64(*v));
        }
    }
}

fn parse_grid(spec: Option<&str>, default: Grid) -> Result<Grid> {
    match spec {
        None => Ok(default),
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 3 {
                bail!("grid must be min,max,count");
            }
            Ok(Grid::Uniform {
                min: parts[0].parse()?,
                max: parts[1].parse()?,
                count: parts[2].parse()?,
            })
        }
    }
}

fn lqg_from(params: &Params) -> Result<LqgParams> {
    LqgParams::new(params.get("gamma")?).map_err(|e| anyhow!("{e}"))
}

fn cle_from(params: &Params) -> Result<CleParams> {
    cle_params(params.get("kappa")?).map_err(|e| anyhow!("{e}"))
}

const EVAL_TARGETS: &[&str] = &[
    "eta",
    "theta1",
    "gamma1ix",
    "cle-params",
    "z-open",
    "z-closed",
    "z-annulus",
    "z-cardy",
    "nesting-ratio",
    "z-eta-laplace",
    "gmc-ratio-cf",
    "lateral-cf",
    "ba-weight",
    "qa-weight",
    "cle-mgf",
    "cr-moment",
    "mod-cr-factor",
    "nested-expectation",
    "lf-boundary-moment",
    "bootstrap-rhs",
    "lf-disk-mass",
    "length-moment",
];

fn run_eval(target: &str, pairs: &[String], out: Option<&PathBuf>, format: Format) -> Result<()> {
    if target == "list" {
        let mut t = Table::new(&["target"]);
        for name in EVAL_TARGETS {
            t.row(vec![name.to_string()]);
        }
        return emit(out.map(|p| p.as_path()), &t.render(format));
    }
    let allowed = [
        "tau", "x", "kappa", "chi-prime", "gamma", "lambda", "j", "t", "mu0", "alpha", "ell",
        "j-max", "a", "b",
    ];
    let p = Params::parse(pairs, &allowed)?;
    let mut table = Table::new(&["quantity", "value"]);
    table.param("target", target);
    p.stamp(&mut table);
    let scfg = SeriesConfig::default();
    let mut push = |name: &str, v: f64| table.row(vec![name.to_string(), fmt_f64(v)]);
    match target {
        "eta" => push("eta", dedekind_eta(p.get("tau")?, &scfg)?),
        "theta1" => push(
            "theta1",
            jacobi_theta1(p.get("x")?, p.get("tau")?, &scfg)?,
        ),
        "gamma1ix" => {
            let g = gamma_one_plus_ix(p.get("x")?);
            push("re", g.re);
            push("im", g.im);
        }
        "cle-params" => {
            let c = cle_from(&p)?;
            push("g", c.g);
            push("chi", c.chi);
            push("n", c.n);
            push("c", c.c);
        }
        "z-open" => {
            let c = cle_from(&p)?;
            push(
                "z",
                z_open(p.get("tau")?, &c, &WindingWeight::new(p.get("chi-prime")?), &scfg)?,
            );
        }
        "z-closed" => {
            let c = cle_from(&p)?;
            push(
                "z",
                z_closed(p.get("tau")?, &c, &WindingWeight::new(p.get("chi-prime")?), &scfg)?,
            );
        }
        "z-annulus" => {
            let c = cle_from(&p)?;
            push(
                "z",
                z_annulus(p.get("tau")?, &c, &WindingWeight::new(p.get("chi-prime")?), &scfg)?,
            );
        }
        "z-cardy" => push("z", z_cardy(p.get("tau")?, &scfg)?),
        "nesting-ratio" => {
            let c = cle_from(&p)?;
            push(
                "ratio",
                nesting_ratio(p.get("tau")?, &c, &WindingWeight::new(p.get("chi-prime")?))?,
            );
        }
        "z-eta-laplace" => {
            let c = cle_from(&p)?;
            push(
                "value",
                z_eta_laplace_closed(p.get("t")?, &c, &WindingWeight::new(p.get("chi-prime")?))?,
            );
        }
        "gmc-ratio-cf" => {
            let lqg = lqg_from(&p)?;
            push("cf", gmc_ratio_cf(p.get("x")?, &lqg, p.get("tau")?)?);
        }
        "lateral-cf" => {
            let lqg = lqg_from(&p)?;
            push("cf", lateral_ratio_cf(p.get("x")?, &lqg));
        }
        "ba-weight" => push("weight", ba_weight(p.get("tau")?)?),
        "qa-weight" => {
            let lqg = lqg_from(&p)?;
            push("weight", qa_weight(p.get("tau")?, &lqg)?);
        }
        "cle-mgf" => {
            let c = cle_from(&p)?;
            push(
                "mgf",
                cle_mod_mgf(p.get("lambda")?, &c, p.get_or("j", 1.0) as u32)?,
            );
        }
        "cr-moment" => {
            let c = cle_from(&p)?;
            push(
                "moment",
                cr_moment(p.get("lambda")?, &c, p.get_or("j", 1.0) as u32)?,
            );
        }
        "mod-cr-factor" => {
            let c = cle_from(&p)?;
            push("factor", mod_cr_factor(p.get("lambda")?, &c)?);
        }
        "nested-expectation" => {
            let c = cle_from(&p)?;
            let w = WindingWeight::new(p.get("chi-prime")?);
            let ne = nested_expectation(p.get("t")?, &c, &w, p.get_or("j-max", 40.0) as u32)?;
            push("value", ne.value);
            push("tail_bound", ne.tail_bound);
            push("terms", ne.terms as f64);
            push("partition_side", nested_expectation_partition_closed(p.get("t")?, &c, &w)?);
        }
        "lf-boundary-moment" => {
            let lqg = lqg_from(&p)?;
            let m = lf_boundary_moment(p.get("x")?, &lqg, p.get("tau")?)?;
            push("re", m.re);
            push("im", m.im);
        }
        "bootstrap-rhs" => {
            let lqg = lqg_from(&p)?;
            let b = bootstrap_rhs(p.get("tau")?, &lqg, p.get("mu0")?)?;
            push("spectral", b.spectral);
            push("reduced", b.reduced);
        }
        "lf-disk-mass" => {
            let lqg = lqg_from(&p)?;
            push("mass", lf_disk_mass(p.get("alpha")?, &lqg, p.get("ell")?)?);
        }
        "length-moment" => {
            // kind keyed by parameters: ba (no gamma), qa (gamma), qa_j (gamma, j)
            let kind = if p.map.contains_key("gamma") {
                let lqg = lqg_from(&p)?;
                if p.map.contains_key("j") {
                    let grid = Grid::Uniform {
                        min: 0.0,
                        max: 50.0,
                        count: 4096,
                    };
                    ModulusWeight::qa_j(lqg, p.get("j")? as u32, &grid)?
                } else {
                    ModulusWeight::qa(lqg)?
                }
            } else {
                ModulusWeight::ba()
            };
            let m = annulus_length_moment(&kind, p.get("x")?);
            push("re", m.re);
            push("im", m.im);
        }
        other => bail!("unknown eval target `{other}` (try `eval list`)"),
    }
    emit(out.map(|p| p.as_path()), &table.render(format))
}

fn run_density(
    law: &str,
    pairs: &[String],
    grid_spec: Option<&str>,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    let allowed = ["tau", "a", "b", "kappa", "j"];
    let p = Params::parse(pairs, &allowed)?;
    let d = match law {
        "rho-tau" => {
            let default = Grid::Explicit(
                (0..2400)
                    .map(|i| ((i as f64 - 1200.0) * 0.014).exp())
                    .collect(),
            );
            rho_tau_density(p.get("tau")?, &parse_grid(grid_spec, default)?)?
        }
        "ba-modulus" => {
            let default = Grid::Uniform {
                min: 1e-3,
                max: 40.0,
                count: 1024,
            };
            ba_modulus_density(p.get("a")?, p.get("b")?, &parse_grid(grid_spec, default)?)?
        }
        "cle-modulus" => {
            let c = cle_from(&p)?;
            let default = annulus_core::laws::default_modulus_grid(&c, 8192);
            cle_mod_density(&c, p.get_or("j", 1.0) as u32, &parse_grid(grid_spec, default)?)?
        }
        other => bail!("unknown density law `{other}`"),
    };
    let mut table = Table::new(&["x", "density", "cdf"]);
    table.param("law", law);
    p.stamp(&mut table);
    table.param("mass", fmt_f64(d.mass));
    table.param("tail_bound", fmt_f64(d.tail_bound));
    table.param("clamp_mass", fmt_f64(d.clamp_mass));
    for i in 0..d.grid.len() {
        table.row(vec![
            fmt_f64(d.grid[i]),
            fmt_f64(d.values[i]),
            fmt_f64(d.cdf[i]),
        ]);
    }
    emit(out.map(|p| p.as_path()), &table.render(format))
}

fn run_sample(
    law: &str,
    pairs: &[String],
    n: u64,
    seed: u64,
    stream: u64,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    let allowed = ["tau", "a", "b", "kappa", "j", "dt", "max-time"];
    let p = Params::parse(pairs, &allowed)?;
    let mut rng = RngStream::new(seed, stream);
    let pcfg = PathConfig {
        dt: p.get_or("dt", 1e-5),
        max_time: p.get_or("max-time", 1e3),
    };
    let mut table = Table::new(&["index", "value"]);
    table.param("law", law);
    table.param("n", n);
    table.param("seed", seed);
    table.param("stream", stream);
    p.stamp(&mut table);
    let mut censored = 0u64;
    let mut idx = 0u64;
    let push = |table: &mut Table, idx: &mut u64, v: f64| {
        table.row(vec![idx.to_string(), fmt_f64(v)]);
        *idx += 1;
    };
    match law {
        "rho-tau" => {
            let grid = Grid::Explicit(
                (0..2400)
                    .map(|i| ((i as f64 - 1200.0) * 0.014).exp())
                    .collect(),
            );
            let d = rho_tau_density(p.get("tau")?, &grid)?;
            for _ in 0..n {
                let v = sample_density(&d, &mut rng)?;
                push(&mut table, &mut idx, v);
            }
        }
        "ba-modulus" => {
            let grid = Grid::Uniform {
                min: 1e-3,
                max: 40.0,
                count: 1024,
            };
            let d = ba_modulus_density(p.get("a")?, p.get("b")?, &grid)?;
            for _ in 0..n {
                let v = sample_density(&d, &mut rng)?;
                push(&mut table, &mut idx, v);
            }
        }
        "cle-modulus" => {
            let c = cle_from(&p)?;
            let grid = annulus_core::laws::default_modulus_grid(&c, 8192);
            let d = cle_mod_density(&c, p.get_or("j", 1.0) as u32, &grid)?;
            for _ in 0..n {
                let v = sample_density(&d, &mut rng)?;
                push(&mut table, &mut idx, v);
            }
        }
        "cle-modulus-path" => {
            let c = cle_from(&p)?;
            for _ in 0..n {
                match sample_cle_modulus_path(&c, &pcfg, &mut rng) {
                    Ok(v) => push(&mut table, &mut idx, v),
                    Err(annulus_core::Error::Censored) => censored += 1,
                    Err(e) => return Err(anyhow!("{e}")),
                }
            }
        }
        "bm-exit" => {
            let a = p.get_or("a", 0.0);
            for _ in 0..n {
                match sample_bm_exit(a, &pcfg, &mut rng) {
                    Ok(v) => push(&mut table, &mut idx, v),
                    Err(annulus_core::Error::Censored) => censored += 1,
                    Err(e) => return Err(anyhow!("{e}")),
                }
            }
        }
        "last-zero" => {
            for _ in 0..n {
                match sample_exit_and_last_zero(&pcfg, &mut rng) {
                    Ok((_, t0)) => push(&mut table, &mut idx, t0),
                    Err(annulus_core::Error::Censored) => censored += 1,
                    Err(e) => return Err(anyhow!("{e}")),
                }
            }
        }
        other => bail!("unknown sample law `{other}`"),
    }
    table.param("censored", censored);
    emit(out.map(|p| p.as_path()), &table.render(format))
}

fn run_mc(
    experiment: &str,
    pairs: &[String],
    xs: Option<&str>,
    seed: u64,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<()> {
    let allowed = ["gamma", "tau", "samples", "n-boundary", "m-cut", "streams"];
    let p = Params::parse(pairs, &allowed)?;
    let gamma = p.get_or("gamma", (8.0f64 / 3.0).sqrt());
    let tau = p.get("tau")?;
    let n_boundary = p.get_or("n-boundary", 1024.0) as usize;
    let spec = CylinderSpec {
        tau,
        n_boundary,
        m_cut: p.get_or("m-cut", (n_boundary / 2) as f64) as usize,
        k_cut: None,
    };
    let samples = p.get_or("samples", 16384.0) as u64;
    let streams = p.get_or("streams", 64.0) as u64;
    let threads = thread_count();
    match experiment {
        "gmc-ratio" => {
            let xs: Vec<f64> = xs
                .unwrap_or("0.5,1,2")
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("bad x: {e}")))
                .collect::<Result<_>>()?;
            let run = parallel::estimate_log_ratio_cf_streams(
                &spec, gamma, &xs, samples, seed, streams, threads,
            )?;
            let mut table = Table::new(&["x", "estimate_re", "estimate_im", "std_err_re", "std_err_im", "reference"]);
            table.param("experiment", experiment);
            table.param("gamma", fmt_f64(gamma));
            table.param("tau", fmt_f64(tau));
            table.param("n_boundary", spec.n_boundary);
            table.param("m_cut", spec.m_cut);
            table.param("n_samples", samples);
            table.param("seed", seed);
            table.param("streams", streams);
            let lqg = LqgParams::new(gamma).map_err(|e| anyhow!("{e}"))?;
            for (i, &x) in run.xs.iter().enumerate() {
                table.row(vec![
                    fmt_f64(x),
                    fmt_f64(run.estimates_re[i]),
                    fmt_f64(run.estimates_im[i]),
                    fmt_f64(run.std_errs_re[i]),
                    fmt_f64(run.std_errs_im[i]),
                    fmt_f64(gmc_ratio_cf(x, &lqg, tau)?),
                ]);
            }
            emit(out.map(|p| p.as_path()), &table.render(format))
        }
        "lateral-ratio" => {
            let values = parallel::lateral_ratio_samples_streams(
                &spec, gamma, samples, seed, streams, threads,
            )?;
            let mut table = Table::new(&["index", "ratio"]);
            table.param("experiment", experiment);
            table.param("gamma", fmt_f64(gamma));
            table.param("tau", fmt_f64(tau));
            table.param("n_boundary", spec.n_boundary);
            table.param("m_cut", spec.m_cut);
            table.param("n_samples", samples);
            table.param("seed", seed);
            table.param("streams", streams);
            for (i, v) in values.iter().enumerate() {
                table.row(vec![i.to_string(), fmt_f64(*v)]);
            }
            emit(out.map(|p| p.as_path()), &table.render(format))
        }
        other => bail!("unknown mc experiment `{other}`"),
    }
}

fn run_verify(
    suite_name: &str,
    json: Option<&PathBuf>,
    csv: Option<&PathBuf>,
    tol_scale: f64,
) -> Result<bool> {
    let Some(criteria) = checks::suite(suite_name) else {
        bail!("unknown suite `{suite_name}` (one of: specfun, partition, laws, mc, all)");
    };
    let cfg = checks::RunConfig {
        tol_scale,
        threads: thread_count(),
    };
    // run everything before reporting so the report is written atomically
    let mut all = Vec::new();
    for criterion in &criteria {
        let results = (criterion.run)(&cfg);
        let ok = results.iter().all(|r| r.passed);
        let n = results.len();
        println!(
            "{} {} [{}/{} checks] {}",
            criterion.id,
            if ok { "pass" } else { "FAIL" },
            results.iter().filter(|r| r.passed).count(),
            n,
            criterion.title,
        );
        for r in results.iter().filter(|r| !r.passed) {
            println!(
                "    FAIL {}: computed {} vs reference {} (tolerance {})",
                r.name,
                fmt_f64(r.computed),
                fmt_f64(r.reference),
                fmt_f64(r.tolerance)
            );
        }
        all.extend(results);
    }
    let passed = all.iter().filter(|r| r.passed).count();
    let failed = all.len() - passed;
    println!("summary: {passed} passed, {failed} failed");

    if let Some(path) = json {
        let doc = serde_json::json!({
            "suite": suite_name,
            "tol_scale": tol_scale,
            "checks": all,
            "summary": {"total": all.len(), "passed": passed, "failed": failed},
        });
        output::write_atomic(path, &serde_json::to_string_pretty(&doc)?)?;
    }
    if let Some(path) = csv {
        let mut table = Table::new(&[
            "name",
            "identity",
            "computed",
            "reference",
            "tolerance",
            "passed",
            "wall_ms",
        ]);
        table.param("suite", suite_name);
        table.param("tol_scale", fmt_f64(tol_scale));
        for r in &all {
            table.row(vec![
                r.name.clone(),
                r.identity.clone(),
                fmt_f64(r.computed),
                fmt_f64(r.reference),
                fmt_f64(r.tolerance),
                r.passed.to_string(),
                r.wall_ms.to_string(),
            ]);
        }
        output::write_atomic(path, &table.to_csv())?;
    }
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool> = match &cli.cmd {
        Cmd::Eval {
            target,
            params,
            output,
            format,
        } => run_eval(target, params, output.as_ref(), *format).map(|_| true),
        Cmd::Density {
            law,
            params,
            grid,
            output,
            format,
        } => run_density(law, params, grid.as_deref(), output.as_ref(), *format).map(|_| true),
        Cmd::Sample {
            law,
            params,
            n,
            seed,
            stream,
            output,
            format,
        } => run_sample(law, params, *n, *seed, *stream, output.as_ref(), *format).map(|_| true),
        Cmd::Mc {
            experiment,
            params,
            x,
            seed,
            output,
            format,
        } => run_mc(experiment, params, x.as_deref(), *seed, output.as_ref(), *format)
            .map(|_| true),
        Cmd::Verify {
            suite,
            json,
            csv,
            tol_scale,
        } => run_verify(suite, json.as_ref(), csv.as_ref(), *tol_scale),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            eprintln!("run with --help for the command grammar");
            ExitCode::from(2)
        }
    }
}
