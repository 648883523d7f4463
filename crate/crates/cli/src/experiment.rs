//! Sweeps over `N` producing one row per `(N, family)` with the analytic
//! bounds, the Poisson-Poisson optimum and a Monte Carlo estimate.

use std::io::Write;

use anyhow::{bail, Context as _, Result};
use grouptest::analytics::{h_correction, lower_bound_t, pp_optimize, regular_upper_bound};
use grouptest::designs::optimal_params;
use grouptest::rng::split_seed;
use grouptest::simulate::mc_family_expected_tests;
use grouptest::{Context, Family};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{ExperimentArgs, Mode};
use crate::config::Config;

const PILOT_TRIALS: u64 = 100;
/// Target CI half-width relative to `N p |ln p|`.
const TARGET_HALF_WIDTH: f64 = 0.01;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub mode: Mode,
    /// `p = N^(-beta)` in a beta sweep.
    pub beta: f64,
    /// Fixed `p` in a fixed-p sweep.
    pub p: Option<f64>,
    pub n_grid: Vec<u64>,
    pub families: Vec<Family>,
    /// Assignments per design; `None` picks it from a pilot run.
    pub trials: Option<u64>,
    pub design_samples: u64,
    pub mc_max_n: u64,
    pub max_trials: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta) {
            bail!("beta = {} is not in [0, 1)", self.beta);
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!("n_grid must be non-empty and strictly increasing");
        }
        if self.families.is_empty() || self.families.contains(&Family::Custom) {
            bail!("families must list rr6, rp or pp");
        }
        if self.design_samples == 0 {
            bail!("design_samples must be at least 1");
        }
        for &n in &self.n_grid {
            let p = self.p_at(n)?;
            if !(p > 0.0 && p < 1.0) {
                bail!("p = {p} at N = {n} is not in (0, 1)");
            }
        }
        Ok(())
    }

    pub fn p_at(&self, n: u64) -> Result<f64> {
        match self.mode {
            Mode::BetaSweep => Ok((n as f64).powf(-self.beta)),
            Mode::FixedPSweep => self.p.context("fixed_p_sweep needs --p"),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serialises");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    pub fn from_args(a: &ExperimentArgs, cfg: &Config) -> Result<ExperimentSpec> {
        let grid: Vec<String> = cfg.require(a.n_grid.clone(), "n_grid").or_else(|e| {
            // config files may give plain numbers
            cfg.pick(None::<Vec<u64>>, "n_grid")?
                .map(|v| v.iter().map(u64::to_string).collect())
                .ok_or(e)
        })?;
        let spec = ExperimentSpec {
            mode: cfg.or(a.mode, "mode", Mode::BetaSweep)?,
            beta: cfg.or(a.beta, "beta", 0.0)?,
            p: cfg.pick(a.p, "p")?,
            n_grid: grid.iter().map(|s| parse_n(s)).collect::<Result<_>>()?,
            families: cfg.or(
                a.families.clone(),
                "families",
                vec![Family::RegularRegularGirth6],
            )?,
            trials: cfg.pick(a.trials, "trials")?,
            design_samples: cfg.or(a.design_samples, "design_samples", 8)?,
            mc_max_n: cfg.or(a.mc_max_n, "mc_max_n", 1 << 16)?,
            max_trials: cfg.or(a.max_trials, "max_trials", 100_000)?,
            seed: cfg.seed(a.seed)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `4096` or `2^12`.
pub fn parse_n(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.trim().parse().with_context(|| format!("bad N '{s}'"))?;
        let e: u32 = e.trim().parse().with_context(|| format!("bad N '{s}'"))?;
        return b
            .checked_pow(e)
            .with_context(|| format!("N '{s}' overflows"));
    }
    s.parse().with_context(|| format!("bad N '{s}'"))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: u64,
    pub p: f64,
    pub family: String,
    #[serde(rename = "L")]
    pub l: Option<u64>,
    #[serde(rename = "M")]
    pub m: Option<u64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// `N p |ln p|`
    pub scale: f64,
    pub lower_bound: f64,
    pub lower_ratio: f64,
    pub upper_bound: Option<f64>,
    pub upper_ratio: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub h_in_window: Option<bool>,
    pub pp_m: Option<u64>,
    pub pp_k: Option<f64>,
    pub pp_ratio: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_se: Option<f64>,
    pub mc_ratio: Option<f64>,
    pub mc_ci_half_ratio: Option<f64>,
    pub trials: Option<u64>,
    pub design_samples: Option<u64>,
    pub error: String,
}

fn row_seed(spec: &ExperimentSpec, idx: usize) -> u64 {
    split_seed(spec.seed, idx as u64)
}

fn compute_row(spec: &ExperimentSpec, idx: usize, n: u64, family: Family) -> Row {
    let mut row = Row {
        n,
        family: family.to_string(),
        ..Row::default()
    };
    if let Err(e) = fill_row(spec, idx, &mut row, family) {
        row.error = format!("{e:#}");
    }
    row
}

fn fill_row(spec: &ExperimentSpec, idx: usize, row: &mut Row, family: Family) -> Result<()> {
    let n = row.n;
    let p = spec.p_at(n)?;
    row.p = p;
    let ctx = Context::new(p)?;
    let scale = ctx.scale(n);
    row.scale = scale;
    let lb = lower_bound_t(n, &ctx);
    row.lower_bound = lb.max();
    row.lower_ratio = lb.max() / scale;

    let params = optimal_params(n as usize, p, family)?;
    row.l = Some(params.tests_per_variable);
    row.m = Some(params.n_tests);
    row.k = Some(params.mean_test_degree_f64());

    if family.is_variable_regular() {
        let ub = regular_upper_bound(n, &ctx)?;
        row.upper_bound = Some(ub.value);
        row.upper_ratio = Some(ub.ratio(n, &ctx));
        let h = h_correction(n, &ctx, ub.value);
        row.h = Some(h.h);
        row.h_in_window = Some(h.in_window);
    } else if scale >= 1.0 {
        let o = pp_optimize(n, &ctx)?;
        row.pp_m = Some(o.m);
        row.pp_k = Some(o.k);
        row.pp_ratio = Some(o.ratio);
    }

    if n > spec.mc_max_n {
        return Ok(());
    }
    let seed = row_seed(spec, idx);
    let params = params.with_seed(seed);
    let s = spec.design_samples;
    let trials = match spec.trials {
        Some(t) => t,
        None => {
            // pilot run on an independent seed, then size the main run
            let pilot = mc_family_expected_tests(
                &params,
                &ctx,
                s,
                PILOT_TRIALS,
                split_seed(seed, u64::MAX),
            )?;
            let sd_total = pilot.std_error * ((s * PILOT_TRIALS) as f64).sqrt();
            let want = (Z95 * sd_total / (TARGET_HALF_WIDTH * scale)).powi(2);
            ((want / s as f64).ceil() as u64).clamp(PILOT_TRIALS, spec.max_trials)
        }
    };
    let e = mc_family_expected_tests(&params, &ctx, s, trials, seed)?;
    row.mc_mean = Some(e.mean);
    row.mc_se = Some(e.std_error);
    row.mc_ratio = Some(e.mean / scale);
    row.mc_ci_half_ratio = Some(Z95 * e.std_error / scale);
    row.trials = Some(trials);
    row.design_samples = Some(s);
    Ok(())
}

/// Rows in spec order: `N` outer, family inner. Rows run concurrently.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let jobs: Vec<(u64, Family)> = spec
        .n_grid
        .iter()
        .flat_map(|&n| spec.families.iter().map(move |&f| (n, f)))
        .collect();
    Ok(jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(n, f))| compute_row(spec, i, n, f))
        .collect())
}

/// The metadata comment line that opens every CSV.
pub fn comment_line(spec: &ExperimentSpec) -> String {
    format!(
        "# grouptest {} seed={} spec_sha256={}",
        env!("CARGO_PKG_VERSION"),
        spec.seed,
        spec.digest()
    )
}

pub fn to_csv(spec: &ExperimentSpec, rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!("{}\n{body}", comment_line(spec)))
}

pub fn to_json(spec: &ExperimentSpec, rows: &[Row]) -> Result<String> {
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "spec_sha256": spec.digest(),
        "spec": spec,
        "rows": rows,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn cmd_experiment(a: &ExperimentArgs, cfg: &Config) -> Result<String> {
    let spec = ExperimentSpec::from_args(a, cfg)?;
    let rows = run_experiment(&spec)?;
    let csv = to_csv(&spec, &rows)?;
    if let Some(path) = cfg.pick(a.json.clone(), "json")? {
        std::fs::write(&path, to_json(&spec, &rows)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match cfg.pick(a.out.clone(), "out")? {
        Some(path) => {
            let mut f = std::fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            f.write_all(csv.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}
