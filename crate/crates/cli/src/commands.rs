//! The design, decode, analyze and simulate subcommands. Each returns the JSON
//! document it prints.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::ValueEnum as _;
use grouptest::analytics::{
    bound_b, c_of_p, h_correction, lower_bound_t, pp_expected_u0, pp_optimize, r_p_eval,
    regular_upper_bound, u_of_p,
};
use grouptest::decode::{decode_two_stage, run_tests};
use grouptest::designs::{
    gen_poisson_poisson, gen_regular_poisson, girth_feasibility, optimal_params, RegularGirth6,
    DEFAULT_MAX_RESTARTS,
};
use grouptest::io::{load_design, save_design, Format};
use grouptest::simulate::{exhaustive_expected_tests, mc_expected_tests, mc_family_expected_tests};
use grouptest::{Assignment, Context, DesignParams, Estimate, Family, PoolDesign};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{AnalyzeArgs, DecodeArgs, DesignArgs, OutputFormat, Quantity, SimulateArgs};
use crate::config::Config;

fn load(path: &Path) -> Result<PoolDesign> {
    load_design(path, Format::from_path(path))
        .with_context(|| format!("loading design {}", path.display()))
}

/// Path of the metadata written next to a design file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn design_summary(d: &PoolDesign) -> Value {
    let prof = d.degree_profile();
    let (vmin, vmax) = prof.variable_range();
    let (tmin, tmax) = prof.test_range();
    let cycles: u64 = d.four_cycle_counts().iter().sum::<u64>() / 2;
    json!({
        "family": d.provenance().family,
        "seed": d.provenance().seed,
        "n_variables": d.n_variables(),
        "n_tests": d.n_tests(),
        "n_edges": d.n_edges(),
        "variable_degree": {"min": vmin, "max": vmax},
        "test_degree": {"min": tmin, "max": tmax},
        "girth_at_least_6": d.girth_at_least_6(),
        "four_cycles": cycles,
    })
}

pub fn cmd_design(a: &DesignArgs, cfg: &Config) -> Result<Value> {
    let family: Family = cfg.require(a.family, "family")?;
    let n: usize = cfg.require(a.n, "n")?;
    let seed = cfg.seed(a.seed)?;
    let p: Option<f64> = cfg.pick(a.p, "p")?;
    let (l, m) = match (cfg.pick(a.l, "l")?, cfg.pick(a.m, "m")?) {
        (Some(l), Some(m)) => (l, m),
        (l, m) => {
            let p = p.ok_or_else(|| anyhow!("give --p, or both --l and --m"))?;
            let opt = optimal_params(n, p, family)?;
            (
                l.unwrap_or(opt.tests_per_variable),
                m.unwrap_or(opt.n_tests),
            )
        }
    };
    let max_restarts = cfg.or(a.max_restarts, "max_restarts", DEFAULT_MAX_RESTARTS)?;
    let feasibility = girth_feasibility(n, l, m);
    let (design, restarts) = match family {
        Family::RegularRegularGirth6 => {
            let b = RegularGirth6::new(n, l as usize, m as usize)
                .max_restarts(max_restarts)
                .build(seed)?;
            (b.design, Some(b.restarts))
        }
        Family::RegularPoisson => (gen_regular_poisson(n, m as usize, l as usize, seed)?, None),
        Family::PoissonPoisson => (gen_poisson_poisson(n, m as usize, l as f64, seed)?, None),
        Family::Custom => bail!("the custom family cannot be generated"),
    };

    let mut meta = design_summary(&design);
    let obj = meta.as_object_mut().expect("summary is an object");
    obj.insert("tests_per_variable".into(), json!(l));
    obj.insert("p".into(), json!(p));
    obj.insert("feasibility".into(), json!(feasibility));
    obj.insert("restarts".into(), json!(restarts));

    let out: Option<PathBuf> = cfg.pick(a.out.clone(), "out")?;
    if let Some(out) = out {
        let format = match cfg.pick(a.format.clone(), "format")? {
            Some(f) => f.parse::<Format>()?,
            None => Format::from_path(&out),
        };
        save_design(&design, &out, format)?;
        let side = sidecar_path(&out);
        std::fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")
            .with_context(|| format!("writing {}", side.display()))?;
        obj_insert(&mut meta, "out", json!(out));
    } else {
        obj_insert(&mut meta, "tests", json!(design.pools()));
    }
    Ok(meta)
}

fn obj_insert(v: &mut Value, key: &str, val: Value) {
    if let Some(o) = v.as_object_mut() {
        o.insert(key.into(), val);
    }
}

pub fn cmd_decode(a: &DecodeArgs, cfg: &Config) -> Result<Value> {
    let path: PathBuf = cfg.require(a.design.clone(), "design")?;
    let design = load(&path)?;
    let text = match (
        cfg.pick(a.x.clone(), "x")?,
        cfg.pick(a.x_file.clone(), "x_file")?,
    ) {
        (Some(x), _) => x,
        (None, Some(f)) => std::fs::read_to_string(&f)
            .with_context(|| format!("reading assignment {}", f.display()))?,
        (None, None) => bail!("give --x or --x-file"),
    };
    let x = Assignment::parse(&text, design.n_variables())?;
    let outcomes = run_tests(&design, &x)?;
    let r = decode_two_stage(&design, &x)?;
    let bits: String = outcomes
        .bits()
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    Ok(json!({
        "n_variables": design.n_variables(),
        "n_tests": design.n_tests(),
        "outcomes": bits,
        "sure_zeros": r.sure_zeros,
        "sure_ones": r.sure_ones,
        "undetermined_zeros": r.undetermined_zeros,
        "undetermined_ones": r.undetermined_ones,
        "T": r.total_tests,
    }))
}

pub fn cmd_analyze(a: &AnalyzeArgs, cfg: &Config) -> Result<(Value, OutputFormat)> {
    let quantity: Quantity = cfg.require(a.quantity, "quantity")?;
    let format = cfg.or(a.format, "format", OutputFormat::Json)?;
    let p: f64 = cfg.require(a.p, "p")?;
    let ctx = Context::new(p)?;
    let n = || cfg.require(a.n, "n");
    let mut input = Map::new();
    input.insert(
        "quantity".into(),
        json!(quantity
            .to_possible_value()
            .map(|v| v.get_name().to_owned())),
    );
    input.insert("p".into(), json!(p));

    let result = match quantity {
        Quantity::B => {
            let path: PathBuf = cfg.require(a.design.clone(), "design")?;
            let d = load(&path)?;
            input.insert("design".into(), json!(path));
            json!({"B": bound_b(&d, &ctx), "n_variables": d.n_variables(), "n_tests": d.n_tests()})
        }
        Quantity::U => {
            let u = u_of_p(&ctx);
            json!({"U": u.value, "argmin_r": u.argmin, "z": ctx.q_pow(u.argmin - 1.0)})
        }
        Quantity::C => {
            let c = c_of_p(&ctx);
            json!({"c": c.value, "w": c.w, "U": c.u.value})
        }
        Quantity::LowerBound => {
            let n = n()?;
            input.insert("n".into(), json!(n));
            let b = lower_bound_t(n, &ctx);
            json!({
                "variational": b.variational,
                "info_theoretic": b.info_theoretic,
                "max": b.max(),
                "ratio": b.max() / ctx.scale(n),
            })
        }
        Quantity::UpperBound => {
            let n = n()?;
            input.insert("n".into(), json!(n));
            let b = regular_upper_bound(n, &ctx)?;
            json!({
                "upper_bound": b.value,
                "ratio": b.ratio(n, &ctx),
                "L": b.tests_per_variable,
                "M": b.n_tests,
                "K": b.mean_test_degree,
                "R_p": b.r_p,
            })
        }
        Quantity::Rp => {
            let k: f64 = cfg.require(a.k, "k")?;
            let l: f64 = cfg.require(a.l, "l")?;
            if k < 1.0 || l < 1.0 {
                bail!("R_p needs K >= 1 and L >= 1");
            }
            input.insert("k".into(), json!(k));
            input.insert("l".into(), json!(l));
            json!({"R_p": r_p_eval(&ctx, k, l)})
        }
        Quantity::H => {
            let n = n()?;
            input.insert("n".into(), json!(n));
            let t_bar = match cfg.pick(a.t_bar, "t_bar")? {
                Some(t) => t,
                None => regular_upper_bound(n, &ctx)?.value,
            };
            let h = h_correction(n, &ctx, t_bar);
            json!({"H": h.h, "t_bar": t_bar, "lower": h.lower, "upper": h.upper, "in_window": h.in_window})
        }
        Quantity::PpU0 => {
            let n = n()?;
            let m: u64 = cfg.require(a.m, "m")?;
            let k: f64 = cfg.require(a.k, "k")?;
            input.insert("n".into(), json!(n));
            input.insert("m".into(), json!(m));
            input.insert("k".into(), json!(k));
            let u0 = pp_expected_u0(n, &ctx, m, k)?;
            let t = m as f64 + n as f64 * p + u0;
            json!({"E_U0": u0, "mean_T": t, "ratio": t / ctx.scale(n)})
        }
        Quantity::PpOpt => {
            let n = n()?;
            input.insert("n".into(), json!(n));
            let o = pp_optimize(n, &ctx)?;
            let scale = ctx.scale(n);
            json!({
                "M": o.m,
                "K": o.k,
                "ratio": o.ratio,
                "E_U0": o.u0,
                "M_over_scale": o.m as f64 / scale,
                "K_times_p": o.k * p,
            })
        }
        Quantity::Params => {
            let n = n()?;
            input.insert("n".into(), json!(n));
            let families: Vec<Family> = match cfg.pick(a.family, "family")? {
                Some(f) => vec![f],
                None => vec![Family::RegularRegularGirth6, Family::PoissonPoisson],
            };
            let mut out = Map::new();
            for f in families {
                let d = optimal_params(n as usize, p, f)?;
                out.insert(
                    f.to_string(),
                    json!({
                        "L": d.tests_per_variable,
                        "M": d.n_tests,
                        "K": d.mean_test_degree_f64(),
                        "K_exact": d.mean_test_degree().to_string(),
                    }),
                );
            }
            Value::Object(out)
        }
    };
    let mut doc = Map::new();
    doc.insert("input".into(), Value::Object(input));
    if let Value::Object(r) = result {
        doc.extend(r);
    }
    Ok((Value::Object(doc), format))
}

/// Flattens a JSON object into a one-row CSV with dotted column names.
pub fn json_to_csv_row(v: &Value) -> Result<String> {
    fn walk(prefix: &str, v: &Value, cols: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, x, cols);
                }
            }
            Value::String(s) => cols.push((prefix.to_string(), s.clone())),
            Value::Null => cols.push((prefix.to_string(), String::new())),
            other => cols.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut cols = Vec::new();
    walk("", v, &mut cols);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(cols.iter().map(|c| c.0.as_str()))?;
    w.write_record(cols.iter().map(|c| c.1.as_str()))?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One line of simulate output.
#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub family: Family,
    pub seed: u64,
    pub trials: u64,
    pub design_samples: u64,
    pub exact: bool,
    #[serde(rename = "mean_T")]
    pub mean_t: f64,
    pub se: f64,
    #[serde(rename = "mean_U0")]
    pub mean_u0: f64,
    #[serde(rename = "mean_U1")]
    pub mean_u1: f64,
    pub ratio: f64,
}

fn sim_row(
    n: usize,
    p: f64,
    l: f64,
    family: Family,
    samples: u64,
    e: &Estimate,
    ctx: &Context,
) -> SimRow {
    SimRow {
        n,
        p,
        m: e.n_tests,
        l,
        family,
        seed: e.seed,
        trials: e.n_trials,
        design_samples: samples,
        exact: e.exact,
        mean_t: e.mean,
        se: e.std_error,
        mean_u0: e.mean_u0,
        mean_u1: e.mean_u1,
        ratio: e.ratio(n as u64, ctx),
    }
}

pub fn cmd_simulate(a: &SimulateArgs, cfg: &Config) -> Result<Value> {
    let p: f64 = cfg.require(a.p, "p")?;
    let ctx = Context::new(p)?;
    let seed = cfg.seed(a.seed)?;
    let trials = cfg.or(a.trials, "trials", 10_000)?;
    let exact = a.exact || cfg.or(None, "exact", false)?;

    let design_path: Option<PathBuf> = cfg.pick(a.design.clone(), "design")?;
    let row = if let Some(path) = design_path {
        let d = load(&path)?;
        let e = if exact {
            exhaustive_expected_tests(&d, &ctx)?
        } else {
            mc_expected_tests(&d, &ctx, trials, seed)?
        };
        let l = d.n_edges() as f64 / d.n_variables() as f64;
        sim_row(d.n_variables(), p, l, d.provenance().family, 1, &e, &ctx)
    } else {
        let family: Family = cfg
            .pick(a.family, "family")?
            .ok_or_else(|| anyhow!("give --design or --family"))?;
        if exact {
            bail!("--exact needs a stored design");
        }
        let n: usize = cfg.require(a.n, "n")?;
        let params = match (cfg.pick(a.l, "l")?, cfg.pick(a.m, "m")?) {
            (Some(l), Some(m)) => DesignParams::new(family, n, p, l, m, seed)?,
            _ => optimal_params(n, p, family)?,
        };
        let samples = cfg.or(a.design_samples, "design_samples", 16)?;
        let e = mc_family_expected_tests(&params, &ctx, samples, trials, seed)?;
        sim_row(
            n,
            p,
            params.tests_per_variable as f64,
            family,
            samples,
            &e,
            &ctx,
        )
    };

    let out: Option<PathBuf> = cfg.pick(a.out.clone(), "out")?;
    if let Some(out) = &out {
        let is_csv = out
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            let mut w = csv::Writer::from_path(out)?;
            w.serialize(&row)?;
            w.flush()?;
        } else {
            std::fs::write(out, serde_json::to_string_pretty(&row)? + "\n")?;
        }
    }
    Ok(serde_json::to_value(&row)?)
}
