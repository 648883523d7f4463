//! The acceptance battery: exact small-instance oracles plus desk-scale trend
//! checks. Each criterion returns a pass flag and a one-line summary.

use std::f64::consts::{E, LN_2};
use std::time::Instant;

use grouptest::analytics::{
    bound_b, c_of_p, h_correction, pp_expected_u0, pp_optimize, regular_upper_bound, u_of_p,
    PpEvaluator,
};
use grouptest::decode::decode_two_stage;
use grouptest::designs::{gen_poisson_poisson, optimal_params, RegularGirth6};
use grouptest::rng::stream;
use grouptest::simulate::{exhaustive_expected_tests, fkg_gap, mc_family_expected_tests};
use grouptest::{Assignment, Context, Family, PoolDesign};
use rand::Rng as _;
use rayon::prelude::*;

use crate::args::Mode;
use crate::experiment::{run_experiment, to_csv, ExperimentSpec};

pub const CRITERIA: u32 = 12;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} [{}] {} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn name(id: u32) -> &'static str {
    match id {
        1 => "B exact without 4-cycles",
        2 => "FKG gap",
        3 => "worked decode examples",
        4 => "U(p) small-p trend",
        5 => "c(p) expansion",
        6 => "regular upper bound trend",
        7 => "girth-6 generator at scale",
        8 => "Poisson-Poisson closed form",
        9 => "Poisson-Poisson optimum",
        10 => "regular-Poisson below e",
        11 => "information-theoretic floor",
        12 => "experiment determinism",
        _ => "unknown",
    }
}

pub fn run(id: u32) -> Outcome {
    let t0 = Instant::now();
    let (passed, detail) = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(),
        _ => (false, format!("no criterion {id}")),
    };
    Outcome {
        id,
        name: name(id),
        passed,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn ctx(p: f64) -> Context {
    Context::new(p).expect("p in (0, 1)")
}

fn pools(n: usize, pools: &[&[u32]]) -> PoolDesign {
    PoolDesign::from_pools(n, pools).expect("valid hand design")
}

/// Girth-6 battery: 200 designs with `N <= 16`, mixed `L`, `M` and `p`.
fn girth6_battery() -> Vec<(PoolDesign, f64)> {
    let mut out = Vec::new();
    let mut rng = stream(0x6172_7468, 1);
    let mut attempt = 0u64;
    while out.len() < 200 {
        attempt += 1;
        assert!(attempt < 20_000, "girth-6 battery did not fill");
        let n = rng.random_range(4..=16usize);
        let l = rng.random_range(1..=3usize);
        let m = rng.random_range(l..=n);
        let Ok(b) = RegularGirth6::new(n, l, m).max_restarts(3).build(attempt) else {
            continue;
        };
        let p = rng.random_range(0.02..0.98);
        out.push((b.design, p));
    }
    out
}

/// Arbitrary designs with `N <= 14`; every other one gets a forced 4-cycle.
fn fkg_battery() -> Vec<(PoolDesign, f64)> {
    let mut rng = stream(0x0066_6b67, 2);
    (0..200u64)
        .map(|k| {
            let n = rng.random_range(2..=14usize);
            let m = rng.random_range(2..=8usize);
            let mean_l = rng.random_range(0.5..(m as f64).min(3.5));
            let d = gen_poisson_poisson(n, m, mean_l, 1000 + k).expect("valid parameters");
            let d = if k % 2 == 0 {
                let mut tests = d.pools().to_vec();
                let i = rng.random_range(0..n as u32);
                let j = (i + rng.random_range(1..n as u32)) % n as u32;
                let a = rng.random_range(0..m);
                let b = (a + rng.random_range(1..m)) % m;
                for t in [a, b] {
                    for v in [i, j] {
                        if !tests[t].contains(&v) {
                            tests[t].push(v);
                        }
                    }
                }
                PoolDesign::new(n, tests, d.provenance()).expect("valid design")
            } else {
                d
            };
            let p = rng.random_range(0.1..=0.9);
            (d, p)
        })
        .collect()
}

fn criterion_1() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut bad = 0;
    for (d, p) in girth6_battery() {
        let e = exhaustive_expected_tests(&d, &ctx(p)).expect("N <= 16");
        let err = (e.mean_u0 - bound_b(&d, &ctx(p))).abs();
        let tol = 1e-12 * d.n_variables() as f64;
        worst = worst.max(err / tol);
        if err > tol {
            bad += 1;
        }
    }
    (
        bad == 0,
        format!(
            "200 girth-6 designs, {bad} mismatches, worst |E|U0| - B| = {worst:.3} x tolerance"
        ),
    )
}

fn criterion_2() -> (bool, String) {
    let mut negative = 0;
    let mut flat = Vec::new();
    let mut with_cycles = 0;
    let mut min_gap = f64::INFINITY;
    for (idx, (d, p)) in fkg_battery().into_iter().enumerate() {
        let gap = fkg_gap(&d, &ctx(p)).expect("N <= 14");
        if gap < -1e-12 {
            negative += 1;
        }
        if !d.girth_at_least_6() {
            with_cycles += 1;
            min_gap = min_gap.min(gap);
            if gap <= 1e-6 {
                flat.push(format!("#{idx} gap={gap:.3e} p={p:.3}"));
            }
        }
    }
    let detail = format!(
        "{with_cycles} designs with 4-cycles, {negative} negative gaps, min gap with cycles {min_gap:.3e}, \
         {} at or below 1e-6{}",
        flat.len(),
        if flat.is_empty() { String::new() } else { format!(": {}", flat.join(", ")) }
    );
    (negative == 0 && flat.is_empty(), detail)
}

fn criterion_3() -> (bool, String) {
    let path = pools(3, &[&[0, 1], &[1, 2]]);
    let t1 = decode_two_stage(&path, &Assignment::new(vec![true, false, false]))
        .expect("dims")
        .total_tests;
    let t2 = decode_two_stage(&path, &Assignment::new(vec![true, true, false]))
        .expect("dims")
        .total_tests;
    let doubled = pools(2, &[&[0, 1], &[0, 1]]);
    let gap = fkg_gap(&doubled, &ctx(0.5)).expect("N = 2");
    let ok = t1 == 2 && t2 == 5 && gap == 0.25;
    (
        ok,
        format!("T(100) = {t1}, T(110) = {t2}, doubled-pool gap = {gap}"),
    )
}

fn criterion_4() -> (bool, String) {
    let dev: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&p| (u_of_p(&ctx(p)).value * LN_2 * LN_2 / p - 1.0).abs())
        .collect();
    let r1 = dev[0] / dev[1];
    let r2 = dev[1] / dev[2];
    let ok = (5.0..=20.0).contains(&r1) && (5.0..=20.0).contains(&r2);
    (
        ok,
        format!(
            "deviations {:.4e} {:.4e} {:.4e}, shrink factors {r1:.3} {r2:.3}",
            dev[0], dev[1], dev[2]
        ),
    )
}

fn criterion_5() -> (bool, String) {
    let ll2 = LN_2.ln().abs();
    let res: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&p| {
            let c = c_of_p(&ctx(p)).value;
            (c - p * p.ln().abs() / (LN_2 * LN_2) - (1.0 - 2.0 * ll2) * p / (LN_2 * LN_2)) / p
        })
        .collect();
    let ok = res[0].abs() > res[1].abs() && res[1].abs() > res[2].abs();
    (
        ok,
        format!("residuals {:.5e} {:.5e} {:.5e}", res[0], res[1], res[2]),
    )
}

fn criterion_6() -> (bool, String) {
    let mut ratios = Vec::new();
    let mut h_ok = true;
    let mut hs = Vec::new();
    for k in [12, 16, 20, 24] {
        let n = 1u64 << k;
        let c = ctx((n as f64).powf(-0.25));
        let ub = match regular_upper_bound(n, &c) {
            Ok(b) => b,
            Err(e) => return (false, format!("N = 2^{k}: {e}")),
        };
        ratios.push(ub.ratio(n, &c));
        if ub.tests_per_variable >= 4 {
            let h = h_correction(n, &c, ub.value).h;
            hs.push(format!("{h:.4}"));
            h_ok &= h <= 2.0;
        }
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().expect("four points");
    let ok = decreasing && (2.08..=3.0).contains(&last) && h_ok;
    let r: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    (
        ok,
        format!("ratios {}, H (L >= 4) {}", r.join(" "), hs.join(" ")),
    )
}

fn criterion_7() -> (bool, String) {
    let params = optimal_params(4096, 1.0 / 16.0, Family::RegularRegularGirth6).expect("valid");
    let (l, m) = (params.tests_per_variable as usize, params.n_tests as usize);
    let feas = params.feasibility();
    match RegularGirth6::new(4096, l, m).max_restarts(10).build(7) {
        Ok(b) => {
            let regular = b.design.degree_profile().variables.iter().all(|&x| x == l);
            let girth = b.design.girth_at_least_6();
            (
                feas.satisfied && regular && girth,
                format!(
                    "L = {l}, M = {m}, feasibility {feas}, restarts {}, girth6 {girth}, regular {regular}",
                    b.restarts
                ),
            )
        }
        Err(e) => (false, format!("L = {l}, M = {m}: {e}")),
    }
}

fn criterion_8() -> (bool, String) {
    const DESIGNS: u64 = 100_000;
    let mut rng = stream(0x7070, 8);
    let tuples: Vec<(usize, usize, f64, f64)> = (0..20)
        .map(|_| {
            let n = rng.random_range(2..=10usize);
            let m = rng.random_range(1..=6usize);
            let k = rng.random_range(0.3..=n as f64);
            let p = rng.random_range(0.05..0.6);
            (n, m, k, p)
        })
        .collect();
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    for (idx, &(n, m, k, p)) in tuples.iter().enumerate() {
        let c = ctx(p);
        let (s, ss) = (0..DESIGNS)
            .into_par_iter()
            .map(|seed| {
                let d =
                    gen_poisson_poisson(n, m, k * m as f64 / n as f64, (idx as u64) << 32 | seed)
                        .expect("valid parameters");
                let u = exhaustive_expected_tests(&d, &c).expect("N <= 10").mean_u0;
                (u, u * u)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let mean = s / DESIGNS as f64;
        let se = ((ss / DESIGNS as f64 - mean * mean).max(0.0) / (DESIGNS - 1) as f64).sqrt();
        let want = pp_expected_u0(n as u64, &c, m as u64, k).expect("valid parameters");
        let z = (mean - want).abs() / se.max(1e-300);
        worst = worst.max(z);
        if z > 4.0 {
            fails.push(format!("(N={n}, M={m}, K={k:.3}, p={p:.3}) z={z:.2}"));
        }
    }
    (
        fails.is_empty(),
        format!(
            "20 tuples x {DESIGNS} designs, worst |z| = {worst:.2} {}",
            fails.join(" ")
        ),
    )
}

fn criterion_9() -> (bool, String) {
    let n = 1_000_000_000u64;
    let p = 1e-3;
    let c = ctx(p);
    let o = match pp_optimize(n, &c) {
        Ok(o) => o,
        Err(e) => return (false, e.to_string()),
    };
    let scale = c.scale(n);
    let m_ratio = o.m as f64 / scale;
    let kp = o.k * p;
    let eval = PpEvaluator::new(n, &c).expect("N >= 1");
    let mut beaten = 0;
    for i in -20i32..=20 {
        for j in -20i32..=20 {
            let m = (o.m as f64 * (1.0 + 0.01 * i as f64)).round() as u64;
            let k = o.k * (1.0 + 0.01 * j as f64);
            if eval.ratio(m, k).expect("valid grid") < o.ratio - 1e-9 {
                beaten += 1;
            }
        }
    }
    let ok = (0.95 * E..=1.05 * E).contains(&o.ratio)
        && (0.9 * E..=1.1 * E).contains(&m_ratio)
        && (0.9..=1.1).contains(&kp)
        && beaten == 0;
    (
        ok,
        format!(
            "ratio* = {:.5} ({:.4} e), M*/(Np|ln p|) = {m_ratio:.4} ({:.4} e), K* p = {kp:.5}, grid points beating ratio*: {beaten}",
            o.ratio,
            o.ratio / E,
            m_ratio / E
        ),
    )
}

fn criterion_10() -> (bool, String) {
    let n = 1usize << 14;
    let p = 2f64.powi(-5);
    let c = ctx(p);
    let params = optimal_params(n, p, Family::RegularPoisson).expect("valid");
    let e = match mc_family_expected_tests(&params, &c, 16, 1000, 10) {
        Ok(e) => e,
        Err(err) => return (false, err.to_string()),
    };
    let ratio = e.ratio(n as u64, &c);
    let sigma = e.std_error / c.scale(n as u64);
    let ok = E - ratio > 3.0 * sigma;
    (
        ok,
        format!(
            "L = {}, M = {}, ratio {ratio:.4} +- {sigma:.4}, e - ratio = {:.1} sigma",
            params.tests_per_variable,
            params.n_tests,
            (E - ratio) / sigma
        ),
    )
}

fn criterion_11() -> (bool, String) {
    let mut cases: Vec<(PoolDesign, f64)> = girth6_battery();
    cases.extend(fkg_battery());
    cases.push((pools(3, &[&[0, 1], &[1, 2]]), 0.5));
    cases.push((pools(2, &[&[0, 1], &[0, 1]]), 0.5));
    let mut worst = f64::INFINITY;
    let mut bad = 0;
    for (d, p) in &cases {
        let e = exhaustive_expected_tests(d, &ctx(*p)).expect("small N");
        let floor = d.n_variables() as f64 * p * p.log2().abs();
        worst = worst.min(e.mean - floor);
        if e.mean < floor {
            bad += 1;
        }
    }
    (
        bad == 0,
        format!(
            "{} exhaustive means, {bad} below the floor, min margin {worst:.4}",
            cases.len()
        ),
    )
}

/// Spec used by the determinism check.
pub fn determinism_spec() -> ExperimentSpec {
    ExperimentSpec {
        mode: Mode::BetaSweep,
        beta: 0.25,
        p: None,
        n_grid: vec![1 << 8, 1 << 10, 1 << 12],
        families: vec![
            Family::RegularRegularGirth6,
            Family::RegularPoisson,
            Family::PoissonPoisson,
        ],
        trials: None,
        design_samples: 4,
        mc_max_n: 1 << 10,
        max_trials: 2000,
        seed: 12,
    }
}

fn strip_comment(csv: &str) -> &str {
    csv.split_once('\n').map_or("", |(_, rest)| rest)
}

fn criterion_12() -> (bool, String) {
    let spec = determinism_spec();
    let run = || run_experiment(&spec).and_then(|rows| to_csv(&spec, &rows));
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let same = strip_comment(&a) == strip_comment(&b);
            let lines = a.lines().count();
            (
                same && lines > 1,
                format!("{lines} lines, identical after the comment line: {same}"),
            )
        }
        (Err(e), _) | (_, Err(e)) => (false, format!("{e:#}")),
    }
}
