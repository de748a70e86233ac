//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its verdict line; exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratx::oracle::{self, CheckReport};
use stratx::synth::{self, WEATHER_BASE};
use stratx::{catstratpd, stratpd, CatStratPDParams, ColumnMeta, Dataset, StratPDParams};

const SEED: u64 = 0;

const SLOPE_RANGE: (f64, f64) = (9.5, 10.5);
const PREGNANCY_RANGE: (f64, f64) = (39.5, 40.5);
const BODYWEIGHT_BUDGET: Duration = Duration::from_secs(2);
const QUADRATIC_MAX_ERR: f64 = 0.02;
const NOISY_MEAN_ERR: f64 = 0.10;
const NOISY_SEEDS: u64 = 10;
const WEATHER_PAIR_TOL: f64 = 2.0;
const IRRELEVANT_TV: f64 = 0.05;
const ORACLE_CASES: u64 = 50;
const NUMERIC_BUDGET: Duration = Duration::from_secs(5);
const CATEGORICAL_BUDGET: Duration = Duration::from_secs(30);
const HIGH_CARD_LEVELS: usize = 1000;
const PERF_ROWS: usize = 30_000;

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn range(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn col(ds: &Dataset, name: &str) -> usize {
    ds.column_index(name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn code(ds: &Dataset, j: usize, label: &str) -> usize {
    ds.meta(j)
        .unwrap()
        .category_labels
        .iter()
        .position(|l| l == label)
        .unwrap()
}

fn height_slope() -> Verdict {
    let ds = synth::gen_bodyweight(2000, SEED);
    let j = col(&ds, "height");
    let (curve, t) = timed(|| stratpd(&ds, j, &StratPDParams::default()));
    let curve = curve.unwrap();
    let slope = ls_slope(&curve.x, &curve.pd_y);
    verdict(
        (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope) && t < BODYWEIGHT_BUDGET,
        format!(
            "slope {slope:.4} (want {SLOPE_RANGE:?}), {:.3}s",
            t.as_secs_f64()
        ),
    )
}

fn pregnancy_effect() -> Verdict {
    let ds = synth::gen_bodyweight(2000, SEED);
    let j = col(&ds, "pregnant");
    let (effect, t) = timed(|| catstratpd(&ds, j, &CatStratPDParams::default()));
    let effect = effect.unwrap();
    let gap = effect.delta[code(&ds, j, "1")] - effect.delta[code(&ds, j, "0")];
    verdict(
        (PREGNANCY_RANGE.0..=PREGNANCY_RANGE.1).contains(&gap) && t < BODYWEIGHT_BUDGET,
        format!(
            "delta gap {gap:.4} (want {PREGNANCY_RANGE:?}), {:.3}s",
            t.as_secs_f64()
        ),
    )
}

/// Errors of the x1 curve against x1² shifted to the first kept point.
fn quadratic_errors(sigma: f64, seed: u64) -> (Vec<f64>, f64) {
    let ds = synth::gen_noisy_quadratic(1000, sigma, seed);
    let curve = stratpd(&ds, col(&ds, "x1"), &StratPDParams::default()).unwrap();
    let x0 = curve.x[0];
    let errs = curve
        .x
        .iter()
        .zip(&curve.pd_y)
        .map(|(&x, &y)| (y - (x * x - x0 * x0)).abs())
        .collect();
    (errs, range(&curve.pd_y))
}

fn noiseless_quadratic() -> Verdict {
    let (errs, r) = quadratic_errors(0.0, SEED);
    let max = errs.iter().copied().fold(0.0, f64::max);
    verdict(
        max <= QUADRATIC_MAX_ERR * r,
        format!("max error {max:.4} vs limit {:.4}", QUADRATIC_MAX_ERR * r),
    )
}

fn noise_resilience() -> Verdict {
    let (mut err_sum, mut range_sum) = (0.0, 0.0);
    for seed in 0..NOISY_SEEDS {
        let (errs, r) = quadratic_errors(1.0, seed);
        err_sum += errs.iter().sum::<f64>() / errs.len() as f64;
        range_sum += r;
    }
    let (mae, r) = (err_sum / NOISY_SEEDS as f64, range_sum / NOISY_SEEDS as f64);
    verdict(
        mae <= NOISY_MEAN_ERR * r,
        format!("mean abs error {mae:.4} vs limit {:.4}", NOISY_MEAN_ERR * r),
    )
}

fn weather_baselines() -> Verdict {
    let ds = synth::gen_weather(3, SEED);
    let j = col(&ds, "state");
    let effect = catstratpd(&ds, j, &CatStratPDParams::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (a, (sa, ba)) in WEATHER_BASE.iter().enumerate() {
        for (sb, bb) in &WEATHER_BASE[a + 1..] {
            let got = effect.delta[code(&ds, j, sa)] - effect.delta[code(&ds, j, sb)];
            worst = worst.max((got - (ba - bb)).abs());
        }
    }
    verdict(
        worst <= WEATHER_PAIR_TOL,
        format!("worst pairwise miss {worst:.4} (tolerance {WEATHER_PAIR_TOL})"),
    )
}

fn irrelevant_feature() -> Verdict {
    let ds = synth::gen_interaction(2000, SEED);
    let curve = stratpd(&ds, col(&ds, "x3"), &StratPDParams::default()).unwrap();
    let tv: f64 = curve.pd_y.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let limit = IRRELEVANT_TV * range(ds.response());
    verdict(
        tv <= limit,
        format!("total variation {tv:.4} vs limit {limit:.4}"),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut report = CheckReport::default();
    for seed in 0..ORACLE_CASES {
        oracle::check_all_columns(&oracle::random_case(seed), seed, &mut report).unwrap();
    }
    for m in &report.mismatches {
        println!("    {m}");
    }
    verdict(
        report.mismatches.is_empty(),
        format!(
            "{} cases, {} comparisons, {} mismatches",
            report.cases,
            report.comparisons,
            report.mismatches.len()
        ),
    )
}

fn marginal_limit() -> Verdict {
    // coarse grid so unique values repeat
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    let n = 300;
    let x: Vec<f64> = (0..n)
        .map(|_| (r.random::<f64>() * 40.0).round() / 4.0)
        .collect();
    let z: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let y: Vec<f64> = x
        .iter()
        .zip(&z)
        .map(|(a, b)| a * a + 3.0 * b + r.random::<f64>())
        .collect();
    let ds = Dataset::new(
        vec![x.clone(), z],
        vec![ColumnMeta::numeric("x"), ColumnMeta::numeric("z")],
        y.clone(),
    )
    .unwrap();
    let params = StratPDParams {
        min_samples_leaf: n,
        min_slopes_per_x: 1,
        ..Default::default()
    };
    let curve = stratpd(&ds, 0, &params).unwrap();

    let mut ux = x.clone();
    ux.sort_by(f64::total_cmp);
    ux.dedup();
    let means: Vec<f64> = ux
        .iter()
        .map(|&u| {
            let v: Vec<f64> = x
                .iter()
                .zip(&y)
                .filter(|(a, _)| **a == u)
                .map(|(_, b)| *b)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    // no slope spans the largest value, so it is never kept
    let kept = &ux[..ux.len() - 1];
    let mut expected = vec![0.0];
    for k in 0..kept.len() - 1 {
        let gap = ux[k + 1] - ux[k];
        let slope = (means[k + 1] - means[k]) / gap;
        expected.push(expected[k] + slope * gap);
    }
    let same = curve.x == kept && curve.pd_y == expected;
    verdict(
        same,
        format!(
            "{} points, curve {} the marginal",
            kept.len(),
            if same { "equals" } else { "differs from" }
        ),
    )
}

fn high_cardinality(rows: usize, levels: usize) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    let base: Vec<f64> = (0..levels).map(|_| r.random_range(0.0..100.0)).collect();
    let mut cats: Vec<f64> = (0..rows).map(|i| (i % levels) as f64).collect();
    for i in (1..rows).rev() {
        cats.swap(i, r.random_range(0..=i));
    }
    let x: Vec<f64> = (0..rows).map(|_| r.random_range(0.0..10.0)).collect();
    let y = cats
        .iter()
        .zip(&x)
        .map(|(&c, &v)| base[c as usize] + v * v + r.random::<f64>())
        .collect();
    let labels = (0..levels).map(|k| format!("m{k:04}")).collect();
    Dataset::new(
        vec![cats, x],
        vec![
            ColumnMeta::categorical("model", labels),
            ColumnMeta::numeric("x"),
        ],
        y,
    )
    .unwrap()
}

fn performance() -> Verdict {
    let ds = synth::gen_noisy_quadratic(PERF_ROWS, 1.0, SEED);
    let (curve, t_num) = timed(|| stratpd(&ds, col(&ds, "x1"), &StratPDParams::default()));
    curve.unwrap();
    let ds = high_cardinality(PERF_ROWS, HIGH_CARD_LEVELS);
    let (effect, t_cat) = timed(|| catstratpd(&ds, 0, &CatStratPDParams::default()));
    effect.unwrap();
    verdict(
        t_num <= NUMERIC_BUDGET && t_cat <= CATEGORICAL_BUDGET,
        format!(
            "numeric {:.3}s (budget {}s), {HIGH_CARD_LEVELS}-level categorical {:.3}s (budget {}s)",
            t_num.as_secs_f64(),
            NUMERIC_BUDGET.as_secs(),
            t_cat.as_secs_f64(),
            CATEGORICAL_BUDGET.as_secs()
        ),
    )
}

fn run_cli(dir: &Path, tag: &str) -> Vec<Vec<u8>> {
    let bin = env!("CARGO_BIN_EXE_stratx");
    let data = dir.join(format!("weight_{tag}.csv"));
    let curve = dir.join(format!("curve_{tag}.csv"));
    let effect = dir.join(format!("effect_{tag}.csv"));
    let run = |args: &[&str]| {
        let status = Command::new(bin).args(args).output().unwrap().status;
        assert!(status.success(), "stratx {args:?} failed");
    };
    run(&[
        "synth",
        "--kind",
        "bodyweight",
        "--n",
        "1000",
        "--seed",
        "7",
        "--out",
        data.to_str().unwrap(),
    ]);
    let common = [
        "--input",
        data.to_str().unwrap(),
        "--response",
        "weight",
        "--categorical",
        "sex,pregnant",
        "--ntrials",
        "3",
        "--seed",
        "7",
    ];
    let mut pd = vec![
        "pd",
        "--feature",
        "height",
        "--out",
        curve.to_str().unwrap(),
    ];
    pd.extend(common);
    run(&pd);
    let mut cat = vec![
        "catpd",
        "--feature",
        "pregnant",
        "--out",
        effect.to_str().unwrap(),
    ];
    cat.extend(common);
    run(&cat);
    [data, curve, effect]
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect()
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let a = run_cli(dir.path(), "a");
    let b = run_cli(dir.path(), "b");
    let same = a == b && a.iter().all(|f| !f.is_empty());
    verdict(
        same,
        format!(
            "dataset, curve and effect CSVs {}",
            if same { "byte-identical" } else { "differ" }
        ),
    )
}

fn main() {
    let criteria: [Check; 10] = [
        ("height slope", height_slope),
        ("pregnancy effect", pregnancy_effect),
        ("noiseless quadratic", noiseless_quadratic),
        ("noise resilience", noise_resilience),
        ("weather baselines", weather_baselines),
        ("irrelevant feature", irrelevant_feature),
        ("oracle equivalence", oracle_equivalence),
        ("marginal limit", marginal_limit),
        ("performance", performance),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
