//! Seeded synthetic datasets with known partial dependence.
//!
//! Each column draws from its own random stream, so the values of one
//! column do not depend on how many draws another column makes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{encode_categorical, ColumnMeta, Dataset};
use crate::error::{Error, Result};
use crate::rng;

/// State labels and their base temperatures for [`gen_weather`].
pub const WEATHER_BASE: [(&str, f64); 5] = [
    ("AZ", 90.0),
    ("CA", 70.0),
    ("CO", 40.0),
    ("NV", 80.0),
    ("WA", 60.0),
];

pub const WEATHER_SIGMA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Interaction,
    NoisyQuadratic,
    Weather,
    Bodyweight,
}

impl SynthKind {
    pub const ALL: [SynthKind; 4] = [
        SynthKind::Interaction,
        SynthKind::NoisyQuadratic,
        SynthKind::Weather,
        SynthKind::Bodyweight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Interaction => "interaction",
            SynthKind::NoisyQuadratic => "noisy_quadratic",
            SynthKind::Weather => "weather",
            SynthKind::Bodyweight => "bodyweight",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown dataset kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    /// Row count; for weather, readings per state and day.
    pub n: usize,
    /// Noise standard deviation, used by the noisy quadratic only.
    pub sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Dataset> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        Ok(match self.kind {
            SynthKind::Interaction => gen_interaction(self.n, self.seed),
            SynthKind::NoisyQuadratic => gen_noisy_quadratic(self.n, self.sigma, self.seed),
            SynthKind::Weather => gen_weather(self.n, self.seed),
            SynthKind::Bodyweight => gen_bodyweight(self.n, self.seed),
        })
    }
}

fn uniform_column(seed: u64, stream: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut r = rng::stream(seed, stream);
    (0..n).map(|_| r.random_range(lo..hi)).collect()
}

fn normal_column(seed: u64, stream: u64, n: usize, sigma: f64) -> Vec<f64> {
    let mut r = rng::stream(seed, stream);
    (0..n)
        .map(|_| sigma * r.sample::<f64, _>(StandardNormal))
        .collect()
}

fn numeric_dataset(names: &[&str], columns: Vec<Vec<f64>>, y: Vec<f64>, response: &str) -> Dataset {
    let meta = names.iter().map(|&n| ColumnMeta::numeric(n)).collect();
    Dataset::new(columns, meta, y)
        .expect("generated columns are complete")
        .with_response_name(response)
}

/// `y = x1² + x1·x2 + 5·x1·sin(3·x2) + 10` with `x1, x2, x3 ~ U(0, 10)`;
/// `x3` has no effect.
pub fn gen_interaction(n: usize, seed: u64) -> Dataset {
    let x1 = uniform_column(seed, 1, n, 0.0, 10.0);
    let x2 = uniform_column(seed, 2, n, 0.0, 10.0);
    let x3 = uniform_column(seed, 3, n, 0.0, 10.0);
    let y = (0..n).map(|i| interaction_response(x1[i], x2[i])).collect();
    numeric_dataset(&["x1", "x2", "x3"], vec![x1, x2, x3], y, "y")
}

pub fn interaction_response(x1: f64, x2: f64) -> f64 {
    x1 * x1 + x1 * x2 + 5.0 * x1 * (3.0 * x2).sin() + 10.0
}

/// `y = x1² + x2 + 10 + ε` with `x1, x2 ~ U(-2, 2)`, `ε ~ N(0, sigma)`.
pub fn gen_noisy_quadratic(n: usize, sigma: f64, seed: u64) -> Dataset {
    let x1 = uniform_column(seed, 1, n, -2.0, 2.0);
    let x2 = uniform_column(seed, 2, n, -2.0, 2.0);
    let eps = normal_column(seed, 3, n, sigma);
    let y = (0..n)
        .map(|i| quadratic_response(x1[i], x2[i]) + eps[i])
        .collect();
    numeric_dataset(&["x1", "x2"], vec![x1, x2], y, "y")
}

pub fn quadratic_response(x1: f64, x2: f64) -> f64 {
    x1 * x1 + x2 + 10.0
}

/// Daily temperatures for five states: `readings` rows per state per day of
/// a 365-day year, `y = base[state] + 10·sin(2π·day/365 + π) + ε` with
/// `ε ~ N(0, 4)`.
pub fn gen_weather(readings: usize, seed: u64) -> Dataset {
    gen_weather_with_noise(readings, WEATHER_SIGMA, seed)
}

pub fn gen_weather_with_noise(readings: usize, sigma: f64, seed: u64) -> Dataset {
    let mut state = Vec::new();
    let mut day = Vec::new();
    for _ in 0..readings {
        for (code, _) in WEATHER_BASE.iter().enumerate() {
            for d in 1..=365 {
                state.push(code as f64);
                day.push(d as f64);
            }
        }
    }
    let n = state.len();
    let eps = normal_column(seed, 1, n, sigma);
    let y = (0..n)
        .map(|i| weather_response(state[i] as usize, day[i]) + eps[i])
        .collect();
    let labels = WEATHER_BASE.iter().map(|(s, _)| s.to_string()).collect();
    Dataset::new(
        vec![state, day],
        vec![
            ColumnMeta::categorical("state", labels),
            ColumnMeta::numeric("dayofyear"),
        ],
        y,
    )
    .expect("generated columns are complete")
    .with_response_name("temperature")
}

/// Noiseless temperature for state code `state` (index into
/// [`WEATHER_BASE`]) on `day`.
pub fn weather_response(state: usize, day: f64) -> f64 {
    WEATHER_BASE[state].1 + 10.0 * (2.0 * PI / 365.0 * day + PI).sin()
}

/// Body weight with codependent sex, pregnancy, height and education:
///
/// `weight = 120 + 10·(height − min height) + 40·pregnant − 1.5·education`
///
/// where half the rows are female, half of those pregnant, female height is
/// `65 + U(-4.5, 5)` and male `68 + U(-7, 8)`, female education `12 + U(0, 8)`
/// and male `10 + U(0, 8)`. The minimum height is taken over the generated
/// sample. `sex` and `pregnant` are categorical.
pub fn gen_bodyweight(n: usize, seed: u64) -> Dataset {
    let mut sex_r = rng::stream(seed, 1);
    let mut preg_r = rng::stream(seed, 2);
    let mut height_r = rng::stream(seed, 3);
    let mut edu_r = rng::stream(seed, 4);

    let mut sex = Vec::with_capacity(n);
    let mut pregnant = Vec::with_capacity(n);
    let mut height = Vec::with_capacity(n);
    let mut education = Vec::with_capacity(n);
    for _ in 0..n {
        let female = sex_r.random_bool(0.5);
        // always draw so every stream advances once per row
        let preg = preg_r.random_bool(0.5);
        let h_female = 65.0 + height_r.random_range(-4.5..5.0);
        let h_male = 68.0 + height_r.random_range(-7.0..8.0);
        let e = edu_r.random_range(0.0..8.0);
        sex.push(if female { "F" } else { "M" });
        pregnant.push(if female && preg { "1" } else { "0" });
        height.push(if female { h_female } else { h_male });
        education.push(if female { 12.0 + e } else { 10.0 + e });
    }

    let min_height = height.iter().copied().fold(f64::INFINITY, f64::min);
    let weight = (0..n)
        .map(|i| {
            let preg = if pregnant[i] == "1" { 1.0 } else { 0.0 };
            120.0 + 10.0 * (height[i] - min_height) + 40.0 * preg - 1.5 * education[i]
        })
        .collect();

    let (sex_codes, sex_labels) = encode_categorical(&sex);
    let (preg_codes, preg_labels) = encode_categorical(&pregnant);
    Dataset::new(
        vec![sex_codes, preg_codes, height, education],
        vec![
            ColumnMeta::categorical("sex", sex_labels),
            ColumnMeta::categorical("pregnant", preg_labels),
            ColumnMeta::numeric("height"),
            ColumnMeta::numeric("education"),
        ],
        weight,
    )
    .expect("generated columns are complete")
    .with_response_name("weight")
}
