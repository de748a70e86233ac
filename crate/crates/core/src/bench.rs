//! Wall-clock scaling of the partial dependence computation.

use std::io::Write;
use std::time::Instant;

use crate::catpd::{catstratpd, CatStratPDParams};
use crate::error::{Error, Result};
use crate::export;
use crate::numpd::{stratpd, StratPDParams};
use crate::synth::{SynthKind, SynthSpec};

pub const RUNS_PER_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    /// Median of [`RUNS_PER_SIZE`] runs.
    pub seconds: f64,
}

/// Column timed when none is named.
pub fn default_feature(kind: SynthKind) -> &'static str {
    match kind {
        SynthKind::Interaction | SynthKind::NoisyQuadratic => "x1",
        SynthKind::Weather => "state",
        SynthKind::Bodyweight => "height",
    }
}

/// Times the computation (not data generation) on generated data of each
/// size. Categorical features run the categorical procedure with the
/// matching subset of `params`.
pub fn run(
    kind: SynthKind,
    sizes: &[usize],
    feature: Option<&str>,
    params: &StratPDParams,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if sizes.contains(&0) || sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams(
            "benchmark sizes must be positive and ascending".into(),
        ));
    }
    let feature = feature.unwrap_or(default_feature(kind));
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let ds = SynthSpec {
            kind,
            n,
            sigma: 1.0,
            seed,
        }
        .generate()?;
        let j = ds
            .column_index(feature)
            .ok_or_else(|| Error::MissingColumn(feature.to_owned()))?;
        let categorical = ds.meta(j)?.is_categorical();
        let mut times = Vec::with_capacity(RUNS_PER_SIZE);
        for _ in 0..RUNS_PER_SIZE {
            let start = Instant::now();
            if categorical {
                catstratpd(
                    &ds,
                    j,
                    &CatStratPDParams {
                        min_samples_leaf: params.min_samples_leaf,
                        ntrials: params.ntrials,
                        max_features: params.max_features,
                        rng_seed: params.rng_seed,
                    },
                )?;
            } else {
                stratpd(&ds, j, params)?;
            }
            times.push(start.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            n,
            seconds: times[times.len() / 2],
        });
    }
    Ok(rows)
}

/// `n,seconds` table.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "seconds"])?;
    for r in rows {
        w.write_record([r.n.to_string(), format!("{:.6}", r.seconds)])?;
    }
    export::flush_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sizes_give_empty_table() {
        let rows = run(
            SynthKind::Bodyweight,
            &[],
            None,
            &StratPDParams::default(),
            0,
        )
        .unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,seconds\n");
    }

    #[test]
    fn rejects_unordered_sizes() {
        assert!(run(
            SynthKind::Bodyweight,
            &[200, 100],
            None,
            &StratPDParams::default(),
            0
        )
        .is_err());
        assert!(run(
            SynthKind::Bodyweight,
            &[0],
            None,
            &StratPDParams::default(),
            0
        )
        .is_err());
    }

    #[test]
    fn times_each_size() {
        let rows = run(
            SynthKind::Weather,
            &[1, 2],
            None,
            &StratPDParams::default(),
            0,
        )
        .unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 2]);
        assert!(rows.iter().all(|r| r.seconds >= 0.0));
    }
}
