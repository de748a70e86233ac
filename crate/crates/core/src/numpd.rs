//! Partial dependence for a numeric feature.
//!
//! Within each stratum, forward differences of mean `y` between adjacent
//! unique `x_j` values estimate the partial derivative. Slopes whose
//! half-open range `[x_lo, x_hi)` covers a point are averaged across strata,
//! points with too few slopes are dropped, and the survivors are integrated
//! left to right starting from zero.

use log::warn;
use rand::Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::stratify::{fit_stratification, StratifyParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeSegment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PDCurve {
    /// Kept unique values of the feature, strictly increasing.
    pub x: Vec<f64>,
    /// Integrated partial dependence; `pd_y[0] == 0`.
    pub pd_y: Vec<f64>,
    /// Number of slopes supporting each kept point.
    pub counts: Vec<usize>,
    /// Rows that sat in strata with a single unique feature value.
    pub ignored_rows: usize,
}

impl PDCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Linear interpolation of `pd_y` at `x`, `None` outside the kept range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (first, last) = (*self.x.first()?, *self.x.last()?);
        if x < first || x > last {
            return None;
        }
        let i = self.x.partition_point(|&v| v < x);
        if self.x[i] == x {
            return Some(self.pd_y[i]);
        }
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let (y0, y1) = (self.pd_y[i - 1], self.pd_y[i]);
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratPDParams {
    pub min_samples_leaf: usize,
    pub min_slopes_per_x: usize,
    pub ntrials: usize,
    pub max_features: f64,
    pub rng_seed: u64,
}

impl Default for StratPDParams {
    fn default() -> Self {
        StratPDParams {
            min_samples_leaf: 10,
            min_slopes_per_x: 5,
            ntrials: 1,
            max_features: 1.0,
            rng_seed: 0,
        }
    }
}

impl StratPDParams {
    pub fn validate(&self) -> Result<()> {
        self.stratify(self.rng_seed).validate()?;
        if self.min_slopes_per_x < 1 {
            return Err(Error::InvalidParams(
                "min_slopes_per_x must be at least 1".into(),
            ));
        }
        if self.ntrials < 1 {
            return Err(Error::InvalidParams("ntrials must be at least 1".into()));
        }
        Ok(())
    }

    fn stratify(&self, seed: u64) -> StratifyParams {
        StratifyParams {
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
            rng_seed: seed,
        }
    }
}

/// Sorted distinct values.
pub fn unique_sorted(values: &[f64]) -> Vec<f64> {
    let mut u = values.to_vec();
    u.sort_unstable_by(f64::total_cmp);
    u.dedup_by(|a, b| a == b);
    u
}

/// Forward-difference slopes between adjacent unique `x` values of one
/// stratum, using the mean `y` at each unique value.
pub fn leaf_slopes(xj_vals: &[f64], y_vals: &[f64]) -> Vec<SlopeSegment> {
    debug_assert_eq!(xj_vals.len(), y_vals.len());
    let mut pairs: Vec<(f64, f64)> = xj_vals
        .iter()
        .copied()
        .zip(y_vals.iter().copied())
        .collect();
    // stable: equal x keep their row order, which fixes the summation order
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut means: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let x = pairs[i].0;
        let mut sum = 0.0;
        let mut k = 0usize;
        while i < pairs.len() && pairs[i].0 == x {
            sum += pairs[i].1;
            k += 1;
            i += 1;
        }
        means.push((x, sum / k as f64));
    }

    means
        .windows(2)
        .map(|w| SlopeSegment {
            x_lo: w[0].0,
            x_hi: w[1].0,
            slope: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
        })
        .collect()
}

/// Counts and averages the slopes covering each value of `ux`, where a
/// segment covers `x` when `x_lo <= x < x_hi`. Uncovered points get `NaN`.
pub fn aggregate_slopes(segments: &[SlopeSegment], ux: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut counts = vec![0usize; ux.len()];
    let mut sums = vec![0.0f64; ux.len()];
    for seg in segments {
        let lo = ux.partition_point(|&v| v < seg.x_lo);
        let hi = ux.partition_point(|&v| v < seg.x_hi);
        for i in lo..hi {
            sums[i] += seg.slope;
            counts[i] += 1;
        }
    }
    let delta = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect();
    (counts, delta)
}

/// Drops points with fewer than `min_slopes_per_x` slopes and integrates
/// the rest: each gap between kept points contributes the left point's
/// slope times the gap width.
pub fn filter_and_integrate(
    ux: &[f64],
    delta: &[f64],
    counts: &[usize],
    min_slopes_per_x: usize,
) -> Result<PDCurve> {
    let kept: Vec<usize> = (0..ux.len())
        .filter(|&i| counts[i] >= min_slopes_per_x)
        .collect();
    if kept.len() < 2 {
        return Err(Error::InsufficientSupport);
    }
    let x: Vec<f64> = kept.iter().map(|&i| ux[i]).collect();
    let mut pd_y = Vec::with_capacity(kept.len());
    pd_y.push(0.0);
    let mut acc = 0.0;
    for k in 0..kept.len() - 1 {
        acc += delta[kept[k]] * (x[k + 1] - x[k]);
        pd_y.push(acc);
    }
    Ok(PDCurve {
        x,
        pd_y,
        counts: kept.iter().map(|&i| counts[i]).collect(),
        ignored_rows: 0,
    })
}

/// Partial dependence of `y` on `xj` given precomputed strata.
///
/// Leaves are visited in the order given, which fixes the order slopes are
/// summed in.
pub fn curve_from_leaves<L: AsRef<[usize]> + Sync>(
    xj: &[f64],
    y: &[f64],
    leaves: &[L],
    min_slopes_per_x: usize,
) -> Result<PDCurve> {
    let per_leaf: Vec<Vec<SlopeSegment>> = leaves
        .par_iter()
        .map(|leaf| {
            let rows = leaf.as_ref();
            let xs: Vec<f64> = rows.iter().map(|&r| xj[r]).collect();
            let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
            leaf_slopes(&xs, &ys)
        })
        .collect();

    let ignored_rows = leaves
        .iter()
        .zip(&per_leaf)
        .filter(|(_, segs)| segs.is_empty())
        .map(|(leaf, _)| leaf.as_ref().len())
        .sum();
    let segments: Vec<SlopeSegment> = per_leaf.into_iter().flatten().collect();

    let ux = unique_sorted(xj);
    let (counts, delta) = aggregate_slopes(&segments, &ux);
    let mut curve = filter_and_integrate(&ux, &delta, &counts, min_slopes_per_x)?;
    curve.ignored_rows = ignored_rows;
    Ok(curve)
}

/// Partial dependence curve of the response on numeric column `j`.
///
/// With `ntrials > 1` each trial runs on a bootstrap resample and the
/// trial curves are averaged on the union of their kept points (see
/// [`average_curves`]). Trials that end with too few supported points are
/// skipped; the call fails only if every trial does.
pub fn stratpd(ds: &Dataset, j: usize, params: &StratPDParams) -> Result<PDCurve> {
    params.validate()?;
    let meta = ds.meta(j)?;
    if meta.is_categorical() {
        return Err(Error::NotNumeric(meta.name.clone()));
    }
    if ds.n_features() < 2 {
        return Err(Error::InvalidDataset(
            "need at least one feature besides the one of interest".into(),
        ));
    }
    let n = ds.n_rows();
    if n < 2 * params.min_samples_leaf {
        warn!(
            "only {n} rows for min_samples_leaf={}; strata collapse to the marginal",
            params.min_samples_leaf
        );
    }

    if params.ntrials == 1 {
        return single_trial(ds.features(), ds.response(), j, params, params.rng_seed);
    }

    let trials: Vec<Result<PDCurve>> = (0..params.ntrials)
        .into_par_iter()
        .map(|t| {
            let seed = rng::trial_seed(params.rng_seed, t);
            let rows = bootstrap_rows(n, seed);
            let cols: Vec<Vec<f64>> = ds
                .features()
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect();
            let y: Vec<f64> = rows.iter().map(|&r| ds.response()[r]).collect();
            single_trial(&cols, &y, j, params, seed)
        })
        .collect();

    let mut curves = Vec::with_capacity(trials.len());
    let mut last_err = None;
    for trial in trials {
        match trial {
            Ok(c) => curves.push(c),
            Err(e) => last_err = Some(e),
        }
    }
    if curves.is_empty() {
        return Err(last_err.unwrap_or(Error::InsufficientSupport));
    }
    Ok(average_curves(&curves))
}

fn single_trial(
    columns: &[Vec<f64>],
    y: &[f64],
    j: usize,
    params: &StratPDParams,
    seed: u64,
) -> Result<PDCurve> {
    let others: Vec<&[f64]> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, c)| c.as_slice())
        .collect();
    let tree = fit_stratification(&others, y, &params.stratify(seed))?;
    let curve = curve_from_leaves(&columns[j], y, &tree.leaves(), params.min_slopes_per_x)?;
    if curve.ignored_rows * 2 > y.len() {
        warn!(
            "{} of {} rows sit in strata without variation in the feature and were ignored",
            curve.ignored_rows,
            y.len()
        );
    }
    Ok(curve)
}

pub(crate) fn bootstrap_rows(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, rng::BOOTSTRAP_STREAM);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Averages curves on the union of their kept points.
///
/// At each union point, every curve whose kept range covers it contributes
/// its linearly interpolated value; the rest contribute nothing. Counts add
/// up over curves that kept that exact point, as do ignored rows.
pub fn average_curves(curves: &[PDCurve]) -> PDCurve {
    let all: Vec<f64> = curves.iter().flat_map(|c| c.x.iter().copied()).collect();
    let x = unique_sorted(&all);
    let mut pd_y = Vec::with_capacity(x.len());
    let mut counts = Vec::with_capacity(x.len());
    for &v in &x {
        let mut sum = 0.0;
        let mut covering = 0usize;
        let mut count = 0usize;
        for c in curves {
            if let Some(p) = c.interpolate(v) {
                sum += p;
                covering += 1;
                if let Ok(i) = c.x.binary_search_by(|a| a.total_cmp(&v)) {
                    count += c.counts[i];
                }
            }
        }
        pd_y.push(sum / covering as f64);
        counts.push(count);
    }
    PDCurve {
        x,
        pd_y,
        counts,
        ignored_rows: curves.iter().map(|c| c.ignored_rows).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(x_lo: f64, x_hi: f64, slope: f64) -> SlopeSegment {
        SlopeSegment { x_lo, x_hi, slope }
    }

    #[test]
    fn single_unique_x_yields_nothing() {
        assert!(leaf_slopes(&[5.0, 5.0], &[1.0, 9.0]).is_empty());
    }

    #[test]
    fn slopes_use_mean_y_per_unique_x() {
        assert_eq!(
            leaf_slopes(&[1.0, 1.0, 2.0], &[0.0, 2.0, 3.0]),
            vec![seg(1.0, 2.0, 2.0)]
        );
        assert_eq!(
            leaf_slopes(&[2.0, 0.0, 1.0], &[4.0, 0.0, 1.0]),
            vec![seg(0.0, 1.0, 1.0), seg(1.0, 2.0, 3.0)]
        );
    }

    #[test]
    fn aggregation_uses_half_open_ranges() {
        let (c, d) = aggregate_slopes(
            &[seg(0.0, 2.0, 1.0), seg(1.0, 3.0, 3.0)],
            &[0.0, 1.0, 2.0, 3.0],
        );
        assert_eq!(c, vec![1, 2, 1, 0]);
        assert_eq!(&d[..3], &[1.0, 2.0, 3.0]);
        assert!(d[3].is_nan());

        let (c, d) = aggregate_slopes(&[], &[0.0, 1.0]);
        assert_eq!(c, vec![0, 0]);
        assert!(d.iter().all(|v| v.is_nan()));

        let (c, d) = aggregate_slopes(&[seg(4.0, 7.5, -2.0)], &[4.0, 7.5]);
        assert_eq!(c, vec![1, 0]);
        assert_eq!(d[0], -2.0);
        assert!(d[1].is_nan());
    }

    #[test]
    fn integrates_over_kept_points() {
        let curve =
            filter_and_integrate(&[0.0, 1.0, 2.0], &[1.0, 1.0, f64::NAN], &[5, 5, 0], 5).unwrap();
        assert_eq!(curve.x, vec![0.0, 1.0]);
        assert_eq!(curve.pd_y, vec![0.0, 1.0]);
        assert_eq!(curve.counts, vec![5, 5]);

        let curve = filter_and_integrate(
            &[0.0, 1.0, 2.0, 3.0],
            &[2.0, 2.0, 2.0, f64::NAN],
            &[9, 9, 9, 0],
            5,
        )
        .unwrap();
        assert_eq!(curve.x, vec![0.0, 1.0, 2.0]);
        assert_eq!(curve.pd_y, vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn gaps_bridge_with_left_slope() {
        // x=1 is dropped, so the slope at 0 spans the whole [0, 2] gap
        let curve =
            filter_and_integrate(&[0.0, 1.0, 2.0], &[3.0, 100.0, 1.0], &[6, 1, 6], 5).unwrap();
        assert_eq!(curve.x, vec![0.0, 2.0]);
        assert_eq!(curve.pd_y, vec![0.0, 6.0]);
    }

    #[test]
    fn too_few_kept_points_is_an_error() {
        assert!(matches!(
            filter_and_integrate(&[0.0, 1.0], &[1.0, 1.0], &[4, 4], 5),
            Err(Error::InsufficientSupport)
        ));
        assert!(matches!(
            filter_and_integrate(&[0.0, 1.0], &[1.0, 1.0], &[5, 0], 5),
            Err(Error::InsufficientSupport)
        ));
    }

    #[test]
    fn ignored_rows_count_flat_leaves() {
        let xj = [1.0, 1.0, 1.0, 0.0, 1.0, 2.0];
        let y = [5.0, 6.0, 7.0, 0.0, 1.0, 2.0];
        let leaves = [vec![0, 1, 2], vec![3, 4, 5]];
        let curve = curve_from_leaves(&xj, &y, &leaves, 1).unwrap();
        assert_eq!(curve.ignored_rows, 3);
        assert_eq!(curve.x, vec![0.0, 1.0]);
        assert_eq!(curve.pd_y, vec![0.0, 1.0]);
    }

    #[test]
    fn interpolation() {
        let c = PDCurve {
            x: vec![0.0, 2.0, 3.0],
            pd_y: vec![0.0, 4.0, 1.0],
            counts: vec![5, 5, 5],
            ignored_rows: 0,
        };
        assert_eq!(c.interpolate(1.0), Some(2.0));
        assert_eq!(c.interpolate(3.0), Some(1.0));
        assert_eq!(c.interpolate(-0.5), None);
        assert_eq!(c.interpolate(3.5), None);
    }

    #[test]
    fn averaging_skips_non_covering_curves() {
        let a = PDCurve {
            x: vec![0.0, 2.0],
            pd_y: vec![0.0, 2.0],
            counts: vec![5, 6],
            ignored_rows: 1,
        };
        let b = PDCurve {
            x: vec![1.0, 3.0],
            pd_y: vec![0.0, 4.0],
            counts: vec![7, 8],
            ignored_rows: 2,
        };
        let avg = average_curves(&[a, b]);
        assert_eq!(avg.x, vec![0.0, 1.0, 2.0, 3.0]);
        // x=1: a gives 1, b gives 0; x=2: a gives 2, b gives 2
        assert_eq!(avg.pd_y, vec![0.0, 0.5, 2.0, 4.0]);
        assert_eq!(avg.counts, vec![5, 7, 6, 8]);
        assert_eq!(avg.ignored_rows, 3);
    }

    #[test]
    fn bootstrap_is_seeded() {
        assert_eq!(bootstrap_rows(50, 3), bootstrap_rows(50, 3));
        assert_ne!(bootstrap_rows(50, 3), bootstrap_rows(50, 4));
        assert!(bootstrap_rows(50, 3).iter().all(|&r| r < 50));
    }
}
