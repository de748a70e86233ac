//! Partial dependence for a categorical feature.
//!
//! Each stratum yields per-category mean responses relative to a randomly
//! chosen reference category present in it. Strata are folded into one
//! running delta vector by count-weighted averaging, re-basing each stratum
//! onto a category it shares with the running vector. Strata that never
//! share a category are left out and their rows reported as ignored.

use rand::Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numpd::bootstrap_rows;
use crate::rng;
use crate::stratify::{fit_stratification, StratifyParams};

/// More passes than this with work still merging is treated as pathological.
pub const MAX_MERGE_PASSES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeafDeltas {
    /// Mean response minus the reference category's mean; `NaN` if absent.
    pub delta: Vec<f64>,
    pub counts: Vec<usize>,
    pub refcat: usize,
    /// Categories present in the leaf, ascending.
    pub categories: Vec<usize>,
}

impl LeafDeltas {
    pub fn n_rows(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatEffect {
    /// Per-category effect; `NaN` marks an unsupported category.
    pub delta: Vec<f64>,
    pub counts: Vec<usize>,
    pub ignored_rows: usize,
    /// Whether `delta` has zero count-weighted mean over supported entries.
    pub centered: bool,
}

impl CatEffect {
    pub fn n_supported(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatStratPDParams {
    pub min_samples_leaf: usize,
    pub ntrials: usize,
    pub max_features: f64,
    pub rng_seed: u64,
}

impl Default for CatStratPDParams {
    fn default() -> Self {
        CatStratPDParams {
            min_samples_leaf: 10,
            ntrials: 1,
            max_features: 1.0,
            rng_seed: 0,
        }
    }
}

impl CatStratPDParams {
    pub fn validate(&self) -> Result<()> {
        self.stratify(self.rng_seed).validate()?;
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

struct CategoryMeans {
    means: Vec<f64>,
    counts: Vec<usize>,
    categories: Vec<usize>,
}

fn category_means(cats: &[usize], y: &[f64], n_cats: usize) -> CategoryMeans {
    let mut sums = vec![0.0; n_cats];
    let mut counts = vec![0usize; n_cats];
    for (&c, &v) in cats.iter().zip(y) {
        sums[c] += v;
        counts[c] += 1;
    }
    let categories: Vec<usize> = (0..n_cats).filter(|&k| counts[k] > 0).collect();
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect();
    CategoryMeans {
        means,
        counts,
        categories,
    }
}

impl CategoryMeans {
    fn into_deltas<R: Rng + ?Sized>(self, rng: &mut R) -> LeafDeltas {
        let refcat = self.categories[rng.random_range(0..self.categories.len())];
        let base = self.means[refcat];
        let delta = self.means.iter().map(|&m| m - base).collect();
        LeafDeltas {
            delta,
            counts: self.counts,
            refcat,
            categories: self.categories,
        }
    }
}

/// Per-category mean deltas of one stratum against a reference category
/// drawn uniformly from those present.
pub fn leaf_deltas<R: Rng + ?Sized>(
    cat_vals: &[usize],
    y_vals: &[f64],
    n_cats: usize,
    rng: &mut R,
) -> LeafDeltas {
    debug_assert_eq!(cat_vals.len(), y_vals.len());
    category_means(cat_vals, y_vals, n_cats).into_deltas(rng)
}

/// Folds leaf delta vectors into one centered effect vector.
///
/// The first leaf seeds the running vector; later passes merge any leaf
/// that shares a category with it, until a pass merges nothing.
pub fn merge_deltas<R: Rng + ?Sized>(
    leaves: &[LeafDeltas],
    n_cats: usize,
    rng: &mut R,
) -> Result<CatEffect> {
    let first = leaves
        .first()
        .ok_or_else(|| Error::InvalidParams("no leaves to merge".into()))?;
    debug_assert!(leaves.iter().all(|l| l.delta.len() == n_cats));
    let mut delta = first.delta.clone();
    let mut counts = first.counts.clone();

    let mut work: Vec<usize> = (1..leaves.len()).collect();
    let mut passes = 0;
    let mut common = Vec::new();
    while !work.is_empty() {
        if passes == MAX_MERGE_PASSES {
            return Err(Error::MergePassLimit {
                passes,
                remaining: work.len(),
            });
        }
        passes += 1;
        let mut remaining = Vec::new();
        for &l in &work {
            let leaf = &leaves[l];
            common.clear();
            common.extend(leaf.categories.iter().copied().filter(|&k| counts[k] > 0));
            if common.is_empty() {
                remaining.push(l);
                continue;
            }
            let cat = common[rng.random_range(0..common.len())];
            let (leaf_at, running_at) = (leaf.delta[cat], delta[cat]);
            for &k in &leaf.categories {
                let rebased = leaf.delta[k] - leaf_at + running_at;
                let (c, cl) = (counts[k], leaf.counts[k]);
                delta[k] = if c == 0 {
                    rebased
                } else {
                    (c as f64 * delta[k] + cl as f64 * rebased) / (c + cl) as f64
                };
                counts[k] = c + cl;
            }
        }
        let progressed = remaining.len() < work.len();
        work = remaining;
        if !progressed {
            break;
        }
    }

    let ignored_rows = work.iter().map(|&l| leaves[l].n_rows()).sum();
    center(&mut delta, &counts);
    Ok(CatEffect {
        delta,
        counts,
        ignored_rows,
        centered: true,
    })
}

/// Subtracts the count-weighted mean of the supported entries.
fn center(delta: &mut [f64], counts: &[usize]) {
    let mut weighted = 0.0;
    let mut total = 0usize;
    for (&d, &c) in delta.iter().zip(counts) {
        if c > 0 {
            weighted += c as f64 * d;
            total += c;
        }
    }
    if total == 0 {
        return;
    }
    let mean = weighted / total as f64;
    for (d, &c) in delta.iter_mut().zip(counts) {
        if c > 0 {
            *d -= mean;
        }
    }
}

/// Category effect of `cats` on `y` given precomputed strata.
///
/// Reference categories are drawn leaf by leaf in the order given, then
/// merge choices, all from `rng`.
pub fn effect_from_leaves<L, R>(
    cats: &[usize],
    y: &[f64],
    n_cats: usize,
    leaves: &[L],
    rng: &mut R,
) -> Result<CatEffect>
where
    L: AsRef<[usize]> + Sync,
    R: Rng + ?Sized,
{
    let stats: Vec<CategoryMeans> = leaves
        .par_iter()
        .map(|leaf| {
            let rows = leaf.as_ref();
            let c: Vec<usize> = rows.iter().map(|&r| cats[r]).collect();
            let v: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
            category_means(&c, &v, n_cats)
        })
        .collect();
    let deltas: Vec<LeafDeltas> = stats.into_iter().map(|s| s.into_deltas(rng)).collect();
    merge_deltas(&deltas, n_cats, rng)
}

/// Category effect of the response on categorical column `j`.
///
/// With `ntrials > 1`, trials on bootstrap resamples are averaged entry by
/// entry over the trials that support each category, counts and ignored
/// rows are summed, and the average is re-centered.
pub fn catstratpd(ds: &Dataset, j: usize, params: &CatStratPDParams) -> Result<CatEffect> {
    params.validate()?;
    let meta = ds.meta(j)?;
    if !meta.is_categorical() {
        return Err(Error::NotCategorical(meta.name.clone()));
    }
    if ds.n_features() < 2 {
        return Err(Error::InvalidDataset(
            "need at least one feature besides the one of interest".into(),
        ));
    }
    let n_cats = meta.n_categories();
    let cats: Vec<usize> = ds.column(j)?.iter().map(|&c| c as usize).collect();

    if params.ntrials == 1 {
        return single_trial(
            ds.features(),
            &cats,
            ds.response(),
            j,
            n_cats,
            params,
            params.rng_seed,
        );
    }

    let n = ds.n_rows();
    let trials: Vec<CatEffect> = (0..params.ntrials)
        .into_par_iter()
        .map(|t| {
            let seed = rng::trial_seed(params.rng_seed, t);
            let rows = bootstrap_rows(n, seed);
            let cols: Vec<Vec<f64>> = ds
                .features()
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect();
            let c: Vec<usize> = rows.iter().map(|&r| cats[r]).collect();
            let y: Vec<f64> = rows.iter().map(|&r| ds.response()[r]).collect();
            single_trial(&cols, &c, &y, j, n_cats, params, seed)
        })
        .collect::<Result<_>>()?;
    Ok(average_effects(&trials))
}

fn single_trial(
    columns: &[Vec<f64>],
    cats: &[usize],
    y: &[f64],
    j: usize,
    n_cats: usize,
    params: &CatStratPDParams,
    seed: u64,
) -> Result<CatEffect> {
    let others: Vec<&[f64]> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, c)| c.as_slice())
        .collect();
    let tree = fit_stratification(&others, y, &params.stratify(seed))?;
    let mut rng = rng::stream(seed, rng::REFCAT_STREAM);
    effect_from_leaves(cats, y, n_cats, &tree.leaves(), &mut rng)
}

/// Entry-wise mean over the effects supporting each category.
pub fn average_effects(effects: &[CatEffect]) -> CatEffect {
    let n_cats = effects.first().map_or(0, |e| e.delta.len());
    let mut delta = vec![f64::NAN; n_cats];
    let mut counts = vec![0usize; n_cats];
    for k in 0..n_cats {
        let mut sum = 0.0;
        let mut m = 0usize;
        for e in effects {
            if e.counts[k] > 0 {
                sum += e.delta[k];
                m += 1;
                counts[k] += e.counts[k];
            }
        }
        if m > 0 {
            delta[k] = sum / m as f64;
        }
    }
    center(&mut delta, &counts);
    CatEffect {
        delta,
        counts,
        ignored_rows: effects.iter().map(|e| e.ignored_rows).sum(),
        centered: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ZeroRng;

    fn leaf(delta: Vec<f64>, counts: Vec<usize>, refcat: usize) -> LeafDeltas {
        let categories = (0..counts.len()).filter(|&k| counts[k] > 0).collect();
        LeafDeltas {
            delta,
            counts,
            refcat,
            categories,
        }
    }

    fn rng() -> ZeroRng {
        ZeroRng
    }

    #[test]
    fn deltas_against_reference() {
        // a zero-output rng always picks the first candidate
        let d = leaf_deltas(&[0, 0, 1], &[2.0, 4.0, 10.0], 2, &mut rng());
        assert_eq!(d.refcat, 0);
        assert_eq!(d.delta, vec![0.0, 7.0]);
        assert_eq!(d.counts, vec![2, 1]);
    }

    #[test]
    fn single_category_leaf() {
        let d = leaf_deltas(&[2, 2], &[3.0, 5.0], 4, &mut rng());
        assert_eq!(d.refcat, 2);
        assert_eq!(d.delta[2], 0.0);
        assert_eq!(d.counts, vec![0, 0, 2, 0]);
        assert!(d.delta[0].is_nan() && d.delta[1].is_nan() && d.delta[3].is_nan());
    }

    #[test]
    fn equal_means_give_zero_for_any_reference() {
        for seed in 0..8 {
            let mut r = rng::stream(seed, 0);
            let d = leaf_deltas(&[0, 1], &[3.5, 3.5], 2, &mut r);
            assert_eq!(d.delta, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn merges_then_centers() {
        let a = leaf(vec![0.0, 10.0], vec![1, 1], 0);
        let b = leaf(vec![0.0, 20.0], vec![1, 1], 0);
        let e = merge_deltas(&[a, b], 2, &mut rng()).unwrap();
        assert_eq!(e.delta, vec![-7.5, 7.5]);
        assert_eq!(e.counts, vec![2, 2]);
        assert_eq!(e.ignored_rows, 0);
        assert!(e.centered);
    }

    #[test]
    fn single_leaf_is_just_centered() {
        let a = leaf(vec![0.0, 4.0, f64::NAN], vec![3, 1, 0], 0);
        let e = merge_deltas(&[a], 3, &mut rng()).unwrap();
        assert_eq!(e.delta[..2], [-1.0, 3.0]);
        assert!(e.delta[2].is_nan());
    }

    #[test]
    fn disjoint_leaves_are_ignored() {
        let a = leaf(vec![0.0, f64::NAN], vec![4, 0], 0);
        let b = leaf(vec![f64::NAN, 0.0], vec![0, 3], 1);
        let e = merge_deltas(&[a, b], 2, &mut rng()).unwrap();
        assert_eq!(e.ignored_rows, 3);
        assert_eq!(e.counts, vec![4, 0]);
        assert_eq!(e.delta[0], 0.0);
        assert!(e.delta[1].is_nan());
    }

    #[test]
    fn rebasing_aligns_reference_categories() {
        // leaf b is relative to category 1; sharing category 1 with the
        // running vector puts it on a's scale before averaging
        let a = leaf(vec![0.0, 10.0, f64::NAN], vec![1, 1, 0], 0);
        let b = leaf(vec![f64::NAN, 0.0, 5.0], vec![0, 1, 1], 1);
        let e = merge_deltas(&[a, b], 3, &mut rng()).unwrap();
        // uncentered: (0, 10, 15), counts (1, 2, 1) -> mean 35/4
        assert_eq!(e.delta, vec![-8.75, 1.25, 6.25]);
    }

    #[test]
    fn later_pass_picks_up_chained_leaves() {
        let a = leaf(vec![0.0, f64::NAN, f64::NAN], vec![1, 0, 0], 0);
        let c = leaf(vec![f64::NAN, 0.0, 2.0], vec![0, 1, 1], 1);
        let b = leaf(vec![0.0, 1.0, f64::NAN], vec![1, 1, 0], 0);
        let e = merge_deltas(&[a, c, b], 3, &mut rng()).unwrap();
        assert_eq!(e.ignored_rows, 0);
        // uncentered (0, 1, 3) with counts (2, 2, 1)
        let mean = (2.0 + 3.0) / 5.0;
        assert_eq!(e.delta, vec![-mean, 1.0 - mean, 3.0 - mean]);
    }

    /// Leaf 0 holds category 0; leaf for k holds {k-1, k}. Listed in
    /// reverse so each pass can merge exactly one leaf.
    fn chain(n: usize) -> Vec<LeafDeltas> {
        let mut d0 = vec![f64::NAN; n];
        let mut c0 = vec![0; n];
        d0[0] = 0.0;
        c0[0] = 1;
        let mut leaves = vec![leaf(d0, c0, 0)];
        for k in (1..n).rev() {
            let mut d = vec![f64::NAN; n];
            let mut c = vec![0; n];
            d[k - 1] = 0.0;
            d[k] = 1.0;
            c[k - 1] = 1;
            c[k] = 1;
            leaves.push(leaf(d, c, k - 1));
        }
        leaves
    }

    #[test]
    fn pass_cap_trips_on_long_reverse_chains() {
        // ten passes are enough for eleven leaves
        let ok = merge_deltas(&chain(11), 11, &mut rng()).unwrap();
        assert_eq!(ok.ignored_rows, 0);
        assert!(ok.counts.iter().all(|&c| c > 0));
        let err = merge_deltas(&chain(12), 12, &mut rng()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::MergePassLimit {
                    passes: 10,
                    remaining: 1
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn averaging_skips_unsupported_entries() {
        let a = CatEffect {
            delta: vec![-1.0, 1.0, f64::NAN],
            counts: vec![1, 1, 0],
            ignored_rows: 2,
            centered: true,
        };
        let b = CatEffect {
            delta: vec![-3.0, f64::NAN, 3.0],
            counts: vec![1, 0, 1],
            ignored_rows: 0,
            centered: true,
        };
        let e = average_effects(&[a, b]);
        assert_eq!(e.counts, vec![2, 1, 1]);
        assert_eq!(e.ignored_rows, 2);
        // raw (-2, 1, 3), weighted mean -0
        assert_eq!(e.delta, vec![-2.0, 1.0, 3.0]);
    }
}
