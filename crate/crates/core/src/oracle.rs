//! Naive reference implementations of both procedures, written step for
//! step with linear scans and full-length vectors, plus a harness that
//! checks the optimized paths against them on shared strata and shared
//! random draws.
//!
//! Nothing here reuses code from [`crate::numpd`] or [`crate::catpd`].

use rand::{Rng, RngCore};

use crate::catpd::{catstratpd, CatEffect, CatStratPDParams};
use crate::data::{ColumnMeta, Dataset};
use crate::error::{Error, Result};
use crate::numpd::{stratpd, PDCurve, StratPDParams};
use crate::rng;
use crate::stratify::{fit_stratification, StratifyParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    pub x: Vec<f64>,
    pub pd_y: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEffect {
    pub delta: Vec<f64>,
    pub counts: Vec<usize>,
    pub ignored_rows: usize,
    pub passes: usize,
}

fn unique_ordered(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut u: Vec<f64> = Vec::new();
    for v in values {
        if !u.contains(&v) {
            u.push(v);
        }
    }
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    u
}

/// Numeric procedure over given leaves. `None` when fewer than two points
/// survive the slope-count filter.
pub fn stratpd_reference<L: AsRef<[usize]>>(
    xj: &[f64],
    y: &[f64],
    leaves: &[L],
    min_slopes_per_x: usize,
) -> Option<ReferenceCurve> {
    let mut d: Vec<(f64, f64, f64)> = Vec::new();
    for leaf in leaves {
        let leaf = leaf.as_ref();
        let x_l = unique_ordered(leaf.iter().map(|&i| xj[i]));
        let mut y_l = Vec::new();
        for &u in &x_l {
            let mut sum = 0.0;
            let mut c = 0;
            for &i in leaf {
                if xj[i] == u {
                    sum += y[i];
                    c += 1;
                }
            }
            y_l.push(sum / c as f64);
        }
        for k in 0..x_l.len().saturating_sub(1) {
            let delta = (y_l[k + 1] - y_l[k]) / (x_l[k + 1] - x_l[k]);
            d.push((x_l[k], x_l[k + 1], delta));
        }
    }

    let ux = unique_ordered(xj.iter().copied());
    let mut c = vec![0usize; ux.len()];
    let mut delta = vec![f64::NAN; ux.len()];
    for (i, &x) in ux.iter().enumerate() {
        let slopes: Vec<f64> = d
            .iter()
            .filter(|(a, b, _)| x >= *a && x < *b)
            .map(|t| t.2)
            .collect();
        c[i] = slopes.len();
        if !slopes.is_empty() {
            let mut sum = 0.0;
            for s in &slopes {
                sum += s;
            }
            delta[i] = sum / slopes.len() as f64;
        }
    }

    let keep: Vec<bool> = c.iter().map(|&ci| ci >= min_slopes_per_x).collect();
    let delta: Vec<f64> = delta
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(v, _)| *v)
        .collect();
    let counts: Vec<usize> = c
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(v, _)| *v)
        .collect();
    let ux: Vec<f64> = ux
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(v, _)| *v)
        .collect();
    if ux.len() < 2 {
        return None;
    }
    let pd_x: Vec<f64> = (0..ux.len() - 1).map(|k| ux[k + 1] - ux[k]).collect();
    let mut pd_y = vec![0.0];
    let mut running = 0.0;
    for k in 0..pd_x.len() {
        running += delta[k] * pd_x[k];
        pd_y.push(running);
    }
    Some(ReferenceCurve {
        x: ux,
        pd_y,
        counts,
    })
}

/// Categorical procedure over given leaves, drawing one reference category
/// per leaf (leaf order) and then one common category per merge from `rng`.
/// The result is centered to zero count-weighted mean.
pub fn catstratpd_reference<L: AsRef<[usize]>, R: Rng + ?Sized>(
    cats: &[usize],
    y: &[f64],
    n_cats: usize,
    leaves: &[L],
    rng: &mut R,
) -> ReferenceEffect {
    let mut dy_leaves: Vec<Vec<f64>> = Vec::new();
    let mut c_leaves: Vec<Vec<usize>> = Vec::new();
    for leaf in leaves {
        let leaf = leaf.as_ref();
        let mut x_l: Vec<usize> = Vec::new();
        for &i in leaf {
            if !x_l.contains(&cats[i]) {
                x_l.push(cats[i]);
            }
        }
        x_l.sort();
        let mut ybar = vec![f64::NAN; n_cats];
        let mut count = vec![0usize; n_cats];
        for &k in &x_l {
            let mut sum = 0.0;
            for &i in leaf {
                if cats[i] == k {
                    sum += y[i];
                    count[k] += 1;
                }
            }
            ybar[k] = sum / count[k] as f64;
        }
        let refcat = x_l[rng.random_range(0..x_l.len())];
        let base = ybar[refcat];
        dy_leaves.push(ybar.iter().map(|v| v - base).collect());
        c_leaves.push(count);
    }

    let mut dy = dy_leaves[0].clone();
    let mut c = c_leaves[0].clone();
    let mut work: Vec<usize> = (1..leaves.len()).collect();
    let mut completed = vec![0usize];
    let mut passes = 0;
    while !work.is_empty() && !completed.is_empty() {
        passes += 1;
        completed.clear();
        for &l in &work {
            let common: Vec<usize> = (0..n_cats)
                .filter(|&k| !dy_leaves[l][k].is_nan() && !dy[k].is_nan())
                .collect();
            if common.is_empty() {
                continue;
            }
            completed.push(l);
            let cat = common[rng.random_range(0..common.len())];
            let shift_from = dy_leaves[l][cat];
            let shift_to = dy[cat];
            let adjusted: Vec<f64> = dy_leaves[l]
                .iter()
                .map(|v| v - shift_from + shift_to)
                .collect();
            for k in 0..n_cats {
                let (a, b) = (dy[k], adjusted[k]);
                dy[k] = match (a.is_nan(), b.is_nan()) {
                    (false, false) => {
                        (c[k] as f64 * a + c_leaves[l][k] as f64 * b)
                            / (c[k] + c_leaves[l][k]) as f64
                    }
                    (true, false) => b,
                    _ => a,
                };
                c[k] += c_leaves[l][k];
            }
        }
        work.retain(|l| !completed.contains(l));
    }

    let ignored_rows = work
        .iter()
        .map(|&l| c_leaves[l].iter().sum::<usize>())
        .sum();
    let mut num = 0.0;
    let mut den = 0usize;
    for k in 0..n_cats {
        if !dy[k].is_nan() {
            num += c[k] as f64 * dy[k];
            den += c[k];
        }
    }
    let mean = num / den as f64;
    for v in dy.iter_mut() {
        if !v.is_nan() {
            *v -= mean;
        }
    }
    ReferenceEffect {
        delta: dy,
        counts: c,
        ignored_rows,
        passes,
    }
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
}

fn strata(ds: &Dataset, j: usize, params: &StratifyParams) -> Result<Vec<Vec<usize>>> {
    let others: Vec<&[f64]> = ds
        .features()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, c)| c.as_slice())
        .collect();
    let tree = fit_stratification(&others, ds.response(), params)?;
    Ok(tree.leaves().into_iter().map(<[usize]>::to_vec).collect())
}

/// Compares [`stratpd`] on column `j` with the reference over the same
/// tree. `Ok(None)` on agreement, `Ok(Some(reason))` on mismatch.
pub fn check_numeric(ds: &Dataset, j: usize, params: &StratPDParams) -> Result<Option<String>> {
    let single = StratPDParams {
        ntrials: 1,
        ..*params
    };
    let leaves = strata(
        ds,
        j,
        &StratifyParams {
            min_samples_leaf: single.min_samples_leaf,
            max_features: single.max_features,
            rng_seed: single.rng_seed,
        },
    )?;
    let reference = stratpd_reference(
        ds.column(j)?,
        ds.response(),
        &leaves,
        single.min_slopes_per_x,
    );
    let fast = match stratpd(ds, j, &single) {
        Ok(c) => Some(c),
        Err(Error::InsufficientSupport) => None,
        Err(e) => return Err(e),
    };
    Ok(match (fast, reference) {
        (None, None) => None,
        (Some(f), Some(r)) => compare_curves(&f, &r),
        (f, r) => Some(format!(
            "optimized {} a curve, reference {}",
            if f.is_some() {
                "produced"
            } else {
                "did not produce"
            },
            if r.is_some() { "did" } else { "did not" }
        )),
    })
}

fn compare_curves(fast: &PDCurve, reference: &ReferenceCurve) -> Option<String> {
    if !same_bits(&fast.x, &reference.x) {
        return Some(format!("x differs: {:?} vs {:?}", fast.x, reference.x));
    }
    if fast.counts != reference.counts {
        return Some(format!(
            "counts differ: {:?} vs {:?}",
            fast.counts, reference.counts
        ));
    }
    if !same_bits(&fast.pd_y, &reference.pd_y) {
        return Some(format!(
            "pd_y differs: {:?} vs {:?}",
            fast.pd_y, reference.pd_y
        ));
    }
    None
}

/// Compares [`catstratpd`] on column `j` with the reference over the same
/// tree and the same random stream.
pub fn check_categorical(
    ds: &Dataset,
    j: usize,
    params: &CatStratPDParams,
) -> Result<Option<String>> {
    let single = CatStratPDParams {
        ntrials: 1,
        ..*params
    };
    let meta = ds.meta(j)?;
    let leaves = strata(
        ds,
        j,
        &StratifyParams {
            min_samples_leaf: single.min_samples_leaf,
            max_features: single.max_features,
            rng_seed: single.rng_seed,
        },
    )?;
    let cats: Vec<usize> = ds.column(j)?.iter().map(|&c| c as usize).collect();
    let mut stream = rng::stream(single.rng_seed, rng::REFCAT_STREAM);
    let reference = catstratpd_reference(
        &cats,
        ds.response(),
        meta.n_categories(),
        &leaves,
        &mut stream,
    );
    let fast = match catstratpd(ds, j, &single) {
        Ok(e) => e,
        // the reference runs unbounded; a pass-capped run has nothing to compare
        Err(Error::MergePassLimit { .. }) if reference.passes > crate::catpd::MAX_MERGE_PASSES => {
            return Ok(None)
        }
        Err(e) => return Err(e),
    };
    Ok(compare_effects(&fast, &reference))
}

fn compare_effects(fast: &CatEffect, reference: &ReferenceEffect) -> Option<String> {
    if fast.counts != reference.counts {
        return Some(format!(
            "counts differ: {:?} vs {:?}",
            fast.counts, reference.counts
        ));
    }
    if fast.ignored_rows != reference.ignored_rows {
        return Some(format!(
            "ignored rows differ: {} vs {}",
            fast.ignored_rows, reference.ignored_rows
        ));
    }
    if !same_bits(&fast.delta, &reference.delta) {
        return Some(format!(
            "delta differs: {:?} vs {:?}",
            fast.delta, reference.delta
        ));
    }
    None
}

/// A small random mixed-type dataset: 20..=200 rows, 2..=4 features of
/// which one is categorical. Numeric values sit on a coarse grid so strata
/// see repeated values.
pub fn random_case(seed: u64) -> Dataset {
    let mut r = rng::stream(seed, 0);
    let n = r.random_range(20..=200usize);
    let p = r.random_range(2..=4usize);
    let cat_col = r.random_range(0..p);
    let n_levels = r.random_range(2..=6usize);

    let mut features = Vec::with_capacity(p);
    let mut meta = Vec::with_capacity(p);
    for c in 0..p {
        if c == cat_col {
            // every level appears at least once
            let mut codes: Vec<f64> = (0..n).map(|i| (i % n_levels) as f64).collect();
            for i in (1..n).rev() {
                let k = r.random_range(0..=i);
                codes.swap(i, k);
            }
            features.push(codes);
            meta.push(ColumnMeta::categorical(
                format!("c{c}"),
                (0..n_levels).map(|k| format!("L{k}")).collect(),
            ));
        } else {
            let grid = r.random_range(3..=40u32) as f64;
            features.push(
                (0..n)
                    .map(|_| (r.random::<f64>() * grid).round() / 4.0)
                    .collect(),
            );
            meta.push(ColumnMeta::numeric(format!("x{c}")));
        }
    }
    let weights: Vec<f64> = (0..p).map(|_| r.random_range(-3.0..3.0)).collect();
    let y = (0..n)
        .map(|i| {
            let signal: f64 = (0..p).map(|c| weights[c] * features[c][i]).sum();
            let wiggle = (features[(cat_col + 1) % p][i]).sin();
            signal + wiggle + r.random::<f64>() - 0.5
        })
        .collect();
    Dataset::new(features, meta, y).expect("generated case is well formed")
}

#[derive(Debug, Default, Clone)]
pub struct CheckReport {
    pub cases: usize,
    pub comparisons: usize,
    pub mismatches: Vec<String>,
}

/// Runs both cross-checks on every column of `ds`, drawing leaf sizes and
/// slope thresholds from `seed`.
pub fn check_all_columns(ds: &Dataset, seed: u64, report: &mut CheckReport) -> Result<()> {
    let mut r = rng::stream(seed, 1);
    report.cases += 1;
    for j in 0..ds.n_features() {
        let msl = r.random_range(2..=10usize);
        let tree_seed = r.next_u64();
        let outcome = if ds.meta(j)?.is_categorical() {
            check_categorical(
                ds,
                j,
                &CatStratPDParams {
                    min_samples_leaf: msl,
                    rng_seed: tree_seed,
                    ..Default::default()
                },
            )?
        } else {
            check_numeric(
                ds,
                j,
                &StratPDParams {
                    min_samples_leaf: msl,
                    min_slopes_per_x: r.random_range(1..=5usize),
                    rng_seed: tree_seed,
                    ..Default::default()
                },
            )?
        };
        report.comparisons += 1;
        if let Some(reason) = outcome {
            report
                .mismatches
                .push(format!("case {seed}, column {j}: {reason}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_matches_hand_worked_leaf() {
        // one leaf, x = (0, 1, 2), y = x^2 -> slopes 1 and 3
        let r = stratpd_reference(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0], &[vec![0, 1, 2]], 1).unwrap();
        assert_eq!(r.x, vec![0.0, 1.0]);
        assert_eq!(r.pd_y, vec![0.0, 1.0]);
        assert_eq!(r.counts, vec![1, 1]);
    }

    #[test]
    fn reference_effect_centers() {
        let mut stream = crate::rng::ZeroRng;
        let e = catstratpd_reference(
            &[0, 1, 0, 1],
            &[0.0, 10.0, 0.0, 20.0],
            2,
            &[vec![0, 1], vec![2, 3]],
            &mut stream,
        );
        assert_eq!(e.delta, vec![-7.5, 7.5]);
        assert_eq!(e.passes, 1);
    }

    #[test]
    fn random_cases_are_valid_and_seeded() {
        for seed in 0..20 {
            let a = random_case(seed);
            assert!(a.n_rows() >= 20 && a.n_rows() <= 200);
            assert!(a.n_features() >= 2 && a.n_features() <= 4);
            assert_eq!(a, random_case(seed));
        }
    }
}
