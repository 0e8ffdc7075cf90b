use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{rng_for, tags};

/// Interquartile mean: the 25% trimmed mean with fractional weights, so a
/// quarter of the sample mass is removed from each end even when `n` is not a
/// multiple of four.
pub fn iqm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("iqm input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let (lo, hi) = (n / 4.0, 3.0 * n / 4.0);
    let mut sum = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        // overlap of [i, i+1] with the kept mass [lo, hi]
        let w = ((i + 1) as f64).min(hi) - (i as f64).max(lo);
        if w > 0.0 {
            sum += w * v;
        }
    }
    Ok(sum / (hi - lo))
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Percentile bootstrap interval for the IQM of a seeds × tasks matrix.
///
/// Each resample draws seed rows with replacement and keeps every task
/// column; the statistic is the IQM over all entries.
pub fn bootstrap_ci(rows: &[Vec<f64>], n_resamples: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    if rows.len() < 2 {
        return Err(Error::Config(format!(
            "a bootstrap interval needs at least 2 seeds, got {}",
            rows.len()
        )));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) || rows[0].is_empty() {
        return Err(Error::Shape("score matrix must be rectangular and non-empty".into()));
    }
    if n_resamples == 0 || !(0.0 < level && level < 1.0) {
        return Err(Error::Config("need n_resamples > 0 and 0 < level < 1".into()));
    }
    let mut rng = rng_for(seed, tags::BOOTSTRAP, 0);
    let mut flat = Vec::with_capacity(rows.len() * rows[0].len());
    let mut stats = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        flat.clear();
        for _ in 0..rows.len() {
            flat.extend_from_slice(&rows[rng.gen_range(0..rows.len())]);
        }
        stats.push(iqm(&flat)?);
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile(&stats, tail), quantile(&stats, 1.0 - tail)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Replicate every value four times, then drop exactly n copies per end.
    fn replicated_trim(values: &[f64]) -> f64 {
        let n = values.len();
        let mut rep: Vec<f64> = values.iter().flat_map(|&v| [v; 4]).collect();
        rep.sort_by(f64::total_cmp);
        rep[n..3 * n].iter().sum::<f64>() / (2 * n) as f64
    }

    #[test]
    fn worked_examples() {
        assert!((iqm(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 2.5).abs() < 1e-12);
        assert!((iqm(&[0.0, 1.0, 2.0, 3.0, 100.0]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(iqm(&[7.0; 9]).unwrap(), 7.0);
        assert!(iqm(&[]).is_err());
    }

    #[test]
    fn constant_matrix_gives_zero_width() {
        let rows = vec![vec![3.0; 4]; 5];
        assert_eq!(bootstrap_ci(&rows, 500, 0.95, 1).unwrap(), (3.0, 3.0));
    }

    #[test]
    fn one_seed_is_rejected() {
        assert!(bootstrap_ci(&[vec![1.0, 2.0]], 100, 0.95, 0).is_err());
    }

    #[test]
    fn interval_is_deterministic_and_brackets_point() {
        let rows: Vec<Vec<f64>> = (0..6).map(|s| (0..4).map(|t| ((s * 7 + t * 3) % 11) as f64).collect()).collect();
        let a = bootstrap_ci(&rows, 2000, 0.95, 9).unwrap();
        assert_eq!(a, bootstrap_ci(&rows, 2000, 0.95, 9).unwrap());
        let point = iqm(&rows.concat()).unwrap();
        assert!(a.0 <= point && point <= a.1, "{a:?} vs {point}");
    }

    proptest! {
        #[test]
        fn matches_replicated_oracle(v in prop::collection::vec(-1e3f64..1e3, 1..64)) {
            prop_assert!((iqm(&v).unwrap() - replicated_trim(&v)).abs() < 1e-9);
        }

        #[test]
        fn bounded_by_extremes(v in prop::collection::vec(-1e6f64..1e6, 1..50)) {
            let m = iqm(&v).unwrap();
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-9 <= m && m <= hi + 1e-9);
        }

        #[test]
        fn permutation_invariant(v in prop::collection::vec(-100f64..100.0, 1..40)) {
            let mut r = v.clone();
            r.reverse();
            prop_assert!((iqm(&v).unwrap() - iqm(&r).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn translation_equivariant(v in prop::collection::vec(-100f64..100.0, 1..40), c in -50f64..50.0) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            prop_assert!((iqm(&shifted).unwrap() - iqm(&v).unwrap() - c).abs() < 1e-9);
        }
    }
}
