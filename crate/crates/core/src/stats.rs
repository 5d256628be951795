//! Histograms and two-sample comparison statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-edge histogram. Values outside `[edges[0], edges[last]]` are
/// counted separately and left out of the bins; the upper edge belongs to
/// the last bin.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    outside: u64,
}

impl Histogram {
    pub fn with_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::DegenerateBins("need at least two edges".into()));
        }
        if !edges.windows(2).all(|w| w[0] < w[1]) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::DegenerateBins("edges must be finite and strictly ascending".into()));
        }
        let n = edges.len() - 1;
        Ok(Histogram { edges, counts: vec![0; n], outside: 0 })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::DegenerateBins("zero bins".into()));
        }
        if !(hi > lo) {
            return Err(Error::DegenerateBins(format!("empty range [{lo}, {hi}]")));
        }
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + w * i as f64).collect();
        edges.push(hi);
        Self::with_edges(edges)
    }

    pub fn from_values(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let mut h = Self::uniform(lo, hi, bins)?;
        h.fill(values);
        Ok(h)
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let last = *self.edges.last().unwrap();
        if !(x >= self.edges[0] && x <= last) {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= x);
        Some(i.saturating_sub(1).min(self.counts.len() - 1))
    }

    pub fn fill(&mut self, values: &[f64]) {
        for &x in values {
            match self.bin_of(x) {
                Some(i) => self.counts[i] += 1,
                None => self.outside += 1,
            }
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Entries that fell outside the edges.
    pub fn outside(&self) -> u64 {
        self.outside
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts divided by `total · width`; integrates to 1 over the edges.
    /// All zeros for an empty histogram.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| if total > 0.0 { c as f64 / (total * (w[1] - w[0])) } else { 0.0 })
            .collect()
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { 1.0 };
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic of `sample` against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(sample);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic coefficient `c(α) = √(−ln(α/2)/2)`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Critical value of the two-sample statistic at level `alpha`.
pub fn ks_critical_two_sample(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// Critical value of the one-sample statistic at level `alpha`.
pub fn ks_critical_one_sample(n: usize, alpha: f64) -> f64 {
    ks_coefficient(alpha) / (n as f64).sqrt()
}

/// Two-sample Pearson χ² over bins of equal edges. Adjacent bins are merged
/// left to right until each group expects at least 5 entries from both
/// samples under the pooled hypothesis; an underfull tail joins the last
/// group. Returns the statistic and the number of groups used.
pub fn chi2_two_sample(a: &Histogram, b: &Histogram) -> Result<(f64, usize)> {
    if a.edges() != b.edges() {
        return Err(Error::DegenerateBins("histograms have different edges".into()));
    }
    let (na, nb) = (a.total() as f64, b.total() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateBins("an input histogram is empty".into()));
    }
    let n = na + nb;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut ga, mut gb) = (0.0, 0.0);
    for (&x, &y) in a.counts().iter().zip(b.counts()) {
        ga += x as f64;
        gb += y as f64;
        let pooled = ga + gb;
        if pooled * na / n >= 5.0 && pooled * nb / n >= 5.0 {
            groups.push((ga, gb));
            ga = 0.0;
            gb = 0.0;
        }
    }
    if ga + gb > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += ga;
                last.1 += gb;
            }
            None => groups.push((ga, gb)),
        }
    }
    let k1 = (nb / na).sqrt();
    let k2 = (na / nb).sqrt();
    let chi2 = groups.iter().map(|&(x, y)| (k1 * x - k2 * y).powi(2) / (x + y)).sum();
    Ok((chi2, groups.len()))
}

/// Summary of comparing two samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
    pub chi2: f64,
    pub n_bins: usize,
    pub samples_a: usize,
    pub samples_b: usize,
}

/// KS on the raw samples and χ² on `bins` uniform bins over `[lo, hi]`.
pub fn compare(a: &[f64], b: &[f64], lo: f64, hi: f64, bins: usize) -> Result<CompareReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ha = Histogram::from_values(a, lo, hi, bins)?;
    let hb = Histogram::from_values(b, lo, hi, bins)?;
    let (chi2, n_bins) = chi2_two_sample(&ha, &hb)?;
    Ok(CompareReport {
        ks_statistic: ks_two_sample(a, b),
        ks_critical_1pct: ks_critical_two_sample(a.len(), b.len(), 0.01),
        chi2,
        n_bins,
        samples_a: a.len(),
        samples_b: b.len(),
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn binning() {
        let h = Histogram::from_values(&[0.0, 0.04, 0.5, 1.0, 1.5, -0.1], 0.0, 1.0, 20).unwrap();
        assert_eq!(h.total(), 4);
        assert_eq!(h.outside(), 2);
        assert_eq!(h.counts()[0], 2);
        assert_eq!(h.counts()[10], 1);
        assert_eq!(h.counts()[19], 1);
        assert!(Histogram::uniform(0.0, 1.0, 0).is_err());
        assert!(Histogram::uniform(1.0, 1.0, 3).is_err());
        assert!(Histogram::with_edges(vec![0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn ks_basics() {
        let a = [0.1, 0.4, 0.7];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&[0.2; 5], &[0.8; 7]), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0], &[1.5]) - 0.5).abs() < 1e-15);
        assert!((ks_coefficient(0.01) - 1.6276).abs() < 1e-4);
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        assert!((ks_one_sample(&[0.5], uniform) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi2_of_identical_samples_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let r = compare(&v, &v, 0.0, 1.0, 20).unwrap();
        assert_eq!(r.ks_statistic, 0.0);
        assert_eq!(r.chi2, 0.0);
        assert!(r.n_bins > 1);
    }

    #[test]
    fn chi2_merges_sparse_bins() {
        let a = Histogram::from_values(&[0.1, 0.1, 0.9], 0.0, 1.0, 10).unwrap();
        let (_, n) = chi2_two_sample(&a, &a).unwrap();
        assert_eq!(n, 1);
        let empty = Histogram::uniform(0.0, 1.0, 10).unwrap();
        assert!(chi2_two_sample(&a, &empty).is_err());
    }

    #[test]
    fn chi2_detects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * 0.5).collect();
        let b: Vec<f64> = (0..1000).map(|_| 0.25 + rng.random::<f64>() * 0.5).collect();
        let r = compare(&a, &b, 0.0, 1.0, 20).unwrap();
        assert!(r.chi2 > 100.0);
        assert!(r.ks_statistic > r.ks_critical_1pct);
    }

    #[test]
    fn critical_values() {
        let c = ks_critical_two_sample(500, 500, 0.01);
        assert!((c - 1.6276 * (2.0f64 / 500.0).sqrt()).abs() < 1e-4);
        assert!((ks_critical_one_sample(100, 0.01) - 0.16276).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn densities_integrate_to_one(v in proptest::collection::vec(0.0..=1.0f64, 1..200), bins in 1usize..40) {
            let h = Histogram::from_values(&v, 0.0, 1.0, bins).unwrap();
            let integral: f64 = h.densities().iter().zip(h.edges().windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum();
            prop_assert!((integral - 1.0).abs() < 1e-9);
        }

        #[test]
        fn ks_in_unit_interval(a in proptest::collection::vec(-5.0..5.0f64, 1..50), b in proptest::collection::vec(-5.0..5.0f64, 1..50)) {
            let d = ks_two_sample(&a, &b);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, ks_two_sample(&b, &a));
        }
    }
}
