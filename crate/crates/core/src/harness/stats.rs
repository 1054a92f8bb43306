//! Distribution tables, total variation distance and chi-square uniformity.

use std::collections::BTreeMap;

use statrs::function::gamma::gamma_ur;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("tables have different outcome labels")]
    LabelMismatch,
    #[error("expected count per cell is {expected:.3}, need at least 5")]
    InsufficientCounts { expected: f64 },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("table is empty")]
    Empty,
    #[error("chi-square test needs raw counts")]
    NotCounts,
}

#[derive(Debug, Clone, PartialEq)]
enum Cells {
    Probabilities(BTreeMap<String, f64>),
    Counts(BTreeMap<String, u64>),
}

/// Outcome labels mapped to exact probabilities or to empirical counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable(Cells);

impl DistTable {
    pub fn from_probabilities<I, L>(cells: I) -> Result<Self, StatsError>
    where
        I: IntoIterator<Item = (L, f64)>,
        L: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (l, p) in cells {
            *map.entry(l.into()).or_insert(0.0) += p;
        }
        if map.is_empty() {
            return Err(StatsError::Empty);
        }
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(StatsError::NotNormalized(sum));
        }
        Ok(Self(Cells::Probabilities(map)))
    }

    pub fn from_counts<I, L>(cells: I) -> Self
    where
        I: IntoIterator<Item = (L, u64)>,
        L: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (l, c) in cells {
            *map.entry(l.into()).or_insert(0) += c;
        }
        Self(Cells::Counts(map))
    }

    /// Tallies each observed label once.
    pub fn tally<I, L>(observations: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        Self::from_counts(observations.into_iter().map(|l| (l, 1)))
    }

    /// Adds zero-count cells so the label set covers `labels`.
    pub fn with_labels<I, L>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        for l in labels {
            match &mut self.0 {
                Cells::Probabilities(m) => {
                    m.entry(l.into()).or_insert(0.0);
                }
                Cells::Counts(m) => {
                    m.entry(l.into()).or_insert(0);
                }
            }
        }
        self
    }

    pub fn is_counts(&self) -> bool {
        matches!(self.0, Cells::Counts(_))
    }

    pub fn len(&self) -> usize {
        match &self.0 {
            Cells::Probabilities(m) => m.len(),
            Cells::Counts(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<&str> {
        match &self.0 {
            Cells::Probabilities(m) => m.keys().map(String::as_str).collect(),
            Cells::Counts(m) => m.keys().map(String::as_str).collect(),
        }
    }

    /// Number of observations; `None` for analytic tables.
    pub fn total(&self) -> Option<u64> {
        match &self.0 {
            Cells::Probabilities(_) => None,
            Cells::Counts(m) => Some(m.values().sum()),
        }
    }

    pub fn count(&self, label: &str) -> u64 {
        match &self.0 {
            Cells::Counts(m) => m.get(label).copied().unwrap_or(0),
            Cells::Probabilities(_) => 0,
        }
    }

    /// Probabilities, or relative frequencies for count tables.
    pub fn normalized(&self) -> BTreeMap<String, f64> {
        match &self.0 {
            Cells::Probabilities(m) => m.clone(),
            Cells::Counts(m) => {
                let n = m.values().sum::<u64>().max(1) as f64;
                m.iter().map(|(k, c)| (k.clone(), *c as f64 / n)).collect()
            }
        }
    }

    pub fn probability(&self, label: &str) -> f64 {
        self.normalized().get(label).copied().unwrap_or(0.0)
    }
}

/// `(1/2) Σ |p_a - p_b|` over a shared label set.
pub fn estimate_tv(a: &DistTable, b: &DistTable) -> Result<f64, StatsError> {
    let (pa, pb) = (a.normalized(), b.normalized());
    if !pa.keys().eq(pb.keys()) {
        return Err(StatsError::LabelMismatch);
    }
    Ok(0.5 * pa.values().zip(pb.values()).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Pearson statistic against the uniform law on the table's cells.
pub fn chi_square_statistic(counts: &DistTable) -> Result<f64, StatsError> {
    let Cells::Counts(m) = &counts.0 else {
        return Err(StatsError::NotCounts);
    };
    if m.is_empty() {
        return Err(StatsError::Empty);
    }
    let n: u64 = m.values().sum();
    let expected = n as f64 / m.len() as f64;
    if expected < 5.0 {
        return Err(StatsError::InsufficientCounts { expected });
    }
    Ok(m.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum())
}

/// Upper-tail p-value with `cells - 1` degrees of freedom.
pub fn chi_square_uniform(counts: &DistTable) -> Result<f64, StatsError> {
    let stat = chi_square_statistic(counts)?;
    let df = (counts.len() - 1) as f64;
    // Q(a, 0) = 1; the library only accepts x > 0
    if df == 0.0 || stat == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(df / 2.0, stat / 2.0))
}

/// Three-sigma bound on the TV between two independent empirical tables of
/// sizes `n_a` and `n_b` drawn from the same law `pooled`:
/// `(1/2) Σ 3 sqrt(p(1-p) (1/n_a + 1/n_b))`.
pub fn tv_bound_two_sample(pooled: &DistTable, n_a: u64, n_b: u64) -> f64 {
    let scale = 1.0 / n_a as f64 + 1.0 / n_b as f64;
    0.5 * pooled
        .normalized()
        .values()
        .map(|p| 3.0 * (p * (1.0 - p) * scale).sqrt())
        .sum::<f64>()
}

/// Three-sigma bound on the TV between an empirical table of size `n` and
/// the exact law `truth` it was drawn from.
pub fn tv_bound_one_sample(truth: &DistTable, n: u64) -> f64 {
    0.5 * truth
        .normalized()
        .values()
        .map(|p| 3.0 * (p * (1.0 - p) / n as f64).sqrt())
        .sum::<f64>()
}
