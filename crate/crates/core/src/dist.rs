//! Ordered evaluation spaces and discrete probability distributions over them.
//!
//! A [`Distribution`] is the value type for every opinion and group opinion in
//! the engine. Distributions are immutable once built and always satisfy
//! `v_i ∈ [0, 1]` and `Σ v_i = 1` (up to floating point rounding).

use std::fmt;
use std::sync::{Arc, LazyLock};

use crate::error::{Error, Result};

/// Largest deviation of `Σ v_i` from 1 tolerated before re-normalization.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Negative components down to this magnitude are rounding noise and are clamped.
const NEGATIVE_NOISE: f64 = 1e-12;

/// An ordered list of evaluation terms `e_1 < … < e_n`, `n ≥ 2`.
///
/// The last term is the top of the space and defines the target distribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvaluationSpace {
    labels: Vec<String>,
}

impl EvaluationSpace {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::SpaceTooSmall(labels.len()));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateTerm(label.clone()));
            }
        }
        Ok(Arc::new(Self { labels }))
    }

    /// The `{B, G}` (bad, good) space used for football opinions.
    pub fn binary() -> Arc<Self> {
        static BINARY: LazyLock<Arc<EvaluationSpace>> = LazyLock::new(|| {
            Arc::new(EvaluationSpace {
                labels: vec!["B".to_string(), "G".to_string()],
            })
        });
        BINARY.clone()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn top(&self) -> &str {
        self.labels.last().expect("space has at least two terms")
    }
}

impl fmt::Display for EvaluationSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(" < "))
    }
}

/// A probability distribution over an [`EvaluationSpace`].
#[derive(Debug, Clone)]
pub struct Distribution {
    space: Arc<EvaluationSpace>,
    probs: Vec<f64>,
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.probs == other.probs
    }
}

fn same_space(a: &Arc<EvaluationSpace>, b: &Arc<EvaluationSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl Distribution {
    /// Validates and re-normalizes `probs`.
    ///
    /// Every component must lie in `[0, 1]` and the sum must be within
    /// [`SUM_TOLERANCE`] of 1; the result is divided by its sum.
    pub fn new(space: Arc<EvaluationSpace>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                actual: probs.len(),
            });
        }
        let mut probs = probs;
        for (index, v) in probs.iter_mut().enumerate() {
            if !v.is_finite() || *v < -NEGATIVE_NOISE || *v > 1.0 + NEGATIVE_NOISE {
                return Err(Error::InvalidProbability { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        // Leave rounding-level drift alone so stored values survive a reload bit for bit.
        if (sum - 1.0).abs() > 4.0 * f64::EPSILON * probs.len() as f64 {
            probs.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self { space, probs })
    }

    /// Uniform distribution `F(e_i) = 1/n`: total ignorance.
    pub fn flat(space: &Arc<EvaluationSpace>) -> Self {
        let n = space.len();
        Self {
            space: space.clone(),
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on the top term: the ideal opinion.
    pub fn target(space: &Arc<EvaluationSpace>) -> Self {
        Self::point(space, space.len() - 1)
    }

    /// Point mass on term `index`.
    ///
    /// Panics if `index` is outside the space.
    pub fn point(space: &Arc<EvaluationSpace>, index: usize) -> Self {
        assert!(index < space.len(), "term index {index} out of range");
        let mut probs = vec![0.0; space.len()];
        probs[index] = 1.0;
        Self {
            space: space.clone(),
            probs,
        }
    }

    pub fn space(&self) -> &Arc<EvaluationSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of the top term (`G` on the football space).
    pub fn top_prob(&self) -> f64 {
        *self.probs.last().expect("non-empty")
    }

    fn check_space(&self, other: &Distribution) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Shannon entropy in nats, with `0 · ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum::<f64>()
    }

    /// Normalized 1-D earth mover's distance on the ordered space, in `[0, 1]`.
    ///
    /// With unit ground distance between neighbouring terms the optimal
    /// transport cost is the sum of absolute cumulative differences; dividing
    /// by `n - 1` maps opposite point masses to exactly 1.
    pub fn emd(&self, other: &Distribution) -> Result<f64> {
        self.check_space(other)?;
        let n = self.probs.len();
        let mut carried = 0.0;
        let mut cost = 0.0;
        for (p, q) in self.probs[..n - 1].iter().zip(&other.probs) {
            carried += p - q;
            cost += carried.abs();
        }
        Ok((cost / (n - 1) as f64).min(1.0))
    }

    /// Convex combination `a · self + (1 - a) · other`.
    pub fn mix(&self, a: f64, other: &Distribution) -> Result<Distribution> {
        self.check_space(other)?;
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParameter {
                name: "mixing weight",
                value: a,
                expected: "0 <= a <= 1",
            });
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(x, y)| a * x + (1.0 - a) * y)
            .collect();
        Distribution::new(self.space.clone(), probs)
    }
}

/// Free-function form of [`Distribution::mix`].
pub fn mix(a: f64, d1: &Distribution, d2: &Distribution) -> Result<Distribution> {
    d1.mix(a, d2)
}

/// Weighted average `Σ w_i d_i / Σ w_i` of distributions on one space.
///
/// Weights may share any common sign or scale; only their ratios matter.
/// Returns `Ok(None)` when the total weight is zero (nothing to average).
pub fn weighted_mean(parts: &[(&Distribution, f64)]) -> Result<Option<Distribution>> {
    let Some((first, _)) = parts.first() else {
        return Ok(None);
    };
    let total: f64 = parts.iter().map(|(_, w)| w).sum();
    if total == 0.0 || !total.is_finite() {
        return Ok(None);
    }
    let mut acc = vec![0.0; first.len()];
    for (d, w) in parts {
        first.check_space(d)?;
        for (a, v) in acc.iter_mut().zip(&d.probs) {
            *a += w * v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= total);
    Distribution::new(first.space.clone(), acc).map(Some)
}
