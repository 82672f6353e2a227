use std::ops::Index;

use serde::Serialize;

use crate::{Error, Result};

/// Tolerance on `|sum - 1|` accepted by [`Distribution::new`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over a finite alphabet.
///
/// Entries are nonnegative and normalized so that their floating-point sum
/// (accumulated left to right) is exactly `1.0` whenever that is reachable.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates `probs` (finite, nonnegative, sum within [`SUM_TOLERANCE`])
    /// and renormalizes.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, SUM_TOLERANCE)
    }

    pub(crate) fn with_tolerance(mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {p} is not a probability"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        normalize(&mut probs);
        Ok(Distribution(probs))
    }

    /// Builds a distribution from weights that only need to be nonnegative
    /// with a positive total.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        normalize(&mut weights);
        Ok(Distribution(weights))
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        let mut probs = vec![1.0 / size as f64; size];
        normalize(&mut probs);
        Distribution(probs)
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        assert!(at < size, "point mass outside the alphabet");
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Distribution(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Indices carrying more than `threshold` mass.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.0.len())
            .filter(|&i| self.0[i] > threshold)
            .collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &Distribution, t: f64) -> Result<Distribution> {
        check_same_size(self.len(), other.len())?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "mixture weight {t} outside [0, 1]"
            )));
        }
        let probs = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        Distribution::new(probs)
    }

    /// L-infinity distance.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a Distribution {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) fn check_same_size(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Rescales so the left-to-right floating-point sum is exactly one, absorbing
/// the last rounding residue into the largest entry. Idempotent on vectors
/// that already sum to one.
pub(crate) fn normalize(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    if sum == 1.0 || sum == 0.0 {
        return;
    }
    v.iter_mut().for_each(|x| *x /= sum);
    let largest = (0..v.len())
        .max_by(|&i, &j| v[i].total_cmp(&v[j]))
        .unwrap_or(0);
    for _ in 0..4 {
        let sum: f64 = v.iter().sum();
        if sum == 1.0 {
            break;
        }
        v[largest] += 1.0 - sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_vectors() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn normalization_is_idempotent() {
        let d = Distribution::new(vec![0.1, 0.2, 0.7 + 1e-12]).unwrap();
        let again = Distribution::new(d.probs().to_vec()).unwrap();
        assert_eq!(d, again);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn uniform_and_point_mass() {
        let u = Distribution::uniform(3);
        assert_eq!(u.iter().sum::<f64>(), 1.0);
        let p = Distribution::point_mass(4, 2);
        assert_eq!(p.support(0.0), vec![2]);
    }

    #[test]
    fn mixture_endpoints() {
        let a = Distribution::new(vec![0.25, 0.75]).unwrap();
        let b = Distribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(a.mix(&b, 0.0).unwrap(), a);
        assert_eq!(a.mix(&b, 1.0).unwrap(), b);
        assert!(a.mix(&b, 1.5).is_err());
    }
}
