//! Problem instances and their canonical sorted form.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A bandit instance: one Bernoulli mean per arm, plus an optional label
/// recording where the instance came from (experiment family, file, ...).
///
/// Invariants enforced at construction: at least two arms, every mean in
/// `[0, 1]`, and a unique best arm. Means of exactly 0 or 1 are accepted so
/// that deterministic arms can be used in tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl Instance {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewArms(means.len()));
        }
        for (index, &value) in means.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::MeanOutOfRange { index, value });
            }
        }
        let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if means.iter().filter(|&&m| m == best).count() != 1 {
            return Err(Error::TiedBestArm(best));
        }
        Ok(Self { means, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Index of the arm with the highest mean (unique by construction).
    pub fn best_arm(&self) -> usize {
        let mut best = 0;
        for (i, &m) in self.means.iter().enumerate() {
            if m > self.means[best] {
                best = i;
            }
        }
        best
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Instance = serde_json::from_str(text)?;
        // revalidate: the file may violate the invariants
        let mut inst = Instance::new(raw.means)?;
        inst.label = raw.label;
        Ok(inst)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// An instance relabeled so that means are non-increasing, with the
/// permutation back to the original arm indices. All exponent formulas are
/// stated in this ordering; by convention the phantom mean `mu_{K+1}` is 0.
///
/// Ties among suboptimal arms are broken by ascending original index, so the
/// permutation is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedInstance {
    sorted: Vec<f64>,
    perm: Vec<usize>,
}

impl SortedInstance {
    pub fn k(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_means(&self) -> &[f64] {
        &self.sorted
    }

    /// Mean of the `i`-th best arm, 1-based to match the usual notation.
    /// `mu(k + 1)` returns the phantom value 0.
    pub fn mu(&self, i: usize) -> f64 {
        assert!(
            (1..=self.sorted.len() + 1).contains(&i),
            "sorted index {i} outside 1..={}",
            self.sorted.len() + 1
        );
        if i == self.sorted.len() + 1 {
            0.0
        } else {
            self.sorted[i - 1]
        }
    }

    /// Original arm index of the `pos`-th entry (0-based) of `sorted_means`.
    pub fn original_arm(&self, pos: usize) -> usize {
        self.perm[pos]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Undo the sort, reproducing the original mean vector exactly.
    pub fn to_original_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.sorted.len()];
        for (pos, &arm) in self.perm.iter().enumerate() {
            means[arm] = self.sorted[pos];
        }
        means
    }
}

/// Sort an instance by decreasing mean. Stable, so equal suboptimal means
/// keep their original relative order (ascending original index).
pub fn sort_desc(inst: &Instance) -> SortedInstance {
    let mut order: Vec<usize> = (0..inst.k()).collect();
    order.sort_by(|&a, &b| inst.mean(b).partial_cmp(&inst.mean(a)).unwrap());
    let sorted = order.iter().map(|&i| inst.mean(i)).collect();
    SortedInstance { sorted, perm: order }
}

impl From<&Instance> for SortedInstance {
    fn from(inst: &Instance) -> Self {
        sort_desc(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_instances() {
        let inst = Instance::new(vec![0.9, 0.1, 0.1]).unwrap();
        assert_eq!(inst.k(), 3);
        assert_eq!(inst.best_arm(), 0);

        let inst = Instance::new(vec![0.5, 0.45, 0.45]).unwrap();
        assert_eq!(inst.best_arm(), 0);

        // deterministic arms are allowed
        assert!(Instance::new(vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_invalid_instances() {
        assert!(matches!(Instance::new(vec![0.5]), Err(Error::TooFewArms(1))));
        assert!(matches!(
            Instance::new(vec![0.5, 1.5]),
            Err(Error::MeanOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            Instance::new(vec![0.5, -0.1]),
            Err(Error::MeanOutOfRange { index: 1, .. })
        ));
        assert!(matches!(Instance::new(vec![0.5, 0.5]), Err(Error::TiedBestArm(_))));
        assert!(Instance::new(vec![f64::NAN, 0.1]).is_err());
    }

    #[test]
    fn sort_desc_permutation() {
        let inst = Instance::new(vec![0.1, 0.9, 0.1]).unwrap();
        let s = sort_desc(&inst);
        assert_eq!(s.sorted_means(), &[0.9, 0.1, 0.1]);
        assert_eq!(s.perm(), &[1, 0, 2]);
        assert_eq!(s.to_original_means(), vec![0.1, 0.9, 0.1]);

        let inst = Instance::new(vec![0.9, 0.1, 0.1]).unwrap();
        assert_eq!(sort_desc(&inst).perm(), &[0, 1, 2]);

        let inst = Instance::new(vec![0.45, 0.5, 0.4]).unwrap();
        let s = sort_desc(&inst);
        assert_eq!(s.sorted_means(), &[0.5, 0.45, 0.4]);
        assert_eq!(s.perm(), &[1, 0, 2]);
    }

    #[test]
    fn phantom_mean_is_zero() {
        let inst = Instance::new(vec![0.5, 0.45]).unwrap();
        let s = sort_desc(&inst);
        assert_eq!(s.mu(1), 0.5);
        assert_eq!(s.mu(2), 0.45);
        assert_eq!(s.mu(3), 0.0);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let inst = Instance::new(vec![0.1 + 0.2, 0.45, 1.0 / 3.0])
            .unwrap()
            .with_label("test");
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back.means(), inst.means());
        assert_eq!(back.label(), Some("test"));
    }

    #[test]
    fn json_reader_revalidates() {
        assert!(Instance::from_json(r#"{"means": [0.5, 0.5]}"#).is_err());
        assert!(Instance::from_json(r#"{"means": [0.5, 0.4]}"#).is_ok());
    }
}
