use crate::corpus::SuccessLabel;
use crate::error::{Error, Result};

/// Predicts the most frequent training label for every book.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajorityBaseline {
    pub label: SuccessLabel,
}

impl MajorityBaseline {
    pub fn predict(&self, n: usize) -> Vec<SuccessLabel> {
        vec![self.label; n]
    }
}

/// Fits the baseline; ties go to `Successful`.
pub fn majority_baseline(train_labels: &[SuccessLabel]) -> Result<MajorityBaseline> {
    if train_labels.is_empty() {
        return Err(Error::Split(
            "majority baseline needs training labels".into(),
        ));
    }
    let successes = train_labels
        .iter()
        .filter(|l| **l == SuccessLabel::Successful)
        .count();
    let label = if 2 * successes >= train_labels.len() {
        SuccessLabel::Successful
    } else {
        SuccessLabel::Unsuccessful
    };
    Ok(MajorityBaseline { label })
}
