use super::model::{Logits, N_CLASSES};
use crate::corpus::SuccessLabel;

pub fn softmax(logits: Logits) -> [f64; N_CLASSES] {
    let m = logits[0].max(logits[1]);
    let e = logits.map(|z| (z - m).exp());
    let s = e[0] + e[1];
    e.map(|x| x / s)
}

/// Softmax cross-entropy (natural log), computed through log-sum-exp.
pub fn loss(logits: Logits, label: SuccessLabel) -> f64 {
    let m = logits[0].max(logits[1]);
    let lse = m + ((logits[0] - m).exp() + (logits[1] - m).exp()).ln();
    lse - logits[label.class_index()]
}

/// Loss and its gradient with respect to the logits.
pub fn loss_and_grad(logits: Logits, label: SuccessLabel) -> (f64, Logits) {
    let mut g = softmax(logits);
    g[label.class_index()] -= 1.0;
    (loss(logits, label), g)
}
