use crate::error::{Error, Result};
use crate::readability::N_INDICES;

/// Architecture of the convolutional classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub window_sizes: Vec<usize>,
    pub filters_per_window: usize,
    pub hidden_units: usize,
    /// Probability of dropping a pooled convolution feature during training.
    pub dropout_p: f64,
    pub input_dim: usize,
    pub n_chunks: usize,
    pub use_readability: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            window_sizes: vec![2, 3, 5, 7],
            filters_per_window: 20,
            hidden_units: 50,
            dropout_p: 0.6,
            input_dim: 512,
            n_chunks: 50,
            use_readability: true,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.window_sizes.is_empty() {
            return bad("at least one window size is required".into());
        }
        if self.window_sizes.contains(&0) {
            return bad("window sizes must be positive".into());
        }
        if self.filters_per_window == 0 || self.hidden_units == 0 {
            return bad("filters_per_window and hidden_units must be positive".into());
        }
        if self.input_dim == 0 || self.n_chunks == 0 {
            return bad("input_dim and n_chunks must be positive".into());
        }
        if let Some(w) = self.window_sizes.iter().find(|&&w| w > self.n_chunks) {
            return bad(format!(
                "window size {w} exceeds n_chunks {}",
                self.n_chunks
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return bad(format!("dropout_p {} outside [0, 1)", self.dropout_p));
        }
        Ok(())
    }

    /// Width of the concatenated max-pooled convolution features.
    pub fn pooled_dim(&self) -> usize {
        self.filters_per_window * self.window_sizes.len()
    }

    /// Input width of the first dense layer.
    pub fn fused_dim(&self) -> usize {
        self.pooled_dim() + if self.use_readability { N_INDICES } else { 0 }
    }
}
