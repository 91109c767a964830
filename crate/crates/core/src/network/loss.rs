//! Softmax cross-entropy head.

use crate::error::{Error, Result};

/// Softmax over class logits with cross-entropy loss.
#[derive(Debug, Clone)]
pub struct SoftmaxCrossEntropy {
    classes: usize,
    probs: Option<Vec<f64>>,
}

impl SoftmaxCrossEntropy {
    pub fn new(classes: usize) -> Self {
        assert!(classes >= 2);
        SoftmaxCrossEntropy {
            classes,
            probs: None,
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Stabilized softmax; caches the probabilities for loss/delta.
    pub fn forward(&mut self, logits: &[f64]) -> Result<Vec<f64>> {
        if logits.len() != self.classes {
            return Err(Error::Dimension(format!(
                "{} logits for {} classes",
                logits.len(),
                self.classes
            )));
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let probs: Vec<f64> = exps.iter().map(|&e| e / sum).collect();
        self.probs = Some(probs.clone());
        Ok(probs)
    }

    fn cached(&self) -> Result<&[f64]> {
        self.probs
            .as_deref()
            .ok_or_else(|| Error::State("loss head used before forward".into()))
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.classes {
            return Err(Error::Parameter(format!(
                "label {label} out of range for {} classes",
                self.classes
            )));
        }
        Ok(())
    }

    /// Cross-entropy −ln p(label) of the cached forward pass.
    pub fn loss(&self, label: usize) -> Result<f64> {
        self.check_label(label)?;
        let probs = self.cached()?;
        Ok(-probs[label].max(f64::MIN_POSITIVE).ln())
    }

    /// Gradient of the loss with respect to the logits: p − onehot.
    pub fn delta(&self, label: usize) -> Result<Vec<f64>> {
        self.check_label(label)?;
        let probs = self.cached()?;
        Ok(probs
            .iter()
            .enumerate()
            .map(|(i, &p)| if i == label { p - 1.0 } else { p })
            .collect())
    }
}
