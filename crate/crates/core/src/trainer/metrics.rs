//! Training metrics and their CSV serialization.

/// Which pass a metrics row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// One minibatch iteration.
    Train,
    /// Full training-set evaluation at the end of an epoch.
    TrainEpoch,
    /// Full validation-set evaluation at the end of an epoch.
    Val,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::TrainEpoch => "train_epoch",
            Split::Val => "val",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub iteration: usize,
    pub epoch: usize,
    pub split: Split,
    pub loss: f64,
    pub accuracy: f64,
    /// Matched-filter scales after the update; absent for the baseline.
    pub rho: Option<(f64, f64)>,
    /// Wall-clock seconds since training start; recorded only when timing
    /// capture is enabled (it makes outputs non-reproducible).
    pub seconds: Option<f64>,
}

/// Everything captured during one training run.
#[derive(Debug, Clone, Default)]
pub struct Metrics {
    pub rows: Vec<MetricsRow>,
    /// Final matched-filter scales, when the network has them.
    pub final_rho: Option<(f64, f64)>,
    /// Wall-clock seconds per epoch (always captured in memory).
    pub epoch_seconds: Vec<f64>,
}

impl Metrics {
    /// Accuracy of the last full training-set evaluation.
    pub fn final_train_accuracy(&self) -> Option<f64> {
        self.rows
            .iter()
            .rev()
            .find(|r| r.split == Split::TrainEpoch)
            .map(|r| r.accuracy)
    }

    /// Accuracy of the last validation evaluation.
    pub fn final_val_accuracy(&self) -> Option<f64> {
        self.rows
            .iter()
            .rev()
            .find(|r| r.split == Split::Val)
            .map(|r| r.accuracy)
    }

    pub fn iteration_count(&self) -> usize {
        self.rows.iter().filter(|r| r.split == Split::Train).count()
    }

    /// Per-iteration training losses in order.
    pub fn train_losses(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.split == Split::Train)
            .map(|r| r.loss)
            .collect()
    }

    /// RFC 4180 CSV (CRLF line endings, header row). Empty fields stand
    /// for values that do not apply to a row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,epoch,split,loss,accuracy,rho_r,rho_a,seconds\r\n");
        for r in &self.rows {
            let (rho_r, rho_a) = match r.rho {
                Some((a, b)) => (format!("{a}"), format!("{b}")),
                None => (String::new(), String::new()),
            };
            let seconds = r.seconds.map(|s| format!("{s}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\r\n",
                r.iteration,
                r.epoch,
                r.split.as_str(),
                r.loss,
                r.accuracy,
                rho_r,
                rho_a,
                seconds
            ));
        }
        out
    }
}
