use std::fmt::Write as _;

/// Statistics of one training epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
    /// Sampled nodes whose predicted displacement had to be shortened.
    pub truncations: usize,
    /// Sampled nodes whose truncated candidate still had a non-positive
    /// element; zero unless the truncation guarantee is broken.
    pub negative_candidates: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingTrace {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn val_losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.epochs.iter().map(|e| e.val_loss)
    }

    pub fn best_val_loss(&self) -> Option<f64> {
        self.val_losses().filter(|v| v.is_finite()).min_by(f64::total_cmp)
    }

    /// True when any recorded loss is non-finite or exceeds `limit`.
    pub fn diverged(&self, limit: f64) -> bool {
        self.epochs.iter().any(|e| {
            !e.train_loss.is_finite() || !e.val_loss.is_finite() || e.train_loss > limit || e.val_loss > limit
        })
    }

    /// `epoch,train_loss,val_loss,lr,truncations` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,lr,truncations\n");
        for e in &self.epochs {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.6e},{}",
                e.epoch, e.train_loss, e.val_loss, e.lr, e.truncations
            )
            .expect("writing to a String");
        }
        out
    }
}
