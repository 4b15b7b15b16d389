use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Multiply by `factor` after more than `patience` epochs without a
    /// strict improvement of the validation metric.
    Plateau,
    /// Cosine warm-up to `max_factor × base` then cosine decay, one step
    /// per epoch.
    OneCycle,
    /// Cosine decay from `base` to 0 over the run.
    Cosine,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub patience: usize,
    pub factor: f64,
    pub max_factor: f64,
}

impl ScheduleSpec {
    pub fn plateau(patience: usize, factor: f64) -> Self {
        Self {
            kind: ScheduleKind::Plateau,
            patience,
            factor,
            max_factor: 5.0,
        }
    }

    pub fn of(kind: ScheduleKind) -> Self {
        Self {
            kind,
            ..Self::plateau(5, 0.7)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ScheduleKind::Plateau && !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::Config(format!("plateau factor must be in (0, 1), got {}", self.factor)));
        }
        if self.kind == ScheduleKind::OneCycle && !(self.max_factor >= 1.0) {
            return Err(Error::Config(format!("one-cycle max factor must be ≥ 1, got {}", self.max_factor)));
        }
        Ok(())
    }
}

const ONE_CYCLE_DIV: f64 = 25.0;
const ONE_CYCLE_FINAL_DIV: f64 = 1e4;
const ONE_CYCLE_PCT_START: f64 = 0.3;

fn cos_anneal(start: f64, end: f64, pct: f64) -> f64 {
    end + (start - end) / 2.0 * ((std::f64::consts::PI * pct).cos() + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scheduler {
    pub spec: ScheduleSpec,
    pub base_lr: f64,
    pub lr: f64,
    pub total_epochs: usize,
    pub epoch: usize,
    pub best: Option<f64>,
    pub bad_epochs: usize,
}

impl Scheduler {
    pub fn new(spec: ScheduleSpec, base_lr: f64, total_epochs: usize) -> Result<Self> {
        spec.validate()?;
        if !(base_lr >= 0.0) || !base_lr.is_finite() {
            return Err(Error::Config(format!("learning rate must be finite and nonnegative, got {base_lr}")));
        }
        let mut s = Self {
            spec,
            base_lr,
            lr: base_lr,
            total_epochs,
            epoch: 0,
            best: None,
            bad_epochs: 0,
        };
        s.lr = s.epoch_lr(0);
        Ok(s)
    }

    fn epoch_lr(&self, e: usize) -> f64 {
        match self.spec.kind {
            ScheduleKind::Plateau => self.lr,
            ScheduleKind::None => self.base_lr,
            ScheduleKind::Cosine => {
                let t = self.total_epochs.max(1) as f64;
                self.base_lr * (1.0 + (std::f64::consts::PI * (e as f64).min(t) / t).cos()) / 2.0
            }
            ScheduleKind::OneCycle => {
                let max_lr = self.spec.max_factor * self.base_lr;
                let initial = max_lr / ONE_CYCLE_DIV;
                let min_lr = initial / ONE_CYCLE_FINAL_DIV;
                let total = self.total_epochs.max(1) as f64;
                let up_end = ONE_CYCLE_PCT_START * total - 1.0;
                let down_end = total - 1.0;
                let e = e as f64;
                if e <= up_end {
                    cos_anneal(initial, max_lr, if up_end > 0.0 { e / up_end } else { 1.0 })
                } else {
                    let span = down_end - up_end;
                    cos_anneal(max_lr, min_lr, if span > 0.0 { ((e - up_end) / span).min(1.0) } else { 1.0 })
                }
            }
        }
    }

    /// Advances one epoch. `metric` is the validation score to maximise; it
    /// is only consulted by the plateau rule.
    pub fn step(&mut self, metric: f64) -> f64 {
        self.epoch += 1;
        if self.spec.kind == ScheduleKind::Plateau {
            match self.best {
                Some(b) if metric <= b => self.bad_epochs += 1,
                _ => {
                    self.best = Some(metric);
                    self.bad_epochs = 0;
                }
            }
            if self.bad_epochs > self.spec.patience {
                self.lr *= self.spec.factor;
                self.bad_epochs = 0;
            }
        } else {
            self.lr = self.epoch_lr(self.epoch);
        }
        self.lr
    }

    /// `[lr, base, epoch, best (NaN if none), bad_epochs]`
    pub fn state(&self) -> [f64; 5] {
        [
            self.lr,
            self.base_lr,
            self.epoch as f64,
            self.best.unwrap_or(f64::NAN),
            self.bad_epochs as f64,
        ]
    }

    pub fn restore(&mut self, s: &[f64]) -> Result<()> {
        if s.len() != 5 {
            return Err(Error::Config("scheduler state must have 5 entries".into()));
        }
        self.lr = s[0];
        self.base_lr = s[1];
        self.epoch = s[2] as usize;
        self.best = if s[3].is_nan() { None } else { Some(s[3]) };
        self.bad_epochs = s[4] as usize;
        Ok(())
    }
}
