use ndarray::ArrayD;

use crate::error::{Error, Result};
use crate::network::{GradientSet, Param, ParamGroup};

/// Bias-corrected Adam with per-group learning rates.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<ArrayD<f64>>,
    pub v: Vec<ArrayD<f64>>,
}

/// Learning rate for each parameter group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupRates {
    pub weights: f64,
    pub neuron: f64,
    pub delays: f64,
}

impl GroupRates {
    pub fn uniform(lr: f64) -> Self {
        Self {
            weights: lr,
            neuron: lr,
            delays: lr,
        }
    }

    pub fn get(&self, g: ParamGroup) -> f64 {
        match g {
            ParamGroup::Weights => self.weights,
            ParamGroup::Neuron => self.neuron,
            ParamGroup::Delays => self.delays,
        }
    }
}

impl Adam {
    pub fn new(params: &[&Param]) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.iter().map(|p| ArrayD::zeros(p.value.raw_dim())).collect(),
            v: params.iter().map(|p| ArrayD::zeros(p.value.raw_dim())).collect(),
        }
    }

    /// Applies one update. Nothing is modified when any gradient is not finite.
    pub fn update(&mut self, params: Vec<&mut Param>, grads: &GradientSet, rates: GroupRates) -> Result<()> {
        if params.len() != grads.grads.len() || params.len() != self.m.len() {
            return Err(Error::Shape("optimizer state does not match the parameter list".into()));
        }
        if let Some((t, i)) = grads.first_non_finite() {
            return Err(Error::NonFiniteGradient {
                param: grads.names[t].clone(),
                index: i,
            });
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for (k, p) in params.into_iter().enumerate() {
            let g = &grads.grads[k];
            if g.shape() != p.value.shape() {
                return Err(Error::Shape(format!("gradient shape mismatch for `{}`", p.name)));
            }
            let lr = rates.get(p.group);
            let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
            ndarray::Zip::from(&mut p.value)
                .and(&mut self.m[k])
                .and(&mut self.v[k])
                .and(g)
                .for_each(|x, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    *x -= lr * mh / (vh.sqrt() + eps);
                });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(g: Vec<f64>) -> (Param, GradientSet) {
        let p = Param::vector("w", ParamGroup::Weights, vec![1.0, -2.0, 0.5]);
        let mut gs = GradientSet::zeros_like(&[&p]);
        gs.grads[0] = ArrayD::from_shape_vec(ndarray::IxDyn(&[3]), g).unwrap();
        (p, gs)
    }

    #[test]
    fn zero_gradient_no_change() {
        let (mut p, gs) = setup(vec![0.0; 3]);
        let before = p.clone();
        let mut opt = Adam::new(&[&p]);
        opt.update(vec![&mut p], &gs, GroupRates::uniform(0.1)).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let (mut p, gs) = setup(vec![0.3, -4.0, 1e-3]);
        let mut opt = Adam::new(&[&p]);
        opt.update(vec![&mut p], &gs, GroupRates::uniform(0.01)).unwrap();
        // m̂ = g and v̂ = g², so the step is lr·g/(|g| + eps)
        let expect = [1.0 - 0.01 * 0.3 / (0.3 + 1e-8), -2.0 + 0.01 * 4.0 / (4.0 + 1e-8), 0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8)];
        for (a, b) in p.slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} {b}");
        }
    }

    #[test]
    fn zero_rate_no_change() {
        let (mut p, gs) = setup(vec![1.0, 2.0, 3.0]);
        let before = p.clone();
        let mut opt = Adam::new(&[&p]);
        opt.update(vec![&mut p], &gs, GroupRates::uniform(0.0)).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn non_finite_aborts_untouched() {
        let (mut p, gs) = setup(vec![1.0, f64::NAN, 3.0]);
        let before = p.clone();
        let mut opt = Adam::new(&[&p]);
        let err = opt.update(vec![&mut p], &gs, GroupRates::uniform(0.1)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { index: 1, .. }));
        assert_eq!(p, before);
        assert_eq!(opt.step, 0);
    }
}
