//! Layer-level record of a training-mode forward pass and its reversal.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::network::{
    BnSaved, DclsSaved, GradientSet, LiSaved, Network, NeuronSaved, Param, Projection,
};

/// One recorded operation with the values its reverse step needs.
#[derive(Clone, Debug)]
pub enum Node {
    Dense { layer: usize, input: Array3<f64> },
    Dcls { layer: usize, saved: DclsSaved },
    BatchNorm { layer: usize, saved: BnSaved },
    Neuron { layer: usize, saved: NeuronSaved },
    Dropout { mask: Array2<f64> },
    ReadoutDense { input: Array3<f64> },
    Readout { saved: LiSaved },
}

impl Node {
    pub fn label(&self) -> &'static str {
        match self {
            Node::Dense { .. } => "dense",
            Node::Dcls { .. } => "dcls",
            Node::BatchNorm { .. } => "batchnorm",
            Node::Neuron { .. } => "neuron",
            Node::Dropout { .. } => "dropout",
            Node::ReadoutDense { .. } => "readout-dense",
            Node::Readout { .. } => "readout",
        }
    }
}

/// Ordered nodes of one forward pass. A tape can be reversed once.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

struct Sink<'a> {
    index: Vec<(&'a str, usize)>,
    grads: GradientSet,
}

impl<'a> Sink<'a> {
    fn new(params: &[&'a Param]) -> Self {
        Self {
            index: params.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect(),
            grads: GradientSet::zeros_like(params),
        }
    }

    fn add(&mut self, name: &str, g: &[f64]) -> Result<()> {
        let i = self
            .index
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, i)| *i)
            .ok_or_else(|| Error::Shape(format!("tape refers to unknown parameter `{name}`")))?;
        let dst = self.grads.grads[i]
            .as_slice_mut()
            .expect("gradient buffers are contiguous");
        if dst.len() != g.len() {
            return Err(Error::Shape(format!("gradient size mismatch for `{name}`")));
        }
        dst.iter_mut().zip(g).for_each(|(d, s)| *d += s);
        Ok(())
    }
}

fn flat<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> Vec<f64> {
    a.iter().copied().collect()
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, node: Node) {
        self.nodes.push(node);
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    /// Gradients of every parameter of `net` given `dL/dlogits`.
    pub fn backward(&mut self, net: &Network, dlogits: &Array3<f64>) -> Result<GradientSet> {
        self.run(net, dlogits, false).map(|(g, _)| g)
    }

    /// As [`Tape::backward`], also returning `dL/dinput`.
    pub fn backward_with_input(&mut self, net: &Network, dlogits: &Array3<f64>) -> Result<(GradientSet, Array3<f64>)> {
        self.run(net, dlogits, true)
            .map(|(g, d)| (g, d.expect("input gradient requested")))
    }

    fn run(&mut self, net: &Network, dlogits: &Array3<f64>, need_input: bool) -> Result<(GradientSet, Option<Array3<f64>>)> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        self.consumed = true;
        let params = net.params();
        let mut sink = Sink::new(&params);
        let mut d = dlogits.as_standard_layout().into_owned();
        for node in self.nodes.iter().rev() {
            d = match node {
                Node::Readout { saved } => {
                    let (dcur, gl) = net.readout.integrate_backward(saved, &d);
                    sink.add(&net.readout.lambda_log.name, &gl)?;
                    dcur
                }
                Node::ReadoutDense { input } => {
                    let (dx, dw) = net.readout.dense.backward(input, &d);
                    sink.add(&net.readout.dense.weight.name, &flat(&dw))?;
                    dx
                }
                Node::Dropout { mask } => crate::network::apply_mask(&d, mask),
                Node::Neuron { layer, saved } => {
                    let nl = &net.layers[*layer].neuron;
                    let (din, gs) = nl.backward(saved, &d, &net.spike)?;
                    for (p, g) in nl.params().iter().zip(&gs) {
                        sink.add(&p.name, g)?;
                    }
                    din
                }
                Node::BatchNorm { layer, saved } => {
                    let bn = net.layers[*layer]
                        .bn
                        .as_ref()
                        .ok_or_else(|| Error::Shape("tape has a batchnorm node for a layer without one".into()))?;
                    let (dx, dg, db) = bn.backward(saved, &d);
                    sink.add(&bn.gamma.name, &flat(&dg))?;
                    sink.add(&bn.beta_shift.name, &flat(&db))?;
                    dx
                }
                Node::Dense { layer, input } => match &net.layers[*layer].proj {
                    Projection::Dense(dl) => {
                        let need_dx = need_input || *layer > 0;
                        let (dx, dw) = dl.backward_opt(input, &d, need_dx);
                        sink.add(&dl.weight.name, &flat(&dw))?;
                        match dx {
                            Some(dx) => dx,
                            // first projection: nothing upstream needs the input gradient
                            None => return Ok((sink.grads, None)),
                        }
                    }
                    Projection::Dcls(_) => return Err(Error::Shape("dense node on a delay layer".into())),
                },
                Node::Dcls { layer, saved } => match &net.layers[*layer].proj {
                    Projection::Dcls(dl) => {
                        let (dx, dw, dd) = dl.backward(saved, &d);
                        sink.add(&dl.weight.name, &flat(&dw))?;
                        sink.add(&dl.delay.name, &flat(&dd))?;
                        dx
                    }
                    Projection::Dense(_) => return Err(Error::Shape("delay node on a dense layer".into())),
                },
            };
        }
        Ok((sink.grads, Some(d)))
    }
}
