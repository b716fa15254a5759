//! Tape-based reverse-mode differentiation.
//!
//! A [`Tape`] is an append-only list of nodes; each node stores its operator,
//! its input node ids, and its forward value. [`Tape::backward`] walks the
//! list in reverse, accumulating gradients per node and depositing parameter
//! gradients into the owning [`ParamStore`] by name. There is no graph
//! rewriting of any kind: what you record is exactly what gets differentiated.
//!
//! Shape checking happens when nodes are recorded (panicking `assert`s —
//! callers at the public API boundary validate first and return typed
//! errors).

use crate::error::{Error, Result};
use crate::nn::params::ParamStore;
use crate::nn::tensor::Tensor2;

pub type NodeId = usize;

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

/// GELU, tanh approximation:
/// `0.5 * x * (1 + tanh(sqrt(2/pi) * (x + 0.044715 * x^3)))`.
///
/// This exact form (and only this form) is used everywhere, so ports agree
/// to f64 rounding.
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

/// Analytic derivative of the tanh-approximated GELU.
pub fn gelu_derivative(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    let du = GELU_C * (1.0 + 3.0 * GELU_A * x * x);
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
}

#[derive(Debug, Clone)]
enum Op {
    /// Leaf bound to a named parameter; backward accumulates into the store.
    Param(String),
    /// Leaf with no gradient.
    Constant,
    /// Identity forward, zero backward (the stop-gradient operation).
    StopGrad(NodeId),
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Elementwise product.
    Hadamard(NodeId, NodeId),
    /// matrix + bias where bias is 1 x cols, added to every row.
    AddRowBroadcast(NodeId, NodeId),
    Scale(NodeId, f64),
    Gelu(NodeId),
    /// Row-wise softmax.
    SoftmaxRows(NodeId),
    Transpose(NodeId),
    ConcatRows(Vec<NodeId>),
    ConcatCols(Vec<NodeId>),
    SliceRows(NodeId, usize, usize),
    SliceCols(NodeId, usize, usize),
    /// Same buffer, new shape.
    Reshape(NodeId),
    MeanAll(NodeId),
    SumAll(NodeId),
}

struct Node {
    op: Op,
    value: Tensor2,
}

/// Append-only forward tape.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor2 {
        &self.nodes[id].value
    }

    fn push(&mut self, op: Op, value: Tensor2) -> NodeId {
        self.nodes.push(Node { op, value });
        self.nodes.len() - 1
    }

    /// Record a named parameter leaf, loading its current value.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<NodeId> {
        let value = store.value(name)?.clone();
        Ok(self.push(Op::Param(name.to_string()), value))
    }

    pub fn constant(&mut self, value: Tensor2) -> NodeId {
        self.push(Op::Constant, value)
    }

    pub fn scalar(&mut self, value: f64) -> NodeId {
        self.constant(Tensor2::scalar(value))
    }

    /// Identity in the forward pass; gradients stop here.
    pub fn stop_grad(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).clone();
        self.push(Op::StopGrad(a), value)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).matmul(self.value(b));
        self.push(Op::MatMul(a, b), value)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).add(self.value(b));
        self.push(Op::Add(a, b), value)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).sub(self.value(b));
        self.push(Op::Sub(a, b), value)
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).hadamard(self.value(b));
        self.push(Op::Hadamard(a, b), value)
    }

    /// `matrix + bias`, bias broadcast across rows.
    pub fn add_row_broadcast(&mut self, matrix: NodeId, bias: NodeId) -> NodeId {
        let m = self.value(matrix);
        let b = self.value(bias);
        assert_eq!(b.rows(), 1, "bias must be a row vector");
        assert_eq!(b.cols(), m.cols(), "bias width mismatch");
        let mut out = m.clone();
        for r in 0..out.rows() {
            for c in 0..out.cols() {
                out.set(r, c, out.get(r, c) + b.get(0, c));
            }
        }
        self.push(Op::AddRowBroadcast(matrix, bias), out)
    }

    pub fn scale(&mut self, a: NodeId, s: f64) -> NodeId {
        let value = self.value(a).scale(s);
        self.push(Op::Scale(a, s), value)
    }

    pub fn gelu(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(gelu);
        self.push(Op::Gelu(a), value)
    }

    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        let mut out = Tensor2::zeros(x.rows(), x.cols());
        for r in 0..x.rows() {
            let row = x.row(r);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            for (c, e) in exps.iter().enumerate() {
                out.set(r, c, e / sum);
            }
        }
        self.push(Op::SoftmaxRows(a), out)
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).transpose();
        self.push(Op::Transpose(a), value)
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "concat_rows with no parts");
        let cols = self.value(parts[0]).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let v = self.value(p);
            assert_eq!(v.cols(), cols, "concat_rows width mismatch");
            rows += v.rows();
            data.extend_from_slice(v.data());
        }
        let value = Tensor2::from_vec(rows, cols, data).expect("concat_rows");
        self.push(Op::ConcatRows(parts.to_vec()), value)
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "concat_cols with no parts");
        let rows = self.value(parts[0]).rows();
        let total_cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut out = Tensor2::zeros(rows, total_cols);
        let mut col0 = 0;
        for &p in parts {
            let v = self.value(p);
            assert_eq!(v.rows(), rows, "concat_cols height mismatch");
            for r in 0..rows {
                for c in 0..v.cols() {
                    out.set(r, col0 + c, v.get(r, c));
                }
            }
            col0 += v.cols();
        }
        self.push(Op::ConcatCols(parts.to_vec()), out)
    }

    pub fn slice_rows(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.value(a);
        assert!(start + len <= v.rows(), "slice_rows out of range");
        let cols = v.cols();
        let data = v.data()[start * cols..(start + len) * cols].to_vec();
        let value = Tensor2::from_vec(len, cols, data).expect("slice_rows");
        self.push(Op::SliceRows(a, start, len), value)
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.value(a);
        assert!(start + len <= v.cols(), "slice_cols out of range");
        let mut out = Tensor2::zeros(v.rows(), len);
        for r in 0..v.rows() {
            for c in 0..len {
                out.set(r, c, v.get(r, start + c));
            }
        }
        self.push(Op::SliceCols(a, start, len), out)
    }

    pub fn reshape(&mut self, a: NodeId, rows: usize, cols: usize) -> NodeId {
        let value = self.value(a).reshaped(rows, cols);
        self.push(Op::Reshape(a), value)
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a);
        let mean = v.data().iter().sum::<f64>() / v.len() as f64;
        self.push(Op::MeanAll(a), Tensor2::scalar(mean))
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a);
        let sum = v.data().iter().sum::<f64>();
        self.push(Op::SumAll(a), Tensor2::scalar(sum))
    }

    /// Reverse pass from a scalar loss node. Every parameter reached by the
    /// tape gets its gradient accumulated into `store`; unreached parameters
    /// keep whatever gradient they already had (zero after `zero_grads`).
    pub fn backward(&self, loss: NodeId, store: &mut ParamStore) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::State(
                "backward called on an empty tape (no forward recorded)".into(),
            ));
        }
        if loss >= self.nodes.len() {
            return Err(Error::State(format!(
                "backward: node {loss} is not on the tape (len {})",
                self.nodes.len()
            )));
        }
        if self.nodes[loss].value.shape() != (1, 1) {
            return Err(Error::State(format!(
                "backward: loss must be a 1x1 scalar, got {:?}",
                self.nodes[loss].value.shape()
            )));
        }

        let mut grads: Vec<Option<Tensor2>> = (0..=loss).map(|_| None).collect();
        grads[loss] = Some(Tensor2::scalar(1.0));

        for id in (0..=loss).rev() {
            let Some(g) = grads[id].take() else { continue };
            match &self.nodes[id].op {
                Op::Param(name) => store.accumulate_grad(name, &g)?,
                Op::Constant => {}
                Op::StopGrad(_) => {}
                Op::MatMul(a, b) => {
                    let ga = g.matmul(&self.value(*b).transpose());
                    let gb = self.value(*a).transpose().matmul(&g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g.scale(-1.0));
                }
                Op::Hadamard(a, b) => {
                    let ga = g.hadamard(self.value(*b));
                    let gb = g.hadamard(self.value(*a));
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::AddRowBroadcast(m, bias) => {
                    let mut gb = Tensor2::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for c in 0..g.cols() {
                            gb.set(0, c, gb.get(0, c) + g.get(r, c));
                        }
                    }
                    accumulate(&mut grads, *m, g);
                    accumulate(&mut grads, *bias, gb);
                }
                Op::Scale(a, s) => accumulate(&mut grads, *a, g.scale(*s)),
                Op::Gelu(a) => {
                    let ga = g.zip_map(self.value(*a), |gv, x| gv * gelu_derivative(x));
                    accumulate(&mut grads, *a, ga);
                }
                Op::SoftmaxRows(a) => {
                    // d/dx softmax: s .* (g - <g, s>) per row.
                    let s = &self.nodes[id].value;
                    let mut ga = Tensor2::zeros(s.rows(), s.cols());
                    for r in 0..s.rows() {
                        let dot: f64 = (0..s.cols()).map(|c| g.get(r, c) * s.get(r, c)).sum();
                        for c in 0..s.cols() {
                            ga.set(r, c, s.get(r, c) * (g.get(r, c) - dot));
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Transpose(a) => accumulate(&mut grads, *a, g.transpose()),
                Op::ConcatRows(parts) => {
                    let mut row0 = 0;
                    for &p in parts {
                        let rows = self.value(p).rows();
                        let cols = self.value(p).cols();
                        let slice =
                            g.data()[row0 * cols..(row0 + rows) * cols].to_vec();
                        let gp = Tensor2::from_vec(rows, cols, slice).expect("concat grad");
                        accumulate(&mut grads, p, gp);
                        row0 += rows;
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut col0 = 0;
                    for &p in parts {
                        let v = self.value(p);
                        let mut gp = Tensor2::zeros(v.rows(), v.cols());
                        for r in 0..v.rows() {
                            for c in 0..v.cols() {
                                gp.set(r, c, g.get(r, col0 + c));
                            }
                        }
                        accumulate(&mut grads, p, gp);
                        col0 += v.cols();
                    }
                }
                Op::SliceRows(a, start, len) => {
                    let v = self.value(*a);
                    let mut ga = Tensor2::zeros(v.rows(), v.cols());
                    for r in 0..*len {
                        for c in 0..v.cols() {
                            ga.set(start + r, c, g.get(r, c));
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::SliceCols(a, start, len) => {
                    let v = self.value(*a);
                    let mut ga = Tensor2::zeros(v.rows(), v.cols());
                    for r in 0..v.rows() {
                        for c in 0..*len {
                            ga.set(r, start + c, g.get(r, c));
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Reshape(a) => {
                    let (r, c) = self.value(*a).shape();
                    accumulate(&mut grads, *a, g.reshaped(r, c));
                }
                Op::MeanAll(a) => {
                    let v = self.value(*a);
                    let per = g.item() / v.len() as f64;
                    let ga = Tensor2::from_vec(v.rows(), v.cols(), vec![per; v.len()])
                        .expect("mean grad");
                    accumulate(&mut grads, *a, ga);
                }
                Op::SumAll(a) => {
                    let v = self.value(*a);
                    let per = g.item();
                    let ga = Tensor2::from_vec(v.rows(), v.cols(), vec![per; v.len()])
                        .expect("sum grad");
                    accumulate(&mut grads, *a, ga);
                }
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Tensor2>], id: NodeId, delta: Tensor2) {
    match &mut grads[id] {
        Some(g) => g.add_assign(&delta),
        slot @ None => *slot = Some(delta),
    }
}
