use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::error::{shape_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Index of a node on a [`Tape`]. Inputs always have smaller ids than the
/// node that consumes them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op<'a> {
    Leaf,
    Spmm(&'a CsrMatrix, NodeId),
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Scale(NodeId, f64),
    Offset(NodeId),
    MulScalar(NodeId, NodeId),
    Recip(NodeId),
    ConcatCols(NodeId, NodeId),
    Relu(NodeId),
    Dropout(NodeId, Vec<f64>),
    LogSoftmaxRows(NodeId),
    Sigmoid(NodeId),
    MeanPair(NodeId, NodeId),
    Nll(NodeId, Vec<(usize, usize)>),
    Sum(NodeId),
}

impl Op<'_> {
    fn inputs(&self) -> [Option<NodeId>; 2] {
        use Op::*;
        match *self {
            Leaf => [None, None],
            Spmm(_, x) | Scale(x, _) | Offset(x) | Recip(x) | Relu(x) | Dropout(x, _) | LogSoftmaxRows(x)
            | Sigmoid(x) | Nll(x, _) | Sum(x) => [Some(x), None],
            MatMul(a, b) | Add(a, b) | Sub(a, b) | MulScalar(a, b) | ConcatCols(a, b) | MeanPair(a, b) => {
                [Some(a), Some(b)]
            }
        }
    }
}

#[derive(Debug)]
struct Node<'a> {
    op: Op<'a>,
    value: Cow<'a, DenseMatrix>,
    /// Some parameter is an ancestor; only such nodes receive gradients.
    needs_grad: bool,
}

/// Append-only record of a forward computation.
///
/// Values are never sanitized: a NaN or infinity produced by one node flows
/// into every consumer exactly as IEEE arithmetic dictates.
#[derive(Debug, Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
    params: HashMap<usize, NodeId>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &DenseMatrix {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op<'a>, value: Cow<'a, DenseMatrix>) -> NodeId {
        debug_assert!(op.inputs().iter().flatten().all(|i| i.0 < self.nodes.len()));
        let needs_grad = op.inputs().iter().flatten().any(|i| self.nodes[i.0].needs_grad);
        self.nodes.push(Node { op, value, needs_grad });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: DenseMatrix) -> NodeId {
        self.push(Op::Leaf, Cow::Owned(value))
    }

    pub fn constant_ref(&mut self, value: &'a DenseMatrix) -> NodeId {
        self.push(Op::Leaf, Cow::Borrowed(value))
    }

    /// Leaf bound to parameter `slot`. Repeated calls for the same slot
    /// return the same node.
    pub fn param(&mut self, slot: usize, value: &'a DenseMatrix) -> NodeId {
        if let Some(&id) = self.params.get(&slot) {
            return id;
        }
        let id = self.constant_ref(value);
        self.nodes[id.0].needs_grad = true;
        self.params.insert(slot, id);
        id
    }

    /// As [`Tape::param`] with an owned value.
    pub fn param_owned(&mut self, slot: usize, value: DenseMatrix) -> NodeId {
        if let Some(&id) = self.params.get(&slot) {
            return id;
        }
        let id = self.constant(value);
        self.nodes[id.0].needs_grad = true;
        self.params.insert(slot, id);
        id
    }

    pub fn spmm(&mut self, a: &'a CsrMatrix, x: NodeId) -> Result<NodeId> {
        let v = a.spmm(self.value(x))?;
        Ok(self.push(Op::Spmm(a, x), Cow::Owned(v)))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), Cow::Owned(v)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), Cow::Owned(v)))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).sub(self.value(b))?;
        Ok(self.push(Op::Sub(a, b), Cow::Owned(v)))
    }

    pub fn scale(&mut self, x: NodeId, alpha: f64) -> NodeId {
        let v = self.value(x).scale(alpha);
        self.push(Op::Scale(x, alpha), Cow::Owned(v))
    }

    /// Elementwise `x + c`.
    pub fn offset(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = self.value(x).map(|e| e + c);
        self.push(Op::Offset(x), Cow::Owned(v))
    }

    /// `s · x` where `s` is a 1×1 node.
    pub fn mul_scalar(&mut self, x: NodeId, s: NodeId) -> Result<NodeId> {
        let sv = self.value(s);
        if sv.shape() != (1, 1) {
            return Err(shape_err("mul_scalar", format!("scalar operand has shape {:?}", sv.shape())));
        }
        let v = self.value(x).scale(sv.get(0, 0));
        Ok(self.push(Op::MulScalar(x, s), Cow::Owned(v)))
    }

    /// Elementwise `1 / x`.
    pub fn recip(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(|e| 1.0 / e);
        self.push(Op::Recip(x), Cow::Owned(v))
    }

    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).concat_cols(self.value(b))?;
        Ok(self.push(Op::ConcatCols(a, b), Cow::Owned(v)))
    }

    /// `max(x, 0)`; NaN passes through unchanged.
    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(|e| if e > 0.0 || e.is_nan() { e } else { 0.0 });
        self.push(Op::Relu(x), Cow::Owned(v))
    }

    /// Inverted dropout. Identity (no node recorded) when `train` is false
    /// or `rate` is zero.
    pub fn dropout<R: Rng + ?Sized>(&mut self, x: NodeId, rate: f64, train: bool, rng: &mut R) -> NodeId {
        if !train || rate <= 0.0 {
            return x;
        }
        let keep = 1.0 - rate;
        let xv = self.value(x);
        let mask: Vec<f64> = (0..xv.data().len())
            .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let data = xv.data().iter().zip(&mask).map(|(a, m)| a * m).collect();
        let v = DenseMatrix::new(xv.rows(), xv.cols(), data).expect("same shape");
        self.push(Op::Dropout(x, mask), Cow::Owned(v))
    }

    /// Row-wise `x − logsumexp(x)` with max subtraction.
    pub fn log_softmax_rows(&mut self, x: NodeId) -> NodeId {
        let xv = self.value(x);
        let mut out = xv.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| if b.is_nan() || b > a { b } else { a });
            let lse = m + row.iter().map(|&e| (e - m).exp()).sum::<f64>().ln();
            for e in row.iter_mut() {
                *e -= lse;
            }
        }
        self.push(Op::LogSoftmaxRows(x), Cow::Owned(out))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(sigmoid);
        self.push(Op::Sigmoid(x), Cow::Owned(v))
    }

    /// `½ (a + b)`.
    pub fn mean_pair(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).zip_map(self.value(b), |x, y| 0.5 * (x + y))?;
        Ok(self.push(Op::MeanPair(a, b), Cow::Owned(v)))
    }

    /// Mean negative log-likelihood over the masked rows.
    pub fn nll_loss(&mut self, logp: NodeId, labels: &[usize], mask: &[bool]) -> Result<NodeId> {
        let lp = self.value(logp);
        if labels.len() != lp.rows() || mask.len() != lp.rows() {
            return Err(shape_err(
                "nll_loss",
                format!("{} rows, {} labels, {} mask entries", lp.rows(), labels.len(), mask.len()),
            ));
        }
        let picks: Vec<(usize, usize)> = (0..lp.rows()).filter(|&r| mask[r]).map(|r| (r, labels[r])).collect();
        if picks.is_empty() {
            return Err(shape_err("nll_loss", "empty mask"));
        }
        if let Some(&(r, l)) = picks.iter().find(|&&(_, l)| l >= lp.cols()) {
            return Err(shape_err("nll_loss", format!("label {l} of row {r} exceeds {} classes", lp.cols())));
        }
        let total: f64 = picks.iter().map(|&(r, l)| lp.get(r, l)).sum();
        let v = DenseMatrix::scalar(-total / picks.len() as f64);
        Ok(self.push(Op::Nll(logp, picks), Cow::Owned(v)))
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let v = DenseMatrix::scalar(self.value(x).sum());
        self.push(Op::Sum(x), Cow::Owned(v))
    }

    /// Reverse sweep from a scalar node, visiting ids in descending order.
    ///
    /// Only ancestors of `loss` receive gradients; every other node, and
    /// every parameter not on a path to `loss`, is left untouched.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        if self.value(loss).shape() != (1, 1) {
            return Err(shape_err("backward", format!("loss has shape {:?}", self.value(loss).shape())));
        }
        let mut grads: Vec<Option<DenseMatrix>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(DenseMatrix::scalar(1.0));

        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.needs_grad {
                continue;
            }
            for (input, contrib) in self.local_grads(node, &g)? {
                if !self.nodes[input.0].needs_grad {
                    continue;
                }
                match &mut grads[input.0] {
                    Some(acc) => acc.add_assign(&contrib)?,
                    slot => *slot = Some(contrib),
                }
            }
            grads[id] = Some(g);
        }

        let params = self
            .params
            .iter()
            .filter_map(|(&slot, &id)| grads.get(id.0).and_then(|g| g.clone()).map(|g| (slot, g)))
            .collect();
        Ok(Gradients { nodes: grads, params })
    }

    fn local_grads(&self, node: &Node<'a>, g: &DenseMatrix) -> Result<Vec<(NodeId, DenseMatrix)>> {
        let v = |id: NodeId| self.value(id);
        Ok(match &node.op {
            Op::Leaf => Vec::new(),
            Op::Spmm(a, x) => vec![(*x, spmm_transpose(a, g))],
            Op::MatMul(a, b) => {
                let mut out = Vec::with_capacity(2);
                if self.nodes[a.0].needs_grad {
                    out.push((*a, g.matmul_t(v(*b))?));
                }
                if self.nodes[b.0].needs_grad {
                    out.push((*b, v(*a).t_matmul(g)?));
                }
                out
            }
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![(*a, g.clone()), (*b, g.scale(-1.0))],
            Op::Scale(x, alpha) => vec![(*x, g.scale(*alpha))],
            Op::Offset(x) => vec![(*x, g.clone())],
            Op::MulScalar(x, s) => {
                let sv = v(*s).get(0, 0);
                let ds: f64 = g.data().iter().zip(v(*x).data()).map(|(a, b)| a * b).sum();
                vec![(*x, g.scale(sv)), (*s, DenseMatrix::scalar(ds))]
            }
            Op::Recip(x) => vec![(*x, g.zip_map(&node.value, |gi, y| -gi * y * y)?)],
            Op::ConcatCols(a, b) => {
                let left = v(*a).cols();
                vec![(*a, g.col_block(0, left)), (*b, g.col_block(left, v(*b).cols()))]
            }
            Op::Relu(x) => vec![(*x, g.zip_map(v(*x), |gi, xi| if xi <= 0.0 { 0.0 } else { gi })?)],
            Op::Dropout(x, mask) => {
                let data = g.data().iter().zip(mask).map(|(a, m)| a * m).collect();
                vec![(*x, DenseMatrix::new(g.rows(), g.cols(), data)?)]
            }
            Op::LogSoftmaxRows(x) => {
                let y = &node.value;
                let mut dx = g.clone();
                for r in 0..dx.rows() {
                    let row_sum: f64 = g.row(r).iter().sum();
                    for (d, &yr) in dx.row_mut(r).iter_mut().zip(y.row(r)) {
                        *d -= yr.exp() * row_sum;
                    }
                }
                vec![(*x, dx)]
            }
            Op::Sigmoid(x) => vec![(*x, g.zip_map(&node.value, |gi, y| gi * y * (1.0 - y))?)],
            Op::MeanPair(a, b) => {
                let half = g.scale(0.5);
                vec![(*a, half.clone()), (*b, half)]
            }
            Op::Nll(x, picks) => {
                let xv = v(*x);
                let mut dx = DenseMatrix::zeros(xv.rows(), xv.cols());
                let w = -g.get(0, 0) / picks.len() as f64;
                for &(r, l) in picks {
                    dx.set(r, l, dx.get(r, l) + w);
                }
                vec![(*x, dx)]
            }
            Op::Sum(x) => {
                let (r, c) = v(*x).shape();
                vec![(*x, DenseMatrix::filled(r, c, g.get(0, 0)))]
            }
        })
    }
}

/// `Aᵀ · g` by scattering rows of `g`.
fn spmm_transpose(a: &CsrMatrix, g: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.n(), g.cols());
    for r in 0..a.n() {
        let g_row = g.row(r);
        for (c, val) in a.row(r) {
            for (o, &gi) in out.row_mut(c).iter_mut().zip(g_row) {
                *o += val * gi;
            }
        }
    }
    out
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Result of a reverse sweep.
#[derive(Debug)]
pub struct Gradients {
    nodes: Vec<Option<DenseMatrix>>,
    params: BTreeMap<usize, DenseMatrix>,
}

impl Gradients {
    /// Gradient of a node, `None` when it is not an ancestor of the loss or
    /// does not depend on any parameter.
    pub fn node(&self, id: NodeId) -> Option<&DenseMatrix> {
        self.nodes.get(id.0).and_then(Option::as_ref)
    }

    /// Gradient of parameter `slot`, `None` when the loss does not reach it.
    pub fn param(&self, slot: usize) -> Option<&DenseMatrix> {
        self.params.get(&slot)
    }

    /// Reached parameter slots in increasing order.
    pub fn reached_params(&self) -> impl Iterator<Item = usize> + '_ {
        self.params.keys().copied()
    }
}
