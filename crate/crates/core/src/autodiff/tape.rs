use std::cell::RefCell;

use super::tensor::{matmul_into, Tensor};
use super::AutodiffError;

type Shape = (usize, usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Scale(usize, f64),
    AddScalar(usize),
    Relu(usize),
    Sqrt(usize),
    Square(usize),
    Acos(usize),
    Clamp(usize, f64, f64),
    Maximum(usize, usize),
    Sum(usize),
    Mean(usize),
    MeanRows(usize),
    SumCols(usize),
    ConcatRows(Vec<usize>),
    SelectRow(usize, usize),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records primitive operations in evaluation order for reverse-mode
/// differentiation. Nodes are only ever appended, so every operation's inputs
/// precede it.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

/// How the right operand of a binary op is broadcast over the left.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Broadcast {
    Same,
    Scalar,
    Row,
}

fn broadcast(op: &'static str, lhs: Shape, rhs: Shape) -> Result<Broadcast, AutodiffError> {
    if lhs == rhs {
        Ok(Broadcast::Same)
    } else if rhs == (1, 1) {
        Ok(Broadcast::Scalar)
    } else if rhs.0 == 1 && rhs.1 == lhs.1 {
        Ok(Broadcast::Row)
    } else {
        Err(AutodiffError::ShapeMismatch { op, lhs, rhs })
    }
}

#[inline]
fn rhs_index(b: Broadcast, cols: usize, i: usize) -> usize {
    match b {
        Broadcast::Same => i,
        Broadcast::Scalar => 0,
        Broadcast::Row => i % cols,
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor, op: Op, requires_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    /// A leaf that does not receive gradients.
    pub fn constant(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, false)
    }

    /// A leaf whose gradient is tracked.
    pub fn param(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, true)
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.constant(Tensor::scalar(value))
    }

    fn check<'t>(&'t self, v: Var<'t>) -> Result<usize, AutodiffError> {
        if std::ptr::eq(self, v.tape) {
            Ok(v.id)
        } else {
            Err(AutodiffError::ForeignVar)
        }
    }

    fn unary<'t>(&'t self, a: Var<'t>, f: impl Fn(f64) -> f64, op: Op) -> Var<'t> {
        let (value, rg) = {
            let nodes = self.nodes.borrow();
            let n = &nodes[a.id];
            (n.value.map(f), n.requires_grad)
        };
        self.push(value, op, rg)
    }

    fn binary<'t>(
        &'t self,
        name: &'static str,
        a: Var<'t>,
        b: Var<'t>,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var<'t>, AutodiffError> {
        self.check(b)?;
        let (value, rg) = {
            let nodes = self.nodes.borrow();
            let (x, y) = (&nodes[a.id], &nodes[b.id]);
            let bc = broadcast(name, x.value.shape(), y.value.shape())?;
            let cols = x.value.cols();
            let yd = y.value.data();
            let data = x
                .value
                .data()
                .iter()
                .enumerate()
                .map(|(i, &xv)| f(xv, yd[rhs_index(bc, cols, i)]))
                .collect();
            let (r, c) = x.value.shape();
            (Tensor::new(r, c, data)?, x.requires_grad || y.requires_grad)
        };
        Ok(self.push(value, op, rg))
    }

    /// Stacks row blocks with equal column counts.
    pub fn concat_rows<'t>(&'t self, parts: &[Var<'t>]) -> Result<Var<'t>, AutodiffError> {
        let ids = parts
            .iter()
            .map(|&v| self.check(v))
            .collect::<Result<Vec<_>, _>>()?;
        let (value, rg) = {
            let nodes = self.nodes.borrow();
            let cols = ids.first().map_or(0, |&i| nodes[i].value.cols());
            let mut data = Vec::new();
            let mut rows = 0;
            let mut rg = false;
            for &i in &ids {
                let v = &nodes[i].value;
                if v.cols() != cols {
                    return Err(AutodiffError::ShapeMismatch {
                        op: "concat_rows",
                        lhs: (rows, cols),
                        rhs: v.shape(),
                    });
                }
                rows += v.rows();
                data.extend_from_slice(v.data());
                rg |= nodes[i].requires_grad;
            }
            (Tensor::new(rows, cols, data)?, rg)
        };
        Ok(self.push(value, Op::ConcatRows(ids), rg))
    }

    /// Reverse sweep from a scalar output. Gradients accumulate additively
    /// over every use of a value.
    pub fn backward(&self, output: Var<'_>) -> Result<Gradients, AutodiffError> {
        let out = self.check(output)?;
        let nodes = self.nodes.borrow();
        let shape = nodes[out].value.shape();
        if shape != (1, 1) {
            return Err(AutodiffError::NonScalarOutput(shape));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; out + 1];
        grads[out] = Some(Tensor::scalar(1.0));

        for id in (0..=out).rev() {
            let Some(g) = grads[id].take() else {
                continue;
            };
            let node = &nodes[id];
            if node.requires_grad {
                backprop(&nodes, &mut grads, node, &g);
            }
            grads[id] = Some(g);
        }
        let shapes = nodes[..=out].iter().map(|n| n.value.shape()).collect();
        Ok(Gradients { grads, shapes })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], nodes: &[Node], id: usize, delta: Tensor) {
    if !nodes[id].requires_grad {
        return;
    }
    match &mut grads[id] {
        Some(g) => g.add_assign(&delta),
        slot @ None => *slot = Some(delta),
    }
}

/// Reduces a gradient of the left operand's shape to the right operand's shape.
fn reduce_to(g: &Tensor, bc: Broadcast, rhs_shape: Shape) -> Tensor {
    match bc {
        Broadcast::Same => g.clone(),
        Broadcast::Scalar => Tensor::scalar(g.data().iter().sum()),
        Broadcast::Row => {
            let mut out = Tensor::zeros(1, rhs_shape.1);
            let cols = rhs_shape.1;
            for (i, v) in g.data().iter().enumerate() {
                out.data_mut()[i % cols] += v;
            }
            out
        }
    }
}

fn elementwise(g: &Tensor, x: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let (r, c) = g.shape();
    let data = g
        .data()
        .iter()
        .zip(x.data())
        .map(|(&gv, &xv)| f(gv, xv))
        .collect();
    Tensor::new(r, c, data).expect("same shape")
}

fn backprop(nodes: &[Node], grads: &mut [Option<Tensor>], node: &Node, g: &Tensor) {
    let val = |i: usize| &nodes[i].value;
    match &node.op {
        Op::Leaf => {}
        Op::MatMul(a, b) => {
            if nodes[*a].requires_grad {
                let bt = val(*b).transpose();
                let mut ga = Tensor::zeros(val(*a).rows(), val(*a).cols());
                matmul_into(g, &bt, ga.data_mut());
                accumulate(grads, nodes, *a, ga);
            }
            if nodes[*b].requires_grad {
                let at = val(*a).transpose();
                let mut gb = Tensor::zeros(val(*b).rows(), val(*b).cols());
                matmul_into(&at, g, gb.data_mut());
                accumulate(grads, nodes, *b, gb);
            }
        }
        Op::Add(a, b) | Op::Sub(a, b) => {
            let sign = if matches!(node.op, Op::Sub(..)) { -1.0 } else { 1.0 };
            accumulate(grads, nodes, *a, g.clone());
            if nodes[*b].requires_grad {
                let bc = broadcast("", val(*a).shape(), val(*b).shape()).expect("checked");
                let mut gb = reduce_to(g, bc, val(*b).shape());
                if sign < 0.0 {
                    gb = gb.map(|v| -v);
                }
                accumulate(grads, nodes, *b, gb);
            }
        }
        Op::Mul(a, b) => {
            let (x, y) = (val(*a), val(*b));
            let bc = broadcast("", x.shape(), y.shape()).expect("checked");
            let cols = x.cols();
            if nodes[*a].requires_grad {
                let data = g
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(i, &gv)| gv * y.data()[rhs_index(bc, cols, i)])
                    .collect();
                accumulate(
                    grads,
                    nodes,
                    *a,
                    Tensor::new(x.rows(), cols, data).expect("shape"),
                );
            }
            if nodes[*b].requires_grad {
                let prod = elementwise(g, x, |gv, xv| gv * xv);
                accumulate(grads, nodes, *b, reduce_to(&prod, bc, y.shape()));
            }
        }
        Op::Div(a, b) => {
            let (x, y) = (val(*a), val(*b));
            let bc = broadcast("", x.shape(), y.shape()).expect("checked");
            let cols = x.cols();
            if nodes[*a].requires_grad {
                let data = g
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(i, &gv)| gv / y.data()[rhs_index(bc, cols, i)])
                    .collect();
                accumulate(
                    grads,
                    nodes,
                    *a,
                    Tensor::new(x.rows(), cols, data).expect("shape"),
                );
            }
            if nodes[*b].requires_grad {
                let data = g
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(i, &gv)| {
                        let yv = y.data()[rhs_index(bc, cols, i)];
                        -gv * x.data()[i] / (yv * yv)
                    })
                    .collect();
                let full = Tensor::new(x.rows(), cols, data).expect("shape");
                accumulate(grads, nodes, *b, reduce_to(&full, bc, y.shape()));
            }
        }
        Op::Neg(a) => accumulate(grads, nodes, *a, g.map(|v| -v)),
        Op::Scale(a, s) => accumulate(grads, nodes, *a, g.map(|v| v * s)),
        Op::AddScalar(a) => accumulate(grads, nodes, *a, g.clone()),
        Op::Relu(a) => {
            let ga = elementwise(g, val(*a), |gv, xv| if xv > 0.0 { gv } else { 0.0 });
            accumulate(grads, nodes, *a, ga);
        }
        Op::Sqrt(a) => {
            let ga = elementwise(g, &node.value, |gv, yv| gv / (2.0 * yv));
            accumulate(grads, nodes, *a, ga);
        }
        Op::Square(a) => {
            let ga = elementwise(g, val(*a), |gv, xv| 2.0 * xv * gv);
            accumulate(grads, nodes, *a, ga);
        }
        Op::Acos(a) => {
            let ga = elementwise(g, val(*a), |gv, xv| -gv / (1.0 - xv * xv).sqrt());
            accumulate(grads, nodes, *a, ga);
        }
        Op::Clamp(a, lo, hi) => {
            let ga = elementwise(g, val(*a), |gv, xv| if xv >= *lo && xv <= *hi { gv } else { 0.0 });
            accumulate(grads, nodes, *a, ga);
        }
        Op::Maximum(a, b) => {
            let (x, y) = (val(*a), val(*b));
            let mut ga = Tensor::zeros(x.rows(), x.cols());
            let mut gb = Tensor::zeros(y.rows(), y.cols());
            for i in 0..g.len() {
                if x.data()[i] >= y.data()[i] {
                    ga.data_mut()[i] = g.data()[i];
                } else {
                    gb.data_mut()[i] = g.data()[i];
                }
            }
            accumulate(grads, nodes, *a, ga);
            accumulate(grads, nodes, *b, gb);
        }
        Op::Sum(a) => {
            let (r, c) = val(*a).shape();
            accumulate(grads, nodes, *a, Tensor::filled(r, c, g.item()));
        }
        Op::Mean(a) => {
            let (r, c) = val(*a).shape();
            let n = (r * c) as f64;
            accumulate(grads, nodes, *a, Tensor::filled(r, c, g.item() / n));
        }
        Op::MeanRows(a) => {
            let (r, c) = val(*a).shape();
            let mut ga = Tensor::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    ga.set(i, j, g.data()[j] / r as f64);
                }
            }
            accumulate(grads, nodes, *a, ga);
        }
        Op::SumCols(a) => {
            let (r, c) = val(*a).shape();
            let mut ga = Tensor::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    ga.set(i, j, g.data()[i]);
                }
            }
            accumulate(grads, nodes, *a, ga);
        }
        Op::ConcatRows(parts) => {
            let mut offset = 0;
            for &p in parts {
                let (r, c) = val(p).shape();
                if nodes[p].requires_grad {
                    let block = g.data()[offset..offset + r * c].to_vec();
                    accumulate(grads, nodes, p, Tensor::new(r, c, block).expect("shape"));
                }
                offset += r * c;
            }
        }
        Op::SelectRow(a, row) => {
            let (r, c) = val(*a).shape();
            let mut ga = Tensor::zeros(r, c);
            ga.data_mut()[row * c..(row + 1) * c].copy_from_slice(g.data());
            accumulate(grads, nodes, *a, ga);
        }
    }
}

/// Result of [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Shape>,
}

impl Gradients {
    /// `∂output/∂var`; zeros when the output does not depend on `var`.
    pub fn wrt(&self, var: Var<'_>) -> Tensor {
        match self.grads.get(var.id) {
            Some(Some(g)) => g.clone(),
            _ => {
                let (r, c) = var.shape();
                Tensor::zeros(r, c)
            }
        }
    }

    /// Borrowing variant of [`Gradients::wrt`]; `None` when no gradient flowed.
    pub fn get(&self, var: Var<'_>) -> Option<&Tensor> {
        self.grads.get(var.id)?.as_ref()
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }
}

// Fallible shape-checked ops, so the std operator traits do not fit.
#[allow(clippy::should_implement_trait)]
impl<'t> Var<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn value(&self) -> Tensor {
        self.tape.nodes.borrow()[self.id].value.clone()
    }

    pub fn shape(&self) -> Shape {
        self.tape.nodes.borrow()[self.id].value.shape()
    }

    pub fn requires_grad(&self) -> bool {
        self.tape.nodes.borrow()[self.id].requires_grad
    }

    /// Value of a `1 × 1` variable.
    pub fn item(&self) -> f64 {
        self.tape.nodes.borrow()[self.id].value.data()[0]
    }

    pub fn matmul(self, rhs: Var<'t>) -> Result<Var<'t>, AutodiffError> {
        let tape = self.tape;
        tape.check(rhs)?;
        let (value, rg) = {
            let nodes = tape.nodes.borrow();
            let (a, b) = (&nodes[self.id], &nodes[rhs.id]);
            (a.value.matmul(&b.value)?, a.requires_grad || b.requires_grad)
        };
        Ok(tape.push(value, Op::MatMul(self.id, rhs.id), rg))
    }

    /// Elementwise sum; `rhs` may be `1 × 1` or a `1 × cols` row.
    pub fn add(self, rhs: Var<'t>) -> Result<Var<'t>, AutodiffError> {
        self.tape
            .binary("add", self, rhs, |a, b| a + b, Op::Add(self.id, rhs.id))
    }

    pub fn sub(self, rhs: Var<'t>) -> Result<Var<'t>, AutodiffError> {
        self.tape
            .binary("sub", self, rhs, |a, b| a - b, Op::Sub(self.id, rhs.id))
    }

    pub fn mul(self, rhs: Var<'t>) -> Result<Var<'t>, AutodiffError> {
        self.tape
            .binary("mul", self, rhs, |a, b| a * b, Op::Mul(self.id, rhs.id))
    }

    pub fn div(self, rhs: Var<'t>) -> Result<Var<'t>, AutodiffError> {
        self.tape
            .binary("div", self, rhs, |a, b| a / b, Op::Div(self.id, rhs.id))
    }

    /// Elementwise maximum of equally shaped operands; ties route the
    /// gradient to `self`.
    pub fn maximum(self, rhs: Var<'t>) -> Result<Var<'t>, AutodiffError> {
        if self.shape() != rhs.shape() {
            return Err(AutodiffError::ShapeMismatch {
                op: "maximum",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        self.tape
            .binary("maximum", self, rhs, f64::max, Op::Maximum(self.id, rhs.id))
    }

    pub fn neg(self) -> Var<'t> {
        self.tape.unary(self, |v| -v, Op::Neg(self.id))
    }

    pub fn scale(self, s: f64) -> Var<'t> {
        self.tape.unary(self, |v| v * s, Op::Scale(self.id, s))
    }

    pub fn add_scalar(self, s: f64) -> Var<'t> {
        self.tape.unary(self, |v| v + s, Op::AddScalar(self.id))
    }

    /// `max(v, 0)`; the gradient at 0 is 0.
    pub fn relu(self) -> Var<'t> {
        self.tape.unary(self, |v| v.max(0.0), Op::Relu(self.id))
    }

    pub fn sqrt(self) -> Var<'t> {
        self.tape.unary(self, f64::sqrt, Op::Sqrt(self.id))
    }

    pub fn square(self) -> Var<'t> {
        self.tape.unary(self, |v| v * v, Op::Square(self.id))
    }

    pub fn acos(self) -> Var<'t> {
        self.tape.unary(self, f64::acos, Op::Acos(self.id))
    }

    /// Clamps into `[lo, hi]`; no gradient flows through clamped entries.
    pub fn clamp(self, lo: f64, hi: f64) -> Var<'t> {
        self.tape
            .unary(self, |v| v.clamp(lo, hi), Op::Clamp(self.id, lo, hi))
    }

    pub fn clamp_min(self, lo: f64) -> Var<'t> {
        self.clamp(lo, f64::INFINITY)
    }

    /// Sum of all entries, `1 × 1`.
    pub fn sum(self) -> Var<'t> {
        let v = self.value();
        let s: f64 = v.data().iter().sum();
        self.tape
            .push(Tensor::scalar(s), Op::Sum(self.id), self.requires_grad())
    }

    /// Mean of all entries, `1 × 1`.
    pub fn mean(self) -> Var<'t> {
        let v = self.value();
        let s: f64 = v.data().iter().sum::<f64>() / v.len() as f64;
        self.tape
            .push(Tensor::scalar(s), Op::Mean(self.id), self.requires_grad())
    }

    /// Column means over the rows: `r × c → 1 × c`.
    pub fn mean_rows(self) -> Var<'t> {
        let v = self.value();
        let (r, c) = v.shape();
        let mut out = Tensor::zeros(1, c);
        for i in 0..r {
            for j in 0..c {
                out.data_mut()[j] += v.get(i, j);
            }
        }
        let out = out.map(|s| s / r as f64);
        self.tape.push(out, Op::MeanRows(self.id), self.requires_grad())
    }

    /// Row sums: `r × c → r × 1`.
    pub fn sum_cols(self) -> Var<'t> {
        let v = self.value();
        let (r, _) = v.shape();
        let data = (0..r).map(|i| v.row_slice(i).iter().sum()).collect();
        let out = Tensor::new(r, 1, data).expect("shape");
        self.tape.push(out, Op::SumCols(self.id), self.requires_grad())
    }

    /// Per-column variance over rows (population form): `r × c → 1 × c`.
    pub fn variance_rows(self) -> Result<Var<'t>, AutodiffError> {
        let centered = self.sub(self.mean_rows())?;
        Ok(centered.square().mean_rows())
    }

    /// Population variance of all entries, `1 × 1`.
    pub fn variance(self) -> Result<Var<'t>, AutodiffError> {
        let centered = self.sub(self.mean())?;
        Ok(centered.square().mean())
    }

    pub fn select_row(self, row: usize) -> Result<Var<'t>, AutodiffError> {
        let v = self.value();
        if row >= v.rows() {
            return Err(AutodiffError::ShapeMismatch {
                op: "select_row",
                lhs: v.shape(),
                rhs: (row, 0),
            });
        }
        let out = Tensor::row(v.row_slice(row));
        Ok(self
            .tape
            .push(out, Op::SelectRow(self.id, row), self.requires_grad()))
    }
}
