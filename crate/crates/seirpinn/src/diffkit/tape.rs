//! Reverse-mode differentiation over a recorded program of dual-valued
//! primitives.
//!
//! The tape is built once and replayed many times: node topology is fixed,
//! only parameter and input values change between runs. Adjoints are
//! accumulated in reverse creation order (reverse topological), so repeated
//! evaluations are bit-identical. Every adjoint is itself a `(value, deriv)`
//! pair — backpropagating through the deriv channel is what yields exact
//! mixed derivatives of expressions such as the network's time derivative
//! with respect to the weights.

use thiserror::Error;

use super::dual::Dual;

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("tape construction: {0}")]
    Shape(String),
    #[error("numeric failure in forward pass: {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Node {
    /// Runtime-provided dual values; slot indexes the caller's input list.
    Input { slot: usize },
    Const { vals: Vec<f64> },
    /// One scalar parameter lifted to a dual with zero time derivative.
    Param { index: usize },
    /// `y = W x + b` with `W` row-major at `w`, bias at `b`.
    Affine { x: NodeId, w: usize, b: usize, rows: usize, cols: usize },
    Tanh { x: NodeId },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Div { a: NodeId, b: NodeId },
    Square { x: NodeId },
    Scale { c: f64, x: NodeId },
    Offset { c: f64, x: NodeId },
    /// Extract one component's value channel as a scalar.
    ValueAt { x: NodeId, idx: usize },
    /// Extract one component's deriv channel as a scalar.
    DerivAt { x: NodeId, idx: usize },
    /// Scalar sum of scalar nodes, in the listed order.
    SumVec { xs: Vec<NodeId> },
}

pub struct TapeBuilder {
    nodes: Vec<Node>,
    lens: Vec<usize>,
    n_params: usize,
    n_inputs: usize,
    input_lens: Vec<usize>,
}

impl TapeBuilder {
    pub fn new(n_params: usize) -> Self {
        Self { nodes: Vec::new(), lens: Vec::new(), n_params, n_inputs: 0, input_lens: Vec::new() }
    }

    fn push(&mut self, node: Node, len: usize) -> NodeId {
        self.nodes.push(node);
        self.lens.push(len);
        NodeId(self.nodes.len() - 1)
    }

    fn len_of(&self, id: NodeId) -> usize {
        self.lens[id.0]
    }

    fn check_scalar(&self, id: NodeId, what: &str) -> Result<(), DiffError> {
        if self.len_of(id) != 1 {
            return Err(DiffError::Shape(format!("{what} expects a scalar node")));
        }
        Ok(())
    }

    /// Declare an input slot; values are supplied at run time in declaration
    /// order.
    pub fn input(&mut self, len: usize) -> NodeId {
        let slot = self.n_inputs;
        self.n_inputs += 1;
        self.input_lens.push(len);
        self.push(Node::Input { slot }, len)
    }

    pub fn constant(&mut self, vals: Vec<f64>) -> NodeId {
        let len = vals.len();
        self.push(Node::Const { vals }, len)
    }

    pub fn scalar_const(&mut self, v: f64) -> NodeId {
        self.constant(vec![v])
    }

    pub fn param(&mut self, index: usize) -> Result<NodeId, DiffError> {
        if index >= self.n_params {
            return Err(DiffError::Shape(format!(
                "parameter index {index} out of range ({} params)",
                self.n_params
            )));
        }
        Ok(self.push(Node::Param { index }, 1))
    }

    pub fn affine(
        &mut self,
        x: NodeId,
        w: usize,
        b: usize,
        rows: usize,
        cols: usize,
    ) -> Result<NodeId, DiffError> {
        if self.len_of(x) != cols {
            return Err(DiffError::Shape(format!(
                "affine input has len {}, expected {cols}",
                self.len_of(x)
            )));
        }
        if w + rows * cols > self.n_params || b + rows > self.n_params {
            return Err(DiffError::Shape("affine weights out of parameter range".into()));
        }
        Ok(self.push(Node::Affine { x, w, b, rows, cols }, rows))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let len = self.len_of(x);
        self.push(Node::Tanh { x }, len)
    }

    fn binary(&mut self, a: NodeId, b: NodeId, make: fn(NodeId, NodeId) -> Node) -> Result<NodeId, DiffError> {
        if self.len_of(a) != self.len_of(b) {
            return Err(DiffError::Shape("elementwise operands differ in length".into()));
        }
        let len = self.len_of(a);
        Ok(self.push(make(a, b), len))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, DiffError> {
        self.binary(a, b, |a, b| Node::Add { a, b })
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, DiffError> {
        self.binary(a, b, |a, b| Node::Sub { a, b })
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, DiffError> {
        self.binary(a, b, |a, b| Node::Mul { a, b })
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, DiffError> {
        self.binary(a, b, |a, b| Node::Div { a, b })
    }

    pub fn square(&mut self, x: NodeId) -> NodeId {
        let len = self.len_of(x);
        self.push(Node::Square { x }, len)
    }

    pub fn scale(&mut self, c: f64, x: NodeId) -> NodeId {
        let len = self.len_of(x);
        self.push(Node::Scale { c, x }, len)
    }

    pub fn offset(&mut self, c: f64, x: NodeId) -> NodeId {
        let len = self.len_of(x);
        self.push(Node::Offset { c, x }, len)
    }

    pub fn value_at(&mut self, x: NodeId, idx: usize) -> Result<NodeId, DiffError> {
        if idx >= self.len_of(x) {
            return Err(DiffError::Shape("component index out of range".into()));
        }
        Ok(self.push(Node::ValueAt { x, idx }, 1))
    }

    pub fn deriv_at(&mut self, x: NodeId, idx: usize) -> Result<NodeId, DiffError> {
        if idx >= self.len_of(x) {
            return Err(DiffError::Shape("component index out of range".into()));
        }
        Ok(self.push(Node::DerivAt { x, idx }, 1))
    }

    pub fn sum(&mut self, xs: Vec<NodeId>) -> Result<NodeId, DiffError> {
        if xs.is_empty() {
            return Err(DiffError::Shape("sum of no terms".into()));
        }
        for &x in &xs {
            self.check_scalar(x, "sum")?;
        }
        Ok(self.push(Node::SumVec { xs }, 1))
    }

    /// Seal the tape; `output` must be scalar.
    pub fn finish(self, output: NodeId) -> Result<Tape, DiffError> {
        self.check_scalar(output, "output")?;
        let mut offsets = Vec::with_capacity(self.nodes.len());
        let mut arena = 0usize;
        for &len in &self.lens {
            offsets.push(arena);
            arena += len;
        }
        Ok(Tape {
            nodes: self.nodes,
            lens: self.lens,
            offsets,
            arena_len: arena,
            n_params: self.n_params,
            input_lens: self.input_lens,
            output,
        })
    }
}

/// A sealed, replayable program.
pub struct Tape {
    nodes: Vec<Node>,
    lens: Vec<usize>,
    offsets: Vec<usize>,
    arena_len: usize,
    n_params: usize,
    input_lens: Vec<usize>,
    output: NodeId,
}

/// Reusable forward/adjoint storage for one tape.
pub struct TapeWorkspace {
    values: Vec<Dual>,
    adjoints: Vec<Dual>,
}

impl Tape {
    pub fn workspace(&self) -> TapeWorkspace {
        TapeWorkspace {
            values: vec![Dual::default(); self.arena_len],
            adjoints: vec![Dual::default(); self.arena_len],
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    fn check_run_args(&self, params: &[f64], inputs: &[&[Dual]]) -> Result<(), DiffError> {
        if params.len() != self.n_params {
            return Err(DiffError::Shape(format!(
                "expected {} params, got {}",
                self.n_params,
                params.len()
            )));
        }
        if inputs.len() != self.input_lens.len() {
            return Err(DiffError::Shape(format!(
                "expected {} input slots, got {}",
                self.input_lens.len(),
                inputs.len()
            )));
        }
        for (slot, (&want, got)) in self.input_lens.iter().zip(inputs).enumerate() {
            if got.len() != want {
                return Err(DiffError::Shape(format!(
                    "input slot {slot} has len {}, expected {want}",
                    got.len()
                )));
            }
        }
        Ok(())
    }

    /// Replay the program; returns the scalar output value.
    pub fn forward(
        &self,
        ws: &mut TapeWorkspace,
        params: &[f64],
        inputs: &[&[Dual]],
    ) -> Result<f64, DiffError> {
        self.check_run_args(params, inputs)?;
        for (i, node) in self.nodes.iter().enumerate() {
            let off = self.offsets[i];
            let len = self.lens[i];
            match node {
                Node::Input { slot } => {
                    ws.values[off..off + len].copy_from_slice(inputs[*slot]);
                }
                Node::Const { vals } => {
                    for (dst, &v) in ws.values[off..off + len].iter_mut().zip(vals) {
                        *dst = Dual::constant(v);
                    }
                }
                Node::Param { index } => {
                    ws.values[off] = Dual::constant(params[*index]);
                }
                Node::Affine { x, w, b, rows, cols } => {
                    let xo = self.offsets[x.0];
                    let (head, tail) = ws.values.split_at_mut(off);
                    let xs = &head[xo..xo + cols];
                    let out = &mut tail[..*rows];
                    for j in 0..*rows {
                        let wrow = &params[w + j * cols..w + j * cols + cols];
                        let mut v = params[b + j];
                        let mut d = 0.0;
                        for (wk, xk) in wrow.iter().zip(xs) {
                            v += wk * xk.value;
                            d += wk * xk.deriv;
                        }
                        out[j] = Dual { value: v, deriv: d };
                    }
                }
                Node::Tanh { x } => {
                    let xo = self.offsets[x.0];
                    let (head, tail) = ws.values.split_at_mut(off);
                    for (dst, xk) in tail[..len].iter_mut().zip(&head[xo..xo + len]) {
                        *dst = xk.tanh();
                    }
                }
                Node::Add { a, b } => self.ew(ws, i, *a, *b, |u, v| u + v),
                Node::Sub { a, b } => self.ew(ws, i, *a, *b, |u, v| u - v),
                Node::Mul { a, b } => self.ew(ws, i, *a, *b, |u, v| u * v),
                Node::Div { a, b } => self.ew(ws, i, *a, *b, |u, v| u / v),
                Node::Square { x } => {
                    let xo = self.offsets[x.0];
                    let (head, tail) = ws.values.split_at_mut(off);
                    for (dst, xk) in tail[..len].iter_mut().zip(&head[xo..xo + len]) {
                        *dst = xk.square();
                    }
                }
                Node::Scale { c, x } => {
                    let xo = self.offsets[x.0];
                    let (head, tail) = ws.values.split_at_mut(off);
                    for (dst, xk) in tail[..len].iter_mut().zip(&head[xo..xo + len]) {
                        *dst = xk.scale(*c);
                    }
                }
                Node::Offset { c, x } => {
                    let xo = self.offsets[x.0];
                    let (head, tail) = ws.values.split_at_mut(off);
                    for (dst, xk) in tail[..len].iter_mut().zip(&head[xo..xo + len]) {
                        *dst = *xk + *c;
                    }
                }
                Node::ValueAt { x, idx } => {
                    let v = ws.values[self.offsets[x.0] + idx].value;
                    ws.values[off] = Dual::constant(v);
                }
                Node::DerivAt { x, idx } => {
                    let d = ws.values[self.offsets[x.0] + idx].deriv;
                    ws.values[off] = Dual::constant(d);
                }
                Node::SumVec { xs } => {
                    let mut acc = Dual::default();
                    for x in xs {
                        acc = acc + ws.values[self.offsets[x.0]];
                    }
                    ws.values[off] = acc;
                }
            }
        }
        Ok(ws.values[self.offsets[self.output.0]].value)
    }

    fn ew(&self, ws: &mut TapeWorkspace, i: usize, a: NodeId, b: NodeId, f: fn(Dual, Dual) -> Dual) {
        let off = self.offsets[i];
        let len = self.lens[i];
        let ao = self.offsets[a.0];
        let bo = self.offsets[b.0];
        let (head, tail) = ws.values.split_at_mut(off);
        for k in 0..len {
            tail[k] = f(head[ao + k], head[bo + k]);
        }
    }

    /// Accumulate `seed * d(output)/d(params)` into `grad`, reusing the
    /// forward values already in the workspace.
    pub fn backward(&self, ws: &mut TapeWorkspace, params: &[f64], seed: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.n_params);
        ws.adjoints[..self.arena_len].fill(Dual::default());
        ws.adjoints[self.offsets[self.output.0]] = Dual::variable(seed, 0.0);

        for i in (0..self.nodes.len()).rev() {
            let off = self.offsets[i];
            let len = self.lens[i];
            match &self.nodes[i] {
                Node::Input { .. } | Node::Const { .. } => {}
                Node::Param { index } => {
                    grad[*index] += ws.adjoints[off].value;
                }
                Node::Affine { x, w, b, rows, cols } => {
                    let xo = self.offsets[x.0];
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    let adj_out = &atail[..*rows];
                    let adj_x = &mut ahead[xo..xo + cols];
                    let x_vals = &ws.values[xo..xo + cols];
                    for j in 0..*rows {
                        let aj = adj_out[j];
                        grad[b + j] += aj.value;
                        let wrow = &params[w + j * cols..w + j * cols + cols];
                        let grow = &mut grad[w + j * cols..w + j * cols + cols];
                        for k in 0..*cols {
                            let xk = x_vals[k];
                            grow[k] += aj.value * xk.value + aj.deriv * xk.deriv;
                            adj_x[k].value += aj.value * wrow[k];
                            adj_x[k].deriv += aj.deriv * wrow[k];
                        }
                    }
                }
                Node::Tanh { x } => {
                    let xo = self.offsets[x.0];
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        let a = atail[k];
                        let y = ws.values[off + k].value;
                        let xd = ws.values[xo + k].deriv;
                        let sech2 = 1.0 - y * y;
                        ahead[xo + k].value += a.value * sech2 - a.deriv * 2.0 * y * sech2 * xd;
                        ahead[xo + k].deriv += a.deriv * sech2;
                    }
                }
                Node::Add { a, b } => {
                    let (ao, bo) = (self.offsets[a.0], self.offsets[b.0]);
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        let adj = atail[k];
                        ahead[ao + k] = ahead[ao + k] + adj;
                        ahead[bo + k] = ahead[bo + k] + adj;
                    }
                }
                Node::Sub { a, b } => {
                    let (ao, bo) = (self.offsets[a.0], self.offsets[b.0]);
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        let adj = atail[k];
                        ahead[ao + k] = ahead[ao + k] + adj;
                        ahead[bo + k] = ahead[bo + k] - adj;
                    }
                }
                Node::Mul { a, b } => {
                    let (ao, bo) = (self.offsets[a.0], self.offsets[b.0]);
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        let adj = atail[k];
                        let av = ws.values[ao + k];
                        let bv = ws.values[bo + k];
                        ahead[ao + k].value += adj.value * bv.value + adj.deriv * bv.deriv;
                        ahead[ao + k].deriv += adj.deriv * bv.value;
                        ahead[bo + k].value += adj.value * av.value + adj.deriv * av.deriv;
                        ahead[bo + k].deriv += adj.deriv * av.value;
                    }
                }
                Node::Div { a, b } => {
                    let (ao, bo) = (self.offsets[a.0], self.offsets[b.0]);
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        let adj = atail[k];
                        let av = ws.values[ao + k];
                        let bv = ws.values[bo + k];
                        let y = ws.values[off + k];
                        let inv = 1.0 / bv.value;
                        ahead[ao + k].value += adj.value * inv - adj.deriv * bv.deriv * inv * inv;
                        ahead[ao + k].deriv += adj.deriv * inv;
                        ahead[bo + k].value += -adj.value * av.value * inv * inv
                            + adj.deriv * (av.deriv * inv * inv - 2.0 * y.deriv * inv);
                        ahead[bo + k].deriv += -adj.deriv * av.value * inv * inv;
                    }
                }
                Node::Square { x } => {
                    let xo = self.offsets[x.0];
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        let adj = atail[k];
                        let xv = ws.values[xo + k];
                        ahead[xo + k].value += 2.0 * (adj.value * xv.value + adj.deriv * xv.deriv);
                        ahead[xo + k].deriv += 2.0 * adj.deriv * xv.value;
                    }
                }
                Node::Scale { c, x } => {
                    let xo = self.offsets[x.0];
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        ahead[xo + k] = ahead[xo + k] + atail[k].scale(*c);
                    }
                }
                Node::Offset { x, .. } => {
                    let xo = self.offsets[x.0];
                    let (ahead, atail) = ws.adjoints.split_at_mut(off);
                    for k in 0..len {
                        ahead[xo + k] = ahead[xo + k] + atail[k];
                    }
                }
                Node::ValueAt { x, idx } => {
                    let adj = ws.adjoints[off];
                    ws.adjoints[self.offsets[x.0] + idx].value += adj.value;
                }
                Node::DerivAt { x, idx } => {
                    let adj = ws.adjoints[off];
                    ws.adjoints[self.offsets[x.0] + idx].deriv += adj.value;
                }
                Node::SumVec { xs } => {
                    let adj = ws.adjoints[off];
                    for x in xs {
                        let xo = self.offsets[x.0];
                        ws.adjoints[xo] = ws.adjoints[xo] + adj;
                    }
                }
            }
        }
    }

    /// Forward pass, finiteness check, then one backward pass with unit
    /// seed. Gradient contributions are added onto `grad`.
    pub fn accumulate_gradient(
        &self,
        ws: &mut TapeWorkspace,
        params: &[f64],
        inputs: &[&[Dual]],
        seed: f64,
        grad: &mut [f64],
    ) -> Result<f64, DiffError> {
        let out = self.forward(ws, params, inputs)?;
        for (i, v) in ws.values[..self.arena_len].iter().enumerate() {
            if !v.is_finite() {
                return Err(DiffError::NonFinite(format!(
                    "non-finite intermediate in arena slot {i} (output {out})"
                )));
            }
        }
        self.backward(ws, params, seed, grad);
        Ok(out)
    }
}

/// Evaluate a loss tape and return `(loss, d loss / d params)`.
pub fn gradient(tape: &Tape, params: &[f64], inputs: &[&[Dual]]) -> Result<(f64, Vec<f64>), DiffError> {
    let mut ws = tape.workspace();
    let mut grad = vec![0.0; tape.n_params()];
    let loss = tape.accumulate_gradient(&mut ws, params, inputs, 1.0, &mut grad)?;
    Ok((loss, grad))
}
