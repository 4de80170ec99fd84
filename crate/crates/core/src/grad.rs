//! Reverse-mode differentiation over exactly the primitive set the scoring
//! pipeline uses.
//!
//! The tape records vector-valued nodes eagerly (scalars are length-1
//! vectors); node values live in one flat arena and the backward pass uses a
//! parallel adjoint arena, so recording and differentiating a score costs no
//! per-node allocation. Clamped nonlinearities treat the clamped region as
//! constant: the partial is zero wherever the clamp is active. Composite
//! operations (Mobius addition, exp/log maps, the Bergman distance) are
//! recorded as compositions of these primitives rather than hand-derived
//! Jacobians.

use crate::error::{Error, Result};
use crate::geometry::{ARCOSH_EPS, BALL_EPS, ORIGIN_EPS};
use crate::numeric::{sigmoid, softmax, softplus};
use crate::spectral::{dft_forward, RealSignal};
use crate::transforms::{givens_reflect_raw, givens_rotate_raw};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Identifies a slice of a trainable tensor. `tensor` indexes the gradient
/// buffer array handed to [`Tape::backward`]; the engine attaches no meaning
/// to it beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSlot {
    pub tensor: usize,
    pub offset: usize,
}

enum Op {
    Const,
    Param(ParamSlot),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Elementwise product; either side may be a scalar broadcast.
    Mul(NodeId, NodeId),
    /// Elementwise quotient; either side may be a scalar broadcast.
    Div(NodeId, NodeId),
    ScaleConst(NodeId, f64),
    AddConst(NodeId),
    Dot(NodeId, NodeId),
    Norm(NodeId),
    Sqrt(NodeId),
    Tanh(NodeId),
    Artanh(NodeId),
    Arcosh(NodeId),
    Softplus(NodeId),
    Softmax(NodeId),
    LogSumExp(NodeId),
    Sum(NodeId),
    Stack(Vec<NodeId>),
    Index(NodeId, usize),
    GivensRot { x: NodeId, angles: NodeId },
    GivensRef { x: NodeId, angles: NodeId },
    /// Packed orthonormal DFT of a real vector: length `N` in, interleaved
    /// re/im of the first `N/2 + 1` bins out. The endpoint imaginary parts
    /// are forced to zero and receive no gradient.
    DftPacked(NodeId),
    /// Imaginary part of `sum z_i conj(w_i)` over interleaved complex vectors.
    HermDotIm(NodeId, NodeId),
    /// Norm clamp; identity while inactive, constant while active.
    ClampNorm { x: NodeId, active: bool },
}

#[derive(Clone, Copy)]
struct Span {
    start: usize,
    len: usize,
}

struct Node {
    op: Op,
    span: Span,
}

/// Append-only record of primitive applications in topological order.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    values: Vec<f64>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops all nodes but keeps the allocation for reuse.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.values.clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        let s = self.nodes[id.0].span;
        &self.values[s.start..s.start + s.len]
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id.0].span.len, 1);
        self.values[self.nodes[id.0].span.start]
    }

    fn span(&self, id: NodeId) -> Span {
        self.nodes[id.0].span
    }

    fn push_values(&mut self, op: Op, values: &[f64]) -> NodeId {
        let start = self.values.len();
        self.values.extend_from_slice(values);
        self.nodes.push(Node {
            op,
            span: Span {
                start,
                len: values.len(),
            },
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Reserves an output span of `len` and returns its start index; the
    /// caller fills it through `values`.
    fn push_reserved(&mut self, op: Op, len: usize) -> (NodeId, usize) {
        let start = self.values.len();
        self.values.resize(start + len, 0.0);
        self.nodes.push(Node {
            op,
            span: Span { start, len },
        });
        (NodeId(self.nodes.len() - 1), start)
    }

    pub fn constant(&mut self, value: Vec<f64>) -> NodeId {
        self.push_values(Op::Const, &value)
    }

    pub fn constant_scalar(&mut self, value: f64) -> NodeId {
        self.push_values(Op::Const, &[value])
    }

    /// Leaf for a parameter slice; gradients accumulate into
    /// `grads[slot.tensor]` starting at `slot.offset`.
    pub fn param(&mut self, slot: ParamSlot, values: &[f64]) -> NodeId {
        self.push_values(Op::Param(slot), values)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.span(a), self.span(b));
        assert_eq!(sa.len, sb.len, "add: operand length mismatch");
        let (_, out) = self.push_reserved(Op::Add(a, b), sa.len);
        for k in 0..sa.len {
            self.values[out + k] = self.values[sa.start + k] + self.values[sb.start + k];
        }
        NodeId(self.nodes.len() - 1)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.span(a), self.span(b));
        assert_eq!(sa.len, sb.len, "sub: operand length mismatch");
        let (_, out) = self.push_reserved(Op::Sub(a, b), sa.len);
        for k in 0..sa.len {
            self.values[out + k] = self.values[sa.start + k] - self.values[sb.start + k];
        }
        NodeId(self.nodes.len() - 1)
    }

    fn broadcast_out_len(sa: Span, sb: Span, what: &str) -> usize {
        match (sa.len, sb.len) {
            (x, y) if x == y => x,
            (_, 1) => sa.len,
            (1, _) => sb.len,
            (x, y) => panic!("{what}: broadcast mismatch {x} vs {y}"),
        }
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.span(a), self.span(b));
        let n = Self::broadcast_out_len(sa, sb, "mul");
        let (_, out) = self.push_reserved(Op::Mul(a, b), n);
        for k in 0..n {
            let x = self.values[sa.start + if sa.len == 1 { 0 } else { k }];
            let y = self.values[sb.start + if sb.len == 1 { 0 } else { k }];
            self.values[out + k] = x * y;
        }
        NodeId(self.nodes.len() - 1)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.span(a), self.span(b));
        let n = Self::broadcast_out_len(sa, sb, "div");
        let (_, out) = self.push_reserved(Op::Div(a, b), n);
        for k in 0..n {
            let x = self.values[sa.start + if sa.len == 1 { 0 } else { k }];
            let y = self.values[sb.start + if sb.len == 1 { 0 } else { k }];
            self.values[out + k] = x / y;
        }
        NodeId(self.nodes.len() - 1)
    }

    pub fn scale_const(&mut self, a: NodeId, k: f64) -> NodeId {
        let sa = self.span(a);
        let (_, out) = self.push_reserved(Op::ScaleConst(a, k), sa.len);
        for i in 0..sa.len {
            self.values[out + i] = k * self.values[sa.start + i];
        }
        NodeId(self.nodes.len() - 1)
    }

    pub fn add_const(&mut self, a: NodeId, k: f64) -> NodeId {
        let sa = self.span(a);
        let (_, out) = self.push_reserved(Op::AddConst(a), sa.len);
        for i in 0..sa.len {
            self.values[out + i] = k + self.values[sa.start + i];
        }
        NodeId(self.nodes.len() - 1)
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.span(a), self.span(b));
        assert_eq!(sa.len, sb.len, "dot: operand length mismatch");
        let mut s = 0.0;
        for k in 0..sa.len {
            s += self.values[sa.start + k] * self.values[sb.start + k];
        }
        self.push_values(Op::Dot(a, b), &[s])
    }

    pub fn norm(&mut self, a: NodeId) -> NodeId {
        let sa = self.span(a);
        let s = self.values[sa.start..sa.start + sa.len]
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        self.push_values(Op::Norm(a), &[s])
    }

    fn map_unary(&mut self, op: Op, a: NodeId, f: impl Fn(f64) -> f64) -> NodeId {
        let sa = self.span(a);
        let (_, out) = self.push_reserved(op, sa.len);
        for i in 0..sa.len {
            self.values[out + i] = f(self.values[sa.start + i]);
        }
        NodeId(self.nodes.len() - 1)
    }

    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        self.map_unary(Op::Sqrt(a), a, f64::sqrt)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map_unary(Op::Tanh(a), a, f64::tanh)
    }

    pub fn artanh(&mut self, a: NodeId) -> NodeId {
        self.map_unary(Op::Artanh(a), a, crate::geometry::artanh)
    }

    pub fn arcosh(&mut self, a: NodeId) -> NodeId {
        self.map_unary(Op::Arcosh(a), a, crate::geometry::arcosh)
    }

    pub fn softplus(&mut self, a: NodeId) -> NodeId {
        self.map_unary(Op::Softplus(a), a, softplus)
    }

    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let v = softmax(self.value(a));
        self.push_values(Op::Softmax(a), &v)
    }

    pub fn logsumexp(&mut self, a: NodeId) -> NodeId {
        let v = crate::numeric::logsumexp(self.value(a));
        self.push_values(Op::LogSumExp(a), &[v])
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.value(a).iter().sum();
        self.push_values(Op::Sum(a), &[s])
    }

    pub fn stack(&mut self, parts: Vec<NodeId>) -> NodeId {
        let n: usize = parts.iter().map(|p| self.span(*p).len).sum();
        let start = self.values.len();
        for p in &parts {
            let sp = self.span(*p);
            for k in 0..sp.len {
                let v = self.values[sp.start + k];
                self.values.push(v);
            }
        }
        self.nodes.push(Node {
            op: Op::Stack(parts),
            span: Span { start, len: n },
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn index(&mut self, a: NodeId, k: usize) -> NodeId {
        let v = self.value(a)[k];
        self.push_values(Op::Index(a, k), &[v])
    }

    pub fn givens_rotate(&mut self, x: NodeId, angles: NodeId) -> NodeId {
        let (sx, sa) = (self.span(x), self.span(angles));
        assert_eq!(sx.len, 2 * sa.len, "givens_rotate: block count mismatch");
        let v = givens_rotate_raw(
            &self.values[sx.start..sx.start + sx.len],
            &self.values[sa.start..sa.start + sa.len],
        );
        self.push_values(Op::GivensRot { x, angles }, &v)
    }

    pub fn givens_reflect(&mut self, x: NodeId, angles: NodeId) -> NodeId {
        let (sx, sa) = (self.span(x), self.span(angles));
        assert_eq!(sx.len, 2 * sa.len, "givens_reflect: block count mismatch");
        let v = givens_reflect_raw(
            &self.values[sx.start..sx.start + sx.len],
            &self.values[sa.start..sa.start + sa.len],
        );
        self.push_values(Op::GivensRef { x, angles }, &v)
    }

    /// Forward value comes from the spectral module, so the taped path and the
    /// plain evaluation path share one transform implementation.
    pub fn dft_packed(&mut self, x: NodeId) -> NodeId {
        let sig = RealSignal::new(self.value(x).to_vec())
            .expect("dft_packed: input length must be even and positive");
        let spec = dft_forward(&sig);
        let mut v = Vec::with_capacity(2 * spec.len());
        for z in spec.values() {
            v.push(z.re);
            v.push(z.im);
        }
        self.push_values(Op::DftPacked(x), &v)
    }

    pub fn herm_dot_im(&mut self, z: NodeId, w: NodeId) -> NodeId {
        let (sz, sw) = (self.span(z), self.span(w));
        assert_eq!(sz.len, sw.len, "herm_dot_im: length mismatch");
        assert_eq!(sz.len % 2, 0, "herm_dot_im: interleaved length must be even");
        let mut s = 0.0;
        for i in (0..sz.len).step_by(2) {
            // Im(z * conj(w)) = zi*wr - zr*wi
            s += self.values[sz.start + i + 1] * self.values[sw.start + i]
                - self.values[sz.start + i] * self.values[sw.start + i + 1];
        }
        self.push_values(Op::HermDotIm(z, w), &[s])
    }

    /// Rescales to `max_norm` when the input norm exceeds it. The active
    /// branch is treated as locally constant (zero partial), matching the
    /// clamp convention of the scalar nonlinearities.
    pub fn clamp_norm(&mut self, x: NodeId, max_norm: f64) -> NodeId {
        let sx = self.span(x);
        let n = self.values[sx.start..sx.start + sx.len]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let active = n > max_norm;
        let scale = if active { max_norm / n } else { 1.0 };
        let (_, out) = self.push_reserved(Op::ClampNorm { x, active }, sx.len);
        for k in 0..sx.len {
            self.values[out + k] = scale * self.values[sx.start + k];
        }
        NodeId(self.nodes.len() - 1)
    }

    /// Reverse sweep from a scalar loss node. Leaf gradients are accumulated
    /// into `grads[slot.tensor][slot.offset..]`; the sweep visits every node
    /// exactly once in reverse topological order.
    pub fn backward(&self, loss: NodeId, grads: &mut [Vec<f64>]) -> Result<()> {
        let loss_span = self.span(loss);
        if loss_span.len != 1 {
            return Err(Error::Gradient(format!(
                "backward seed must be scalar, got length {}",
                loss_span.len
            )));
        }
        // Adjoints live in an arena parallel to the value arena.
        let mut adj = vec![0.0; self.values.len()];
        adj[loss_span.start] = 1.0;
        let mut g: Vec<f64> = Vec::new();

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            let s = node.span;
            g.clear();
            g.extend_from_slice(&adj[s.start..s.start + s.len]);
            if g.iter().all(|&x| x == 0.0) {
                continue;
            }
            let out = s.start;
            match &node.op {
                Op::Const => {}
                Op::Param(slot) => {
                    let buf = &mut grads[slot.tensor];
                    for (k, gk) in g.iter().enumerate() {
                        buf[slot.offset + k] += gk;
                    }
                }
                Op::Add(a, b) => {
                    let (sa, sb) = (self.span(*a), self.span(*b));
                    for (k, gk) in g.iter().enumerate() {
                        adj[sa.start + k] += gk;
                        adj[sb.start + k] += gk;
                    }
                }
                Op::Sub(a, b) => {
                    let (sa, sb) = (self.span(*a), self.span(*b));
                    for (k, gk) in g.iter().enumerate() {
                        adj[sa.start + k] += gk;
                        adj[sb.start + k] -= gk;
                    }
                }
                Op::Mul(a, b) => {
                    let (sa, sb) = (self.span(*a), self.span(*b));
                    for (k, gk) in g.iter().enumerate() {
                        let ia = sa.start + if sa.len == 1 { 0 } else { k };
                        let ib = sb.start + if sb.len == 1 { 0 } else { k };
                        adj[ia] += gk * self.values[ib];
                        adj[ib] += gk * self.values[ia];
                    }
                }
                Op::Div(a, b) => {
                    let (sa, sb) = (self.span(*a), self.span(*b));
                    // d(a/b)/da = 1/b ; d(a/b)/db = -out/b
                    for (k, gk) in g.iter().enumerate() {
                        let ia = sa.start + if sa.len == 1 { 0 } else { k };
                        let ib = sb.start + if sb.len == 1 { 0 } else { k };
                        let bk = self.values[ib];
                        adj[ia] += gk / bk;
                        adj[ib] -= gk * self.values[out + k] / bk;
                    }
                }
                Op::ScaleConst(a, c) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        adj[sa.start + k] += c * gk;
                    }
                }
                Op::AddConst(a) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        adj[sa.start + k] += gk;
                    }
                }
                Op::Dot(a, b) => {
                    let (sa, sb) = (self.span(*a), self.span(*b));
                    for k in 0..sa.len {
                        adj[sa.start + k] += g[0] * self.values[sb.start + k];
                        adj[sb.start + k] += g[0] * self.values[sa.start + k];
                    }
                }
                Op::Norm(a) => {
                    let sa = self.span(*a);
                    let r = self.values[out];
                    if r >= ORIGIN_EPS {
                        for k in 0..sa.len {
                            adj[sa.start + k] += g[0] * self.values[sa.start + k] / r;
                        }
                    }
                }
                Op::Sqrt(a) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        let s = self.values[out + k];
                        if s > 0.0 {
                            adj[sa.start + k] += gk * 0.5 / s;
                        }
                    }
                }
                Op::Tanh(a) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        let t = self.values[out + k];
                        adj[sa.start + k] += gk * (1.0 - t * t);
                    }
                }
                Op::Artanh(a) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        let u = self.values[sa.start + k];
                        if u.abs() < 1.0 - BALL_EPS {
                            adj[sa.start + k] += gk / (1.0 - u * u);
                        }
                    }
                }
                Op::Arcosh(a) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        let u = self.values[sa.start + k];
                        if u > 1.0 + ARCOSH_EPS {
                            adj[sa.start + k] += gk / (u * u - 1.0).sqrt();
                        }
                    }
                }
                Op::Softplus(a) => {
                    let sa = self.span(*a);
                    for (k, gk) in g.iter().enumerate() {
                        adj[sa.start + k] += gk * sigmoid(self.values[sa.start + k]);
                    }
                }
                Op::Softmax(a) => {
                    let sa = self.span(*a);
                    let mut inner = 0.0;
                    for (k, gk) in g.iter().enumerate() {
                        inner += gk * self.values[out + k];
                    }
                    for (k, gk) in g.iter().enumerate() {
                        adj[sa.start + k] += self.values[out + k] * (gk - inner);
                    }
                }
                Op::LogSumExp(a) => {
                    let sa = self.span(*a);
                    let lse = self.values[out];
                    for k in 0..sa.len {
                        adj[sa.start + k] += g[0] * (self.values[sa.start + k] - lse).exp();
                    }
                }
                Op::Sum(a) => {
                    let sa = self.span(*a);
                    for k in 0..sa.len {
                        adj[sa.start + k] += g[0];
                    }
                }
                Op::Stack(parts) => {
                    let mut pos = 0;
                    for p in parts {
                        let sp = self.span(*p);
                        for k in 0..sp.len {
                            adj[sp.start + k] += g[pos + k];
                        }
                        pos += sp.len;
                    }
                }
                Op::Index(a, k) => {
                    let sa = self.span(*a);
                    adj[sa.start + k] += g[0];
                }
                Op::GivensRot { x, angles } => {
                    let (sx, sa) = (self.span(*x), self.span(*angles));
                    for j in 0..sa.len {
                        let theta = self.values[sa.start + j];
                        let (sn, cs) = theta.sin_cos();
                        let (g0, g1) = (g[2 * j], g[2 * j + 1]);
                        adj[sx.start + 2 * j] += g0 * cs + g1 * sn;
                        adj[sx.start + 2 * j + 1] += -g0 * sn + g1 * cs;
                        // d out / d theta = (-out1, out0)
                        adj[sa.start + j] +=
                            -g0 * self.values[out + 2 * j + 1] + g1 * self.values[out + 2 * j];
                    }
                }
                Op::GivensRef { x, angles } => {
                    let (sx, sa) = (self.span(*x), self.span(*angles));
                    for j in 0..sa.len {
                        let phi = self.values[sa.start + j];
                        let (sn, cs) = phi.sin_cos();
                        let (a0, a1) = (
                            self.values[sx.start + 2 * j],
                            self.values[sx.start + 2 * j + 1],
                        );
                        let (g0, g1) = (g[2 * j], g[2 * j + 1]);
                        // G-(phi) is symmetric, so the input gradient reuses it.
                        adj[sx.start + 2 * j] += g0 * cs + g1 * sn;
                        adj[sx.start + 2 * j + 1] += g0 * sn - g1 * cs;
                        adj[sa.start + j] += g0 * (-a0 * sn + a1 * cs) + g1 * (a0 * cs + a1 * sn);
                    }
                }
                Op::DftPacked(x) => {
                    let sx = self.span(*x);
                    let n = sx.len;
                    let half = n / 2;
                    let scale = 1.0 / (n as f64).sqrt();
                    let tau = std::f64::consts::TAU;
                    for p in 0..n {
                        let mut acc = 0.0;
                        for q in 0..=half {
                            let angle = tau * ((p * q) % n) as f64 / n as f64;
                            acc += g[2 * q] * angle.cos();
                            // The forced-zero endpoint imaginary parts pass no gradient.
                            if q != 0 && q != half {
                                acc -= g[2 * q + 1] * angle.sin();
                            }
                        }
                        adj[sx.start + p] += acc * scale;
                    }
                }
                Op::HermDotIm(z, w) => {
                    let (sz, sw) = (self.span(*z), self.span(*w));
                    for i in (0..sz.len).step_by(2) {
                        let (zr, zi) = (self.values[sz.start + i], self.values[sz.start + i + 1]);
                        let (wr, wi) = (self.values[sw.start + i], self.values[sw.start + i + 1]);
                        adj[sz.start + i] += -g[0] * wi;
                        adj[sz.start + i + 1] += g[0] * wr;
                        adj[sw.start + i] += g[0] * zi;
                        adj[sw.start + i + 1] += -g[0] * zr;
                    }
                }
                Op::ClampNorm { x, active } => {
                    if !active {
                        let sx = self.span(*x);
                        for (k, gk) in g.iter().enumerate() {
                            adj[sx.start + k] += gk;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Curvature handle shared by the ball composites: the softplus-mapped
/// curvature node and its square root.
#[derive(Clone, Copy)]
pub struct Curvature {
    pub c: NodeId,
    pub sqrt_c: NodeId,
}

impl Curvature {
    /// Records `c = softplus(raw)` and `sqrt(c)` from a raw scalar node.
    pub fn from_raw(tape: &mut Tape, raw: NodeId) -> Self {
        let c = tape.softplus(raw);
        let sqrt_c = tape.sqrt(c);
        Self { c, sqrt_c }
    }

    /// Wraps an already-positive curvature node.
    pub fn from_positive(tape: &mut Tape, c: NodeId) -> Self {
        let sqrt_c = tape.sqrt(c);
        Self { c, sqrt_c }
    }

    pub fn value(&self, tape: &Tape) -> f64 {
        tape.scalar(self.c)
    }
}

/// Mobius addition recorded as a composition of primitives, re-clamped into
/// the open ball.
pub fn mobius_add(tape: &mut Tape, x: NodeId, y: NodeId, curv: Curvature) -> NodeId {
    let x2 = tape.dot(x, x);
    let y2 = tape.dot(y, y);
    let xy = tape.dot(x, y);
    let cxy = tape.mul(curv.c, xy);
    let cxy2 = tape.scale_const(cxy, 2.0);
    let cy2 = tape.mul(curv.c, y2);
    let cx2 = tape.mul(curv.c, x2);
    let t = tape.add(cxy2, cy2);
    let coef_x = tape.add_const(t, 1.0);
    let neg_cx2 = tape.scale_const(cx2, -1.0);
    let coef_y = tape.add_const(neg_cx2, 1.0);
    let cc = tape.mul(curv.c, curv.c);
    let x2y2 = tape.mul(x2, y2);
    let ccx2y2 = tape.mul(cc, x2y2);
    let t = tape.add(cxy2, ccx2y2);
    let den = tape.add_const(t, 1.0);
    let xs = tape.mul(x, coef_x);
    let ys = tape.mul(y, coef_y);
    let num = tape.add(xs, ys);
    let out = tape.div(num, den);
    let max_norm = (1.0 - BALL_EPS) / tape.scalar(curv.sqrt_c);
    tape.clamp_norm(out, max_norm)
}

/// Exponential map at the origin. Near-zero inputs pass through unchanged
/// (the removable singularity has identity as its limit map).
pub fn exp_map_zero(tape: &mut Tape, v: NodeId, curv: Curvature) -> NodeId {
    let r = tape.norm(v);
    if tape.scalar(r) < ORIGIN_EPS {
        return v;
    }
    let arg = tape.mul(curv.sqrt_c, r);
    let t = tape.tanh(arg);
    let coef = tape.div(t, arg);
    let out = tape.mul(v, coef);
    let max_norm = (1.0 - BALL_EPS) / tape.scalar(curv.sqrt_c);
    tape.clamp_norm(out, max_norm)
}

/// Logarithmic map at the origin; inverse of [`exp_map_zero`].
pub fn log_map_zero(tape: &mut Tape, y: NodeId, curv: Curvature) -> NodeId {
    let r = tape.norm(y);
    if tape.scalar(r) < ORIGIN_EPS {
        return y;
    }
    let u = tape.mul(curv.sqrt_c, r);
    let a = tape.artanh(u);
    let coef = tape.div(a, u);
    tape.mul(y, coef)
}

/// Poincare distance `(2/sqrt(c)) artanh(sqrt(c) ||(-x) (+) y||)`.
pub fn poincare_distance(tape: &mut Tape, x: NodeId, y: NodeId, curv: Curvature) -> NodeId {
    let neg_x = tape.scale_const(x, -1.0);
    let diff = mobius_add(tape, neg_x, y, curv);
    let nd = tape.norm(diff);
    let u = tape.mul(curv.sqrt_c, nd);
    let a = tape.artanh(u);
    let half = tape.div(a, curv.sqrt_c);
    tape.scale_const(half, 2.0)
}

/// Bergman distance between interleaved complex ball points (with the
/// homogeneous `-1` term folded into the real part of the Hermitian form).
pub fn bergman_distance(tape: &mut Tape, z: NodeId, w: NodeId) -> NodeId {
    let zw_re_raw = tape.dot(z, w);
    let zw_re = tape.add_const(zw_re_raw, -1.0);
    let zw_im = tape.herm_dot_im(z, w);
    let re2 = tape.mul(zw_re, zw_re);
    let im2 = tape.mul(zw_im, zw_im);
    let num = tape.add(re2, im2);
    let zz_raw = tape.dot(z, z);
    let zz = tape.add_const(zz_raw, -1.0);
    let ww_raw = tape.dot(w, w);
    let ww = tape.add_const(ww_raw, -1.0);
    let den = tape.mul(zz, ww);
    let ratio = tape.div(num, den);
    let doubled = tape.scale_const(ratio, 2.0);
    let arg = tape.add_const(doubled, -1.0);
    tape.arcosh(arg)
}
