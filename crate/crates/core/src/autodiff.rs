//! Scalar reverse-mode automatic differentiation on a growable tape.
//!
//! Every arithmetic operation on a [`Var`] appends a node holding the local
//! partial derivatives with respect to its (at most two) operands. A single
//! reverse sweep from an output node then yields the gradient with respect to
//! every node recorded before it.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
struct Node {
    deps: [(u32, f64); 2],
    arity: u8,
}

/// Recording tape. Variables borrow it, so a tape outlives all its `Var`s.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// A scalar recorded on a [`Tape`].
#[derive(Clone, Copy, Debug)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: u32,
    value: f64,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A new independent variable (leaf node).
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(value, [(0, 0.0); 2], 0)
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    fn push(&self, value: f64, deps: [(u32, f64); 2], arity: u8) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let index = nodes.len() as u32;
        nodes.push(Node { deps, arity });
        Var {
            tape: self,
            index,
            value,
        }
    }

    fn unary(&self, a: Var<'_>, value: f64, da: f64) -> Var<'_> {
        self.push(value, [(a.index, da), (0, 0.0)], 1)
    }

    fn binary(&self, a: Var<'_>, b: Var<'_>, value: f64, da: f64, db: f64) -> Var<'_> {
        self.push(value, [(a.index, da), (b.index, db)], 2)
    }

    /// Adjoints of every node with respect to `output`.
    ///
    /// Fails if a non-finite adjoint appears; the message names the node.
    pub fn adjoints(&self, output: Var<'_>) -> Result<Vec<f64>> {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0f64; nodes.len()];
        adj[output.index as usize] = 1.0;
        for i in (0..=output.index as usize).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            if !a.is_finite() {
                return Err(Error::numeric(format!("reverse sweep at tape node {i}")));
            }
            let node = nodes[i];
            for &(dep, partial) in &node.deps[..node.arity as usize] {
                adj[dep as usize] += a * partial;
            }
        }
        Ok(adj)
    }

    /// Gradient of `output` restricted to the given leaves, in order.
    pub fn gradient(&self, output: Var<'_>, wrt: &[Var<'_>]) -> Result<Vec<f64>> {
        let adj = self.adjoints(output)?;
        Ok(wrt.iter().map(|v| adj[v.index as usize]).collect())
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.tape.unary(self, s, 0.5 / s)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.tape.unary(self, e, e)
    }

    pub fn ln(self) -> Self {
        self.tape.unary(self, self.value.ln(), 1.0 / self.value)
    }

    pub fn powi(self, n: i32) -> Self {
        let d = if n == 0 {
            0.0
        } else {
            n as f64 * self.value.powi(n - 1)
        };
        self.tape.unary(self, self.value.powi(n), d)
    }

    pub fn relu(self) -> Self {
        if self.value > 0.0 {
            self.tape.unary(self, self.value, 1.0)
        } else {
            self.tape.unary(self, 0.0, 0.0)
        }
    }

    /// Maximum; ties send the derivative to `self`.
    pub fn max(self, other: Self) -> Self {
        if self.value >= other.value {
            self.tape.binary(self, other, self.value, 1.0, 0.0)
        } else {
            self.tape.binary(self, other, other.value, 0.0, 1.0)
        }
    }

    pub fn max_f(self, c: f64) -> Self {
        if self.value >= c {
            self.tape.unary(self, self.value, 1.0)
        } else {
            self.tape.unary(self, c, 0.0)
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Self) -> Self {
        self.tape.binary(self, rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Self) -> Self {
        self.tape.binary(self, rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Self) -> Self {
        self.tape
            .binary(self, rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.tape
            .binary(self, rhs, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Self {
        self.tape.unary(self, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Self {
        self.tape.unary(self, self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Self {
        self.tape.unary(self, self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Self {
        self.tape.unary(self, self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Self {
        self.tape.unary(self, self.value / rhs, 1.0 / rhs)
    }
}

impl<'t> Add<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        rhs + self
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        rhs.tape.unary(rhs, self - rhs.value, -1.0)
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        rhs * self
    }
}

/// Sum of a non-empty slice of variables.
pub fn sum<'t>(vars: &[Var<'t>]) -> Var<'t> {
    let mut it = vars.iter().copied();
    let first = it.next().expect("sum of an empty slice");
    it.fold(first, |acc, v| acc + v)
}

/// Value and reverse-mode gradient of a scalar function of `params`.
pub fn grad<F>(params: &[f64], f: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let leaves = tape.vars(params);
    let out = f(&tape, &leaves);
    if !out.value().is_finite() {
        return Err(Error::numeric("loss value"));
    }
    let g = tape.gradient(out, &leaves)?;
    Ok((out.value(), g))
}
