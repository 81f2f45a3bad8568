//! Closed-form coordinate expressions.
//!
//! Expressions are built over chart coordinates `x1..xn`, real literals, the
//! binary operators `+ - * / ^`, unary negation and a fixed set of smooth
//! functions. They are immutable and cheap to clone (nodes are shared through
//! `Arc`), so metric fields and potentials can be handed across threads.

mod diff;
mod eval;
mod parse;
mod print;

use std::fmt;
use std::sync::Arc;

pub use eval::EvalError;
pub use parse::{parse, ParseError};

/// Smooth elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree node. Variables are stored 0-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(ScalarExpr),
    Binary(BinOp, ScalarExpr, ScalarExpr),
    Call(Func, ScalarExpr),
}

/// A parsed or constructed coordinate expression.
#[derive(Clone, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

impl ScalarExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Self {
        ScalarExpr(Arc::new(node))
    }

    /// A literal. Negative values are stored as a negated literal so that
    /// printed and re-parsed trees stay identical.
    pub fn num(value: f64) -> Self {
        if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
            Self::from_node(Node::Neg(Self::from_node(Node::Num(-value))))
        } else {
            Self::from_node(Node::Num(value))
        }
    }

    pub fn zero() -> Self {
        Self::num(0.0)
    }

    pub fn one() -> Self {
        Self::num(1.0)
    }

    /// Coordinate `x{index+1}`.
    pub fn var(index: usize) -> Self {
        Self::from_node(Node::Var(index))
    }

    pub fn call(func: Func, arg: ScalarExpr) -> Self {
        Self::from_node(Node::Call(func, arg))
    }

    pub fn binary(op: BinOp, lhs: ScalarExpr, rhs: ScalarExpr) -> Self {
        Self::from_node(Node::Binary(op, lhs, rhs))
    }

    pub fn neg_raw(arg: ScalarExpr) -> Self {
        Self::from_node(Node::Neg(arg))
    }

    /// Literal value if this node is a (possibly negated) number.
    pub fn as_constant(&self) -> Option<f64> {
        match self.node() {
            Node::Num(v) => Some(*v),
            Node::Neg(e) => e.as_constant().map(|v| -v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    // Folding constructors. These drop additive zeros and multiplicative
    // ones so that constructed metrics keep literal zeros off the diagonal.

    pub fn add(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        Self::binary(BinOp::Add, self.clone(), rhs.clone())
    }

    pub fn sub(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.neg();
        }
        Self::binary(BinOp::Sub, self.clone(), rhs.clone())
    }

    pub fn mul(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        Self::binary(BinOp::Mul, self.clone(), rhs.clone())
    }

    pub fn div(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() {
            return Self::zero();
        }
        if rhs.is_one() {
            return self.clone();
        }
        Self::binary(BinOp::Div, self.clone(), rhs.clone())
    }

    pub fn pow(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if rhs.is_zero() {
            return Self::one();
        }
        if rhs.is_one() {
            return self.clone();
        }
        Self::binary(BinOp::Pow, self.clone(), rhs.clone())
    }

    pub fn powi(&self, k: i32) -> ScalarExpr {
        self.pow(&Self::num(k as f64))
    }

    pub fn neg(&self) -> ScalarExpr {
        if self.is_zero() {
            return Self::zero();
        }
        if let Node::Neg(inner) = self.node() {
            return inner.clone();
        }
        Self::neg_raw(self.clone())
    }

    pub fn scale(&self, c: f64) -> ScalarExpr {
        Self::num(c).mul(self)
    }

    pub fn exp(&self) -> ScalarExpr {
        if self.is_zero() {
            return Self::one();
        }
        Self::call(Func::Exp, self.clone())
    }

    pub fn log(&self) -> ScalarExpr {
        Self::call(Func::Log, self.clone())
    }

    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a ScalarExpr>) -> ScalarExpr {
        terms.into_iter().fold(Self::zero(), |acc, t| acc.add(t))
    }

    /// `x_{from+1}^2 + ... + x_{to}^2` (0-based half-open range of variables).
    pub fn squared_norm(range: std::ops::Range<usize>) -> ScalarExpr {
        let squares: Vec<_> = range.map(|i| Self::var(i).powi(2)).collect();
        Self::sum(&squares)
    }

    /// Largest 0-based variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Num(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(e) | Node::Call(_, e) => e.max_var(),
            Node::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(e) | Node::Call(_, e) => e.depends_on(var),
            Node::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    pub fn is_constant_expr(&self) -> bool {
        self.max_var().is_none()
    }

    /// Replace every variable by the expression returned from `f`.
    pub fn map_vars(&self, f: &dyn Fn(usize) -> ScalarExpr) -> ScalarExpr {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(i) => f(*i),
            Node::Neg(e) => Self::neg_raw(e.map_vars(f)),
            Node::Call(func, e) => Self::call(*func, e.map_vars(f)),
            Node::Binary(op, a, b) => Self::binary(*op, a.map_vars(f), b.map_vars(f)),
        }
    }

    /// Substitute a numeric value for one variable.
    pub fn substitute_value(&self, var: usize, value: f64) -> ScalarExpr {
        self.map_vars(&|i| if i == var { Self::num(value) } else { Self::var(i) })
    }

    /// Plain floating-point evaluation (no derivatives, no domain checks).
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self.node() {
            Node::Num(v) => *v,
            Node::Var(i) => p[*i],
            Node::Neg(e) => -e.eval(p),
            Node::Call(func, e) => {
                let x = e.eval(p);
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Sqrt => x.sqrt(),
                }
            }
            Node::Binary(op, a, b) => {
                let (x, y) = (a.eval(p), b.eval(p));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
        }
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

impl std::str::FromStr for ScalarExpr {
    type Err = ParseError;

    /// Parses without a dimension bound (any `xN` accepted).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s, usize::MAX)
    }
}
