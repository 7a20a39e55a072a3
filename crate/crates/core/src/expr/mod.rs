//! Scalar expression trees over axis-indexed variables.
//!
//! Expressions are immutable and cheaply cloneable (`Arc` nodes). Every
//! constructor folds constants and strips additive/multiplicative identities,
//! which keeps nested derivative/substitution chains from blowing up.
//!
//! Variables are identified by their 0-based axis index. The textual names
//! `x`, `y`, `z` map to axes 0, 1, 2 and `x1`..`xn` map to axes 0..n-1.

mod diff;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Scalar;

pub use parse::{parse, parse_with_names, ParseError};

/// Elementary single-argument functions of the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply<T: Scalar>(self, a: T) -> Option<T> {
        let r = match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Tan => a.tan(),
            Func::Exp => a.exp(),
            Func::Ln => {
                if a <= T::zero() {
                    return None;
                }
                a.ln()
            }
            Func::Sqrt => {
                if a < T::zero() {
                    return None;
                }
                a.sqrt()
            }
            Func::Abs => a.abs(),
        };
        r.is_finite().then_some(r)
    }
}

/// One node of an expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    Const(T),
    Var(usize),
    Neg(Expr<T>),
    Add(Expr<T>, Expr<T>),
    Sub(Expr<T>, Expr<T>),
    Mul(Expr<T>, Expr<T>),
    Div(Expr<T>, Expr<T>),
    Pow(Expr<T>, Expr<T>),
    Func(Func, Expr<T>),
    /// `mod(arg, modulus)`, result carries the sign of the modulus.
    Mod(Expr<T>, T),
    /// Piecewise-constant `value` produced by differentiating `mod`;
    /// evaluating it on a discontinuity of `mod(arg, modulus)` is a domain error.
    ModStep {
        arg: Expr<T>,
        modulus: T,
        value: T,
    },
}

/// Immutable, shareable expression.
#[derive(Clone, PartialEq)]
pub struct Expr<T>(Arc<Node<T>>);

/// Evaluation failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
}

impl<T> Expr<T> {
    pub fn node(&self) -> &Node<T> {
        &self.0
    }
}

#[allow(clippy::should_implement_trait)]
impl<T: Scalar> Expr<T> {
    fn wrap(node: Node<T>) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(v: T) -> Self {
        Self::wrap(Node::Const(v))
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn var(axis: usize) -> Self {
        Self::wrap(Node::Var(axis))
    }

    pub fn as_const(&self) -> Option<T> {
        match *self.0 {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(T::zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(T::one())
    }

    pub fn neg(a: Self) -> Self {
        match a.node() {
            Node::Const(v) => Self::constant(-*v),
            Node::Neg(inner) => inner.clone(),
            _ => Self::wrap(Node::Neg(a)),
        }
    }

    pub fn add(a: Self, b: Self) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x + y),
            (Some(x), _) if x == T::zero() => b,
            (_, Some(y)) if y == T::zero() => a,
            _ => match b.node() {
                Node::Neg(inner) => Self::wrap(Node::Sub(a, inner.clone())),
                _ => Self::wrap(Node::Add(a, b)),
            },
        }
    }

    pub fn sub(a: Self, b: Self) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x - y),
            (Some(x), _) if x == T::zero() => Self::neg(b),
            (_, Some(y)) if y == T::zero() => a,
            _ => match b.node() {
                Node::Neg(inner) => Self::wrap(Node::Add(a, inner.clone())),
                _ => Self::wrap(Node::Sub(a, b)),
            },
        }
    }

    pub fn mul(a: Self, b: Self) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x * y),
            (Some(x), _) if x == T::zero() => Self::zero(),
            (_, Some(y)) if y == T::zero() => Self::zero(),
            (Some(x), _) if x == T::one() => b,
            (_, Some(y)) if y == T::one() => a,
            (Some(x), _) if x == -T::one() => Self::neg(b),
            (_, Some(y)) if y == -T::one() => Self::neg(a),
            // keep constants on the left so `2*x*3` style chains fold
            (None, Some(_)) => Self::mul(b, a),
            (Some(x), None) => match a_times_const(&b) {
                Some((k, rest)) => Self::mul(Self::constant(x * k), rest),
                None => Self::wrap(Node::Mul(a, b)),
            },
            _ => Self::wrap(Node::Mul(a, b)),
        }
    }

    pub fn div(a: Self, b: Self) -> Self {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != T::zero() => Self::constant(x / y),
            (Some(x), _) if x == T::zero() => Self::zero(),
            (_, Some(y)) if y == T::one() => a,
            (_, Some(y)) if y != T::zero() && (T::one() / y).is_finite() && is_power_of_two(y) => {
                Self::mul(Self::constant(T::one() / y), a)
            }
            _ => Self::wrap(Node::Div(a, b)),
        }
    }

    pub fn pow(base: Self, exponent: Self) -> Self {
        match (base.as_const(), exponent.as_const()) {
            (_, Some(e)) if e == T::zero() => Self::one(),
            (_, Some(e)) if e == T::one() => base,
            (Some(b), Some(e)) => {
                let r = pow_value(b, e);
                match r {
                    Some(r) => Self::constant(r),
                    None => Self::wrap(Node::Pow(base, exponent)),
                }
            }
            (Some(b), None) if b == T::one() => Self::one(),
            _ => Self::wrap(Node::Pow(base, exponent)),
        }
    }

    pub fn powi(base: Self, n: i32) -> Self {
        Self::pow(base, Self::constant(T::of_int(n as i64)))
    }

    pub fn func(f: Func, a: Self) -> Self {
        if let Some(v) = a.as_const() {
            if let Some(r) = f.apply(v) {
                return Self::constant(r);
            }
        }
        Self::wrap(Node::Func(f, a))
    }

    pub fn modulo(a: Self, modulus: T) -> Self {
        if let Some(v) = a.as_const() {
            if modulus != T::zero() {
                return Self::constant(mod_value(v, modulus));
            }
        }
        Self::wrap(Node::Mod(a, modulus))
    }

    pub fn mod_step(arg: Self, modulus: T, value: T) -> Self {
        Self::wrap(Node::ModStep { arg, modulus, value })
    }

    pub fn sin(self) -> Self {
        Self::func(Func::Sin, self)
    }
    pub fn cos(self) -> Self {
        Self::func(Func::Cos, self)
    }
    pub fn exp(self) -> Self {
        Self::func(Func::Exp, self)
    }
    pub fn ln(self) -> Self {
        Self::func(Func::Ln, self)
    }
    pub fn sqrt(self) -> Self {
        Self::func(Func::Sqrt, self)
    }

    /// Evaluates with `vars[axis]` bound to each variable.
    pub fn eval(&self, vars: &[T]) -> Result<T, EvalError> {
        let v = match self.node() {
            Node::Const(c) => return Ok(*c),
            Node::Var(i) => return vars.get(*i).copied().ok_or_else(|| EvalError::Unbound(var_name(*i))),
            Node::Neg(a) => -a.eval(vars)?,
            Node::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Node::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Node::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Node::Div(a, b) => {
                let num = a.eval(vars)?;
                let den = b.eval(vars)?;
                if den == T::zero() {
                    return Err(self.domain("division by zero"));
                }
                num / den
            }
            Node::Pow(a, b) => {
                let base = a.eval(vars)?;
                let e = b.eval(vars)?;
                pow_value(base, e).ok_or_else(|| self.domain("power undefined"))?
            }
            Node::Func(f, a) => {
                let x = a.eval(vars)?;
                f.apply(x).ok_or_else(|| self.domain(func_reason(*f)))?
            }
            Node::Mod(a, m) => {
                if *m == T::zero() {
                    return Err(self.domain("modulus is zero"));
                }
                mod_value(a.eval(vars)?, *m)
            }
            Node::ModStep { arg, modulus, value } => {
                let x = arg.eval(vars)?;
                if *modulus == T::zero() || mod_value(x, *modulus) == T::zero() {
                    return Err(self.domain("derivative of mod at a discontinuity"));
                }
                *value
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain("non-finite result"))
        }
    }

    /// Evaluates at a named point.
    pub fn eval_at(&self, at: &Point<T>) -> Result<T, EvalError> {
        let needed = self.max_var().map_or(0, |m| m + 1);
        let mut vals = Vec::with_capacity(needed);
        for axis in 0..needed {
            match at.get(axis) {
                Some(v) => vals.push(v),
                None if self.contains_var(axis) => return Err(EvalError::Unbound(var_name(axis))),
                None => vals.push(T::nan()),
            }
        }
        self.eval(&vals)
    }

    fn domain(&self, reason: &'static str) -> EvalError {
        EvalError::Domain { node: self.to_string(), reason }
    }

    /// Replaces `axis` by the constant `value`; the result no longer contains it.
    pub fn substitute(&self, axis: usize, value: T) -> Self {
        if !self.contains_var(axis) {
            return self.clone();
        }
        let s = |e: &Self| e.substitute(axis, value);
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => {
                if *i == axis {
                    Self::constant(value)
                } else {
                    self.clone()
                }
            }
            Node::Neg(a) => Self::neg(s(a)),
            Node::Add(a, b) => Self::add(s(a), s(b)),
            Node::Sub(a, b) => Self::sub(s(a), s(b)),
            Node::Mul(a, b) => Self::mul(s(a), s(b)),
            Node::Div(a, b) => Self::div(s(a), s(b)),
            Node::Pow(a, b) => Self::pow(s(a), s(b)),
            Node::Func(f, a) => Self::func(*f, s(a)),
            Node::Mod(a, m) => Self::modulo(s(a), *m),
            Node::ModStep { arg, modulus, value: v } => Self::mod_step(s(arg), *modulus, *v),
        }
    }

    /// Replaces every occurrence of `axis` by `with`.
    pub fn substitute_expr(&self, axis: usize, with: &Self) -> Self {
        if !self.contains_var(axis) {
            return self.clone();
        }
        let s = |e: &Self| e.substitute_expr(axis, with);
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => {
                if *i == axis {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Neg(a) => Self::neg(s(a)),
            Node::Add(a, b) => Self::add(s(a), s(b)),
            Node::Sub(a, b) => Self::sub(s(a), s(b)),
            Node::Mul(a, b) => Self::mul(s(a), s(b)),
            Node::Div(a, b) => Self::div(s(a), s(b)),
            Node::Pow(a, b) => Self::pow(s(a), s(b)),
            Node::Func(f, a) => Self::func(*f, s(a)),
            Node::Mod(a, m) => Self::modulo(s(a), *m),
            Node::ModStep { arg, modulus, value } => Self::mod_step(s(arg), *modulus, *value),
        }
    }

    pub fn contains_var(&self, axis: usize) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(i) => *i == axis,
            Node::Neg(a) | Node::Func(_, a) | Node::Mod(a, _) => a.contains_var(axis),
            Node::ModStep { arg, .. } => arg.contains_var(axis),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.contains_var(axis) || b.contains_var(axis)
            }
        }
    }

    /// Set of axes referenced by the expression.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(i) => {
                out.insert(*i);
            }
            Node::Neg(a) | Node::Func(_, a) | Node::Mod(a, _) => a.collect_vars(out),
            Node::ModStep { arg, .. } => arg.collect_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        self.variables().into_iter().next_back()
    }

    /// Number of nodes (shared subtrees counted once per reference).
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Neg(a) | Node::Func(_, a) | Node::Mod(a, _) => a.size(),
            Node::ModStep { arg, .. } => arg.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.size() + b.size()
            }
        }
    }
}

fn a_times_const<T: Scalar>(e: &Expr<T>) -> Option<(T, Expr<T>)> {
    match e.node() {
        Node::Mul(a, b) => a.as_const().map(|k| (k, b.clone())),
        _ => None,
    }
}

fn is_power_of_two<T: Scalar>(y: T) -> bool {
    let (mantissa, _, _) = y.integer_decode();
    mantissa.is_power_of_two()
}

fn func_reason(f: Func) -> &'static str {
    match f {
        Func::Ln => "logarithm of a non-positive value",
        Func::Sqrt => "square root of a negative value",
        Func::Tan => "tangent at a pole",
        _ => "non-finite result",
    }
}

pub(crate) fn pow_value<T: Scalar>(base: T, e: T) -> Option<T> {
    let r = if e.is_integral() && e.abs() <= T::of(i32::MAX as f64) {
        let n = e.to_i32().unwrap();
        if base == T::zero() && n < 0 {
            return None;
        }
        base.powi(n)
    } else {
        if base < T::zero() {
            return None;
        }
        base.powf(e)
    };
    r.is_finite().then_some(r)
}

pub(crate) fn mod_value<T: Scalar>(a: T, m: T) -> T {
    a - m * (a / m).floor()
}

/// Canonical textual name of an axis variable.
pub fn var_name(axis: usize) -> String {
    match axis {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        n => format!("x{}", n + 1),
    }
}

/// Maps a textual variable name onto its axis.
pub fn axis_of(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => {
            let digits = name.strip_prefix('x')?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
                return None;
            }
            digits.parse::<usize>().ok().map(|k| k - 1)
        }
    }
}

/// Named coordinates; names must be distinct and resolve to axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T> {
    coords: Vec<Option<T>>,
}

/// Error building a [`Point`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PointError {
    #[error("unknown coordinate name `{0}`")]
    UnknownName(String),
    #[error("coordinate `{0}` given twice")]
    Duplicate(String),
}

impl<T: Scalar> Point<T> {
    pub fn new(pairs: &[(&str, T)]) -> Result<Self, PointError> {
        let mut coords: Vec<Option<T>> = Vec::new();
        for (name, value) in pairs {
            let axis = axis_of(name).ok_or_else(|| PointError::UnknownName(name.to_string()))?;
            if coords.len() <= axis {
                coords.resize(axis + 1, None);
            }
            if coords[axis].is_some() {
                return Err(PointError::Duplicate(name.to_string()));
            }
            coords[axis] = Some(*value);
        }
        Ok(Point { coords })
    }

    /// Point with every axis `0..values.len()` bound.
    pub fn from_values(values: &[T]) -> Self {
        Point { coords: values.iter().map(|v| Some(*v)).collect() }
    }

    pub fn get(&self, axis: usize) -> Option<T> {
        self.coords.get(axis).copied().flatten()
    }

    pub fn dimension(&self) -> usize {
        self.coords.iter().filter(|c| c.is_some()).count()
    }

    /// Dense coordinates, if every axis below the highest bound one is bound.
    pub fn values(&self) -> Option<Vec<T>> {
        self.coords.iter().copied().collect()
    }
}

impl<T: Scalar> From<T> for Expr<T> {
    fn from(v: T) -> Self {
        Expr::constant(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl<T: Scalar> ops::$trait for Expr<T> {
            type Output = Expr<T>;
            fn $method(self, rhs: Expr<T>) -> Expr<T> {
                Expr::$ctor(self, rhs)
            }
        }
        impl<T: Scalar> ops::$trait<&Expr<T>> for &Expr<T> {
            type Output = Expr<T>;
            fn $method(self, rhs: &Expr<T>) -> Expr<T> {
                Expr::$ctor(self.clone(), rhs.clone())
            }
        }
        impl<T: Scalar> ops::$trait<&Expr<T>> for Expr<T> {
            type Output = Expr<T>;
            fn $method(self, rhs: &Expr<T>) -> Expr<T> {
                Expr::$ctor(self, rhs.clone())
            }
        }
        impl<T: Scalar> ops::$trait<Expr<T>> for &Expr<T> {
            type Output = Expr<T>;
            fn $method(self, rhs: Expr<T>) -> Expr<T> {
                Expr::$ctor(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl<T: Scalar> ops::Neg for Expr<T> {
    type Output = Expr<T>;
    fn neg(self) -> Expr<T> {
        Expr::neg(self)
    }
}

impl<T: Scalar> ops::Neg for &Expr<T> {
    type Output = Expr<T>;
    fn neg(self) -> Expr<T> {
        Expr::neg(self.clone())
    }
}

impl<T: Scalar> std::iter::Sum for Expr<T> {
    fn sum<I: Iterator<Item = Expr<T>>>(iter: I) -> Self {
        iter.fold(Expr::zero(), Expr::add)
    }
}

// Printing. Precedence levels: 1 additive, 2 multiplicative, 3 unary minus,
// 4 power, 5 atoms.
fn prec<T>(node: &Node<T>) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

fn write_const<T: Scalar>(f: &mut fmt::Formatter<'_>, v: T) -> fmt::Result {
    if v < T::zero() {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

impl<T: Scalar> Expr<T> {
    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if prec(self.node()) < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(v) => write_const(f, *v),
            Node::Var(i) => write!(f, "{}", var_name(*i)),
            Node::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, 4)
            }
            Node::Add(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " + ")?;
                b.write_child(f, 2)
            }
            Node::Sub(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " - ")?;
                b.write_child(f, 2)
            }
            Node::Mul(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "*")?;
                b.write_child(f, 3)
            }
            Node::Div(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "/")?;
                b.write_child(f, 4)
            }
            Node::Pow(a, b) => {
                a.write_child(f, 5)?;
                write!(f, "^")?;
                b.write_child(f, 4)
            }
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
            Node::Mod(a, m) => {
                write!(f, "mod({a}, ")?;
                write_const(f, *m)?;
                write!(f, ")")
            }
            Node::ModStep { arg, modulus, value } => {
                if *value != T::one() {
                    write_const(f, *value)?;
                    write!(f, "*")?;
                }
                write!(f, "dmod({arg}, ")?;
                write_const(f, *modulus)?;
                write!(f, ")")
            }
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}
