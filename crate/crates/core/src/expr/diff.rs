//! Symbolic differentiation.

use super::{Expr, Func, Node};
use crate::scalar::Scalar;

impl<T: Scalar> Expr<T> {
    /// `order`-th partial derivative with respect to `axis`.
    ///
    /// `mod` differentiates to a unit step that raises a domain error when
    /// evaluated exactly on one of its discontinuities.
    pub fn diff(&self, axis: usize, order: u32) -> Expr<T> {
        (0..order).fold(self.clone(), |e, _| e.diff1(axis))
    }

    /// Mixed partial derivative; `orders[k]` is the order along axis `k`.
    pub fn diff_multi(&self, orders: &[u32]) -> Expr<T> {
        orders.iter().enumerate().fold(self.clone(), |e, (axis, &d)| e.diff(axis, d))
    }

    fn diff1(&self, axis: usize) -> Expr<T> {
        if !self.contains_var(axis) {
            return Expr::zero();
        }
        let d = |e: &Expr<T>| e.diff1(axis);
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == axis {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => Expr::neg(d(a)),
            Node::Add(a, b) => Expr::add(d(a), d(b)),
            Node::Sub(a, b) => Expr::sub(d(a), d(b)),
            Node::Mul(a, b) => Expr::add(Expr::mul(d(a), b.clone()), Expr::mul(a.clone(), d(b))),
            Node::Div(a, b) => {
                if !b.contains_var(axis) {
                    return Expr::div(d(a), b.clone());
                }
                let num = Expr::sub(Expr::mul(d(a), b.clone()), Expr::mul(a.clone(), d(b)));
                Expr::div(num, Expr::powi(b.clone(), 2))
            }
            Node::Pow(a, b) => {
                if !b.contains_var(axis) {
                    // b * a^(b-1) * a'
                    let reduced = Expr::pow(a.clone(), Expr::sub(b.clone(), Expr::one()));
                    return Expr::mul(Expr::mul(b.clone(), reduced), d(a));
                }
                // a^b * (b' ln a + b a' / a)
                let log_term = Expr::mul(d(b), a.clone().ln());
                let base_term =
                    if a.contains_var(axis) { Expr::div(Expr::mul(b.clone(), d(a)), a.clone()) } else { Expr::zero() };
                Expr::mul(self.clone(), Expr::add(log_term, base_term))
            }
            Node::Func(f, a) => {
                let inner = d(a);
                let outer = match f {
                    Func::Sin => a.clone().cos(),
                    Func::Cos => Expr::neg(a.clone().sin()),
                    Func::Tan => Expr::div(Expr::one(), Expr::powi(a.clone().cos(), 2)),
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::div(Expr::one(), a.clone()),
                    Func::Sqrt => Expr::div(Expr::constant(T::of(0.5)), self.clone()),
                    // |a|' = |a| / a, undefined at the kink
                    Func::Abs => Expr::div(self.clone(), a.clone()),
                };
                Expr::mul(outer, inner)
            }
            Node::Mod(a, m) => Expr::mul(Expr::mod_step(a.clone(), *m, T::one()), d(a)),
            // piecewise constant; the zero-valued step keeps the discontinuity guard
            Node::ModStep { arg, modulus, .. } => Expr::mod_step(arg.clone(), *modulus, T::zero()),
        }
    }
}
