use crate::constraints::{AxisConstraint, ConstraintSet};
use crate::expr::Expr;
use crate::scalar::Scalar;
use crate::tensor::{assemble, ConstrainedExpression};

use super::{check_univariate, BivariateError, Rect};

/// What a line constraint prescribes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedKind {
    Value,
    /// `d`-th derivative across the line.
    Normal(u32),
    /// First derivative along the line, e.g. `f_x(x, y_2) = c_x(x, y_2)`.
    Tangential,
}

/// A constraint on the line `x_axis = point`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedLine<T> {
    /// Axis held fixed: 0 for `x = point`, 1 for `y = point`.
    pub axis: usize,
    pub point: T,
    pub kind: MixedKind,
    /// Data on the line, a function of the other variable. `Value` and
    /// `Tangential` take `c` restricted to the line, `Normal(d)` takes the
    /// restricted `d`-th normal derivative.
    pub slice: Expr<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedSpec<T> {
    pub rect: Rect<T>,
    pub lines: Vec<MixedLine<T>>,
}

impl<T: Scalar> MixedSpec<T> {
    /// Lines `(axis, point, kind)` with data read off `c`.
    pub fn from_global(c: &Expr<T>, rect: Rect<T>, lines: &[(usize, T, MixedKind)]) -> Self {
        let lines = lines
            .iter()
            .map(|&(axis, point, kind)| {
                let d = match kind {
                    MixedKind::Normal(d) => d,
                    _ => 0,
                };
                MixedLine { axis, point, kind, slice: c.diff(axis, d).substitute(axis, point) }
            })
            .collect();
        MixedSpec { rect, lines }
    }

    /// Constraint set the spec reduces to. Tangential lines are stored as
    /// value constraints.
    pub fn constraint_set(&self) -> Result<ConstraintSet<T>, BivariateError> {
        let mut set = ConstraintSet::new(self.rect.domain()?);
        for line in &self.lines {
            check_univariate(&line.slice, 1 - line.axis)?;
            let order = match line.kind {
                MixedKind::Normal(d) => d,
                MixedKind::Value | MixedKind::Tangential => 0,
            };
            set.push(AxisConstraint::sliced(line.axis, line.point, order, line.slice.clone()))?;
        }
        Ok(set)
    }
}

#[derive(Debug)]
pub struct MixedCe<T> {
    pub ce: ConstrainedExpression<T>,
    pub expr: Expr<T>,
    /// Indices into `lines` of tangential constraints that were embedded as
    /// values. The derivative along the line is then reproduced exactly, but
    /// `f` is pinned on the line instead of up to a constant.
    pub embedded_tangential: Vec<usize>,
}

impl<T: Scalar> Clone for MixedCe<T> {
    fn clone(&self) -> Self {
        MixedCe { ce: self.ce.clone(), expr: self.expr.clone(), embedded_tangential: self.embedded_tangential.clone() }
    }
}

/// Constrained expression for a set of value, normal and tangential line
/// constraints on a rectangle.
pub fn mixed_ce<T: Scalar>(spec: &MixedSpec<T>, g: &Expr<T>) -> Result<MixedCe<T>, BivariateError> {
    let set = spec.constraint_set()?;
    let ce = assemble(&set, g.clone())?;
    let expr = ce.to_expr();
    let embedded_tangential =
        spec.lines.iter().enumerate().filter(|(_, l)| l.kind == MixedKind::Tangential).map(|(i, _)| i).collect();
    Ok(MixedCe { ce, expr, embedded_tangential })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bivariate::{X, Y};
    use crate::expr::parse;

    fn e(s: &str) -> Expr<f64> {
        parse(s).unwrap()
    }

    fn check(f: &Expr<f64>, c: &Expr<f64>, spec: &MixedSpec<f64>) {
        for line in &spec.lines {
            let (fa, ca) = match line.kind {
                MixedKind::Value => (f.clone(), c.clone()),
                MixedKind::Normal(d) => (f.diff(line.axis, d), c.diff(line.axis, d)),
                MixedKind::Tangential => (f.diff(1 - line.axis, 1), c.diff(1 - line.axis, 1)),
            };
            for i in 0..=10 {
                let t = i as f64 / 10.0;
                let mut p = [t, t];
                p[line.axis] = line.point;
                let r = fa.eval(&p).unwrap() - ca.eval(&p).unwrap();
                assert!(r.abs() < 1e-10, "{line:?} at {p:?}: {r}");
            }
        }
    }

    #[test]
    fn literal_mixed_lines() {
        let c = e("x^3*y^2 - 2*x*y + y^3 + 0.5*x^2");
        let k = [(Y, 0.0, MixedKind::Value), (Y, 0.5, MixedKind::Tangential), (Y, 1.0, MixedKind::Value)];
        let j = [(X, 0.0, MixedKind::Tangential), (X, 0.5, MixedKind::Tangential), (X, 1.0, MixedKind::Value)];
        let lines: Vec<_> = k.iter().chain(&j).copied().collect();
        let spec = MixedSpec::from_global(&c, Rect::unit(), &lines);
        let out = mixed_ce(&spec, &Expr::zero()).unwrap();
        assert_eq!(out.embedded_tangential, vec![1, 3, 4]);
        check(&out.expr, &c, &spec);
        let out = mixed_ce(&spec, &e("sin(4*x*y) + x^5")).unwrap();
        check(&out.expr, &c, &spec);
    }

    #[test]
    fn normal_derivative_lines() {
        let c = e("x^3*y^2 - 2*x*y + y^3 + 0.5*x^2");
        let lines = [
            (Y, 0.0, MixedKind::Value),
            (Y, 0.25, MixedKind::Normal(1)),
            (Y, 1.0, MixedKind::Value),
            (X, 0.0, MixedKind::Normal(1)),
            (X, 0.5, MixedKind::Normal(1)),
            (X, 1.0, MixedKind::Value),
        ];
        let spec = MixedSpec::from_global(&c, Rect::unit(), &lines);
        for g in ["0", "cos(3*x + y) - x*y^4"] {
            let out = mixed_ce(&spec, &e(g)).unwrap();
            assert!(out.embedded_tangential.is_empty());
            check(&out.expr, &c, &spec);
        }
    }

    #[test]
    fn slice_in_wrong_variable() {
        let spec = MixedSpec {
            rect: Rect::unit(),
            lines: vec![MixedLine { axis: X, point: 0.0, kind: MixedKind::Value, slice: e("x + y") }],
        };
        assert!(matches!(mixed_ce(&spec, &Expr::zero()), Err(BivariateError::SliceVariables { .. })));
    }
}
