use crate::constraints::{AxisConstraint, ConstraintSet, Domain};
use crate::expr::{parse, Expr};
use crate::scalar::Scalar;
use crate::tensor::MTensor;

use super::{check_univariate, corner, BivariateError, X, Y};

/// Values and normal derivatives on the four edges of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSlices<T> {
    /// `c(x, 0)`, `c_y(x, 0)`, `c(x, 1)`, `c_y(x, 1)`
    pub bottom: Expr<T>,
    pub bottom_dy: Expr<T>,
    pub top: Expr<T>,
    pub top_dy: Expr<T>,
    /// `c(0, y)`, `c_x(0, y)`, `c(1, y)`, `c_x(1, y)`
    pub left: Expr<T>,
    pub left_dx: Expr<T>,
    pub right: Expr<T>,
    pub right_dx: Expr<T>,
}

impl<T: Scalar> HermiteSlices<T> {
    pub fn from_global(c: &Expr<T>) -> Self {
        let (cx, cy) = (c.diff(X, 1), c.diff(Y, 1));
        HermiteSlices {
            bottom: c.substitute(Y, T::zero()),
            bottom_dy: cy.substitute(Y, T::zero()),
            top: c.substitute(Y, T::one()),
            top_dy: cy.substitute(Y, T::one()),
            left: c.substitute(X, T::zero()),
            left_dx: cx.substitute(X, T::zero()),
            right: c.substitute(X, T::one()),
            right_dx: cx.substitute(X, T::one()),
        }
    }

    /// `F^x = {c(x,0), c_y(x,0), c(x,1), c_y(x,1)}`.
    pub fn f_x(&self) -> [&Expr<T>; 4] {
        [&self.bottom, &self.bottom_dy, &self.top, &self.top_dy]
    }

    /// `F^y = {c(0,y), c_x(0,y), c(1,y), c_x(1,y)}`.
    pub fn f_y(&self) -> [&Expr<T>; 4] {
        [&self.left, &self.left_dx, &self.right, &self.right_dx]
    }

    /// Equivalent constraint set (both axes: value and slope at 0 and 1).
    pub fn constraint_set(&self) -> Result<ConstraintSet<T>, BivariateError> {
        let mut set = ConstraintSet::new(Domain::unit(2)?);
        let ops = [(T::zero(), 0), (T::zero(), 1), (T::one(), 0), (T::one(), 1)];
        for (s, &(p, d)) in self.f_y().into_iter().zip(&ops) {
            set.push(AxisConstraint::sliced(X, p, d, s.clone()))?;
        }
        for (s, &(p, d)) in self.f_x().into_iter().zip(&ops) {
            set.push(AxisConstraint::sliced(Y, p, d, s.clone()))?;
        }
        Ok(set)
    }

    /// `M^{xy}`: row `i` is the `i`-th x-functional, column `j` the `j`-th
    /// y-functional, both applied to the data. Each entry is read from the
    /// vertical and the horizontal edge and the two readings must agree.
    fn corner_matrix(&self) -> Result<[[T; 4]; 4], BivariateError> {
        for s in self.f_y() {
            check_univariate(s, Y)?;
        }
        for s in self.f_x() {
            check_univariate(s, X)?;
        }
        let ops = [(T::zero(), 0), (T::zero(), 1), (T::one(), 0), (T::one(), 1)];
        let mut m = [[T::zero(); 4]; 4];
        for (i, (vert, &(px, dx))) in self.f_y().into_iter().zip(&ops).enumerate() {
            for (j, (horiz, &(py, dy))) in self.f_x().into_iter().zip(&ops).enumerate() {
                let a = vert.diff(Y, dy).substitute(Y, py);
                let b = horiz.diff(X, dx).substitute(X, px);
                m[i][j] = corner(|| format!("({px}, {py}) d=({dx}, {dy})"), &a, &b)?;
            }
        }
        Ok(m)
    }
}

/// `{1, 2z³ - 3z² + 1, z³ - 2z² + z, -2z³ + 3z², z³ - z²}` in `axis`.
pub fn hermite_v<T: Scalar>(axis: usize) -> Vec<Expr<T>> {
    ["1", "2*z^3 - 3*z^2 + 1", "z^3 - 2*z^2 + z", "-2*z^3 + 3*z^2", "z^3 - z^2"]
        .iter()
        .map(|s| parse::<T>(s.replace('z', if axis == X { "x" } else { "y" }).as_str()).expect("static blend"))
        .collect()
}

fn assemble_m<T: Scalar>(row0: [Expr<T>; 4], col0: [Expr<T>; 4], inner: [[T; 4]; 4]) -> MTensor<T> {
    let mut entries = Vec::with_capacity(25);
    entries.push(Expr::zero());
    entries.extend(row0);
    for (i, c) in col0.into_iter().enumerate() {
        entries.push(c);
        entries.extend(inner[i].iter().map(|&v| Expr::constant(-v)));
    }
    MTensor::from_entries(vec![5, 5], entries)
}

/// The 5 x 5 matrix of slices and negated corner data.
pub fn hermite_m<T: Scalar>(s: &HermiteSlices<T>) -> Result<MTensor<T>, BivariateError> {
    let inner = s.corner_matrix()?;
    Ok(assemble_m(s.f_x().map(Expr::clone), s.f_y().map(Expr::clone), inner))
}

/// The same matrix built from a single function.
pub fn hermite_m_of<T: Scalar>(g: &Expr<T>) -> Result<MTensor<T>, BivariateError> {
    let s = HermiteSlices::from_global(g);
    let gxy = g.diff(X, 1).diff(Y, 1);
    let mut inner = [[T::zero(); 4]; 4];
    let ops = [(T::zero(), 0), (T::zero(), 1), (T::one(), 0), (T::one(), 1)];
    for (i, &(px, dx)) in ops.iter().enumerate() {
        for (j, &(py, dy)) in ops.iter().enumerate() {
            let d = match (dx, dy) {
                (0, 0) => g.clone(),
                (1, 0) => g.diff(X, 1),
                (0, 1) => g.diff(Y, 1),
                _ => gxy.clone(),
            };
            inner[i][j] = d.substitute(X, px).substitute(Y, py).eval(&[])?;
        }
    }
    Ok(assemble_m(s.f_x().map(Expr::clone), s.f_y().map(Expr::clone), inner))
}

/// `f = vᵀ(x) M(c) v(y) + g - vᵀ(x) M(g) v(y)` with the cubic Hermite blends.
pub fn hermite_coons<T: Scalar>(s: &HermiteSlices<T>, g: &Expr<T>) -> Result<Expr<T>, BivariateError> {
    let vs = [hermite_v(X), hermite_v(Y)];
    let a = hermite_m(s)?.contract_expr(&vs);
    let b = hermite_m_of(g)?.contract_expr(&vs);
    Ok(a + g.clone() - b)
}

/// Boolean-sum form `vᵀ(y) F^x + vᵀ(x) F^y - vᵀ(x) M^{xy} v(y)` (no free function).
pub fn hermite_boolean_sum<T: Scalar>(s: &HermiteSlices<T>) -> Result<Expr<T>, BivariateError> {
    let m = s.corner_matrix()?;
    let vx = &hermite_v::<T>(X)[1..];
    let vy = &hermite_v::<T>(Y)[1..];
    let mut f: Expr<T> = Expr::zero();
    for i in 0..4 {
        f = f + &vy[i] * s.f_x()[i] + &vx[i] * s.f_y()[i];
        for j in 0..4 {
            f = f - Expr::constant(m[i][j]) * &vx[i] * &vy[j];
        }
    }
    Ok(f)
}
