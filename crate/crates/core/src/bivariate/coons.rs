use crate::constraints::{AxisConstraint, ConstraintSet, Domain};
use crate::expr::Expr;
use crate::scalar::Scalar;

use super::{check_univariate, corner, BivariateError, X, Y};

/// `[x_i, x_f] x [y_i, y_f]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub x: (T, T),
    pub y: (T, T),
}

impl<T: Scalar> Rect<T> {
    pub fn new(x: (T, T), y: (T, T)) -> Self {
        Rect { x, y }
    }

    pub fn unit() -> Self {
        Rect { x: (T::zero(), T::one()), y: (T::zero(), T::one()) }
    }

    pub fn domain(&self) -> Result<Domain<T>, BivariateError> {
        Ok(Domain::new(&[self.x, self.y])?)
    }
}

/// The four Dirichlet boundary curves of a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSlices<T> {
    /// `c(x_i, y)`
    pub left: Expr<T>,
    /// `c(x_f, y)`
    pub right: Expr<T>,
    /// `c(x, y_i)`
    pub bottom: Expr<T>,
    /// `c(x, y_f)`
    pub top: Expr<T>,
}

impl<T: Scalar> EdgeSlices<T> {
    pub fn from_global(c: &Expr<T>, rect: &Rect<T>) -> Self {
        EdgeSlices {
            left: c.substitute(X, rect.x.0),
            right: c.substitute(X, rect.x.1),
            bottom: c.substitute(Y, rect.y.0),
            top: c.substitute(Y, rect.y.1),
        }
    }

    fn validate(&self) -> Result<(), BivariateError> {
        check_univariate(&self.left, Y)?;
        check_univariate(&self.right, Y)?;
        check_univariate(&self.bottom, X)?;
        check_univariate(&self.top, X)
    }

    /// Corner values `[[c(x_i,y_i), c(x_i,y_f)], [c(x_f,y_i), c(x_f,y_f)]]`,
    /// checked for agreement between the two curves meeting there.
    pub fn corners(&self, rect: &Rect<T>) -> Result<[[T; 2]; 2], BivariateError> {
        self.validate()?;
        let mut out = [[T::zero(); 2]; 2];
        for (i, (vert, xv)) in [(&self.left, rect.x.0), (&self.right, rect.x.1)].into_iter().enumerate() {
            for (j, (horiz, yv)) in [(&self.bottom, rect.y.0), (&self.top, rect.y.1)].into_iter().enumerate() {
                out[i][j] = corner(|| format!("({xv}, {yv})"), &vert.substitute(Y, yv), &horiz.substitute(X, xv))?;
            }
        }
        Ok(out)
    }

    /// Equivalent Dirichlet constraint set for the tensor engine.
    pub fn constraint_set(&self, rect: &Rect<T>) -> Result<ConstraintSet<T>, BivariateError> {
        Ok(ConstraintSet::new(rect.domain()?)
            .add_constraint(AxisConstraint::sliced(X, rect.x.0, 0, self.left.clone()))?
            .add_constraint(AxisConstraint::sliced(X, rect.x.1, 0, self.right.clone()))?
            .add_constraint(AxisConstraint::sliced(Y, rect.y.0, 0, self.bottom.clone()))?
            .add_constraint(AxisConstraint::sliced(Y, rect.y.1, 0, self.top.clone()))?)
    }
}

fn k<T: Scalar>(v: T) -> Expr<T> {
    Expr::constant(v)
}

/// Coons surface on the unit square.
pub fn coons<T: Scalar>(s: &EdgeSlices<T>) -> Result<Expr<T>, BivariateError> {
    let c = s.corners(&Rect::unit())?;
    let (x, y) = (Expr::var(X), Expr::var(Y));
    let one = Expr::one;
    let (ox, oy) = (one() - &x, one() - &y);
    Ok(&ox * &s.left + &x * &s.right + &oy * &s.bottom + &y * &s.top
        - &x * &y * k(c[1][1])
        - &ox * &oy * k(c[0][0])
        - &ox * &y * k(c[0][1])
        - &x * &oy * k(c[1][0]))
}

/// Dirichlet constrained expression on a generic rectangle.
pub fn toc_dirichlet_rect<T: Scalar>(
    s: &EdgeSlices<T>,
    g: &Expr<T>,
    rect: &Rect<T>,
) -> Result<Expr<T>, BivariateError> {
    let c = s.corners(rect)?;
    let (xi, xf) = rect.x;
    let (yi, yf) = rect.y;
    let (x, y) = (Expr::var(X), Expr::var(Y));
    let bx_i = (&x - k(xf)) / k(xi - xf);
    let bx_f = (&x - k(xi)) / k(xf - xi);
    let by_i = (&y - k(yf)) / k(yi - yf);
    let by_f = (&y - k(yi)) / k(yf - yi);
    let mut gc = [[T::zero(); 2]; 2];
    for (i, xv) in [xi, xf].into_iter().enumerate() {
        for (j, yv) in [yi, yf].into_iter().enumerate() {
            gc[i][j] = g.substitute(X, xv).substitute(Y, yv).eval(&[])?;
        }
    }
    let gx = |xv: T| g.substitute(X, xv);
    let gy = |yv: T| g.substitute(Y, yv);
    let f = g.clone()
        + &bx_i * (&s.left - gx(xi))
        + &bx_f * (&s.right - gx(xf))
        + &by_i * (&s.bottom - gy(yi))
        + &by_f * (&s.top - gy(yf))
        - &bx_i * &by_i * (k(c[0][0] - gc[0][0]))
        - &bx_i * &by_f * (k(c[0][1] - gc[0][1]))
        - &bx_f * &by_i * (k(c[1][0] - gc[1][0]))
        - &bx_f * &by_f * (k(c[1][1] - gc[1][1]));
    Ok(f)
}
