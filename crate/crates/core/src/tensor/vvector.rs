use crate::constraints::ConstraintSet;
use crate::expr::Expr;
use crate::linalg::{inverse_with_rcond, Mat};
use crate::scalar::Scalar;

use super::{bc_operator, TensorError};

/// Reciprocal condition number below which a functional matrix is singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Per-axis blend vector `{1, Σ α_i1 h_i, …, Σ α_iℓ h_i}`.
///
/// Component `j + 1` is annihilated by every constraint functional on the
/// axis except the `j`-th, on which it evaluates to one.
#[derive(Debug, Clone, PartialEq)]
pub struct VVector<T> {
    pub axis: usize,
    /// Basis `h_i`; empty when the vector was supplied directly.
    pub basis: Vec<Expr<T>>,
    /// Coefficients `α` (ℓ x ℓ) when solved from the basis.
    pub alpha: Option<Mat<T>>,
    /// Component list; the first entry is the constant one.
    pub components: Vec<Expr<T>>,
}

impl<T: Scalar> VVector<T> {
    /// The one-element vector of an unconstrained axis.
    pub fn unit(axis: usize) -> Self {
        VVector { axis, basis: Vec::new(), alpha: Some(Mat::zeros(0, 0)), components: vec![Expr::one()] }
    }

    /// Wraps externally supplied components (e.g. tabulated blends).
    pub fn from_components(axis: usize, components: Vec<Expr<T>>) -> Self {
        VVector { axis, basis: Vec::new(), alpha: None, components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Matrix `K[m][j] = ^k b^{d_m}_{p_m}[component_{j+1}]`; the identity when
    /// the vector is consistent with the axis constraints.
    pub fn kronecker_matrix(&self, set: &ConstraintSet<T>) -> Result<Mat<T>, TensorError> {
        let list = set.axis(self.axis);
        let l = list.len();
        let mut k = Mat::zeros(l, self.components.len().saturating_sub(1));
        for (m, s) in list.iter().enumerate() {
            for (j, comp) in self.components.iter().skip(1).enumerate() {
                let val = bc_operator(comp, self.axis, s.constraint.point, s.constraint.order);
                k[(m, j)] = val.eval(&[])?;
            }
        }
        Ok(k)
    }
}

/// Monomials `x^0 .. x^{count-1}`.
pub fn default_basis<T: Scalar>(axis: usize, count: usize) -> Vec<Expr<T>> {
    (0..count).map(|i| Expr::powi(Expr::var(axis), i as i32)).collect()
}

/// Monomials `x^1 .. x^count`, used when derivative-only constraints
/// annihilate the constant.
pub fn shifted_basis<T: Scalar>(axis: usize, count: usize) -> Vec<Expr<T>> {
    (1..=count).map(|i| Expr::powi(Expr::var(axis), i as i32)).collect()
}

/// Solves the α coefficients of `axis` and assembles its v vector.
///
/// Without an explicit basis the monomials `x^{i-1}` are tried first and,
/// if their functional matrix is singular, the shifted monomials `x^i`.
pub fn build_v<T: Scalar>(
    set: &ConstraintSet<T>,
    axis: usize,
    basis: Option<&[Expr<T>]>,
) -> Result<VVector<T>, TensorError> {
    let l = set.count(axis);
    if l == 0 {
        return Ok(VVector::unit(axis));
    }
    match basis {
        Some(b) => solve_with(set, axis, b.to_vec(), None),
        None => match solve_with(set, axis, default_basis(axis, l), None) {
            Err(TensorError::Singular { .. }) => {
                solve_with(set, axis, shifted_basis(axis, l), Some("monomials x^0.. and x^1.. both singular"))
            }
            other => other,
        },
    }
}

fn solve_with<T: Scalar>(
    set: &ConstraintSet<T>,
    axis: usize,
    basis: Vec<Expr<T>>,
    retry_note: Option<&str>,
) -> Result<VVector<T>, TensorError> {
    let list = set.axis(axis);
    let l = list.len();
    if basis.len() != l {
        return Err(TensorError::BasisLength { axis: axis + 1, expected: l, got: basis.len() });
    }
    for h in &basis {
        if h.variables().iter().any(|&v| v != axis) {
            return Err(TensorError::BasisNotUnivariate { axis: axis + 1, function: h.to_string() });
        }
    }
    let mut b = Mat::zeros(l, l);
    for (m, s) in list.iter().enumerate() {
        for (i, h) in basis.iter().enumerate() {
            b[(m, i)] = bc_operator(h, axis, s.constraint.point, s.constraint.order).eval(&[])?;
        }
    }
    let (inv, rcond) = inverse_with_rcond(&b);
    let inv = match inv {
        Some(inv) if rcond >= T::of(SINGULAR_RCOND) => inv,
        _ => {
            let zero_col = (0..l).find(|&i| (0..l).all(|m| b[(m, i)] == T::zero()));
            let mut hint = match zero_col {
                Some(i) => format!("basis function `{}` is annihilated by every constraint; ", basis[i]),
                None => String::new(),
            };
            hint.push_str(retry_note.unwrap_or("try a shifted basis h_i = x^i"));
            return Err(TensorError::Singular { axis: axis + 1, matrix: format!("{b}"), rcond: rcond.as_f64(), hint });
        }
    };
    let mut components = Vec::with_capacity(l + 1);
    components.push(Expr::one());
    for j in 0..l {
        let comp: Expr<T> = basis
            .iter()
            .enumerate()
            .filter(|(i, _)| inv[(*i, j)] != T::zero())
            .map(|(i, h)| Expr::mul(Expr::constant(inv[(i, j)]), h.clone()))
            .sum();
        components.push(comp);
    }
    Ok(VVector { axis, basis, alpha: Some(inv), components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{AxisConstraint, Domain};
    use crate::expr::parse;

    fn axis_set(spec: &[(f64, u32)]) -> ConstraintSet<f64> {
        let mut set = ConstraintSet::new(Domain::unit(1).unwrap());
        for &(p, d) in spec {
            set.push(AxisConstraint::sliced(0, p, d, Expr::zero())).unwrap();
        }
        set
    }

    fn assert_same_function(a: &Expr<f64>, b: &str) {
        let b = parse::<f64>(b).unwrap();
        for i in 0..=10 {
            let x = -0.5 + 0.2 * i as f64;
            let (va, vb) = (a.eval(&[x]).unwrap(), b.eval(&[x]).unwrap());
            assert!((va - vb).abs() < 1e-13, "{a} vs {b} at {x}");
        }
    }

    #[test]
    fn dirichlet_unit_interval_is_exact() {
        let v = build_v(&axis_set(&[(0.0, 0), (1.0, 0)]), 0, None).unwrap();
        assert_eq!(v.alpha.as_ref().unwrap().to_rows(), vec![vec![1.0, 0.0], vec![-1.0, 1.0]]);
        assert_eq!(v.components[0], Expr::one());
        assert_eq!(v.components[1].to_string(), "1 - x");
        assert_eq!(v.components[2].to_string(), "x");
    }

    #[test]
    fn neumann_falls_back_to_shifted_basis() {
        let v = build_v(&axis_set(&[(0.0, 1), (1.0, 1)]), 0, None).unwrap();
        assert_same_function(&v.components[1], "x - x^2/2");
        assert_same_function(&v.components[2], "x^2/2");
        assert_eq!(v.basis, shifted_basis(0, 2));
    }

    #[test]
    fn hermite_blends() {
        let v = build_v(&axis_set(&[(0.0, 0), (0.0, 1), (1.0, 0), (1.0, 1)]), 0, None).unwrap();
        let expected = ["2*x^3 - 3*x^2 + 1", "x^3 - 2*x^2 + x", "-2*x^3 + 3*x^2", "x^3 - x^2"];
        for (c, want) in v.components[1..].iter().zip(expected) {
            assert_same_function(c, want);
        }
    }

    #[test]
    fn kronecker_property_holds() {
        let set = axis_set(&[(0.0, 0), (0.3, 2), (0.5, 1), (1.0, 0)]);
        let v = build_v(&set, 0, None).unwrap();
        let k = v.kronecker_matrix(&set).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((k[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unconstrained_axis_gives_unit_vector() {
        let set = axis_set(&[]);
        let v = build_v(&set, 0, None).unwrap();
        assert_eq!(v.components, vec![Expr::one()]);
    }

    #[test]
    fn singular_user_basis_is_reported() {
        let set = axis_set(&[(0.0, 1), (1.0, 1)]);
        let basis = default_basis(0, 2);
        let err = build_v(&set, 0, Some(&basis)).unwrap_err();
        match err {
            TensorError::Singular { hint, matrix, .. } => {
                assert!(hint.contains("annihilated"), "{hint}");
                assert!(matrix.contains("0, 1"), "{matrix}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn second_derivative_only_needs_further_shift() {
        // d=2 at two points: x^0, x^1 vanish and so do x^1, x^2 partially -> singular
        let set = axis_set(&[(0.0, 2), (1.0, 2)]);
        assert!(matches!(build_v(&set, 0, None), Err(TensorError::Singular { .. })));
        let basis = vec![parse("x^2").unwrap(), parse("x^3").unwrap()];
        let v = build_v(&set, 0, Some(&basis)).unwrap();
        let k = v.kronecker_matrix(&set).unwrap();
        assert!((k[(0, 0)] - 1.0).abs() < 1e-14 && k[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn basis_must_be_univariate() {
        let set = axis_set(&[(0.0, 0)]);
        let basis = vec![parse("y").unwrap()];
        assert!(matches!(build_v(&set, 0, Some(&basis)), Err(TensorError::BasisNotUnivariate { .. })));
    }
}
