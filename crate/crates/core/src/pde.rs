//! Linear PDEs on rectangles by least squares over a constrained expression.
//!
//! The free function is expanded as `g = Σ ξ_j φ_j` in tensor Chebyshev
//! polynomials. Since `f` is affine in `g`, the collocated residual is affine
//! in `ξ` and the boundary conditions hold for every `ξ`.

use thiserror::Error;

use crate::constraints::{ConstraintSet, Domain};
use crate::expr::{EvalError, Expr};
use crate::linalg::{Mat, PivotedQr};
use crate::scalar::{linspace, Scalar};
use crate::tensor::{assemble, assemble_with, AssembleOptions, ConstrainedExpression, TensorError};

/// Columns whose `B` image is below this fraction of the largest are dropped.
pub const PRUNE_TOL: f64 = 1e-10;
/// Relative pivot threshold for the numerical rank.
pub const RANK_TOL: f64 = 1e-11;
const BOUNDARY_SAMPLES: usize = 51;
const VERIFY_POINTS: usize = 23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("PDE problems are bivariate, got a {0}-dimensional domain")]
    Dimension(usize),
    #[error("basis degree must be at least 1")]
    DegreeZero,
    #[error("operator term {delta:?} exceeds second order along an axis")]
    OperatorOrder { delta: Vec<u32> },
    #[error("{points} collocation points for {unknowns} unknowns")]
    TooFewPoints { points: usize, unknowns: usize },
    #[error("collocation matrix is rank deficient: effective rank {rank} of {columns} columns")]
    RankDeficient { rank: usize, columns: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `coeff(x, y) · ∂^δ f`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm<T> {
    pub delta: Vec<u32>,
    pub coeff: Expr<T>,
}

impl<T: Scalar> OperatorTerm<T> {
    pub fn new(delta: &[u32], coeff: Expr<T>) -> Self {
        OperatorTerm { delta: delta.to_vec(), coeff }
    }
}

/// `Σ coeff_δ ∂^δ f = source` subject to `constraints`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem<T> {
    pub operator: Vec<OperatorTerm<T>>,
    pub source: Expr<T>,
    pub constraints: ConstraintSet<T>,
    pub degree: usize,
    /// Collocation nodes per axis; `None` picks a square grid with about
    /// twice as many points as basis functions.
    pub grid: Option<[usize; 2]>,
}

/// `∇²` as operator terms.
pub fn laplacian<T: Scalar>() -> Vec<OperatorTerm<T>> {
    vec![OperatorTerm::new(&[2, 0], Expr::one()), OperatorTerm::new(&[0, 2], Expr::one())]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction<T> {
    /// Chebyshev degrees along x and y.
    pub degrees: (usize, usize),
    pub expr: Expr<T>,
}

/// Monomial coefficients of `T_n`, lowest power first.
pub fn chebyshev_coefficients(n: usize) -> Vec<i64> {
    let (mut prev, mut cur) = (vec![1i64], vec![0i64, 1]);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let mut next = vec![0i64; cur.len() + 1];
        for (k, &c) in cur.iter().enumerate() {
            next[k + 1] += 2 * c;
        }
        for (k, &c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `T_n` of the affine map of `[lo, hi]` onto `[-1, 1]` along `axis`.
pub fn chebyshev<T: Scalar>(axis: usize, n: usize, (lo, hi): (T, T)) -> Expr<T> {
    let two = T::of(2.0);
    let t = Expr::constant(two / (hi - lo)) * Expr::var(axis) - Expr::constant((hi + lo) / (hi - lo));
    chebyshev_coefficients(n)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c != 0)
        .map(|(k, c)| Expr::constant(T::of_int(c)) * Expr::powi(t.clone(), k as i32))
        .sum()
}

/// `T_a(x̂) T_b(ŷ)` with `a + b ≤ degree`, ordered by total degree.
pub fn make_basis<T: Scalar>(domain: &Domain<T>, degree: usize) -> Vec<BasisFunction<T>> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for s in 0..=degree {
        for a in (0..=s).rev() {
            let b = s - a;
            let expr = chebyshev(0, a, domain.interval(0)) * chebyshev(1, b, domain.interval(1));
            out.push(BasisFunction { degrees: (a, b), expr });
        }
    }
    out
}

/// Chebyshev–Gauss–Lobatto nodes on `[lo, hi]`, ascending.
pub fn cgl_nodes<T: Scalar>(n: usize, (lo, hi): (T, T)) -> Vec<T> {
    if n == 1 {
        return vec![(lo + hi) / T::of(2.0)];
    }
    let half = (hi - lo) / T::of(2.0);
    (0..n)
        .map(|k| {
            let theta = T::PI() * T::of_int((n - 1 - k) as i64) / T::of_int(n as i64 - 1);
            lo + half * (T::one() + theta.cos())
        })
        .collect()
}

/// The collocated linear system before solving.
#[derive(Debug)]
pub struct PdeSystem<T> {
    pub problem: PdeProblem<T>,
    pub basis: Vec<BasisFunction<T>>,
    pub points: Vec<[T; 2]>,
    /// Row `i`, column `j`: `L[B φ_j]` at point `i`.
    pub matrix: Mat<T>,
    /// `s - L[A]` at each point.
    pub rhs: Vec<T>,
    /// Indices of basis functions whose `B` image is numerically zero.
    pub pruned: Vec<usize>,
    particular: ConstrainedExpression<T>,
}

fn apply_operator<T: Scalar>(
    op: &[OperatorTerm<T>],
    ce: &ConstrainedExpression<T>,
    at: &[T; 2],
) -> Result<T, PdeError> {
    let mut acc = T::zero();
    for term in op {
        acc = acc + term.coeff.eval(at)? * ce.eval_f_partial(at, &term.delta)?;
    }
    Ok(acc)
}

impl<T: Scalar> PdeSystem<T> {
    pub fn new(problem: PdeProblem<T>) -> Result<Self, PdeError> {
        let domain = problem.constraints.domain().clone();
        if domain.dim() != 2 {
            return Err(PdeError::Dimension(domain.dim()));
        }
        if problem.degree == 0 {
            return Err(PdeError::DegreeZero);
        }
        for term in &problem.operator {
            if term.delta.len() != 2 || term.delta.iter().any(|&d| d > 2) {
                return Err(PdeError::OperatorOrder { delta: term.delta.clone() });
            }
        }
        let basis = make_basis(&domain, problem.degree);
        let [nx, ny] = problem.grid.unwrap_or_else(|| {
            let n = ((2 * basis.len()) as f64).sqrt().ceil() as usize;
            [n, n]
        });
        let (xs, ys) = (cgl_nodes(nx, domain.interval(0)), cgl_nodes(ny, domain.interval(1)));
        let points: Vec<[T; 2]> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect();
        if points.len() < basis.len() {
            return Err(PdeError::TooFewPoints { points: points.len(), unknowns: basis.len() });
        }

        let particular = assemble(&problem.constraints, Expr::zero())?;
        let options = AssembleOptions { vectors: Some(particular.vectors().to_vec()), ..AssembleOptions::default() };
        let homogeneous = assemble_with(&problem.constraints.homogeneous(), Expr::zero(), options)?;

        let mut matrix = Mat::zeros(points.len(), basis.len());
        for (j, phi) in basis.iter().enumerate() {
            let b = homogeneous.with_free_function(phi.expr.clone());
            for (i, p) in points.iter().enumerate() {
                matrix[(i, j)] = apply_operator(&problem.operator, &b, p)?;
            }
        }
        let rhs = points
            .iter()
            .map(|p| Ok(problem.source.eval(p)? - apply_operator(&problem.operator, &particular, p)?))
            .collect::<Result<Vec<T>, PdeError>>()?;

        let norms: Vec<T> =
            (0..basis.len()).map(|j| matrix.column(j).iter().map(|v| *v * *v).sum::<T>().sqrt()).collect();
        let biggest = norms.iter().fold(T::zero(), |a, &b| a.max(b));
        let pruned = (0..basis.len()).filter(|&j| norms[j] <= T::of(PRUNE_TOL) * biggest).collect();
        Ok(PdeSystem { problem, basis, points, matrix, rhs, pruned, particular })
    }

    /// Least-squares `ξ`; pruned entries are zero.
    pub fn solve(&self) -> Result<Vec<T>, PdeError> {
        let keep: Vec<usize> = (0..self.basis.len()).filter(|j| !self.pruned.contains(j)).collect();
        let mut xi = vec![T::zero(); self.basis.len()];
        if keep.is_empty() {
            return Ok(xi);
        }
        let mut a = Mat::zeros(self.points.len(), keep.len());
        let mut scale = Vec::with_capacity(keep.len());
        for (c, &j) in keep.iter().enumerate() {
            let col = self.matrix.column(j);
            let s = col.iter().map(|v| *v * *v).sum::<T>().sqrt();
            for (i, v) in col.into_iter().enumerate() {
                a[(i, c)] = v / s;
            }
            scale.push(s);
        }
        let qr = PivotedQr::new(&a);
        let rank = qr.rank(T::of(RANK_TOL));
        if rank < keep.len() {
            return Err(PdeError::RankDeficient { rank, columns: keep.len() });
        }
        let z = qr.solve(&self.rhs, rank);
        for (c, &j) in keep.iter().enumerate() {
            xi[j] = z[c] / scale[c];
        }
        Ok(xi)
    }

    /// `g = Σ ξ_j φ_j`.
    pub fn free_function(&self, xi: &[T]) -> Expr<T> {
        self.basis
            .iter()
            .zip(xi)
            .filter(|(_, &c)| c != T::zero())
            .map(|(phi, &c)| Expr::constant(c) * phi.expr.clone())
            .sum()
    }

    /// The constrained expression for coefficients `xi`.
    pub fn constrained(&self, xi: &[T]) -> ConstrainedExpression<T> {
        self.particular.with_free_function(self.free_function(xi))
    }

    /// Collocated PDE residuals `L[f] - s` for coefficients `xi`.
    pub fn residuals(&self, xi: &[T]) -> Result<Vec<T>, PdeError> {
        let ax = self.matrix.mul_vec(xi);
        Ok(ax.iter().zip(&self.rhs).map(|(&a, &b)| a - b).collect())
    }

    pub fn pde_residual_at(&self, ce: &ConstrainedExpression<T>, at: &[T; 2]) -> Result<T, PdeError> {
        Ok(apply_operator(&self.problem.operator, ce, at)? - self.problem.source.eval(at)?)
    }
}

/// Largest `|∂^d f - slice|` over sample lines of every constraint.
pub fn boundary_residual<T: Scalar>(ce: &ConstrainedExpression<T>) -> Result<T, PdeError> {
    let set = ce.constraints();
    let mut worst = T::zero();
    for axis in 0..set.dim() {
        let other = 1 - axis;
        let (lo, hi) = set.domain().interval(other);
        for s in set.axis(axis) {
            let mut delta = [0, 0];
            delta[axis] = s.constraint.order;
            for t in linspace(lo, hi, BOUNDARY_SAMPLES) {
                let mut at = [t, t];
                at[axis] = s.constraint.point;
                let r = (ce.eval_f_partial(&at, &delta)? - s.slice.eval(&at)?).abs();
                worst = worst.max(r);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug)]
pub struct PdeSolution<T> {
    pub xi: Vec<T>,
    pub ce: ConstrainedExpression<T>,
    pub expr: Expr<T>,
    /// 2-norm of the residual at the collocation points.
    pub residual_norm: T,
    /// Largest `|L[f] - s|` on a uniform verification grid.
    pub verification_residual: T,
    pub boundary_residual: T,
    pub basis_size: usize,
    pub pruned: usize,
}

/// Interior points of a uniform grid that avoids the collocation nodes.
pub fn verification_points<T: Scalar>(domain: &Domain<T>) -> Vec<[T; 2]> {
    let inner = |(lo, hi): (T, T)| {
        let all = linspace(lo, hi, VERIFY_POINTS + 2);
        all[1..=VERIFY_POINTS].to_vec()
    };
    let (xs, ys) = (inner(domain.interval(0)), inner(domain.interval(1)));
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect()
}

pub fn solve<T: Scalar>(problem: PdeProblem<T>) -> Result<PdeSolution<T>, PdeError> {
    let system = PdeSystem::new(problem)?;
    let xi = system.solve()?;
    let residual_norm = system.residuals(&xi)?.iter().map(|r| *r * *r).sum::<T>().sqrt();
    let ce = system.constrained(&xi);
    let mut verification_residual = T::zero();
    for p in verification_points(system.problem.constraints.domain()) {
        verification_residual = verification_residual.max(system.pde_residual_at(&ce, &p)?.abs());
    }
    let boundary_residual = boundary_residual(&ce)?;
    Ok(PdeSolution {
        expr: ce.to_expr(),
        xi,
        ce,
        residual_norm,
        verification_residual,
        boundary_residual,
        basis_size: system.basis.len(),
        pruned: system.pruned.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::AxisConstraint;
    use crate::expr::parse;

    fn e(s: &str) -> Expr<f64> {
        parse(s).unwrap()
    }

    fn dirichlet(c: &Expr<f64>) -> ConstraintSet<f64> {
        let mut set = ConstraintSet::new(Domain::unit(2).unwrap());
        for axis in 0..2 {
            for p in [0.0, 1.0] {
                set.push(AxisConstraint::from_global(axis, p, 0, c.clone())).unwrap();
            }
        }
        set
    }

    #[test]
    fn chebyshev_polynomials() {
        assert_eq!(chebyshev_coefficients(0), vec![1]);
        assert_eq!(chebyshev_coefficients(3), vec![0, -3, 0, 4]);
        assert_eq!(chebyshev_coefficients(4), vec![1, 0, -8, 0, 8]);
        let t5 = chebyshev::<f64>(0, 5, (-1.0, 1.0));
        for i in 0..7 {
            let x: f64 = -1.0 + i as f64 / 3.0;
            assert!((t5.eval(&[x]).unwrap() - (5.0 * x.acos()).cos()).abs() < 1e-13);
        }
        let mapped = chebyshev::<f64>(1, 2, (2.0, 4.0));
        assert!((mapped.eval(&[0.0, 4.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!((mapped.eval(&[0.0, 3.0]).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn basis_sizes() {
        let d = Domain::unit(2).unwrap();
        let b1 = make_basis::<f64>(&d, 1);
        assert_eq!(b1.iter().map(|b| b.degrees).collect::<Vec<_>>(), vec![(0, 0), (1, 0), (0, 1)]);
        assert_eq!(make_basis::<f64>(&d, 2).len(), 6);
        assert_eq!(make_basis::<f64>(&d, 7).len(), 36);
    }

    #[test]
    fn basis_gram_matrix_full_rank() {
        let d = Domain::unit(2).unwrap();
        let basis = make_basis::<f64>(&d, 6);
        let pts: Vec<f64> = linspace(0.0, 1.0, 15);
        let mut m = Mat::zeros(pts.len() * pts.len(), basis.len());
        for (i, &x) in pts.iter().enumerate() {
            for (k, &y) in pts.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    m[(i * pts.len() + k, j)] = b.expr.eval(&[x, y]).unwrap();
                }
            }
        }
        assert_eq!(PivotedQr::new(&m).rank(1e-12), basis.len());
    }

    #[test]
    fn cgl_nodes_include_ends() {
        let n = cgl_nodes::<f64>(5, (0.0, 2.0));
        assert_eq!(n.len(), 5);
        assert!(n[0].abs() < 1e-15 && (n[4] - 2.0).abs() < 1e-15 && (n[2] - 1.0).abs() < 1e-15);
        assert!(n.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_problem_gives_zero() {
        let problem = PdeProblem {
            operator: laplacian(),
            source: Expr::zero(),
            constraints: dirichlet(&Expr::zero()),
            degree: 4,
            grid: None,
        };
        let sol = solve(problem).unwrap();
        assert!(sol.xi.iter().all(|x| x.abs() < 1e-14));
        assert!(sol.residual_norm < 1e-14);
    }

    #[test]
    fn harmonic_boundary_data() {
        let h = e("x^2 - y^2");
        let problem = PdeProblem {
            operator: laplacian(),
            source: Expr::zero(),
            constraints: dirichlet(&h),
            degree: 6,
            grid: None,
        };
        let sol = solve(problem).unwrap();
        for p in verification_points(&Domain::unit(2).unwrap()) {
            assert!((sol.ce.eval_f(&p).unwrap() - h.eval(&p).unwrap()).abs() < 1e-8);
        }
        assert!(sol.boundary_residual < 1e-12);
    }

    #[test]
    fn operator_order_checked() {
        let problem = PdeProblem {
            operator: vec![OperatorTerm::new(&[3, 0], Expr::one())],
            source: Expr::zero(),
            constraints: dirichlet(&Expr::zero()),
            degree: 2,
            grid: None,
        };
        assert!(matches!(PdeSystem::new(problem), Err(PdeError::OperatorOrder { .. })));
    }

    #[test]
    fn too_few_points() {
        let problem = PdeProblem {
            operator: laplacian(),
            source: Expr::zero(),
            constraints: dirichlet(&Expr::zero()),
            degree: 5,
            grid: Some([3, 3]),
        };
        assert!(matches!(PdeSystem::new(problem), Err(PdeError::TooFewPoints { .. })));
    }
}
