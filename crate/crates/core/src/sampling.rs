//! Random polynomial data for property checks and verification sweeps.

use rand::Rng;

use crate::constraints::{AxisConstraint, ConstraintSet, Domain};
use crate::expr::Expr;
use crate::scalar::Scalar;
use crate::tensor::{build_v, ConstrainedExpression, TensorError};

/// Candidate constraint locations per axis, as fractions of the interval.
const POINT_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Exponent tuples of all monomials in `n` variables with total degree ≤ `degree`.
pub fn monomial_exponents(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fill(&mut out, &mut cur, 0, degree);
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, axis: usize, left: u32) {
    if axis == cur.len() {
        out.push(cur.clone());
        return;
    }
    for e in 0..=left {
        cur[axis] = e;
        fill(out, cur, axis + 1, left - e);
    }
    cur[axis] = 0;
}

/// `Π x_k^{e_k}`.
pub fn monomial<T: Scalar>(exponents: &[u32]) -> Expr<T> {
    exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .fold(Expr::one(), |acc, (k, &e)| Expr::mul(acc, Expr::powi(Expr::var(k), e as i32)))
}

/// Dense polynomial with coefficients uniform in `[-1, 1]`.
pub fn random_polynomial<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, degree: u32) -> Expr<T> {
    monomial_exponents(n, degree)
        .iter()
        .map(|ex| Expr::mul(Expr::constant(T::of(rng.gen_range(-1.0..=1.0))), monomial(ex)))
        .sum()
}

/// Polynomial of degree ≤ `degree` in each variable separately.
pub fn random_tensor_polynomial<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, degree: u32) -> Expr<T> {
    let mut terms = Vec::new();
    let mut ex = vec![0u32; n];
    loop {
        terms.push(Expr::mul(Expr::constant(T::of(rng.gen_range(-1.0..=1.0))), monomial(&ex)));
        let mut k = 0;
        while k < n {
            ex[k] += 1;
            if ex[k] <= degree {
                break;
            }
            ex[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    terms.into_iter().sum()
}

/// Uniform point of the domain.
pub fn random_point<T: Scalar, R: Rng + ?Sized>(rng: &mut R, domain: &Domain<T>) -> Vec<T> {
    domain
        .intervals()
        .iter()
        .map(|&(lo, hi)| {
            let u = T::of(rng.gen_range(0.0..=1.0));
            lo + (hi - lo) * u
        })
        .collect()
}

/// Random constraint set on `domain` with slices read off `c`.
///
/// Each axis gets up to `max_per_axis` constraints of order ≤ `max_order`
/// at distinct (point, order) pairs drawn from a fixed set of interval
/// fractions. Axes whose functionals admit no monomial blend are redrawn, so
/// the result always assembles. At least one constraint is present.
pub fn random_constraint_set<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    domain: &Domain<T>,
    max_per_axis: usize,
    max_order: u32,
    c: &Expr<T>,
) -> ConstraintSet<T> {
    loop {
        let mut set = ConstraintSet::new(domain.clone());
        for axis in 0..domain.dim() {
            let (lo, hi) = domain.interval(axis);
            loop {
                let mut trial = set.clone();
                let count = rng.gen_range(0..=max_per_axis);
                let mut pairs: Vec<(usize, u32)> = Vec::new();
                while pairs.len() < count {
                    let pair = (rng.gen_range(0..POINT_FRACTIONS.len()), rng.gen_range(0..=max_order));
                    if !pairs.contains(&pair) {
                        pairs.push(pair);
                    }
                }
                for (i, d) in pairs {
                    let p = lo + (hi - lo) * T::of(POINT_FRACTIONS[i]);
                    // distinct pairs on an empty axis cannot clash
                    let _ = trial.push(AxisConstraint::from_global(axis, p, d, c.clone()));
                }
                if build_v(&trial, axis, None).is_ok() {
                    set = trial;
                    break;
                }
            }
        }
        if !set.is_empty() {
            return set;
        }
    }
}

/// Largest `|∂^d f - slice|` over `samples` random points on each constraint
/// hyperplane.
pub fn max_constraint_residual<T: Scalar, R: Rng + ?Sized>(
    ce: &ConstrainedExpression<T>,
    rng: &mut R,
    samples: usize,
) -> Result<T, TensorError> {
    let set = ce.constraints();
    let dim = set.dim();
    let mut worst = T::zero();
    for s in set.iter() {
        let c = &s.constraint;
        let mut delta = vec![0; dim];
        delta[c.axis] = c.order;
        for _ in 0..samples {
            let mut p = random_point(rng, set.domain());
            p[c.axis] = c.point;
            let r = (ce.eval_f_partial(&p, &delta)? - s.slice.eval(&p)?).abs();
            if r.is_nan() {
                return Ok(T::infinity());
            }
            worst = worst.max(r);
        }
    }
    Ok(worst)
}
