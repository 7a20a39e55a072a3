use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::constraints::{CompatibilityReport, ConstraintSet, DEFAULT_COMPATIBILITY_TOL};
use crate::expr::Expr;
use crate::scalar::Scalar;

use super::mtensor::{build_m, MSource, MTensor, MultiIndex};
use super::vvector::{build_v, VVector};
use super::{TensorError, MAX_PARTIAL_ORDER};

/// What to do when the slice table fails the intersection check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompatibilityPolicy {
    /// Refuse to assemble.
    #[default]
    Reject,
    /// Assemble anyway and keep the failing report on the result.
    Flag,
}

#[derive(Debug, Clone)]
pub struct AssembleOptions<T> {
    pub policy: CompatibilityPolicy,
    pub tol: T,
    /// Per-axis basis override for the α solve.
    pub bases: Vec<Option<Vec<Expr<T>>>>,
    /// Complete v vectors, bypassing the α solve.
    pub vectors: Option<Vec<VVector<T>>>,
}

impl<T: Scalar> Default for AssembleOptions<T> {
    fn default() -> Self {
        AssembleOptions {
            policy: CompatibilityPolicy::default(),
            tol: T::of(DEFAULT_COMPATIBILITY_TOL),
            bases: Vec::new(),
            vectors: None,
        }
    }
}

/// One nonzero term `∂D_I · Π_k ∂v_k[i_k]` of a differentiated contraction.
#[derive(Debug)]
struct Term<T> {
    coeff: Expr<T>,
    factors: Vec<Expr<T>>,
}

#[derive(Debug)]
struct PartialPlan<T> {
    terms: Vec<Term<T>>,
    g: Expr<T>,
}

impl<T: Scalar> PartialPlan<T> {
    fn eval(&self, at: &[T]) -> Result<T, TensorError> {
        let mut total = self.g.eval(at)?;
        for t in &self.terms {
            let mut w = T::one();
            for f in &t.factors {
                w = w * f.eval(at)?;
                if w == T::zero() {
                    break;
                }
            }
            if w != T::zero() {
                total = total + t.coeff.eval(at)? * w;
            }
        }
        Ok(total)
    }
}

/// `f = M(c) v.. + g - M(g) v..`, ready for evaluation.
///
/// Derivative plans are built on first use per multi-index and shared across
/// threads; concurrent evaluations see identical values.
#[derive(Debug)]
pub struct ConstrainedExpression<T> {
    set: ConstraintSet<T>,
    vectors: Vec<VVector<T>>,
    m_c: MTensor<T>,
    m_g: MTensor<T>,
    g: Expr<T>,
    combined: MTensor<T>,
    report: Option<CompatibilityReport<T>>,
    plans: RwLock<HashMap<Vec<u32>, Arc<PartialPlan<T>>>>,
}

impl<T: Scalar> Clone for ConstrainedExpression<T> {
    fn clone(&self) -> Self {
        let plans = self.plans.read().map(|p| p.clone()).unwrap_or_default();
        ConstrainedExpression {
            set: self.set.clone(),
            vectors: self.vectors.clone(),
            m_c: self.m_c.clone(),
            m_g: self.m_g.clone(),
            g: self.g.clone(),
            combined: self.combined.clone(),
            report: self.report.clone(),
            plans: RwLock::new(plans),
        }
    }
}

/// Assembles with default options (monomial bases, reject incompatible data).
pub fn assemble<T: Scalar>(set: &ConstraintSet<T>, g: Expr<T>) -> Result<ConstrainedExpression<T>, TensorError> {
    assemble_with(set, g, AssembleOptions::default())
}

pub fn assemble_with<T: Scalar>(
    set: &ConstraintSet<T>,
    g: Expr<T>,
    options: AssembleOptions<T>,
) -> Result<ConstrainedExpression<T>, TensorError> {
    let n = set.dim();
    let report = set.validate_compatibility(options.tol);
    if !report.passed && options.policy == CompatibilityPolicy::Reject {
        let worst = report
            .failures()
            .max_by(|a, b| {
                let (x, y) = (a.mismatch.clone().unwrap_or(T::infinity()), b.mismatch.clone().unwrap_or(T::infinity()));
                x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("failed report has a failure");
        let location = format!(
            "axis {} (p = {}, d = {}) x axis {} (p = {}, d = {}) at {:?}",
            worst.first.axis + 1,
            worst.first.point,
            worst.first.order,
            worst.second.axis + 1,
            worst.second.point,
            worst.second.order,
            worst.point
        );
        let mismatch = worst.mismatch.clone().map(|m| m.as_f64()).unwrap_or(f64::INFINITY);
        return Err(TensorError::Incompatible { mismatch, location });
    }
    let vectors = match options.vectors {
        Some(v) => {
            if v.len() != n {
                return Err(TensorError::VectorLength { axis: 0, expected: n, got: v.len() });
            }
            for (k, vk) in v.iter().enumerate() {
                if vk.len() != set.count(k) + 1 {
                    return Err(TensorError::VectorLength { axis: k + 1, expected: set.count(k) + 1, got: vk.len() });
                }
            }
            v
        }
        None => (0..n)
            .map(|k| build_v(set, k, options.bases.get(k).and_then(|b| b.as_deref())))
            .collect::<Result<_, _>>()?,
    };
    let m_c = build_m(set, MSource::Slices);
    let report = if report.passed { None } else { Some(report) };
    Ok(ConstrainedExpression::from_parts(set.clone(), vectors, m_c, g, report))
}

impl<T: Scalar> ConstrainedExpression<T> {
    fn from_parts(
        set: ConstraintSet<T>,
        vectors: Vec<VVector<T>>,
        m_c: MTensor<T>,
        g: Expr<T>,
        report: Option<CompatibilityReport<T>>,
    ) -> Self {
        let m_g = build_m(&set, MSource::Function(&g));
        let combined = m_c.zip_with(&m_g, |a, b| Expr::sub(a.clone(), b.clone()));
        ConstrainedExpression { set, vectors, m_c, m_g, g, combined, report, plans: RwLock::new(HashMap::new()) }
    }

    /// Same constraints and v vectors with a different free function.
    pub fn with_free_function(&self, g: Expr<T>) -> Self {
        Self::from_parts(self.set.clone(), self.vectors.clone(), self.m_c.clone(), g, self.report.clone())
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn constraints(&self) -> &ConstraintSet<T> {
        &self.set
    }

    pub fn vectors(&self) -> &[VVector<T>] {
        &self.vectors
    }

    pub fn m_c(&self) -> &MTensor<T> {
        &self.m_c
    }

    pub fn m_g(&self) -> &MTensor<T> {
        &self.m_g
    }

    pub fn free_function(&self) -> &Expr<T> {
        &self.g
    }

    /// Failing compatibility report when assembled under [`CompatibilityPolicy::Flag`].
    pub fn compatibility_flags(&self) -> Option<&CompatibilityReport<T>> {
        self.report.as_ref()
    }

    fn components(&self) -> Vec<Vec<Expr<T>>> {
        self.vectors.iter().map(|v| v.components.clone()).collect()
    }

    /// `A = M(c)_{i..} v_i..`, an interpolant of the constraints.
    pub fn a_expr(&self) -> Expr<T> {
        self.m_c.contract_expr(&self.components())
    }

    /// `B = g - M(g)_{i..} v_i..`, vanishing on every constraint.
    pub fn b_expr(&self) -> Expr<T> {
        Expr::sub(self.g.clone(), self.m_g.contract_expr(&self.components()))
    }

    /// The assembled `f` as a single expression.
    pub fn to_expr(&self) -> Expr<T> {
        Expr::add(self.combined.contract_expr(&self.components()), self.g.clone())
    }

    /// Symbolic `∂^δ f`.
    pub fn partial_expr(&self, delta: &[u32]) -> Result<Expr<T>, TensorError> {
        self.check_delta(delta)?;
        Ok(self.to_expr().diff_multi(delta))
    }

    pub fn eval_f(&self, at: &[T]) -> Result<T, TensorError> {
        self.eval_f_partial(at, &vec![0; self.dim()])
    }

    /// `∂^δ f` at a point; `delta[k]` is the order along axis `k`.
    pub fn eval_f_partial(&self, at: &[T], delta: &[u32]) -> Result<T, TensorError> {
        if at.len() != self.dim() {
            return Err(TensorError::PointDimension { expected: self.dim(), got: at.len() });
        }
        self.check_delta(delta)?;
        self.plan(delta).eval(at)
    }

    fn check_delta(&self, delta: &[u32]) -> Result<(), TensorError> {
        if delta.len() != self.dim() {
            return Err(TensorError::IndexDimension { expected: self.dim(), got: delta.len() });
        }
        let total: u32 = delta.iter().sum();
        if total > MAX_PARTIAL_ORDER {
            return Err(TensorError::OrderTooHigh(total));
        }
        Ok(())
    }

    fn plan(&self, delta: &[u32]) -> Arc<PartialPlan<T>> {
        if let Some(p) = self.plans.read().expect("plan cache poisoned").get(delta) {
            return p.clone();
        }
        let built = Arc::new(self.build_plan(delta));
        self.plans.write().expect("plan cache poisoned").entry(delta.to_vec()).or_insert(built).clone()
    }

    // Each entry D_I is free of the axes active in I and each blend depends
    // on its own axis only, so the derivative splits factor by factor.
    fn build_plan(&self, delta: &[u32]) -> PartialPlan<T> {
        let mut terms = Vec::new();
        for (idx, entry) in self.combined.iter() {
            if entry.is_zero() {
                continue;
            }
            if let Some(term) = self.term(&idx, entry, delta) {
                terms.push(term);
            }
        }
        PartialPlan { terms, g: self.g.diff_multi(delta) }
    }

    fn term(&self, idx: &MultiIndex, entry: &Expr<T>, delta: &[u32]) -> Option<Term<T>> {
        let mut coeff_delta = vec![0; delta.len()];
        let mut factors = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            if i == 0 {
                coeff_delta[k] = delta[k];
            } else {
                let f = self.vectors[k].components[i].diff(k, delta[k]);
                if f.is_zero() {
                    return None;
                }
                if !f.is_one() {
                    factors.push(f);
                }
            }
        }
        let coeff = entry.diff_multi(&coeff_delta);
        if coeff.is_zero() {
            return None;
        }
        Some(Term { coeff, factors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{AxisConstraint, Domain};
    use crate::expr::parse;

    fn e(s: &str) -> Expr<f64> {
        parse(s).unwrap()
    }

    fn trig_set() -> ConstraintSet<f64> {
        ConstraintSet::new(Domain::unit(2).unwrap())
            .add_constraint(AxisConstraint::sliced(1, 0.0, 0, e("sin(3*x - pi/4)*cos(pi/3)")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(1, 1.0, 0, e("sin(3*x - pi/4)*cos(4 + pi/3)")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(0, 0.0, 0, e("sin(-pi/4)*cos(4*y + pi/3)")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(0, 1.0, 0, e("sin(3 - pi/4)*cos(4*y + pi/3)")))
            .unwrap()
    }

    #[test]
    fn boundary_reproduced_for_figure_free_function() {
        let g = e("(1/3)*cos(4*pi*x)*sin(6*pi*y) - x^2*cos(2*pi*y)");
        let ce = assemble(&trig_set(), g).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let want = e("sin(3*x - pi/4)*cos(pi/3)").eval(&[t]).unwrap();
            assert!((ce.eval_f(&[t, 0.0]).unwrap() - want).abs() < 1e-12);
            let want = e("sin(3 - pi/4)*cos(4*y + pi/3)").eval(&[0.0, t]).unwrap();
            assert!((ce.eval_f(&[1.0, t]).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn symbolic_and_planned_evaluation_agree() {
        let ce = assemble(&trig_set(), e("x*y^2 + sin(x+y)")).unwrap();
        let f = ce.to_expr();
        for delta in [[0, 0], [1, 0], [0, 2], [1, 1], [2, 2]] {
            let fd = f.diff_multi(&delta);
            for s in 1..6 {
                let pt = [0.17 * s as f64, 0.11 * s as f64 + 0.05];
                let a = ce.eval_f_partial(&pt, &delta).unwrap();
                let b = fd.eval(&pt).unwrap();
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{delta:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn g_satisfying_constraints_is_returned() {
        let c = e("x^2*y + cos(y) - x");
        let set = ConstraintSet::new(Domain::unit(2).unwrap())
            .add_constraint(AxisConstraint::from_global(0, 0.0, 0, c.clone()))
            .unwrap()
            .add_constraint(AxisConstraint::from_global(1, 0.5, 1, c.clone()))
            .unwrap();
        let ce = assemble(&set, c.clone()).unwrap();
        for s in 0..10 {
            let pt = [0.1 * s as f64, 0.93 - 0.07 * s as f64];
            assert!((ce.eval_f(&pt).unwrap() - c.eval(&pt).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_set_returns_g() {
        let set = ConstraintSet::new(Domain::unit(2).unwrap());
        let ce = assemble(&set, e("x*y")).unwrap();
        assert_eq!(ce.eval_f(&[0.3, 0.5]).unwrap(), 0.15);
    }

    #[test]
    fn incompatible_data_rejected_or_flagged() {
        let set = ConstraintSet::new(Domain::unit(2).unwrap())
            .add_constraint(AxisConstraint::sliced(1, 0.0, 0, e("0")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(0, 0.0, 0, e("1")))
            .unwrap();
        match assemble(&set, Expr::zero()) {
            Err(TensorError::Incompatible { mismatch, .. }) => assert_eq!(mismatch, 1.0),
            other => panic!("{other:?}"),
        }
        let opts = AssembleOptions { policy: CompatibilityPolicy::Flag, ..Default::default() };
        let ce = assemble_with(&set, Expr::zero(), opts).unwrap();
        assert!(!ce.compatibility_flags().unwrap().passed);
    }

    #[test]
    fn derivative_argument_checks() {
        let ce = assemble(&trig_set(), Expr::zero()).unwrap();
        assert!(matches!(ce.eval_f_partial(&[0.1, 0.2], &[3, 2]), Err(TensorError::OrderTooHigh(5))));
        assert!(matches!(ce.eval_f(&[0.1]), Err(TensorError::PointDimension { .. })));
        assert!(matches!(ce.eval_f_partial(&[0.1, 0.2], &[1]), Err(TensorError::IndexDimension { .. })));
    }

    #[test]
    fn concurrent_evaluation_is_consistent() {
        let ce = Arc::new(assemble(&trig_set(), e("x*y")).unwrap());
        let serial: Vec<f64> = (0..8).map(|i| ce.eval_f_partial(&[0.1 * i as f64, 0.3], &[1, 1]).unwrap()).collect();
        let fresh = Arc::new(assemble(&trig_set(), e("x*y")).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|i| {
                let ce = fresh.clone();
                std::thread::spawn(move || ce.eval_f_partial(&[0.1 * i as f64, 0.3], &[1, 1]).unwrap())
            })
            .collect();
        let parallel: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(serial, parallel);
    }
}
