//! Rectangular domains, per-axis boundary constraints and cross-axis
//! compatibility checking.

use std::fmt;

use thiserror::Error;

use crate::expr::{var_name, Expr};
use crate::scalar::{linspace, Scalar};
use crate::tensor::bc_operator;

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 4;

/// Default tolerance for intersection checks.
pub const DEFAULT_COMPATIBILITY_TOL: f64 = 1e-9;

/// Samples per free axis when comparing two constraints at their intersection.
pub const INTERSECTION_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("unsupported dimension {0} (expected 1..={MAX_DIMENSION})")]
    UnsupportedDimension(usize),
    #[error("axis {axis} has a degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { axis: usize, lo: f64, hi: f64 },
    #[error("axis names must be distinct, `{0}` repeats")]
    DuplicateName(String),
    #[error("axis {axis} is out of range for a {dim}-dimensional domain")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("point {point} lies outside the interval of axis {axis}")]
    PointOutsideInterval { axis: usize, point: f64 },
    #[error("constraint (p = {point}, d = {order}) already present on axis {axis}")]
    Duplicate { axis: usize, point: f64, order: u32 },
    #[error("pre-sliced constraint on axis {axis} still depends on `{name}`")]
    SliceDependsOnAxis { axis: usize, name: String },
}

/// Axis-aligned box `[a_1, b_1] x ... x [a_n, b_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    intervals: Vec<(T, T)>,
    names: Vec<String>,
}

impl<T: Scalar> Domain<T> {
    /// Builds a domain with the default axis names (`x`, `y`, `z` or `x1..x4`).
    pub fn new(intervals: &[(T, T)]) -> Result<Self, ConstraintError> {
        let n = intervals.len();
        let names =
            if n <= 3 { (0..n).map(var_name).collect() } else { (0..n).map(|k| format!("x{}", k + 1)).collect() };
        Self::with_names(intervals, names)
    }

    pub fn with_names(intervals: &[(T, T)], names: Vec<String>) -> Result<Self, ConstraintError> {
        let n = intervals.len();
        if n == 0 || n > MAX_DIMENSION {
            return Err(ConstraintError::UnsupportedDimension(n));
        }
        for (axis, &(lo, hi)) in intervals.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(ConstraintError::DegenerateInterval { axis, lo: lo.as_f64(), hi: hi.as_f64() });
            }
        }
        assert_eq!(names.len(), n, "one name per axis");
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(ConstraintError::DuplicateName(name.clone()));
            }
        }
        Ok(Domain { intervals: intervals.to_vec(), names })
    }

    /// The unit box `[0, 1]^n`.
    pub fn unit(n: usize) -> Result<Self, ConstraintError> {
        Self::new(&vec![(T::zero(), T::one()); n])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, axis: usize) -> (T, T) {
        self.intervals[axis]
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn name(&self, axis: usize) -> &str {
        &self.names[axis]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, axis: usize, value: T) -> bool {
        let (lo, hi) = self.intervals[axis];
        lo <= value && value <= hi
    }
}

/// One constraint `^k c_p^d`: the `order`-th derivative along `axis`
/// fixed at `x_axis = point`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisConstraint<T> {
    pub axis: usize,
    pub point: T,
    pub order: u32,
    /// Either the global constraint function `c` or, when `pre_sliced`,
    /// the slice `^k b_p^d[c]` itself.
    pub expr: Expr<T>,
    pub pre_sliced: bool,
}

impl<T: Scalar> AxisConstraint<T> {
    /// Constraint whose target is given directly as a slice (no `x_axis`).
    pub fn sliced(axis: usize, point: T, order: u32, slice: Expr<T>) -> Self {
        AxisConstraint { axis, point, order, expr: slice, pre_sliced: true }
    }

    /// Constraint derived from a global constraint function `c`.
    pub fn from_global(axis: usize, point: T, order: u32, c: Expr<T>) -> Self {
        AxisConstraint { axis, point, order, expr: c, pre_sliced: false }
    }

    /// The slice `^k b_p^d[c]`, free of `x_axis`.
    pub fn slice(&self) -> Expr<T> {
        if self.pre_sliced {
            self.expr.clone()
        } else {
            bc_operator(&self.expr, self.axis, self.point, self.order)
        }
    }
}

impl<T: Scalar> fmt::Display for AxisConstraint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axis {} d={} at {}", self.axis + 1, self.order, self.point)
    }
}

/// A constraint together with its cached slice.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredConstraint<T> {
    pub constraint: AxisConstraint<T>,
    pub slice: Expr<T>,
}

/// Domain plus per-axis constraint lists, each sorted by `(point, order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet<T> {
    domain: Domain<T>,
    axes: Vec<Vec<StoredConstraint<T>>>,
}

impl<T: Scalar> ConstraintSet<T> {
    pub fn new(domain: Domain<T>) -> Self {
        let n = domain.dim();
        ConstraintSet { domain, axes: vec![Vec::new(); n] }
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Builder-style insertion.
    pub fn add_constraint(mut self, c: AxisConstraint<T>) -> Result<Self, ConstraintError> {
        self.push(c)?;
        Ok(self)
    }

    pub fn push(&mut self, c: AxisConstraint<T>) -> Result<(), ConstraintError> {
        let dim = self.dim();
        if c.axis >= dim {
            return Err(ConstraintError::AxisOutOfRange { axis: c.axis + 1, dim });
        }
        if !c.point.is_finite() || !self.domain.contains(c.axis, c.point) {
            return Err(ConstraintError::PointOutsideInterval { axis: c.axis + 1, point: c.point.as_f64() });
        }
        let list = &mut self.axes[c.axis];
        if list.iter().any(|s| s.constraint.point == c.point && s.constraint.order == c.order) {
            return Err(ConstraintError::Duplicate { axis: c.axis + 1, point: c.point.as_f64(), order: c.order });
        }
        if c.pre_sliced && c.expr.contains_var(c.axis) {
            return Err(ConstraintError::SliceDependsOnAxis {
                axis: c.axis + 1,
                name: self.domain.name(c.axis).to_string(),
            });
        }
        let slice = c.slice();
        let at = list
            .iter()
            .position(|s| (s.constraint.point, s.constraint.order) > (c.point, c.order))
            .unwrap_or(list.len());
        list.insert(at, StoredConstraint { constraint: c, slice });
        Ok(())
    }

    /// Constraints on `axis`, sorted by `(point, order)`.
    pub fn axis(&self, axis: usize) -> &[StoredConstraint<T>] {
        &self.axes[axis]
    }

    /// `ℓ_k`, the number of constraints on `axis`.
    pub fn count(&self, axis: usize) -> usize {
        self.axes[axis].len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.iter().all(Vec::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StoredConstraint<T>> {
        self.axes.iter().flatten()
    }

    /// Same `(axis, point, order)` layout with every slice replaced by
    /// `replace(constraint)`.
    pub fn map_slices(&self, mut replace: impl FnMut(&StoredConstraint<T>) -> Expr<T>) -> Self {
        let axes = self
            .axes
            .iter()
            .map(|list| {
                list.iter()
                    .map(|s| {
                        let slice = replace(s);
                        StoredConstraint {
                            constraint: AxisConstraint::sliced(
                                s.constraint.axis,
                                s.constraint.point,
                                s.constraint.order,
                                slice.clone(),
                            ),
                            slice,
                        }
                    })
                    .collect()
            })
            .collect();
        ConstraintSet { domain: self.domain.clone(), axes }
    }

    /// Same layout with all slices zero (the homogeneous problem).
    pub fn homogeneous(&self) -> Self {
        self.map_slices(|_| Expr::zero())
    }

    /// Same layout with slices taken from a global function `c`.
    pub fn resliced(&self, c: &Expr<T>) -> Self {
        self.map_slices(|s| bc_operator(c, s.constraint.axis, s.constraint.point, s.constraint.order))
    }

    /// Checks every pair of constraints on different axes at their intersection.
    pub fn validate_compatibility(&self, tol: T) -> CompatibilityReport<T> {
        let n = self.dim();
        let mut checks = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                for (ia, a) in self.axes[j].iter().enumerate() {
                    for (ib, b) in self.axes[k].iter().enumerate() {
                        let lhs = bc_operator(&a.slice, k, b.constraint.point, b.constraint.order);
                        let rhs = bc_operator(&b.slice, j, a.constraint.point, a.constraint.order);
                        let free: Vec<usize> = (0..n).filter(|&m| m != j && m != k).collect();
                        for sample in sample_grid(&self.domain, &free) {
                            let mut full = vec![T::nan(); n];
                            for (&axis, &v) in free.iter().zip(&sample) {
                                full[axis] = v;
                            }
                            full[j] = a.constraint.point;
                            full[k] = b.constraint.point;
                            let outcome = match (lhs.eval(&full), rhs.eval(&full)) {
                                (Ok(x), Ok(y)) => Ok((x - y).abs()),
                                (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
                            };
                            checks.push(IntersectionCheck {
                                first: ConstraintRef::of(j, ia, &a.constraint),
                                second: ConstraintRef::of(k, ib, &b.constraint),
                                point: full,
                                mismatch: outcome,
                            });
                        }
                    }
                }
            }
        }
        let passed = checks.iter().all(|c| matches!(c.mismatch, Ok(m) if m <= tol));
        CompatibilityReport { checks, tol, passed }
    }
}

/// Tensor grid of `INTERSECTION_SAMPLES` uniform points on each axis in `free`.
fn sample_grid<T: Scalar>(domain: &Domain<T>, free: &[usize]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for &axis in free {
        let (lo, hi) = domain.interval(axis);
        let pts = linspace(lo, hi, INTERSECTION_SAMPLES);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |&p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    out
}

/// Identifies one constraint inside a set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintRef<T> {
    pub axis: usize,
    pub index: usize,
    pub point: T,
    pub order: u32,
}

impl<T: Scalar> ConstraintRef<T> {
    fn of(axis: usize, index: usize, c: &AxisConstraint<T>) -> Self {
        ConstraintRef { axis, index, point: c.point, order: c.order }
    }
}

/// One sampled intersection comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionCheck<T> {
    pub first: ConstraintRef<T>,
    pub second: ConstraintRef<T>,
    /// Full coordinates of the sample; both constrained axes are fixed.
    pub point: Vec<T>,
    /// `|^k b[slice_j] - ^j b[slice_k]|`, or the evaluation failure.
    pub mismatch: Result<T, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport<T> {
    pub checks: Vec<IntersectionCheck<T>>,
    pub tol: T,
    pub passed: bool,
}

impl<T: Scalar> CompatibilityReport<T> {
    pub fn max_mismatch(&self) -> T {
        self.checks.iter().map(|c| c.mismatch.clone().unwrap_or(T::infinity())).fold(T::zero(), T::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IntersectionCheck<T>> {
        let tol = self.tol;
        self.checks.iter().filter(move |c| !matches!(c.mismatch, Ok(m) if m <= tol))
    }
}
