use crate::constraints::ConstraintSet;
use crate::expr::Expr;
use crate::scalar::Scalar;

use super::{bc_operator, TensorError};

/// 0-based tensor index; `i_k = 0` selects the leading `1` of `v_k`,
/// `i_k = j + 1` the `j`-th constraint of axis `k`.
pub type MultiIndex = Vec<usize>;

/// Where the entries of an M tensor come from.
#[derive(Debug, Clone, Copy)]
pub enum MSource<'a, T> {
    /// The stored slices of the constraint set (`M(c)`).
    Slices,
    /// A single function to which every operator is applied (`M(g)`).
    Function(&'a Expr<T>),
}

/// Dense n-dimensional array of expressions, axis 1 outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct MTensor<T> {
    extents: Vec<usize>,
    entries: Vec<Expr<T>>,
}

impl<T: Scalar> MTensor<T> {
    /// Tensor with explicit entries laid out row-major (last axis fastest).
    pub fn from_entries(extents: Vec<usize>, entries: Vec<Expr<T>>) -> Self {
        assert_eq!(extents.iter().product::<usize>(), entries.len(), "entry count must match extents");
        MTensor { extents, entries }
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.extents.len());
        idx.iter().zip(&self.extents).fold(0, |acc, (&i, &e)| {
            assert!(i < e, "index out of range");
            acc * e + i
        })
    }

    pub fn multi_index(&self, mut flat: usize) -> MultiIndex {
        let mut idx = vec![0; self.extents.len()];
        for k in (0..self.extents.len()).rev() {
            idx[k] = flat % self.extents[k];
            flat /= self.extents[k];
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &Expr<T> {
        &self.entries[self.flat_index(idx)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, &Expr<T>)> {
        self.entries.iter().enumerate().map(|(f, e)| (self.multi_index(f), e))
    }

    /// Entrywise combination of two tensors of equal shape.
    pub fn zip_with(&self, other: &Self, f: impl Fn(&Expr<T>, &Expr<T>) -> Expr<T>) -> Self {
        assert_eq!(self.extents, other.extents);
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect();
        MTensor { extents: self.extents.clone(), entries }
    }

    /// Symbolic contraction `M_{i..} v_i ..` with one component list per axis.
    pub fn contract_expr(&self, vectors: &[Vec<Expr<T>>]) -> Expr<T> {
        assert_eq!(vectors.len(), self.dim());
        self.iter()
            .filter(|(_, e)| !e.is_zero())
            .map(|(idx, e)| {
                idx.iter().enumerate().fold(e.clone(), |acc, (k, &i)| Expr::mul(acc, vectors[k][i].clone()))
            })
            .sum()
    }

    /// Numeric contraction at a point.
    pub fn contract(&self, vectors: &[Vec<Expr<T>>], at: &[T]) -> Result<T, TensorError> {
        let values: Vec<Vec<T>> =
            vectors.iter().map(|v| v.iter().map(|c| c.eval(at)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
        let mut total = T::zero();
        for (idx, e) in self.iter() {
            if e.is_zero() {
                continue;
            }
            let w = idx.iter().enumerate().fold(T::one(), |acc, (k, &i)| acc * values[k][i]);
            if w != T::zero() {
                total = total + e.eval(at)? * w;
            }
        }
        Ok(total)
    }
}

fn sign<T: Scalar>(m: usize) -> T {
    if m.is_multiple_of(2) {
        -T::one()
    } else {
        T::one()
    }
}

fn active_axes(idx: &[usize]) -> Vec<usize> {
    idx.iter().enumerate().filter(|(_, &i)| i > 0).map(|(k, _)| k).collect()
}

fn apply_op<T: Scalar>(set: &ConstraintSet<T>, e: &Expr<T>, axis: usize, i: usize) -> Expr<T> {
    let c = &set.axis(axis)[i - 1].constraint;
    bc_operator(e, axis, c.point, c.order)
}

/// Entry built from the slice table: the slice of `seed_axis` followed by the
/// operators of the other active axes in ascending order, times `(-1)^{m+1}`.
pub fn slice_entry<T: Scalar>(set: &ConstraintSet<T>, idx: &[usize], seed_axis: usize) -> Expr<T> {
    let active = active_axes(idx);
    if active.is_empty() {
        return Expr::zero();
    }
    assert!(idx[seed_axis] > 0, "seed axis must be active");
    let seed = set.axis(seed_axis)[idx[seed_axis] - 1].slice.clone();
    let nested = active.iter().filter(|&&k| k != seed_axis).fold(seed, |e, &k| apply_op(set, &e, k, idx[k]));
    Expr::mul(Expr::constant(sign(active.len())), nested)
}

/// Entry built from one function with the operators applied in `order`
/// (a permutation of the active axes), times `(-1)^{m+1}`.
pub fn function_entry<T: Scalar>(c: &Expr<T>, set: &ConstraintSet<T>, idx: &[usize], order: &[usize]) -> Expr<T> {
    let active = active_axes(idx);
    if active.is_empty() {
        return Expr::zero();
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    assert_eq!(sorted, active, "order must permute the active axes");
    let nested = order.iter().fold(c.clone(), |e, &k| apply_op(set, &e, k, idx[k]));
    Expr::mul(Expr::constant(sign(active.len())), nested)
}

/// Builds `M` with extents `ℓ_k + 1`.
pub fn build_m<T: Scalar>(set: &ConstraintSet<T>, source: MSource<'_, T>) -> MTensor<T> {
    let extents: Vec<usize> = (0..set.dim()).map(|k| set.count(k) + 1).collect();
    let total = extents.iter().product();
    let mut m = MTensor { extents, entries: Vec::with_capacity(total) };
    for flat in 0..total {
        let idx = m.multi_index(flat);
        let active = active_axes(&idx);
        let entry = match (active.first(), source) {
            (None, _) => Expr::zero(),
            (Some(&seed), MSource::Slices) => slice_entry(set, &idx, seed),
            (Some(_), MSource::Function(c)) => function_entry(c, set, &idx, &active),
        };
        m.entries.push(entry);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{AxisConstraint, Domain};
    use crate::expr::parse;

    fn e(s: &str) -> Expr<f64> {
        parse(s).unwrap()
    }

    fn close(a: &Expr<f64>, b: &Expr<f64>, n: usize) {
        for s in 0..7 {
            let pt: Vec<f64> = (0..n).map(|k| 0.13 * (s + 1) as f64 + 0.29 * k as f64).collect();
            let (x, y) = (a.eval(&pt).unwrap(), b.eval(&pt).unwrap());
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{a} vs {b}: {x} vs {y}");
        }
    }

    /// Three axes: x1 at {0,1} (d=0), x2 at 0 (d=0,1), x3 at 0 (d=0,1) and 1 (d=0).
    fn three_d(c: &Expr<f64>) -> ConstraintSet<f64> {
        let mut set = ConstraintSet::new(Domain::unit(3).unwrap());
        for (axis, p, d) in [(0, 0.0, 0), (0, 1.0, 0), (1, 0.0, 0), (1, 0.0, 1), (2, 0.0, 0), (2, 0.0, 1), (2, 1.0, 0)]
        {
            set.push(AxisConstraint::from_global(axis, p, d, c.clone())).unwrap();
        }
        set
    }

    #[test]
    fn three_dimensional_entries() {
        let c = e("x^2*y*z + 3*z^2*y + sin(x)*z + y + exp(x*y)*z^3");
        let set = three_d(&c);
        let m = build_m(&set, MSource::Slices);
        assert_eq!(m.extents(), &[3, 3, 4]);
        assert!(m.get(&[0, 0, 0]).is_zero());
        // M_132 = -dc/dx2 at x2 = 0, x3 = 0
        let want = -c.diff(1, 1).substitute(1, 0.0).substitute(2, 0.0);
        close(m.get(&[0, 2, 1]), &want, 3);
        // M_221 = -c(0, 0, x3)
        close(m.get(&[1, 1, 0]), &-c.substitute(0, 0.0).substitute(1, 0.0), 3);
        // M_333 = d2c/dx2dx3 at (1, 0, 0)
        let want = c.diff(1, 1).diff(2, 1).substitute(0, 1.0).substitute(1, 0.0).substitute(2, 0.0);
        close(m.get(&[2, 2, 2]), &want, 3);
    }

    #[test]
    fn first_order_entries_are_slices() {
        let c = e("x*y + z^3 - y^2*z");
        let set = three_d(&c);
        let m = build_m(&set, MSource::Slices);
        for k in 0..3 {
            for (j, s) in set.axis(k).iter().enumerate() {
                let mut idx = vec![0; 3];
                idx[k] = j + 1;
                assert_eq!(m.get(&idx), &s.slice);
            }
        }
    }

    #[test]
    fn coons_matrix_layout() {
        let set = ConstraintSet::new(Domain::unit(2).unwrap())
            .add_constraint(AxisConstraint::sliced(0, 0.0, 0, e("y^2")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(0, 1.0, 0, e("1 + y^2")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(1, 0.0, 0, e("x")))
            .unwrap()
            .add_constraint(AxisConstraint::sliced(1, 1.0, 0, e("x + 1")))
            .unwrap();
        let m = build_m(&set, MSource::Slices);
        let expected = [
            [None, Some("x"), Some("x + 1")],
            [Some("y^2"), Some("0"), Some("-1")],
            [Some("1 + y^2"), Some("-1"), Some("-2")],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                match want {
                    None => assert!(m.get(&[i, j]).is_zero()),
                    Some(w) => close(m.get(&[i, j]), &e(w), 2),
                }
            }
        }
    }

    #[test]
    fn zero_slices_give_zero_tensor() {
        let set = three_d(&e("x*y*z")).homogeneous();
        let m = build_m(&set, MSource::Slices);
        assert!(m.iter().all(|(_, e)| e.is_zero()));
    }

    #[test]
    fn function_source_matches_slice_source() {
        let c = e("x^3*y - 2*z*y^2 + x*z^2 + 1");
        let set = three_d(&c);
        let a = build_m(&set, MSource::Slices);
        let b = build_m(&set, MSource::Function(&c));
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            close(x, y, 3);
        }
    }

    #[test]
    fn flat_and_multi_index_round_trip() {
        let m = MTensor::<f64>::from_entries(vec![2, 3, 4], vec![Expr::zero(); 24]);
        for f in 0..24 {
            assert_eq!(m.flat_index(&m.multi_index(f)), f);
        }
        assert_eq!(m.multi_index(5), vec![0, 1, 1]);
    }
}
