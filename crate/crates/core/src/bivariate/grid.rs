use crate::expr::Expr;
use crate::scalar::Scalar;
use crate::tensor::MTensor;

use super::{check_univariate, corner, BivariateError, X, Y};

/// Function constraints on a grid of lines `x = x_k` and `y = y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData<T> {
    pub x_nodes: Vec<T>,
    pub y_nodes: Vec<T>,
    /// `c(x_k, y)`, one per x node.
    pub x_slices: Vec<Expr<T>>,
    /// `c(x, y_k)`, one per y node.
    pub y_slices: Vec<Expr<T>>,
}

impl<T: Scalar> GridData<T> {
    pub fn from_global(c: &Expr<T>, x_nodes: &[T], y_nodes: &[T]) -> Self {
        GridData {
            x_nodes: x_nodes.to_vec(),
            y_nodes: y_nodes.to_vec(),
            x_slices: x_nodes.iter().map(|&w| c.substitute(X, w)).collect(),
            y_slices: y_nodes.iter().map(|&w| c.substitute(Y, w)).collect(),
        }
    }

    fn validate(&self) -> Result<(), BivariateError> {
        for (nodes, slices, axis) in [(&self.x_nodes, &self.x_slices, X), (&self.y_nodes, &self.y_slices, Y)] {
            if nodes.len() != slices.len() {
                return Err(BivariateError::CountMismatch { expected: nodes.len(), got: slices.len() });
            }
            for (i, w) in nodes.iter().enumerate() {
                if nodes[..i].contains(w) {
                    return Err(BivariateError::DuplicateNode(w.as_f64()));
                }
            }
            for s in slices {
                check_univariate(s, 1 - axis)?;
            }
        }
        Ok(())
    }

    /// Intersection values `p_ij = c(x_i, y_j)`, checked from both sides.
    pub fn intersections(&self) -> Result<Vec<Vec<T>>, BivariateError> {
        self.validate()?;
        self.x_nodes
            .iter()
            .zip(&self.x_slices)
            .map(|(&xi, sx)| {
                self.y_nodes
                    .iter()
                    .zip(&self.y_slices)
                    .map(|(&yj, sy)| corner(|| format!("({xi}, {yj})"), &sx.substitute(Y, yj), &sy.substitute(X, xi)))
                    .collect()
            })
            .collect()
    }
}

/// `{1, Π_{i≠1} (z - z_i)/(z_1 - z_i), ...}` along `axis`.
pub fn lagrange_vector<T: Scalar>(axis: usize, nodes: &[T]) -> Vec<Expr<T>> {
    let z = Expr::var(axis);
    let mut v = vec![Expr::one()];
    for (k, &zk) in nodes.iter().enumerate() {
        let basis = nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .fold(Expr::one(), |acc, (_, &zi)| acc * ((&z - Expr::constant(zi)) / Expr::constant(zk - zi)));
        v.push(basis);
    }
    v
}

fn grid_m<T: Scalar>(corner0: Expr<T>, cols: Vec<Expr<T>>, rows: Vec<Expr<T>>, inner: &[Vec<T>]) -> MTensor<T> {
    let (nx, ny) = (rows.len(), cols.len());
    let mut entries = Vec::with_capacity((nx + 1) * (ny + 1));
    entries.push(corner0);
    entries.extend(cols);
    for (i, r) in rows.into_iter().enumerate() {
        entries.push(r);
        entries.extend(inner[i].iter().map(|&v| Expr::constant(-v)));
    }
    MTensor::from_entries(vec![nx + 1, ny + 1], entries)
}

/// Constrained expression through every grid line, via the compact matrix form.
pub fn multi_grid_ce<T: Scalar>(data: &GridData<T>, g: &Expr<T>) -> Result<Expr<T>, BivariateError> {
    let p = data.intersections()?;
    let vx = lagrange_vector(X, &data.x_nodes);
    let vy = lagrange_vector(Y, &data.y_nodes);
    let m_c = grid_m(Expr::zero(), data.y_slices.clone(), data.x_slices.clone(), &p);
    let g_inner: Vec<Vec<T>> = data
        .x_nodes
        .iter()
        .map(|&xi| {
            data.y_nodes.iter().map(|&yj| g.substitute(X, xi).substitute(Y, yj).eval(&[])).collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    let m_g = grid_m(
        Expr::zero(),
        data.y_nodes.iter().map(|&w| g.substitute(Y, w)).collect(),
        data.x_nodes.iter().map(|&w| g.substitute(X, w)).collect(),
        &g_inner,
    );
    let vs = [vx, vy];
    Ok(m_c.contract_expr(&vs) + g.clone() - m_g.contract_expr(&vs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expr<f64> {
        parse(s).unwrap()
    }

    #[test]
    fn lagrange_quadratic_in_y() {
        let v = lagrange_vector::<f64>(Y, &[1.0, 2.0, 3.0]);
        assert_eq!(v.len(), 4);
        let want = e("(y - 2)*(y - 3)/((1 - 2)*(1 - 3))");
        for i in 0..5 {
            let y = 0.7 + 0.6 * i as f64;
            assert!((v[1].eval(&[0.0, y]).unwrap() - want.eval(&[0.0, y]).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_three_grid() {
        let c = e("sin(x)*y^2 + x*y - 3");
        let data = GridData::from_global(&c, &[-2.0, 1.0], &[1.0, 2.0, 3.0]);
        let g = e("cos(x*y) + x^3");
        let f = multi_grid_ce(&data, &g).unwrap();
        for i in 0..=12 {
            let t = i as f64 / 12.0;
            let (x, y) = (-2.0 + 3.0 * t, 1.0 + 2.0 * t);
            for p in [[-2.0, y], [1.0, y], [x, 1.0], [x, 2.0], [x, 3.0]] {
                assert!((f.eval(&p).unwrap() - c.eval(&p).unwrap()).abs() < 1e-11, "{p:?}");
            }
        }
        for &xi in &data.x_nodes {
            for &yj in &data.y_nodes {
                assert!((f.eval(&[xi, yj]).unwrap() - c.eval(&[xi, yj]).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_node_per_axis() {
        let c = e("x*y + 1");
        let data = GridData::from_global(&c, &[0.0], &[0.0]);
        let f = multi_grid_ce(&data, &e("x^2*y^2")).unwrap();
        for i in 0..5 {
            let t = 0.2 * i as f64;
            assert!((f.eval(&[0.0, t]).unwrap() - 1.0).abs() < 1e-14);
            assert!((f.eval(&[t, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn errors() {
        let c = e("x + y");
        let mut d = GridData::from_global(&c, &[0.0, 0.0], &[1.0]);
        assert!(matches!(multi_grid_ce(&d, &Expr::zero()), Err(BivariateError::DuplicateNode(_))));
        d = GridData::from_global(&c, &[0.0, 1.0], &[1.0]);
        d.y_slices[0] = e("x + 2");
        assert!(matches!(multi_grid_ce(&d, &Expr::zero()), Err(BivariateError::CornerMismatch { .. })));
    }
}
