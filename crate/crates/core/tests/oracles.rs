use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toc::bivariate::{
    coons, hermite_coons, multi_grid_ce, toc_dirichlet_rect, EdgeSlices, GridData, HermiteSlices, Rect, X, Y,
};
use toc::expr::parse;
use toc::sampling::{random_point, random_polynomial};
use toc::tensor::{assemble, build_v};
use toc::univariate::{build_univariate_ce, waring_ce, PointConstraint, UnivariateSpec};
use toc::{AxisConstraint, ConstraintSet, Domain, Expr};

const DATASETS: usize = 20;
const POINTS: usize = 100;
const TOL: f64 = 1e-12;

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

fn random_rect(rng: &mut ChaCha8Rng) -> Rect<f64> {
    let x0 = rng.gen_range(-2.0..0.0);
    let y0 = rng.gen_range(-2.0..0.0);
    Rect::new((x0, x0 + rng.gen_range(0.5..2.0)), (y0, y0 + rng.gen_range(0.5..2.0)))
}

fn max_diff(a: &Expr, b: &Expr, domain: &Domain, rng: &mut ChaCha8Rng) -> f64 {
    (0..POINTS)
        .map(|_| {
            let p = random_point(rng, domain);
            let (u, v) = (a.eval(&p).unwrap(), b.eval(&p).unwrap());
            (u - v).abs() / u.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn dirichlet_alpha_and_blends_are_exact() {
    let set = ConstraintSet::new(Domain::unit(1).unwrap())
        .add_constraint(AxisConstraint::sliced(0, 0.0, 0, e("0")))
        .unwrap()
        .add_constraint(AxisConstraint::sliced(0, 1.0, 0, e("0")))
        .unwrap();
    let v = build_v(&set, 0, None).unwrap();
    let alpha = v.alpha.unwrap().to_rows();
    assert_eq!(alpha, vec![vec![1.0, 0.0], vec![-1.0, 1.0]]);
    for i in 0..=8 {
        let x = i as f64 / 8.0;
        let got: Vec<f64> = v.components.iter().map(|c| c.eval(&[x]).unwrap()).collect();
        assert_eq!(got, vec![1.0, 1.0 - x, x]);
    }
}

#[test]
fn coons_matches_tensor_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..DATASETS {
        let rect = random_rect(&mut rng);
        let c = random_polynomial(&mut rng, 2, 4);
        let s = EdgeSlices::from_global(&c, &rect);
        let set = s.constraint_set(&rect).unwrap();
        let engine = assemble(&set, Expr::zero()).unwrap().to_expr();
        let domain = rect.domain().unwrap();
        if rect.x == (0.0, 1.0) && rect.y == (0.0, 1.0) {
            assert!(max_diff(&coons(&s).unwrap(), &engine, &domain, &mut rng) <= TOL);
        }
        let g = random_polynomial(&mut rng, 2, 5);
        let closed = toc_dirichlet_rect(&s, &g, &rect).unwrap();
        let engine = assemble(&set, g).unwrap().to_expr();
        assert!(max_diff(&closed, &engine, &domain, &mut rng) <= TOL);
    }
}

#[test]
fn unit_square_coons_matches_tensor_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rect = Rect::unit();
    let domain = rect.domain().unwrap();
    for _ in 0..DATASETS {
        let c = random_polynomial(&mut rng, 2, 4);
        let s = EdgeSlices::from_global(&c, &rect);
        let engine = assemble(&s.constraint_set(&rect).unwrap(), Expr::zero()).unwrap().to_expr();
        assert!(max_diff(&coons(&s).unwrap(), &engine, &domain, &mut rng) <= TOL);
    }
}

#[test]
fn hermite_coons_matches_tensor_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let domain = Domain::unit(2).unwrap();
    for _ in 0..DATASETS {
        let c = random_polynomial(&mut rng, 2, 4);
        let g = random_polynomial(&mut rng, 2, 5);
        let s = HermiteSlices::from_global(&c);
        let closed = hermite_coons(&s, &g).unwrap();
        let engine = assemble(&s.constraint_set().unwrap(), g).unwrap().to_expr();
        assert!(max_diff(&closed, &engine, &domain, &mut rng) <= TOL);
    }
}

#[test]
fn multi_grid_matches_tensor_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let domain = Domain::new(&[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
    for i in 0..DATASETS {
        let (nx, ny) = (2 + i % 3, 2 + (i / 3) % 3);
        let xs: Vec<f64> = (0..nx).map(|k| -1.0 + 2.0 * k as f64 / (nx - 1) as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|k| -1.0 + 2.0 * k as f64 / (ny - 1) as f64).collect();
        let c = random_polynomial(&mut rng, 2, 4);
        let g = random_polynomial(&mut rng, 2, 5);
        let closed = multi_grid_ce(&GridData::from_global(&c, &xs, &ys), &g).unwrap();
        let mut set = ConstraintSet::new(domain.clone());
        for &x in &xs {
            set.push(AxisConstraint::from_global(X, x, 0, c.clone())).unwrap();
        }
        for &y in &ys {
            set.push(AxisConstraint::from_global(Y, y, 0, c.clone())).unwrap();
        }
        let engine = assemble(&set, g).unwrap().to_expr();
        assert!(max_diff(&closed, &engine, &domain, &mut rng) <= TOL);
    }
}

#[test]
fn univariate_support_form_matches_tensor_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let domain = Domain::new(&[(-1.0, 1.0), (-2.0, 1.0)]).unwrap();
    for _ in 0..DATASETS {
        let c = random_polynomial(&mut rng, 2, 4);
        let g = random_polynomial(&mut rng, 2, 5);
        let ops = [(-2.0, 0), (0.0, 1), (1.0, 0)];
        let spec = UnivariateSpec::new(
            Y,
            ops.iter().map(|&(p, d)| PointConstraint::derivative(p, d, c.diff(Y, d).substitute(Y, p))).collect(),
            g.clone(),
        );
        let closed = build_univariate_ce(&spec).unwrap().expr;
        let mut set = ConstraintSet::new(domain.clone());
        for &(p, d) in &ops {
            set.push(AxisConstraint::from_global(Y, p, d, c.clone())).unwrap();
        }
        let engine = assemble(&set, g).unwrap().to_expr();
        assert!(max_diff(&closed, &engine, &domain, &mut rng) <= TOL);
    }
}

#[test]
fn example_one_slices() {
    let nodes = [-2.0, 0.0, 1.0, 3.0];
    let targets = [e("x^2 - 1"), e("cos(pi*x)"), e("x"), e("1 - x")];
    for g in ["0", "x^2*y - sin(5*x)*cos(4*mod(y, 1))"] {
        let f = waring_ce(Y, &nodes, &targets, &e(g)).unwrap();
        for (&y, t) in nodes.iter().zip(&targets) {
            for i in 0..=20 {
                let x = -1.0 + i as f64 / 10.0;
                let r = f.eval(&[x, y]).unwrap() - t.eval(&[x, y]).unwrap();
                assert!(r.abs() < 1e-12, "g={g} y={y} x={x}: {r}");
            }
        }
    }
}

#[test]
fn example_two_etas() {
    let g = e("3*x^2*y - 2*sin(15*x)*cos(2*y)");
    let spec = UnivariateSpec::new(
        Y,
        vec![
            PointConstraint::value(-2.0, e("sin(2*x)")),
            PointConstraint::derivative(0.0, 1, e("0")),
            PointConstraint::value(1.0, e("9*exp(-x^2)")),
        ],
        g.clone(),
    );
    let out = build_univariate_ce(&spec).unwrap();
    assert_eq!(out.etas[1], Expr::neg(g.diff(Y, 1).substitute(Y, 0.0)));
    let eta1 = Expr::sub(
        Expr::add(e("2*(3*x^2) + 12*exp(-x^2) - sin(2*x)/3"), Expr::div(g.substitute(Y, -2.0), Expr::constant(3.0))),
        Expr::mul(Expr::constant(4.0 / 3.0), g.substitute(Y, 1.0)),
    );
    for i in 0..=20 {
        let x = -1.0 + i as f64 / 10.0;
        let r = out.etas[0].eval(&[x, 0.0]).unwrap() - eta1.eval(&[x, 0.0]).unwrap();
        assert!(r.abs() < 1e-12, "{x}: {r}");
    }
    let mut set = ConstraintSet::new(Domain::new(&[(-1.0, 1.0), (-2.0, 1.0)]).unwrap());
    for (p, d, s) in [(-2.0, 0, "sin(2*x)"), (0.0, 1, "0"), (1.0, 0, "9*exp(-x^2)")] {
        set.push(AxisConstraint::sliced(Y, p, d, e(s))).unwrap();
    }
    let ce = assemble(&set, g).unwrap();
    for i in 0..=20 {
        let x = -1.0 + i as f64 / 10.0;
        assert!(ce.eval_f_partial(&[x, 0.0], &[0, 1]).unwrap().abs() < 1e-12);
    }
}

#[test]
fn figure_boundaries_with_trig_free_function() {
    let c = e("sin(3*x - pi/4)*cos(4*y + pi/3)");
    let g = e("cos(4*pi*x)*sin(6*pi*y)/3 - x^2*cos(2*pi*y)");
    let rect = Rect::unit();
    let s = EdgeSlices::from_global(&c, &rect);
    let f = toc_dirichlet_rect(&s, &g, &rect).unwrap();
    for i in 0..=40 {
        let t = i as f64 / 40.0;
        for p in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
            assert!((f.eval(&p).unwrap() - c.eval(&p).unwrap()).abs() < 1e-13, "{p:?}");
        }
    }
    let ce = assemble(&s.constraint_set(&rect).unwrap(), g).unwrap();
    assert!((ce.eval_f(&[0.3, 0.6]).unwrap() - f.eval(&[0.3, 0.6]).unwrap()).abs() < 1e-13);
}
