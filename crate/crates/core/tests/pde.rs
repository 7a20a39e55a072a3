use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toc::expr::parse;
use toc::pde::{boundary_residual, laplacian, solve, verification_points, PdeProblem, PdeSystem};
use toc::{AxisConstraint, ConstraintSet, Domain, Expr};

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

fn zero_dirichlet() -> ConstraintSet {
    let mut set = ConstraintSet::new(Domain::unit(2).unwrap());
    for axis in 0..2 {
        for p in [0.0, 1.0] {
            set.push(AxisConstraint::sliced(axis, p, 0, Expr::zero())).unwrap();
        }
    }
    set
}

fn poisson(degree: usize) -> PdeProblem<f64> {
    PdeProblem {
        operator: laplacian(),
        source: e("-2*pi^2*sin(pi*x)*sin(pi*y)"),
        constraints: zero_dirichlet(),
        degree,
        grid: None,
    }
}

#[test]
fn poisson_matches_exact_solution() {
    let sol = solve(poisson(12)).unwrap();
    let exact = e("sin(pi*x)*sin(pi*y)");
    let err = verification_points(&Domain::unit(2).unwrap())
        .iter()
        .map(|p| (sol.ce.eval_f(p).unwrap() - exact.eval(p).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "max error {err}");
    assert!(sol.boundary_residual <= 1e-12);
}

#[test]
fn any_coefficients_satisfy_boundary() {
    let system = PdeSystem::new(poisson(8)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let xi: Vec<f64> = (0..system.basis.len()).map(|_| rng.gen_range(-10.0..10.0)).collect();
        assert!(boundary_residual(&system.constrained(&xi)).unwrap() <= 1e-9);
    }
}

#[test]
fn residual_decreases_with_degree() {
    let residuals: Vec<f64> =
        [4, 6, 8, 10, 12].iter().map(|&d| solve(poisson(d)).unwrap().verification_residual).collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn collocated_system_is_affine_in_coefficients() {
    let system = PdeSystem::new(poisson(6)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let xi: Vec<f64> = (0..system.basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ce = system.constrained(&xi);
    let linear = system.residuals(&xi).unwrap();
    for (p, r) in system.points.iter().zip(&linear) {
        let direct = system.pde_residual_at(&ce, p).unwrap();
        assert!((direct - r).abs() <= 1e-8 * r.abs().max(1.0), "{p:?}: {direct} vs {r}");
    }
}

#[test]
fn harmonic_with_neumann_edge() {
    let u = e("exp(x)*sin(y)");
    let mut set = ConstraintSet::new(Domain::unit(2).unwrap());
    set.push(AxisConstraint::from_global(0, 0.0, 1, u.clone())).unwrap();
    set.push(AxisConstraint::from_global(0, 1.0, 0, u.clone())).unwrap();
    set.push(AxisConstraint::from_global(1, 0.0, 0, u.clone())).unwrap();
    set.push(AxisConstraint::from_global(1, 1.0, 0, u.clone())).unwrap();
    let sol =
        solve(PdeProblem { operator: laplacian(), source: Expr::zero(), constraints: set, degree: 10, grid: None })
            .unwrap();
    for p in verification_points(&Domain::unit(2).unwrap()) {
        assert!((sol.ce.eval_f(&p).unwrap() - u.eval(&p).unwrap()).abs() < 1e-7, "{p:?}");
    }
    assert!(sol.boundary_residual < 1e-12);
}
