use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{AxisConstraint, ConstraintSet, Domain};
use crate::expr::{parse, Expr};
use crate::sampling::random_tensor_polynomial;
use crate::scalar::Scalar;
use crate::tensor::{assemble_with, AssembleOptions, ConstrainedExpression, VVector};

use super::{BivariateError, X, Y};

/// `(axis, point, order)` of each flag, in table column order:
/// `c_{x,0}, c_{0,y}, c_{x,1}, c_{1,y}, c^x_{0,y}, c^x_{1,y}, c^y_{x,0}, c^y_{x,1}`.
pub const COMBO_COLUMNS: [(usize, u8, u32); 8] =
    [(Y, 0, 0), (X, 0, 0), (Y, 1, 0), (X, 1, 0), (X, 0, 1), (X, 1, 1), (Y, 0, 1), (Y, 1, 1)];

const COLUMN_NAMES: [&str; 8] =
    ["c(x,0)", "c(0,y)", "c(x,1)", "c(1,y)", "c_x(0,y)", "c_x(1,y)", "c_y(x,0)", "c_y(x,1)"];

/// Which Dirichlet and Neumann edge constraints of the unit square are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComboFlags(pub [bool; 8]);

impl ComboFlags {
    pub fn columns(&self) -> impl Iterator<Item = (usize, u8, u32)> + '_ {
        COMBO_COLUMNS.iter().zip(self.0).filter(|(_, on)| *on).map(|(c, _)| *c)
    }

    pub fn names(&self) -> Vec<&'static str> {
        COLUMN_NAMES.iter().zip(self.0).filter(|(_, on)| *on).map(|(n, _)| *n).collect()
    }
}

impl fmt::Display for ComboFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ComboFlags {
    type Err = BivariateError;

    /// Eight `0`/`1` characters in column order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BivariateError::NotTabulated(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        let arr: [bool; 8] = bits.try_into().map_err(|_| BivariateError::NotTabulated(s.to_string()))?;
        Ok(ComboFlags(arr))
    }
}

/// One table row: flags and the two blend vectors as expression strings.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub flags: ComboFlags,
    pub vx: Vec<String>,
    pub vy: Vec<String>,
}

impl TableRow {
    pub fn vectors<T: Scalar>(&self) -> Result<[Vec<Expr<T>>; 2], BivariateError> {
        let conv = |list: &[String]| -> Result<Vec<Expr<T>>, BivariateError> {
            list.iter()
                .map(|s| parse(s).map_err(|e| BivariateError::TableEntry { entry: s.clone(), message: e.to_string() }))
                .collect()
        };
        Ok([conv(&self.vx)?, conv(&self.vy)?])
    }
}

const H_X: &[&str] = &["1", "1-3*x^2+2*x^3", "x-2*x^2+x^3", "3*x^2-2*x^3", "-x^2+x^3"];
const H_Y: &[&str] = &["1", "1-3*y^2+2*y^3", "y-2*y^2+y^3", "3*y^2-2*y^3", "-y^2+y^3"];

fn row(flags: &str, vx: &[&str], vy: &[&str]) -> TableRow {
    TableRow {
        flags: flags.parse().expect("static flags"),
        vx: vx.iter().map(|s| s.to_string()).collect(),
        vy: vy.iter().map(|s| s.to_string()).collect(),
    }
}

/// Every tabulated Dirichlet/Neumann combination on the unit square.
pub fn combination_rows() -> Vec<TableRow> {
    vec![
        row("11000000", &["1", "1"], &["1", "1"]),
        row("01000010", &["1", "1"], &["1", "y"]),
        row("00001010", &["1", "x"], &["1", "y"]),
        row("11100000", &["1", "1"], &["1", "1-y^2", "y^2"]),
        row("11000001", &["1", "1"], &["1", "1", "y"]),
        row("10101000", &["1", "x"], &["1", "1-y", "y"]),
        row("00101010", &["1", "x"], &["1", "y-y^2", "y^2"]),
        row("01000011", &["1", "1"], &["1", "y - y^2/2", "y^2/2"]),
        row("00001011", &["1", "x"], &["1", "y - y^2/2", "y^2/2"]),
        row("11110000", &["1", "1-x", "x"], &["1", "1-y", "y"]),
        row("01110010", &["1", "1-x", "x"], &["1", "y-y^2", "y^2"]),
        row("01010011", &["1", "1-x", "x"], &["1", "y-y^2/2", "y^2/2"]),
        row("00111010", &["1", "x-x^2", "x^2"], &["1", "y-y^2", "y^2"]),
        row("00011011", &["1", "x-x^2", "x^2"], &["1", "y-y^2/2", "y^2/2"]),
        row("00001111", &["1", "x-x^2/2", "x^2/2"], &["1", "y-y^2/2", "y^2/2"]),
        row("11000010", &["1", "1"], &["1", "1", "y"]),
        row("10001010", &["1", "x"], &["1", "1", "y"]),
        row("11010010", &["1", "1-x", "x"], &["1", "1", "y"]),
        row("11100010", &["1", "1"], &["1", "1-y^2", "y-y^2", "y^2"]),
        row("10101010", &["1", "x"], &["1", "1-y^2", "y-y^2", "y^2"]),
        row("11000011", &["1", "1"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("10001011", &["1", "x"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("11000110", &["1", "1", "x"], &["1", "1", "y"]),
        row("10001110", &["1", "x-x^2/2", "x^2/2"], &["1", "1", "y"]),
        row("11001010", &["1", "1", "x"], &["1", "1", "y"]),
        row("11101010", &["1", "1", "x"], &["1", "1-y^2", "y-y^2", "y^2"]),
        row("11001011", &["1", "1", "x"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("11110010", &["1", "1-x", "x"], &["1", "1-y^2", "y-y^2", "y^2"]),
        row("10111010", &["1", "x-x^2", "x^2"], &["1", "1-y^2", "y-y^2", "y^2"]),
        row("11010011", &["1", "1-x", "x"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("10011011", &["1", "x-x^2", "x^2"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("10001111", &["1", "x-x^2/2", "x^2/2"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("11111010", &["1", "1-x^2", "x-x^2", "x^2"], &["1", "1-y^2", "y-y^2", "y^2"]),
        row("11011011", &["1", "1-x^2", "x-x^2", "x^2"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("11001111", &["1", "1", "x-x^2/2", "x^2/2"], &["1", "1", "y-y^2/2", "y^2/2"]),
        row("11110011", &["1", "1-x", "x"], H_Y),
        row("10111011", &["1", "-1+x", "1"], H_Y),
        row("10101111", &["1", "x-x^2/2", "x^2/2"], H_Y),
        row("11101011", &["1", "1", "x"], H_Y),
        row("11111011", &["1", "1-x^2", "x-x^2", "x^2"], H_Y),
        row("11101111", &["1", "1", "x-x^2/2", "x^2/2"], H_Y),
        row("11111111", H_X, H_Y),
    ]
}

/// Tabulated `[v(x), v(y)]` for a flag combination.
pub fn combo_vectors<T: Scalar>(flags: ComboFlags) -> Result<[Vec<Expr<T>>; 2], BivariateError> {
    combination_rows()
        .into_iter()
        .find(|r| r.flags == flags)
        .ok_or_else(|| BivariateError::NotTabulated(flags.to_string()))?
        .vectors()
}

/// The flagged constraints of `c` on the unit square.
pub fn combo_constraint_set<T: Scalar>(flags: ComboFlags, c: &Expr<T>) -> Result<ConstraintSet<T>, BivariateError> {
    let mut set = ConstraintSet::new(Domain::unit(2)?);
    for (axis, p, d) in flags.columns() {
        set.push(AxisConstraint::from_global(axis, T::of(p as f64), d, c.clone()))?;
    }
    Ok(set)
}

/// Constrained expression for a table row, with the row's vectors in place
/// of the α solve.
pub fn combo_ce<T: Scalar>(
    row: &TableRow,
    c: &Expr<T>,
    g: &Expr<T>,
) -> Result<ConstrainedExpression<T>, BivariateError> {
    let set = combo_constraint_set(row.flags, c)?;
    let [vx, vy] = row.vectors()?;
    let options = AssembleOptions {
        vectors: Some(vec![VVector::from_components(X, vx), VVector::from_components(Y, vy)]),
        ..AssembleOptions::default()
    };
    Ok(assemble_with(&set, g.clone(), options)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub flags: ComboFlags,
    /// Largest flagged-constraint residual over the sample lines.
    pub max_residual: f64,
    /// Over the unflagged functionals, the smallest of the largest changes
    /// produced by swapping `g`. `None` when every column is flagged.
    pub min_free_change: Option<f64>,
    pub error: Option<String>,
    pub passed: bool,
}

pub const SWEEP_RESIDUAL_TOL: f64 = 1e-10;
pub const SWEEP_FREE_TOL: f64 = 1e-3;
const SWEEP_SAMPLES: usize = 21;
/// Size of the change applied to `g` when probing unflagged functionals.
const SWEEP_PERTURBATION: f64 = 10.0;

fn functional(f: &ConstrainedExpression<f64>, (axis, p, d): (usize, u8, u32), t: f64) -> Result<f64, BivariateError> {
    let mut at = [t, t];
    at[axis] = p as f64;
    let mut delta = [0, 0];
    delta[axis] = d;
    Ok(f.eval_f_partial(&at, &delta)?)
}

fn sweep_row(row: &TableRow, rng: &mut ChaCha8Rng) -> Result<(f64, Option<f64>), BivariateError> {
    let c: Expr<f64> = random_tensor_polynomial(rng, 2, 4);
    let g1: Expr<f64> = random_tensor_polynomial(rng, 2, 4);
    let h: Expr<f64> = random_tensor_polynomial(rng, 2, 4);
    let g2 = g1.clone() + Expr::constant(SWEEP_PERTURBATION) * h;
    let f1 = combo_ce(row, &c, &g1)?;
    let f2 = f1.with_free_function(g2);
    let mut max_residual: f64 = 0.0;
    let mut min_free: Option<f64> = None;
    for (col, on) in COMBO_COLUMNS.iter().zip(row.flags.0) {
        let (axis, p, d) = *col;
        let target = c.diff(axis, d).substitute(axis, p as f64);
        let mut change: f64 = 0.0;
        for i in 0..SWEEP_SAMPLES {
            let t = i as f64 / (SWEEP_SAMPLES - 1) as f64;
            let a = functional(&f1, *col, t)?;
            if on {
                let mut pt = [t, t];
                pt[axis] = p as f64;
                let r = (a - target.eval(&pt)?).abs();
                max_residual = max_residual.max(r);
            } else {
                change = change.max((a - functional(&f2, *col, t)?).abs());
            }
        }
        if !on {
            min_free = Some(min_free.map_or(change, |m| m.min(change)));
        }
    }
    Ok((max_residual, min_free))
}

/// Checks each row with random polynomial data: flagged constraints are met
/// and every unflagged edge functional still moves with `g`.
pub fn sweep_rows(rows: &[TableRow], seed: u64) -> Vec<RowReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.iter()
        .map(|row| match sweep_row(row, &mut rng) {
            Ok((max_residual, min_free_change)) => RowReport {
                flags: row.flags,
                max_residual,
                min_free_change,
                error: None,
                passed: max_residual <= SWEEP_RESIDUAL_TOL && min_free_change.is_none_or(|m| m > SWEEP_FREE_TOL),
            },
            Err(e) => RowReport {
                flags: row.flags,
                max_residual: f64::NAN,
                min_free_change: None,
                error: Some(e.to_string()),
                passed: false,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_round_trip() {
        let f: ComboFlags = "10111011".parse().unwrap();
        assert_eq!(f.to_string(), "10111011");
        assert_eq!(f.names(), ["c(x,0)", "c(x,1)", "c(1,y)", "c_x(0,y)", "c_y(x,0)", "c_y(x,1)"]);
        assert!("1011101".parse::<ComboFlags>().is_err());
        assert!("1011101x".parse::<ComboFlags>().is_err());
    }

    #[test]
    fn rows_are_distinct_and_sized() {
        let rows = combination_rows();
        assert_eq!(rows.len(), 42);
        for (i, r) in rows.iter().enumerate() {
            assert!(rows[..i].iter().all(|o| o.flags != r.flags));
            let nx = r.flags.columns().filter(|c| c.0 == X).count();
            let ny = r.flags.columns().filter(|c| c.0 == Y).count();
            assert_eq!((r.vx.len(), r.vy.len()), (nx + 1, ny + 1), "{}", r.flags);
        }
    }

    #[test]
    fn worked_examples() {
        let [vx, vy] = combo_vectors::<f64>("11000000".parse().unwrap()).unwrap();
        assert_eq!((vx[1].to_string(), vy[1].to_string()), ("1".into(), "1".into()));
        let [vx, vy] = combo_vectors::<f64>("01000010".parse().unwrap()).unwrap();
        assert_eq!((vx[1].to_string(), vy[1].to_string()), ("1".into(), "y".into()));
        let [vx, vy] = combo_vectors::<f64>(ComboFlags([true; 8])).unwrap();
        assert_eq!((vx.len(), vy.len()), (5, 5));
        assert!(matches!(combo_vectors::<f64>(ComboFlags([false; 8])), Err(BivariateError::NotTabulated(_))));
    }

    #[test]
    fn vectors_are_kronecker() {
        let c: Expr<f64> = parse("x*y").unwrap();
        for r in combination_rows() {
            let set = combo_constraint_set(r.flags, &c).unwrap();
            let [vx, vy] = r.vectors::<f64>().unwrap();
            for (axis, v) in [(X, vx), (Y, vy)] {
                let k = VVector::from_components(axis, v).kronecker_matrix(&set).unwrap();
                for i in 0..k.rows() {
                    for j in 0..k.cols() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((k[(i, j)] - want).abs() < 1e-15, "{} axis {axis}", r.flags);
                    }
                }
            }
        }
    }

    #[test]
    fn sweep_passes_and_detects_tampering() {
        let rows = combination_rows();
        for rep in sweep_rows(&rows, 7) {
            assert!(rep.passed, "{rep:?}");
        }
        let mut bad = rows[9].clone();
        bad.vx[1] = "1-x/2".into();
        let rep = &sweep_rows(&[bad], 7)[0];
        assert!(!rep.passed && rep.max_residual > 1e-3);
    }
}
