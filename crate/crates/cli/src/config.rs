//! TOML run configuration shared by every command.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use toc::constraints::DEFAULT_COMPATIBILITY_TOL;
use toc::expr::parse_with_names;
use toc::pde::{OperatorTerm, PdeProblem};
use toc::{AxisConstraint, ConstraintSet, Domain, Expr};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Toml(String),
    #[error("line {line}: {what}: {message}")]
    At { line: usize, what: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    #[serde(default)]
    constraints: Vec<RawConstraint>,
    free_function: Option<RawFree>,
    pde: Option<RawPde>,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    intervals: Vec<(f64, f64)>,
    names: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAxis {
    /// 1-based.
    Index(usize),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    axis: Spanned<RawAxis>,
    point: f64,
    #[serde(default)]
    order: u32,
    /// The slice itself, free of the constrained variable.
    expr: Option<Spanned<String>>,
    /// A global function the slice is taken from.
    global: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFree {
    expr: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    residual: Option<f64>,
    compatibility: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPde {
    operator: Vec<RawTerm>,
    source: Spanned<String>,
    degree: usize,
    grid: Option<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    delta: Vec<u32>,
    coeff: Spanned<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub compatibility: f64,
}

#[derive(Debug, Clone)]
pub struct PdeSection {
    pub operator: Vec<OperatorTerm<f64>>,
    pub source: Expr,
    pub degree: usize,
    pub grid: Option<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub domain: Domain,
    pub constraints: ConstraintSet,
    pub free_function: Expr,
    pub tolerances: Tolerances,
    pub pde: Option<PdeSection>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string().trim_end().to_string()))?;
        let n = raw.domain.intervals.len();
        let domain = match raw.domain.names {
            Some(names) => {
                if names.len() != n {
                    return Err(ConfigError::Invalid(format!("domain has {n} intervals but {} names", names.len())));
                }
                Domain::with_names(&raw.domain.intervals, names)
            }
            None => Domain::new(&raw.domain.intervals),
        }
        .map_err(|e| ConfigError::Invalid(format!("domain: {e}")))?;
        let names: Vec<&str> = domain.names().iter().map(String::as_str).collect();
        let expr = |s: &Spanned<String>, what: &str| -> Result<Expr, ConfigError> {
            parse_with_names(s.get_ref(), &names).map_err(|e| ConfigError::At {
                line: line_of(text, s.span().start),
                what: what.to_string(),
                message: e.to_string(),
            })
        };

        let mut constraints = ConstraintSet::new(domain.clone());
        for (i, c) in raw.constraints.iter().enumerate() {
            let what = format!("constraint {}", i + 1);
            let line = line_of(text, c.axis.span().start);
            let at = |message: String| ConfigError::At { line, what: what.clone(), message };
            let axis = match c.axis.get_ref() {
                RawAxis::Index(k) if (1..=n).contains(k) => k - 1,
                RawAxis::Index(k) => return Err(at(format!("axis {k} outside 1..={n}"))),
                RawAxis::Name(s) => {
                    names.iter().position(|m| m == s).ok_or_else(|| at(format!("unknown axis `{s}`")))?
                }
            };
            let ac = match (&c.expr, &c.global) {
                (Some(e), None) => AxisConstraint::sliced(axis, c.point, c.order, expr(e, &what)?),
                (None, Some(g)) => AxisConstraint::from_global(axis, c.point, c.order, expr(g, &what)?),
                _ => return Err(at("exactly one of `expr` and `global` is required".into())),
            };
            constraints.push(ac).map_err(|e| at(e.to_string()))?;
        }

        let free_function = match &raw.free_function {
            Some(f) => expr(&f.expr, "free_function")?,
            None => Expr::zero(),
        };
        let tolerances = Tolerances {
            residual: raw.tolerances.as_ref().and_then(|t| t.residual).unwrap_or(DEFAULT_RESIDUAL_TOL),
            compatibility: raw.tolerances.as_ref().and_then(|t| t.compatibility).unwrap_or(DEFAULT_COMPATIBILITY_TOL),
        };
        let pde = match raw.pde {
            Some(p) => Some(PdeSection {
                operator: p
                    .operator
                    .iter()
                    .map(|t| Ok(OperatorTerm::new(&t.delta, expr(&t.coeff, "pde operator")?)))
                    .collect::<Result<_, ConfigError>>()?,
                source: expr(&p.source, "pde source")?,
                degree: p.degree,
                grid: p.grid,
            }),
            None => None,
        };
        Ok(Config { domain, constraints, free_function, tolerances, pde })
    }

    pub fn pde_problem(&self) -> Result<PdeProblem<f64>, ConfigError> {
        let p = self.pde.as_ref().ok_or_else(|| ConfigError::Invalid("config has no [pde] section".into()))?;
        Ok(PdeProblem {
            operator: p.operator.clone(),
            source: p.source.clone(),
            constraints: self.constraints.clone(),
            degree: p.degree,
            grid: p.grid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX2: &str = r#"
[domain]
intervals = [[-1.0, 1.0], [-2.0, 1.0]]

[[constraints]]
axis = "y"
point = -2.0
expr = "sin(2*x)"

[[constraints]]
axis = 2
point = 0.0
order = 1
expr = "0"

[[constraints]]
axis = "y"
point = 1.0
expr = "9*exp(-x^2)"

[free_function]
expr = "3*x^2*y - 2*sin(15*x)*cos(2*y)"
"#;

    #[test]
    fn parses_example() {
        let c = Config::parse(EX2).unwrap();
        assert_eq!(c.constraints.count(1), 3);
        assert_eq!(c.constraints.count(0), 0);
        assert_eq!(c.tolerances.residual, DEFAULT_RESIDUAL_TOL);
        assert!(c.pde.is_none());
    }

    #[test]
    fn expression_errors_carry_line() {
        let bad = EX2.replace("9*exp(-x^2)", "9*exp(-x^");
        match Config::parse(&bad) {
            Err(ConfigError::At { line, .. }) => assert_eq!(line, 19),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toml_errors_carry_line() {
        let bad = EX2.replace("point = 0.0", "point = ");
        let msg = Config::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("line 12"), "{msg}");
    }

    #[test]
    fn axis_validation() {
        let bad = EX2.replace("axis = 2", "axis = 3");
        assert!(Config::parse(&bad).unwrap_err().to_string().contains("axis 3"));
        let bad = EX2.replace("axis = 2", "axis = \"t\"");
        assert!(Config::parse(&bad).unwrap_err().to_string().contains("unknown axis"));
        let bad = EX2.replace("expr = \"0\"", "expr = \"0\"\nglobal = \"x\"");
        assert!(Config::parse(&bad).unwrap_err().to_string().contains("exactly one"));
    }
}
