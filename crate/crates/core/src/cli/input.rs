//! Problem files: TOML with the polynomial, prime, number field and nodes.

use serde::Deserialize;

use crate::arith::{NumberField, NumberFieldElement, Rational};
use crate::error::{Error, Result};
use crate::poly::{parse_expression, parse_in_variables, Poly};
use crate::singular::{verify_singular_points, SingularPointSet};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    n: usize,
    polynomial: String,
    prime: Option<u64>,
    field: Option<RawField>,
    #[serde(default)]
    nodes: Vec<Vec<String>>,
    #[serde(default)]
    overrides: Overrides,
    q_coefficients: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    modulus: String,
}

/// Optional knobs, all overridable from the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub terms: Option<usize>,
    pub budget: Option<u128>,
    pub early_stop: Option<bool>,
    pub mode: Option<String>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct ProblemInput {
    pub n: usize,
    pub polynomial_text: String,
    pub f: Poly,
    pub prime: Option<u64>,
    pub field: NumberField,
    pub nodes: Option<SingularPointSet>,
    pub overrides: Overrides,
    /// A candidate Q(T) to verify instead of computing one.
    pub q_coefficients: Option<Vec<i64>>,
}

fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Line of the first occurrence of `needle`, for locating errors in embedded strings.
fn line_of(text: &str, needle: &str) -> usize {
    text.find(needle).map_or(0, |i| text[..i].matches('\n').count() + 1)
}

fn relocate(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { column, message, .. } => Error::Parse { line, column, message },
        other => other,
    }
}

fn parse_element(field: &NumberField, s: &str) -> Result<NumberFieldElement> {
    let coords = parse_in_variables(s, &["t"])?.univariate();
    let d = field.degree();
    // reduce modulo m(t)
    let mut v: Vec<Rational> = coords;
    let m = field.modulus();
    while v.len() > d {
        let lead = v.pop().unwrap();
        let shift = v.len() - d;
        for (i, c) in m.iter().take(d).enumerate() {
            v[shift + i] -= &lead * Rational::from_integer(c.clone());
        }
    }
    Ok(field.element(&v))
}

impl ProblemInput {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawInput = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        let nvars = raw.n + 1;
        let f = parse_expression(&raw.polynomial, nvars)
            .map_err(|e| relocate(e, line_of(text, "polynomial")))?
            .homogeneous()?;
        if f.is_zero() {
            return Err(Error::Invalid("the polynomial is zero".into()));
        }
        if let Some(p) = raw.prime {
            if !crate::arith::is_prime(p) || p as usize + 1 <= raw.n {
                return Err(Error::Invalid(format!("p = {p} must be a prime greater than n − 1")));
            }
        }
        let field = match &raw.field {
            None => NumberField::rationals(),
            Some(rf) => {
                let m = parse_in_variables(&rf.modulus, &["t"])
                    .map_err(|e| relocate(e, line_of(text, "modulus")))?
                    .univariate();
                let lead = m.last().cloned().unwrap_or_default();
                if m.len() < 2 || m.iter().any(|c| !c.is_integer()) || lead != Rational::from_integer(1.into()) {
                    return Err(Error::Invalid("the field modulus must be a monic integer polynomial of degree ≥ 1".into()));
                }
                NumberField::new(m.iter().map(|c| c.to_integer()).collect())?
            }
        };
        let nodes = if raw.nodes.is_empty() {
            None
        } else {
            let pts = raw
                .nodes
                .iter()
                .map(|pt| {
                    pt.iter()
                        .map(|s| parse_element(&field, s).map_err(|e| relocate(e, line_of(text, s))))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Some(verify_singular_points(&f, &pts, &field)?)
        };
        Ok(ProblemInput {
            n: raw.n,
            polynomial_text: raw.polynomial,
            f,
            prime: raw.prime,
            field,
            nodes,
            overrides: raw.overrides,
            q_coefficients: raw.q_coefficients,
        })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_six_node_style_input() {
        let text = r#"
n = 3
polynomial = "3*x0*x1*x2*(x0+x1)+3*x2^4-((2*x0+x1)^2-6*x1*x2)*x3^2"
prime = 5
nodes = [["1","0","0","0"], ["0","1","0","0"], ["0","0","0","1"], ["1","-1","0","0"],
         ["-1/2","1","0","t/4"], ["-1/2","1","0","-t/4"]]

[field]
modulus = "t^2 - 2"
"#;
        let input = ProblemInput::parse(text).unwrap();
        assert_eq!(input.nodes.as_ref().unwrap().points.len(), 6);
        assert_eq!(input.field.degree(), 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            ProblemInput::parse("n = 3\npolynomial = \"x0^2 + x1\"\n"),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            ProblemInput::parse("n = 3\npolynomial = \"x0*(x1\"\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ProblemInput::parse("n = 3\npolynomial = \"x0*x1\"\nnodes = [[\"1\",\"0\",\"0\",\"0\"]]\n"),
            Err(Error::NotSingular { .. })
        ));
        assert!(matches!(ProblemInput::parse("n = 3\npolynom = 1\n"), Err(Error::Parse { .. })));
    }
}
