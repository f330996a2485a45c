//! Built-in invariant integrands and the `poly:` expression format.
//!
//! Three named integrands cover the test surface: a pure Gaussian, a
//! polynomial-times-Gaussian, and a compactly supported indicator. On
//! top of those, `poly:<expression>` builds P(u)·exp(-tr u) for any
//! polynomial P in the Gram entries, written like
//! `poly:1 + 2 u11 u22 - 0.5 u12^2` — terms joined by + and -, factors
//! multiplied by juxtaposition or `*`, `uij` naming the (i, j) entry
//! (1-based, single digits), `^` raising a factor to a nonnegative
//! integer power.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{gram, GramMatrix, VectorTuple};
use crate::measure::lgamma;

use super::{DecayClass, InvariantIntegrand};

/// All built-in integrands, in registry order.
pub fn builtin_integrands() -> Vec<InvariantIntegrand> {
    ["gauss-exp-trace", "gauss-trace-poly", "ball-indicator"]
        .iter()
        .map(|name| integrand_by_name(name).expect("built-in integrands always register"))
        .collect()
}

/// Looks up a built-in integrand by name, or builds one from a
/// `poly:<expression>` specification.
pub fn integrand_by_name(name: &str) -> Result<InvariantIntegrand> {
    match name {
        "gauss-exp-trace" => gauss_exp_trace(),
        "gauss-trace-poly" => gauss_trace_poly(),
        "ball-indicator" => ball_indicator(),
        _ => match name.strip_prefix("poly:") {
            Some(expr) => polynomial_integrand(name.to_string(), expr),
            None => Err(Error::InvalidInput(format!(
                "unknown integrand '{name}'; available: gauss-exp-trace, gauss-trace-poly, \
                 ball-indicator, poly:<expression>"
            ))),
        },
    }
}

/// exp(-tr G) = exp(-sum of squared coordinates); the fully worked
/// reference case with value pi^{km/2}.
fn gauss_exp_trace() -> Result<InvariantIntegrand> {
    InvariantIntegrand::new(
        "gauss-exp-trace",
        DecayClass::Gaussian,
        Arc::new(|v: &VectorTuple| (-v.squared_norm()).exp()),
        Arc::new(|g: &GramMatrix| (-g.trace()).exp()),
    )
    .map(|g| {
        g.with_exact(Arc::new(|k, m| {
            Some(PI.powf(0.5 * (k * m) as f64))
        }))
    })
}

/// tr G · exp(-tr G); exact value (d/2)·pi^{d/2} with d = k·m.
fn gauss_trace_poly() -> Result<InvariantIntegrand> {
    InvariantIntegrand::new(
        "gauss-trace-poly",
        DecayClass::Gaussian,
        Arc::new(|v: &VectorTuple| {
            let sq = v.squared_norm();
            sq * (-sq).exp()
        }),
        Arc::new(|g: &GramMatrix| {
            let tr = g.trace();
            tr * (-tr).exp()
        }),
    )
    .map(|g| {
        g.with_exact(Arc::new(|k, m| {
            let d = 0.5 * (k * m) as f64;
            Some(d * PI.powf(d))
        }))
    })
}

/// Indicator of tr G <= 1, the unit ball in all k·m coordinates; exact
/// value is the ball volume pi^{d/2} / Gamma(d/2 + 1).
fn ball_indicator() -> Result<InvariantIntegrand> {
    InvariantIntegrand::new(
        "ball-indicator",
        DecayClass::Compact { half_width: 1.0 },
        Arc::new(|v: &VectorTuple| if v.squared_norm() <= 1.0 { 1.0 } else { 0.0 }),
        Arc::new(|g: &GramMatrix| if g.trace() <= 1.0 { 1.0 } else { 0.0 }),
    )
    .map(|g| {
        g.with_exact(Arc::new(|k, m| {
            let half_d = 0.5 * (k * m) as f64;
            Some((half_d * PI.ln() - lgamma(half_d + 1.0)).exp())
        }))
    })
}

/// P(u)·exp(-tr u) for a parsed polynomial P.
fn polynomial_integrand(name: String, expr: &str) -> Result<InvariantIntegrand> {
    let poly = Polynomial::parse(expr)?;
    let min_k = poly.min_k();
    let orbit_poly = poly.clone();
    InvariantIntegrand::with_min_k(
        name,
        DecayClass::Gaussian,
        min_k,
        Arc::new(move |v: &VectorTuple| poly.eval(&gram(v)) * (-v.squared_norm()).exp()),
        Arc::new(move |g: &GramMatrix| orbit_poly.eval(g) * (-g.trace()).exp()),
    )
}

// ---------------------------------------------------------------------------
// Polynomial expressions in Gram entries
// ---------------------------------------------------------------------------

/// One product of a coefficient and Gram-entry powers.
#[derive(Clone, Debug, PartialEq)]
struct Term {
    coefficient: f64,
    /// (row, column, exponent), 0-based indices.
    powers: Vec<(usize, usize, u32)>,
}

/// A polynomial in the entries u_{i,j} of a Gram matrix.
#[derive(Clone, Debug, PartialEq)]
struct Polynomial {
    terms: Vec<Term>,
}

const MAX_EXPONENT: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Token {
    Number(f64),
    Entry(usize, usize),
    Plus,
    Minus,
    Star,
    Caret,
}

impl Polynomial {
    fn parse(expr: &str) -> Result<Self> {
        let tokens = tokenize(expr)?;
        if tokens.is_empty() {
            return Err(Error::InvalidInput("empty polynomial expression".into()));
        }
        let mut pos = 0;
        let mut terms = Vec::new();
        let mut sign = match tokens.first() {
            Some(Token::Minus) => {
                pos += 1;
                -1.0
            }
            Some(Token::Plus) => {
                pos += 1;
                1.0
            }
            _ => 1.0,
        };
        loop {
            let mut term = parse_term(&tokens, &mut pos)?;
            term.coefficient *= sign;
            terms.push(term);
            match tokens.get(pos) {
                None => break,
                Some(Token::Plus) => {
                    sign = 1.0;
                    pos += 1;
                }
                Some(Token::Minus) => {
                    sign = -1.0;
                    pos += 1;
                }
                Some(other) => {
                    return Err(Error::InvalidInput(format!(
                        "expected + or - between terms, found {other:?}"
                    )));
                }
            }
        }
        Ok(Polynomial { terms })
    }

    fn eval(&self, g: &GramMatrix) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                term.powers.iter().fold(term.coefficient, |acc, &(i, j, p)| {
                    acc * g.entry(i, j).powi(p as i32)
                })
            })
            .sum()
    }

    /// Smallest matrix size whose entries the polynomial references.
    fn min_k(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.powers.iter())
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(1)
    }
}

fn parse_term(tokens: &[Token], pos: &mut usize) -> Result<Term> {
    let mut term = Term {
        coefficient: 1.0,
        powers: Vec::new(),
    };
    let mut factors = 0;
    loop {
        match tokens.get(*pos) {
            Some(&Token::Number(x)) => {
                *pos += 1;
                let exponent = parse_exponent(tokens, pos)?;
                term.coefficient *= x.powi(exponent as i32);
                factors += 1;
            }
            Some(&Token::Entry(i, j)) => {
                *pos += 1;
                let exponent = parse_exponent(tokens, pos)?;
                if exponent > 0 {
                    term.powers.push((i, j, exponent));
                }
                factors += 1;
            }
            Some(Token::Star) => {
                if factors == 0 {
                    return Err(Error::InvalidInput("term starts with '*'".into()));
                }
                *pos += 1;
                // A '*' must be followed by another factor.
                match tokens.get(*pos) {
                    Some(Token::Number(_)) | Some(Token::Entry(..)) => {}
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "expected a factor after '*', found {other:?}"
                        )));
                    }
                }
            }
            _ => break,
        }
    }
    if factors == 0 {
        return Err(Error::InvalidInput(
            "expected a coefficient or Gram entry".into(),
        ));
    }
    Ok(term)
}

/// Parses an optional `^<nonnegative integer>` suffix; returns 1 when
/// absent.
fn parse_exponent(tokens: &[Token], pos: &mut usize) -> Result<u32> {
    if tokens.get(*pos) != Some(&Token::Caret) {
        return Ok(1);
    }
    *pos += 1;
    match tokens.get(*pos) {
        Some(&Token::Number(x)) if x.fract() == 0.0 && (0.0..=MAX_EXPONENT as f64).contains(&x) => {
            *pos += 1;
            Ok(x as u32)
        }
        other => Err(Error::InvalidInput(format!(
            "exponent must be an integer in 0..={MAX_EXPONENT}, found {other:?}"
        ))),
    }
}

fn tokenize(expr: &str) -> Result<Vec<Token>> {
    let bytes = expr.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' => i += 1,
            b'+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            b'-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            b'*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            b'^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            b'u' => {
                let row = bytes.get(i + 1).copied().filter(u8::is_ascii_digit);
                let col = bytes.get(i + 2).copied().filter(u8::is_ascii_digit);
                match (row, col) {
                    (Some(r), Some(c)) if r > b'0' && c > b'0' => {
                        tokens.push(Token::Entry((r - b'1') as usize, (c - b'1') as usize));
                        i += 3;
                    }
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "Gram entries are written u<row><col> with 1-based digits, \
                             found '{}' at byte {i}",
                            &expr[i..(i + 3).min(expr.len())]
                        )));
                    }
                }
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text = &expr[start..i];
                let value: f64 = text.parse().map_err(|_| {
                    Error::InvalidInput(format!("cannot parse number '{text}'"))
                })?;
                tokens.push(Token::Number(value));
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unexpected character '{}' in polynomial expression",
                    other as char
                )));
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    #[test]
    fn builtins_register_with_distinct_names() {
        let all = builtin_integrands();
        assert_eq!(all.len(), 3);
        let names: Vec<&str> = all.iter().map(|g| g.name()).collect();
        assert_eq!(
            names,
            ["gauss-exp-trace", "gauss-trace-poly", "ball-indicator"]
        );
    }

    #[test]
    fn exact_values_match_closed_forms() {
        let gauss = integrand_by_name("gauss-exp-trace").unwrap();
        assert_close(
            gauss.exact_value(2, 3).unwrap(),
            PI.powi(3),
            1e-12,
            "pi^3",
        );
        let trace = integrand_by_name("gauss-trace-poly").unwrap();
        assert_close(
            trace.exact_value(2, 3).unwrap(),
            3.0 * PI.powi(3),
            1e-11,
            "(d/2) pi^{d/2}",
        );
        let ball = integrand_by_name("ball-indicator").unwrap();
        assert_close(ball.exact_value(1, 2).unwrap(), PI, 1e-13, "disc");
        assert_close(
            ball.exact_value(1, 3).unwrap(),
            4.0 * PI / 3.0,
            1e-12,
            "ball",
        );
        assert_close(
            ball.exact_value(2, 2).unwrap(),
            PI * PI / 2.0,
            1e-12,
            "4-ball",
        );
    }

    #[test]
    fn indicator_views_agree_on_both_sides_of_the_boundary() {
        let ball = integrand_by_name("ball-indicator").unwrap();
        let inside = VectorTuple::from_rows(vec![vec![0.4, 0.3, 0.0]]).unwrap();
        let outside = VectorTuple::from_rows(vec![vec![0.9, 0.8, 0.1]]).unwrap();
        assert_eq!(ball.eval_ambient(&inside), 1.0);
        assert_eq!(ball.eval_ambient(&outside), 0.0);
        assert_eq!(ball.eval_orbit(&gram(&inside)), 1.0);
        assert_eq!(ball.eval_orbit(&gram(&outside)), 0.0);
    }

    #[test]
    fn polynomial_evaluates_hand_expanded_expression() {
        let poly = Polynomial::parse("2 u11 u22 - 0.5 u12^2 + 3").unwrap();
        assert_eq!(poly.terms.len(), 3);
        assert_eq!(poly.min_k(), 2);
        let g = GramMatrix::from_lower(2, vec![4.0, 1.5, 9.0]).unwrap();
        // 2·4·9 - 0.5·1.5² + 3
        assert_close(poly.eval(&g), 72.0 - 1.125 + 3.0, 1e-12, "hand value");
        // '*' and juxtaposition are the same product.
        let starred = Polynomial::parse("2*u11*u22 - 0.5*u12^2 + 3").unwrap();
        assert_close(starred.eval(&g), poly.eval(&g), 0.0, "star form");
        // Symmetric entry access: u21 is u12.
        let flipped = Polynomial::parse("u21").unwrap();
        assert_close(flipped.eval(&g), 1.5, 0.0, "symmetric entry");
    }

    #[test]
    fn polynomial_edge_forms() {
        let constant = Polynomial::parse("1").unwrap();
        assert_eq!(constant.min_k(), 1);
        let g = GramMatrix::from_lower(1, vec![7.0]).unwrap();
        assert_close(constant.eval(&g), 1.0, 0.0, "constant");
        let negated = Polynomial::parse("-u11 + 2").unwrap();
        assert_close(negated.eval(&g), -5.0, 0.0, "leading minus");
        let zeroth = Polynomial::parse("u11^0").unwrap();
        assert_close(zeroth.eval(&g), 1.0, 0.0, "zeroth power");
        let scientific = Polynomial::parse("2.5e-1 u11").unwrap();
        assert_close(scientific.eval(&g), 1.75, 1e-15, "scientific coefficient");
        let squared_number = Polynomial::parse("2^3 u11").unwrap();
        assert_close(squared_number.eval(&g), 56.0, 0.0, "number exponent");
    }

    #[test]
    fn malformed_polynomials_are_rejected() {
        for bad in [
            "",
            "u1",
            "u11 +",
            "^2",
            "u11^2.5",
            "u11^-1",
            "u11^17",
            "q",
            "1 * ",
            "u0x",
            "u10",
            "2 + + 3",
        ] {
            assert!(
                Polynomial::parse(bad).is_err(),
                "expected parse failure for '{bad}'"
            );
        }
    }

    #[test]
    fn polynomial_integrand_registers_and_knows_its_min_k() {
        let g = integrand_by_name("poly:u22 u11 - u12^2").unwrap();
        assert_eq!(g.min_k(), 2);
        assert_eq!(g.name(), "poly:u22 u11 - u12^2");
        assert!(matches!(g.decay(), DecayClass::Gaussian));
        assert!(g.exact_value(2, 3).is_none());
        // The two views agree by construction and pass registration;
        // a direct spot check on one tuple.
        let v = VectorTuple::from_rows(vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let gm = gram(&v);
        // det of [[5,2],[2,2]] times the Gaussian factor.
        assert_close(
            g.eval_orbit(&gm),
            6.0 * (-7.0_f64).exp(),
            1e-14,
            "determinant times Gaussian",
        );
        assert_close(
            g.eval_ambient(&v),
            g.eval_orbit(&gm),
            1e-14,
            "views agree",
        );
    }

    #[test]
    fn unknown_names_get_a_helpful_error() {
        match integrand_by_name("nope") {
            Err(Error::InvalidInput(message)) => {
                assert!(message.contains("gauss-exp-trace"));
                assert!(message.contains("poly:"));
            }
            other => panic!("expected InvalidInput, got {other:?}"),
        }
    }
}
