//! Right-hand sides: sums of `coeff * t^k * exp(mu*t) * sin(omega*t)` with
//! every factor but the coefficient optional.

use std::fmt;

use crate::error::Result;
use crate::exppoly::{ExpPoly, ExpTerm};
use crate::numeric::{C64, ZERO};

use super::scan::Cursor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhsTerm {
    pub coeff: f64,
    pub power: u32,
    pub exp_rate: f64,
    pub trig: Option<(Trig, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RhsExpression {
    pub terms: Vec<RhsTerm>,
}

const MAX_POWER: u32 = 64;

impl RhsExpression {
    pub fn to_exppoly(&self) -> ExpPoly {
        let mut parts = Vec::new();
        for term in &self.terms {
            let base = |c: C64, omega: f64| {
                let mut p = vec![ZERO; term.power as usize + 1];
                p[term.power as usize] = c * term.coeff;
                ExpTerm { exponent: C64::new(term.exp_rate, omega), poly: p }
            };
            match term.trig {
                None => parts.push(base(C64::new(1.0, 0.0), 0.0)),
                Some((Trig::Sin, w)) => {
                    parts.push(base(C64::new(0.0, -0.5), w));
                    parts.push(base(C64::new(0.0, 0.5), -w));
                }
                Some((Trig::Cos, w)) => {
                    parts.push(base(C64::new(0.5, 0.0), w));
                    parts.push(base(C64::new(0.5, 0.0), -w));
                }
            }
        }
        ExpPoly::from_terms(parts)
    }
}

impl fmt::Display for RhsExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}", t.coeff)?;
            if t.power > 0 {
                write!(f, "*t^{}", t.power)?;
            }
            if t.exp_rate != 0.0 {
                write!(f, "*exp({:?}*t)", t.exp_rate)?;
            }
            match t.trig {
                Some((Trig::Sin, w)) => write!(f, "*sin({w:?}*t)")?,
                Some((Trig::Cos, w)) => write!(f, "*cos({w:?}*t)")?,
                None => {}
            }
        }
        Ok(())
    }
}

/// Parses a whole right-hand side; `line` and `column` locate `text` in the
/// enclosing file for error messages.
pub fn parse_rhs_at(text: &str, line: usize, column: usize) -> Result<RhsExpression> {
    let mut c = Cursor::new(text, line, column);
    let mut terms = Vec::new();
    c.skip_ws();
    let mut sign = 1.0;
    if c.eat('-') {
        sign = -1.0;
    } else {
        c.eat('+');
    }
    loop {
        let mut term = parse_term(&mut c)?;
        term.coeff *= sign;
        terms.push(term);
        c.skip_ws();
        if c.eat('+') {
            sign = 1.0;
        } else if c.eat('-') {
            sign = -1.0;
        } else {
            break;
        }
    }
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error("`+`, `-`, `*` or end of expression"));
    }
    Ok(RhsExpression { terms })
}

pub fn parse_rhs(text: &str) -> Result<RhsExpression> {
    parse_rhs_at(text, 1, 1)
}

fn parse_term(c: &mut Cursor) -> Result<RhsTerm> {
    let mut term = RhsTerm { coeff: 1.0, power: 0, exp_rate: 0.0, trig: None };
    loop {
        c.skip_ws();
        if c.peek_word("exp") {
            c.expect_word("exp")?;
            term.exp_rate += parse_rate(c)?;
        } else if c.peek_word("sin") || c.peek_word("cos") {
            let kind = if c.peek_word("sin") { Trig::Sin } else { Trig::Cos };
            if term.trig.is_some() {
                return Err(c.error("at most one sin or cos per term"));
            }
            c.expect_word(if kind == Trig::Sin { "sin" } else { "cos" })?;
            term.trig = Some((kind, parse_rate(c)?));
        } else if c.peek_word("t") {
            c.expect_word("t")?;
            c.skip_ws();
            let k = if c.eat('^') {
                c.skip_ws();
                c.unsigned()?
            } else {
                1
            };
            term.power = term.power.saturating_add(k);
            if term.power > MAX_POWER {
                return Err(c.error("a power of t at most 64"));
            }
        } else {
            term.coeff *= c.scalar()?;
        }
        if !(term.coeff.is_finite() && term.exp_rate.is_finite()) {
            return Err(c.error("a term with finite coefficient and rate"));
        }
        c.skip_ws();
        if !c.eat('*') {
            return Ok(term);
        }
    }
}

/// `(t)`, `(-t)` or `(x*t)` with `x` a scalar.
fn parse_rate(c: &mut Cursor) -> Result<f64> {
    c.skip_ws();
    c.expect('(')?;
    c.skip_ws();
    let rate = if c.peek_word("t") {
        1.0
    } else if c.peek_char() == Some('-') && c.peek_word_after_minus("t") {
        c.eat('-');
        c.skip_ws();
        -1.0
    } else {
        let x = c.scalar()?;
        c.skip_ws();
        c.expect('*')?;
        c.skip_ws();
        x
    };
    c.expect_word("t")?;
    c.skip_ws();
    c.expect(')')?;
    Ok(rate)
}

impl From<RhsExpression> for ExpPoly {
    fn from(e: RhsExpression) -> Self {
        e.to_exppoly()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn sine_and_exponential() {
        let s = parse_rhs("sin(t)").unwrap().to_exppoly();
        assert_eq!(s, ExpPoly::sin(1.0));
        let e = parse_rhs("exp(t)").unwrap().to_exppoly();
        assert_eq!(e, ExpPoly::exp(C64::new(1.0, 0.0)));
    }

    #[test]
    fn products_and_sums() {
        let e = parse_rhs("-2*t^2*exp(-0.5*t) + sqrt(2)*cos(3*t) - t").unwrap();
        assert_eq!(e.terms.len(), 3);
        let p = e.to_exppoly();
        for x in [-0.7f64, 0.0, 0.4, 1.3] {
            let want = -2.0 * x * x * (-0.5 * x).exp() + 2f64.sqrt() * (3.0 * x).cos() - x;
            assert!((p.eval(x) - C64::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn errors_carry_location() {
        match parse_rhs("sin(t) * cos(t)") {
            Err(Error::Parse { line: 1, column, .. }) => assert!(column > 8),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_rhs("exp(2t)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rhs("1 +"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rhs("tan(t)"), Err(Error::Parse { .. })));
    }

    #[test]
    fn display_round_trips() {
        for src in ["sin(t)", "-1.5*t^3*exp(2*t)*cos(-t) + 4", "0", "t*t*sqrt(3)"] {
            let e = parse_rhs(src).unwrap();
            assert_eq!(parse_rhs(&e.to_string()).unwrap(), e, "{src}");
        }
    }
}
