//! Problem files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! n = 1
//! T = 1
//! a = [sqrt(2), 1]      # reflected part, a_0 first
//! b = [1, 0]            # plain part
//! alpha = [[1]]
//! beta = [[-1]]
//! rhs = exp(t)
//! ```

use std::fmt;

use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::operator::ReflectionOperator;
use crate::pipeline::DERProblem;

use super::rhs::{parse_rhs_at, RhsExpression};
use super::scan::Cursor;

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub n: usize,
    pub half_width: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub rhs: RhsExpression,
}

const KEYS: [&str; 7] = ["n", "T", "a", "b", "alpha", "beta", "rhs"];
const MAX_ORDER: usize = 64;

enum Value {
    Order(usize),
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    Rhs(RhsExpression),
}

fn vector(c: &mut Cursor) -> Result<Vec<f64>> {
    c.skip_ws();
    c.expect('[')?;
    let mut out = Vec::new();
    c.skip_ws();
    if c.eat(']') {
        return Ok(out);
    }
    loop {
        c.skip_ws();
        out.push(c.scalar()?);
        c.skip_ws();
        if c.eat(']') {
            return Ok(out);
        }
        if !c.eat(',') {
            return Err(c.error("`,` or `]`"));
        }
    }
}

fn matrix(c: &mut Cursor) -> Result<Vec<Vec<f64>>> {
    c.skip_ws();
    c.expect('[')?;
    let mut rows = Vec::new();
    loop {
        rows.push(vector(c)?);
        c.skip_ws();
        if c.eat(']') {
            return Ok(rows);
        }
        if !c.eat(',') {
            return Err(c.error("`,` or `]`"));
        }
    }
}

fn value(key: &str, c: &mut Cursor, line: usize) -> Result<Value> {
    c.skip_ws();
    let v = match key {
        "n" => Value::Order(c.unsigned()? as usize),
        "T" => {
            let col = c.column();
            let t = c.scalar()?;
            if t <= 0.0 {
                return Err(Error::Parse { line, column: col, expected: "a positive half-width".into() });
            }
            Value::Scalar(t)
        }
        "a" | "b" => Value::Vector(vector(c)?),
        "alpha" | "beta" => Value::Matrix(matrix(c)?),
        _ => {
            let rest = c.rest();
            let trimmed = rest.trim_end();
            let (body, offset) = match trimmed.strip_prefix('"') {
                Some(inner) => match inner.strip_suffix('"') {
                    Some(body) => (body.to_string(), 1),
                    None => return Err(Error::Parse { line, column: c.column() + trimmed.chars().count(), expected: "closing `\"`".into() }),
                },
                None => (trimmed.to_string(), 0),
            };
            let e = parse_rhs_at(&body, line, c.column() + offset)?;
            return Ok(Value::Rhs(e));
        }
    };
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error("end of line"));
    }
    Ok(v)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut seen: [Option<(usize, Value)>; 7] = Default::default();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut c = Cursor::new(content, line, 1);
        c.skip_ws();
        let key_col = c.column();
        let key = c.identifier().ok_or_else(|| c.error("a key"))?;
        let slot = KEYS.iter().position(|k| *k == key).ok_or_else(|| Error::Parse {
            line,
            column: key_col,
            expected: format!("one of n, T, a, b, alpha, beta, rhs (found `{key}`)"),
        })?;
        if seen[slot].is_some() {
            return Err(Error::Parse { line, column: key_col, expected: format!("a key other than the repeated `{key}`") });
        }
        c.skip_ws();
        c.expect('=')?;
        seen[slot] = Some((line, value(&key, &mut c, line)?));
    }
    let mut take = |i: usize| {
        seen[i].take().ok_or_else(|| Error::Parse {
            line: last_line + 1,
            column: 1,
            expected: format!("key `{}`", KEYS[i]),
        })
    };
    let (n_line, n) = match take(0)? {
        (l, Value::Order(n)) => (l, n),
        _ => unreachable!(),
    };
    if n == 0 || n > MAX_ORDER {
        return Err(Error::Dimension { line: n_line, message: format!("order must be between 1 and {MAX_ORDER}, got {n}") });
    }
    let half_width = match take(1)? {
        (_, Value::Scalar(t)) => t,
        _ => unreachable!(),
    };
    let mut vec_of = |i: usize| -> Result<Vec<f64>> {
        match take(i)? {
            (_, Value::Vector(v)) if v.len() == n + 1 => Ok(v),
            (l, Value::Vector(v)) => Err(Error::Dimension {
                line: l,
                message: format!("`{}` needs {} coefficients for n = {n}, got {}", KEYS[i], n + 1, v.len()),
            }),
            _ => unreachable!(),
        }
    };
    let a = vec_of(2)?;
    let b = vec_of(3)?;
    let mut mat_of = |i: usize| -> Result<Vec<Vec<f64>>> {
        match take(i)? {
            (l, Value::Matrix(m)) => {
                if m.len() != n || m.iter().any(|r| r.len() != n) {
                    let cols = m.iter().map(|r| r.len()).max().unwrap_or(0);
                    return Err(Error::Dimension {
                        line: l,
                        message: format!("`{}` must be {n}×{n}, got {}×{cols}", KEYS[i], m.len()),
                    });
                }
                Ok(m)
            }
            _ => unreachable!(),
        }
    };
    let alpha = mat_of(4)?;
    let beta = mat_of(5)?;
    let rhs = match take(6)? {
        (_, Value::Rhs(e)) => e,
        _ => unreachable!(),
    };
    Ok(ProblemFile { n, half_width, a, b, alpha, beta, rhs })
}

fn write_vec(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x:?}")?;
    }
    write!(f, "]")
}

fn write_mat(f: &mut fmt::Formatter<'_>, m: &[Vec<f64>]) -> fmt::Result {
    write!(f, "[")?;
    for (i, row) in m.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_vec(f, row)?;
    }
    write!(f, "]")
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "T = {:?}", self.half_width)?;
        write!(f, "a = ")?;
        write_vec(f, &self.a)?;
        write!(f, "\nb = ")?;
        write_vec(f, &self.b)?;
        write!(f, "\nalpha = ")?;
        write_mat(f, &self.alpha)?;
        write!(f, "\nbeta = ")?;
        write_mat(f, &self.beta)?;
        writeln!(f, "\nrhs = {}", self.rhs)
    }
}

impl ProblemFile {
    pub fn operator(&self) -> Result<ReflectionOperator> {
        ReflectionOperator::new(self.a.clone(), self.b.clone())
    }

    pub fn conditions(&self) -> Result<BoundarySpec> {
        BoundarySpec::from_rows(self.half_width, &self.alpha, &self.beta)
    }

    /// The operator's order is read off the coefficients, so a vanishing top
    /// pair is rejected here rather than silently lowering the order.
    pub fn to_problem(&self) -> Result<DERProblem> {
        let l = self.operator()?;
        if l.order() != self.n {
            return Err(Error::InvalidInput(format!(
                "top coefficients a_{n} and b_{n} are both zero, so the operator has order {} rather than {n}",
                l.order(),
                n = self.n
            )));
        }
        DERProblem::new(l, self.conditions()?, self.rhs.to_exppoly())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::rhs::{RhsTerm, Trig};
    use proptest::prelude::*;

    pub(crate) const THIRD_ORDER: &str = "\
# u'''(t) + u(-t) + u(t) = sin t
n = 3
T = 1
a = [1, 0, 0, 0]
b = [1, 0, 0, 1]
alpha = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
beta = [[0, 0, -1], [0, -1, 0], [-1, 0, 0]]
rhs = sin(t)
";

    #[test]
    fn parses_both_worked_examples() {
        let p = parse_problem(THIRD_ORDER).unwrap();
        assert_eq!(p.n, 3);
        assert_eq!(p.beta[2], vec![-1.0, 0.0, 0.0]);
        p.to_problem().unwrap();
        let q = parse_problem("n=1\nT=1\na=[sqrt(2),1]\nb=[1,0]\nalpha=[[1]]\nbeta=[[-1]]\nrhs=\"exp(t)\"\n").unwrap();
        assert_eq!(q.a, vec![2f64.sqrt(), 1.0]);
        q.to_problem().unwrap();
    }

    #[test]
    fn dimension_errors_name_the_line() {
        let bad = THIRD_ORDER.replace("alpha = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]", "alpha = [[1, 0, 0], [0, 1, 0]]");
        assert!(matches!(parse_problem(&bad), Err(Error::Dimension { line: 6, .. })));
        let bad = THIRD_ORDER.replace("b = [1, 0, 0, 1]", "b = [1, 0, 1]");
        assert!(matches!(parse_problem(&bad), Err(Error::Dimension { line: 5, .. })));
    }

    #[test]
    fn strictness() {
        let unknown = format!("{THIRD_ORDER}gamma = 2\n");
        assert!(matches!(parse_problem(&unknown), Err(Error::Parse { line: 9, column: 1, .. })));
        let dup = format!("{THIRD_ORDER}n = 3\n");
        assert!(matches!(parse_problem(&dup), Err(Error::Parse { line: 9, .. })));
        let missing = THIRD_ORDER.replace("rhs = sin(t)\n", "");
        assert!(matches!(parse_problem(&missing), Err(Error::Parse { .. })));
        let garbage = THIRD_ORDER.replace("T = 1", "T = 1 2");
        assert!(matches!(parse_problem(&garbage), Err(Error::Parse { line: 3, column: 7, .. })));
        assert!(matches!(parse_problem(&THIRD_ORDER.replace("T = 1", "T = -1")), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn print_round_trips() {
        let p = parse_problem(THIRD_ORDER).unwrap();
        assert_eq!(parse_problem(&p.to_string()).unwrap(), p);
        let q = parse_problem("n=1\nT=0.5\na=[sqrt(2),1]\nb=[1e-3,-0]\nalpha=[[1]]\nbeta=[[-1]]\nrhs=-t^2*exp(-t) + 3*cos(2.5*t)\n").unwrap();
        assert_eq!(parse_problem(&q.to_string()).unwrap(), q);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
    }

    fn term() -> impl Strategy<Value = RhsTerm> {
        (finite(), 0u32..5, finite(), prop::option::of((any::<bool>(), finite()))).prop_map(|(coeff, power, exp_rate, trig)| RhsTerm {
            coeff,
            power,
            exp_rate,
            trig: trig.map(|(s, w)| (if s { Trig::Sin } else { Trig::Cos }, w)),
        })
    }

    fn problem() -> impl Strategy<Value = ProblemFile> {
        (1usize..4).prop_flat_map(|n| {
            (
                1e-3..1e3f64,
                prop::collection::vec(finite(), n + 1),
                prop::collection::vec(finite(), n + 1),
                prop::collection::vec(prop::collection::vec(finite(), n), n),
                prop::collection::vec(prop::collection::vec(finite(), n), n),
                prop::collection::vec(term(), 1..4),
            )
                .prop_map(move |(half_width, a, b, alpha, beta, terms)| ProblemFile {
                    n,
                    half_width,
                    a,
                    b,
                    alpha,
                    beta,
                    rhs: RhsExpression { terms },
                })
        })
    }

    proptest! {
        #[test]
        fn printed_files_parse_back(p in problem()) {
            prop_assert_eq!(parse_problem(&p.to_string()).unwrap(), p);
        }

        #[test]
        fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
            let _ = parse_problem(&s);
        }
    }
}
