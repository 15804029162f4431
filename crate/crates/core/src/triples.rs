//! abc triples: validation, radical, quality and merit, and the triple-list
//! text format.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::arith::{
    factorize, parse_factored, ArithError, BigReal, FactorBudget, FactoredInteger, IterationBudget,
    Precision,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TripleError {
    #[error("a and c must be positive")]
    NonPositive,
    #[error("need a < b = c - a")]
    NotOrdered,
    #[error("gcd(a, b) = {0} > 1")]
    NotCoprime(BigInt),
    #[error("supplied b does not equal c - a")]
    WrongB,
    #[error("factoring b: {0}")]
    Factorization(ArithError),
    #[error("{0}")]
    Parse(String),
}

/// A validated triple `a + b = c` with `0 < a < b` and `gcd(a, b) = 1`.
#[derive(Clone, Debug)]
pub struct AbcTriple {
    a: FactoredInteger,
    b: FactoredInteger,
    c: FactoredInteger,
    r: FactoredInteger,
    lambda: BigReal,
    merit: BigReal,
}

/// Product of the distinct primes dividing any of `parts`.
pub fn radical(parts: &[&FactoredInteger]) -> FactoredInteger {
    parts
        .iter()
        .fold(FactoredInteger::one(), |acc, f| acc.lcm(&f.radical()))
}

/// Builds a triple from `a` and `c`, factoring `b = c - a` with the default
/// budget.
pub fn make_triple(a: FactoredInteger, c: FactoredInteger) -> Result<AbcTriple, TripleError> {
    make_triple_with(
        a,
        c,
        None,
        &mut IterationBudget::default(),
        Precision::default(),
    )
}

/// Builds a triple; `b` may be supplied pre-factored when it resists
/// factorization.
pub fn make_triple_with(
    a: FactoredInteger,
    c: FactoredInteger,
    b: Option<FactoredInteger>,
    budget: &mut dyn FactorBudget,
    precision: Precision,
) -> Result<AbcTriple, TripleError> {
    if !a.value().is_positive() || !c.value().is_positive() {
        return Err(TripleError::NonPositive);
    }
    let b_value = c.value() - a.value();
    if b_value <= *a.value() {
        return Err(TripleError::NotOrdered);
    }
    let g = a.value().gcd(&b_value);
    if !g.is_one() {
        return Err(TripleError::NotCoprime(g));
    }
    let b = match b {
        Some(b) if *b.value() == b_value => b,
        Some(_) => return Err(TripleError::WrongB),
        None => factorize(&b_value, budget).map_err(TripleError::Factorization)?,
    };
    let r = radical(&[&a, &b, &c]);
    let (lambda, merit) = quality(&c, &r, precision);
    Ok(AbcTriple {
        a,
        b,
        c,
        r,
        lambda,
        merit,
    })
}

fn quality(c: &FactoredInteger, r: &FactoredInteger, precision: Precision) -> (BigReal, BigReal) {
    let work = precision.widened(8);
    let ln_c = BigReal::from_integer(c.value().clone(), work)
        .ln()
        .expect("c > 0");
    let ln_r = BigReal::from_integer(r.value().clone(), work)
        .ln()
        .expect("r > 0");
    let lambda = &ln_c / &ln_r;
    let excess = &lambda - &BigReal::one(work);
    // r >= 6 for every triple, so log log r > 0
    let merit = &(&(&excess * &excess) * &ln_r) * &ln_r.ln().expect("log r > 0");
    (
        lambda.with_precision(precision),
        merit.with_precision(precision),
    )
}

impl AbcTriple {
    pub fn a(&self) -> &FactoredInteger {
        &self.a
    }

    pub fn b(&self) -> &FactoredInteger {
        &self.b
    }

    pub fn c(&self) -> &FactoredInteger {
        &self.c
    }

    pub fn radical(&self) -> &FactoredInteger {
        &self.r
    }

    /// `log c / log r`.
    pub fn lambda(&self) -> &BigReal {
        &self.lambda
    }

    /// `(lambda - 1)^2 log r log log r`.
    pub fn merit(&self) -> &BigReal {
        &self.merit
    }

    /// Stable short identifier: `c` and `a` in factored notation.
    pub fn id(&self) -> String {
        let mut s = String::from("c=");
        s.push_str(&self.c.to_string());
        s.push_str(";a=");
        s.push_str(&self.a.to_string());
        s
    }
}

impl PartialEq for AbcTriple {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.c == other.c
    }
}

impl Eq for AbcTriple {}

impl fmt::Display for AbcTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} c={}", self.a, self.b, self.c)
    }
}

/// The fields of one triple-list line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleLine {
    pub a: FactoredInteger,
    pub c: FactoredInteger,
    pub b: Option<FactoredInteger>,
}

/// Parses `a=<factored> c=<factored> [b=<factored>]`. Blank lines and
/// `#` comments yield `Ok(None)`.
pub fn parse_triple_line(line: &str) -> Result<Option<TripleLine>, TripleError> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    if body.trim().is_empty() {
        return Ok(None);
    }
    let mut fields: [Option<String>; 3] = [None, None, None];
    let mut current: Option<usize> = None;
    for token in body.split_whitespace() {
        let (slot, rest) = match token.split_once('=') {
            Some((key, rest)) => {
                let slot = match key {
                    "a" => 0,
                    "b" => 1,
                    "c" => 2,
                    other => {
                        return Err(TripleError::Parse(alloc::format!(
                            "unknown field `{other}`"
                        )))
                    }
                };
                if fields[slot].is_some() {
                    return Err(TripleError::Parse(alloc::format!("field `{key}` repeated")));
                }
                fields[slot] = Some(String::new());
                current = Some(slot);
                (slot, rest)
            }
            None => match current {
                Some(slot) => (slot, token),
                None => return Err(TripleError::Parse(String::from("expected `a=`"))),
            },
        };
        let text = fields[slot].as_mut().expect("field opened");
        if !rest.is_empty() {
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(rest);
        }
    }
    let parse =
        |name: &str, text: Option<String>| -> Result<Option<FactoredInteger>, TripleError> {
            match text {
                None => Ok(None),
                Some(t) => parse_factored(&t)
                    .map(Some)
                    .map_err(|e| TripleError::Parse(alloc::format!("{name}: {e}"))),
            }
        };
    let [a, b, c] = fields;
    let a = parse("a", a)?.ok_or_else(|| TripleError::Parse(String::from("missing a")))?;
    let c = parse("c", c)?.ok_or_else(|| TripleError::Parse(String::from("missing c")))?;
    let b = parse("b", b)?;
    Ok(Some(TripleLine { a, c, b }))
}

/// A rejected line of a triple list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub error: TripleError,
}

/// Parses and validates a whole triple list. Bad lines are collected with
/// their 1-based line numbers; they do not stop the load.
pub fn parse_triple_list(text: &str, precision: Precision) -> (Vec<AbcTriple>, Vec<LineError>) {
    let mut triples = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let parsed = parse_triple_line(line).and_then(|l| match l {
            None => Ok(None),
            Some(l) => make_triple_with(l.a, l.c, l.b, &mut IterationBudget::default(), precision)
                .map(Some),
        });
        match parsed {
            Ok(Some(t)) => triples.push(t),
            Ok(None) => {}
            Err(error) => errors.push(LineError { line: i + 1, error }),
        }
    }
    (triples, errors)
}
