//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula  := '~' formula
//!           | quant var ['in' term] ['.'] formula
//!           | '(' formula (binop formula)* ')'
//!           | term ('in' | '=') term
//! quant    := 'E' | 'A' | 'E!'
//! binop    := '|' | '&' | '->'       (one operator kind per parenthesis)
//! term     := [a-z][a-z0-9_]*  |  '#' digits
//! ```

use thiserror::Error;

use super::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    Const(usize),
    In,
    Eq,
    Not,
    Or,
    And,
    Implies,
    LParen,
    RParen,
    Dot,
    Exists(String),
    ExistsUnique(String),
    Forall(String),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Or,
    And,
    Implies,
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident = |start: usize| -> usize {
        let mut j = start;
        while j < bytes.len() && (bytes[j].is_ascii_lowercase() || bytes[j].is_ascii_digit() || bytes[j] == b'_') {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => {
                out.push((start, Tok::Not));
                i += 1;
            }
            b'|' => {
                out.push((start, Tok::Or));
                i += 1;
            }
            b'&' => {
                out.push((start, Tok::And));
                i += 1;
            }
            b'=' => {
                out.push((start, Tok::Eq));
                i += 1;
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            b'.' => {
                out.push((start, Tok::Dot));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) != Some(&b'>') {
                    return err(start, "expected `->`");
                }
                out.push((start, Tok::Implies));
                i += 2;
            }
            b'#' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return err(start, "expected digits after `#`");
                }
                let n = src[i + 1..j]
                    .parse()
                    .map_err(|_| ParseError { pos: start, message: "constant out of range".into() })?;
                out.push((start, Tok::Const(n)));
                i = j;
            }
            b'E' | b'A' => {
                let mut j = i + 1;
                let unique = c == b'E' && bytes.get(j) == Some(&b'!');
                if unique {
                    j += 1;
                }
                while j < bytes.len() && bytes[j] == b' ' {
                    j += 1;
                }
                if j >= bytes.len() || !bytes[j].is_ascii_lowercase() {
                    return err(j, "expected a variable after quantifier");
                }
                let end = ident(j);
                let name = src[j..end].to_string();
                if name == "in" {
                    return err(j, "`in` is reserved");
                }
                out.push((
                    start,
                    match (c, unique) {
                        (b'E', false) => Tok::Exists(name),
                        (b'E', true) => Tok::ExistsUnique(name),
                        _ => Tok::Forall(name),
                    },
                ));
                i = end;
            }
            b'a'..=b'z' => {
                let end = ident(i);
                let word = &src[i..end];
                out.push((start, if word == "in" { Tok::In } else { Tok::Var(word.to_string()) }));
                i = end;
            }
            _ => return err(start, format!("unexpected character `{}`", c as char)),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let at = self.here();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => err(at, format!("expected {what}")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Var(v)) => Ok(Term::Var(v)),
            Some(Tok::Const(c)) => Ok(Term::Const(c)),
            _ => err(at, "expected a variable or `#n` constant"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let at = self.here();
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.formula()?))
            }
            Some(Tok::Exists(_)) | Some(Tok::ExistsUnique(_)) | Some(Tok::Forall(_)) => self.quantified(),
            Some(Tok::LParen) => self.parenthesized(),
            Some(Tok::Var(_)) | Some(Tok::Const(_)) => {
                let left = self.term()?;
                let op_at = self.here();
                match self.bump() {
                    Some(Tok::In) => Ok(Formula::mem(left, self.term()?)),
                    Some(Tok::Eq) => Ok(Formula::eq(left, self.term()?)),
                    _ => err(op_at, "expected `in` or `=`"),
                }
            }
            _ => err(at, "expected a formula"),
        }
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let quant = self.bump().expect("caller peeked");
        let var = match &quant {
            Tok::Exists(v) | Tok::ExistsUnique(v) | Tok::Forall(v) => v.clone(),
            _ => unreachable!(),
        };
        let bound = if self.peek() == Some(&Tok::In) {
            self.bump();
            let at = self.here();
            let t = self.term()?;
            if t.as_var() == Some(var.as_str()) {
                return err(at, "bounding term may not be the quantified variable");
            }
            Some(t)
        } else {
            None
        };
        if self.peek() == Some(&Tok::Dot) {
            self.bump();
        }
        let body = self.formula()?;
        let guard = bound.map(|t| Formula::mem(Term::Var(var.clone()), t));
        Ok(match (quant, guard) {
            (Tok::Exists(_), None) => Formula::exists(&var, body),
            (Tok::Exists(_), Some(g)) => Formula::exists(&var, Formula::and(g, body)),
            (Tok::Forall(_), None) => Formula::forall(&var, body),
            (Tok::Forall(_), Some(g)) => Formula::forall(&var, Formula::implies(g, body)),
            (Tok::ExistsUnique(_), None) => Formula::exists_unique(&var, body),
            (Tok::ExistsUnique(_), Some(g)) => Formula::exists_unique(&var, Formula::and(g, body)),
            _ => unreachable!(),
        })
    }

    fn parenthesized(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut operands = vec![self.formula()?];
        let mut op: Option<BinOp> = None;
        loop {
            let at = self.here();
            let next = match self.peek() {
                Some(Tok::RParen) => {
                    self.bump();
                    break;
                }
                Some(Tok::Or) => BinOp::Or,
                Some(Tok::And) => BinOp::And,
                Some(Tok::Implies) => BinOp::Implies,
                _ => return err(at, "expected a connective or `)`"),
            };
            if op.is_some_and(|o| o != next) {
                return err(at, "mixed connectives need their own parentheses");
            }
            op = Some(next);
            self.bump();
            operands.push(self.formula()?);
        }
        let Some(op) = op else {
            return Ok(operands.pop().expect("one operand"));
        };
        Ok(match op {
            BinOp::Or => fold_left(operands, Formula::or),
            BinOp::And => fold_left(operands, Formula::and),
            BinOp::Implies => {
                let mut it = operands.into_iter().rev();
                let last = it.next().expect("at least two operands");
                it.fold(last, |acc, f| Formula::implies(f, acc))
            }
        })
    }
}

fn fold_left(operands: Vec<Formula>, join: fn(Formula, Formula) -> Formula) -> Formula {
    let mut it = operands.into_iter();
    let first = it.next().expect("at least two operands");
    it.fold(first, join)
}

/// Parses formula text into the core (`¬`, `∨`, `∃`) fragment.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        let at = p.here();
        if matches!(p.peek(), Some(Tok::Or | Tok::And | Tok::Implies)) {
            return err(at, "binary connectives must be parenthesized");
        }
        return err(at, "trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn empty_set_sentence() {
        let f = parse("Ex Ay ~(y in x)").unwrap();
        let expected = Formula::exists(
            "x",
            Formula::not(Formula::exists(
                "y",
                Formula::not(Formula::not(Formula::mem(v("y"), v("x")))),
            )),
        );
        assert_eq!(f, expected);
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn atoms_and_constants() {
        let f = parse("x in y").unwrap();
        assert_eq!(f, Formula::mem(v("x"), v("y")));
        assert_eq!(f.free_vars(), vec!["x", "y"]);
        assert_eq!(
            parse("Ex (x in #0)").unwrap(),
            Formula::exists("x", Formula::mem(v("x"), Term::Const(0)))
        );
        assert_eq!(parse("x = #12").unwrap(), Formula::eq(v("x"), Term::Const(12)));
    }

    #[test]
    fn dot_after_quantifier_is_optional() {
        assert_eq!(parse("Ex . (x = x)").unwrap(), parse("Ex (x = x)").unwrap());
        assert_eq!(parse("E x. x = x").unwrap(), parse("Ex x = x").unwrap());
    }

    #[test]
    fn sugar_expands() {
        assert_eq!(
            parse("(x in y & y in x)").unwrap(),
            Formula::and(Formula::mem(v("x"), v("y")), Formula::mem(v("y"), v("x")))
        );
        assert_eq!(
            parse("(x in y -> y in x)").unwrap(),
            Formula::or(Formula::not(Formula::mem(v("x"), v("y"))), Formula::mem(v("y"), v("x")))
        );
        assert_eq!(
            parse("Ex in y . x = x").unwrap(),
            Formula::exists("x", Formula::and(Formula::mem(v("x"), v("y")), Formula::eq(v("x"), v("x"))))
        );
        assert_eq!(
            parse("Ax in y . x = x").unwrap(),
            Formula::forall("x", Formula::implies(Formula::mem(v("x"), v("y")), Formula::eq(v("x"), v("x"))))
        );
    }

    #[test]
    fn chains_associate() {
        let (a, b, c) = (parse("a = a").unwrap(), parse("b = b").unwrap(), parse("c = c").unwrap());
        assert_eq!(
            parse("(a = a | b = b | c = c)").unwrap(),
            Formula::or(Formula::or(a.clone(), b.clone()), c.clone())
        );
        assert_eq!(
            parse("(a = a -> b = b -> c = c)").unwrap(),
            Formula::implies(a, Formula::implies(b, c))
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("x in y | y in x").unwrap_err();
        assert_eq!(e.pos, 7);
        let e = parse("(x in y | y in x & x = x)").unwrap_err();
        assert_eq!(e.pos, 17);
        assert_eq!(parse("x on y").unwrap_err().pos, 2);
        assert_eq!(parse("Ex").unwrap_err().pos, 2);
        assert!(parse("(x in y").is_err());
        assert!(parse("x in Y").is_err());
        assert!(parse("# in x").is_err());
        assert!(parse("Ex in x . x = x").is_err());
        assert!(parse("").is_err());
    }
}
