//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' integer)?
//! atom   := number | 'i' | 'z' | 'exp' '(' expr ')' | '(' expr ')' | '-' atom
//! ```
//!
//! The exponent may carry a sign (`z^-2`). Numbers are decimal literals with
//! an optional exponent part.

use num_complex::Complex64;

use super::MeroExpr;
use crate::Error;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char) -> crate::Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(syntax(self.pos, format!("expected `{want}`, found `{c}`"))),
            None => Err(syntax(self.pos, format!("expected `{want}`, found end of input"))),
        }
    }

    fn expr(&mut self) -> crate::Result<MeroExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = MeroExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some('-') => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = MeroExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> crate::Result<MeroExpr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = MeroExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some('/') => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = MeroExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> crate::Result<MeroExpr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.bump();
            let n = self.integer()?;
            return Ok(MeroExpr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer(&mut self) -> crate::Result<i32> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let mut neg = false;
        if let Some(c @ ('-' | '+')) = self.peek() {
            neg = c == '-';
            self.bump();
        }
        self.skip_ws();
        let digits_start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(syntax(digits_start, "expected an integer exponent"));
        }
        let text = &self.src[digits_start..self.pos];
        let v: i64 = text
            .parse()
            .map_err(|_| syntax(start, "exponent out of range"))?;
        let v = if neg { -v } else { v };
        i32::try_from(v).map_err(|_| syntax(start, "exponent out of range"))
    }

    fn number(&mut self) -> crate::Result<MeroExpr> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let mut n = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            n += digits(&mut p);
        }
        if n == 0 {
            return Err(syntax(start, "malformed number"));
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) > 0 {
                p = q;
            }
        }
        let text = &self.src[start..p];
        let x: f64 = text.parse().map_err(|_| syntax(start, "malformed number"))?;
        if !x.is_finite() {
            return Err(syntax(start, "number out of range"));
        }
        self.pos = p;
        Ok(MeroExpr::Const(Complex64::new(x, 0.0)))
    }

    fn atom(&mut self) -> crate::Result<MeroExpr> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => Err(syntax(start, "unexpected end of input")),
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('-') => {
                self.bump();
                let a = self.atom()?;
                Ok(MeroExpr::Neg(Box::new(a)))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let rest = &self.src[start..];
                let len = rest
                    .char_indices()
                    .find(|&(_, c)| !(c.is_alphanumeric() || c == '_'))
                    .map_or(rest.len(), |(i, _)| i);
                let name = &rest[..len];
                self.pos = start + len;
                match name {
                    "z" => Ok(MeroExpr::Var),
                    "i" => Ok(MeroExpr::Const(Complex64::new(0.0, 1.0))),
                    "exp" => {
                        self.expect('(')?;
                        let e = self.expr()?;
                        self.expect(')')?;
                        Ok(MeroExpr::Exp(Box::new(e)))
                    }
                    _ => Err(Error::UnknownIdentifier {
                        offset: start,
                        name: name.to_string(),
                    }),
                }
            }
            Some(c) => Err(syntax(start, format!("unexpected `{c}`"))),
        }
    }
}

/// Parses an expression in `z`.
pub fn parse_mero(src: &str) -> crate::Result<MeroExpr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(syntax(p.pos, format!("unexpected `{c}` after expression")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use MeroExpr::*;

    fn b(e: MeroExpr) -> Box<MeroExpr> {
        Box::new(e)
    }

    fn r(x: f64) -> MeroExpr {
        MeroExpr::real(x)
    }

    #[test]
    fn variable() {
        assert_eq!(parse_mero("z").unwrap(), Var);
        assert_eq!(parse_mero("  z ").unwrap(), Var);
    }

    #[test]
    fn rational_shape() {
        let e = parse_mero("1/(z^2-1)").unwrap();
        assert_eq!(e, Div(b(r(1.0)), b(Sub(b(Pow(b(Var), 2)), b(r(1.0))))));
    }

    #[test]
    fn two_exp_nodes() {
        let e = parse_mero("exp(z)/(1+exp(z))").unwrap();
        let ez = Exp(b(Var));
        assert_eq!(e, Div(b(ez.clone()), b(Add(b(r(1.0)), b(ez)))));
    }

    #[test]
    fn unary_minus_binds_to_atom() {
        assert_eq!(parse_mero("-z^2").unwrap(), Pow(b(Neg(b(Var))), 2));
        assert_eq!(parse_mero("2*-z").unwrap(), Mul(b(r(2.0)), b(Neg(b(Var)))));
        assert_eq!(parse_mero("z^-2").unwrap(), Pow(b(Var), -2));
    }

    #[test]
    fn left_associative() {
        assert_eq!(
            parse_mero("z-1-2").unwrap(),
            Sub(b(Sub(b(Var), b(r(1.0)))), b(r(2.0)))
        );
        assert_eq!(
            parse_mero("1/z/2").unwrap(),
            Div(b(Div(b(r(1.0)), b(Var))), b(r(2.0)))
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_mero("0.25").unwrap(), r(0.25));
        assert_eq!(parse_mero(".5").unwrap(), r(0.5));
        assert_eq!(parse_mero("1e-3").unwrap(), r(1e-3));
        assert_eq!(parse_mero("i").unwrap(), Const(Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse_mero("z + w"),
            Err(Error::UnknownIdentifier {
                offset: 4,
                name: "w".into()
            })
        );
        assert!(matches!(parse_mero("z +"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse_mero("(z"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_mero("z)"), Err(Error::Syntax { offset: 1, .. })));
        assert!(matches!(parse_mero("z^x"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_mero("z^1.5"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse_mero(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_mero("sin(z)"), Err(Error::UnknownIdentifier { offset: 0, .. })));
    }
}
