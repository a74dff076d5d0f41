//! Recursive-descent parser for the coefficient grammar.

use super::{BinOp, Expr, Func};
use crate::error::{Error, Result};

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.syntax("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.syntax(format!("unexpected `{}`", p.peek_char())));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or('?')
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn syntax(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            if !matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
                return Err(self.syntax("exponent must be a numeric literal"));
            }
            let k = self.number()?;
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'0'..=b'9' | b'.') => Ok(Expr::Const(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match name {
                    "t" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    _ => {
                        let Some(func) = Func::from_name(name) else {
                            return Err(Error::UnknownIdent {
                                offset: start,
                                name: name.to_string(),
                            });
                        };
                        self.skip_ws();
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::call(func, arg))
                    }
                }
            }
            Some(_) => Err(self.syntax(format!("unexpected `{}`", self.peek_char()))),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else if self.at_end() {
            Err(self.syntax(format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.syntax(format!("expected `{}`, found `{}`", c as char, self.peek_char())))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(b'0'..=b'9')) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` etc.: leave the `e` for the caller to reject
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.syntax(format!("number `{text}` is not a finite literal")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_examples() {
        assert!(matches!(parse_expr("2*t + sin(t)").unwrap(), Expr::Bin(BinOp::Add, ..)));
        assert!(matches!(parse_expr("t^2/(1-t)").unwrap(), Expr::Bin(BinOp::Div, ..)));
    }

    #[test]
    fn syntax_error_offsets() {
        assert_eq!(
            parse_expr("t +"),
            Err(Error::Syntax { offset: 3, message: "unexpected end of input".into() })
        );
        assert!(matches!(parse_expr("abs(t)"), Err(Error::UnknownIdent { offset: 0, .. })));
        assert!(matches!(parse_expr("t^t"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr("(t"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expr("1e999"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn precedence() {
        // unary minus binds looser than ^, subtraction is left-associative
        assert_eq!(parse_expr("-t^2").unwrap().eval(3.0).unwrap(), -9.0);
        assert_eq!(parse_expr("1-2-3").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(parse_expr("8/2/2").unwrap().eval(0.0).unwrap(), 2.0);
        assert_eq!(parse_expr("2*pi").unwrap().eval(0.0).unwrap(), 2.0 * std::f64::consts::PI);
        assert_eq!(parse_expr("1.5e1 + e").unwrap().eval(0.0).unwrap(), 15.0 + std::f64::consts::E);
    }

    #[test]
    fn printer_round_trip() {
        for src in ["2*t + sin(t)", "-t^2/(1-t)", "(t^2)^3", "sqrt(-(t-2))", "exp(-t)*cos(3*t)", "(-t)^2"] {
            let e = parse_expr(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
            assert_eq!(parse_expr(&printed).unwrap().to_string(), printed);
        }
    }
}
