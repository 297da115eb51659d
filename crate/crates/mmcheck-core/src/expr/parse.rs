//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            // right-associative
//! atom   := number | 'x' | '(' expr ')'
//!         | 'sqrt' '(' expr ')' | 'log' '(' expr ')' | 'exp' '(' expr ')'
//!         | 'pow' '(' expr ',' expr ')'
//! ```
//!
//! `^` and `pow` take a constant exponent: the exponent subexpression may
//! not contain `x` and is folded to a number at parse time. Errors carry
//! the byte offset into the source text.

use crate::error::{Error, Result};

use super::Expr;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with its starting offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(Token, usize)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b',' => Token::Comma,
            b'0'..=b'9' | b'.' => return self.lex_number().map(|t| Some((t, start))),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("identifier bytes are ascii")
                    .to_string();
                return Ok(Some((Token::Ident(name), start)));
            }
            other => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }

    fn lex_number(&mut self) -> Result<Token> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2e` followed by `x`).
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("number bytes are ascii");
        text.parse::<f64>().map(Token::Num).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }
}

pub(super) struct Parser {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    pub(super) fn parse(src: &str) -> Result<Expr> {
        let mut lexer = Lexer::new(src);
        let mut tokens = Vec::new();
        while let Some(t) = lexer.next()? {
            tokens.push(t);
        }
        let mut parser = Parser {
            tokens,
            cursor: 0,
            end: src.len(),
        };
        let expr = parser.expr()?;
        if let Some((_, off)) = parser.peek() {
            return Err(Error::Syntax {
                offset: off,
                message: "unexpected trailing input".into(),
            });
        }
        Ok(expr)
    }

    fn peek(&self) -> Option<(&Token, usize)> {
        self.tokens.get(self.cursor).map(|(t, o)| (t, *o))
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|&(_, o)| o)
            .unwrap_or(self.end)
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<()> {
        match self.bump() {
            Some((t, _)) if t == tok => Ok(()),
            Some((_, o)) => Err(Error::Syntax {
                offset: o,
                message: format!("expected {what}"),
            }),
            None => Err(Error::Syntax {
                offset: self.end,
                message: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((Token::Plus, _)) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::add(lhs, rhs);
                }
                Some((Token::Minus, _)) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some((Token::Star, _)) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                Some((Token::Slash, _)) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some((Token::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some((Token::Caret, _)) = self.peek() {
            self.bump();
            let exp_off = self.offset();
            let exponent = self.unary()?;
            let p = Self::fold_constant(&exponent, exp_off)?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some((Token::Num(v), _)) => Ok(Expr::Const(v)),
            Some((Token::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some((Token::Ident(name), off)) => self.call_or_var(name, off),
            Some((_, off)) => Err(Error::Syntax {
                offset: off,
                message: "expected a number, `x`, `(` or a function name".into(),
            }),
            None => Err(Error::Syntax {
                offset: self.end,
                message: "expected an expression".into(),
            }),
        }
    }

    fn call_or_var(&mut self, name: String, offset: usize) -> Result<Expr> {
        match name.as_str() {
            "x" => Ok(Expr::Var),
            "sqrt" | "log" | "exp" => {
                self.expect(Token::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(Token::RParen, "closing `)`")?;
                Ok(match name.as_str() {
                    "sqrt" => Expr::Sqrt(Box::new(arg)),
                    "log" => Expr::Log(Box::new(arg)),
                    _ => Expr::Exp(Box::new(arg)),
                })
            }
            "pow" => {
                self.expect(Token::LParen, "`(` after function name")?;
                let base = self.expr()?;
                self.expect(Token::Comma, "`,` between pow arguments")?;
                let exp_off = self.offset();
                let exponent = self.expr()?;
                self.expect(Token::RParen, "closing `)`")?;
                let p = Self::fold_constant(&exponent, exp_off)?;
                Ok(Expr::Pow(Box::new(base), p))
            }
            _ => Err(Error::UnknownIdentifier { offset, name }),
        }
    }

    /// Exponents must be constant; fold the subtree to a number.
    fn fold_constant(e: &Expr, offset: usize) -> Result<f64> {
        e.eval_constant().ok_or_else(|| Error::Syntax {
            offset,
            message: "exponent must be a constant expression".into(),
        })
    }
}
