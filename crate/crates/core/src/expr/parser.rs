use super::{BinaryOp, Func, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                position: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(Error::Syntax {
                        position: i,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push((tok, i));
            i += c.len_utf8();
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

pub(super) struct Parser<'a> {
    src: &'a str,
    variable: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str, variable: &'a str) -> Self {
        Parser {
            src,
            variable,
            toks: Vec::new(),
            pos: 0,
        }
    }

    pub(super) fn parse(mut self) -> Result<Node> {
        if self.src.trim().is_empty() {
            return Err(Error::Syntax {
                position: 0,
                message: "empty expression".into(),
            });
        }
        self.toks = lex(self.src)?;
        let node = self.expr()?;
        match self.peek() {
            Tok::End => Ok(node),
            _ => Err(self.unexpected()),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> Error {
        let message = match self.peek() {
            Tok::End => "unexpected end of input".to_string(),
            t => format!("unexpected token {t:?}"),
        };
        Error::Syntax {
            position: self.offset(),
            message,
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            // Exponent re-enters at the unary level: right-associative, and
            // `2^-1` is accepted.
            let exp = self.unary()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == self.variable {
                    return Ok(Node::Var);
                }
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                match Func::from_name(&name) {
                    Some(func) => {
                        if *self.peek() != Tok::LParen {
                            return Err(Error::Syntax {
                                position: self.offset(),
                                message: format!("expected `(` after function `{name}`"),
                            });
                        }
                        self.bump();
                        let arg = self.expr()?;
                        self.expect_rparen()?;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier { name, position: at }),
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.offset(),
                message: "expected `)`".into(),
            })
        }
    }
}
