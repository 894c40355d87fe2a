//! One-variable expressions and tabulated functions for coefficient and data
//! inputs.
//!
//! Expressions support `+ - * / ^`, unary minus, parentheses, the constant
//! `pi` and the functions `sin cos exp sqrt abs log`. Precedence, from
//! tightest: `^` (right-associative), unary minus, `* /`, `+ -`. So `-x^2`
//! is `-(x^2)` and `2^3^2` is `2^(3^2)`.

mod parser;
mod table;

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

pub use table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Log,
}

impl Func {
    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "log" => Func::Log,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Log => "log",
        }
    }

    fn apply(self, v: f64) -> Result<f64> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Exp => Ok(v.exp()),
            Func::Abs => Ok(v.abs()),
            Func::Sqrt if v < 0.0 => Err(Error::Domain(format!("sqrt of negative value {v}"))),
            Func::Sqrt => Ok(v.sqrt()),
            Func::Log if v <= 0.0 => Err(Error::Domain(format!("log of nonpositive value {v}"))),
            Func::Log => Ok(v.ln()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Node::Const(c) => Ok(*c),
            Node::Var => Ok(x),
            Node::Neg(a) => Ok(-a.eval(x)?),
            Node::Call(f, a) => f.apply(a.eval(x)?),
            Node::Binary(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinaryOp::Add => Ok(a + b),
                    BinaryOp::Sub => Ok(a - b),
                    BinaryOp::Mul => Ok(a * b),
                    BinaryOp::Div if b == 0.0 => Err(Error::Domain("division by zero".into())),
                    BinaryOp::Div => Ok(a / b),
                    BinaryOp::Pow if a == 0.0 && b < 0.0 => {
                        Err(Error::Domain(format!("zero raised to negative power {b}")))
                    }
                    BinaryOp::Pow => Ok(a.powf(b)),
                }
            }
        }
    }

    fn write(&self, out: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        match self {
            // `{:?}` prints the shortest representation that round-trips.
            Node::Const(c) if *c < 0.0 => write!(out, "({c:?})"),
            Node::Const(c) => write!(out, "{c:?}"),
            Node::Var => out.write_str(var),
            Node::Neg(a) => {
                out.write_str("(-")?;
                a.write(out, var)?;
                out.write_str(")")
            }
            Node::Call(f, a) => {
                write!(out, "{}(", f.name())?;
                a.write(out, var)?;
                out.write_str(")")
            }
            Node::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Pow => "^",
                };
                out.write_str("(")?;
                a.write(out, var)?;
                out.write_str(sym)?;
                b.write(out, var)?;
                out.write_str(")")
            }
        }
    }
}

/// A parsed expression in a single declared variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    variable: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str, variable: &str) -> Result<Expr> {
        let root = parser::Parser::new(source, variable).parse()?;
        Ok(Expr {
            variable: variable.to_string(),
            root,
        })
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, value: f64) -> Result<f64> {
        let v = self.root.eval(value)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!(
                "non-finite result at {}={value}",
                self.variable
            )))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &self.variable)
    }
}

/// `parse_expr` from the module contract.
pub fn parse_expr(source: &str, variable: &str) -> Result<Expr> {
    Expr::parse(source, variable)
}

/// `eval_expr` from the module contract.
pub fn eval_expr(expr: &Expr, value: f64) -> Result<f64> {
    expr.eval(value)
}

/// A data function given either as an expression or as a sample table.
#[derive(Debug, Clone, PartialEq)]
pub enum DataFn {
    Expr(Expr),
    Table(Table),
}

impl DataFn {
    pub fn expr(source: &str, variable: &str) -> Result<DataFn> {
        Expr::parse(source, variable).map(DataFn::Expr)
    }

    pub fn constant(c: f64) -> DataFn {
        DataFn::Expr(Expr {
            variable: "x".into(),
            root: Node::Const(c),
        })
    }

    pub fn table_from_csv(path: &Path) -> Result<DataFn> {
        Table::from_csv(path).map(DataFn::Table)
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        match self {
            DataFn::Expr(e) => e.eval(v),
            DataFn::Table(t) => t.eval(v),
        }
    }

    pub fn sample(&self, points: &[f64]) -> Result<Vec<f64>> {
        points.iter().map(|&v| self.eval(v)).collect()
    }

    /// Short human-readable description for manifests.
    pub fn describe(&self) -> String {
        match self {
            DataFn::Expr(e) => e.to_string(),
            DataFn::Table(t) => format!("table[{} points on [{}, {}]]", t.len(), t.min(), t.max()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        Expr::parse(src, "x").unwrap().eval(x).unwrap()
    }

    #[test]
    fn basic_examples() {
        assert!((ev("sin(pi*x)", 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(ev("x^2+1", 2.0), 5.0);
        assert_eq!(ev("exp(-x)", 0.0), 1.0);
        assert_eq!(ev("sqrt(x)", 4.0), 2.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("1-2-3", 0.0), -4.0);
        assert_eq!(ev("8/4/2", 0.0), 1.0);
        assert_eq!(ev("2*-x", 3.0), -6.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(ev("1.5e2 + 2E-1", 0.0), 150.2);
        assert_eq!(ev("abs(-x) + log(exp(2))", 1.0), 3.0);
    }

    #[test]
    fn unknown_identifier_names_token() {
        match Expr::parse("y+1", "x") {
            Err(Error::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "y");
                assert_eq!(position, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Expr::parse("x + foo(x)", "x"),
            Err(Error::UnknownIdentifier { ref name, position: 4 }) if name == "foo"
        ));
    }

    #[test]
    fn syntax_errors_have_positions() {
        for (src, pos) in [
            ("", 0),
            ("x +", 3),
            ("(x", 2),
            ("x )", 2),
            ("sin x", 4),
            ("2..3", 0),
        ] {
            match Expr::parse(src, "x") {
                Err(Error::Syntax { position, .. }) => assert_eq!(position, pos, "{src}"),
                other => panic!("{src}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("1/x", "x").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Domain(_))));
        let e = Expr::parse("log(x)", "x").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(e.eval(-1.0), Err(Error::Domain(_))));
        let e = Expr::parse("x^(-2)", "x").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Domain(_))));
        let e = Expr::parse("sqrt(x)", "x").unwrap();
        assert!(matches!(e.eval(-4.0), Err(Error::Domain(_))));
    }

    #[test]
    fn other_variable_names() {
        let e = Expr::parse("1 + t^2", "t").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), 10.0);
        assert!(Expr::parse("1 + x", "t").is_err());
    }

    #[test]
    fn identity_and_constants() {
        let id = Expr::parse("x", "x").unwrap();
        let c = Expr::parse("3.25 * pi", "x").unwrap();
        for v in [-7.5, 0.0, 1e-300, 4.0e10] {
            assert_eq!(id.eval(v).unwrap(), v);
            assert_eq!(c.eval(v).unwrap(), c.eval(0.0).unwrap());
        }
    }
}
