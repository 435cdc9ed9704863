//! Source rendering of expressions and programs.

use std::fmt::{self, Display, Write};

use num_traits::Signed;

use super::ast::{Decl, DeclKind, Expr, LValue, Program, Stmt, UnOp, POSTFIX_PRECEDENCE, UNARY_PRECEDENCE};

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Int(v) if v.is_negative() => UNARY_PRECEDENCE,
            Expr::Int(_) | Expr::Var(_) | Expr::Mux(..) => u8::MAX,
            Expr::Index(..) | Expr::Bit(..) => POSTFIX_PRECEDENCE,
            Expr::Unary(..) => UNARY_PRECEDENCE,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_char('(')?;
        }
        match self {
            Expr::Int(v) => write!(f, "{v}")?,
            Expr::Var(n) => f.write_str(n)?,
            Expr::Index(a, i) => write!(f, "{a}[{i}]")?,
            Expr::Bit(e, i) => {
                e.fmt_prec(f, POSTFIX_PRECEDENCE)?;
                write!(f, "[{i}]")?;
            }
            Expr::Unary(op, e) => {
                f.write_char(match op {
                    UnOp::Neg => '-',
                    UnOp::Not => '~',
                })?;
                e.fmt_prec(f, UNARY_PRECEDENCE)?;
            }
            Expr::Binary(op, a, b) => {
                a.fmt_prec(f, op.precedence())?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, op.precedence() + 1)?;
            }
            Expr::Mux(g, a, b) => write!(f, "mux({g}, {a}, {b})")?,
        }
        if paren {
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LValue::Scalar(n) => f.write_str(n),
            LValue::Elem(n, i) => write!(f, "{n}[{i}]"),
        }
    }
}

impl Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.kind {
            DeclKind::Input => "input",
            DeclKind::Output => "output",
            DeclKind::Inout => "inout",
            DeclKind::Var if self.len.is_some() => "array",
            DeclKind::Var => "var",
        };
        write!(f, "{kw} {}", self.name)?;
        if let Some(n) = self.len {
            write!(f, "[{n}]")?;
        }
        if let Some(w) = self.width {
            write!(f, ":u{w}")?;
        }
        f.write_char(';')
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], indent: usize) {
    let pad = "    ".repeat(indent);
    for s in stmts {
        match s {
            Stmt::Assign { lhs, rhs, .. } => writeln!(out, "{pad}{lhs} := {rhs};").unwrap(),
            Stmt::Cycle => writeln!(out, "{pad}cycle;").unwrap(),
            Stmt::For { var, init, cond, step, body, .. } => {
                writeln!(out, "{pad}for ({var} := {init}; {cond}; {var} := {step}) {{").unwrap();
                write_block(out, body, indent + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::If { cond, then, els, .. } => {
                writeln!(out, "{pad}if ({cond}) {{").unwrap();
                write_block(out, then, indent + 1);
                if els.is_empty() {
                    writeln!(out, "{pad}}}").unwrap();
                } else {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    write_block(out, els, indent + 1);
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
        }
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for d in &self.decls {
            writeln!(out, "{d}").unwrap();
        }
        write_block(&mut out, &self.body, 0);
        f.write_str(&out)
    }
}
