//! Syntax tree of the dataflow language.

use num_bigint::BigInt;

use crate::error::Pos;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeclKind {
    Input,
    Output,
    /// Read as an input and written back as an output (in-place arrays).
    Inout,
    /// Internal storage.
    Var,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub kind: DeclKind,
    /// Element count for arrays.
    pub len: Option<usize>,
    /// Declared bit width (`:uN`).
    pub width: Option<u32>,
    pub pos: Pos,
}

impl Decl {
    pub fn is_input(&self) -> bool {
        matches!(self.kind, DeclKind::Input | DeclKind::Inout)
    }

    pub fn is_output(&self) -> bool {
        matches!(self.kind, DeclKind::Output | DeclKind::Inout)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// Arithmetic negation.
    Neg,
    /// Logical complement `1 - a` of a single-bit value.
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Shl,
    Shr,
    And,
    Or,
    Xor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::Xor => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne => 4,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Shl | BinOp::Shr => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul => 8,
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

pub const UNARY_PRECEDENCE: u8 = 9;
pub const POSTFIX_PRECEDENCE: u8 = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(BigInt),
    /// Scalar (or, after unrolling, a concrete array element such as `a[2]`).
    Var(String),
    /// Array element with a possibly symbolic index; gone after unrolling.
    Index(String, Box<Expr>),
    /// Bit `i` of a value: `(e >> i) & 1`.
    Bit(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `mux(g, a, b)`: `a` if `g != 0`, else `b`.
    Mux(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int<T: Into<BigInt>>(v: T) -> Expr {
        Expr::Int(v.into())
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Expr::Int(v) => Some(v),
            _ => None,
        }
    }

    /// Constants and plain names.
    pub fn is_atom(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Var(_))
    }

    /// Names read by the expression, in first-occurrence order.
    pub fn reads(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_reads(&mut out);
        out
    }

    fn collect_reads<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
            Expr::Index(_, i) => i.collect_reads(out),
            Expr::Bit(a, b) | Expr::Binary(_, a, b) => {
                a.collect_reads(out);
                b.collect_reads(out);
            }
            Expr::Unary(_, a) => a.collect_reads(out),
            Expr::Mux(g, a, b) => {
                g.collect_reads(out);
                a.collect_reads(out);
                b.collect_reads(out);
            }
        }
    }

    /// Rewrites every `Var` through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Expr) -> Expr {
        match self {
            Expr::Int(_) => self.clone(),
            Expr::Var(n) => f(n),
            Expr::Index(a, i) => Expr::Index(a.clone(), Box::new(i.map_vars(f))),
            Expr::Bit(a, b) => Expr::Bit(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.map_vars(f))),
            Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Mux(g, a, b) => Expr::Mux(Box::new(g.map_vars(f)), Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
        }
    }

    /// Number of operator nodes.
    pub fn op_count(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Var(_) => 0,
            Expr::Index(_, i) => i.op_count(),
            Expr::Unary(_, a) => 1 + a.op_count(),
            Expr::Bit(a, b) | Expr::Binary(_, a, b) => 1 + a.op_count() + b.op_count(),
            Expr::Mux(g, a, b) => 1 + g.op_count() + a.op_count() + b.op_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LValue {
    Scalar(String),
    Elem(String, Expr),
}

impl LValue {
    pub fn base(&self) -> &str {
        match self {
            LValue::Scalar(n) | LValue::Elem(n, _) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign {
        lhs: LValue,
        rhs: Expr,
        pos: Pos,
    },
    For {
        var: String,
        init: Expr,
        cond: Expr,
        step: Expr,
        body: Vec<Stmt>,
        pos: Pos,
    },
    If {
        cond: Expr,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
        pos: Pos,
    },
    /// Clock-cycle boundary marker; no semantic effect.
    Cycle,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// Number of loops, counted at every nesting level.
    pub fn loop_count(&self) -> usize {
        fn count(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::For { body, .. } => 1 + count(body),
                    Stmt::If { then, els, .. } => count(then) + count(els),
                    _ => 0,
                })
                .sum()
        }
        count(&self.body)
    }

    /// Deepest loop nesting.
    pub fn loop_depth(&self) -> usize {
        fn depth(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::For { body, .. } => 1 + depth(body),
                    Stmt::If { then, els, .. } => depth(then).max(depth(els)),
                    _ => 0,
                })
                .max()
                .unwrap_or(0)
        }
        depth(&self.body)
    }
}
