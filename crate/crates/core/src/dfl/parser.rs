//! Recursive-descent parser with name resolution.
//!
//! Grammar (informal):
//!
//! ```text
//! program := (decl | stmt)*
//! decl    := ("input" | "output" | "inout" | "var") "array"? IDENT ("[" INT "]")? (":" TYPE)? ";"
//!          | "array" IDENT "[" INT "]" (":" TYPE)? ";"
//! stmt    := lvalue ":=" expr ";"
//!          | "for" "(" IDENT ":=" expr ";" expr ";" IDENT ":=" expr ")" block
//!          | "if" "(" expr ")" block ("else" (block | ifstmt))?
//!          | "cycle" ";"
//! expr    := precedence climbing over  | ^ & (== !=) (< <= > >=) (<< >>) (+ -) *
//! unary   := ("-" | "~") unary | postfix
//! postfix := primary ("[" expr "]")*
//! primary := INT | IDENT | "(" expr ")" | "mux" "(" expr "," expr "," expr ")"
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::{BinOp, Decl, DeclKind, Expr, LValue, Program, Stmt, UnOp};
use super::lexer::{tokenize, Tok};
use crate::error::{Error, Pos, Result};

const KEYWORDS: &[&str] = &["input", "output", "inout", "var", "array", "for", "if", "else", "cycle", "mux"];

pub fn parse(src: &str) -> Result<Program> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        decls: HashMap::new(),
        known: HashSet::new(),
        counters: Vec::new(),
        assigned: BTreeSet::new(),
    };
    let mut program = Program::default();
    while p.peek() != &Tok::Eof {
        if let Some(kind) = p.decl_start() {
            let d = p.decl(kind)?;
            program.decls.push(d);
        } else {
            program.body.push(p.stmt()?);
        }
    }
    for d in &program.decls {
        if d.kind == DeclKind::Output && !p.assigned.contains(&d.name) {
            return Err(Error::Semantic { pos: d.pos, msg: format!("output `{}` is never assigned", d.name) });
        }
    }
    Ok(program)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    decls: HashMap<String, Decl>,
    /// Scalars that have been declared or assigned so far.
    known: HashSet<String>,
    counters: Vec<String>,
    assigned: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected {}, found {}", t.describe(), self.peek().describe()))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok((s, pos))
            }
            other => self.syntax(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn int(&mut self) -> Result<num_bigint::BigInt> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            other => self.syntax(format!("expected integer, found {}", other.describe())),
        }
    }

    fn decl_start(&self) -> Option<DeclKind> {
        match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "input" => Some(DeclKind::Input),
                "output" => Some(DeclKind::Output),
                "inout" => Some(DeclKind::Inout),
                "var" | "array" => Some(DeclKind::Var),
                _ => None,
            },
            _ => None,
        }
    }

    fn decl(&mut self, kind: DeclKind) -> Result<Decl> {
        let pos = self.pos();
        let first = self.bump();
        let mut is_array = first == Tok::Ident("array".into());
        if !is_array && self.keyword("array") {
            self.bump();
            is_array = true;
        }
        let (name, npos) = self.ident()?;
        let len = if *self.peek() == Tok::LBracket {
            self.bump();
            let n = self.int()?;
            self.expect(Tok::RBracket)?;
            let n: usize = n
                .try_into()
                .ok()
                .filter(|&n: &usize| n > 0)
                .ok_or_else(|| Error::Semantic { pos: npos, msg: format!("array `{name}` needs a positive length") })?;
            Some(n)
        } else if is_array {
            return self.syntax(format!("array `{name}` needs a length"));
        } else {
            None
        };
        let width = if *self.peek() == Tok::Colon {
            self.bump();
            let (ty, tpos) = self.ident()?;
            let w = ty
                .strip_prefix('u')
                .and_then(|d| d.parse::<u32>().ok())
                .filter(|&w| w >= 1)
                .ok_or(Error::Syntax { pos: tpos, msg: format!("unknown type `{ty}` (expected uN)") })?;
            Some(w)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        if self.decls.contains_key(&name) || self.known.contains(&name) {
            return Err(Error::Semantic { pos: npos, msg: format!("`{name}` is declared twice") });
        }
        let d = Decl { name: name.clone(), kind, len, width, pos };
        if len.is_none() {
            self.known.insert(name.clone());
        }
        self.decls.insert(name, d.clone());
        Ok(d)
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.syntax("unterminated block");
            }
            if self.decl_start().is_some() {
                return self.syntax("declarations are only allowed at top level");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        if self.keyword("for") {
            return self.for_stmt();
        }
        if self.keyword("if") {
            return self.if_stmt();
        }
        if self.keyword("cycle") {
            self.bump();
            self.expect(Tok::Semi)?;
            return Ok(Stmt::Cycle);
        }
        let lhs = self.lvalue()?;
        self.expect(Tok::Assign)?;
        let rhs = self.expr()?;
        self.expect(Tok::Semi)?;
        self.define(&lhs, pos)?;
        Ok(Stmt::Assign { lhs, rhs, pos })
    }

    fn lvalue(&mut self) -> Result<LValue> {
        let (name, pos) = self.ident()?;
        let decl = self.decls.get(&name).cloned();
        if *self.peek() == Tok::LBracket {
            if !decl.as_ref().is_some_and(|d| d.len.is_some()) {
                return Err(Error::Semantic { pos, msg: format!("`{name}` is not an array") });
            }
            self.bump();
            let idx = self.expr()?;
            self.expect(Tok::RBracket)?;
            Ok(LValue::Elem(name, idx))
        } else {
            if decl.as_ref().is_some_and(|d| d.len.is_some()) {
                return Err(Error::Semantic { pos, msg: format!("array `{name}` needs an index") });
            }
            Ok(LValue::Scalar(name))
        }
    }

    fn define(&mut self, lhs: &LValue, pos: Pos) -> Result<()> {
        let name = lhs.base();
        if self.counters.iter().any(|c| c == name) {
            return Err(Error::Semantic { pos, msg: format!("loop counter `{name}` is assigned in its body") });
        }
        if let Some(d) = self.decls.get(name) {
            if d.kind == DeclKind::Input {
                return Err(Error::Semantic { pos, msg: format!("input `{name}` is assigned") });
            }
        }
        self.assigned.insert(name.to_string());
        if matches!(lhs, LValue::Scalar(_)) {
            self.known.insert(name.to_string());
        }
        Ok(())
    }

    fn for_stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        self.bump();
        self.expect(Tok::LParen)?;
        let (var, vpos) = self.ident()?;
        if self.decls.contains_key(&var) {
            return Err(Error::Semantic { pos: vpos, msg: format!("loop counter `{var}` shadows a declaration") });
        }
        self.expect(Tok::Assign)?;
        let init = self.expr()?;
        self.expect(Tok::Semi)?;
        self.counters.push(var.clone());
        let cond = self.expr()?;
        self.expect(Tok::Semi)?;
        let (svar, spos) = self.ident()?;
        if svar != var {
            return Err(Error::Semantic { pos: spos, msg: format!("loop step must assign `{var}`") });
        }
        self.expect(Tok::Assign)?;
        let step = self.expr()?;
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        self.counters.pop();
        Ok(Stmt::For { var, init, cond, step, body, pos })
    }

    fn if_stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        self.bump();
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let then = self.block()?;
        let els = if self.keyword("else") {
            self.bump();
            if self.keyword("if") {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If { cond, then, els, pos })
    }

    fn expr(&mut self) -> Result<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Pipe => BinOp::Or,
            Tok::Caret => BinOp::Xor,
            Tok::Amp => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Shl => BinOp::Shl,
            Tok::Shr => BinOp::Shr,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    fn binary(&mut self, min: u8) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let e = self.unary()?;
                Ok(match e {
                    Expr::Int(v) => Expr::Int(-v),
                    e => Expr::Unary(UnOp::Neg, Box::new(e)),
                })
            }
            Tok::Tilde => {
                self.bump();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let mut e = self.primary()?;
        while *self.peek() == Tok::LBracket {
            self.bump();
            let idx = self.expr()?;
            self.expect(Tok::RBracket)?;
            e = match e {
                Expr::Var(name) if self.is_array(&name) => Expr::Index(name, Box::new(idx)),
                other => Expr::Bit(Box::new(other), Box::new(idx)),
            };
        }
        if let Expr::Var(name) = &e {
            if self.is_array(name) {
                return Err(Error::Semantic { pos, msg: format!("array `{name}` needs an index") });
            }
        }
        Ok(e)
    }

    fn is_array(&self, name: &str) -> bool {
        !self.counters.iter().any(|c| c == name) && self.decls.get(name).is_some_and(|d| d.len.is_some())
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "mux" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let g = self.expr()?;
                self.expect(Tok::Comma)?;
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Mux(Box::new(g), Box::new(a), Box::new(b)))
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                let known =
                    self.counters.contains(&name) || self.known.contains(&name) || self.decls.contains_key(&name);
                if !known {
                    return Err(Error::Semantic { pos, msg: format!("unknown identifier `{name}`") });
                }
                Ok(Expr::Var(name))
            }
            other => self.syntax(format!("expected expression, found {}", other.describe())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_operand_is_reported_at_the_semicolon() {
        let err = parse("input a; var x; x := a + ;").unwrap_err();
        assert_eq!(err, Error::Syntax { pos: Pos { line: 1, col: 26 }, msg: "expected expression, found `;`".into() });
    }

    #[test]
    fn output_must_be_assigned() {
        let err = parse("input a; output y;").unwrap_err();
        assert!(matches!(err, Error::Semantic { ref msg, .. } if msg.contains("never assigned")));
    }

    #[test]
    fn unknown_names_and_misuse() {
        assert!(matches!(parse("output y; y := q;"), Err(Error::Semantic { .. })));
        assert!(matches!(parse("input a; a := 1;"), Err(Error::Semantic { .. })));
        assert!(matches!(parse("input a[2]; output y; y := a;"), Err(Error::Semantic { .. })));
        assert!(matches!(
            parse("output y; for (i := 0; i < 2; i := i + 1) { i := 3; } y := 1;"),
            Err(Error::Semantic { .. })
        ));
        assert!(matches!(parse("input a; input a;"), Err(Error::Semantic { .. })));
    }

    #[test]
    fn precedence_follows_the_grammar() {
        let p = parse("input a; input b; input c; output y; y := a + b * c << 1 & a == b | c;").unwrap();
        let Stmt::Assign { rhs, .. } = &p.body[0] else { panic!() };
        assert_eq!(rhs.to_string(), "a + b * c << 1 & a == b | c");
        let Expr::Binary(BinOp::Or, l, _) = rhs else { panic!("| binds loosest") };
        let Expr::Binary(BinOp::And, l, _) = &**l else { panic!() };
        assert!(matches!(&**l, Expr::Binary(BinOp::Shl, ..)));
    }

    #[test]
    fn postfix_distinguishes_arrays_and_bits() {
        let p = parse("input a[2]:u4; input x:u4; output y; y := a[1] + x[2] + a[0][3];").unwrap();
        let Stmt::Assign { rhs, .. } = &p.body[0] else { panic!() };
        assert_eq!(rhs.to_string(), "a[1] + x[2] + a[0][3]");
        assert_eq!(p.decl("a").unwrap().len, Some(2));
        assert_eq!(p.decl("x").unwrap().width, Some(4));
    }

    #[test]
    fn control_structures() {
        let src = "inout array v[4]; var t;
            for (i := 0; i < 4; i := i + 1) {
                if (i == 0) { v[i] := v[i] + 1; } else if (i == 1) { t := 2; v[i] := t; } else { v[i] := mux(v[i], 1, 0); }
                cycle;
            }";
        let p = parse(src).unwrap();
        assert_eq!(p.loop_count(), 1);
        let Stmt::For { body, .. } = &p.body[0] else { panic!() };
        assert_eq!(body.len(), 2);
        assert!(matches!(body[1], Stmt::Cycle));
    }
}
