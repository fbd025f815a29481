//! Hand-written lexer and recursive-descent parser for `.sir` text.

use std::collections::HashSet;

use crate::ast::*;
use crate::error::SirError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[&str] = &[
    "<=", ">=", "==", "!=", "&&", "||", "(", ")", "{", "}", ";", ",", ".", ":", "=", "+", "-",
    "*", "/", "<", ">", "!",
];

const KEYWORDS: &[&str] = &[
    "class", "extends", "method", "local", "goto", "if", "output", "new", "null", "true", "false",
    "int", "bool",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SirError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += (i - start) as u32;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += (i - start) as u32;
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| SirError::syntax(pos, format!("integer literal `{text}` out of range")))?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len() as u32;
                out.push((Tok::Sym(s), pos));
            }
            None => return Err(SirError::syntax(pos, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
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

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn err<T>(&self, expected: &str) -> Result<T, SirError> {
        Err(SirError::syntax(
            self.pos(),
            format!("expected {expected}, found {}", Self::describe(self.peek())),
        ))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SirError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), SirError> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> Result<String, SirError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn ty(&mut self) -> Result<Ty, SirError> {
        if self.is_kw("int") {
            self.bump();
            Ok(Ty::Prim(PrimTy::Int))
        } else if self.is_kw("bool") {
            self.bump();
            Ok(Ty::Prim(PrimTy::Bool))
        } else {
            Ok(Ty::Class(self.ident()?))
        }
    }

    fn program(&mut self) -> Result<Program, SirError> {
        let mut p = Program::default();
        loop {
            if self.is_kw("class") {
                p.classes.push(self.class()?);
            } else if self.is_kw("method") {
                p.methods.push(self.method()?);
            } else if *self.peek() == Tok::Eof {
                return Ok(p);
            } else {
                return self.err("`class` or `method`");
            }
        }
    }

    fn class(&mut self) -> Result<ClassDecl, SirError> {
        let pos = self.pos();
        self.expect_kw("class")?;
        let name = self.ident()?;
        let parent = if self.is_kw("extends") {
            self.bump();
            Some(self.ident()?)
        } else {
            None
        };
        self.expect_sym("{")?;
        let mut c = ClassDecl {
            name,
            parent,
            prim_fields: Vec::new(),
            ref_fields: Vec::new(),
            pos,
        };
        while !self.is_sym("}") {
            let t = self.ty()?;
            let n = self.ident()?;
            self.expect_sym(";")?;
            match t {
                Ty::Prim(p) => c.prim_fields.push((n, p)),
                Ty::Class(k) => c.ref_fields.push((n, k)),
            }
        }
        self.bump();
        Ok(c)
    }

    fn method(&mut self) -> Result<Method, SirError> {
        let pos = self.pos();
        self.expect_kw("method")?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let t = self.ty()?;
                params.push((self.ident()?, t));
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("{")?;
        let mut locals = Vec::new();
        while self.is_kw("local") {
            self.bump();
            let t = self.ty()?;
            loop {
                locals.push((self.ident()?, t.clone()));
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect_sym(";")?;
        }
        let mut body = Vec::new();
        while !self.is_sym("}") {
            body.push(self.stmt()?);
        }
        if body.is_empty() {
            return Err(SirError::syntax(self.pos(), "method body must contain at least one statement"));
        }
        self.bump();
        check_labels(&body)?;
        Ok(Method {
            name,
            params,
            locals,
            body,
            pos,
        })
    }

    fn stmt(&mut self) -> Result<Stmt, SirError> {
        let mut label = None;
        if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::Sym(":") {
            label = Some(self.ident()?);
            self.bump();
        }
        let pos = self.pos();
        let kind = if self.is_kw("goto") {
            self.bump();
            StmtKind::Goto(self.ident()?)
        } else if self.is_kw("if") {
            self.bump();
            self.expect_sym("(")?;
            let e = self.expr()?;
            self.expect_sym(")")?;
            self.expect_kw("goto")?;
            StmtKind::If(e, self.ident()?)
        } else if self.is_kw("output") {
            self.bump();
            let lv = if self.is_kw("low") {
                Level::Low
            } else if self.is_kw("high") {
                Level::High
            } else {
                return self.err("`low` or `high`");
            };
            self.bump();
            self.expect_sym("(")?;
            let x = self.ident()?;
            self.expect_sym(")")?;
            StmtKind::Output(lv, x)
        } else {
            let x = self.ident()?;
            if self.is_sym(".") {
                self.bump();
                let member = self.ident()?;
                if self.is_sym("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.ident()?);
                            if self.is_sym(",") {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    StmtKind::Call {
                        recv: x,
                        method: member,
                        args,
                    }
                } else {
                    self.expect_sym("=")?;
                    StmtKind::Store {
                        obj: x,
                        field: member,
                        value: self.expr()?,
                    }
                }
            } else {
                self.expect_sym("=")?;
                let rhs = if self.is_kw("new") {
                    self.bump();
                    Rhs::New(self.ident()?)
                } else if self.is_kw("null") {
                    self.bump();
                    Rhs::Null
                } else if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::Sym(".") {
                    let s = self.ident()?;
                    self.bump();
                    Rhs::Field(s, self.ident()?)
                } else {
                    Rhs::Expr(self.expr()?)
                };
                StmtKind::Assign { lhs: x, rhs }
            }
        };
        self.expect_sym(";")?;
        Ok(Stmt { label, kind, pos })
    }

    fn expr(&mut self) -> Result<Expr, SirError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, SirError> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[("<", BinOp::Lt), ("<=", BinOp::Le), (">", BinOp::Gt), (">=", BinOp::Ge)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        'outer: loop {
            for (s, op) in LEVELS[level] {
                if self.is_sym(s) {
                    self.bump();
                    let rhs = self.binary(level + 1)?;
                    lhs = Expr::Binary(*op, Box::new(lhs), Box::new(rhs));
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, SirError> {
        if self.is_sym("-") {
            self.bump();
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.is_sym("!") {
            self.bump();
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => Ok(Expr::Var(self.ident()?)),
        }
    }
}

fn check_labels(body: &[Stmt]) -> Result<(), SirError> {
    let mut seen = HashSet::new();
    for s in body {
        if let Some(l) = &s.label {
            if !seen.insert(l.as_str()) {
                return Err(SirError::DuplicateLabel {
                    pos: s.pos,
                    label: l.clone(),
                });
            }
        }
    }
    for s in body {
        let target = match &s.kind {
            StmtKind::Goto(l) | StmtKind::If(_, l) => l,
            _ => continue,
        };
        if !seen.contains(target.as_str()) {
            return Err(SirError::UnresolvedLabel {
                pos: s.pos,
                label: target.clone(),
            });
        }
    }
    Ok(())
}

/// Parses a whole `.sir` document.
pub fn parse_program(source: &str) -> Result<Program, SirError> {
    let toks = lex(source)?;
    Parser { toks, at: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG1: &str = "
        class A { int fi; }
        class B { A fa; }
        method m(A a, B b, int i) {
          local B r;
          r = new B;
          a.fi = i;
          r.fa = a;
          output low(b);
        }";

    #[test]
    fn parses_running_example() {
        let p = parse_program(FIG1).unwrap();
        assert_eq!(p.classes.len(), 2);
        assert_eq!(p.methods.len(), 1);
        assert_eq!(p.methods[0].body.len(), 4);
        assert_eq!(p.methods[0].locals, vec![("r".to_string(), Ty::Class("B".into()))]);
    }

    #[test]
    fn empty_body_is_rejected() {
        let e = parse_program("method e() { }").unwrap_err();
        assert!(matches!(e, SirError::Syntax { .. }));
    }

    #[test]
    fn branch_targets_the_sink() {
        let p = parse_program("method f(int v) { local int l; if (v > 0) goto L; L: output low(l); }").unwrap();
        let body = &p.methods[0].body;
        assert_eq!(body.len(), 2);
        match &body[0].kind {
            StmtKind::If(Expr::Binary(BinOp::Gt, a, b), l) => {
                assert_eq!(**a, Expr::Var("v".into()));
                assert_eq!(**b, Expr::Int(0));
                assert_eq!(l, "L");
            }
            k => panic!("unexpected {k:?}"),
        }
        assert_eq!(body[1].label.as_deref(), Some("L"));
        assert_eq!(body[1].kind, StmtKind::Output(Level::Low, "l".into()));
    }

    #[test]
    fn label_errors() {
        let dup = parse_program("method d() { L: goto L; L: goto L; }").unwrap_err();
        assert!(matches!(dup, SirError::DuplicateLabel { .. }));
        let unres = parse_program("method u() { goto X; }").unwrap_err();
        assert!(matches!(unres, SirError::UnresolvedLabel { .. }));
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_program("method m() {\n  x = ;\n}").unwrap_err();
        match e {
            SirError::Syntax { pos, .. } => assert_eq!((pos.line, pos.col), (2, 7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_comments() {
        let p = parse_program("// header\nmethod p(int x) { x = 1 + 2 * x < 3 && !true; // tail\n }").unwrap();
        let StmtKind::Assign { rhs: Rhs::Expr(e), .. } = &p.methods[0].body[0].kind else {
            panic!()
        };
        assert_eq!(e.to_string(), "((1 + (2 * x)) < 3) && !true");
    }
}
