//! Surface syntax tree of `.sir` programs and its pretty-printer.

use std::fmt;

/// Source position, 1-based.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum PrimTy {
    Int,
    Bool,
}

impl fmt::Display for PrimTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimTy::Int => "int",
            PrimTy::Bool => "bool",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Prim(PrimTy),
    Class(String),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Prim(p) => p.fmt(f),
            Ty::Class(c) => f.write_str(c),
        }
    }
}

/// Output channel level.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Low,
    High,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Low => "low",
            Level::High => "high",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Non-negative literal; negation is a unary operator.
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Unary(UnOp::Neg, e) => write!(f, "-{}", Atom(e)),
            Expr::Unary(UnOp::Not, e) => write!(f, "!{}", Atom(e)),
            Expr::Binary(op, a, b) => write!(f, "{} {} {}", Atom(a), op.symbol(), Atom(b)),
        }
    }
}

/// Prints a subexpression, parenthesizing anything that is not atomic.
struct Atom<'a>(&'a Expr);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expr::Binary(..) => write!(f, "({})", self.0),
            e => e.fmt(f),
        }
    }
}

/// Right-hand side of `x = ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Field(String, String),
    New(String),
    Null,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign { lhs: String, rhs: Rhs },
    Store { obj: String, field: String, value: Expr },
    Call { recv: String, method: String, args: Vec<String> },
    Goto(String),
    If(Expr, String),
    Output(Level, String),
}

impl fmt::Display for StmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StmtKind::Assign { lhs, rhs } => match rhs {
                Rhs::Expr(e) => write!(f, "{lhs} = {e};"),
                Rhs::Field(s, fld) => write!(f, "{lhs} = {s}.{fld};"),
                Rhs::New(c) => write!(f, "{lhs} = new {c};"),
                Rhs::Null => write!(f, "{lhs} = null;"),
            },
            StmtKind::Store { obj, field, value } => write!(f, "{obj}.{field} = {value};"),
            StmtKind::Call { recv, method, args } => {
                write!(f, "{recv}.{method}({});", args.join(", "))
            }
            StmtKind::Goto(l) => write!(f, "goto {l};"),
            StmtKind::If(e, l) => write!(f, "if ({e}) goto {l};"),
            StmtKind::Output(lv, x) => write!(f, "output {lv}({x});"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub label: Option<String>,
    pub kind: StmtKind,
    pub pos: Pos,
}

/// Positions are diagnostics only and do not take part in equality.
impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.kind == other.kind
    }
}

impl Eq for Stmt {}

#[derive(Clone, Debug)]
pub struct ClassDecl {
    pub name: String,
    pub parent: Option<String>,
    pub prim_fields: Vec<(String, PrimTy)>,
    pub ref_fields: Vec<(String, String)>,
    pub pos: Pos,
}

impl PartialEq for ClassDecl {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.parent == o.parent
            && self.prim_fields == o.prim_fields
            && self.ref_fields == o.ref_fields
    }
}

impl Eq for ClassDecl {}

#[derive(Clone, Debug)]
pub struct Method {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub locals: Vec<(String, Ty)>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

impl PartialEq for Method {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.params == o.params && self.locals == o.locals && self.body == o.body
    }
}

impl Eq for Method {}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
    pub methods: Vec<Method>,
}

impl fmt::Display for ClassDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {}", self.name)?;
        if let Some(p) = &self.parent {
            write!(f, " extends {p}")?;
        }
        f.write_str(" {")?;
        for (n, t) in &self.prim_fields {
            write!(f, " {t} {n};")?;
        }
        for (n, c) in &self.ref_fields {
            write!(f, " {c} {n};")?;
        }
        f.write_str(" }")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|(n, t)| format!("{t} {n}")).collect();
        writeln!(f, "method {}({}) {{", self.name, params.join(", "))?;
        for (n, t) in &self.locals {
            writeln!(f, "  local {t} {n};")?;
        }
        for s in &self.body {
            f.write_str("  ")?;
            if let Some(l) = &s.label {
                write!(f, "{l}: ")?;
            }
            writeln!(f, "{}", s.kind)?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            writeln!(f, "{c}")?;
        }
        for m in &self.methods {
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}
