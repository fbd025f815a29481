//! Method summaries read from stub files.
//!
//! A stub file is a JSON object mapping `"Class.method(type name, ...)"` to
//! `{"guard": formula, "effect": ["lhs := formula", ...]}`. Formulas range
//! over `pc`, `lev(x)`, `reach(r)`, `alias(r,s)`, `freach(r,s)` of the formal
//! arguments, where the receiver is named `this`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StubError {
    #[error("cannot read stub file: {0}")]
    Io(String),
    #[error("stub file is not a JSON object of entries: {0}")]
    Json(String),
    #[error("malformed stub key `{0}` (expected Class.method(type name, ...))")]
    BadKey(String),
    #[error("in `{key}`: {msg}")]
    Formula { key: String, msg: String },
    #[error("in `{key}`: unknown relation or level symbol `{sym}`")]
    UnknownSymbol { key: String, sym: String },
    #[error("in `{key}`: `{name}` is not a formal argument of the right kind")]
    NotFormal { key: String, name: String },
}

/// Level/Boolean formula of the stub grammar. Levels are Booleans with
/// `high` = true, so `join` is disjunction and `e = low` is negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Const(bool),
    Pc,
    Lev(String),
    Reach(String),
    Alias(String, String),
    FReach(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Eq(Box<Formula>, Box<Formula>),
    Ite(Box<Formula>, Box<Formula>, Box<Formula>),
}

impl Formula {
    fn symbols<'a>(&'a self, out: &mut Vec<(&'static str, &'a str)>) {
        match self {
            Formula::Const(_) | Formula::Pc => {}
            Formula::Lev(x) => out.push(("lev", x)),
            Formula::Reach(x) => out.push(("ref", x)),
            Formula::Alias(x, y) | Formula::FReach(x, y) => {
                out.push(("ref", x));
                out.push(("ref", y));
            }
            Formula::Not(a) => a.symbols(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Eq(a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
            Formula::Ite(a, b, c) => {
                a.symbols(out);
                b.symbols(out);
                c.symbols(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(true) => f.write_str("high"),
            Formula::Const(false) => f.write_str("low"),
            Formula::Pc => f.write_str("pc"),
            Formula::Lev(x) => write!(f, "lev({x})"),
            Formula::Reach(x) => write!(f, "reach({x})"),
            Formula::Alias(x, y) => write!(f, "alias({x},{y})"),
            Formula::FReach(x, y) => write!(f, "freach({x},{y})"),
            Formula::Not(a) => write!(f, "!({a})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Eq(a, b) => write!(f, "({a} = {b})"),
            Formula::Ite(a, b, c) => write!(f, "ite({a}, {b}, {c})"),
        }
    }
}

/// Left-hand side of an effect line. Callees cannot rebind the caller's
/// variables, so only reachable levels and field reachability are writable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectTarget {
    Reach(String),
    FReach(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    /// `int`, `bool`, or a class name.
    pub ty: String,
}

impl Param {
    pub fn is_ref(&self) -> bool {
        self.ty != "int" && self.ty != "bool"
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub key: String,
    pub class: String,
    pub method: String,
    pub params: Vec<Param>,
    pub guard: Formula,
    pub effect: Vec<(EffectTarget, Formula)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SummaryTable {
    entries: BTreeMap<(String, String), Vec<Summary>>,
}

impl SummaryTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, StubError> {
        let text = std::fs::read_to_string(path).map_err(|e| StubError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, StubError> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| StubError::Json(e.to_string()))?;
        let obj = doc.as_object().ok_or_else(|| StubError::Json("top level must be an object".into()))?;
        let mut table = SummaryTable::new();
        for (key, entry) in obj {
            let guard = match entry.get("guard") {
                None => "true".to_string(),
                Some(g) => g
                    .as_str()
                    .ok_or_else(|| StubError::Json(format!("`{key}`: guard must be a string")))?
                    .to_string(),
            };
            let effect: Vec<String> = match entry.get("effect") {
                None => vec![],
                Some(serde_json::Value::Array(xs)) => xs
                    .iter()
                    .map(|x| x.as_str().map(str::to_string))
                    .collect::<Option<_>>()
                    .ok_or_else(|| StubError::Json(format!("`{key}`: effect lines must be strings")))?,
                Some(serde_json::Value::Object(m)) if m.is_empty() => vec![],
                Some(_) => return Err(StubError::Json(format!("`{key}`: effect must be a list of strings"))),
            };
            let lines: Vec<&str> = effect.iter().map(String::as_str).collect();
            table.insert(Summary::parse(key, &guard, &lines)?);
        }
        Ok(table)
    }

    pub fn insert(&mut self, s: Summary) {
        self.entries
            .entry((s.class.clone(), s.method.clone()))
            .or_default()
            .push(s);
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry declared for exactly `class.method` whose parameter kinds match
    /// `arg_is_ref`.
    pub fn lookup(&self, class: &str, method: &str, arg_is_ref: &[bool]) -> Option<&Summary> {
        self.entries.get(&(class.to_string(), method.to_string()))?.iter().find(|s| {
            s.params.len() == arg_is_ref.len() && s.params.iter().zip(arg_is_ref).all(|(p, &r)| p.is_ref() == r)
        })
    }
}

impl Summary {
    /// Parses and validates one entry.
    pub fn parse(key: &str, guard: &str, effect: &[&str]) -> Result<Summary, StubError> {
        let (class, method, params) = parse_key(key)?;
        let ferr = |msg: String| StubError::Formula { key: key.to_string(), msg };
        let guard = parse_formula(guard).map_err(ferr)?;
        let mut eff = Vec::new();
        for line in effect {
            let (lhs, rhs) = line
                .split_once(":=")
                .ok_or_else(|| ferr(format!("effect `{line}` lacks `:=`")))?;
            let target = match parse_formula(lhs).map_err(ferr)? {
                Formula::Reach(x) => EffectTarget::Reach(x),
                Formula::FReach(x, y) => EffectTarget::FReach(x, y),
                other => return Err(ferr(format!("effect target `{other}` must be reach(..) or freach(..)"))),
            };
            eff.push((target, parse_formula(rhs).map_err(ferr)?));
        }
        let s = Summary {
            key: key.to_string(),
            class,
            method,
            params,
            guard,
            effect: eff,
        };
        s.validate()?;
        Ok(s)
    }

    /// Formal names in binding order: `this` then the parameters.
    pub fn formals(&self) -> Vec<(&str, bool)> {
        std::iter::once(("this", true))
            .chain(self.params.iter().map(|p| (p.name.as_str(), p.is_ref())))
            .collect()
    }

    fn validate(&self) -> Result<(), StubError> {
        let formals = self.formals();
        let check = |kind: &str, name: &str| {
            let ok = formals.iter().any(|&(n, is_ref)| n == name && (kind == "lev" || is_ref));
            if ok {
                Ok(())
            } else {
                Err(StubError::NotFormal { key: self.key.clone(), name: name.to_string() })
            }
        };
        let mut syms = Vec::new();
        self.guard.symbols(&mut syms);
        for (t, f) in &self.effect {
            match t {
                EffectTarget::Reach(x) => syms.push(("ref", x)),
                EffectTarget::FReach(x, y) => {
                    syms.push(("ref", x));
                    syms.push(("ref", y));
                }
            }
            f.symbols(&mut syms);
        }
        syms.iter().try_for_each(|&(k, n)| check(k, n))
    }
}

fn parse_key(key: &str) -> Result<(String, String, Vec<Param>), StubError> {
    let bad = || StubError::BadKey(key.to_string());
    let (head, rest) = key.split_once('(').ok_or_else(bad)?;
    let args = rest.trim().strip_suffix(')').ok_or_else(bad)?;
    let (class, method) = head.trim().rsplit_once('.').ok_or_else(bad)?;
    let ident = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_');
    if !ident(class) || !ident(method) {
        return Err(bad());
    }
    let mut params = Vec::new();
    if !args.trim().is_empty() {
        for p in args.split(',') {
            let mut it = p.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(ty), Some(name), None) if ident(ty) && ident(name) && name != "this" => {
                    params.push(Param { name: name.into(), ty: ty.into() })
                }
                _ => return Err(bad()),
            }
        }
    }
    Ok((class.into(), method.into(), params))
}

// ---- formula parser --------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut it = s.chars().peekable();
    while let Some(&c) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c.is_alphanumeric() || c == '_' {
            let mut id = String::new();
            while let Some(&d) = it.peek() {
                if d.is_alphanumeric() || d == '_' {
                    id.push(d);
                    it.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Ident(id));
        } else if "()&|!=,".contains(c) {
            out.push(Tok::Sym(c));
            it.next();
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<Tok>,
    at: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}`"))
        }
    }

    fn or(&mut self) -> Result<Formula, String> {
        let mut a = self.and()?;
        while self.eat('|') {
            a = Formula::Or(Box::new(a), Box::new(self.and()?));
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<Formula, String> {
        let mut a = self.cmp()?;
        while self.eat('&') {
            a = Formula::And(Box::new(a), Box::new(self.cmp()?));
        }
        Ok(a)
    }

    fn cmp(&mut self) -> Result<Formula, String> {
        let a = self.unary()?;
        if self.eat('=') {
            let b = self.unary()?;
            return Ok(Formula::Eq(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Formula, String> {
        if self.eat('!') {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn name(&mut self) -> Result<String, String> {
        match self.toks.get(self.at).cloned() {
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(s)
            }
            _ => Err("expected a name".into()),
        }
    }

    fn args(&mut self, n: usize) -> Result<Vec<String>, String> {
        self.expect('(')?;
        let mut v = vec![self.name()?];
        while v.len() < n {
            self.expect(',')?;
            v.push(self.name()?);
        }
        self.expect(')')?;
        Ok(v)
    }

    fn atom(&mut self) -> Result<Formula, String> {
        if self.eat('(') {
            let f = self.or()?;
            self.expect(')')?;
            return Ok(f);
        }
        let id = self.name()?;
        Ok(match id.as_str() {
            "low" | "false" | "ff" => Formula::Const(false),
            "high" | "true" | "tt" => Formula::Const(true),
            "pc" => Formula::Pc,
            "lev" => Formula::Lev(self.args(1)?.remove(0)),
            "reach" => Formula::Reach(self.args(1)?.remove(0)),
            "alias" => {
                let v = self.args(2)?;
                Formula::Alias(v[0].clone(), v[1].clone())
            }
            "freach" => {
                let v = self.args(2)?;
                Formula::FReach(v[0].clone(), v[1].clone())
            }
            "ite" => {
                self.expect('(')?;
                let c = self.or()?;
                self.expect(',')?;
                let t = self.or()?;
                self.expect(',')?;
                let e = self.or()?;
                self.expect(')')?;
                Formula::Ite(Box::new(c), Box::new(t), Box::new(e))
            }
            "join" => {
                self.expect('(')?;
                let mut f = self.or()?;
                while self.eat(',') {
                    f = Formula::Or(Box::new(f), Box::new(self.or()?));
                }
                self.expect(')')?;
                f
            }
            other => return Err(format!("unknown relation or level symbol `{other}`")),
        })
    }
}

/// Parses one formula of the stub grammar.
pub fn parse_formula(s: &str) -> Result<Formula, String> {
    let mut p = P { toks: lex(s)?, at: 0 };
    let f = p.or()?;
    if p.at != p.toks.len() {
        return Err(format!("trailing input in `{}`", s.trim()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logger_stub_loads() {
        let t = SummaryTable::from_json(r#"{"Log.write(int msg)": {"guard": "pc = low", "effect": {}}}"#).unwrap();
        let s = t.lookup("Log", "write", &[false]).unwrap();
        assert_eq!(s.guard, Formula::Eq(Box::new(Formula::Pc), Box::new(Formula::Const(false))));
        assert!(s.effect.is_empty());
        assert!(t.lookup("Log", "write", &[true]).is_none());
    }

    #[test]
    fn level_effect_loads() {
        let s = Summary::parse("A.put(A a, int v)", "lev(v) = low", &["reach(this) := join(reach(this), reach(a), pc)"]).unwrap();
        assert_eq!(s.effect.len(), 1);
        assert_eq!(s.effect[0].0, EffectTarget::Reach("this".into()));
    }

    #[test]
    fn rejects_non_formals_and_unknown_symbols() {
        assert!(matches!(
            Summary::parse("A.f(int v)", "lev(w) = low", &[]),
            Err(StubError::NotFormal { .. })
        ));
        assert!(matches!(
            Summary::parse("A.f(int v)", "reach(v) = low", &[]),
            Err(StubError::NotFormal { .. })
        ));
        assert!(matches!(
            Summary::parse("A.f(int v)", "owns(this, v)", &[]),
            Err(StubError::Formula { .. })
        ));
        assert!(matches!(Summary::parse("f(int v)", "low", &[]), Err(StubError::BadKey(_))));
        assert!(matches!(
            Summary::parse("A.f()", "true", &["lev(this) := high"]),
            Err(StubError::Formula { .. })
        ));
    }

    #[test]
    fn precedence_and_ite() {
        let f = parse_formula("!pc & lev(x) | ite(alias(a,b), high, low) = low").unwrap();
        let want = "((!(pc) & lev(x)) | (ite(alias(a,b), high, low) = low))";
        assert_eq!(f.to_string(), want);
    }
}
