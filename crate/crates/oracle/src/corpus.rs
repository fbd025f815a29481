//! Seeded generator of structured, call-free methods over a fixed class
//! table: straight-line heap code with conditionals and bounded loops.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: &str = "class A { int fi; }\nclass B { A fa; int fb; }\nclass N { N nx; int v; }\nclass M extends N { A ma; }\n";

/// Most statements in a generated method body.
pub const MAX_STATEMENTS: usize = 20;
/// Most reference variables, parameters included.
pub const MAX_REFS: usize = 4;

const REF_CLASSES: [&str; 4] = ["A", "B", "N", "M"];

fn prim_field(class: &str) -> &'static str {
    match class {
        "A" => "fi",
        "B" => "fb",
        _ => "v",
    }
}

/// Reference fields visible on `class` with their declared types.
fn ref_fields(class: &str) -> &'static [(&'static str, &'static str)] {
    match class {
        "B" => &[("fa", "A")],
        "N" => &[("nx", "N")],
        "M" => &[("nx", "N"), ("ma", "A")],
        _ => &[],
    }
}

fn assignable(from: &str, to: &str) -> bool {
    from == to || (from == "M" && to == "N")
}

struct Gen<'a, R> {
    rng: &'a mut R,
    refs: Vec<(String, &'static str)>,
    ints: Vec<String>,
    lines: Vec<String>,
    stmts: usize,
    labels: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn emit(&mut self, s: String) {
        self.lines.push(s);
        self.stmts += 1;
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("L{}", self.labels)
    }

    fn int(&mut self) -> String {
        self.ints.choose(self.rng).expect("at least one int").clone()
    }

    fn reference(&mut self) -> (String, &'static str) {
        self.refs.choose(self.rng).expect("at least one reference").clone()
    }

    fn atom(&mut self) -> String {
        if self.rng.gen_bool(0.3) {
            self.rng.gen_range(0..4).to_string()
        } else {
            self.int()
        }
    }

    fn cond(&mut self) -> String {
        if self.refs.len() > 1 && self.rng.gen_bool(0.3) {
            let (r, _) = self.reference();
            let (s, _) = self.reference();
            let op = if self.rng.gen_bool(0.5) { "==" } else { "!=" };
            return format!("{r} {op} {s}");
        }
        let op = ["<", ">", "==", "!="].choose(self.rng).expect("nonempty");
        format!("{} {op} {}", self.int(), self.atom())
    }

    fn simple(&mut self) {
        let (r, rc) = self.reference();
        let (s, sc) = self.reference();
        let stmt = match self.rng.gen_range(0..10) {
            0 => {
                let op = ["+", "-", "*"].choose(self.rng).expect("nonempty");
                format!("{} = {} {op} {};", self.int(), self.atom(), self.atom())
            }
            1 => format!("{} = {r}.{};", self.int(), prim_field(rc)),
            2 => format!("{r}.{} = {};", prim_field(rc), self.atom()),
            3 if assignable(sc, rc) => format!("{r} = {s};"),
            4 => match ref_fields(sc).iter().find(|(_, t)| assignable(t, rc)) {
                Some((f, _)) => format!("{r} = {s}.{f};"),
                None => format!("{r} = new {rc};"),
            },
            5 => match ref_fields(rc).iter().find(|(_, t)| assignable(sc, t)) {
                Some((f, _)) => format!("{r}.{f} = {s};"),
                None => format!("{r}.{} = {};", prim_field(rc), self.atom()),
            },
            6 => {
                let subs: Vec<&str> = REF_CLASSES.iter().copied().filter(|c| assignable(c, rc)).collect();
                format!("{r} = new {};", subs.choose(self.rng).expect("own class"))
            }
            7 if self.rng.gen_bool(0.3) => format!("{r} = null;"),
            8 | 9 => {
                let level = if self.rng.gen_bool(0.75) { "low" } else { "high" };
                let v = if self.rng.gen_bool(0.5) { self.int() } else { r };
                format!("output {level}({v});")
            }
            _ => format!("{} = {};", self.int(), self.atom()),
        };
        self.emit(stmt);
    }

    /// Appends exactly `budget` statements.
    fn block(&mut self, budget: usize, in_loop: bool) {
        let end = self.stmts + budget;
        while self.stmts < end {
            let left = end - self.stmts;
            match self.rng.gen_range(0..10) {
                0 | 1 if left >= 4 => {
                    let join = self.label();
                    let c = self.cond();
                    self.emit(format!("if ({c}) goto {join};"));
                    let inner = self.rng.gen_range(1..=(left - 2).min(4));
                    self.block(inner, in_loop);
                    self.emit(format!("{join}: z = 0;"));
                }
                2 if left >= 6 => {
                    let (then, join) = (self.label(), self.label());
                    let c = self.cond();
                    self.emit(format!("if ({c}) goto {then};"));
                    self.block(1, in_loop);
                    self.emit(format!("goto {join};"));
                    self.emit(format!("{then}: z = 1;"));
                    self.block(1, in_loop);
                    self.emit(format!("{join}: z = 0;"));
                }
                3 if left >= 7 && !in_loop => {
                    let (head, exit) = (self.label(), self.label());
                    self.emit("k = 0;".into());
                    self.emit(format!("{head}: if (k > 1) goto {exit};"));
                    let inner = self.rng.gen_range(1..=(left - 5).min(3));
                    self.block(inner, true);
                    self.emit("k = k + 1;".into());
                    self.emit(format!("goto {head};"));
                    self.emit(format!("{exit}: z = 0;"));
                }
                _ => self.simple(),
            }
        }
    }
}

/// One method named `name`, to be appended to [`CLASSES`].
pub fn method_source<R: Rng>(rng: &mut R, name: &str) -> String {
    let n_refs = rng.gen_range(1..=MAX_REFS);
    let n_params = rng.gen_range(1..=n_refs);
    let refs: Vec<(String, &'static str)> =
        (0..n_refs).map(|i| (format!("r{i}"), *REF_CLASSES.choose(rng).expect("nonempty"))).collect();
    let n_int_params = rng.gen_range(0..=2);
    let mut params: Vec<String> = refs[..n_params].iter().map(|(r, c)| format!("{c} {r}")).collect();
    params.extend((0..n_int_params).map(|i| format!("int i{i}")));
    let mut ints: Vec<String> = (0..n_int_params).map(|i| format!("i{i}")).collect();
    ints.push("l0".into());
    let mut g = Gen { rng, refs: refs.clone(), ints, lines: Vec::new(), stmts: 0, labels: 0 };
    let budget = g.rng.gen_range(3..=MAX_STATEMENTS);
    g.block(budget, false);
    let mut out = format!("method {name}({}) {{\n", params.join(", "));
    for (r, c) in &refs[n_params..] {
        out.push_str(&format!("  local {c} {r};\n"));
    }
    for v in ["l0", "z", "k"] {
        out.push_str(&format!("  local int {v};\n"));
    }
    for l in &g.lines {
        out.push_str(&format!("  {l}\n"));
    }
    out.push_str("}\n");
    out
}

/// A program with the fixed class table and `n` methods `g00`, `g01`, ...
pub fn corpus(seed: u64, n: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CLASSES.to_string();
    for i in 0..n {
        out.push_str(&method_source(&mut rng, &format!("g{i:02}")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_respects_bounds() {
        let p = hg_sir::load(&corpus(7, 60)).expect("generated corpus typechecks");
        assert_eq!(p.methods.len(), 60);
        for m in &p.methods {
            assert!(m.body.len() <= MAX_STATEMENTS, "{} has {} statements", m.name, m.body.len());
            assert!(m.refs.len() <= MAX_REFS);
            assert!(!m.body.iter().any(|s| matches!(s, hg_sir::typed::TStmt::Call { .. })));
        }
    }

    #[test]
    fn corpus_is_seeded() {
        assert_eq!(corpus(3, 5), corpus(3, 5));
        assert_ne!(corpus(3, 5), corpus(4, 5));
    }
}
