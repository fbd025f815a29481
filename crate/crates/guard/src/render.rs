//! Surface syntax for guards.

use hg_predicate::{Bdd, Manager, Var};
use serde_json::json;

use crate::guard::Guard;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Dnf,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "dnf" => Ok(Format::Dnf),
            _ => Err(format!("unknown format `{s}` (text, json, dnf)")),
        }
    }
}

/// pc first, then levels, reach levels, aliasing and field reachability.
fn rank(name: &str) -> u8 {
    if name == "pc" {
        0
    } else if name.starts_with("lev(") {
        1
    } else if name.starts_with("reach(") {
        2
    } else if name.starts_with("alias(") {
        3
    } else {
        4
    }
}

fn literal(mgr: &Manager, v: Var, positive: bool) -> String {
    let name = mgr.var_name(v);
    if rank(name) <= 2 {
        format!("{name}={}", if positive { "high" } else { "low" })
    } else if positive {
        name.to_string()
    } else {
        format!("!{name}")
    }
}

fn sorted(mgr: &Manager, cube: &[(Var, bool)]) -> Vec<(Var, bool)> {
    let mut c = cube.to_vec();
    c.sort_by_key(|&(v, _)| (rank(mgr.var_name(v)), v));
    c
}

fn conj(mgr: &Manager, cube: &[(Var, bool)]) -> String {
    sorted(mgr, cube).iter().map(|&(v, p)| literal(mgr, v, p)).collect::<Vec<_>>().join(" & ")
}

/// Irredundant cubes of `f`, each rendered as a conjunction, in a stable
/// order.
pub fn dnf(mgr: &mut Manager, f: Bdd) -> Vec<String> {
    if f == Bdd::TRUE {
        return vec!["true".into()];
    }
    let mut cubes: Vec<(Vec<(u8, Var)>, String)> = mgr
        .isop(f)
        .into_iter()
        .map(|c| {
            let key = sorted(mgr, &c).iter().map(|&(v, _)| (rank(mgr.var_name(v)), v)).collect();
            (key, conj(mgr, &c))
        })
        .collect();
    cubes.sort();
    cubes.into_iter().map(|(_, s)| s).collect()
}

/// One-line formula with literals shared by every cube factored out.
pub fn formula_text(mgr: &mut Manager, f: Bdd) -> String {
    if f == Bdd::TRUE {
        return "true".into();
    }
    if f == Bdd::FALSE {
        return "false".into();
    }
    let cubes = mgr.isop(f);
    let common: Vec<(Var, bool)> = cubes[0].iter().copied().filter(|l| cubes.iter().all(|c| c.contains(l))).collect();
    let mut rests: Vec<(Vec<(u8, Var)>, String)> = cubes
        .iter()
        .map(|c| {
            let rest: Vec<(Var, bool)> = c.iter().copied().filter(|l| !common.contains(l)).collect();
            let key = sorted(mgr, &rest).iter().map(|&(v, _)| (rank(mgr.var_name(v)), v)).collect();
            (key, conj(mgr, &rest))
        })
        .collect();
    rests.sort();
    let mut parts = Vec::new();
    if !common.is_empty() {
        parts.push(conj(mgr, &common));
    }
    if cubes.len() > 1 {
        let alts: Vec<String> = rests
            .iter()
            .map(|(_, r)| if r.contains(" & ") { format!("({r})") } else { r.clone() })
            .collect();
        parts.push(format!("({})", alts.join(" | ")));
    }
    parts.join(" & ")
}

pub fn render_guard(mgr: &mut Manager, g: &Guard, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = format!("{} [{}] {}: {}", g.method, g.domain, g.class().name(), formula_text(mgr, g.formula));
            if let Some(i) = g.interrupted {
                s.push_str(&format!(" (interrupted: {i})"));
            }
            s
        }
        Format::Dnf => {
            let mut s = format!("{} [{}]", g.method, g.domain);
            if g.formula == Bdd::FALSE {
                s.push_str("\n  false");
            }
            for c in dnf(mgr, g.formula) {
                s.push_str("\n  ");
                s.push_str(&c);
            }
            s
        }
        Format::Json => guard_json(mgr, g).to_string(),
    }
}

pub fn guard_json(mgr: &mut Manager, g: &Guard) -> serde_json::Value {
    let dnf = if g.formula == Bdd::FALSE { Vec::new() } else { dnf(mgr, g.formula) };
    json!({
        "method": g.method,
        "domain": g.domain,
        "classification": g.class().name(),
        "formula": formula_text(mgr, g.formula),
        "dnf": dnf,
        "interrupted": g.interrupted.map(|i| i.to_string()),
        "stats": {
            "locations": g.stats.locations,
            "statebits": g.stats.statebits,
            "iterations": g.stats.iterations,
            "millis": g.stats.millis as u64,
        },
    })
}
