use std::fmt::Write;

use super::{BasisExpr, Encoding, Event, Scenario, StateExpr};
use crate::qcore::C64;

/// Shortest text that parses back to exactly `x` (at most 17 significant digits).
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `re`, `imi` or `re±imi`.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        return format_real(z.re);
    }
    if z.re == 0.0 {
        return format!("{}i", format_real(z.im));
    }
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{}i", format_real(z.re), format_real(z.im.abs()))
}

fn complex_list(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format_complex(*z)).collect();
    format!("[{}]", parts.join(", "))
}

pub(crate) fn format_basis(b: &BasisExpr) -> String {
    basis(b)
}

fn basis(b: &BasisExpr) -> String {
    match b {
        BasisExpr::Comp => "comp".into(),
        BasisExpr::Basis1 => "basis1".into(),
        BasisExpr::Basis2 => "basis2".into(),
        BasisExpr::Basis3 => "basis3".into(),
        BasisExpr::Named(n) => n.clone(),
        BasisExpr::Vectors(entries) => {
            let parts: Vec<String> =
                entries.iter().map(|(l, v)| format!("{l}: {}", complex_list(v))).collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn state(s: &StateExpr) -> String {
    match s {
        StateExpr::Ghz => "ghz".into(),
        StateExpr::Schmidt(cs) => {
            let parts: Vec<String> = cs.iter().map(|x| format_real(*x)).collect();
            format!("schmidt({})", parts.join(", "))
        }
        StateExpr::Amplitudes(a) => complex_list(a),
    }
}

fn event(e: &Event) -> String {
    match e {
        Event::Prepare { state: st, targets } => {
            format!("prepare {} on {}", state(st), targets.join(","))
        }
        Event::Interact { agent, targets, basis: b, record, fact } => {
            format!("interact {agent} on {} in {} record {record} -> {fact}", targets.join(","), basis(b))
        }
        Event::Measure { observer, factors, single, encoding, result, concurrent } => {
            let fs: Vec<String> =
                factors.iter().map(|f| format!("{} in {}", f.targets.join(","), basis(&f.basis))).collect();
            let mut out = format!("measure {observer} on {}", fs.join(" & "));
            if *single {
                out.push_str(" as single");
            }
            if let Some(Encoding::Bits) = encoding {
                out.push_str(" encode bits");
            }
            write!(out, " -> {result}").unwrap();
            if *concurrent {
                out.push_str(" concurrent");
            }
            out
        }
        Event::ReadRecord { observer, record, basis: b, into, result } => {
            let mut out = format!("read {observer} {record}");
            if let Some(b) = b {
                write!(out, " in {}", basis(b)).unwrap();
            }
            if let Some(r) = into {
                write!(out, " into {r}").unwrap();
            }
            write!(out, " -> {result}").unwrap();
            out
        }
        Event::DeclarePartition { name, groups } => {
            let gs: Vec<String> = groups.iter().map(|g| g.join(",")).collect();
            format!("partition {name} = {}", gs.join(" | "))
        }
    }
}

/// Canonical `.wfs` text; `parse(print(s))` reproduces `s`.
pub fn print(s: &Scenario) -> String {
    let mut out = String::new();
    writeln!(out, "scenario {}", s.name).unwrap();
    for a in &s.agents {
        writeln!(out, "agent {}", a.name).unwrap();
    }
    for o in &s.observers {
        writeln!(out, "observer {o}").unwrap();
    }
    for sub in s.layout.subsystems() {
        match s.record(&sub.id) {
            Some((a, r)) => writeln!(
                out,
                "agent {} record {} dim {} pointer {} init {}",
                a.name,
                r.id,
                r.dim,
                basis(&r.pointer),
                r.init
            ),
            None => writeln!(out, "system {} {}", sub.id, sub.dim),
        }
        .unwrap();
    }
    for (n, b) in &s.bases {
        writeln!(out, "basis {n} = {}", basis(b)).unwrap();
    }
    for e in &s.timeline {
        writeln!(out, "{}", event(e)).unwrap();
    }
    out
}
