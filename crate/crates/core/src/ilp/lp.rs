//! CPLEX-style LP text export.

use std::collections::HashSet;
use std::fmt::Write;

use super::model::{Comparator, LinearExpr, LinearModel, VarKind};
use super::IlpError;

const MAX_NAME_LEN: usize = 255;
const TERMS_PER_LINE: usize = 8;

fn legal_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c)
}

fn sanitize_one(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| if legal_char(c) { c } else { '_' })
        .collect();
    let first = s.chars().next();
    let second = s.chars().nth(1);
    let needs_prefix = match first {
        None => true,
        Some(c) if c.is_ascii_digit() || c == '.' => true,
        // `e1`/`E2` read as exponents in some parsers
        Some('e' | 'E') => second.map_or(true, |c| c.is_ascii_digit()),
        _ => false,
    };
    if needs_prefix {
        s.insert_str(0, "v_");
    }
    s.truncate(MAX_NAME_LEN - 12);
    s
}

/// Map names to legal, unique LP identifiers. Deterministic: collisions are
/// resolved by appending `~<position>` in input order.
pub fn sanitize_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut taken = HashSet::new();
    names
        .into_iter()
        .enumerate()
        .map(|(pos, raw)| {
            let mut s = sanitize_one(raw);
            if !taken.insert(s.clone()) {
                s = format!("{s}~{pos}");
                taken.insert(s.clone());
            }
            s
        })
        .collect()
}

fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, expr: &LinearExpr, names: &[String]) {
    for (i, &(v, c)) in expr.terms().iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if i == 0 && c >= 0.0 {
            let _ = write!(out, " ");
        } else {
            let _ = write!(out, " {sign} ");
        }
        let mag = c.abs();
        if mag == 1.0 {
            out.push_str(&names[v.0]);
        } else {
            let _ = write!(out, "{} {}", num(mag), names[v.0]);
        }
    }
}

/// Render `m` as LP text with Minimize, Subject To, Bounds, Generals, and
/// Binary sections.
pub fn export_lp(m: &LinearModel) -> Result<String, IlpError> {
    m.validate()?;
    let vars = sanitize_names(m.variables().iter().map(|v| v.name.as_str()));
    let rows = sanitize_names(m.constraints().iter().map(|c| c.name.as_str()));

    let mut out = String::new();
    out.push_str("\\ generated by parkmesh\n");
    out.push_str("Minimize\n obj:");
    let obj = m.objective();
    if obj.expr.is_empty() {
        if let Some(first) = vars.first() {
            let _ = write!(out, " 0 {first}");
        }
    } else {
        write_expr(&mut out, &obj.expr, &vars);
    }
    if obj.constant != 0.0 {
        let sign = if obj.constant < 0.0 { "-" } else { "+" };
        let _ = write!(out, " {sign} {}", num(obj.constant.abs()));
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for (c, name) in m.constraints().iter().zip(&rows) {
        let _ = write!(out, " {name}:");
        if c.expr.is_empty() {
            // keep the row so names line up with the model
            let _ = write!(out, " 0 {}", vars.first().map_or("v_0", String::as_str));
        } else {
            write_expr(&mut out, &c.expr, &vars);
        }
        let op = match c.cmp {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }

    out.push_str("Bounds\n");
    for (v, name) in m.variables().iter().zip(&vars) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            _ if v.lower == v.upper => {
                let _ = writeln!(out, " {name} = {}", num(v.lower));
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", num(v.lower), num(v.upper));
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", num(v.lower));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", num(v.upper));
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }

    let mut section = |title: &str, kind: VarKind| {
        let members: Vec<&str> = m
            .variables()
            .iter()
            .zip(&vars)
            .filter(|(v, _)| v.kind == kind)
            .map(|(_, n)| n.as_str())
            .collect();
        if members.is_empty() {
            return;
        }
        let _ = writeln!(out, "{title}");
        for chunk in members.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    };
    section("Generals", VarKind::Integer);
    section("Binary", VarKind::Binary);
    out.push_str("End\n");
    Ok(out)
}
