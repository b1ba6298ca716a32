//! Line-oriented model files.
//!
//! ```text
//! # comments run to the end of the line
//! [nodes]
//! A observed 0 1          # name, observed|hidden, alphabet labels
//! L hidden 0 1
//! X observed 0 1
//!
//! [mode]
//! unique                  # or: uniform
//!
//! [laws]                  # parentless nodes
//! A = 1/2 1/2
//! L = 1/2 1/2
//!
//! [mechanisms]            # outputs row-major over parent labels, last parent fastest
//! X(L, A) = 0 1 1 0
//!
//! [roles]
//! settings A B
//! outcomes X Y
//! common L
//!
//! [embedding]
//! minkowski 1             # spatial dimension; coordinates are spatial..., time
//! A = -2 0
//! X = -2 1
//!
//! [table]                 # an observed distribution given directly
//! vars A X
//! 0 0 = 1/2               # omitted rows are zero
//! 1 1 = 1/2
//! ```
//!
//! A poset embedding instead reads `poset`, then `elements a b c`,
//! `order a < b` lines for the covering relation, and `A = a` placements.
//! `grid N M` after `poset` builds the product of two chains.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{CausalModel, ModelBuilder, SolutionMode};
use crate::prob::{parse_ratio, render_ratio, Distribution, Prob, Variable};
use crate::signalling::BellRoles;
use crate::spacetime::{Backend, Embedding, Event, Point, Poset};

/// Contents of a model file. Every part is optional, but a file needs a
/// model or a table.
#[derive(Debug, Clone, Default)]
pub struct ModelFile {
    pub model: Option<CausalModel>,
    pub table: Option<Distribution>,
    pub roles: Option<BellRoles>,
    pub embedding: Option<Embedding>,
}

impl ModelFile {
    /// The observed distribution: the table if given, else the model's.
    pub fn distribution(&self) -> Result<Distribution> {
        match (&self.table, &self.model) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(m)) => m.observed_distribution(),
            (None, None) => Err(Error::Configuration("file has neither a model nor a table".into())),
        }
    }

    pub fn model(&self) -> Result<&CausalModel> {
        self.model.as_ref().ok_or_else(|| Error::Configuration("file has no [nodes] section".into()))
    }

    pub fn roles(&self) -> Result<&BellRoles> {
        self.roles.as_ref().ok_or_else(|| Error::Configuration("file has no [roles] section".into()))
    }

    pub fn embedding(&self) -> Result<&Embedding> {
        self.embedding.as_ref().ok_or_else(|| Error::Configuration("file has no [embedding] section".into()))
    }
}

const SECTIONS: [&str; 7] = ["nodes", "mode", "laws", "mechanisms", "roles", "embedding", "table"];

fn perr<T>(line: usize, section: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: format!("[{section}] {}", message.into()) })
}

/// Attaches a line number to errors raised while building.
fn at<T>(line: usize, section: &str, r: Result<T>) -> Result<T> {
    r.or_else(|e| match e {
        Error::Parse { .. } => Err(e),
        other => perr(line, section, other.to_string()),
    })
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn rational(line: usize, section: &str, s: &str) -> Result<Prob> {
    match parse_ratio(s) {
        Some(p) => Ok(p),
        None => perr(line, section, format!("`{s}` is not a rational number")),
    }
}

fn key_value<'a>(l: &Line<'a>, section: &str) -> Result<(&'a str, &'a str)> {
    match l.text.split_once('=') {
        Some((k, v)) => Ok((k.trim(), v.trim())),
        None => perr(l.no, section, "expected `name = ...`"),
    }
}

pub fn parse(text: &str) -> Result<ModelFile> {
    let mut sections: BTreeMap<&str, (usize, Vec<Line>)> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(Error::Parse { line: no, message: "unterminated section header".into() });
            };
            let name = name.trim();
            let Some(&known) = SECTIONS.iter().find(|s| **s == name) else {
                return Err(Error::Parse { line: no, message: format!("unknown section [{name}]") });
            };
            if sections.contains_key(known) {
                return Err(Error::Parse { line: no, message: format!("section [{name}] appears twice") });
            }
            sections.insert(known, (no, vec![]));
            current = Some(known);
            continue;
        }
        let Some(sec) = current else {
            return Err(Error::Parse { line: no, message: "content before the first section header".into() });
        };
        sections.get_mut(sec).unwrap().1.push(Line { no, text: line });
    }

    let mut file = ModelFile::default();
    if let Some((_, lines)) = sections.get("nodes") {
        file.model = Some(parse_model(lines, &sections)?);
    } else {
        for s in ["mode", "laws", "mechanisms"] {
            if let Some((no, _)) = sections.get(s) {
                return perr(*no, s, "needs a [nodes] section");
            }
        }
    }
    if let Some((no, lines)) = sections.get("table") {
        file.table = Some(parse_table(*no, lines)?);
    }
    if file.model.is_none() && file.table.is_none() {
        return Err(Error::Parse { line: 1, message: "a file needs [nodes] or [table]".into() });
    }
    if let Some((no, lines)) = sections.get("roles") {
        let roles = parse_roles(*no, lines)?;
        if let Some(m) = &file.model {
            at(*no, "roles", roles.validate(m))?;
        }
        file.roles = Some(roles);
    }
    if let Some((no, lines)) = sections.get("embedding") {
        let e = parse_embedding(*no, lines)?;
        if let Some(m) = &file.model {
            at(*no, "embedding", e.check_covers(m.graph()))?;
        }
        file.embedding = Some(e);
    }
    Ok(file)
}

type Sections<'a> = BTreeMap<&'a str, (usize, Vec<Line<'a>>)>;

fn parse_model(nodes: &[Line], sections: &Sections) -> Result<CausalModel> {
    let mut b = ModelBuilder::new();
    let mut alphabets: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for l in nodes {
        let w = words(l.text);
        if w.len() < 3 {
            return perr(l.no, "nodes", "expected `name observed|hidden label...`");
        }
        if alphabets.contains_key(w[0]) {
            return perr(l.no, "nodes", format!("node `{}` declared twice", w[0]));
        }
        if w[2..].iter().enumerate().any(|(i, a)| w[2 + i + 1..].contains(a)) {
            return perr(l.no, "nodes", format!("alphabet of `{}` repeats a label", w[0]));
        }
        b = match w[1] {
            "observed" => b.observed(w[0], &w[2..]),
            "hidden" => b.hidden(w[0], &w[2..]),
            other => return perr(l.no, "nodes", format!("expected `observed` or `hidden`, found `{other}`")),
        };
        alphabets.insert(w[0].to_string(), w[2..].iter().map(|s| s.to_string()).collect());
    }
    let alpha = |no: usize, sec: &str, n: &str| -> Result<Vec<String>> {
        alphabets.get(n).cloned().map_or_else(|| perr(no, sec, format!("unknown node `{n}`")), Ok)
    };
    if let Some((no, lines)) = sections.get("mode") {
        let mode = match lines.iter().map(|l| l.text).collect::<Vec<_>>()[..] {
            ["unique"] => SolutionMode::Unique,
            ["uniform"] => SolutionMode::Uniform,
            _ => return perr(*no, "mode", "expected a single line `unique` or `uniform`"),
        };
        b = b.mode(mode);
    }
    let mut defined: BTreeMap<String, usize> = BTreeMap::new();
    let mut define = |n: &str, no: usize, sec: &str| -> Result<()> {
        if let Some(prev) = defined.insert(n.to_string(), no) {
            return perr(no, sec, format!("`{n}` already has a law or mechanism (line {prev})"));
        }
        Ok(())
    };
    if let Some((_, lines)) = sections.get("laws") {
        for l in lines {
            let (name, rest) = key_value(l, "laws")?;
            let a = alpha(l.no, "laws", name)?;
            define(name, l.no, "laws")?;
            let probs = words(rest).iter().map(|s| rational(l.no, "laws", s)).collect::<Result<Vec<_>>>()?;
            if probs.len() != a.len() {
                return perr(l.no, "laws", format!("`{name}` has {} values but {} probabilities", a.len(), probs.len()));
            }
            let total: Prob = probs.iter().sum();
            if total != Prob::from_integer(1) {
                return perr(l.no, "laws", format!("probabilities of `{name}` sum to {}", render_ratio(&total)));
            }
            if probs.iter().any(|p| *p < Prob::from_integer(0)) {
                return perr(l.no, "laws", format!("`{name}` has a negative probability"));
            }
            b = b.law(name, &probs);
        }
    }
    if let Some((_, lines)) = sections.get("mechanisms") {
        for l in lines {
            let (head, rest) = key_value(l, "mechanisms")?;
            let Some((name, parents)) = head.strip_suffix(')').and_then(|h| h.split_once('(')) else {
                return perr(l.no, "mechanisms", "expected `name(parent, ...) = outputs`");
            };
            let name = name.trim();
            let parents: Vec<&str> = parents.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
            if parents.is_empty() {
                return perr(l.no, "mechanisms", format!("`{name}` has no parents; give it a law instead"));
            }
            let out_alpha = alpha(l.no, "mechanisms", name)?;
            define(name, l.no, "mechanisms")?;
            let cards = parents.iter().map(|p| alpha(l.no, "mechanisms", p).map(|a| a.len())).collect::<Result<Vec<_>>>()?;
            let rows: usize = cards.iter().product();
            let outputs = words(rest)
                .iter()
                .map(|v| match out_alpha.iter().position(|a| a == v) {
                    Some(k) => Ok(k),
                    None => perr(l.no, "mechanisms", format!("`{v}` is not a value of `{name}`")),
                })
                .collect::<Result<Vec<_>>>()?;
            if outputs.len() != rows {
                return perr(l.no, "mechanisms", format!("`{name}` needs {rows} outputs, found {}", outputs.len()));
            }
            b = b.mechanism(name, &parents, move |v| {
                let idx = v.iter().zip(&cards).fold(0, |acc, (x, c)| acc * c + x);
                outputs[idx]
            });
        }
    }
    let no = sections.get("nodes").map_or(1, |s| s.0);
    at(no, "nodes", b.build())
}

fn parse_table(no: usize, lines: &[Line]) -> Result<Distribution> {
    let Some((first, rows)) = lines.split_first() else {
        return perr(no, "table", "empty table");
    };
    let w = words(first.text);
    if w.first() != Some(&"vars") || w.len() < 2 {
        return perr(first.no, "table", "first line must be `vars NAME...`; alphabets are given as `NAME:a|b`");
    }
    // `X` means a bit; `X:a|b|c` lists labels
    let vars: Vec<Variable> = w[1..]
        .iter()
        .map(|v| match v.split_once(':') {
            Some((n, labels)) => Variable::new(n, &labels.split('|').collect::<Vec<_>>()),
            None => Variable::binary(v),
        })
        .collect();
    let cards: Vec<usize> = vars.iter().map(Variable::card).collect();
    let size: usize = cards.iter().product();
    let mut probs = vec![Prob::from_integer(0); size];
    let mut seen = vec![false; size];
    for l in rows {
        let (lhs, rhs) = key_value(l, "table")?;
        let labels = words(lhs);
        if labels.len() != vars.len() {
            return perr(l.no, "table", format!("expected {} values", vars.len()));
        }
        let mut idx = 0;
        for (v, lab) in vars.iter().zip(&labels) {
            let k = at(l.no, "table", v.value(lab))?;
            idx = idx * v.card() + k;
        }
        if std::mem::replace(&mut seen[idx], true) {
            return perr(l.no, "table", "row given twice");
        }
        probs[idx] = rational(l.no, "table", rhs)?;
    }
    at(no, "table", Distribution::new(vars, probs))
}

fn parse_roles(no: usize, lines: &[Line]) -> Result<BellRoles> {
    let (mut settings, mut outcomes, mut common) = (None, None, None);
    for l in lines {
        let w = words(l.text);
        let list = || w[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match w[0] {
            "settings" => settings = Some(list()),
            "outcomes" => outcomes = Some(list()),
            "common" if w.len() == 2 => common = Some(w[1].to_string()),
            other => return perr(l.no, "roles", format!("unexpected `{other}`")),
        }
    }
    match (settings, outcomes) {
        (Some(settings), Some(outcomes)) if settings.len() == outcomes.len() => {
            Ok(BellRoles { settings, outcomes, common_cause: common })
        }
        _ => perr(no, "roles", "needs `settings` and `outcomes` lines of equal length"),
    }
}

fn parse_embedding(no: usize, lines: &[Line]) -> Result<Embedding> {
    let Some((first, rest)) = lines.split_first() else {
        return perr(no, "embedding", "empty embedding");
    };
    let w = words(first.text);
    match w[..] {
        ["minkowski", d] => {
            let dim: usize = d.parse().or_else(|_| perr(first.no, "embedding", "dimension must be a positive integer"))?;
            let mut e = at(first.no, "embedding", Embedding::minkowski(dim))?;
            for l in rest {
                let (name, coords) = key_value(l, "embedding")?;
                let c = words(coords).iter().map(|s| rational(l.no, "embedding", s)).collect::<Result<Vec<_>>>()?;
                if c.len() != dim + 1 {
                    return perr(l.no, "embedding", format!("expected {} coordinates", dim + 1));
                }
                let t = c[dim];
                at(l.no, "embedding", e.place_at(name, Point::new(c[..dim].to_vec(), t)))?;
            }
            Ok(e)
        }
        ["poset"] => {
            let mut elements: Vec<String> = Vec::new();
            let mut order: Vec<(String, String)> = Vec::new();
            let mut grid = None;
            let mut places = Vec::new();
            for l in rest {
                let w = words(l.text);
                match w[..] {
                    ["elements", ..] => elements.extend(w[1..].iter().map(|s| s.to_string())),
                    ["order", a, "<", b] => order.push((a.to_string(), b.to_string())),
                    ["grid", n, m] => match (n.parse(), m.parse()) {
                        (Ok(n), Ok(m)) => grid = Some((l.no, n, m)),
                        _ => return perr(l.no, "embedding", "grid sizes must be integers"),
                    },
                    _ => {
                        let (name, el) = key_value(l, "embedding")?;
                        places.push((l.no, name.to_string(), el.to_string()));
                    }
                }
            }
            let poset = match grid {
                Some((gno, n, m)) => {
                    if !elements.is_empty() || !order.is_empty() {
                        return perr(gno, "embedding", "`grid` cannot be combined with `elements` or `order`");
                    }
                    at(gno, "embedding", Poset::grid(n, m))?
                }
                None => {
                    let el: Vec<&str> = elements.iter().map(String::as_str).collect();
                    let ord: Vec<(&str, &str)> = order.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                    at(no, "embedding", Poset::new(&el, &ord))?
                }
            };
            let mut e = Embedding::poset(poset);
            for (lno, name, el) in places {
                at(lno, "embedding", e.place_element(&name, &el))?;
            }
            Ok(e)
        }
        _ => perr(first.no, "embedding", "first line must be `minkowski D` or `poset`"),
    }
}

/// Writes a file that [`parse`] reads back to an equal model, table, roles
/// and embedding.
pub fn export(file: &ModelFile) -> Result<String> {
    let mut out = String::new();
    if let Some(m) = &file.model {
        let Some(mm) = m.as_mechanism() else {
            return Err(Error::Configuration("only mechanism models can be written as model files".into()));
        };
        let g = mm.graph();
        out.push_str("[nodes]\n");
        for i in 0..g.len() {
            let kind = if g.is_observed(i) { "observed" } else { "hidden" };
            let _ = writeln!(out, "{} {kind} {}", g.name(i), mm.alphabets()[i].join(" "));
        }
        if mm.mode() == SolutionMode::Uniform {
            out.push_str("\n[mode]\nuniform\n");
        }
        let laws: Vec<usize> = (0..g.len()).filter(|&i| mm.law(i).is_some()).collect();
        if !laws.is_empty() {
            out.push_str("\n[laws]\n");
            for i in laws {
                let p: Vec<String> = mm.law(i).unwrap().iter().map(render_ratio).collect();
                let _ = writeln!(out, "{} = {}", g.name(i), p.join(" "));
            }
        }
        let mechs: Vec<usize> = (0..g.len()).filter(|&i| mm.table(i).is_some()).collect();
        if !mechs.is_empty() {
            out.push_str("\n[mechanisms]\n");
            for i in mechs {
                let ps: Vec<&str> = g.parents(i).iter().map(|&p| g.name(p)).collect();
                let vals: Vec<&str> = mm.table(i).unwrap().iter().map(|&v| mm.alphabets()[i][v].as_str()).collect();
                let _ = writeln!(out, "{}({}) = {}", g.name(i), ps.join(", "), vals.join(" "));
            }
        }
    }
    if let Some(t) = &file.table {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str("[table]\nvars");
        for v in t.vars() {
            let _ = write!(out, " {}:{}", v.name, v.alphabet.join("|"));
        }
        out.push('\n');
        t.for_each(|a, p| {
            if *p != Prob::from_integer(0) {
                let labels: Vec<&str> = a.iter().zip(t.vars()).map(|(&k, v)| v.alphabet[k].as_str()).collect();
                let _ = writeln!(out, "{} = {}", labels.join(" "), render_ratio(p));
            }
        });
    }
    if let Some(r) = &file.roles {
        let _ = write!(out, "\n[roles]\nsettings {}\noutcomes {}\n", r.settings.join(" "), r.outcomes.join(" "));
        if let Some(l) = &r.common_cause {
            let _ = writeln!(out, "common {l}");
        }
    }
    if let Some(e) = &file.embedding {
        out.push_str("\n[embedding]\n");
        match e.backend() {
            Backend::Minkowski { dim } => {
                let _ = writeln!(out, "minkowski {dim}");
            }
            Backend::Poset(p) => {
                let _ = writeln!(out, "poset\nelements {}", p.elements().join(" "));
                for &(a, b) in p.hasse() {
                    let _ = writeln!(out, "order {} < {}", p.elements()[a], p.elements()[b]);
                }
            }
        }
        for (name, ev) in e.locations() {
            match ev {
                Event::Point(pt) => {
                    let c: Vec<String> = pt.x.iter().chain([&pt.t]).map(render_ratio).collect();
                    let _ = writeln!(out, "{name} = {}", c.join(" "));
                }
                Event::Element(_) => {
                    let _ = writeln!(out, "{name} = {}", e.render_event(ev));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const JAMMING: &str = "
[nodes]
A observed 0
B observed 0 1
C observed 0
L hidden 0 1
X observed 0 1
Y observed 0
Z observed 0 1

[laws]
A = 1
B = 1/2 1/2
C = 1
L = 1/2 1/2
Y = 1

[mechanisms]
X(L, B) = 0 1 1 0   # X = L xor B
Z(L) = 0 1

[roles]
settings A B C
outcomes X Y Z
common L

[embedding]
minkowski 1
A = -2 -1
X = -2 0
B = 0 -1/2
Y = 0 1/4
C = 2 -1
Z = 2 0
";

    #[test]
    fn parses_and_round_trips() {
        let f = parse(JAMMING).unwrap();
        let m = f.model.as_ref().unwrap();
        assert_eq!(m.observed_distribution().unwrap(), crate::scenarios::classical_jamming_model(false).unwrap().observed_distribution().unwrap());
        let text = export(&f).unwrap();
        let g = parse(&text).unwrap();
        assert_eq!(g.model, f.model);
        assert_eq!(g.roles, f.roles);
        assert_eq!(g.embedding, f.embedding);
        assert_eq!(export(&g).unwrap(), text);
    }

    #[test]
    fn errors_carry_locations() {
        let bad = JAMMING.replace("B = 1/2 1/2", "B = 1/2 1/3");
        match parse(&bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 13);
                assert!(message.starts_with("[laws]"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("[nodes]\nA observed 0 1\n[wat]\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("A observed 0 1\n"), Err(Error::Parse { line: 1, .. })));
        let short = JAMMING.replace("Z(L) = 0 1", "Z(L) = 0");
        assert!(matches!(parse(&short), Err(Error::Parse { .. })));
    }

    #[test]
    fn table_and_poset() {
        let text = "[table]\nvars A X\n0 0 = 1/2\n1 1 = 1/2\n\n[embedding]\nposet\ngrid 2 2\nA = 0_0\nX = 1_1\n";
        let f = parse(text).unwrap();
        let d = f.distribution().unwrap();
        assert_eq!(d.probs().len(), 4);
        let e = f.embedding.as_ref().unwrap();
        assert_eq!(e.order_of("A", "X").unwrap(), crate::spacetime::Order::Before);
        let again = parse(&export(&f).unwrap()).unwrap();
        assert_eq!(again.table, f.table);
        assert_eq!(again.embedding.unwrap().order_of("A", "X").unwrap(), crate::spacetime::Order::Before);
    }

    #[test]
    fn scenarios_export() {
        for s in crate::scenarios::library().unwrap() {
            let roles = s.model.as_ref().is_none_or(|m| s.roles.validate(m).is_ok()).then(|| s.roles.clone());
            let f = ModelFile { model: s.model.clone(), table: s.table.clone(), roles, embedding: s.embedding.clone() };
            let back = parse(&export(&f).unwrap()).unwrap();
            assert_eq!(back.model, f.model, "{}", s.name);
            assert_eq!(back.table, f.table, "{}", s.name);
            assert_eq!(back.embedding, f.embedding, "{}", s.name);
        }
    }
}
