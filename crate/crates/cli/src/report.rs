//! JSON and text reports. Field order is fixed by the struct definitions, so
//! output is byte-identical across runs.

use std::fmt::Write as _;

use causaloop::affects::{AffectsEngine, Arrow, Verdict, Witness};
use causaloop::compat::{
    certify_acl, certify_hcl, check_compat, check_bipartite_conditions, check_tripartite_conditions,
    BipartiteConditions, CompatVerdict, CompatibilityReport, HclCertificate, LoopVerdict, TripartiteConditions,
};
use causaloop::error::Result;
use causaloop::format::ModelFile;
use causaloop::model::CausalModel;
use causaloop::prob::Distribution;
use causaloop::scenarios::ScenarioReport;
use causaloop::signalling::{
    check_ns2, check_ns3, check_ns3p, is_jamming, verify_ns_affects_equivalence, BellRoles, EquivalenceReport, NsVerdict,
};
use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RelationEntry {
    pub relation: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irreducible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Input combinations skipped because a conditional was undefined.
    pub skipped: usize,
}

impl RelationEntry {
    fn of(v: &Verdict, m: &CausalModel) -> Self {
        RelationEntry {
            relation: v.relation.describe(m.graph()),
            holds: v.holds,
            irreducible: v.irreducible,
            witness: v.witness.clone(),
            skipped: v.skipped,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NsReport {
    pub verdicts: Vec<NsVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jamming: Option<bool>,
    /// Clause-by-clause comparison with the matching affects relations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceReport>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Conditions {
    Bipartite(BipartiteConditions),
    Tripartite(TripartiteConditions),
}

#[derive(Debug, Serialize)]
pub struct CompatSection {
    pub report: CompatibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Conditions>,
}

#[derive(Debug, Serialize)]
pub struct LoopSection {
    pub acl: LoopVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hcl: Option<HclCertificate>,
}

#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub observed: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluated: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub irreducible: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub arrows: Vec<Arrow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<NsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compat: Option<CompatSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loops: Option<LoopSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioReport>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { report_version: REPORT_VERSION, command: command.into(), ..Default::default() }
    }

    pub fn undetermined(&self) -> bool {
        self.compat.as_ref().is_some_and(|c| c.report.verdict == CompatVerdict::Undetermined)
            || self.geometry.as_ref().is_some_and(|g| g.get("answer").and_then(|a| a.as_str()) == Some("undetermined"))
    }

    pub fn failed(&self) -> bool {
        self.scenarios.iter().any(|s| !s.passed)
    }
}

pub fn verdicts(m: &CausalModel, conditional: bool, max_nodes: usize) -> Result<Vec<Verdict>> {
    AffectsEngine::new(m).enumerate(conditional, max_nodes)
}

pub fn relations_into(r: &mut Report, m: &CausalModel, vs: &[Verdict], holding_only: bool) -> Result<()> {
    r.observed = m.observed_names();
    r.evaluated = Some(vs.len());
    r.relations = vs.iter().filter(|v| v.holds || !holding_only).map(|v| RelationEntry::of(v, m)).collect();
    r.irreducible = vs.iter().filter(|v| v.irreducible == Some(true)).map(|v| v.relation.describe(m.graph())).collect();
    r.arrows = AffectsEngine::new(m).classify_arrows()?;
    Ok(())
}

pub fn ns_report(dist: &Distribution, roles: &BellRoles, model: Option<&CausalModel>) -> Result<NsReport> {
    let (verdicts, jamming) = match roles.parties() {
        2 => (vec![check_ns2(dist, roles)?], None),
        _ => (vec![check_ns3(dist, roles)?, check_ns3p(dist, roles)?], Some(is_jamming(dist, roles)?)),
    };
    let equivalence = model.map(|m| verify_ns_affects_equivalence(m, roles)).transpose()?;
    Ok(NsReport { verdicts, jamming, equivalence })
}

/// Bell-scenario conditions, when the file describes one with a hidden common cause.
fn conditions(file: &ModelFile, vs: &[Verdict]) -> Option<Conditions> {
    let (m, roles, e) = (file.model.as_ref()?, file.roles.as_ref()?, file.embedding.as_ref()?);
    match roles.parties() {
        2 => check_bipartite_conditions(m, roles, vs).ok().map(Conditions::Bipartite),
        _ => check_tripartite_conditions(m, roles, e, vs).ok().map(Conditions::Tripartite),
    }
}

pub fn compat_section(file: &ModelFile, vs: &[Verdict]) -> Result<CompatSection> {
    let m = file.model()?;
    let e = file.embedding()?;
    e.check_covers(m.graph())?;
    e.check_non_trivial(m.graph(), vs)?;
    Ok(CompatSection { report: check_compat(m.graph(), vs, e)?, conditions: conditions(file, vs) })
}

pub fn loop_section(m: &CausalModel, vs: &[Verdict], witness: Option<&CausalModel>, conditional: bool) -> Result<LoopSection> {
    Ok(LoopSection { acl: certify_acl(m.graph(), vs)?, hcl: witness.map(|w| certify_hcl(m, w, conditional)).transpose()? })
}

pub fn to_json(r: &Report) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize") + "\n"
}

fn yes(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn to_text(r: &Report) -> String {
    let mut out = String::new();
    if let Some(n) = r.evaluated {
        let holding = r.relations.iter().filter(|e| e.holds).count();
        let _ = writeln!(out, "observed: {}", r.observed.join(" "));
        let _ = writeln!(out, "relations evaluated: {n}, holding: {holding}");
        for e in &r.relations {
            let irr = match e.irreducible {
                Some(true) => " (irreducible)",
                _ => "",
            };
            let _ = writeln!(out, "  {}: {}{irr}", e.relation, yes(e.holds));
        }
        for a in &r.arrows {
            let _ = writeln!(out, "arrow {} -> {}: {}", a.from, a.to, if a.solid { "solid" } else { "dashed" });
        }
    }
    if let Some(ns) = &r.ns {
        for v in &ns.verdicts {
            let _ = writeln!(out, "{}: {}", v.condition, yes(v.holds));
            for c in v.clauses.iter().filter(|c| !c.holds) {
                let _ = writeln!(out, "  fails: {}{}", c.name, c.witness.as_ref().map(|w| format!(" {w}")).unwrap_or_default());
            }
        }
        if let Some(j) = ns.jamming {
            let _ = writeln!(out, "jamming: {}", yes(j));
        }
        if let Some(eq) = &ns.equivalence {
            let _ = writeln!(out, "clause/relation disagreements: {}", eq.disagreements());
        }
    }
    if let Some(c) = &r.compat {
        let _ = writeln!(out, "compatibility: {:?} ({} irreducible relations checked)", c.report.verdict, c.report.checked);
        for v in &c.report.violations {
            let _ = writeln!(out, "  violated: {} needs {} inside {}", v.relation, v.left.join("∩"), v.right.join("∩"));
        }
        for v in &c.report.undetermined {
            let _ = writeln!(out, "  undetermined: {}", v.relation);
        }
        match &c.conditions {
            Some(Conditions::Bipartite(b)) => {
                let _ = writeln!(out, "conditions: NS2 {}, no outcome-sourced relations {}", yes(b.condition1), yes(b.condition2));
            }
            Some(Conditions::Tripartite(t)) => {
                let _ = writeln!(
                    out,
                    "conditions: NS3' {}, 2 {}, 2' {}, outer futures inside Y's {}",
                    yes(t.condition1),
                    yes(t.condition2),
                    yes(t.condition2_prime),
                    yes(t.middle_contains_outer)
                );
            }
            None => {}
        }
    }
    if let Some(l) = &r.loops {
        if l.acl.acl {
            let _ = writeln!(out, "ACL: certified ({} constraints)", l.acl.constraints);
        } else {
            let order = l.acl.witness_order.as_deref().unwrap_or_default().join(" < ");
            let _ = writeln!(out, "ACL: none (order {order})");
        }
        if let Some(h) = &l.hcl {
            let _ = writeln!(
                out,
                "HCL: {} (same distribution {}, same relations {}, {} compared)",
                if h.certified { "certified" } else { "not certified" },
                yes(h.same_distribution),
                yes(h.same_relations),
                h.relations_compared
            );
        }
    }
    if let Some(g) = &r.geometry {
        if let Some(a) = g.get("answer").and_then(|a| a.as_str()) {
            let _ = writeln!(out, "{a}");
        }
    }
    for s in &r.scenarios {
        let _ = writeln!(out, "{} {}", if s.passed { "PASS" } else { "FAIL" }, s.name);
        for c in &s.checks {
            let mark = if c.passed { "ok" } else { "MISMATCH" };
            let _ = writeln!(out, "  {mark} {}: expected {}, got {}", c.expectation, c.expected, c.actual);
        }
    }
    out
}
