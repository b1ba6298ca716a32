//! Compatibility of affects relations with a spacetime embedding, the
//! Bell-scenario conditions that characterise it, and causal-loop checks.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::affects::{causation_constraints, AffectsEngine, ConstraintForm, Relation, Verdict, DEFAULT_ENUM_CAP};
use crate::error::{invalid, Error, Result};
use crate::graph::{CausalGraph, NodeSet};
use crate::model::CausalModel;
use crate::signalling::{check_ns2, check_ns3p, BellRoles, NsVerdict};
use crate::spacetime::{Containment, Embedding, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompatVerdict {
    Compatible,
    Incompatible,
    Undetermined,
}

/// A relation whose required containment `⋂ F̄(left) ⊆ F̄(right)` failed or
/// could not be decided.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentCheck {
    pub relation: String,
    pub left: Vec<String>,
    pub right: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub verdict: CompatVerdict,
    /// Irreducible holding relations that were checked.
    pub checked: usize,
    pub violations: Vec<ContainmentCheck>,
    pub undetermined: Vec<ContainmentCheck>,
}

impl CompatibilityReport {
    pub fn compatible(&self) -> bool {
        self.verdict == CompatVerdict::Compatible
    }
}

/// Irreducibility of each holding verdict, taken from the flag when present
/// and otherwise looked up among the other verdicts.
fn irreducible_flags(verdicts: &[Verdict], g: &CausalGraph) -> Result<Vec<bool>> {
    let index: HashMap<Relation, bool> = verdicts.iter().map(|v| (v.relation, v.holds)).collect();
    verdicts
        .iter()
        .map(|v| {
            if !v.holds {
                return Ok(false);
            }
            if let Some(f) = v.irreducible {
                return Ok(f);
            }
            let r = v.relation;
            for s in r.x.subsets().filter(|s| !s.is_empty() && *s != r.x) {
                let sub = Relation { x: s, y: r.y, z: r.z.union(r.x.minus(s)), w: r.w };
                match index.get(&sub) {
                    Some(true) => {}
                    Some(false) => return Ok(false),
                    None => {
                        return invalid(format!(
                            "cannot decide irreducibility of `{}`: `{}` is missing from the verdict list",
                            r.describe(g),
                            sub.describe(g)
                        ))
                    }
                }
            }
            Ok(true)
        })
        .collect()
}

/// For every holding irreducible `X affects Y given {do(Z), W}`, requires
/// `F̄(Y) ∩ F̄(Z) ∩ F̄(W) ⊆ F̄(X)`.
pub fn check_compat(graph: &CausalGraph, verdicts: &[Verdict], embedding: &Embedding) -> Result<CompatibilityReport> {
    let flags = irreducible_flags(verdicts, graph)?;
    let mut cache: HashMap<(NodeSet, NodeSet), Containment> = HashMap::new();
    let mut report =
        CompatibilityReport { verdict: CompatVerdict::Compatible, checked: 0, violations: vec![], undetermined: vec![] };
    for (v, irreducible) in verdicts.iter().zip(flags) {
        if !irreducible {
            continue;
        }
        let r = v.relation;
        let left = r.y.union(r.z).union(r.w);
        let result = match cache.get(&(left, r.x)) {
            Some(c) => *c,
            None => {
                let c = embedding.future_contained(&graph.names(left), &graph.names(r.x))?;
                cache.insert((left, r.x), c);
                c
            }
        };
        report.checked += 1;
        let entry = || ContainmentCheck { relation: r.describe(graph), left: graph.names(left), right: graph.names(r.x) };
        match result {
            Containment::True => {}
            Containment::False => report.violations.push(entry()),
            Containment::Undetermined => report.undetermined.push(entry()),
        }
    }
    report.verdict = if !report.violations.is_empty() {
        CompatVerdict::Incompatible
    } else if !report.undetermined.is_empty() {
        CompatVerdict::Undetermined
    } else {
        CompatVerdict::Compatible
    };
    Ok(report)
}

/// Enumerates the unconditional relations of `model` and checks them against `embedding`.
pub fn model_compat(model: &CausalModel, embedding: &Embedding) -> Result<CompatibilityReport> {
    embedding.check_covers(model.graph())?;
    let verdicts = AffectsEngine::new(model).enumerate(false, DEFAULT_ENUM_CAP)?;
    check_compat(model.graph(), &verdicts, embedding)
}

fn expect_order(e: &Embedding, a: &str, b: &str, want: Order) -> Result<()> {
    let got = e.order_of(a, b)?;
    if got != want {
        return Err(Error::Configuration(format!("expected `{a}` {want:?} `{b}`, found {got:?}")));
    }
    Ok(())
}

fn role_names(roles: &BellRoles) -> Vec<&str> {
    roles.settings.iter().chain(&roles.outcomes).map(String::as_str).collect()
}

/// Each setting precedes its outcome and every other pair is spacelike.
fn check_pairs(e: &Embedding, roles: &BellRoles) -> Result<()> {
    let names = role_names(roles);
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let paired = (0..roles.parties()).any(|k| roles.settings[k] == *a && roles.outcomes[k] == *b);
            expect_order(e, a, b, if paired { Order::Before } else { Order::Spacelike })?;
        }
    }
    Ok(())
}

pub fn check_standard_configuration(e: &Embedding, roles: &BellRoles) -> Result<()> {
    check_pairs(e, roles)
}

/// Validates a jamming configuration and returns whether
/// `F̄(X) ∩ F̄(Z) ⊆ F̄(Y)` also holds.
pub fn check_jamming_configuration(e: &Embedding, roles: &BellRoles) -> Result<bool> {
    if roles.parties() != 3 {
        return Err(Error::Configuration("a jamming configuration needs three parties".into()));
    }
    check_pairs(e, roles)?;
    let (x, z) = (roles.outcomes[0].as_str(), roles.outcomes[2].as_str());
    match e.future_contained(&[x, z], &[roles.settings[1].as_str()])? {
        Containment::True => {}
        c => {
            return Err(Error::Configuration(format!(
                "the joint future of `{x}` and `{z}` is not inside the future of `{}` ({c:?})",
                roles.settings[1]
            )))
        }
    }
    match e.future_contained(&[x, z], &[roles.outcomes[1].as_str()])? {
        Containment::True => Ok(true),
        Containment::False => Ok(false),
        Containment::Undetermined => Err(Error::Configuration(format!(
            "could not decide whether the joint future of `{x}` and `{z}` lies in the future of `{}`",
            roles.outcomes[1]
        ))),
    }
}

fn require_hidden_common_cause(model: &CausalModel, roles: &BellRoles) -> Result<()> {
    roles.validate(model)?;
    if let Some(l) = &roles.common_cause {
        if let Ok(i) = model.graph().id(l) {
            if model.graph().is_observed(i) {
                return Err(Error::Configuration(format!("common cause `{l}` must be unobserved")));
            }
        }
    }
    Ok(())
}

/// Holding unconditional relations whose source lies inside the outcomes.
fn outcome_sourced(verdicts: &[Verdict], outcomes: NodeSet) -> Vec<Relation> {
    verdicts
        .iter()
        .filter(|v| v.holds && !v.relation.is_conditional() && v.relation.x.is_subset(outcomes))
        .map(|v| v.relation)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteConditions {
    pub ns2: NsVerdict,
    pub condition1: bool,
    pub condition2: bool,
    /// Relations emanating from the outcomes.
    pub offending: Vec<String>,
}

impl BipartiteConditions {
    pub fn predict_compatible(&self) -> bool {
        self.condition1 && self.condition2
    }
}

/// NS2, and the absence of relations emanating from a subset of the outcomes.
pub fn check_bipartite_conditions(model: &CausalModel, roles: &BellRoles, verdicts: &[Verdict]) -> Result<BipartiteConditions> {
    require_hidden_common_cause(model, roles)?;
    if roles.parties() != 2 {
        return invalid("bipartite roles required");
    }
    let g = model.graph();
    let ns2 = check_ns2(&model.observed_distribution()?, roles)?;
    let outcomes = g.set(&roles.outcomes.iter().map(String::as_str).collect::<Vec<_>>())?;
    let offending: Vec<String> = outcome_sourced(verdicts, outcomes).iter().map(|r| r.describe(g)).collect();
    Ok(BipartiteConditions { condition1: ns2.holds, condition2: offending.is_empty(), ns2, offending })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripartiteConditions {
    pub ns3p: NsVerdict,
    pub condition1: bool,
    pub condition2: bool,
    pub condition2_prime: bool,
    /// Whether `F̄(X) ∩ F̄(Z) ⊆ F̄(Y)`; selects condition 2′ over condition 2.
    pub middle_contains_outer: bool,
    pub offending: Vec<String>,
}

impl TripartiteConditions {
    pub fn predict_compatible(&self) -> bool {
        self.condition1 && if self.middle_contains_outer { self.condition2_prime } else { self.condition2 }
    }
}

/// NS3′ together with conditions 2 and 2′ on outcome-sourced relations. 2′
/// exempts relations with source exactly the middle outcome whose targets
/// include both outer outcomes.
pub fn check_tripartite_conditions(
    model: &CausalModel,
    roles: &BellRoles,
    embedding: &Embedding,
    verdicts: &[Verdict],
) -> Result<TripartiteConditions> {
    require_hidden_common_cause(model, roles)?;
    let middle_contains_outer = check_jamming_configuration(embedding, roles)?;
    let g = model.graph();
    let ns3p = check_ns3p(&model.observed_distribution()?, roles)?;
    let o: Vec<usize> = roles.outcomes.iter().map(|n| g.id(n)).collect::<Result<_>>()?;
    let outcomes: NodeSet = o.iter().copied().collect();
    let outer = NodeSet::single(o[0]).with(o[2]);
    let sourced = outcome_sourced(verdicts, outcomes);
    let exempt = |r: &Relation| r.x == NodeSet::single(o[1]) && outer.is_subset(r.y);
    let offending: Vec<String> = sourced.iter().map(|r| r.describe(g)).collect();
    Ok(TripartiteConditions {
        condition1: ns3p.holds,
        condition2: sourced.is_empty(),
        condition2_prime: sourced.iter().all(exempt),
        middle_contains_outer,
        ns3p,
        offending,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopVerdict {
    /// No acyclic order of the observed nodes satisfies the causation constraints.
    pub acl: bool,
    /// A linear order satisfying every constraint, earliest first, when `acl` is false.
    pub witness_order: Option<Vec<String>>,
    pub constraints: usize,
}

/// Searches for an order of the observed nodes under which every holding
/// relation can be explained by forward paths. The search runs over prefixes
/// of linear orders, which is exact: any satisfying partial order extends to
/// a satisfying linear one.
pub fn certify_acl(graph: &CausalGraph, verdicts: &[Verdict]) -> Result<LoopVerdict> {
    let obs: Vec<usize> = graph.observed().iter().collect();
    let n = obs.len();
    if n > 20 {
        return Err(Error::Resource(format!("{n} observed nodes exceed the order-search cap of 20")));
    }
    let local = |s: NodeSet| -> u32 {
        s.iter().map(|i| 1u32 << obs.iter().position(|&o| o == i).expect("observed")).fold(0, |a, b| a | b)
    };
    let constraints: Vec<(ConstraintForm, u32, u32)> =
        causation_constraints(verdicts).into_iter().map(|c| (c.form, local(c.sources), local(c.targets))).collect();
    // A prefix is bad once all targets are placed while the sources are not
    // (universal) or none of them are (existential).
    let ok = |s: u32| {
        constraints.iter().all(|&(form, x, t)| {
            if t & s != t {
                return true;
            }
            match form {
                ConstraintForm::Existential => x & s != 0,
                ConstraintForm::UniversalSource => x & s == x,
            }
        })
    };
    let full = (1u32 << n) - 1;
    let mut reach = vec![false; 1usize << n];
    let mut from = vec![usize::MAX; 1usize << n];
    reach[0] = true;
    for s in 0..=full {
        if !reach[s as usize] {
            continue;
        }
        for k in 0..n {
            let t = s | (1 << k);
            if t != s && !reach[t as usize] && ok(t) {
                reach[t as usize] = true;
                from[t as usize] = k;
            }
        }
    }
    let witness_order = reach[full as usize].then(|| {
        let mut order = Vec::with_capacity(n);
        let mut s = full;
        while s != 0 {
            let k = from[s as usize];
            order.push(graph.name(obs[k]).to_string());
            s &= !(1 << k);
        }
        order.reverse();
        order
    });
    Ok(LoopVerdict { acl: witness_order.is_none(), witness_order, constraints: constraints.len() })
}

/// Holding verdicts keyed by node names, so that models on different graphs compare.
fn verdict_map(g: &CausalGraph, verdicts: &[Verdict]) -> BTreeMap<[Vec<String>; 4], bool> {
    verdicts
        .iter()
        .map(|v| {
            let r = v.relation;
            ([g.names(r.x), g.names(r.y), g.names(r.z), g.names(r.w)], v.holds)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HclCertificate {
    pub certified: bool,
    pub same_distribution: bool,
    pub same_relations: bool,
    pub relations_compared: usize,
}

/// A cycle is hidden when an acyclic model reproduces both its observed
/// distribution and all of its affects relations.
pub fn certify_hcl(cyclic: &CausalModel, witness: &CausalModel, conditional: bool) -> Result<HclCertificate> {
    if !cyclic.graph().has_cycle() {
        return invalid("the model under test has no directed cycle");
    }
    if witness.graph().has_cycle() {
        return invalid("the witness model must be acyclic");
    }
    let (d1, d2) = (cyclic.observed_distribution()?, witness.observed_distribution()?);
    let same_distribution = d1.vars() == d2.vars() && d1.probs() == d2.probs();
    let v1 = AffectsEngine::new(cyclic).enumerate(conditional, DEFAULT_ENUM_CAP)?;
    let v2 = AffectsEngine::new(witness).enumerate(conditional, DEFAULT_ENUM_CAP)?;
    let (m1, m2) = (verdict_map(cyclic.graph(), &v1), verdict_map(witness.graph(), &v2));
    let same_relations = m1 == m2;
    Ok(HclCertificate {
        certified: same_distribution && same_relations,
        same_distribution,
        same_relations,
        relations_compared: m1.len(),
    })
}
