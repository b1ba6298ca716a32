//! Non-signalling conditions for bipartite and tripartite Bell scenarios.
//!
//! Each condition is a list of clauses of the form `P(T | all settings) =
//! P(T | some settings)`. When settings are parentless, each clause is the
//! negation of a higher-order affects relation, and
//! [`verify_ns_affects_equivalence`] checks this clause by clause.

use serde::{Deserialize, Serialize};

use crate::affects::{AffectsEngine, Relation};
use crate::error::{invalid, Error, Result};
use crate::graph::NodeSet;
use crate::model::CausalModel;
use crate::prob::{for_each_assignment, Distribution, Weight};

/// Which nodes play the settings, outcomes and common cause. Settings and
/// outcomes are paired by position: `settings[i]` belongs to `outcomes[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellRoles {
    pub settings: Vec<String>,
    pub outcomes: Vec<String>,
    pub common_cause: Option<String>,
}

impl BellRoles {
    pub fn bipartite() -> Self {
        BellRoles { settings: vec!["A".into(), "B".into()], outcomes: vec!["X".into(), "Y".into()], common_cause: Some("L".into()) }
    }

    pub fn tripartite() -> Self {
        BellRoles {
            settings: vec!["A".into(), "B".into(), "C".into()],
            outcomes: vec!["X".into(), "Y".into(), "Z".into()],
            common_cause: Some("L".into()),
        }
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if self.settings.len() != n || self.outcomes.len() != n {
            return invalid(format!("expected {n} settings and {n} outcomes"));
        }
        Ok(())
    }

    /// Settings must be observed and parentless; the common cause, if present in
    /// the graph, must be parentless too.
    pub fn validate(&self, model: &CausalModel) -> Result<()> {
        let g = model.graph();
        if !(2..=3).contains(&self.parties()) || self.outcomes.len() != self.parties() {
            return Err(Error::Configuration("roles need 2 or 3 parties with one setting and one outcome each".into()));
        }
        for s in &self.settings {
            let i = g.id(s)?;
            if !g.is_observed(i) || !g.is_parentless(i) {
                return Err(Error::Configuration(format!("setting `{s}` must be observed and parentless")));
            }
        }
        for o in &self.outcomes {
            if !g.is_observed(g.id(o)?) {
                return Err(Error::Configuration(format!("outcome `{o}` must be observed")));
            }
        }
        if let Some(l) = &self.common_cause {
            if let Ok(i) = g.id(l) {
                if !g.is_parentless(i) {
                    return Err(Error::Configuration(format!("common cause `{l}` must be parentless")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NsClause {
    /// e.g. `P(X|AB)=P(X|A)`.
    pub name: String,
    pub holds: bool,
    /// First settings assignment at which the clause fails.
    pub witness: Option<String>,
    /// Implied by the other clauses; reported but not part of the verdict.
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NsVerdict {
    pub condition: String,
    pub holds: bool,
    pub clauses: Vec<NsClause>,
}

fn join(names: &[&str]) -> String {
    if names.iter().all(|n| n.chars().count() == 1) {
        names.concat()
    } else {
        names.join(",")
    }
}

/// Checks `P(targets | settings) = P(targets | kept)` for every settings assignment.
fn clause<W: Weight>(dist: &Distribution<W>, settings: &[&str], targets: &[&str], kept: &[&str]) -> Result<NsClause> {
    let name = format!("P({}|{})=P({}|{})", join(targets), join(settings), join(targets), join(kept));
    let mut order: Vec<&str> = targets.to_vec();
    order.extend(settings);
    let m = dist.marginal(&order)?;
    let s_pos: Vec<usize> = (targets.len()..order.len()).collect();
    let kept_pos: Vec<usize> = kept.iter().map(|k| targets.len() + settings.iter().position(|s| s == k).unwrap()).collect();
    let t_pos: Vec<usize> = (0..targets.len()).collect();
    let s_cards: Vec<usize> = s_pos.iter().map(|&i| m.vars()[i].card()).collect();
    let mut result = Ok(None);
    for_each_assignment(&s_cards, |sv| {
        if !matches!(result, Ok(None)) {
            return;
        }
        let full: Vec<(usize, usize)> = s_pos.iter().copied().zip(sv.iter().copied()).collect();
        let sub: Vec<(usize, usize)> = full.iter().copied().filter(|(i, _)| kept_pos.contains(i)).collect();
        let lhs = match m.conditional_idx(&t_pos, &full) {
            Ok(d) => d,
            Err(e) => {
                result = Err(e);
                return;
            }
        };
        let rhs = match m.conditional_idx(&t_pos, &sub) {
            Ok(d) => d,
            Err(e) => {
                result = Err(e);
                return;
            }
        };
        if !lhs.same_as(&rhs) {
            let at: Vec<String> = full.iter().map(|&(i, v)| format!("{}={}", m.vars()[i].name, m.vars()[i].alphabet[v])).collect();
            let render = |d: &Distribution<W>| d.probs().iter().map(Weight::render).collect::<Vec<_>>().join(", ");
            result = Ok(Some(format!("at {}: [{}] vs [{}]", at.join(" "), render(&lhs), render(&rhs))));
        }
    });
    let witness = result?;
    Ok(NsClause { name, holds: witness.is_none(), witness, derived: false })
}

fn require_full_support<W: Weight>(dist: &Distribution<W>, settings: &[&str]) -> Result<()> {
    if !dist.has_full_support(settings)? {
        return invalid("settings do not have full support");
    }
    Ok(())
}

fn verdict(condition: &str, clauses: Vec<NsClause>) -> NsVerdict {
    let holds = clauses.iter().filter(|c| !c.derived).all(|c| c.holds);
    NsVerdict { condition: condition.to_string(), holds, clauses }
}

fn names(roles: &BellRoles) -> (Vec<&str>, Vec<&str>) {
    (roles.settings.iter().map(String::as_str).collect(), roles.outcomes.iter().map(String::as_str).collect())
}

pub fn check_ns2<W: Weight>(dist: &Distribution<W>, roles: &BellRoles) -> Result<NsVerdict> {
    roles.check_arity(2)?;
    let (s, o) = names(roles);
    require_full_support(dist, &s)?;
    Ok(verdict("NS2", vec![clause(dist, &s, &[o[0]], &[s[0]])?, clause(dist, &s, &[o[1]], &[s[1]])?]))
}

pub fn check_ns3<W: Weight>(dist: &Distribution<W>, roles: &BellRoles) -> Result<NsVerdict> {
    roles.check_arity(3)?;
    let (s, o) = names(roles);
    require_full_support(dist, &s)?;
    Ok(verdict(
        "NS3",
        vec![
            clause(dist, &s, &[o[0], o[1]], &[s[0], s[1]])?,
            clause(dist, &s, &[o[1], o[2]], &[s[1], s[2]])?,
            clause(dist, &s, &[o[0], o[2]], &[s[0], s[2]])?,
        ],
    ))
}

/// The relaxed tripartite condition. The middle outcome's marginal clause is
/// implied and reported as derived.
pub fn check_ns3p<W: Weight>(dist: &Distribution<W>, roles: &BellRoles) -> Result<NsVerdict> {
    roles.check_arity(3)?;
    let (s, o) = names(roles);
    require_full_support(dist, &s)?;
    let mut middle = clause(dist, &s, &[o[1]], &[s[1]])?;
    middle.derived = true;
    Ok(verdict(
        "NS3'",
        vec![
            clause(dist, &s, &[o[0], o[1]], &[s[0], s[1]])?,
            clause(dist, &s, &[o[1], o[2]], &[s[1], s[2]])?,
            clause(dist, &s, &[o[0]], &[s[0]])?,
            clause(dist, &s, &[o[2]], &[s[2]])?,
            middle,
        ],
    ))
}

/// NS3' holds while the outer pair's joint still depends on the middle setting.
pub fn is_jamming<W: Weight>(dist: &Distribution<W>, roles: &BellRoles) -> Result<bool> {
    let ns3p = check_ns3p(dist, roles)?;
    let (s, o) = names(roles);
    let outer = clause(dist, &s, &[o[0], o[2]], &[s[0], s[2]])?;
    Ok(ns3p.holds && !outer.holds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub clause: String,
    pub relation: String,
    pub clause_holds: bool,
    pub relation_holds: bool,
}

impl EquivalenceRow {
    /// A clause holds exactly when its relation does not.
    pub fn agrees(&self) -> bool {
        self.clause_holds != self.relation_holds
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
}

impl EquivalenceReport {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| !r.agrees()).count()
    }
}

/// Compares every NS clause with the affects relation it should negate.
pub fn verify_ns_affects_equivalence(model: &CausalModel, roles: &BellRoles) -> Result<EquivalenceReport> {
    roles.validate(model)?;
    let g = model.graph();
    let dist = model.observed_distribution()?;
    let (s, o) = names(roles);
    let set = |ns: &[&str]| -> Result<NodeSet> { g.set(ns) };
    // (targets, kept settings); the relation's source is the remaining settings
    let specs: Vec<(Vec<&str>, Vec<&str>)> = match roles.parties() {
        2 => vec![(vec![o[0]], vec![s[0]]), (vec![o[1]], vec![s[1]])],
        3 => vec![
            (vec![o[0], o[1]], vec![s[0], s[1]]),
            (vec![o[1], o[2]], vec![s[1], s[2]]),
            (vec![o[0], o[2]], vec![s[0], s[2]]),
            (vec![o[0]], vec![s[0]]),
            (vec![o[2]], vec![s[2]]),
            (vec![o[1]], vec![s[1]]),
        ],
        _ => unreachable!("validated above"),
    };
    require_full_support(&dist, &s)?;
    let engine = AffectsEngine::new(model);
    let mut rows = Vec::new();
    for (targets, kept) in specs {
        let c = clause(&dist, &s, &targets, &kept)?;
        let sources: Vec<&str> = s.iter().copied().filter(|x| !kept.contains(x)).collect();
        let r = Relation::new(set(&sources)?, set(&targets)?).given_do(set(&kept)?);
        let v = engine.evaluate(r)?;
        rows.push(EquivalenceRow { clause: c.name, relation: r.describe(g), clause_holds: c.holds, relation_holds: v.holds });
    }
    Ok(EquivalenceReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{ratio, Prob, Variable};
    use num_traits::Zero;

    fn xor_jamming() -> Distribution {
        // Alice and Charlie's outcomes have parity equal to Bob's setting; Y trivial
        let vars = ["A", "B", "C", "X", "Y", "Z"].map(|n| if n == "Y" { Variable::new(n, &["0"]) } else { Variable::binary(n) });
        Distribution::from_fn(vars.to_vec(), |a| if a[3] ^ a[5] == a[1] { ratio(1, 16) } else { Prob::zero() }).unwrap()
    }

    #[test]
    fn xor_jamming_verdicts() {
        let d = xor_jamming();
        let roles = BellRoles::tripartite();
        assert!(check_ns3p(&d, &roles).unwrap().holds);
        let ns3 = check_ns3(&d, &roles).unwrap();
        assert!(!ns3.holds);
        assert_eq!(ns3.clauses.iter().filter(|c| !c.holds).count(), 1);
        assert!(is_jamming(&d, &roles).unwrap());
    }

    #[test]
    fn product_distribution_is_ns2() {
        let vars = vec![Variable::binary("A"), Variable::binary("B"), Variable::binary("X"), Variable::binary("Y")];
        let d = Distribution::from_fn(vars, |_| ratio(1, 16)).unwrap();
        assert!(check_ns2(&d, &BellRoles::bipartite()).unwrap().holds);
    }

    #[test]
    fn signalling_distribution_fails_ns2() {
        // X copies B
        let vars = vec![Variable::binary("A"), Variable::binary("B"), Variable::binary("X"), Variable::binary("Y")];
        let d = Distribution::from_fn(vars, |a| if a[2] == a[1] { ratio(1, 8) } else { Prob::zero() }).unwrap();
        let v = check_ns2(&d, &BellRoles::bipartite()).unwrap();
        assert!(!v.holds);
        assert!(!v.clauses[0].holds && v.clauses[1].holds);
        assert!(v.clauses[0].witness.as_ref().unwrap().contains("A=0 B=0"));
    }

    #[test]
    fn missing_support_is_an_error() {
        let vars = vec![Variable::binary("A"), Variable::binary("B"), Variable::binary("X"), Variable::binary("Y")];
        let d = Distribution::from_fn(vars, |a| if a[0] == 0 { ratio(1, 8) } else { Prob::zero() }).unwrap();
        assert!(check_ns2(&d, &BellRoles::bipartite()).is_err());
    }

    #[test]
    fn wrong_arity_is_an_error() {
        let d = xor_jamming();
        assert!(check_ns2(&d, &BellRoles::tripartite()).is_err());
    }
}
