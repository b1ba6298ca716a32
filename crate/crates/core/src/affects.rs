//! Affects relations and their higher-order and conditional forms.
//!
//! `X affects Y given {do(Z), W}` holds when some values `x, z, w` give
//! `P_do(XZ)(Y | x, z, w) ≠ P_do(Z)(Y | z, w)`. Everything is decided by
//! exhaustive enumeration of the alphabets with exact arithmetic.
//! Conditioning events of probability zero are skipped and counted.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{CausalGraph, NodeSet};
use crate::model::{Assignment, CausalModel};
use crate::prob::{for_each_assignment, Distribution, Prob, Weight};

/// Default cap on observed nodes for [`AffectsEngine::enumerate`].
pub const DEFAULT_ENUM_CAP: usize = 7;

/// `x affects y given {do(z), w}`, as sets of node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub x: NodeSet,
    pub y: NodeSet,
    pub z: NodeSet,
    pub w: NodeSet,
}

impl Relation {
    pub fn new(x: NodeSet, y: NodeSet) -> Self {
        Relation { x, y, z: NodeSet::EMPTY, w: NodeSet::EMPTY }
    }

    pub fn given_do(self, z: NodeSet) -> Self {
        Relation { z, ..self }
    }

    pub fn given(self, w: NodeSet) -> Self {
        Relation { w, ..self }
    }

    /// Parses names like `("BL", "X", "", "")`; multi-letter names are comma separated.
    pub fn named(g: &CausalGraph, x: &str, y: &str, z: &str, w: &str) -> Result<Self> {
        let parse = |s: &str| -> Result<NodeSet> {
            if s.is_empty() {
                return Ok(NodeSet::EMPTY);
            }
            if s.contains(',') {
                return s.split(',').map(|n| g.id(n.trim())).collect();
            }
            if let Ok(i) = g.id(s) {
                return Ok(NodeSet::single(i));
            }
            s.chars().map(|c| g.id(&c.to_string())).collect()
        };
        Ok(Relation { x: parse(x)?, y: parse(y)?, z: parse(z)?, w: parse(w)? })
    }

    pub fn is_conditional(&self) -> bool {
        !self.w.is_empty()
    }

    pub fn describe(&self, g: &CausalGraph) -> String {
        let mut s = format!("{} affects {}", g.label(self.x), g.label(self.y));
        match (self.z.is_empty(), self.w.is_empty()) {
            (true, true) => {}
            (false, true) => s += &format!(" given do({})", g.label(self.z)),
            (_, false) => s += &format!(" given {{do({}), {}}}", g.label(self.z), g.label(self.w)),
        }
        s
    }

    fn check(&self, g: &CausalGraph) -> Result<()> {
        if self.x.is_empty() || self.y.is_empty() {
            return invalid("source and target sets must be non-empty");
        }
        let sets = [self.x, self.y, self.z, self.w];
        for i in 0..4 {
            for j in i + 1..4 {
                if !sets[i].is_disjoint(sets[j]) {
                    return invalid("relation sets must be pairwise disjoint");
                }
            }
        }
        let all = self.x.union(self.y).union(self.z).union(self.w);
        if !all.is_subset(g.observed()) {
            return invalid("relations may only mention observed nodes");
        }
        Ok(())
    }
}

/// Values at which the two conditionals differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<(String, String)>,
    pub z: Vec<(String, String)>,
    pub w: Vec<(String, String)>,
    /// `P_do(XZ)(Y | x, z, w)`, row-major over the target nodes.
    pub intervened: Vec<String>,
    /// `P_do(Z)(Y | z, w)`, same layout.
    pub baseline: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub relation: Relation,
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Number of `(x, z, w)` combinations skipped because a conditional was undefined.
    pub skipped: usize,
    pub irreducible: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintForm {
    /// Some source reaches some target.
    Existential,
    /// Every source reaches some target.
    UniversalSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausationConstraint {
    pub form: ConstraintForm,
    pub sources: NodeSet,
    pub targets: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub from: String,
    pub to: String,
    pub solid: bool,
}

type MarginalKey = (Assignment, u64, u64);

/// Memoising evaluator over one model.
pub struct AffectsEngine<'m> {
    model: &'m CausalModel,
    pos: Vec<Option<usize>>,
    joints: RefCell<HashMap<Assignment, Rc<Distribution>>>,
    marginals: RefCell<HashMap<MarginalKey, Rc<Distribution>>>,
}

impl<'m> AffectsEngine<'m> {
    pub fn new(model: &'m CausalModel) -> Self {
        let g = model.graph();
        let mut pos = vec![None; g.len()];
        for (k, i) in g.observed().iter().enumerate() {
            pos[i] = Some(k);
        }
        AffectsEngine { model, pos, joints: RefCell::default(), marginals: RefCell::default() }
    }

    pub fn model(&self) -> &CausalModel {
        self.model
    }

    pub fn graph(&self) -> &CausalGraph {
        self.model.graph()
    }

    fn joint(&self, a: &Assignment) -> Result<Rc<Distribution>> {
        if let Some(d) = self.joints.borrow().get(a) {
            return Ok(d.clone());
        }
        let d = Rc::new(self.model.interventional(a)?);
        self.joints.borrow_mut().insert(a.clone(), d.clone());
        Ok(d)
    }

    /// `P_do(a)` over `y` then `w`, each in node order.
    fn marginal(&self, a: &Assignment, y: NodeSet, w: NodeSet) -> Result<Rc<Distribution>> {
        let key = (a.clone(), y.bits(), w.bits());
        if let Some(d) = self.marginals.borrow().get(&key) {
            return Ok(d.clone());
        }
        let joint = self.joint(a)?;
        let keep: Vec<usize> = y.iter().chain(w.iter()).map(|i| self.pos[i].unwrap()).collect();
        let d = Rc::new(joint.marginal_idx(&keep)?);
        self.marginals.borrow_mut().insert(key, d.clone());
        Ok(d)
    }

    fn cards(&self, s: NodeSet) -> Vec<usize> {
        s.iter().map(|i| self.model.alphabet(i).len()).collect()
    }

    fn labels(&self, s: NodeSet, vals: &[usize]) -> Vec<(String, String)> {
        s.iter()
            .zip(vals)
            .map(|(i, &v)| (self.graph().name(i).to_string(), self.model.alphabet(i)[v].clone()))
            .collect()
    }

    pub fn affects(&self, x: NodeSet, y: NodeSet) -> Result<Verdict> {
        self.evaluate(Relation::new(x, y))
    }

    pub fn ho_affects(&self, x: NodeSet, y: NodeSet, z: NodeSet) -> Result<Verdict> {
        self.evaluate(Relation::new(x, y).given_do(z))
    }

    pub fn cond_affects(&self, x: NodeSet, y: NodeSet, z: NodeSet, w: NodeSet) -> Result<Verdict> {
        self.evaluate(Relation { x, y, z, w })
    }

    pub fn holds(&self, r: Relation) -> Result<bool> {
        Ok(self.evaluate(r)?.holds)
    }

    pub fn evaluate(&self, r: Relation) -> Result<Verdict> {
        r.check(self.graph())?;
        let (xc, zc, wc) = (self.cards(r.x), self.cards(r.z), self.cards(r.w));
        let ny: usize = self.cards(r.y).iter().product();
        let nw: usize = wc.iter().product();
        let zs: Vec<usize> = r.z.iter().collect();
        let xs: Vec<usize> = r.x.iter().collect();
        let mut zvals = Vec::new();
        for_each_assignment(&zc, |v| zvals.push(v.to_vec()));
        let mut xvals = Vec::new();
        for_each_assignment(&xc, |v| xvals.push(v.to_vec()));
        let mut skipped = 0;
        for zv in &zvals {
            let za: Assignment = zs.iter().copied().zip(zv.iter().copied()).collect();
            let base = self.marginal(&za, r.y, r.w)?;
            let bp = base.probs();
            let qw: Vec<Prob> = (0..nw).map(|wi| sum_column(bp, ny, nw, wi)).collect::<Result<_>>()?;
            for xv in &xvals {
                let mut full = za.clone();
                full.extend(xs.iter().copied().zip(xv.iter().copied()));
                full.sort_unstable();
                let m = self.marginal(&full, r.y, r.w)?;
                let mp = m.probs();
                for wi in 0..nw {
                    if qw[wi].is_zero() {
                        skipped += 1;
                        continue;
                    }
                    let sw = sum_column(mp, ny, nw, wi)?;
                    if sw.is_zero() {
                        skipped += 1;
                        continue;
                    }
                    for yi in 0..ny {
                        let lhs = mp[yi * nw + wi].try_mul(&qw[wi])?;
                        let rhs = bp[yi * nw + wi].try_mul(&sw)?;
                        if lhs != rhs {
                            let wv = decode(wi, &wc);
                            let witness = Witness {
                                x: self.labels(r.x, xv),
                                z: self.labels(r.z, zv),
                                w: self.labels(r.w, &wv),
                                intervened: (0..ny).map(|k| (mp[k * nw + wi] / sw).render()).collect(),
                                baseline: (0..ny).map(|k| (bp[k * nw + wi] / qw[wi]).render()).collect(),
                            };
                            return Ok(Verdict { relation: r, holds: true, witness: Some(witness), skipped, irreducible: None });
                        }
                    }
                }
            }
        }
        Ok(Verdict { relation: r, holds: false, witness: None, skipped, irreducible: None })
    }

    /// Irreducibility of a holding relation. Singleton sources are irreducible.
    pub fn is_irreducible(&self, r: Relation) -> Result<bool> {
        if !self.holds(r)? {
            return invalid(format!("`{}` does not hold", r.describe(self.graph())));
        }
        self.irreducible_unchecked(r)
    }

    fn irreducible_unchecked(&self, r: Relation) -> Result<bool> {
        for s in r.x.subsets() {
            if s.is_empty() || s == r.x {
                continue;
            }
            let sub = Relation { x: s, y: r.y, z: r.z.union(r.x.minus(s)), w: r.w };
            if !self.holds(sub)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Shrinks the source of a holding, reducible relation until it is irreducible.
    ///
    /// At each step the largest proper subset (ties broken by ascending node
    /// bitmask) whose relation still holds with the same `Z` and `W` is taken.
    pub fn reduce(&self, r: Relation) -> Result<Relation> {
        if self.is_irreducible(r)? {
            return invalid(format!("`{}` is already irreducible", r.describe(self.graph())));
        }
        let mut cur = r;
        loop {
            if self.irreducible_unchecked(cur)? {
                return Ok(cur);
            }
            let mut cands: Vec<NodeSet> = cur.x.subsets().filter(|s| !s.is_empty() && *s != cur.x).collect();
            cands.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.bits()));
            let mut next = None;
            for s in cands {
                let cand = Relation { x: s, ..cur };
                if self.holds(cand)? {
                    next = Some(cand);
                    break;
                }
            }
            match next {
                Some(n) => cur = n,
                None => {
                    return Err(Error::InconsistentModel(format!(
                        "`{}` is reducible but no proper sub-relation holds",
                        cur.describe(self.graph())
                    )))
                }
            }
        }
    }

    /// Evaluates every signature over the observed nodes and marks the
    /// irreducibility of each holding one.
    pub fn enumerate(&self, conditional: bool, max_nodes: usize) -> Result<Vec<Verdict>> {
        let obs: Vec<usize> = self.graph().observed().iter().collect();
        if obs.len() > max_nodes {
            return Err(Error::Resource(format!("{} observed nodes exceed the cap of {max_nodes}", obs.len())));
        }
        let sigs = signatures(&obs, conditional);
        let mut out = Vec::with_capacity(sigs.len());
        let mut holding = HashSet::new();
        for r in sigs {
            let v = self.evaluate(r)?;
            if v.holds {
                holding.insert(r);
            }
            out.push(v);
        }
        for v in out.iter_mut().filter(|v| v.holds) {
            let r = v.relation;
            let irreducible = r.x.subsets().filter(|s| !s.is_empty() && *s != r.x).all(|s| {
                holding.contains(&Relation { x: s, y: r.y, z: r.z.union(r.x.minus(s)), w: r.w })
            });
            v.irreducible = Some(irreducible);
        }
        Ok(out)
    }

    /// Labels each edge between observed nodes solid (the parent affects the child) or dashed.
    pub fn classify_arrows(&self) -> Result<Vec<Arrow>> {
        let g = self.graph();
        let mut out = Vec::new();
        for (a, b) in g.edges() {
            if g.is_observed(a) && g.is_observed(b) {
                let solid = self.affects(NodeSet::single(a), NodeSet::single(b))?.holds;
                out.push(Arrow { from: g.name(a).to_string(), to: g.name(b).to_string(), solid });
            }
        }
        Ok(out)
    }
}

fn sum_column(p: &[Prob], ny: usize, nw: usize, wi: usize) -> Result<Prob> {
    (0..ny).try_fold(Prob::zero(), |acc, yi| acc.try_add(&p[yi * nw + wi]))
}

fn decode(mut idx: usize, cards: &[usize]) -> Vec<usize> {
    let mut v = vec![0; cards.len()];
    for k in (0..cards.len()).rev() {
        v[k] = idx % cards[k];
        idx /= cards[k];
    }
    v
}

/// Every `(X, Y, Z[, W])` of pairwise disjoint subsets of `nodes` with `X, Y` non-empty,
/// ordered by set sizes and then bitmasks.
pub fn signatures(nodes: &[usize], conditional: bool) -> Vec<Relation> {
    let roles = if conditional { 5u64 } else { 4 };
    let n = nodes.len() as u32;
    let mut out = Vec::new();
    for mut code in 0..roles.pow(n) {
        let mut sets = [NodeSet::EMPTY; 4];
        for &node in nodes {
            let role = (code % roles) as usize;
            code /= roles;
            if role > 0 {
                sets[role - 1].insert(node);
            }
        }
        if !sets[0].is_empty() && !sets[1].is_empty() {
            out.push(Relation { x: sets[0], y: sets[1], z: sets[2], w: sets[3] });
        }
    }
    out.sort_by_key(|r| (r.x.len(), r.y.len(), r.z.len(), r.w.len(), r.x, r.y, r.z, r.w));
    out
}

/// Path constraints implied by holding verdicts. For conditional relations the
/// target side is `Y ∪ W`.
pub fn causation_constraints(verdicts: &[Verdict]) -> Vec<CausationConstraint> {
    let mut out = Vec::new();
    for v in verdicts.iter().filter(|v| v.holds) {
        let r = v.relation;
        let targets = r.y.union(r.w);
        out.push(CausationConstraint { form: ConstraintForm::Existential, sources: r.x, targets });
        if v.irreducible == Some(true) {
            out.push(CausationConstraint { form: ConstraintForm::UniversalSource, sources: r.x, targets });
        }
    }
    out
}

/// Convenience wrapper over an [`AffectsEngine`] for a single query by name.
pub fn affects_named(model: &CausalModel, x: &str, y: &str, z: &str) -> Result<bool> {
    let r = Relation::named(model.graph(), x, y, z, "")?;
    AffectsEngine::new(model).holds(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelBuilder;

    fn jamming(observed_lambda: bool) -> CausalModel {
        let b = ModelBuilder::new();
        let b = if observed_lambda { b.bits(&["L"]) } else { b.hidden_range("L", 2) };
        b.bits(&["B", "X", "Z"])
            .uniform(&["L", "B"])
            .mechanism("X", &["L", "B"], |v| v[0] ^ v[1])
            .mechanism("Z", &["L"], |v| v[0])
            .build()
            .unwrap()
    }

    #[test]
    fn jamming_first_order_relations() {
        let m = jamming(false);
        assert!(affects_named(&m, "B", "XZ", "").unwrap());
        assert!(!affects_named(&m, "B", "X", "").unwrap());
        assert!(!affects_named(&m, "B", "Z", "").unwrap());
    }

    #[test]
    fn observed_lambda_relations() {
        let m = jamming(true);
        let e = AffectsEngine::new(&m);
        let g = m.graph();
        assert!(e.holds(Relation::named(g, "B", "X", "L", "").unwrap()).unwrap());
        let bl = Relation::named(g, "BL", "X", "", "").unwrap();
        assert!(e.is_irreducible(bl).unwrap());
        let arrows = e.classify_arrows().unwrap();
        let label = |a: &str, b: &str| arrows.iter().find(|r| r.from == a && r.to == b).unwrap().solid;
        assert!(label("L", "Z"));
        assert!(!label("L", "X"));
        assert!(!label("B", "X"));
    }

    #[test]
    fn witness_reports_both_conditionals() {
        let m = jamming(false);
        let e = AffectsEngine::new(&m);
        let v = e.evaluate(Relation::named(m.graph(), "B", "XZ", "", "").unwrap()).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.x, vec![("B".to_string(), "0".to_string())]);
        assert_eq!(w.baseline, vec!["1/4"; 4]);
        assert_eq!(w.intervened, vec!["1/2", "0", "0", "1/2"]);
    }

    #[test]
    fn signature_counts() {
        for (n, unc, cond) in [(2usize, 2usize, 2usize), (3, 18, 24), (4, 110, 194)] {
            let nodes: Vec<usize> = (0..n).collect();
            assert_eq!(signatures(&nodes, false).len(), unc);
            assert_eq!(signatures(&nodes, true).len(), cond);
        }
    }

    #[test]
    fn reducible_relation_shrinks() {
        let m = ModelBuilder::new()
            .bits(&["X1", "X2", "Y"])
            .uniform(&["X1", "X2"])
            .mechanism("Y", &["X1"], |v| v[0])
            .build()
            .unwrap();
        let e = AffectsEngine::new(&m);
        let r = Relation::named(m.graph(), "X1,X2", "Y", "", "").unwrap();
        assert!(!e.is_irreducible(r).unwrap());
        let red = e.reduce(r).unwrap();
        assert_eq!(red.describe(m.graph()), "X1 affects Y");
        assert!(e.reduce(red).is_err());
    }

    #[test]
    fn bad_relations_are_rejected() {
        let m = jamming(false);
        let e = AffectsEngine::new(&m);
        let g = m.graph();
        assert!(e.evaluate(Relation::named(g, "B", "B", "", "").unwrap()).is_err());
        assert!(e.evaluate(Relation::named(g, "", "X", "", "").unwrap()).is_err());
        assert!(e.evaluate(Relation::named(g, "L", "X", "", "").unwrap()).is_err());
        let not_holding = Relation::named(g, "B", "X", "", "").unwrap();
        assert!(e.is_irreducible(not_holding).is_err());
    }

    #[test]
    fn enumeration_cap() {
        let m = jamming(true);
        let e = AffectsEngine::new(&m);
        assert!(matches!(e.enumerate(false, 3), Err(Error::Resource(_))));
        assert_eq!(e.enumerate(false, 4).unwrap().len(), 110);
    }
}
