//! Causal models: deterministic mechanisms over exogenous laws, or tables.
//!
//! A mechanism model assigns every parentless node a law and every other
//! node a lookup table over its parents. On cyclic graphs the joint is
//! obtained by enumerating, for each exogenous assignment, the global fixed
//! points of the mechanisms. [`SolutionMode`] fixes what happens when there
//! is not exactly one.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{CausalGraph, NodeSet};
use crate::prob::{dsep_property_holds, for_each_assignment, render_ratio, Distribution, Prob, SeparationViolation, Variable, Weight};

/// An intervention: `(node, value)` pairs with node indices ascending.
pub type Assignment = Vec<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SolutionMode {
    /// Every exogenous assignment must have exactly one fixed point.
    #[default]
    Unique,
    /// Weight is spread evenly over the fixed points; none is an error.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismModel {
    graph: CausalGraph,
    alphabets: Vec<Vec<String>>,
    laws: Vec<Option<Vec<Prob>>>,
    tables: Vec<Option<Vec<usize>>>,
    mode: SolutionMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    graph: CausalGraph,
    alphabets: Vec<Vec<String>>,
    observed: Distribution,
    interventions: BTreeMap<Assignment, Distribution>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CausalModel {
    Mechanism(MechanismModel),
    Table(TableModel),
}

fn sort_assignment(a: &[(usize, usize)]) -> Result<Assignment> {
    let mut v = a.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|w| w[0].0 == w[1].0) {
        return invalid("a node is assigned twice");
    }
    Ok(v)
}

impl MechanismModel {
    /// Assembles a model from per-node parts, indexed like `graph`.
    /// Tables are indexed row-major over `graph.parents(i)` in ascending order.
    pub fn new(
        graph: CausalGraph,
        alphabets: Vec<Vec<String>>,
        laws: Vec<Option<Vec<Prob>>>,
        tables: Vec<Option<Vec<usize>>>,
        mode: SolutionMode,
    ) -> Result<Self> {
        let n = graph.len();
        if alphabets.len() != n || laws.len() != n || tables.len() != n {
            return invalid("per-node data does not match the graph");
        }
        for i in 0..n {
            let name = graph.name(i);
            if alphabets[i].is_empty() {
                return invalid(format!("`{name}` has an empty alphabet"));
            }
            if graph.is_parentless(i) {
                let Some(law) = &laws[i] else {
                    return Err(Error::Configuration(format!("parentless node `{name}` has no law")));
                };
                if tables[i].is_some() {
                    return Err(Error::Configuration(format!("parentless node `{name}` has a mechanism")));
                }
                if law.len() != alphabets[i].len() {
                    return invalid(format!("law of `{name}` has {} entries for {} values", law.len(), alphabets[i].len()));
                }
                if law.iter().any(|p| *p < Prob::zero()) {
                    return invalid(format!("law of `{name}` has a negative entry"));
                }
                let total = law.iter().try_fold(Prob::zero(), |a, p| a.try_add(p))?;
                if total != Prob::one() {
                    return invalid(format!("law of `{name}` sums to {}", render_ratio(&total)));
                }
            } else {
                let Some(table) = &tables[i] else {
                    return Err(Error::Configuration(format!("node `{name}` has parents but no mechanism")));
                };
                if laws[i].is_some() {
                    return Err(Error::Configuration(format!("node `{name}` has parents, so it cannot have a law")));
                }
                let rows: usize = graph.parents(i).iter().map(|&p| alphabets[p].len()).product();
                if table.len() != rows {
                    return invalid(format!("mechanism of `{name}` has {} rows, expected {rows}", table.len()));
                }
                if table.iter().any(|&v| v >= alphabets[i].len()) {
                    return invalid(format!("mechanism of `{name}` outputs a value outside its alphabet"));
                }
            }
        }
        Ok(MechanismModel { graph, alphabets, laws, tables, mode })
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn mode(&self) -> SolutionMode {
        self.mode
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }

    pub fn law(&self, i: usize) -> Option<&[Prob]> {
        self.laws[i].as_deref()
    }

    pub fn table(&self, i: usize) -> Option<&[usize]> {
        self.tables[i].as_deref()
    }

    /// The model with `assignment` imposed: incoming edges cut, point laws installed.
    pub fn intervene(&self, assignment: &[(usize, usize)]) -> Result<MechanismModel> {
        let a = sort_assignment(assignment)?;
        let set: NodeSet = a.iter().map(|&(i, _)| i).collect();
        let graph = self.graph.do_graph(set)?;
        let mut laws = self.laws.clone();
        let mut tables = self.tables.clone();
        for &(i, v) in &a {
            if v >= self.alphabets[i].len() {
                return invalid(format!("value index {v} out of range for `{}`", self.graph.name(i)));
            }
            let mut law = vec![Prob::zero(); self.alphabets[i].len()];
            law[v] = Prob::one();
            laws[i] = Some(law);
            tables[i] = None;
        }
        MechanismModel::new(graph, self.alphabets.clone(), laws, tables, self.mode)
    }

    /// Every fixed point together with its weight, under `assignment`.
    fn weighted_solutions(&self, assignment: &[(usize, usize)]) -> Result<Vec<(Prob, Vec<usize>)>> {
        let m = if assignment.is_empty() { self.clone() } else { self.intervene(assignment)? };
        let g = &m.graph;
        let n = g.len();
        let exo: Vec<usize> = (0..n).filter(|&i| g.is_parentless(i)).collect();
        let comps: Vec<Vec<usize>> = g.sccs().into_iter().filter(|c| !g.is_parentless(c[0])).collect();
        let exo_cards: Vec<usize> = exo.iter().map(|&i| m.alphabets[i].len()).collect();
        let mut out = Vec::new();
        let mut failure = None;
        for_each_assignment(&exo_cards, |vals| {
            if failure.is_some() {
                return;
            }
            let mut weight = Prob::one();
            for (k, &i) in exo.iter().enumerate() {
                let p = &m.laws[i].as_ref().unwrap()[vals[k]];
                match weight.try_mul(p) {
                    Ok(w) => weight = w,
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
            }
            if weight.is_zero() {
                return;
            }
            let mut state = vec![usize::MAX; n];
            for (k, &i) in exo.iter().enumerate() {
                state[i] = vals[k];
            }
            let mut sols = Vec::new();
            m.extend(&comps, 0, &mut state, &mut sols);
            let k = sols.len();
            let bad = match m.mode {
                SolutionMode::Unique => k != 1,
                SolutionMode::Uniform => k == 0,
            };
            if bad {
                let desc: Vec<String> =
                    exo.iter().zip(vals).map(|(&i, &v)| format!("{}={}", g.name(i), m.alphabets[i][v])).collect();
                failure = Some(Error::InconsistentModel(format!(
                    "exogenous assignment [{}] has {k} fixed points",
                    desc.join(" ")
                )));
                return;
            }
            let share = weight / Prob::from_integer(k as i128);
            for s in sols {
                out.push((share, s));
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    fn eval(&self, i: usize, state: &[usize]) -> usize {
        let idx = self.graph.parents(i).iter().fold(0, |acc, &p| acc * self.alphabets[p].len() + state[p]);
        self.tables[i].as_ref().unwrap()[idx]
    }

    fn extend(&self, comps: &[Vec<usize>], c: usize, state: &mut Vec<usize>, sols: &mut Vec<Vec<usize>>) {
        let Some(comp) = comps.get(c) else {
            sols.push(state.clone());
            return;
        };
        if comp.len() == 1 {
            let i = comp[0];
            state[i] = self.eval(i, state);
            self.extend(comps, c + 1, state, sols);
            state[i] = usize::MAX;
            return;
        }
        let cards: Vec<usize> = comp.iter().map(|&i| self.alphabets[i].len()).collect();
        let mut found = Vec::new();
        for_each_assignment(&cards, |vals| {
            for (k, &i) in comp.iter().enumerate() {
                state[i] = vals[k];
            }
            if comp.iter().all(|&i| self.eval(i, state) == state[i]) {
                found.push(vals.to_vec());
            }
        });
        for vals in found {
            for (k, &i) in comp.iter().enumerate() {
                state[i] = vals[k];
            }
            self.extend(comps, c + 1, state, sols);
        }
        for &i in comp {
            state[i] = usize::MAX;
        }
    }

    /// Joint distribution over every node, hidden ones included.
    pub fn solve_joint(&self) -> Result<Distribution> {
        self.solve_over(&[], self.graph.all())
    }

    pub(crate) fn solve_over(&self, assignment: &[(usize, usize)], scope: NodeSet) -> Result<Distribution> {
        let sols = self.weighted_solutions(assignment)?;
        let keep: Vec<usize> = scope.iter().collect();
        let vars: Vec<Variable> = keep
            .iter()
            .map(|&i| Variable { name: self.graph.name(i).to_string(), alphabet: self.alphabets[i].clone() })
            .collect();
        let mut probs = vec![Prob::zero(); crate::prob::table_size(&vars)?];
        for (w, s) in sols {
            let idx = keep.iter().fold(0, |acc, &i| acc * self.alphabets[i].len() + s[i]);
            probs[idx] = probs[idx].try_add(&w)?;
        }
        Distribution::new(vars, probs)
    }
}

impl TableModel {
    /// `observed` must be over exactly the observed nodes of `graph`, in index order.
    /// Each interventional table is over the same scope and must put point
    /// mass on the intervened values.
    pub fn new(graph: CausalGraph, observed: Distribution, interventions: Vec<(Assignment, Distribution)>) -> Result<Self> {
        let obs: Vec<usize> = graph.observed().iter().collect();
        if observed.names() != obs.iter().map(|&i| graph.name(i)).collect::<Vec<_>>() {
            return invalid("observed table must list the observed nodes in declaration order");
        }
        let mut alphabets = vec![vec!["0".to_string()]; graph.len()];
        for (k, &i) in obs.iter().enumerate() {
            alphabets[i] = observed.vars()[k].alphabet.clone();
        }
        let mut map = BTreeMap::new();
        for (a, d) in interventions {
            let a = sort_assignment(&a)?;
            if d.vars() != observed.vars() {
                return invalid("interventional table scope differs from the observed table");
            }
            for &(i, v) in &a {
                if !graph.is_observed(i) {
                    return invalid(format!("cannot intervene on unobserved node `{}`", graph.name(i)));
                }
                let k = obs.iter().position(|&j| j == i).unwrap();
                if !d.event_prob(&[(k, v)])?.is_one() {
                    return invalid(format!("interventional table does not fix `{}`", graph.name(i)));
                }
            }
            if map.insert(a, d).is_some() {
                return invalid("duplicate interventional table");
            }
        }
        Ok(TableModel { graph, alphabets, observed, interventions: map })
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn observed(&self) -> &Distribution {
        &self.observed
    }

    pub fn interventions(&self) -> &BTreeMap<Assignment, Distribution> {
        &self.interventions
    }

    /// Supplied tables first; otherwise the part of the intervention on nodes that
    /// are parentless in the remaining do-graph is obtained by conditioning.
    fn lookup(&self, a: &[(usize, usize)]) -> Result<Distribution> {
        if a.is_empty() {
            return Ok(self.observed.clone());
        }
        if let Some(d) = self.interventions.get(a) {
            return Ok(d.clone());
        }
        let obs: Vec<usize> = self.graph.observed().iter().collect();
        let parentless: Vec<usize> = (0..a.len()).filter(|&k| self.graph.is_parentless(a[k].0)).collect();
        let mut fallback_zero = None;
        // try to condition away as many parentless entries as possible
        for drop in NodeSet::from_bits((1u64 << parentless.len()) - 1).subsets().collect::<Vec<_>>().into_iter().rev() {
            if drop.is_empty() {
                continue;
            }
            let dropped: Vec<usize> = drop.iter().map(|k| parentless[k]).collect();
            let base: Assignment =
                (0..a.len()).filter(|k| !dropped.contains(k)).map(|k| a[k]).collect();
            let table = if base.is_empty() { Some(&self.observed) } else { self.interventions.get(&base) };
            let Some(table) = table else { continue };
            let event: Vec<(usize, usize)> =
                dropped.iter().map(|&k| (obs.iter().position(|&j| j == a[k].0).unwrap(), a[k].1)).collect();
            let keep: Vec<usize> = (0..obs.len()).collect();
            match table.conditional_idx(&keep, &event) {
                Ok(d) => return Ok(d),
                Err(Error::ZeroProbability(e)) => fallback_zero = Some(e),
                Err(e) => return Err(e),
            }
        }
        let names: Vec<String> =
            a.iter().map(|&(i, v)| format!("{}={}", self.graph.name(i), self.alphabets[i][v])).collect();
        let why = fallback_zero.map(|e| format!(" (derivation conditions on {e}, which has probability zero)")).unwrap_or_default();
        Err(Error::UnsupportedIntervention(format!("no table for do({}){why}", names.join(", "))))
    }
}

impl CausalModel {
    pub fn graph(&self) -> &CausalGraph {
        match self {
            CausalModel::Mechanism(m) => &m.graph,
            CausalModel::Table(t) => &t.graph,
        }
    }

    pub fn alphabet(&self, i: usize) -> &[String] {
        match self {
            CausalModel::Mechanism(m) => &m.alphabets[i],
            CausalModel::Table(t) => &t.alphabets[i],
        }
    }

    pub fn observed_vars(&self) -> Vec<Variable> {
        let g = self.graph();
        g.observed()
            .iter()
            .map(|i| Variable { name: g.name(i).to_string(), alphabet: self.alphabet(i).to_vec() })
            .collect()
    }

    pub fn observed_names(&self) -> Vec<String> {
        self.graph().names(self.graph().observed())
    }

    /// Resolves `(name, label)` pairs into an [`Assignment`].
    pub fn assignment(&self, pairs: &[(&str, &str)]) -> Result<Assignment> {
        let g = self.graph();
        let mut a = Vec::new();
        for &(n, l) in pairs {
            let i = g.id(n)?;
            let v = self
                .alphabet(i)
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::InvalidArgument(format!("`{l}` is not a value of `{n}`")))?;
            a.push((i, v));
        }
        sort_assignment(&a)
    }

    pub fn observed_distribution(&self) -> Result<Distribution> {
        self.interventional(&[])
    }

    /// Joint over the observed nodes (declaration order) after `do(assignment)`.
    pub fn interventional(&self, assignment: &[(usize, usize)]) -> Result<Distribution> {
        let a = sort_assignment(assignment)?;
        let g = self.graph();
        for &(i, v) in &a {
            if i >= g.len() {
                return invalid(format!("node index {i} out of range"));
            }
            if !g.is_observed(i) {
                return invalid(format!("cannot intervene on unobserved node `{}`", g.name(i)));
            }
            if v >= self.alphabet(i).len() {
                return invalid(format!("value index {v} out of range for `{}`", g.name(i)));
            }
        }
        match self {
            CausalModel::Mechanism(m) => m.solve_over(&a, g.observed()),
            CausalModel::Table(t) => t.lookup(&a),
        }
    }

    /// The post-intervention model.
    pub fn intervene(&self, assignment: &[(usize, usize)]) -> Result<CausalModel> {
        let a = sort_assignment(assignment)?;
        match self {
            CausalModel::Mechanism(m) => Ok(CausalModel::Mechanism(m.intervene(&a)?)),
            CausalModel::Table(t) => {
                let set: NodeSet = a.iter().map(|&(i, _)| i).collect();
                let graph = t.graph.do_graph(set)?;
                let observed = t.lookup(&a)?;
                let mut rest = Vec::new();
                for (key, d) in &t.interventions {
                    let covers = a.iter().all(|p| key.contains(p));
                    let clash = key.iter().any(|&(i, v)| a.iter().any(|&(j, w)| i == j && v != w));
                    if covers && !clash && key.len() > a.len() {
                        let extra: Assignment = key.iter().filter(|p| !a.contains(p)).copied().collect();
                        rest.push((extra, d.clone()));
                    }
                }
                Ok(CausalModel::Table(TableModel::new(graph, observed, rest)?))
            }
        }
    }

    pub fn as_mechanism(&self) -> Option<&MechanismModel> {
        match self {
            CausalModel::Mechanism(m) => Some(m),
            CausalModel::Table(_) => None,
        }
    }
}

impl From<MechanismModel> for CausalModel {
    fn from(m: MechanismModel) -> Self {
        CausalModel::Mechanism(m)
    }
}

impl From<TableModel> for CausalModel {
    fn from(t: TableModel) -> Self {
        CausalModel::Table(t)
    }
}

/// Incremental construction of mechanism models, by node name.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    graph: CausalGraph,
    alphabets: Vec<Vec<String>>,
    laws: Vec<Option<Vec<Prob>>>,
    rules: Vec<Option<(Vec<usize>, Vec<usize>)>>,
    mode: SolutionMode,
    error: Option<Error>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fail(&mut self, e: Error) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }

    fn node(mut self, name: &str, alphabet: Vec<String>, observed: bool) -> Self {
        match self.graph.add_node(name, observed) {
            Ok(_) => {
                self.alphabets.push(alphabet);
                self.laws.push(None);
                self.rules.push(None);
            }
            Err(e) => self.fail(e),
        }
        self
    }

    pub fn observed(self, name: &str, alphabet: &[&str]) -> Self {
        self.node(name, alphabet.iter().map(|s| s.to_string()).collect(), true)
    }

    pub fn hidden(self, name: &str, alphabet: &[&str]) -> Self {
        self.node(name, alphabet.iter().map(|s| s.to_string()).collect(), false)
    }

    /// Observed nodes with alphabet `0..k`.
    pub fn range(mut self, names: &[&str], k: usize) -> Self {
        for n in names {
            self = self.node(n, (0..k).map(|v| v.to_string()).collect(), true);
        }
        self
    }

    pub fn bits(self, names: &[&str]) -> Self {
        self.range(names, 2)
    }

    pub fn hidden_range(self, name: &str, k: usize) -> Self {
        self.node(name, (0..k).map(|v| v.to_string()).collect(), false)
    }

    pub fn law(mut self, name: &str, probs: &[Prob]) -> Self {
        match self.graph.id(name) {
            Ok(i) => self.laws[i] = Some(probs.to_vec()),
            Err(e) => self.fail(e),
        }
        self
    }

    pub fn uniform(mut self, names: &[&str]) -> Self {
        for name in names {
            match self.graph.id(name) {
                Ok(i) => {
                    let k = self.alphabets[i].len() as i128;
                    self.laws[i] = Some(vec![Prob::new(1, k); k as usize]);
                }
                Err(e) => self.fail(e),
            }
        }
        self
    }

    /// Declares `name := f(parents)`, adding the edges. `f` receives parent
    /// values in the order given here.
    pub fn mechanism(mut self, name: &str, parents: &[&str], f: impl Fn(&[usize]) -> usize) -> Self {
        let ids: Result<Vec<usize>> = std::iter::once(name).chain(parents.iter().copied()).map(|n| self.graph.id(n)).collect();
        let ids = match ids {
            Ok(v) => v,
            Err(e) => {
                self.fail(e);
                return self;
            }
        };
        let (i, ps) = (ids[0], ids[1..].to_vec());
        for &p in &ps {
            if let Err(e) = self.graph.add_edge_ids(p, i) {
                self.fail(e);
                return self;
            }
        }
        let cards: Vec<usize> = ps.iter().map(|&p| self.alphabets[p].len()).collect();
        let mut table = Vec::new();
        for_each_assignment(&cards, |vals| table.push(f(vals)));
        self.rules[i] = Some((ps, table));
        self
    }

    pub fn mode(mut self, mode: SolutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn build_mechanism(self) -> Result<MechanismModel> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let g = &self.graph;
        let mut tables = vec![None; g.len()];
        for i in 0..g.len() {
            let Some((ps, table)) = &self.rules[i] else { continue };
            if ps.is_empty() {
                return Err(Error::Configuration(format!("mechanism of `{}` has no parents; give it a law", g.name(i))));
            }
            // re-index from the caller's parent order to ascending order
            let sorted = g.parents(i);
            let cards: Vec<usize> = sorted.iter().map(|&p| self.alphabets[p].len()).collect();
            let caller_cards: Vec<usize> = ps.iter().map(|&p| self.alphabets[p].len()).collect();
            let mut out = Vec::new();
            for_each_assignment(&cards, |vals| {
                let idx = ps.iter().zip(&caller_cards).fold(0, |acc, (p, c)| {
                    let k = sorted.iter().position(|q| q == p).unwrap();
                    acc * c + vals[k]
                });
                out.push(table[idx]);
            });
            tables[i] = Some(out);
        }
        MechanismModel::new(self.graph, self.alphabets, self.laws, tables, self.mode)
    }

    pub fn build(self) -> Result<CausalModel> {
        self.build_mechanism().map(CausalModel::Mechanism)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyViolation {
    pub intervened: Vec<String>,
    pub conditioned: Vec<String>,
    pub values: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub dsep_violations: Vec<SeparationViolation>,
    pub consistency_violations: Vec<ConsistencyViolation>,
    /// Interventions the model could not evaluate (table models only).
    pub unsupported: usize,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.dsep_violations.is_empty() && self.consistency_violations.is_empty()
    }
}

const CONSISTENCY_SAMPLES: usize = 400;

/// Checks the separation property of the observed distribution and that
/// intervening on nodes already parentless agrees with conditioning on them.
pub fn validate(model: &CausalModel) -> Result<Validation> {
    let g = model.graph();
    let observed = model.observed_distribution()?;
    let dsep_violations = dsep_property_holds(g, &observed)?;
    let obs: Vec<usize> = g.observed().iter().collect();
    let parentless: NodeSet = obs.iter().copied().filter(|&i| g.is_parentless(i)).collect();
    let mut pairs: Vec<(NodeSet, NodeSet)> = Vec::new();
    for y in g.observed().subsets() {
        for x in parentless.minus(y).subsets() {
            if !x.is_empty() {
                pairs.push((y, x));
            }
        }
    }
    if obs.len() > crate::prob::DSEP_EXHAUSTIVE_MAX && pairs.len() > CONSISTENCY_SAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0de_5eed);
        pairs.shuffle(&mut rng);
        pairs.truncate(CONSISTENCY_SAMPLES);
        pairs.sort();
    }
    let mut consistency_violations = Vec::new();
    let mut unsupported = 0;
    for (y, x) in pairs {
        let ys: Vec<usize> = y.iter().collect();
        let xs: Vec<usize> = x.iter().collect();
        let ycards: Vec<usize> = ys.iter().map(|&i| model.alphabet(i).len()).collect();
        let xcards: Vec<usize> = xs.iter().map(|&i| model.alphabet(i).len()).collect();
        let mut yvals_all = Vec::new();
        for_each_assignment(&ycards, |v| yvals_all.push(v.to_vec()));
        for yv in yvals_all {
            let ya: Assignment = ys.iter().copied().zip(yv.iter().copied()).collect();
            let base = match model.interventional(&ya) {
                Ok(d) => d,
                Err(Error::UnsupportedIntervention(_)) => {
                    unsupported += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut xvals_all = Vec::new();
            for_each_assignment(&xcards, |v| xvals_all.push(v.to_vec()));
            for xv in xvals_all {
                let event: Vec<(usize, usize)> =
                    xs.iter().zip(&xv).map(|(&i, &v)| (obs.iter().position(|&j| j == i).unwrap(), v)).collect();
                let keep: Vec<usize> = (0..obs.len()).collect();
                let conditioned = match base.conditional_idx(&keep, &event) {
                    Ok(d) => d,
                    Err(Error::ZeroProbability(_)) => continue,
                    Err(e) => return Err(e),
                };
                let mut full = ya.clone();
                full.extend(xs.iter().copied().zip(xv.iter().copied()));
                let joint = match model.interventional(&full) {
                    Ok(d) => d,
                    Err(Error::UnsupportedIntervention(_)) => {
                        unsupported += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if !joint.same_as(&conditioned) {
                    let mut sorted = full.clone();
                    sorted.sort_unstable();
                    let values: Vec<String> =
                        sorted.iter().map(|&(i, v)| format!("{}={}", g.name(i), model.alphabet(i)[v])).collect();
                    consistency_violations.push(ConsistencyViolation {
                        intervened: g.names(y),
                        conditioned: g.names(x),
                        values: values.join(" "),
                    });
                }
            }
        }
    }
    Ok(Validation { dsep_violations, consistency_violations, unsupported })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;

    fn trit_loop() -> CausalModel {
        ModelBuilder::new()
            .bits(&["A", "B"])
            .range(&["X", "Y"], 3)
            .uniform(&["A", "B"])
            .mechanism("X", &["Y"], |v| 2 * v[0] % 3)
            .mechanism("Y", &["X"], |v| v[0])
            .build()
            .unwrap()
    }

    #[test]
    fn trit_loop_has_unique_solution() {
        let m = trit_loop();
        let p = m.observed_distribution().unwrap().marginal(&["X", "Y"]).unwrap();
        assert_eq!(p.prob_of(&["0", "0"]).unwrap(), Prob::one());
    }

    #[test]
    fn trit_loop_interventions() {
        let m = trit_loop();
        let dx = m.interventional(&m.assignment(&[("X", "1")]).unwrap()).unwrap();
        assert_eq!(dx.marginal(&["Y"]).unwrap().prob_of(&["1"]).unwrap(), Prob::one());
        let dy = m.interventional(&m.assignment(&[("Y", "2")]).unwrap()).unwrap();
        assert_eq!(dy.marginal(&["X"]).unwrap().prob_of(&["1"]).unwrap(), Prob::one());
    }

    #[test]
    fn unique_mode_rejects_multiple_fixed_points() {
        let m = ModelBuilder::new()
            .bits(&["X", "Y"])
            .mechanism("X", &["Y"], |v| v[0])
            .mechanism("Y", &["X"], |v| v[0])
            .build()
            .unwrap();
        assert!(matches!(m.observed_distribution(), Err(Error::InconsistentModel(_))));
        let no_fp = ModelBuilder::new()
            .bits(&["X", "Y"])
            .mechanism("X", &["Y"], |v| v[0])
            .mechanism("Y", &["X"], |v| 1 - v[0])
            .mode(SolutionMode::Uniform)
            .build()
            .unwrap();
        assert!(matches!(no_fp.observed_distribution(), Err(Error::InconsistentModel(_))));
    }

    #[test]
    fn hidden_loop_uniform_mode() {
        let m = ModelBuilder::new()
            .bits(&["X", "Y"])
            .hidden_range("L", 2)
            .uniform(&["L"])
            .mechanism("X", &["Y", "L"], |v| v[0] ^ v[1])
            .mechanism("Y", &["X", "L"], |v| v[0] ^ v[1])
            .mode(SolutionMode::Uniform)
            .build()
            .unwrap();
        let p = m.observed_distribution().unwrap();
        assert!(p.probs().iter().all(|q| *q == ratio(1, 4)));
        let joint = m.as_mechanism().unwrap().solve_joint().unwrap();
        assert_eq!(joint.names(), vec!["X", "Y", "L"]);
        assert_eq!(joint.prob_of(&["0", "1", "1"]).unwrap(), ratio(1, 4));
    }

    #[test]
    fn builder_reorders_parents() {
        // caller lists parents as (Y, A) but A precedes Y in the graph
        let m = ModelBuilder::new()
            .range(&["A"], 2)
            .range(&["Y"], 3)
            .range(&["X"], 3)
            .uniform(&["A", "Y"])
            .mechanism("X", &["Y", "A"], |v| (v[0] + v[1]) % 3)
            .build()
            .unwrap();
        let a = m.assignment(&[("A", "1"), ("Y", "2")]).unwrap();
        let d = m.interventional(&a).unwrap();
        assert_eq!(d.marginal(&["X"]).unwrap().prob_of(&["0"]).unwrap(), Prob::one());
    }

    #[test]
    fn missing_law_is_a_configuration_error() {
        let r = ModelBuilder::new().bits(&["A"]).build();
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    #[test]
    fn intervening_on_hidden_node_fails() {
        let m = ModelBuilder::new().hidden_range("L", 2).bits(&["X"]).uniform(&["L"]).mechanism("X", &["L"], |v| v[0]).build().unwrap();
        assert!(m.interventional(&[(0, 1)]).is_err());
    }

    #[test]
    fn table_model_derives_parentless_interventions() {
        let g = CausalGraph::from_parts(&[("A", true), ("X", true)], &[("A", "X")]).unwrap();
        let obs = Distribution::from_fn(vec![Variable::binary("A"), Variable::binary("X")], |a| {
            if a[0] == a[1] {
                ratio(1, 2)
            } else {
                Prob::zero()
            }
        })
        .unwrap();
        let t = CausalModel::Table(TableModel::new(g, obs, vec![]).unwrap());
        let d = t.interventional(&[(0, 1)]).unwrap();
        assert_eq!(d.prob_of(&["1", "1"]).unwrap(), Prob::one());
        assert!(matches!(t.interventional(&[(1, 0)]), Err(Error::UnsupportedIntervention(_))));
        assert!(validate(&t).unwrap().passed());
    }

    #[test]
    fn validation_of_small_models() {
        assert!(validate(&trit_loop()).unwrap().passed());
        let chain = ModelBuilder::new()
            .bits(&["A", "X", "Y"])
            .uniform(&["A"])
            .mechanism("X", &["A"], |v| v[0])
            .mechanism("Y", &["X"], |v| v[0])
            .build()
            .unwrap();
        assert!(validate(&chain).unwrap().passed());
    }
}
