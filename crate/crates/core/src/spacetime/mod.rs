//! Spacetime backends and inclusive futures.
//!
//! Two backends are supported: (d+1)-dimensional Minkowski space with closed
//! light cones, and a finite strict partial order given by its Hasse edges.

pub mod falsifier;
pub mod minkowski;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::affects::Verdict;
use crate::error::{invalid, Error, Result};
use crate::graph::CausalGraph;

pub use falsifier::{find_counterexample, FalsifierConfig};
pub use minkowski::{apex_1p1, contain_two_in_one, in_future, slice_contained, spacelike, Point, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Before,
    After,
    Spacelike,
    Equal,
}

/// Answer of a containment query. Sampling can refute but never prove, so
/// queries outside the exact cases may come back undetermined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Containment {
    True,
    False,
    Undetermined,
}

impl Containment {
    fn and(self, other: Containment) -> Containment {
        use Containment::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (Undetermined, _) | (_, Undetermined) => Undetermined,
            _ => True,
        }
    }
}

/// A finite strict partial order, stored as its transitive closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    elements: Vec<String>,
    hasse: Vec<(usize, usize)>,
    less: Vec<Vec<bool>>,
}

impl Poset {
    pub fn new(elements: &[&str], hasse: &[(&str, &str)]) -> Result<Self> {
        let elements: Vec<String> = elements.iter().map(|s| s.to_string()).collect();
        for (i, e) in elements.iter().enumerate() {
            if e.is_empty() || elements[..i].contains(e) {
                return invalid(format!("poset element `{e}` is empty or repeated"));
            }
        }
        let n = elements.len();
        let idx = |s: &str| elements.iter().position(|e| e == s).ok_or_else(|| Error::UnknownNode(s.to_string()));
        let mut less = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for (a, b) in hasse {
            let (i, j) = (idx(a)?, idx(b)?);
            less[i][j] = true;
            edges.push((i, j));
        }
        for k in 0..n {
            for i in 0..n {
                if less[i][k] {
                    for j in 0..n {
                        if less[k][j] {
                            less[i][j] = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| less[i][i]) {
            return invalid("poset relation has a cycle");
        }
        Ok(Poset { elements, hasse: edges, less })
    }

    /// The product order on an `n`-by-`m` grid, elements named `i_j`.
    pub fn grid(n: usize, m: usize) -> Result<Self> {
        let names: Vec<String> = (0..n).flat_map(|i| (0..m).map(move |j| format!("{i}_{j}"))).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if i + 1 < n {
                    edges.push((format!("{i}_{j}"), format!("{}_{j}", i + 1)));
                }
                if j + 1 < m {
                    edges.push((format!("{i}_{j}"), format!("{i}_{}", j + 1)));
                }
            }
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let erefs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Poset::new(&refs, &erefs)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    pub fn id(&self, name: &str) -> Result<usize> {
        self.elements.iter().position(|e| e == name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn less(&self, i: usize, j: usize) -> bool {
        self.less[i][j]
    }

    /// Inclusive future of `i` as a membership vector.
    pub fn future(&self, i: usize) -> Vec<bool> {
        (0..self.len()).map(|j| i == j || self.less[i][j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Minkowski { dim: usize },
    Poset(Poset),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Point(Point),
    Element(usize),
}

/// Locations of the observed nodes of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    backend: Backend,
    locations: BTreeMap<String, Event>,
    falsifier: FalsifierConfig,
}

impl PartialEq for FalsifierConfig {
    fn eq(&self, other: &Self) -> bool {
        (self.directions, self.times, self.seed) == (other.directions, other.times, other.seed)
            && self.min_offset == other.min_offset
            && self.max_offset == other.max_offset
    }
}

impl Embedding {
    pub fn minkowski(dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("Minkowski space needs at least one spatial dimension");
        }
        Ok(Embedding { backend: Backend::Minkowski { dim }, locations: BTreeMap::new(), falsifier: Default::default() })
    }

    pub fn poset(poset: Poset) -> Self {
        Embedding { backend: Backend::Poset(poset), locations: BTreeMap::new(), falsifier: Default::default() }
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn set_falsifier(&mut self, cfg: FalsifierConfig) {
        self.falsifier = cfg;
    }

    pub fn dim(&self) -> Option<usize> {
        match self.backend {
            Backend::Minkowski { dim } => Some(dim),
            Backend::Poset(_) => None,
        }
    }

    pub fn place(&mut self, node: &str, event: Event) -> Result<()> {
        self.check_event(&event)?;
        self.locations.insert(node.to_string(), event);
        Ok(())
    }

    /// Places `node` at `(x_1, ..., x_d; t)`.
    pub fn place_at(&mut self, node: &str, point: Point) -> Result<()> {
        self.place(node, Event::Point(point))
    }

    pub fn place_element(&mut self, node: &str, element: &str) -> Result<()> {
        let i = match &self.backend {
            Backend::Poset(p) => p.id(element)?,
            Backend::Minkowski { .. } => return invalid("poset element given for a Minkowski embedding"),
        };
        self.place(node, Event::Element(i))
    }

    /// Builder form of [`Embedding::place_at`].
    pub fn with(mut self, node: &str, point: Point) -> Result<Self> {
        self.place_at(node, point)?;
        Ok(self)
    }

    fn check_event(&self, e: &Event) -> Result<()> {
        match (&self.backend, e) {
            (Backend::Minkowski { dim }, Event::Point(p)) if p.dim() == *dim => Ok(()),
            (Backend::Poset(p), Event::Element(i)) if *i < p.len() => Ok(()),
            _ => invalid("event does not belong to this embedding's backend"),
        }
    }

    pub fn locations(&self) -> &BTreeMap<String, Event> {
        &self.locations
    }

    pub fn location(&self, node: &str) -> Result<&Event> {
        self.locations.get(node).ok_or_else(|| Error::Configuration(format!("node `{node}` has no location")))
    }

    pub fn render_event(&self, e: &Event) -> String {
        match (e, &self.backend) {
            (Event::Point(p), _) => p.render(),
            (Event::Element(i), Backend::Poset(p)) => p.elements[*i].clone(),
            (Event::Element(i), _) => format!("#{i}"),
        }
    }

    pub fn precedes(&self, p: &Event, q: &Event) -> Result<Order> {
        self.check_event(p)?;
        self.check_event(q)?;
        if p == q {
            return Ok(Order::Equal);
        }
        let (fwd, back) = match (&self.backend, p, q) {
            (Backend::Minkowski { .. }, Event::Point(a), Event::Point(b)) => (in_future(a, b), in_future(b, a)),
            (Backend::Poset(po), Event::Element(i), Event::Element(j)) => (po.less(*i, *j), po.less(*j, *i)),
            _ => unreachable!("checked above"),
        };
        Ok(match (fwd, back) {
            (true, _) => Order::Before,
            (_, true) => Order::After,
            _ => Order::Spacelike,
        })
    }

    /// [`Embedding::precedes`] on node names.
    pub fn order_of(&self, a: &str, b: &str) -> Result<Order> {
        self.precedes(self.location(a)?, self.location(b)?)
    }

    /// Whether `⋂ F̄(left) ⊆ ⋂ F̄(right)` for the locations of the named nodes.
    pub fn future_contained<S: AsRef<str>>(&self, left: &[S], right: &[S]) -> Result<Containment> {
        let l: Vec<Event> = left.iter().map(|n| self.location(n.as_ref()).cloned()).collect::<Result<_>>()?;
        let r: Vec<Event> = right.iter().map(|n| self.location(n.as_ref()).cloned()).collect::<Result<_>>()?;
        self.joint_future_contained(&l, &r)
    }

    pub fn joint_future_contained(&self, left: &[Event], right: &[Event]) -> Result<Containment> {
        if left.is_empty() {
            return invalid("the left side of a containment query must be non-empty");
        }
        for e in left.iter().chain(right) {
            self.check_event(e)?;
        }
        match &self.backend {
            Backend::Poset(p) => {
                let inter = |evs: &[Event]| -> Vec<bool> {
                    let mut acc = vec![true; p.len()];
                    for e in evs {
                        if let Event::Element(i) = e {
                            for (a, f) in acc.iter_mut().zip(p.future(*i)) {
                                *a &= f;
                            }
                        }
                    }
                    acc
                };
                let (l, r) = (inter(left), inter(right));
                let ok = l.iter().zip(&r).all(|(a, b)| !a || *b);
                Ok(if ok { Containment::True } else { Containment::False })
            }
            Backend::Minkowski { dim } => {
                let pts = |evs: &[Event]| -> Vec<Point> {
                    evs.iter()
                        .filter_map(|e| match e {
                            Event::Point(p) => Some(p.clone()),
                            Event::Element(_) => None,
                        })
                        .collect()
                };
                let cones = absorb_nested(pts(left));
                let mut acc = Containment::True;
                for b in pts(right) {
                    acc = acc.and(self.cones_in_one(&cones, &b, *dim)?);
                    if acc == Containment::False {
                        break;
                    }
                }
                Ok(acc)
            }
        }
    }

    fn cones_in_one(&self, cones: &[Point], b: &Point, dim: usize) -> Result<Containment> {
        let yes = |v: bool| if v { Containment::True } else { Containment::False };
        match cones.len() {
            1 => Ok(yes(in_future(b, &cones[0]))),
            2 => Ok(yes(contain_two_in_one(&cones[0], &cones[1], b)?)),
            _ if dim == 1 => {
                let mut apex = cones[0].clone();
                for c in &cones[1..] {
                    apex = apex_1p1(&apex, c)?;
                }
                Ok(yes(in_future(b, &apex)))
            }
            _ => {
                for (i, p) in cones.iter().enumerate() {
                    if in_future(b, p) {
                        return Ok(Containment::True);
                    }
                    for q in &cones[i + 1..] {
                        if contain_two_in_one(p, q, b)? {
                            return Ok(Containment::True);
                        }
                    }
                }
                match find_counterexample(cones, b, &self.falsifier) {
                    Some(_) => Ok(Containment::False),
                    None => Ok(Containment::Undetermined),
                }
            }
        }
    }

    /// Every observed node of `graph` has a location, and no holding relation
    /// puts a source and a target at the same place.
    pub fn check_covers(&self, graph: &CausalGraph) -> Result<()> {
        for i in graph.observed().iter() {
            self.location(graph.name(i))?;
        }
        Ok(())
    }

    pub fn check_non_trivial(&self, graph: &CausalGraph, verdicts: &[Verdict]) -> Result<()> {
        for v in verdicts.iter().filter(|v| v.holds) {
            for x in v.relation.x.iter() {
                for y in v.relation.y.iter() {
                    let (nx, ny) = (graph.name(x), graph.name(y));
                    if self.location(nx)? == self.location(ny)? {
                        return Err(Error::Configuration(format!(
                            "`{nx}` affects `{ny}` but both sit at the same location"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Drops every cone that contains another one; duplicates collapse.
fn absorb_nested(mut cones: Vec<Point>) -> Vec<Point> {
    cones.sort();
    cones.dedup();
    let keep: Vec<bool> = (0..cones.len())
        .map(|i| !cones.iter().enumerate().any(|(j, q)| j != i && in_future(&cones[i], q)))
        .collect();
    cones.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i128]) -> Event {
        Event::Point(Point::frac(c, 4))
    }

    #[test]
    fn precedes_examples() {
        let e = Embedding::minkowski(1).unwrap();
        assert_eq!(e.precedes(&p(&[0, 0]), &p(&[0, 4])).unwrap(), Order::Before);
        assert_eq!(e.precedes(&p(&[0, 0]), &p(&[8, 4])).unwrap(), Order::Spacelike);
        assert_eq!(e.precedes(&p(&[0, 0]), &p(&[4, 4])).unwrap(), Order::Before);
        assert_eq!(e.precedes(&p(&[4, 4]), &p(&[0, 0])).unwrap(), Order::After);
        assert_eq!(e.precedes(&p(&[4, 4]), &p(&[4, 4])).unwrap(), Order::Equal);
        assert!(e.precedes(&p(&[4, 4, 4]), &p(&[4, 4])).is_err());
    }

    #[test]
    fn containment_examples() {
        let e = Embedding::minkowski(1).unwrap();
        let c = e.joint_future_contained(&[p(&[-4, 0]), p(&[4, 0])], &[p(&[0, -2])]).unwrap();
        assert_eq!(c, Containment::True);
        // nested cones
        let c = e.joint_future_contained(&[p(&[0, 0]), p(&[1, 4])], &[p(&[0, 0])]).unwrap();
        assert_eq!(c, Containment::True);
        let e2 = Embedding::minkowski(2).unwrap();
        let c = e2.joint_future_contained(&[p(&[-4, 0, 0]), p(&[4, 0, 0])], &[p(&[0, 0, 2])]).unwrap();
        assert_eq!(c, Containment::False);
        assert!(e2.joint_future_contained(&[], &[p(&[0, 0, 2])]).is_err());
    }

    #[test]
    fn three_cones() {
        let e = Embedding::minkowski(1).unwrap();
        let l = [p(&[-4, 0]), p(&[4, 0]), p(&[0, 1])];
        assert_eq!(e.joint_future_contained(&l, &[p(&[0, 2])]).unwrap(), Containment::True);
        assert_eq!(e.joint_future_contained(&l, &[p(&[2, 3])]).unwrap(), Containment::False);
        let e2 = Embedding::minkowski(2).unwrap();
        let l = [p(&[-4, 0, 0]), p(&[4, 0, 0]), p(&[0, 4, 0])];
        // a pair already inside the right cone
        assert_eq!(e2.joint_future_contained(&l, &[p(&[0, 2, -3])]).unwrap(), Containment::True);
        assert_eq!(e2.joint_future_contained(&l, &[p(&[0, 0, 8])]).unwrap(), Containment::False);
    }

    #[test]
    fn poset_backend() {
        let po = Poset::new(&["a", "b", "c", "d"], &[("a", "c"), ("b", "c"), ("c", "d")]).unwrap();
        let mut e = Embedding::poset(po);
        e.place_element("A", "a").unwrap();
        e.place_element("B", "b").unwrap();
        e.place_element("C", "c").unwrap();
        assert_eq!(e.order_of("A", "C").unwrap(), Order::Before);
        assert_eq!(e.order_of("A", "B").unwrap(), Order::Spacelike);
        assert_eq!(e.future_contained(&["A", "B"], &["C"]).unwrap(), Containment::True);
        assert_eq!(e.future_contained(&["A"], &["C"]).unwrap(), Containment::False);
        assert!(Poset::new(&["a", "b"], &[("a", "b"), ("b", "a")]).is_err());
    }

    #[test]
    fn grid_poset() {
        let g = Poset::grid(3, 3).unwrap();
        let (a, b) = (g.id("0_1").unwrap(), g.id("2_2").unwrap());
        assert!(g.less(a, b));
        assert!(!g.less(g.id("0_2").unwrap(), g.id("1_0").unwrap()));
    }
}
