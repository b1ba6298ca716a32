//! Finite joint distributions over labelled discrete variables.
//!
//! Exact work uses [`Prob`] (`Ratio<i128>`). Distributions built from
//! floating-point amplitudes use `f64` and compare within [`FLOAT_TOL`].

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::{CausalGraph, NodeSet};

pub type Prob = Ratio<i128>;

pub const FLOAT_TOL: f64 = 1e-9;

pub trait Weight:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + std::ops::Sub<Output = Self>
    + std::ops::Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Equality: exact for rationals, within [`FLOAT_TOL`] for floats.
    fn same(&self, other: &Self) -> bool;
    fn try_add(&self, other: &Self) -> Result<Self>;
    fn try_mul(&self, other: &Self) -> Result<Self>;
    fn to_f64(&self) -> f64;
    fn render(&self) -> String;
    fn is_negative_weight(&self) -> bool;
}

impl Weight for Prob {
    fn same(&self, other: &Self) -> bool {
        self == other
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        self.checked_add(other).ok_or(Error::Overflow)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        self.checked_mul(other).ok_or(Error::Overflow)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn render(&self) -> String {
        render_ratio(self)
    }
    fn is_negative_weight(&self) -> bool {
        self.is_negative()
    }
}

impl Weight for f64 {
    fn same(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format!("{self}")
    }
    fn is_negative_weight(&self) -> bool {
        *self < -FLOAT_TOL
    }
}

pub fn render_ratio(r: &Prob) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `0.25` into an exact rational.
pub fn parse_ratio(s: &str) -> Option<Prob> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (i128, i128) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
        return (q != 0).then(|| Prob::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let whole: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let den = 10i128.checked_pow(frac.len() as u32)?;
        let f: i128 = frac.parse().ok()?;
        let num = whole.abs().checked_mul(den)?.checked_add(f)?;
        return Some(Prob::new(if neg { -num } else { num }, den));
    }
    s.parse::<i128>().ok().map(Prob::from_integer)
}

pub fn ratio(p: i128, q: i128) -> Prob {
    Prob::new(p, q)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub alphabet: Vec<String>,
}

impl Variable {
    pub fn new(name: &str, alphabet: &[&str]) -> Self {
        Variable { name: name.to_string(), alphabet: alphabet.iter().map(|s| s.to_string()).collect() }
    }

    /// Alphabet `0, 1, ..., k-1`.
    pub fn range(name: &str, k: usize) -> Self {
        Variable { name: name.to_string(), alphabet: (0..k).map(|v| v.to_string()).collect() }
    }

    pub fn binary(name: &str) -> Self {
        Self::range(name, 2)
    }

    pub fn card(&self) -> usize {
        self.alphabet.len()
    }

    pub fn value(&self, label: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidArgument(format!("`{label}` is not a value of `{}`", self.name)))
    }
}

/// A dense joint distribution. Entries are stored row-major with the first
/// variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<W = Prob> {
    vars: Vec<Variable>,
    probs: Vec<W>,
}

pub(crate) fn table_size(vars: &[Variable]) -> Result<usize> {
    vars.iter().try_fold(1usize, |acc, v| {
        if v.card() == 0 {
            return invalid(format!("variable `{}` has an empty alphabet", v.name));
        }
        acc.checked_mul(v.card()).filter(|&n| n <= 1 << 24).ok_or_else(|| Error::Resource("table too large".into()))
    })
}

/// Row-major odometer over the cartesian product of `cards`.
pub fn for_each_assignment(cards: &[usize], mut f: impl FnMut(&[usize])) {
    let mut a = vec![0usize; cards.len()];
    if cards.iter().any(|&c| c == 0) {
        return;
    }
    loop {
        f(&a);
        let mut k = cards.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            a[k] += 1;
            if a[k] < cards[k] {
                break;
            }
            a[k] = 0;
        }
    }
}

impl<W: Weight> Distribution<W> {
    /// Builds a distribution, checking shape, non-negativity and total mass.
    pub fn new(vars: Vec<Variable>, probs: Vec<W>) -> Result<Self> {
        let d = Self::unchecked(vars, probs)?;
        d.check_normalised()?;
        Ok(d)
    }

    pub(crate) fn unchecked(vars: Vec<Variable>, probs: Vec<W>) -> Result<Self> {
        let n = table_size(&vars)?;
        if probs.len() != n {
            return invalid(format!("expected {n} entries, got {}", probs.len()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|u| u.name == v.name) {
                return invalid(format!("duplicate variable `{}`", v.name));
            }
        }
        Ok(Distribution { vars, probs })
    }

    fn check_normalised(&self) -> Result<()> {
        if let Some(p) = self.probs.iter().find(|p| p.is_negative_weight()) {
            return invalid(format!("negative probability {}", p.render()));
        }
        let total = self.total()?;
        if !total.same(&W::one()) {
            return invalid(format!("probabilities sum to {}, not 1", total.render()));
        }
        Ok(())
    }

    pub fn from_fn(vars: Vec<Variable>, mut f: impl FnMut(&[usize]) -> W) -> Result<Self> {
        let cards: Vec<usize> = vars.iter().map(Variable::card).collect();
        table_size(&vars)?;
        let mut probs = Vec::new();
        for_each_assignment(&cards, |a| probs.push(f(a)));
        Self::new(vars, probs)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn probs(&self) -> &[W] {
        &self.probs
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(Variable::card).collect()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars.iter().position(|v| v.name == name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn total(&self) -> Result<W> {
        self.probs.iter().try_fold(W::zero(), |acc, p| acc.try_add(p))
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        self.vars.iter().zip(assignment).fold(0, |acc, (v, &a)| acc * v.card() + a)
    }

    pub fn get(&self, assignment: &[usize]) -> &W {
        &self.probs[self.index_of(assignment)]
    }

    /// Probability of a labelled full assignment, in scope order.
    pub fn prob_of(&self, labels: &[&str]) -> Result<W> {
        if labels.len() != self.vars.len() {
            return invalid("assignment does not cover the scope");
        }
        let a: Vec<usize> = self.vars.iter().zip(labels).map(|(v, l)| v.value(l)).collect::<Result<_>>()?;
        Ok(self.get(&a).clone())
    }

    /// Visits every entry together with its assignment.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], &W)) {
        let mut k = 0;
        for_each_assignment(&self.cards(), |a| {
            f(a, &self.probs[k]);
            k += 1;
        });
    }

    /// Marginal over the variables at `keep` (positions in this scope), in that order.
    pub fn marginal_idx(&self, keep: &[usize]) -> Result<Self> {
        let vars: Vec<Variable> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let n = table_size(&vars)?;
        let mut probs = vec![W::zero(); n];
        let mut err = None;
        self.for_each(|a, p| {
            if p.is_zero() || err.is_some() {
                return;
            }
            let idx = keep.iter().fold(0, |acc, &i| acc * self.vars[i].card() + a[i]);
            match probs[idx].try_add(p) {
                Ok(s) => probs[idx] = s,
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Self::unchecked(vars, probs)
    }

    pub fn marginal(&self, names: &[&str]) -> Result<Self> {
        let keep = self.positions(names)?;
        self.marginal_idx(&keep)
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let keep: Vec<usize> = names.iter().map(|n| self.var_index(n)).collect::<Result<_>>()?;
        for (i, k) in keep.iter().enumerate() {
            if keep[..i].contains(k) {
                return invalid(format!("variable `{}` listed twice", self.vars[*k].name));
            }
        }
        Ok(keep)
    }

    /// Probability of the event `vars[i] = v` for every `(i, v)` in `event`.
    pub fn event_prob(&self, event: &[(usize, usize)]) -> Result<W> {
        let mut total = W::zero();
        let mut err = None;
        self.for_each(|a, p| {
            if err.is_none() && event.iter().all(|&(i, v)| a[i] == v) {
                match total.try_add(p) {
                    Ok(s) => total = s,
                    Err(e) => err = Some(e),
                }
            }
        });
        err.map_or(Ok(total), Err)
    }

    fn labelled_event(&self, given: &[(&str, &str)]) -> Result<Vec<(usize, usize)>> {
        given
            .iter()
            .map(|(n, l)| {
                let i = self.var_index(n)?;
                Ok((i, self.vars[i].value(l)?))
            })
            .collect()
    }

    /// `P(targets | given)`, failing on a zero-probability condition.
    pub fn conditional(&self, targets: &[&str], given: &[(&str, &str)]) -> Result<Self> {
        let event = self.labelled_event(given)?;
        let keep = self.positions(targets)?;
        if keep.iter().any(|k| event.iter().any(|(i, _)| i == k)) {
            return invalid("target also appears in the condition");
        }
        self.conditional_idx(&keep, &event)
    }

    pub(crate) fn conditional_idx(&self, keep: &[usize], event: &[(usize, usize)]) -> Result<Self> {
        let norm = self.event_prob(event)?;
        if norm.is_zero() {
            let what: Vec<String> =
                event.iter().map(|&(i, v)| format!("{}={}", self.vars[i].name, self.vars[i].alphabet[v])).collect();
            return Err(Error::ZeroProbability(what.join(" ")));
        }
        let vars: Vec<Variable> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let mut probs = vec![W::zero(); table_size(&vars)?];
        let mut err = None;
        self.for_each(|a, p| {
            if err.is_none() && event.iter().all(|&(i, v)| a[i] == v) {
                let idx = keep.iter().fold(0, |acc, &i| acc * self.vars[i].card() + a[i]);
                match probs[idx].try_add(p) {
                    Ok(s) => probs[idx] = s,
                    Err(e) => err = Some(e),
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let probs = probs.into_iter().map(|p| p / norm.clone()).collect();
        Self::unchecked(vars, probs)
    }

    /// Whether `X ⫫ Y | Z` holds, checked as `P(xyz) P(z) = P(xz) P(yz)` for every assignment.
    pub fn cond_indep(&self, x: &[&str], y: &[&str], z: &[&str]) -> Result<bool> {
        let (xi, yi, zi) = (self.positions(x)?, self.positions(y)?, self.positions(z)?);
        let mut all = xi.clone();
        all.extend(&yi);
        all.extend(&zi);
        for (i, k) in all.iter().enumerate() {
            if all[..i].contains(k) {
                return invalid("independence sets must be disjoint");
            }
        }
        self.cond_indep_idx(&xi, &yi, &zi)
    }

    pub(crate) fn cond_indep_idx(&self, xi: &[usize], yi: &[usize], zi: &[usize]) -> Result<bool> {
        let (nx, ny) = (xi.len(), yi.len());
        let order: Vec<usize> = xi.iter().chain(yi).chain(zi).copied().collect();
        let xyz = self.marginal_idx(&order)?;
        let xz_keep: Vec<usize> = (0..nx).chain(nx + ny..order.len()).collect();
        let yz_keep: Vec<usize> = (nx..order.len()).collect();
        let z_keep: Vec<usize> = (nx + ny..order.len()).collect();
        let xz = xyz.marginal_idx(&xz_keep)?;
        let yz = xyz.marginal_idx(&yz_keep)?;
        let zm = xyz.marginal_idx(&z_keep)?;
        let mut ok = true;
        let mut err = None;
        xyz.for_each(|a, p| {
            if !ok || err.is_some() {
                return;
            }
            let pick = |keep: &[usize]| -> Vec<usize> { keep.iter().map(|&i| a[i]).collect() };
            let pz = zm.get(&pick(&z_keep));
            if pz.is_zero() {
                return;
            }
            let lhs = p.try_mul(pz);
            let rhs = xz.get(&pick(&xz_keep)).try_mul(yz.get(&pick(&yz_keep)));
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => ok = l.same(&r),
                (Err(e), _) | (_, Err(e)) => err = Some(e),
            }
        });
        err.map_or(Ok(ok), Err)
    }

    /// Entry-wise comparison with [`Weight::same`]; scopes must match exactly.
    pub fn same_as(&self, other: &Self) -> bool {
        self.vars == other.vars && self.probs.iter().zip(&other.probs).all(|(a, b)| a.same(b))
    }

    /// Adds an independent variable with law `law`.
    pub fn with_independent(&self, var: Variable, law: &[W]) -> Result<Self> {
        if law.len() != var.card() {
            return invalid(format!("law for `{}` has the wrong length", var.name));
        }
        let mut vars = self.vars.clone();
        vars.push(var);
        let mut probs = Vec::with_capacity(self.probs.len() * law.len());
        for p in &self.probs {
            for q in law {
                probs.push(p.try_mul(q)?);
            }
        }
        Self::new(vars, probs)
    }

    /// Adds a single-valued variable, which changes no probability.
    pub fn with_trivial(&self, name: &str) -> Result<Self> {
        self.with_independent(Variable::new(name, &["0"]), &[W::one()])
    }

    /// Reorders the scope to `names`, which must be a permutation of it.
    pub fn reorder(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.vars.len() {
            return invalid("reorder needs every variable exactly once");
        }
        self.marginal(names)
    }

    pub fn map<V: Weight>(&self, f: impl Fn(&W) -> V) -> Distribution<V> {
        Distribution { vars: self.vars.clone(), probs: self.probs.iter().map(f).collect() }
    }

    /// Whether every assignment of the named variables has positive probability.
    pub fn has_full_support(&self, names: &[&str]) -> Result<bool> {
        let m = self.marginal(names)?;
        Ok(m.probs.iter().all(|p| !p.is_zero()))
    }
}

impl Distribution<Prob> {
    pub fn uniform(vars: Vec<Variable>) -> Result<Self> {
        let n = table_size(&vars)?;
        Self::new(vars, vec![ratio(1, n as i128); n])
    }

    pub fn to_float(&self) -> Distribution<f64> {
        self.map(Weight::to_f64)
    }

    pub fn point(vars: Vec<Variable>, values: &[usize]) -> Result<Self> {
        let mut probs = vec![Prob::zero(); table_size(&vars)?];
        let d: Distribution<Prob> = Distribution { vars, probs: Vec::new() };
        probs[d.index_of(values)] = Prob::one();
        Self::new(d.vars, probs)
    }
}

impl Distribution<f64> {
    /// Replaces each entry by the closest rational with denominator at most
    /// `max_den`, if that rational is within [`FLOAT_TOL`] of every entry.
    pub fn snap(&self, max_den: i128) -> Option<Distribution<Prob>> {
        let probs: Option<Vec<Prob>> = self.probs.iter().map(|&p| snap_f64(p, max_den)).collect();
        Distribution::new(self.vars.clone(), probs?).ok()
    }
}

/// Best rational approximation with bounded denominator, via continued fractions.
pub fn snap_f64(x: f64, max_den: i128) -> Option<Prob> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= FLOAT_TOL * 1e-3 {
            break;
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    let q = Prob::new(h1, k1);
    ((Weight::to_f64(&q) - x).abs() <= FLOAT_TOL).then_some(q)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SeparationViolation {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

/// How many disjoint triples are sampled once exhaustive checking is off.
pub const DSEP_SAMPLES: usize = 4000;
/// Above this many observed nodes, separation triples are sampled.
pub const DSEP_EXHAUSTIVE_MAX: usize = 5;

/// Every separation `X ⊥ Y | Z` among observed nodes whose independence fails in `dist`.
///
/// `dist` must be over exactly the observed nodes of `graph`. Triples are
/// enumerated exhaustively for small graphs and sampled with a fixed seed
/// otherwise, so the result is deterministic either way.
pub fn dsep_property_holds<W: Weight>(graph: &CausalGraph, dist: &Distribution<W>) -> Result<Vec<SeparationViolation>> {
    let observed: Vec<usize> = graph.observed().iter().collect();
    if observed.len() != dist.vars().len() {
        return invalid("distribution scope differs from the observed nodes");
    }
    let pos: Vec<usize> = observed.iter().map(|&i| dist.var_index(graph.name(i))).collect::<Result<_>>()?;
    let n = observed.len();
    let mut triples: Vec<Vec<u8>> = Vec::new();
    if n <= DSEP_EXHAUSTIVE_MAX {
        let total = 4usize.pow(n as u32);
        for code in 0..total {
            triples.push((0..n).map(|k| ((code >> (2 * k)) & 3) as u8).collect());
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d5e9);
        for _ in 0..DSEP_SAMPLES {
            let roles: Vec<u8> = (0..n).map(|_| *[0u8, 1, 2, 3].choose(&mut rng).unwrap()).collect();
            triples.push(roles);
        }
    }
    let mut out = Vec::new();
    for roles in triples {
        // role 1 = X, 2 = Y, 3 = Z; keep X's first member before Y's to halve the work.
        let pick = |r: u8| -> Vec<usize> { (0..n).filter(|&k| roles[k] == r).collect() };
        let (xs, ys, zs) = (pick(1), pick(2), pick(3));
        if xs.is_empty() || ys.is_empty() || xs[0] > ys[0] {
            continue;
        }
        let set = |ks: &[usize]| -> NodeSet { ks.iter().map(|&k| observed[k]).collect() };
        if !graph.d_separated(set(&xs), set(&ys), set(&zs))? {
            continue;
        }
        let idx = |ks: &[usize]| -> Vec<usize> { ks.iter().map(|&k| pos[k]).collect() };
        if !dist.cond_indep_idx(&idx(&xs), &idx(&ys), &idx(&zs))? {
            let names = |ks: &[usize]| -> Vec<String> { ks.iter().map(|&k| graph.name(observed[k]).to_string()).collect() };
            out.push(SeparationViolation { x: names(&xs), y: names(&ys), z: names(&zs) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_table() -> Distribution {
        // uniform over B = X xor Z
        Distribution::from_fn(vec![Variable::binary("B"), Variable::binary("X"), Variable::binary("Z")], |a| {
            if a[0] == a[1] ^ a[2] {
                ratio(1, 4)
            } else {
                Prob::zero()
            }
        })
        .unwrap()
    }

    #[test]
    fn marginals_of_xor_table_are_uniform() {
        let d = xor_table();
        let bx = d.marginal(&["B", "X"]).unwrap();
        assert!(bx.probs().iter().all(|p| *p == ratio(1, 4)));
        let xz = d.marginal(&["X", "Z"]).unwrap();
        assert!(xz.probs().iter().all(|p| *p == ratio(1, 4)));
    }

    #[test]
    fn xor_table_independences() {
        let d = xor_table();
        assert!(d.cond_indep(&["B"], &["X"], &[]).unwrap());
        assert!(d.cond_indep(&["B"], &["Z"], &[]).unwrap());
        assert!(!d.cond_indep(&["B"], &["X", "Z"], &[]).unwrap());
        assert!(!d.cond_indep(&["B"], &["X"], &["Z"]).unwrap());
    }

    #[test]
    fn conditional_on_zero_event_fails() {
        let d = Distribution::point(vec![Variable::binary("X"), Variable::binary("Y")], &[0, 0]).unwrap();
        assert!(matches!(d.conditional(&["Y"], &[("X", "1")]), Err(Error::ZeroProbability(_))));
        let c = d.conditional(&["Y"], &[("X", "0")]).unwrap();
        assert_eq!(c.probs(), &[Prob::one(), Prob::zero()]);
    }

    #[test]
    fn unnormalised_tables_are_rejected() {
        let r = Distribution::new(vec![Variable::binary("X")], vec![ratio(1, 2), ratio(1, 3)]);
        assert!(r.is_err());
        let r = Distribution::new(vec![Variable::binary("X")], vec![ratio(3, 2), ratio(-1, 2)]);
        assert!(r.is_err());
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(parse_ratio("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_ratio("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_ratio("-1.5"), Some(ratio(-3, 2)));
        assert_eq!(parse_ratio("1"), Some(Prob::one()));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("x"), None);
        assert_eq!(render_ratio(&ratio(2, 4)), "1/2");
        assert_eq!(render_ratio(&ratio(4, 4)), "1");
    }

    #[test]
    fn snapping_recovers_simple_fractions() {
        assert_eq!(snap_f64(0.25 + 1e-12, 1 << 20), Some(ratio(1, 4)));
        assert_eq!(snap_f64(1.0 / 3.0, 1 << 20), Some(ratio(1, 3)));
        assert_eq!(snap_f64(0.0, 16), Some(Prob::zero()));
        assert_eq!(snap_f64(std::f64::consts::PI / 4.0, 16), None);
    }

    #[test]
    fn dsep_property_on_collider() {
        let g = CausalGraph::from_parts(&[("B", true), ("X", true), ("Z", true)], &[("X", "B"), ("Z", "B")]).unwrap();
        assert!(dsep_property_holds(&g, &xor_table()).unwrap().is_empty());
        // the same table against a graph claiming B is isolated
        let g = CausalGraph::from_parts(&[("B", true), ("X", true), ("Z", true)], &[("X", "Z")]).unwrap();
        let v = dsep_property_holds(&g, &xor_table()).unwrap();
        assert!(v.iter().any(|v| v.x == ["B"] && v.y == ["X", "Z"] && v.z.is_empty()));
    }
}
