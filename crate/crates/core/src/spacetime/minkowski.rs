//! Closed future light cones in (d+1)-dimensional Minkowski space.
//!
//! Two-cone containment is decided exactly. Let `M` be the midpoint of
//! spacelike-separated `A` and `C`, and `D = C - A`. Let `P` be the Minkowski
//! projection of `B` onto the line through `A` and `C`, with parameter
//! `s = 2 η(B - M, D) / η(D, D)`. In the frame where `A, C = (∓a, 0, ...)`, this
//! gives `s = x_B / a` and `P = (x_B, 0, ..., 0; 0)`. So "t_B ≤ -|y_B|" reads
//! `P ∈ F̄(B)`, and the outer case reads `A ∈ F̄(B) or C ∈ F̄(B)`. Neither
//! needs a boost, so rational input stays exact.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::prob::{Prob, Weight};

pub type Q = Prob;

/// A point `(x_1, ..., x_d; t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Vec<Q>,
    pub t: Q,
}

impl Point {
    pub fn new(x: Vec<Q>, t: Q) -> Self {
        Point { x, t }
    }

    /// From integer-over-`den` coordinates, time last.
    pub fn frac(coords: &[i128], den: i128) -> Self {
        let (t, x) = coords.split_last().expect("at least a time coordinate");
        Point { x: x.iter().map(|&c| Q::new(c, den)).collect(), t: Q::new(*t, den) }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn to_f64(&self) -> (Vec<f64>, f64) {
        (self.x.iter().map(Weight::to_f64).collect(), self.t.to_f64())
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self.x.iter().map(Weight::render).collect();
        parts.push(self.t.render());
        format!("({})", parts.join(","))
    }
}

fn sub(p: &Point, q: &Point) -> (Vec<Q>, Q) {
    (p.x.iter().zip(&q.x).map(|(a, b)| a - b).collect(), &p.t - &q.t)
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Minkowski form with signature (+, ..., +, -): spacelike vectors are positive.
fn eta(a: &(Vec<Q>, Q), b: &(Vec<Q>, Q)) -> Q {
    dot(&a.0, &b.0) - &a.1 * &b.1
}

/// `q ∈ F̄(p)`: `t_q ≥ t_p` and `|x_q - x_p|² ≤ (t_q - t_p)²`.
pub fn in_future(p: &Point, q: &Point) -> bool {
    let (dx, dt) = sub(q, p);
    !dt.is_negative() && dot(&dx, &dx) <= &dt * &dt
}

pub fn spacelike(p: &Point, q: &Point) -> bool {
    !in_future(p, q) && !in_future(q, p)
}

/// The event whose future cone is `F̄(a) ∩ F̄(c)` in 1+1D.
pub fn apex_1p1(a: &Point, c: &Point) -> Result<Point> {
    if a.dim() != 1 || c.dim() != 1 {
        return invalid("apex_1p1 needs 1+1D events");
    }
    if in_future(a, c) {
        return Ok(c.clone());
    }
    if in_future(c, a) {
        return Ok(a.clone());
    }
    let (a, c) = if a.x[0] < c.x[0] { (a, c) } else { (c, a) };
    let two = Q::from_integer(2);
    let x = (&c.x[0] + &a.x[0] + &c.t - &a.t) / &two;
    let t = (&c.x[0] - &a.x[0] + &c.t + &a.t) / &two;
    Ok(Point { x: vec![x], t })
}

/// Whether `F̄(a) ∩ F̄(c) ⊆ F̄(b)`.
pub fn contain_two_in_one(a: &Point, c: &Point, b: &Point) -> Result<bool> {
    let d = a.dim();
    if c.dim() != d || b.dim() != d || d == 0 {
        return invalid("events must share a spatial dimension of at least 1");
    }
    // nested cones reduce to the later one
    if in_future(a, c) {
        return Ok(in_future(b, c));
    }
    if in_future(c, a) {
        return Ok(in_future(b, a));
    }
    if d == 1 {
        return Ok(in_future(b, &apex_1p1(a, c)?));
    }
    let half = Q::new(1, 2);
    let m = Point { x: a.x.iter().zip(&c.x).map(|(p, q)| (p + q) * &half).collect(), t: (&a.t + &c.t) * &half };
    let dv = sub(c, a);
    let bm = sub(b, &m);
    let s = Q::from_integer(2) * eta(&bm, &dv) / eta(&dv, &dv);
    if s.abs() <= Q::one() {
        let k = &s * &half;
        let p = Point { x: m.x.iter().zip(&dv.0).map(|(mi, di)| mi + &k * di).collect(), t: &m.t + &k * &dv.1 };
        Ok(in_future(b, &p))
    } else {
        Ok(in_future(b, a) || in_future(b, c))
    }
}

/// `B` in the frame where `A, C = (∓a, 0, ...; 0)` and `B = (x_B, y_B ≥ 0, 0, ...; t_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTriple {
    pub a: f64,
    pub x_b: f64,
    pub y_b: f64,
    pub t_b: f64,
}

/// Float canonical-frame reduction: boost along the spatial separation of `A`
/// and `C` until they are simultaneous, move their midpoint to the origin and
/// rotate `C` onto the positive x axis.
pub fn canonical_frame(a: &Point, c: &Point, b: &Point) -> Result<CanonicalTriple> {
    if !spacelike(a, c) {
        return invalid("canonical frame needs spacelike-separated A and C");
    }
    let (xa, ta) = a.to_f64();
    let (xc, tc) = c.to_f64();
    let (xb, tb) = b.to_f64();
    let dx: Vec<f64> = xc.iter().zip(&xa).map(|(p, q)| p - q).collect();
    let len = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n: Vec<f64> = dx.iter().map(|v| v / len).collect();
    let beta = (tc - ta) / len;
    let gamma = 1.0 / (1.0 - beta * beta).sqrt();
    let mid: Vec<f64> = xa.iter().zip(&xc).map(|(p, q)| (p + q) / 2.0).collect();
    let mt = (ta + tc) / 2.0;
    let rel: Vec<f64> = xb.iter().zip(&mid).map(|(p, q)| p - q).collect();
    let rt = tb - mt;
    let par: f64 = rel.iter().zip(&n).map(|(p, q)| p * q).sum();
    let perp2: f64 = rel.iter().map(|v| v * v).sum::<f64>() - par * par;
    Ok(CanonicalTriple {
        a: len / (2.0 * gamma),
        x_b: gamma * (par - beta * rt),
        y_b: perp2.max(0.0).sqrt(),
        t_b: gamma * (rt - beta * par),
    })
}

pub const GEOM_TOL: f64 = 1e-9;

/// Two-cone containment read off the canonical coordinates (d ≥ 2), with tolerance.
pub fn canonical_contained(k: &CanonicalTriple) -> bool {
    if k.x_b.abs() <= k.a {
        k.t_b <= -k.y_b + GEOM_TOL
    } else {
        let reach = |x: f64| ((x - k.x_b).powi(2) + k.y_b * k.y_b).sqrt() + k.t_b <= GEOM_TOL;
        reach(-k.a) || reach(k.a)
    }
}

/// Whether the time-`t` slice of `F̄(a) ∩ F̄(c)` lies in the slice of `F̄(b)`.
/// Exact in 1+1D; in higher dimensions the farthest point of the lens from
/// `x_B` is found in closed form and compared within [`GEOM_TOL`].
pub fn slice_contained(a: &Point, c: &Point, b: &Point, t: &Q) -> Result<bool> {
    let d = a.dim();
    if c.dim() != d || b.dim() != d || d == 0 {
        return invalid("events must share a spatial dimension of at least 1");
    }
    let (ra, rc, rb) = (t - &a.t, t - &c.t, t - &b.t);
    if ra.is_negative() || rc.is_negative() {
        return Ok(true);
    }
    if d == 1 {
        let lo = (&a.x[0] - &ra).max(&c.x[0] - &rc);
        let hi = (&a.x[0] + &ra).min(&c.x[0] + &rc);
        if lo > hi {
            return Ok(true);
        }
        return Ok(!rb.is_negative() && &b.x[0] - &rb <= lo && hi <= &b.x[0] + &rb);
    }
    let (ca, _) = a.to_f64();
    let (cc, _) = c.to_f64();
    let (cb, _) = b.to_f64();
    let (ra, rc, rb) = (ra.to_f64(), rc.to_f64(), rb.to_f64());
    match lens_max_distance(&ca, ra, &cc, rc, &cb) {
        None => Ok(true),
        Some(m) => Ok(rb >= -GEOM_TOL && m <= rb + GEOM_TOL),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Largest distance from `p` to a point of `ball(ca, ra) ∩ ball(cc, rc)`, or `None` if empty.
fn lens_max_distance(ca: &[f64], ra: f64, cc: &[f64], rc: f64, p: &[f64]) -> Option<f64> {
    let d = norm(&diff(cc, ca));
    if d > ra + rc + GEOM_TOL {
        return None;
    }
    if d <= (ra - rc).abs() {
        let (cs, rs) = if ra <= rc { (ca, ra) } else { (cc, rc) };
        return Some(norm(&diff(cs, p)) + rs);
    }
    let mut best: f64 = 0.0;
    // unconstrained maximum of each sphere, if it lies in the other ball
    for (c1, r1, c2, r2) in [(ca, ra, cc, rc), (cc, rc, ca, ra)] {
        let away = diff(c1, p);
        let l = norm(&away);
        let far: Vec<f64> = if l == 0.0 {
            // every point of the sphere is equally far; pick the direction toward the other ball
            let dir = diff(c2, c1);
            let dl = norm(&dir);
            c1.iter().zip(&dir).map(|(x, u)| x + r1 * u / dl).collect()
        } else {
            c1.iter().zip(&away).map(|(x, u)| x + r1 * u / l).collect()
        };
        if norm(&diff(&far, c2)) <= r2 + GEOM_TOL {
            best = best.max(norm(&diff(&far, p)));
        }
    }
    // the rim where the two spheres meet
    let n: Vec<f64> = diff(cc, ca).iter().map(|v| v / d).collect();
    let h = (d * d + ra * ra - rc * rc) / (2.0 * d);
    let rho = (ra * ra - h * h).max(0.0).sqrt();
    let m: Vec<f64> = ca.iter().zip(&n).map(|(x, u)| x + h * u).collect();
    let v = diff(p, &m);
    let alpha: f64 = v.iter().zip(&n).map(|(x, u)| x * u).sum();
    let w = (v.iter().map(|x| x * x).sum::<f64>() - alpha * alpha).max(0.0).sqrt();
    best = best.max((alpha * alpha + (w + rho).powi(2)).sqrt());
    Some(best)
}

/// An exact Lorentz transformation: a boost along axis `axis` with velocity
/// `2k / (1 + k²)`, followed by a rotation in the (0, 1) spatial plane with
/// angle parameter `m` (cos = (1 - m²)/(1 + m²)). Needs `|k| < 1`.
pub fn lorentz(p: &Point, axis: usize, k: &Q, m: &Q) -> Point {
    let one = Q::one();
    let k2 = k * k;
    let gamma = (&one + &k2) / (&one - &k2);
    let gb = (Q::from_integer(2) * k) / (&one - &k2);
    let mut x = p.x.clone();
    let t = &gamma * &p.t - &gb * &x[axis];
    x[axis] = &gamma * &x[axis] - &gb * &p.t;
    if x.len() >= 2 {
        let m2 = m * m;
        let cos = (&one - &m2) / (&one + &m2);
        let sin = (Q::from_integer(2) * m) / (&one + &m2);
        let (u, v) = (x[0].clone(), x[1].clone());
        x[0] = &cos * &u - &sin * &v;
        x[1] = &sin * &u + &cos * &v;
    }
    Point { x, t }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::frac(&c.iter().map(|v| (v * 8.0).round() as i128).collect::<Vec<_>>(), 8)
    }

    #[test]
    fn cone_membership() {
        let o = pt(&[0.0, 0.0]);
        assert!(in_future(&o, &pt(&[0.0, 1.0])));
        assert!(in_future(&o, &pt(&[1.0, 1.0])));
        assert!(spacelike(&o, &pt(&[2.0, 1.0])));
    }

    #[test]
    fn apex_examples() {
        assert_eq!(apex_1p1(&pt(&[-1.0, 0.0]), &pt(&[1.0, 0.0])).unwrap(), pt(&[0.0, 1.0]));
        assert_eq!(apex_1p1(&pt(&[0.0, 0.0]), &pt(&[4.0, 2.0])).unwrap(), pt(&[3.0, 3.0]));
        assert_eq!(apex_1p1(&pt(&[0.0, 0.0]), &pt(&[0.5, 2.0])).unwrap(), pt(&[0.5, 2.0]));
    }

    #[test]
    fn canonical_two_cone_examples() {
        let (a, c) = (pt(&[-1.0, 0.0, 0.0]), pt(&[1.0, 0.0, 0.0]));
        assert!(contain_two_in_one(&a, &c, &pt(&[0.0, 0.5, -0.5])).unwrap());
        assert!(!contain_two_in_one(&a, &c, &pt(&[0.0, 0.5, 0.0])).unwrap());
        assert!(contain_two_in_one(&a, &c, &pt(&[-2.0, 0.0, -1.0])).unwrap());
        assert!(!contain_two_in_one(&a, &c, &pt(&[0.0, 0.0, 0.5])).unwrap());
        // collinear B below the midpoint
        assert!(contain_two_in_one(&a, &c, &pt(&[0.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn one_plus_one_containment() {
        let (a, c) = (pt(&[-1.0, 0.0]), pt(&[1.0, 0.0]));
        assert!(contain_two_in_one(&a, &c, &pt(&[0.0, -0.5])).unwrap());
        assert!(contain_two_in_one(&a, &c, &pt(&[0.0, 0.5])).unwrap());
        assert!(!contain_two_in_one(&a, &c, &pt(&[0.5, 0.75])).unwrap());
    }

    #[test]
    fn slice_verdict_flips() {
        let (a, c, b) = (pt(&[-1.0, 0.0, 0.0]), pt(&[1.0, 0.0, 0.0]), pt(&[0.0, 0.0, 0.5]));
        assert!(slice_contained(&a, &c, &b, &Q::new(6, 5)).unwrap());
        assert!(slice_contained(&a, &c, &b, &Q::new(5, 4)).unwrap());
        assert!(!slice_contained(&a, &c, &b, &Q::new(3, 2)).unwrap());
        assert!(slice_contained(&a, &c, &b, &Q::new(1, 2)).unwrap());
    }

    #[test]
    fn canonical_frame_of_boosted_pair() {
        let (a, c, b) = (pt(&[-1.0, 0.0, 0.0]), pt(&[1.0, 0.0, 0.0]), pt(&[0.25, 0.5, -0.75]));
        let (k, m) = (Q::new(1, 3), Q::new(1, 2));
        let (a2, c2, b2) = (lorentz(&a, 0, &k, &m), lorentz(&c, 0, &k, &m), lorentz(&b, 0, &k, &m));
        let f = canonical_frame(&a2, &c2, &b2).unwrap();
        assert!((f.a - 1.0).abs() < 1e-12);
        assert!((f.x_b - 0.25).abs() < 1e-12);
        assert!((f.y_b - 0.5).abs() < 1e-12);
        assert!((f.t_b + 0.75).abs() < 1e-12);
    }

    #[test]
    fn lorentz_preserves_interval() {
        let (p, q) = (pt(&[0.5, -1.0, 2.0]), pt(&[-3.0, 0.25, 0.125]));
        let (k, m) = (Q::new(2, 7), Q::new(-3, 5));
        let (p2, q2) = (lorentz(&p, 1, &k, &m), lorentz(&q, 1, &k, &m));
        let i1 = eta(&sub(&p, &q), &sub(&p, &q));
        let i2 = eta(&sub(&p2, &q2), &sub(&p2, &q2));
        assert_eq!(i1, i2);
    }
}
