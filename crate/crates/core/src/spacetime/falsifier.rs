//! Search for a point of `⋂ F̄(left)` outside `F̄(right)`.
//!
//! At a time `t` every left cone slices to a ball of radius `r_i = t - t_i`.
//! The point of the intersection farthest from the right centre lies on the
//! boundary of some ball, so candidates are points `c_i + r_i u` with `u` a
//! unit vector. Membership of such a point in another cone `o` is tested with
//!
//! `h = (|Δc|² - Δt²) / (2 r_i) + u·Δc - Δt ≤ 0`, `Δc = c_i - c_o`, `Δt = t_i - t_o`,
//!
//! which is roughly the signed distance to the slice of `o` and stays
//! well-conditioned for very large `t`.
//!
//! A returned point is a genuine counterexample up to [`HIT_TOL`]; finding
//! nothing proves nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::minkowski::Point;

/// Margin by which a candidate must lie outside the right cone.
pub const HIT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FalsifierConfig {
    /// Boundary directions sampled per cone.
    pub directions: usize,
    /// Number of slice times.
    pub times: usize,
    pub min_offset: f64,
    pub max_offset: f64,
    pub seed: u64,
}

impl Default for FalsifierConfig {
    fn default() -> Self {
        FalsifierConfig { directions: 400, times: 40, min_offset: 1e-3, max_offset: 1e12, seed: 7 }
    }
}

struct Cone {
    c: Vec<f64>,
    t: f64,
}

impl Cone {
    fn of(p: &Point) -> Self {
        let (c, t) = p.to_f64();
        Cone { c, t }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = norm(&v);
    (n > 1e-300).then(|| v.into_iter().map(|x| x / n).collect())
}

/// `h` for the point `c_i + r_i u` against cone `o`.
fn h(i: &Cone, r: f64, u: &[f64], o: &Cone) -> f64 {
    let dc = diff(&i.c, &o.c);
    let dt = i.t - o.t;
    (dot(&dc, &dc) - dt * dt) / (2.0 * r) + dot(u, &dc) - dt
}

fn sample_directions(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let s = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![s * a.cos(), s * a.sin(), z]
                })
                .collect()
        }
        _ => (0..n)
            .filter_map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                unit(v)
            })
            .collect(),
    }
}

/// Slice times: log-spaced offsets above the latest left event.
fn times(left: &[Cone], right: &Cone, cfg: &FalsifierConfig) -> Vec<f64> {
    let t0 = left.iter().map(|c| c.t).fold(f64::NEG_INFINITY, f64::max);
    let n = cfg.times.max(2);
    let (lo, hi) = (cfg.min_offset.ln(), cfg.max_offset.ln());
    let mut ts: Vec<f64> = (0..n).map(|k| t0 + (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()).collect();
    if right.t > t0 {
        ts.push((t0 + right.t) / 2.0);
    }
    ts
}

/// A point `(x; t)` in every left cone but not in the right one.
pub fn find_counterexample(left: &[Point], right: &Point, cfg: &FalsifierConfig) -> Option<(Vec<f64>, f64)> {
    if left.is_empty() {
        return None;
    }
    let d = right.dim();
    let cones: Vec<Cone> = left.iter().map(Cone::of).collect();
    let r = Cone::of(right);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = sample_directions(d, cfg.directions, &mut rng);

    for t in times(&cones, &r, cfg) {
        for (i, ci) in cones.iter().enumerate() {
            let ri = t - ci.t;
            if ri <= 0.0 {
                continue;
            }
            let feasible = |u: &[f64]| cones.iter().enumerate().all(|(k, o)| k == i || h(ci, ri, u, o) <= FEAS_TOL);
            let outside = |u: &[f64]| if t < r.t { true } else { h(ci, ri, u, &r) > HIT_TOL };
            let mut cands: Vec<Vec<f64>> = Vec::new();
            // farthest point of sphere i from the right centre
            let away = unit(diff(&ci.c, &r.c)).unwrap_or_else(|| {
                let mut e = vec![0.0; d];
                e[0] = 1.0;
                e
            });
            cands.push(away.clone());
            // farthest point of each rim `sphere i ∩ sphere j`
            for (j, cj) in cones.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dc = diff(&ci.c, &cj.c);
                let len = norm(&dc);
                if len <= 1e-300 {
                    continue;
                }
                let dt = ci.t - cj.t;
                // rim: u·dc = dt - (|dc|² - dt²) / (2 ri)
                let s = (dt - (len * len - dt * dt) / (2.0 * ri)) / len;
                if s.abs() > 1.0 {
                    continue;
                }
                let n: Vec<f64> = dc.iter().map(|v| v / len).collect();
                let along = dot(&away, &n);
                let perp = diff(&away, &n.iter().map(|v| v * along).collect::<Vec<_>>());
                let w = unit(perp).unwrap_or_else(|| orthogonal(&n));
                let c = (1.0 - s * s).max(0.0).sqrt();
                cands.push(n.iter().zip(&w).map(|(a, b)| s * a + c * b).collect());
            }
            cands.extend(samples.iter().cloned());
            for u in &cands {
                if feasible(u) && outside(u) {
                    let x = ci.c.iter().zip(u).map(|(c, v)| c + ri * v).collect();
                    return Some((x, t));
                }
            }
        }
    }
    None
}

fn orthogonal(n: &[f64]) -> Vec<f64> {
    let k = (0..n.len()).min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs())).unwrap_or(0);
    let mut e = vec![0.0; n.len()];
    e[k] = 1.0;
    let along = dot(&e, n);
    unit(diff(&e, &n.iter().map(|v| v * along).collect::<Vec<_>>())).unwrap_or(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[i128]) -> Point {
        Point::frac(c, 4)
    }

    #[test]
    fn finds_off_axis_violation() {
        let (a, c, b) = (pt(&[-4, 0, 0]), pt(&[4, 0, 0]), pt(&[0, 0, 2]));
        let hit = find_counterexample(&[a, c], &b, &FalsifierConfig::default());
        assert!(hit.is_some());
    }

    #[test]
    fn nothing_when_contained() {
        let (a, c, b) = (pt(&[-4, 0, 0]), pt(&[4, 0, 0]), pt(&[0, 2, -3]));
        assert!(find_counterexample(&[a, c], &b, &FalsifierConfig::default()).is_none());
    }

    #[test]
    fn late_right_cone_is_violated() {
        let (a, b) = (pt(&[0, 0, 0]), pt(&[0, 0, 4]));
        assert!(find_counterexample(&[a], &b, &FalsifierConfig::default()).is_some());
    }
}
