//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any FAIL.

use std::time::{Duration, Instant};

use causaloop::affects::{signatures, AffectsEngine, Relation, DEFAULT_ENUM_CAP};
use causaloop::compat::{
    check_compat, check_bipartite_conditions, check_tripartite_conditions, model_compat, CompatVerdict,
};
use causaloop::error::Result;
use causaloop::model::CausalModel;
use causaloop::prob::{ratio, Prob};
use causaloop::scenarios::{
    classical_jamming_model, jamming_embedding, library, random_bell_models, run_scenario, scenario,
    standard_bipartite_embedding, JammingBranch,
};
use causaloop::signalling::{check_ns3, check_ns3p, is_jamming, verify_ns_affects_equivalence, BellRoles};
use causaloop::spacetime::falsifier::{find_counterexample, FalsifierConfig};
use causaloop::spacetime::minkowski::{
    apex_1p1, canonical_frame, contain_two_in_one, in_future, lorentz, slice_contained, spacelike, Point,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SWEEP: usize = 200;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let res = f();
    let took = start.elapsed();
    let (passed, detail) = match res {
        Ok(o) => (o.passed && took <= budget, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("{tag} [{id}] {name}: {detail} ({:.2}s, budget {}s)", took.as_secs_f64(), budget.as_secs());
    passed
}

fn jamming_table() -> Result<Outcome> {
    let m = classical_jamming_model(false)?;
    let d = m.observed_distribution()?;
    let roles = BellRoles::tripartite();
    let bxz = d.marginal(&["B", "X", "Z"])?;
    let mut table_ok = true;
    bxz.for_each(|v, p| {
        let want = if v[0] == v[1] ^ v[2] { ratio(1, 4) } else { Prob::from_integer(0) };
        table_ok &= *p == want;
    });
    let (ns3p, ns3, jam) = (check_ns3p(&d, &roles)?.holds, check_ns3(&d, &roles)?.holds, is_jamming(&d, &roles)?);
    outcome(table_ok && ns3p && !ns3 && jam, format!("table uniform over B=X^Z: {table_ok}, NS3'={ns3p}, NS3={ns3}, jamming={jam}"))
}

fn observed_common_cause_grid() -> Result<Outcome> {
    let observed = classical_jamming_model(true)?;
    let engine = AffectsEngine::new(&observed);
    let bl_x = Relation::named(observed.graph(), "BL", "X", "", "")?;
    let found = engine.holds(bl_x)? && engine.is_irreducible(bl_x)?;
    let verdicts = engine.enumerate(false, DEFAULT_ENUM_CAP)?;
    let base = jamming_embedding(1, JammingBranch::Inside)?;
    let mut incompatible = 0;
    let mut total = 0;
    for i in 0..21 {
        for j in 0..21 {
            // odd numerators keep L off every other node's location
            let l = Point::new(vec![ratio(2 * i - 21, 4)], ratio(2 * j - 21, 4));
            let e = base.clone().with("L", l)?;
            e.check_non_trivial(observed.graph(), &verdicts)?;
            total += 1;
            if check_compat(observed.graph(), &verdicts, &e)?.verdict == CompatVerdict::Incompatible {
                incompatible += 1;
            }
        }
    }
    let hidden = model_compat(&classical_jamming_model(false)?, &base)?.verdict;
    outcome(
        found && incompatible == total && hidden == CompatVerdict::Compatible,
        format!("BL affects X irreducible: {found}; incompatible at {incompatible}/{total} L placements; L hidden: {hidden:?}"),
    )
}

fn ns_sweep() -> Result<Outcome> {
    let mut rows = 0;
    let mut bad = 0;
    for (parties, seed) in [(2, 11), (3, 12)] {
        let roles = if parties == 2 { BellRoles::bipartite() } else { BellRoles::tripartite() };
        for m in random_bell_models(parties, SWEEP, seed)? {
            let r = verify_ns_affects_equivalence(&m, &roles)?;
            rows += r.rows.len();
            bad += r.disagreements();
        }
    }
    outcome(bad == 0, format!("{} models, {rows} clause comparisons, {bad} disagreements", 2 * SWEEP))
}

fn bell_compat_sweep() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut counts = [0usize; 2];
    let mut compatible = 0;
    let bip_e = standard_bipartite_embedding(1)?;
    for (k, m) in random_bell_models(2, SWEEP, 11)?.iter().enumerate() {
        let verdicts = AffectsEngine::new(m).enumerate(false, DEFAULT_ENUM_CAP)?;
        let c = check_bipartite_conditions(m, &BellRoles::bipartite(), &verdicts)?;
        let got = check_compat(m.graph(), &verdicts, &bip_e)?.verdict;
        compatible += usize::from(got == CompatVerdict::Compatible);
        if c.predict_compatible() != (got == CompatVerdict::Compatible) {
            bad.push(format!("bipartite #{k}"));
        }
        counts[0] += 1;
    }
    let tri = [
        jamming_embedding(1, JammingBranch::Inside)?,
        jamming_embedding(2, JammingBranch::Inside)?,
        jamming_embedding(2, JammingBranch::Outside)?,
    ];
    for (k, m) in random_bell_models(3, SWEEP, 12)?.iter().enumerate() {
        let verdicts = AffectsEngine::new(m).enumerate(false, DEFAULT_ENUM_CAP)?;
        let e = &tri[k % tri.len()];
        let c = check_tripartite_conditions(m, &BellRoles::tripartite(), e, &verdicts)?;
        let got = check_compat(m.graph(), &verdicts, e)?.verdict;
        compatible += usize::from(got == CompatVerdict::Compatible);
        if c.predict_compatible() != (got == CompatVerdict::Compatible) {
            bad.push(format!("tripartite #{k}"));
        }
        counts[1] += 1;
    }
    let mut fixtures = 0;
    let mut branch_prime = false;
    for s in library()? {
        let (Some(m), Some(e)) = (&s.model, &s.embedding) else { continue };
        let hidden = s.roles.common_cause.as_ref().is_none_or(|l| m.graph().id(l).is_ok_and(|i| !m.graph().is_observed(i)));
        if !hidden {
            continue;
        }
        let verdicts = AffectsEngine::new(m).enumerate(false, DEFAULT_ENUM_CAP)?;
        let got = check_compat(m.graph(), &verdicts, e)?.verdict == CompatVerdict::Compatible;
        let predicted = if s.roles.parties() == 2 {
            check_bipartite_conditions(m, &s.roles, &verdicts)?.predict_compatible()
        } else {
            let c = check_tripartite_conditions(m, &s.roles, e, &verdicts)?;
            branch_prime |= c.middle_contains_outer && c.condition2_prime && !c.condition2 && got;
            c.predict_compatible()
        };
        fixtures += 1;
        if predicted != got {
            bad.push(s.name.clone());
        }
    }
    outcome(
        bad.is_empty() && branch_prime,
        format!(
            "{} bipartite + {} tripartite models ({compatible} compatible) + {fixtures} fixtures; 2' branch exercised: {branch_prime}; disagreements: {bad:?}",
            counts[0], counts[1]
        ),
    )
}

fn counterexamples() -> Result<Outcome> {
    let names = ["xor-signalling", "affects-loop", "hidden-loop", "copy-setting", "copy-outcome"];
    let mut failed = Vec::new();
    for n in names {
        let r = run_scenario(&scenario(n)?);
        failed.extend(r.checks.iter().filter(|c| !c.passed).map(|c| format!("{n}: {} (got {})", c.expectation, c.actual)));
    }
    let rows = causaloop::scenarios::check_loop_claims(&library()?)?;
    failed.extend(rows.iter().filter(|r| !r.passed).map(|r| r.claim.clone()));
    outcome(failed.is_empty(), format!("{} fixtures, {} loop claims; failures: {failed:?}", names.len(), rows.len()))
}

fn q(n: i128, d: i128) -> Prob {
    ratio(n, d)
}

fn rand_point(rng: &mut ChaCha8Rng, dim: usize, span: i128, den: i128) -> Point {
    Point::new((0..dim).map(|_| q(rng.gen_range(-span..=span), den)).collect(), q(rng.gen_range(-span..=span), den))
}

fn geometry() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut notes = Vec::new();

    // apex: closed form plus a grid oracle
    let mut apex_bad = 0;
    for _ in 0..1000 {
        let (a, c) = (rand_point(&mut rng, 1, 16, 4), rand_point(&mut rng, 1, 16, 4));
        let p = apex_1p1(&a, &c)?;
        let ok = if in_future(&a, &c) {
            p == c
        } else if in_future(&c, &a) {
            p == a
        } else {
            let (l, r) = if a.x[0] < c.x[0] { (&a, &c) } else { (&c, &a) };
            let two = q(2, 1);
            let x = (&r.x[0] + &l.x[0] + &r.t - &l.t) / &two;
            let t = (&r.x[0] - &l.x[0] + &r.t + &l.t) / &two;
            let closed = p == Point::new(vec![x], t);
            // every grid point in both cones lies in the apex cone, and the apex is in both
            let mut grid = in_future(&a, &p) && in_future(&c, &p);
            for gx in -40..=40 {
                for gt in -40..=40 {
                    let g = Point::new(vec![q(gx, 2)], q(gt, 2));
                    if in_future(&a, &g) && in_future(&c, &g) && !in_future(&p, &g) {
                        grid = false;
                    }
                }
            }
            closed && grid
        };
        apex_bad += usize::from(!ok);
    }
    notes.push(format!("apex disagreements {apex_bad}/1000"));

    // two-in-one containment against the falsifier, away from the boundary
    let cfg = FalsifierConfig::default();
    let (mut tested, mut contain_bad, mut positives) = (0, 0, 0);
    while tested < 1000 {
        let (a, c, b) = (rand_point(&mut rng, 2, 24, 4), rand_point(&mut rng, 2, 24, 4), rand_point(&mut rng, 2, 24, 4));
        if !spacelike(&a, &c) {
            continue;
        }
        let k = canonical_frame(&a, &c, &b)?;
        let margin = if k.x_b.abs() <= k.a {
            (k.t_b + k.y_b).abs().min(k.a - k.x_b.abs())
        } else {
            let reach = |x: f64| (((x - k.x_b).powi(2) + k.y_b * k.y_b).sqrt() + k.t_b).abs();
            reach(-k.a).min(reach(k.a)).min(k.x_b.abs() - k.a)
        };
        if margin < 1e-6 {
            continue;
        }
        tested += 1;
        let exact = contain_two_in_one(&a, &c, &b)?;
        positives += usize::from(exact);
        let refuted = find_counterexample(&[a, c], &b, &cfg).is_some();
        contain_bad += usize::from(exact == refuted);
    }
    notes.push(format!("2+1D containment disagreements {contain_bad}/1000 ({positives} contained)"));

    // the slice verdict flips at t = 5a/4 for a = 1, t_B = 1/2
    let (a, c, b) = (Point::new(vec![q(-1, 1), q(0, 1)], q(0, 1)), Point::new(vec![q(1, 1), q(0, 1)], q(0, 1)), Point::new(vec![q(0, 1), q(0, 1)], q(1, 2)));
    let eps = q(1, 1_000_000_000);
    let flip = slice_contained(&a, &c, &b, &q(6, 5))?
        && slice_contained(&a, &c, &b, &(q(5, 4) - &eps))?
        && slice_contained(&a, &c, &b, &q(5, 4))?
        && !slice_contained(&a, &c, &b, &(q(5, 4) + q(1, 1_000_000)))?
        && !slice_contained(&a, &c, &b, &q(3, 2))?
        && !contain_two_in_one(&a, &c, &b)?;
    notes.push(format!("slice flip at 5a/4: {flip}"));

    // invariance under exact boosts and rotations
    let mut lorentz_bad = 0;
    let mut lorentz_n = 0;
    while lorentz_n < 200 {
        let (a, c, b) = (rand_point(&mut rng, 2, 12, 2), rand_point(&mut rng, 2, 12, 2), rand_point(&mut rng, 2, 12, 2));
        if a == c {
            continue;
        }
        lorentz_n += 1;
        let k = q(rng.gen_range(-7..=7), 8);
        let m = q(rng.gen_range(-9..=9), 4);
        let axis = rng.gen_range(0..2);
        let tr = |p: &Point| lorentz(p, axis, &k, &m);
        lorentz_bad += usize::from(contain_two_in_one(&a, &c, &b)? != contain_two_in_one(&tr(&a), &tr(&c), &tr(&b))?);
    }
    notes.push(format!("Lorentz disagreements {lorentz_bad}/200"));
    outcome(apex_bad == 0 && contain_bad == 0 && flip && lorentz_bad == 0 && positives > 0, notes.join("; "))
}

fn combinatorics() -> Result<Outcome> {
    let nodes = [0, 1, 2, 3];
    let (u, c) = (signatures(&nodes, false).len(), signatures(&nodes, true).len());
    // role assignments with non-empty X and Y, by inclusion-exclusion
    let ie = |roles: u32| roles.pow(4) - 2 * (roles - 1).pow(4) + (roles - 2).pow(4);
    let (eu, ec) = (ie(4) as usize, ie(5) as usize);
    outcome(u == eu && c == ec && eu == 110 && ec == 194, format!("unconditional {u} (oracle {eu}), conditional {c} (oracle {ec})"))
}

fn cyclic_semantics() -> Result<Outcome> {
    let mut failed = Vec::new();
    for n in ["hidden-loop", "affects-loop"] {
        let r = run_scenario(&scenario(n)?);
        failed.extend(r.checks.iter().filter(|c| !c.passed).map(|c| format!("{n}: {}", c.expectation)));
    }
    let hl: CausalModel = causaloop::scenarios::hidden_loop_model(false)?;
    let indep = hl.observed_distribution()?.cond_indep(&["X"], &["Y"], &[])?;
    outcome(failed.is_empty() && indep, format!("X indep Y in hidden loop: {indep}; failures: {failed:?}"))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "jamming reproduction", secs(1), jamming_table),
        run(2, "observed common cause is incompatible on the grid", secs(30), observed_common_cause_grid),
        run(3, "NS clauses match affects relations", secs(120), ns_sweep),
        run(4, "outcome conditions match compatibility", secs(120), bell_compat_sweep),
        run(5, "counterexample suite", secs(30), counterexamples),
        run(6, "geometry", secs(120), geometry),
        run(7, "relation signatures on 4 nodes", secs(1), combinatorics),
        run(8, "cyclic semantics", secs(5), cyclic_semantics),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
