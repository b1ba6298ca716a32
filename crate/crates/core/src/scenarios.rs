//! Fixture library: Bell-scenario models, embeddings, jamming distributions and
//! the loop counterexamples, each with machine-checked expectations.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affects::{AffectsEngine, Relation, Verdict, DEFAULT_ENUM_CAP};
use crate::compat::{
    certify_acl, certify_hcl, check_compat, check_jamming_configuration, check_standard_configuration,
    check_bipartite_conditions, check_tripartite_conditions, CompatVerdict,
};
use crate::error::{invalid, Error, Result};
use crate::model::{CausalModel, ModelBuilder, SolutionMode};
use crate::prob::{ratio, Distribution, Prob, Variable, Weight};
use crate::signalling::{check_ns2, check_ns3, check_ns3p, is_jamming, BellRoles};
use crate::spacetime::{Embedding, Point};

fn pt(coords: &[i128], den: i128) -> Point {
    Point::frac(coords, den)
}

fn embed(dim: usize, places: &[(&str, Point)]) -> Result<Embedding> {
    let mut e = Embedding::minkowski(dim)?;
    for (n, p) in places {
        e.place_at(n, p.clone())?;
    }
    Ok(e)
}

/// A=(-2,0), X=(-2,1), B=(2,0), Y=(2,1), spatial coordinates first; extra
/// spatial dimensions are zero.
pub fn standard_bipartite_embedding(dim: usize) -> Result<Embedding> {
    let at = |x: i128, t: i128| {
        let mut c = vec![0; dim + 1];
        c[0] = x;
        c[dim] = t;
        pt(&c, 1)
    };
    standard_embedding_at(dim, &BellRoles::bipartite(), &[("A", at(-2, 0)), ("X", at(-2, 1)), ("B", at(2, 0)), ("Y", at(2, 1))])
}

/// Three parties at x = -4, 0, 4 with each outcome one unit after its setting.
pub fn standard_tripartite_embedding(dim: usize) -> Result<Embedding> {
    let at = |x: i128, t: i128| {
        let mut c = vec![0; dim + 1];
        c[0] = x;
        c[dim] = t;
        pt(&c, 1)
    };
    standard_embedding_at(
        dim,
        &BellRoles::tripartite(),
        &[("A", at(-4, 0)), ("X", at(-4, 1)), ("B", at(0, 0)), ("Y", at(0, 1)), ("C", at(4, 0)), ("Z", at(4, 1))],
    )
}

/// Builds and validates a standard configuration from explicit locations.
pub fn standard_embedding_at(dim: usize, roles: &BellRoles, places: &[(&str, Point)]) -> Result<Embedding> {
    let e = embed(dim, places)?;
    check_standard_configuration(&e, roles)?;
    Ok(e)
}

/// Which side of `F̄(Y)` the joint future of the outer outcomes falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JammingBranch {
    /// `F̄(X) ∩ F̄(Z) ⊆ F̄(Y)`.
    Inside,
    Outside,
}

/// A jamming configuration. 1+1D only admits [`JammingBranch::Inside`].
pub fn jamming_embedding(dim: usize, branch: JammingBranch) -> Result<Embedding> {
    let places: Vec<(&str, Point)> = match (dim, branch) {
        (1, JammingBranch::Inside) => vec![
            ("A", pt(&[-8, -4], 4)),
            ("X", pt(&[-8, 0], 4)),
            ("B", pt(&[0, -2], 4)),
            ("Y", pt(&[0, 1], 4)),
            ("C", pt(&[8, -4], 4)),
            ("Z", pt(&[8, 0], 4)),
        ],
        (1, JammingBranch::Outside) => {
            return Err(Error::Configuration("in 1+1D the outer joint future always lies in the middle outcome's future".into()))
        }
        (2, b) => vec![
            ("A", pt(&[-8, 0, -4], 4)),
            ("X", pt(&[-8, 0, 0], 4)),
            ("B", pt(&[0, 0, -4], 4)),
            ("Y", if b == JammingBranch::Inside { pt(&[0, 0, -3], 4) } else { pt(&[0, 2, 0], 4) }),
            ("C", pt(&[8, 0, -4], 4)),
            ("Z", pt(&[8, 0, 0], 4)),
        ],
        _ => return invalid("jamming embeddings are provided for 1+1D and 2+1D"),
    };
    jamming_embedding_at(dim, &places, Some(branch))
}

/// Builds and validates a jamming configuration, optionally requiring a branch.
pub fn jamming_embedding_at(dim: usize, places: &[(&str, Point)], branch: Option<JammingBranch>) -> Result<Embedding> {
    let e = embed(dim, places)?;
    let inside = check_jamming_configuration(&e, &BellRoles::tripartite())?;
    let got = if inside { JammingBranch::Inside } else { JammingBranch::Outside };
    if branch.is_some_and(|b| b != got) {
        return Err(Error::Configuration(format!("embedding falls in the {got:?} branch")));
    }
    Ok(e)
}

/// `Λ, B` uniform bits, `X = Λ ⊕ B`, `Z = Λ`, with single-valued `A`, `C`, `Y`.
pub fn classical_jamming_model(lambda_observed: bool) -> Result<CausalModel> {
    let b = ModelBuilder::new().observed("A", &["0"]).bits(&["B"]).observed("C", &["0"]);
    let b = if lambda_observed { b.bits(&["L"]) } else { b.hidden_range("L", 2) };
    b.bits(&["X"])
        .observed("Y", &["0"])
        .bits(&["Z"])
        .uniform(&["A", "B", "C", "L", "Y"])
        .mechanism("X", &["L", "B"], |v| v[0] ^ v[1])
        .mechanism("Z", &["L"], |v| v[0])
        .build()
}

/// An orthonormal measurement basis of a qubit; row `k` is outcome `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis(pub [[Complex64; 2]; 2]);

impl Basis {
    pub fn computational() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::zero());
        Basis([[o, z], [z, o]])
    }

    pub fn diagonal() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Basis([[h, h], [h, -h]])
    }

    /// The basis `cos θ|0⟩ + sin θ|1⟩, -sin θ|0⟩ + cos θ|1⟩`.
    pub fn rotated(theta: f64) -> Self {
        let (c, s) = (Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0));
        Basis([[c, s], [-s, c]])
    }

    pub fn check(&self) -> Result<()> {
        let ip = |u: &[Complex64; 2], v: &[Complex64; 2]| u[0].conj() * v[0] + u[1].conj() * v[1];
        let [u, v] = &self.0;
        let ok = (ip(u, u).re - 1.0).abs() < 1e-9 && (ip(v, v).re - 1.0).abs() < 1e-9 && ip(u, v).norm() < 1e-9;
        if !ok {
            return invalid("measurement basis is not orthonormal");
        }
        Ok(())
    }
}

/// Per-setting bases for Alice (setting `A`) and Charlie (setting `C`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammingBases {
    pub alice: [Basis; 2],
    pub charlie: [Basis; 2],
}

impl Default for JammingBases {
    /// Setting 0 measures in the computational basis, setting 1 in the diagonal one.
    fn default() -> Self {
        let b = [Basis::computational(), Basis::diagonal()];
        JammingBases { alice: b, charlie: b }
    }
}

/// `P(A, B, C, X, Z)` with uniform settings. Alice and Charlie share
/// `(|00⟩ + |11⟩)/√2`; when `B = 1` Bob flips Charlie's qubit first, giving
/// `(|01⟩ + |10⟩)/√2`.
pub fn quantum_jamming_distribution(bases: &JammingBases) -> Result<Distribution<f64>> {
    for b in bases.alice.iter().chain(&bases.charlie) {
        b.check()?;
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let states = [[h, 0.0, 0.0, h], [0.0, h, h, 0.0]];
    let vars = ["A", "B", "C", "X", "Z"].map(Variable::binary).to_vec();
    Distribution::from_fn(vars, |v| {
        let (a, b, c, x, z) = (v[0], v[1], v[2], v[3], v[4]);
        let (e, f) = (bases.alice[a].0[x], bases.charlie[c].0[z]);
        let mut amp = Complex64::zero();
        for q1 in 0..2 {
            for q2 in 0..2 {
                amp += e[q1].conj() * f[q2].conj() * states[b][2 * q1 + q2];
            }
        }
        amp.norm_sqr() / 8.0
    })
}

/// The default-basis quantum table, snapped to exact rationals and lifted with
/// a single-valued `Y`.
pub fn quantum_jamming_table() -> Result<Distribution> {
    let d = quantum_jamming_distribution(&JammingBases::default())?;
    let exact = d.snap(1 << 20).ok_or_else(|| Error::InconsistentModel("quantum table is not rational".into()))?;
    exact.with_trivial("Y")
}

/// Uniform settings and outcomes with `X ⊕ Z = A·C ⊕ B`; `Y` is an independent uniform bit.
pub fn pr_jamming_distribution() -> Result<Distribution> {
    let vars = ["A", "B", "C", "X", "Y", "Z"].map(Variable::binary).to_vec();
    Distribution::from_fn(vars, |v| if v[3] ^ v[5] == (v[0] & v[2]) ^ v[1] { ratio(1, 32) } else { Prob::zero() })
}

/// What a scenario is expected to show. Relation arguments use node names,
/// concatenated when single letters or comma separated otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Ns2(bool),
    Ns3(bool),
    Ns3Prime(bool),
    Jamming(bool),
    Affects { x: String, y: String, z: String, w: String, holds: bool },
    Irreducible { x: String, y: String, z: String, irreducible: bool },
    Arrow { from: String, to: String, solid: bool },
    Independent { x: Vec<String>, y: Vec<String>, z: Vec<String>, holds: bool },
    /// Exact observed marginal over `vars`, row-major, as `p/q` strings.
    Marginal { vars: Vec<String>, probs: Vec<String> },
    /// `P_do(intervention)(event) = prob`.
    Interventional { intervention: Vec<(String, String)>, event: Vec<(String, String)>, prob: String },
    Compat(CompatVerdict),
    Acl(bool),
    Hcl(bool),
    Acyclic(bool),
    Bipartite { condition1: bool, condition2: bool },
    Tripartite { condition1: bool, condition2: bool, condition2_prime: bool },
}

fn affects(x: &str, y: &str, z: &str, holds: bool) -> Expectation {
    Expectation::Affects { x: x.into(), y: y.into(), z: z.into(), w: String::new(), holds }
}

fn str_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn pair_refs(v: &[(String, String)]) -> Vec<(&str, &str)> {
    v.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub summary: String,
    pub model: Option<CausalModel>,
    /// Observed table for scenarios given only by correlations.
    pub table: Option<Distribution>,
    pub roles: BellRoles,
    pub embedding: Option<Embedding>,
    /// Acyclic model expected to reproduce this one, for hidden-loop checks.
    pub witness: Option<CausalModel>,
    pub expectations: Vec<Expectation>,
}

impl Scenario {
    fn new(name: &str, summary: &str, roles: BellRoles) -> Self {
        Scenario {
            name: name.into(),
            summary: summary.into(),
            model: None,
            table: None,
            roles,
            embedding: None,
            witness: None,
            expectations: vec![],
        }
    }

    fn model(mut self, m: CausalModel) -> Self {
        self.model = Some(m);
        self
    }

    fn embedding(mut self, e: Embedding) -> Self {
        self.embedding = Some(e);
        self
    }

    fn expect(mut self, e: impl IntoIterator<Item = Expectation>) -> Self {
        self.expectations.extend(e);
        self
    }

    pub fn distribution(&self) -> Result<Distribution> {
        match (&self.table, &self.model) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(m)) => m.observed_distribution(),
            (None, None) => invalid(format!("scenario `{}` has neither a model nor a table", self.name)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub expectation: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Lazily computed facts about one scenario.
struct Runner<'s> {
    s: &'s Scenario,
    dist: Option<Distribution>,
    verdicts: Option<Vec<Verdict>>,
}

impl<'s> Runner<'s> {
    fn model(&self) -> Result<&'s CausalModel> {
        self.s.model.as_ref().ok_or_else(|| Error::Configuration(format!("scenario `{}` has no model", self.s.name)))
    }

    fn embedding(&self) -> Result<&'s Embedding> {
        self.s.embedding.as_ref().ok_or_else(|| Error::Configuration(format!("scenario `{}` has no embedding", self.s.name)))
    }

    fn dist(&mut self) -> Result<&Distribution> {
        if self.dist.is_none() {
            self.dist = Some(self.s.distribution()?);
        }
        Ok(self.dist.as_ref().unwrap())
    }

    fn verdicts(&mut self) -> Result<&[Verdict]> {
        if self.verdicts.is_none() {
            let m = self.model()?;
            self.verdicts = Some(AffectsEngine::new(m).enumerate(false, DEFAULT_ENUM_CAP)?);
        }
        Ok(self.verdicts.as_ref().unwrap())
    }

    /// `(description, expected, actual)`.
    fn check(&mut self, e: &Expectation) -> Result<(String, String, String)> {
        let roles = &self.s.roles;
        let b = |v: bool| v.to_string();
        Ok(match e {
            Expectation::Ns2(want) => ("NS2".into(), b(*want), b(check_ns2(self.dist()?, roles)?.holds)),
            Expectation::Ns3(want) => ("NS3".into(), b(*want), b(check_ns3(self.dist()?, roles)?.holds)),
            Expectation::Ns3Prime(want) => ("NS3'".into(), b(*want), b(check_ns3p(self.dist()?, roles)?.holds)),
            Expectation::Jamming(want) => ("jamming".into(), b(*want), b(is_jamming(self.dist()?, roles)?)),
            Expectation::Affects { x, y, z, w, holds } => {
                let m = self.model()?;
                let r = Relation::named(m.graph(), x, y, z, w)?;
                (r.describe(m.graph()), b(*holds), b(AffectsEngine::new(m).holds(r)?))
            }
            Expectation::Irreducible { x, y, z, irreducible } => {
                let m = self.model()?;
                let r = Relation::named(m.graph(), x, y, z, "")?;
                let got = AffectsEngine::new(m).is_irreducible(r)?;
                (format!("{} is irreducible", r.describe(m.graph())), b(*irreducible), b(got))
            }
            Expectation::Arrow { from, to, solid } => {
                let m = self.model()?;
                let arrows = AffectsEngine::new(m).classify_arrows()?;
                let a = arrows
                    .iter()
                    .find(|a| &a.from == from && &a.to == to)
                    .ok_or_else(|| Error::InvalidArgument(format!("no observed edge {from} -> {to}")))?;
                let kind = |s: bool| if s { "solid" } else { "dashed" }.to_string();
                (format!("arrow {from} -> {to}"), kind(*solid), kind(a.solid))
            }
            Expectation::Independent { x, y, z, holds } => {
                let got = self.dist()?.cond_indep(&str_refs(x), &str_refs(y), &str_refs(z))?;
                (format!("({} ⫫ {} | {})", x.join(","), y.join(","), z.join(",")), b(*holds), b(got))
            }
            Expectation::Marginal { vars, probs } => {
                let names: Vec<&str> = vars.iter().map(String::as_str).collect();
                let m = self.dist()?.marginal(&names)?;
                let got: Vec<String> = m.probs().iter().map(Weight::render).collect();
                (format!("P({})", vars.join(",")), probs.join(" "), got.join(" "))
            }
            Expectation::Interventional { intervention, event, prob } => {
                let m = self.model()?;
                let a = m.assignment(&pair_refs(intervention))?;
                let d = m.interventional(&a)?;
                let ev = m.assignment(&pair_refs(event))?;
                let obs: Vec<usize> = m.graph().observed().iter().collect();
                let local: Vec<(usize, usize)> = ev
                    .iter()
                    .map(|&(i, v)| Ok((obs.iter().position(|&o| o == i).ok_or_else(|| Error::InvalidArgument("event on a hidden node".into()))?, v)))
                    .collect::<Result<_>>()?;
                let p = d.event_prob(&local)?;
                let show = |v: &[(String, String)]| v.iter().map(|(a, b)| format!("{a}={b}")).collect::<Vec<_>>().join(",");
                (format!("P_do({})({})", show(intervention), show(event)), prob.clone(), p.render())
            }
            Expectation::Compat(want) => {
                let m = self.model()?;
                let e = self.embedding()?;
                e.check_covers(m.graph())?;
                let g = m.graph().clone();
                let r = check_compat(&g, self.verdicts()?, e)?;
                ("compat".into(), format!("{want:?}"), format!("{:?}", r.verdict))
            }
            Expectation::Acl(want) => {
                let g = self.model()?.graph().clone();
                let l = certify_acl(&g, self.verdicts()?)?;
                ("affects causal loop".into(), b(*want), b(l.acl))
            }
            Expectation::Hcl(want) => {
                let w = self
                    .s
                    .witness
                    .as_ref()
                    .ok_or_else(|| Error::Configuration(format!("scenario `{}` has no witness model", self.s.name)))?;
                let c = certify_hcl(self.model()?, w, false)?;
                ("hidden causal loop certified".into(), b(*want), b(c.certified))
            }
            Expectation::Acyclic(want) => ("acyclic".into(), b(*want), b(!self.model()?.graph().has_cycle())),
            Expectation::Bipartite { condition1, condition2 } => {
                let m = self.model()?;
                let c = check_bipartite_conditions(m, roles, self.verdicts()?)?;
                ("bipartite conditions (1, 2)".into(), format!("({condition1}, {condition2})"), format!("({}, {})", c.condition1, c.condition2))
            }
            Expectation::Tripartite { condition1, condition2, condition2_prime } => {
                let m = self.model()?;
                let e = self.embedding()?;
                let c = check_tripartite_conditions(m, roles, e, self.verdicts()?)?;
                (
                    "tripartite conditions (1, 2, 2')".into(),
                    format!("({condition1}, {condition2}, {condition2_prime})"),
                    format!("({}, {}, {})", c.condition1, c.condition2, c.condition2_prime),
                )
            }
        })
    }
}

/// Evaluates every expectation. Errors inside a check fail that check only.
pub fn run_scenario(s: &Scenario) -> ScenarioReport {
    let mut r = Runner { s, dist: None, verdicts: None };
    let checks: Vec<CheckResult> = s
        .expectations
        .iter()
        .map(|e| match r.check(e) {
            Ok((expectation, expected, actual)) => {
                let passed = expected == actual;
                CheckResult { expectation, expected, actual, passed }
            }
            Err(err) => CheckResult {
                expectation: format!("{e:?}"),
                expected: "a value".into(),
                actual: format!("error: {err}"),
                passed: false,
            },
        })
        .collect();
    ScenarioReport { name: s.name.clone(), passed: checks.iter().all(|c| c.passed), checks }
}

fn fig7c() -> Expectation {
    // uniform over the triples with B = X ⊕ Z
    let probs = (0..8).map(|k| if (k >> 2) == ((k >> 1) & 1) ^ (k & 1) { "1/4" } else { "0" }).collect::<Vec<_>>();
    Expectation::Marginal { vars: strings(&["B", "X", "Z"]), probs: strings(&probs) }
}

fn jamming_observed_scenario() -> Result<Scenario> {
    let mut e = jamming_embedding(1, JammingBranch::Inside)?;
    e.place_at("L", pt(&[0, -8], 4))?;
    Ok(Scenario::new("classical-jamming-observed", "X = L xor B, Z = L with the common cause L observed", BellRoles::tripartite())
        .model(classical_jamming_model(true)?)
        .embedding(e)
        .expect([
            fig7c(),
            Expectation::Ns3Prime(true),
            Expectation::Ns3(false),
            Expectation::Jamming(true),
            affects("B", "X", "L", true),
            affects("L", "X", "B", true),
            Expectation::Irreducible { x: "BL".into(), y: "X".into(), z: String::new(), irreducible: true },
            Expectation::Arrow { from: "L".into(), to: "Z".into(), solid: true },
            Expectation::Arrow { from: "L".into(), to: "X".into(), solid: false },
            Expectation::Arrow { from: "B".into(), to: "X".into(), solid: false },
            Expectation::Compat(CompatVerdict::Incompatible),
        ]))
}

fn jamming_hidden_scenario() -> Result<Scenario> {
    Ok(Scenario::new("classical-jamming", "X = L xor B, Z = L with the common cause L unobserved", BellRoles::tripartite())
        .model(classical_jamming_model(false)?)
        .embedding(jamming_embedding(1, JammingBranch::Inside)?)
        .expect([
            fig7c(),
            Expectation::Ns3Prime(true),
            Expectation::Ns3(false),
            Expectation::Jamming(true),
            affects("B", "XZ", "", true),
            affects("B", "X", "", false),
            affects("B", "Z", "", false),
            Expectation::Independent { x: strings(&["B"]), y: strings(&["X"]), z: vec![], holds: true },
            Expectation::Independent { x: strings(&["B"]), y: strings(&["X", "Z"]), z: vec![], holds: false },
            Expectation::Arrow { from: "B".into(), to: "X".into(), solid: false },
            Expectation::Compat(CompatVerdict::Compatible),
            Expectation::Tripartite { condition1: true, condition2: true, condition2_prime: true },
            Expectation::Acl(false),
        ]))
}

/// `Y = B`, `X = L`, `Z = L ⊕ Y` with `L` hidden: the middle outcome signals
/// to the outer pair jointly and to nothing else.
pub fn middle_outcome_model() -> Result<CausalModel> {
    ModelBuilder::new()
        .bits(&["A", "B", "C"])
        .hidden_range("L", 2)
        .bits(&["X", "Y", "Z"])
        .uniform(&["A", "B", "C", "L"])
        .mechanism("Y", &["B"], |v| v[0])
        .mechanism("X", &["L"], |v| v[0])
        .mechanism("Z", &["L", "Y"], |v| v[0] ^ v[1])
        .build()
}

fn middle_outcome_scenarios() -> Result<Vec<Scenario>> {
    let common = [
        Expectation::Ns3Prime(true),
        affects("Y", "XZ", "", true),
        affects("Y", "X", "", false),
        affects("Y", "Z", "", false),
        Expectation::Tripartite { condition1: true, condition2: false, condition2_prime: true },
    ];
    Ok(vec![
        Scenario::new("middle-outcome-inside", "Y signals to XZ; the outer joint future lies in Y's future", BellRoles::tripartite())
            .model(middle_outcome_model()?)
            .embedding(jamming_embedding(2, JammingBranch::Inside)?)
            .expect(common.clone())
            .expect([Expectation::Compat(CompatVerdict::Compatible)]),
        Scenario::new("middle-outcome-outside", "the same model with Y moved off the outer joint future", BellRoles::tripartite())
            .model(middle_outcome_model()?)
            .embedding(jamming_embedding(2, JammingBranch::Outside)?)
            .expect(common)
            .expect([Expectation::Compat(CompatVerdict::Incompatible)]),
    ])
}

/// `Y = A ⊕ X` with `A`, `X` uniform and `B` a disconnected uniform setting.
pub fn xor_signalling_model() -> Result<CausalModel> {
    ModelBuilder::new()
        .bits(&["A", "B", "X", "Y"])
        .uniform(&["A", "B", "X"])
        .mechanism("Y", &["A", "X"], |v| v[0] ^ v[1])
        .build()
}

/// `X = 2Y mod 3`, `Y = X` over trits; `A`, `B` disconnected bits.
pub fn affects_loop_model() -> Result<CausalModel> {
    ModelBuilder::new()
        .bits(&["A", "B"])
        .range(&["X", "Y"], 3)
        .uniform(&["A", "B"])
        .mechanism("X", &["Y"], |v| (2 * v[0]) % 3)
        .mechanism("Y", &["X"], |v| v[0])
        .build()
}

/// `X = Y ⊕ L`, `Y = X ⊕ L` with `L` hidden, solved uniformly over fixed points.
pub fn hidden_loop_model(lambda_observed: bool) -> Result<CausalModel> {
    let b = ModelBuilder::new().bits(&["A", "B"]);
    let b = if lambda_observed { b.bits(&["L"]) } else { b.hidden_range("L", 2) };
    b.bits(&["X", "Y"])
        .uniform(&["A", "B", "L"])
        .mechanism("X", &["Y", "L"], |v| v[0] ^ v[1])
        .mechanism("Y", &["X", "L"], |v| v[0] ^ v[1])
        .mode(SolutionMode::Uniform)
        .build()
}

/// Four independent uniform bits with no edges.
pub fn disconnected_model() -> Result<CausalModel> {
    ModelBuilder::new().bits(&["A", "B", "X", "Y"]).uniform(&["A", "B", "X", "Y"]).build()
}

fn copy_model(source: &str) -> Result<CausalModel> {
    ModelBuilder::new().bits(&["A", "B", "X", "Y"]).uniform(&["A", "B", "X"]).mechanism("Y", &[source], |v| v[0]).build()
}

/// `X` uniform, `Y` carries `X` and a hidden bit `N` as `2X + N`, `Z = Y mod 2`.
pub fn non_transitive_model() -> Result<CausalModel> {
    ModelBuilder::new()
        .bits(&["X"])
        .hidden_range("N", 2)
        .range(&["Y"], 4)
        .bits(&["Z"])
        .uniform(&["X", "N"])
        .mechanism("Y", &["X", "N"], |v| 2 * v[0] + v[1])
        .mechanism("Z", &["Y"], |v| v[0] % 2)
        .build()
}

fn interventional(on: &[(&str, &str)], event: &[(&str, &str)], prob: &str) -> Expectation {
    let own = |v: &[(&str, &str)]| v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    Expectation::Interventional { intervention: own(on), event: own(event), prob: prob.into() }
}

/// Every fixture, in a fixed order.
pub fn library() -> Result<Vec<Scenario>> {
    let bip = BellRoles { common_cause: None, ..BellRoles::bipartite() };
    let mut out = vec![jamming_hidden_scenario()?, jamming_observed_scenario()?];
    out.extend(middle_outcome_scenarios()?);
    out.push(
        Scenario::new("quantum-jamming", "CNOT-controlled Bell state, default bases", BellRoles::tripartite())
            .expect([Expectation::Ns3Prime(true), Expectation::Ns3(false), Expectation::Jamming(true)]),
    );
    out.last_mut().unwrap().table = Some(quantum_jamming_table()?);
    out.push(
        Scenario::new("pr-jamming", "PR-box relabelling chosen by the middle setting", BellRoles::tripartite())
            .expect([Expectation::Ns3Prime(true), Expectation::Ns3(false), Expectation::Jamming(true)]),
    );
    out.last_mut().unwrap().table = Some(pr_jamming_distribution()?);
    out.push(
        Scenario::new("xor-signalling", "Y = A xor X: NS2 holds yet AX affects Y", bip.clone())
            .model(xor_signalling_model()?)
            .embedding(standard_bipartite_embedding(1)?)
            .expect([
                Expectation::Ns2(true),
                affects("AX", "Y", "", true),
                affects("A", "Y", "B", false),
                affects("B", "X", "A", false),
                Expectation::Irreducible { x: "AX".into(), y: "Y".into(), z: String::new(), irreducible: true },
                Expectation::Compat(CompatVerdict::Incompatible),
                Expectation::Bipartite { condition1: true, condition2: false },
            ]),
    );
    out.push(
        Scenario::new("affects-loop", "X = 2Y mod 3, Y = X over trits", bip.clone())
            .model(affects_loop_model()?)
            .embedding(standard_bipartite_embedding(1)?)
            .expect([
                Expectation::Marginal { vars: strings(&["X", "Y"]), probs: strings(&["1", "0", "0", "0", "0", "0", "0", "0", "0"]) },
                interventional(&[("X", "1")], &[("Y", "1")], "1"),
                interventional(&[("Y", "2")], &[("X", "1")], "1"),
                Expectation::Ns2(true),
                affects("X", "Y", "", true),
                affects("Y", "X", "", true),
                Expectation::Acl(true),
                Expectation::Acyclic(false),
            ]),
    );
    let mut hidden = Scenario::new("hidden-loop", "X = Y xor L, Y = X xor L with L hidden", bip.clone())
        .model(hidden_loop_model(false)?)
        .expect([
            Expectation::Ns2(true),
            Expectation::Independent { x: strings(&["X"]), y: strings(&["Y"]), z: vec![], holds: true },
            affects("X", "Y", "", false),
            affects("Y", "X", "", false),
            Expectation::Acl(false),
            Expectation::Hcl(true),
            Expectation::Acyclic(false),
            Expectation::Bipartite { condition1: true, condition2: true },
        ]);
    hidden.witness = Some(disconnected_model()?);
    out.push(hidden);
    out.push(
        Scenario::new("hidden-loop-observed", "the hidden loop with L observed", bip.clone())
            .model(hidden_loop_model(true)?)
            .expect([
                Expectation::Affects { x: "X".into(), y: "Y".into(), z: String::new(), w: "L".into(), holds: true },
                affects("X", "Y", "", false),
            ]),
    );
    out.push(
        Scenario::new("copy-setting", "Y = A: NS2 fails without any loop", bip.clone())
            .model(copy_model("A")?)
            .embedding(standard_bipartite_embedding(1)?)
            .expect([
                Expectation::Ns2(false),
                affects("A", "Y", "", true),
                Expectation::Acyclic(true),
                Expectation::Acl(false),
                Expectation::Bipartite { condition1: false, condition2: true },
                Expectation::Compat(CompatVerdict::Incompatible),
            ]),
    );
    out.push(
        Scenario::new("copy-outcome", "Y = X: NS2 holds, X affects Y, no loop", bip.clone())
            .model(copy_model("X")?)
            .embedding(standard_bipartite_embedding(1)?)
            .expect([
                Expectation::Ns2(true),
                affects("X", "Y", "", true),
                Expectation::Acyclic(true),
                Expectation::Acl(false),
                Expectation::Bipartite { condition1: true, condition2: false },
                Expectation::Compat(CompatVerdict::Incompatible),
            ]),
    );
    out.push(
        Scenario::new("non-transitive", "X affects Y and Y affects Z but X does not affect Z", bip)
            .model(non_transitive_model()?)
            .expect([affects("X", "Y", "", true), affects("Y", "Z", "", true), affects("X", "Z", "", false)]),
    );
    Ok(out)
}

pub fn scenario(name: &str) -> Result<Scenario> {
    library()?
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no scenario named `{name}`")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopClaim {
    pub claim: String,
    pub passed: bool,
}

/// Sufficiency of the outcome conditions against affects loops, and the four
/// counterexamples showing the correlation conditions alone decide nothing
/// about loops.
pub fn check_loop_claims(suite: &[Scenario]) -> Result<Vec<LoopClaim>> {
    let mut rows = Vec::new();
    for s in suite {
        let Some(m) = &s.model else { continue };
        if s.roles.validate(m).is_err() || m.graph().observed().len() > DEFAULT_ENUM_CAP {
            continue;
        }
        let hidden_l = s.roles.common_cause.as_ref().and_then(|l| m.graph().id(l).ok()).is_none_or(|i| !m.graph().is_observed(i));
        if !hidden_l {
            continue;
        }
        let verdicts = AffectsEngine::new(m).enumerate(false, DEFAULT_ENUM_CAP)?;
        let acl = certify_acl(m.graph(), &verdicts)?.acl;
        let outcome_condition = match s.roles.parties() {
            2 => check_bipartite_conditions(m, &s.roles, &verdicts)?.condition2,
            _ => match &s.embedding {
                Some(e) => check_tripartite_conditions(m, &s.roles, e, &verdicts)?.condition2_prime,
                None => continue,
            },
        };
        if outcome_condition {
            rows.push(LoopClaim { claim: format!("{}: outcome condition holds, so no affects loop", s.name), passed: !acl });
        }
    }
    let find = |n: &str| suite.iter().find(|s| s.name == n).ok_or_else(|| Error::InvalidArgument(format!("suite lacks `{n}`")));
    let ns2 = |s: &Scenario| -> Result<bool> { Ok(check_ns2(&s.distribution()?, &s.roles)?.holds) };
    let acyclic = |s: &Scenario| s.model.as_ref().is_some_and(|m| !m.graph().has_cycle());

    let s = find("affects-loop")?;
    let m = s.model.as_ref().unwrap();
    let acl = certify_acl(m.graph(), &AffectsEngine::new(m).enumerate(false, DEFAULT_ENUM_CAP)?)?.acl;
    rows.push(LoopClaim { claim: "affects-loop: NS2 holds and an affects loop is certified".into(), passed: ns2(s)? && acl });

    let s = find("hidden-loop")?;
    let hcl = certify_hcl(s.model.as_ref().unwrap(), s.witness.as_ref().unwrap(), false)?.certified;
    rows.push(LoopClaim { claim: "hidden-loop: NS2 holds and a hidden loop is certified".into(), passed: ns2(s)? && hcl });

    let s = find("copy-setting")?;
    rows.push(LoopClaim { claim: "copy-setting: NS2 fails on an acyclic structure".into(), passed: !ns2(s)? && acyclic(s) });

    let s = find("copy-outcome")?;
    let m = s.model.as_ref().unwrap();
    let xy = crate::affects::affects_named(m, "X", "Y", "")?;
    rows.push(LoopClaim {
        claim: "copy-outcome: NS2 holds, X affects Y, acyclic structure".into(),
        passed: ns2(s)? && xy && acyclic(s),
    });
    Ok(rows)
}

/// Random Bell-scenario models with a hidden common cause `L`.
///
/// Settings are uniform bits. Structures are drawn from four families: the
/// textbook one (each outcome depends on its own setting and `L`), that plus
/// one setting-to-foreign-outcome edge, that plus one outcome-to-outcome edge,
/// and an arbitrary acyclic choice of parents. Mechanisms are random tables.
pub fn random_bell_model(parties: usize, rng: &mut ChaCha8Rng) -> Result<CausalModel> {
    if !(2..=3).contains(&parties) {
        return invalid("random Bell models have 2 or 3 parties");
    }
    let roles = if parties == 2 { BellRoles::bipartite() } else { BellRoles::tripartite() };
    let settings: Vec<&str> = roles.settings.iter().map(String::as_str).collect();
    let outcomes: Vec<&str> = roles.outcomes.iter().map(String::as_str).collect();
    let lcard = rng.gen_range(2..=3);
    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut order: Vec<usize> = (0..parties).collect();
    for i in (1..parties).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let family = rng.gen_range(0..4);
    for k in 0..parties {
        parents.insert(outcomes[k], if family == 3 { vec![] } else { vec![settings[k], "L"] });
    }
    match family {
        1 => {
            let (k, j) = (rng.gen_range(0..parties), rng.gen_range(1..parties));
            parents.get_mut(outcomes[k]).unwrap().push(settings[(k + j) % parties]);
        }
        2 => {
            let (a, b) = (order[0], order[1]);
            parents.get_mut(outcomes[order[1]]).unwrap().push(outcomes[a]);
            let _ = b;
        }
        3 => {
            for (pos, &k) in order.iter().enumerate() {
                let mut cands: Vec<&str> = settings.clone();
                cands.push("L");
                cands.extend(order[..pos].iter().map(|&j| outcomes[j]));
                let ps: Vec<&str> = cands.into_iter().filter(|_| rng.gen_bool(0.4)).collect();
                parents.insert(outcomes[k], ps);
            }
        }
        _ => {}
    }
    let mut b = ModelBuilder::new().bits(&settings).hidden_range("L", lcard).bits(&outcomes).uniform(&settings);
    let weights: Vec<i128> = (0..lcard).map(|_| rng.gen_range(1..=3)).collect();
    let total: i128 = weights.iter().sum();
    b = b.law("L", &weights.iter().map(|&w| ratio(w, total)).collect::<Vec<_>>());
    // mechanisms in an order where parents come first
    for &k in &order {
        let o = outcomes[k];
        let ps = parents[o].clone();
        if ps.is_empty() {
            let p = rng.gen_range(1..=3);
            b = b.law(o, &[ratio(p, 4), ratio(4 - p, 4)]);
            continue;
        }
        let cards: Vec<usize> = ps.iter().map(|p| if *p == "L" { lcard } else { 2 }).collect();
        let rows: usize = cards.iter().product();
        let table: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..2)).collect();
        b = b.mechanism(o, &ps, move |v| {
            let idx = v.iter().zip(&cards).fold(0, |acc, (x, c)| acc * c + x);
            table[idx]
        });
    }
    b.build()
}

/// Convenience: a seeded stream of random Bell models.
pub fn random_bell_models(parties: usize, count: usize, seed: u64) -> Result<Vec<CausalModel>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_bell_model(parties, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_validate() {
        standard_bipartite_embedding(1).unwrap();
        standard_bipartite_embedding(2).unwrap();
        standard_tripartite_embedding(1).unwrap();
        jamming_embedding(1, JammingBranch::Inside).unwrap();
        jamming_embedding(2, JammingBranch::Inside).unwrap();
        jamming_embedding(2, JammingBranch::Outside).unwrap();
        assert!(jamming_embedding(1, JammingBranch::Outside).is_err());
    }

    #[test]
    fn timelike_setting_and_outcome_are_rejected() {
        let places = [("A", pt(&[-2, 0], 1)), ("X", pt(&[-2, 1], 1)), ("B", pt(&[2, 0], 1)), ("Y", pt(&[-1, 4], 1))];
        assert!(standard_embedding_at(1, &BellRoles::bipartite(), &places).is_err());
    }

    #[test]
    fn off_axis_jammer_too_late_is_rejected() {
        let places = [
            ("A", pt(&[-8, 0, -4], 4)),
            ("X", pt(&[-8, 0, 0], 4)),
            ("B", pt(&[0, 2, -1], 4)),
            ("Y", pt(&[0, 2, 0], 4)),
            ("C", pt(&[8, 0, -4], 4)),
            ("Z", pt(&[8, 0, 0], 4)),
        ];
        let err = jamming_embedding_at(2, &places, None).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn quantum_marginals_ignore_b() {
        let d = quantum_jamming_distribution(&JammingBases::default()).unwrap();
        for a in ["0", "1"] {
            for b in ["0", "1"] {
                let c = d.conditional(&["X"], &[("A", a), ("B", b)]).unwrap();
                assert!(c.probs().iter().all(|p| (p - 0.5).abs() < 1e-12));
            }
        }
        let bad = Basis([[Complex64::new(1.0, 0.0); 2]; 2]);
        let bases = JammingBases { alice: [bad, bad], ..JammingBases::default() };
        assert!(quantum_jamming_distribution(&bases).is_err());
    }

    #[test]
    fn quantum_b0_slice_is_the_bell_state() {
        let d = quantum_jamming_distribution(&JammingBases::default()).unwrap();
        // computational bases on the unflipped state: perfectly correlated
        let c = d.conditional(&["X", "Z"], &[("A", "0"), ("B", "0"), ("C", "0")]).unwrap();
        let want = [0.5, 0.0, 0.0, 0.5];
        assert!(c.probs().iter().zip(want).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn pr_slice() {
        let d = pr_jamming_distribution().unwrap();
        assert_eq!(d.probs().len(), 64);
        for (a, c) in [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")] {
            let s = d.conditional(&["X", "Z"], &[("A", a), ("B", "0"), ("C", c)]).unwrap();
            let odd = a == "1" && c == "1";
            let p = s.probs();
            assert_eq!(p[1] + p[2] == ratio(1, 1), odd);
        }
    }

    #[test]
    fn library_passes() {
        for s in library().unwrap() {
            let r = run_scenario(&s);
            for c in r.checks.iter().filter(|c| !c.passed) {
                eprintln!("{}: {} expected {} got {}", s.name, c.expectation, c.expected, c.actual);
            }
            assert!(r.passed, "{}", s.name);
        }
    }

    #[test]
    fn loop_claims() {
        let rows = check_loop_claims(&library().unwrap()).unwrap();
        assert!(rows.len() >= 4);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }

    #[test]
    fn random_models_are_bell_scenarios() {
        for parties in [2, 3] {
            let roles = if parties == 2 { BellRoles::bipartite() } else { BellRoles::tripartite() };
            for m in random_bell_models(parties, 20, 1).unwrap() {
                roles.validate(&m).unwrap();
                assert!(!m.graph().has_cycle());
            }
        }
    }
}
