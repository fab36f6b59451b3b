//! Measurement simulator and the config-driven report runner.
//!
//! A run is described by a config file: a top-level `seed` and a list of
//! `[[pipeline]]` tables, each selecting a `kind`. TOML is the default format;
//! files ending in `.json` are read as JSON with the same structure.
//!
//! ```toml
//! seed = 7
//!
//! [[pipeline]]
//! kind = "verify"
//! theory = "quantum"
//! n = 3
//!
//! [[pipeline]]
//! kind = "simulate"
//! theory = "quantum"
//! n = 2
//! basis = 1
//! shots = 1000000
//! ```

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::axioms::{
    check_frequency_convergence, verify_theory, CheckReport, CheckStatus, FrequencyTrial,
};
use crate::bloch::{a_matrix, c_bounds, classify_surface, d2_assemble, recover_phases, D2Params};
use crate::composite::{composite_from_density, dof_count_check, partial_transpose_min_eigenvalue};
use crate::dynamics::{
    choi_matrix, continuity_probe, is_completely_positive, is_reversible, z_from_kraus, KrausSet,
    Superoperator, TransformMatrix,
};
use crate::error::{GptError, Result};
use crate::frame::gram_matrix;
use crate::io::{matrix_from_complex_rows, ComplexRows};
use crate::linalg::{hermitian_eigenvalues, outer, rank, LINALG_TOL, SINGULAR_TOL};
use crate::sampling::{haar_state, split_rng};
use crate::state::{mix, DensityOperator, PVector, RVector, Theory, TheoryKind};

/// Shots drawn from one RNG stream before moving to the next.
pub const BATCH_SIZE: u64 = 65_536;

/// Preparation, optional transformation and a measurement partition, run `shots` times.
#[derive(Debug, Clone)]
pub struct Experiment {
    preparation: PVector,
    transform: Option<TransformMatrix>,
    partition: Vec<RVector>,
    shots: u64,
    seed: u64,
    probabilities: Vec<f64>,
}

impl Experiment {
    /// Validates `sum_l r_l = r^I` and that every branch probability lies in `[0, 1]` (to `1e-12`).
    pub fn new(
        preparation: PVector,
        transform: Option<TransformMatrix>,
        partition: Vec<RVector>,
        r_identity: RVector,
        shots: u64,
        seed: u64,
    ) -> Result<Self> {
        let k = r_identity.k();
        if partition.is_empty() {
            return Err(GptError::Empty("measurement partition"));
        }
        if let Some(bad) = partition.iter().find(|r| r.k() != k) {
            return Err(GptError::DimensionMismatch {
                expected: k,
                found: bad.k(),
            });
        }
        if preparation.k() != k {
            return Err(GptError::DimensionMismatch {
                expected: k,
                found: preparation.k(),
            });
        }
        let sum = partition
            .iter()
            .fold(crate::linalg::RVec::zeros(k), |acc, r| acc + r.values());
        let dev = crate::linalg::max_abs_diff_vec(&sum, r_identity.values());
        if dev > LINALG_TOL {
            return Err(GptError::InvalidExperiment(format!(
                "partition differs from the identity measurement by {dev:e}"
            )));
        }
        let p = match &transform {
            Some(z) => crate::dynamics::apply_transform(z, &preparation)?,
            None => preparation.clone(),
        };
        let mut probabilities = Vec::with_capacity(partition.len());
        for (l, r) in partition.iter().enumerate() {
            let q = snap(r.dot_p(&p)).ok_or_else(|| {
                GptError::InvalidExperiment(format!(
                    "outcome {} has probability {}",
                    l + 1,
                    r.dot_p(&p)
                ))
            })?;
            probabilities.push(q);
        }
        let total: f64 = probabilities.iter().sum();
        if snap(total).is_none() {
            return Err(GptError::InvalidExperiment(format!(
                "non-null probability {total} exceeds 1"
            )));
        }
        Ok(Self {
            preparation,
            transform,
            partition,
            shots,
            seed,
            probabilities,
        })
    }

    pub fn preparation(&self) -> &PVector {
        &self.preparation
    }

    pub fn transform(&self) -> Option<&TransformMatrix> {
        self.transform.as_ref()
    }

    pub fn partition(&self) -> &[RVector] {
        &self.partition
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `r_l . (Z p)` for each outcome `l = 1..L`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn null_probability(&self) -> f64 {
        (1.0 - self.probabilities.iter().sum::<f64>()).max(0.0)
    }
}

fn snap(q: f64) -> Option<f64> {
    if !(-LINALG_TOL..=1.0 + LINALG_TOL).contains(&q) {
        None
    } else {
        Some(q.clamp(0.0, 1.0))
    }
}

/// Counts per outcome; index 0 is the null outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

impl OutcomeCounts {
    pub fn outcome(&self, l: usize) -> u64 {
        self.counts[l]
    }

    pub fn null(&self) -> u64 {
        self.counts[0]
    }

    pub fn frequency(&self, l: usize) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.counts[l] as f64 / self.shots as f64
        }
    }
}

/// Draws a multinomial sample of `shots` over `probs` (null last) using conditional binomials.
fn multinomial<R: Rng + ?Sized>(
    shots: u64,
    probs: &[f64],
    rng: &mut R,
    out: &mut [u64],
) -> Result<()> {
    let mut remaining = shots;
    let mut mass = 1.0_f64;
    for (l, &q) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let cond = if mass <= 0.0 {
            0.0
        } else {
            (q / mass).clamp(0.0, 1.0)
        };
        let drawn = Binomial::new(remaining, cond)
            .map_err(|e| GptError::InvalidExperiment(e.to_string()))?
            .sample(rng);
        out[l] += drawn;
        remaining -= drawn;
        mass -= q;
    }
    *out.last_mut().expect("at least one slot") += remaining;
    Ok(())
}

/// Samples the experiment; batch `b` uses stream `b` split from the experiment seed.
pub fn simulate(exp: &Experiment) -> Result<OutcomeCounts> {
    let l = exp.probabilities.len();
    // slots 0..L hold outcomes 1..L, slot L the null outcome
    let mut slots = vec![0u64; l + 1];
    let mut probs = exp.probabilities.clone();
    probs.push(exp.null_probability());
    let mut done = 0u64;
    let mut batch = 0u64;
    while done < exp.shots {
        let size = BATCH_SIZE.min(exp.shots - done);
        let mut rng = split_rng(exp.seed, batch);
        multinomial(size, &probs, &mut rng, &mut slots)?;
        done += size;
        batch += 1;
    }
    let mut counts = Vec::with_capacity(l + 1);
    counts.push(slots[l]);
    counts.extend_from_slice(&slots[..l]);
    Ok(OutcomeCounts {
        counts,
        shots: exp.shots,
        seed: exp.seed,
    })
}

/// Each shot flips a `lambda`-weighted coin to choose between two preparations, then measures.
pub fn simulate_coin_flip(
    a: &Experiment,
    b: &Experiment,
    lambda: f64,
    shots: u64,
    seed: u64,
) -> Result<OutcomeCounts> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(GptError::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
        });
    }
    if a.probabilities.len() != b.probabilities.len() {
        return Err(GptError::DimensionMismatch {
            expected: a.probabilities.len(),
            found: b.probabilities.len(),
        });
    }
    let l = a.probabilities.len();
    let mut counts = vec![0u64; l + 1];
    let mut rng = split_rng(seed, 0);
    for _ in 0..shots {
        let exp = if rng.random::<f64>() < lambda { a } else { b };
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut hit = 0;
        for (i, &q) in exp.probabilities.iter().enumerate() {
            acc += q;
            if u < acc {
                hit = i + 1;
                break;
            }
        }
        counts[hit] += 1;
    }
    Ok(OutcomeCounts {
        counts,
        shots,
        seed,
    })
}

/// Top-level run configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub pipelines: Vec<Pipeline>,
}

pub const PIPELINE_KINDS: [&str; 7] = [
    "frame",
    "verify",
    "bloch",
    "transform",
    "composite",
    "simulate",
    "continuity",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Pipeline {
    /// Builds the frame and its D matrix.
    Frame {
        #[serde(default = "quantum")]
        theory: TheoryKind,
        n: usize,
    },
    Verify {
        theory: TheoryKind,
        n: usize,
    },
    /// Examines one member of the N=2 family of D matrices.
    Bloch {
        a: f64,
        b: f64,
        c: f64,
    },
    /// A quantum operation given by Kraus operators (or a single unitary).
    Transform {
        #[serde(default)]
        kraus: Option<Vec<ComplexRows>>,
        #[serde(default)]
        unitary: Option<ComplexRows>,
    },
    /// A bipartite density operator on `n_a x n_b`.
    Composite {
        n_a: usize,
        n_b: usize,
        rho: ComplexRows,
    },
    /// Basis-measurement statistics of a basis state or an explicit p-vector.
    Simulate {
        #[serde(default = "quantum")]
        theory: TheoryKind,
        n: usize,
        /// 1-based basis state.
        #[serde(default)]
        basis: Option<usize>,
        #[serde(default)]
        p: Option<Vec<f64>>,
        shots: u64,
        #[serde(default = "default_trials")]
        trials: usize,
    },
    /// Continuity probes between random pure states.
    Continuity {
        theory: TheoryKind,
        n: usize,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_pairs")]
        pairs: usize,
    },
}

fn quantum() -> TheoryKind {
    TheoryKind::Quantum
}

fn default_trials() -> usize {
    1
}

fn default_steps() -> usize {
    100
}

fn default_pairs() -> usize {
    5
}

impl Pipeline {
    pub fn kind(&self) -> &'static str {
        match self {
            Pipeline::Frame { .. } => "frame",
            Pipeline::Verify { .. } => "verify",
            Pipeline::Bloch { .. } => "bloch",
            Pipeline::Transform { .. } => "transform",
            Pipeline::Composite { .. } => "composite",
            Pipeline::Simulate { .. } => "simulate",
            Pipeline::Continuity { .. } => "continuity",
        }
    }
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    pipeline: Vec<Value>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| GptError::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| GptError::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let pipelines = raw
            .pipeline
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let kind = v
                    .get("kind")
                    .and_then(Value::as_str)
                    .ok_or_else(|| GptError::Config(format!("pipeline {i} has no `kind`")))?;
                if !PIPELINE_KINDS.contains(&kind) {
                    return Err(GptError::UnknownPipeline(kind.to_string()));
                }
                serde_json::from_value(v)
                    .map_err(|e| GptError::Config(format!("pipeline {i}: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            seed: raw.seed,
            pipelines,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub index: usize,
    pub kind: String,
    pub checks: Vec<CheckReport>,
    pub data: Value,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub all_passed: bool,
    pub pipelines: Vec<PipelineReport>,
}

impl RunReport {
    /// One row per check: `pipeline,kind,check,status,max_deviation`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("pipeline,kind,check,status,max_deviation\n");
        for p in &self.pipelines {
            for c in &p.checks {
                let status = match c.status {
                    CheckStatus::Pass => "pass",
                    CheckStatus::Fail => "fail",
                    CheckStatus::ExpectedFail => "expected-fail",
                };
                out.push_str(&format!(
                    "{},{},{},{},{:e}\n",
                    p.index, p.kind, c.check_name, status, c.max_deviation
                ));
            }
        }
        out
    }
}

fn check(name: &str, ok: bool, deviation: f64, witness: impl FnOnce() -> String) -> CheckReport {
    let witnesses = if ok { Vec::new() } else { vec![witness()] };
    CheckReport::new(name, ok, witnesses, deviation)
}

fn run_frame(theory: TheoryKind, n: usize) -> Result<(Vec<CheckReport>, Value)> {
    let t = Theory::new(theory, n)?;
    let expected_k = match theory {
        TheoryKind::Quantum => n * n,
        TheoryKind::Classical => n,
    };
    let r = rank(&t.frame().flattening(), SINGULAR_TOL);
    let checks = vec![
        check("frame_size", t.k() == expected_k, 0.0, || {
            format!("K = {} but expected {expected_k}", t.k())
        }),
        check("frame_rank", r == expected_k, 0.0, || format!("rank {r}")),
    ];
    let labels: Vec<String> = t.frame().labels().iter().map(ToString::to_string).collect();
    Ok((
        checks,
        json!({ "theory": theory, "n": n, "K": t.k(), "labels": labels, "d": crate::io::real_rows(t.d().matrix()) }),
    ))
}

fn run_bloch(a: f64, b: f64, c: f64) -> Result<(Vec<CheckReport>, Value)> {
    let params = D2Params::new(a, b, c)?;
    let (lo, hi) = c_bounds(a, b);
    let surface = classify_surface(&a_matrix(&params));
    let det = d2_assemble(&params).determinant();
    let inside = lo < c && c < hi;
    let mut checks = vec![check(
        "determinant_sign",
        (det > 0.0) == inside,
        det.abs(),
        || format!("det = {det:e} with c_- = {lo}, c_+ = {hi}"),
    )];
    let phases = match recover_phases(&d2_assemble(&params)) {
        Ok(ph) => {
            let frame = ph.frame()?;
            let d = gram_matrix(&frame)?;
            let dev = crate::linalg::max_abs_diff(d.matrix(), &d2_assemble(&params));
            checks.push(check("phase_recovery", dev < 1e-10, dev, || {
                format!("recovered frame deviates by {dev:e}")
            }));
            json!({ "phi3": ph.phi3, "phi4": ph.phi4 })
        }
        Err(e) => {
            checks.push(check("phase_recovery", !inside, 0.0, || e.to_string()));
            Value::Null
        }
    };
    Ok((
        checks,
        json!({ "a": a, "b": b, "c": c, "c_minus": lo, "c_plus": hi, "surface": surface, "determinant": det, "phases": phases }),
    ))
}

fn run_transform(
    kraus: Option<Vec<ComplexRows>>,
    unitary: Option<ComplexRows>,
    seed: u64,
) -> Result<(Vec<CheckReport>, Value)> {
    let (set, is_unitary) = match (kraus, unitary) {
        (Some(k), None) => (crate::io::kraus_from_json(&k)?, false),
        (None, Some(u)) => (KrausSet::new(vec![matrix_from_complex_rows(&u)?])?, true),
        _ => {
            return Err(GptError::Config(
                "transform needs exactly one of `kraus` or `unitary`".into(),
            ))
        }
    };
    let n = set.dimension();
    let theory = Theory::quantum(n)?;
    let z = if is_unitary {
        crate::dynamics::z_from_unitary(&set.ops()[0], theory.frame(), theory.d())?
    } else {
        z_from_kraus(&set, theory.frame(), theory.d())?
    };
    let completeness = set.completeness_deviation();
    let effect_max = hermitian_eigenvalues(&set.effect_sum())
        .last()
        .copied()
        .unwrap_or(0.0);
    let sup = Superoperator::Kraus(set.clone());
    let cp = is_completely_positive(&sup)?;
    let choi_min = hermitian_eigenvalues(&choi_matrix(&sup)?)[0];

    let mut rng = split_rng(seed, 0);
    let mut max_dev = 0.0_f64;
    for _ in 0..10 {
        let rho = crate::sampling::random_density(n, &mut rng);
        let direct = crate::dynamics::transformed_p(&set, &rho, &theory)?;
        let p = theory.p_from_density(&DensityOperator::new(rho))?;
        let via_z = z.matrix() * p.values();
        max_dev = max_dev.max(crate::linalg::max_abs_diff_vec(&direct, &via_z));
    }
    let mut checks = vec![
        check(
            "trace_nonincreasing",
            effect_max <= 1.0 + LINALG_TOL,
            (effect_max - 1.0).max(0.0),
            || format!("largest eigenvalue of sum M^dag M is {effect_max}"),
        ),
        check("completely_positive", cp, choi_min.min(0.0).abs(), || {
            format!("Choi eigenvalue {choi_min:e}")
        }),
        check("z_correspondence", max_dev < 1e-10, max_dev, || {
            format!("Z p deviates by {max_dev:e}")
        }),
    ];
    if is_unitary {
        let witnesses = theory.basis_states();
        let ok = is_reversible(&z, &theory, &witnesses);
        checks.push(check("reversible", ok, 0.0, || {
            "unitary transform is not reversible".into()
        }));
    }
    Ok((
        checks,
        json!({ "n": n, "K": z.k(), "completeness_deviation": completeness, "z": crate::io::real_rows(z.matrix()) }),
    ))
}

fn run_composite(n_a: usize, n_b: usize, rho: &ComplexRows) -> Result<(Vec<CheckReport>, Value)> {
    let rho = matrix_from_complex_rows(rho)?;
    let ta = Theory::quantum(n_a)?;
    let tb = Theory::quantum(n_b)?;
    let pt = composite_from_density(&rho, ta.frame(), tb.frame())?;
    let mu = pt.joint_normalization(ta.r_identity(), tb.r_identity());
    let trace = rho.trace().re;
    let dof = dof_count_check(ta.frame(), tb.frame())?;
    let expected = ta.k() * tb.k();
    let checks = vec![
        check(
            "joint_normalization",
            (mu - trace).abs() < 1e-10,
            (mu - trace).abs(),
            || format!("mu = {mu}, trace = {trace}"),
        ),
        check("dof_rank", dof == expected, 0.0, || {
            format!("rank {dof}, expected {expected}")
        }),
    ];
    let pt_min = if n_a == 2 && n_b == 2 {
        Some(partial_transpose_min_eigenvalue(
            &pt,
            ta.frame(),
            tb.frame(),
        )?)
    } else {
        None
    };
    Ok((
        checks,
        json!({ "n_a": n_a, "n_b": n_b, "mu": mu, "dof_rank": dof, "partial_transpose_min_eigenvalue": pt_min, "p": crate::io::real_rows(&pt.p) }),
    ))
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    theory: TheoryKind,
    n: usize,
    basis: Option<usize>,
    p: Option<Vec<f64>>,
    shots: u64,
    trials: usize,
    seed: u64,
) -> Result<(Vec<CheckReport>, Value)> {
    let t = Theory::new(theory, n)?;
    let preparation = match (basis, p) {
        (Some(k), None) => {
            if k == 0 || k > n {
                return Err(GptError::IndexOutOfRange { index: k, size: n });
            }
            t.basis_states()[k - 1].clone()
        }
        (None, Some(values)) => {
            if values.len() != t.k() {
                return Err(GptError::DimensionMismatch {
                    expected: t.k(),
                    found: values.len(),
                });
            }
            PVector::from_slice(n, theory, &values)
        }
        (None, None) => PVector::null(n, theory, t.k()),
        _ => {
            return Err(GptError::Config(
                "simulate takes at most one of `basis` or `p`".into(),
            ))
        }
    };
    let partition = t.basis_measurements();
    let mut runs = Vec::new();
    let mut trial_rows = Vec::new();
    for trial in 0..trials.max(1) {
        let exp = Experiment::new(
            preparation.clone(),
            None,
            partition.clone(),
            t.r_identity().clone(),
            shots,
            seed.wrapping_add(trial as u64),
        )?;
        let counts = simulate(&exp)?;
        trial_rows.push(FrequencyTrial {
            shots,
            hits: counts.outcome(1),
        });
        runs.push((exp, counts));
    }
    let p_true = runs[0].0.probabilities()[0];
    let mut report = check_frequency_convergence(&trial_rows, p_true);
    report.check_name = "frequency_convergence".into();
    let counts: Vec<&OutcomeCounts> = runs.iter().map(|(_, c)| c).collect();
    Ok((
        vec![report],
        json!({ "theory": theory, "n": n, "shots": shots, "probabilities": runs[0].0.probabilities(), "counts": counts }),
    ))
}

fn run_continuity(
    theory: TheoryKind,
    n: usize,
    steps: usize,
    pairs: usize,
    seed: u64,
) -> Result<(Vec<CheckReport>, Value)> {
    let t = Theory::new(theory, n)?;
    let mut rng = split_rng(seed, 0);
    let mut endpoints = Vec::new();
    match theory {
        TheoryKind::Quantum => {
            for _ in 0..pairs {
                let mut pure = || -> Result<RVector> {
                    t.r_from_p(
                        &t.p_from_density(&DensityOperator::new(outer(&haar_state(n, &mut rng))))?,
                    )
                };
                endpoints.push((pure()?, pure()?));
            }
        }
        TheoryKind::Classical => {
            let basis = t.basis_state_rs();
            for i in 0..n {
                for j in (i + 1)..n {
                    endpoints.push((basis[i].clone(), basis[j].clone()));
                }
            }
        }
    }
    let mut probes = Vec::new();
    let mut max_dev = 0.0_f64;
    let mut all_pure = true;
    for (a, b) in &endpoints {
        let r = continuity_probe(a, b, steps, &t)?;
        max_dev = max_dev.max(r.max_purity_deviation);
        all_pure &= r.pure_path;
        probes.push(r);
    }
    let status = match (theory, all_pure) {
        (_, true) => CheckStatus::Pass,
        (TheoryKind::Classical, false) => CheckStatus::ExpectedFail,
        (TheoryKind::Quantum, false) => CheckStatus::Fail,
    };
    let witnesses = if all_pure {
        Vec::new()
    } else {
        vec![format!("max purity deviation {max_dev:e}")]
    };
    let report = CheckReport {
        check_name: "continuity".into(),
        status,
        witnesses,
        max_deviation: max_dev,
    };
    Ok((
        vec![report],
        json!({ "theory": theory, "n": n, "probes": probes }),
    ))
}

/// Runs one pipeline with its own seed.
pub fn run_pipeline(pipeline: &Pipeline, index: usize, seed: u64) -> Result<PipelineReport> {
    let (checks, data) = match pipeline.clone() {
        Pipeline::Frame { theory, n } => run_frame(theory, n)?,
        Pipeline::Verify { theory, n } => {
            let suite = verify_theory(theory, n, seed)?;
            (suite.checks, json!({ "theory": theory, "n": n }))
        }
        Pipeline::Bloch { a, b, c } => run_bloch(a, b, c)?,
        Pipeline::Transform { kraus, unitary } => run_transform(kraus, unitary, seed)?,
        Pipeline::Composite { n_a, n_b, rho } => run_composite(n_a, n_b, &rho)?,
        Pipeline::Simulate {
            theory,
            n,
            basis,
            p,
            shots,
            trials,
        } => run_simulate(theory, n, basis, p, shots, trials, seed)?,
        Pipeline::Continuity {
            theory,
            n,
            steps,
            pairs,
        } => run_continuity(theory, n, steps, pairs, seed)?,
    };
    Ok(PipelineReport {
        index,
        kind: pipeline.kind().to_string(),
        checks,
        data,
    })
}

/// Runs every pipeline; pipeline `i` draws randomness from `seed + i`.
pub fn run_config(config: &Config, seed_override: Option<u64>) -> Result<RunReport> {
    let seed = seed_override.unwrap_or(config.seed);
    let pipelines = config
        .pipelines
        .iter()
        .enumerate()
        .map(|(index, p)| run_pipeline(p, index, seed.wrapping_add(index as u64)))
        .collect::<Result<Vec<_>>>()?;
    let all_passed = pipelines.iter().all(PipelineReport::passed);
    Ok(RunReport {
        seed,
        all_passed,
        pipelines,
    })
}

/// Writes `report.json` and `summary.csv` into `out_dir` and returns the report.
pub fn run_report(
    config_path: &Path,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<(RunReport, PathBuf, PathBuf)> {
    let config = Config::load(config_path)?;
    let report = run_config(&config, seed_override)?;
    std::fs::create_dir_all(out_dir)?;
    let json_path = out_dir.join("report.json");
    let csv_path = out_dir.join("summary.csv");
    crate::io::write_json(&json_path, &report)?;
    std::fs::write(&csv_path, report.summary_csv())?;
    Ok((report, json_path, csv_path))
}

/// Equal mixture of two p-vectors (used by the examples and tests).
pub fn equal_mixture(a: &PVector, b: &PVector) -> Result<PVector> {
    mix(&[a.clone(), b.clone()], &[0.5, 0.5])
}
