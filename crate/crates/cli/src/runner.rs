//! Build perturbed instances, run the correctors and check every bound.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use eqstab::cocycle::{self, Cocycle};
use eqstab::galg::GAlgebra;
use eqstab::graded::{self, GradedAlgebra};
use eqstab::groups::FiniteGroup;
use eqstab::homcorrect::{self, ApproxRep, LiftOptions, TraceRow};
use eqstab::matca::{self, CMatrix};
use eqstab::relations;
use eqstab::sample;
use eqstab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::perturb;
use crate::scenario::{Kind, Magnitude, Scenario};

/// Iteration budget of the full correction in reported runs.
pub const ITERATION_BUDGET: usize = 20;

/// One measured quantity against a bound; passes when
/// `value ≤ bound + slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: &str, value: f64, bound: f64, slack: f64) -> Self {
        BoundCheck {
            name: name.to_string(),
            value,
            bound,
            slack,
            pass: value <= bound + slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The correctors ran; see the bound checks.
    Completed,
    /// The instance fell outside a corrector's precondition.
    Rejected,
    /// The corrector failed or a bound was violated inside it.
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub magnitude: f64,
    pub r: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub bounds: Vec<BoundCheck>,
    pub metrics: BTreeMap<String, f64>,
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl TrialReport {
    /// Whether this trial counts as a pass for a scenario with the given
    /// stress flag.
    pub fn passed(&self, stress: bool) -> bool {
        match self.status {
            Status::Completed => self.bounds.iter().all(|b| b.pass),
            Status::Rejected => stress,
            Status::Failed => false,
        }
    }

    /// Names of the violated bounds, or the failure reason.
    pub fn violations(&self, stress: bool) -> Vec<String> {
        let mut out: Vec<String> = self
            .bounds
            .iter()
            .filter(|b| !b.pass)
            .map(|b| format!("{} ({:.3e} > {:.3e})", b.name, b.value, b.bound + b.slack))
            .collect();
        match self.status {
            Status::Rejected if !stress => out.push(format!(
                "precondition: {}",
                self.message.as_deref().unwrap_or("rejected")
            )),
            Status::Failed if out.is_empty() => out.push(format!(
                "failure: {}",
                self.message.as_deref().unwrap_or("corrector failed")
            )),
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub passed: bool,
    pub completed: usize,
    pub rejected: usize,
    pub failed: usize,
    pub violations: Vec<String>,
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub trials: Vec<TrialReport>,
}

/// The generator of trial `trial`: ChaCha8 seeded with `seed`, stream
/// `trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Magnitude used by `trial`. Range draws consume the first uniform of
/// the trial stream.
pub fn pick_magnitude(m: &Magnitude, trial: usize, rng: &mut ChaCha8Rng) -> f64 {
    match m {
        Magnitude::Fixed(x) => *x,
        Magnitude::List(xs) => xs[trial % xs.len()],
        Magnitude::Range { min, max } => {
            let u: f64 = rng.random();
            (min.ln() + u * (max.ln() - min.ln())).exp()
        }
    }
}

/// Run every trial of a scenario (in parallel, merged in trial order).
pub fn run_scenario(s: &Scenario) -> ScenarioReport {
    let start = Instant::now();
    let trials: Vec<TrialReport> = (0..s.trials).into_par_iter().map(|t| run_trial(s, t)).collect();
    summarize(s, trials, start.elapsed().as_secs_f64() * 1e3)
}

fn summarize(s: &Scenario, trials: Vec<TrialReport>, wall_time_ms: f64) -> ScenarioReport {
    let count = |st: Status| trials.iter().filter(|t| t.status == st).count();
    let mut violations = Vec::new();
    for t in &trials {
        for v in t.violations(s.stress) {
            violations.push(format!("trial {}: {v}", t.trial));
        }
    }
    ScenarioReport {
        scenario: s.clone(),
        passed: trials.iter().all(|t| t.passed(s.stress)),
        completed: count(Status::Completed),
        rejected: count(Status::Rejected),
        failed: count(Status::Failed),
        violations,
        wall_time_ms,
        trials,
    }
}

#[derive(Default)]
struct Outcome {
    r: Option<f64>,
    bounds: Vec<BoundCheck>,
    metrics: BTreeMap<String, f64>,
    trace: Vec<TraceRow>,
}

impl Outcome {
    fn check(&mut self, name: &str, value: f64, bound: f64, slack: f64) {
        self.bounds.push(BoundCheck::new(name, value, bound, slack));
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

pub fn run_trial(s: &Scenario, trial: usize) -> TrialReport {
    let start = Instant::now();
    let mut rng = trial_rng(s.seed, trial);
    let magnitude = pick_magnitude(&s.magnitude, trial, &mut rng);
    let mut out = Outcome::default();
    let result = match s.group.build() {
        Ok(g) => {
            let g = Arc::new(g);
            match s.kind {
                Kind::Rep => run_rep(s, &g, magnitude, &mut rng, &mut out),
                Kind::Cocycle => run_cocycle(s, &g, magnitude, &mut rng, &mut out),
                Kind::Lift => run_lift(s, &g, magnitude, &mut rng, &mut out),
                Kind::Rokhlin => run_rokhlin(s, &g, magnitude, &mut rng, &mut out),
                Kind::Tracial => run_tracial(s, &g, magnitude, &mut rng, &mut out),
                Kind::Graded => run_graded(s, &g, magnitude, &mut rng, &mut out),
                Kind::IntegralEstimate => run_estimate(s, &g, magnitude, &mut rng, &mut out),
            }
        }
        Err(e) => Err(e),
    };
    let (status, message) = match result {
        Ok(()) => (Status::Completed, None),
        Err(e) => {
            let message = Some(e.to_string());
            match e {
                Error::Precondition { .. }
                | Error::MidpointCollision { .. }
                | Error::NearSingular { .. }
                | Error::ForbiddenBand { .. }
                | Error::BranchCut { .. } => (Status::Rejected, message),
                Error::BoundViolation { name, value, bound } => {
                    out.check(name, value, bound, 0.0);
                    (Status::Failed, message)
                }
                _ => (Status::Failed, message),
            }
        }
    };
    TrialReport {
        trial,
        magnitude,
        r: out.r,
        status,
        message,
        bounds: out.bounds,
        metrics: out.metrics,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        trace: out.trace,
    }
}

fn block(x: &CMatrix, offset: usize, size: usize) -> CMatrix {
    x.view((offset, offset), (size, size)).into_owned()
}

fn run_rep(s: &Scenario, g: &Arc<FiniteGroup>, eps: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let n = s.dimension;
    let exact = sample::exact_rep(g, n, rng);
    let p = perturb::perturb_unitaries(g, &exact, eps, rng);
    let (exact, values) = match s.quotient_dimension {
        Some(k) => {
            let fixed = sample::exact_rep(g, k, rng);
            let join = |a: &[CMatrix]| -> Vec<CMatrix> {
                a.iter().zip(&fixed).map(|(x, y)| matca::direct_sum(&[x.clone(), y.clone()])).collect()
            };
            (join(&exact), join(&p.values))
        }
        None => (exact, p.values),
    };
    let rho0 = ApproxRep::new(g.clone(), values)?;
    let r = homcorrect::defect(&rho0);
    out.r = Some(r);
    out.metric("defect_per_magnitude", if eps > 0.0 { r / eps } else { 0.0 });

    if r <= homcorrect::ONE_STEP_LIMIT {
        let sigma = homcorrect::one_step(&rho0)?;
        out.check("one-step defect 17r^2", homcorrect::defect(&sigma), 17.0 * r * r, 1e-10);
        out.check("one-step displacement 2r", sigma.distance(&rho0), 2.0 * r, 1e-10);
    }

    let kappa = s
        .quotient_dimension
        .map(|k| move |x: &CMatrix| -> eqstab::Result<CMatrix> { Ok(block(x, n, k)) });
    let kappa_ref: Option<homcorrect::Quotient> = kappa.as_ref().map(|f| f as homcorrect::Quotient);
    let corr = homcorrect::correct_to_rep(&rho0, s.tol(), kappa_ref)?;
    out.trace = corr.trace.clone();
    out.check("final defect tolerance", corr.final_defect, s.tol(), 0.0);
    out.check("iterations", corr.iterations as f64, ITERATION_BUDGET as f64, 0.0);
    out.check("distance 2r/(1-17r)", corr.distance, homcorrect::correction_bound(r), 1e-9);
    if let Some(kappa) = kappa_ref {
        let moved = rho0
            .values()
            .iter()
            .zip(corr.rep.values())
            .map(|(a, b)| Ok(matca::dist(&kappa(a)?, &kappa(b)?)))
            .collect::<eqstab::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.check("quotient image unchanged", moved, 0.0, 1e-12);
    }

    let exact = ApproxRep::new(g.clone(), exact)?;
    let u = homcorrect::intertwiner(&exact, &corr.rep, kappa_ref)?;
    out.check("intertwiner u rho u* = sigma", exact.conjugate(&u).distance(&corr.rep), 0.0, 1e-11);
    if let Some(kappa) = kappa_ref {
        let k = kappa(&u)?;
        out.check("quotient of intertwiner is 1", matca::dist(&k, &matca::identity(k.nrows())), 0.0, 1e-11);
    }
    out.metric("iterations", corr.iterations as f64);
    out.metric("distance", corr.distance);
    Ok(())
}

fn run_cocycle(s: &Scenario, g: &Arc<FiniteGroup>, eps: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let n = s.dimension;
    let alg = GAlgebra::inner(g.clone(), vec![sample::exact_rep(g, n, rng)])?;
    let u = sample::haar_unitary(n, rng);
    let w = Cocycle::coboundary(alg, &u)?;
    let v0 = if eps == 0.0 {
        u.clone()
    } else {
        &u * sample::perturbation_unitary(n, eps, rng)
    };
    let r = cocycle::mismatch(&w, &v0).0;
    out.r = Some(r);
    out.metric("cocycle_defect", cocycle::cocycle_defect(&w));

    if r <= cocycle::ONE_STEP_LIMIT {
        let z = cocycle::one_step_cobound(&w, &v0)?;
        out.check("one-step mismatch 10r^2", cocycle::mismatch(&w, &z).0, 10.0 * r * r, 1e-10);
        out.check("one-step displacement 2r", matca::dist(&z, &v0), 2.0 * r, 1e-10);
    }
    let t = cocycle::trivialize(&w, Some(&v0), s.tol(), None)?;
    out.trace = t.trace.clone();
    out.check("trivialization mismatch tolerance", t.final_mismatch, s.tol(), 0.0);
    out.check("distance 2r/(1-10r)", t.distance, cocycle::trivialization_bound(r), 1e-9);
    out.metric("iterations", t.iterations as f64);
    Ok(())
}

fn run_lift(s: &Scenario, g: &Arc<FiniteGroup>, eps: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let d = g.order();
    let spec = s.tower.as_ref().expect("validated: lift scenarios carry a tower");
    let fixture = sample::translation_tower(d, &spec.rates(eps), rng)?;
    let lift = homcorrect::lift_group_rep(&fixture.tower, &fixture.action, &fixture.phi, LiftOptions::with_seed(&fixture.seed))?;
    let r = lift.correction.initial_defect;
    out.r = Some(r);
    out.trace = lift.correction.trace.clone();
    out.check("lift defect", lift.defect, 0.0, 1e-11);
    out.check("lift equivariance", lift.equivariance_defect, 0.0, 1e-11);
    out.check("projection onto phi", lift.projection_error, 0.0, 1e-11);
    out.check("distance 2r/(1-17r)", lift.correction.distance, homcorrect::correction_bound(r), 1e-9);
    out.metric("level", lift.level as f64);
    out.metric("levels", (fixture.tower.top() + 1) as f64);
    for &(n, f, dd) in &lift.table {
        out.metric(&format!("level_{n:02}_equivariance"), f);
        if dd.is_finite() {
            out.metric(&format!("level_{n:02}_defect"), dd);
        }
    }
    Ok(())
}

fn partition_checks(out: &mut Outcome, projection: f64, orthogonality: f64, sum: f64, equivariance: f64, sum_name: &str) {
    out.check("equivariance a_g(e_h) = e_gh", equivariance, 0.0, 1e-12);
    out.check("orthogonal projections", projection.max(orthogonality), 0.0, 1e-12);
    out.check(sum_name, sum, 0.0, 1e-12);
}

fn run_rokhlin(s: &Scenario, g: &Arc<FiniteGroup>, eps: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let d = g.order();
    let (alg, exact) = rokhlin_instance(g, s.dimension / d, rng)?;
    let p = perturb::perturb_partition(&alg, &exact, eps, rng);
    out.r = Some(p.defect);
    let res = relations::stabilize_partition(&alg, &p.values)?;
    partition_checks(
        out,
        res.projection_defect,
        res.orthogonality_defect,
        res.sum_defect,
        res.equivariance_defect,
        "sum equals 1",
    );
    out.metric("displacement", res.displacement);
    out.metric("threshold", res.threshold);
    out.metric("within_threshold", f64::from(u8::from(p.defect <= res.threshold)));
    out.metric("unitarity_gap", res.unitarity_gap);
    out.metric("midpoint_gap", res.midpoint_gap);
    out.metric("symmetrized_displacement", res.symmetrized_displacement);
    out.trace = vec![
        TraceRow { iteration: 0, defect: p.defect, distance: 0.0 },
        TraceRow { iteration: 1, defect: res.exactness(), distance: res.displacement },
    ];
    Ok(())
}

/// `M_{d·m}` over the cyclic group `g` (in its own element order), with
/// the exactly permuted partition.
fn rokhlin_instance(g: &Arc<FiniteGroup>, m: usize, rng: &mut ChaCha8Rng) -> eqstab::Result<(GAlgebra, Vec<CMatrix>)> {
    let n = g.order() * m;
    let w = sample::haar_unitary(n, rng);
    let conj = |x: CMatrix| &w * x * w.adjoint();
    let units = sample::coset_rep(g, g.identity())
        .into_iter()
        .map(|p| conj(matca::kron(&p, &matca::identity(m))))
        .collect();
    let alg = GAlgebra::full_matrix(g.clone(), units)?;
    // The regular representation sends basis vector k to mul(h, k).
    let family = g
        .elements()
        .map(|k| conj(matca::kron(&matca::matrix_unit(g.order(), k, k), &matca::identity(m))))
        .collect();
    Ok((alg, family))
}

fn run_tracial(s: &Scenario, g: &Arc<FiniteGroup>, eps: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let d = g.order();
    let m = s.dimension / d;
    let extra = s.complement.unwrap_or(1);
    let n = d * m + extra;
    let w = sample::haar_unitary(n, rng);
    let conj = |x: CMatrix| &w * x * w.adjoint();
    let units = sample::coset_rep(g, g.identity())
        .into_iter()
        .map(|p| conj(matca::direct_sum(&[matca::kron(&p, &matca::identity(m)), matca::identity(extra)])))
        .collect();
    let alg = GAlgebra::full_matrix(g.clone(), units)?;
    let exact: Vec<CMatrix> = g
        .elements()
        .map(|k| {
            conj(matca::direct_sum(&[
                matca::kron(&matca::matrix_unit(d, k, k), &matca::identity(m)),
                matca::zeros(extra),
            ]))
        })
        .collect();
    let p = perturb::perturb_partition(&alg, &exact, eps, rng);
    out.r = Some(p.defect);
    let witness = conj(matca::matrix_unit(n, 0, 0));
    let res = relations::stabilize_tracial_partition(&alg, &p.values, &witness, std::slice::from_ref(&witness))?;
    partition_checks(
        out,
        res.projection_defect,
        res.orthogonality_defect,
        res.sum_defect,
        res.equivariance_defect,
        "sum equals the invariant corner",
    );
    out.metric("corner_rank", res.corner_rank as f64);
    out.metric("complement_rank", res.complement_rank as f64);
    out.metric("witness_norm", res.witness_norm);
    out.metric("commutator_norm", res.commutator_norms.iter().copied().fold(0.0, f64::max));
    out.metric("displacement", res.displacement);
    let exactness = res
        .projection_defect
        .max(res.orthogonality_defect)
        .max(res.equivariance_defect);
    out.trace = vec![
        TraceRow { iteration: 0, defect: p.defect, distance: 0.0 },
        TraceRow { iteration: 1, defect: exactness, distance: res.displacement },
    ];
    Ok(())
}

fn run_graded(s: &Scenario, g: &Arc<FiniteGroup>, eps: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let (base, units) = GradedAlgebra::regular_model(g.clone())?;
    let v = sample::haar_unitary(base.dim(), rng);
    let alg = base.conjugated(&v)?;
    let units: Vec<CMatrix> = units.iter().map(|x| &v * x * v.adjoint()).collect();
    let p = perturb::perturb_unitaries(g, &units, eps, rng);
    let res = graded::graded_correct(&alg, &p.values, s.tol())?;
    let r = res.correction.initial_defect;
    out.r = Some(r);
    out.trace = res.correction.trace.clone();
    out.check("final defect tolerance", res.correction.final_defect, s.tol(), 0.0);
    out.check(
        "iterate component membership",
        res.component_trace.iter().copied().fold(0.0, f64::max),
        0.0,
        1e-12,
    );
    out.check("distance 2(6e0)/(1-17(6e0))", res.correction.distance, res.distance_bound, 1e-10);
    out.check("distance 2r/(1-17r)", res.correction.distance, homcorrect::correction_bound(r), 1e-9);
    out.metric("seed_component_gap", res.seed_gap);
    out.metric("input_defect", p.defect);
    out.metric("iterations", res.correction.iterations as f64);
    Ok(())
}

fn run_estimate(s: &Scenario, g: &Arc<FiniteGroup>, radius: f64, rng: &mut ChaCha8Rng, out: &mut Outcome) -> eqstab::Result<()> {
    let n = s.dimension;
    let u: Vec<CMatrix> = g.elements().map(|_| sample::unitary_near_identity(n, radius, rng)).collect();
    out.r = Some(radius);
    let est = cocycle::verify_integral_estimate(g, &u, radius)?;
    out.check("integral estimate 5r^2/(2(1-2r))", est.lhs, est.bound, 1e-10);
    out.check("norm of the average", est.average_norm, 1.0, 1e-12);
    out.trace = vec![TraceRow { iteration: 0, defect: est.lhs, distance: est.bound }];
    Ok(())
}
