//! Acceptance suite: one pass/fail line per criterion.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use eqstab::groups::{circle_average, CircleIntegrand, CircleWeights, FiniteGroup, GroupSpec};
use eqstab::homcorrect::{self, ApproxRep, LiftOptions};
use eqstab::matca::{self, c, CMatrix, C64, EPS};
use eqstab::relations;
use eqstab::sample;
use eqstab_cli::runner::{self, Status, TrialReport};
use eqstab_cli::scenario::{Kind, Magnitude, Scenario, TowerSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn scenario(kind: Kind, group: GroupSpec, dimension: usize, magnitude: Magnitude, seed: u64, trials: usize) -> Scenario {
    Scenario {
        name: None,
        kind,
        group,
        dimension,
        magnitude,
        seed,
        trials,
        tower: None,
        quotient_dimension: None,
        complement: None,
        tolerance: None,
        stress: false,
    }
}

fn cyclic(order: usize) -> GroupSpec {
    GroupSpec::Cyclic { order }
}

fn rep_groups() -> Vec<GroupSpec> {
    let mut out: Vec<GroupSpec> = (2..=6).map(cyclic).collect();
    out.push(GroupSpec::Symmetric { degree: 3 });
    out.push(GroupSpec::Dihedral { n: 4 });
    out
}

fn bound<'a>(t: &'a TrialReport, name: &str) -> Option<&'a runner::BoundCheck> {
    t.bounds.iter().find(|b| b.name == name)
}

/// Trials whose measured defect lies in `[lo, hi]`.
fn in_range(trials: &[TrialReport], lo: f64, hi: f64) -> Vec<&TrialReport> {
    trials.iter().filter(|t| t.r.is_some_and(|r| (lo..=hi).contains(&r))).collect()
}

fn run_all(list: &[Scenario]) -> Vec<TrialReport> {
    list.iter().flat_map(|s| runner::run_scenario(s).trials).collect()
}

/// Worst `value − bound` over the named checks, and whether every trial
/// carries the check and passes it.
fn worst_excess(trials: &[&TrialReport], name: &str) -> (f64, bool) {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for t in trials {
        match bound(t, name) {
            Some(b) => {
                worst = worst.max(b.value - b.bound);
                ok &= b.pass;
            }
            None => ok = false,
        }
    }
    (worst, ok)
}

fn completed(trials: &[&TrialReport]) -> bool {
    trials.iter().all(|t| t.status == Status::Completed)
}

fn rep_matrix() -> Vec<Scenario> {
    let mut out = Vec::new();
    let mut seed = 100;
    for g in rep_groups() {
        for n in 2..=8 {
            seed += 1;
            out.push(scenario(
                Kind::Rep,
                g.clone(),
                n,
                Magnitude::Range { min: 0.0008, max: 0.015 },
                seed,
                12,
            ));
        }
    }
    out
}

fn criterion_1_and_2() -> (Verdict, Verdict) {
    let start = Instant::now();
    let trials = run_all(&rep_matrix());
    let elapsed = start.elapsed();
    let scoped = in_range(&trials, 1e-3, 0.05);
    let (one_defect, ok_d) = worst_excess(&scoped, "one-step defect 17r^2");
    let (one_disp, ok_p) = worst_excess(&scoped, "one-step displacement 2r");
    let c1 = verdict(
        scoped.len() >= 500 && completed(&scoped) && ok_d && ok_p && elapsed < Duration::from_secs(30),
        format!(
            "{} trials in range; worst defect - 17r^2 = {one_defect:.2e}; worst displacement - 2r = {one_disp:.2e}; {:.1} s",
            scoped.len(),
            elapsed.as_secs_f64()
        ),
    );

    let (fin, ok_f) = worst_excess(&scoped, "final defect tolerance");
    let (its, ok_i) = worst_excess(&scoped, "iterations");
    let (dist, ok_t) = worst_excess(&scoped, "distance 2r/(1-17r)");
    let max_final = scoped
        .iter()
        .filter_map(|t| bound(t, "final defect tolerance"))
        .map(|b| b.value)
        .fold(0.0, f64::max);

    let mut towers = Vec::new();
    for (i, g) in rep_groups().into_iter().enumerate() {
        let mut s = scenario(Kind::Rep, g, 3, Magnitude::Range { min: 0.001, max: 0.01 }, 500 + i as u64, 8);
        s.quotient_dimension = Some(2);
        towers.push(s);
    }
    let quotient_trials = run_all(&towers);
    let q: Vec<&TrialReport> = quotient_trials.iter().collect();
    let (kappa, ok_k) = worst_excess(&q, "quotient image unchanged");
    let (qfin, ok_qf) = worst_excess(&q, "final defect tolerance");
    let c2 = verdict(
        completed(&scoped) && ok_f && ok_i && ok_t && completed(&q) && ok_k && ok_qf,
        format!(
            "max final defect {max_final:.2e} (worst excess {fin:.2e}); max iterations - 20 = {its}; worst distance excess {dist:.2e}; {} quotient trials, max image change {kappa:.2e}, worst final excess {qfin:.2e}",
            q.len()
        ),
    );
    (c1, c2)
}

fn criterion_3() -> Verdict {
    let mut list = Vec::new();
    let groups = [cyclic(3), GroupSpec::Symmetric { degree: 3 }, GroupSpec::Dihedral { n: 4 }, cyclic(5)];
    for (i, g) in groups.into_iter().enumerate() {
        list.push(scenario(
            Kind::IntegralEstimate,
            g,
            2 + i,
            Magnitude::List(vec![0.1, 0.3, 0.45]),
            300 + i as u64,
            51,
        ));
    }
    let trials = run_all(&list);
    let all: Vec<&TrialReport> = trials.iter().collect();
    let (lhs, ok_l) = worst_excess(&all, "integral estimate 5r^2/(2(1-2r))");
    let (avg, ok_a) = worst_excess(&all, "norm of the average");
    verdict(
        all.len() >= 200 && completed(&all) && ok_l && ok_a,
        format!("{} trials; worst lhs - bound = {lhs:.2e}; worst norm - 1 = {avg:.2e}", all.len()),
    )
}

fn criterion_4() -> Verdict {
    let mut list = Vec::new();
    let mut seed = 400;
    for g in rep_groups() {
        for n in [2, 3, 5] {
            seed += 1;
            list.push(scenario(Kind::Cocycle, g.clone(), n, Magnitude::Range { min: 0.0008, max: 0.02 }, seed, 22));
        }
    }
    let trials = run_all(&list);
    let scoped = in_range(&trials, 1e-3, 0.05);
    let (one, ok_o) = worst_excess(&scoped, "one-step mismatch 10r^2");
    let (disp, ok_d) = worst_excess(&scoped, "one-step displacement 2r");
    let (fin, ok_f) = worst_excess(&scoped, "trivialization mismatch tolerance");
    let (dist, ok_t) = worst_excess(&scoped, "distance 2r/(1-10r)");
    verdict(
        scoped.len() >= 300 && completed(&scoped) && ok_o && ok_d && ok_f && ok_t,
        format!(
            "{} trials in range; worst excess: one-step {one:.2e}, displacement {disp:.2e}, final {fin:.2e}, distance {dist:.2e}",
            scoped.len()
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let groups: Vec<Arc<FiniteGroup>> = rep_groups().iter().map(|g| Arc::new(g.build().unwrap())).collect();
    let mut worst: f64 = 0.0;
    let mut worst_kappa: f64 = 0.0;
    let mut failures = 0;
    let mut pairs = 0;
    let mut gaps: f64 = 0.0;
    while pairs < 200 {
        let g = &groups[rng.random_range(0..groups.len())];
        let n = rng.random_range(2..=6);
        let rho = sample::exact_rep(g, n, &mut rng);
        let w = sample::perturbation_unitary(n, rng.random_range(0.01..0.45), &mut rng);
        let sigma: Vec<CMatrix> = rho.iter().map(|x| &w * x * w.adjoint()).collect();
        let gap = homcorrect::max_distance(&rho, &sigma);
        if gap >= 1.0 {
            continue;
        }
        pairs += 1;
        gaps = gaps.max(gap);
        let rho = ApproxRep::new(g.clone(), rho).unwrap();
        let sigma = ApproxRep::new(g.clone(), sigma).unwrap();
        match homcorrect::intertwiner(&rho, &sigma, None) {
            Ok(u) => {
                worst = worst.max(rho.conjugate(&u).distance(&sigma));
                worst = worst.max(matca::unitarity_defect(&u));
            }
            Err(_) => failures += 1,
        }
    }
    let mut towers = 0;
    while towers < 50 {
        let g = &groups[rng.random_range(0..groups.len())];
        let (n, k) = (rng.random_range(1..=4), rng.random_range(1..=3));
        let top = sample::exact_rep(g, n, &mut rng);
        let bottom = sample::exact_rep(g, k, &mut rng);
        let w = matca::direct_sum(&[sample::perturbation_unitary(n, rng.random_range(0.01..0.3), &mut rng), matca::identity(k)]);
        let rho: Vec<CMatrix> = top.iter().zip(&bottom).map(|(a, b)| matca::direct_sum(&[a.clone(), b.clone()])).collect();
        let sigma: Vec<CMatrix> = rho.iter().map(|x| &w * x * w.adjoint()).collect();
        if homcorrect::max_distance(&rho, &sigma) >= 1.0 {
            continue;
        }
        towers += 1;
        let kappa = move |x: &CMatrix| -> eqstab::Result<CMatrix> { Ok(x.view((n, n), (k, k)).into_owned()) };
        let rho = ApproxRep::new(g.clone(), rho).unwrap();
        let sigma = ApproxRep::new(g.clone(), sigma).unwrap();
        match homcorrect::intertwiner(&rho, &sigma, Some(&kappa)) {
            Ok(u) => {
                worst = worst.max(rho.conjugate(&u).distance(&sigma));
                worst_kappa = worst_kappa.max(matca::dist(&kappa(&u).unwrap(), &matca::identity(k)));
            }
            Err(_) => failures += 1,
        }
    }
    verdict(
        failures == 0 && worst <= 1e-11 && worst_kappa <= 1e-11,
        format!(
            "{pairs} pairs (largest gap {gaps:.3}) and {towers} tower pairs; {failures} failures; max |u rho u* - sigma| {worst:.2e}; max |kappa(u) - 1| {worst_kappa:.2e}"
        ),
    )
}

/// Independent check of a translation-tower lift: the seed equivariance
/// per junk block, the expected level and the defects of the answer.
fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut levels = Vec::new();
    for trial in 0..50 {
        let d = rng.random_range(2..=4);
        let junk = rng.random_range(2..=7);
        let start = rng.random_range(0.05..0.6);
        let decay = rng.random_range(0.1..0.4);
        let spec = TowerSpec { levels: junk, decay };
        let fixture = sample::translation_tower(d, &spec.rates(start), &mut rng).unwrap();
        let zeta = C64::from_polar(1.0, std::f64::consts::TAU / d as f64);
        // shift_g e_k = e_{k+g}; the translation action multiplies u_h by ζ^{−gh}.
        let shift = |g: usize| {
            let mut s = matca::zeros(d);
            for k in 0..d {
                s[((k + g) % d, k)] = c(1.0, 0.0);
            }
            s
        };
        let block = |x: &CMatrix, k: usize| x.view((k * d, k * d), (d, d)).into_owned();
        let block_equivariance = |k: usize| {
            let mut e: f64 = 0.0;
            for g in 0..d {
                let sg = shift(g);
                for h in 0..d {
                    let lhs = &sg * block(&fixture.seed[h], k) * sg.adjoint();
                    let rhs = block(&fixture.seed[h], k) * zeta.powi(-((g * h) as i32));
                    e = e.max(matca::dist(&lhs, &rhs));
                }
            }
            e
        };
        let per_block: Vec<f64> = (0..junk).map(block_equivariance).collect();
        let oracle_level = (0..=junk).find(|&n| per_block[n..].iter().all(|&e| e < EPS));
        match homcorrect::lift_group_rep(&fixture.tower, &fixture.action, &fixture.phi, LiftOptions::with_seed(&fixture.seed)) {
            Ok(lift) => {
                levels.push(lift.level);
                let kept = junk + 1 - lift.level;
                let vals = lift.rep.values();
                let mut table: f64 = 0.0;
                let mut equi: f64 = 0.0;
                for g in 0..d {
                    for h in 0..d {
                        table = table.max(matca::dist(&(&vals[g] * &vals[h]), &vals[(g + h) % d]));
                        let sg = matca::direct_sum(&vec![shift(g); kept]);
                        let lhs = &sg * &vals[h] * sg.adjoint();
                        equi = equi.max(matca::dist(&lhs, &(&vals[h] * zeta.powi(-((g * h) as i32)))));
                    }
                }
                let proj = (0..d)
                    .map(|h| matca::dist(&block(&vals[h], kept - 1), &fixture.phi[h]))
                    .fold(0.0, f64::max);
                worst = worst.max(table).max(equi).max(proj);
                let level_ok = match oracle_level {
                    Some(n) => lift.level == n || lift.table.iter().any(|&(m, _, dd)| m == n && dd >= homcorrect::LEVEL_LIMIT),
                    None => false,
                };
                if table > 1e-11 || equi > 1e-11 || proj > 1e-11 || !level_ok {
                    failures.push(format!("tower {trial}: level {} (oracle {:?})", lift.level, oracle_level));
                }
            }
            Err(e) => failures.push(format!("tower {trial}: {e}")),
        }
    }
    let deepest = levels.iter().copied().max().unwrap_or(0);
    verdict(
        failures.is_empty(),
        format!(
            "50 towers, levels used up to {deepest}; max independent defect {worst:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut list = Vec::new();
    let mut seed = 700;
    for d in [2usize, 3, 4] {
        let threshold = relations::admissibility_threshold(d);
        for m in 1..=12 / d {
            seed += 1;
            list.push(scenario(
                Kind::Rokhlin,
                cyclic(d),
                d * m,
                Magnitude::Range { min: threshold / 40.0, max: threshold / 4.0 },
                seed,
                10,
            ));
        }
    }
    let trials = run_all(&list);
    let scoped: Vec<&TrialReport> = trials.iter().filter(|t| t.metrics.get("within_threshold") == Some(&1.0)).collect();
    let checks = ["equivariance a_g(e_h) = e_gh", "orthogonal projections", "sum equals 1"];
    let mut ok = scoped.len() >= 100 && completed(&scoped);
    let mut worst = f64::NEG_INFINITY;
    for name in checks {
        let (w, pass) = worst_excess(&scoped, name);
        worst = worst.max(w);
        ok &= pass;
    }
    let disp = scoped.iter().filter_map(|t| t.metrics.get("displacement")).copied().fold(0.0, f64::max);
    let reported = scoped.iter().all(|t| t.metrics.contains_key("displacement"));

    let mut tracial = Vec::new();
    for (i, d) in [2usize, 3].into_iter().enumerate() {
        let mut s = scenario(Kind::Tracial, cyclic(d), 2 * d, Magnitude::Fixed(relations::admissibility_threshold(d) / 8.0), 780 + i as u64, 10);
        s.complement = Some(1 + i);
        tracial.push(s);
    }
    let tr = run_all(&tracial);
    let tr: Vec<&TrialReport> = tr.iter().collect();
    let mut tr_ok = completed(&tr);
    let mut tr_worst = f64::NEG_INFINITY;
    for name in ["equivariance a_g(e_h) = e_gh", "orthogonal projections", "sum equals the invariant corner"] {
        let (w, pass) = worst_excess(&tr, name);
        tr_worst = tr_worst.max(w);
        tr_ok &= pass;
    }
    let bookkeeping = tr
        .iter()
        .all(|t| ["corner_rank", "complement_rank", "witness_norm", "commutator_norm"].iter().all(|k| t.metrics.contains_key(*k)));
    verdict(
        ok && reported && tr_ok && bookkeeping,
        format!(
            "{} in-threshold trials, worst residual {worst:.2e}, max displacement {disp:.2e}; {} tracial trials, worst residual {tr_worst:.2e}, bookkeeping {}",
            scoped.len(),
            tr.len(),
            if bookkeeping { "reported" } else { "missing" }
        ),
    )
}

fn criterion_8() -> Verdict {
    let list: Vec<Scenario> = [2usize, 3, 4]
        .into_iter()
        .enumerate()
        .map(|(i, d)| scenario(Kind::Graded, cyclic(d), d, Magnitude::Range { min: 1e-4, max: 1e-3 }, 800 + i as u64, 34))
        .collect();
    let trials = run_all(&list);
    let all: Vec<&TrialReport> = trials.iter().collect();
    let (fin, ok_f) = worst_excess(&all, "final defect tolerance");
    let (comp, ok_c) = worst_excess(&all, "iterate component membership");
    let (dist, ok_d) = worst_excess(&all, "distance 2(6e0)/(1-17(6e0))");
    verdict(
        all.len() >= 100 && completed(&all) && ok_f && ok_c && ok_d,
        format!(
            "{} trials; worst final excess {fin:.2e}; max iterate component gap {comp:.2e}; worst distance excess {dist:.2e}",
            all.len()
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut covariance: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..50 {
        let n = rng.random_range(1..=6);
        let weights: Vec<i64> = (0..n).map(|_| rng.random_range(-4..=4)).collect();
        let integrand = CircleIntegrand {
            weights: CircleWeights(weights),
            base: sample::gaussian_matrix(n, &mut rng),
            monomial: rng.random_range(-4..=4),
        };
        let (a, b) = match (circle_average(&integrand, None), circle_average(&integrand, Some(integrand.default_nodes() + 1))) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                failures += 1;
                continue;
            }
        };
        agreement = agreement.max(matca::dist(&a.value, &b.value));
        for _ in 0..8 {
            let eta = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let moved = integrand.weights.act(eta, &a.value);
            let expected = &a.value * eta.powi(-(integrand.monomial as i32));
            covariance = covariance.max(matca::dist(&moved, &expected));
        }
    }
    verdict(
        failures == 0 && covariance <= 1e-12 && agreement <= 1e-13,
        format!("50 integrands; max covariance error {covariance:.2e}; max N vs N+1 difference {agreement:.2e}"),
    )
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().expect("temporary directory");
    let start = Instant::now();
    let run = Command::new(env!("CARGO_BIN_EXE_eqstab"))
        .arg("suite")
        .arg("--out")
        .arg(dir.path())
        .output();
    let elapsed = start.elapsed();
    match run {
        Ok(out) => verdict(
            out.status.code() == Some(0) && elapsed < Duration::from_secs(300),
            format!("exit {:?} in {:.1} s", out.status.code(), elapsed.as_secs_f64()),
        ),
        Err(e) => verdict(false, format!("could not start the binary: {e}")),
    }
}

fn main() -> ExitCode {
    let (c1, c2) = criterion_1_and_2();
    let results = [
        ("one-step bound", c1),
        ("full correction", c2),
        ("integral estimate", criterion_3()),
        ("cocycle engine", criterion_4()),
        ("intertwiner", criterion_5()),
        ("end-to-end lifting", criterion_6()),
        ("Rokhlin exactness", criterion_7()),
        ("graded correction", criterion_8()),
        ("circle averaging", criterion_9()),
        ("suite subcommand", criterion_10()),
    ];
    let mut all = true;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("criterion {:>2} {:<20} {}  {}", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        all &= v.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
