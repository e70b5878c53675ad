//! Correcting approximate unitary representations of finite groups, and
//! lifting equivariant representations of a finite group `H` through a
//! tower of G-algebras.
//!
//! A unital homomorphism out of the group algebra `C*(H)` is the same thing
//! as a unitary representation of `H`, so the lifting pipeline works with
//! value tables indexed by elements of `H`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::galg::{GAlgebra, Tower};
use crate::groups::{self, FiniteGroup};
use crate::matca::{self, c, CMatrix, C64, EPS, EPS0, TOL_COMPOSED, TOL_INPUT, TOL_STEP};

/// Maximal number of correction steps.
pub const ITERATION_CAP: usize = 64;

/// Default target defect of the iterated correction.
pub const DEFAULT_TOL: f64 = TOL_STEP;

/// Largest defect accepted by a single correction step.
pub const ONE_STEP_LIMIT: f64 = 0.2;

/// Largest defect accepted by the iterated correction (exclusive).
pub const ITERATION_LIMIT: f64 = 1.0 / 17.0;

/// Largest corrected-seed defect accepted when selecting a tower level.
pub const LEVEL_LIMIT: f64 = 1.0 / 34.0;

/// A quotient map applied to matrix values.
pub type Quotient<'a> = &'a dyn Fn(&CMatrix) -> Result<CMatrix>;

/// One row of a correction trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub defect: f64,
    pub distance: f64,
}

/// Unitary-valued map on a finite group.
#[derive(Debug, Clone)]
pub struct ApproxRep {
    group: Arc<FiniteGroup>,
    values: Vec<CMatrix>,
}

impl ApproxRep {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<CMatrix>) -> Result<Self> {
        check_values(&group, &values)?;
        for (g, v) in values.iter().enumerate() {
            let residual = matca::unitarity_defect(v);
            if residual > TOL_INPUT {
                return Err(Error::Precondition {
                    quantity: "unitarity defect".into(),
                    value: residual,
                    limit: TOL_INPUT,
                    attained_at: Some(group.label(g)),
                });
            }
        }
        Ok(ApproxRep { group, values })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn value(&self, g: usize) -> &CMatrix {
        &self.values[g]
    }

    pub fn dim(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn into_values(self) -> Vec<CMatrix> {
        self.values
    }

    /// Conjugate every value by a unitary.
    pub fn conjugate(&self, v: &CMatrix) -> ApproxRep {
        let values = self.values.iter().map(|x| v * x * v.adjoint()).collect();
        ApproxRep {
            group: self.group.clone(),
            values,
        }
    }

    /// `max_g ‖self(g) − other(g)‖`.
    pub fn distance(&self, other: &ApproxRep) -> f64 {
        max_distance(&self.values, &other.values)
    }
}

fn check_values(group: &FiniteGroup, values: &[CMatrix]) -> Result<()> {
    if values.len() != group.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a group of order {}",
            values.len(),
            group.order()
        )));
    }
    let n = values[0].nrows();
    for v in values {
        if v.shape() != (n, n) {
            return Err(Error::DimensionMismatch("values must be square of one size".into()));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

/// `max_g ‖a(g) − b(g)‖`.
pub fn max_distance(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| matca::dist(x, y)).fold(0.0, f64::max)
}

/// Multiplicativity defect of a value table on `group`, with the pair
/// attaining it.
pub fn table_defect(group: &FiniteGroup, values: &[CMatrix]) -> (f64, (usize, usize)) {
    let mut worst = (0.0, (group.identity(), group.identity()));
    for g in group.elements() {
        for h in group.elements() {
            let d = matca::dist(&values[group.mul(g, h)], &(&values[g] * &values[h]));
            if d > worst.0 {
                worst = (d, (g, h));
            }
        }
    }
    worst
}

/// `max_{g,h} ‖ρ(gh) − ρ(g)ρ(h)‖`.
pub fn defect(rho: &ApproxRep) -> f64 {
    table_defect(&rho.group, &rho.values).0
}

/// The defect together with the pair `(g, h)` attaining it.
pub fn defect_with_pair(rho: &ApproxRep) -> (f64, (usize, usize)) {
    table_defect(&rho.group, &rho.values)
}

fn pair_label(group: &FiniteGroup, (g, h): (usize, usize)) -> String {
    format!("({}, {})", group.label(g), group.label(h))
}

/// `σ(g) = exp(avg_k log(ρ(k)* ρ(kg) ρ(g)*)) ρ(g)`.
pub fn one_step(rho: &ApproxRep) -> Result<ApproxRep> {
    let (r, pair) = defect_with_pair(rho);
    if r > ONE_STEP_LIMIT {
        return Err(Error::Precondition {
            quantity: "representation defect".into(),
            value: r,
            limit: ONE_STEP_LIMIT,
            attained_at: Some(pair_label(&rho.group, pair)),
        });
    }
    Ok(ApproxRep {
        group: rho.group.clone(),
        values: step_values(rho)?,
    })
}

fn step_values(rho: &ApproxRep) -> Result<Vec<CMatrix>> {
    let group = &rho.group;
    let rv = &rho.values;
    group
        .elements()
        .map(|g| {
            let logs = group
                .elements()
                .map(|k| matca::principal_log_unitary(&(rv[k].adjoint() * &rv[group.mul(k, g)] * rv[g].adjoint())))
                .collect::<Result<Vec<_>>>()?;
            let mean = matca::skew_part(&groups::average(&logs)?);
            Ok(matca::exp_skew(&mean)? * &rv[g])
        })
        .collect()
}

/// Outcome of the iterated correction.
#[derive(Debug, Clone)]
pub struct Correction {
    pub rep: ApproxRep,
    pub iterations: usize,
    pub initial_defect: f64,
    pub final_defect: f64,
    pub distance: f64,
    pub distance_bound: f64,
    pub trace: Vec<TraceRow>,
}

/// `2r/(1 − 17r)`.
pub fn correction_bound(r: f64) -> f64 {
    2.0 * r / (1.0 - 17.0 * r)
}

/// Iterate `one_step` until the defect is at most `tol`.
pub fn correct_to_rep(rho0: &ApproxRep, tol: f64, quotient: Option<Quotient>) -> Result<Correction> {
    correct_to_rep_with(rho0, tol, quotient, &mut |_, _| Ok(()))
}

/// As [`correct_to_rep`], calling `on_iterate` after every step.
pub fn correct_to_rep_with(
    rho0: &ApproxRep,
    tol: f64,
    quotient: Option<Quotient>,
    on_iterate: &mut dyn FnMut(usize, &ApproxRep) -> Result<()>,
) -> Result<Correction> {
    let (r, pair) = defect_with_pair(rho0);
    if r >= ITERATION_LIMIT {
        return Err(Error::Precondition {
            quantity: "representation defect".into(),
            value: r,
            limit: ITERATION_LIMIT,
            attained_at: Some(pair_label(&rho0.group, pair)),
        });
    }
    let downstairs = match quotient {
        Some(kappa) => {
            let images = rho0.values.iter().map(kappa).collect::<Result<Vec<_>>>()?;
            let (d, pair) = table_defect(&rho0.group, &images);
            if d > TOL_STEP {
                return Err(Error::Precondition {
                    quantity: "defect of the quotient image".into(),
                    value: d,
                    limit: TOL_STEP,
                    attained_at: Some(pair_label(&rho0.group, pair)),
                });
            }
            Some(images)
        }
        None => None,
    };

    let mut trace = vec![TraceRow {
        iteration: 0,
        defect: r,
        distance: 0.0,
    }];
    let mut current = rho0.clone();
    let mut d = r;
    let mut iterations = 0;
    while d > tol {
        if iterations == ITERATION_CAP {
            return Err(Error::NoConvergence {
                iterations,
                last: d,
                trace: trace.iter().map(|t| (t.iteration, t.defect, t.distance)).collect(),
            });
        }
        current = ApproxRep {
            group: current.group.clone(),
            values: step_values(&current)?,
        };
        iterations += 1;
        d = defect(&current);
        trace.push(TraceRow {
            iteration: iterations,
            defect: d,
            distance: current.distance(rho0),
        });
        on_iterate(iterations, &current)?;
    }

    let distance = current.distance(rho0);
    let distance_bound = correction_bound(r);
    if distance > distance_bound + TOL_INPUT {
        return Err(Error::BoundViolation {
            name: "distance 2r/(1-17r)",
            value: distance,
            bound: distance_bound,
        });
    }
    if let (Some(kappa), Some(before)) = (quotient, downstairs) {
        let after = current.values.iter().map(kappa).collect::<Result<Vec<_>>>()?;
        let moved = max_distance(&before, &after);
        if moved > TOL_STEP {
            return Err(Error::BoundViolation {
                name: "quotient image unchanged",
                value: moved,
                bound: TOL_STEP,
            });
        }
    }
    Ok(Correction {
        rep: current,
        iterations,
        initial_defect: r,
        final_defect: d,
        distance,
        distance_bound,
        trace,
    })
}

/// Unitary `u = polar(avg_h σ(h)* ρ(h))` with `u ρ(g) u* = σ(g)`.
pub fn intertwiner(rho: &ApproxRep, sigma: &ApproxRep, quotient: Option<Quotient>) -> Result<CMatrix> {
    if rho.group.order() != sigma.group.order() || rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch("representations differ in group or dimension".into()));
    }
    for (name, rep) in [("first", rho), ("second", sigma)] {
        let (d, pair) = defect_with_pair(rep);
        if d > TOL_COMPOSED {
            return Err(Error::Precondition {
                quantity: format!("defect of the {name} representation"),
                value: d,
                limit: TOL_COMPOSED,
                attained_at: Some(pair_label(&rep.group, pair)),
            });
        }
    }
    let (gap, at) = rho
        .values
        .iter()
        .zip(&sigma.values)
        .enumerate()
        .map(|(g, (x, y))| (matca::dist(x, y), g))
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
    if gap >= 1.0 {
        return Err(Error::Precondition {
            quantity: "distance between representations".into(),
            value: gap,
            limit: 1.0,
            attained_at: Some(rho.group.label(at)),
        });
    }
    let products: Vec<CMatrix> = rho
        .values
        .iter()
        .zip(&sigma.values)
        .map(|(x, y)| y.adjoint() * x)
        .collect();
    let a = groups::average(&products)?;
    let u = matca::polar_unitary(&a)?;
    let mismatch = rho
        .values
        .iter()
        .zip(&sigma.values)
        .map(|(x, y)| matca::dist(&(&u * x * u.adjoint()), y))
        .fold(0.0, f64::max);
    if mismatch > TOL_COMPOSED {
        return Err(Error::BoundViolation {
            name: "intertwining identity",
            value: mismatch,
            bound: TOL_COMPOSED,
        });
    }
    if let Some(kappa) = quotient {
        let image = kappa(&u)?;
        let residual = matca::dist(&image, &matca::identity(image.nrows()));
        if residual > TOL_COMPOSED {
            return Err(Error::BoundViolation {
                name: "quotient image of the intertwiner",
                value: residual,
                bound: TOL_COMPOSED,
            });
        }
    }
    Ok(u)
}

/// Polar parts of near-unitary values, each required within `EPS` of a
/// unitary.
pub fn unitarize_values(values: &[CMatrix]) -> Result<Vec<CMatrix>> {
    values
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let gap = matca::distance_to_unitary(x);
            if gap >= EPS {
                return Err(Error::Precondition {
                    quantity: "distance to the unitary group".into(),
                    value: gap,
                    limit: EPS,
                    attained_at: Some(k.to_string()),
                });
            }
            let u = matca::polar_unitary(x)?;
            let moved = matca::dist(&u, x);
            if moved >= EPS0 {
                return Err(Error::BoundViolation {
                    name: "unitarization displacement",
                    value: moved,
                    bound: EPS0,
                });
            }
            Ok(u)
        })
        .collect()
}

/// Action of `G` on `C*(H)` by `α_g(u_h) = χ_g(h) u_{θ_g(h)}`, with `θ_g`
/// automorphisms of `H` and `χ_g` characters of `H`.
#[derive(Debug, Clone)]
pub struct GroupAlgebraAction {
    acting: Arc<FiniteGroup>,
    source: Arc<FiniteGroup>,
    theta: Vec<Vec<usize>>,
    chi: Vec<Vec<C64>>,
}

impl GroupAlgebraAction {
    pub fn new(
        acting: Arc<FiniteGroup>,
        source: Arc<FiniteGroup>,
        theta: Vec<Vec<usize>>,
        chi: Vec<Vec<C64>>,
    ) -> Result<Self> {
        let (gs, hs) = (acting.order(), source.order());
        if theta.len() != gs || chi.len() != gs || theta.iter().any(|t| t.len() != hs)
            || chi.iter().any(|x| x.len() != hs)
        {
            return Err(Error::InvalidAlgebra("action tables have the wrong shape".into()));
        }
        for g in acting.elements() {
            let t = &theta[g];
            let mut seen = vec![false; hs];
            for &x in t {
                if x >= hs || seen[x] {
                    return Err(Error::InvalidAlgebra(format!("θ of {g} is not a bijection")));
                }
                seen[x] = true;
            }
            for h in source.elements() {
                if (chi[g][h].norm() - 1.0).abs() > TOL_INPUT {
                    return Err(Error::InvalidAlgebra(format!("χ of {g} is not unimodular")));
                }
                for k in source.elements() {
                    if t[source.mul(h, k)] != source.mul(t[h], t[k]) {
                        return Err(Error::InvalidAlgebra(format!("θ of {g} is not a homomorphism")));
                    }
                    if (chi[g][source.mul(h, k)] - chi[g][h] * chi[g][k]).norm() > TOL_INPUT {
                        return Err(Error::InvalidAlgebra(format!("χ of {g} is not a character")));
                    }
                }
            }
        }
        for g in acting.elements() {
            for k in acting.elements() {
                let gk = acting.mul(g, k);
                for h in source.elements() {
                    let tk = theta[k][h];
                    if theta[gk][h] != theta[g][tk]
                        || (chi[gk][h] - chi[k][h] * chi[g][tk]).norm() > TOL_INPUT
                    {
                        return Err(Error::InvalidAlgebra(format!(
                            "action is not a homomorphism at ({g}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(GroupAlgebraAction {
            acting,
            source,
            theta,
            chi,
        })
    }

    /// `G` acting trivially on `C*(H)`.
    pub fn trivial(acting: Arc<FiniteGroup>, source: Arc<FiniteGroup>) -> Result<Self> {
        let theta = vec![source.elements().collect(); acting.order()];
        let chi = vec![vec![c(1.0, 0.0); source.order()]; acting.order()];
        Self::new(acting, source, theta, chi)
    }

    /// `G` acting on `C*(G)` by conjugation, `u_h ↦ u_{ghg⁻¹}`.
    pub fn inner(group: Arc<FiniteGroup>) -> Result<Self> {
        let theta = group
            .elements()
            .map(|g| group.elements().map(|h| group.mul(group.mul(g, h), group.inv(g))).collect())
            .collect();
        let chi = vec![vec![c(1.0, 0.0); group.order()]; group.order()];
        Self::new(group.clone(), group, theta, chi)
    }

    /// `Z/d` acting on `C*(Z/d)` by `u_h ↦ ζ^{−gh} u_h`, `ζ = e^{2πi/d}`.
    pub fn translation(d: usize) -> Result<Self> {
        let group = Arc::new(FiniteGroup::cyclic(d)?);
        let step = std::f64::consts::TAU / d as f64;
        let theta = vec![group.elements().collect(); d];
        let chi = (0..d)
            .map(|g| (0..d).map(|h| C64::from_polar(1.0, -step * ((g * h) % d) as f64)).collect())
            .collect();
        Self::new(group.clone(), group, theta, chi)
    }

    pub fn acting(&self) -> &Arc<FiniteGroup> {
        &self.acting
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    /// `α_g(u_h) = coefficient · u_{index}`.
    pub fn image(&self, g: usize, h: usize) -> (C64, usize) {
        (self.chi[g][h], self.theta[g][h])
    }
}

fn check_target(action: &GroupAlgebraAction, target: &GAlgebra, values: &[CMatrix]) -> Result<()> {
    if target.group().as_ref() != action.acting.as_ref() {
        return Err(Error::InvalidAlgebra("target algebra carries a different group".into()));
    }
    if values.len() != action.source.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a source group of order {}",
            values.len(),
            action.source.order()
        )));
    }
    for v in values {
        target.conforms(v)?;
    }
    Ok(())
}

/// `max_{g,h} ‖γ_g(ψ(u_h)) − ψ(α_g(u_h))‖`.
pub fn equivariance_defect(action: &GroupAlgebraAction, target: &GAlgebra, values: &[CMatrix]) -> Result<f64> {
    check_target(action, target, values)?;
    let mut worst: f64 = 0.0;
    for g in action.acting.elements() {
        for h in action.source.elements() {
            let (z, k) = action.image(g, h);
            worst = worst.max(matca::dist(&target.apply(g, &values[h]), &(&values[k] * z)));
        }
    }
    Ok(worst)
}

/// `T(u_h) = avg_g γ_g(ψ(α_{g⁻¹}(u_h)))`, exactly equivariant.
pub fn symmetrize(action: &GroupAlgebraAction, target: &GAlgebra, values: &[CMatrix]) -> Result<Vec<CMatrix>> {
    check_target(action, target, values)?;
    let g_group = &action.acting;
    action
        .source
        .elements()
        .map(|h| {
            groups::haar_average(g_group, |g| {
                let (z, k) = action.image(g_group.inv(g), h);
                target.apply(g, &(&values[k] * z))
            })
        })
        .collect()
}

/// Per-level diagnostics of the lifting scan: `(level, equivariance
/// defect of the seed, defect of the unitarized symmetrization)`. The
/// last entry is infinite when the level was rejected before it was
/// computed.
pub type LevelTable = Vec<(usize, f64, f64)>;

#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub level: usize,
    pub rep: ApproxRep,
    pub table: LevelTable,
    pub correction: Correction,
    pub intertwiner: CMatrix,
    pub defect: f64,
    pub equivariance_defect: f64,
    pub projection_error: f64,
}

/// Extend values at the top of the tower by the identity on the blocks of
/// the top ideal, giving a level-0 seed.
pub fn identity_extension(tower: &Tower, top_values: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let alg = tower.algebra();
    let top = tower.level(tower.top())?;
    let kept = tower.level_blocks(tower.top())?;
    top_values
        .iter()
        .map(|x| {
            top.conforms(x)?;
            let parts: Vec<CMatrix> = (0..alg.blocks().len())
                .map(|k| match kept.binary_search(&k) {
                    Ok(pos) => top.block(x, pos),
                    Err(_) => matca::identity(alg.blocks()[k]),
                })
                .collect();
            Ok(matca::direct_sum(&parts))
        })
        .collect()
}

/// Optional inputs of [`lift_group_rep`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LiftOptions<'a> {
    /// Level-0 seed; defaults to [`identity_extension`] of `φ`.
    pub seed: Option<&'a [CMatrix]>,
    /// Highest level scanned; defaults to the top.
    pub max_level: Option<usize>,
}

impl<'a> LiftOptions<'a> {
    pub fn with_seed(seed: &'a [CMatrix]) -> Self {
        LiftOptions {
            seed: Some(seed),
            max_level: None,
        }
    }
}

/// Lift an exact equivariant representation `φ` of `H` at the top of the
/// tower to an exact equivariant representation at some finite level.
///
/// Levels are scanned upwards from 0. Level `n` is accepted when the
/// projected seed has equivariance defect below `EPS` and its symmetrized,
/// unitarized version has defect below `1/34`. The accepted level is then
/// corrected with the top quotient held fixed and the seed is conjugated
/// onto the corrected representation.
pub fn lift_group_rep(
    tower: &Tower,
    action: &GroupAlgebraAction,
    phi: &[CMatrix],
    options: LiftOptions,
) -> Result<LiftOutcome> {
    let top_level = tower.top();
    let top = tower.level(top_level)?;
    let source = action.source.clone();
    check_target(action, top, phi)?;
    let (d_phi, pair) = table_defect(&source, phi);
    if d_phi > TOL_COMPOSED {
        return Err(Error::Precondition {
            quantity: "defect of the top representation".into(),
            value: d_phi,
            limit: TOL_COMPOSED,
            attained_at: Some(pair_label(&source, pair)),
        });
    }
    ApproxRep::new(source.clone(), phi.to_vec())?;
    let e_phi = equivariance_defect(action, top, phi)?;
    if e_phi > TOL_COMPOSED {
        return Err(Error::Precondition {
            quantity: "equivariance defect of the top representation".into(),
            value: e_phi,
            limit: TOL_COMPOSED,
            attained_at: None,
        });
    }

    let psi0 = match options.seed {
        Some(s) => s.to_vec(),
        None => identity_extension(tower, phi)?,
    };
    let base = tower.level(0)?;
    check_target(action, base, &psi0)?;
    let (d_seed, pair) = table_defect(&source, &psi0);
    if d_seed > TOL_COMPOSED {
        return Err(Error::Precondition {
            quantity: "defect of the seed".into(),
            value: d_seed,
            limit: TOL_COMPOSED,
            attained_at: Some(pair_label(&source, pair)),
        });
    }
    let seed_top = psi0
        .iter()
        .map(|x| tower.project(top_level, 0, x))
        .collect::<Result<Vec<_>>>()?;
    let mismatch = max_distance(&seed_top, phi);
    if mismatch > TOL_COMPOSED {
        return Err(Error::Precondition {
            quantity: "distance of the seed image from the top representation".into(),
            value: mismatch,
            limit: TOL_COMPOSED,
            attained_at: None,
        });
    }

    let mut table = LevelTable::new();
    let last = options.max_level.map_or(top_level, |m| m.min(top_level));
    for n in 0..=last {
        let level = tower.level(n)?;
        let psi1 = psi0
            .iter()
            .map(|x| tower.project(n, 0, x))
            .collect::<Result<Vec<_>>>()?;
        let f = equivariance_defect(action, level, &psi1)?;
        if f >= EPS {
            table.push((n, f, f64::INFINITY));
            continue;
        }
        let t = symmetrize(action, level, &psi1)?;
        let rho0 = ApproxRep::new(source.clone(), unitarize_values(&t)?)?;
        let d = defect(&rho0);
        table.push((n, f, d));
        if d >= LEVEL_LIMIT {
            continue;
        }

        let kappa = |x: &CMatrix| tower.project(top_level, n, x);
        let correction = correct_to_rep(&rho0, DEFAULT_TOL, Some(&kappa))?;
        let psi1_rep = ApproxRep::new(source.clone(), psi1)?;
        let w = intertwiner(&psi1_rep, &correction.rep, Some(&kappa))?;
        let rep = psi1_rep.conjugate(&w);
        let rep = ApproxRep::new(
            source.clone(),
            rep.values.iter().map(|x| level.clean(x)).collect(),
        )?;

        let final_defect = defect(&rep);
        let final_equivariance = equivariance_defect(action, level, &rep.values)?;
        let projected = rep
            .values
            .iter()
            .map(|x| tower.project(top_level, n, x))
            .collect::<Result<Vec<_>>>()?;
        let projection_error = max_distance(&projected, phi);
        for (name, value) in [
            ("lift defect", final_defect),
            ("lift equivariance defect", final_equivariance),
            ("lift projection error", projection_error),
        ] {
            if value > TOL_COMPOSED {
                return Err(Error::BoundViolation {
                    name,
                    value,
                    bound: TOL_COMPOSED,
                });
            }
        }
        return Ok(LiftOutcome {
            level: n,
            rep,
            table,
            correction,
            intertwiner: w,
            defect: final_defect,
            equivariance_defect: final_equivariance,
            projection_error,
        });
    }
    Err(Error::NoLevel {
        threshold: EPS,
        table,
    })
}
