//! Unitary 1-cocycles for actions on matrix G-algebras, the one-step
//! coboundary correction and its iteration.

use crate::error::{Error, Result};
use crate::galg::GAlgebra;
use crate::groups::{self, FiniteGroup};
use crate::homcorrect::{max_distance, Quotient, TraceRow, ITERATION_CAP};
use crate::matca::{self, CMatrix, TOL_COMPOSED, TOL_INPUT, TOL_STEP};

/// Largest mismatch accepted by one coboundary step.
pub const ONE_STEP_LIMIT: f64 = 0.2;

/// Largest mismatch accepted by the iterated trivialization (exclusive).
pub const ITERATION_LIMIT: f64 = 0.1;

/// Unitary-valued map `w` on the group of a G-algebra.
#[derive(Debug, Clone)]
pub struct Cocycle {
    algebra: GAlgebra,
    values: Vec<CMatrix>,
}

impl Cocycle {
    pub fn new(algebra: GAlgebra, values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != algebra.group().order() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                algebra.group().order()
            )));
        }
        for (g, v) in values.iter().enumerate() {
            algebra.conforms(v)?;
            let residual = matca::unitarity_defect(v);
            if residual > TOL_INPUT {
                return Err(Error::Precondition {
                    quantity: "unitarity defect".into(),
                    value: residual,
                    limit: TOL_INPUT,
                    attained_at: Some(algebra.group().label(g)),
                });
            }
        }
        Ok(Cocycle { algebra, values })
    }

    /// `g ↦ v α_g(v)*`.
    pub fn coboundary(algebra: GAlgebra, v: &CMatrix) -> Result<Self> {
        algebra.conforms(v)?;
        let values = coboundary_values(&algebra, v);
        Self::new(algebra, values)
    }

    pub fn algebra(&self) -> &GAlgebra {
        &self.algebra
    }

    pub fn group(&self) -> &FiniteGroup {
        self.algebra.group()
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }
}

fn coboundary_values(algebra: &GAlgebra, v: &CMatrix) -> Vec<CMatrix> {
    algebra
        .group()
        .elements()
        .map(|g| v * algebra.apply(g, v).adjoint())
        .collect()
}

/// `max_{g,h} ‖w(gh) − w(g) α_g(w(h))‖`.
pub fn cocycle_defect(w: &Cocycle) -> f64 {
    let group = w.group();
    let alg = &w.algebra;
    let mut worst: f64 = 0.0;
    for g in group.elements() {
        for h in group.elements() {
            let rhs = &w.values[g] * alg.apply(g, &w.values[h]);
            worst = worst.max(matca::dist(&w.values[group.mul(g, h)], &rhs));
        }
    }
    worst
}

/// `max_g ‖v α_g(v)* − w(g)‖` with the element attaining it.
pub fn mismatch(w: &Cocycle, v: &CMatrix) -> (f64, usize) {
    coboundary_values(&w.algebra, v)
        .iter()
        .zip(&w.values)
        .enumerate()
        .map(|(g, (x, y))| (matca::dist(x, y), g))
        .fold((0.0, w.group().identity()), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn require_exact(w: &Cocycle) -> Result<()> {
    let d = cocycle_defect(w);
    if d > TOL_COMPOSED {
        return Err(Error::Precondition {
            quantity: "cocycle defect".into(),
            value: d,
            limit: TOL_COMPOSED,
            attained_at: None,
        });
    }
    Ok(())
}

fn require_unitary_seed(w: &Cocycle, v: &CMatrix) -> Result<()> {
    w.algebra.conforms(v)?;
    let residual = matca::unitarity_defect(v);
    if residual > TOL_INPUT {
        return Err(Error::Precondition {
            quantity: "unitarity defect of the seed".into(),
            value: residual,
            limit: TOL_INPUT,
            attained_at: None,
        });
    }
    Ok(())
}

fn step(w: &Cocycle, v: &CMatrix) -> Result<CMatrix> {
    let group = w.group();
    let alg = &w.algebra;
    let logs = group
        .elements()
        .map(|h| {
            let inner = alg.apply(group.inv(h), &(w.values[h].adjoint() * v));
            matca::principal_log_unitary(&(v.adjoint() * inner))
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = matca::skew_part(&groups::average(&logs)?);
    Ok(alg.clean(&(v * matca::exp_skew(&mean)?)))
}

/// `z = v exp(avg_h log(v* α_{h⁻¹}(w(h)* v)))`.
pub fn one_step_cobound(w: &Cocycle, v: &CMatrix) -> Result<CMatrix> {
    require_exact(w)?;
    require_unitary_seed(w, v)?;
    let (r, g) = mismatch(w, v);
    if r > ONE_STEP_LIMIT {
        return Err(Error::Precondition {
            quantity: "coboundary mismatch".into(),
            value: r,
            limit: ONE_STEP_LIMIT,
            attained_at: Some(w.group().label(g)),
        });
    }
    step(w, v)
}

/// Downstairs data for [`trivialize`]: the quotient algebra with its
/// action and the quotient map.
#[derive(Clone, Copy)]
pub struct CocycleQuotient<'a> {
    pub algebra: &'a GAlgebra,
    pub map: Quotient<'a>,
}

#[derive(Debug, Clone)]
pub struct Trivialization {
    pub v: CMatrix,
    pub iterations: usize,
    pub initial_mismatch: f64,
    pub final_mismatch: f64,
    pub distance: f64,
    pub distance_bound: f64,
    pub trace: Vec<TraceRow>,
}

/// `2r/(1 − 10r)`.
pub fn trivialization_bound(r: f64) -> f64 {
    2.0 * r / (1.0 - 10.0 * r)
}

/// Find `v` with `v α_g(v)* = w(g)` for all `g`, starting from `v₀`
/// (default `1`).
pub fn trivialize(
    w: &Cocycle,
    v0: Option<&CMatrix>,
    tol: f64,
    quotient: Option<CocycleQuotient>,
) -> Result<Trivialization> {
    require_exact(w)?;
    let v0 = match v0 {
        Some(v) => v.clone(),
        None => w.algebra.unit(),
    };
    require_unitary_seed(w, &v0)?;
    let (r, g) = mismatch(w, &v0);
    if r >= ITERATION_LIMIT {
        return Err(Error::Precondition {
            quantity: "coboundary mismatch of the seed".into(),
            value: r,
            limit: ITERATION_LIMIT,
            attained_at: Some(w.group().label(g)),
        });
    }
    let downstairs = match quotient {
        Some(q) => {
            let image = (q.map)(&v0)?;
            let mut worst: f64 = 0.0;
            for g in w.group().elements() {
                let lhs = &image * q.algebra.apply(g, &image).adjoint();
                worst = worst.max(matca::dist(&lhs, &(q.map)(&w.values[g])?));
            }
            if worst > TOL_STEP {
                return Err(Error::Precondition {
                    quantity: "coboundary mismatch of the quotient seed".into(),
                    value: worst,
                    limit: TOL_STEP,
                    attained_at: None,
                });
            }
            Some(image)
        }
        None => None,
    };

    let mut trace = vec![TraceRow {
        iteration: 0,
        defect: r,
        distance: 0.0,
    }];
    let mut v = v0.clone();
    let mut m = r;
    let mut iterations = 0;
    while m > tol {
        if iterations == ITERATION_CAP {
            return Err(Error::NoConvergence {
                iterations,
                last: m,
                trace: trace.iter().map(|t| (t.iteration, t.defect, t.distance)).collect(),
            });
        }
        v = step(w, &v)?;
        iterations += 1;
        m = mismatch(w, &v).0;
        trace.push(TraceRow {
            iteration: iterations,
            defect: m,
            distance: matca::dist(&v, &v0),
        });
    }

    let distance = matca::dist(&v, &v0);
    let distance_bound = trivialization_bound(r);
    if distance > distance_bound + TOL_INPUT {
        return Err(Error::BoundViolation {
            name: "distance 2r/(1-10r)",
            value: distance,
            bound: distance_bound,
        });
    }
    if let (Some(q), Some(before)) = (quotient, downstairs) {
        let moved = max_distance(&[before], &[(q.map)(&v)?]);
        if moved > TOL_STEP {
            return Err(Error::BoundViolation {
                name: "quotient image unchanged",
                value: moved,
                bound: TOL_STEP,
            });
        }
    }
    Ok(Trivialization {
        v,
        iterations,
        initial_mismatch: r,
        final_mismatch: m,
        distance,
        distance_bound,
        trace,
    })
}

/// `5r²/(2(1 − 2r))`.
pub fn integral_bound(r: f64) -> f64 {
    5.0 * r * r / (2.0 * (1.0 - 2.0 * r))
}

/// Result of [`verify_integral_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    pub lhs: f64,
    pub bound: f64,
    pub average_norm: f64,
}

/// Measure `‖avg u − exp(avg log u)‖` against `5r²/(2(1 − 2r))`.
pub fn verify_integral_estimate(group: &FiniteGroup, u: &[CMatrix], r: f64) -> Result<IntegralEstimate> {
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::Precondition {
            quantity: "radius".into(),
            value: r,
            limit: 0.5,
            attained_at: None,
        });
    }
    if u.len() != group.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a group of order {}",
            u.len(),
            group.order()
        )));
    }
    for (g, x) in u.iter().enumerate() {
        let residual = matca::unitarity_defect(x);
        if residual > TOL_INPUT {
            return Err(Error::Precondition {
                quantity: "unitarity defect".into(),
                value: residual,
                limit: TOL_INPUT,
                attained_at: Some(group.label(g)),
            });
        }
        let gap = matca::dist(x, &matca::identity(x.nrows()));
        if gap > r + TOL_STEP {
            return Err(Error::Precondition {
                quantity: "distance from the identity".into(),
                value: gap,
                limit: r,
                attained_at: Some(group.label(g)),
            });
        }
    }
    let avg = groups::average(u)?;
    let logs = u.iter().map(matca::principal_log_unitary).collect::<Result<Vec<_>>>()?;
    let exp = matca::exp_skew(&matca::skew_part(&groups::average(&logs)?))?;
    let lhs = matca::dist(&avg, &exp);
    let bound = integral_bound(r);
    let average_norm = matca::norm(&avg);
    if lhs > bound + TOL_COMPOSED {
        return Err(Error::BoundViolation {
            name: "integral estimate 5r^2/(2(1-2r))",
            value: lhs,
            bound,
        });
    }
    if average_norm > 1.0 + TOL_STEP {
        return Err(Error::BoundViolation {
            name: "norm of the average",
            value: average_norm,
            bound: 1.0,
        });
    }
    Ok(IntegralEstimate {
        lhs,
        bound,
        average_norm,
    })
}
