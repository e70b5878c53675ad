//! Gradings by finite abelian groups, realized as spectral subspaces of a
//! dual action, and the graded correction of representations.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::FiniteGroup;
use crate::homcorrect::{self, ApproxRep, Correction};
use crate::matca::{self, c, CMatrix, C64, EPS, EPS0, TOL_INPUT, TOL_STEP};

/// Matrix algebra `M_n` graded by an abelian group through a dual action
/// `β_τ = Ad(W_τ)`, one unitary per character in the order of
/// [`FiniteGroup::characters`].
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    group: Arc<FiniteGroup>,
    characters: Vec<Vec<C64>>,
    dual: Vec<CMatrix>,
}

impl GradedAlgebra {
    pub fn new(group: Arc<FiniteGroup>, dual: Vec<CMatrix>) -> Result<Self> {
        if !group.is_abelian() {
            return Err(Error::NonAbelian);
        }
        let characters = group.characters()?;
        if dual.len() != characters.len() {
            return Err(Error::InvalidAlgebra(format!(
                "{} dual unitaries for {} characters",
                dual.len(),
                characters.len()
            )));
        }
        let n = dual[0].nrows();
        for (t, w) in dual.iter().enumerate() {
            if w.shape() != (n, n) {
                return Err(Error::DimensionMismatch("dual unitaries differ in shape".into()));
            }
            let residual = matca::unitarity_defect(w);
            if residual > TOL_INPUT {
                return Err(Error::InvalidAlgebra(format!(
                    "dual unitary {t} has unitarity defect {residual:.3e}"
                )));
            }
        }
        let alg = GradedAlgebra {
            group,
            characters,
            dual,
        };
        alg.check()?;
        Ok(alg)
    }

    /// Regular model of `C*(G)` in the Fourier picture: `u_g = diag(τ(g))_τ`
    /// on `ℂ^{|Ĝ|}`, with `W_τ` permuting characters by `σ ↦ τ̄σ`. Returns
    /// the algebra and the exact graded representation `g ↦ u_g`.
    pub fn regular_model(group: Arc<FiniteGroup>) -> Result<(Self, Vec<CMatrix>)> {
        if !group.is_abelian() {
            return Err(Error::NonAbelian);
        }
        let characters = group.characters()?;
        let m = characters.len();
        let index_of = |values: &[C64]| {
            characters
                .iter()
                .position(|chi| chi.iter().zip(values).all(|(a, b)| (a - b).norm() < 1e-9))
                .expect("characters form a group")
        };
        let dual = characters
            .iter()
            .map(|tau| {
                let mut w = matca::zeros(m);
                for (j, sigma) in characters.iter().enumerate() {
                    let product: Vec<C64> = tau.iter().zip(sigma).map(|(a, b)| a.conj() * b).collect();
                    w[(index_of(&product), j)] = c(1.0, 0.0);
                }
                w
            })
            .collect();
        let units = group
            .elements()
            .map(|g| matca::diag(&characters.iter().map(|chi| chi[g]).collect::<Vec<_>>()))
            .collect();
        Ok((Self::new(group, dual)?, units))
    }

    /// The same grading transported by `Ad(v)`: dual unitaries `v W_τ v*`.
    pub fn conjugated(&self, v: &CMatrix) -> Result<Self> {
        let dual = self.dual.iter().map(|w| v * w * v.adjoint()).collect();
        Self::new(self.group.clone(), dual)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dual[0].nrows()
    }

    pub fn characters(&self) -> &[Vec<C64>] {
        &self.characters
    }

    /// `β_τ(x) = W_τ x W_τ*`.
    pub fn dual_action(&self, tau: usize, x: &CMatrix) -> CMatrix {
        &self.dual[tau] * x * self.dual[tau].adjoint()
    }

    fn test_elements(&self) -> Vec<CMatrix> {
        let n = self.dim();
        [0.4, 1.9]
            .iter()
            .map(|&seed| {
                CMatrix::from_fn(n, n, |i, j| {
                    let t = seed + 0.83 * i as f64 + 1.31 * j as f64 + 0.17 * (i * j) as f64;
                    c(t.cos(), (2.3 * t).sin())
                })
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        let m = self.characters.len();
        let product_index = |a: usize, b: usize| {
            let values: Vec<C64> = self.characters[a]
                .iter()
                .zip(&self.characters[b])
                .map(|(x, y)| x * y)
                .collect();
            self.characters
                .iter()
                .position(|chi| chi.iter().zip(&values).all(|(p, q)| (p - q).norm() < 1e-9))
                .expect("characters form a group")
        };
        for x in self.test_elements() {
            let scale = matca::norm(&x).max(1.0);
            for a in 0..m {
                for b in 0..m {
                    let lhs = self.dual_action(a, &self.dual_action(b, &x));
                    let rhs = self.dual_action(product_index(a, b), &x);
                    let defect = matca::dist(&lhs, &rhs);
                    if defect > TOL_STEP * scale {
                        return Err(Error::InvalidAlgebra(format!(
                            "dual action is not a homomorphism (defect {defect:.3e})"
                        )));
                    }
                }
            }
            let total = self
                .group
                .elements()
                .fold(matca::zeros(self.dim()), |acc, g| acc + self.project_unchecked(g, &x));
            let defect = matca::dist(&total, &x);
            if defect > TOL_STEP * scale {
                return Err(Error::InvalidAlgebra(format!(
                    "grading projections do not sum to the identity (defect {defect:.3e})"
                )));
            }
        }
        Ok(())
    }

    fn project_unchecked(&self, g: usize, x: &CMatrix) -> CMatrix {
        let m = self.characters.len();
        let mut out = matca::zeros(self.dim());
        for (t, chi) in self.characters.iter().enumerate() {
            out += self.dual_action(t, x) * chi[g].conj();
        }
        out / c(m as f64, 0.0)
    }

    /// Distance of `x` from the `g`-component, `‖x − P_g(x)‖`.
    pub fn component_gap(&self, g: usize, x: &CMatrix) -> f64 {
        matca::dist(x, &self.project_unchecked(g, x))
    }
}

/// `P_g(x) = (1/|Ĝ|) Σ_τ conj(τ(g)) β_τ(x)`.
pub fn grading_projection(a: &GradedAlgebra, g: usize, x: &CMatrix) -> Result<CMatrix> {
    if g >= a.group.order() {
        return Err(Error::InvalidAlgebra(format!("no group element {g}")));
    }
    if x.shape() != (a.dim(), a.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "element is {:?}, carrier has dimension {}",
            x.shape(),
            a.dim()
        )));
    }
    Ok(a.project_unchecked(g, x))
}

/// Graded correction with the per-iterate component record.
#[derive(Debug, Clone)]
pub struct GradedOutcome {
    pub rep: ApproxRep,
    pub seed: ApproxRep,
    pub seed_gap: f64,
    pub correction: Correction,
    pub component_trace: Vec<f64>,
    pub distance_bound: f64,
}

/// Largest admissible distance from the seed, `2·(6ε₀)/(1 − 17·6ε₀)`.
pub fn graded_distance_bound() -> f64 {
    let r = 6.0 * EPS0;
    2.0 * r / (1.0 - 17.0 * r)
}

/// Correct a unitary-valued `ψ₁` that is within `ε` of a graded map into an
/// exact representation with `ρ(g)` in the `g`-component.
pub fn graded_correct(a: &GradedAlgebra, psi1: &[CMatrix], tol: f64) -> Result<GradedOutcome> {
    let group = a.group.clone();
    let values = ApproxRep::new(group.clone(), psi1.to_vec())?.into_values();
    if values[0].nrows() != a.dim() {
        return Err(Error::DimensionMismatch("values do not live in the carrier".into()));
    }
    let mut seed_gap: f64 = 0.0;
    let mut components = Vec::with_capacity(values.len());
    for (g, x) in values.iter().enumerate() {
        let cg = a.project_unchecked(g, x);
        let gap = matca::dist(x, &cg);
        if gap >= EPS {
            return Err(Error::Precondition {
                quantity: "distance from the graded component".into(),
                value: gap,
                limit: EPS,
                attained_at: Some(group.label(g)),
            });
        }
        seed_gap = seed_gap.max(gap);
        components.push(cg);
    }
    let rho0 = ApproxRep::new(
        group.clone(),
        components.iter().map(matca::polar_unitary).collect::<Result<Vec<_>>>()?,
    )?;
    let mut component_trace = vec![component_residual(a, &rho0)];
    if component_trace[0] > TOL_STEP {
        return Err(Error::BoundViolation {
            name: "seed component membership",
            value: component_trace[0],
            bound: TOL_STEP,
        });
    }
    let correction = homcorrect::correct_to_rep_with(&rho0, tol, None, &mut |_, rho| {
        let residual = component_residual(a, rho);
        component_trace.push(residual);
        if residual > TOL_STEP {
            return Err(Error::BoundViolation {
                name: "iterate component membership",
                value: residual,
                bound: TOL_STEP,
            });
        }
        Ok(())
    })?;
    let distance_bound = graded_distance_bound();
    if correction.distance > distance_bound + TOL_INPUT {
        return Err(Error::BoundViolation {
            name: "graded distance 2(6e0)/(1-17(6e0))",
            value: correction.distance,
            bound: distance_bound,
        });
    }
    Ok(GradedOutcome {
        rep: correction.rep.clone(),
        seed: rho0,
        seed_gap,
        correction,
        component_trace,
        distance_bound,
    })
}

fn component_residual(a: &GradedAlgebra, rho: &ApproxRep) -> f64 {
    rho.values()
        .iter()
        .enumerate()
        .map(|(g, x)| a.component_gap(g, x))
        .fold(0.0, f64::max)
}
