//! Random matrices for perturbations and test instances.
//!
//! Normal deviates come from the Box–Muller transform applied to pairs of
//! uniforms drawn with `Rng::random::<f64>()`, so a port only has to
//! reproduce the underlying uniform stream.

use rand::Rng;

use std::sync::Arc;

use crate::galg::{BlockAction, GAlgebra, Tower};
use crate::groups::FiniteGroup;
use crate::homcorrect::GroupAlgebraAction;
use crate::matca::{self, c, CMatrix, C64};

/// One standard normal deviate (Box–Muller, cosine branch).
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let u1 = 1.0 - u1; // (0, 1]
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut out = matca::zeros(n);
    for j in 0..n {
        for i in 0..n {
            let re = normal(rng);
            let im = normal(rng);
            out[(i, j)] = c(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    out
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return matca::zeros(0);
    }
    let qr = gaussian_matrix(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for z in q.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    matca::polar_unitary(&q).unwrap_or(q)
}

/// Random self-adjoint matrix with operator norm exactly 1 (0 for n = 0).
pub fn unit_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, rng);
    let h = matca::hermitian_part(&g);
    let nh = matca::norm(&h);
    if nh == 0.0 {
        return h;
    }
    h * c(1.0 / nh, 0.0)
}

/// `exp(i t H)` with `H` a unit self-adjoint matrix, `t` chosen so that
/// `‖u − 1‖ = radius` (requires `radius < 2`).
pub fn unitary_near_identity<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> CMatrix {
    let h = unit_hermitian(n, rng);
    let t = 2.0 * (radius / 2.0).clamp(0.0, 1.0).asin();
    matca::exp_skew(&(h * c(0.0, t))).expect("i·t·H is skew-adjoint")
}

/// `exp(i ε H)` with `H` a unit self-adjoint matrix.
pub fn perturbation_unitary<R: Rng + ?Sized>(n: usize, magnitude: f64, rng: &mut R) -> CMatrix {
    let h = unit_hermitian(n, rng);
    matca::exp_skew(&(h * c(0.0, magnitude))).expect("i·ε·H is skew-adjoint")
}

/// Permutation representation of `group` on the left cosets of `⟨x⟩`.
pub fn coset_rep(group: &FiniteGroup, x: usize) -> Vec<CMatrix> {
    let mut subgroup = vec![group.identity()];
    let mut y = x;
    while y != group.identity() {
        subgroup.push(y);
        y = group.mul(y, x);
    }
    let mut coset_of = vec![usize::MAX; group.order()];
    let mut reps = Vec::new();
    for g in group.elements() {
        if coset_of[g] == usize::MAX {
            for &k in &subgroup {
                coset_of[group.mul(g, k)] = reps.len();
            }
            reps.push(g);
        }
    }
    let m = reps.len();
    group
        .elements()
        .map(|h| {
            let mut p = matca::zeros(m);
            for (j, &g) in reps.iter().enumerate() {
                p[(coset_of[group.mul(h, g)], j)] = c(1.0, 0.0);
            }
            p
        })
        .collect()
}

/// A random exact unitary representation of dimension `dim`: a direct sum
/// of coset permutation representations and one-dimensional characters
/// (trivial ones for nonabelian groups), conjugated by a Haar unitary.
pub fn exact_rep<R: Rng + ?Sized>(group: &FiniteGroup, dim: usize, rng: &mut R) -> Vec<CMatrix> {
    let characters = group.characters().unwrap_or_else(|_| vec![vec![c(1.0, 0.0); group.order()]]);
    let mut pieces: Vec<Vec<CMatrix>> = Vec::new();
    let mut filled = 0;
    while filled < dim {
        let room = dim - filled;
        let cosets: Vec<usize> = group
            .elements()
            .filter(|&x| {
                let size = group.order() / group.element_order(x);
                (2..=room).contains(&size)
            })
            .collect();
        let use_coset = !cosets.is_empty() && rng.random::<f64>() < 0.6;
        if use_coset {
            let x = cosets[rng.random_range(0..cosets.len())];
            let piece = coset_rep(group, x);
            filled += piece[0].nrows();
            pieces.push(piece);
        } else {
            let chi = &characters[rng.random_range(0..characters.len())];
            pieces.push(chi.iter().map(|&z| matca::diag(&[z])).collect());
            filled += 1;
        }
    }
    let w = haar_unitary(dim, rng);
    group
        .elements()
        .map(|g| {
            let parts: Vec<CMatrix> = pieces.iter().map(|p| p[g].clone()).collect();
            &w * matca::direct_sum(&parts) * w.adjoint()
        })
        .collect()
}

/// `ρ(g) ↦ exp(iεH_g) ρ(g)` with independent unit Hermitian `H_g`; the
/// identity value is perturbed as well.
pub fn perturb_values<R: Rng + ?Sized>(values: &[CMatrix], magnitude: f64, rng: &mut R) -> Vec<CMatrix> {
    values
        .iter()
        .map(|v| perturbation_unitary(v.nrows(), magnitude, rng) * v)
        .collect()
}

/// The cyclic shift powers on `ℂ^d` and `z = diag(ζ^k)`, for which
/// `Ad(shift^g) z = ζ^{−g} z`.
pub fn translation_block(d: usize) -> (Vec<CMatrix>, CMatrix) {
    let step = std::f64::consts::TAU / d as f64;
    let mut shift = matca::zeros(d);
    for k in 0..d {
        shift[((k + 1) % d, k)] = c(1.0, 0.0);
    }
    let z = matca::diag(&(0..d).map(|k| C64::from_polar(1.0, step * k as f64)).collect::<Vec<_>>());
    let unitaries = (0..d).map(|g| shift.pow(g as u32)).collect();
    (unitaries, z)
}

/// A tower over `Z/d` with the translation action on `C*(Z/d)`, its exact
/// top representation and a level-0 seed.
#[derive(Debug, Clone)]
pub struct TranslationTower {
    pub tower: Tower,
    pub action: GroupAlgebraAction,
    pub phi: Vec<CMatrix>,
    pub seed: Vec<CMatrix>,
}

/// `rates.len()` junk copies of the translation block below one top copy;
/// the seed on junk block `k` is the exact representation conjugated by
/// `exp(i·rates[k]·K)`.
pub fn translation_tower<R: Rng + ?Sized>(d: usize, rates: &[f64], rng: &mut R) -> crate::Result<TranslationTower> {
    let action = GroupAlgebraAction::translation(d)?;
    let (shifts, z) = translation_block(d);
    let blocks = rates.len() + 1;
    let actions = (0..d)
        .map(|g| BlockAction {
            perm: (0..blocks).collect(),
            unitaries: vec![shifts[g].clone(); blocks],
        })
        .collect();
    let alg = GAlgebra::new(action.acting().clone(), vec![d; blocks], actions)?;
    let ideals: Vec<Vec<usize>> = (0..=rates.len()).map(|n| (0..n).collect()).collect();
    let tower = Tower::new(alg, ideals)?;
    let phi: Vec<CMatrix> = (0..d).map(|h| z.pow(h as u32)).collect();
    let conj: Vec<CMatrix> = rates.iter().map(|&e| perturbation_unitary(d, e, rng)).collect();
    let seed = (0..d)
        .map(|h| {
            let mut parts: Vec<CMatrix> = conj.iter().map(|v| v * &phi[h] * v.adjoint()).collect();
            parts.push(phi[h].clone());
            matca::direct_sum(&parts)
        })
        .collect();
    Ok(TranslationTower {
        tower,
        action,
        phi,
        seed,
    })
}

/// `M_{d·m}` with `Z/d` acting by `Ad(w (shift ⊗ 1_m) w*)` for a Haar
/// unitary `w`, and the exactly permuted partition `w (e_kk ⊗ 1_m) w*`.
pub fn rokhlin_model<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> crate::Result<(GAlgebra, Vec<CMatrix>)> {
    let group = Arc::new(FiniteGroup::cyclic(d)?);
    let n = d * m;
    let w = haar_unitary(n, rng);
    let units = coset_rep(&group, group.identity())
        .into_iter()
        .map(|p| &w * matca::kron(&p, &matca::identity(m)) * w.adjoint())
        .collect();
    let alg = GAlgebra::full_matrix(group, units)?;
    let family = (0..d)
        .map(|k| &w * matca::kron(&matca::matrix_unit(d, k, k), &matca::identity(m)) * w.adjoint())
        .collect();
    Ok((alg, family))
}

/// Self-adjoint perturbation `e + magnitude·H` of each member, `H` unit
/// self-adjoint.
pub fn perturb_hermitian<R: Rng + ?Sized>(family: &[CMatrix], magnitude: f64, rng: &mut R) -> Vec<CMatrix> {
    family
        .iter()
        .map(|e| e + unit_hermitian(e.nrows(), rng) * c(magnitude, 0.0))
        .collect()
}
