//! Dense complex matrices and the functional calculus the correctors need.
//!
//! All calculus here targets normal matrices (unitaries and self-adjoint
//! elements). Normal matrices are diagonalized by jointly diagonalizing
//! their real and imaginary parts, which keeps algebraic identities such as
//! `f(λz) = λ f(z)` true up to rounding. If the joint route leaves a
//! residual above [`JOINT_RESIDUAL`], the complex Schur form is used.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance for structural identities after one calculus step.
pub const TOL_STEP: f64 = 1e-12;
/// Tolerance for identities after composed calculus steps.
pub const TOL_COMPOSED: f64 = 1e-11;
/// How far from unitary/self-adjoint an input may be.
pub const TOL_INPUT: f64 = 1e-10;
/// Maximal residual of the joint Hermitian diagonalization before the
/// Schur fallback kicks in.
pub const JOINT_RESIDUAL: f64 = 1e-9;
/// Minimal singular value accepted by [`polar_unitary`].
pub const MIN_SINGULAR: f64 = 1e-10;
/// Minimal argument distance from `-1` accepted by [`principal_log_unitary`].
pub const BRANCH_GAP: f64 = 1e-8;
/// Minimal argument distance from the rounding midpoints accepted by
/// [`spectral_round_unitary`].
pub const MIDPOINT_GAP: f64 = 1e-6;

/// `ε₀ = 1/(6·34)`, the unitarization target distance.
pub const EPS0: f64 = 1.0 / (6.0 * 34.0);
/// Admissible distance to a unitary before unitarization: `ε₀ / 2`.
///
/// The polar part is the nearest unitary in operator norm, so
/// `‖polar(a) − v‖ ≤ ‖polar(a) − a‖ + ‖a − v‖ ≤ 2‖a − v‖ < ε₀`.
pub const EPS: f64 = EPS0 / 2.0;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

/// Diagonal matrix from complex entries.
pub fn diag(entries: &[C64]) -> CMatrix {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
}

/// Matrix unit `e_{ij}` of size `n` (zero based indices).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Largest singular value. Returns NaN-free results only for finite input;
/// use [`operator_norm`] when the input is untrusted.
pub fn norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Operator norm (largest singular value).
pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(norm(a))
}

/// `‖a − b‖`.
pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    norm(&(a - b))
}

/// Tolerance-based equality; never compares floats exactly.
pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && dist(a, b) <= tol
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `‖a*a − 1‖`.
pub fn unitarity_defect(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    norm(&(a.adjoint() * a - identity(a.nrows())))
}

/// `‖a − a*‖`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    norm(&(a - a.adjoint()))
}

fn scale_of(a: &CMatrix) -> f64 {
    norm(a).max(1.0)
}

fn require_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

fn require_unitary(u: &CMatrix) -> Result<()> {
    require_square(u, "unitary calculus")?;
    let residual = unitarity_defect(u);
    if residual > TOL_INPUT {
        return Err(Error::NotStructured {
            property: "unitary",
            residual,
            tolerance: TOL_INPUT,
        });
    }
    Ok(())
}

fn require_hermitian(h: &CMatrix) -> Result<()> {
    require_square(h, "self-adjoint calculus")?;
    let residual = hermiticity_defect(h);
    if residual > TOL_INPUT * scale_of(h) {
        return Err(Error::NotStructured {
            property: "self-adjoint",
            residual,
            tolerance: TOL_INPUT,
        });
    }
    Ok(())
}

/// Eigen-decomposition of a self-adjoint matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Eigen-data of a normal matrix: `a ≈ V diag(λ) V*` with `V` unitary.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: CMatrix,
}

impl SpectralData {
    /// `V diag(f(λ)) V*`.
    pub fn apply<F: Fn(C64) -> C64>(&self, f: F) -> CMatrix {
        let values: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, value) in values.iter().enumerate() {
            for z in scaled.column_mut(k).iter_mut() {
                *z *= *value;
            }
        }
        scaled * v.adjoint()
    }

    pub fn residual(&self, a: &CMatrix) -> f64 {
        dist(a, &self.apply(|l| l))
    }
}

/// Spectral decomposition of a normal matrix.
///
/// Two routes are computed and the one with the smaller reconstruction
/// residual is kept: complex Schur, and a joint route that diagonalizes
/// `(a + a*)/2` and resolves each cluster of (numerically) equal
/// eigenvalues with the compression of `(a − a*)/2i`.
pub fn normal_spectral(a: &CMatrix) -> Result<SpectralData> {
    require_square(a, "normal calculus")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(SpectralData {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let scale = scale_of(a);
    let joint = joint_spectral(a, scale);
    let rj = joint.residual(a);
    let (best, residual) = match schur_spectral(a) {
        Some(schur) => {
            let rs = schur.residual(a);
            if rs <= rj {
                (schur, rs)
            } else {
                (joint, rj)
            }
        }
        None => (joint, rj),
    };
    if residual <= JOINT_RESIDUAL * scale {
        Ok(best)
    } else {
        Err(Error::Spectral(format!(
            "input is not normal (reconstruction residual {residual:.3e})"
        )))
    }
}

fn joint_spectral(a: &CMatrix, scale: f64) -> SpectralData {
    let n = a.nrows();
    let half = C64::new(0.5, 0.0);
    let real_part = (a + a.adjoint()) * half;
    let imag_part = (a - a.adjoint()) * C64::new(0.0, -0.5);
    let (values, vectors) = hermitian_eigen(&real_part);
    let mut basis = vectors.clone();
    let cluster_tol = 1e-7 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let compressed = block.adjoint() * &imag_part * &block;
            let (_, rotation) = hermitian_eigen(&compressed);
            let resolved = &block * rotation;
            basis.columns_mut(start, end - start).copy_from(&resolved);
        }
        start = end;
    }
    let eigenvalues = (0..n)
        .map(|k| {
            let v = basis.column(k);
            (v.adjoint() * a * v)[(0, 0)]
        })
        .collect();
    SpectralData {
        eigenvalues,
        eigenvectors: basis,
    }
}

/// Schur form of `a − μ` with `μ` the mean eigenvalue; the shift keeps the
/// Schur vectors and stops QR from stalling on a tight cluster.
fn schur_spectral(a: &CMatrix) -> Option<SpectralData> {
    let n = a.nrows();
    let mu = a.trace() / C64::new(n as f64, 0.0);
    let shifted = a - CMatrix::identity(n, n) * mu;
    let (q, t) = Schur::try_new(shifted, f64::EPSILON, 100 * n.max(1))?.unpack();
    let eigenvalues = (0..t.nrows()).map(|k| t[(k, k)] + mu).collect();
    Some(SpectralData {
        eigenvalues,
        eigenvectors: q,
    })
}

/// Unitary part `a (a*a)^{-1/2}` of an invertible matrix.
///
/// Computed by the scaled Newton iteration `X ← (μX + μ⁻¹X⁻*)/2`. Every
/// step is a rational function of `a` commuting with `a ↦ v a w` for
/// unitaries `v, w`, so symmetries of `a` survive to rounding level; the
/// SVD is only used for the singularity check.
pub fn polar_unitary(a: &CMatrix) -> Result<CMatrix> {
    require_square(a, "polar decomposition")?;
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    let sigma_min = a.singular_values().min();
    if sigma_min <= MIN_SINGULAR {
        return Err(Error::NearSingular { sigma_min });
    }
    let mut x = a.clone();
    let mut scaled = true;
    let mut finishing = false;
    for _ in 0..POLAR_STEPS {
        let inverse = x.clone().try_inverse().ok_or(Error::NearSingular { sigma_min })?;
        let mu = if scaled {
            (inverse.norm() / x.norm()).sqrt()
        } else {
            1.0
        };
        let next = (&x * C64::new(mu, 0.0) + inverse.adjoint() * C64::new(1.0 / mu, 0.0)) * C64::new(0.5, 0.0);
        let delta = (&next - &x).norm() / next.norm();
        x = next;
        if finishing {
            return Ok(x);
        }
        if delta < 1e-2 {
            scaled = false;
        }
        if delta < 1e-9 {
            finishing = true;
        }
    }
    Err(Error::Spectral("polar iteration did not converge".into()))
}

const POLAR_STEPS: usize = 100;

/// Distance from `a` to the nearest unitary, `max |σᵢ − 1|`.
pub fn distance_to_unitary(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Principal logarithm of a unitary; skew-adjoint, eigen-arguments in `(−π, π)`.
pub fn principal_log_unitary(u: &CMatrix) -> Result<CMatrix> {
    require_unitary(u)?;
    let spec = normal_spectral(u)?;
    for l in &spec.eigenvalues {
        if std::f64::consts::PI - l.arg().abs() < BRANCH_GAP {
            return Err(Error::BranchCut { re: l.re, im: l.im });
        }
    }
    let log = spec.apply(|l| C64::new(0.0, l.arg()));
    Ok(skew_part(&log))
}

/// `(x − x*)/2`.
pub fn skew_part(x: &CMatrix) -> CMatrix {
    (x - x.adjoint()) * C64::new(0.5, 0.0)
}

/// `(x + x*)/2`.
pub fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()) * C64::new(0.5, 0.0)
}

/// Exponential of a skew-adjoint matrix.
pub fn exp_skew(x: &CMatrix) -> Result<CMatrix> {
    require_square(x, "exponential")?;
    let residual = norm(&(x + x.adjoint()));
    if residual > TOL_INPUT * scale_of(x) {
        return Err(Error::NotStructured {
            property: "skew-adjoint",
            residual,
            tolerance: TOL_INPUT,
        });
    }
    let h = (x - x.adjoint()) * C64::new(0.0, -0.5);
    let (values, vectors) = hermitian_eigen(&h);
    let spec = SpectralData {
        eigenvalues: values.iter().map(|&t| C64::new(t, 0.0)).collect(),
        eigenvectors: vectors,
    };
    Ok(spec.apply(|t| C64::from_polar(1.0, t.re)))
}

/// Nearest d-th root of unity index for an argument, with the distance of
/// the argument to the nearest rounding midpoint.
pub fn nearest_root(arg: f64, d: usize) -> (usize, f64) {
    let step = std::f64::consts::TAU / d as f64;
    let x = arg.rem_euclid(std::f64::consts::TAU) / step;
    let k = x.round();
    let midpoint_gap = (0.5 - (x - k).abs()) * step;
    ((k as usize) % d, midpoint_gap)
}

/// Replace every eigenvalue of the unitary `w` by the nearest d-th root of
/// unity, reusing its eigenvectors.
pub fn spectral_round_unitary(w: &CMatrix, d: usize) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::DimensionMismatch("root order must be positive".into()));
    }
    require_unitary(w)?;
    let spec = normal_spectral(w)?;
    for l in &spec.eigenvalues {
        let (_, gap) = nearest_root(l.arg(), d);
        if gap <= MIDPOINT_GAP {
            return Err(Error::MidpointCollision {
                re: l.re,
                im: l.im,
                gap,
            });
        }
    }
    let step = std::f64::consts::TAU / d as f64;
    Ok(spec.apply(|l| {
        let (k, _) = nearest_root(l.arg(), d);
        C64::from_polar(1.0, step * k as f64)
    }))
}

/// Spectral projection of a self-adjoint `b` onto eigenvalues above 1/2.
pub fn round_to_projection(b: &CMatrix) -> Result<CMatrix> {
    require_hermitian(b)?;
    let (values, vectors) = hermitian_eigen(b);
    if let Some(&value) = values.iter().find(|&&v| (0.4..=0.6).contains(&v)) {
        return Err(Error::ForbiddenBand { value });
    }
    Ok(projection_onto(&vectors, values.iter().map(|&v| v > 0.5)))
}

/// `Σ vᵢ vᵢ*` over the selected columns.
pub fn projection_onto(vectors: &CMatrix, keep: impl Iterator<Item = bool>) -> CMatrix {
    let n = vectors.nrows();
    let mut p = zeros(n);
    for (k, take) in keep.enumerate() {
        if take {
            let v = vectors.column(k);
            p += &v * v.adjoint();
        }
    }
    p
}

/// Numerical rank of a projection-like self-adjoint matrix.
pub fn projection_rank(p: &CMatrix) -> usize {
    let (values, _) = hermitian_eigen(p);
    values.iter().filter(|&&v| v > 0.5).count()
}

/// Isometry whose columns span the range of the projection `p`.
pub fn range_isometry(p: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(p);
    let cols: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.5).collect();
    CMatrix::from_fn(p.nrows(), cols.len(), |r, k| vectors[(r, cols[k])])
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(n);
    let mut offset = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((offset, offset), (k, k)).copy_from(b);
        offset += k;
    }
    out
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
