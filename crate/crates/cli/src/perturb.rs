//! Perturbations of exact structures, with the measured defect.

use eqstab::galg::GAlgebra;
use eqstab::groups::FiniteGroup;
use eqstab::homcorrect::table_defect;
use eqstab::matca::{self, c, CMatrix};
use eqstab::relations::partition_seed_defect;
use eqstab::sample;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Perturbed {
    pub values: Vec<CMatrix>,
    pub defect: f64,
}

/// `v ↦ exp(iεH) v` with an independent unit self-adjoint `H` per value;
/// the defect is the representation defect of the result.
pub fn perturb_unitaries<R: Rng + ?Sized>(group: &FiniteGroup, exact: &[CMatrix], magnitude: f64, rng: &mut R) -> Perturbed {
    let values = if magnitude == 0.0 {
        exact.to_vec()
    } else {
        sample::perturb_values(exact, magnitude, rng)
    };
    let defect = table_defect(group, &values).0;
    Perturbed { values, defect }
}

/// `e ↦ e + εH` with an independent unit self-adjoint `H` per member; the
/// defect is the partition seed defect of the result.
pub fn perturb_partition<R: Rng + ?Sized>(algebra: &GAlgebra, exact: &[CMatrix], magnitude: f64, rng: &mut R) -> Perturbed {
    let values: Vec<CMatrix> = if magnitude == 0.0 {
        exact.to_vec()
    } else {
        exact
            .iter()
            .map(|e| algebra.clean(&(e + sample::unit_hermitian(e.nrows(), rng) * c(magnitude, 0.0))))
            .map(|e| matca::hermitian_part(&e))
            .collect()
    };
    let defect = partition_seed_defect(algebra, &values);
    Perturbed { values, defect }
}
