//! Finite-dimensional G-algebras (block direct sums of matrix algebras with
//! a group action) and the quotient towers built from nested block ideals.
//!
//! Elements of a block algebra are stored as block-diagonal matrices of
//! the total dimension. Every automorphism of such an algebra is a block
//! permutation followed by a blockwise unitary conjugation, and every ideal
//! is a union of blocks, so quotients are literal block drops.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::FiniteGroup;
use crate::matca::{self, c, CMatrix, TOL_INPUT, TOL_STEP};

/// Maximal number of tower levels.
pub const MAX_LEVELS: usize = 32;

/// Action data of one group element: block `k` is sent to block
/// `perm[k]`, then conjugated by `unitaries[perm[k]]`.
#[derive(Debug, Clone)]
pub struct BlockAction {
    pub perm: Vec<usize>,
    pub unitaries: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub struct GAlgebra {
    group: Arc<FiniteGroup>,
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    actions: Vec<BlockAction>,
}

impl GAlgebra {
    pub fn new(group: Arc<FiniteGroup>, blocks: Vec<usize>, actions: Vec<BlockAction>) -> Result<Self> {
        if blocks.iter().any(|&b| b == 0) {
            return Err(Error::InvalidAlgebra("blocks must have positive size".into()));
        }
        if actions.len() != group.order() {
            return Err(Error::InvalidAlgebra(format!(
                "{} action entries for a group of order {}",
                actions.len(),
                group.order()
            )));
        }
        let count = blocks.len();
        for (g, a) in actions.iter().enumerate() {
            if a.perm.len() != count || a.unitaries.len() != count {
                return Err(Error::InvalidAlgebra(format!("action of {g} has wrong arity")));
            }
            let mut seen = vec![false; count];
            for (k, &t) in a.perm.iter().enumerate() {
                if t >= count || seen[t] {
                    return Err(Error::InvalidAlgebra(format!("action of {g} is not a block permutation")));
                }
                seen[t] = true;
                if blocks[t] != blocks[k] {
                    return Err(Error::InvalidAlgebra(format!(
                        "action of {g} maps block {k} onto a block of different size"
                    )));
                }
            }
            for (t, u) in a.unitaries.iter().enumerate() {
                if u.shape() != (blocks[t], blocks[t]) {
                    return Err(Error::InvalidAlgebra(format!("unitary of {g} on block {t} has wrong shape")));
                }
                let defect = matca::unitarity_defect(u);
                if defect > TOL_INPUT {
                    return Err(Error::InvalidAlgebra(format!(
                        "unitary of {g} on block {t} has unitarity defect {defect:.3e}"
                    )));
                }
            }
        }
        let offsets = blocks
            .iter()
            .scan(0, |acc, &b| {
                let start = *acc;
                *acc += b;
                Some(start)
            })
            .collect();
        let alg = GAlgebra {
            group,
            blocks,
            offsets,
            actions,
        };
        alg.check_homomorphism()?;
        Ok(alg)
    }

    /// Trivial action on the given blocks.
    pub fn trivial(group: Arc<FiniteGroup>, blocks: Vec<usize>) -> Result<Self> {
        let count = blocks.len();
        let action = BlockAction {
            perm: (0..count).collect(),
            unitaries: blocks.iter().map(|&b| matca::identity(b)).collect(),
        };
        let actions = vec![action; group.order()];
        Self::new(group, blocks, actions)
    }

    /// Blockwise inner action: `reps[k][g]` implements `g` on block `k`
    /// (a projective unitary representation suffices).
    pub fn inner(group: Arc<FiniteGroup>, reps: Vec<Vec<CMatrix>>) -> Result<Self> {
        let blocks: Vec<usize> = reps.iter().map(|r| r.first().map_or(0, |u| u.nrows())).collect();
        if reps.iter().any(|r| r.len() != group.order()) {
            return Err(Error::InvalidAlgebra("each block needs one unitary per group element".into()));
        }
        let actions = group
            .elements()
            .map(|g| BlockAction {
                perm: (0..blocks.len()).collect(),
                unitaries: reps.iter().map(|r| r[g].clone()).collect(),
            })
            .collect();
        Self::new(group, blocks, actions)
    }

    /// Single matrix block `M_n` with action `Ad(u_g)`.
    pub fn full_matrix(group: Arc<FiniteGroup>, unitaries: Vec<CMatrix>) -> Result<Self> {
        Self::inner(group, vec![unitaries])
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn action(&self, g: usize) -> &BlockAction {
        &self.actions[g]
    }

    pub fn unit(&self) -> CMatrix {
        matca::identity(self.dim())
    }

    /// Block `k` of an element.
    pub fn block(&self, a: &CMatrix, k: usize) -> CMatrix {
        let (o, b) = (self.offsets[k], self.blocks[k]);
        a.view((o, o), (b, b)).into_owned()
    }

    pub fn from_blocks(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.blocks.len()
            || parts.iter().zip(&self.blocks).any(|(p, &b)| p.shape() != (b, b))
        {
            return Err(Error::DimensionMismatch("block list does not match the algebra".into()));
        }
        Ok(matca::direct_sum(parts))
    }

    /// Checks shape and that entries outside the diagonal blocks vanish.
    pub fn conforms(&self, a: &CMatrix) -> Result<()> {
        let n = self.dim();
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "element is {:?}, algebra has dimension {n}",
                a.shape()
            )));
        }
        let off = a - self.clean(a);
        let residual = matca::norm(&off);
        if residual > TOL_INPUT * matca::norm(a).max(1.0) {
            return Err(Error::NotStructured {
                property: "block diagonal",
                residual,
                tolerance: TOL_INPUT,
            });
        }
        Ok(())
    }

    /// Zero out everything outside the diagonal blocks.
    pub fn clean(&self, a: &CMatrix) -> CMatrix {
        let mut out = matca::zeros(self.dim());
        for k in 0..self.blocks.len() {
            let (o, b) = (self.offsets[k], self.blocks[k]);
            out.view_mut((o, o), (b, b)).copy_from(&a.view((o, o), (b, b)));
        }
        out
    }

    /// `α_g(a)` after validating the block structure of `a`.
    pub fn act(&self, g: usize, a: &CMatrix) -> Result<CMatrix> {
        if g >= self.group.order() {
            return Err(Error::InvalidAlgebra(format!("no group element {g}")));
        }
        self.conforms(a)?;
        Ok(self.apply(g, a))
    }

    /// `α_g(a)` for an element already known to fit the block structure.
    pub fn apply(&self, g: usize, a: &CMatrix) -> CMatrix {
        let action = &self.actions[g];
        let mut out = matca::zeros(self.dim());
        for k in 0..self.blocks.len() {
            let t = action.perm[k];
            let u = &action.unitaries[t];
            let image = u * self.block(a, k) * u.adjoint();
            let (o, b) = (self.offsets[t], self.blocks[t]);
            out.view_mut((o, o), (b, b)).copy_from(&image);
        }
        out
    }

    /// `max_g ‖α_g(a) − a‖`.
    pub fn invariance_defect(&self, a: &CMatrix) -> f64 {
        self.group
            .elements()
            .map(|g| matca::dist(&self.apply(g, a), a))
            .fold(0.0, f64::max)
    }

    /// Sub-algebra on an invariant set of blocks, reindexed in ascending order.
    pub fn restrict(&self, keep: &[usize]) -> Result<GAlgebra> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let position = |k: usize| keep.binary_search(&k).ok();
        let mut actions = Vec::with_capacity(self.group.order());
        for action in &self.actions {
            let mut perm = Vec::with_capacity(keep.len());
            for &k in &keep {
                let t = position(action.perm[k])
                    .ok_or_else(|| Error::InvalidTower(format!("block set is not invariant (block {k})")))?;
                perm.push(t);
            }
            let unitaries = keep.iter().map(|&k| action.unitaries[k].clone()).collect();
            actions.push(BlockAction { perm, unitaries });
        }
        let blocks = keep.iter().map(|&k| self.blocks[k]).collect();
        GAlgebra::new(self.group.clone(), blocks, actions)
    }

    fn test_elements(&self) -> Vec<CMatrix> {
        let n = self.dim();
        let make = |seed: f64| {
            let full = CMatrix::from_fn(n, n, |i, j| {
                let t = seed + 1.37 * i as f64 + 0.61 * j as f64 + 0.29 * (i * j) as f64;
                c(t.sin(), (1.7 * t).cos())
            });
            self.clean(&full)
        };
        vec![make(0.3), make(2.1)]
    }

    fn check_homomorphism(&self) -> Result<()> {
        let group = &self.group;
        for x in self.test_elements() {
            let scale = matca::norm(&x).max(1.0);
            let defect = matca::dist(&self.apply(group.identity(), &x), &x);
            if defect > TOL_STEP * scale {
                return Err(Error::InvalidAlgebra(format!(
                    "identity acts nontrivially (defect {defect:.3e})"
                )));
            }
            for s in group.generators() {
                let xs = self.apply(s, &x);
                for g in group.elements() {
                    let defect = matca::dist(&self.apply(g, &xs), &self.apply(group.mul(g, s), &x));
                    if defect > TOL_STEP * scale {
                        return Err(Error::InvalidAlgebra(format!(
                            "action is not a homomorphism at ({g}, {s}) (defect {defect:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A G-algebra `C` with an increasing chain of invariant block ideals
/// `J₀ ⊆ J₁ ⊆ … ⊆ J_N`. Level `n` is the quotient `C/Jₙ`; level `N` is the
/// top quotient `C/J`.
#[derive(Debug, Clone)]
pub struct Tower {
    algebra: GAlgebra,
    ideals: Vec<Vec<usize>>,
    levels: Vec<GAlgebra>,
    level_blocks: Vec<Vec<usize>>,
}

impl Tower {
    pub fn new(algebra: GAlgebra, ideals: Vec<Vec<usize>>) -> Result<Self> {
        if ideals.is_empty() || ideals.len() > MAX_LEVELS {
            return Err(Error::InvalidTower(format!(
                "tower needs between 1 and {MAX_LEVELS} levels, got {}",
                ideals.len()
            )));
        }
        let count = algebra.blocks().len();
        let mut ideals = ideals;
        for ideal in ideals.iter_mut() {
            ideal.sort_unstable();
            ideal.dedup();
            if ideal.iter().any(|&k| k >= count) {
                return Err(Error::InvalidTower("ideal names a nonexistent block".into()));
            }
        }
        for w in ideals.windows(2) {
            if !w[0].iter().all(|k| w[1].binary_search(k).is_ok()) {
                return Err(Error::InvalidTower("ideals are not nested".into()));
            }
        }
        if ideals.last().is_some_and(|top| top.len() == count) {
            return Err(Error::InvalidTower("the top quotient must be nonzero".into()));
        }
        let mut levels = Vec::new();
        let mut level_blocks = Vec::new();
        for ideal in &ideals {
            for g in algebra.group().elements() {
                let perm = &algebra.action(g).perm;
                if ideal.iter().any(|&k| ideal.binary_search(&perm[k]).is_err()) {
                    return Err(Error::InvalidTower(format!("ideal {ideal:?} is not invariant")));
                }
            }
            let keep: Vec<usize> = (0..count).filter(|k| ideal.binary_search(k).is_err()).collect();
            levels.push(algebra.restrict(&keep)?);
            level_blocks.push(keep);
        }
        Ok(Tower {
            algebra,
            ideals,
            levels,
            level_blocks,
        })
    }

    pub fn algebra(&self) -> &GAlgebra {
        &self.algebra
    }

    pub fn ideals(&self) -> &[Vec<usize>] {
        &self.ideals
    }

    /// Index of the top level `N`.
    pub fn top(&self) -> usize {
        self.ideals.len() - 1
    }

    /// Whether `J_{n−1} = J_n`.
    pub fn is_stationary(&self, n: usize) -> bool {
        n > 0 && n < self.ideals.len() && self.ideals[n - 1] == self.ideals[n]
    }

    pub fn level(&self, n: usize) -> Result<&GAlgebra> {
        self.levels.get(n).ok_or(Error::LevelOutOfRange {
            level: n,
            levels: self.levels.len(),
        })
    }

    /// Blocks of `C` that survive in `C/Jₙ`.
    pub fn level_blocks(&self, n: usize) -> Result<&[usize]> {
        self.level_blocks
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level: n,
                levels: self.levels.len(),
            })
    }

    /// `πₙ : C → C/Jₙ`.
    pub fn quotient(&self, n: usize, a: &CMatrix) -> Result<CMatrix> {
        self.algebra.conforms(a)?;
        let blocks = self.level_blocks(n)?;
        let parts: Vec<CMatrix> = blocks.iter().map(|&k| self.algebra.block(a, k)).collect();
        Ok(matca::direct_sum(&parts))
    }

    /// `π_{n,m} : C/J_m → C/Jₙ` for `m ≤ n`.
    pub fn project(&self, n: usize, m: usize, a: &CMatrix) -> Result<CMatrix> {
        if m > n {
            return Err(Error::InvalidTower(format!("cannot project from level {m} down to {n}")));
        }
        let source = self.level(m)?;
        self.level(n)?;
        source.conforms(a)?;
        let from = &self.level_blocks[m];
        let parts: Vec<CMatrix> = self.level_blocks[n]
            .iter()
            .map(|k| {
                let pos = from.binary_search(k).expect("levels are nested");
                source.block(a, pos)
            })
            .collect();
        Ok(matca::direct_sum(&parts))
    }

    /// Lift an invariant element of the top quotient to an invariant element
    /// of `C`: fill the ideal blocks from `junk` (zero if absent), then
    /// average over the group.
    pub fn invariant_lift(&self, x: &CMatrix, junk: Option<&CMatrix>) -> Result<CMatrix> {
        let top = self.level(self.top())?;
        top.conforms(x)?;
        let defect = top.invariance_defect(x);
        if defect > TOL_INPUT * matca::norm(x).max(1.0) {
            return Err(Error::NotInvariant { defect });
        }
        if let Some(j) = junk {
            self.algebra.conforms(j)?;
        }
        let kept = &self.level_blocks[self.top()];
        let mut parts = Vec::with_capacity(self.algebra.blocks().len());
        for (k, &b) in self.algebra.blocks().iter().enumerate() {
            match kept.binary_search(&k) {
                Ok(pos) => parts.push(top.block(x, pos)),
                Err(_) => parts.push(match junk {
                    Some(j) => self.algebra.block(j, k),
                    None => matca::zeros(b),
                }),
            }
        }
        let lift = matca::direct_sum(&parts);
        crate::groups::haar_average(self.algebra.group(), |g| self.algebra.apply(g, &lift))
    }
}

/// Images `λ(e^{(l)}_{jk})` of the matrix units of `F = ⊕_l M_{r_l}` under a
/// unital homomorphism into a matrix algebra.
#[derive(Debug, Clone)]
pub struct MatrixUnits {
    summands: Vec<Vec<Vec<CMatrix>>>,
}

impl MatrixUnits {
    pub fn new(summands: Vec<Vec<Vec<CMatrix>>>) -> Result<Self> {
        let n = summands
            .first()
            .and_then(|s| s.first())
            .and_then(|row| row.first())
            .map(|e| e.nrows())
            .ok_or_else(|| Error::InvalidAlgebra("no matrix units supplied".into()))?;
        for s in &summands {
            let r = s.len();
            if r == 0 || s.iter().any(|row| row.len() != r) {
                return Err(Error::InvalidAlgebra("each summand needs an r×r array of units".into()));
            }
            if s.iter().flatten().any(|e| e.shape() != (n, n)) {
                return Err(Error::DimensionMismatch("matrix units differ in shape".into()));
            }
        }
        let units = MatrixUnits { summands };
        units.check_relations(n)?;
        Ok(units)
    }

    /// The identity embedding of `M_n`.
    pub fn standard(n: usize) -> Self {
        let units = (0..n)
            .map(|j| (0..n).map(|k| matca::matrix_unit(n, j, k)).collect())
            .collect();
        MatrixUnits { summands: vec![units] }
    }

    pub fn summands(&self) -> &[Vec<Vec<CMatrix>>] {
        &self.summands
    }

    fn check_relations(&self, n: usize) -> Result<()> {
        let fail = |what: String, residual: f64| {
            Err(Error::InvalidAlgebra(format!(
                "matrix units fail the {what} relation (residual {residual:.3e})"
            )))
        };
        let mut diagonal_sum = matca::zeros(n);
        for (l, s) in self.summands.iter().enumerate() {
            let r = s.len();
            for i in 0..r {
                diagonal_sum += &s[i][i];
                for j in 0..r {
                    let adj = matca::dist(&s[i][j].adjoint(), &s[j][i]);
                    if adj > TOL_INPUT {
                        return fail(format!("adjoint in summand {l}"), adj);
                    }
                    for (l2, s2) in self.summands.iter().enumerate() {
                        for k in 0..s2.len() {
                            for m in 0..s2.len() {
                                let product = &s[i][j] * &s2[k][m];
                                let expected = if l == l2 && j == k {
                                    s[i][m].clone()
                                } else {
                                    matca::zeros(n)
                                };
                                let residual = matca::dist(&product, &expected);
                                if residual > TOL_INPUT {
                                    return fail(format!("product in summands {l},{l2}"), residual);
                                }
                            }
                        }
                    }
                }
            }
        }
        let residual = matca::dist(&diagonal_sum, &matca::identity(n));
        if residual > TOL_INPUT {
            return fail("unitality".into(), residual);
        }
        Ok(())
    }
}

/// Conditional expectation onto the relative commutant of the image:
/// `E(a) = Σ_l Σ_k λ(e^{(l)}_{k1}) a λ(e^{(l)}_{1k})`.
pub fn commutant_expectation(units: &MatrixUnits, a: &CMatrix) -> Result<CMatrix> {
    let n = units.summands[0][0][0].nrows();
    if a.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "element is {:?}, units act on dimension {n}",
            a.shape()
        )));
    }
    let mut out = matca::zeros(n);
    for s in &units.summands {
        for (k, row) in s.iter().enumerate() {
            out += &row[0] * a * &s[0][k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matca::dist;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2).unwrap())
    }

    fn reflection(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let v = sample::haar_unitary(n, rng).column(0).into_owned();
        matca::identity(n) - (&v * v.adjoint()) * c(2.0, 0.0)
    }

    fn swap_algebra(u: &CMatrix) -> GAlgebra {
        let n = u.nrows();
        let identity = BlockAction {
            perm: vec![0, 1],
            unitaries: vec![matca::identity(n), matca::identity(n)],
        };
        let swap = BlockAction {
            perm: vec![1, 0],
            unitaries: vec![u.clone(), u.clone()],
        };
        GAlgebra::new(z2(), vec![n, n], vec![identity, swap]).unwrap()
    }

    #[test]
    fn act_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = reflection(2, &mut rng);
        let alg = swap_algebra(&u);
        let x = sample::gaussian_matrix(2, &mut rng);
        let y = sample::gaussian_matrix(2, &mut rng);
        let a = alg.from_blocks(&[x.clone(), y.clone()]).unwrap();
        assert!(dist(&alg.act(0, &a).unwrap(), &a) < 1e-15);
        let by_hand = matca::direct_sum(&[&u * &y * u.adjoint(), &u * &x * u.adjoint()]);
        assert!(dist(&alg.act(1, &a).unwrap(), &by_hand) < 1e-14);
        assert!((matca::norm(&alg.act(1, &a).unwrap()) - matca::norm(&a)).abs() < 1e-12);

        let trivial = GAlgebra::trivial(z2(), vec![2, 3]).unwrap();
        let b = trivial.clean(&sample::gaussian_matrix(5, &mut rng));
        assert!(dist(&trivial.act(1, &b).unwrap(), &b) < 1e-15);
    }

    #[test]
    fn act_rejects_bad_shapes() {
        let alg = GAlgebra::trivial(z2(), vec![2, 2]).unwrap();
        assert!(alg.act(1, &matca::identity(3)).is_err());
        assert!(alg.act(1, &matca::matrix_unit(4, 0, 3)).is_err());
    }

    #[test]
    fn non_homomorphic_action_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = sample::haar_unitary(2, &mut rng);
        let actions = vec![
            BlockAction {
                perm: vec![0],
                unitaries: vec![matca::identity(2)],
            },
            BlockAction {
                perm: vec![0],
                unitaries: vec![u],
            },
        ];
        assert!(GAlgebra::new(z2(), vec![2], actions).is_err());
    }

    fn three_block_tower() -> Tower {
        let g = z2();
        let alg = GAlgebra::trivial(g, vec![1, 2, 2]).unwrap();
        Tower::new(alg, vec![vec![], vec![0]]).unwrap()
    }

    #[test]
    fn projection_examples() {
        let tower = three_block_tower();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = sample::gaussian_matrix(1, &mut rng);
        let y = sample::gaussian_matrix(2, &mut rng);
        let z = sample::gaussian_matrix(2, &mut rng);
        let a = matca::direct_sum(&[x, y.clone(), z.clone()]);
        assert_eq!(tower.project(0, 0, &a).unwrap(), a);
        let projected = tower.project(1, 0, &a).unwrap();
        assert_eq!(projected, matca::direct_sum(&[y, z]));
        assert!(tower.project(0, 1, &projected).is_err());
        assert!(matches!(tower.level(5), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn projections_compose_exactly() {
        let g = z2();
        let alg = GAlgebra::trivial(g, vec![1, 1, 2, 1, 3]).unwrap();
        let tower = Tower::new(alg, vec![vec![], vec![1], vec![1, 3], vec![0, 1, 3]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = tower.algebra().clean(&sample::gaussian_matrix(8, &mut rng));
        let top = tower.top();
        let direct = tower.quotient(top, &a).unwrap();
        for m in 0..=top {
            let via = tower.project(top, m, &tower.quotient(m, &a).unwrap()).unwrap();
            assert_eq!(via, direct);
            for l in 0..=m {
                let step = tower.project(m, l, &tower.quotient(l, &a).unwrap()).unwrap();
                assert_eq!(tower.project(top, m, &step).unwrap(), direct);
            }
        }
    }

    #[test]
    fn tower_validation() {
        let g = z2();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let u = reflection(2, &mut rng);
        let swap = swap_algebra(&u);
        // {0} is not invariant under the swap
        assert!(Tower::new(swap.clone(), vec![vec![0]]).is_err());
        assert!(Tower::new(swap, vec![vec![]]).is_ok());
        let alg = GAlgebra::trivial(g, vec![1, 1]).unwrap();
        assert!(Tower::new(alg.clone(), vec![vec![0], vec![1]]).is_err());
        assert!(Tower::new(alg.clone(), vec![vec![0, 1]]).is_err());
        let t = Tower::new(alg, vec![vec![], vec![0], vec![0]]).unwrap();
        assert!(t.is_stationary(2));
        assert!(!t.is_stationary(1));
    }

    #[test]
    fn invariant_lift_examples() {
        let tower = three_block_tower();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x = tower.level(1).unwrap().clean(&sample::gaussian_matrix(4, &mut rng));
        let a = tower.invariant_lift(&x, None).unwrap();
        assert!(dist(&tower.quotient(1, &a).unwrap(), &x) < 1e-15);

        let junk = tower.algebra().clean(&sample::gaussian_matrix(5, &mut rng));
        let zero = tower.invariant_lift(&matca::zeros(4), Some(&junk)).unwrap();
        assert!(matca::norm(&tower.quotient(1, &zero).unwrap()) < 1e-15);
        assert!(tower.algebra().invariance_defect(&zero) < 1e-12);
    }

    #[test]
    fn invariant_lift_on_swap_tower_matches_direct_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = reflection(2, &mut rng);
        // blocks: [junk 2, junk 2] swapped, plus a 2×2 block with Ad(u) at the top
        let e = matca::identity(2);
        let actions = vec![
            BlockAction {
                perm: vec![0, 1, 2],
                unitaries: vec![e.clone(), e.clone(), e.clone()],
            },
            BlockAction {
                perm: vec![1, 0, 2],
                unitaries: vec![u.clone(), u.clone(), u.clone()],
            },
        ];
        let alg = GAlgebra::new(z2(), vec![2, 2, 2], actions).unwrap();
        let tower = Tower::new(alg, vec![vec![0, 1]]).unwrap();
        let m = sample::gaussian_matrix(2, &mut rng);
        let x = (&m + &u * &m * u.adjoint()) * c(0.5, 0.0);
        let junk_x = sample::gaussian_matrix(2, &mut rng);
        let junk_y = sample::gaussian_matrix(2, &mut rng);
        let junk = matca::direct_sum(&[junk_x.clone(), junk_y.clone(), matca::zeros(2)]);
        let a = tower.invariant_lift(&x, Some(&junk)).unwrap();
        // Oracle: the two-element average written out by hand.
        let first = (&junk_x + &u * &junk_y * u.adjoint()) * c(0.5, 0.0);
        let second = (&junk_y + &u * &junk_x * u.adjoint()) * c(0.5, 0.0);
        let oracle = matca::direct_sum(&[first, second, x.clone()]);
        assert!(dist(&a, &oracle) < 1e-14);
        assert!(tower.algebra().invariance_defect(&a) < 1e-12);
    }

    #[test]
    fn invariant_lift_rejects_non_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let u = reflection(2, &mut rng);
        let alg = GAlgebra::full_matrix(z2(), vec![matca::identity(2), u]).unwrap();
        let tower = Tower::new(alg, vec![vec![]]).unwrap();
        let x = sample::gaussian_matrix(2, &mut rng);
        assert!(matches!(tower.invariant_lift(&x, None), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn commutant_expectation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = sample::gaussian_matrix(3, &mut rng);
        let e = commutant_expectation(&MatrixUnits::standard(3), &a).unwrap();
        // Oracle: Σ_k e_{k1} a e_{1k} = a₁₁·1.
        assert!(dist(&e, &(matca::identity(3) * a[(0, 0)])) < 1e-15);

        // F = ℂ embedded unitally: E(a) = a.
        let one = MatrixUnits::new(vec![vec![vec![matca::identity(3)]]]).unwrap();
        assert!(dist(&commutant_expectation(&one, &a).unwrap(), &a) < 1e-15);
    }

    #[test]
    fn commutant_expectation_on_block_embedding() {
        // λ: M₂ ⊕ ℂ → M₅ as (x, y) ↦ x ⊗ 1₂ ⊕ y, conjugated by a unitary.
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let w = sample::haar_unitary(5, &mut rng);
        let embed = |x: CMatrix| -> CMatrix {
            let big = matca::direct_sum(&[matca::kron(&x, &matca::identity(2)), matca::zeros(1)]);
            &w * big * w.adjoint()
        };
        let m2: Vec<Vec<CMatrix>> = (0..2)
            .map(|j| (0..2).map(|k| embed(matca::matrix_unit(2, j, k))).collect())
            .collect();
        let corner = matca::direct_sum(&[matca::zeros(4), matca::identity(1)]);
        let units = MatrixUnits::new(vec![m2.clone(), vec![vec![&w * corner * w.adjoint()]]]).unwrap();
        let a = sample::gaussian_matrix(5, &mut rng);
        let e = commutant_expectation(&units, &a).unwrap();
        for row in &m2 {
            for x in row {
                assert!(matca::norm(&matca::commutator(&e, x)) < 1e-11);
            }
        }
        let ee = commutant_expectation(&units, &e).unwrap();
        assert!(dist(&ee, &e) < 1e-11);
        assert!(dist(&commutant_expectation(&units, &matca::identity(5)).unwrap(), &matca::identity(5)) < 1e-12);
    }

    #[test]
    fn matrix_unit_relations_are_checked() {
        let bad = vec![vec![vec![matca::identity(2), matca::zeros(2)], vec![matca::zeros(2), matca::identity(2)]]];
        assert!(MatrixUnits::new(bad).is_err());
    }
}
