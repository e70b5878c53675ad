//! Equivariant generators and relations: *-polynomials, defects of
//! assignments, symmetrization, and exact correction of Rokhlin-type
//! partitions of unity for cyclic groups.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galg::GAlgebra;
use crate::groups::{self, FiniteGroup, GroupSpec};
use crate::matca::{self, c, CMatrix, C64, TOL_INPUT, TOL_STEP};

/// Norm bound for assigned generators.
pub const NORM_BOUND: f64 = 2.0;

/// One symbol of a word: `s`, `s*`, `σ_g(s)` or `σ_g(s)*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub adjoint: bool,
    pub act: Option<usize>,
}

impl Letter {
    pub fn plain(gen: usize) -> Self {
        Letter {
            gen,
            adjoint: false,
            act: None,
        }
    }

    pub fn star(gen: usize) -> Self {
        Letter {
            gen,
            adjoint: true,
            act: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub word: Vec<Letter>,
}

/// Finite sum of scalar multiples of words; the empty word is `1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StarPolynomial {
    pub terms: Vec<Term>,
}

impl StarPolynomial {
    pub fn new(terms: Vec<Term>) -> Self {
        StarPolynomial { terms }
    }

    pub fn term(mut self, coeff: C64, word: Vec<Letter>) -> Self {
        self.terms.push(Term { coeff, word });
        self
    }

    /// Combine equal words, drop vanishing coefficients, sort by word.
    pub fn normalized(&self) -> StarPolynomial {
        let mut terms: Vec<Term> = Vec::new();
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| a.word.cmp(&b.word));
        for t in sorted {
            match terms.last_mut() {
                Some(last) if last.word == t.word => last.coeff += t.coeff,
                _ => terms.push(t),
            }
        }
        terms.retain(|t| t.coeff.norm() > TOL_STEP);
        StarPolynomial { terms }
    }

    fn approx_eq(&self, other: &StarPolynomial) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.terms.len() == b.terms.len()
            && a.terms
                .iter()
                .zip(&b.terms)
                .all(|(x, y)| x.word == y.word && (x.coeff - y.coeff).norm() <= TOL_STEP)
    }
}

/// `(S, σ, R)` over a finite group.
#[derive(Debug, Clone)]
pub struct RelationSystem {
    group: Arc<FiniteGroup>,
    generators: Vec<String>,
    action: Vec<Vec<usize>>,
    relations: Vec<StarPolynomial>,
}

impl RelationSystem {
    pub fn new(
        group: Arc<FiniteGroup>,
        generators: Vec<String>,
        action: Vec<Vec<usize>>,
        relations: Vec<StarPolynomial>,
    ) -> Result<Self> {
        let count = generators.len();
        if count == 0 {
            return Err(Error::InvalidRelations("no generators".into()));
        }
        for (i, name) in generators.iter().enumerate() {
            if name.is_empty() || name.contains(['*', '@', ':']) || name.contains(char::is_whitespace) {
                return Err(Error::InvalidRelations(format!("generator name {name:?} is empty or uses a reserved character")));
            }
            if generators[..i].contains(name) {
                return Err(Error::InvalidRelations(format!("duplicate generator {name}")));
            }
        }
        if action.len() != group.order() {
            return Err(Error::InvalidRelations(format!(
                "action has {} rows for a group of order {}",
                action.len(),
                group.order()
            )));
        }
        for (g, row) in action.iter().enumerate() {
            let mut seen = vec![false; count];
            if row.len() != count {
                return Err(Error::InvalidRelations(format!("action row {g} has the wrong length")));
            }
            for &s in row {
                if s >= count || seen[s] {
                    return Err(Error::InvalidRelations(format!("action row {g} is not a permutation")));
                }
                seen[s] = true;
            }
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if (0..count).any(|s| action[gh][s] != action[g][action[h][s]]) {
                    return Err(Error::InvalidRelations(format!(
                        "action is not a homomorphism at ({g}, {h})"
                    )));
                }
            }
        }
        if (0..count).any(|s| action[group.identity()][s] != s) {
            return Err(Error::InvalidRelations("identity acts nontrivially".into()));
        }
        let sys = RelationSystem {
            group,
            generators,
            action,
            relations,
        };
        for p in &sys.relations {
            sys.check_symbols(p)?;
        }
        for g in sys.group.elements() {
            for (i, p) in sys.relations.iter().enumerate() {
                let image = sys.relabel(g, p);
                if !sys.relations.iter().any(|q| q.approx_eq(&image)) {
                    return Err(Error::InvalidRelations(format!(
                        "relation {i} relabeled by {} is not in the system",
                        sys.group.label(g)
                    )));
                }
            }
        }
        Ok(sys)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relations(&self) -> &[StarPolynomial] {
        &self.relations
    }

    /// Index of `σ_g(s)`.
    pub fn act_on(&self, g: usize, s: usize) -> usize {
        self.action[g][s]
    }

    fn check_symbols(&self, p: &StarPolynomial) -> Result<()> {
        for t in &p.terms {
            for l in &t.word {
                if l.gen >= self.generators.len() {
                    return Err(Error::UnknownSymbol(format!("generator index {}", l.gen)));
                }
                if l.act.is_some_and(|g| g >= self.group.order()) {
                    return Err(Error::UnknownSymbol(format!("group element {}", l.act.unwrap())));
                }
            }
        }
        Ok(())
    }

    /// `σ_g` applied to a polynomial: plain letters are permuted, action
    /// letters `σ_h(s)` become `σ_{gh}(s)`.
    pub fn relabel(&self, g: usize, p: &StarPolynomial) -> StarPolynomial {
        let terms = p
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff,
                word: t
                    .word
                    .iter()
                    .map(|l| match l.act {
                        None => Letter {
                            gen: self.action[g][l.gen],
                            ..*l
                        },
                        Some(h) => Letter {
                            act: Some(self.group.mul(g, h)),
                            ..*l
                        },
                    })
                    .collect(),
            })
            .collect();
        StarPolynomial { terms }
    }

    pub fn letter_name(&self, l: &Letter) -> String {
        LetterDisplay { sys: self, letter: l }.to_string()
    }

    fn parse_letter(&self, token: &str) -> Result<Letter> {
        let (act, rest) = match token.strip_prefix('@') {
            Some(body) => {
                let (g, rest) = body
                    .split_once(':')
                    .ok_or_else(|| Error::UnknownSymbol(token.to_string()))?;
                let g: usize = g.parse().map_err(|_| Error::UnknownSymbol(token.to_string()))?;
                if g >= self.group.order() {
                    return Err(Error::UnknownSymbol(token.to_string()));
                }
                (Some(g), rest)
            }
            None => (None, token),
        };
        let (name, adjoint) = match rest.strip_suffix('*') {
            Some(n) => (n, true),
            None => (rest, false),
        };
        let gen = self
            .generators
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownSymbol(token.to_string()))?;
        Ok(Letter { gen, adjoint, act })
    }

    /// Parse the JSON relation-system format.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSystem = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawSystem) -> Result<Self> {
        let group = Arc::new(raw.group.build()?);
        let count = raw.generators.len();
        let action = match raw.action {
            Some(a) => a,
            None => vec![(0..count).collect(); group.order()],
        };
        // Resolve letters against a provisional system without relations.
        let shell = RelationSystem {
            group: group.clone(),
            generators: raw.generators.clone(),
            action: action.clone(),
            relations: Vec::new(),
        };
        let mut relations = Vec::with_capacity(raw.relations.len());
        for terms in &raw.relations {
            let mut poly = StarPolynomial::default();
            for t in terms {
                let word = t
                    .word
                    .iter()
                    .map(|tok| shell.parse_letter(tok))
                    .collect::<Result<Vec<_>>>()?;
                let coeff = t.coeff.value();
                if !coeff.re.is_finite() || !coeff.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                poly.terms.push(Term { coeff, word });
            }
            relations.push(poly);
        }
        RelationSystem::new(group, raw.generators, action, relations)
    }

    /// Serialize back to the JSON format, given the `GroupSpec` the group was
    /// built from.
    pub fn to_raw(&self, group: GroupSpec) -> RawSystem {
        RawSystem {
            group,
            generators: self.generators.clone(),
            action: Some(self.action.clone()),
            relations: self
                .relations
                .iter()
                .map(|p| {
                    p.terms
                        .iter()
                        .map(|t| RawTerm {
                            coeff: RawCoeff::Complex([t.coeff.re, t.coeff.im]),
                            word: t.word.iter().map(|l| self.letter_name(l)).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

struct LetterDisplay<'a> {
    sys: &'a RelationSystem,
    letter: &'a Letter,
}

impl fmt::Display for LetterDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(g) = self.letter.act {
            write!(f, "@{g}:")?;
        }
        write!(f, "{}", self.sys.generators[self.letter.gen])?;
        if self.letter.adjoint {
            write!(f, "*")?;
        }
        Ok(())
    }
}

/// JSON form of a relation system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub group: GroupSpec,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<Vec<usize>>>,
    pub relations: Vec<Vec<RawTerm>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTerm {
    pub coeff: RawCoeff,
    pub word: Vec<String>,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawCoeff {
    Real(f64),
    Complex([f64; 2]),
}

impl RawCoeff {
    pub fn value(&self) -> C64 {
        match *self {
            RawCoeff::Real(x) => c(x, 0.0),
            RawCoeff::Complex([re, im]) => c(re, im),
        }
    }
}

/// Values of the generators in a G-algebra.
#[derive(Debug, Clone)]
pub struct Assignment {
    values: Vec<CMatrix>,
}

impl Assignment {
    pub fn new(algebra: &GAlgebra, values: Vec<CMatrix>) -> Result<Self> {
        for (s, v) in values.iter().enumerate() {
            algebra.conforms(v)?;
            let n = matca::operator_norm(v)?;
            if n > NORM_BOUND + TOL_INPUT {
                return Err(Error::Precondition {
                    quantity: "generator norm".into(),
                    value: n,
                    limit: NORM_BOUND,
                    attained_at: Some(format!("generator {s}")),
                });
            }
        }
        Ok(Assignment { values })
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn into_values(self) -> Vec<CMatrix> {
        self.values
    }
}

fn check_assignment(sys: &RelationSystem, algebra: &GAlgebra, rho: &Assignment) -> Result<()> {
    if rho.values.len() != sys.generators.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} generators",
            rho.values.len(),
            sys.generators.len()
        )));
    }
    if algebra.group().as_ref() != sys.group.as_ref() {
        return Err(Error::InvalidAlgebra("algebra carries a different group".into()));
    }
    Ok(())
}

/// Evaluate a polynomial on an assignment; `σ_g(s)` evaluates to
/// `α_g(ρ(s))`.
pub fn eval_poly(p: &StarPolynomial, rho: &Assignment, algebra: &GAlgebra) -> Result<CMatrix> {
    let n = algebra.dim();
    let mut out = matca::zeros(n);
    for t in &p.terms {
        let mut acc = matca::identity(n);
        for l in &t.word {
            let base = rho
                .values
                .get(l.gen)
                .ok_or_else(|| Error::UnknownSymbol(format!("generator index {}", l.gen)))?;
            let value = match l.act {
                Some(g) if g >= algebra.group().order() => {
                    return Err(Error::UnknownSymbol(format!("group element {g}")));
                }
                Some(g) => algebra.apply(g, base),
                None => base.clone(),
            };
            acc = if l.adjoint { acc * value.adjoint() } else { acc * value };
        }
        out += acc * t.coeff;
    }
    Ok(out)
}

/// `(δ_rel, δ_eq)`: largest relation norm and largest equivariance gap
/// `‖ρ(σ_g(s)) − α_g(ρ(s))‖`.
pub fn rep_defect(sys: &RelationSystem, rho: &Assignment, algebra: &GAlgebra) -> Result<(f64, f64)> {
    check_assignment(sys, algebra, rho)?;
    let mut rel: f64 = 0.0;
    for p in &sys.relations {
        rel = rel.max(matca::norm(&eval_poly(p, rho, algebra)?));
    }
    Ok((rel, equivariance_gap(sys, rho, algebra)))
}

fn equivariance_gap(sys: &RelationSystem, rho: &Assignment, algebra: &GAlgebra) -> f64 {
    let mut eq: f64 = 0.0;
    for g in sys.group.elements() {
        for s in 0..sys.generators.len() {
            let lhs = &rho.values[sys.action[g][s]];
            eq = eq.max(matca::dist(lhs, &algebra.apply(g, &rho.values[s])));
        }
    }
    eq
}

/// `ρ(s) = avg_g α_g(ρ₀(σ_{g⁻¹}(s)))`.
pub fn symmetrize_assignment(sys: &RelationSystem, rho0: &Assignment, algebra: &GAlgebra) -> Result<Assignment> {
    check_assignment(sys, algebra, rho0)?;
    let group = &sys.group;
    let values = (0..sys.generators.len())
        .map(|s| groups::haar_average(group, |g| algebra.apply(g, &rho0.values[sys.action[group.inv(g)][s]])))
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment { values })
}

/// Generators `p_g` (`g ∈ G`), `σ_k(p_g) = p_{kg}`, relations
/// `p_g* = p_g`, `p_g² = p_g`, `p_g p_h = 0` for `g ≠ h` and, when
/// `unital`, `Σ p_g = 1`.
pub fn partition_system(group: Arc<FiniteGroup>, unital: bool) -> Result<RelationSystem> {
    let d = group.order();
    let generators = group.elements().map(|g| format!("p{g}")).collect();
    let action = group
        .elements()
        .map(|k| group.elements().map(|g| group.mul(k, g)).collect())
        .collect();
    let one = c(1.0, 0.0);
    let mut relations = Vec::new();
    for g in 0..d {
        relations.push(
            StarPolynomial::default()
                .term(one, vec![Letter::star(g)])
                .term(-one, vec![Letter::plain(g)]),
        );
        relations.push(
            StarPolynomial::default()
                .term(one, vec![Letter::plain(g), Letter::plain(g)])
                .term(-one, vec![Letter::plain(g)]),
        );
        for h in 0..d {
            if g != h {
                relations.push(StarPolynomial::default().term(one, vec![Letter::plain(g), Letter::plain(h)]));
            }
        }
    }
    if unital {
        let mut sum = StarPolynomial::default().term(-one, vec![]);
        for g in 0..d {
            sum = sum.term(one, vec![Letter::plain(g)]);
        }
        relations.push(sum);
    }
    RelationSystem::new(group, generators, action, relations)
}

/// The translation model `C(G)`: one-dimensional blocks permuted by left
/// multiplication, an exact model of [`partition_system`].
pub fn translation_model(group: Arc<FiniteGroup>) -> Result<(GAlgebra, Vec<CMatrix>)> {
    let d = group.order();
    let actions = group
        .elements()
        .map(|k| crate::galg::BlockAction {
            perm: group.elements().map(|g| group.mul(k, g)).collect(),
            unitaries: vec![matca::identity(1); d],
        })
        .collect();
    let algebra = GAlgebra::new(group.clone(), vec![1; d], actions)?;
    let values = (0..d).map(|g| matca::matrix_unit(d, g, g)).collect();
    Ok((algebra, values))
}

/// Seed defect of a would-be partition: the largest of the pairwise
/// products, idempotency defects, equivariance gap and `‖Σe_g − 1‖`.
pub fn partition_seed_defect(algebra: &GAlgebra, seeds: &[CMatrix]) -> f64 {
    let group = algebra.group();
    let mut worst: f64 = 0.0;
    for (g, e) in seeds.iter().enumerate() {
        worst = worst.max(matca::norm(&(e * e - e)));
        for (h, f) in seeds.iter().enumerate() {
            if g != h {
                worst = worst.max(matca::norm(&(e * f)));
            }
        }
        for k in group.elements() {
            worst = worst.max(matca::dist(&algebra.apply(k, e), &seeds[group.mul(k, g)]));
        }
    }
    let sum = seeds.iter().fold(matca::zeros(algebra.dim()), |acc, e| acc + e);
    worst.max(matca::dist(&sum, &algebra.unit()))
}

/// Stage bounds of the partition pipeline for seed defect `δ` and order
/// `d`: returns `(η, ε₁)`, an upper bound on the unitarity defect of the
/// averaged encoding and on the distance of its polar part from a unitary
/// that is exactly covariant with spectrum in the d-th roots of unity.
pub fn stage_bounds(delta: f64, d: usize) -> (f64, f64) {
    let df = d as f64;
    let product = delta * (3.0 + 2.0 * delta);
    let symmetrized = delta * (4.0 + 2.0 * delta);
    let eta = df * symmetrized + delta + df * (df - 1.0) * product;
    let eps1 = (1.0 + delta) * eta + 2.0 * symmetrized + 2.0 * (df - 1.0) * product + (1.0 + delta) * delta;
    (eta, eps1)
}

/// Half the distance between neighbouring d-th roots of unity,
/// `½|1 − e^{iπ/d}|`.
pub fn rounding_margin(d: usize) -> f64 {
    0.5 * (c(1.0, 0.0) - C64::from_polar(1.0, std::f64::consts::PI / d as f64)).norm()
}

/// Largest seed defect for which [`stage_bounds`] guarantee that rounding
/// cannot collide with a midpoint (bisection to relative precision 1e-12).
pub fn admissibility_threshold(d: usize) -> f64 {
    let ok = |delta: f64| {
        let (eta, eps1) = stage_bounds(delta, d);
        eta < 1.0 && d as f64 * eps1 / (1.0 - delta) < rounding_margin(d)
    };
    let (mut lo, mut hi): (f64, f64) = (0.0, 1.0);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Exact partition produced by [`stabilize_partition`] with the stage
/// certificates measured on the way.
#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    pub projections: Vec<CMatrix>,
    pub seed_defect: f64,
    pub threshold: f64,
    pub symmetrized_displacement: f64,
    pub unitarity_gap: f64,
    pub midpoint_gap: f64,
    pub displacement: f64,
    pub projection_defect: f64,
    pub orthogonality_defect: f64,
    pub sum_defect: f64,
    pub equivariance_defect: f64,
}

impl PartitionOutcome {
    /// Largest of the three exactness residuals.
    pub fn exactness(&self) -> f64 {
        self.projection_defect
            .max(self.orthogonality_defect)
            .max(self.sum_defect)
            .max(self.equivariance_defect)
    }
}

/// Residuals `(projection, orthogonality, sum, equivariance)` of a family
/// indexed by the group of `algebra`.
pub fn partition_residuals(algebra: &GAlgebra, family: &[CMatrix], total: &CMatrix) -> (f64, f64, f64, f64) {
    let group = algebra.group();
    let mut proj: f64 = 0.0;
    let mut orth: f64 = 0.0;
    let mut eq: f64 = 0.0;
    for (g, e) in family.iter().enumerate() {
        proj = proj.max(matca::norm(&(e * e - e))).max(matca::hermiticity_defect(e));
        for (h, f) in family.iter().enumerate() {
            if g != h {
                orth = orth.max(matca::norm(&(e * f)));
            }
        }
        for k in group.elements() {
            eq = eq.max(matca::dist(&algebra.apply(k, e), &family[group.mul(k, g)]));
        }
    }
    let sum = family.iter().fold(matca::zeros(algebra.dim()), |acc, e| acc + e);
    (proj, orth, matca::dist(&sum, total), eq)
}

/// Correct approximately equivariant, approximately orthogonal
/// self-adjoint seeds `e⁰_g` into an exact Rokhlin partition for a cyclic
/// group: `α_g(e_h) = e_{gh}`, `e_g e_h = δ_{gh} e_g`, `Σ e_g = 1`.
pub fn stabilize_partition(algebra: &GAlgebra, seeds: &[CMatrix]) -> Result<PartitionOutcome> {
    let group = algebra.group().clone();
    let d = group.order();
    let exponents = group.cyclic_exponents()?;
    if seeds.len() != d {
        return Err(Error::DimensionMismatch(format!("{} seeds for a group of order {d}", seeds.len())));
    }
    for (g, e) in seeds.iter().enumerate() {
        algebra.conforms(e)?;
        let residual = matca::hermiticity_defect(e);
        if residual > TOL_INPUT {
            return Err(Error::Precondition {
                quantity: "self-adjointness defect of a seed".into(),
                value: residual,
                limit: TOL_INPUT,
                attained_at: Some(group.label(g)),
            });
        }
    }
    let seed_defect = partition_seed_defect(algebra, seeds);
    let threshold = admissibility_threshold(d);

    let sys = partition_system(group.clone(), true)?;
    let rho0 = Assignment { values: seeds.to_vec() };
    let b = symmetrize_assignment(&sys, &rho0, algebra)?.into_values();
    let symmetrized_displacement = crate::homcorrect::max_distance(&b, seeds);

    let step = std::f64::consts::TAU / d as f64;
    let zeta = |k: usize| C64::from_polar(1.0, step * (k % d) as f64);
    let generator = (0..d)
        .find(|&g| exponents[g] == 1 % d)
        .expect("a cyclic group has an element of exponent 1");
    let w0 = b
        .iter()
        .enumerate()
        .fold(matca::zeros(algebra.dim()), |acc, (g, x)| acc + x * zeta(exponents[g]));
    let mut a = matca::zeros(algebra.dim());
    let mut t = group.identity();
    for j in 0..d {
        a += algebra.apply(t, &w0) * zeta(j);
        t = group.mul(generator, t);
    }
    let a = a / c(d as f64, 0.0);
    let n = algebra.dim();
    let eta = matca::norm(&(a.adjoint() * &a - matca::identity(n))).max(matca::norm(&(&a * a.adjoint() - matca::identity(n))));
    if eta >= 1.0 {
        return Err(Error::Precondition {
            quantity: "unitarity defect of the averaged encoding".into(),
            value: eta,
            limit: 1.0,
            attained_at: None,
        });
    }
    let w = algebra.clean(&matca::polar_unitary(&a)?);
    let spec = matca::normal_spectral(&w)?;
    let midpoint_gap = spec
        .eigenvalues
        .iter()
        .map(|l| matca::nearest_root(l.arg(), d).1)
        .fold(f64::INFINITY, f64::min);
    let z = algebra.clean(&matca::spectral_round_unitary(&w, d)?);

    let mut powers = vec![matca::identity(n)];
    for j in 1..d {
        let next = &powers[j - 1] * &z;
        powers.push(next);
    }
    let projections: Vec<CMatrix> = (0..d)
        .map(|g| {
            let k = exponents[g];
            let sum = powers
                .iter()
                .enumerate()
                .fold(matca::zeros(n), |acc, (j, p)| acc + p * zeta(d - (j * k) % d));
            algebra.clean(&matca::hermitian_part(&(sum / c(d as f64, 0.0))))
        })
        .collect();

    let (projection_defect, orthogonality_defect, sum_defect, equivariance_defect) =
        partition_residuals(algebra, &projections, &algebra.unit());
    let outcome = PartitionOutcome {
        displacement: crate::homcorrect::max_distance(&projections, seeds),
        projections,
        seed_defect,
        threshold,
        symmetrized_displacement,
        unitarity_gap: eta,
        midpoint_gap,
        projection_defect,
        orthogonality_defect,
        sum_defect,
        equivariance_defect,
    };
    let exactness = outcome.exactness();
    if exactness > TOL_STEP {
        return Err(Error::BoundViolation {
            name: "partition exactness",
            value: exactness,
            bound: TOL_STEP,
        });
    }
    Ok(outcome)
}

/// Exact partition of an invariant subprojection `q`, with bookkeeping
/// for the remaining tracial conditions.
#[derive(Debug, Clone)]
pub struct TracialOutcome {
    pub projections: Vec<CMatrix>,
    pub corner: CMatrix,
    pub corner_rank: usize,
    pub complement_rank: usize,
    pub witness_norm: f64,
    pub commutator_norms: Vec<f64>,
    pub displacement: f64,
    pub inner: Option<PartitionOutcome>,
    pub projection_defect: f64,
    pub orthogonality_defect: f64,
    pub sum_defect: f64,
    pub equivariance_defect: f64,
}

/// Tracial variant: round `Σ b_g` to an invariant projection `q`,
/// compress to the corner `q M_n q`, correct there and embed back.
/// `commutators` are the elements whose commutators with each `e_g` are
/// reported.
pub fn stabilize_tracial_partition(
    algebra: &GAlgebra,
    seeds: &[CMatrix],
    witness: &CMatrix,
    commutators: &[CMatrix],
) -> Result<TracialOutcome> {
    if algebra.blocks().len() != 1 {
        return Err(Error::InvalidAlgebra("the tracial variant needs a single matrix block".into()));
    }
    let group = algebra.group().clone();
    let d = group.order();
    group.cyclic_exponents()?;
    if seeds.len() != d {
        return Err(Error::DimensionMismatch(format!("{} seeds for a group of order {d}", seeds.len())));
    }
    algebra.conforms(witness)?;
    let (values, _) = matca::hermitian_eigen(&matca::hermitian_part(witness));
    let witness_gap = matca::hermiticity_defect(witness)
        .max(-values.first().copied().unwrap_or(0.0))
        .max((values.last().copied().unwrap_or(1.0) - 1.0).abs());
    if witness_gap > TOL_INPUT {
        return Err(Error::Precondition {
            quantity: "witness positivity and normalization defect".into(),
            value: witness_gap,
            limit: TOL_INPUT,
            attained_at: None,
        });
    }
    for e in seeds {
        algebra.conforms(e)?;
        let residual = matca::hermiticity_defect(e);
        if residual > TOL_INPUT {
            return Err(Error::Precondition {
                quantity: "self-adjointness defect of a seed".into(),
                value: residual,
                limit: TOL_INPUT,
                attained_at: None,
            });
        }
    }
    let sys = partition_system(group.clone(), false)?;
    let b = symmetrize_assignment(&sys, &Assignment { values: seeds.to_vec() }, algebra)?.into_values();
    let n = algebra.dim();
    let total = b.iter().fold(matca::zeros(n), |acc, x| acc + x);
    let q = matca::round_to_projection(&matca::hermitian_part(&total))?;
    let q_isometry = matca::range_isometry(&q);
    let m = q_isometry.ncols();

    let (projections, inner) = if m == 0 {
        (vec![matca::zeros(n); d], None)
    } else {
        let corner_unitaries = group
            .elements()
            .map(|g| {
                let u = &algebra.action(g).unitaries[0];
                matca::polar_unitary(&(q_isometry.adjoint() * u * &q_isometry))
            })
            .collect::<Result<Vec<_>>>()?;
        let corner = GAlgebra::full_matrix(group.clone(), corner_unitaries)?;
        let compressed: Vec<CMatrix> = b
            .iter()
            .map(|x| matca::hermitian_part(&(q_isometry.adjoint() * x * &q_isometry)))
            .collect();
        let inner = stabilize_partition(&corner, &compressed)?;
        let lifted = inner
            .projections
            .iter()
            .map(|f| &q_isometry * f * q_isometry.adjoint())
            .collect();
        (lifted, Some(inner))
    };

    let e = projections.iter().fold(matca::zeros(n), |acc, x| acc + x);
    let (projection_defect, orthogonality_defect, sum_defect, equivariance_defect) =
        partition_residuals(algebra, &projections, &q);
    let exactness = projection_defect.max(orthogonality_defect).max(equivariance_defect);
    if exactness > TOL_STEP {
        return Err(Error::BoundViolation {
            name: "tracial partition exactness",
            value: exactness,
            bound: TOL_STEP,
        });
    }
    let commutator_norms = commutators
        .iter()
        .map(|x| {
            projections
                .iter()
                .map(|p| matca::norm(&matca::commutator(p, x)))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(TracialOutcome {
        displacement: crate::homcorrect::max_distance(&projections, seeds),
        witness_norm: matca::norm(&(&e * witness * &e)),
        complement_rank: matca::projection_rank(&(matca::identity(n) - &e)),
        corner_rank: m,
        corner: q,
        projections,
        commutator_norms,
        inner,
        projection_defect,
        orthogonality_defect,
        sum_defect,
        equivariance_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn cyclic(d: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(d).unwrap())
    }

    /// Independent evaluator: recursive walk multiplying from the right.
    fn tree_eval(word: &[Letter], values: &[CMatrix], algebra: &GAlgebra) -> CMatrix {
        match word.split_last() {
            None => matca::identity(algebra.dim()),
            Some((last, rest)) => {
                let mut v = values[last.gen].clone();
                if let Some(g) = last.act {
                    let u = &algebra.action(g).unitaries[0];
                    v = u * v * u.adjoint();
                }
                if last.adjoint {
                    v = v.adjoint();
                }
                tree_eval(rest, values, algebra) * v
            }
        }
    }

    #[test]
    fn eval_examples() {
        let mut r = rng(1);
        let g = cyclic(3);
        let alg = GAlgebra::full_matrix(g.clone(), sample::coset_rep(&g, 0)).unwrap();
        let u = sample::haar_unitary(3, &mut r);
        let rho = Assignment::new(&alg, vec![u.clone()]).unwrap();
        let one = StarPolynomial::default().term(c(1.0, 0.0), vec![]);
        assert_eq!(eval_poly(&one, &rho, &alg).unwrap(), matca::identity(3));
        let unitary = StarPolynomial::default()
            .term(c(1.0, 0.0), vec![Letter::star(0), Letter::plain(0)])
            .term(c(-1.0, 0.0), vec![]);
        assert!(matca::norm(&eval_poly(&unitary, &rho, &alg).unwrap()) < 1e-14);
        let bad = StarPolynomial::default().term(c(1.0, 0.0), vec![Letter::plain(3)]);
        assert!(matches!(eval_poly(&bad, &rho, &alg), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn eval_matches_tree_walk_on_random_polynomials() {
        let mut r = rng(2);
        let g = cyclic(4);
        let alg = GAlgebra::full_matrix(g.clone(), sample::exact_rep(&g, 3, &mut r)).unwrap();
        for _ in 0..50 {
            let values: Vec<CMatrix> = (0..3)
                .map(|_| {
                    let x = sample::gaussian_matrix(3, &mut r);
                    let n = matca::norm(&x);
                    x * c(1.5 / n, 0.0)
                })
                .collect();
            let rho = Assignment::new(&alg, values.clone()).unwrap();
            let mut p = StarPolynomial::default();
            let mut oracle = matca::zeros(3);
            for _ in 0..r.random_range(1..4) {
                let len = r.random_range(0..5);
                let word: Vec<Letter> = (0..len)
                    .map(|_| Letter {
                        gen: r.random_range(0..3),
                        adjoint: r.random(),
                        act: if r.random() { Some(r.random_range(0..4)) } else { None },
                    })
                    .collect();
                let coeff = c(sample::normal(&mut r), sample::normal(&mut r));
                oracle += tree_eval(&word, &values, &alg) * coeff;
                p = p.term(coeff, word);
            }
            assert!(matca::dist(&eval_poly(&p, &rho, &alg).unwrap(), &oracle) < 1e-12);
        }
    }

    #[test]
    fn partition_system_is_closed_and_modelled() {
        for d in 2..6 {
            let g = cyclic(d);
            let sys = partition_system(g.clone(), true).unwrap();
            let (alg, values) = translation_model(g).unwrap();
            let rho = Assignment::new(&alg, values).unwrap();
            let (rel, eq) = rep_defect(&sys, &rho, &alg).unwrap();
            assert!(rel <= 1e-12 && eq <= 1e-12);
        }
    }

    #[test]
    fn non_closed_relations_are_rejected() {
        let g = cyclic(2);
        let one = c(1.0, 0.0);
        let only_first = vec![StarPolynomial::default().term(one, vec![Letter::plain(0), Letter::plain(0)])];
        let err = RelationSystem::new(g, vec!["a".into(), "b".into()], vec![vec![0, 1], vec![1, 0]], only_first);
        assert!(matches!(err, Err(Error::InvalidRelations(_))));
    }

    #[test]
    fn rep_defect_examples() {
        let mut r = rng(3);
        let g = cyclic(2);
        let sys = partition_system(g.clone(), true).unwrap();
        let flip = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let alg = GAlgebra::full_matrix(g.clone(), vec![matca::identity(2), flip]).unwrap();
        // Exact projections that the action does not swap: rotated basis.
        let v = sample::haar_unitary(2, &mut r);
        let p0 = &v * matca::matrix_unit(2, 0, 0) * v.adjoint();
        let p1 = &v * matca::matrix_unit(2, 1, 1) * v.adjoint();
        let rho = Assignment::new(&alg, vec![p0.clone(), p1.clone()]).unwrap();
        let (rel, eq) = rep_defect(&sys, &rho, &alg).unwrap();
        assert!(rel < 1e-14);
        let flip_u = &alg.action(1).unitaries[0];
        let brute = [
            matca::dist(&p1, &(flip_u * &p0 * flip_u.adjoint())),
            matca::dist(&p0, &(flip_u * &p1 * flip_u.adjoint())),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        assert!((eq - brute).abs() < 1e-14 && eq > 0.0);

        // (1+δ)p: p² − p ↦ δ(1+δ)p, p* − p ↦ 0, p_g p_h ↦ 0, Σ − 1 ↦ δ.
        let delta = 0.01;
        let std0 = matca::matrix_unit(2, 0, 0);
        let std1 = matca::matrix_unit(2, 1, 1);
        let scaled = Assignment::new(&alg, vec![&std0 * c(1.0 + delta, 0.0), &std1 * c(1.0 + delta, 0.0)]).unwrap();
        let (rel, eq) = rep_defect(&sys, &scaled, &alg).unwrap();
        assert!((rel - delta * (1.0 + delta)).abs() < 1e-14);
        assert!(eq < 1e-15);
    }

    #[test]
    fn symmetrize_assignment_examples() {
        let mut r = rng(4);
        let g = cyclic(3);
        let sys = partition_system(g.clone(), true).unwrap();
        let (alg, values) = translation_model(g.clone()).unwrap();
        let rho = Assignment::new(&alg, values.clone()).unwrap();
        let same = symmetrize_assignment(&sys, &rho, &alg).unwrap();
        assert!(crate::homcorrect::max_distance(same.values(), &values) < 1e-15);

        let trivial = GAlgebra::trivial(g.clone(), vec![2]).unwrap();
        let fixed_sys = RelationSystem::new(g.clone(), vec!["x".into()], vec![vec![0]; 3], vec![]).unwrap();
        let x = sample::gaussian_matrix(2, &mut r) * c(0.3, 0.0);
        let rx = Assignment::new(&trivial, vec![x.clone()]).unwrap();
        assert!(matca::dist(&symmetrize_assignment(&fixed_sys, &rx, &trivial).unwrap().values()[0], &x) < 1e-15);

        let noisy: Vec<CMatrix> = values
            .iter()
            .map(|p| {
                let h = matca::hermitian_part(&alg.clean(&sample::gaussian_matrix(3, &mut r)));
                p + h * c(0.02, 0.0)
            })
            .collect();
        let rho = Assignment::new(&alg, noisy.clone()).unwrap();
        let (_, eq_before) = rep_defect(&sys, &rho, &alg).unwrap();
        let sym = symmetrize_assignment(&sys, &rho, &alg).unwrap();
        let (_, eq_after) = rep_defect(&sys, &sym, &alg).unwrap();
        assert!(eq_after <= 1e-12);
        assert!(crate::homcorrect::max_distance(sym.values(), &noisy) <= eq_before + 1e-12);
        let again = symmetrize_assignment(&sys, &sym, &alg).unwrap();
        assert!(crate::homcorrect::max_distance(again.values(), sym.values()) < 1e-14);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{
            "group": {"kind": "cyclic", "order": 2},
            "generators": ["a", "b"],
            "action": [[0, 1], [1, 0]],
            "relations": [
                [{"coeff": 1.0, "word": ["a*", "a"]}, {"coeff": -1.0, "word": []}],
                [{"coeff": [1.0, 0.0], "word": ["b*", "b"]}, {"coeff": -1.0, "word": []}],
                [{"coeff": 1.0, "word": ["@1:a"]}, {"coeff": -1.0, "word": ["b"]}],
                [{"coeff": 1.0, "word": ["@0:a"]}, {"coeff": -1.0, "word": ["a"]}]
            ]
        }"#;
        let sys = RelationSystem::from_json(text).unwrap();
        let raw = sys.to_raw(GroupSpec::Cyclic { order: 2 });
        let back = RelationSystem::from_raw(raw).unwrap();
        assert_eq!(back.relations(), sys.relations());
        assert!(matches!(
            RelationSystem::from_json(&text.replace("\"b\"]}]", "\"q\"]}]")),
            Err(Error::UnknownSymbol(_))
        ));
        assert!(matches!(RelationSystem::from_json("{"), Err(Error::Json(_))));
        for bad in ["a*", "@b", "x:y", "", "p q"] {
            let text = format!(r#"{{"group": {{"kind": "cyclic", "order": 1}}, "generators": [{bad:?}], "relations": []}}"#);
            assert!(matches!(RelationSystem::from_json(&text), Err(Error::InvalidRelations(_))), "{bad}");
        }
    }

    #[test]
    fn thresholds_are_positive_and_decreasing() {
        let t: Vec<f64> = (2..7).map(admissibility_threshold).collect();
        assert!((t[0] - 0.0118).abs() < 5e-4);
        assert!(t.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    fn rotation(theta: f64) -> CMatrix {
        let (s, co) = theta.sin_cos();
        CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }

    #[test]
    fn partition_two_by_two_closed_form() {
        let g = cyclic(2);
        let flip = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let alg = GAlgebra::full_matrix(g, vec![matca::identity(2), flip]).unwrap();
        let rot = rotation(0.05);
        let seeds = vec![
            &rot * matca::matrix_unit(2, 0, 0) * rot.adjoint(),
            &rot * matca::matrix_unit(2, 1, 1) * rot.adjoint(),
        ];
        let out = stabilize_partition(&alg, &seeds).unwrap();
        // Closed form: b_0 = diag(cos², sin²), w₀ = diag(cos 0.1, −cos 0.1),
        // z = diag(1, −1), so e_0 = e₁₁ and e_1 = e₂₂.
        assert!(matca::dist(&out.projections[0], &matca::matrix_unit(2, 0, 0)) < 1e-14);
        assert!(matca::dist(&out.projections[1], &matca::matrix_unit(2, 1, 1)) < 1e-14);
        assert!((out.displacement - 0.05f64.sin()).abs() < 1e-14);
        assert!(out.displacement < 0.2);
    }

    #[test]
    fn partition_fixed_point_and_covariance() {
        let mut r = rng(5);
        for d in 2..5 {
            let g = cyclic(d);
            let n = 2 * d;
            let units: Vec<CMatrix> = sample::coset_rep(&g, 0)
                .into_iter()
                .map(|p| matca::kron(&p, &matca::identity(2)))
                .collect();
            let w = sample::haar_unitary(n, &mut r);
            let conj: Vec<CMatrix> = units.iter().map(|u| &w * u * w.adjoint()).collect();
            let alg = GAlgebra::full_matrix(g.clone(), conj.clone()).unwrap();
            let exact: Vec<CMatrix> = (0..d)
                .map(|k| &w * matca::kron(&matca::matrix_unit(d, k, k), &matca::identity(2)) * w.adjoint())
                .collect();
            let out = stabilize_partition(&alg, &exact).unwrap();
            assert!(out.displacement < 1e-12);
            assert!(out.exactness() <= 1e-12);

            // Gauge covariance.
            let v = sample::haar_unitary(n, &mut r);
            let moved = GAlgebra::full_matrix(g.clone(), conj.iter().map(|u| &v * u * v.adjoint()).collect()).unwrap();
            let noisy: Vec<CMatrix> = exact
                .iter()
                .map(|e| {
                    let h = sample::unit_hermitian(n, &mut r);
                    e + h * c(0.002, 0.0)
                })
                .collect();
            let base = stabilize_partition(&alg, &noisy).unwrap();
            let noisy_moved: Vec<CMatrix> = noisy.iter().map(|e| &v * e * v.adjoint()).collect();
            let other = stabilize_partition(&moved, &noisy_moved).unwrap();
            for (x, y) in base.projections.iter().zip(&other.projections) {
                assert!(matca::dist(&(&v * x * v.adjoint()), y) < 1e-11);
            }
        }
    }

    #[test]
    fn partition_reports_rounding_collision() {
        // Seeds equal to ½ on both halves put the encoded spectrum at
        // midpoints (or make the encoding singular).
        let g = cyclic(2);
        let flip = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let alg = GAlgebra::full_matrix(g, vec![matca::identity(2), flip]).unwrap();
        let half = matca::identity(2) * c(0.5, 0.0);
        assert!(stabilize_partition(&alg, &[half.clone(), half]).is_err());
    }

    #[test]
    fn tracial_examples() {
        let mut r = rng(6);
        let d = 3;
        let g = cyclic(d);
        // M_7 = (ℂ³ ⊗ ℂ²) ⊕ ℂ with the shift on the first summand.
        let units: Vec<CMatrix> = sample::coset_rep(&g, 0)
            .into_iter()
            .map(|p| matca::direct_sum(&[matca::kron(&p, &matca::identity(2)), matca::identity(1)]))
            .collect();
        let alg = GAlgebra::full_matrix(g.clone(), units).unwrap();
        let exact: Vec<CMatrix> = (0..d)
            .map(|k| matca::direct_sum(&[matca::kron(&matca::matrix_unit(d, k, k), &matca::identity(2)), matca::zeros(1)]))
            .collect();
        let noisy: Vec<CMatrix> = exact
            .iter()
            .map(|e| e + alg.clean(&sample::unit_hermitian(7, &mut r)) * c(0.002, 0.0))
            .collect();
        let noisy: Vec<CMatrix> = noisy.iter().map(matca::hermitian_part).collect();
        let x = matca::matrix_unit(7, 0, 0);
        let out = stabilize_tracial_partition(&alg, &noisy, &x, &[x.clone()]).unwrap();
        assert_eq!(out.corner_rank, 6);
        assert_eq!(out.complement_rank, 1);
        assert!(out.projection_defect <= 1e-12 && out.orthogonality_defect <= 1e-12 && out.equivariance_defect <= 1e-12);
        let e = out.projections.iter().fold(matca::zeros(7), |a, p| a + p);
        assert!((out.witness_norm - matca::norm(&(&e * &x * &e))).abs() < 1e-15);

        // q = 1: same family as the plain correction.
        let full = GAlgebra::full_matrix(g.clone(), sample::coset_rep(&g, 0)).unwrap();
        let seeds: Vec<CMatrix> = (0..d).map(|k| matca::matrix_unit(d, k, k)).collect();
        let plain = stabilize_partition(&full, &seeds).unwrap();
        let tr = stabilize_tracial_partition(&full, &seeds, &matca::identity(d), &[]).unwrap();
        assert_eq!(tr.complement_rank, 0);
        assert!(crate::homcorrect::max_distance(&plain.projections, &tr.projections) < 1e-12);
    }
}
