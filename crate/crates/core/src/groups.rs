//! Finite groups as dense multiplication tables, Haar averages, and exact
//! averaging over the circle for integer-weight actions.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matca::{self, c, CMatrix, C64};

/// Default cap on generated group orders (`|S₆| = 720`).
pub const DEFAULT_ORDER_CAP: usize = 720;

/// A finite group on the index set `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    order: usize,
    mult: Vec<usize>,
    inv: Vec<usize>,
    id: usize,
    labels: Option<Vec<String>>,
}

/// Declarative description of a group, as used in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    /// `Z/order`.
    Cyclic { order: usize },
    /// Symmetries of the regular `n`-gon, order `2n`.
    Dihedral { n: usize },
    /// Permutations of `degree` points.
    Symmetric { degree: usize },
    /// Direct product.
    Product {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        FiniteGroup::make(self, DEFAULT_ORDER_CAP)
    }
}

impl FiniteGroup {
    /// Build from a multiplication table, verifying every group axiom.
    pub fn from_table(order: usize, mult: Vec<usize>, labels: Option<Vec<String>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGroup("order must be positive".into()));
        }
        if mult.len() != order * order {
            return Err(Error::InvalidGroup(format!(
                "table has {} entries, expected {}",
                mult.len(),
                order * order
            )));
        }
        if let Some(bad) = mult.iter().find(|&&x| x >= order) {
            return Err(Error::InvalidGroup(format!("entry {bad} out of range")));
        }
        if let Some(l) = &labels {
            if l.len() != order {
                return Err(Error::InvalidGroup("label count differs from order".into()));
            }
        }
        let at = |g: usize, h: usize| mult[g * order + h];
        let id = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| Error::InvalidGroup("no two-sided identity".into()))?;
        let mut inv = vec![0; order];
        for g in 0..order {
            inv[g] = (0..order)
                .find(|&h| at(g, h) == id && at(h, g) == id)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
        }
        let group = FiniteGroup {
            order,
            mult,
            inv,
            id,
            labels,
        };
        group.check_latin()?;
        group.check_associative()?;
        Ok(group)
    }

    fn from_table_trusted(order: usize, mult: Vec<usize>, labels: Option<Vec<String>>) -> Self {
        let at = |g: usize, h: usize| mult[g * order + h];
        let id = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) == g))
            .expect("constructed tables have an identity");
        let inv = (0..order)
            .map(|g| (0..order).find(|&h| at(g, h) == id).expect("constructed tables have inverses"))
            .collect();
        FiniteGroup {
            order,
            mult,
            inv,
            id,
            labels,
        }
    }

    pub fn make(spec: &GroupSpec, cap: usize) -> Result<Self> {
        let order = Self::spec_order(spec)?;
        if order > cap {
            return Err(Error::OrderCap { order, cap });
        }
        match spec {
            GroupSpec::Cyclic { order } => Self::cyclic(*order),
            GroupSpec::Dihedral { n } => Self::dihedral(*n),
            GroupSpec::Symmetric { degree } => Self::symmetric(*degree),
            GroupSpec::Product { left, right } => {
                let a = Self::make(left, cap)?;
                let b = Self::make(right, cap)?;
                Ok(Self::product(&a, &b))
            }
        }
    }

    fn spec_order(spec: &GroupSpec) -> Result<usize> {
        match spec {
            GroupSpec::Cyclic { order } if *order >= 1 => Ok(*order),
            GroupSpec::Cyclic { .. } => Err(Error::InvalidGroup("cyclic order must be ≥ 1".into())),
            GroupSpec::Dihedral { n } if *n >= 1 => n
                .checked_mul(2)
                .ok_or_else(|| Error::InvalidGroup("dihedral order overflows".into())),
            GroupSpec::Dihedral { .. } => Err(Error::InvalidGroup("dihedral n must be ≥ 1".into())),
            GroupSpec::Symmetric { degree } if (1..=6).contains(degree) => {
                Ok((1..=*degree).product())
            }
            GroupSpec::Symmetric { degree } => Err(Error::InvalidGroup(format!(
                "symmetric degree {degree} outside 1..=6"
            ))),
            GroupSpec::Product { left, right } => Self::spec_order(left)?
                .checked_mul(Self::spec_order(right)?)
                .ok_or_else(|| Error::InvalidGroup("product order overflows".into())),
        }
    }

    /// `Z/d` with element `k` the residue `k mod d`.
    pub fn cyclic(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGroup("cyclic order must be ≥ 1".into()));
        }
        if d > DEFAULT_ORDER_CAP {
            return Err(Error::OrderCap {
                order: d,
                cap: DEFAULT_ORDER_CAP,
            });
        }
        let mult = (0..d * d).map(|k| (k / d + k % d) % d).collect();
        let labels = (0..d).map(|k| k.to_string()).collect();
        Ok(Self::from_table_trusted(d, mult, Some(labels)))
    }

    /// Dihedral group of order `2n`; element `k + n·e` is `r^k s^e`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("dihedral n must be ≥ 1".into()));
        }
        let order = 2 * n;
        if order > DEFAULT_ORDER_CAP {
            return Err(Error::OrderCap {
                order,
                cap: DEFAULT_ORDER_CAP,
            });
        }
        let mut mult = vec![0; order * order];
        for x in 0..order {
            let (a, e) = (x % n, x / n);
            for y in 0..order {
                let (b, f) = (y % n, y / n);
                // r^a s^e r^b s^f = r^{a ± b} s^{e+f}
                let k = if e == 0 { (a + b) % n } else { (a + n - b) % n };
                mult[x * order + y] = k + n * ((e + f) % 2);
            }
        }
        let labels = (0..order)
            .map(|x| if x < n { format!("r{x}") } else { format!("r{}s", x - n) })
            .collect();
        Ok(Self::from_table_trusted(order, mult, Some(labels)))
    }

    /// Symmetric group on `degree ≤ 6` points; permutations in
    /// lexicographic order, composition `(pq)(i) = p(q(i))`.
    pub fn symmetric(degree: usize) -> Result<Self> {
        if !(1..=6).contains(&degree) {
            return Err(Error::InvalidGroup(format!("symmetric degree {degree} outside 1..=6")));
        }
        let perms = permutations(degree);
        let order = perms.len();
        let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).expect("closed");
        let mut mult = vec![0; order * order];
        for (i, p) in perms.iter().enumerate() {
            for (j, q) in perms.iter().enumerate() {
                let comp: Vec<usize> = (0..degree).map(|k| p[q[k]]).collect();
                mult[i * order + j] = index(&comp);
            }
        }
        let labels = perms
            .iter()
            .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        Ok(Self::from_table_trusted(order, mult, Some(labels)))
    }

    /// `A × B` with element `(a, b)` at index `a·|B| + b`.
    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order, b.order);
        let order = na * nb;
        let mut mult = vec![0; order * order];
        for x in 0..order {
            for y in 0..order {
                let left = a.mul(x / nb, y / nb);
                let right = b.mul(x % nb, y % nb);
                mult[x * order + y] = left * nb + right;
            }
        }
        let labels = (0..order)
            .map(|x| format!("({},{})", a.label(x / nb), b.label(x % nb)))
            .collect();
        Self::from_table_trusted(order, mult, Some(labels))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.id
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mult[g * self.order + h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn label(&self, g: usize) -> String {
        match &self.labels {
            Some(l) => l[g].clone(),
            None => g.to_string(),
        }
    }

    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.id, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.id {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|g| self.elements().all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    /// For a cyclic group, the exponent of every element with respect to
    /// the lowest-index generator: `g = t^{k(g)}`.
    pub fn cyclic_exponents(&self) -> Result<Vec<usize>> {
        let generator = self
            .elements()
            .find(|&g| self.element_order(g) == self.order)
            .ok_or(Error::NotCyclic)?;
        let mut k = vec![0; self.order];
        let mut x = self.id;
        for j in 0..self.order {
            k[x] = j;
            x = self.mul(x, generator);
        }
        Ok(k)
    }

    pub fn check_latin(&self) -> Result<()> {
        let n = self.order;
        let mut seen = vec![false; n];
        for g in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for h in 0..n {
                seen[self.mul(g, h)] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidGroup(format!("row {g} is not a permutation")));
            }
            seen.iter_mut().for_each(|s| *s = false);
            for h in 0..n {
                seen[self.mul(h, g)] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidGroup(format!("column {g} is not a permutation")));
            }
        }
        Ok(())
    }

    /// Exhaustive associativity check over all triples.
    pub fn check_associative(&self) -> Result<()> {
        for g in self.elements() {
            for h in self.elements() {
                let gh = self.mul(g, h);
                for k in self.elements() {
                    if self.mul(gh, k) != self.mul(g, self.mul(h, k)) {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({g}, {h}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// A generating set chosen greedily: repeatedly add an element of
    /// maximal order outside the subgroup generated so far.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![false; self.order];
        span[self.id] = true;
        while span.iter().any(|s| !s) {
            let g = self
                .elements()
                .filter(|&g| !span[g])
                .max_by_key(|&g| (self.element_order(g), std::cmp::Reverse(g)))
                .expect("some element outside the span");
            gens.push(g);
            span = self.closure(&gens);
        }
        gens
    }

    /// All characters `χ: G → S¹` of an abelian group, each as a table of
    /// values indexed by element. The trivial character comes first.
    pub fn characters(&self) -> Result<Vec<Vec<C64>>> {
        if !self.is_abelian() {
            return Err(Error::NonAbelian);
        }
        let gens = self.generators();
        let orders: Vec<usize> = gens.iter().map(|&g| self.element_order(g)).collect();
        let mut chars = Vec::new();
        let mut exps = vec![0usize; gens.len()];
        loop {
            let values: Vec<C64> = exps
                .iter()
                .zip(&orders)
                .map(|(&a, &o)| C64::from_polar(1.0, std::f64::consts::TAU * a as f64 / o as f64))
                .collect();
            if let Some(chi) = self.extend_character(&gens, &values) {
                chars.push(chi);
            }
            // odometer
            let mut i = 0;
            loop {
                if i == exps.len() {
                    return Ok(chars);
                }
                exps[i] += 1;
                if exps[i] < orders[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.order];
        let mut queue = VecDeque::from([self.id]);
        seen[self.id] = true;
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    fn extend_character(&self, gens: &[usize], values: &[C64]) -> Option<Vec<C64>> {
        let mut chi: Vec<Option<C64>> = vec![None; self.order];
        chi[self.id] = Some(c(1.0, 0.0));
        let mut queue = VecDeque::from([self.id]);
        while let Some(x) = queue.pop_front() {
            let cx = chi[x].expect("queued elements are assigned");
            for (&g, &v) in gens.iter().zip(values) {
                let y = self.mul(x, g);
                let cy = cx * v;
                match chi[y] {
                    Some(existing) if (existing - cy).norm() > 1e-9 => return None,
                    Some(_) => {}
                    None => {
                        chi[y] = Some(cy);
                        queue.push_back(y);
                    }
                }
            }
        }
        chi.into_iter().collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `(1/|G|) Σ_g f(g)`, exact finite Haar average.
pub fn haar_average<F>(group: &FiniteGroup, f: F) -> Result<CMatrix>
where
    F: Fn(usize) -> CMatrix,
{
    let values: Vec<CMatrix> = group.elements().map(f).collect();
    average(&values)
}

/// Plain mean of equally shaped matrices.
pub fn average(values: &[CMatrix]) -> Result<CMatrix> {
    let first = values
        .first()
        .ok_or_else(|| Error::DimensionMismatch("average of an empty family".into()))?;
    let shape = first.shape();
    let mut sum = CMatrix::zeros(shape.0, shape.1);
    for (k, v) in values.iter().enumerate() {
        if v.shape() != shape {
            return Err(Error::DimensionMismatch(format!(
                "value {k} has shape {:?}, expected {shape:?}",
                v.shape()
            )));
        }
        sum += v;
    }
    Ok(sum / c(values.len() as f64, 0.0))
}

/// Exponents `k_j` of the diagonal circle representation `ζ ↦ diag(ζ^{k_j})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleWeights(pub Vec<i64>);

impl CircleWeights {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn unitary(&self, zeta: C64) -> CMatrix {
        let entries: Vec<C64> = self.0.iter().map(|&k| zeta.powi(k as i32)).collect();
        matca::diag(&entries)
    }

    /// `γ_ζ(x) = U(ζ) x U(ζ)*`.
    pub fn act(&self, zeta: C64, x: &CMatrix) -> CMatrix {
        let u = self.unitary(zeta);
        &u * x * u.adjoint()
    }

    fn spread(&self) -> i64 {
        let max = self.0.iter().copied().max().unwrap_or(0);
        let min = self.0.iter().copied().min().unwrap_or(0);
        max - min
    }
}

/// The integrand `ζ ↦ ζ^m · U(ζ) v U(ζ)*`, whose entries are trigonometric
/// monomials of degree at most `max|k_i − k_j| + |m|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleIntegrand {
    pub weights: CircleWeights,
    pub base: CMatrix,
    pub monomial: i64,
}

impl CircleIntegrand {
    pub fn degree_bound(&self) -> usize {
        (self.weights.spread() + self.monomial.abs()) as usize
    }

    pub fn eval(&self, zeta: C64) -> CMatrix {
        self.weights.act(zeta, &self.base) * zeta.powi(self.monomial as i32)
    }

    /// Default node count `2D + 3`.
    pub fn default_nodes(&self) -> usize {
        2 * self.degree_bound() + 3
    }
}

/// A circle average together with the node count that produced it.
#[derive(Debug, Clone)]
pub struct CircleAverage {
    pub value: CMatrix,
    pub nodes: usize,
}

/// Exact normalized-Haar integral over `S¹` of a structured integrand, by
/// equally spaced quadrature with more than `2D` nodes.
pub fn circle_average(integrand: &CircleIntegrand, nodes: Option<usize>) -> Result<CircleAverage> {
    let n = integrand.weights.dim();
    if integrand.base.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "integrand base is {:?}, weights have length {n}",
            integrand.base.shape()
        )));
    }
    let bound = integrand.degree_bound();
    let nodes = nodes.unwrap_or_else(|| integrand.default_nodes());
    if nodes <= 2 * bound {
        return Err(Error::Precondition {
            quantity: "circle quadrature nodes (must exceed 2D)".into(),
            value: nodes as f64,
            limit: (2 * bound) as f64,
            attained_at: None,
        });
    }
    let values: Vec<CMatrix> = (0..nodes)
        .map(|t| {
            let zeta = C64::from_polar(1.0, std::f64::consts::TAU * t as f64 / nodes as f64);
            integrand.eval(zeta)
        })
        .collect();
    Ok(CircleAverage {
        value: average(&values)?,
        nodes,
    })
}
