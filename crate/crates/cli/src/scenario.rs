//! Scenario files: what to build, how hard to perturb it, how many trials.

use eqstab::groups::GroupSpec;
use serde::{Deserialize, Serialize};

/// Which corrector a scenario exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Rep,
    Cocycle,
    Lift,
    Rokhlin,
    Tracial,
    Graded,
    IntegralEstimate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Rep => "rep",
            Kind::Cocycle => "cocycle",
            Kind::Lift => "lift",
            Kind::Rokhlin => "rokhlin",
            Kind::Tracial => "tracial",
            Kind::Graded => "graded",
            Kind::IntegralEstimate => "integral_estimate",
        }
    }
}

/// Perturbation size per trial: a constant, a list cycled by trial index,
/// or a log-uniform draw from `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Magnitude {
    Fixed(f64),
    List(Vec<f64>),
    Range { min: f64, max: f64 },
}

impl Magnitude {
    fn values(&self) -> Vec<f64> {
        match self {
            Magnitude::Fixed(x) => vec![*x],
            Magnitude::List(xs) => xs.clone(),
            Magnitude::Range { min, max } => vec![*min, *max],
        }
    }
}

/// Junk levels of a lifting tower: level `k` is perturbed by
/// `magnitude · decay^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpec {
    pub levels: usize,
    pub decay: f64,
}

impl TowerSpec {
    pub fn rates(&self, magnitude: f64) -> Vec<f64> {
        (0..self.levels).map(|k| magnitude * self.decay.powi(k as i32)).collect()
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: Kind,
    pub group: GroupSpec,
    /// Matrix size; its meaning depends on the kind (representation
    /// dimension, total size of the Rokhlin algebra, ...). Ignored by
    /// `lift` and `graded`, whose sizes follow from the group.
    #[serde(default = "one")]
    pub dimension: usize,
    pub magnitude: Magnitude,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerSpec>,
    /// `rep`: size of an exact summand held fixed by the quotient map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_dimension: Option<usize>,
    /// `tracial`: size of the complement of the invariant corner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Precondition rejections are expected and not counted as failures.
    #[serde(default)]
    pub stress: bool,
}

/// A scenario file could not be used; `path` is a JSON pointer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn decode<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ScenarioError {
        path: pointer(e.path()),
        message: e.inner().to_string(),
    })
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = decode(text)?;
        s.validate("")?;
        Ok(s)
    }

    /// A single scenario or an array of them.
    pub fn list_from_json(text: &str) -> Result<Vec<Self>, ScenarioError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            Many(Vec<serde_json::Value>),
            One(serde::de::IgnoredAny),
        }
        match decode::<OneOrMany>(text)? {
            OneOrMany::One(_) => Ok(vec![Self::from_json(text)?]),
            OneOrMany::Many(items) => items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let text = v.to_string();
                    let s: Scenario = decode(&text).map_err(|e| ScenarioError {
                        path: format!("/{i}{}", e.path),
                        message: e.message,
                    })?;
                    s.validate(&format!("/{i}"))?;
                    Ok(s)
                })
                .collect(),
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    /// Tolerance handed to the iterative correctors.
    pub fn tol(&self) -> f64 {
        self.tolerance.unwrap_or(eqstab::homcorrect::DEFAULT_TOL)
    }

    fn validate(&self, at: &str) -> Result<(), ScenarioError> {
        let fail = |field: &str, message: String| {
            Err(ScenarioError {
                path: format!("{at}/{field}"),
                message,
            })
        };
        for m in self.magnitude.values() {
            if !(m.is_finite() && m >= 0.0) {
                return fail("magnitude", format!("perturbation magnitude must be finite and ≥ 0, got {m}"));
            }
        }
        if let Magnitude::List(xs) = &self.magnitude {
            if xs.is_empty() {
                return fail("magnitude", "magnitude list is empty".into());
            }
        }
        if let Magnitude::Range { min, max } = self.magnitude {
            if min <= 0.0 || max < min {
                return fail("magnitude", format!("range needs 0 < min ≤ max, got [{min}, {max}]"));
            }
        }
        if self.dimension == 0 {
            return fail("dimension", "dimension must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials", "at least one trial is required".into());
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return fail("tolerance", format!("tolerance must be positive, got {t}"));
            }
        }
        let group = match self.group.build() {
            Ok(g) => g,
            Err(e) => return fail("group", e.to_string()),
        };
        match self.kind {
            Kind::Lift | Kind::Rokhlin | Kind::Tracial => {
                if group.cyclic_exponents().is_err() {
                    return fail("group", format!("{} scenarios need a cyclic group", self.kind.name()));
                }
            }
            Kind::Graded => {
                if !group.is_abelian() {
                    return fail("group", "graded scenarios need an abelian group".into());
                }
            }
            _ => {}
        }
        match self.kind {
            Kind::Lift => match &self.tower {
                None => return fail("tower", "lift scenarios need a tower".into()),
                Some(t) if t.levels == 0 || t.levels > eqstab::galg::MAX_LEVELS - 1 => {
                    return fail("tower/levels", format!("levels must be in 1..{}", eqstab::galg::MAX_LEVELS));
                }
                Some(t) if !(t.decay >= 0.0 && t.decay.is_finite()) => {
                    return fail("tower/decay", "decay must be finite and ≥ 0".into());
                }
                _ => {}
            },
            Kind::Rokhlin | Kind::Tracial => {
                if self.dimension % group.order() != 0 {
                    return fail(
                        "dimension",
                        format!("dimension {} is not a multiple of the group order {}", self.dimension, group.order()),
                    );
                }
            }
            Kind::IntegralEstimate => {
                for m in self.magnitude.values() {
                    if m > 0.5 {
                        return fail("magnitude", format!("radius must be at most 0.5, got {m}"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}
