//! The built-in scenario suite.

use eqstab::groups::GroupSpec;

use crate::scenario::{Kind, Magnitude, Scenario, TowerSpec};

fn base(name: &str, kind: Kind, group: GroupSpec, dimension: usize, magnitude: Magnitude, trials: usize) -> Scenario {
    Scenario {
        name: Some(name.to_string()),
        kind,
        group,
        dimension,
        magnitude,
        seed: 2024,
        trials,
        tower: None,
        quotient_dimension: None,
        complement: None,
        tolerance: None,
        stress: false,
    }
}

fn cyclic(order: usize) -> GroupSpec {
    GroupSpec::Cyclic { order }
}

/// Every scenario of the built-in suite.
pub fn builtin() -> Vec<Scenario> {
    let mut out = vec![
        base("rep-exact", Kind::Rep, GroupSpec::Symmetric { degree: 3 }, 4, Magnitude::Fixed(0.0), 4),
        base(
            "rep-cyclic",
            Kind::Rep,
            cyclic(5),
            6,
            Magnitude::Range { min: 1e-3, max: 0.01 },
            40,
        ),
        base(
            "rep-dihedral",
            Kind::Rep,
            GroupSpec::Dihedral { n: 4 },
            5,
            Magnitude::List(vec![0.001, 0.004, 0.008]),
            30,
        ),
        base(
            "rep-product",
            Kind::Rep,
            GroupSpec::Product {
                left: Box::new(cyclic(2)),
                right: Box::new(cyclic(3)),
            },
            4,
            Magnitude::Fixed(0.005),
            20,
        ),
        base("cocycle-symmetric", Kind::Cocycle, GroupSpec::Symmetric { degree: 3 }, 4, Magnitude::Range { min: 1e-3, max: 0.02 }, 30),
        base("cocycle-cyclic", Kind::Cocycle, cyclic(4), 3, Magnitude::Fixed(0.01), 20),
        base("rokhlin-z3", Kind::Rokhlin, cyclic(3), 6, Magnitude::Fixed(0.02), 20),
        base("rokhlin-z2", Kind::Rokhlin, cyclic(2), 6, Magnitude::Fixed(0.01), 20),
        base("tracial-z3", Kind::Tracial, cyclic(3), 6, Magnitude::Fixed(0.005), 10),
        base("graded-z3", Kind::Graded, cyclic(3), 3, Magnitude::Fixed(0.001), 20),
        base(
            "graded-klein",
            Kind::Graded,
            GroupSpec::Product {
                left: Box::new(cyclic(2)),
                right: Box::new(cyclic(2)),
            },
            4,
            Magnitude::Fixed(0.001),
            10,
        ),
        base("estimate-s3", Kind::IntegralEstimate, GroupSpec::Symmetric { degree: 3 }, 4, Magnitude::Fixed(0.3), 20),
        base("estimate-small", Kind::IntegralEstimate, cyclic(6), 3, Magnitude::Range { min: 1e-3, max: 0.4 }, 20),
    ];
    let mut quotient = base("rep-quotient", Kind::Rep, cyclic(3), 3, Magnitude::Fixed(0.005), 20);
    quotient.quotient_dimension = Some(2);
    out.push(quotient);
    let mut lift = base("lift-z3", Kind::Lift, cyclic(3), 3, Magnitude::Fixed(0.5), 10);
    lift.tower = Some(TowerSpec { levels: 8, decay: 0.3 });
    out.push(lift);
    let mut lift = base("lift-z4", Kind::Lift, cyclic(4), 4, Magnitude::Fixed(0.2), 10);
    lift.tower = Some(TowerSpec { levels: 6, decay: 0.2 });
    out.push(lift);
    out
}

/// The default scenario of a single kind, as run by the subcommands
/// without `--scenario`.
pub fn default_for(kind: Kind) -> Scenario {
    builtin()
        .into_iter()
        .find(|s| s.kind == kind && s.name.as_deref() != Some("rep-exact"))
        .expect("every kind has a built-in scenario")
}
