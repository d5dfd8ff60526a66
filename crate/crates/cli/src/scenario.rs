//! Scenario files: problem data plus default task parameters.

use std::path::Path;

use impulse_attain::dynamics::{
    double_integrator_system, position_kernel, velocity_kernel, BoxSet, ConstraintSpec, ImpulseSystem,
};
use impulse_attain::{Error, PiecewiseFn, Rat, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};
use serde_json::Value;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    t0: Rat,
    theta0: Rat,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum KernelRef {
    PositionAt(Rat),
    VelocityAt(Rat),
    Kernel(PiecewiseFn<Rat>),
}

/// Box bound: a JSON number, a rational string, or `"inf"` / `"-inf"`.
#[derive(Debug)]
struct Bound(f64);

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n.as_f64().map(Bound).ok_or_else(|| D::Error::custom("bad number")),
            Value::String(s) => match s.trim() {
                "inf" | "+inf" | "infinity" => Ok(Bound(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Bound(f64::NEG_INFINITY)),
                other => other.parse::<Rat>().map(|r| Bound(r.to_f64())).map_err(D::Error::custom),
            },
            other => Err(D::Error::custom(format!("expected a bound, got {other}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    s: Vec<KernelRef>,
    #[serde(rename = "Y")]
    y: Vec<Vec<(Bound, Bound)>>,
    /// 1-based indices of exactly enforced coordinates.
    #[serde(rename = "J", default)]
    j: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    domain: Option<RawDomain>,
    b: Rat,
    #[serde(default)]
    c: Option<PiecewiseFn<Rat>>,
    #[serde(default)]
    pi: Option<Vec<PiecewiseFn<Rat>>>,
    #[serde(default)]
    constraints: Option<RawConstraints>,
    #[serde(default)]
    mesh: Option<usize>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    schedule: Option<Vec<(usize, f64)>>,
    #[serde(default)]
    directions: Option<usize>,
    #[serde(default)]
    t_grid: Option<usize>,
}

/// Task parameters stored in the scenario; command-line flags override them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TaskParams {
    pub mesh: Option<usize>,
    pub epsilon: Option<f64>,
    pub schedule: Vec<(usize, f64)>,
    pub directions: Option<usize>,
    pub t_grid: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: Option<String>,
    pub system: ImpulseSystem<Rat>,
    pub constraints: ConstraintSpec<Rat>,
    pub params: TaskParams,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.build()
    }
}

impl RawScenario {
    fn build(self) -> Result<Scenario> {
        let system = match (&self.c, self.pi) {
            (Some(c), None) => double_integrator_system(c, self.b)?,
            (None, Some(pi)) => ImpulseSystem::new(self.b, pi, None)?,
            _ => return Err(Error::Invalid("exactly one of `c` and `pi` must be given".into())),
        };
        if let Some(d) = &self.domain {
            if d.t0 != *system.t0() || d.theta0 != *system.theta0() {
                return Err(Error::Domain(format!(
                    "declared domain [{}, {}] differs from kernel domain [{}, {}]",
                    d.t0,
                    d.theta0,
                    system.t0(),
                    system.theta0()
                )));
            }
        }
        let constraints = match self.constraints {
            None => ConstraintSpec::unconstrained(),
            Some(rc) => build_constraints(rc, self.c.as_ref())?,
        };
        constraints.check_conditions()?;
        if let Some(k) = constraints.kernels().first() {
            if k.t0() != system.t0() || k.theta0() != system.theta0() {
                return Err(Error::Domain("constraint kernels live on a different domain".into()));
            }
        }
        Ok(Scenario {
            name: self.name,
            system,
            constraints,
            params: TaskParams {
                mesh: self.mesh,
                epsilon: self.epsilon,
                schedule: self.schedule.unwrap_or_default(),
                directions: self.directions,
                t_grid: self.t_grid,
            },
        })
    }
}

fn build_constraints(rc: RawConstraints, c: Option<&PiecewiseFn<Rat>>) -> Result<ConstraintSpec<Rat>> {
    let need_c = || Error::Invalid("position_at / velocity_at constraints need the thrust `c`".into());
    let kernels =
        rc.s.into_iter()
            .map(|k| match k {
                KernelRef::PositionAt(t1) => position_kernel(c.ok_or_else(need_c)?, &t1),
                KernelRef::VelocityAt(t2) => velocity_kernel(c.ok_or_else(need_c)?, &t2),
                KernelRef::Kernel(f) => Ok(f),
            })
            .collect::<Result<Vec<_>>>()?;
    let boxes =
        rc.y.into_iter()
            .map(|b| BoxSet::new(b.into_iter().map(|(lo, hi)| (lo.0, hi.0)).collect()))
            .collect::<Result<Vec<_>>>()?;
    let n = kernels.len();
    let exact =
        rc.j.into_iter()
            .map(|j| {
                if j == 0 || j > n {
                    Err(Error::Invalid(format!("J index {j} outside 1..={n}")))
                } else {
                    Ok(j - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
    ConstraintSpec::new(kernels, boxes, exact)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: &str = r#"{
        "domain": {"t0": "0", "theta0": "1"},
        "b": "1",
        "c": {"breakpoints": ["0", "1"], "pieces": [["1"]]},
        "mesh": 4
    }"#;

    #[test]
    fn loads_unconstrained_double_integrator() {
        let s = Scenario::from_json(UNIT).unwrap();
        assert_eq!(s.system.dim(), 2);
        assert_eq!(s.constraints.dim(), 0);
        assert_eq!(s.params.mesh, Some(4));
    }

    #[test]
    fn builds_constraints_with_one_based_j() {
        let text = r#"{
            "b": "1",
            "c": {"breakpoints": ["0", "1"], "pieces": [["1"]]},
            "constraints": {
                "s": [{"position_at": "1/2"}, {"velocity_at": "1/2"}],
                "Y": [[["1/10", 0.2], ["1/2", "1/2"]], [["-inf", "inf"], [0, 1]]],
                "J": [2]
            }
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.constraints.exact(), &[1]);
        assert_eq!(s.constraints.boxes()[0].bounds(), &[(0.1, 0.2), (0.5, 0.5)]);
        assert_eq!(s.constraints.boxes()[1].bounds()[0], (f64::NEG_INFINITY, f64::INFINITY));
    }

    #[test]
    fn rejects_bad_scenarios() {
        let both = r#"{"b": "1", "c": {"breakpoints": ["0", "1"], "pieces": [["1"]]},
                       "pi": [{"breakpoints": ["0", "1"], "pieces": [["1"]]}]}"#;
        assert!(matches!(Scenario::from_json(both), Err(Error::Invalid(_))));
        let bad_j = r#"{"b": "1", "c": {"breakpoints": ["0", "1"], "pieces": [["1"]]},
                        "constraints": {"s": [{"velocity_at": "1"}], "Y": [[[0, 1]]], "J": [2]}}"#;
        assert!(Scenario::from_json(bad_j).is_err());
        // exact coordinate on a non-step kernel
        let ramp = r#"{"b": "1", "c": {"breakpoints": ["0", "1"], "pieces": [["1"]]},
                       "constraints": {"s": [{"position_at": "1/2"}], "Y": [[[0, 1]]], "J": [1]}}"#;
        assert!(matches!(Scenario::from_json(ramp), Err(Error::Precondition(_))));
        let unknown = r#"{"b": "1", "c": {"breakpoints": ["0", "1"], "pieces": [["1"]]}, "mesh_size": 3}"#;
        assert!(matches!(Scenario::from_json(unknown), Err(Error::Parse(_))));
        let wrong_domain = r#"{"domain": {"t0": "0", "theta0": "2"}, "b": "1",
                               "pi": [{"breakpoints": ["0", "1"], "pieces": [["1"]]}]}"#;
        assert!(matches!(Scenario::from_json(wrong_domain), Err(Error::Domain(_))));
    }

    #[test]
    fn pi_scenarios_cannot_use_builders() {
        let text = r#"{"b": "1", "pi": [{"breakpoints": ["0", "1"], "pieces": [["1"]]}],
                       "constraints": {"s": [{"velocity_at": "1/2"}], "Y": [[[0, 1]]]}}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Invalid(_))));
    }
}
