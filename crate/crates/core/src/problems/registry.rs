use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::catalog::{Das1, Do2dk, Grv1, Grv2, Vfm1, Zlt1q};
use super::MooProblem;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Named parameters (`nbar`, `qbar`, `n`, `r`) for the registry.
pub type ProblemParams = BTreeMap<String, f64>;

/// Every registered test problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemName {
    Zlt1,
    Grv1,
    Vfm1,
    Zlt1q,
    Grv2,
    Das1,
    Do2dk,
    Vfm1Constr,
}

impl ProblemName {
    pub const ALL: [ProblemName; 8] = [
        ProblemName::Zlt1,
        ProblemName::Grv1,
        ProblemName::Vfm1,
        ProblemName::Zlt1q,
        ProblemName::Grv2,
        ProblemName::Das1,
        ProblemName::Do2dk,
        ProblemName::Vfm1Constr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Zlt1 => "ZLT1",
            ProblemName::Grv1 => "GRV1",
            ProblemName::Vfm1 => "VFM1",
            ProblemName::Zlt1q => "ZLT1q",
            ProblemName::Grv2 => "GRV2",
            ProblemName::Das1 => "DAS1",
            ProblemName::Do2dk => "DO2DK",
            ProblemName::Vfm1Constr => "VFM1constr",
        }
    }

    pub fn is_constrained(self) -> bool {
        matches!(self, ProblemName::Das1 | ProblemName::Do2dk | ProblemName::Vfm1Constr)
    }

    /// Parameters accepted by this problem.
    pub fn accepted_params(self) -> &'static [&'static str] {
        match self {
            ProblemName::Zlt1q => &["nbar", "qbar"],
            ProblemName::Grv1 | ProblemName::Grv2 => &["nbar"],
            ProblemName::Do2dk => &["n", "r"],
            _ => &[],
        }
    }

    /// Defaults used when a parameter is omitted. `r` for DO2DK has no default.
    pub fn default_params(self) -> ProblemParams {
        let pairs: &[(&str, f64)] = match self {
            ProblemName::Zlt1q => &[("nbar", 5.0), ("qbar", 5.0)],
            ProblemName::Grv1 => &[("nbar", 1.0)],
            ProblemName::Grv2 => &[("nbar", 2.0)],
            ProblemName::Do2dk => &[("n", 30.0)],
            _ => &[],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// Default weight vector used as a neighborhood center and as the Nelder-Mead start.
    pub fn default_start(self) -> Vec<f64> {
        match self {
            ProblemName::Zlt1 | ProblemName::Grv1 => vec![0.8, 0.1, 0.1],
            ProblemName::Vfm1 | ProblemName::Vfm1Constr => vec![0.4, 0.2, 0.4],
            ProblemName::Zlt1q => vec![0.6, 0.1, 0.1, 0.1, 0.1],
            ProblemName::Grv2 => vec![0.9, 0.1],
            ProblemName::Das1 => vec![0.4, 0.6],
            ProblemName::Do2dk => vec![0.2, 0.8],
        }
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemName::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

fn count_param(params: &ProblemParams, key: &str, min: usize) -> Result<usize> {
    let v = params[key];
    if !v.is_finite() || v.fract() != 0.0 || v < min as f64 {
        return Err(Error::InvalidParameter {
            name: key.to_string(),
            reason: format!("expected an integer >= {min}, got {v}"),
        });
    }
    Ok(v as usize)
}

/// Builds a registered problem by name.
///
/// Missing parameters fall back to [`ProblemName::default_params`]; unknown
/// parameter names are rejected.
pub fn make_problem<T: Real>(name: &str, params: &ProblemParams) -> Result<Box<dyn MooProblem<T>>> {
    let id: ProblemName = name.parse()?;
    for key in params.keys() {
        if !id.accepted_params().contains(&key.as_str()) {
            return Err(Error::InvalidParameter {
                name: key.clone(),
                reason: format!("not a parameter of {id}"),
            });
        }
    }
    let mut p = id.default_params();
    p.extend(params.iter().map(|(k, v)| (k.clone(), *v)));

    Ok(match id {
        ProblemName::Zlt1 => Box::new(Zlt1q::zlt1()),
        ProblemName::Zlt1q => {
            let n = count_param(&p, "nbar", 2)?;
            let q = count_param(&p, "qbar", 2)?;
            if q > n {
                return Err(Error::InvalidParameter {
                    name: "qbar".into(),
                    reason: format!("qbar ({q}) must not exceed nbar ({n})"),
                });
            }
            Box::new(Zlt1q::new(n, q))
        }
        ProblemName::Grv1 => {
            // published matrices are 2x2, i.e. scalar blocks
            if count_param(&p, "nbar", 1)? != 1 {
                return Err(Error::InvalidParameter {
                    name: "nbar".into(),
                    reason: "GRV1 data is published for nbar = 1 only".into(),
                });
            }
            Box::new(Grv1)
        }
        ProblemName::Vfm1 => Box::new(Vfm1::unconstrained()),
        ProblemName::Vfm1Constr => Box::new(Vfm1::constrained()),
        ProblemName::Grv2 => Box::new(Grv2::new(count_param(&p, "nbar", 1)?)),
        ProblemName::Das1 => Box::new(Das1),
        ProblemName::Do2dk => {
            let n = count_param(&p, "n", 2)?;
            let r = *p.get("r").ok_or_else(|| Error::InvalidParameter {
                name: "r".into(),
                reason: "DO2DK requires the bound r".into(),
            })?;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "r".into(),
                    reason: format!("must be positive, got {r}"),
                });
            }
            Box::new(Do2dk::new(n, r))
        }
    })
}
