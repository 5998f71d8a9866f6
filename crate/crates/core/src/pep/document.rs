use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::certificate::{DualCertificate, PairMultiplier};
use super::schedule::{ScheduleKind, StepSchedule};
use super::spec::{CriterionKind, FunctionClassSpec, InitKind, InitSpec, ProblemSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDocument {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitDocument {
    pub kind: InitKind,
    #[serde(rename = "R")]
    pub r: f64,
}

/// JSON form of a schedule together with its problem specification.
///
/// ```json
/// {"N": 2, "kind": "memoryless", "coeffs": [[1.5], [1.5, 1.8]],
///  "class": {"L": 1, "mu": 0, "epsilon": 0},
///  "criterion": "final_objective_gap", "init": {"kind": "distance_to_opt", "R": 1}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    #[serde(rename = "N")]
    pub n: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_length: Option<usize>,
    pub coeffs: Vec<Vec<f64>>,
    pub class: ClassDocument,
    pub criterion: CriterionKind,
    pub init: InitDocument,
}

impl ScheduleDocument {
    pub fn new(schedule: &StepSchedule<f64>, spec: &ProblemSpec<f64>) -> Self {
        let core_length = match schedule.kind() {
            ScheduleKind::Cyclic { core_length } => Some(core_length),
            _ => None,
        };
        Self {
            n: schedule.n_steps(),
            kind: schedule.kind().name().to_string(),
            core_length,
            coeffs: schedule.coeffs().to_vec(),
            class: ClassDocument { l: spec.class.l(), mu: spec.class.mu(), epsilon: spec.class.epsilon() },
            criterion: spec.criterion,
            init: InitDocument { kind: spec.init.kind, r: spec.init.radius },
        }
    }

    pub fn schedule_kind(&self) -> Result<ScheduleKind> {
        match (self.kind.as_str(), self.core_length) {
            ("memoryless", _) => Ok(ScheduleKind::Memoryless),
            ("full", _) => Ok(ScheduleKind::Full),
            ("cyclic", Some(core_length)) => Ok(ScheduleKind::Cyclic { core_length }),
            ("cyclic", None) => Err(Error::Parse("cyclic schedule without core_length".into())),
            (other, _) => Err(Error::Parse(format!("unknown schedule kind '{other}'"))),
        }
    }

    pub fn schedule(&self) -> Result<StepSchedule<f64>> {
        let s = StepSchedule::new(self.schedule_kind()?, self.coeffs.clone())?;
        if s.n_steps() != self.n {
            return Err(Error::InvalidSchedule(format!("N = {} but {} coefficient rows", self.n, s.n_steps())));
        }
        Ok(s)
    }

    pub fn spec(&self) -> Result<ProblemSpec<f64>> {
        ProblemSpec::new(
            FunctionClassSpec::new(self.class.l, self.class.mu, self.class.epsilon)?,
            self.criterion,
            InitSpec::new(self.init.kind, self.init.r)?,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedValue {
    pub index: usize,
    pub value: f64,
}

/// JSON form of a [`DualCertificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub bound: f64,
    pub tau: f64,
    pub lambda: Vec<PairMultiplier<f64>>,
    #[serde(default)]
    pub eta: Vec<IndexedValue>,
    #[serde(default)]
    pub sigma: Vec<IndexedValue>,
    #[serde(default)]
    pub slack: Vec<Vec<f64>>,
}

impl From<&DualCertificate<f64>> for CertificateDocument {
    fn from(c: &DualCertificate<f64>) -> Self {
        let idx = |v: &[(usize, f64)]| v.iter().map(|&(index, value)| IndexedValue { index, value }).collect();
        Self {
            bound: c.bound,
            tau: c.tau,
            lambda: c.lambda.clone(),
            eta: idx(&c.eta),
            sigma: idx(&c.sigma),
            slack: c.slack.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

impl CertificateDocument {
    pub fn certificate(&self) -> Result<DualCertificate<f64>> {
        let m = self.slack.len();
        if self.slack.iter().any(|r| r.len() != m) {
            return Err(Error::Parse("slack matrix is not square".into()));
        }
        let slack = DMatrix::from_fn(m, m, |i, j| self.slack[i][j]);
        let pairs = |v: &[IndexedValue]| v.iter().map(|e| (e.index, e.value)).collect();
        Ok(DualCertificate {
            tau: self.tau,
            lambda: self.lambda.clone(),
            eta: pairs(&self.eta),
            sigma: pairs(&self.sigma),
            slack,
            bound: self.bound,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_field_names() {
        let s = StepSchedule::cyclic(&[1.0, 2.0], 4).unwrap();
        let doc = ScheduleDocument::new(&s, &ProblemSpec::smooth_convex_gap(1.0, 1.0));
        let v: serde_json::Value = serde_json::to_value(&doc).unwrap();
        for key in ["N", "kind", "core_length", "coeffs", "class", "criterion", "init"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["class"]["L"], 1.0);
        assert_eq!(v["init"]["R"], 1.0);
        assert_eq!(v["kind"], "cyclic");
        let back = ScheduleDocument::from_json(&v.to_string()).unwrap();
        assert_eq!(back.schedule().unwrap(), s);
    }

    #[test]
    fn short_names_accepted() {
        let text = r#"{"N":1,"kind":"memoryless","coeffs":[[1.5]],"class":{"L":1},"criterion":"gap","init":{"kind":"dist","R":1}}"#;
        let doc = ScheduleDocument::from_json(text).unwrap();
        assert_eq!(doc.spec().unwrap(), ProblemSpec::smooth_convex_gap(1.0, 1.0));
        assert!(ScheduleDocument::from_json("{\"N\": 1,").is_err());
    }
}
