use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dc_solver::DcProblem;
use crate::domain_model::{mixture, DiscreteJointDistribution, SimplexVector};
use crate::error::{Error, Result};
use crate::predictors::{
    empirical_loss_bound, validate_loss_bound, Hypothesis, LossKind, LossSpec, Model, ProbabilityHypothesis,
    RegressionHypothesis,
};

/// A mixture `D_λ` of the sources used for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTarget {
    pub name: String,
    pub lambda: SimplexVector,
}

/// Sources, their predictors and the loss, with evaluation targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: Model,
    pub loss: LossSpec,
    /// Real label of each output index (model R); empty in model P.
    pub labels: Vec<f64>,
    pub sources: Vec<DiscreteJointDistribution>,
    pub hypotheses: Vec<Hypothesis>,
    pub targets: Vec<NamedTarget>,
    pub provenance: String,
}

impl Scenario {
    /// Builds and validates a scenario. `m = None` uses the empirical pointwise bound.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        model: Model,
        kind: LossKind,
        m: Option<f64>,
        labels: Vec<f64>,
        sources: Vec<DiscreteJointDistribution>,
        hypotheses: Vec<Hypothesis>,
        targets: Option<Vec<NamedTarget>>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let m = match m {
            Some(m) => m,
            None => empirical_loss_bound(kind, &sources, &hypotheses, &labels)?,
        };
        // A zero bound only happens when every source predictor is exact.
        let loss = LossSpec::new(kind, if m > 0.0 { m } else { f64::MIN_POSITIVE })?;
        let p = sources.len();
        let targets = targets.unwrap_or_else(|| default_targets(p));
        let s = Scenario {
            name: name.into(),
            model,
            loss,
            labels,
            sources,
            hypotheses,
            targets,
            provenance: provenance.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn p(&self) -> usize {
        self.sources.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.sources[0].shape()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        let p = self.sources.len();
        if p == 0 {
            return bad("no sources".into());
        }
        if self.hypotheses.len() != p {
            return bad(format!("{p} sources but {} hypotheses", self.hypotheses.len()));
        }
        let shape = self.sources[0].shape();
        if self.sources.iter().any(|d| d.shape() != shape) {
            return bad("sources differ in shape".into());
        }
        for (k, h) in self.hypotheses.iter().enumerate() {
            if h.model() != self.model {
                return bad(format!("hypothesis {k} does not belong to model {:?}", self.model));
            }
            let ok = match h {
                Hypothesis::Regression(r) => r.n_x() == shape.0,
                Hypothesis::Probability(q) => q.shape() == shape,
            };
            if !ok {
                return bad(format!("hypothesis {k} does not match the {} x {} table", shape.0, shape.1));
            }
        }
        match (self.model, self.loss.kind) {
            (Model::Regression, LossKind::Squared) => {
                if self.labels.len() != shape.1 {
                    return bad(format!("{} labels for {} outputs", self.labels.len(), shape.1));
                }
            }
            (Model::Probability, LossKind::CrossEntropy) => {}
            (m, k) => return bad(format!("{k:?} loss in model {m:?}")),
        }
        for t in &self.targets {
            if t.lambda.len() != p {
                return bad(format!("target `{}` has {} weights for {p} sources", t.name, t.lambda.len()));
            }
        }
        validate_loss_bound(&self.loss, &self.sources, &self.hypotheses, &self.labels)
    }

    /// The solver's view of this scenario.
    pub fn problem(&self, eta: f64) -> Result<DcProblem> {
        DcProblem::new(self.loss, self.sources.clone(), self.hypotheses.clone(), self.labels.clone(), eta)
    }

    pub fn target_distribution(&self, lambda: &SimplexVector) -> Result<DiscreteJointDistribution> {
        mixture(lambda, &self.sources)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            model: self.model,
            loss: LossFile { kind: self.loss.kind, m: Some(self.loss.m) },
            n_x: self.shape().0,
            n_y: self.shape().1,
            labels: self.labels.clone(),
            sources: self.sources.iter().map(|d| SourceFile { probs: d.rows() }).collect(),
            hypotheses: self
                .hypotheses
                .iter()
                .map(|h| HypothesisFile {
                    values: match h {
                        Hypothesis::Regression(r) => HypothesisValues::Vector(r.values().to_vec()),
                        Hypothesis::Probability(q) => HypothesisValues::Rows(q.rows()),
                    },
                })
                .collect(),
            targets: self.targets.iter().map(|t| TargetFile { name: t.name.clone(), lambda: t.lambda.as_slice().to_vec() }).collect(),
            provenance: Some(self.provenance.clone()),
        }
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let wrap = |e: Error| match e {
            Error::InvalidScenario(_) => e,
            other => Error::InvalidScenario(other.to_string()),
        };
        let sources = file
            .sources
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if s.probs.len() != file.n_x || s.probs.iter().any(|r| r.len() != file.n_y) {
                    return Err(Error::InvalidScenario(format!("source {k} is not {} x {}", file.n_x, file.n_y)));
                }
                DiscreteJointDistribution::from_rows(&s.probs)
                    .map_err(|e| Error::InvalidScenario(format!("source {k}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let hypotheses = file
            .hypotheses
            .iter()
            .enumerate()
            .map(|(k, h)| {
                let parsed: Result<Hypothesis> = match (file.model, &h.values) {
                    (Model::Regression, HypothesisValues::Vector(v)) => {
                        RegressionHypothesis::new(v.clone()).map(Into::into)
                    }
                    (Model::Probability, HypothesisValues::Rows(r)) => {
                        ProbabilityHypothesis::from_rows(r).map(Into::into)
                    }
                    _ => Err(Error::InvalidScenario("hypothesis values do not fit the model".into())),
                };
                parsed.map_err(|e| Error::InvalidScenario(format!("hypothesis {k}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let targets = file
            .targets
            .iter()
            .map(|t| {
                SimplexVector::new(t.lambda.clone())
                    .map(|lambda| NamedTarget { name: t.name.clone(), lambda })
                    .map_err(|e| Error::InvalidScenario(format!("target `{}`: {e}", t.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(
            file.name,
            file.model,
            file.loss.kind,
            file.loss.m,
            file.labels,
            sources,
            hypotheses,
            Some(targets),
            file.provenance.unwrap_or_default(),
        )
        .map_err(wrap)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidScenario(format!("parse error: {e}")))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidScenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Each source alone, every pairwise even mixture, and the uniform mixture.
pub fn default_targets(p: usize) -> Vec<NamedTarget> {
    let mut out: Vec<NamedTarget> =
        (0..p).map(|k| NamedTarget { name: format!("D_{}", k + 1), lambda: SimplexVector::vertex(p, k) }).collect();
    for i in 0..p {
        for j in i + 1..p {
            let mut w = vec![0.0; p];
            w[i] = 0.5;
            w[j] = 0.5;
            out.push(NamedTarget { name: format!("D_{}+D_{}", i + 1, j + 1), lambda: SimplexVector::new(w).unwrap() });
        }
    }
    if p > 2 {
        out.push(NamedTarget { name: "uniform".into(), lambda: SimplexVector::uniform(p) });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub model: Model,
    pub loss: LossFile,
    pub n_x: usize,
    pub n_y: usize,
    #[serde(default)]
    pub labels: Vec<f64>,
    pub sources: Vec<SourceFile>,
    pub hypotheses: Vec<HypothesisFile>,
    #[serde(default)]
    pub targets: Vec<TargetFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFile {
    pub kind: LossKind,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFile {
    pub probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HypothesisValues {
    Vector(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFile {
    pub values: HypothesisValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetFile {
    pub name: String,
    pub lambda: Vec<f64>,
}
