use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{KSampleResult, TestResult};
use crate::simulation::StudyRow;

/// The flags that shaped a run, echoed into the report. Worker counts are
/// left out so reports do not depend on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub subcommand: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDescriptive {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub estimate: f64,
    /// ADF variance component of the estimate.
    pub variance_component: f64,
}

/// One coefficient for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub group: String,
    pub coefficient: String,
    pub value: Option<f64>,
    pub adf_variance: Option<f64>,
    /// `sqrt(adf_variance / n)`.
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub request: RequestEcho,
    pub groups: Vec<GroupDescriptive>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<TestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ksample: Option<KSampleResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub simulation: Vec<StudyRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn new(request: RequestEcho, timestamp: bool) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            request,
            groups: Vec::new(),
            results: Vec::new(),
            ksample: None,
            coefficients: Vec::new(),
            simulation: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("json: {e}")))
    }

    /// A flat CSV view: simulation rows, coefficient rows, or one row per test.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if !self.simulation.is_empty() {
            return crate::simulation::write_csv(&self.simulation, out);
        }
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        if !self.coefficients.is_empty() {
            w.write_record(["group", "coefficient", "value", "adf_variance", "std_error", "error"])
                .map_err(io)?;
            for c in &self.coefficients {
                w.write_record([
                    c.group.clone(),
                    c.coefficient.clone(),
                    opt(c.value),
                    opt(c.adf_variance),
                    opt(c.std_error),
                    c.error.clone().unwrap_or_default(),
                ])
                .map_err(io)?;
            }
        } else if let Some(k) = &self.ksample {
            w.write_record(["test", "statistic", "df", "p_value", "method", "replicates_used"])
                .map_err(io)?;
            w.write_record([
                "ksample".to_string(),
                k.statistic.to_string(),
                k.df.to_string(),
                k.p_value.to_string(),
                k.method.clone(),
                k.replicates_used.to_string(),
            ])
            .map_err(io)?;
            for p in k.pairwise.iter().flatten() {
                w.write_record([
                    format!("{}-{}", p.first + 1, p.second + 1),
                    p.result.statistic.to_string(),
                    String::new(),
                    p.p_adjusted.to_string(),
                    p.result.method.to_string(),
                    p.result.replicates_used.to_string(),
                ])
                .map_err(io)?;
            }
        } else {
            w.write_record([
                "method",
                "coefficient",
                "statistic",
                "p_right",
                "p_left",
                "p_two",
                "p_value",
                "ci_lower",
                "ci_upper",
                "ci_level",
                "estimate_1",
                "estimate_2",
                "difference",
                "std_error",
                "replicates_used",
                "degenerate_redraws",
                "seed",
            ])
            .map_err(io)?;
            for r in &self.results {
                w.write_record([
                    r.method.to_string(),
                    r.coefficient.clone(),
                    r.statistic.to_string(),
                    r.p_right.to_string(),
                    r.p_left.to_string(),
                    r.p_two.to_string(),
                    r.p_value.to_string(),
                    opt(r.ci.map(|c| c.lower)),
                    opt(r.ci.map(|c| c.upper)),
                    opt(r.ci.map(|c| c.level)),
                    r.alpha_estimates[0].to_string(),
                    r.alpha_estimates[1].to_string(),
                    r.difference.to_string(),
                    r.std_error.to_string(),
                    r.replicates_used.to_string(),
                    r.degenerate_redraws.to_string(),
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                ])
                .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo() -> RequestEcho {
        RequestEcho {
            subcommand: "compare".into(),
            inputs: vec!["a.csv".into(), "b.csv".into()],
            method: Some("permutation".into()),
            variance: Some("adf".into()),
            alternative: Some("two-sided".into()),
            level: Some(0.05),
            replicates: Some(100),
            seed: Some(42),
            coefficient: Some("alpha".into()),
        }
    }

    #[test]
    fn json_round_trip() {
        let mut doc = ReportDocument::new(echo(), false);
        doc.groups.push(GroupDescriptive {
            label: "a.csv".into(),
            n: 10,
            k: 3,
            estimate: 0.7,
            variance_component: 0.12,
        });
        doc.notes.push("method defaulted to permutation".into());
        let json = doc.to_json().unwrap();
        assert!(!json.contains("timestamp"));
        let back: ReportDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        assert!(ReportDocument::new(echo(), true).timestamp.is_some());
    }
}
