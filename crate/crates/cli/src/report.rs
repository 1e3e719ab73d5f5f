use cqcount::reduction::OracleStats;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Fptras,
    Fhw,
}

impl Method {
    pub fn is_approximate(self) -> bool {
        self == Method::Fptras
    }
}

/// Parameters of an approximate run, echoed back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxParams {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub hom_backend: String,
    /// Whether the estimator fell back to exact halving.
    pub exact_path: bool,
    /// Cap on simulated edge-free calls in the final attempt.
    pub call_cap: u64,
    pub per_call_delta: f64,
    pub walks: u64,
    pub oracle: OracleStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineWidths {
    /// Fractional hypertreewidth of the decomposition used, as `p/q`.
    pub fhw: String,
    pub fhw_exact: bool,
    pub td_nodes: usize,
    pub automaton_states: usize,
    pub automaton_transitions: usize,
}

/// The single document `count` writes to standard output. Exactly one of
/// `count` (exact methods) and `estimate` (approximate methods) is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub method: Method,
    pub query: String,
    pub database: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<PipelineWidths>,
    pub duration_ms: f64,
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("method: {:?}\n", self.method).to_lowercase();
        if let Some(c) = self.count {
            out += &format!("count: {c}\n");
        }
        if let Some(e) = self.estimate {
            out += &format!("estimate: {e}\n");
        }
        if let Some(a) = &self.approx {
            out += &format!(
                "epsilon: {}\ndelta: {}\nseed: {}\nhom backend: {}\nhom calls: {}\n",
                a.epsilon, a.delta, a.seed, a.hom_backend, a.oracle.hom_calls
            );
        }
        if let Some(w) = &self.widths {
            out += &format!("fhw: {}{}\n", w.fhw, if w.fhw_exact { "" } else { " (upper bound)" });
        }
        out += &format!("duration: {:.1} ms\n", self.duration_ms);
        out
    }
}
