//! Structured reports: one document per invocation, listing claims.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Computed but not a checked statement (slopes, cohomology orders, …).
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub paper_ref: String,
    pub instance: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub document: Option<String>,
    pub precision: Option<u32>,
    pub window: Option<i32>,
    pub seed: u64,
    pub claims: Vec<Claim>,
    pub data: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Report { command: command.into(), document: None, precision: None, window: None, seed, claims: vec![], data: BTreeMap::new() }
    }

    pub fn check(&mut self, paper_ref: &str, instance: impl Into<String>, ok: bool, detail: Option<String>) {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.claims.push(Claim { paper_ref: paper_ref.into(), instance: instance.into(), verdict, detail });
    }

    pub fn info(&mut self, paper_ref: &str, instance: impl Into<String>, detail: impl Into<String>) {
        self.claims.push(Claim {
            paper_ref: paper_ref.into(),
            instance: instance.into(),
            verdict: Verdict::Info,
            detail: Some(detail.into()),
        });
    }

    pub fn put(&mut self, key: &str, v: impl Serialize) {
        self.data.insert(key.into(), serde_json::to_value(v).expect("report data serializes"));
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = self.command.clone();
        if let Some(d) = &self.document {
            out.push_str(&format!(" on {d}"));
        }
        if let Some(n) = self.precision {
            out.push_str(&format!(" (precision {n}"));
            if let Some(w) = self.window {
                out.push_str(&format!(", window {w}"));
            }
            out.push(')');
        }
        out.push('\n');
        for c in &self.claims {
            let tag = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Info => "    ",
            };
            out.push_str(&format!("  [{tag}] {:<28} {}", c.paper_ref, c.instance));
            if let Some(d) = &c.detail {
                out.push_str(&format!(": {d}"));
            }
            out.push('\n');
        }
        out
    }
}
