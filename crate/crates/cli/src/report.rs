use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRADICTION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// A mathematical contradiction or violation.
    Fail,
    /// Could not be decided at the given precision or budget.
    Inconclusive,
    Skipped,
}

impl Verdict {
    fn tag(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Skipped => "SKIP",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub subject: String,
    pub verdict: Verdict,
    pub reason: String,
    /// Inputs and computed values, mirrored into machine-readable output.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

impl Check {
    pub fn new(subject: impl Into<String>, verdict: Verdict, reason: impl Into<String>) -> Self {
        Check {
            subject: subject.into(),
            verdict,
            reason: reason.into(),
            data: Value::Null,
        }
    }

    pub fn with_data(mut self, data: Value) -> Self {
        self.data = data;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub counters: BTreeMap<String, u64>,
    pub elapsed: Duration,
    /// Set when the input itself was rejected.
    pub input_error: Option<String>,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Report {
            command: command.into(),
            seed,
            checks: Vec::new(),
            counters: BTreeMap::new(),
            elapsed: Duration::ZERO,
            input_error: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        *self.counters.entry(format!("{:?}", check.verdict).to_lowercase()).or_default() += 1;
        self.checks.push(check);
    }

    pub fn count(&mut self, key: &str, n: u64) {
        *self.counters.entry(key.to_string()).or_default() += n;
    }

    pub fn counter(&self, key: &str) -> u64 {
        self.counters.get(key).copied().unwrap_or(0)
    }

    pub fn reject(mut self, message: impl Into<String>) -> Self {
        self.input_error = Some(message.into());
        self
    }

    /// 2 for rejected input, else 1 if any check failed or was
    /// inconclusive, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.input_error.is_some() {
            EXIT_INPUT
        } else if self
            .checks
            .iter()
            .any(|c| matches!(c.verdict, Verdict::Fail | Verdict::Inconclusive))
        {
            EXIT_CONTRADICTION
        } else {
            EXIT_OK
        }
    }

    pub fn render(&self, format: Format, timestamps: bool) -> String {
        match format {
            Format::Text => self.render_text(timestamps),
            Format::Json => self.render_json(timestamps),
        }
    }

    fn render_text(&self, timestamps: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} (seed {})", self.command, self.seed);
        if let Some(e) = &self.input_error {
            let _ = writeln!(out, "input error: {e}");
        }
        if self.checks.is_empty() && self.input_error.is_none() {
            let _ = writeln!(out, "no checks (vacuous)");
        }
        for c in &self.checks {
            let _ = writeln!(out, "[{}] {}: {}", c.verdict.tag(), c.subject, c.reason);
        }
        let counters: Vec<String> = self.counters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if !counters.is_empty() {
            let _ = writeln!(out, "counters: {}", counters.join(" "));
        }
        if timestamps {
            let _ = writeln!(out, "elapsed: {:.3}s", self.elapsed.as_secs_f64());
        }
        let _ = writeln!(out, "exit: {}", self.exit_code());
        out
    }

    fn render_json(&self, timestamps: bool) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&serde_json::to_string(c).expect("check serializes"));
            out.push('\n');
        }
        let mut summary = json!({
            "command": self.command,
            "seed": self.seed,
            "counters": self.counters,
            "exit_code": self.exit_code(),
        });
        if let Some(e) = &self.input_error {
            summary["input_error"] = json!(e);
        }
        if timestamps {
            summary["elapsed_ms"] = json!(self.elapsed.as_millis() as u64);
            let now = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            summary["finished_at"] = json!(now);
        }
        out.push_str(&json!({ "summary": summary }).to_string());
        out.push('\n');
        out
    }
}
