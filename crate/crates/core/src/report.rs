//! Deterministic reports: per-check verdicts plus supporting data, rendered
//! either as text or as JSON with the same content.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Supporting output that confirms nothing by itself.
    Info,
    Confirmed,
    HypothesisUnmet,
    Counterexample,
    BudgetExceeded,
    Invalid,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Info => "info",
            Verdict::Confirmed => "confirmed",
            Verdict::HypothesisUnmet => "hypothesis unmet",
            Verdict::Counterexample => "counterexample",
            Verdict::BudgetExceeded => "budget exceeded",
            Verdict::Invalid => "invalid input",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Info | Verdict::Confirmed => 0,
            Verdict::HypothesisUnmet => 2,
            Verdict::Counterexample => 3,
            Verdict::BudgetExceeded => 4,
            Verdict::Invalid => 5,
        }
    }

    /// Pass/fail from a boolean check.
    pub fn from_holds(holds: bool) -> Self {
        if holds {
            Verdict::Confirmed
        } else {
            Verdict::Counterexample
        }
    }
}

/// Budget overruns are their own verdict; an operation refusing inputs that
/// miss its preconditions is an unmet hypothesis; the quotient tripwire is
/// a counterexample; everything else is invalid input.
pub fn verdict_of(e: &Error) -> Verdict {
    match e {
        Error::SearchBudgetExceeded { .. } => Verdict::BudgetExceeded,
        Error::IncompatibleQuotient => Verdict::Counterexample,
        Error::ZeroExcluded(_)
        | Error::CoreDisagreement(_)
        | Error::OverlapViolation(_)
        | Error::EmptyFamily
        | Error::NotGaunt(_)
        | Error::EmptyConnHat
        | Error::NotInjectiveInvariant(_)
        | Error::ZeroDecomposition(_)
        | Error::NonMonicPullback(_)
        | Error::BaseNotInjective(_)
        | Error::NotCoherentInput(_)
        | Error::Precondition(_) => Verdict::HypothesisUnmet,
        _ => Verdict::Invalid,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "text" => Ok(Format::Text),
            "structured" | "json" => Ok(Format::Structured),
            _ => Err(Error::Usage(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Report {
    pub command: String,
    pub digest: Option<String>,
    pub checks: Vec<Check>,
    /// Named payloads, in insertion order.
    pub data: Vec<(String, Value)>,
    pub deviations: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            ..Report::default()
        }
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.digest = Some(digest.into());
        self
    }

    pub fn check(&mut self, name: impl Into<String>, verdict: Verdict, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            verdict,
            detail: detail.into(),
        });
        self
    }

    pub fn data(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("report payloads serialize");
        self.data.push((key.into(), v));
        self
    }

    pub fn deviation(&mut self, text: impl Into<String>) -> &mut Self {
        self.deviations.push(text.into());
        self
    }

    /// An error turned into a single check; see [`verdict_of`].
    pub fn error(&mut self, name: impl Into<String>, e: &Error) -> &mut Self {
        self.check(name, verdict_of(e), e.to_string())
    }

    /// The most severe verdict present.
    pub fn verdict(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Info)
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict().exit_code()
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.data.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Structured => self.to_json(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        if let Some(d) = &self.digest {
            let _ = writeln!(s, "instance: sha256:{d}");
        }
        let _ = writeln!(s, "verdict: {}", self.verdict().label());
        for c in &self.checks {
            if c.detail.is_empty() {
                let _ = writeln!(s, "[{}] {}", c.verdict.label(), c.name);
            } else {
                let _ = writeln!(s, "[{}] {}: {}", c.verdict.label(), c.name, c.detail);
            }
        }
        for (k, v) in &self.data {
            match v {
                Value::String(text) => {
                    let _ = writeln!(s, "{k}: {text}");
                }
                Value::Array(items) if items.iter().all(Value::is_string) => {
                    let _ = writeln!(s, "{k}:");
                    for item in items {
                        let _ = writeln!(s, "  {}", item.as_str().unwrap());
                    }
                }
                other => {
                    let _ = writeln!(s, "{k}: {other}");
                }
            }
        }
        if !self.deviations.is_empty() {
            let _ = writeln!(s, "deviations:");
            for d in &self.deviations {
                let _ = writeln!(s, "  - {d}");
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let data: serde_json::Map<String, Value> = self.data.iter().cloned().collect();
        let v = serde_json::json!({
            "command": self.command,
            "instance_digest": self.digest,
            "verdict": self.verdict(),
            "exit_code": self.exit_code(),
            "checks": self.checks,
            "data": data,
            "deviations": self.deviations,
        });
        let mut out = serde_json::to_string_pretty(&v).expect("json");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_takes_the_most_severe_verdict() {
        let mut r = Report::new("x");
        assert_eq!(r.exit_code(), 0);
        r.check("a", Verdict::Confirmed, "");
        r.check("b", Verdict::HypothesisUnmet, "");
        assert_eq!(r.exit_code(), 2);
        r.check("c", Verdict::Counterexample, "");
        assert_eq!(r.exit_code(), 3);
        r.error("d", &Error::SearchBudgetExceeded { needed: 10, budget: 1 });
        assert_eq!(r.exit_code(), 4);
        r.error("e", &Error::Usage("bad".into()));
        assert_eq!(r.exit_code(), 5);
    }

    #[test]
    fn renderings_carry_the_same_checks() {
        let mut r = Report::new("homset f a b").with_digest("00");
        r.check("count", Verdict::Info, "3").data("morphisms", vec!["m0", "m1"]).deviation("note");
        let text = r.to_text();
        assert!(text.contains("[info] count: 3") && text.contains("  m1") && text.contains("  - note"));
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["checks"][0]["detail"], "3");
        assert_eq!(json["data"]["morphisms"][1], "m1");
        assert_eq!(json["exit_code"], 0);
    }
}
