use serde::Serialize;

use crate::scalar::Certainty;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    HypothesesHold,
    Fail(String),
    Unknown(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HypothesesHold)
    }
}

/// One checked hypothesis with the quantities behind it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub detail: String,
    pub result: Certainty,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HypothesesReport {
    pub checks: Vec<HypothesisCheck>,
    pub notes: Vec<String>,
}

impl HypothesesReport {
    pub fn push(&mut self, name: &str, detail: impl Into<String>, result: Certainty) {
        self.checks.push(HypothesisCheck {
            name: name.to_string(),
            detail: detail.into(),
            result,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.result.is_true())
    }

    pub fn verdict(&self) -> Verdict {
        if let Some(c) = self.checks.iter().find(|c| c.result == Certainty::False) {
            return Verdict::Fail(format!("{}: {}", c.name, c.detail));
        }
        if let Some(c) = self.checks.iter().find(|c| c.result == Certainty::Unknown) {
            return Verdict::Unknown(format!("{}: {}", c.name, c.detail));
        }
        Verdict::HypothesesHold
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}
