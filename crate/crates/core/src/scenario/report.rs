use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ScenarioConfig;
use crate::adversary::{AttackReport, OfflineReport};
use crate::protocol::{CostReport, OpTally};

pub const REPORT_SCHEMA: &str = "mslab.report.v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_owned(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub logins: u64,
    pub accepted: u64,
    pub keys_match: u64,
    pub rejected: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: ScenarioConfig,
    pub summary: RunSummary,
    /// Cost of one honest login, keyed by variant name.
    pub costs: BTreeMap<String, CostReport>,
    pub attack: Option<AttackReport>,
    pub offline: Option<OfflineReport>,
    /// Distinguishing fields found by the wire differ.
    pub wire_diff: Option<Vec<String>>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_owned(),
            scenario,
            summary: RunSummary::default(),
            costs: BTreeMap::new(),
            attack: None,
            offline: None,
            wire_diff: None,
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The text rendering. Every number comes from the same fields as
    /// [`Report::to_json`].
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(out, "schema   {}", self.schema);
        let _ = writeln!(out, "scenario {} variant={} group={} mode={} seed={}", s.kind, s.variant, s.group, s.mode, s.seed);
        let m = &self.summary;
        let _ = writeln!(
            out,
            "logins   {} accepted={} keys_match={} rejected={}",
            m.logins, m.accepted, m.keys_match, m.rejected
        );
        for (variant, cost) in &self.costs {
            let _ = writeln!(out, "\ncost [{variant}] messages={} relays={} bytes={}", cost.messages, cost.relays, cost.bytes);
            let _ = writeln!(out, "  {:<10} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}", "role", "msg", "rly", "exp", "enc", "dec", "hash");
            for (role, rc) in &cost.roles {
                let OpTally { exponentiations, encryptions, decryptions, hashes } = rc.ops;
                let _ = writeln!(
                    out,
                    "  {:<10} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}",
                    role.to_string(),
                    rc.messages,
                    rc.relays,
                    exponentiations,
                    encryptions,
                    decryptions,
                    hashes
                );
            }
        }
        if let Some(a) = &self.attack {
            let _ = writeln!(
                out,
                "\nonline attack target={} knowledge={} dictionary={} guesses={} runs={} recovered={} sent={}",
                a.target,
                a.knowledge,
                a.dictionary_size,
                a.guesses_tried,
                a.runs,
                a.recovered.as_deref().unwrap_or("NONE"),
                a.messages_sent
            );
            for (i, at) in a.attempts.iter().enumerate() {
                let outcome = at.rc_outcome.map(|o| format!("{o:?}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, "  {:>4} {:<20} verdict={} rc={}", i + 1, at.guess, at.verdict, outcome);
            }
        }
        if let Some(o) = &self.offline {
            let _ = writeln!(
                out,
                "\noffline attack target={:?} mode={} dictionary={} checked={} positives={} recovered={} sent={}",
                o.target,
                o.mode,
                o.dictionary_size,
                o.checked,
                o.positives.len(),
                o.recovered.as_deref().unwrap_or("NONE"),
                o.messages_sent
            );
        }
        if let Some(d) = &self.wire_diff {
            let _ = writeln!(out, "\nwire diff: {} distinguishing fields", d.len());
            for line in d {
                let _ = writeln!(out, "  {line}");
            }
        }
        let _ = writeln!(out, "\nchecks");
        for c in &self.checks {
            let _ = writeln!(out, "  [{}] {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(out, "result {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}
