//! Scenario configuration, execution and reporting.

mod config;
mod report;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ScenarioConfig, ScenarioKind, UserEntry, DEFAULT_DICTIONARY};
pub use report::{Check, Report, RunSummary, REPORT_SCHEMA};

use crate::adversary::{
    rc_wire_view, run_offline_attack, run_online_attack, wire_diff, AdversaryError, Attacker,
    Dictionary, KiKnowledge,
};
use crate::crypto::Rng;
use crate::deployment::{DeployError, Deployment, DeploymentConfig};
use crate::protocol::{
    cost_report, registration_diff, CostReport, Outcome, SchemeVariant, ServerId, UserId,
};
use crate::simnet::{export_jsonl_string, PartyLabel, TraceEvent};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config field `{0}`")]
    UnknownField(String),
    #[error("invalid value {value:?} for `{field}`")]
    InvalidValue { field: String, value: String },
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("at least one `{0}` is required")]
    Missing(&'static str),
    #[error("reading {0}: {1}")]
    Io(String, #[source] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Deploy(#[from] DeployError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug)]
pub struct ScenarioOutput {
    pub report: Report,
    pub trace: Vec<TraceEvent>,
}

impl ScenarioOutput {
    /// Writes `report.json`, `report.txt` and `trace.jsonl` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> std::io::Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report.to_json())?;
        fs::write(dir.join("report.txt"), self.report.to_text())?;
        fs::write(dir.join("trace.jsonl"), export_jsonl_string(&self.trace))
    }
}

/// Result of comparing the honest-login costs of two reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CostVerdict {
    Pass,
    Fail(Vec<String>),
    Incomparable(String),
}

/// Field-by-field differences between two cost reports.
pub fn cost_differences(a: &CostReport, b: &CostReport) -> Vec<String> {
    let mut out = Vec::new();
    if a.messages != b.messages {
        out.push(format!("messages: {} vs {}", a.messages, b.messages));
    }
    if a.relays != b.relays {
        out.push(format!("relays: {} vs {}", a.relays, b.relays));
    }
    for label in [PartyLabel::User, PartyLabel::Server, PartyLabel::Rc] {
        let (x, y) = (a.role(label), b.role(label));
        let fields = [
            ("messages", x.messages, y.messages),
            ("exponentiations", x.ops.exponentiations, y.ops.exponentiations),
            ("encryptions", x.ops.encryptions, y.ops.encryptions),
            ("decryptions", x.ops.decryptions, y.ops.decryptions),
            ("hashes", x.ops.hashes, y.ops.hashes),
        ];
        for (name, l, r) in fields {
            if l != r {
                out.push(format!("{label}.{name}: {l} vs {r}"));
            }
        }
    }
    out
}

/// PASS iff message counts and every per-role tally agree. Reports from
/// different groups or cipher modes are incomparable.
pub fn compare_costs(a: &Report, b: &Report) -> CostVerdict {
    let (sa, sb) = (&a.scenario, &b.scenario);
    if sa.group != sb.group {
        return CostVerdict::Incomparable(format!("group {} vs {}", sa.group, sb.group));
    }
    if sa.mode != sb.mode {
        return CostVerdict::Incomparable(format!("mode {} vs {}", sa.mode, sb.mode));
    }
    let (Some(ca), Some(cb)) = (a.costs.get(&sa.variant.to_string()), b.costs.get(&sb.variant.to_string())) else {
        return CostVerdict::Incomparable("report carries no honest-login cost".into());
    };
    let diffs = cost_differences(ca, cb);
    if diffs.is_empty() {
        CostVerdict::Pass
    } else {
        CostVerdict::Fail(diffs)
    }
}

fn deployment(cfg: &ScenarioConfig, variant: SchemeVariant) -> Result<Deployment, ScenarioError> {
    let mut d = Deployment::new(DeploymentConfig {
        variant,
        group: cfg.group,
        mode: cfg.mode,
        seed: cfg.seed,
        ki_bits: cfg.ki_bits,
    });
    for u in &cfg.users {
        d.enroll_user(&u.id, &u.password)?;
    }
    for s in &cfg.servers {
        d.enroll_server(s)?;
    }
    Ok(d)
}

fn dictionary(cfg: &ScenarioConfig) -> Result<Dictionary, ScenarioError> {
    Ok(match &cfg.dict {
        Some(path) => Dictionary::load(path)?,
        None => Dictionary::new(DEFAULT_DICTIONARY)?,
    })
}

fn primary(cfg: &ScenarioConfig) -> Result<(UserId, String, ServerId), ScenarioError> {
    let u = &cfg.users[0];
    let user = UserId::new(u.id.as_str()).map_err(DeployError::from)?;
    let server = ServerId::new(cfg.servers[0].as_str()).map_err(DeployError::from)?;
    Ok((user, u.password.clone(), server))
}

/// One honest login at the primary pair, returning its cost.
fn honest_cost(d: &mut Deployment, user: &UserId, server: &ServerId) -> Result<CostReport, ScenarioError> {
    let run = d.login(user, server, None)?;
    Ok(cost_report(&d.transcript(&run)).map_err(DeployError::from)?)
}

/// Executes a scenario to quiescence.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    cfg.validate()?;
    let mut report = Report::new(cfg.clone());
    let trace = match cfg.kind {
        ScenarioKind::Honest => run_honest(cfg, &mut report)?,
        ScenarioKind::AttackOnline => run_attack_online(cfg, &mut report)?,
        ScenarioKind::AttackOffline => run_attack_offline(cfg, &mut report)?,
        ScenarioKind::Cost => run_cost(cfg, &mut report)?,
        ScenarioKind::Undetectability => run_undetectability(cfg, &mut report)?,
    };
    Ok(ScenarioOutput { report, trace })
}

fn run_honest(cfg: &ScenarioConfig, report: &mut Report) -> Result<Vec<TraceEvent>, ScenarioError> {
    let mut d = deployment(cfg, cfg.variant)?;
    let mut first_cost = None;
    for u in &cfg.users {
        let user = UserId::new(u.id.as_str()).map_err(DeployError::from)?;
        for s in &cfg.servers {
            let server = ServerId::new(s.as_str()).map_err(DeployError::from)?;
            for _ in 0..cfg.runs {
                let run = d.login(&user, &server, None)?;
                if first_cost.is_none() {
                    first_cost = Some(cost_report(&d.transcript(&run)).map_err(DeployError::from)?);
                }
                let m = &mut report.summary;
                m.logins += 1;
                match run.rc_outcome {
                    Some(Outcome::Accept) => m.accepted += 1,
                    _ => m.rejected += 1,
                }
                if run.keys_match() {
                    m.keys_match += 1;
                }
            }
        }
    }
    if let Some(c) = first_cost {
        report.costs.insert(cfg.variant.to_string(), c);
    }
    let m = report.summary.clone();
    report.check("all_accept", m.accepted == m.logins, format!("{}/{}", m.accepted, m.logins));
    report.check("session_keys_match", m.keys_match == m.logins, format!("{}/{}", m.keys_match, m.logins));
    Ok(d.network().trace().to_vec())
}

fn run_attack_online(cfg: &ScenarioConfig, report: &mut Report) -> Result<Vec<TraceEvent>, ScenarioError> {
    let mut d = deployment(cfg, cfg.variant)?;
    let dict = dictionary(cfg)?;
    let (user, truth, server) = primary(cfg)?;
    let attack = run_online_attack(&mut d, &server, &user, &dict, KiKnowledge::None)?;

    report.summary.logins = attack.runs as u64;
    report.summary.accepted = attack.attempts.iter().filter(|a| a.rc_outcome == Some(Outcome::Accept)).count() as u64;
    report.summary.rejected = report.summary.logins - report.summary.accepted;

    report.check(
        "one_run_per_guess",
        attack.runs == attack.guesses_tried && attack.guesses_tried <= dict.len(),
        format!("runs={} guesses={}", attack.runs, attack.guesses_tried),
    );
    let expect_hit = |g: &str| cfg.variant == SchemeVariant::Tsai && g == truth;
    let wrong = attack.attempts.iter().filter(|a| a.verdict != expect_hit(&a.guess)).count();
    report.check("verdicts_exact", wrong == 0, format!("{wrong} false verdicts"));
    match cfg.variant {
        SchemeVariant::Tsai => {
            let expected = dict.position(&truth);
            let ok = match expected {
                Some(k) => attack.recovered.as_deref() == Some(truth.as_str()) && attack.guesses_tried == k,
                None => attack.recovered.is_none() && attack.guesses_tried == dict.len(),
            };
            let want = expected.map(|k| format!("recovery in {k} runs")).unwrap_or_else(|| "exhaustion".into());
            report.check("recovery_as_expected", ok, want);
        }
        SchemeVariant::Improved => {
            report.check("no_recovery", attack.recovered.is_none(), format!("{} attempts", attack.guesses_tried));
        }
    }
    report.attack = Some(attack);
    Ok(d.network().trace().to_vec())
}

fn run_attack_offline(cfg: &ScenarioConfig, report: &mut Report) -> Result<Vec<TraceEvent>, ScenarioError> {
    let mut d = deployment(cfg, cfg.variant)?;
    let dict = dictionary(cfg)?;
    let (user, truth, server) = primary(cfg)?;
    let run = d.login(&user, &server, None)?;
    report.summary.logins = 1;
    if run.rc_outcome == Some(Outcome::Accept) {
        report.summary.accepted = 1;
    }
    let events = d.transcript(&run).events;

    let sent_before = d.network().stats().sent;
    let offline = run_offline_attack(&events, &dict, d.params(), cfg.mode, cfg.offline_target)?;
    let sends = d.network().stats().sent - sent_before + offline.messages_sent;
    report.check("zero_sends", sends == 0, format!("{sends} messages"));

    let in_dict = dict.position(&truth).is_some();
    match (cfg.variant, cfg.mode) {
        (SchemeVariant::Improved, _) => {
            report.check("no_recovery", offline.recovered.is_none(), format!("{} positives", offline.positives.len()))
        }
        (SchemeVariant::Tsai, crate::crypto::CipherMode::Authenticated) => {
            let ok = if in_dict {
                offline.recovered.as_deref() == Some(truth.as_str())
            } else {
                offline.recovered.is_none()
            };
            report.check("recovery_as_expected", ok, format!("recovered={}", offline.recovered.as_deref().unwrap_or("NONE")));
        }
        (SchemeVariant::Tsai, crate::crypto::CipherMode::Plain) => {
            let hit = offline.positives.contains(&truth);
            let false_pos = offline.positives.len() - usize::from(hit);
            report.check(
                "true_password_recognized",
                hit == in_dict,
                format!("{false_pos} false positives of {}", offline.checked),
            );
        }
    }
    report.offline = Some(offline);
    Ok(d.network().trace().to_vec())
}

fn run_cost(cfg: &ScenarioConfig, report: &mut Report) -> Result<Vec<TraceEvent>, ScenarioError> {
    let (user, _, server) = primary(cfg)?;
    let mut tsai = deployment(cfg, SchemeVariant::Tsai)?;
    let mut improved = deployment(cfg, SchemeVariant::Improved)?;
    let registration_events = tsai.network().trace().len() + improved.network().trace().len();

    let mut per_variant = Vec::new();
    for (variant, d) in [(SchemeVariant::Tsai, &mut tsai), (SchemeVariant::Improved, &mut improved)] {
        let cost = honest_cost(d, &user, &server)?;
        let mut r = Report::new(ScenarioConfig { variant, kind: ScenarioKind::Honest, ..cfg.clone() });
        r.costs.insert(variant.to_string(), cost.clone());
        report.costs.insert(variant.to_string(), cost);
        per_variant.push(r);
    }
    report.summary.logins = 2;
    report.summary.accepted = 2;

    let verdict = compare_costs(&per_variant[0], &per_variant[1]);
    report.check("cost_parity", verdict == CostVerdict::Pass, format!("{verdict:?}"));
    let diff = registration_diff(&tsai.registrations()[0], &improved.registrations()[0]);
    report.check("registration_diff", diff == ["k_i"], format!("{diff:?}"));
    report.check(
        "registration_messages",
        registration_events == 0,
        format!("{registration_events} network messages during enrollment"),
    );
    let d = if cfg.variant == SchemeVariant::Tsai { &tsai } else { &improved };
    Ok(d.network().trace().to_vec())
}

fn run_undetectability(cfg: &ScenarioConfig, report: &mut Report) -> Result<Vec<TraceEvent>, ScenarioError> {
    let mut d = deployment(cfg, cfg.variant)?;
    let (user, truth, server) = primary(cfg)?;

    let mut honest_views = Vec::new();
    for i in 0..cfg.runs {
        let typo = format!("{truth}~{i}");
        let run = d.login(&user, &server, Some(typo.as_bytes()))?;
        report.summary.logins += 1;
        if run.rc_outcome != Some(Outcome::Accept) {
            report.summary.rejected += 1;
        }
        honest_views.push(rc_wire_view(&d.transcript(&run).events));
    }

    let creds = d.server_credentials(&server).cloned().expect("enrolled");
    let rng = Rng::new(cfg.seed, &format!("adversary/{server}/{user}"));
    let mut attacker = Attacker::new(creds, user.clone(), KiKnowledge::None, d.params().clone(), cfg.mode, rng);
    let mut attack_views = Vec::new();
    let mut attack_failures = 0;
    for i in 0..cfg.runs {
        let before = d.network().trace().len();
        let rec = attacker.attempt(&mut d, &format!("not-{truth}-{i}"))?;
        if !rec.verdict {
            attack_failures += 1;
        }
        attack_views.push(rc_wire_view(&d.network().trace()[before..]));
    }

    let reference = &honest_views[0];
    let mut diffs = Vec::new();
    for (i, v) in honest_views.iter().enumerate() {
        diffs.extend(wire_diff(reference, v).into_iter().map(|s| format!("honest#{i} {s}")));
    }
    for (i, v) in attack_views.iter().enumerate() {
        diffs.extend(wire_diff(reference, v).into_iter().map(|s| format!("attack#{i} {s}")));
    }
    let runs = u64::from(cfg.runs);
    report.check(
        "all_attempts_failed",
        report.summary.rejected == runs && attack_failures == runs,
        format!("honest {}/{runs}, attack {attack_failures}/{runs}", report.summary.rejected),
    );
    report.check("zero_distinguishing_fields", diffs.is_empty(), format!("{} fields", diffs.len()));
    report.wire_diff = Some(diffs);
    Ok(d.network().trace().to_vec())
}
