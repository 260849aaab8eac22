use std::io::Write;

use mslab::crypto::{CipherMode, GroupId};
use mslab::protocol::SchemeVariant;
use mslab::scenario::{compare_costs, run, CostVerdict, Report, ScenarioConfig, ScenarioKind};
use mslab::simnet::{import_jsonl, PartyLabel};

fn cfg(kind: ScenarioKind) -> ScenarioConfig {
    ScenarioConfig { kind, ..ScenarioConfig::default() }
}

#[test]
fn honest_tsai_toy_seed7_accepts() {
    let out = run(&ScenarioConfig { seed: 7, ..cfg(ScenarioKind::Honest) }).unwrap();
    assert!(out.report.passed());
    assert_eq!(out.report.summary.accepted, 1);
    assert_eq!(out.report.summary.keys_match, 1);
}

#[test]
fn online_attack_scenarios() {
    let tsai = run(&ScenarioConfig { mode: CipherMode::Plain, ..cfg(ScenarioKind::AttackOnline) }).unwrap();
    let attack = tsai.report.attack.as_ref().unwrap();
    assert_eq!(attack.recovered.as_deref(), Some("cherry"));
    assert_eq!(attack.runs, 3);
    assert!(tsai.report.passed());

    let improved = run(&ScenarioConfig {
        variant: SchemeVariant::Improved,
        mode: CipherMode::Plain,
        ..cfg(ScenarioKind::AttackOnline)
    })
    .unwrap();
    assert_eq!(improved.report.attack.as_ref().unwrap().recovered, None);
    assert!(improved.report.passed());
}

#[test]
fn dictionary_file_is_used() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "kiwi\nlime\ncherry\nmango").unwrap();
    let out = run(&ScenarioConfig { dict: Some(f.path().to_owned()), ..cfg(ScenarioKind::AttackOnline) }).unwrap();
    assert_eq!(out.report.attack.as_ref().unwrap().guesses_tried, 3);
}

#[test]
fn same_config_same_report_bytes() {
    for kind in [
        ScenarioKind::Honest,
        ScenarioKind::AttackOnline,
        ScenarioKind::AttackOffline,
        ScenarioKind::Cost,
        ScenarioKind::Undetectability,
    ] {
        let c = ScenarioConfig { seed: 21, runs: 3, ..cfg(kind) };
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json(), "{kind}");
        assert_eq!(a.trace, b.trace);
        assert!(a.report.passed(), "{kind}: {}", a.report.to_text());
    }
}

#[test]
fn outputs_are_written_and_versioned() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&cfg(ScenarioKind::Honest)).unwrap();
    out.write_to(dir.path()).unwrap();
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back = Report::from_json(&json).unwrap();
    assert_eq!(back.schema, "mslab.report.v1");
    assert_eq!(back.to_json(), json);
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(text, out.report.to_text());
    let trace = std::fs::File::open(dir.path().join("trace.jsonl")).unwrap();
    assert_eq!(import_jsonl(std::io::BufReader::new(trace)).unwrap(), out.trace);
}

#[test]
fn text_and_json_agree_on_cost_numbers() {
    let out = run(&cfg(ScenarioKind::Cost)).unwrap();
    let text = out.report.to_text();
    for (variant, cost) in &out.report.costs {
        assert!(text.contains(&format!("cost [{variant}] messages={} relays={} bytes={}", cost.messages, cost.relays, cost.bytes)));
        for (role, rc) in &cost.roles {
            let row = format!(
                "  {:<10} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}",
                role.to_string(),
                rc.messages,
                rc.relays,
                rc.ops.exponentiations,
                rc.ops.encryptions,
                rc.ops.decryptions,
                rc.ops.hashes
            );
            assert!(text.contains(&row), "missing {row}");
        }
    }
}

fn honest(variant: SchemeVariant, group: GroupId, mode: CipherMode) -> Report {
    run(&ScenarioConfig { variant, group, mode, ..cfg(ScenarioKind::Honest) }).unwrap().report
}

#[test]
fn compare_costs_verdicts() {
    let t = honest(SchemeVariant::Tsai, GroupId::Toy23, CipherMode::Authenticated);
    let i = honest(SchemeVariant::Improved, GroupId::Toy23, CipherMode::Authenticated);
    assert_eq!(compare_costs(&t, &i), CostVerdict::Pass);

    // one extra message on the IMPROVED side must fail
    let mut padded = i.clone();
    let cost = padded.costs.get_mut("IMPROVED").unwrap();
    cost.messages += 1;
    cost.roles.get_mut(&PartyLabel::User).unwrap().messages += 1;
    assert!(matches!(compare_costs(&t, &padded), CostVerdict::Fail(d) if d.len() == 2));

    let other_mode = honest(SchemeVariant::Improved, GroupId::Toy23, CipherMode::Plain);
    assert!(matches!(compare_costs(&t, &other_mode), CostVerdict::Incomparable(_)));
    let other_group = honest(SchemeVariant::Improved, GroupId::Fixture512, CipherMode::Authenticated);
    assert!(matches!(compare_costs(&t, &other_group), CostVerdict::Incomparable(_)));
}

#[test]
fn invalid_configs_name_the_field() {
    let err = ScenarioConfig::from_text("group = P-256").unwrap_err();
    assert!(err.to_string().contains("`group`"));
    let no_users = ScenarioConfig { users: vec![], ..ScenarioConfig::default() };
    assert!(run(&no_users).unwrap_err().to_string().contains("user"));
}
