use mslab::adversary::{
    offline_check, rc_wire_view, run_offline_attack, run_online_attack, wire_diff, Attacker,
    Dictionary, KiKnowledge, OfflineTarget,
};
use mslab::crypto::{CipherMode, GroupId, Rng};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{Outcome, RejectStage, SchemeVariant, ServerId, UserId};

fn setup(variant: SchemeVariant, group: GroupId, mode: CipherMode, seed: u64) -> (Deployment, UserId, ServerId) {
    let mut d = Deployment::new(DeploymentConfig { variant, group, mode, seed, ki_bits: 256 });
    d.enroll_user("alice", "cherry").unwrap();
    d.enroll_server("S1").unwrap();
    (d, UserId::new("alice").unwrap(), ServerId::new("S1").unwrap())
}

fn fruit() -> Dictionary {
    Dictionary::new(["apple", "banana", "cherry"]).unwrap()
}

#[test]
fn tsai_plain_recovers_cherry_in_three_runs() {
    let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Fixture512, CipherMode::Plain, 1);
    let report = run_online_attack(&mut d, &s, &u, &fruit(), KiKnowledge::None).unwrap();
    assert_eq!(report.recovered.as_deref(), Some("cherry"));
    assert_eq!(report.guesses_tried, 3);
    assert_eq!(report.runs, 3);
    let outcomes: Vec<_> = report.attempts.iter().map(|a| a.rc_outcome).collect();
    assert_eq!(
        outcomes,
        vec![
            Some(Outcome::Reject(RejectStage::M5Nonce)),
            Some(Outcome::Reject(RejectStage::M5Nonce)),
            Some(Outcome::Accept)
        ]
    );
}

#[test]
fn tsai_authenticated_wrong_guess_is_rejected_at_challenge() {
    let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Toy23, CipherMode::Authenticated, 2);
    let report = run_online_attack(&mut d, &s, &u, &fruit(), KiKnowledge::None).unwrap();
    assert_eq!(report.recovered.as_deref(), Some("cherry"));
    assert_eq!(report.attempts[0].rc_outcome, Some(Outcome::Reject(RejectStage::Decrypt)));
}

#[test]
fn absent_password_exhausts_dictionary() {
    let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Toy23, CipherMode::Plain, 3);
    let dict = Dictionary::new(["apple", "banana", "durian"]).unwrap();
    let report = run_online_attack(&mut d, &s, &u, &dict, KiKnowledge::None).unwrap();
    assert_eq!(report.recovered, None);
    assert_eq!(report.guesses_tried, 3);
}

#[test]
fn improved_resists_without_k_i_and_yields_with_it() {
    for mode in [CipherMode::Plain, CipherMode::Authenticated] {
        let (mut d, u, s) = setup(SchemeVariant::Improved, GroupId::Fixture512, mode, 4);
        let report = run_online_attack(&mut d, &s, &u, &fruit(), KiKnowledge::None).unwrap();
        assert_eq!(report.recovered, None);
        assert!(report.attempts.iter().all(|a| matches!(a.rc_outcome, Some(Outcome::Reject(_)))));

        let k_i = d.user_credentials(&u).unwrap().k_i.unwrap();
        let report = run_online_attack(&mut d, &s, &u, &fruit(), KiKnowledge::Known(k_i)).unwrap();
        assert_eq!(report.recovered.as_deref(), Some("cherry"));
    }
}

#[test]
fn attack_is_deterministic_given_seed() {
    let run = || {
        let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Toy23, CipherMode::Plain, 5);
        run_online_attack(&mut d, &s, &u, &fruit(), KiKnowledge::None).unwrap();
        d.network().trace().to_vec()
    };
    assert_eq!(run(), run());
}

#[test]
fn correct_guess_login_opens_to_the_attackers_values() {
    let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Toy23, CipherMode::Authenticated, 6);
    let creds = d.server_credentials(&s).unwrap().clone();
    let mut attacker = Attacker::new(
        creds,
        u.clone(),
        KiKnowledge::None,
        d.params().clone(),
        CipherMode::Authenticated,
        Rng::new(6, "adv"),
    );
    let (mut attempt, m1) = attacker.build_guess_login("cherry").unwrap();
    let m2 = attempt.server.forward_login(&m1).unwrap();
    let m3 = d.rc_mut().challenge(&m2);
    let (g_a, r_1) = d.rc().pending_login(&u, &s).unwrap();
    assert_eq!(r_1, attempt.user.r_1().unwrap());
    let expected = mslab::crypto::mod_exp(
        &d.params().generator(),
        attempt.user.ephemeral_exponent().unwrap(),
        d.params(),
    )
    .unwrap();
    assert_eq!(g_a, &expected);
    let (_, m5) = attacker.complete_guess_run(&mut attempt, &m3).unwrap();
    assert!(mslab::adversary::interpret_outcome(&d.rc_mut().verify(&m5)));
}

#[test]
fn offline_check_against_honest_transcript() {
    let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Fixture512, CipherMode::Authenticated, 7);
    let run = d.login(&u, &s, None).unwrap();
    let events = d.transcript(&run).events;
    let params = d.params().clone();
    for target in [OfflineTarget::M1, OfflineTarget::M3] {
        assert!(offline_check(&events, "cherry", &params, CipherMode::Authenticated, target).unwrap());
    }
    for i in 0..100 {
        let guess = format!("wrong{i}");
        assert!(!offline_check(&events, &guess, &params, CipherMode::Authenticated, OfflineTarget::M1).unwrap());
    }
    assert!(offline_check(&[], "cherry", &params, CipherMode::Authenticated, OfflineTarget::M1).is_err());
}

#[test]
fn offline_plain_at_toy_group_reports_positives() {
    let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Toy23, CipherMode::Plain, 8);
    let run = d.login(&u, &s, None).unwrap();
    let events = d.transcript(&run).events;
    let mut words: Vec<String> = (0..2000).map(|i| format!("g{i}")).collect();
    words.push("cherry".into());
    let dict = Dictionary::new(words).unwrap();
    let report = run_offline_attack(&events, &dict, d.params(), CipherMode::Plain, OfflineTarget::M1).unwrap();
    assert!(report.positives.iter().any(|w| w == "cherry"));
    assert_eq!(report.messages_sent, 0);
}

#[test]
fn offline_against_improved_finds_nothing() {
    let (mut d, u, s) = setup(SchemeVariant::Improved, GroupId::Toy23, CipherMode::Authenticated, 9);
    let run = d.login(&u, &s, None).unwrap();
    let events = d.transcript(&run).events;
    let dict = Dictionary::new(["apple", "banana", "cherry"]).unwrap();
    let report = run_offline_attack(&events, &dict, d.params(), CipherMode::Authenticated, OfflineTarget::M1).unwrap();
    assert_eq!(report.recovered, None);
}

#[test]
fn failed_attack_looks_like_a_mistyped_password() {
    for mode in [CipherMode::Plain, CipherMode::Authenticated] {
        let (mut d, u, s) = setup(SchemeVariant::Tsai, GroupId::Fixture512, mode, 10);
        let honest = d.login(&u, &s, Some(b"chery")).unwrap();
        let honest_view = rc_wire_view(&d.transcript(&honest).events);
        let before = d.network().trace().len();
        let dict = Dictionary::new(["apple"]).unwrap();
        run_online_attack(&mut d, &s, &u, &dict, KiKnowledge::None).unwrap();
        let attack_view = rc_wire_view(&d.network().trace()[before..]);
        assert!(!attack_view.is_empty());
        assert_eq!(wire_diff(&honest_view, &attack_view), Vec::<String>::new(), "{mode}");
    }
}
