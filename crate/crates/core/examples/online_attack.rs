//! A malicious server tests password guesses through genuine logins.
//! Against TSAI each REJECT rules out one guess and the ACCEPT confirms the
//! password; against IMPROVED every attempt is rejected.
//!
//! cargo run --example online_attack

use mslab::adversary::{run_online_attack, Dictionary, KiKnowledge};
use mslab::crypto::{CipherMode, GroupId};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{SchemeVariant, ServerId, UserId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dict = Dictionary::new(["123456", "password", "qwerty", "letmein", "cherry", "dragon"])?;
    let (user, server) = (UserId::new("alice")?, ServerId::new("S1")?);

    for variant in [SchemeVariant::Tsai, SchemeVariant::Improved] {
        let mut d = Deployment::new(DeploymentConfig {
            variant,
            group: GroupId::Fixture512,
            mode: CipherMode::Plain,
            seed: 1,
            ..Default::default()
        });
        d.enroll_user("alice", "cherry")?;
        d.enroll_server("S1")?;

        let report = run_online_attack(&mut d, &server, &user, &dict, KiKnowledge::None)?;
        println!("{variant}: recovered={:?} after {} runs", report.recovered, report.runs);
        for a in &report.attempts {
            println!("  {:<10} verdict={:<5} rc={:?}", a.guess, a.verdict, a.rc_outcome);
        }
    }
    Ok(())
}
