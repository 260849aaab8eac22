//! Records one honest login and tests a 10,000-word dictionary against it
//! without touching the network.
//!
//! cargo run --release --example offline_attack

use mslab::adversary::{run_offline_attack, Dictionary, OfflineTarget};
use mslab::crypto::{CipherMode, GroupId};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{SchemeVariant, ServerId, UserId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut words = Dictionary::synthetic(9_999)?.words().to_vec();
    words.push("cherry".into());
    let dict = Dictionary::new(words)?;

    for variant in [SchemeVariant::Tsai, SchemeVariant::Improved] {
        for mode in [CipherMode::Authenticated, CipherMode::Plain] {
            let mut d = Deployment::new(DeploymentConfig { variant, group: GroupId::Fixture512, mode, seed: 2, ..Default::default() });
            d.enroll_user("alice", "cherry")?;
            d.enroll_server("S1")?;
            let run = d.login(&UserId::new("alice")?, &ServerId::new("S1")?, None)?;
            let transcript = d.transcript(&run);

            let before = d.network().stats().sent;
            let report = run_offline_attack(&transcript.events, &dict, d.params(), mode, OfflineTarget::M1)?;
            println!(
                "{:<8} {:<13} recovered={:<8} positives={} sends={} in {:?}",
                variant.to_string(),
                mode.to_string(),
                report.recovered.as_deref().unwrap_or("NONE"),
                report.positives.len(),
                d.network().stats().sent - before,
                report.elapsed
            );
        }
    }
    Ok(())
}
