//! Compares what the RC sees for failed attack attempts and for honest users
//! who mistype their password.
//!
//! cargo run --example undetectability

use mslab::adversary::{rc_wire_view, wire_diff, Attacker, KiKnowledge};
use mslab::crypto::{CipherMode, GroupId, Rng};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{SchemeVariant, ServerId, UserId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (user, server) = (UserId::new("alice")?, ServerId::new("S1")?);
    let mut d = Deployment::new(DeploymentConfig {
        variant: SchemeVariant::Tsai,
        group: GroupId::Fixture512,
        mode: CipherMode::Plain,
        seed: 3,
        ..Default::default()
    });
    d.enroll_user("alice", "cherry")?;
    let creds = d.enroll_server("S1")?;

    let typo = d.login(&user, &server, Some(b"chery"))?;
    let honest = rc_wire_view(&d.transcript(&typo).events);

    let mut attacker = Attacker::new(creds, user, KiKnowledge::None, d.params().clone(), CipherMode::Plain, Rng::new(3, "adv"));
    let before = d.network().trace().len();
    attacker.attempt(&mut d, "banana")?;
    let attack = rc_wire_view(&d.network().trace()[before..]);

    println!("{:<30} {:<30}", "mistyped password", "attack attempt");
    for (h, a) in honest.iter().zip(&attack) {
        let fmt = |e: &mslab::adversary::WireEvent| format!("{:?} {} tag={} {}B", e.direction, e.peer, e.tag, e.size);
        println!("{:<30} {:<30}", fmt(h), fmt(a));
    }
    let diff = wire_diff(&honest, &attack);
    println!("distinguishing fields: {}", diff.len());
    Ok(())
}
