//! One honest login under each variant, with the trace and per-role cost.
//!
//! cargo run --example honest_login -- [TOY-23|FIXTURE-512]

use mslab::crypto::{CipherMode, GroupId};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{cost_report, SchemeVariant, ServerId, UserId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let group: GroupId = std::env::args().nth(1).as_deref().unwrap_or("TOY-23").parse()?;
    for variant in [SchemeVariant::Tsai, SchemeVariant::Improved] {
        let mut d = Deployment::new(DeploymentConfig {
            variant,
            group,
            mode: CipherMode::Authenticated,
            seed: 7,
            ..Default::default()
        });
        d.enroll_user("alice", "cherry")?;
        d.enroll_server("S1")?;

        let run = d.login(&UserId::new("alice")?, &ServerId::new("S1")?, None)?;
        println!("{variant}: rc={:?} keys match={}", run.rc_outcome, run.keys_match());
        for e in &d.network().trace()[run.events.clone()] {
            println!("  {:>2} {:<14} -> {:<14} M{} {:?} {} bytes", e.seq, e.from.to_string(), e.to.to_string(), e.tag, e.kind, e.bytes.len());
        }
        let cost = cost_report(&d.transcript(&run))?;
        for (role, c) in &cost.roles {
            println!("  {role:<6} {:?}", c);
        }
    }
    Ok(())
}
