//! Exports a trace, reads it back, and replays a recorded M4 into a fresh
//! session through a REPLACE interposition. The RC rejects it.
//!
//! cargo run --example trace_replay

use mslab::crypto::{CipherMode, GroupId};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{SchemeVariant, ServerId, UserId};
use mslab::simnet::{export_jsonl_string, import_jsonl, Action, Interposition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (user, server) = (UserId::new("alice")?, ServerId::new("S1")?);
    let mut d = Deployment::new(DeploymentConfig {
        variant: SchemeVariant::Tsai,
        group: GroupId::Toy23,
        mode: CipherMode::Authenticated,
        seed: 4,
        ..Default::default()
    });
    d.enroll_user("alice", "cherry")?;
    d.enroll_server("S1")?;
    d.login(&user, &server, None)?;

    let jsonl = export_jsonl_string(d.network().trace());
    print!("{jsonl}");
    let events = import_jsonl(jsonl.as_bytes())?;
    assert_eq!(events, d.network().trace());

    let old_m4 = events.iter().find(|e| e.tag == 4).expect("honest run has M4").bytes.clone();
    d.network_mut().interpose(Interposition::new(|e| e.tag == 4, Action::Replace(old_m4)));
    let replay = d.login(&user, &server, None)?;
    println!("replayed M4: rc={:?} completed={}", replay.rc_outcome, replay.completed());
    println!("{:?}", d.network().stats());
    Ok(())
}
