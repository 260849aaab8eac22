//! Persists the RC registry to a file, reloads it into a new deployment and
//! logs in against the reloaded state.
//!
//! cargo run --example registry_persistence -- [path]

use mslab::crypto::{CipherMode, GroupId, Rng};
use mslab::deployment::{Deployment, DeploymentConfig};
use mslab::protocol::{RcState, RegistrationRequest, SchemeVariant, ServerId, UserCredentials, UserId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mslab-registry.txt"));
    let config = DeploymentConfig {
        variant: SchemeVariant::Tsai,
        group: GroupId::Toy23,
        mode: CipherMode::Authenticated,
        seed: 5,
        ..Default::default()
    };

    let mut rng = Rng::new(5, "registry");
    let mut state = RcState::generate(SchemeVariant::Tsai, &mut rng);
    state.persist_to(&path)?;
    let alice = UserId::new("alice")?;
    state.register_user(&RegistrationRequest { user: alice.clone(), password: b"cherry".to_vec(), k_i: None })?;
    state.register_server(&ServerId::new("S1")?, &mut rng)?;
    println!("{}", std::fs::read_to_string(&path)?);

    let mut d = Deployment::from_registry(config, RcState::load(&path)?)?;
    // the RC file holds only R_i; the password stays with the user
    d.remember_user(UserCredentials { user: alice.clone(), password: b"cherry".to_vec(), k_i: None, variant: SchemeVariant::Tsai })?;
    let run = d.login(&alice, &ServerId::new("S1")?, None)?;
    println!("alice after reload: rc={:?} keys match={}", run.rc_outcome, run.keys_match());

    d.enroll_user("bob", "durian")?;
    println!("registry now lists {} users", RcState::load(&path)?.users().count());
    Ok(())
}
