//! Runs the COST scenario: one honest login per variant, compared role by
//! role, plus the registration diff.
//!
//! cargo run --example cost_parity

use mslab::scenario::{run, ScenarioConfig, ScenarioKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig { kind: ScenarioKind::Cost, ..ScenarioConfig::default() };
    let out = run(&cfg)?;
    print!("{}", out.report.to_text());
    Ok(())
}
