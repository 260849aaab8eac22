use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mslab::scenario::{compare_costs, run, CostVerdict, Report, ScenarioConfig, ScenarioKind};
use mslab::simnet::import_jsonl;

#[derive(Parser)]
#[command(name = "mslab", version, about = "Multi-server password authentication lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named by `kind` (default HONEST).
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Online guessing attack by a malicious server.
    AttackOnline(Common),
    /// Offline guessing attack against one recorded honest run.
    AttackOffline(Common),
    /// Compare honest-login costs of two reports, or run both variants.
    CostCompare {
        #[command(flatten)]
        common: Common,
        /// Two report.json files. Without them both variants are run.
        reports: Vec<PathBuf>,
    },
    /// Print a trace.jsonl file as a table.
    TraceDump { trace: PathBuf },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    dict: Option<String>,
    #[arg(long)]
    ki_bits: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn config(&self, kind: Option<ScenarioKind>) -> Result<ScenarioConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path).map_err(|e| e.to_string())?,
            None => ScenarioConfig::default(),
        };
        let overrides = [
            ("variant", &self.variant),
            ("group", &self.group),
            ("mode", &self.mode),
            ("seed", &self.seed),
            ("dict", &self.dict),
            ("ki_bits", &self.ki_bits),
            ("runs", &self.runs),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| e.to_string())?;
            }
        }
        if let Some(k) = kind {
            cfg.kind = k;
        }
        Ok(cfg)
    }
}

fn execute(common: &Common, kind: Option<ScenarioKind>) -> Result<bool, String> {
    let cfg = common.config(kind)?;
    let out = run(&cfg).map_err(|e| e.to_string())?;
    print!("{}", out.report.to_text());
    if let Some(dir) = &common.out_dir {
        out.write_to(dir).map_err(|e| format!("writing {}: {e}", dir.display()))?;
    }
    Ok(out.report.passed())
}

fn load_report(path: &PathBuf) -> Result<Report, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Report::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn dispatch(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Run { common, kind } => {
            let kind = kind
                .map(|k| k.parse::<ScenarioKind>().map_err(|_| format!("invalid value {k:?} for `kind`")))
                .transpose()?;
            execute(&common, kind)
        }
        Command::AttackOnline(common) => execute(&common, Some(ScenarioKind::AttackOnline)),
        Command::AttackOffline(common) => execute(&common, Some(ScenarioKind::AttackOffline)),
        Command::CostCompare { common, reports } => match reports.as_slice() {
            [] => execute(&common, Some(ScenarioKind::Cost)),
            [a, b] => {
                let verdict = compare_costs(&load_report(a)?, &load_report(b)?);
                match &verdict {
                    CostVerdict::Pass => println!("PASS"),
                    CostVerdict::Fail(d) => println!("FAIL\n  {}", d.join("\n  ")),
                    CostVerdict::Incomparable(why) => println!("INCOMPARABLE {why}"),
                }
                Ok(verdict == CostVerdict::Pass)
            }
            _ => Err("cost-compare takes zero or two report files".into()),
        },
        Command::TraceDump { trace } => {
            let f = std::fs::File::open(&trace).map_err(|e| format!("{}: {e}", trace.display()))?;
            let events = import_jsonl(std::io::BufReader::new(f)).map_err(|e| e.to_string())?;
            let mut out = std::io::stdout().lock();
            let row = |out: &mut std::io::StdoutLock, cols: [String; 8]| {
                writeln!(
                    out,
                    "{:>5} {:>5}  {:<16} {:<16} {:>3} {:<6} {:<9} {:>5}",
                    cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], cols[6], cols[7]
                )
            };
            let header = ["seq", "tick", "from", "to", "tag", "kind", "fate", "bytes"].map(String::from);
            // a closed pipe (e.g. `| head`) ends the dump quietly
            if row(&mut out, header).is_err() {
                return Ok(true);
            }
            for e in &events {
                let cols = [
                    e.seq.to_string(),
                    e.tick.to_string(),
                    format!("{}:{}", e.from.label, e.from.identity),
                    format!("{}:{}", e.to.label, e.to.identity),
                    e.tag.to_string(),
                    format!("{:?}", e.kind),
                    format!("{:?}", e.disposition),
                    e.bytes.len().to_string(),
                ];
                if row(&mut out, cols).is_err() {
                    break;
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
