use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::adversary::OfflineTarget;
use crate::crypto::{CipherMode, GroupId};
use crate::protocol::SchemeVariant;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioKind {
    #[default]
    Honest,
    AttackOnline,
    AttackOffline,
    Cost,
    Undetectability,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Honest => "HONEST",
            ScenarioKind::AttackOnline => "ATTACK_ONLINE",
            ScenarioKind::AttackOffline => "ATTACK_OFFLINE",
            ScenarioKind::Cost => "COST",
            ScenarioKind::Undetectability => "UNDETECTABILITY",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "HONEST" => Ok(ScenarioKind::Honest),
            "ATTACK_ONLINE" => Ok(ScenarioKind::AttackOnline),
            "ATTACK_OFFLINE" => Ok(ScenarioKind::AttackOffline),
            "COST" => Ok(ScenarioKind::Cost),
            "UNDETECTABILITY" => Ok(ScenarioKind::Undetectability),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserEntry {
    pub id: String,
    pub password: String,
}

/// A scenario. Every field has a default; the file form is flat
/// `key = value` lines with `user` and `server` repeatable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub variant: SchemeVariant,
    pub group: GroupId,
    pub mode: CipherMode,
    pub seed: u64,
    /// Newline-delimited dictionary. Unset means the built-in three words.
    pub dict: Option<PathBuf>,
    pub ki_bits: u32,
    pub users: Vec<UserEntry>,
    pub servers: Vec<String>,
    /// Logins per user and server (HONEST), or attempts per side (UNDETECTABILITY).
    pub runs: u32,
    pub offline_target: OfflineTarget,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Honest,
            variant: SchemeVariant::Tsai,
            group: GroupId::Toy23,
            mode: CipherMode::Authenticated,
            seed: 0,
            dict: None,
            ki_bits: 256,
            users: vec![UserEntry { id: "alice".into(), password: "cherry".into() }],
            servers: vec!["S1".into()],
            runs: 1,
            offline_target: OfflineTarget::M1,
        }
    }
}

pub const DEFAULT_DICTIONARY: [&str; 3] = ["apple", "banana", "cherry"];

fn invalid(field: &str, value: &str) -> ConfigError {
    ConfigError::InvalidValue { field: field.to_owned(), value: value.to_owned() }
}

impl ScenarioConfig {
    /// Applies one `key = value` setting. `user` and `server` append.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim() {
            "kind" => self.kind = v.parse().map_err(|_| invalid("kind", v))?,
            "variant" => self.variant = v.parse().map_err(|_| invalid("variant", v))?,
            "group" => self.group = v.parse().map_err(|_| invalid("group", v))?,
            "mode" => self.mode = v.parse().map_err(|_| invalid("mode", v))?,
            "seed" => self.seed = v.parse().map_err(|_| invalid("seed", v))?,
            "dict" => self.dict = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "ki_bits" => {
                let bits: u32 = v.parse().map_err(|_| invalid("ki_bits", v))?;
                if !(1..=256).contains(&bits) {
                    return Err(invalid("ki_bits", v));
                }
                self.ki_bits = bits;
            }
            "runs" => {
                let runs: u32 = v.parse().map_err(|_| invalid("runs", v))?;
                if runs == 0 {
                    return Err(invalid("runs", v));
                }
                self.runs = runs;
            }
            "offline_target" => {
                self.offline_target = match v.to_ascii_uppercase().as_str() {
                    "M1" => OfflineTarget::M1,
                    "M3" => OfflineTarget::M3,
                    _ => return Err(invalid("offline_target", v)),
                }
            }
            "user" => {
                let (id, pw) = v.split_once(':').ok_or_else(|| invalid("user", v))?;
                if id.is_empty() {
                    return Err(invalid("user", v));
                }
                self.users.push(UserEntry { id: id.to_owned(), password: pw.to_owned() });
            }
            "server" => {
                if v.is_empty() {
                    return Err(invalid("server", v));
                }
                self.servers.push(v.to_owned());
            }
            other => return Err(ConfigError::UnknownField(other.to_owned())),
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut users = Vec::new();
        let mut servers = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(n + 1))?;
            match k.trim() {
                "user" | "server" => {
                    let mut scratch = Self { users: Vec::new(), servers: Vec::new(), ..Self::default() };
                    scratch.set(k, v)?;
                    users.append(&mut scratch.users);
                    servers.append(&mut scratch.servers);
                }
                _ => cfg.set(k, v)?,
            }
        }
        if !users.is_empty() {
            cfg.users = users;
        }
        if !servers.is_empty() {
            cfg.servers = servers;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn fmt::Display| out.push_str(&format!("{k} = {v}\n"));
        line("kind", &self.kind);
        line("variant", &self.variant);
        line("group", &self.group);
        line("mode", &self.mode);
        line("seed", &self.seed);
        line("dict", &self.dict.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        line("ki_bits", &self.ki_bits);
        line("runs", &self.runs);
        line("offline_target", &format!("{:?}", self.offline_target));
        for u in &self.users {
            line("user", &format!("{}:{}", u.id, u.password));
        }
        for s in &self.servers {
            line("server", s);
        }
        out
    }

    /// Rejects configs that cannot run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.users.is_empty() {
            return Err(ConfigError::Missing("user"));
        }
        if self.servers.is_empty() {
            return Err(ConfigError::Missing("server"));
        }
        Ok(())
    }
}
