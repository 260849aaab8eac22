use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

pub const TRACE_SCHEMA: &str = "mslab.trace.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PartyLabel {
    User,
    Server,
    Rc,
    Adversary,
}

impl fmt::Display for PartyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartyLabel::User => "USER",
            PartyLabel::Server => "SERVER",
            PartyLabel::Rc => "RC",
            PartyLabel::Adversary => "ADVERSARY",
        })
    }
}

impl FromStr for PartyLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "USER" => Ok(PartyLabel::User),
            "SERVER" => Ok(PartyLabel::Server),
            "RC" => Ok(PartyLabel::Rc),
            "ADVERSARY" => Ok(PartyLabel::Adversary),
            other => Err(format!("unknown party label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Party {
    pub label: PartyLabel,
    pub identity: String,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.identity)
    }
}

/// How a message entered the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SendKind {
    /// Originated by the sender.
    Send,
    /// Forwarded verbatim on behalf of another party.
    Relay,
    /// Crafted or replayed by test or adversary code.
    Inject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Disposition {
    Delivered,
    Dropped,
    Replaced,
}

/// One message as it left the bus. `bytes` are exactly what the receiver got
/// (for a dropped message, what the sender sent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub tick: u64,
    pub from: Party,
    pub to: Party,
    pub tag: u8,
    pub kind: SendKind,
    pub disposition: Disposition,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

impl TraceEvent {
    pub fn delivered(&self) -> bool {
        self.disposition != Disposition::Dropped
    }
}

#[derive(Serialize, Deserialize)]
struct TraceLine<'a> {
    schema: std::borrow::Cow<'a, str>,
    #[serde(flatten)]
    event: std::borrow::Cow<'a, TraceEvent>,
}

/// One JSON object per line, bytes hex-encoded.
pub fn export_jsonl<W: Write>(events: &[TraceEvent], mut out: W) -> std::io::Result<()> {
    for event in events {
        let line = TraceLine { schema: TRACE_SCHEMA.into(), event: std::borrow::Cow::Borrowed(event) };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn export_jsonl_string(events: &[TraceEvent]) -> String {
    let mut buf = Vec::new();
    export_jsonl(events, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn import_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceEvent>, SimError> {
    let mut events = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| SimError::Trace(format!("line {}: {e}", n + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine<'static> = serde_json::from_str(&line)
            .map_err(|e| SimError::Trace(format!("line {}: {e}", n + 1)))?;
        if parsed.schema != TRACE_SCHEMA {
            return Err(SimError::Trace(format!(
                "line {}: unsupported schema `{}`",
                n + 1,
                parsed.schema
            )));
        }
        events.push(parsed.event.into_owned());
    }
    Ok(events)
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}
