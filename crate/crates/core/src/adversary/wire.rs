use serde::{Deserialize, Serialize};

use crate::protocol::MessageTag;
use crate::simnet::{PartyLabel, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    ToRc,
    FromRc,
}

/// One delivered message as the RC sees it. Ciphertext bytes and nonces
/// are left out; only the REJECT body is kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireEvent {
    pub direction: Direction,
    pub peer: String,
    pub tag: u8,
    pub size: usize,
    pub reject_bytes: Option<Vec<u8>>,
}

/// Delivered events that start or end at the RC, in trace order.
pub fn rc_wire_view(events: &[TraceEvent]) -> Vec<WireEvent> {
    events
        .iter()
        .filter(|e| e.delivered())
        .filter_map(|e| {
            let (direction, peer) = if e.to.label == PartyLabel::Rc {
                (Direction::ToRc, &e.from)
            } else if e.from.label == PartyLabel::Rc {
                (Direction::FromRc, &e.to)
            } else {
                return None;
            };
            Some(WireEvent {
                direction,
                peer: peer.identity.clone(),
                tag: e.tag,
                size: e.bytes.len(),
                reject_bytes: (e.tag == MessageTag::Reject.byte()).then(|| e.bytes.clone()),
            })
        })
        .collect()
}

/// Every field on which two RC views differ; empty means indistinguishable.
pub fn wire_diff(a: &[WireEvent], b: &[WireEvent]) -> Vec<String> {
    let mut out = Vec::new();
    if a.len() != b.len() {
        out.push(format!("length: {} vs {}", a.len(), b.len()));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if x.direction != y.direction {
            out.push(format!("[{i}].direction: {:?} vs {:?}", x.direction, y.direction));
        }
        if x.peer != y.peer {
            out.push(format!("[{i}].peer: {} vs {}", x.peer, y.peer));
        }
        if x.tag != y.tag {
            out.push(format!("[{i}].tag: {} vs {}", x.tag, y.tag));
        }
        if x.size != y.size {
            out.push(format!("[{i}].size: {} vs {}", x.size, y.size));
        }
        if x.reject_bytes != y.reject_bytes {
            out.push(format!("[{i}].reject_bytes differ"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(direction: Direction, tag: u8, size: usize) -> WireEvent {
        WireEvent { direction, peer: "S1".into(), tag, size, reject_bytes: None }
    }

    #[test]
    fn identical_views_have_no_diff() {
        let a = vec![ev(Direction::ToRc, 2, 90), ev(Direction::FromRc, 3, 70)];
        assert!(wire_diff(&a, &a.clone()).is_empty());
    }

    #[test]
    fn every_field_is_compared() {
        let a = vec![ev(Direction::ToRc, 2, 90)];
        let mut b = a.clone();
        b[0].size = 91;
        b[0].peer = "S2".into();
        let d = wire_diff(&a, &b);
        assert_eq!(d.len(), 2);
        assert!(wire_diff(&a, &[]).iter().any(|s| s.starts_with("length")));
    }
}
