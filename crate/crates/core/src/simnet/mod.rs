//! Deterministic in-memory message bus.
//!
//! Delivery is FIFO per (sender, receiver) pair. Across pairs the bus serves
//! queues round-robin in endpoint registration order, one message per
//! [`Network::step`], and each step advances the logical clock by one tick.
//! Interpositions see every message before delivery; the first matching one
//! decides its fate.

mod trace;

pub use trace::{
    export_jsonl, export_jsonl_string, import_jsonl, Disposition, Party, PartyLabel, SendKind,
    TraceEvent, TRACE_SCHEMA,
};

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("unknown endpoint #{0}")]
    UnknownEndpoint(usize),
    #[error("endpoint {0} already registered")]
    DuplicateEndpoint(String),
    #[error("trace: {0}")]
    Trace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndpointId(usize);

impl EndpointId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct Endpoint {
    pub party: Party,
    /// Copies diverted here by [`Action::CopyTo`].
    pub inbox: VecDeque<TraceEvent>,
}

pub type Matcher = Box<dyn Fn(&TraceEvent) -> bool>;
pub type Rewriter = Box<dyn Fn(&[u8]) -> Vec<u8>>;

pub enum Action {
    Pass,
    Drop,
    Replace(Vec<u8>),
    /// Replace with a function of the original bytes.
    Rewrite(Rewriter),
    /// Deliver unchanged and put a copy in another endpoint's inbox.
    CopyTo(EndpointId),
}

pub struct Interposition {
    pub matcher: Matcher,
    pub action: Action,
}

impl Interposition {
    pub fn new(matcher: impl Fn(&TraceEvent) -> bool + 'static, action: Action) -> Self {
        Self { matcher: Box::new(matcher), action }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub replaced: u64,
    pub copied: u64,
}

#[derive(Debug, Clone)]
struct Envelope {
    kind: SendKind,
    bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Delivery {
    pub from: EndpointId,
    pub to: EndpointId,
    pub event: TraceEvent,
}

#[derive(Debug, Clone)]
pub enum Step {
    Delivered(Delivery),
    Dropped(TraceEvent),
    Idle,
}

#[derive(Default)]
pub struct Network {
    endpoints: Vec<Endpoint>,
    queues: BTreeMap<(usize, usize), VecDeque<Envelope>>,
    last_served: Option<(usize, usize)>,
    interpositions: Vec<Interposition>,
    trace: Vec<TraceEvent>,
    tick: u64,
    stats: NetStats,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    /// `(label, identity)` pairs must be unique.
    pub fn register(&mut self, label: PartyLabel, identity: &str) -> Result<EndpointId, SimError> {
        let party = Party { label, identity: identity.to_owned() };
        if self.endpoints.iter().any(|e| e.party == party) {
            return Err(SimError::DuplicateEndpoint(party.to_string()));
        }
        self.endpoints.push(Endpoint { party, inbox: VecDeque::new() });
        Ok(EndpointId(self.endpoints.len() - 1))
    }

    pub fn lookup(&self, label: PartyLabel, identity: &str) -> Option<EndpointId> {
        self.endpoints
            .iter()
            .position(|e| e.party.label == label && e.party.identity == identity)
            .map(EndpointId)
    }

    pub fn endpoint(&self, id: EndpointId) -> Result<&Endpoint, SimError> {
        self.endpoints.get(id.0).ok_or(SimError::UnknownEndpoint(id.0))
    }

    pub fn party(&self, id: EndpointId) -> Result<&Party, SimError> {
        self.endpoint(id).map(|e| &e.party)
    }

    pub fn send(&mut self, from: EndpointId, to: EndpointId, bytes: Vec<u8>) -> Result<(), SimError> {
        self.enqueue(from, to, SendKind::Send, bytes)
    }

    pub fn relay(&mut self, from: EndpointId, to: EndpointId, bytes: Vec<u8>) -> Result<(), SimError> {
        self.enqueue(from, to, SendKind::Relay, bytes)
    }

    pub fn inject(&mut self, from: EndpointId, to: EndpointId, bytes: Vec<u8>) -> Result<(), SimError> {
        self.enqueue(from, to, SendKind::Inject, bytes)
    }

    fn enqueue(&mut self, from: EndpointId, to: EndpointId, kind: SendKind, bytes: Vec<u8>) -> Result<(), SimError> {
        self.endpoint(from)?;
        self.endpoint(to)?;
        self.stats.sent += 1;
        self.queues.entry((from.0, to.0)).or_default().push_back(Envelope { kind, bytes });
        Ok(())
    }

    pub fn interpose(&mut self, interposition: Interposition) {
        self.interpositions.push(interposition);
    }

    pub fn clear_interpositions(&mut self) {
        self.interpositions.clear();
    }

    pub fn pending(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum()
    }

    fn next_pair(&self) -> Option<(usize, usize)> {
        let nonempty = || self.queues.iter().filter(|(_, q)| !q.is_empty()).map(|(k, _)| *k);
        match self.last_served {
            Some(last) => nonempty().find(|k| *k > last).or_else(|| nonempty().next()),
            None => nonempty().next(),
        }
    }

    /// Delivers (or drops) exactly one queued message.
    pub fn step(&mut self) -> Step {
        let Some(pair) = self.next_pair() else {
            return Step::Idle;
        };
        self.last_served = Some(pair);
        let envelope = self
            .queues
            .get_mut(&pair)
            .and_then(VecDeque::pop_front)
            .expect("next_pair only yields non-empty queues");
        self.tick += 1;
        let mut event = TraceEvent {
            seq: self.trace.len() as u64,
            tick: self.tick,
            from: self.endpoints[pair.0].party.clone(),
            to: self.endpoints[pair.1].party.clone(),
            tag: envelope.bytes.first().copied().unwrap_or(0xff),
            kind: envelope.kind,
            disposition: Disposition::Delivered,
            bytes: envelope.bytes,
        };

        let action = self.interpositions.iter().find(|i| (i.matcher)(&event)).map(|i| &i.action);
        let mut copy_to = None;
        match action {
            None | Some(Action::Pass) => {}
            Some(Action::Drop) => event.disposition = Disposition::Dropped,
            Some(Action::Replace(bytes)) => {
                event.bytes = bytes.clone();
                event.disposition = Disposition::Replaced;
            }
            Some(Action::Rewrite(f)) => {
                event.bytes = f(&event.bytes);
                event.disposition = Disposition::Replaced;
            }
            Some(Action::CopyTo(target)) => copy_to = Some(*target),
        }
        if event.disposition == Disposition::Replaced {
            event.tag = event.bytes.first().copied().unwrap_or(0xff);
        }
        if let Some(target) = copy_to {
            if let Some(ep) = self.endpoints.get_mut(target.0) {
                ep.inbox.push_back(event.clone());
                self.stats.copied += 1;
            }
        }

        self.trace.push(event.clone());
        match event.disposition {
            Disposition::Dropped => {
                self.stats.dropped += 1;
                Step::Dropped(event)
            }
            Disposition::Replaced => {
                self.stats.replaced += 1;
                Step::Delivered(Delivery { from: EndpointId(pair.0), to: EndpointId(pair.1), event })
            }
            Disposition::Delivered => {
                self.stats.delivered += 1;
                Step::Delivered(Delivery { from: EndpointId(pair.0), to: EndpointId(pair.1), event })
            }
        }
    }

    pub fn take_inbox(&mut self, id: EndpointId) -> Vec<TraceEvent> {
        self.endpoints
            .get_mut(id.0)
            .map(|e| e.inbox.drain(..).collect())
            .unwrap_or_default()
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net3() -> (Network, EndpointId, EndpointId, EndpointId) {
        let mut net = Network::new();
        let u = net.register(PartyLabel::User, "alice").unwrap();
        let s = net.register(PartyLabel::Server, "S1").unwrap();
        let r = net.register(PartyLabel::Rc, "RC").unwrap();
        (net, u, s, r)
    }

    fn delivered(step: Step) -> Delivery {
        match step {
            Step::Delivered(d) => d,
            other => panic!("expected delivery, got {other:?}"),
        }
    }

    #[test]
    fn send_then_step_delivers_same_bytes() {
        let (mut net, u, s, _) = net3();
        net.send(u, s, vec![1, 2, 3]).unwrap();
        let d = delivered(net.step());
        assert_eq!(d.event.bytes, vec![1, 2, 3]);
        assert_eq!((d.from, d.to), (u, s));
        assert!(matches!(net.step(), Step::Idle));
    }

    #[test]
    fn fifo_per_pair_and_round_robin_across_pairs() {
        let (mut net, u, s, r) = net3();
        net.send(s, r, vec![10]).unwrap();
        net.send(u, s, vec![1]).unwrap();
        net.send(u, s, vec![2]).unwrap();
        net.send(s, r, vec![11]).unwrap();
        let order: Vec<u8> = (0..4).map(|_| delivered(net.step()).event.bytes[0]).collect();
        // pairs in registration order: (u,s) then (s,r), alternating
        assert_eq!(order, vec![1, 10, 2, 11]);
    }

    #[test]
    fn drop_leaves_receiver_untouched() {
        let (mut net, u, s, _) = net3();
        net.interpose(Interposition::new(|e| e.tag == 4, Action::Drop));
        net.send(u, s, vec![4, 0]).unwrap();
        assert!(matches!(net.step(), Step::Dropped(_)));
        assert!(matches!(net.step(), Step::Idle));
        let stats = net.stats();
        assert_eq!(stats.sent, stats.delivered + stats.dropped + stats.replaced);
        assert_eq!(net.trace()[0].disposition, Disposition::Dropped);
    }

    #[test]
    fn replace_records_delivered_bytes() {
        let (mut net, u, s, _) = net3();
        net.interpose(Interposition::new(|_| true, Action::Replace(vec![9, 9])));
        net.send(u, s, vec![1]).unwrap();
        let d = delivered(net.step());
        assert_eq!(d.event.bytes, vec![9, 9]);
        assert_eq!(net.trace()[0].bytes, vec![9, 9]);
        assert_eq!(net.trace()[0].tag, 9);
    }

    #[test]
    fn first_matching_interposition_wins() {
        let (mut net, u, s, _) = net3();
        net.interpose(Interposition::new(|_| true, Action::Pass));
        net.interpose(Interposition::new(|_| true, Action::Drop));
        net.send(u, s, vec![1]).unwrap();
        assert!(matches!(net.step(), Step::Delivered(_)));
    }

    #[test]
    fn copy_does_not_alter_delivery() {
        let (mut net, u, s, _) = net3();
        let adv = net.register(PartyLabel::Adversary, "eve").unwrap();
        net.interpose(Interposition::new(|_| true, Action::CopyTo(adv)));
        net.send(u, s, vec![1, 2]).unwrap();
        let d = delivered(net.step());
        assert_eq!(d.event.bytes, vec![1, 2]);
        assert_eq!(d.event.disposition, Disposition::Delivered);
        let copies = net.take_inbox(adv);
        assert_eq!(copies.len(), 1);
        assert_eq!(copies[0].bytes, vec![1, 2]);
    }

    #[test]
    fn unknown_endpoint_and_duplicates_are_errors() {
        let (mut net, u, _, _) = net3();
        assert_eq!(net.send(u, EndpointId(99), vec![]), Err(SimError::UnknownEndpoint(99)));
        assert!(net.register(PartyLabel::User, "alice").is_err());
        assert!(net.register(PartyLabel::Adversary, "alice").is_ok());
    }

    #[test]
    fn sequence_numbers_increase_and_export_round_trips() {
        let (mut net, u, s, r) = net3();
        for i in 0..5u8 {
            net.send(u, s, vec![i, 0xaa]).unwrap();
            net.relay(s, r, vec![i]).unwrap();
        }
        while !matches!(net.step(), Step::Idle) {}
        let trace = net.trace();
        assert!(trace.windows(2).all(|w| w[0].seq < w[1].seq && w[0].tick < w[1].tick));
        let text = export_jsonl_string(trace);
        assert_eq!(text.lines().count(), 10);
        assert!(text.lines().all(|l| l.contains(TRACE_SCHEMA)));
        let back = import_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn import_rejects_foreign_schema() {
        let line = r#"{"schema":"other","seq":0,"tick":1,"from":{"label":"USER","identity":"a"},"to":{"label":"RC","identity":"RC"},"tag":1,"kind":"SEND","disposition":"DELIVERED","bytes":"01"}"#;
        assert!(import_jsonl(line.as_bytes()).is_err());
    }
}
