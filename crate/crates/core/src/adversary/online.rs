use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::Dictionary;
use crate::crypto::{CipherMode, GroupId, PublicParams, Rng};
use crate::deployment::{DeployError, Deployment, Outbound, TICK_BUDGET};
use crate::protocol::{
    generate_k_i, KiSecret, Message, OpTally, Outcome, ProtocolError, SchemeVariant,
    ServerCredentials, ServerSession, UserCredentials, UserId, UserSession,
};
use crate::simnet::PartyLabel;

/// What the attacker knows about the target's `k_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KiKnowledge {
    /// Nothing: the verifier is formed as `h(guess)`.
    None,
    /// A fresh uniformly random `k_i` of `bits` leading bits per attempt.
    RandomGuess { bits: u32 },
    /// The true `k_i`. Only for the sanity inversion.
    Known(KiSecret),
}

impl KiKnowledge {
    pub fn label(&self) -> String {
        match self {
            KiKnowledge::None => "NONE".into(),
            KiKnowledge::RandomGuess { bits } => format!("RANDOM_GUESS/{bits}"),
            KiKnowledge::Known(_) => "KNOWN".into(),
        }
    }
}

/// Ephemerals of one guess: the impersonated user half (`a11, r11`) and
/// the attacker's own server half (`b11, r21`).
#[derive(Debug)]
pub struct GuessAttempt {
    pub guess: String,
    pub user: UserSession,
    pub server: ServerSession,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub guess: String,
    pub verdict: bool,
    pub rc_outcome: Option<Outcome>,
    /// Attacker-side failure, e.g. a decrypt failure at M3.
    pub attacker_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub variant: SchemeVariant,
    pub group: GroupId,
    pub mode: CipherMode,
    pub target: String,
    pub knowledge: String,
    pub dictionary_size: usize,
    pub guesses_tried: usize,
    /// Protocol runs started. Always equal to `guesses_tried`.
    pub runs: usize,
    pub recovered: Option<String>,
    pub attempts: Vec<AttemptRecord>,
    pub ops: OpTally,
    pub messages_sent: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// A registered server that uses its `V_j` to test password guesses.
/// It never holds `x`, `V_i` or (unless told) `k_i`.
#[derive(Debug)]
pub struct Attacker {
    creds: ServerCredentials,
    target: UserId,
    knowledge: KiKnowledge,
    params: PublicParams,
    mode: CipherMode,
    rng: Rng,
    attempts: u64,
    ops: OpTally,
}

impl Attacker {
    pub fn new(
        creds: ServerCredentials,
        target: UserId,
        knowledge: KiKnowledge,
        params: PublicParams,
        mode: CipherMode,
        rng: Rng,
    ) -> Self {
        Self { creds, target, knowledge, params, mode, rng, attempts: 0, ops: OpTally::default() }
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn ops(&self) -> OpTally {
        self.ops
    }

    /// Forged `M1 = {ID_i, E_h(guess)(g^a11, r11)}`.
    pub fn build_guess_login(&mut self, guess: &str) -> Result<(GuessAttempt, Message), ProtocolError> {
        let n = self.attempts;
        self.attempts += 1;
        let (variant, k_i) = match self.knowledge {
            KiKnowledge::None => (SchemeVariant::Tsai, None),
            KiKnowledge::RandomGuess { bits } => (SchemeVariant::Improved, Some(generate_k_i(&mut self.rng, bits))),
            KiKnowledge::Known(k) => (SchemeVariant::Improved, Some(k)),
        };
        let creds = UserCredentials {
            user: self.target.clone(),
            password: guess.as_bytes().to_vec(),
            k_i,
            variant,
        };
        let mut user = UserSession::new(
            creds,
            self.creds.server.clone(),
            self.params.clone(),
            self.mode,
            self.rng.fork(&format!("attempt/{n}/user")),
        );
        let server = ServerSession::new(
            self.creds.clone(),
            self.params.clone(),
            self.mode,
            self.rng.fork(&format!("attempt/{n}/server")),
        );
        let m1 = user.login_init()?;
        Ok((GuessAttempt { guess: guess.to_owned(), user, server }, m1))
    }

    /// From M3: opens `C_c` under the guessed key, computes `K11`, and
    /// returns the forged M4 together with the M5 wrapped under the real `V_j`.
    pub fn complete_guess_run(
        &self,
        attempt: &mut GuessAttempt,
        m3: &Message,
    ) -> Result<(Message, Message), ProtocolError> {
        attempt.server.relay_challenge(m3)?;
        let m4 = attempt.user.confirm(m3)?;
        let m5 = attempt.server.wrap(&m4)?;
        Ok((m4, m5))
    }

    /// One guess, one protocol run against the RC of `dep`, sent from the
    /// compromised server's own endpoint.
    pub fn attempt(&mut self, dep: &mut Deployment, guess: &str) -> Result<AttemptRecord, DeployError> {
        let s_ep = dep
            .network()
            .lookup(PartyLabel::Server, self.creds.server.as_str())
            .ok_or_else(|| ProtocolError::UnknownServer(self.creds.server.to_string()))?;
        let rc_ep = dep.rc_endpoint();
        let log_before = dep.rc().log().len();

        let (mut attempt, m1) = self.build_guess_login(guess)?;
        let m2 = attempt.server.forward_login(&m1)?;
        dep.network_mut().send(s_ep, rc_ep, m2.encode())?;

        let mut response = None;
        let mut error = None;
        dep.pump(TICK_BUDGET, |d| {
            if d.to != s_ep {
                return vec![];
            }
            match Message::decode(&d.event.bytes) {
                Ok(m @ Message::M3 { .. }) => match self.complete_guess_run(&mut attempt, &m) {
                    Ok((_, m5)) => vec![Outbound::send(s_ep, rc_ep, &m5)],
                    Err(e) => {
                        error = Some(e);
                        vec![]
                    }
                },
                Ok(m) => {
                    response = Some(m);
                    vec![]
                }
                Err(e) => {
                    error = Some(e);
                    vec![]
                }
            }
        })?;

        self.ops += attempt.user.ops() + attempt.server.ops();
        Ok(AttemptRecord {
            guess: attempt.guess,
            verdict: response.as_ref().is_some_and(interpret_outcome),
            rc_outcome: dep.rc().log()[log_before..].last().map(|e| e.outcome),
            attacker_error: error.map(|e| e.to_string()),
        })
    }
}

/// ACCEPT means the guessed verifier equals the RC's `V_i`.
pub fn interpret_outcome(rc_response: &Message) -> bool {
    matches!(rc_response, Message::M6 { .. })
}

/// Tries each dictionary word in order, one full run per guess, and stops
/// at the first ACCEPT.
pub fn run_online_attack(
    dep: &mut Deployment,
    server: &crate::protocol::ServerId,
    target: &UserId,
    dictionary: &Dictionary,
    knowledge: KiKnowledge,
) -> Result<AttackReport, DeployError> {
    let creds = dep
        .server_credentials(server)
        .cloned()
        .ok_or_else(|| ProtocolError::UnknownServer(server.to_string()))?;
    let cfg = *dep.config();
    let rng = Rng::new(cfg.seed, &format!("adversary/{server}/{target}"));
    let mut attacker = Attacker::new(creds, target.clone(), knowledge, dep.params().clone(), cfg.mode, rng);

    let start = Instant::now();
    let sent_before = dep.network().stats().sent;
    let mut attempts = Vec::new();
    let mut recovered = None;
    for word in dictionary.words() {
        let rec = attacker.attempt(dep, word)?;
        let hit = rec.verdict;
        attempts.push(rec);
        if hit {
            recovered = Some(word.clone());
            break;
        }
    }
    Ok(AttackReport {
        variant: cfg.variant,
        group: cfg.group,
        mode: cfg.mode,
        target: target.to_string(),
        knowledge: knowledge.label(),
        dictionary_size: dictionary.len(),
        guesses_tried: attempts.len(),
        runs: attacker.attempts() as usize,
        recovered,
        attempts,
        ops: attacker.ops(),
        messages_sent: dep.network().stats().sent - sent_before,
        elapsed: start.elapsed(),
    })
}
