use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{
    ChallengePayload, ConfirmPayload, GrantPayload, LoginPayload, Message, Nonce, OpTally,
    RcState, ServerId, UserId, WrapPayload, TAG_SERVER_KEY, TAG_USER_KEY,
};
use crate::crypto::{CipherMode, GroupElement, PublicParams, Rng};

/// Where the RC gave up. Internal only: the wire REJECT carries none of this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectStage {
    /// `H(C_k)` inside `C_s` differs from the hash of the received `C_k`.
    M5Hash,
    /// `C_k` does not open under `K1` to the identities and `r1` of this run.
    M5Nonce,
    /// A ciphertext failed to open, or a message arrived out of order.
    Decrypt,
    /// Unknown identity, or identities inside `C_s` disagree with the header.
    IdMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Accept,
    Reject(RejectStage),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcLogEntry {
    pub run: u64,
    pub user: String,
    pub server: String,
    pub outcome: Outcome,
}

/// What the RC keeps between M2 and M5.
#[derive(Debug, Clone)]
struct PendingLogin {
    run: u64,
    g_a: GroupElement,
    r_1: Nonce,
    c_1: BigUint,
}

/// The registration center: credential registry plus in-flight logins,
/// keyed by `(ID_i, SID_j)` with a run counter. A fresh M2 for the same
/// pair evicts the older pending run.
#[derive(Debug)]
pub struct RegistrationCenter {
    state: RcState,
    params: PublicParams,
    mode: CipherMode,
    rng: Rng,
    pending: BTreeMap<(UserId, ServerId), PendingLogin>,
    next_run: u64,
    log: Vec<RcLogEntry>,
    ops: OpTally,
}

impl RegistrationCenter {
    pub fn new(state: RcState, params: PublicParams, mode: CipherMode, rng: Rng) -> Self {
        Self {
            state,
            params,
            mode,
            rng,
            pending: BTreeMap::new(),
            next_run: 0,
            log: Vec::new(),
            ops: OpTally::default(),
        }
    }

    pub fn state(&self) -> &RcState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut RcState {
        &mut self.state
    }

    pub fn rng_mut(&mut self) -> &mut Rng {
        &mut self.rng
    }

    pub fn log(&self) -> &[RcLogEntry] {
        &self.log
    }

    pub fn last_outcome(&self) -> Option<Outcome> {
        self.log.last().map(|e| e.outcome)
    }

    pub fn ops(&self) -> OpTally {
        self.ops
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// `(g^a1, r1)` as the RC recovered them from M2, for inspection.
    pub fn pending_login(&self, user: &UserId, server: &ServerId) -> Option<(&GroupElement, &Nonce)> {
        self.pending
            .get(&(user.clone(), server.clone()))
            .map(|p| (&p.g_a, &p.r_1))
    }

    fn reject(&mut self, run: u64, user: &str, server: &str, stage: RejectStage) -> Message {
        self.log.push(RcLogEntry {
            run,
            user: user.to_owned(),
            server: server.to_owned(),
            outcome: Outcome::Reject(stage),
        });
        Message::Reject
    }

    fn fresh_run(&mut self) -> u64 {
        let run = self.next_run;
        self.next_run += 1;
        run
    }

    /// Dispatches raw wire bytes. Anything other than a well-formed M2 or M5
    /// is rejected, never a panic.
    pub fn handle(&mut self, bytes: &[u8]) -> Message {
        match Message::decode(bytes) {
            Ok(m @ Message::M2 { .. }) => self.challenge(&m),
            Ok(m @ Message::M5 { .. }) => self.verify(&m),
            _ => {
                let run = self.fresh_run();
                self.reject(run, "", "", RejectStage::Decrypt)
            }
        }
    }

    /// M2 → M3: recovers `V_i = R_i xor h(ID_i || x)`, opens `C_a`, draws
    /// `c1` and answers `{ID_i, E_Vi(g^c1)}`.
    pub fn challenge(&mut self, m2: &Message) -> Message {
        let run = self.fresh_run();
        let Message::M2 { user, server, c_a } = m2 else {
            return self.reject(run, "", "", RejectStage::Decrypt);
        };
        let (u, s) = (user.as_str().to_owned(), server.as_str().to_owned());
        self.pending.remove(&(user.clone(), server.clone()));
        if self.state.server_key(server).is_none() {
            return self.reject(run, &u, &s, RejectStage::IdMismatch);
        }
        let Some(v_i) = self.state.recover(user, &mut self.ops) else {
            return self.reject(run, &u, &s, RejectStage::IdMismatch);
        };
        let key = self.ops.key(&v_i.0, TAG_USER_KEY, self.mode);
        let Ok(plain) = self.ops.open(&key, c_a) else {
            return self.reject(run, &u, &s, RejectStage::Decrypt);
        };
        let Ok(login) = LoginPayload::decode(&plain, &self.params, self.mode) else {
            return self.reject(run, &u, &s, RejectStage::Decrypt);
        };
        let c_1 = self.rng.random_exponent(&self.params);
        let g_c = match self.ops.exp(&self.params.generator(), &c_1, &self.params) {
            Ok(g) => g,
            Err(_) => return self.reject(run, &u, &s, RejectStage::Decrypt),
        };
        let c_c = self.ops.seal(&key, &ChallengePayload { g_c }.encode(&self.params), &mut self.rng);
        self.pending.insert(
            (user.clone(), server.clone()),
            PendingLogin { run, g_a: login.g_a, r_1: login.r_1, c_1 },
        );
        Message::M3 { user: user.clone(), c_c }
    }

    /// M5 → M6 or REJECT. Checks, in order: the `H(C_k)` binding inside
    /// `C_s`, the identities inside `C_s`, then opens `C_k` under `K1` and
    /// compares identities and `r1` with what M2 carried.
    pub fn verify(&mut self, m5: &Message) -> Message {
        let Message::M5 { user, server, c_k, c_s } = m5 else {
            let run = self.fresh_run();
            return self.reject(run, "", "", RejectStage::Decrypt);
        };
        let (u, s) = (user.as_str().to_owned(), server.as_str().to_owned());
        // evicted on every outcome
        let Some(pending) = self.pending.remove(&(user.clone(), server.clone())) else {
            let run = self.fresh_run();
            return self.reject(run, &u, &s, RejectStage::Decrypt);
        };
        let run = pending.run;
        let Some(v_j) = self.state.server_key(server) else {
            return self.reject(run, &u, &s, RejectStage::IdMismatch);
        };
        let server_key = self.ops.key(&v_j, TAG_SERVER_KEY, self.mode);
        let Ok(plain) = self.ops.open(&server_key, c_s) else {
            return self.reject(run, &u, &s, RejectStage::Decrypt);
        };
        let Ok(wrap) = WrapPayload::decode(&plain, &self.params, self.mode, u.len(), s.len()) else {
            return self.reject(run, &u, &s, RejectStage::Decrypt);
        };
        let recomputed = self.ops.hash(b"H", &c_k.to_bytes());
        if recomputed != wrap.h_ck {
            return self.reject(run, &u, &s, RejectStage::M5Hash);
        }
        if wrap.user != user.as_bytes() || wrap.server != server.as_bytes() {
            return self.reject(run, &u, &s, RejectStage::IdMismatch);
        }

        let k_1 = match self.ops.exp(&pending.g_a, &pending.c_1, &self.params) {
            Ok(k) => k,
            Err(_) => return self.reject(run, &u, &s, RejectStage::Decrypt),
        };
        let session_key = self.ops.session_key(&k_1, &self.params, self.mode);
        // an authenticated C_k that fails to open means its creator's K differs from K1
        let Ok(plain) = self.ops.open(&session_key, c_k) else {
            return self.reject(run, &u, &s, RejectStage::M5Nonce);
        };
        let Ok(confirm) = ConfirmPayload::decode(&plain, self.mode, u.len(), s.len()) else {
            return self.reject(run, &u, &s, RejectStage::M5Nonce);
        };
        if confirm.user != user.as_bytes() || confirm.server != server.as_bytes() || confirm.r_1 != pending.r_1 {
            return self.reject(run, &u, &s, RejectStage::M5Nonce);
        }

        let c_2 = self.rng.random_nonce();
        let to_server = GrantPayload { peer_share: pending.g_a, echo: wrap.r_2, c_2 }.encode(&self.params);
        let c_sj = self.ops.seal(&server_key, &to_server, &mut self.rng);
        let to_user = GrantPayload { peer_share: wrap.g_b, echo: pending.r_1, c_2 }.encode(&self.params);
        let c_u = self.ops.seal(&session_key, &to_user, &mut self.rng);
        self.log.push(RcLogEntry { run, user: u, server: s, outcome: Outcome::Accept });
        Message::M6 { c_sj, c_u }
    }
}
