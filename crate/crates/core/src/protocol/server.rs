use num_bigint::BigUint;

use super::{
    GrantPayload, Message, MessageTag, Nonce, OpTally, ProtocolError, ServerId, UserId,
    WrapPayload, TAG_SERVER_KEY,
};
use crate::crypto::{CipherMode, Digest, GroupElement, PublicParams, Rng, SymKey};

/// A server's long-term identity and the key `V_j` it shares with the RC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerCredentials {
    pub server: ServerId,
    pub v_j: Digest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ServerPhase {
    Idle,
    AwaitChallenge,
    AwaitConfirm,
    AwaitGrant,
    Established,
    Aborted,
}

impl ServerPhase {
    fn name(self) -> &'static str {
        match self {
            ServerPhase::Idle => "Idle",
            ServerPhase::AwaitChallenge => "AwaitChallenge",
            ServerPhase::AwaitConfirm => "AwaitConfirm",
            ServerPhase::AwaitGrant => "AwaitGrant",
            ServerPhase::Established => "Established",
            ServerPhase::Aborted => "Aborted",
        }
    }
}

/// Application-server side of one login.
#[derive(Debug)]
pub struct ServerSession {
    creds: ServerCredentials,
    params: PublicParams,
    mode: CipherMode,
    rng: Rng,
    phase: ServerPhase,
    user: Option<UserId>,
    b_1: Option<BigUint>,
    r_2: Option<Nonce>,
    sk: Option<GroupElement>,
    ops: OpTally,
}

impl ServerSession {
    pub fn new(creds: ServerCredentials, params: PublicParams, mode: CipherMode, rng: Rng) -> Self {
        Self {
            creds,
            params,
            mode,
            rng,
            phase: ServerPhase::Idle,
            user: None,
            b_1: None,
            r_2: None,
            sk: None,
            ops: OpTally::default(),
        }
    }

    pub fn server(&self) -> &ServerId {
        &self.creds.server
    }

    pub fn user(&self) -> Option<&UserId> {
        self.user.as_ref()
    }

    pub fn phase(&self) -> ServerPhase {
        self.phase
    }

    pub fn ops(&self) -> OpTally {
        self.ops
    }

    pub fn session_key(&self) -> Option<&GroupElement> {
        self.sk.as_ref()
    }

    pub fn r_2(&self) -> Option<&Nonce> {
        self.r_2.as_ref()
    }

    fn key(&mut self) -> SymKey {
        self.ops.key(&self.creds.v_j, TAG_SERVER_KEY, self.mode)
    }

    fn advance(&mut self, to: ServerPhase) {
        debug_assert!(to > self.phase, "server phase must move forward");
        self.phase = to;
    }

    fn abort(&mut self, err: ProtocolError) -> ProtocolError {
        self.phase = ServerPhase::Aborted;
        err
    }

    fn unexpected(&self, got: MessageTag) -> ProtocolError {
        ProtocolError::Unexpected { got, phase: self.phase.name() }
    }

    /// `M2 = {ID_i, SID_j, C_a}` with `C_a` untouched.
    pub fn forward_login(&mut self, m1: &Message) -> Result<Message, ProtocolError> {
        if self.phase != ServerPhase::Idle {
            return Err(self.unexpected(m1.tag()));
        }
        let Message::M1 { user, c_a } = m1 else {
            return Err(ProtocolError::Malformed("expected M1"));
        };
        self.user = Some(user.clone());
        self.advance(ServerPhase::AwaitChallenge);
        Ok(Message::M2 { user: user.clone(), server: self.creds.server.clone(), c_a: c_a.clone() })
    }

    /// Notes that M3 passed through on its way to the user.
    pub fn relay_challenge(&mut self, m3: &Message) -> Result<(), ProtocolError> {
        let Message::M3 { user, .. } = m3 else {
            return Err(self.unexpected(m3.tag()));
        };
        if self.phase != ServerPhase::AwaitChallenge {
            return Err(self.unexpected(m3.tag()));
        }
        if Some(user) != self.user.as_ref() {
            return Err(self.abort(ProtocolError::IdentityMismatch));
        }
        self.advance(ServerPhase::AwaitConfirm);
        Ok(())
    }

    /// Draws `b1, r2` and emits
    /// `M5 = {ID_i, SID_j, C_k, E_Vj(g^b1, H(C_k), ID_i, SID_j, r2)}`.
    pub fn wrap(&mut self, m4: &Message) -> Result<Message, ProtocolError> {
        if self.phase != ServerPhase::AwaitConfirm {
            return Err(self.unexpected(m4.tag()));
        }
        let Message::M4 { c_k } = m4 else {
            return Err(self.unexpected(m4.tag()));
        };
        let user = self.user.clone().expect("set in forward_login");
        let b_1 = self.rng.random_exponent(&self.params);
        let r_2 = self.rng.random_nonce();
        let g_b = self.ops.exp(&self.params.generator(), &b_1, &self.params)?;
        let h_ck = self.ops.hash(b"H", &c_k.to_bytes());
        let payload = WrapPayload {
            g_b,
            h_ck,
            user: user.as_bytes().to_vec(),
            server: self.creds.server.as_bytes().to_vec(),
            r_2,
        }
        .encode(&self.params);
        let key = self.key();
        let c_s = self.ops.seal(&key, &payload, &mut self.rng);

        self.b_1 = Some(b_1);
        self.r_2 = Some(r_2);
        self.advance(ServerPhase::AwaitGrant);
        Ok(Message::M5 { user, server: self.creds.server.clone(), c_k: c_k.clone(), c_s })
    }

    /// Handles M6: checks the `r2` echo in `C_sj` and derives
    /// `SK = (g^a1)^b1`. The caller relays M6 to the user.
    pub fn finalize(&mut self, m6: &Message) -> Result<GroupElement, ProtocolError> {
        if let Message::Reject = m6 {
            return Err(self.abort(ProtocolError::Rejected));
        }
        if self.phase != ServerPhase::AwaitGrant {
            return Err(self.unexpected(m6.tag()));
        }
        let Message::M6 { c_sj, .. } = m6 else {
            return Err(self.abort(self.unexpected(m6.tag())));
        };
        let key = self.key();
        let plain = match self.ops.open(&key, c_sj) {
            Ok(p) => p,
            Err(_) => return Err(self.abort(ProtocolError::Decrypt)),
        };
        let grant = match GrantPayload::decode(&plain, &self.params, self.mode) {
            Ok(g) => g,
            Err(e) => return Err(self.abort(e)),
        };
        if Some(grant.echo) != self.r_2 {
            return Err(self.abort(ProtocolError::NonceMismatch));
        }
        let b_1 = self.b_1.as_ref().expect("set in wrap");
        let sk = self.ops.exp(&grant.peer_share, b_1, &self.params)?;
        self.sk = Some(sk.clone());
        self.advance(ServerPhase::Established);
        Ok(sk)
    }

    #[doc(hidden)]
    pub fn ephemeral_exponent(&self) -> Option<&BigUint> {
        self.b_1.as_ref()
    }
}
