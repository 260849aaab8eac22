use num_bigint::BigUint;

use super::{
    derive_verifier, ChallengePayload, ConfirmPayload, GrantPayload, KiSecret, LoginPayload,
    Message, MessageTag, Nonce, OpTally, ProtocolError, SchemeVariant, ServerId, UserId,
    TAG_USER_KEY,
};
use crate::crypto::{CipherMode, GroupElement, PublicParams, Rng, SymKey};

/// What the user remembers: identity, password and (IMPROVED) `k_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCredentials {
    pub user: UserId,
    pub password: Vec<u8>,
    pub k_i: Option<KiSecret>,
    pub variant: SchemeVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum UserPhase {
    Idle,
    AwaitChallenge,
    AwaitGrant,
    Established,
    Aborted,
}

impl UserPhase {
    fn name(self) -> &'static str {
        match self {
            UserPhase::Idle => "Idle",
            UserPhase::AwaitChallenge => "AwaitChallenge",
            UserPhase::AwaitGrant => "AwaitGrant",
            UserPhase::Established => "Established",
            UserPhase::Aborted => "Aborted",
        }
    }
}

/// Client side of one login.
#[derive(Debug)]
pub struct UserSession {
    creds: UserCredentials,
    server: ServerId,
    params: PublicParams,
    mode: CipherMode,
    rng: Rng,
    phase: UserPhase,
    a_1: Option<BigUint>,
    r_1: Option<Nonce>,
    user_key: Option<SymKey>,
    k_1: Option<GroupElement>,
    session_key: Option<SymKey>,
    sk: Option<GroupElement>,
    ops: OpTally,
}

impl UserSession {
    pub fn new(
        creds: UserCredentials,
        server: ServerId,
        params: PublicParams,
        mode: CipherMode,
        rng: Rng,
    ) -> Self {
        Self {
            creds,
            server,
            params,
            mode,
            rng,
            phase: UserPhase::Idle,
            a_1: None,
            r_1: None,
            user_key: None,
            k_1: None,
            session_key: None,
            sk: None,
            ops: OpTally::default(),
        }
    }

    pub fn phase(&self) -> UserPhase {
        self.phase
    }

    pub fn ops(&self) -> OpTally {
        self.ops
    }

    pub fn user(&self) -> &UserId {
        &self.creds.user
    }

    /// `K1 = g^(a1 c1)`, known after M3.
    pub fn k_1(&self) -> Option<&GroupElement> {
        self.k_1.as_ref()
    }

    /// `SK = g^(a1 b1)`, only after a successful M6.
    pub fn session_key(&self) -> Option<&GroupElement> {
        self.sk.as_ref()
    }

    pub fn r_1(&self) -> Option<&Nonce> {
        self.r_1.as_ref()
    }

    fn advance(&mut self, to: UserPhase) {
        debug_assert!(to > self.phase, "user phase must move forward");
        self.phase = to;
    }

    fn abort(&mut self, err: ProtocolError) -> ProtocolError {
        self.phase = UserPhase::Aborted;
        err
    }

    fn expect_phase(&self, want: UserPhase, got: MessageTag) -> Result<(), ProtocolError> {
        if self.phase != want {
            return Err(ProtocolError::Unexpected { got, phase: self.phase.name() });
        }
        Ok(())
    }

    /// Draws `a1, r1` and emits `M1 = {ID_i, E_Vi(g^a1, r1)}`.
    pub fn login_init(&mut self) -> Result<Message, ProtocolError> {
        self.expect_phase(UserPhase::Idle, MessageTag::M1)?;
        let verifier = derive_verifier(self.creds.variant, &self.creds.password, self.creds.k_i.as_ref())?;
        self.ops.hashes += 1;
        let key = self.ops.key(&verifier.0, TAG_USER_KEY, self.mode);

        let a_1 = self.rng.random_exponent(&self.params);
        let r_1 = self.rng.random_nonce();
        let g_a = self.ops.exp(&self.params.generator(), &a_1, &self.params)?;
        let payload = LoginPayload { g_a, r_1 }.encode(&self.params);
        let c_a = self.ops.seal(&key, &payload, &mut self.rng);

        self.a_1 = Some(a_1);
        self.r_1 = Some(r_1);
        self.user_key = Some(key);
        self.advance(UserPhase::AwaitChallenge);
        Ok(Message::M1 { user: self.creds.user.clone(), c_a })
    }

    /// Handles M3: recovers `g^c1`, computes `K1`, emits
    /// `M4 = {E_K1(ID_i, SID_j, r1)}`.
    pub fn confirm(&mut self, m3: &Message) -> Result<Message, ProtocolError> {
        self.expect_phase(UserPhase::AwaitChallenge, m3.tag())?;
        let Message::M3 { user, c_c } = m3 else {
            return Err(self.abort(ProtocolError::Unexpected { got: m3.tag(), phase: "AwaitChallenge" }));
        };
        if user != &self.creds.user {
            return Err(self.abort(ProtocolError::IdentityMismatch));
        }
        let key = self.user_key.clone().expect("set in login_init");
        let plain = match self.ops.open(&key, c_c) {
            Ok(p) => p,
            Err(_) => return Err(self.abort(ProtocolError::Decrypt)),
        };
        let challenge = match ChallengePayload::decode(&plain, &self.params, self.mode) {
            Ok(c) => c,
            Err(e) => return Err(self.abort(e)),
        };
        let a_1 = self.a_1.as_ref().expect("set in login_init");
        let k_1 = self.ops.exp(&challenge.g_c, a_1, &self.params)?;
        let session_key = self.ops.session_key(&k_1, &self.params, self.mode);
        let payload = ConfirmPayload {
            user: self.creds.user.as_bytes().to_vec(),
            server: self.server.as_bytes().to_vec(),
            r_1: self.r_1.expect("set in login_init"),
        }
        .encode();
        let c_k = self.ops.seal(&session_key, &payload, &mut self.rng);

        self.k_1 = Some(k_1);
        self.session_key = Some(session_key);
        self.advance(UserPhase::AwaitGrant);
        Ok(Message::M4 { c_k })
    }

    /// Handles the relayed M6 (using only `C_u`). Checks the `r1` echo and
    /// derives `SK = (g^b1)^a1`.
    pub fn finalize(&mut self, m6: &Message) -> Result<GroupElement, ProtocolError> {
        if let Message::Reject = m6 {
            return Err(self.abort(ProtocolError::Rejected));
        }
        self.expect_phase(UserPhase::AwaitGrant, m6.tag())?;
        let Message::M6 { c_u, .. } = m6 else {
            return Err(self.abort(ProtocolError::Unexpected { got: m6.tag(), phase: "AwaitGrant" }));
        };
        let key = self.session_key.clone().expect("set in confirm");
        let plain = match self.ops.open(&key, c_u) {
            Ok(p) => p,
            Err(_) => return Err(self.abort(ProtocolError::Decrypt)),
        };
        let grant = match GrantPayload::decode(&plain, &self.params, self.mode) {
            Ok(g) => g,
            Err(e) => return Err(self.abort(e)),
        };
        if Some(grant.echo) != self.r_1 {
            return Err(self.abort(ProtocolError::NonceMismatch));
        }
        let a_1 = self.a_1.as_ref().expect("set in login_init");
        let sk = self.ops.exp(&grant.peer_share, a_1, &self.params)?;
        self.sk = Some(sk.clone());
        self.advance(UserPhase::Established);
        Ok(sk)
    }

    /// A REJECT relayed by the server ends the session.
    pub fn rejected(&mut self) {
        self.phase = UserPhase::Aborted;
    }

    /// The secret exponent, for secrecy checks in tests.
    #[doc(hidden)]
    pub fn ephemeral_exponent(&self) -> Option<&BigUint> {
        self.a_1.as_ref()
    }
}
