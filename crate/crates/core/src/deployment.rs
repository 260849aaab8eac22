//! A registration center, its enrolled users and servers, and the bus that
//! connects them. Logins are driven to quiescence one at a time.

use std::collections::BTreeMap;
use std::ops::Range;

use thiserror::Error;

use crate::crypto::{CipherMode, GroupElement, GroupId, PublicParams, Rng};
use crate::protocol::{
    generate_k_i, Message, MessageTag, OpTally, Outcome, ProtocolError, RcState,
    RegistrationCenter, RegistrationRequest, SchemeVariant, ServerCredentials, ServerId,
    ServerSession, Transcript, UserCredentials, UserId, UserSession,
};
use crate::simnet::{Delivery, EndpointId, Network, PartyLabel, SendKind, SimError, Step};

/// Hops in one honest login: six messages plus the two relays to the user.
pub const HONEST_LOGIN_HOPS: u64 = 8;

/// Tick budget per driven run.
pub const TICK_BUDGET: u64 = 10 * HONEST_LOGIN_HOPS;

#[derive(Debug, Error)]
pub enum DeployError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("run did not quiesce within {0} ticks")]
    Livelock(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeploymentConfig {
    pub variant: SchemeVariant,
    pub group: GroupId,
    pub mode: CipherMode,
    pub seed: u64,
    /// Random bits in each `k_i` (IMPROVED only).
    pub ki_bits: u32,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            variant: SchemeVariant::Tsai,
            group: GroupId::Toy23,
            mode: CipherMode::Authenticated,
            seed: 0,
            ki_bits: 256,
        }
    }
}

/// A message a handler wants put on the bus.
#[derive(Debug, Clone)]
pub struct Outbound {
    pub from: EndpointId,
    pub to: EndpointId,
    pub kind: SendKind,
    pub bytes: Vec<u8>,
}

impl Outbound {
    pub fn send(from: EndpointId, to: EndpointId, msg: &Message) -> Self {
        Self { from, to, kind: SendKind::Send, bytes: msg.encode() }
    }

    pub fn relay(from: EndpointId, to: EndpointId, bytes: Vec<u8>) -> Self {
        Self { from, to, kind: SendKind::Relay, bytes }
    }
}

/// Everything observable about one driven login.
#[derive(Debug, Clone)]
pub struct LoginRun {
    pub run: u64,
    pub user: UserId,
    pub server: ServerId,
    pub user_sk: Option<GroupElement>,
    pub server_sk: Option<GroupElement>,
    pub user_error: Option<ProtocolError>,
    pub server_error: Option<ProtocolError>,
    pub rc_outcome: Option<Outcome>,
    /// Indices into the network trace.
    pub events: Range<usize>,
    pub tallies: BTreeMap<PartyLabel, OpTally>,
    /// `K1` as the user computed it.
    pub user_k1: Option<GroupElement>,
}

impl LoginRun {
    /// Both ends hold a session key.
    pub fn completed(&self) -> bool {
        self.user_sk.is_some() && self.server_sk.is_some()
    }

    pub fn keys_match(&self) -> bool {
        self.completed() && self.user_sk == self.server_sk
    }
}

pub struct Deployment {
    config: DeploymentConfig,
    params: PublicParams,
    rc: RegistrationCenter,
    net: Network,
    rc_endpoint: EndpointId,
    rng: Rng,
    users: BTreeMap<UserId, UserCredentials>,
    servers: BTreeMap<ServerId, ServerCredentials>,
    registrations: Vec<RegistrationRequest>,
    logins: u64,
}

impl Deployment {
    pub fn new(config: DeploymentConfig) -> Self {
        let params = config.group.params();
        let mut rng = Rng::new(config.seed, "deployment");
        let state = RcState::generate(config.variant, &mut rng);
        Self::with_state(config, params, state, rng)
    }

    /// Starts from an existing registry (e.g. one loaded from disk).
    pub fn from_registry(config: DeploymentConfig, state: RcState) -> Result<Self, DeployError> {
        if state.variant() != config.variant {
            return Err(ProtocolError::VariantMismatch("registry variant differs from config").into());
        }
        let params = config.group.params();
        let rng = Rng::new(config.seed, "deployment");
        let mut d = Self::with_state(config, params, state, rng);
        let users: Vec<UserId> = d.rc.state().users().map(|r| r.user.clone()).collect();
        let servers: Vec<ServerId> = d.rc.state().server_ids().cloned().collect();
        for u in users {
            d.net.register(PartyLabel::User, u.as_str())?;
        }
        for s in servers {
            let v_j = d.rc.state().server_key(&s).expect("listed server");
            d.net.register(PartyLabel::Server, s.as_str())?;
            d.servers.insert(s.clone(), ServerCredentials { server: s, v_j });
        }
        Ok(d)
    }

    fn with_state(config: DeploymentConfig, params: PublicParams, state: RcState, rng: Rng) -> Self {
        let mut net = Network::new();
        let rc_endpoint = net.register(PartyLabel::Rc, "RC").expect("fresh network");
        let rc = RegistrationCenter::new(state, params.clone(), config.mode, Rng::new(config.seed, "rc"));
        Self {
            config,
            params,
            rc,
            net,
            rc_endpoint,
            rng,
            users: BTreeMap::new(),
            servers: BTreeMap::new(),
            registrations: Vec::new(),
            logins: 0,
        }
    }

    pub fn config(&self) -> &DeploymentConfig {
        &self.config
    }

    pub fn params(&self) -> &PublicParams {
        &self.params
    }

    pub fn rc(&self) -> &RegistrationCenter {
        &self.rc
    }

    pub fn rc_mut(&mut self) -> &mut RegistrationCenter {
        &mut self.rc
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn rc_endpoint(&self) -> EndpointId {
        self.rc_endpoint
    }

    pub fn registrations(&self) -> &[RegistrationRequest] {
        &self.registrations
    }

    /// Registers a user over the (out-of-band) secure channel. Under
    /// IMPROVED the user draws `k_i` and submits it alongside the password.
    pub fn enroll_user(&mut self, user: &str, password: &str) -> Result<UserCredentials, DeployError> {
        let user = UserId::new(user)?;
        let k_i = match self.config.variant {
            SchemeVariant::Tsai => None,
            SchemeVariant::Improved => Some(generate_k_i(&mut self.rng, self.config.ki_bits)),
        };
        let req = RegistrationRequest { user: user.clone(), password: password.as_bytes().to_vec(), k_i };
        self.rc.state_mut().register_user(&req)?;
        if self.net.lookup(PartyLabel::User, user.as_str()).is_none() {
            self.net.register(PartyLabel::User, user.as_str())?;
        }
        let creds = UserCredentials {
            user: user.clone(),
            password: req.password.clone(),
            k_i,
            variant: self.config.variant,
        };
        self.registrations.push(req);
        self.users.insert(user, creds.clone());
        Ok(creds)
    }

    /// Client-side credentials for a user already in a loaded registry.
    pub fn remember_user(&mut self, creds: UserCredentials) -> Result<(), DeployError> {
        if self.rc.state().user_record(&creds.user).is_none() {
            return Err(ProtocolError::UnknownUser(creds.user.to_string()).into());
        }
        if creds.variant != self.config.variant {
            return Err(ProtocolError::VariantMismatch("credentials variant differs from config").into());
        }
        self.users.insert(creds.user.clone(), creds);
        Ok(())
    }

    pub fn enroll_server(&mut self, server: &str) -> Result<ServerCredentials, DeployError> {
        let server = ServerId::new(server)?;
        let v_j = self.rc.state_mut().register_server(&server, &mut self.rng)?;
        self.net.register(PartyLabel::Server, server.as_str())?;
        let creds = ServerCredentials { server: server.clone(), v_j };
        self.servers.insert(server, creds.clone());
        Ok(creds)
    }

    pub fn user_credentials(&self, user: &UserId) -> Option<&UserCredentials> {
        self.users.get(user)
    }

    pub fn server_credentials(&self, server: &ServerId) -> Option<&ServerCredentials> {
        self.servers.get(server)
    }

    /// Endpoint for an adversary posing under `identity`; created on first use.
    pub fn adversary_endpoint(&mut self, identity: &str) -> Result<EndpointId, DeployError> {
        match self.net.lookup(PartyLabel::Adversary, identity) {
            Some(id) => Ok(id),
            None => Ok(self.net.register(PartyLabel::Adversary, identity)?),
        }
    }

    /// Steps the bus until idle. Messages for the RC are answered here; all
    /// other deliveries go to `handler`.
    pub fn pump(
        &mut self,
        budget: u64,
        mut handler: impl FnMut(&Delivery) -> Vec<Outbound>,
    ) -> Result<u64, DeployError> {
        let mut ticks = 0;
        loop {
            if ticks >= budget && self.net.pending() > 0 {
                return Err(DeployError::Livelock(budget));
            }
            let outbound = match self.net.step() {
                Step::Idle => return Ok(ticks),
                Step::Dropped(_) => Vec::new(),
                Step::Delivered(d) if d.to == self.rc_endpoint => {
                    let reply = self.rc.handle(&d.event.bytes);
                    vec![Outbound::send(self.rc_endpoint, d.from, &reply)]
                }
                Step::Delivered(d) => handler(&d),
            };
            ticks += 1;
            for o in outbound {
                match o.kind {
                    SendKind::Send => self.net.send(o.from, o.to, o.bytes)?,
                    SendKind::Relay => self.net.relay(o.from, o.to, o.bytes)?,
                    SendKind::Inject => self.net.inject(o.from, o.to, o.bytes)?,
                }
            }
        }
    }

    pub fn next_run_label(&mut self) -> u64 {
        let n = self.logins;
        self.logins += 1;
        n
    }

    /// Drives one login of `user` at `server`. `typed_password` lets the
    /// user mistype; `None` uses the enrolled password.
    pub fn login(
        &mut self,
        user: &UserId,
        server: &ServerId,
        typed_password: Option<&[u8]>,
    ) -> Result<LoginRun, DeployError> {
        let mut creds = self
            .users
            .get(user)
            .cloned()
            .ok_or_else(|| ProtocolError::UnknownUser(user.to_string()))?;
        if let Some(pw) = typed_password {
            creds.password = pw.to_vec();
        }
        let server_creds = self
            .servers
            .get(server)
            .cloned()
            .ok_or_else(|| ProtocolError::UnknownServer(server.to_string()))?;
        let u_ep = self.net.lookup(PartyLabel::User, user.as_str()).expect("enrolled user has an endpoint");
        let s_ep = self.net.lookup(PartyLabel::Server, server.as_str()).expect("enrolled server has an endpoint");
        let rc_ep = self.rc_endpoint;

        let run = self.next_run_label();
        let seed = self.config.seed;
        let mut user_session = UserSession::new(
            creds,
            server.clone(),
            self.params.clone(),
            self.config.mode,
            Rng::new(seed, &format!("user/{user}/{run}")),
        );
        let mut server_session = ServerSession::new(
            server_creds,
            self.params.clone(),
            self.config.mode,
            Rng::new(seed, &format!("server/{server}/{run}")),
        );
        let rc_before = self.rc.ops();
        let log_before = self.rc.log().len();
        let first_event = self.net.trace().len();

        let m1 = user_session.login_init()?;
        self.net.send(u_ep, s_ep, m1.encode())?;

        let mut user_sk = None;
        let mut server_sk = None;
        let mut user_error = None;
        let mut server_error = None;
        self.pump(TICK_BUDGET, |d| {
            let msg = Message::decode(&d.event.bytes);
            if d.to == s_ep {
                let m = match msg {
                    Ok(m) => m,
                    Err(e) => {
                        server_error = Some(e);
                        return vec![];
                    }
                };
                match m.tag() {
                    MessageTag::M1 => match server_session.forward_login(&m) {
                        Ok(m2) => vec![Outbound::send(s_ep, rc_ep, &m2)],
                        Err(e) => {
                            server_error = Some(e);
                            vec![]
                        }
                    },
                    MessageTag::M3 => match server_session.relay_challenge(&m) {
                        Ok(()) => vec![Outbound::relay(s_ep, u_ep, d.event.bytes.clone())],
                        Err(e) => {
                            server_error = Some(e);
                            vec![]
                        }
                    },
                    MessageTag::M4 => match server_session.wrap(&m) {
                        Ok(m5) => vec![Outbound::send(s_ep, rc_ep, &m5)],
                        Err(e) => {
                            server_error = Some(e);
                            vec![]
                        }
                    },
                    MessageTag::M6 => match server_session.finalize(&m) {
                        Ok(sk) => {
                            server_sk = Some(sk);
                            vec![Outbound::relay(s_ep, u_ep, d.event.bytes.clone())]
                        }
                        Err(e) => {
                            server_error = Some(e);
                            vec![]
                        }
                    },
                    MessageTag::Reject => {
                        server_error = server_session.finalize(&m).err();
                        vec![Outbound::relay(s_ep, u_ep, d.event.bytes.clone())]
                    }
                    MessageTag::M2 | MessageTag::M5 => {
                        server_error = Some(ProtocolError::Unexpected { got: m.tag(), phase: "server" });
                        vec![]
                    }
                }
            } else if d.to == u_ep {
                let m = match msg {
                    Ok(m) => m,
                    Err(e) => {
                        user_error = Some(e);
                        return vec![];
                    }
                };
                match m.tag() {
                    MessageTag::M3 => match user_session.confirm(&m) {
                        Ok(m4) => vec![Outbound::send(u_ep, s_ep, &m4)],
                        Err(e) => {
                            user_error = Some(e);
                            vec![]
                        }
                    },
                    MessageTag::M6 => {
                        match user_session.finalize(&m) {
                            Ok(sk) => user_sk = Some(sk),
                            Err(e) => user_error = Some(e),
                        }
                        vec![]
                    }
                    MessageTag::Reject => {
                        user_session.rejected();
                        user_error = Some(ProtocolError::Rejected);
                        vec![]
                    }
                    other => {
                        user_error = Some(ProtocolError::Unexpected { got: other, phase: "user" });
                        vec![]
                    }
                }
            } else {
                vec![]
            }
        })?;

        let rc_outcome = self.rc.log()[log_before..].last().map(|e| e.outcome);
        let mut tallies = BTreeMap::new();
        tallies.insert(PartyLabel::User, user_session.ops());
        tallies.insert(PartyLabel::Server, server_session.ops());
        tallies.insert(PartyLabel::Rc, self.rc.ops() - rc_before);
        Ok(LoginRun {
            run,
            user: user.clone(),
            server: server.clone(),
            user_sk,
            server_sk,
            user_error,
            server_error,
            rc_outcome,
            events: first_event..self.net.trace().len(),
            tallies,
            user_k1: user_session.k_1().cloned(),
        })
    }

    pub fn transcript(&self, run: &LoginRun) -> Transcript {
        Transcript { events: self.net.trace()[run.events.clone()].to_vec(), tallies: run.tallies.clone() }
    }
}
