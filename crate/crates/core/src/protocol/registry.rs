//! The RC's credential store and its line-oriented file form:
//!
//! ```text
//! mslab-registry v1
//! variant TSAI
//! master <hex x>
//! user <hex ID_i> <hex R_i> <hex k_i | ->
//! server <hex SID_j> <hex V_j>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{derive_verifier, KiSecret, OpTally, ProtocolError, SchemeVariant, ServerId, UserId, Verifier};
use crate::crypto::{hash, xor_bytes, Digest, Rng, DIGEST_LEN};

const HEADER: &str = "mslab-registry v1";

/// What a user hands the RC over the secure registration channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationRequest {
    pub user: UserId,
    pub password: Vec<u8>,
    pub k_i: Option<KiSecret>,
}

impl RegistrationRequest {
    /// Field names and byte lengths as submitted.
    pub fn fields(&self) -> Vec<(&'static str, usize)> {
        let mut f = vec![("ID_i", self.user.as_bytes().len()), ("PW_i", self.password.len())];
        if let Some(k) = &self.k_i {
            f.push(("k_i", k.len()));
        }
        f
    }
}

/// Field names present in exactly one of the two requests.
pub fn registration_diff(a: &RegistrationRequest, b: &RegistrationRequest) -> Vec<&'static str> {
    let names = |r: &RegistrationRequest| r.fields().into_iter().map(|(n, _)| n).collect::<Vec<_>>();
    let (na, nb) = (names(a), names(b));
    na.iter()
        .filter(|n| !nb.contains(n))
        .chain(nb.iter().filter(|n| !na.contains(n)))
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub user: UserId,
    /// `V_i xor h(ID_i || x)`
    pub r_i: [u8; DIGEST_LEN],
    pub k_i: Option<KiSecret>,
}

#[derive(Debug, Clone)]
pub struct RcState {
    variant: SchemeVariant,
    x: [u8; 32],
    users: BTreeMap<UserId, UserRecord>,
    servers: BTreeMap<ServerId, Digest>,
    persist: Option<PathBuf>,
}

impl RcState {
    pub fn new(variant: SchemeVariant, x: [u8; 32]) -> Self {
        Self { variant, x, users: BTreeMap::new(), servers: BTreeMap::new(), persist: None }
    }

    pub fn generate(variant: SchemeVariant, rng: &mut Rng) -> Self {
        Self::new(variant, rng.random_bytes())
    }

    pub fn variant(&self) -> SchemeVariant {
        self.variant
    }

    /// From now on every mutation rewrites `path`.
    pub fn persist_to(&mut self, path: impl Into<PathBuf>) -> Result<(), ProtocolError> {
        self.persist = Some(path.into());
        self.flush()
    }

    fn flush(&self) -> Result<(), ProtocolError> {
        if let Some(path) = &self.persist {
            fs::write(path, self.to_text()).map_err(|e| ProtocolError::Registry(e.to_string()))?;
        }
        Ok(())
    }

    fn pad(&self, user: &UserId) -> Digest {
        let mut data = user.as_bytes().to_vec();
        data.extend_from_slice(&self.x);
        hash(b"h", &data)
    }

    pub fn register_user(&mut self, req: &RegistrationRequest) -> Result<(), ProtocolError> {
        if self.users.contains_key(&req.user) {
            return Err(ProtocolError::DuplicateUser(req.user.to_string()));
        }
        let v = derive_verifier(self.variant, &req.password, req.k_i.as_ref())?;
        let r_i: [u8; DIGEST_LEN] = xor_bytes(v.0.as_bytes(), self.pad(&req.user).as_bytes())
            .try_into()
            .expect("digest-length operands");
        self.users.insert(
            req.user.clone(),
            UserRecord { user: req.user.clone(), r_i, k_i: req.k_i },
        );
        self.flush()
    }

    /// Provisions a fresh random `V_j`.
    pub fn register_server(&mut self, server: &ServerId, rng: &mut Rng) -> Result<Digest, ProtocolError> {
        if self.servers.contains_key(server) {
            return Err(ProtocolError::DuplicateServer(server.to_string()));
        }
        let v_j = Digest(rng.random_bytes());
        self.servers.insert(server.clone(), v_j);
        self.flush()?;
        Ok(v_j)
    }

    pub fn lookup_verifier(&self, user: &UserId) -> Option<Verifier> {
        self.recover(user, &mut OpTally::default())
    }

    /// `V_i = R_i xor h(ID_i || x)`, counting the hash.
    pub(crate) fn recover(&self, user: &UserId, ops: &mut OpTally) -> Option<Verifier> {
        let record = self.users.get(user)?;
        ops.hashes += 1;
        let v = xor_bytes(&record.r_i, self.pad(user).as_bytes());
        Some(Verifier(Digest::from_slice(&v).expect("digest-length operands")))
    }

    pub fn server_key(&self, server: &ServerId) -> Option<Digest> {
        self.servers.get(server).copied()
    }

    pub fn user_record(&self, user: &UserId) -> Option<&UserRecord> {
        self.users.get(user)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.values()
    }

    pub fn server_ids(&self) -> impl Iterator<Item = &ServerId> {
        self.servers.keys()
    }

    /// Re-registration check: do these credentials reproduce the stored
    /// record? Under IMPROVED the stored `k_i` must also match.
    pub fn confirm_enrollment(
        &self,
        user: &UserId,
        password: &[u8],
        k_i: Option<&KiSecret>,
    ) -> Result<bool, ProtocolError> {
        let record = self
            .users
            .get(user)
            .ok_or_else(|| ProtocolError::UnknownUser(user.to_string()))?;
        if record.k_i.as_ref() != k_i {
            return Ok(false);
        }
        let v = derive_verifier(self.variant, password, k_i)?;
        Ok(Some(v) == self.lookup_verifier(user))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nvariant {}\nmaster {}\n", self.variant, hex::encode(self.x));
        for r in self.users.values() {
            let k = r.k_i.map(hex::encode).unwrap_or_else(|| "-".to_owned());
            out.push_str(&format!(
                "user {} {} {}\n",
                hex::encode(r.user.as_bytes()),
                hex::encode(r.r_i),
                k
            ));
        }
        for (sid, v) in &self.servers {
            out.push_str(&format!("server {} {}\n", hex::encode(sid.as_bytes()), v.to_hex()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProtocolError> {
        let bad = |n: usize, msg: &str| ProtocolError::Registry(format!("line {}: {msg}", n + 1));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            _ => return Err(bad(0, "missing header")),
        }
        let mut variant = None;
        let mut master = None;
        let mut users = BTreeMap::new();
        let mut servers = BTreeMap::new();
        for (n, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let hex32 = |s: &str| -> Result<[u8; 32], ProtocolError> {
                hex::decode(s)
                    .ok()
                    .and_then(|b| b.try_into().ok())
                    .ok_or_else(|| bad(n, "expected 32 hex-encoded bytes"))
            };
            let text_field = |s: &str| -> Result<String, ProtocolError> {
                hex::decode(s)
                    .ok()
                    .and_then(|b| String::from_utf8(b).ok())
                    .ok_or_else(|| bad(n, "identity is not hex-encoded UTF-8"))
            };
            match parts.as_slice() {
                ["variant", v] => {
                    variant = Some(v.parse::<SchemeVariant>().map_err(|e| bad(n, &e))?);
                }
                ["master", x] => master = Some(hex32(x)?),
                ["user", id, r, k] => {
                    let user = UserId::new(text_field(id)?)?;
                    let k_i = if *k == "-" { None } else { Some(hex32(k)?) };
                    let record = UserRecord { user: user.clone(), r_i: hex32(r)?, k_i };
                    if users.insert(user, record).is_some() {
                        return Err(bad(n, "duplicate user"));
                    }
                }
                ["server", id, v] => {
                    let sid = ServerId::new(text_field(id)?)?;
                    if servers.insert(sid, Digest(hex32(v)?)).is_some() {
                        return Err(bad(n, "duplicate server"));
                    }
                }
                _ => return Err(bad(n, "unrecognised record")),
            }
        }
        let variant = variant.ok_or_else(|| bad(0, "missing variant line"))?;
        let x = master.ok_or_else(|| bad(0, "missing master line"))?;
        for record in users.values() {
            if record.k_i.is_some() != (variant == SchemeVariant::Improved) {
                return Err(ProtocolError::VariantMismatch("k_i present iff IMPROVED"));
            }
        }
        Ok(Self { variant, x, users, servers, persist: None })
    }

    pub fn load(path: &Path) -> Result<Self, ProtocolError> {
        let text = fs::read_to_string(path).map_err(|e| ProtocolError::Registry(e.to_string()))?;
        let mut state = Self::from_text(&text)?;
        state.persist = Some(path.to_owned());
        Ok(state)
    }
}
