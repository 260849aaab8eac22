pub mod adversary;
pub mod crypto;
pub mod deployment;
pub mod protocol;
pub mod scenario;
pub mod simnet;
