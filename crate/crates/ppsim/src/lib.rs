//! Simulator and analytic toolkit for eavesdropping attacks on the
//! ping-pong protocol.
//!
//! The crate is organised around a small dense state-vector simulator
//! ([`qsim`]), a lossy/noisy channel layer ([`channel`]), the protocol
//! state machine itself ([`protocol`]), attack strategies ([`adversary`]),
//! closed-form predictions ([`analytics`]) and an experiment harness
//! ([`harness`]) that ties everything together behind the `ppsim` binary.

pub mod adversary;
pub mod analytics;
pub mod channel;
pub mod cli;
pub mod harness;
pub mod protocol;
pub mod qsim;
