//! Equilibrium analysis for decentralized parallel multiple access channels.
//!
//! `K` transmitters share `S` orthogonal channels towards a single receiver that
//! uses single-user decoding. Each transmitter maximizes its own spectral
//! efficiency, either by splitting its power budget over all channels (the
//! power-allocation game, [`pa`]) or by putting its whole budget on one channel
//! (the channel-selection game, [`cs`]). Both games admit the exact potential
//! [`model::potential`], which every solver here leans on.
//!
//! - [`model`]: configuration, gains, profiles and the SINR / utility / potential / NSE evaluations.
//! - [`pa`]: water-filling best responses and the power-allocation equilibrium.
//! - [`cs`]: exhaustive equilibrium enumeration, the best-response graph and its sinks.
//! - [`two_by_two`]: closed-form classification of two-user two-channel instances.
//! - [`asymptotics`]: large-system user fractions per channel.
//! - [`sic`]: rates under successive interference cancellation.
//! - [`harness`]: seeded Monte-Carlo experiments.

pub mod asymptotics;
pub mod cs;
pub mod error;
pub mod harness;
pub mod model;
pub mod pa;
pub mod sic;
pub mod two_by_two;
mod waterfill;

pub use error::{Error, Result};
pub use model::{CsProfile, GainMatrix, GameConfig, Instance, NeEntry, NeReport, PowerProfile};
