//! Wegman–Carter authentication when the adversary holds partial knowledge of
//! the authentication key.
//!
//! The crate is organised around five pieces:
//!
//! * [`families`]: ε-almost strongly universal₂ hash families, exhaustive
//!   certification and key-length accounting.
//! * [`keyspace`]: the adversary's set of candidate keys and the operations she
//!   performs on it (elimination, constraint by an observed message–tag pair,
//!   certain-forgery detection, message-influence search).
//! * [`bounds`]: closed-form success probabilities, exact at small scale and in
//!   log₂-space at realistic key sizes.
//! * [`protocol`]: single authentication rounds and seeded Monte Carlo
//!   campaigns for the plain and the salted protocol.
//! * [`epsilon`]: the exact rational type used for ε everywhere.

pub mod bounds;
pub mod epsilon;
pub mod error;
pub mod families;
mod gf2;
pub mod keyspace;
pub mod protocol;

pub use bounds::{BoundParams, BoundReport, BreakTime, ChebyshevMode, Prob};
pub use epsilon::Epsilon;
pub use error::{Error, Result};
pub use families::{verify_asu2, wc_key_length, Asu2Certificate, FamilySpec, HashFamily};
pub use keyspace::KeySet;
pub use protocol::{
    monte_carlo, run_round, CampaignConfig, RoundOutcome, RoundTranscript, Strategy, SuccessStats,
    Variant,
};

/// Index of a key (equivalently, of a hash function) in a family.
pub type KeyIndex = u32;
/// A message, encoded as its index in the family's message set.
pub type Message = u64;
/// A tag, encoded as its index in the family's tag set.
pub type Tag = u32;
