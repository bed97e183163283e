//! Cryptanalysis toolkit for the ElGamal-based ballot encryption of a deployed
//! Internet voting system.
//!
//! * [`modmath`]: modular arithmetic kernel and safe-prime groups.
//! * [`elgamal`]: the original (three-level), modified and final schemes.
//! * [`dlp`]: private-key recovery by discrete logarithms.
//! * [`qrattack`]: the quadratic-residuosity distinguisher and ballot decoder.
//! * [`audit`]: key-file parsing and parameter auditing.
//! * [`harness`]: election simulation, ballot ledger, attack scenarios and
//!   reproduction of the published data.

pub mod audit;
pub mod dlp;
pub mod elgamal;
pub mod error;
pub mod exec;
pub mod harness;
pub mod modmath;
pub mod qrattack;
pub mod rng;

pub use error::{Error, Result};
