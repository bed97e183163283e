//! Election simulation, ballot ledger, attack scenarios and the bundled
//! published data.

pub mod election;
pub mod fixtures;
pub mod ledger;
pub mod scenarios;

pub use election::{run_election, Candidate, Election, PublicElection, SealedTally};
pub use ledger::{Ballot, BallotLedger, BallotRecord, LedgerWriter};
pub use scenarios::{attack1_scenario, attack2_scenario, reproduce_appendix_b, reproduce_appendix_c};
