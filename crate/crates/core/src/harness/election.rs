//! Simulated elections. The authority's secrets and the voters' choices stay
//! inside [`Election`] and [`SealedTally`]; attacks only receive the
//! [`PublicElection`] view and the ledger.

use num_traits::ToPrimitive;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::audit::{group_params_of, KeyFileV1};
use crate::elgamal::{
    decode_qr, decrypt, encode_qr, encrypt, keygen, multi_decrypt, multi_encrypt, KeyPair, MultiKeySet,
    MultiParams, Version,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modmath::{gen_safe_prime, GeneratorOrder, GroupParams, Nat};
use crate::qrattack::DeputyId;
use crate::rng;

use super::ledger::{Ballot, BallotLedger};

/// 2019-09-08 05:00:00 UTC, polls opening in Moscow.
pub const POLLS_OPEN: u64 = 1_567_918_800;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub name: String,
    pub id: DeputyId,
}

/// Group parameters and key material.
#[derive(Debug, Clone)]
pub enum Scheme {
    Single { params: GroupParams, keys: KeyPair },
    Multi { params: MultiParams, keys: MultiKeySet },
}

/// What everyone can see: parameters, public keys, candidate list.
#[derive(Debug, Clone)]
pub enum PublicGroup {
    Single { params: GroupParams, pk: Nat },
    Multi { params: MultiParams, pks: [Nat; 3] },
}

#[derive(Debug, Clone)]
pub struct PublicElection {
    pub version: Version,
    pub candidates: Vec<Candidate>,
    pub group: PublicGroup,
}

impl PublicElection {
    /// Rebuilds the public view from a key file: three levels for the
    /// original version, one otherwise.
    pub fn from_keyfile(kf: &KeyFileV1, version: Version, candidates: Vec<Candidate>) -> Result<Self> {
        let level = |i: usize| {
            group_params_of(&kf.modulos[i], &kf.generators[i]).ok_or_else(|| {
                Error::param(format!("level {i}: not a safe prime with a generator of order q or 2q"))
            })
        };
        let group = match (kf.levels(), version) {
            (3, Version::Original) => PublicGroup::Multi {
                params: MultiParams::new([level(0)?, level(1)?, level(2)?])?,
                pks: [kf.public_keys[0].clone(), kf.public_keys[1].clone(), kf.public_keys[2].clone()],
            },
            (1, Version::Modified | Version::Final) => PublicGroup::Single {
                params: level(0)?,
                pk: kf.public_keys[0].clone(),
            },
            (n, v) => return Err(Error::param(format!("a {n}-level key file does not fit the {v} version"))),
        };
        Ok(PublicElection {
            version,
            candidates,
            group,
        })
    }

    pub fn keyfile(&self) -> KeyFileV1 {
        let levels: Vec<(&GroupParams, &Nat)> = match &self.group {
            PublicGroup::Single { params, pk } => vec![(params, pk)],
            PublicGroup::Multi { params, pks } => params.levels().iter().zip(pks.iter()).collect(),
        };
        KeyFileV1 {
            modulos: levels.iter().map(|(gp, _)| gp.p().clone()).collect(),
            generators: levels.iter().map(|(gp, _)| gp.g().clone()).collect(),
            public_keys: levels.iter().map(|(_, pk)| (*pk).clone()).collect(),
        }
    }

    /// Candidate index whose deputy id equals `m`.
    pub fn candidate_of(&self, m: &Nat) -> Option<usize> {
        let m = m.to_u32()?;
        self.candidates.iter().position(|c| c.id.0 == m)
    }
}

#[derive(Debug, Clone)]
pub struct Election {
    candidates: Vec<Candidate>,
    version: Version,
    scheme: Scheme,
}

impl Election {
    pub fn new(candidates: Vec<Candidate>, version: Version, scheme: Scheme) -> Result<Self> {
        if candidates.len() < 2 {
            return Err(Error::param("an election needs at least two candidates"));
        }
        for (i, c) in candidates.iter().enumerate() {
            if candidates[..i].iter().any(|o| o.id == c.id) {
                return Err(Error::param(format!("deputy id {} is used twice", c.id)));
            }
        }
        let max_message = match (&scheme, version) {
            (Scheme::Multi { params, .. }, Version::Original) => params.level(0).p() - 1u8,
            (Scheme::Single { params, .. }, Version::Modified) => params.p() - 1u8,
            (Scheme::Single { params, .. }, Version::Final) => (params.p() - 1u8) >> 1,
            _ => {
                return Err(Error::param(format!(
                    "the {version} version does not use this key layout"
                )))
            }
        };
        for c in &candidates {
            if c.id.0 == 0 || c.id.to_nat() > max_message {
                return Err(Error::param(format!("deputy id {} is outside the message space", c.id)));
            }
        }
        Ok(Election {
            candidates,
            version,
            scheme,
        })
    }

    /// Fresh parameters and keys for `version` at `bits`-bit moduli.
    pub fn generate<R: Rng + ?Sized>(
        version: Version,
        bits: u64,
        candidates: Vec<Candidate>,
        rng: &mut R,
    ) -> Result<Self> {
        let scheme = match version {
            Version::Original => {
                let params = generate_chain(bits, rng)?;
                let keys = MultiKeySet::generate(&params, rng);
                Scheme::Multi { params, keys }
            }
            Version::Modified | Version::Final => {
                let params = gen_safe_prime(bits, GeneratorOrder::QrSubgroup, rng)?;
                let keys = keygen(&params, rng);
                Scheme::Single { params, keys }
            }
        };
        Election::new(candidates, version, scheme)
    }

    /// Single-level election over given parameters with a fresh key.
    pub fn over<R: Rng + ?Sized>(
        version: Version,
        params: GroupParams,
        candidates: Vec<Candidate>,
        rng: &mut R,
    ) -> Result<Self> {
        let keys = keygen(&params, rng);
        Election::new(candidates, version, Scheme::Single { params, keys })
    }

    pub fn version(&self) -> Version {
        self.version
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// Secret keys, one per level.
    pub fn secret_keys(&self) -> Vec<Nat> {
        match &self.scheme {
            Scheme::Single { keys, .. } => vec![keys.sk.clone()],
            Scheme::Multi { keys, .. } => keys.secret_keys().to_vec(),
        }
    }

    pub fn public(&self) -> PublicElection {
        let group = match &self.scheme {
            Scheme::Single { params, keys } => PublicGroup::Single {
                params: params.clone(),
                pk: keys.pk.clone(),
            },
            Scheme::Multi { params, keys } => PublicGroup::Multi {
                params: params.clone(),
                pks: keys.public_keys(),
            },
        };
        PublicElection {
            version: self.version,
            candidates: self.candidates.clone(),
            group,
        }
    }

    /// Encrypts a vote for candidate `choice`. The ballot is the encrypted
    /// deputy id and nothing else.
    pub fn encrypt_vote<R: Rng + ?Sized>(&self, choice: usize, rng: &mut R) -> Result<Ballot> {
        let id = self
            .candidates
            .get(choice)
            .ok_or_else(|| Error::param(format!("no candidate {choice}")))?
            .id
            .to_nat();
        Ok(match &self.scheme {
            Scheme::Multi { params, keys } => multi_encrypt(params, &keys.public_keys(), &id, rng)?.into(),
            Scheme::Single { params, keys } => {
                let m = match self.version {
                    Version::Final => encode_qr(&id, params.p())?,
                    _ => id,
                };
                encrypt(params, &keys.pk, &m, rng)?.into()
            }
        })
    }

    /// Decryption with the authority's secret keys.
    pub fn authority_decrypt(&self, ballot: &Ballot) -> Result<Nat> {
        match (&self.scheme, ballot) {
            (Scheme::Multi { params, keys }, Ballot::Multi { .. }) => {
                multi_decrypt(params, &keys.secret_keys(), &ballot.as_multi().expect("multi"))
            }
            (Scheme::Single { params, keys }, Ballot::Single { .. }) => {
                let m = decrypt(params, &keys.sk, &ballot.as_single().expect("single"))?;
                match self.version {
                    Version::Final => decode_qr(&m, params.p()),
                    _ => Ok(m),
                }
            }
            _ => Err(Error::param("ballot layout does not match the election")),
        }
    }
}

/// Three distinct `bits`-bit safe primes with full-group generators, sorted.
pub fn generate_chain<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<MultiParams> {
    let mut levels: Vec<GroupParams> = Vec::with_capacity(3);
    while levels.len() < 3 {
        let gp = gen_safe_prime(bits, GeneratorOrder::FullGroup, rng)?;
        if levels.iter().all(|l| l.p() != gp.p()) {
            levels.push(gp);
        }
    }
    levels.sort_by(|a, b| a.p().cmp(b.p()));
    let [a, b, c]: [GroupParams; 3] = levels.try_into().expect("three levels");
    MultiParams::new([a, b, c])
}

/// `count` candidates with distinct random deputy ids in `[1, max_id]`.
pub fn synthetic_candidates<R: Rng + ?Sized>(count: usize, max_id: u32, rng: &mut R) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::with_capacity(count);
    while out.len() < count {
        let id = DeputyId(rng.gen_range(1..=max_id));
        if out.iter().all(|c| c.id != id) {
            out.push(Candidate {
                name: format!("candidate-{}", out.len() + 1),
                id,
            });
        }
    }
    out
}

/// Ground truth of who voted for whom, kept apart from the ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedTally {
    choices: Vec<usize>,
    candidates: usize,
}

/// Unsealed ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundTruth {
    /// Candidate index per ledger index.
    pub choices: Vec<usize>,
    pub counts: Vec<usize>,
}

impl SealedTally {
    /// Opens the seal. Only verification code should do this, and only after
    /// an attack has produced its output.
    pub fn open(&self) -> GroundTruth {
        let mut counts = vec![0; self.candidates];
        for &c in &self.choices {
            counts[c] += 1;
        }
        GroundTruth {
            choices: self.choices.clone(),
            counts,
        }
    }
}

/// Casts `n_voters` ballots, choices drawn from `weights` (one per candidate,
/// summing to 1).
pub fn run_election<R: Rng + ?Sized>(
    election: &Election,
    n_voters: usize,
    weights: &[f64],
    rng: &mut R,
) -> Result<(BallotLedger, SealedTally)> {
    run_election_with(election, n_voters, weights, rng, Exec::default())
}

pub fn run_election_with<R: Rng + ?Sized>(
    election: &Election,
    n_voters: usize,
    weights: &[f64],
    rng: &mut R,
    exec: Exec,
) -> Result<(BallotLedger, SealedTally)> {
    if weights.len() != election.candidates.len() {
        return Err(Error::param(format!(
            "{} weights for {} candidates",
            weights.len(),
            election.candidates.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::param("weights must be non-negative and sum to 1"));
    }
    let dist = WeightedIndex::new(weights).map_err(|e| Error::param(e.to_string()))?;
    let choices: Vec<usize> = (0..n_voters).map(|_| dist.sample(rng)).collect();
    let base = rng.next_u64();

    let ballots = exec.map_range(n_voters as u64, |i| {
        election.encrypt_vote(choices[i as usize], &mut rng::child(base, i))
    });

    let mut ledger = BallotLedger::new();
    let mut clock = POLLS_OPEN;
    for ballot in ballots {
        clock += rng.gen_range(1..=120);
        ledger.append(ballot?, clock);
    }
    Ok((
        ledger,
        SealedTally {
            choices,
            candidates: election.candidates.len(),
        },
    ))
}
