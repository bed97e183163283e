//! End-to-end attack scenarios and reproduction of the published data.
//!
//! Every attack runs in two steps. The `*_on_ledger` function sees only the
//! [`PublicElection`] and the ledger and produces a recovered tally; the
//! scenario then opens the [`SealedTally`](super::election::SealedTally) and
//! compares.

use std::fmt::Write as _;
use std::time::Instant;

use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::dlp::{recover_multi_keys_with, DlpOptions, MAX_ATTACK_BITS};
use crate::elgamal::{multi_decrypt, Version};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modmath::{is_probable_prime, mod_pow, GeneratorOrder, GroupParams, Nat, DEFAULT_MR_ROUNDS};
use crate::qrattack::{classify_ballots, two_candidate_decode_with, DeputyId, QrClass};

use super::election::{run_election_with, synthetic_candidates, Candidate, Election, PublicElection, PublicGroup};
use super::fixtures::{PublishedCiphertexts, TestElection};
use super::ledger::BallotLedger;

/// Settings for the key-recovery scenario.
#[derive(Debug, Clone)]
pub struct Attack1Config {
    pub bits: u64,
    pub voters: usize,
    pub candidates: usize,
    /// Concurrent key searches (at most 3 are useful).
    pub workers: usize,
    /// Vote shares per candidate; uniform when `None`.
    pub weights: Option<Vec<f64>>,
    pub dlp: DlpOptions,
}

impl Default for Attack1Config {
    fn default() -> Self {
        Attack1Config {
            bits: 40,
            voters: 200,
            candidates: 3,
            workers: 3,
            weights: None,
            dlp: DlpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KeyRecovery {
    pub level: usize,
    pub seconds: f64,
    /// Recovered secret in decimal, or `None` if the search failed.
    pub secret: Option<String>,
    pub error: Option<String>,
}

/// What the attacker learns from public data alone.
#[derive(Debug, Clone, Serialize)]
pub struct Attack1Recovery {
    pub keys: Vec<KeyRecovery>,
    /// Candidate index per ballot; `None` for ballots that decrypt to no
    /// candidate or fail to decrypt.
    pub decoded: Vec<Option<usize>>,
    pub counts: Vec<usize>,
    /// Ledger indices of ballots that could not be attributed.
    pub flagged: Vec<u64>,
}

impl Attack1Recovery {
    pub fn keys_recovered(&self) -> bool {
        self.keys.iter().all(|k| k.secret.is_some())
    }
}

/// Recovers the three secret keys from the public keys, then decrypts every
/// ballot.
pub fn attack1_on_ledger(
    public: &PublicElection,
    ledger: &BallotLedger,
    workers: usize,
    opts: &DlpOptions,
    exec: Exec,
) -> Result<Attack1Recovery> {
    let PublicGroup::Multi { params, pks } = &public.group else {
        return Err(Error::Inapplicable(
            "key recovery targets the three-level original version".into(),
        ));
    };
    if let Some(big) = params.levels().iter().find(|l| l.bits() > MAX_ATTACK_BITS) {
        return Err(Error::Unsupported(format!(
            "{}-bit modulus is above the {MAX_ATTACK_BITS}-bit ceiling of the generic solvers",
            big.bits()
        )));
    }
    let levels = recover_multi_keys_with(params, pks, workers, opts, exec);
    let keys: Vec<KeyRecovery> = levels
        .iter()
        .map(|l| KeyRecovery {
            level: l.level,
            seconds: l.elapsed.as_secs_f64(),
            secret: l.result.as_ref().ok().map(|x| x.to_string()),
            error: l.result.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let mut recovery = Attack1Recovery {
        keys,
        decoded: Vec::new(),
        counts: vec![0; public.candidates.len()],
        flagged: Vec::new(),
    };
    if !recovery.keys_recovered() {
        return Ok(recovery);
    }
    let sks: [Nat; 3] = std::array::from_fn(|i| levels[i].result.as_ref().expect("recovered").clone());

    recovery.decoded = exec.map(ledger.records(), |r| {
        let ct = r.ballot.as_multi()?;
        let m = multi_decrypt(params, &sks, &ct).ok()?;
        public.candidate_of(&m)
    });
    for (r, d) in ledger.records().iter().zip(&recovery.decoded) {
        match d {
            Some(c) => recovery.counts[*c] += 1,
            None => recovery.flagged.push(r.index),
        }
    }
    Ok(recovery)
}

#[derive(Debug, Clone, Serialize)]
pub struct Attack1Report {
    pub bits: u64,
    pub voters: usize,
    pub moduli: Vec<String>,
    pub recovery: Attack1Recovery,
    pub truth_counts: Vec<usize>,
    /// Every ballot attributed to the candidate it was cast for.
    pub exact: bool,
    pub seconds: f64,
}

impl Attack1Report {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "key recovery on a {}-bit three-level election, {} ballots", self.bits, self.voters);
        for (k, p) in self.recovery.keys.iter().zip(&self.moduli) {
            match (&k.secret, &k.error) {
                (Some(x), _) => {
                    let _ = writeln!(s, "  level {} p={p}: sk={x} in {:.3}s", k.level + 1, k.seconds);
                }
                (None, e) => {
                    let _ = writeln!(s, "  level {} p={p}: FAILED ({})", k.level + 1, e.as_deref().unwrap_or("?"));
                }
            }
        }
        let _ = writeln!(s, "recovered tally: {:?}", self.recovery.counts);
        let _ = writeln!(s, "ground truth:    {:?}", self.truth_counts);
        if !self.recovery.flagged.is_empty() {
            let _ = writeln!(s, "flagged ballots: {:?}", self.recovery.flagged);
        }
        let _ = writeln!(s, "exact match: {}", self.exact);
        s
    }
}

/// Builds an original-version election, casts ballots, breaks it.
pub fn attack1_scenario<R: Rng + ?Sized>(cfg: &Attack1Config, rng: &mut R) -> Result<Attack1Report> {
    attack1_scenario_with(cfg, rng, Exec::default())
}

pub fn attack1_scenario_with<R: Rng + ?Sized>(cfg: &Attack1Config, rng: &mut R, exec: Exec) -> Result<Attack1Report> {
    if cfg.bits > MAX_ATTACK_BITS {
        return Err(Error::param(format!(
            "--bits {} is above the {MAX_ATTACK_BITS}-bit ceiling of the generic solvers",
            cfg.bits
        )));
    }
    let start = Instant::now();
    let params = super::election::generate_chain(cfg.bits, rng)?;
    let max_id = (params.level(0).p() - 1u8).to_u32().unwrap_or(u32::MAX);
    let candidates = synthetic_candidates(cfg.candidates, max_id, rng);
    let keys = crate::elgamal::MultiKeySet::generate(&params, rng);
    let moduli = params.levels().iter().map(|l| l.p().to_string()).collect();
    let election = Election::new(
        candidates,
        Version::Original,
        super::election::Scheme::Multi { params, keys },
    )?;
    let weights = cfg
        .weights
        .clone()
        .unwrap_or_else(|| vec![1.0 / cfg.candidates as f64; cfg.candidates]);
    let (ledger, sealed) = run_election_with(&election, cfg.voters, &weights, rng, exec)?;

    let recovery = attack1_on_ledger(&election.public(), &ledger, cfg.workers, &cfg.dlp, exec)?;

    let truth = sealed.open();
    let exact = recovery.keys_recovered()
        && recovery.decoded.len() == truth.choices.len()
        && recovery.decoded.iter().zip(&truth.choices).all(|(d, t)| *d == Some(*t));
    Ok(Attack1Report {
        bits: cfg.bits,
        voters: cfg.voters,
        moduli,
        recovery,
        truth_counts: truth.counts,
        exact,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Settings for the residuosity decode scenario.
#[derive(Debug, Clone)]
pub struct Attack2Config {
    pub voters: usize,
    pub version: Version,
    pub ids: [DeputyId; 2],
    pub params: GroupParams,
    pub weights: [f64; 2],
}

impl Attack2Config {
    /// The published test-election modulus and ids.
    pub fn published(voters: usize) -> Result<Self> {
        let te = TestElection::bundled()?;
        Ok(Attack2Config {
            voters,
            version: Version::Modified,
            ids: te.ids,
            params: GroupParams::from_safe_prime(te.p, GeneratorOrder::QrSubgroup)?,
            weights: [0.5, 0.5],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Attack2Recovery {
    pub ids: [DeputyId; 2],
    pub classes: [QrClass; 2],
    pub decisions: Vec<usize>,
    /// Running tally after each ballot.
    pub prefix_tallies: Vec<[usize; 2]>,
    pub counts: [usize; 2],
}

/// Reads every vote from the ciphertexts alone.
pub fn attack2_on_ledger(public: &PublicElection, ledger: &BallotLedger, exec: Exec) -> Result<Attack2Recovery> {
    let PublicGroup::Single { params, .. } = &public.group else {
        return Err(Error::Inapplicable(
            "the residuosity decode needs a single-level subgroup election".into(),
        ));
    };
    let [a, b] = &public.candidates[..] else {
        return Err(Error::Inapplicable(format!(
            "the decode separates two candidates, the election has {}",
            public.candidates.len()
        )));
    };
    let cts = ledger
        .single_ciphertexts()
        .ok_or_else(|| Error::Inapplicable("ledger holds multilevel ballots".into()))?;
    if public.version == Version::Final {
        let classes = classify_ballots(&cts, params, exec)?;
        let residues = classes.iter().filter(|c| **c == QrClass::Residue).count();
        return Err(Error::Inapplicable(format!(
            "{residues} of {} ballots are residues under the squared encoding; their class carries no vote",
            classes.len()
        )));
    }
    let dec = two_candidate_decode_with(&cts, a.id, b.id, params, exec)?;
    let mut tally = [0usize; 2];
    let prefix_tallies = dec
        .decisions
        .iter()
        .map(|&d| {
            tally[d] += 1;
            tally
        })
        .collect();
    Ok(Attack2Recovery {
        ids: dec.ids,
        classes: [QrClass::of(&a.id.to_nat(), params.p())?, QrClass::of(&b.id.to_nat(), params.p())?],
        decisions: dec.decisions,
        prefix_tallies,
        counts: dec.counts,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Attack2Report {
    pub voters: usize,
    pub bits: u64,
    pub recovery: Attack2Recovery,
    pub truth_counts: Vec<usize>,
    pub mismatches: Vec<u64>,
    pub exact: bool,
    pub seconds: f64,
}

impl Attack2Report {
    pub fn render_text(&self) -> String {
        let r = &self.recovery;
        let mut s = String::new();
        let _ = writeln!(s, "residuosity decode, {}-bit modulus, {} ballots, no secret key", self.bits, self.voters);
        for i in 0..2 {
            let _ = writeln!(s, "  candidate {} id {} is a {}", i + 1, r.ids[i], r.classes[i]);
        }
        let _ = writeln!(s, "decoded tally: {:?}", r.counts);
        let _ = writeln!(s, "ground truth:  {:?}", self.truth_counts);
        let _ = writeln!(s, "per-ballot mismatches: {}", self.mismatches.len());
        let _ = writeln!(s, "exact match: {}", self.exact);
        s
    }
}

pub fn attack2_scenario<R: Rng + ?Sized>(cfg: &Attack2Config, rng: &mut R) -> Result<Attack2Report> {
    attack2_scenario_with(cfg, rng, Exec::default())
}

pub fn attack2_scenario_with<R: Rng + ?Sized>(cfg: &Attack2Config, rng: &mut R, exec: Exec) -> Result<Attack2Report> {
    let start = Instant::now();
    let candidates = vec![
        Candidate {
            name: "candidate-1".into(),
            id: cfg.ids[0],
        },
        Candidate {
            name: "candidate-2".into(),
            id: cfg.ids[1],
        },
    ];
    let election = Election::over(cfg.version, cfg.params.clone(), candidates, rng)?;
    let (ledger, sealed) = run_election_with(&election, cfg.voters, &cfg.weights, rng, exec)?;

    let recovery = attack2_on_ledger(&election.public(), &ledger, exec)?;

    let truth = sealed.open();
    let mismatches: Vec<u64> = ledger
        .records()
        .iter()
        .zip(recovery.decisions.iter().zip(&truth.choices))
        .filter(|(_, (d, t))| d != t)
        .map(|(r, _)| r.index)
        .collect();
    let exact = mismatches.is_empty() && recovery.counts[..] == truth.counts[..];
    Ok(Attack2Report {
        voters: cfg.voters,
        bits: cfg.params.bits(),
        recovery,
        truth_counts: truth.counts,
        mismatches,
        exact,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifiedValue {
    pub value: String,
    pub class: QrClass,
    /// `value^q mod p == 1` agrees with the Jacobi symbol.
    pub euler_agrees: bool,
}

fn classify_checked(x: &Nat, p: &Nat, q: &Nat) -> Result<ClassifiedValue> {
    let class = QrClass::of(x, p)?;
    let euler_residue = mod_pow(x, q, p)?.is_one();
    Ok(ClassifiedValue {
        value: x.to_string(),
        class,
        euler_agrees: euler_residue == (class == QrClass::Residue),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixBReport {
    pub bits: u64,
    pub safe_prime: bool,
    pub values: Vec<ClassifiedValue>,
    pub residues: usize,
    pub non_residues: usize,
    pub pass: bool,
}

impl AppendixBReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "published ciphertexts under a {}-bit modulus (safe prime: {})", self.bits, self.safe_prime);
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(
                s,
                "  b{:<2} {:<11} euler check {}",
                i + 1,
                v.class.to_string(),
                if v.euler_agrees { "agrees" } else { "DISAGREES" }
            );
        }
        let _ = writeln!(s, "residues: {} of {}", self.residues, self.values.len());
        let _ = writeln!(s, "result: {}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

/// Classifies the ten published `b` values; five must be residues.
pub fn reproduce_appendix_b() -> Result<AppendixBReport> {
    reproduce_published_ciphertexts(&PublishedCiphertexts::bundled()?)
}

pub fn reproduce_published_ciphertexts(data: &PublishedCiphertexts) -> Result<AppendixBReport> {
    let p = &data.p;
    let q: Nat = (p - 1u8) >> 1;
    let safe_prime = is_probable_prime(p, DEFAULT_MR_ROUNDS) && is_probable_prime(&q, DEFAULT_MR_ROUNDS);
    let values = data
        .b
        .iter()
        .map(|b| classify_checked(b, p, &q))
        .collect::<Result<Vec<_>>>()?;
    let residues = values.iter().filter(|v| v.class == QrClass::Residue).count();
    let pass = safe_prime && residues == 5 && values.len() == 10 && values.iter().all(|v| v.euler_agrees);
    Ok(AppendixBReport {
        bits: p.bits(),
        safe_prime,
        non_residues: values.len() - residues,
        residues,
        values,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixCReport {
    pub bits: u64,
    pub ids: [ClassifiedValue; 2],
    pub distinct: bool,
    pub demo: Attack2Report,
    pub pass: bool,
}

impl AppendixCReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "test-election ids under a {}-bit modulus", self.bits);
        for v in &self.ids {
            let _ = writeln!(
                s,
                "  id {:<10} {:<11} euler check {}",
                v.value,
                v.class.to_string(),
                if v.euler_agrees { "agrees" } else { "DISAGREES" }
            );
        }
        let _ = writeln!(s, "classes distinct: {}", self.distinct);
        let _ = writeln!(
            s,
            "simulated decode of {} ballots: {} mismatches",
            self.demo.voters,
            self.demo.mismatches.len()
        );
        let _ = writeln!(s, "result: {}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

/// Classifies the two published deputy ids and decodes a simulated
/// 100-ballot election that uses them.
pub fn reproduce_appendix_c(seed: u64) -> Result<AppendixCReport> {
    let te = TestElection::bundled()?;
    let q: Nat = (&te.p - 1u8) >> 1;
    let ids = [
        classify_checked(&te.ids[0].to_nat(), &te.p, &q)?,
        classify_checked(&te.ids[1].to_nat(), &te.p, &q)?,
    ];
    let distinct = ids[0].class != ids[1].class;
    let demo = attack2_scenario(&Attack2Config::published(100)?, &mut crate::rng::seeded(seed))?;
    let pass = distinct && ids.iter().all(|v| v.euler_agrees) && demo.exact;
    Ok(AppendixCReport {
        bits: te.p.bits(),
        ids,
        distinct,
        demo,
        pass,
    })
}
