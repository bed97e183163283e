//! Quadratic-residuosity leak of the modified scheme.
//!
//! With `g` and `pk` in the residue subgroup, `b = pk^r * m` is a residue
//! exactly when `m` is, for every `r`. One Legendre symbol on the public
//! ciphertext therefore reveals the residuosity class of the plaintext.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::elgamal::{encode_qr, encrypt, keygen, Ciphertext, Version};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modmath::{jacobi, GeneratorOrder, GroupParams, Nat};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QrClass {
    Residue,
    NonResidue,
}

impl QrClass {
    /// Class of `x` modulo the odd prime `p`; zero has no class.
    pub fn of(x: &Nat, p: &Nat) -> Result<Self> {
        match jacobi(x, p)? {
            1 => Ok(QrClass::Residue),
            -1 => Ok(QrClass::NonResidue),
            _ => Err(Error::param(format!("{x} is divisible by {p}"))),
        }
    }
}

impl fmt::Display for QrClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QrClass::Residue => "residue",
            QrClass::NonResidue => "non-residue",
        })
    }
}

/// The 32-bit candidate identifier that forms the whole ballot plaintext.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DeputyId(pub u32);

impl DeputyId {
    pub fn to_nat(self) -> Nat {
        Nat::from(self.0)
    }
}

impl fmt::Display for DeputyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for DeputyId {
    fn from(x: u32) -> Self {
        DeputyId(x)
    }
}

fn require_qr_subgroup(params: &GroupParams) -> Result<()> {
    if params.generator_order() != GeneratorOrder::QrSubgroup {
        return Err(Error::Inapplicable(
            "with a full-group generator the ciphertext class mixes pk^r and m".into(),
        ));
    }
    Ok(())
}

/// Residuosity class of the plaintext behind `ct`, read from `ct.b` alone.
pub fn plaintext_class(ct: &Ciphertext, params: &GroupParams) -> Result<QrClass> {
    require_qr_subgroup(params)?;
    QrClass::of(&ct.b, params.p())
}

/// [`plaintext_class`] over a batch of ciphertexts.
pub fn classify_ballots(cts: &[Ciphertext], params: &GroupParams, exec: Exec) -> Result<Vec<QrClass>> {
    require_qr_subgroup(params)?;
    exec.map(cts, |ct| QrClass::of(&ct.b, params.p()))
        .into_iter()
        .collect()
}

/// Result of the indistinguishability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameOutcome {
    pub trials: u64,
    pub wins: u64,
    /// `|2 * wins / trials - 1|`, zero when no trial ran.
    pub advantage: f64,
}

/// Left-or-right game: the challenger encrypts one of a residue and a
/// non-residue, the adversary guesses from the Legendre symbol of `b`.
///
/// `encoding` selects how messages are fed to the scheme: `Modified` encrypts
/// them as is, `Final` squares them first.
pub fn distinguisher_game<R: Rng + ?Sized>(
    params: &GroupParams,
    encoding: Version,
    trials: u64,
    rng: &mut R,
) -> Result<GameOutcome> {
    distinguisher_game_with(params, encoding, trials, rng, Exec::default())
}

pub fn distinguisher_game_with<R: Rng + ?Sized>(
    params: &GroupParams,
    encoding: Version,
    trials: u64,
    rng: &mut R,
    exec: Exec,
) -> Result<GameOutcome> {
    require_qr_subgroup(params)?;
    let p = params.p();
    let message_bound = match encoding {
        Version::Modified => p - 1u8,
        Version::Final => (p - 1u8) >> 1,
        Version::Original => {
            return Err(Error::param("the distinguisher game models the single-level versions"))
        }
    };
    if trials == 0 {
        return Ok(GameOutcome {
            trials: 0,
            wins: 0,
            advantage: 0.0,
        });
    }
    let keys = keygen(params, rng);
    let base = rng.next_u64();

    let outcomes = exec.map_range(trials, |i| -> Result<bool> {
        let mut trial_rng = rng::child(base, i);
        let m0 = sample_class(&mut trial_rng, &message_bound, p, QrClass::Residue)?;
        let m1 = sample_class(&mut trial_rng, &message_bound, p, QrClass::NonResidue)?;
        let bit = trial_rng.gen_bool(0.5);
        let m = if bit { m1 } else { m0 };
        let plaintext = match encoding {
            Version::Final => encode_qr(&m, p)?,
            _ => m,
        };
        let ct = encrypt(params, &keys.pk, &plaintext, &mut trial_rng)?;
        let guess = plaintext_class(&ct, params)? == QrClass::NonResidue;
        Ok(guess == bit)
    });
    let mut wins = 0u64;
    for o in outcomes {
        wins += o? as u64;
    }
    let rate = wins as f64 / trials as f64;
    Ok(GameOutcome {
        trials,
        wins,
        advantage: (2.0 * rate - 1.0).abs(),
    })
}

/// Uniform message in `[1, bound]` of the requested class.
fn sample_class<R: Rng + ?Sized>(rng: &mut R, bound: &Nat, p: &Nat, class: QrClass) -> Result<Nat> {
    for _ in 0..10_000 {
        let m = rng::below(rng, bound) + 1u8;
        if QrClass::of(&m, p)? == class {
            return Ok(m);
        }
    }
    Err(Error::param(format!("no {class} found below {bound}")))
}

/// Residuosity class of each deputy id, lifted into `F_p`.
pub fn classify_ids(ids: &[DeputyId], p: &Nat) -> Result<BTreeMap<DeputyId, QrClass>> {
    ids.iter()
        .map(|&id| QrClass::of(&id.to_nat(), p).map(|c| (id, c)))
        .collect()
}

/// Per-ballot decisions and totals of a two-candidate decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCandidateDecode {
    pub ids: [DeputyId; 2],
    /// Index (0 or 1) of the decoded candidate for each ballot, in order.
    pub decisions: Vec<usize>,
    pub counts: [usize; 2],
}

/// Attributes every ballot to the candidate whose id shares its class.
///
/// Exact whenever all votes go to one of the two candidates.
pub fn two_candidate_decode(
    ballots: &[Ciphertext],
    id_a: DeputyId,
    id_b: DeputyId,
    params: &GroupParams,
) -> Result<TwoCandidateDecode> {
    two_candidate_decode_with(ballots, id_a, id_b, params, Exec::default())
}

pub fn two_candidate_decode_with(
    ballots: &[Ciphertext],
    id_a: DeputyId,
    id_b: DeputyId,
    params: &GroupParams,
    exec: Exec,
) -> Result<TwoCandidateDecode> {
    require_qr_subgroup(params)?;
    let class_a = QrClass::of(&id_a.to_nat(), params.p())?;
    let class_b = QrClass::of(&id_b.to_nat(), params.p())?;
    if class_a == class_b {
        return Err(Error::Ambiguous(format!(
            "ids {id_a} and {id_b} are both {class_a}s"
        )));
    }
    let classes = classify_ballots(ballots, params, exec)?;
    let decisions: Vec<usize> = classes
        .iter()
        .map(|&c| if c == class_a { 0 } else { 1 })
        .collect();
    let mut counts = [0usize; 2];
    for &d in &decisions {
        counts[d] += 1;
    }
    Ok(TwoCandidateDecode {
        ids: [id_a, id_b],
        decisions,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elgamal::{encrypt_with_nonce, KeyPair};
    use crate::modmath::gen_safe_prime;
    use crate::rng::seeded;

    fn n(x: u64) -> Nat {
        Nat::from(x)
    }

    fn p23() -> GroupParams {
        GroupParams::new(n(23), n(4), GeneratorOrder::QrSubgroup).unwrap()
    }

    #[test]
    fn leak_is_sound_exhaustively() {
        let gp = p23();
        for sk in 0..11u64 {
            let kp = KeyPair::from_secret(&gp, n(sk)).unwrap();
            for m in 1..23u64 {
                let class = QrClass::of(&n(m), gp.p()).unwrap();
                for r in 0..11u64 {
                    let ct = encrypt_with_nonce(&gp, &kp.pk, &n(m), &n(r)).unwrap();
                    assert_eq!(plaintext_class(&ct, &gp).unwrap(), class);
                }
            }
        }
    }

    #[test]
    fn non_residue_sweep() {
        let mut rng = seeded(21);
        let gp = gen_safe_prime(128, GeneratorOrder::QrSubgroup, &mut rng).unwrap();
        let kp = keygen(&gp, &mut rng);
        let m = crate::modmath::smallest_non_residue(gp.p());
        for _ in 0..200 {
            let ct = encrypt(&gp, &kp.pk, &m, &mut rng).unwrap();
            assert_eq!(plaintext_class(&ct, &gp).unwrap(), QrClass::NonResidue);
            let fixed = encrypt(&gp, &kp.pk, &encode_qr(&m, gp.p()).unwrap(), &mut rng).unwrap();
            assert_eq!(plaintext_class(&fixed, &gp).unwrap(), QrClass::Residue);
        }
    }

    #[test]
    fn full_group_is_refused() {
        let gp = GroupParams::new(n(23), n(5), GeneratorOrder::FullGroup).unwrap();
        let ct = Ciphertext { a: n(5), b: n(7) };
        assert!(matches!(plaintext_class(&ct, &gp), Err(Error::Inapplicable(_))));
        assert!(distinguisher_game(&gp, Version::Modified, 10, &mut seeded(1)).is_err());
    }

    #[test]
    fn game_advantage() {
        let mut rng = seeded(22);
        let gp = gen_safe_prime(128, GeneratorOrder::QrSubgroup, &mut rng).unwrap();
        let modified = distinguisher_game(&gp, Version::Modified, 300, &mut rng).unwrap();
        assert_eq!(modified.wins, 300);
        assert_eq!(modified.advantage, 1.0);
        let fixed = distinguisher_game(&gp, Version::Final, 1000, &mut rng).unwrap();
        assert!(fixed.advantage <= 0.1, "{fixed:?}");
        let none = distinguisher_game(&gp, Version::Modified, 0, &mut rng).unwrap();
        assert_eq!(none.advantage, 0.0);
        assert!(distinguisher_game(&gp, Version::Original, 5, &mut rng).is_err());
    }

    #[test]
    fn game_is_execution_independent() {
        let gp = p23();
        let a = distinguisher_game_with(&gp, Version::Final, 200, &mut seeded(3), Exec::Sequential).unwrap();
        let b = distinguisher_game_with(&gp, Version::Final, 200, &mut seeded(3), Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ids_classify() {
        let classes = classify_ids(&[DeputyId(1), DeputyId(2), DeputyId(5)], &n(23)).unwrap();
        assert_eq!(classes[&DeputyId(1)], QrClass::Residue);
        assert_eq!(classes[&DeputyId(2)], QrClass::Residue);
        assert_eq!(classes[&DeputyId(5)], QrClass::NonResidue);
        assert!(classify_ids(&[DeputyId(46)], &n(23)).is_err());
    }

    #[test]
    fn two_candidate_split() {
        let mut rng = seeded(23);
        let gp = gen_safe_prime(64, GeneratorOrder::QrSubgroup, &mut rng).unwrap();
        let kp = keygen(&gp, &mut rng);
        let res = DeputyId(4);
        let non = DeputyId(crate::modmath::smallest_non_residue(gp.p()).try_into().unwrap());
        let mut truth = Vec::new();
        let mut ballots = Vec::new();
        for i in 0..100 {
            let choice = usize::from(i >= 63);
            let id = [res, non][choice];
            truth.push(choice);
            ballots.push(encrypt(&gp, &kp.pk, &id.to_nat(), &mut rng).unwrap());
        }
        let out = two_candidate_decode(&ballots, res, non, &gp).unwrap();
        assert_eq!(out.counts, [63, 37]);
        assert_eq!(out.decisions, truth);
        let empty = two_candidate_decode(&[], res, non, &gp).unwrap();
        assert_eq!(empty.counts, [0, 0]);
        assert!(matches!(
            two_candidate_decode(&ballots, res, DeputyId(9), &gp),
            Err(Error::Ambiguous(_))
        ));
    }
}
