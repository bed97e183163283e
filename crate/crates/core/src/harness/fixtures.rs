//! Published data bundled with the crate: the ten ciphertext `b` values with
//! their modulus, and the test-election modulus with its two deputy ids.
//!
//! Each fixture is checked against a recorded SHA-256 digest of its values
//! (decimal strings joined by `\n`), so a corrupted copy is reported instead
//! of silently producing different verdicts.

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::modmath::{parse_nat, Nat};
use crate::qrattack::DeputyId;

const APPENDIX_B_JSON: &str = include_str!("../../fixtures/appendix_b.json");
const APPENDIX_C_JSON: &str = include_str!("../../fixtures/appendix_c.json");

pub const APPENDIX_B_DIGEST: &str = "e665ce2ef6fead252a834fb7dce917fa43b718a30fd1f162d118e4696248a0d4";
pub const APPENDIX_C_DIGEST: &str = "c91e1551a8eac6a3819a30c6f06a2a062888a782686ba12fb0085360bf7b3415";

/// Modulus and published ciphertext `b` components from the modified version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishedCiphertexts {
    pub p: Nat,
    pub b: Vec<Nat>,
}

/// Modulus and the two deputy ids of the August 28 test election.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestElection {
    pub p: Nat,
    pub ids: [DeputyId; 2],
}

#[derive(Deserialize)]
struct RawB {
    p: String,
    b: Vec<String>,
}

#[derive(Deserialize)]
struct RawC {
    p: String,
    ids: Vec<u32>,
}

fn digest(values: &[String]) -> String {
    hex::encode(Sha256::digest(values.join("\n").as_bytes()))
}

fn check_digest(values: &[String], expected: &str, name: &str) -> Result<()> {
    let got = digest(values);
    if got != expected {
        return Err(Error::Fixture(format!("{name}: digest {got} does not match recorded {expected}")));
    }
    Ok(())
}

fn nat(s: &str, name: &str) -> Result<Nat> {
    parse_nat(s).ok_or_else(|| Error::Fixture(format!("{name}: {s:?} is not a decimal integer")))
}

impl PublishedCiphertexts {
    pub fn bundled() -> Result<Self> {
        Self::parse(APPENDIX_B_JSON)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawB = serde_json::from_str(text).map_err(|e| Error::Fixture(format!("ciphertexts: {e}")))?;
        let mut values = vec![raw.p.clone()];
        values.extend(raw.b.iter().cloned());
        check_digest(&values, APPENDIX_B_DIGEST, "ciphertexts")?;
        Ok(PublishedCiphertexts {
            p: nat(&raw.p, "ciphertexts")?,
            b: raw.b.iter().map(|s| nat(s, "ciphertexts")).collect::<Result<_>>()?,
        })
    }
}

impl TestElection {
    pub fn bundled() -> Result<Self> {
        Self::parse(APPENDIX_C_JSON)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawC = serde_json::from_str(text).map_err(|e| Error::Fixture(format!("test election: {e}")))?;
        let mut values = vec![raw.p.clone()];
        values.extend(raw.ids.iter().map(|i| i.to_string()));
        check_digest(&values, APPENDIX_C_DIGEST, "test election")?;
        let [a, b] = raw.ids[..] else {
            return Err(Error::Fixture("test election: expected exactly two ids".into()));
        };
        Ok(TestElection {
            p: nat(&raw.p, "test election")?,
            ids: [DeputyId(a), DeputyId(b)],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_load() {
        let b = PublishedCiphertexts::bundled().unwrap();
        assert_eq!(b.p.bits(), 1024);
        assert_eq!(b.b.len(), 10);
        let c = TestElection::bundled().unwrap();
        assert_eq!(c.p.bits(), 1024);
        assert_eq!(c.ids, [DeputyId(3247602110), DeputyId(667396531)]);
    }

    #[test]
    fn single_digit_mutation_is_detected() {
        // flip one digit inside the first b value
        let start = APPENDIX_B_JSON.find("\"b\"").unwrap() + 20;
        let mut bytes = APPENDIX_B_JSON.as_bytes().to_vec();
        bytes[start] = if bytes[start] == b'1' { b'2' } else { b'1' };
        let mutated = String::from_utf8(bytes).unwrap();
        assert!(matches!(PublishedCiphertexts::parse(&mutated), Err(Error::Fixture(_))));

        let mutated = APPENDIX_C_JSON.replace("667396531", "667396532");
        assert!(matches!(TestElection::parse(&mutated), Err(Error::Fixture(_))));
    }
}
