//! Append-only ballot ledger stored as JSON lines.
//!
//! One record per ballot, fields in a fixed order with every group element as
//! a decimal string, so a ledger replays byte for byte.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::elgamal::{Ciphertext, MultiCiphertext};
use crate::error::{Error, Result};
use crate::modmath::{parse_nat, Nat};

mod decimal {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Nat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Nat, D::Error> {
        let s = String::deserialize(d)?;
        parse_nat(&s).ok_or_else(|| serde::de::Error::custom(format!("not a decimal integer: {s:?}")))
    }
}

/// Encrypted content of one ballot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Ballot {
    Single {
        #[serde(with = "decimal")]
        a: Nat,
        #[serde(with = "decimal")]
        b: Nat,
    },
    Multi {
        #[serde(with = "decimal")]
        b1: Nat,
        #[serde(with = "decimal")]
        b2: Nat,
        #[serde(with = "decimal")]
        a3: Nat,
        #[serde(with = "decimal")]
        b3: Nat,
    },
}

impl From<Ciphertext> for Ballot {
    fn from(ct: Ciphertext) -> Self {
        Ballot::Single { a: ct.a, b: ct.b }
    }
}

impl From<MultiCiphertext> for Ballot {
    fn from(ct: MultiCiphertext) -> Self {
        Ballot::Multi {
            b1: ct.b1,
            b2: ct.b2,
            a3: ct.a3,
            b3: ct.b3,
        }
    }
}

impl Ballot {
    pub fn as_single(&self) -> Option<Ciphertext> {
        match self {
            Ballot::Single { a, b } => Some(Ciphertext {
                a: a.clone(),
                b: b.clone(),
            }),
            _ => None,
        }
    }

    pub fn as_multi(&self) -> Option<MultiCiphertext> {
        match self {
            Ballot::Multi { b1, b2, a3, b3 } => Some(MultiCiphertext {
                b1: b1.clone(),
                b2: b2.clone(),
                a3: a3.clone(),
                b3: b3.clone(),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotRecord {
    pub index: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    #[serde(flatten)]
    pub ballot: Ballot,
}

impl BallotRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain JSON")
    }
}

/// Ordered ballots; records can be appended but never modified.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BallotLedger {
    records: Vec<BallotRecord>,
}

impl BallotLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a ballot and returns its index.
    pub fn append(&mut self, ballot: Ballot, timestamp: u64) -> u64 {
        let index = self.records.len() as u64;
        self.records.push(BallotRecord {
            index,
            timestamp,
            ballot,
        });
        index
    }

    pub fn records(&self) -> &[BallotRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Single-level ciphertexts, in order; `None` if any record is multilevel.
    pub fn single_ciphertexts(&self) -> Option<Vec<Ciphertext>> {
        self.records.iter().map(|r| r.ballot.as_single()).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    /// Parses JSON lines, requiring strictly increasing indices.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records: Vec<BallotRecord> = Vec::new();
        for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let path = format!("line {}", lineno + 1);
            let rec: BallotRecord = serde_json::from_str(line).map_err(|e| Error::parse(&path, e.to_string()))?;
            if let Some(prev) = records.last() {
                if rec.index <= prev.index {
                    return Err(Error::parse(path, "ledger indices must be strictly increasing"));
                }
            }
            records.push(rec);
        }
        Ok(BallotLedger { records })
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = LedgerWriter::create(path)?;
        for r in &self.records {
            w.append(r)?;
        }
        Ok(())
    }
}

/// File sink that only ever appends whole lines.
pub struct LedgerWriter {
    out: BufWriter<File>,
    last_index: Option<u64>,
}

impl LedgerWriter {
    /// Creates (truncating) a new ledger file.
    pub fn create(path: &Path) -> Result<Self> {
        Ok(LedgerWriter {
            out: BufWriter::new(File::create(path)?),
            last_index: None,
        })
    }

    /// Opens an existing ledger for appending after its last record.
    pub fn open_append(path: &Path) -> Result<Self> {
        let existing = BallotLedger::read_from(path)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(LedgerWriter {
            out: BufWriter::new(file),
            last_index: existing.records.last().map(|r| r.index),
        })
    }

    pub fn append(&mut self, record: &BallotRecord) -> Result<()> {
        if matches!(self.last_index, Some(last) if record.index <= last) {
            return Err(Error::param("ledger indices must be strictly increasing"));
        }
        writeln!(self.out, "{}", record.to_line())?;
        self.out.flush()?;
        self.last_index = Some(record.index);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(x: u64) -> Nat {
        Nat::from(x)
    }

    fn sample() -> BallotLedger {
        let mut l = BallotLedger::new();
        l.append(Ballot::Single { a: n(16), b: n(18) }, 100);
        l.append(
            Ballot::Multi {
                b1: n(1),
                b2: n(2),
                a3: n(3),
                b3: n(4),
            },
            101,
        );
        l
    }

    #[test]
    fn line_format_is_fixed() {
        let l = sample();
        assert_eq!(
            l.to_jsonl(),
            "{\"index\":0,\"timestamp\":100,\"kind\":\"single\",\"a\":\"16\",\"b\":\"18\"}\n\
             {\"index\":1,\"timestamp\":101,\"kind\":\"multi\",\"b1\":\"1\",\"b2\":\"2\",\"a3\":\"3\",\"b3\":\"4\"}\n"
        );
        assert_eq!(BallotLedger::from_jsonl(&l.to_jsonl()).unwrap(), l);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(BallotLedger::from_jsonl("{\"index\":0,\"timestamp\":1,\"kind\":\"single\",\"a\":\"1\",\"b\":12}").is_err());
        let twice = "{\"index\":3,\"timestamp\":1,\"kind\":\"single\",\"a\":\"1\",\"b\":\"2\"}\n".repeat(2);
        assert!(BallotLedger::from_jsonl(&twice).is_err());
    }

    #[test]
    fn appending_keeps_prior_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.jsonl");
        let l = sample();
        l.write_to(&path).unwrap();
        let before = std::fs::read(&path).unwrap();

        let mut w = LedgerWriter::open_append(&path).unwrap();
        let rec = BallotRecord {
            index: 2,
            timestamp: 102,
            ballot: Ballot::Single { a: n(5), b: n(6) },
        };
        w.append(&rec).unwrap();
        assert!(w.append(&rec).is_err());
        drop(w);

        let after = std::fs::read(&path).unwrap();
        assert_eq!(&after[..before.len()], &before[..]);
        let reread = BallotLedger::read_from(&path).unwrap();
        assert_eq!(&reread.records()[..2], l.records());
        assert_eq!(reread.records()[2], rec);
    }
}
