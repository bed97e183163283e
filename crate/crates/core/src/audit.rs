//! Key-file ingestion and parameter auditing.
//!
//! The auditor only looks at public material: moduli, generators and public
//! keys, exactly what an outside observer of the election sees.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::elgamal::Version;
use crate::error::{Error, Result};
use crate::modmath::{is_probable_prime, parse_nat, GeneratorOrder, GroupParams, Nat, DEFAULT_MR_ROUNDS};

/// Public key file: parallel arrays of decimal strings, one entry per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFileV1 {
    pub modulos: Vec<Nat>,
    pub generators: Vec<Nat>,
    pub public_keys: Vec<Nat>,
}

impl KeyFileV1 {
    pub fn levels(&self) -> usize {
        self.modulos.len()
    }

    /// Pretty-printed JSON with fields `modulos`, `generators`, `publicKeys`.
    pub fn to_json(&self) -> String {
        let strings = |v: &[Nat]| v.iter().map(|x| Value::String(x.to_string())).collect::<Vec<_>>();
        let mut obj = serde_json::Map::new();
        obj.insert("modulos".into(), Value::Array(strings(&self.modulos)));
        obj.insert("generators".into(), Value::Array(strings(&self.generators)));
        obj.insert("publicKeys".into(), Value::Array(strings(&self.public_keys)));
        let mut out = serde_json::to_string_pretty(&Value::Object(obj)).expect("plain JSON");
        out.push('\n');
        out
    }
}

fn nat_array(obj: &serde_json::Map<String, Value>, field: &str) -> Result<Vec<Nat>> {
    let arr = obj
        .get(field)
        .ok_or_else(|| Error::parse(field, "missing field"))?
        .as_array()
        .ok_or_else(|| Error::parse(field, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("{field}[{i}]");
            let s = v
                .as_str()
                .ok_or_else(|| Error::parse(&path, "expected a decimal string"))?;
            let n = parse_nat(s).ok_or_else(|| Error::parse(&path, format!("not a decimal integer: {s:?}")))?;
            if n.is_zero() {
                return Err(Error::parse(&path, "must be positive"));
            }
            Ok(n)
        })
        .collect()
}

pub fn parse_keyfile(text: &[u8]) -> Result<KeyFileV1> {
    let text = std::str::from_utf8(text).map_err(|e| Error::parse("$", format!("invalid UTF-8: {e}")))?;
    let value: Value = serde_json::from_str(text).map_err(|e| Error::parse("$", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("$", "expected an object"))?;
    let modulos = nat_array(obj, "modulos")?;
    let generators = nat_array(obj, "generators")?;
    let public_keys = nat_array(obj, "publicKeys")?;
    if modulos.is_empty() {
        return Err(Error::parse("modulos", "at least one level is required"));
    }
    for (field, len) in [("generators", generators.len()), ("publicKeys", public_keys.len())] {
        if len != modulos.len() {
            return Err(Error::parse(
                field,
                format!("length {len} does not match modulos length {}", modulos.len()),
            ));
        }
    }
    Ok(KeyFileV1 {
        modulos,
        generators,
        public_keys,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Ok,
    Warn,
    Critical,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Ok => "OK",
            Severity::Warn => "WARN",
            Severity::Critical => "CRITICAL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Primality,
    SafePrime,
    KeySize,
    GeneratorOrder,
    Provenance,
    PublicKey,
    MessageEncoding,
    Multilevel,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// One audit observation. `reason_code` is stable across runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub level: Option<usize>,
    pub check: Check,
    pub severity: Severity,
    pub reason_code: &'static str,
    pub detail: String,
}

impl Finding {
    fn new(check: Check, severity: Severity, reason_code: &'static str, detail: impl Into<String>) -> Self {
        Finding {
            level: None,
            check,
            severity,
            reason_code,
            detail: detail.into(),
        }
    }

    fn at(mut self, level: usize) -> Self {
        self.level = Some(level);
        self
    }
}

/// Thresholds for the key-size verdict.
#[derive(Debug, Clone)]
pub struct AuditPolicy {
    /// Below this size discrete logs are a desk computation.
    pub critical_below_bits: u64,
    /// Below this size the key is not fit for medium-term security.
    pub warn_below_bits: u64,
    pub mr_rounds: u32,
}

impl Default for AuditPolicy {
    fn default() -> Self {
        AuditPolicy {
            critical_below_bits: 512,
            warn_below_bits: 2048,
            mr_rounds: DEFAULT_MR_ROUNDS,
        }
    }
}

/// Largest unsigned integer natively supported by the smart-contract platform.
pub const SOLIDITY_WORD_BITS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderClass {
    /// `g` generates the residue subgroup.
    Q,
    /// `g` generates the full group.
    TwoQ,
    Other,
}

/// Order class of `g` modulo a safe prime `p`.
pub fn order_class(p: &Nat, g: &Nat) -> OrderClass {
    // p - 1 has order 2
    if g <= &Nat::one() || *g >= p - 1u8 {
        return OrderClass::Other;
    }
    let q = (p - 1u8) >> 1;
    let gq = g.modpow(&q, p);
    if gq.is_one() {
        OrderClass::Q
    } else if gq == p - 1u8 {
        OrderClass::TwoQ
    } else {
        OrderClass::Other
    }
}

fn key_size_finding(bits: u64, policy: &AuditPolicy) -> Finding {
    if bits < policy.critical_below_bits {
        Finding::new(
            Check::KeySize,
            Severity::Critical,
            "KEY_SIZE_BROKEN",
            format!("{bits}-bit modulus: private keys are recoverable from public keys in minutes"),
        )
    } else if bits < policy.warn_below_bits {
        Finding::new(
            Check::KeySize,
            Severity::Warn,
            "KEY_SIZE_WEAK",
            format!("{bits}-bit modulus is too small for medium-term security"),
        )
    } else {
        Finding::new(Check::KeySize, Severity::Ok, "KEY_SIZE_OK", format!("{bits}-bit modulus"))
    }
}

pub fn audit_group(p: &Nat, g: &Nat) -> Vec<Finding> {
    audit_group_with(p, g, &AuditPolicy::default())
}

pub fn audit_group_with(p: &Nat, g: &Nat, policy: &AuditPolicy) -> Vec<Finding> {
    let mut out = Vec::new();
    let bits = p.bits();

    let p_prime = is_probable_prime(p, policy.mr_rounds);
    out.push(if p_prime {
        Finding::new(Check::Primality, Severity::Ok, "P_PRIME", "p is prime")
    } else {
        Finding::new(Check::Primality, Severity::Critical, "P_NOT_PRIME", "p is composite")
    });

    let q = if p.is_zero() { Nat::zero() } else { (p - 1u8) >> 1 };
    let safe = p_prime && is_probable_prime(&q, policy.mr_rounds);
    out.push(if safe {
        Finding::new(Check::SafePrime, Severity::Ok, "SAFE_PRIME", "(p-1)/2 is prime")
    } else {
        Finding::new(
            Check::SafePrime,
            Severity::Critical,
            "NOT_SAFE_PRIME",
            "(p-1)/2 is not prime; the group has small subgroups",
        )
    });

    out.push(key_size_finding(bits, policy));
    if bits <= SOLIDITY_WORD_BITS {
        out.push(Finding::new(
            Check::KeySize,
            Severity::Warn,
            "SOLIDITY_WORD_CAP",
            format!("modulus fits the {SOLIDITY_WORD_BITS}-bit smart-contract word; sizes capped by the platform are a known failure mode"),
        ));
    }

    out.push(if !safe {
        Finding::new(
            Check::GeneratorOrder,
            Severity::Critical,
            "GEN_ORDER_UNKNOWN",
            "generator order cannot be classified without a safe prime",
        )
    } else {
        match order_class(p, g) {
            OrderClass::Q => Finding::new(
                Check::GeneratorOrder,
                Severity::Ok,
                "GEN_ORDER_Q",
                "g generates the quadratic residues (order q)",
            ),
            OrderClass::TwoQ => Finding::new(
                Check::GeneratorOrder,
                Severity::Warn,
                "GEN_ORDER_2Q",
                "g generates the full group (order 2q); ciphertexts leak one bit through the Legendre symbol",
            ),
            OrderClass::Other => Finding::new(
                Check::GeneratorOrder,
                Severity::Critical,
                "GEN_ORDER_OTHER",
                "g has order 1 or 2, or lies outside [2, p-1]",
            ),
        }
    });

    out.push(Finding::new(
        Check::Provenance,
        Severity::Ok,
        "PRIME_PROVENANCE_UNVERIFIABLE",
        "the prime's generation procedure is not public; a trapdoored prime cannot be ruled out",
    ));
    out
}

/// Checks `pk` lies in the subgroup generated by `g`.
pub fn audit_public_key(p: &Nat, g: &Nat, pk: &Nat) -> Finding {
    let order = match order_class(p, g) {
        OrderClass::Q => Some((p - 1u8) >> 1),
        OrderClass::TwoQ => Some(p - 1u8),
        OrderClass::Other => None,
    };
    let inside = !pk.is_zero()
        && pk < p
        && order.map(|o| pk.modpow(&o, p).is_one()).unwrap_or(false);
    if inside {
        Finding::new(Check::PublicKey, Severity::Ok, "PK_IN_SUBGROUP", "public key lies in <g>")
    } else {
        Finding::new(
            Check::PublicKey,
            Severity::Critical,
            "PK_NOT_IN_SUBGROUP",
            "public key is outside the subgroup generated by g",
        )
    }
}

/// How messages reach the group in a given scheme version.
pub fn audit_message_encoding(version: Version, params: &GroupParams) -> Vec<Finding> {
    audit_message_encoding_with(version, params, &AuditPolicy::default())
}

pub fn audit_message_encoding_with(version: Version, params: &GroupParams, policy: &AuditPolicy) -> Vec<Finding> {
    let mut out = Vec::new();
    match version {
        Version::Original => {
            out.push(Finding::new(
                Check::MessageEncoding,
                Severity::Critical,
                "FULL_GROUP_PARITY_LEAK",
                "full-group generators: the Legendre symbols of a and b reveal the residuosity of the message",
            ));
            out.push(Finding::new(
                Check::Multilevel,
                Severity::Warn,
                "MULTILEVEL_NO_ADDED_SECURITY",
                "chaining three ElGamal layers does not compound asymmetric security; each key falls independently",
            ));
        }
        Version::Modified => {
            let severity = if params.generator_order() == GeneratorOrder::QrSubgroup {
                "generator in the residue subgroup but messages are arbitrary integers: the Legendre symbol of b reveals the residuosity of m (not semantically secure)"
            } else {
                "messages are arbitrary integers: the Legendre symbol of b leaks the residuosity of m"
            };
            out.push(Finding::new(
                Check::MessageEncoding,
                Severity::Critical,
                "RESIDUOSITY_LEAK",
                severity,
            ));
        }
        Version::Final => {
            out.push(Finding::new(
                Check::MessageEncoding,
                Severity::Ok,
                "SQUARED_ENCODING",
                "messages are squared into the residue subgroup before encryption",
            ));
        }
    }
    out.push(key_size_finding(params.bits(), policy));
    out
}

/// Findings for a whole key file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub overall: Severity,
    pub findings: Vec<Finding>,
}

impl AuditReport {
    pub fn from_findings(findings: Vec<Finding>) -> Self {
        let overall = findings.iter().map(|f| f.severity).max().unwrap_or(Severity::Ok);
        AuditReport { overall, findings }
    }

    pub fn critical_codes(&self) -> Vec<&'static str> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Critical)
            .map(|f| f.reason_code)
            .collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let level = f.level.map(|l| format!("level {l}")).unwrap_or_else(|| "global".into());
            out.push_str(&format!(
                "{level:<8} {:<16} {:<8} {:<30} {}\n",
                f.check.to_string(),
                f.severity.to_string(),
                f.reason_code,
                f.detail
            ));
        }
        out.push_str(&format!("overall: {}\n", self.overall));
        out
    }

    pub fn render_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain JSON")
    }
}

/// Audits every level of a key file; `version`, when known, adds the
/// message-encoding verdict.
pub fn audit_keyfile(kf: &KeyFileV1, version: Option<Version>, policy: &AuditPolicy) -> AuditReport {
    let mut findings = Vec::new();
    for level in 0..kf.levels() {
        let (p, g, pk) = (&kf.modulos[level], &kf.generators[level], &kf.public_keys[level]);
        findings.extend(audit_group_with(p, g, policy).into_iter().map(|f| f.at(level)));
        findings.push(audit_public_key(p, g, pk).at(level));
    }
    if kf.levels() > 1 {
        let ordered = kf.modulos.windows(2).all(|w| w[0] < w[1]);
        findings.push(if ordered {
            Finding::new(
                Check::Multilevel,
                Severity::Warn,
                "MULTILEVEL_NO_ADDED_SECURITY",
                format!("{} chained levels; each private key can be recovered independently", kf.levels()),
            )
        } else {
            Finding::new(
                Check::Multilevel,
                Severity::Critical,
                "MULTILEVEL_UNORDERED",
                "moduli are not strictly increasing; lifting between levels loses information",
            )
        });
    }
    if let Some(version) = version {
        if let Some(params) = group_params_of(&kf.modulos[0], &kf.generators[0]) {
            // key size and chaining are already covered per level above
            findings.extend(
                audit_message_encoding_with(version, &params, policy)
                    .into_iter()
                    .filter(|f| f.check == Check::MessageEncoding),
            );
        }
    }
    AuditReport::from_findings(findings)
}

/// Group parameters for `(p, g)` when `p` is a safe prime and `g` has order
/// `q` or `2q`.
pub fn group_params_of(p: &Nat, g: &Nat) -> Option<GroupParams> {
    let order = match order_class(p, g) {
        OrderClass::Q => GeneratorOrder::QrSubgroup,
        OrderClass::TwoQ => GeneratorOrder::FullGroup,
        OrderClass::Other => return None,
    };
    GroupParams::new(p.clone(), g.clone(), order).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::gen_safe_prime;
    use crate::rng::seeded;

    fn n(x: u64) -> Nat {
        Nat::from(x)
    }

    fn overall(f: &[Finding]) -> Severity {
        f.iter().map(|f| f.severity).max().unwrap()
    }

    #[test]
    fn parse_small_file() {
        let text = br#"{"modulos":["23"],"generators":["4"],"publicKeys":["18"]}"#;
        let kf = parse_keyfile(text).unwrap();
        assert_eq!(kf.modulos, vec![n(23)]);
        assert_eq!(kf.generators, vec![n(4)]);
        assert_eq!(kf.public_keys, vec![n(18)]);
        assert_eq!(parse_keyfile(kf.to_json().as_bytes()).unwrap(), kf);
    }

    #[test]
    fn parse_errors_carry_paths() {
        let cases: [(&[u8], &str); 7] = [
            (br#"{"modulos":["23","47","59"],"generators":["5","5","2"],"publicKeys":["1","2"]}"#, "publicKeys"),
            (br#"{"modulos":["23"],"generators":["4"]}"#, "publicKeys"),
            (br#"{"modulos":["2x3"],"generators":["4"],"publicKeys":["1"]}"#, "modulos[0]"),
            (br#"{"modulos":["23"],"generators":[4],"publicKeys":["1"]}"#, "generators[0]"),
            (br#"{"modulos":["23"],"generators":["4"],"publicKeys":["0"]}"#, "publicKeys[0]"),
            (br#"{"modulos":"23","generators":["4"],"publicKeys":["1"]}"#, "modulos"),
            (br#"[1,2]"#, "$"),
        ];
        for (text, path) in cases {
            match parse_keyfile(text) {
                Err(Error::Parse { path: got, .. }) => assert_eq!(got, path),
                other => panic!("expected parse error at {path}, got {other:?}"),
            }
        }
    }

    #[test]
    fn order_classes() {
        assert_eq!(order_class(&n(23), &n(4)), OrderClass::Q);
        assert_eq!(order_class(&n(23), &n(5)), OrderClass::TwoQ);
        assert_eq!(order_class(&n(23), &n(22)), OrderClass::Other);
        assert_eq!(order_class(&n(23), &n(1)), OrderClass::Other);
        assert_eq!(order_class(&n(23), &n(23)), OrderClass::Other);
    }

    #[test]
    fn group_verdicts() {
        let f = audit_group(&n(23), &n(4));
        assert_eq!(overall(&f), Severity::Critical);
        assert!(f.iter().any(|f| f.reason_code == "GEN_ORDER_Q"));
        assert!(f.iter().any(|f| f.reason_code == "KEY_SIZE_BROKEN"));
        assert!(f.iter().any(|f| f.reason_code == "SOLIDITY_WORD_CAP"));
        let f = audit_group(&n(23), &n(5));
        assert!(f.iter().any(|f| f.reason_code == "GEN_ORDER_2Q"));
        let f = audit_group(&n(29), &n(2));
        assert!(f.iter().any(|f| f.reason_code == "NOT_SAFE_PRIME"));
        let f = audit_group(&n(27), &n(2));
        assert!(f.iter().any(|f| f.reason_code == "P_NOT_PRIME"));
    }

    #[test]
    fn thresholds_are_configurable() {
        let mut rng = seeded(31);
        let gp = gen_safe_prime(128, GeneratorOrder::QrSubgroup, &mut rng).unwrap();
        let lax = AuditPolicy {
            critical_below_bits: 64,
            warn_below_bits: 100,
            ..AuditPolicy::default()
        };
        let f = audit_group_with(gp.p(), gp.g(), &lax);
        assert!(f.iter().any(|f| f.reason_code == "KEY_SIZE_OK"));
        assert_eq!(overall(&f), Severity::Warn); // still under the 256-bit word cap
    }

    #[test]
    fn public_key_membership() {
        assert_eq!(audit_public_key(&n(23), &n(4), &n(18)).severity, Severity::Ok);
        assert_eq!(audit_public_key(&n(23), &n(4), &n(5)).severity, Severity::Critical);
        assert_eq!(audit_public_key(&n(23), &n(5), &n(5)).severity, Severity::Ok);
        assert_eq!(audit_public_key(&n(23), &n(4), &n(23)).severity, Severity::Critical);
    }

    #[test]
    fn encoding_verdicts() {
        let gp = GroupParams::new(n(23), n(4), GeneratorOrder::QrSubgroup).unwrap();
        let m = audit_message_encoding(Version::Modified, &gp);
        assert!(m.iter().any(|f| f.reason_code == "RESIDUOSITY_LEAK" && f.severity == Severity::Critical));
        let fin = audit_message_encoding(Version::Final, &gp);
        assert!(!fin.iter().any(|f| f.reason_code == "RESIDUOSITY_LEAK"));
        assert!(fin.iter().any(|f| f.reason_code == "SQUARED_ENCODING"));
        let full = GroupParams::new(n(23), n(5), GeneratorOrder::FullGroup).unwrap();
        let o = audit_message_encoding(Version::Original, &full);
        assert!(o.iter().any(|f| f.reason_code == "MULTILEVEL_NO_ADDED_SECURITY"));
        assert!(o.iter().any(|f| f.reason_code == "FULL_GROUP_PARITY_LEAK"));
    }

    #[test]
    fn keyfile_report() {
        let kf = parse_keyfile(br#"{"modulos":["23","47","59"],"generators":["5","5","2"],"publicKeys":["10","2","4"]}"#).unwrap();
        let report = audit_keyfile(&kf, Some(Version::Original), &AuditPolicy::default());
        assert_eq!(report.overall, Severity::Critical);
        assert!(report.findings.iter().any(|f| f.level == Some(2)));
        assert!(report.critical_codes().contains(&"FULL_GROUP_PARITY_LEAK"));
        let machine: Value = serde_json::from_str(&report.render_machine()).unwrap();
        let first = &machine["findings"][0];
        for key in ["level", "check", "severity", "reason_code", "detail"] {
            assert!(first.get(key).is_some(), "{key}");
        }
        assert_eq!(machine["overall"], "CRITICAL");
        assert!(report.render_text().ends_with("overall: CRITICAL\n"));

        let unordered = parse_keyfile(br#"{"modulos":["47","23","59"],"generators":["5","5","2"],"publicKeys":["2","10","4"]}"#).unwrap();
        let report = audit_keyfile(&unordered, None, &AuditPolicy::default());
        assert!(report.critical_codes().contains(&"MULTILEVEL_UNORDERED"));
    }
}
