use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use votecrack::audit::{audit_keyfile, parse_keyfile, AuditPolicy};
use votecrack::dlp::{recover_private_key_with, DlpOptions, Solver};
use votecrack::elgamal::{decode_qr, decrypt, encode_qr, encrypt, multi_decrypt, multi_encrypt, Version};
use votecrack::exec::Exec;
use votecrack::harness::election::{synthetic_candidates, Candidate, PublicGroup};
use votecrack::harness::scenarios::{
    attack1_scenario_with, attack2_on_ledger, attack2_scenario_with, reproduce_appendix_b,
    reproduce_appendix_c, Attack1Config, Attack2Config,
};
use votecrack::harness::{run_election, Ballot, BallotLedger, Election, PublicElection};
use votecrack::modmath::{parse_nat, Nat};
use votecrack::qrattack::{distinguisher_game_with, DeputyId};
use votecrack::rng::{self, RandomSource};
use votecrack::Error;

#[derive(Parser)]
#[command(name = "votecrack", version, about = "ElGamal ballot encryption, its attacks and a parameter auditor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for every random choice; fresh entropy when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concurrent key searches / worker threads.
    #[arg(long, global = true, default_value_t = 3)]
    workers: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum VersionArg {
    Original,
    Modified,
    Final,
}

impl From<VersionArg> for Version {
    fn from(v: VersionArg) -> Self {
        match v {
            VersionArg::Original => Version::Original,
            VersionArg::Modified => Version::Modified,
            VersionArg::Final => Version::Final,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Auto,
    Bsgs,
    Rho,
}

#[derive(Subcommand)]
enum Command {
    /// Generate parameters and keys.
    Keygen(KeygenArgs),
    /// Encrypt one message.
    Encrypt(EncryptArgs),
    /// Decrypt a ballot or a whole ledger with the secret keys.
    Decrypt(DecryptArgs),
    /// Audit the parameters in a key file.
    Audit(AuditArgs),
    /// Recover private keys by discrete logarithm.
    AttackDlp(AttackDlpArgs),
    /// Read votes from ciphertext residuosity.
    AttackQr(AttackQrArgs),
    /// Run a simulated election and write its ledger.
    Simulate(SimulateArgs),
    /// Recompute the published data.
    Reproduce {
        #[command(subcommand)]
        what: Reproduce,
    },
}

#[derive(Subcommand)]
enum Reproduce {
    /// Residuosity of the ten published ciphertexts.
    AppendixB,
    /// Residuosity of the two test-election deputy ids.
    AppendixC,
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, value_enum)]
    version: VersionArg,
    #[arg(long, default_value_t = 256)]
    bits: u64,
    /// Public key file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    secret_out: Option<PathBuf>,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long, value_enum)]
    version: VersionArg,
    #[arg(long)]
    keyfile: PathBuf,
    /// Decimal plaintext, usually a deputy id.
    #[arg(long)]
    message: String,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long, value_enum)]
    version: VersionArg,
    #[arg(long)]
    keyfile: PathBuf,
    #[arg(long)]
    secrets: PathBuf,
    /// One ballot as printed by `encrypt`.
    #[arg(long, conflicts_with = "ledger", required_unless_present = "ledger")]
    ballot: Option<String>,
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    keyfile: PathBuf,
    /// Adds the message-encoding verdict for this version.
    #[arg(long, value_enum)]
    version: Option<VersionArg>,
}

#[derive(Args)]
struct AttackDlpArgs {
    /// Attack the keys in this file instead of a fresh simulated election.
    #[arg(long)]
    keyfile: Option<PathBuf>,
    /// With --keyfile: ledger to decrypt once the keys are known.
    #[arg(long, requires = "keyfile")]
    ledger: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    bits: u64,
    #[arg(long, default_value_t = 200)]
    voters: usize,
    #[arg(long, default_value_t = 3)]
    candidates: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
    /// Pollard rho iteration cap per key.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct AttackQrArgs {
    #[arg(long, value_enum, default_value_t = VersionArg::Modified)]
    version: VersionArg,
    /// Decode this ledger instead of a fresh simulated election.
    #[arg(long, requires_all = ["keyfile", "ids"])]
    ledger: Option<PathBuf>,
    #[arg(long)]
    keyfile: Option<PathBuf>,
    /// The two candidates' deputy ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<u32>>,
    #[arg(long, default_value_t = 500)]
    voters: usize,
    /// Also play the left-or-right game this many times.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    version: VersionArg,
    #[arg(long, default_value_t = 64)]
    bits: u64,
    #[arg(long, default_value_t = 100)]
    voters: usize,
    #[arg(long, default_value_t = 2)]
    candidates: usize,
    /// Vote shares, comma separated; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    ledger_out: PathBuf,
    #[arg(long)]
    keyfile_out: Option<PathBuf>,
    #[arg(long)]
    secret_out: Option<PathBuf>,
    /// Sealed ground truth (candidate index per ballot).
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

/// A command either completes (exit 0), reports a failed attack or check
/// (exit 1), or rejects its input (exit 2).
enum Outcome {
    Done,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Parse { .. } | Error::Io(_) | Error::Unsupported(_) | Error::NotInSubgroup => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> votecrack::Result<Outcome> {
    let mut rng = match cli.seed {
        Some(s) => rng::seeded(s),
        None => rng::from_entropy(),
    };
    match &cli.command {
        Command::Keygen(a) => keygen(cli, a, &mut rng),
        Command::Encrypt(a) => encrypt_cmd(a, &mut rng),
        Command::Decrypt(a) => decrypt_cmd(a),
        Command::Audit(a) => {
            let kf = parse_keyfile(&read(&a.keyfile)?)?;
            let report = audit_keyfile(&kf, a.version.map(Into::into), &AuditPolicy::default());
            match cli.format {
                Format::Text => print!("{}", report.render_text()),
                Format::Machine => println!("{}", report.render_machine()),
            }
            Ok(Outcome::Done)
        }
        Command::AttackDlp(a) => attack_dlp(cli, a, &mut rng),
        Command::AttackQr(a) => attack_qr(cli, a, &mut rng),
        Command::Simulate(a) => simulate(cli, a, &mut rng),
        Command::Reproduce { what } => {
            let (pass, text, machine) = match what {
                Reproduce::AppendixB => {
                    let r = reproduce_appendix_b()?;
                    (r.pass, r.render_text(), to_json(&r))
                }
                Reproduce::AppendixC => {
                    let r = reproduce_appendix_c(cli.seed.unwrap_or(1))?;
                    (r.pass, r.render_text(), to_json(&r))
                }
            };
            emit(cli.format, &text, &machine);
            Ok(if pass { Outcome::Done } else { Outcome::Failed })
        }
    }
}

fn read(path: &Path) -> votecrack::Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> votecrack::Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain JSON")
}

fn emit(format: Format, text: &str, machine: &str) {
    match format {
        Format::Text => print!("{text}"),
        Format::Machine => println!("{machine}"),
    }
}

fn nat_strings(v: &[Nat]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn secrets_json(sks: &[Nat]) -> String {
    to_json(&json!({ "secretKeys": nat_strings(sks) })) + "\n"
}

fn parse_secrets(path: &Path) -> votecrack::Result<Vec<Nat>> {
    let v: serde_json::Value =
        serde_json::from_slice(&read(path)?).map_err(|e| Error::parse("$", e.to_string()))?;
    let arr = v
        .get("secretKeys")
        .and_then(|a| a.as_array())
        .ok_or_else(|| Error::parse("secretKeys", "expected an array of decimal strings"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .and_then(parse_nat)
                .ok_or_else(|| Error::parse(format!("secretKeys[{i}]"), "expected a decimal string"))
        })
        .collect()
}

fn public_from_keyfile(path: &Path, version: Version, candidates: Vec<Candidate>) -> votecrack::Result<PublicElection> {
    PublicElection::from_keyfile(&parse_keyfile(&read(path)?)?, version, candidates)
}

fn keygen(cli: &Cli, a: &KeygenArgs, rng: &mut RandomSource) -> votecrack::Result<Outcome> {
    // placeholder ids; only the keys are written out
    let candidates = vec![
        Candidate { name: "a".into(), id: DeputyId(1) },
        Candidate { name: "b".into(), id: DeputyId(2) },
    ];
    let e = Election::generate(a.version.into(), a.bits, candidates, rng)?;
    let kf = e.public().keyfile();
    match &a.out {
        Some(path) => write(path, &kf.to_json())?,
        None => print!("{}", kf.to_json()),
    }
    match &a.secret_out {
        Some(path) => write(path, &secrets_json(&e.secret_keys()))?,
        None => eprintln!("note: no --secret-out given, secret keys discarded"),
    }
    if a.out.is_some() && cli.format == Format::Text {
        println!("wrote {}-level key file with {}-bit moduli", kf.levels(), a.bits);
    }
    Ok(Outcome::Done)
}

fn encrypt_cmd(a: &EncryptArgs, rng: &mut RandomSource) -> votecrack::Result<Outcome> {
    let m = parse_nat(&a.message).ok_or_else(|| Error::param("--message must be a decimal integer"))?;
    let public = public_from_keyfile(&a.keyfile, a.version.into(), Vec::new())?;
    let ballot: Ballot = match &public.group {
        PublicGroup::Multi { params, pks } => multi_encrypt(params, pks, &m, rng)?.into(),
        PublicGroup::Single { params, pk } => {
            let m = match public.version {
                Version::Final => encode_qr(&m, params.p())?,
                _ => m,
            };
            encrypt(params, pk, &m, rng)?.into()
        }
    };
    println!("{}", serde_json::to_string(&ballot).expect("plain JSON"));
    Ok(Outcome::Done)
}

fn decrypt_ballot(public: &PublicElection, sks: &[Nat], ballot: &Ballot) -> votecrack::Result<Nat> {
    match (&public.group, ballot) {
        (PublicGroup::Multi { params, .. }, Ballot::Multi { .. }) => {
            let sks: [Nat; 3] = sks
                .to_vec()
                .try_into()
                .map_err(|_| Error::param("three secret keys are needed"))?;
            multi_decrypt(params, &sks, &ballot.as_multi().expect("multi"))
        }
        (PublicGroup::Single { params, .. }, Ballot::Single { .. }) => {
            let sk = sks.first().ok_or_else(|| Error::param("one secret key is needed"))?;
            let m = decrypt(params, sk, &ballot.as_single().expect("single"))?;
            match public.version {
                Version::Final => decode_qr(&m, params.p()),
                _ => Ok(m),
            }
        }
        _ => Err(Error::param("ballot layout does not match the key file")),
    }
}

fn decrypt_cmd(a: &DecryptArgs) -> votecrack::Result<Outcome> {
    let public = public_from_keyfile(&a.keyfile, a.version.into(), Vec::new())?;
    let sks = parse_secrets(&a.secrets)?;
    let ballots: Vec<Ballot> = match (&a.ballot, &a.ledger) {
        (Some(text), _) => vec![serde_json::from_str(text).map_err(|e| Error::parse("--ballot", e.to_string()))?],
        (None, Some(path)) => BallotLedger::read_from(path)?
            .records()
            .iter()
            .map(|r| r.ballot.clone())
            .collect(),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let mut failed = false;
    for b in &ballots {
        match decrypt_ballot(&public, &sks, b) {
            Ok(m) => println!("{m}"),
            Err(e) => {
                println!("error: {e}");
                failed = true;
            }
        }
    }
    Ok(if failed { Outcome::Failed } else { Outcome::Done })
}

fn dlp_options(a: &AttackDlpArgs, seed: u64) -> DlpOptions {
    DlpOptions {
        solver: match a.solver {
            SolverArg::Auto => Solver::Auto,
            SolverArg::Bsgs => Solver::Bsgs,
            SolverArg::Rho => Solver::Rho,
        },
        budget: a.budget,
        seed,
    }
}

fn attack_dlp(cli: &Cli, a: &AttackDlpArgs, rng: &mut RandomSource) -> votecrack::Result<Outcome> {
    let opts = dlp_options(a, cli.seed.unwrap_or(0x5eed));
    let Some(keyfile) = &a.keyfile else {
        let cfg = Attack1Config {
            bits: a.bits,
            voters: a.voters,
            candidates: a.candidates,
            workers: cli.workers,
            weights: None,
            dlp: opts,
        };
        let report = attack1_scenario_with(&cfg, rng, Exec::default())?;
        emit(cli.format, &report.render_text(), &to_json(&report));
        return Ok(if report.exact { Outcome::Done } else { Outcome::Failed });
    };

    let kf = parse_keyfile(&read(keyfile)?)?;
    let version = if kf.levels() == 3 { Version::Original } else { Version::Modified };
    let public = PublicElection::from_keyfile(&kf, version, Vec::new())?;
    if let Some(ledger) = &a.ledger {
        return attack_dlp_ledger(cli, &public, &BallotLedger::read_from(ledger)?, &opts);
    }
    let sks = recover_all(&public, cli.workers, &opts);
    let ok = sks.iter().all(Result::is_ok);
    let rendered: Vec<_> = sks
        .iter()
        .map(|r| match r {
            Ok(x) => json!({ "secret": x.to_string() }),
            Err(e) => json!({ "error": e.to_string() }),
        })
        .collect();
    let mut text = String::new();
    for (i, r) in sks.iter().enumerate() {
        match r {
            Ok(x) => text.push_str(&format!("level {}: sk = {x}\n", i + 1)),
            Err(e) => text.push_str(&format!("level {}: FAILED ({e})\n", i + 1)),
        }
    }
    emit(cli.format, &text, &to_json(&json!({ "levels": rendered })));
    Ok(if ok { Outcome::Done } else { Outcome::Failed })
}

fn recover_all(public: &PublicElection, workers: usize, opts: &DlpOptions) -> Vec<votecrack::Result<Nat>> {
    match &public.group {
        PublicGroup::Multi { params, pks } => votecrack::dlp::recover_multi_keys_with(params, pks, workers, opts, Exec::default())
            .into_iter()
            .map(|l| l.result)
            .collect(),
        PublicGroup::Single { params, pk } => vec![recover_private_key_with(params, pk, opts)],
    }
}

fn attack_dlp_ledger(
    cli: &Cli,
    public: &PublicElection,
    ledger: &BallotLedger,
    opts: &DlpOptions,
) -> votecrack::Result<Outcome> {
    let sks = match recover_all(public, cli.workers, opts).into_iter().collect::<votecrack::Result<Vec<Nat>>>() {
        Ok(sks) => sks,
        Err(e) => {
            emit(cli.format, &format!("key recovery failed: {e}\n"), &to_json(&json!({ "error": e.to_string() })));
            return Ok(Outcome::Failed);
        }
    };
    let messages: Vec<String> = ledger
        .records()
        .iter()
        .map(|r| match decrypt_ballot(public, &sks, &r.ballot) {
            Ok(m) => m.to_string(),
            Err(e) => format!("error: {e}"),
        })
        .collect();
    let text: String = messages.iter().map(|m| format!("{m}\n")).collect();
    emit(
        cli.format,
        &text,
        &to_json(&json!({ "secretKeys": nat_strings(&sks), "messages": messages })),
    );
    Ok(Outcome::Done)
}

fn attack_qr(cli: &Cli, a: &AttackQrArgs, rng: &mut RandomSource) -> votecrack::Result<Outcome> {
    let version: Version = a.version.into();
    if let (Some(ledger), Some(keyfile), Some(ids)) = (&a.ledger, &a.keyfile, &a.ids) {
        if ids.len() != 2 {
            return Err(Error::param("--ids takes exactly two deputy ids"));
        }
        let candidates = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| Candidate {
                name: format!("candidate-{}", i + 1),
                id: DeputyId(id),
            })
            .collect();
        let public = public_from_keyfile(keyfile, version, candidates)?;
        let rec = attack2_on_ledger(&public, &BallotLedger::read_from(ledger)?, Exec::default())?;
        let text = format!(
            "ids {} ({}) and {} ({})\ndecoded tally: {:?}\n",
            rec.ids[0], rec.classes[0], rec.ids[1], rec.classes[1], rec.counts
        );
        emit(cli.format, &text, &to_json(&rec));
        return Ok(Outcome::Done);
    }

    let cfg = Attack2Config {
        voters: a.voters,
        version,
        ..Attack2Config::published(a.voters)?
    };
    let mut pass = true;
    if let Some(trials) = a.trials {
        let game = distinguisher_game_with(&cfg.params, version, trials, rng, Exec::default())?;
        emit(
            cli.format,
            &format!(
                "left-or-right game: {} wins in {} trials, advantage {:.4}\n",
                game.wins, game.trials, game.advantage
            ),
            &to_json(&game),
        );
    }
    match attack2_scenario_with(&cfg, rng, Exec::default()) {
        Ok(report) => {
            pass &= report.exact;
            emit(cli.format, &report.render_text(), &to_json(&report));
        }
        Err(Error::Inapplicable(why)) => {
            pass = false;
            emit(cli.format, &format!("decode refused: {why}\n"), &to_json(&json!({ "refused": why })));
        }
        Err(e) => return Err(e),
    }
    Ok(if pass { Outcome::Done } else { Outcome::Failed })
}

fn simulate(cli: &Cli, a: &SimulateArgs, rng: &mut RandomSource) -> votecrack::Result<Outcome> {
    let version: Version = a.version.into();
    // the largest id that fits every version's message space at this size
    let max_id = if a.bits > 34 { u32::MAX } else { ((1u64 << (a.bits - 3)) - 1).max(2) as u32 };
    let candidates = synthetic_candidates(a.candidates, max_id, rng);
    let e = Election::generate(version, a.bits, candidates, rng)?;
    let weights = a
        .weights
        .clone()
        .unwrap_or_else(|| vec![1.0 / a.candidates as f64; a.candidates]);
    let (ledger, sealed) = run_election(&e, a.voters, &weights, rng)?;
    ledger.write_to(&a.ledger_out)?;
    if let Some(path) = &a.keyfile_out {
        write(path, &e.public().keyfile().to_json())?;
    }
    if let Some(path) = &a.secret_out {
        write(path, &secrets_json(&e.secret_keys()))?;
    }
    if let Some(path) = &a.truth_out {
        let truth = sealed.open();
        let doc = json!({ "candidates": e.candidates(), "choices": truth.choices, "counts": truth.counts });
        write(path, &(to_json(&doc) + "\n"))?;
    }
    let ids: Vec<String> = e.candidates().iter().map(|c| c.id.to_string()).collect();
    let text = format!(
        "{} election, {}-bit keys, {} ballots written to {}\ncandidate ids: {}\n",
        version,
        a.bits,
        ledger.len(),
        a.ledger_out.display(),
        ids.join(", ")
    );
    emit(
        cli.format,
        &text,
        &to_json(&json!({ "version": version.to_string(), "bits": a.bits, "ballots": ledger.len(), "ids": ids })),
    );
    std::io::stdout().flush().ok();
    Ok(Outcome::Done)
}
