//! Sequential vs rayon execution of the batch workloads.
//!
//! On a single-core machine both rows should be about equal; the parallel
//! row only pulls ahead with more cores.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use votecrack::dlp::{recover_multi_keys_with, DlpOptions};
use votecrack::elgamal::{encrypt, keygen, Ciphertext, Version};
use votecrack::exec::Exec;
use votecrack::harness::election::{generate_chain, run_election_with, synthetic_candidates};
use votecrack::harness::Election;
use votecrack::modmath::{gen_safe_prime, GeneratorOrder, GroupParams, Nat};
use votecrack::qrattack::{classify_ballots, distinguisher_game_with};
use votecrack::rng::seeded;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn group_1024() -> GroupParams {
    gen_safe_prime(1024, GeneratorOrder::QrSubgroup, &mut seeded(1)).unwrap()
}

fn ballots(params: &GroupParams, n: u64) -> Vec<Ciphertext> {
    let mut rng = seeded(2);
    let keys = keygen(params, &mut rng);
    (1..=n)
        .map(|m| encrypt(params, &keys.pk, &Nat::from(m), &mut rng).unwrap())
        .collect()
}

fn classify(c: &mut Criterion) {
    let params = group_1024();
    let cts = ballots(&params, 2000);
    let mut group = c.benchmark_group("classify_2000_ballots_1024");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| classify_ballots(&cts, &params, exec).unwrap()));
    }
    group.finish();
}

fn game(c: &mut Criterion) {
    let params = group_1024();
    let mut group = c.benchmark_group("distinguisher_200_trials_1024");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| distinguisher_game_with(&params, Version::Modified, 200, &mut seeded(3), exec).unwrap())
        });
    }
    group.finish();
}

fn election(c: &mut Criterion) {
    let mut rng = seeded(4);
    let candidates = synthetic_candidates(2, u32::MAX, &mut rng);
    let e = Election::over(Version::Final, group_1024(), candidates, &mut rng).unwrap();
    let mut group = c.benchmark_group("cast_200_ballots_1024");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| run_election_with(&e, 200, &[0.5, 0.5], &mut seeded(5), exec).unwrap())
        });
    }
    group.finish();
}

fn key_recovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("recover_three_keys");
    group.sample_size(10);
    for bits in [32u64, 36] {
        let mut rng = seeded(7);
        let mp = generate_chain(bits, &mut rng).unwrap();
        let pks = votecrack::elgamal::MultiKeySet::generate(&mp, &mut rng).public_keys();
        for (name, exec) in MODES {
            let workers = if exec == Exec::Sequential { 1 } else { 3 };
            group.bench_with_input(BenchmarkId::new(name, bits), &bits, |b, _| {
                b.iter(|| recover_multi_keys_with(&mp, &pks, workers, &DlpOptions::default(), exec))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, classify, game, election, key_recovery);
criterion_main!(benches);
