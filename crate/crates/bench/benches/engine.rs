use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cannon::constructions::Compressed;
use cannon::engine::reference;
use cannon::expanding::{heisenberg_system, integer_system};
use cannon::random::random_word_upto;
use cannon::{parse_word, reduce, Flavor, Letter, RewritingSystem, Rule, RuleSource, TieBreak, Word};

fn free2() -> RewritingSystem {
    let w = parse_word("a.A.b.B").unwrap();
    let rules = [(0, 1), (1, 0), (2, 3), (3, 2)]
        .iter()
        .map(|&(i, j)| Rule::new(vec![w[i], w[j]], vec![]))
        .collect();
    RewritingSystem::new(Flavor::Incremental, w.clone(), w, rules)
}

fn ones(n: usize) -> Word {
    vec![Letter::new("1"); n]
}

fn decimal(c: &mut Criterion) {
    let sys = integer_system(10, 5, None).unwrap();
    let mut g = c.benchmark_group("decimal");
    for n in [572, 5_000, 50_000] {
        let w = ones(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| sys.reduce(w).unwrap())
        });
    }
    g.finish();
}

fn free_group(c: &mut Criterion) {
    let sys = free2();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = random_word_upto(&mut rng, sys.input_alphabet(), 20_000);
    let mut g = c.benchmark_group("free-group");
    g.bench_function("scanner", |b| b.iter(|| reduce(&sys, &w).unwrap()));
    let short = &w[..w.len().min(2_000)];
    g.bench_function("reference-2000", |b| {
        b.iter(|| reference::reduce_traced(sys.flavor(), sys.rules(), short, TieBreak::default()))
    });
    g.finish();
}

fn compressed(c: &mut Criterion) {
    let base = free2();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = random_word_upto(&mut rng, base.input_alphabet(), 6_000);
    let mut g = c.benchmark_group("compressed");
    for n in [2, 3] {
        let comp = Compressed::new(&base, n).unwrap();
        let packed = comp.encode(&w);
        g.bench_with_input(BenchmarkId::from_parameter(n), &packed, |b, p| {
            b.iter(|| reduce(&comp as &dyn RuleSource, p).unwrap())
        });
    }
    g.finish();
}

fn heisenberg(c: &mut Criterion) {
    let sys = heisenberg_system(6, None, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random_word_upto(&mut rng, sys.generators(), 400);
    c.bench_function("heisenberg-400", |b| b.iter(|| sys.reduce(&w).unwrap()));
}

criterion_group!(benches, decimal, free_group, compressed, heisenberg);
criterion_main!(benches);
