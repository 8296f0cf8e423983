use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semilinear::decomposition::{decompose, refine_special, validate_special};
use semilinear::generate::random_sets;

fn decomposition(c: &mut Criterion) {
    for (n, atoms) in [(2, 4), (2, 8), (3, 3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inputs: Vec<_> = (0..16).map(|_| random_sets(n, atoms, &mut rng)).collect();
        let mut k = 0;
        c.bench_function(&format!("decompose+refine R^{n}, {atoms} atoms"), |b| {
            b.iter_batched(
                || {
                    k = (k + 1) % inputs.len();
                    inputs[k].clone()
                },
                |sets| refine_special(&decompose(&sets, n).unwrap()).unwrap(),
                BatchSize::SmallInput,
            )
        });
        let fine: Vec<_> = inputs.iter().map(|s| refine_special(&decompose(s, n).unwrap()).unwrap()).collect();
        c.bench_function(&format!("validate_special R^{n}, {atoms} atoms"), |b| {
            b.iter(|| fine.iter().map(|d| validate_special(d).checks).sum::<usize>())
        });
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = decomposition
}
criterion_main!(benches);
