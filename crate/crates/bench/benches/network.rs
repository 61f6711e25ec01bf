use std::hint::black_box;

use avcausal::fitting::MuResponse;
use avcausal::{Network, NetworkParams, StimulusEvent};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forward(c: &mut Criterion) {
    let net = Network::standard(NetworkParams::default()).unwrap();
    let event = StimulusEvent::audiovisual(0.0, 20.0);
    let rest = net.fresh_adaptation();

    c.bench_function("forward_pass noiseless", |b| {
        b.iter(|| net.forward_pass::<ChaCha8Rng>(black_box(&event), &rest, None).unwrap())
    });

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("forward_pass poisson", |b| {
        b.iter(|| net.forward_pass(black_box(&event), &rest, Some(&mut rng)).unwrap())
    });

    // the μ fit decodes each sweep point at every lattice value
    let response = MuResponse::new(&net, 0.0, 20.0).unwrap();
    c.bench_function("mu_response decode", |b| b.iter(|| response.decode(black_box(10.5)).unwrap()));
}

criterion_group!(benches, forward);
criterion_main!(benches);
