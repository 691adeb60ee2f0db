//! Sequential vs rayon execution of the three data-parallel workloads:
//! jump trajectories, optimizer restarts and property-suite samples.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqent_core::exec::map_indexed;
use sqent_core::ising::{McwfStepper, QuenchProtocol};
use sqent_core::qstate::RegionPartition;
use sqent_core::squashed::{tsq_upper, SquashOptions};
use sqent_core::{measures, random, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn trajectories(c: &mut Criterion) {
    let proto = QuenchProtocol { n_qubits: 6, n_traj: 64, t_up: 4.0, t_hold: 0.0, t_down: 4.0, ..Default::default() };
    let mut group = c.benchmark_group("mcwf_6q_64traj_t2");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut mc = McwfStepper::new(&proto, exec).unwrap();
                mc.advance_to(2.0).unwrap();
                mc.jump_counts().iter().sum::<usize>()
            })
        });
    }
    group.finish();
}

fn restarts(c: &mut Criterion) {
    let part = RegionPartition::single_qubits(4).unwrap();
    let rho = random::mixed_state(4, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let mut group = c.benchmark_group("tsq_upper_rank2_4q");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SquashOptions { exec, max_evals: 600, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| tsq_upper(&rho, &part, &opts).unwrap().value)
        });
    }
    group.finish();
}

fn property_samples(c: &mut Criterion) {
    let part = RegionPartition::single_qubits(4).unwrap();
    let mut group = c.benchmark_group("ssa_200_samples");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let v = map_indexed(200, exec, |k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
                    let rho = random::mixed_state(4, 16, &mut rng).unwrap();
                    measures::qcmi(&rho, &part).unwrap().value
                });
                v.into_iter().fold(f64::INFINITY, f64::min)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, trajectories, restarts, property_samples);
criterion_main!(benches);
