use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qutedb_bench::random_table;
use qutedb_core::circuits::{build_grover_circuit, compile_oracle, QromLoader};
use qutedb_core::sim::{build_qft, run_sparse, run_statevector, sample, Backend};
use qutedb_core::{ColumnRef, DeviceModel, NoiseModel, Predicate, Value};

fn qft(c: &mut Criterion) {
    let mut g = c.benchmark_group("qft_statevector");
    for n in [6, 9, 12] {
        let circuit = build_qft(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &circuit, |b, circuit| {
            b.iter(|| run_statevector(circuit).unwrap())
        });
    }
    g.finish();
}

fn grover_circuit(n: usize) -> qutedb_core::Circuit {
    let t = random_table(n, 3);
    let pred = Predicate::Eq {
        column: ColumnRef::bare("b"),
        value: Value::UInt(5),
    };
    let (loader, code) = QromLoader::from_table(&t, &pred).unwrap();
    let oracle = compile_oracle(&code, &loader).unwrap();
    build_grover_circuit(&oracle, 2)
}

fn grover_backends(c: &mut Criterion) {
    let mut g = c.benchmark_group("grover_k2");
    g.sample_size(10);
    for n in [64, 256, 1024] {
        let circuit = grover_circuit(n);
        g.bench_with_input(BenchmarkId::new("sparse", n), &circuit, |b, circuit| {
            b.iter(|| run_sparse(circuit).unwrap())
        });
        if circuit.n_qubits <= 20 {
            g.bench_with_input(BenchmarkId::new("dense", n), &circuit, |b, circuit| {
                b.iter(|| {
                    qutedb_core::sim::sample_with(
                        circuit,
                        1,
                        &NoiseModel::noiseless(0),
                        Backend::Dense,
                    )
                    .unwrap()
                })
            });
        }
    }
    g.finish();
}

fn noisy_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_2000_shots");
    g.sample_size(10);
    let circuit = grover_circuit(256);
    let device = DeviceModel::default();
    g.bench_function("noiseless", |b| {
        b.iter(|| sample(&circuit, 2000, &NoiseModel::noiseless(1)).unwrap())
    });
    g.bench_function("noisy", |b| {
        b.iter(|| sample(&circuit, 2000, &NoiseModel::from_device(&device, 1)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, qft, grover_backends, noisy_sampling);
criterion_main!(benches);
