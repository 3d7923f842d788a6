use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use seqlearn::search::{find_best_feature, Execution, SearchConfig, Traversal};
use seqlearn::synth::PlantedMotif;
use seqlearn::trainer::{train, TrainerConfig};
use seqlearn::{Corpus, ElasticNet, LossKind};

fn corpus(size: usize) -> Corpus {
    PlantedMotif {
        positives: size,
        negatives: size,
        ..PlantedMotif::default()
    }
    .corpus(1)
    .unwrap()
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_best_feature");
    for (size, maxgap) in [(50, 0), (400, 1)] {
        let corpus = corpus(size);
        let warm = train(
            &corpus,
            &TrainerConfig {
                max_iterations: 10,
                verbosity: 0,
                search: SearchConfig {
                    maxgap,
                    ..SearchConfig::default()
                },
                ..TrainerConfig::default()
            },
        )
        .unwrap();
        for traversal in [Traversal::Dfs, Traversal::Bfs] {
            for execution in [Execution::Sequential, Execution::Parallel] {
                let cfg = SearchConfig {
                    maxgap,
                    traversal,
                    execution,
                    ..SearchConfig::default()
                };
                let id = BenchmarkId::new(
                    format!("{traversal:?}/{execution:?}"),
                    format!("{}x2/gap{maxgap}", size),
                );
                group.bench_with_input(id, &cfg, |b, cfg| {
                    b.iter(|| {
                        find_best_feature(
                            &corpus,
                            LossKind::Logistic,
                            ElasticNet::default(),
                            &warm.state.margins,
                            &warm.state.weights,
                            cfg,
                        )
                    })
                });
            }
        }
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    let corpus = corpus(200);
    for execution in [Execution::Sequential, Execution::Parallel] {
        let cfg = TrainerConfig {
            verbosity: 0,
            search: SearchConfig {
                maxgap: 1,
                execution,
                ..SearchConfig::default()
            },
            ..TrainerConfig::default()
        };
        group.bench_function(format!("{execution:?}"), |b| {
            b.iter(|| train(&corpus, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, search, training);
criterion_main!(benches);
