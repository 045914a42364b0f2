//! Corpus generation must not depend on the worker count.

use walklim::graph::{gen, TransitionModel};
use walklim::walker::{generate_corpus, WalkConfig};

#[test]
fn corpus_is_identical_across_thread_pools() {
    let tm = TransitionModel::build(gen::random_connected(20, 25, 17)).unwrap();
    let cfg = WalkConfig::new(500, 24, 6, 271828);

    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| generate_corpus(&tm, &cfg).unwrap())
    };

    let single = run(1);
    for threads in [2usize, 4, 8] {
        let parallel = run(threads);
        assert_eq!(single, parallel, "{threads}-thread corpus differs");
    }

    let mut a = Vec::new();
    single.write_tsv(&mut a).unwrap();
    let mut b = Vec::new();
    run(3).write_tsv(&mut b).unwrap();
    assert_eq!(a, b);
}
