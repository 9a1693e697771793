use proptest::prelude::*;

use pkmeans::layout::LayoutStrategy;
use pkmeans::seeding::Seeder;
use pkmeans::{seed_parallel, seed_serial, squared_distance, Dataset, ExecConfig, RngStream};

fn dataset(seed: u64, n: usize, dims: usize) -> Dataset {
    let mut rng = RngStream::new(seed);
    Dataset::new(
        (0..n * dims)
            .map(|_| (rng.uniform() * 20.0).floor())
            .collect(),
        dims,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_symmetric_and_zero_on_diagonal(
        a in proptest::collection::vec(-1e6f64..1e6, 1..8),
        shift in -1e3f64..1e3,
    ) {
        let b: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let ab = squared_distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, squared_distance(&b, &a).unwrap());
        prop_assert_eq!(squared_distance(&a, &a).unwrap(), 0.0);
    }

    // Integer-valued coordinates make coincident points common, which
    // exercises the zero-weight and fallback paths.
    #[test]
    fn parallel_matches_serial_and_recomputation(
        seed in any::<u64>(),
        n in 1usize..64,
        k_frac in 0.0f64..1.0,
        dims in 1usize..4,
        workers in 1usize..6,
        chunk in 1usize..40,
        strategy in prop_oneof![
            Just(LayoutStrategy::SharedMutable),
            Just(LayoutStrategy::ReplicatedCentroids),
            Just(LayoutStrategy::ReadOnlyArena),
        ],
    ) {
        let data = dataset(seed, n, dims);
        let k = 1 + ((n.min(8) - 1) as f64 * k_frac) as usize;
        let serial = seed_serial(&data, k, &mut RngStream::new(seed)).unwrap();
        let cfg = ExecConfig::default().with_workers(workers).with_chunk_size(chunk).with_strategy(strategy);

        let mut tables = Vec::new();
        let par = Seeder::new(&data, k)
            .parallel(cfg)
            .observe(|r, t| tables.push((r, t.dsq().to_vec(), t.total())))
            .run(&mut RngStream::new(seed))
            .unwrap();
        prop_assert!(par.same_selection(&serial));

        let chosen = par.indices();
        let mut sorted = chosen.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), k);

        let mut prev: Option<Vec<f64>> = None;
        for (round, dsq, total) in &tables {
            for i in 0..n {
                let oracle = chosen[..*round]
                    .iter()
                    .map(|&c| squared_distance(data.point(i), data.point(c)).unwrap())
                    .fold(f64::INFINITY, f64::min);
                prop_assert_eq!(dsq[i].to_bits(), oracle.to_bits());
            }
            for &c in &chosen[..*round] {
                prop_assert_eq!(dsq[c], 0.0);
            }
            if let Some(p) = &prev {
                prop_assert!(dsq.iter().zip(p).all(|(a, b)| a <= b));
            }
            prop_assert!(*total >= 0.0 && total.is_finite());
            prev = Some(dsq.clone());
        }
        prop_assert_eq!(tables.len(), k - 1);
        prop_assert_eq!(par.per_round_total_weight.len(), k - 1);
    }

    #[test]
    fn seeding_is_reproducible(seed in any::<u64>(), n in 1usize..500) {
        let data = dataset(seed ^ 0x5eed, n, 2);
        let k = n.min(10);
        let cfg = ExecConfig::default().with_workers(3).with_chunk_size(50);
        let a = seed_parallel(&data, k, &mut RngStream::new(seed), &cfg).unwrap();
        let b = seed_parallel(&data, k, &mut RngStream::new(seed), &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
