use frugal_core::forest::{ForestConfig, RandomForest};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

/// A tree read back from the text dump: per node either a split or leaf counts.
enum Parsed {
    Split(usize, f64, usize, usize),
    Leaf(u64, u64),
}

fn parse_dump(dump: &str) -> Vec<Vec<Parsed>> {
    let mut trees: Vec<Vec<Parsed>> = Vec::new();
    for line in dump.lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f[0] {
            "forest" => {}
            "tree" => trees.push(Vec::new()),
            "node" => {
                let id: usize = f[1].parse().unwrap();
                let tree = trees.last_mut().unwrap();
                assert_eq!(id, tree.len(), "nodes are listed in id order");
                tree.push(match f[2] {
                    "split" => Parsed::Split(
                        f[3].parse().unwrap(),
                        f[4].parse().unwrap(),
                        f[5].parse().unwrap(),
                        f[6].parse().unwrap(),
                    ),
                    "leaf" => Parsed::Leaf(f[3].parse().unwrap(), f[4].parse().unwrap()),
                    other => panic!("unknown node kind {other}"),
                });
            }
            other => panic!("unknown record {other}"),
        }
    }
    trees
}

/// Class-1 vote fraction computed by walking the parsed trees.
fn oracle_p1(trees: &[Vec<Parsed>], row: &[f64]) -> f64 {
    let mut ones = 0;
    for t in trees {
        let mut id = 0;
        loop {
            match t[id] {
                Parsed::Split(f, thr, l, r) => id = if row[f] <= thr { l } else { r },
                Parsed::Leaf(c0, c1) => {
                    if c1 > c0 {
                        ones += 1;
                    }
                    break;
                }
            }
        }
    }
    ones as f64 / trees.len() as f64
}

fn xor_data() -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let u = Uniform::new(-1.0, 1.0);
    let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![u.sample(&mut rng), u.sample(&mut rng)]).collect();
    let labels = rows.iter().map(|r| (r[0] > 0.0) != (r[1] > 0.0)).collect();
    (rows, labels)
}

#[test]
fn predictions_match_an_independent_reading_of_the_dump() {
    let (rows, labels) = xor_data();
    let cfg = ForestConfig {
        n_trees: 25,
        seed: 9,
        ..ForestConfig::default()
    };
    let forest = RandomForest::fit(&cfg, &rows, &labels).unwrap();
    let trees = parse_dump(&forest.dump());
    assert_eq!(trees.len(), 25);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = Uniform::new(-1.5, 1.5);
    let probes = rows
        .iter()
        .cloned()
        .chain((0..200).map(|_| vec![u.sample(&mut rng), u.sample(&mut rng)]));
    for row in probes {
        let p = forest.predict_proba(&row).unwrap();
        assert_eq!(p.p_class1, oracle_p1(&trees, &row));
    }
}

#[test]
fn every_leaf_holds_samples_and_splits_separate() {
    let (rows, labels) = xor_data();
    let forest = RandomForest::fit(&ForestConfig::default(), &rows, &labels).unwrap();
    for t in parse_dump(&forest.dump()) {
        for n in &t {
            match *n {
                Parsed::Leaf(c0, c1) => assert!(c0 + c1 >= 1),
                Parsed::Split(_, thr, l, r) => {
                    assert!(thr.is_finite());
                    assert!(l < t.len() && r < t.len() && l != r);
                }
            }
        }
    }
}

fn two_clusters(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2 == 1;
        let centre = if class { 2.5 } else { -2.5 };
        rows.push(vec![
            centre + noise.sample(&mut rng),
            centre + noise.sample(&mut rng),
            noise.sample(&mut rng),
        ]);
        labels.push(class);
    }
    (rows, labels)
}

#[test]
fn two_clusters_held_out_accuracy() {
    let (train_x, train_y) = two_clusters(200, 1);
    let (test_x, test_y) = two_clusters(200, 2);
    let forest = RandomForest::fit(&ForestConfig::default().with_seed(3), &train_x, &train_y).unwrap();
    let correct = test_x
        .iter()
        .zip(&test_y)
        .filter(|(x, &y)| forest.predict_label(x).unwrap() == y)
        .count();
    assert!(correct as f64 / 200.0 >= 0.9, "accuracy {}", correct as f64 / 200.0);
}

#[test]
fn seeded_fits_are_bit_identical() {
    let (x, y) = two_clusters(100, 5);
    let cfg = ForestConfig::default().with_seed(77);
    let a = RandomForest::fit(&cfg, &x, &y).unwrap();
    let b = RandomForest::fit(&cfg, &x, &y).unwrap();
    assert_eq!(a.dump(), b.dump());
    for row in &x {
        assert_eq!(a.predict_proba(row).unwrap(), b.predict_proba(row).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn probabilities_are_a_distribution(
        data in prop::collection::vec((prop::array::uniform3(-10.0f64..10.0), any::<bool>()), 1..40),
        probe in prop::array::uniform3(-20.0f64..20.0),
        seed in any::<u64>(),
    ) {
        let rows: Vec<Vec<f64>> = data.iter().map(|(r, _)| r.to_vec()).collect();
        let labels: Vec<bool> = data.iter().map(|&(_, l)| l).collect();
        let cfg = ForestConfig { n_trees: 15, seed, ..ForestConfig::default() };
        let f = RandomForest::fit(&cfg, &rows, &labels).unwrap();
        let p = f.predict_proba(&probe).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.p_class0));
        prop_assert!((0.0..=1.0).contains(&p.p_class1));
        prop_assert_eq!(p.p_class0 + p.p_class1, 1.0);
        prop_assert!(p.confidence() >= 0.5);
    }
}
