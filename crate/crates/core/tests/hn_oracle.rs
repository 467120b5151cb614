mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabkit_core::hn::{hn_filtration, hn_polygon, is_semistable};
use stabkit_core::oracle::greedy_hn;
use stabkit_core::quiver::DEFAULT_BUDGET;

#[test]
fn polygon_factors_match_greedy_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut compared = 0;
    for (name, corpus) in common::corpora() {
        for r in corpus.iter().filter(|r| !r.is_zero()) {
            for _ in 0..5 {
                let z = common::random_charge(&mut rng, r.dims().len());
                let f = hn_filtration(r, &z, DEFAULT_BUDGET).unwrap();
                let g = greedy_hn(r, &z, DEFAULT_BUDGET).unwrap();
                assert_eq!(f.factor_classes(), g, "{name} {:?} under {z:?}", r.dims());
                compared += 1;
            }
        }
    }
    assert!(compared > 3000);
}

/// The filtration is HN exactly when its factors are semistable, and then
/// the polygon vertices are the step charges.
#[test]
fn semistable_factors_iff_polygon_matches_filtration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (_, corpus) in common::corpora() {
        for r in corpus.iter().filter(|r| !r.is_zero()).step_by(3) {
            let z = common::random_charge(&mut rng, r.dims().len());
            let f = hn_filtration(r, &z, DEFAULT_BUDGET).unwrap();
            let classes = r.subobject_classes(DEFAULT_BUDGET).unwrap();
            let poly = hn_polygon(&classes, &z, &r.dimension_vector()).unwrap();
            let steps: Vec<_> = f.steps.iter().map(|s| z.evaluate(&s.class).unwrap()).collect();
            assert_eq!(poly.vertices, steps);
            for w in f.steps.windows(2) {
                let q = r.subquotient(&w[1].witness, &w[0].witness).unwrap();
                assert!(is_semistable(&q, &z, DEFAULT_BUDGET).unwrap());
            }
            // a single vertex path means semistable
            assert_eq!(poly.vertices.len() == 2, is_semistable(r, &z, DEFAULT_BUDGET).unwrap());
        }
    }
}
