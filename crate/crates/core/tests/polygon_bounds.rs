mod common;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabkit_core::oracle::{box_classes, certified_form, check_polygon_bounds};
use stabkit_core::quiver::DEFAULT_BUDGET;
use stabkit_core::KernelData;

#[test]
fn polygon_bounds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pool: Vec<_> = common::corpora().into_iter().flat_map(|(_, c)| c).filter(|r| !r.is_zero()).collect();
    let mut violations = Vec::new();
    for _ in 0..1000 {
        let r = pool.choose(&mut rng).unwrap();
        let n = r.dims().len();
        let z = common::random_charge(&mut rng, n);
        let q = certified_form(&z, &box_classes(n, 2)).unwrap();
        let kd = KernelData::new(&q, &z).unwrap();
        let rep = check_polygon_bounds(r, &z, &kd, DEFAULT_BUDGET, 1e-9).unwrap();
        if !rep.all() {
            violations.push(rep.detail.unwrap());
        }
    }
    assert!(violations.is_empty(), "{violations:?}");
}
