#![allow(dead_code)]

use rand::Rng;
use stabkit_core::lattice::{kernel, negative_definite_witness};
use stabkit_core::quiver::corpus::{a2_corpus, a3_corpus, kronecker_corpus};
use stabkit_core::rational::{rat, ratio};
use stabkit_core::{CentralCharge, QComplex, QMatrix, QuadraticForm, Rational, Representation};

pub fn corpora() -> Vec<(&'static str, Vec<Representation>)> {
    vec![("A2", a2_corpus()), ("A3", a3_corpus()), ("K2", kronecker_corpus())]
}

/// `Z(eᵢ) ∈ H` with small rational coordinates.
pub fn random_charge<R: Rng>(rng: &mut R, rank: usize) -> CentralCharge {
    let values: Vec<QComplex> = (0..rank)
        .map(|_| {
            let den = rng.gen_range(1..=4);
            let im = rng.gen_range(0..=8);
            let re = if im == 0 { -rng.gen_range(1..=8) } else { rng.gen_range(-8..=8) };
            QComplex::new(ratio(re, den), ratio(im, den))
        })
        .collect();
    CentralCharge::from_values(&values)
}

/// Random `S` with `det S = ±1`.
pub fn unimodular<R: Rng>(rng: &mut R, m: usize) -> QMatrix {
    let mut s = QMatrix::identity(m);
    if m < 2 {
        return s;
    }
    for _ in 0..3 * m {
        let i = rng.gen_range(0..m);
        let j = (i + rng.gen_range(1..m)) % m;
        let k = rat(rng.gen_range(-1..=1));
        for c in 0..m {
            let v = &s[(i, c)] + &k * &s[(j, c)];
            s[(i, c)] = v;
        }
    }
    if rng.gen_bool(0.5) {
        for c in 0..m {
            let v = -s[(0, c)].clone();
            s[(0, c)] = v;
        }
    }
    s
}

fn small_positive<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.gen_range(1..=5), rng.gen_range(1..=3))
}

/// `Q = SᵀDS` with `D` having `pos` positive, `null` zero and the rest
/// negative entries, and `Z` of real rank 2, injective on the radical, with
/// `Q` negative definite on `Ker Z`. Needs `null + pos ≤ 2 ≤ m`.
pub fn random_pair<R: Rng>(rng: &mut R, m: usize, null: usize, pos: usize) -> (QuadraticForm, CentralCharge) {
    assert!(null + pos <= 2 && m >= 2 && null + pos <= m);
    loop {
        let mut d = Vec::with_capacity(m);
        d.extend((0..pos).map(|_| small_positive(rng)));
        d.extend((0..m - pos - null).map(|_| -small_positive(rng)));
        d.extend((0..null).map(|_| Rational::from_integer(0.into())));
        let s = unimodular(rng, m);
        let q = QuadraticForm::new(s.transpose().mul(&QMatrix::diagonal(&d)).unwrap().mul(&s).unwrap()).unwrap();

        let mut cols: Vec<QComplex> = (0..m).map(|_| QComplex::from_ints(rng.gen_range(-4..=4), rng.gen_range(-4..=4))).collect();
        // coordinates `pos..m-null` are negative; shrink them until the kernel is definite
        let mut delta = rat(1);
        for _ in 0..40 {
            let mut w = cols.clone();
            for c in w.iter_mut().take(m - null).skip(pos) {
                *c = c.scale(&delta);
            }
            let zw = CentralCharge::from_values(&w);
            let z = zw.compose_right(&s).unwrap();
            if z.real_rank() == 2 {
                let free = radical_injective(&q, &z);
                if free && negative_definite_witness(&q, &kernel(&z)).unwrap().is_none() {
                    return (q, z);
                }
            }
            delta /= rat(2);
            if delta < ratio(1, 1 << 20) {
                break;
            }
        }
        cols.clear();
    }
}

fn radical_injective(q: &QuadraticForm, z: &CentralCharge) -> bool {
    let rad = q.radical();
    if rad.is_empty() {
        return true;
    }
    let images: Vec<Vec<Rational>> = rad
        .iter()
        .map(|v| {
            let c = z.evaluate_vec(v);
            vec![c.re, c.im]
        })
        .collect();
    QMatrix::from_columns(&images).unwrap().rank() == rad.len()
}
