//! Exhaustive lists of small representations, used as test corpora.

use super::{FpMatrix, Quiver, Representation};

/// Every representation (not up to isomorphism) with `dims[v] ≤ max_dim`,
/// ordered by dimension vector and then by map entries.
pub fn all_representations(quiver: &Quiver, q: u8, max_dim: usize) -> Vec<Representation> {
    let n = quiver.vertex_count();
    let mut out = Vec::new();
    let mut dims = vec![0usize; n];
    loop {
        push_all_maps(quiver, q, &dims, &mut out);
        // odometer over dimension vectors
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if dims[i] < max_dim {
                dims[i] += 1;
                dims[i + 1..].iter_mut().for_each(|d| *d = 0);
                break;
            }
        }
    }
}

fn push_all_maps(quiver: &Quiver, q: u8, dims: &[usize], out: &mut Vec<Representation>) {
    let shapes: Vec<(usize, usize)> = quiver.arrows().iter().map(|&(s, t)| (dims[t], dims[s])).collect();
    let entries: usize = shapes.iter().map(|(r, c)| r * c).sum();
    let total = (q as u64).pow(entries as u32);
    for code in 0..total {
        let mut c = code;
        let maps = shapes
            .iter()
            .map(|&(r, k)| {
                let mut m = FpMatrix::zeros(q, r, k);
                for i in 0..r {
                    for j in 0..k {
                        m.set(i, j, (c % q as u64) as u8);
                        c /= q as u64;
                    }
                }
                m
            })
            .collect();
        out.push(Representation::new(quiver.clone(), q, dims.to_vec(), maps).expect("shapes match"));
    }
}

pub fn a2_corpus() -> Vec<Representation> {
    all_representations(&Quiver::linear_a(2), 2, 2)
}

pub fn a3_corpus() -> Vec<Representation> {
    all_representations(&Quiver::linear_a(3), 2, 2)
}

pub fn kronecker_corpus() -> Vec<Representation> {
    all_representations(&Quiver::kronecker(2), 2, 2)
}
