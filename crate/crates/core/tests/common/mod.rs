#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use spherecalc::intlattice::IntersectionForm;
use spherecalc::matrix::IntMatrix;

/// A random element of GL_n(Z) as a product of elementary matrices.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, steps: usize) -> IntMatrix {
    let mut p = IntMatrix::identity(n);
    if n == 0 {
        return p;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 if i != j => {
                let c = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
                for r in 0..n {
                    let v = &p[(r, j)] * &c;
                    p[(r, i)] += v;
                }
            }
            1 => {
                for r in 0..n {
                    p[(r, i)] = -p[(r, i)].clone();
                }
            }
            _ => {
                for r in 0..n {
                    let a = p[(r, i)].clone();
                    p[(r, i)] = p[(r, j)].clone();
                    p[(r, j)] = a;
                }
            }
        }
    }
    p
}

/// A random unimodular symmetric form of rank `n`, built from ±1 and
/// hyperbolic blocks and conjugated by a random unimodular matrix.
pub fn random_unimodular_form<R: Rng>(rng: &mut R, n: usize) -> IntersectionForm {
    let mut q = IntersectionForm::empty();
    while q.rank() < n {
        let block = if n - q.rank() >= 2 && rng.gen_bool(0.4) {
            IntersectionForm::hyperbolic()
        } else if rng.gen_bool(0.5) {
            IntersectionForm::diagonal([1])
        } else {
            IntersectionForm::diagonal([-1])
        };
        q = q.block_sum(&block);
    }
    let p = random_unimodular(rng, n, 3 * n + 2);
    q.congruent_by(&p)
}

/// Leading principal minors D_1..D_n.
pub fn leading_minors(m: &IntMatrix) -> Vec<BigInt> {
    (1..=m.rows())
        .map(|k| {
            let rows = (0..k).map(|r| m.row(r)[..k].to_vec()).collect();
            IntMatrix::from_rows(rows).unwrap().determinant()
        })
        .collect()
}
