//! Random configurations for tests, registration checks, and the
//! verification battery: Gaussian vector tuples, Gram matrices, and
//! uniformly distributed rotations.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::euler::RotationMatrix;
use crate::linalg::{gram, GramMatrix, VectorTuple};

/// A vector of independent standard normal samples.
pub fn standard_normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// A k-tuple of vectors in R^m with independent standard normal
/// coordinates.
pub fn random_vector_tuple<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> VectorTuple {
    VectorTuple::from_flat(k, m, standard_normal_vector(rng, k * m))
}

/// The Gram matrix of a random Gaussian tuple: a random positive
/// semidefinite matrix of rank min(k, m).
pub fn random_gram<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> GramMatrix {
    gram(&random_vector_tuple(k, m, rng))
}

/// A uniformly random unit vector in R^m.
pub fn random_unit_vector<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = standard_normal_vector(rng, m);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A uniformly random special orthogonal matrix (rotation).
///
/// Gaussian matrix, modified Gram-Schmidt on the columns, the sign of
/// each diagonal pivot fixed so the distribution is the uniform one, and
/// a final column flip if the determinant came out negative.
// Index loops read two columns of the same buffer at once.
#[allow(clippy::needless_range_loop)]
pub fn random_rotation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> RotationMatrix {
    assert!(m >= 1);
    'redraw: loop {
        let mut cols: Vec<Vec<f64>> = (0..m).map(|_| standard_normal_vector(rng, m)).collect();
        for c in 0..m {
            for p in 0..c {
                let proj: f64 = (0..m).map(|r| cols[c][r] * cols[p][r]).sum();
                for r in 0..m {
                    cols[c][r] -= proj * cols[p][r];
                }
            }
            let norm = cols[c].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue 'redraw;
            }
            for x in cols[c].iter_mut() {
                *x /= norm;
            }
        }
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|r| (0..m).map(|c| cols[c][r]).collect())
            .collect();
        let mut a = RotationMatrix::from_rows(rows).expect("finite by construction");
        if a.det() < 0.0 {
            for r in 0..m {
                let flipped = -a.get(r, m - 1);
                a.set(r, m - 1, flipped);
            }
        }
        return a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rotations_are_special_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..200 {
            let m = rng.gen_range(1..=6);
            let q = random_rotation(m, &mut rng);
            assert!(q.orthonormality_defect() < 1e-12);
            assert!((q.det() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_vectors_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let m = rng.gen_range(1..=8);
            let v = random_unit_vector(m, &mut rng);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_grams_are_in_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let m = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=m);
            let g = random_gram(k, m, &mut rng);
            assert!(crate::linalg::is_in_image(&g, m, crate::linalg::DEFAULT_TOL).unwrap());
        }
    }
}
