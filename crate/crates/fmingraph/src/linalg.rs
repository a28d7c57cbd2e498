//! Block-tridiagonal direct solve for the Newton systems of the ball solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves the block-tridiagonal system with diagonal blocks `diag[i]`,
/// sub-diagonal blocks `lower[i]` (coupling row block i to column block i-1,
/// so `lower[0]` is unused and may be empty) and super-diagonal blocks
/// `upper[i]` (row block i to column block i+1, last one unused). Block sizes
/// may vary per row. Forward elimination with dense LU pivoting per block.
pub fn block_thomas(
    lower: &[DMatrix<f64>],
    diag: &[DMatrix<f64>],
    upper: &[DMatrix<f64>],
    rhs: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let n = diag.len();
    assert!(n > 0 && lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c_prime: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let mut d_prime: Vec<DVector<f64>> = Vec::with_capacity(n);

    let lu0 = diag[0].clone().lu();
    c_prime.push(
        lu0.solve(&upper[0])
            .ok_or_else(|| Error::NoConvergence("singular leading Newton block".into()))?,
    );
    d_prime.push(
        lu0.solve(&rhs[0])
            .ok_or_else(|| Error::NoConvergence("singular leading Newton block".into()))?,
    );

    for i in 1..n {
        let denom = &diag[i] - &lower[i] * &c_prime[i - 1];
        let lu = denom.lu();
        let r = &rhs[i] - &lower[i] * &d_prime[i - 1];
        d_prime.push(lu.solve(&r).ok_or_else(|| {
            Error::NoConvergence(format!("singular Newton block at ring {i}"))
        })?);
        if i + 1 < n {
            c_prime.push(lu.solve(&upper[i]).ok_or_else(|| {
                Error::NoConvergence(format!("singular Newton block at ring {i}"))
            })?);
        } else {
            c_prime.push(DMatrix::zeros(0, 0));
        }
    }

    let mut x = vec![DVector::zeros(0); n];
    x[n - 1] = d_prime[n - 1].clone();
    for i in (0..n - 1).rev() {
        x[i] = &d_prime[i] - &c_prime[i] * &x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_dense_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        // mixed block sizes: 1, 3, 3, 2
        let sizes = [1usize, 3, 3, 2];
        let total: usize = sizes.iter().sum();
        let mut dense = DMatrix::<f64>::zeros(total, total);
        let offs: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let mut lower = Vec::new();
        let mut diag = Vec::new();
        let mut upper = Vec::new();
        for i in 0..sizes.len() {
            let mut d = DMatrix::from_fn(sizes[i], sizes[i], |_, _| rng.gen_range(-1.0..1.0));
            for k in 0..sizes[i] {
                d[(k, k)] += 5.0; // diagonally dominant
            }
            dense.view_mut((offs[i], offs[i]), (sizes[i], sizes[i])).copy_from(&d);
            diag.push(d);
            if i > 0 {
                let l = DMatrix::from_fn(sizes[i], sizes[i - 1], |_, _| rng.gen_range(-1.0..1.0));
                dense.view_mut((offs[i], offs[i - 1]), (sizes[i], sizes[i - 1])).copy_from(&l);
                lower.push(l);
            } else {
                lower.push(DMatrix::zeros(0, 0));
            }
            if i + 1 < sizes.len() {
                let u = DMatrix::from_fn(sizes[i], sizes[i + 1], |_, _| rng.gen_range(-1.0..1.0));
                dense.view_mut((offs[i], offs[i + 1]), (sizes[i], sizes[i + 1])).copy_from(&u);
                upper.push(u);
            } else {
                upper.push(DMatrix::zeros(0, 0));
            }
        }
        let rhs_full = DVector::from_fn(total, |k, _| (k as f64 * 0.37).sin());
        let rhs: Vec<DVector<f64>> = (0..sizes.len())
            .map(|i| rhs_full.rows(offs[i], sizes[i]).into_owned())
            .collect();
        let x = block_thomas(&lower, &diag, &upper, &rhs).unwrap();
        let x_dense = dense.lu().solve(&rhs_full).unwrap();
        for i in 0..sizes.len() {
            for k in 0..sizes[i] {
                assert!((x[i][k] - x_dense[offs[i] + k]).abs() < 1e-11);
            }
        }
    }
}
