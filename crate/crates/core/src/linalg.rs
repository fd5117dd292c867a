//! Dense matrix helpers shared by the manifolds.
//!
//! The matrix exponential is nalgebra's scaling-and-squaring Padé
//! implementation; the logarithm of a rotation is computed here by inverse
//! scaling and squaring (Denman–Beavers square roots, then the `atanh` series).

use nalgebra::DMatrix;

pub type Mat = DMatrix<f64>;

pub fn skew(a: &Mat) -> Mat {
    (a - a.transpose()) * 0.5
}

pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// `tr(AᵀB)`.
pub fn frobenius_inner(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn expm(a: &Mat) -> Mat {
    a.exp()
}

/// Principal square root by the Denman–Beavers iteration. Returns `None` if
/// an intermediate matrix is singular.
fn sqrtm_db(a: &Mat) -> Option<Mat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = Mat::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse()?;
        let zi = z.clone().try_inverse()?;
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * y.norm() {
            break;
        }
    }
    Some(y)
}

/// Principal logarithm of a matrix whose spectrum avoids the closed negative
/// real axis. `None` when the iteration breaks down (e.g. an eigenvalue at −1).
pub fn logm(a: &Mat) -> Option<Mat> {
    let n = a.nrows();
    let id = Mat::identity(n, n);
    let mut m = a.clone();
    let mut squarings = 0;
    while (&m - &id).norm() > 0.05 {
        m = sqrtm_db(&m)?;
        squarings += 1;
        if squarings > 60 {
            return None;
        }
    }
    // log M = 2 Σ X^{2k+1}/(2k+1), X = (M − I)(M + I)⁻¹
    let x = (&m - &id) * (&m + &id).try_inverse()?;
    let x2 = &x * &x;
    let mut term = x.clone();
    let mut sum = x.clone();
    for k in 1..60 {
        term = &term * &x2;
        let add = &term / (2 * k + 1) as f64;
        sum += &add;
        if add.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Some(sum * (2.0 * (1u64 << squarings) as f64))
}

/// Apply a scalar function to a symmetric matrix through its eigendecomposition.
pub fn sym_fn(a: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let eig = sym(a).symmetric_eigen();
    let d = eig.eigenvalues.map(f);
    &eig.eigenvectors * Mat::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn sym_spectral_norm(a: &Mat) -> f64 {
    sym(a).symmetric_eigenvalues().amax()
}

/// Orthonormalize the columns of `a` (thin QR with a non-negative diagonal).
pub fn orthonormalize(a: &Mat) -> Mat {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// sinc(x) = sin(x)/x, continuous at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// sinh(x)/x, continuous at zero.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot_z(theta: f64) -> Mat {
        let (s, c) = theta.sin_cos();
        Mat::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
    }

    #[test]
    fn logm_of_rotation() {
        for theta in [1e-9, 0.3, 2.0, 3.1] {
            let l = logm(&rot_z(theta)).unwrap();
            assert!((l[(1, 0)] - theta).abs() < 1e-12 * theta.max(1.0), "{theta} {l}");
            assert!((l[(0, 1)] + theta).abs() < 1e-12 * theta.max(1.0));
            assert!((expm(&l) - rot_z(theta)).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_matches_taylor_series() {
        let a = Mat::from_row_slice(3, 3, &[0.0, -0.4, 0.2, 0.4, 0.0, -0.7, -0.2, 0.7, 0.0]);
        let mut term = Mat::identity(3, 3);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &a / k as f64;
            sum += &term;
        }
        assert!((expm(&a) - sum).norm() < 1e-14);
    }

    #[test]
    fn sinc_is_smooth() {
        for x in [0.0f64, 1e-5, 0.99e-4, 1.01e-4, 0.5] {
            let reference = if x == 0.0 { 1.0 } else { x.sin() / x };
            assert!((sinc(x) - reference).abs() < 1e-15);
            let reference = if x == 0.0 { 1.0 } else { x.sinh() / x };
            assert!((sinhc(x) - reference).abs() < 1e-15);
        }
    }
}
