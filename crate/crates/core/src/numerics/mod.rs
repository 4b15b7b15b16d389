//! Scalar numerics shared by every model: complex arithmetic, the closed-form
//! 2×2 eigenvalue solver and zero-order-hold discretisation of diagonal
//! (scalar) continuous-time systems.

mod rng;

pub use num_complex::Complex64;
pub use rng::{log_uniform_sample, streams, Rng};

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Row-major 2×2 real matrix.
pub type Mat2 = [[f64; 2]; 2];

/// Both roots of `λ² − tr(m)·λ + det(m) = 0`, sorted by `(re, im)` descending.
///
/// The discriminant is formed as `(m00 − m11)² + 4·m01·m10`, which is exact
/// for the antisymmetric `[[x, −y], [y, x]]` form of a complex scalar, so its
/// eigenvalues come back as `x ± iy` without rounding.
pub fn eig_2x2(m: &Mat2) -> Result<[Complex64; 2]> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite matrix entry in {m:?}")));
    }
    let [[p, q], [r, s]] = *m;
    let half_tr = 0.5 * (p + s);
    let diff = p - s;
    let disc = diff * diff + 4.0 * q * r;
    let mut roots = if disc < 0.0 {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(half_tr, im), Complex64::new(half_tr, -im)]
    } else if disc == 0.0 {
        [Complex64::new(half_tr, 0.0); 2]
    } else {
        let sq = disc.sqrt();
        let tr = p + s;
        let det = p * s - q * r;
        // larger-magnitude root first, the other from Vieta to avoid cancellation
        let big = 0.5 * (tr + tr.signum() * sq);
        let small = if big != 0.0 { det / big } else { 0.5 * (tr - sq) };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    };
    roots.sort_by(cmp_desc);
    Ok(roots)
}

fn cmp_desc(a: &Complex64, b: &Complex64) -> Ordering {
    b.re
        .partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

/// Real 2×2 form `[[re, −im], [im, re]]` of multiplication by a complex scalar.
pub fn complex_as_mat2(a: Complex64) -> Mat2 {
    [[a.re, -a.im], [a.im, a.re]]
}

/// Zero-order hold for a scalar system `x' = a·x + b·u`:
/// `a_bar = exp(a·dt)`, `b_bar = (a_bar − 1)/a · b`.
pub fn zoh_discretize_diag(a: Complex64, b: Complex64, dt: f64) -> Result<(Complex64, Complex64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::ParamRange(format!("dt must be positive and finite, got {dt}")));
    }
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularTransition);
    }
    let a_bar = (a * dt).exp();
    let b_bar = (a_bar - 1.0) / a * b;
    Ok((a_bar, b_bar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_triangular() {
        let e = eig_2x2(&[[0.9, -0.1], [0.0, 0.8]]).unwrap();
        assert!((e[0] - c(0.9, 0.0)).norm() < 1e-15);
        assert!((e[1] - c(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eig_complex_pair() {
        // disc = 4·1·(−0.1) = −0.4, im = sqrt(0.4)/2
        let e = eig_2x2(&[[0.9, -0.1], [1.0, 0.9]]).unwrap();
        let im = 0.4f64.sqrt() / 2.0;
        assert!((e[0] - c(0.9, im)).norm() < 1e-15);
        assert!((e[1] - c(0.9, -im)).norm() < 1e-15);
        assert!((im - 0.31623).abs() < 1e-5);
    }

    #[test]
    fn eig_identity_duplicated() {
        let e = eig_2x2(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(e, [c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn eig_rejects_nan() {
        assert!(eig_2x2(&[[f64::NAN, 0.0], [0.0, 1.0]]).is_err());
        assert!(eig_2x2(&[[1.0, f64::INFINITY], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn zoh_closed_form() {
        let (ab, bb) = zoh_discretize_diag(c(-1.0, 0.0), c(1.0, 0.0), 2f64.ln()).unwrap();
        assert!((ab - c(0.5, 0.0)).norm() <= 1e-15);
        assert!((bb - c(0.5, 0.0)).norm() <= 1e-15);
    }

    #[test]
    fn zoh_zero_input() {
        let (_, bb) = zoh_discretize_diag(c(-1.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(bb, c(0.0, 0.0));
    }

    #[test]
    fn zoh_complex_half_turn() {
        let (ab, _) =
            zoh_discretize_diag(c(-0.5, std::f64::consts::PI), c(1.0, 0.0), 1.0).unwrap();
        assert!((ab.re + (-0.5f64).exp()).abs() < 1e-15);
        assert!(ab.im.abs() < 1e-15);
    }

    #[test]
    fn zoh_singular() {
        assert!(matches!(
            zoh_discretize_diag(c(0.0, 0.0), c(1.0, 0.0), 1.0),
            Err(Error::SingularTransition)
        ));
        assert!(zoh_discretize_diag(c(-1.0, 0.0), c(1.0, 0.0), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn zoh_is_stable(re in -50.0f64..-1e-6, im in -10.0f64..10.0, dt in 1e-4f64..10.0) {
            let (ab, _) = zoh_discretize_diag(c(re, im), c(1.0, 0.0), dt).unwrap();
            prop_assert!(ab.norm() < 1.0);
        }

        #[test]
        fn antisymmetric_eigs_exact(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let e = eig_2x2(&complex_as_mat2(c(re, im))).unwrap();
            let hi = c(re, im.abs());
            let lo = c(re, -im.abs());
            prop_assert_eq!(e, [hi, lo]);
        }

        #[test]
        fn eig_satisfies_characteristic(p in -2.0f64..2.0, q in -2.0f64..2.0, r in -2.0f64..2.0, s in -2.0f64..2.0) {
            let m = [[p, q], [r, s]];
            let tr = p + s;
            let det = p * s - q * r;
            for l in eig_2x2(&m).unwrap() {
                let res = l * l - l * tr + det;
                prop_assert!(res.norm() < 1e-9, "residual {}", res.norm());
            }
        }
    }
}
