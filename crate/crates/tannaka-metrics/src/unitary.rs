//! Bi-invariant metrics on the unitary group U(n).
//!
//! Both metrics are functions of the principal angles of `u* v` (the
//! eigenvalue arguments on the branch `(-pi, pi]`):
//!
//! * operator metric: `max_j 2 |sin(theta_j / 2)|`, the operator norm of
//!   `u - v`;
//! * arclength metric: `sqrt(sum_j theta_j^2)`, the Riemannian geodesic
//!   distance for the bi-invariant metric induced by the Frobenius inner
//!   product.
//!
//! The unitary length of `u` is its distance to the identity.

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, unitary_angles, polar_unitary, CMatrix};
use serde::{Deserialize, Serialize};

/// Largest supported matrix dimension.
pub const DIM_CAP: usize = 64;

/// Unitarity defect accepted without correction.
pub const TAU_UNITARY: f64 = 1e-10;

/// Largest unitarity defect that is silently re-projected onto the unitary
/// group; anything beyond is rejected.
pub const REUNITARIZE_MAX: f64 = 1e-7;

/// Which bi-invariant metric on U(n) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricChoice {
    Operator,
    Arclength,
}

impl std::fmt::Display for MetricChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricChoice::Operator => write!(f, "operator"),
            MetricChoice::Arclength => write!(f, "arclength"),
        }
    }
}

/// A validated unitary matrix.
///
/// Construction enforces the unitarity defect policy: defects up to
/// [`TAU_UNITARY`] are accepted as-is, defects up to [`REUNITARIZE_MAX`] are
/// corrected by polar projection, larger defects are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || n != m.ncols() {
            return Err(Error::DimMismatch { expected: n.max(1), got: m.ncols() });
        }
        if n > DIM_CAP {
            return Err(Error::DimTooLarge { dim: n, cap: DIM_CAP });
        }
        let defect = unitarity_defect(&m);
        if defect <= TAU_UNITARY {
            Ok(UnitaryMatrix { m })
        } else if defect <= REUNITARIZE_MAX {
            let p = polar_unitary(&m);
            let new_defect = unitarity_defect(&p);
            if new_defect <= TAU_UNITARY {
                Ok(UnitaryMatrix { m: p })
            } else {
                Err(Error::NotUnitary { defect: new_defect, limit: TAU_UNITARY })
            }
        } else {
            Err(Error::NotUnitary { defect, limit: REUNITARIZE_MAX })
        }
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix { m: CMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }
}

/// Principal angles between two unitaries: the eigenvalue arguments of
/// `u* v`, sorted by decreasing magnitude (ties: decreasing value).
pub fn principal_angles(u: &CMatrix, v: &CMatrix) -> Vec<f64> {
    let w = u.adjoint() * v;
    unitary_angles(&w)
}

fn d_op_from_angles(angles: &[f64]) -> f64 {
    angles
        .iter()
        .map(|t| 2.0 * (t / 2.0).sin().abs())
        .fold(0.0, f64::max)
}

fn d_arc_from_angles(angles: &[f64]) -> f64 {
    angles.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Operator-norm distance `||u - v||_op` between unitaries.
pub fn d_op(u: &CMatrix, v: &CMatrix) -> f64 {
    d_op_from_angles(&principal_angles(u, v))
}

/// Geodesic (arclength) distance between unitaries.
pub fn d_arc(u: &CMatrix, v: &CMatrix) -> f64 {
    d_arc_from_angles(&principal_angles(u, v))
}

/// Distance in the chosen metric.
pub fn distance(metric: MetricChoice, u: &CMatrix, v: &CMatrix) -> f64 {
    match metric {
        MetricChoice::Operator => d_op(u, v),
        MetricChoice::Arclength => d_arc(u, v),
    }
}

/// Distance computed from a precomputed angle list (shared by callers that
/// already have the principal angles).
pub fn distance_from_angles(metric: MetricChoice, angles: &[f64]) -> f64 {
    match metric {
        MetricChoice::Operator => d_op_from_angles(angles),
        MetricChoice::Arclength => d_arc_from_angles(angles),
    }
}

/// Length of a unitary: its distance to the identity.
pub fn unitary_length(metric: MetricChoice, u: &CMatrix) -> f64 {
    let angles = unitary_angles(u);
    distance_from_angles(metric, &angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        expm_skew_hermitian, frobenius_norm, gaussian_matrix, haar_unitary, max_abs,
        rng_for, C,
    };
    use std::f64::consts::PI;

    fn diag(entries: &[C]) -> CMatrix {
        CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
            if i == j { entries[i] } else { C::new(0.0, 0.0) }
        })
    }

    #[test]
    fn distances_on_the_standard_example() {
        // u = id, v = diag(i, -i): operator distance sqrt(2), arclength
        // distance pi / sqrt(2).
        let u = CMatrix::identity(2, 2);
        let v = diag(&[C::new(0.0, 1.0), C::new(0.0, -1.0)]);
        assert!((d_op(&u, &v) - 2.0f64.sqrt()).abs() < 1e-14);
        assert!((d_arc(&u, &v) - PI / 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lengths_of_minus_identity() {
        for n in [1usize, 2, 5] {
            let m = CMatrix::identity(n, n) * C::new(-1.0, 0.0);
            assert!((unitary_length(MetricChoice::Operator, &m) - 2.0).abs() < 1e-12);
            assert!(
                (unitary_length(MetricChoice::Arclength, &m) - PI * (n as f64).sqrt())
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn metrics_are_bi_invariant_and_symmetric() {
        let mut rng = rng_for(101, 0);
        for _ in 0..20 {
            let u = haar_unitary(4, &mut rng);
            let v = haar_unitary(4, &mut rng);
            let w = haar_unitary(4, &mut rng);
            for metric in [MetricChoice::Operator, MetricChoice::Arclength] {
                let d = distance(metric, &u, &v);
                let dl = distance(metric, &(&w * &u), &(&w * &v));
                let dr = distance(metric, &(&u * &w), &(&v * &w));
                let ds = distance(metric, &v, &u);
                assert!((d - dl).abs() < 1e-9, "left invariance: {d} vs {dl}");
                assert!((d - dr).abs() < 1e-9, "right invariance: {d} vs {dr}");
                assert!((d - ds).abs() < 1e-12, "symmetry: {d} vs {ds}");
            }
        }
    }

    #[test]
    fn triangle_inequality_sampled() {
        let mut rng = rng_for(102, 0);
        for _ in 0..30 {
            let u = haar_unitary(3, &mut rng);
            let v = haar_unitary(3, &mut rng);
            let w = haar_unitary(3, &mut rng);
            for metric in [MetricChoice::Operator, MetricChoice::Arclength] {
                let duw = distance(metric, &u, &w);
                let duv = distance(metric, &u, &v);
                let dvw = distance(metric, &v, &w);
                assert!(duw <= duv + dvw + 1e-9);
            }
        }
    }

    #[test]
    fn operator_distance_matches_operator_norm_of_difference() {
        let mut rng = rng_for(103, 0);
        for _ in 0..10 {
            let u = haar_unitary(4, &mut rng);
            let v = haar_unitary(4, &mut rng);
            let direct = crate::linalg::operator_norm(&(&u - &v));
            assert!((d_op(&u, &v) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn metric_comparison_bounds() {
        let mut rng = rng_for(104, 0);
        for n in [2usize, 4, 6] {
            for _ in 0..10 {
                let u = haar_unitary(n, &mut rng);
                let v = haar_unitary(n, &mut rng);
                let op = d_op(&u, &v);
                let arc = d_arc(&u, &v);
                assert!(op <= arc + 1e-12, "operator below arclength");
                assert!(
                    arc <= PI / 2.0 * (n as f64).sqrt() * op + 1e-9,
                    "arclength controlled by operator"
                );
            }
        }
    }

    #[test]
    fn arclength_is_geodesic_length() {
        let mut rng = rng_for(105, 0);
        for _ in 0..10 {
            let a = gaussian_matrix(4, 4, &mut rng);
            let mut x = (&a - a.adjoint()) * C::new(0.5, 0.0);
            // keep the spectrum of -ix inside (-pi, pi)
            let scale = 2.0 / frobenius_norm(&x).max(1.0);
            x *= C::new(scale, 0.0);
            let e = expm_skew_hermitian(&x);
            let expected = frobenius_norm(&x);
            assert!(
                (unitary_length(MetricChoice::Arclength, &e) - expected).abs() < 1e-9
            );
            // Additivity along the geodesic t -> exp(t x).
            let half = expm_skew_hermitian(&(&x * C::new(0.5, 0.0)));
            let d1 = d_arc(&CMatrix::identity(4, 4), &half);
            let d2 = d_arc(&half, &e);
            assert!((d1 + d2 - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn direct_sum_laws() {
        let mut rng = rng_for(106, 0);
        let (u1, v1) = (haar_unitary(2, &mut rng), haar_unitary(2, &mut rng));
        let (u2, v2) = (haar_unitary(3, &mut rng), haar_unitary(3, &mut rng));
        let us = crate::linalg::direct_sum_blocks(&[u1.clone(), u2.clone()]);
        let vs = crate::linalg::direct_sum_blocks(&[v1.clone(), v2.clone()]);
        let op = d_op(&us, &vs);
        assert!((op - d_op(&u1, &v1).max(d_op(&u2, &v2))).abs() < 1e-10);
        let arc = d_arc(&us, &vs);
        let expected = (d_arc(&u1, &v1).powi(2) + d_arc(&u2, &v2).powi(2)).sqrt();
        assert!((arc - expected).abs() < 1e-9);
    }

    #[test]
    fn unitary_lengths_are_subadditive() {
        let mut rng = rng_for(107, 0);
        for _ in 0..20 {
            let u = haar_unitary(3, &mut rng);
            let v = haar_unitary(3, &mut rng);
            for metric in [MetricChoice::Operator, MetricChoice::Arclength] {
                let luv = unitary_length(metric, &(&u * &v));
                let lu = unitary_length(metric, &u);
                let lv = unitary_length(metric, &v);
                assert!(luv <= lu + lv + 1e-9);
            }
        }
    }

    #[test]
    fn unitary_matrix_validation_policy() {
        let mut rng = rng_for(108, 0);
        let u = haar_unitary(4, &mut rng);
        // Clean matrix accepted unchanged.
        let w = UnitaryMatrix::new(u.clone()).unwrap();
        assert_eq!(w.matrix(), &u);
        // Small defect: re-unitarized.
        let noisy = &u + gaussian_matrix(4, 4, &mut rng) * C::new(1e-8, 0.0);
        let w = UnitaryMatrix::new(noisy.clone()).unwrap();
        assert!(unitarity_defect(w.matrix()) <= TAU_UNITARY);
        assert!(max_abs(&(w.matrix() - &u)) < 1e-6);
        // Large defect: rejected.
        let bad = &u * C::new(1.01, 0.0);
        assert!(matches!(
            UnitaryMatrix::new(bad),
            Err(Error::NotUnitary { .. })
        ));
        // Dimension cap.
        let huge = CMatrix::identity(DIM_CAP + 1, DIM_CAP + 1);
        assert!(matches!(
            UnitaryMatrix::new(huge),
            Err(Error::DimTooLarge { .. })
        ));
    }
}
