//! Complex linear algebra helpers: unitary eigendecomposition, matrix
//! exponentials of skew-Hermitian matrices, Haar-random unitaries, and small
//! utilities shared by the metric code.
//!
//! Unitary matrices are normal, so they are diagonalized here through their
//! Hermitian/skew-Hermitian parts `H = (w + w*)/2` and `K = (w - w*)/(2i)`,
//! which commute when `w` is unitary. Eigen-angles are recovered as
//! `atan2(k, h)`, which keeps angle values accurate to machine precision even
//! when eigenvalues of `H` are clustered (the angle error is second order in
//! the cluster splitting error).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub type C = Complex<f64>;
pub type CMatrix = DMatrix<C>;
pub type CVector = DVector<C>;

/// Deterministic random generator used everywhere in this crate.
///
/// All randomized routines take a `(seed, stream)` pair and derive their
/// generator through this single function, so results are reproducible for a
/// fixed seed no matter how work is split across threads.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Wrap an angle to the branch `(-pi, pi]`.
///
/// Values already inside the branch are returned bit-exactly, which matters
/// for closed-form comparisons on circle groups. `-pi` maps to `+pi`.
pub fn wrap_angle(t: f64) -> f64 {
    if t > -PI && t <= PI {
        return t;
    }
    let mut x = t % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Maximum absolute entry of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |(m - id)| entrywise` against the identity of matching size.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let id = CMatrix::identity(n, n);
    max_abs(&(gram - id))
}

/// Eigendecomposition of a Hermitian matrix, returning `(values, vectors)`
/// with orthonormal eigenvector columns. The input is symmetrized first to
/// shed roundoff asymmetry.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_max_eigenvalue(m: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Operator (spectral) norm of a complex matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    hermitian_max_eigenvalue(&gram).max(0.0).sqrt()
}

/// Frobenius (Hilbert–Schmidt) norm of a complex matrix.
pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Project a matrix with a small unitarity defect back onto the unitary
/// group via the polar decomposition `u = m (m* m)^{-1/2}`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let gram = m.adjoint() * m;
    let (vals, vecs) = hermitian_eigen(&gram);
    let inv_sqrt = CMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            C::new(1.0 / vals[i].max(1e-300).sqrt(), 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    m * vecs.clone() * inv_sqrt * vecs.adjoint()
}

/// One eigenpair of a unitary matrix: the angle `theta` with eigenvalue
/// `exp(i theta)`, and an orthonormal eigenvector.
#[derive(Debug, Clone)]
pub struct UnitaryEigenPair {
    pub angle: f64,
    pub vector: CVector,
}

fn is_exactly_diagonal(w: &CMatrix) -> bool {
    let n = w.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)] != C::new(0.0, 0.0) {
                return false;
            }
        }
    }
    true
}

fn branch_fix(theta: f64) -> f64 {
    if theta == -PI {
        PI
    } else {
        theta
    }
}

/// Eigen-angles and eigenvectors of a unitary matrix `w`, sorted by
/// decreasing `|angle|` (ties broken by decreasing angle, so `+pi` precedes
/// `-pi + eps` and eigenvalues exactly at `-1` report the angle `+pi`).
///
/// Angles live on the branch `(-pi, pi]`.
pub fn unitary_eigen(w: &CMatrix) -> Vec<UnitaryEigenPair> {
    let n = w.nrows();
    assert_eq!(n, w.ncols(), "unitary_eigen needs a square matrix");
    let mut pairs: Vec<UnitaryEigenPair> = Vec::with_capacity(n);

    if is_exactly_diagonal(w) {
        // Exact fast path: diagonal unitaries (characters of abelian groups,
        // padded direct sums of characters) keep bit-exact angles.
        for i in 0..n {
            let mut v = CVector::zeros(n);
            v[i] = C::new(1.0, 0.0);
            let z = w[(i, i)];
            let theta = if z.im == 0.0 && z.re < 0.0 {
                PI
            } else {
                branch_fix(z.arg())
            };
            pairs.push(UnitaryEigenPair {
                angle: theta,
                vector: v,
            });
        }
    } else {
        // h and k are commuting Hermitian matrices with w = h + i k,
        // h^2 + k^2 = id. Diagonalize h, then split clusters of h using k.
        let h = (w + w.adjoint()) * C::new(0.5, 0.0);
        let k = (w - w.adjoint()) * C::new(0.0, -0.5);
        let (hvals, hvecs) = hermitian_eigen(&h);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| hvals[b].partial_cmp(&hvals[a]).unwrap());

        let cluster_tol = 1e-8;
        let mut idx = 0;
        while idx < n {
            let mut end = idx + 1;
            while end < n && (hvals[order[end - 1]] - hvals[order[end]]).abs() <= cluster_tol {
                end += 1;
            }
            let cols: Vec<usize> = order[idx..end].to_vec();
            if cols.len() == 1 {
                let q = hvecs.column(cols[0]).into_owned();
                let kq = &k * &q;
                let kv = q.dotc(&kq).re;
                let hv = hvals[cols[0]];
                let theta = if kv == 0.0 && hv < 0.0 {
                    PI
                } else {
                    branch_fix(kv.atan2(hv))
                };
                pairs.push(UnitaryEigenPair {
                    angle: theta,
                    vector: q,
                });
            } else {
                let c = cols.len();
                let mut qc = CMatrix::zeros(n, c);
                for (j, &col) in cols.iter().enumerate() {
                    qc.set_column(j, &hvecs.column(col));
                }
                let kc = qc.adjoint() * &k * &qc;
                let (kvals, kvecs) = hermitian_eigen(&kc);
                for j in 0..c {
                    let v = &qc * kvecs.column(j).into_owned();
                    let hv = v.dotc(&(&h * &v)).re;
                    let kv = kvals[j];
                    let theta = if kv == 0.0 && hv < 0.0 {
                        PI
                    } else {
                        branch_fix(kv.atan2(hv))
                    };
                    pairs.push(UnitaryEigenPair { angle: theta, vector: v });
                }
            }
            idx = end;
        }
    }

    pairs.sort_by(|a, b| {
        b.angle
            .abs()
            .partial_cmp(&a.angle.abs())
            .unwrap()
            .then(b.angle.partial_cmp(&a.angle).unwrap())
    });
    pairs
}

/// Eigen-angles only, sorted as in [`unitary_eigen`].
pub fn unitary_angles(w: &CMatrix) -> Vec<f64> {
    if w.nrows() == 1 {
        let z = w[(0, 0)];
        let theta = if z.im == 0.0 && z.re < 0.0 {
            PI
        } else {
            branch_fix(z.arg())
        };
        return vec![theta];
    }
    unitary_eigen(w).into_iter().map(|p| p.angle).collect()
}

/// Matrix exponential of a skew-Hermitian matrix (`x* = -x`), computed by
/// diagonalizing the Hermitian matrix `-i x`.
pub fn expm_skew_hermitian(x: &CMatrix) -> CMatrix {
    let h = x * C::new(0.0, -1.0);
    let (vals, vecs) = hermitian_eigen(&h);
    let n = vals.len();
    let phases = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C::new(vals[i].cos(), vals[i].sin())
        } else {
            C::new(0.0, 0.0)
        }
    });
    &vecs * phases * vecs.adjoint()
}

/// Standard complex Gaussian matrix (independent `N(0, 1/2) + i N(0, 1/2)`
/// entries).
pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = 0.5f64.sqrt();
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C::new(re * scale, im * scale)
    })
}

/// Haar-distributed random unitary matrix (Ginibre + QR with the canonical
/// phase correction).
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let z = gaussian_matrix(n, n, rng);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            C::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Block-diagonal direct sum of square matrices.
pub fn direct_sum_blocks(blocks: &[CMatrix]) -> CMatrix {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(total, total);
    let mut off = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((off, off), (d, d)).copy_from(b);
        off += d;
    }
    out
}
