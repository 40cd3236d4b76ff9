//! Lipschitz seminorms on matrix algebras.
//!
//! An irreducible unitary representation `rho` on `V` turns the matrix
//! algebra `End(V)` into a quantum metric space: the seminorm
//!
//! ```text
//! L_rho(a) = sup over g != e of ||rho_g a - a rho_g|| / l(g)
//! ```
//!
//! vanishes exactly on the scalars when `rho` is irreducible. This module
//! evaluates `L_rho` under either the Hilbert-Schmidt or the operator norm
//! and bundles a comparison harness that tabulates the seminorms of two
//! representations side by side with their representation distance — raw
//! data for studying how the two geometries relate; no inequality between
//! them is asserted.

use crate::dual::{dreps, DrepsOptions, DrepsOutcome};
use crate::error::{Error, Result};
use crate::group::LengthFunction;
use crate::linalg::{frobenius_norm, gaussian_matrix, operator_norm, rng_for, CMatrix};
use crate::rep::UnitaryRep;
use crate::unitary::MetricChoice;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which matrix norm measures the commutators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormFlag {
    HilbertSchmidt,
    Operator,
}

impl std::fmt::Display for NormFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormFlag::HilbertSchmidt => write!(f, "hilbert-schmidt"),
            NormFlag::Operator => write!(f, "operator"),
        }
    }
}

fn matrix_norm(flag: NormFlag, m: &CMatrix) -> f64 {
    match flag {
        NormFlag::HilbertSchmidt => frobenius_norm(m),
        NormFlag::Operator => operator_norm(m),
    }
}

/// An element of the matrix algebra of a representation, tagged with the
/// norm used to measure it.
#[derive(Debug, Clone)]
pub struct MatrixAlgebraElement {
    m: CMatrix,
    norm: NormFlag,
}

impl MatrixAlgebraElement {
    /// Wrap a square matrix with finite entries.
    pub fn new(m: CMatrix, norm: NormFlag) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "algebra elements are square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "algebra element has non-finite entries".into(),
            ));
        }
        Ok(MatrixAlgebraElement { m, norm })
    }

    pub fn identity(dim: usize, norm: NormFlag) -> Self {
        MatrixAlgebraElement { m: CMatrix::identity(dim, dim), norm }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn norm_flag(&self) -> NormFlag {
        self.norm
    }
}

/// `max over g != e of ||[rho_g, a]|| / l(g)` in the element's norm.
///
/// Terms with `l(g)` infinite drop out (the ratio tends to zero); `l` must
/// be a genuine length, so no other denominator vanishes.
pub fn lip_norm(rho: &UnitaryRep, a: &MatrixAlgebraElement, l: &LengthFunction) -> Result<f64> {
    let group = rho.group();
    if l.values().len() != group.order() {
        return Err(Error::InvalidLength(
            "length function does not match the group of the representation".into(),
        ));
    }
    if !l.is_length() {
        return Err(Error::NotALength(
            "seminorm denominators need a length that vanishes only at the identity".into(),
        ));
    }
    if a.dim() != rho.dim() {
        return Err(Error::DimMismatch { expected: rho.dim(), got: a.dim() });
    }
    let mut best = 0.0f64;
    for g in group.elements() {
        if g == group.identity() {
            continue;
        }
        let lg = l.value(g);
        if !lg.is_finite() {
            continue;
        }
        let r = rho.matrix(g);
        let comm = r * &a.m - &a.m * r;
        best = best.max(matrix_norm(a.norm, &comm) / lg);
    }
    Ok(best)
}

/// Deterministic probe set for a matrix algebra: probe 0 is the identity,
/// the rest have independent complex Gaussian entries. The stream depends
/// on the dimension, so algebras of different sizes get independent probes
/// for the same seed.
pub fn seeded_probes(
    dim: usize,
    count: usize,
    norm: NormFlag,
    seed: u64,
) -> Vec<MatrixAlgebraElement> {
    let mut rng = rng_for(seed, 0x11B0_0000 + dim as u64);
    (0..count)
        .map(|i| {
            if i == 0 {
                MatrixAlgebraElement::identity(dim, norm)
            } else {
                MatrixAlgebraElement { m: gaussian_matrix(dim, dim, &mut rng), norm }
            }
        })
        .collect()
}

/// One probe evaluated against both algebras.
#[derive(Debug, Clone, Serialize)]
pub struct LipComparisonRow {
    pub probe: usize,
    pub lip_rho: f64,
    pub lip_tau: f64,
}

/// Side-by-side seminorm data for two representations of the same group,
/// together with their representation distance. Gathers raw quantities
/// only; no relation between the two columns and `dreps` is claimed.
#[derive(Debug, Clone, Serialize)]
pub struct LipComparisonReport {
    pub norm: NormFlag,
    pub metric: MetricChoice,
    pub dreps: DrepsOutcome,
    pub rows: Vec<LipComparisonRow>,
    /// Largest distance from a seminorm-normalized probe to the scalars,
    /// per algebra: a sampled lower bound for the radius of the Lipschitz
    /// unit ball modulo scalars. Zero when every probe commutes.
    pub ball_radius_rho: f64,
    pub ball_radius_tau: f64,
}

impl LipComparisonReport {
    /// CSV table of the per-probe rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("probe,lip_rho,lip_tau,norm\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.probe, row.lip_rho, row.lip_tau, self.norm
            ));
        }
        out
    }
}

/// Distance from `a` to the scalar line, in the probe's norm.
fn distance_to_scalars(a: &MatrixAlgebraElement) -> f64 {
    let n = a.dim();
    let mean = a.m.trace() / Complex64::new(n as f64, 0.0);
    let centered = &a.m - CMatrix::identity(n, n) * mean;
    matrix_norm(a.norm, &centered)
}

fn ball_radius(probes: &[MatrixAlgebraElement], lips: &[f64]) -> f64 {
    probes
        .iter()
        .zip(lips)
        .filter(|(_, &l)| l > 1e-12)
        .map(|(p, &l)| distance_to_scalars(p) / l)
        .fold(0.0, f64::max)
}

/// Evaluate `count` seeded probes against both algebras and compute the
/// representation distance between `rho` and `tau` with the given options.
pub fn lip_comparison(
    rho: &UnitaryRep,
    tau: &UnitaryRep,
    l: &LengthFunction,
    metric: MetricChoice,
    norm: NormFlag,
    count: usize,
    seed: u64,
    opts: &DrepsOptions,
) -> Result<LipComparisonReport> {
    if !std::sync::Arc::ptr_eq(rho.group(), tau.group()) && rho.group() != tau.group() {
        return Err(Error::GroupMismatch);
    }
    let probes_rho = seeded_probes(rho.dim(), count, norm, seed);
    let probes_tau = seeded_probes(tau.dim(), count, norm, seed);
    let lips: Vec<(f64, f64)> = probes_rho
        .par_iter()
        .zip(probes_tau.par_iter())
        .map(|(pr, pt)| Ok((lip_norm(rho, pr, l)?, lip_norm(tau, pt, l)?)))
        .collect::<Result<_>>()?;
    let rows: Vec<LipComparisonRow> = lips
        .iter()
        .enumerate()
        .map(|(i, &(lip_rho, lip_tau))| LipComparisonRow { probe: i, lip_rho, lip_tau })
        .collect();
    let lips_rho: Vec<f64> = lips.iter().map(|p| p.0).collect();
    let lips_tau: Vec<f64> = lips.iter().map(|p| p.1).collect();
    let outcome = dreps(rho, tau, l, metric, opts)?;
    Ok(LipComparisonReport {
        norm,
        metric,
        dreps: outcome,
        rows,
        ball_radius_rho: ball_radius(&probes_rho, &lips_rho),
        ball_radius_tau: ball_radius(&probes_tau, &lips_tau),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{word_length, FiniteGroup};
    use crate::linalg::haar_unitary;
    use crate::rep::irreps_of;
    use std::sync::Arc;

    fn d3_setup() -> (Arc<FiniteGroup>, LengthFunction, Vec<UnitaryRep>) {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        let l = word_length(&g, &[1, 3], None).unwrap();
        let irreps = irreps_of(&g).unwrap();
        (g, l, irreps)
    }

    #[test]
    fn scalars_have_seminorm_zero() {
        let (_, l, irreps) = d3_setup();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let a = MatrixAlgebraElement::new(
            CMatrix::identity(2, 2) * Complex64::new(2.5, -0.5),
            NormFlag::Operator,
        )
        .unwrap();
        assert_eq!(lip_norm(two_dim, &a, &l).unwrap(), 0.0);
    }

    #[test]
    fn sign_flip_commutator_in_both_norms() {
        let g = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let l = LengthFunction::new(&g, vec![0.0, 1.0]).unwrap();
        let rho = UnitaryRep::new(
            Arc::clone(&g),
            vec![
                CMatrix::identity(2, 2),
                CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[
                    Complex64::new(1.0, 0.0),
                    Complex64::new(-1.0, 0.0),
                ])),
            ],
        )
        .unwrap();
        let flip = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let op = MatrixAlgebraElement::new(flip.clone(), NormFlag::Operator).unwrap();
        let hs = MatrixAlgebraElement::new(flip, NormFlag::HilbertSchmidt).unwrap();
        assert!((lip_norm(&rho, &op, &l).unwrap() - 2.0).abs() < 1e-12);
        assert!((lip_norm(&rho, &hs, &l).unwrap() - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scaling_the_length_scales_the_seminorm_inversely() {
        let (g, l, irreps) = d3_setup();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let scaled =
            LengthFunction::new(&g, l.values().iter().map(|v| 4.0 * v).collect()).unwrap();
        let probes = seeded_probes(2, 5, NormFlag::HilbertSchmidt, 3);
        for p in &probes {
            let base = lip_norm(two_dim, p, &l).unwrap();
            let quartered = lip_norm(two_dim, p, &scaled).unwrap();
            assert!((quartered - base / 4.0).abs() < 1e-9 * (1.0 + base));
        }
    }

    #[test]
    fn seminorm_axioms_on_sampled_pairs() {
        let (_, l, irreps) = d3_setup();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let probes = seeded_probes(2, 6, NormFlag::Operator, 9);
        for (i, a) in probes.iter().enumerate() {
            let la = lip_norm(two_dim, a, &l).unwrap();
            let scaled = MatrixAlgebraElement::new(a.matrix() * Complex64::new(-3.0, 4.0), a.norm_flag())
                .unwrap();
            let ls = lip_norm(two_dim, &scaled, &l).unwrap();
            assert!((ls - 5.0 * la).abs() < 1e-9 * (1.0 + la), "homogeneity");
            for b in probes.iter().skip(i + 1) {
                let lb = lip_norm(two_dim, b, &l).unwrap();
                let sum = MatrixAlgebraElement::new(a.matrix() + b.matrix(), a.norm_flag()).unwrap();
                let lsum = lip_norm(two_dim, &sum, &l).unwrap();
                assert!(lsum <= la + lb + 1e-9, "subadditivity");
            }
        }
    }

    #[test]
    fn kernel_is_exactly_the_scalars_for_an_irreducible() {
        let (_, l, irreps) = d3_setup();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let mut rng = rng_for(17, 0x11B0_1000);
        for _ in 0..10 {
            let raw = gaussian_matrix(2, 2, &mut rng);
            // Project onto the orthogonal complement of the scalars.
            let mean = raw.trace() / Complex64::new(2.0, 0.0);
            let traceless = &raw - CMatrix::identity(2, 2) * mean;
            if frobenius_norm(&traceless) < 1e-6 {
                continue;
            }
            let a = MatrixAlgebraElement::new(traceless, NormFlag::HilbertSchmidt).unwrap();
            assert!(lip_norm(two_dim, &a, &l).unwrap() > 1e-3);
        }
    }

    #[test]
    fn unitary_conjugation_preserves_the_seminorm() {
        let (g, l, irreps) = d3_setup();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let mut rng = rng_for(23, 0x11B0_2000);
        let u = haar_unitary(2, &mut rng);
        let conjugated = UnitaryRep::new(
            Arc::clone(&g),
            g.elements().map(|gg| &u * two_dim.matrix(gg) * u.adjoint()).collect(),
        )
        .unwrap();
        for p in seeded_probes(2, 5, NormFlag::Operator, 5) {
            let moved =
                MatrixAlgebraElement::new(&u * p.matrix() * u.adjoint(), p.norm_flag()).unwrap();
            let original = lip_norm(two_dim, &p, &l).unwrap();
            let transported = lip_norm(&conjugated, &moved, &l).unwrap();
            assert!((original - transported).abs() < 1e-9 * (1.0 + original));
        }
    }

    #[test]
    fn degenerate_lengths_are_rejected() {
        let (g, _, irreps) = d3_setup();
        // Vanishes on all rotations: a semi-length, not a length.
        let semi = LengthFunction::new(
            &g,
            g.elements().map(|gg| if gg < 3 { 0.0 } else { 1.0 }).collect(),
        )
        .unwrap();
        let a = MatrixAlgebraElement::identity(1, NormFlag::Operator);
        assert!(matches!(
            lip_norm(&irreps[0], &a, &semi),
            Err(Error::NotALength(_))
        ));
        let wrong_dim = MatrixAlgebraElement::identity(3, NormFlag::Operator);
        let l = word_length(&g, &[1, 3], None).unwrap();
        assert!(matches!(
            lip_norm(&irreps[0], &wrong_dim, &l),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn comparison_of_a_representation_with_itself_reports_distance_zero() {
        let (_, l, irreps) = d3_setup();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let report = lip_comparison(
            two_dim,
            two_dim,
            &l,
            MetricChoice::Arclength,
            NormFlag::HilbertSchmidt,
            4,
            11,
            &DrepsOptions { seed: 11, ..DrepsOptions::default() },
        )
        .unwrap();
        assert_eq!(report.dreps.value, 0.0);
        assert_eq!(report.rows[0].lip_rho, 0.0, "identity probe");
        for row in &report.rows {
            assert_eq!(row.lip_rho, row.lip_tau);
        }
    }

    #[test]
    fn comparison_report_has_finite_entries_and_csv() {
        let (_, l, irreps) = d3_setup();
        // The sign character is -1 on reflections (elements 3..6).
        let sign = irreps
            .iter()
            .find(|r| r.dim() == 1 && r.character()[3].re < -0.5)
            .unwrap();
        let two_dim = irreps.iter().find(|r| r.dim() == 2).unwrap();
        let opts = DrepsOptions { restarts: 4, max_iters: 60, seed: 2, ..DrepsOptions::default() };
        let report = lip_comparison(
            sign,
            two_dim,
            &l,
            MetricChoice::Operator,
            NormFlag::Operator,
            3,
            2,
            &opts,
        )
        .unwrap();
        assert!(report.dreps.value.is_finite() && report.dreps.value > 0.0);
        assert!(report.rows.iter().all(|r| r.lip_rho.is_finite() && r.lip_tau.is_finite()));
        assert!(report.ball_radius_tau.is_finite());
        let csv = report.csv();
        assert!(csv.starts_with("probe,lip_rho,lip_tau,norm\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains("operator"));
    }
}
