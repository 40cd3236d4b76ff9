//! Dual metrics on representations and the double-dual length they induce.
//!
//! Given a (semi-)length `l` on a finite group and a bi-invariant metric on
//! the unitary groups, this module provides:
//!
//! * [`dbar`] — the normalized sup distance between two same-dimensional
//!   representations;
//! * [`dreps`] — the semi-metric on the representation category: the
//!   infimum of `dbar` over a conjugating unitary after padding both
//!   representations to a common dimension (reported as an upper bound,
//!   exact in the flagged shortcut cases);
//! * [`lreps`] — the Lipschitz seminorm of a representation, its `dbar`
//!   distance from the trivial representation;
//! * [`double_dual_length`] — the length on the group recovered from
//!   `lreps` by a second sup-ratio over a [`RepFamily`];
//! * [`stability_check`] — the verdict on whether the double-dual
//!   reproduces the original length, packaged as a [`DualityReport`];
//! * [`functor_length`] and [`pullback_nonexpansion_test`] — the
//!   fiber-functor seminorm and the nonexpansion property of pullbacks.

mod assignment;
mod family;
mod optimizer;

pub use family::{RepFamily, BISECTION_ITERS};
pub use optimizer::{DrepsOptions, OptimizerDiagnostics};

use crate::error::{Error, Result};
use crate::group::{check_nonexpanding, same_group, FiniteGroup, GroupHom, LengthFunction};
use crate::linalg::{haar_unitary, polar_unitary, rng_for, wrap_angle, C, CMatrix};
use crate::rep::{decompose, irreps_of, multiplicity_vector, pad, pullback, Decomposition, UnitaryRep};
use crate::unitary::{distance, unitary_length, MetricChoice, UnitaryMatrix, DIM_CAP};
use serde::Serialize;
use std::sync::Arc;

/// Maximum defect `l - ldd` below which a length counts as stable.
pub const STABILITY_TOL: f64 = 1e-6;

/// Slack allowed when asserting the sandwich `ldd <= l` (the inequality is a
/// theorem; violations beyond solver resolution indicate a bug).
pub const SANDWICH_TOL: f64 = 1e-9;

fn validate_length_group(group: &FiniteGroup, l: &LengthFunction) -> Result<()> {
    if l.values().len() != group.order() {
        return Err(Error::InvalidLength(format!(
            "length function has {} values for a group of order {}",
            l.values().len(),
            group.order()
        )));
    }
    Ok(())
}

fn require_finite(l: &LengthFunction) -> Result<()> {
    if let Some(g) = l.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::InfiniteLength { element: g });
    }
    Ok(())
}

/// Normalized sup distance `max over support of d(a_g, b_g) / l(g)`.
///
/// Callers are responsible for padding: the two representations must already
/// share a dimension. The sup over an empty support is 0.
pub fn dbar(
    a: &UnitaryRep,
    b: &UnitaryRep,
    l: &LengthFunction,
    metric: MetricChoice,
) -> Result<f64> {
    if !same_group(a.group(), b.group()) {
        return Err(Error::GroupMismatch);
    }
    validate_length_group(a.group(), l)?;
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(l.support()
        .into_iter()
        .map(|g| distance(metric, a.matrix(g), b.matrix(g)) / l.value(g))
        .fold(0.0, f64::max))
}

/// Lipschitz seminorm of a representation against `l`:
/// `max over support of length(a_g) / l(g)`, the `dbar` distance from the
/// trivial representation of the same dimension.
pub fn lreps(a: &UnitaryRep, l: &LengthFunction, metric: MetricChoice) -> Result<f64> {
    validate_length_group(a.group(), l)?;
    Ok(l.support()
        .into_iter()
        .map(|g| unitary_length(metric, a.matrix(g)) / l.value(g))
        .fold(0.0, f64::max))
}

/// How a `dreps` value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrepsMethod {
    /// The length has empty support, so every `dbar` is 0.
    EmptySupport,
    /// Equal multiplicity vectors after padding: the representations are
    /// unitarily equivalent, distance exactly 0.
    EquivalentMultiplicities,
    /// Dimension 1 after padding: conjugation is trivial, the value is
    /// `dbar` itself (exact).
    ScalarConjugation,
    /// Abelian case: exact minimum over pairings of simultaneous diagonals.
    DiagonalPairing,
    /// Multi-restart smoothed minimax descent (upper bound).
    Optimizer,
}

impl std::fmt::Display for DrepsMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DrepsMethod::EmptySupport => "empty-support",
            DrepsMethod::EquivalentMultiplicities => "equivalent-multiplicities",
            DrepsMethod::ScalarConjugation => "scalar-conjugation",
            DrepsMethod::DiagonalPairing => "diagonal-pairing",
            DrepsMethod::Optimizer => "optimizer",
        };
        write!(f, "{s}")
    }
}

/// Result of a `dreps` computation.
#[derive(Debug, Clone, Serialize)]
pub struct DrepsOutcome {
    /// Best distance found (exact when `method` says so, otherwise an upper
    /// bound on the infimum).
    pub value: f64,
    /// Common dimension after padding.
    pub padded_dim: usize,
    pub method: DrepsMethod,
    /// Present when the optimizer ran.
    pub optimizer: Option<OptimizerDiagnostics>,
}

/// Distance between representations: `inf over u of dbar(pad(a), u pad(b) u*)`
/// with both representations padded to `max(dim a, dim b) + opts.slack`.
///
/// Exact shortcuts (flagged in the outcome): empty support; equal
/// multiplicity vectors; dimension 1; simultaneous diagonals (abelian
/// groups), minimized over pairings of diagonal entries. Otherwise the
/// minimax optimizer runs and the value is an upper bound on the infimum.
pub fn dreps(
    a: &UnitaryRep,
    b: &UnitaryRep,
    l: &LengthFunction,
    metric: MetricChoice,
    opts: &DrepsOptions,
) -> Result<DrepsOutcome> {
    if !same_group(a.group(), b.group()) {
        return Err(Error::GroupMismatch);
    }
    validate_length_group(a.group(), l)?;
    let n = a.dim().max(b.dim()) + opts.slack;
    if n > DIM_CAP {
        return Err(Error::DimTooLarge { dim: n, cap: DIM_CAP });
    }
    let support = l.support();
    if support.is_empty() {
        return Ok(DrepsOutcome {
            value: 0.0,
            padded_dim: n,
            method: DrepsMethod::EmptySupport,
            optimizer: None,
        });
    }
    let pa = pad(a, n)?;
    let pb = pad(b, n)?;
    let irreps = irreps_of(a.group())?;
    let ma = multiplicity_vector(&pa, &irreps)?;
    let mb = multiplicity_vector(&pb, &irreps)?;
    if ma == mb {
        return Ok(DrepsOutcome {
            value: 0.0,
            padded_dim: n,
            method: DrepsMethod::EquivalentMultiplicities,
            optimizer: None,
        });
    }
    if n == 1 {
        return Ok(DrepsOutcome {
            value: dbar(&pa, &pb, l, metric)?,
            padded_dim: n,
            method: DrepsMethod::ScalarConjugation,
            optimizer: None,
        });
    }
    if a.group().is_abelian() {
        return dreps_abelian(&pa, &pb, &irreps, l, &support, metric, opts);
    }
    dreps_optimize(&pa, &pb, l, &support, metric, opts, Vec::new())
}

/// The permutation pairing `u = U_a P U_b*`: conjugating by it aligns
/// diagonal slot `perm[j]` of `b` (in its decomposition basis) with slot `j`
/// of `a`.
fn pairing_unitary(da: &Decomposition, db: &Decomposition, perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut p = CMatrix::zeros(n, n);
    for (j, &k) in perm.iter().enumerate() {
        p[(j, k)] = C::new(1.0, 0.0);
    }
    &da.basis * p * db.basis.adjoint()
}

fn dreps_abelian(
    pa: &UnitaryRep,
    pb: &UnitaryRep,
    irreps: &[UnitaryRep],
    l: &LengthFunction,
    support: &[usize],
    metric: MetricChoice,
    opts: &DrepsOptions,
) -> Result<DrepsOutcome> {
    let da = decompose(pa, irreps)?;
    let db = decompose(pb, irreps)?;
    let n = pa.dim();
    // Character angle of canonical irrep `i` at `g` (all blocks are 1x1).
    let theta = |i: usize, g: usize| irreps[i].matrix(g)[(0, 0)].arg();
    match metric {
        MetricChoice::Operator => {
            // Per-pair cost: worst weighted chordal distance over the
            // support. Exact bottleneck assignment.
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            support
                                .iter()
                                .map(|&g| {
                                    let d = theta(da.blocks[j], g) - theta(db.blocks[k], g);
                                    2.0 * (d / 2.0).sin().abs() / l.value(g)
                                })
                                .fold(0.0, f64::max)
                        })
                        .collect()
                })
                .collect();
            let (value, _) = assignment::min_bottleneck_assignment(&cost);
            Ok(DrepsOutcome {
                value,
                padded_dim: n,
                method: DrepsMethod::DiagonalPairing,
                optimizer: None,
            })
        }
        MetricChoice::Arclength => {
            let inv_l: Vec<f64> = support.iter().map(|&g| 1.0 / l.value(g)).collect();
            let sq: Vec<Vec<Vec<f64>>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            support
                                .iter()
                                .map(|&g| {
                                    wrap_angle(theta(da.blocks[j], g) - theta(db.blocks[k], g))
                                        .powi(2)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            if let Some((value, _)) = assignment::min_arclength_assignment(&sq, &inv_l) {
                return Ok(DrepsOutcome {
                    value,
                    padded_dim: n,
                    method: DrepsMethod::DiagonalPairing,
                    optimizer: None,
                });
            }
            // Above the enumeration cap: fall back to the optimizer, warm
            // started from the best bottleneck pairing of worst weighted
            // angles.
            let cost: Vec<Vec<f64>> = sq
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|per_g| {
                            per_g
                                .iter()
                                .zip(&inv_l)
                                .map(|(s, w)| s.sqrt() * w)
                                .fold(0.0, f64::max)
                        })
                        .collect()
                })
                .collect();
            let (_, perm) = assignment::min_bottleneck_assignment(&cost);
            let warm = pairing_unitary(&da, &db, &perm);
            dreps_optimize(pa, pb, l, support, metric, opts, vec![warm])
        }
    }
}

fn dreps_optimize(
    pa: &UnitaryRep,
    pb: &UnitaryRep,
    l: &LengthFunction,
    support: &[usize],
    metric: MetricChoice,
    opts: &DrepsOptions,
    mut warm_starts: Vec<CMatrix>,
) -> Result<DrepsOutcome> {
    let n = pa.dim();
    let a_mats: Vec<CMatrix> = support.iter().map(|&g| pa.matrix(g).clone()).collect();
    let b_mats: Vec<CMatrix> = support.iter().map(|&g| pb.matrix(g).clone()).collect();
    let inv_l: Vec<f64> = support.iter().map(|&g| 1.0 / l.value(g)).collect();
    let problem = optimizer::MinimaxProblem {
        a: a_mats,
        b: b_mats,
        inv_l,
        metric,
        dim: n,
    };
    // The identity start guarantees a value no worse than dbar of the padded
    // pair; the polar alignment start helps when the representations agree
    // up to conjugation.
    warm_starts.push(CMatrix::identity(n, n));
    let mut acc = CMatrix::zeros(n, n);
    for (am, bm) in problem.a.iter().zip(&problem.b) {
        acc += am * bm.adjoint();
    }
    warm_starts.push(polar_unitary(&acc));
    let (value, diagnostics) = optimizer::minimize(&problem, warm_starts, opts);
    Ok(DrepsOutcome {
        value,
        padded_dim: n,
        method: DrepsMethod::Optimizer,
        optimizer: Some(diagnostics),
    })
}

/// Independent random-search check for `dreps`: the best `dbar` over seeded
/// Haar-random conjugators (the identity is always included). Returns an
/// upper bound on the infimum; useful as a cross-check at small dimensions.
pub fn dreps_oracle(
    a: &UnitaryRep,
    b: &UnitaryRep,
    l: &LengthFunction,
    metric: MetricChoice,
    slack: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !same_group(a.group(), b.group()) {
        return Err(Error::GroupMismatch);
    }
    validate_length_group(a.group(), l)?;
    let n = a.dim().max(b.dim()) + slack;
    if n > DIM_CAP {
        return Err(Error::DimTooLarge { dim: n, cap: DIM_CAP });
    }
    let support = l.support();
    if support.is_empty() {
        return Ok(0.0);
    }
    let pa = pad(a, n)?;
    let pb = pad(b, n)?;
    let a_mats: Vec<&CMatrix> = support.iter().map(|&g| pa.matrix(g)).collect();
    let b_mats: Vec<&CMatrix> = support.iter().map(|&g| pb.matrix(g)).collect();
    let weights: Vec<f64> = support.iter().map(|&g| 1.0 / l.value(g)).collect();
    let value_at = |u: &CMatrix| -> f64 {
        let uh = u.adjoint();
        a_mats
            .iter()
            .zip(&b_mats)
            .zip(&weights)
            .map(|((am, bm), w)| distance(metric, am, &(u * *bm * &uh)) * w)
            .fold(0.0, f64::max)
    };
    let mut rng = rng_for(seed, 0x0AC1_E000);
    let mut best = value_at(&CMatrix::identity(n, n));
    for _ in 0..samples {
        let u = haar_unitary(n, &mut rng);
        best = best.min(value_at(&u));
    }
    Ok(best)
}

/// Double-dual values over a representation family, with the per-irrep
/// Lipschitz seminorms that served as denominators.
#[derive(Debug, Clone, Serialize)]
pub struct DoubleDual {
    /// Per-element double-dual length (certified lower bound for the
    /// supremum over all representations; exact over the family except for
    /// bisection resolution).
    pub values: Vec<f64>,
    /// Lipschitz seminorm of each canonical irreducible.
    pub lreps_per_irrep: Vec<f64>,
}

/// Double-dual length of `l` over `family`, per group element.
pub fn double_dual_length(
    group: &Arc<FiniteGroup>,
    l: &LengthFunction,
    metric: MetricChoice,
    family: RepFamily,
) -> Result<DoubleDual> {
    validate_length_group(group, l)?;
    require_finite(l)?;
    let irreps = irreps_of(group)?;
    let out = family::double_dual_over_family(group, l, metric, family, &irreps)?;
    Ok(DoubleDual { values: out.ldd, lreps_per_irrep: out.lreps_per_irrep })
}

/// Group facts echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub kind: String,
    pub order: usize,
    pub abelian: bool,
}

impl GroupSummary {
    pub(crate) fn of(group: &FiniteGroup) -> Self {
        GroupSummary {
            kind: group.kind().to_string(),
            order: group.order(),
            abelian: group.is_abelian(),
        }
    }
}

/// One group element's row in a duality report.
#[derive(Debug, Clone, Serialize)]
pub struct ElementRow {
    pub element: usize,
    pub label: String,
    /// Input length value.
    pub ell: f64,
    /// Double-dual value over the family.
    pub ldd: f64,
    /// `ell - ldd` (nonnegative up to solver resolution).
    pub defect: f64,
}

/// Everything a stability run produces.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub group: GroupSummary,
    pub metric: MetricChoice,
    pub family: RepFamily,
    pub stability_tol: f64,
    pub sandwich_tol: f64,
    pub elements: Vec<ElementRow>,
    /// Lipschitz seminorm of each canonical irreducible.
    pub lreps_per_irrep: Vec<f64>,
    pub irrep_dims: Vec<usize>,
    /// For abelian groups: the double dual computed over characters only
    /// (the Pontryagin route), always sandwiched between the family value
    /// and `ell`.
    pub hathat: Option<Vec<f64>>,
    pub stable: bool,
    pub max_defect: f64,
    /// Populated by optimizer-based computations; family solvers are
    /// deterministic and leave it empty.
    pub optimizer: Option<OptimizerDiagnostics>,
    pub notes: Vec<String>,
}

pub(crate) const DUALITY_REPORT_SCHEMA: &str = "tannaka-metrics.duality-report.v1";

/// Compute the double dual of a finite length function and compare it with
/// the input: `l` is stable when the two agree. The sandwich
/// `ldd <= l` is asserted before the report is emitted.
pub fn stability_check(
    group: &Arc<FiniteGroup>,
    l: &LengthFunction,
    metric: MetricChoice,
    family: RepFamily,
) -> Result<DualityReport> {
    stability_check_with(group, l, metric, family, STABILITY_TOL)
}

/// [`stability_check`] with a caller-chosen stability tolerance (the
/// sandwich assertions keep their fixed internal bound).
pub fn stability_check_with(
    group: &Arc<FiniteGroup>,
    l: &LengthFunction,
    metric: MetricChoice,
    family: RepFamily,
    stability_tol: f64,
) -> Result<DualityReport> {
    if !(stability_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stability tolerance must be positive, got {stability_tol}"
        )));
    }
    validate_length_group(group, l)?;
    if !l.is_length() {
        return Err(Error::NotALength(
            "stability is defined for lengths that vanish only at the identity".into(),
        ));
    }
    require_finite(l)?;
    let irreps = irreps_of(group)?;
    let fam = family::double_dual_over_family(group, l, metric, family, &irreps)?;
    let only = if matches!(family, RepFamily::IrrepsOnly) {
        fam.ldd.clone()
    } else {
        family::double_dual_over_family(group, l, metric, RepFamily::IrrepsOnly, &irreps)?.ldd
    };

    let mut elements = Vec::with_capacity(group.order());
    let mut max_defect = f64::NEG_INFINITY;
    for g in group.elements() {
        let ell = l.value(g);
        let ldd = fam.ldd[g];
        if ldd > ell + SANDWICH_TOL {
            return Err(Error::Internal(format!(
                "double dual exceeds the length at element {g}: {ldd} > {ell}"
            )));
        }
        if only[g] > ldd + SANDWICH_TOL {
            return Err(Error::Internal(format!(
                "family supremum fell below the single-irrep value at element {g}"
            )));
        }
        let defect = ell - ldd;
        max_defect = max_defect.max(defect);
        elements.push(ElementRow {
            element: g,
            label: group.label(g).to_string(),
            ell,
            ldd,
            defect,
        });
    }
    let stable = max_defect < stability_tol;

    let mut notes = vec![
        "double-dual values are lower bounds for the supremum over all representations; \
         they are exact over the requested family up to solver resolution"
            .to_string(),
    ];
    match (family, metric) {
        (RepFamily::IrrepsOnly, _) => {}
        (_, MetricChoice::Operator) => notes.push(
            "operator-metric direct-sum supremum computed exactly by a denominator-prefix scan"
                .to_string(),
        ),
        (_, MetricChoice::Arclength) => notes.push(format!(
            "arclength direct-sum supremum located by bisection ({BISECTION_ITERS} iterations) \
             with a linear-feasibility test per probe"
        )),
    }

    Ok(DualityReport {
        schema: DUALITY_REPORT_SCHEMA,
        tool_version: crate::VERSION,
        group: GroupSummary::of(group),
        metric,
        family,
        stability_tol,
        sandwich_tol: SANDWICH_TOL,
        elements,
        lreps_per_irrep: fam.lreps_per_irrep,
        irrep_dims: irreps.iter().map(|r| r.dim()).collect(),
        hathat: group.is_abelian().then(|| only.clone()),
        stable,
        max_defect,
        optimizer: None,
        notes,
    })
}

/// Seminorm of a fiber-functor automorphism: `eta` assigns a unitary to each
/// irreducible, `lt` a nonnegative weight, and the value is
/// `max over i with 0 < lt[i] < inf of length(eta[i]) / lt[i]`.
pub fn functor_length(
    irreps: &[UnitaryRep],
    eta: &[UnitaryMatrix],
    lt: &[f64],
    metric: MetricChoice,
) -> Result<f64> {
    if eta.len() != irreps.len() {
        return Err(Error::InvalidArgument(format!(
            "{} unitaries for {} irreducibles",
            eta.len(),
            irreps.len()
        )));
    }
    if lt.len() != irreps.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} irreducibles",
            lt.len(),
            irreps.len()
        )));
    }
    for (irr, u) in irreps.iter().zip(eta) {
        if u.dim() != irr.dim() {
            return Err(Error::DimMismatch { expected: irr.dim(), got: u.dim() });
        }
    }
    if let Some(i) = lt.iter().position(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weight {i} is {}, must be nonnegative",
            lt[i]
        )));
    }
    Ok(eta
        .iter()
        .zip(lt)
        .filter(|(_, &w)| w > 0.0 && w.is_finite())
        .map(|(u, &w)| unitary_length(metric, u.matrix()) / w)
        .fold(0.0, f64::max))
}

/// Tolerance for the exact (`dbar`-level) pullback inequality.
pub const PULLBACK_DBAR_TOL: f64 = 1e-9;
/// Tolerance for the optimizer-assisted (`dreps`-level) pullback inequality.
pub const PULLBACK_DREPS_TOL: f64 = 1e-4;

/// Outcome of [`pullback_nonexpansion_test`].
#[derive(Debug, Clone, Serialize)]
pub struct PullbackCheck {
    pub ok: bool,
    pub pairs_checked: usize,
    /// Pair (by position in the supplied list) with the worst `dbar` gap.
    pub worst_pair: (usize, usize),
    /// Largest `dbar(pullback pair) - dbar(pair)`; nonexpansion means <= 0
    /// up to [`PULLBACK_DBAR_TOL`].
    pub worst_dbar_gap: f64,
    /// Largest `dreps(pullback pair) - dreps(pair)` over the same pairs.
    pub worst_dreps_gap: f64,
}

/// Verify that pulling representations back along `hom` does not increase
/// their distances, at the `dbar` level (exact) and the `dreps` level
/// (within optimizer tolerance), over all pairs from `reps`.
///
/// Preconditions: `l_tgt` is a length function on the target, and pushing
/// lengths forward along `hom` is nonexpanding (`l_tgt(hom(g)) <= l_src(g)`).
pub fn pullback_nonexpansion_test(
    hom: &GroupHom,
    l_src: &LengthFunction,
    l_tgt: &LengthFunction,
    metric: MetricChoice,
    reps: &[UnitaryRep],
    opts: &DrepsOptions,
) -> Result<PullbackCheck> {
    validate_length_group(hom.source(), l_src)?;
    validate_length_group(hom.target(), l_tgt)?;
    if !l_tgt.is_length() {
        return Err(Error::NotALength(
            "the target length must vanish only at the identity".into(),
        ));
    }
    let check = check_nonexpanding(hom, l_src, l_tgt)?;
    if !check.ok {
        return Err(Error::InvalidArgument(format!(
            "the homomorphism is not nonexpanding: excess {} at element {:?}",
            check.max_excess, check.worst_element
        )));
    }
    for rep in reps {
        if !same_group(rep.group(), hom.target()) {
            return Err(Error::GroupMismatch);
        }
    }

    let mut worst_pair = (0, 0);
    let mut worst_dbar_gap = f64::NEG_INFINITY;
    let mut worst_dreps_gap = f64::NEG_INFINITY;
    let mut pairs = 0usize;
    for i in 0..reps.len() {
        for j in i..reps.len() {
            let n = reps[i].dim().max(reps[j].dim());
            let ri = pad(&reps[i], n)?;
            let rj = pad(&reps[j], n)?;
            let down = dbar(&ri, &rj, l_tgt, metric)?;
            let up = dbar(&pullback(hom, &ri)?, &pullback(hom, &rj)?, l_src, metric)?;
            let gap = up - down;
            if gap > worst_dbar_gap {
                worst_dbar_gap = gap;
                worst_pair = (i, j);
            }
            let d_down = dreps(&reps[i], &reps[j], l_tgt, metric, opts)?.value;
            let d_up = dreps(
                &pullback(hom, &reps[i])?,
                &pullback(hom, &reps[j])?,
                l_src,
                metric,
                opts,
            )?
            .value;
            worst_dreps_gap = worst_dreps_gap.max(d_up - d_down);
            pairs += 1;
        }
    }
    Ok(PullbackCheck {
        ok: worst_dbar_gap <= PULLBACK_DBAR_TOL && worst_dreps_gap <= PULLBACK_DREPS_TOL,
        pairs_checked: pairs,
        worst_pair,
        worst_dbar_gap,
        worst_dreps_gap,
    })
}
