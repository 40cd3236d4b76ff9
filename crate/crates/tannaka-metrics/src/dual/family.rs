//! Double-dual length over a family of representations.
//!
//! For a length `l`, a metric choice, and a family `F` of representations,
//! the double-dual length of `g` is
//! `sup { length(rho_g) / L(rho) : rho in F, L(rho) != 0 }`, where `L(rho)`
//! is the Lipschitz seminorm of `rho` against `l`. Every value reported
//! here is a certified lower bound for the supremum over *all*
//! representations (and, for the operator metric over direct sums, the
//! family supremum is computed exactly).
//!
//! Key facts used by the solvers, all consequences of the direct-sum laws
//! of the two metrics:
//!
//! * irreps only: a finite maximum of ratios;
//! * direct sums, arclength: with squared profiles `beta_i(h)` (squared
//!   arclength of irrep `i` at `h`), the best ratio at `g` is
//!   `sup_w sqrt(sum_i w_i beta_i(g)) / max_h sqrt(sum_i w_i beta_i(h)) / l(h)`
//!   over nonnegative real weights (integer multiplicities are dense in the
//!   cone after scale normalization). `t` is feasible iff the linear system
//!   `sum w_i beta_i(g) = 1`, `(t/l(h))^2 sum w_i beta_i(h) <= 1` has a
//!   solution, so the supremum is found by bisection on `t` with an LP
//!   feasibility test. The bracket is provable: `max_i C_i` is always
//!   feasible and `sqrt(sum_i C_i^2)` is an upper bound, where `C_i` is the
//!   single-irrep value;
//! * direct sums, operator metric: block lengths combine by max, so only
//!   which irreps appear matters; sorting by denominator makes the exact
//!   supremum a prefix-maximum scan;
//! * tensor words: eigen-angles of a tensor product are wrapped sums of
//!   component angles, so word profiles are computed directly and appended
//!   as extra columns.

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, LengthFunction};
use crate::linalg::{unitary_angles, wrap_angle};
use crate::lp;
use crate::rep::UnitaryRep;
use crate::unitary::{MetricChoice, DIM_CAP};
use serde::{Deserialize, Serialize};

/// Which representations the double-dual supremum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepFamily {
    /// Irreducibles one at a time.
    IrrepsOnly,
    /// Finite direct sums of irreducibles with arbitrary multiplicities.
    DirectSums,
    /// Direct sums of irreducibles and tensor words of irreducibles up to
    /// the given length.
    TensorClosure { depth: usize },
}

impl std::fmt::Display for RepFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RepFamily::IrrepsOnly => write!(f, "irreps-only"),
            RepFamily::DirectSums => write!(f, "direct-sums"),
            RepFamily::TensorClosure { depth } => write!(f, "tensor-closure(depth {depth})"),
        }
    }
}

/// Angle lists per element for one family column, with derived profiles.
struct Column {
    /// Squared arclength at every group element.
    arc_sq: Vec<f64>,
    /// Operator length at every group element.
    op_len: Vec<f64>,
    /// Lipschitz seminorm against `l` (max over the support), per metric.
    den_arc: f64,
    den_op: f64,
}

fn column_from_angles(angles: &[Vec<f64>], l: &LengthFunction, support: &[usize]) -> Column {
    let arc_sq: Vec<f64> = angles
        .iter()
        .map(|list| list.iter().map(|t| t * t).sum())
        .collect();
    let op_len: Vec<f64> = angles
        .iter()
        .map(|list| {
            list.iter()
                .map(|t| 2.0 * (t / 2.0).sin().abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let den_arc = support
        .iter()
        .map(|&h| arc_sq[h].sqrt() / l.value(h))
        .fold(0.0, f64::max);
    let den_op = support
        .iter()
        .map(|&h| op_len[h] / l.value(h))
        .fold(0.0, f64::max);
    Column { arc_sq, op_len, den_arc, den_op }
}

/// Eigen-angle table of a representation: one sorted angle list per element.
fn rep_angles(rep: &UnitaryRep) -> Vec<Vec<f64>> {
    rep.group()
        .elements()
        .map(|g| unitary_angles(rep.matrix(g)))
        .collect()
}

/// Wrapped pairwise sums: the eigen-angles of a tensor product in terms of
/// the factors' angles.
fn tensor_angles(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(wrap_angle(x + y));
        }
    }
    out
}

fn quantized_profile(col: &Column) -> Vec<i64> {
    col.arc_sq
        .iter()
        .chain(col.op_len.iter())
        .map(|v| (v * 1e10).round() as i64)
        .collect()
}

/// Exact supremum over single columns: `max_i dist_i(g) / den_i`.
fn irreps_only_value(cols: &[Column], metric: MetricChoice, g: usize) -> f64 {
    cols.iter()
        .filter_map(|c| match metric {
            MetricChoice::Arclength if c.den_arc > 0.0 => {
                Some(c.arc_sq[g].sqrt() / c.den_arc)
            }
            MetricChoice::Operator if c.den_op > 0.0 => Some(c.op_len[g] / c.den_op),
            _ => None,
        })
        .fold(0.0, f64::max)
}

/// Exact supremum over direct sums for the operator metric: for each
/// possible denominator (sorted ascending), the best numerator uses every
/// column with a denominator no larger.
fn operator_direct_sum_value(cols: &[Column], g: usize) -> f64 {
    let mut items: Vec<(f64, f64)> = cols
        .iter()
        .filter(|c| c.den_op > 0.0)
        .map(|c| (c.den_op, c.op_len[g]))
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best = 0.0f64;
    let mut prefix_num = 0.0f64;
    for (den, num) in items {
        prefix_num = prefix_num.max(num);
        best = best.max(prefix_num / den);
    }
    best
}

/// Number of bisection iterations for the arclength direct-sum supremum.
pub const BISECTION_ITERS: usize = 50;

/// Certified lower bound (within bisection resolution, the supremum) over
/// direct sums for the arclength metric at element `g`.
fn arclength_direct_sum_value(
    cols: &[Column],
    l: &LengthFunction,
    support: &[usize],
    g: usize,
) -> Result<f64> {
    let active: Vec<&Column> = cols.iter().filter(|c| c.den_arc > 0.0).collect();
    if active.is_empty() {
        return Ok(0.0);
    }
    let c_vals: Vec<f64> = active
        .iter()
        .map(|c| c.arc_sq[g].sqrt() / c.den_arc)
        .collect();
    let mut lo = c_vals.iter().copied().fold(0.0, f64::max);
    if lo == 0.0 {
        return Ok(0.0);
    }
    let mut hi =
        c_vals.iter().map(|c| c * c).sum::<f64>().sqrt() * (1.0 + 1e-9) + 1e-12;
    if hi - lo <= 1e-12 {
        return Ok(lo);
    }
    let feasible = |t: f64| -> Result<bool> {
        let eq = vec![(
            active.iter().map(|c| c.arc_sq[g]).collect::<Vec<f64>>(),
            1.0,
        )];
        let ub: Vec<(Vec<f64>, f64)> = support
            .iter()
            .map(|&h| {
                let r = (t / l.value(h)).powi(2);
                (
                    active
                        .iter()
                        .map(|c| r * c.arc_sq[h] - c.arc_sq[g])
                        .collect::<Vec<f64>>(),
                    0.0,
                )
            })
            .collect();
        lp::feasible(&eq, &ub)
    };
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Per-element double-dual length over the family, plus the per-irrep
/// Lipschitz seminorms (the denominators for the plain irreducibles).
pub(crate) struct FamilyLdd {
    pub ldd: Vec<f64>,
    pub lreps_per_irrep: Vec<f64>,
}

pub(crate) fn double_dual_over_family(
    group: &FiniteGroup,
    l: &LengthFunction,
    metric: MetricChoice,
    family: RepFamily,
    irreps: &[UnitaryRep],
) -> Result<FamilyLdd> {
    if let RepFamily::TensorClosure { depth } = family {
        if depth == 0 {
            return Err(Error::InvalidArgument(
                "tensor closure depth must be at least 1".into(),
            ));
        }
    }
    let support = l.support();
    let angle_tables: Vec<Vec<Vec<f64>>> = irreps.iter().map(rep_angles).collect();
    let mut cols: Vec<Column> = angle_tables
        .iter()
        .map(|a| column_from_angles(a, l, &support))
        .collect();
    let lreps_per_irrep: Vec<f64> = cols
        .iter()
        .map(|c| match metric {
            MetricChoice::Arclength => c.den_arc,
            MetricChoice::Operator => c.den_op,
        })
        .collect();

    // Tensor words become extra columns (deduplicated by profile).
    if let RepFamily::TensorClosure { depth } = family {
        let mut seen: Vec<Vec<i64>> = cols.iter().map(quantized_profile).collect();
        // words[d] holds (angle table, dimension) for words of length d+1.
        let mut frontier: Vec<(Vec<Vec<f64>>, usize, usize)> = angle_tables
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), irreps[i].dim(), i))
            .collect();
        for _len in 2..=depth {
            let mut next = Vec::new();
            for (word, word_dim, max_idx) in &frontier {
                // Extend by irreps with index >= max_idx: multisets only.
                for (i, a) in angle_tables.iter().enumerate().skip(*max_idx) {
                    let dim = word_dim * irreps[i].dim();
                    if dim > DIM_CAP {
                        continue;
                    }
                    let angles: Vec<Vec<f64>> = word
                        .iter()
                        .zip(a)
                        .map(|(x, y)| tensor_angles(x, y))
                        .collect();
                    let col = column_from_angles(&angles, l, &support);
                    let key = quantized_profile(&col);
                    if !seen.contains(&key) {
                        seen.push(key);
                        cols.push(col);
                    }
                    next.push((angles, dim, i));
                }
            }
            frontier = next;
        }
    }

    let ldd = group
        .elements()
        .map(|g| match (family, metric) {
            (RepFamily::IrrepsOnly, _) => Ok(irreps_only_value(&cols, metric, g)),
            (_, MetricChoice::Operator) => Ok(operator_direct_sum_value(&cols, g)),
            (_, MetricChoice::Arclength) => {
                arclength_direct_sum_value(&cols, l, &support, g)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FamilyLdd { ldd, lreps_per_irrep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::word_length;
    use crate::rep::irreps_of;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn z4_arclength_double_dual_recovers_word_length() {
        let g = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let l = word_length(&g, &[1], None).unwrap();
        let irreps = irreps_of(&g).unwrap();
        for family in [RepFamily::IrrepsOnly, RepFamily::DirectSums] {
            let out =
                double_dual_over_family(&g, &l, MetricChoice::Arclength, family, &irreps)
                    .unwrap();
            for gg in g.elements() {
                assert!(
                    (out.ldd[gg] - l.value(gg)).abs() < 1e-9,
                    "{family}: element {gg}: {} vs {}",
                    out.ldd[gg],
                    l.value(gg)
                );
            }
        }
        // Lipschitz seminorms of the characters: 0, pi/2, pi, pi/2.
        let out = double_dual_over_family(
            &g,
            &l,
            MetricChoice::Arclength,
            RepFamily::IrrepsOnly,
            &irreps,
        )
        .unwrap();
        let expected = [0.0, PI / 2.0, PI, PI / 2.0];
        for (got, want) in out.lreps_per_irrep.iter().zip(expected) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn z4_operator_double_dual_is_bounded() {
        let g = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let l = word_length(&g, &[1], None).unwrap();
        let irreps = irreps_of(&g).unwrap();
        let r2 = 2.0f64.sqrt();
        for family in [RepFamily::IrrepsOnly, RepFamily::DirectSums] {
            let out =
                double_dual_over_family(&g, &l, MetricChoice::Operator, family, &irreps)
                    .unwrap();
            let expected = [0.0, 1.0, r2, 1.0];
            for (gg, want) in g.elements().zip(expected) {
                assert!(
                    (out.ldd[gg] - want).abs() < 1e-12,
                    "{family}: element {gg}: {} vs {want}",
                    out.ldd[gg]
                );
            }
        }
    }

    #[test]
    fn klein_group_with_uneven_weights_needs_direct_sums() {
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let v4 = Arc::new(FiniteGroup::product(&z2, &z2).unwrap());
        // l(b) = l(a) = 1, l(ab) = 2 (elements indexed e, b, a, ab).
        let l = LengthFunction::new(&v4, vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let irreps = irreps_of(&v4).unwrap();

        let only = double_dual_over_family(
            &v4,
            &l,
            MetricChoice::Arclength,
            RepFamily::IrrepsOnly,
            &irreps,
        )
        .unwrap();
        assert_eq!(only.ldd[0], 0.0);
        for gg in 1..3 {
            assert!((only.ldd[gg] - 1.0).abs() < 1e-12);
        }
        assert!((only.ldd[3] - 1.0).abs() < 1e-12);

        let sums = double_dual_over_family(
            &v4,
            &l,
            MetricChoice::Arclength,
            RepFamily::DirectSums,
            &irreps,
        )
        .unwrap();
        // Pairing two complementary sign characters gives sqrt(2) at ab,
        // strictly better than any single character.
        assert!((sums.ldd[3] - 2.0f64.sqrt()).abs() < 1e-6);
        assert!((sums.ldd[1] - 1.0).abs() < 1e-6);
        assert!((sums.ldd[2] - 1.0).abs() < 1e-6);
        // Sandwich: still below the length.
        for gg in v4.elements() {
            assert!(sums.ldd[gg] <= l.value(gg) + 1e-9);
        }
    }

    #[test]
    fn tensor_closure_adds_nothing_for_characters() {
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let v4 = Arc::new(FiniteGroup::product(&z2, &z2).unwrap());
        let l = LengthFunction::new(&v4, vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let irreps = irreps_of(&v4).unwrap();
        for metric in [MetricChoice::Arclength, MetricChoice::Operator] {
            let sums =
                double_dual_over_family(&v4, &l, metric, RepFamily::DirectSums, &irreps)
                    .unwrap();
            for depth in [2usize, 3] {
                let tens = double_dual_over_family(
                    &v4,
                    &l,
                    metric,
                    RepFamily::TensorClosure { depth },
                    &irreps,
                )
                .unwrap();
                for gg in v4.elements() {
                    assert!(
                        (sums.ldd[gg] - tens.ldd[gg]).abs() < 1e-9,
                        "depth {depth}, metric {metric}, element {gg}"
                    );
                }
            }
        }
    }

    #[test]
    fn operator_prefix_scan_matches_subset_brute_force() {
        // Random profiles; compare the prefix-max formula with explicit
        // enumeration of all nonempty subsets.
        let mut rng = crate::linalg::rng_for(55, 0);
        use rand::Rng;
        for _ in 0..20 {
            let ncols = 5;
            let nelem = 4;
            let lvals: Vec<f64> = (0..nelem).map(|_| rng.gen_range(0.5..2.0)).collect();
            let op: Vec<Vec<f64>> = (0..ncols)
                .map(|_| (0..nelem).map(|_| rng.gen_range(0.0..2.0)).collect())
                .collect();
            let dens: Vec<f64> = op
                .iter()
                .map(|prof| {
                    prof.iter()
                        .zip(&lvals)
                        .map(|(v, l)| v / l)
                        .fold(0.0, f64::max)
                })
                .collect();
            let cols: Vec<Column> = (0..ncols)
                .map(|i| Column {
                    arc_sq: vec![0.0; nelem],
                    op_len: op[i].clone(),
                    den_arc: 0.0,
                    den_op: dens[i],
                })
                .collect();
            for g in 0..nelem {
                let got = operator_direct_sum_value(&cols, g);
                let mut best = 0.0f64;
                for mask in 1u32..(1 << ncols) {
                    let members: Vec<usize> =
                        (0..ncols).filter(|i| mask & (1 << i) != 0).collect();
                    let num = members.iter().map(|&i| op[i][g]).fold(0.0, f64::max);
                    let den = members.iter().map(|&i| dens[i]).fold(0.0, f64::max);
                    if den > 0.0 {
                        best = best.max(num / den);
                    }
                }
                assert!((got - best).abs() < 1e-12, "{got} vs {best}");
            }
        }
    }

    #[test]
    fn rejects_zero_tensor_depth() {
        let g = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let l = word_length(&g, &[1], None).unwrap();
        let irreps = irreps_of(&g).unwrap();
        assert!(double_dual_over_family(
            &g,
            &l,
            MetricChoice::Arclength,
            RepFamily::TensorClosure { depth: 0 },
            &irreps
        )
        .is_err());
    }
}
