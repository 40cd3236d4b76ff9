//! Unitary representations of finite groups: construction, tensor/sum/dual
//! operations, irreducible representations, and decomposition into
//! irreducibles.
//!
//! Irreducibles come from closed forms for cyclic, dihedral, and product
//! groups, and from a seeded commutant-eigenspace decomposition of the
//! regular representation for arbitrary tables. A fixed *canonical order*
//! (by dimension, then lexicographically by quantized character values)
//! makes multiplicity vectors and per-irrep reports stable across runs.

use crate::error::{Error, Result};
use crate::group::{same_group, FiniteGroup, GroupHom, GroupKind, LengthFunction};
use crate::linalg::{
    direct_sum_blocks, hermitian_eigen, max_abs, polar_unitary, rng_for, unitarity_defect,
    CMatrix, CVector, C,
};
use crate::unitary::{unitary_length, MetricChoice, UnitaryMatrix, DIM_CAP};
use rand::Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// Tolerance for the homomorphism property of representations.
pub const TAU_HOM: f64 = 1e-9;

/// Tolerance for rounding multiplicities and character inner products to
/// integers.
pub const MULTIPLICITY_TOL: f64 = 1e-6;

/// Largest group order supported by the table-based irreducible
/// decomposition (the closed-form families have no such limit below the
/// group order cap).
pub const IRREP_TABLE_ORDER_CAP: usize = 512;

/// A unitary representation: one unitary matrix per group element.
#[derive(Debug, Clone)]
pub struct UnitaryRep {
    group: Arc<FiniteGroup>,
    matrices: Vec<CMatrix>,
    dim: usize,
}

impl UnitaryRep {
    /// Build and fully validate a representation from per-element matrices.
    ///
    /// Checks: one square `dim x dim` matrix per element, each unitary (with
    /// the usual re-unitarization band), identity at the identity, and the
    /// homomorphism property within [`TAU_HOM`] (all pairs up to order 64,
    /// generator pairs above — equivalent for exact tables, and the worst
    /// violating pair is reported when the check fails).
    pub fn new(group: Arc<FiniteGroup>, matrices: Vec<CMatrix>) -> Result<Self> {
        let n = group.order();
        if matrices.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} matrices for a group of order {n}",
                matrices.len()
            )));
        }
        let dim = matrices[0].nrows();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional representation".into()));
        }
        if dim > DIM_CAP {
            return Err(Error::DimTooLarge { dim, cap: DIM_CAP });
        }
        let mut clean = Vec::with_capacity(n);
        for m in matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimMismatch { expected: dim, got: m.nrows().max(m.ncols()) });
            }
            clean.push(UnitaryMatrix::new(m)?.into_matrix());
        }
        let e = group.identity();
        let id = CMatrix::identity(dim, dim);
        if max_abs(&(&clean[e] - &id)) > crate::unitary::TAU_UNITARY {
            return Err(Error::NotARepresentation {
                a: e,
                b: e,
                defect: max_abs(&(&clean[e] - &id)),
            });
        }
        clean[e] = id;

        // Homomorphism check. For small groups check all pairs and report
        // the worst; for larger groups check generator pairs, which pins
        // down the property by induction on word length.
        let mut worst = (e, e, 0.0f64);
        if n <= 64 {
            for a in group.elements() {
                for b in group.elements() {
                    let defect = max_abs(&(&clean[a] * &clean[b] - &clean[group.mul(a, b)]));
                    if defect > worst.2 {
                        worst = (a, b, defect);
                    }
                }
            }
        } else {
            let gens = group.generating_set();
            for a in group.elements() {
                for &s in &gens {
                    let defect = max_abs(&(&clean[a] * &clean[s] - &clean[group.mul(a, s)]));
                    if defect > worst.2 {
                        worst = (a, s, defect);
                    }
                }
            }
        }
        if worst.2 > TAU_HOM {
            return Err(Error::NotARepresentation { a: worst.0, b: worst.1, defect: worst.2 });
        }
        Ok(UnitaryRep { group, matrices: clean, dim })
    }

    /// Wrap matrices that form a representation by construction. Debug
    /// builds spot-check the homomorphism property.
    pub(crate) fn new_unchecked(group: Arc<FiniteGroup>, matrices: Vec<CMatrix>) -> Self {
        let dim = matrices[0].nrows();
        #[cfg(debug_assertions)]
        {
            let n = group.order();
            if n <= 24 && dim <= 16 {
                for a in 0..n {
                    for b in 0..n {
                        let defect =
                            max_abs(&(&matrices[a] * &matrices[b] - &matrices[group.mul(a, b)]));
                        debug_assert!(
                            defect <= 1e-8,
                            "new_unchecked: defect {defect} at pair ({a}, {b})"
                        );
                    }
                }
            }
        }
        UnitaryRep { group, matrices, dim }
    }

    /// Trivial one-dimensional representation.
    pub fn trivial(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        UnitaryRep {
            group,
            matrices: vec![CMatrix::identity(1, 1); n],
            dim: 1,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// Character: traces of the representing matrices.
    pub fn character(&self) -> Vec<C> {
        self.matrices.iter().map(|m| m.diagonal().sum()).collect()
    }

    /// `<chi_self, chi_self>`; equals 1 exactly when irreducible.
    pub fn character_self_inner(&self) -> f64 {
        let n = self.group.order() as f64;
        self.character().iter().map(|z| z.norm_sqr()).sum::<f64>() / n
    }

    pub fn is_irreducible(&self) -> bool {
        (self.character_self_inner() - 1.0).abs() <= MULTIPLICITY_TOL
    }
}

/// Tensor product of two representations of the same group.
pub fn tensor(a: &UnitaryRep, b: &UnitaryRep) -> Result<UnitaryRep> {
    if !same_group(&a.group, &b.group) {
        return Err(Error::GroupMismatch);
    }
    let dim = a.dim * b.dim;
    if dim > DIM_CAP {
        return Err(Error::DimTooLarge { dim, cap: DIM_CAP });
    }
    let matrices = a
        .matrices
        .iter()
        .zip(&b.matrices)
        .map(|(x, y)| x.kronecker(y))
        .collect();
    Ok(UnitaryRep::new_unchecked(Arc::clone(&a.group), matrices))
}

/// Direct sum of two representations of the same group.
pub fn direct_sum(a: &UnitaryRep, b: &UnitaryRep) -> Result<UnitaryRep> {
    if !same_group(&a.group, &b.group) {
        return Err(Error::GroupMismatch);
    }
    let dim = a.dim + b.dim;
    if dim > DIM_CAP {
        return Err(Error::DimTooLarge { dim, cap: DIM_CAP });
    }
    let matrices = a
        .matrices
        .iter()
        .zip(&b.matrices)
        .map(|(x, y)| direct_sum_blocks(&[x.clone(), y.clone()]))
        .collect();
    Ok(UnitaryRep::new_unchecked(Arc::clone(&a.group), matrices))
}

/// Dual (conjugate) representation.
pub fn dual_rep(a: &UnitaryRep) -> UnitaryRep {
    let matrices = a.matrices.iter().map(|m| m.map(|z| z.conj())).collect();
    UnitaryRep::new_unchecked(Arc::clone(&a.group), matrices)
}

/// Pad a representation to dimension `n >= dim` by direct-summing the
/// trivial representation `n - dim` times.
pub fn pad(a: &UnitaryRep, n: usize) -> Result<UnitaryRep> {
    if n < a.dim {
        return Err(Error::InvalidArgument(format!(
            "cannot pad dimension {} down to {n}",
            a.dim
        )));
    }
    if n > DIM_CAP {
        return Err(Error::DimTooLarge { dim: n, cap: DIM_CAP });
    }
    if n == a.dim {
        return Ok(a.clone());
    }
    let matrices = a
        .matrices
        .iter()
        .map(|m| {
            let mut out = CMatrix::identity(n, n);
            out.view_mut((0, 0), (a.dim, a.dim)).copy_from(m);
            out
        })
        .collect();
    Ok(UnitaryRep::new_unchecked(Arc::clone(&a.group), matrices))
}

/// Pull a representation back along a group homomorphism.
pub fn pullback(hom: &GroupHom, rep: &UnitaryRep) -> Result<UnitaryRep> {
    if !same_group(rep.group(), hom.target()) {
        return Err(Error::GroupMismatch);
    }
    let matrices = hom
        .source()
        .elements()
        .map(|g| rep.matrices[hom.apply(g)].clone())
        .collect();
    Ok(UnitaryRep::new_unchecked(Arc::clone(hom.source()), matrices))
}

/// Left regular representation (permutation matrices). Only built for
/// groups small enough to keep dense matrices reasonable.
pub fn regular_rep(group: &Arc<FiniteGroup>) -> Result<UnitaryRep> {
    let n = group.order();
    if n > DIM_CAP {
        return Err(Error::DimTooLarge { dim: n, cap: DIM_CAP });
    }
    let matrices = group
        .elements()
        .map(|g| {
            CMatrix::from_fn(n, n, |i, j| {
                if i == group.mul(g, j) {
                    C::new(1.0, 0.0)
                } else {
                    C::new(0.0, 0.0)
                }
            })
        })
        .collect();
    Ok(UnitaryRep::new_unchecked(Arc::clone(group), matrices))
}

/// `e^{2 pi i num / den}`, exact on quarter-circle points so that small
/// cyclic groups (orders dividing 4) get bit-exact characters.
fn root_of_unity(num: usize, den: usize) -> C {
    let m = num % den;
    if (4 * m) % den == 0 {
        match (4 * m / den) % 4 {
            0 => C::new(1.0, 0.0),
            1 => C::new(0.0, 1.0),
            2 => C::new(-1.0, 0.0),
            _ => C::new(0.0, -1.0),
        }
    } else {
        let t = 2.0 * PI * (m as f64) / (den as f64);
        C::new(t.cos(), t.sin())
    }
}

fn scalar_rep(group: &Arc<FiniteGroup>, values: Vec<C>) -> UnitaryRep {
    let matrices = values
        .into_iter()
        .map(|z| CMatrix::from_element(1, 1, z))
        .collect();
    UnitaryRep::new_unchecked(Arc::clone(group), matrices)
}

fn cyclic_irreps(group: &Arc<FiniteGroup>, n: usize) -> Vec<UnitaryRep> {
    (0..n)
        .map(|j| scalar_rep(group, (0..n).map(|k| root_of_unity(j * k, n)).collect()))
        .collect()
}

fn dihedral_irreps(group: &Arc<FiniteGroup>, n: usize) -> Vec<UnitaryRep> {
    let order = 2 * n;
    let mut out = Vec::new();
    // One-dimensional representations: rotations to rho_r, reflections to
    // rho_r * rho_s, with rho_r in {1, -1} only when (-1)^n = 1.
    let one = C::new(1.0, 0.0);
    let neg = C::new(-1.0, 0.0);
    let mut signs: Vec<(C, C)> = vec![(one, one), (one, neg)];
    if n % 2 == 0 {
        signs.push((neg, one));
        signs.push((neg, neg));
    }
    for (sr, ss) in signs {
        let values = (0..order)
            .map(|g| {
                let (refl, i) = (g / n, g % n);
                // rho(r^i) = sr^i, rho(s r^i) = ss * sr^i
                let mut v = sr.powu(i as u32);
                if refl == 1 {
                    v *= ss;
                }
                v
            })
            .collect();
        out.push(scalar_rep(group, values));
    }
    // Two-dimensional representations rho_k for 0 < k < n/2.
    let kmax = if n % 2 == 0 { n / 2 } else { (n + 1) / 2 };
    for k in 1..kmax {
        let zero = C::new(0.0, 0.0);
        let matrices = (0..order)
            .map(|g| {
                let (refl, i) = (g / n, g % n);
                let w = root_of_unity(k * i, n);
                let wbar = w.conj();
                if refl == 0 {
                    CMatrix::from_row_slice(2, 2, &[w, zero, zero, wbar])
                } else {
                    CMatrix::from_row_slice(2, 2, &[zero, wbar, w, zero])
                }
            })
            .collect();
        out.push(UnitaryRep::new_unchecked(Arc::clone(group), matrices));
    }
    out
}

fn product_irreps(
    group: &Arc<FiniteGroup>,
    a: &Arc<FiniteGroup>,
    b: &Arc<FiniteGroup>,
) -> Result<Vec<UnitaryRep>> {
    let irreps_a = irreps_of(a)?;
    let irreps_b = irreps_of(b)?;
    let nb = b.order();
    let mut out = Vec::new();
    for ra in &irreps_a {
        for rb in &irreps_b {
            let matrices = group
                .elements()
                .map(|g| {
                    let (i, j) = (g / nb, g % nb);
                    ra.matrix(i).kronecker(rb.matrix(j))
                })
                .collect();
            out.push(UnitaryRep::new_unchecked(Arc::clone(group), matrices));
        }
    }
    Ok(out)
}

/// Quantized sort key for characters: entries mapped to
/// (angle in [0, 2pi) quantized, modulus quantized), compared
/// lexicographically after the dimension.
fn character_sort_key(rep: &UnitaryRep) -> (usize, Vec<(i64, i64)>) {
    let key = rep
        .character()
        .iter()
        .map(|z| {
            let modulus = z.norm();
            let mut angle = if modulus > 1e-12 { z.arg() } else { 0.0 };
            if angle < 0.0 {
                angle += 2.0 * PI;
            }
            let mut q = (angle / (2.0 * PI) * 1e9).round() as i64;
            if q >= 1_000_000_000 {
                q = 0;
            }
            (q, (modulus * 1e9).round() as i64)
        })
        .collect();
    (rep.dim, key)
}

fn sort_canonically(reps: &mut Vec<UnitaryRep>) {
    reps.sort_by_key(character_sort_key);
}

fn character_distance(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// All irreducible unitary representations of a group, in canonical order.
///
/// Cyclic, dihedral, and product groups use closed forms; arbitrary tables
/// (up to order [`IRREP_TABLE_ORDER_CAP`]) are handled by splitting the
/// regular representation along eigenspaces of a seeded random commutant
/// element. The matrix realizations are deterministic for a fixed build.
pub fn irreps_of(group: &Arc<FiniteGroup>) -> Result<Vec<UnitaryRep>> {
    let mut reps = match group.kind() {
        GroupKind::Cyclic(n) => cyclic_irreps(group, *n),
        GroupKind::Dihedral(n) => dihedral_irreps(group, *n),
        GroupKind::Product(a, b) => {
            let (a, b) = (Arc::clone(a), Arc::clone(b));
            product_irreps(group, &a, &b)?
        }
        GroupKind::Table => irreps_from_table(group)?,
    };
    sort_canonically(&mut reps);
    verify_irrep_list(group, &reps)?;
    Ok(reps)
}

fn verify_irrep_list(group: &Arc<FiniteGroup>, reps: &[UnitaryRep]) -> Result<()> {
    let total: usize = reps.iter().map(|r| r.dim * r.dim).sum();
    if total != group.order() {
        return Err(Error::DecompositionFailed(format!(
            "irreducible dimensions square-sum to {total}, expected {}",
            group.order()
        )));
    }
    let chars: Vec<Vec<C>> = reps.iter().map(|r| r.character()).collect();
    let n = group.order() as f64;
    for (i, ci) in chars.iter().enumerate() {
        for (j, cj) in chars.iter().enumerate() {
            let inner: C = ci
                .iter()
                .zip(cj)
                .map(|(x, y)| x * y.conj())
                .sum::<C>()
                / C::new(n, 0.0);
            let expected = if i == j { 1.0 } else { 0.0 };
            if (inner - C::new(expected, 0.0)).norm() > 1e-8 {
                return Err(Error::DecompositionFailed(format!(
                    "characters {i} and {j} are not orthonormal (inner {inner})"
                )));
            }
        }
    }
    Ok(())
}

/// Average `h0` over the action `m -> rho(g) m rho(g)^*`, yielding a
/// Hermitian element of the commutant.
fn average_over_rep(rep: &UnitaryRep, h0: &CMatrix) -> CMatrix {
    let n = rep.group.order() as f64;
    let mut acc = CMatrix::zeros(rep.dim, rep.dim);
    for g in rep.group.elements() {
        let m = rep.matrix(g);
        acc += m * h0 * m.adjoint();
    }
    let avg = acc / C::new(n, 0.0);
    (&avg + avg.adjoint()) * C::new(0.5, 0.0)
}

fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let a = crate::linalg::gaussian_matrix(n, n, rng);
    (&a + a.adjoint()) * C::new(0.5, 0.0)
}

/// Split a representation along the eigenspaces of a seeded commutant
/// element; returns orthonormal bases of the invariant subspaces.
fn commutant_split(rep: &UnitaryRep, seed_stream: u64) -> Vec<CMatrix> {
    let h0 = random_hermitian(rep.dim, &mut rng_for(0x5EED_1A77, seed_stream));
    let h = average_over_rep(rep, &h0);
    let (vals, vecs) = hermitian_eigen(&h);
    let mut order: Vec<usize> = (0..rep.dim).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < rep.dim {
        let mut end = start + 1;
        while end < rep.dim && (vals[order[end]] - vals[order[end - 1]]).abs() <= 1e-6 {
            end += 1;
        }
        let mut q = CMatrix::zeros(rep.dim, end - start);
        for (c, &i) in order[start..end].iter().enumerate() {
            q.set_column(c, &vecs.column(i));
        }
        blocks.push(q);
        start = end;
    }
    blocks
}

fn restrict(rep: &UnitaryRep, q: &CMatrix) -> Result<UnitaryRep> {
    let d = q.ncols();
    let mut matrices = Vec::with_capacity(rep.group.order());
    for g in rep.group.elements() {
        let m = q.adjoint() * rep.matrix(g) * q;
        let defect = unitarity_defect(&m);
        if defect > 1e-7 {
            return Err(Error::DecompositionFailed(format!(
                "restricted block of dimension {d} is not unitary (defect {defect:.3e})"
            )));
        }
        matrices.push(if defect > crate::unitary::TAU_UNITARY {
            polar_unitary(&m)
        } else {
            m
        });
    }
    Ok(UnitaryRep::new_unchecked(Arc::clone(&rep.group), matrices))
}

fn refine_to_irreps(
    rep: &UnitaryRep,
    out: &mut Vec<UnitaryRep>,
    stream: &mut u64,
    depth: usize,
) -> Result<()> {
    if depth > 16 {
        return Err(Error::DecompositionFailed("recursion limit reached".into()));
    }
    let inner = rep.character_self_inner();
    if (inner - 1.0).abs() <= MULTIPLICITY_TOL {
        out.push(rep.clone());
        return Ok(());
    }
    for _attempt in 0..6 {
        *stream += 1;
        let blocks = commutant_split(rep, *stream);
        if blocks.len() > 1 {
            for q in &blocks {
                let sub = restrict(rep, q)?;
                refine_to_irreps(&sub, out, stream, depth + 1)?;
            }
            return Ok(());
        }
    }
    Err(Error::DecompositionFailed(format!(
        "failed to split a reducible block of dimension {}",
        rep.dim
    )))
}

/// Irreducibles of an arbitrary multiplication table, by decomposing the
/// regular representation. The first split is done implicitly (permutation
/// action on functions), so only irrep-sized dense blocks are materialized.
fn irreps_from_table(group: &Arc<FiniteGroup>) -> Result<Vec<UnitaryRep>> {
    let n = group.order();
    if n > IRREP_TABLE_ORDER_CAP {
        return Err(Error::GroupTooLarge { order: n, cap: IRREP_TABLE_ORDER_CAP });
    }
    let mut last_err = None;
    for master in 0..4u64 {
        match irreps_from_table_attempt(group, master) {
            Ok(reps) => return Ok(reps),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::DecompositionFailed("no attempts ran".into())))
}

fn irreps_from_table_attempt(group: &Arc<FiniteGroup>, master: u64) -> Result<Vec<UnitaryRep>> {
    let n = group.order();
    // Averaged random Hermitian for the regular representation, computed
    // through index permutations: h[a, b] = avg_g h0[g^-1 a, g^-1 b].
    let h0 = random_hermitian(n, &mut rng_for(0x5EED_2E6, master));
    let mut h = CMatrix::zeros(n, n);
    for g in group.elements() {
        let gi = group.inv(g);
        for a in 0..n {
            let ga = group.mul(gi, a);
            for b in 0..n {
                h[(a, b)] += h0[(ga, group.mul(gi, b))];
            }
        }
    }
    h /= C::new(n as f64, 0.0);
    let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
    let (vals, vecs) = hermitian_eigen(&h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());

    let mut found: Vec<UnitaryRep> = Vec::new();
    let mut stream = master * 1000;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[order[end]] - vals[order[end - 1]]).abs() <= 1e-6 {
            end += 1;
        }
        let c = end - start;
        let mut q = CMatrix::zeros(n, c);
        for (col, &i) in order[start..end].iter().enumerate() {
            q.set_column(col, &vecs.column(i));
        }
        // sigma(g) = Q^* R(g) Q with R(g) the left-translation permutation:
        // (R(g) Q)[a, c] = Q[g^-1 a, c].
        let mut matrices = Vec::with_capacity(n);
        for g in group.elements() {
            let gi = group.inv(g);
            let rq = CMatrix::from_fn(n, c, |a, cc| q[(group.mul(gi, a), cc)]);
            let m = q.adjoint() * rq;
            let defect = unitarity_defect(&m);
            if defect > 1e-7 {
                return Err(Error::DecompositionFailed(format!(
                    "regular block of dimension {c} not unitary (defect {defect:.3e})"
                )));
            }
            matrices.push(if defect > crate::unitary::TAU_UNITARY {
                polar_unitary(&m)
            } else {
                m
            });
        }
        let sub = UnitaryRep::new_unchecked(Arc::clone(group), matrices);
        refine_to_irreps(&sub, &mut found, &mut stream, 0)?;
        start = end;
    }

    // Deduplicate by character (characters of inequivalent irreducibles are
    // orthogonal, hence far apart).
    let mut unique: Vec<UnitaryRep> = Vec::new();
    for rep in found {
        let ch = rep.character();
        if !unique
            .iter()
            .any(|u| character_distance(&u.character(), &ch) < 1e-4)
        {
            unique.push(rep);
        }
    }
    let mut reps = unique;
    sort_canonically(&mut reps);
    verify_irrep_list(group, &reps)?;
    Ok(reps)
}

/// Multiplicity of each irreducible inside `rep`, via character inner
/// products; errors if any multiplicity is not an integer within
/// [`MULTIPLICITY_TOL`].
pub fn multiplicity_vector(rep: &UnitaryRep, irreps: &[UnitaryRep]) -> Result<Vec<usize>> {
    let n = rep.group.order() as f64;
    let ch = rep.character();
    let mut out = Vec::with_capacity(irreps.len());
    for (i, irr) in irreps.iter().enumerate() {
        let ci = irr.character();
        let inner: C =
            ch.iter().zip(&ci).map(|(x, y)| x * y.conj()).sum::<C>() / C::new(n, 0.0);
        let m = inner.re.round();
        if (inner.re - m).abs() > MULTIPLICITY_TOL || inner.im.abs() > MULTIPLICITY_TOL || m < 0.0
        {
            return Err(Error::DecompositionFailed(format!(
                "multiplicity of irreducible {i} is {inner}, not a nonnegative integer"
            )));
        }
        out.push(m as usize);
    }
    let total: usize = out.iter().zip(irreps).map(|(m, r)| m * r.dim).sum();
    if total != rep.dim {
        return Err(Error::DecompositionFailed(format!(
            "multiplicities account for dimension {total}, expected {}",
            rep.dim
        )));
    }
    Ok(out)
}

/// A unitary change of basis aligning a representation with a block-diagonal
/// direct sum of canonical irreducibles.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Unitary `u` with `u^* rho(g) u` block diagonal for all `g`.
    pub basis: CMatrix,
    /// Irreducible index (into the canonical list) of each diagonal block,
    /// in block order: canonical order, copies adjacent.
    pub blocks: Vec<usize>,
}

/// Decompose `rep` into canonical irreducibles: find a unitary basis change
/// after which every `rep.matrix(g)` is block diagonal with blocks equal to
/// the canonical irreducible matrices themselves (not merely equivalent).
pub fn decompose(rep: &UnitaryRep, irreps: &[UnitaryRep]) -> Result<Decomposition> {
    let mults = multiplicity_vector(rep, irreps)?;
    let n = rep.dim;
    let order = rep.group.order() as f64;
    let mut basis = CMatrix::zeros(n, n);
    let mut blocks = Vec::new();
    let mut col = 0;

    for (i, irr) in irreps.iter().enumerate() {
        let m = mults[i];
        if m == 0 {
            continue;
        }
        let d = irr.dim;
        let scale = C::new(d as f64 / order, 0.0);
        // Matrix-element averaging operators A_ab = (d/|G|) sum_g
        // conj(F(g)[a, b]) rho(g); A_00 projects onto the copies of the
        // first canonical basis vector, A_a0 transports them to index a.
        let mut a_ops: Vec<CMatrix> = Vec::with_capacity(d);
        for alpha in 0..d {
            let mut acc = CMatrix::zeros(n, n);
            for g in rep.group.elements() {
                acc += rep.matrix(g) * irr.matrix(g)[(alpha, 0)].conj();
            }
            a_ops.push(acc * scale);
        }
        let p = &a_ops[0];
        let (vals, vecs) = hermitian_eigen(p);
        let mut copy_cols: Vec<usize> = (0..n).filter(|&j| vals[j] > 0.5).collect();
        if copy_cols.len() != m {
            return Err(Error::DecompositionFailed(format!(
                "projector rank {} for irreducible {i}, expected multiplicity {m}",
                copy_cols.len()
            )));
        }
        // Deterministic copy order.
        copy_cols.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
        for &k in &copy_cols {
            let e: CVector = vecs.column(k).into_owned();
            for a_op in &a_ops {
                let t = a_op * &e;
                basis.set_column(col, &t);
                col += 1;
            }
            blocks.push(i);
        }
    }
    if col != n {
        return Err(Error::DecompositionFailed(format!(
            "assembled {col} basis columns, expected {n}"
        )));
    }
    let defect = unitarity_defect(&basis);
    if defect > 1e-8 {
        return Err(Error::DecompositionFailed(format!(
            "assembled basis is not unitary (defect {defect:.3e})"
        )));
    }
    let basis = if defect > crate::unitary::TAU_UNITARY {
        polar_unitary(&basis)
    } else {
        basis
    };

    // Verify the blocks really are the canonical matrices.
    let mut expected_big = Vec::with_capacity(rep.group.order());
    for g in rep.group.elements() {
        let block_mats: Vec<CMatrix> =
            blocks.iter().map(|&i| irreps[i].matrix(g).clone()).collect();
        expected_big.push(direct_sum_blocks(&block_mats));
    }
    for g in rep.group.elements() {
        let got = basis.adjoint() * rep.matrix(g) * &basis;
        if max_abs(&(&got - &expected_big[g])) > 1e-8 {
            return Err(Error::DecompositionFailed(format!(
                "block alignment defect {:.3e} at element {g}",
                max_abs(&(got - &expected_big[g]))
            )));
        }
    }
    Ok(Decomposition { basis, blocks })
}

/// Seeded random multiplicity vector whose assembled dimension lies
/// between 1 and `max_dim` (clamped to the dimension cap).
pub fn random_multiplicities<R: Rng>(
    irreps: &[UnitaryRep],
    max_dim: usize,
    rng: &mut R,
) -> Vec<usize> {
    let max_dim = max_dim.min(DIM_CAP).max(1);
    let mut m = vec![0usize; irreps.len()];
    let mut total = 0usize;
    loop {
        let fits: Vec<usize> = irreps
            .iter()
            .enumerate()
            .filter(|(_, r)| total + r.dim <= max_dim)
            .map(|(i, _)| i)
            .collect();
        if fits.is_empty() {
            break;
        }
        let i = fits[rng.gen_range(0..fits.len())];
        m[i] += 1;
        total += irreps[i].dim;
        if total >= 1 && rng.gen_bool(0.25) {
            break;
        }
    }
    if total == 0 {
        m[0] = 1;
    }
    m
}

/// Representation with the given multiplicity vector in a scrambled basis:
/// assembles the direct sum (canonical irreducible order, each repeated
/// `multiplicities[i]` times) and conjugates it by a Haar-random unitary.
/// Deterministic per RNG state; the multiplicity vector round-trips.
pub fn random_rep<R: Rng>(
    group: &Arc<FiniteGroup>,
    irreps: &[UnitaryRep],
    multiplicities: &[usize],
    rng: &mut R,
) -> Result<UnitaryRep> {
    if multiplicities.len() != irreps.len() {
        return Err(Error::InvalidArgument(format!(
            "need one multiplicity per irreducible: got {}, the group has {}",
            multiplicities.len(),
            irreps.len()
        )));
    }
    let total: usize = multiplicities
        .iter()
        .zip(irreps)
        .map(|(&m, r)| m * r.dim)
        .sum();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "at least one irreducible must appear with positive multiplicity".into(),
        ));
    }
    let u = crate::linalg::haar_unitary(total, rng);
    let matrices = group
        .elements()
        .map(|g| {
            let blocks: Vec<CMatrix> = multiplicities
                .iter()
                .zip(irreps)
                .flat_map(|(&m, r)| std::iter::repeat_with(|| r.matrix(g).clone()).take(m))
                .collect();
            &u * direct_sum_blocks(&blocks) * u.adjoint()
        })
        .map(|m| {
            if unitarity_defect(&m) > crate::unitary::TAU_UNITARY {
                polar_unitary(&m)
            } else {
                m
            }
        })
        .collect();
    Ok(UnitaryRep::new_unchecked(Arc::clone(group), matrices))
}

/// Close a finite set of unitary matrices under multiplication, recovering
/// the abstract group they generate together with its defining
/// representation. Fails if the closure exceeds the group order cap or if
/// products cannot be matched to elements unambiguously.
pub fn unitary_subgroup(generators: &[CMatrix]) -> Result<(Arc<FiniteGroup>, UnitaryRep)> {
    if generators.is_empty() {
        return Err(Error::InvalidArgument("no generators given".into()));
    }
    let dim = generators[0].nrows();
    let match_tol = 1e-6;
    let mut elements: Vec<CMatrix> = vec![CMatrix::identity(dim, dim)];
    let mut clean_gens = Vec::with_capacity(generators.len());
    for g in generators {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(Error::DimMismatch { expected: dim, got: g.nrows().max(g.ncols()) });
        }
        clean_gens.push(UnitaryMatrix::new(g.clone())?.into_matrix());
    }
    let find = |elements: &[CMatrix], m: &CMatrix| -> Option<usize> {
        elements.iter().position(|e| max_abs(&(e - m)) < match_tol)
    };
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        for g in &clean_gens {
            let prod = &elements[idx] * g;
            if find(&elements, &prod).is_none() {
                if elements.len() >= crate::group::GROUP_ORDER_CAP {
                    return Err(Error::GroupTooLarge {
                        order: elements.len() + 1,
                        cap: crate::group::GROUP_ORDER_CAP,
                    });
                }
                elements.push(prod);
                frontier.push(elements.len() - 1);
            }
        }
    }
    let n = elements.len();
    // Sanity: elements must be pairwise well separated for matching to be
    // meaningful.
    for i in 0..n {
        for j in (i + 1)..n {
            if max_abs(&(&elements[i] - &elements[j])) < 100.0 * match_tol {
                return Err(Error::InvalidArgument(
                    "unitary closure produced nearly-coincident elements".into(),
                ));
            }
        }
    }
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let prod = &elements[i] * &elements[j];
            let Some(k) = find(&elements, &prod) else {
                return Err(Error::InvalidGroup(
                    "unitary closure is not multiplicatively closed".into(),
                ));
            };
            table[i][j] = k;
        }
    }
    let labels = (0..n).map(|i| format!("u{i}")).collect();
    let group = Arc::new(FiniteGroup::from_table(table, Some(labels))?);
    let rep = UnitaryRep::new(Arc::clone(&group), elements)?;
    Ok((group, rep))
}

/// Length function induced by a faithful-by-construction representation:
/// `l(g) = length of rho(g)` in the chosen metric. Validated, and
/// classified as a length or semi-length depending on faithfulness.
pub fn length_from_rep(metric: MetricChoice, rep: &UnitaryRep) -> Result<LengthFunction> {
    let values = rep
        .group()
        .elements()
        .map(|g| unitary_length(metric, rep.matrix(g)))
        .collect();
    LengthFunction::new(rep.group(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::word_length;

    fn z(n: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(n).unwrap())
    }

    #[test]
    fn regular_rep_character_is_order_at_identity_zero_elsewhere() {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        let reg = regular_rep(&g).unwrap();
        let ch = reg.character();
        assert!((ch[0] - C::new(6.0, 0.0)).norm() < 1e-12);
        for gg in 1..6 {
            assert!(ch[gg].norm() < 1e-12);
        }
        assert!((reg.character_self_inner() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn cyclic_irreps_are_frequency_ordered_and_exact_for_z4() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        assert_eq!(irreps.len(), 4);
        for (j, r) in irreps.iter().enumerate() {
            assert_eq!(r.dim(), 1);
            // chi_j(k) = i^{jk}, exactly.
            for k in 0..4 {
                let expected = match (j * k) % 4 {
                    0 => C::new(1.0, 0.0),
                    1 => C::new(0.0, 1.0),
                    2 => C::new(-1.0, 0.0),
                    _ => C::new(0.0, -1.0),
                };
                assert_eq!(r.matrix(k)[(0, 0)], expected, "chi_{j}({k})");
            }
        }
    }

    #[test]
    fn cyclic_irreps_of_z5_are_frequency_ordered() {
        let g = z(5);
        let irreps = irreps_of(&g).unwrap();
        for (j, r) in irreps.iter().enumerate() {
            let expected = root_of_unity(j, 5);
            assert!((r.matrix(1)[(0, 0)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn klein_four_group_irreps() {
        let z2 = z(2);
        let v4 = Arc::new(FiniteGroup::product(&z2, &z2).unwrap());
        let irreps = irreps_of(&v4).unwrap();
        assert_eq!(irreps.len(), 4);
        for r in &irreps {
            assert_eq!(r.dim(), 1);
            for g in v4.elements() {
                let v = r.matrix(g)[(0, 0)];
                assert!(v == C::new(1.0, 0.0) || v == C::new(-1.0, 0.0));
            }
        }
        // Trivial first.
        for g in v4.elements() {
            assert_eq!(irreps[0].matrix(g)[(0, 0)], C::new(1.0, 0.0));
        }
    }

    #[test]
    fn dihedral_irreps_closed_form() {
        for (n, dims) in [(3usize, vec![1, 1, 2]), (4, vec![1, 1, 1, 1, 2]), (5, vec![1, 1, 2, 2]), (6, vec![1, 1, 1, 1, 2, 2])] {
            let g = Arc::new(FiniteGroup::dihedral(n).unwrap());
            let irreps = irreps_of(&g).unwrap();
            let got: Vec<usize> = irreps.iter().map(|r| r.dim()).collect();
            assert_eq!(got, dims, "dims for n = {n}");
            // Validate each irrep as a full representation.
            for r in &irreps {
                UnitaryRep::new(Arc::clone(&g), r.matrices().to_vec()).unwrap();
                assert!(r.is_irreducible());
            }
        }
    }

    #[test]
    fn table_path_matches_closed_form_for_dihedral_three() {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        // Rebuild the same group as an anonymous table.
        let table: Vec<Vec<usize>> = (0..6)
            .map(|a| (0..6).map(|b| g.mul(a, b)).collect())
            .collect();
        let anon = Arc::new(FiniteGroup::from_table(table, None).unwrap());
        let from_table = irreps_of(&anon).unwrap();
        let closed = irreps_of(&g).unwrap();
        assert_eq!(from_table.len(), closed.len());
        for (a, b) in from_table.iter().zip(&closed) {
            assert_eq!(a.dim(), b.dim());
            let (ca, cb) = (a.character(), b.character());
            assert!(character_distance(&ca, &cb) < 1e-8);
        }
    }

    #[test]
    fn tensor_and_dual_permute_z4_characters() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        // chi_1 tensor chi_1 = chi_2
        let t = tensor(&irreps[1], &irreps[1]).unwrap();
        assert!(character_distance(&t.character(), &irreps[2].character()) < 1e-12);
        // dual(chi_1) = chi_3
        let d = dual_rep(&irreps[1]);
        assert!(character_distance(&d.character(), &irreps[3].character()) < 1e-12);
    }

    #[test]
    fn rep_validation_reports_worst_pair() {
        let g = z(4);
        // rho(1) = i but rho(2) = 1: fails at (1, 1).
        let mats = vec![
            CMatrix::from_element(1, 1, C::new(1.0, 0.0)),
            CMatrix::from_element(1, 1, C::new(0.0, 1.0)),
            CMatrix::from_element(1, 1, C::new(1.0, 0.0)),
            CMatrix::from_element(1, 1, C::new(0.0, -1.0)),
        ];
        match UnitaryRep::new(Arc::clone(&g), mats) {
            Err(Error::NotARepresentation { a, b, defect }) => {
                assert_eq!((a, b), (1, 1));
                assert!((defect - 2.0).abs() < 1e-12);
            }
            other => panic!("expected NotARepresentation, got {other:?}"),
        }
    }

    #[test]
    fn multiplicities_and_padding() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        let chi1 = &irreps[1];
        assert_eq!(multiplicity_vector(chi1, &irreps).unwrap(), vec![0, 1, 0, 0]);
        let padded = pad(chi1, 3).unwrap();
        assert_eq!(
            multiplicity_vector(&padded, &irreps).unwrap(),
            vec![2, 1, 0, 0]
        );
        assert!(pad(&padded, 2).is_err());
    }

    #[test]
    fn decompose_random_rep_of_z4() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        let mut rng = rng_for(2024, 7);
        let m = random_multiplicities(&irreps, 5, &mut rng);
        let rep = random_rep(&g, &irreps, &m, &mut rng).unwrap();
        let dec = decompose(&rep, &irreps).unwrap();
        assert_eq!(dec.blocks.len(), rep.dim());
        // blocks sorted canonically
        let mut sorted = dec.blocks.clone();
        sorted.sort();
        assert_eq!(sorted, dec.blocks);
    }

    #[test]
    fn decompose_random_rep_of_dihedral_three() {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        let irreps = irreps_of(&g).unwrap();
        let mut rng = rng_for(2025, 3);
        for _ in 0..5 {
            let m = random_multiplicities(&irreps, 6, &mut rng);
            let rep = random_rep(&g, &irreps, &m, &mut rng).unwrap();
            let dec = decompose(&rep, &irreps).unwrap();
            let dims: usize = dec.blocks.iter().map(|&i| irreps[i].dim()).sum();
            assert_eq!(dims, rep.dim());
        }
    }

    #[test]
    fn decompose_regular_rep_of_dihedral_three() {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        let irreps = irreps_of(&g).unwrap();
        let reg = regular_rep(&g).unwrap();
        assert_eq!(
            multiplicity_vector(&reg, &irreps).unwrap(),
            vec![1, 1, 2]
        );
        let dec = decompose(&reg, &irreps).unwrap();
        assert_eq!(dec.blocks, vec![0, 1, 2, 2]);
    }

    #[test]
    fn pullback_along_quotient() {
        let z8 = z(8);
        let z4 = z(4);
        let hom = GroupHom::new(
            Arc::clone(&z8),
            Arc::clone(&z4),
            (0..8).map(|x| x % 4).collect(),
        )
        .unwrap();
        let irreps4 = irreps_of(&z4).unwrap();
        let pulled = pullback(&hom, &irreps4[1]).unwrap();
        // Validates as a representation of Z8.
        UnitaryRep::new(Arc::clone(&z8), pulled.matrices().to_vec()).unwrap();
        assert_eq!(pulled.matrix(5)[(0, 0)], irreps4[1].matrix(1)[(0, 0)]);
    }

    #[test]
    fn quaternion_group_from_unitary_closure() {
        let i = C::new(0.0, 1.0);
        let zero = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        let gi = CMatrix::from_row_slice(2, 2, &[i, zero, zero, -i]);
        let gj = CMatrix::from_row_slice(2, 2, &[zero, one, -one, zero]);
        let (group, rep) = unitary_subgroup(&[gi.clone(), gj.clone()]).unwrap();
        assert_eq!(group.order(), 8);
        assert!(!group.is_abelian());
        let irreps = irreps_of(&group).unwrap();
        let dims: Vec<usize> = irreps.iter().map(|r| r.dim()).collect();
        assert_eq!(dims, vec![1, 1, 1, 1, 2]);
        // The defining representation is the 2-dimensional irreducible.
        assert_eq!(
            multiplicity_vector(&rep, &irreps).unwrap(),
            vec![0, 0, 0, 0, 1]
        );
        // And its operator length function is a true length.
        let l = length_from_rep(MetricChoice::Operator, &rep).unwrap();
        assert!(l.is_length());
        assert!((l.value(group.identity())).abs() == 0.0);
    }

    #[test]
    fn random_rep_is_seeded_and_round_trips_multiplicities() {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        let irreps = irreps_of(&g).unwrap();
        let m = vec![1, 0, 2];
        let a = random_rep(&g, &irreps, &m, &mut rng_for(9, 0)).unwrap();
        let b = random_rep(&g, &irreps, &m, &mut rng_for(9, 0)).unwrap();
        assert_eq!(a.dim(), 5);
        for g in 0..6 {
            assert!(max_abs(&(a.matrix(g) - b.matrix(g))) == 0.0);
        }
        // The multiplicity vector survives the basis scramble, whatever the
        // seed, and equal multiplicities force equal characters.
        for seed in 0..10 {
            let r = random_rep(&g, &irreps, &m, &mut rng_for(seed, 1)).unwrap();
            assert_eq!(multiplicity_vector(&r, &irreps).unwrap(), m);
            for (x, y) in r.character().iter().zip(a.character()) {
                assert!((x - y).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn random_rep_of_the_trivial_multiplicity_is_the_trivial_rep() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        let r = random_rep(&g, &irreps, &[1, 0, 0, 0], &mut rng_for(3, 0)).unwrap();
        assert_eq!(r.dim(), 1);
        for g in 0..4 {
            assert!((r.matrix(g)[(0, 0)] - C::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_rep_rejects_bad_multiplicities() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        assert!(matches!(
            random_rep(&g, &irreps, &[1, 0], &mut rng_for(0, 0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            random_rep(&g, &irreps, &[0, 0, 0, 0], &mut rng_for(0, 0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn random_multiplicities_stay_within_the_requested_dimension() {
        let g = Arc::new(FiniteGroup::dihedral(3).unwrap());
        let irreps = irreps_of(&g).unwrap();
        for seed in 0..10 {
            let mut rng = rng_for(seed, 1);
            let m = random_multiplicities(&irreps, 6, &mut rng);
            let dim: usize = m.iter().zip(&irreps).map(|(&m, r)| m * r.dim()).sum();
            assert!(dim >= 1 && dim <= 6);
        }
    }

    #[test]
    fn length_from_rep_on_z4_defining_character() {
        let g = z(4);
        let irreps = irreps_of(&g).unwrap();
        let l = length_from_rep(MetricChoice::Arclength, &irreps[1]).unwrap();
        // angles 0, pi/2, pi, -pi/2
        let expected = [0.0, PI / 2.0, PI, PI / 2.0];
        for (a, b) in l.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        // Word length on Z4 equals the arclength length of chi_1 scaled by pi/2.
        let w = word_length(&g, &[1], None).unwrap();
        for g in 0..4 {
            assert!((l.value(g) - PI / 2.0 * w.value(g)).abs() < 1e-12);
        }
    }
}
