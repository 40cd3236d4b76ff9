//! Finite groups, length functions, and group homomorphisms.
//!
//! A group is stored as an explicit multiplication table over elements
//! `0..order`, with the identity always present and inverses precomputed.
//! Length functions are per-element nonnegative values (possibly `+inf`)
//! satisfying `l(e) = 0`, `l(g) = l(g^-1)` and `l(gh) <= l(g) + l(h)`;
//! a *length* additionally vanishes only at the identity, while a
//! *semi-length* may vanish elsewhere.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest supported group order.
pub const GROUP_ORDER_CAP: usize = 4096;

/// Tolerance used when validating length-function axioms numerically.
pub const LENGTH_AXIOM_TOL: f64 = 1e-9;

/// Structural family tag, used to pick closed-form irreducible
/// representations where available.
#[derive(Debug, Clone)]
pub enum GroupKind {
    /// Cyclic group of order `n`; element `k` is the `k`-fold sum of the
    /// generator.
    Cyclic(usize),
    /// Dihedral group of order `2n`: elements `0..n` are rotations `r^k`,
    /// elements `n..2n` are reflections `s r^k`.
    Dihedral(usize),
    /// Direct product; element `i * |B| + j` is the pair `(i, j)`.
    Product(Arc<FiniteGroup>, Arc<FiniteGroup>),
    /// Arbitrary multiplication table.
    Table,
}

impl std::fmt::Display for GroupKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupKind::Cyclic(n) => write!(f, "cyclic({n})"),
            GroupKind::Dihedral(n) => write!(f, "dihedral({n})"),
            GroupKind::Product(a, b) => write!(f, "product({}, {})", a.kind(), b.kind()),
            GroupKind::Table => write!(f, "table"),
        }
    }
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    identity: usize,
    abelian: bool,
    labels: Vec<String>,
    kind: GroupKind,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.identity == other.identity && self.mul == other.mul
    }
}

impl FiniteGroup {
    /// Build a group from a multiplication table `table[a][b] = a * b`.
    ///
    /// Validates the group axioms: closure, associativity (exhaustively up to
    /// order 256, on a deterministic sample of triples above), a two-sided
    /// identity, and inverses.
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if order > GROUP_ORDER_CAP {
            return Err(Error::GroupTooLarge { order, cap: GROUP_ORDER_CAP });
        }
        let mut mul = vec![0usize; order * order];
        for (a, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidGroup(format!(
                    "row {a} has {} entries, expected {order}",
                    row.len()
                )));
            }
            for (b, &c) in row.iter().enumerate() {
                if c >= order {
                    return Err(Error::InvalidGroup(format!(
                        "entry ({a}, {b}) = {c} is out of range"
                    )));
                }
                mul[a * order + b] = c;
            }
        }

        // Identity.
        let mut identity = None;
        for e in 0..order {
            if (0..order).all(|a| mul[e * order + a] == a && mul[a * order + e] == a) {
                identity = Some(e);
                break;
            }
        }
        let identity = identity
            .ok_or_else(|| Error::InvalidGroup("no two-sided identity element".into()))?;

        // Inverses.
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            for b in 0..order {
                if mul[a * order + b] == identity && mul[b * order + a] == identity {
                    inv[a] = b;
                    break;
                }
            }
            if inv[a] == usize::MAX {
                return Err(Error::InvalidGroup(format!("element {a} has no inverse")));
            }
        }

        // Associativity.
        let check = |a: usize, b: usize, c: usize| -> bool {
            mul[mul[a * order + b] * order + c] == mul[a * order + mul[b * order + c]]
        };
        if order <= 256 {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if !check(a, b, c) {
                            return Err(Error::InvalidGroup(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng_state = 0x9e3779b97f4a7c15u64;
            let mut next = || {
                rng_state ^= rng_state << 13;
                rng_state ^= rng_state >> 7;
                rng_state ^= rng_state << 17;
                (rng_state % order as u64) as usize
            };
            for _ in 0..200_000 {
                let (a, b, c) = (next(), next(), next());
                if !check(a, b, c) {
                    return Err(Error::InvalidGroup(format!(
                        "associativity fails at ({a}, {b}, {c})"
                    )));
                }
            }
        }

        let abelian =
            (0..order).all(|a| (a..order).all(|b| mul[a * order + b] == mul[b * order + a]));
        let labels =
            labels.unwrap_or_else(|| (0..order).map(|g| g.to_string()).collect());
        if labels.len() != order {
            return Err(Error::InvalidGroup(format!(
                "{} labels for {order} elements",
                labels.len()
            )));
        }
        Ok(FiniteGroup { order, mul, inv, identity, abelian, labels, kind: GroupKind::Table })
    }

    /// Cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        if n > GROUP_ORDER_CAP {
            return Err(Error::GroupTooLarge { order: n, cap: GROUP_ORDER_CAP });
        }
        let mut mul = vec![0usize; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = (a + b) % n;
            }
        }
        let inv = (0..n).map(|a| (n - a) % n).collect();
        let labels = (0..n).map(|g| g.to_string()).collect();
        Ok(FiniteGroup {
            order: n,
            mul,
            inv,
            identity: 0,
            abelian: true,
            labels,
            kind: GroupKind::Cyclic(n),
        })
    }

    /// Dihedral group of order `2n` (symmetries of the regular `n`-gon),
    /// with `n >= 1`. Elements `k < n` are rotations `r^k`; elements
    /// `n + k` are reflections `s r^k`; relations `r^n = s^2 = e`,
    /// `s r s = r^-1`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("dihedral parameter must be >= 1".into()));
        }
        let order = 2 * n;
        if order > GROUP_ORDER_CAP {
            return Err(Error::GroupTooLarge { order, cap: GROUP_ORDER_CAP });
        }
        let idx = |a: usize, i: usize| a * n + i;
        let mut mul = vec![0usize; order * order];
        for a in 0..2 {
            for i in 0..n {
                for b in 0..2 {
                    for j in 0..n {
                        // (s^a r^i)(s^b r^j) = s^(a+b) r^(i*(-1)^b + j)
                        let sgn_i = if b == 0 { i } else { (n - i) % n };
                        let c = ((a + b) % 2, (sgn_i + j) % n);
                        mul[idx(a, i) * order + idx(b, j)] = idx(c.0, c.1);
                    }
                }
            }
        }
        let mut inv = vec![0usize; order];
        for a in 0..2 {
            for i in 0..n {
                inv[idx(a, i)] = if a == 0 { idx(0, (n - i) % n) } else { idx(1, i) };
            }
        }
        let mut labels = Vec::with_capacity(order);
        for i in 0..n {
            labels.push(format!("r{i}"));
        }
        for i in 0..n {
            labels.push(format!("sr{i}"));
        }
        Ok(FiniteGroup {
            order,
            mul,
            inv,
            identity: 0,
            abelian: n <= 2,
            labels,
            kind: GroupKind::Dihedral(n),
        })
    }

    /// Direct product `A x B`; element `i * |B| + j` is the pair `(i, j)`.
    pub fn product(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> Result<Self> {
        let order = a.order * b.order;
        if order > GROUP_ORDER_CAP {
            return Err(Error::GroupTooLarge { order, cap: GROUP_ORDER_CAP });
        }
        let nb = b.order;
        let mut mul = vec![0usize; order * order];
        for i1 in 0..a.order {
            for j1 in 0..b.order {
                for i2 in 0..a.order {
                    for j2 in 0..b.order {
                        let x = i1 * nb + j1;
                        let y = i2 * nb + j2;
                        mul[x * order + y] = a.mul(i1, i2) * nb + b.mul(j1, j2);
                    }
                }
            }
        }
        let mut inv = vec![0usize; order];
        let mut labels = Vec::with_capacity(order);
        for i in 0..a.order {
            for j in 0..b.order {
                inv[i * nb + j] = a.inv(i) * nb + b.inv(j);
                labels.push(format!("({},{})", a.labels[i], b.labels[j]));
            }
        }
        Ok(FiniteGroup {
            order,
            mul,
            inv,
            identity: a.identity * nb + b.identity,
            abelian: a.abelian && b.abelian,
            labels,
            kind: GroupKind::Product(Arc::clone(a), Arc::clone(b)),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// A small generating set, found greedily: repeatedly adjoin the first
    /// element outside the subgroup generated so far.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut reached = vec![false; self.order];
        reached[self.identity] = true;
        let mut count = 1;
        while count < self.order {
            let g = (0..self.order).find(|&g| !reached[g]).unwrap();
            gens.push(g);
            // BFS closure with the enlarged generating set.
            let mut queue: Vec<usize> =
                (0..self.order).filter(|&x| reached[x]).collect();
            while let Some(x) = queue.pop() {
                for &s in &gens {
                    let y = self.mul(x, s);
                    if !reached[y] {
                        reached[y] = true;
                        count += 1;
                        queue.push(y);
                    }
                }
            }
        }
        gens
    }
}

/// Whether two group handles denote the same group (pointer or structural
/// equality).
pub fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Flag distinguishing true lengths from semi-lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthKind {
    /// Vanishes only at the identity.
    Length,
    /// May vanish at other elements too.
    SemiLength,
}

/// A (semi-)length function on a finite group. Values may be `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthFunction {
    values: Vec<f64>,
    kind: LengthKind,
}

impl LengthFunction {
    /// Validate the axioms and classify the result as a length or
    /// semi-length.
    pub fn new(group: &FiniteGroup, values: Vec<f64>) -> Result<Self> {
        let n = group.order();
        if values.len() != n {
            return Err(Error::InvalidLength(format!(
                "{} values for a group of order {n}",
                values.len()
            )));
        }
        let tol = LENGTH_AXIOM_TOL;
        let mut values = values;
        for (g, v) in values.iter().enumerate() {
            if v.is_nan() || *v < 0.0 {
                return Err(Error::InvalidLength(format!(
                    "value at element {g} is {v}, must be nonnegative"
                )));
            }
        }
        let e = group.identity();
        if values[e] > tol {
            return Err(Error::InvalidLength(format!(
                "value at the identity is {}, must be 0",
                values[e]
            )));
        }
        values[e] = 0.0;
        for g in group.elements() {
            let gi = group.inv(g);
            let (a, b) = (values[g], values[gi]);
            let symmetric = if a.is_infinite() || b.is_infinite() {
                a == b
            } else {
                (a - b).abs() <= tol
            };
            if !symmetric {
                return Err(Error::InvalidLength(format!(
                    "symmetry fails: l({g}) = {a} but l({gi}) = {b}"
                )));
            }
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if values[gh] > values[g] + values[h] + tol {
                    return Err(Error::InvalidLength(format!(
                        "subadditivity fails: l({gh}) = {} > l({g}) + l({h}) = {}",
                        values[gh],
                        values[g] + values[h]
                    )));
                }
            }
        }
        let kind = if group.elements().all(|g| g == e || values[g] > 0.0) {
            LengthKind::Length
        } else {
            LengthKind::SemiLength
        };
        Ok(LengthFunction { values, kind })
    }

    pub fn value(&self, g: usize) -> f64 {
        self.values[g]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> LengthKind {
        self.kind
    }

    pub fn is_length(&self) -> bool {
        self.kind == LengthKind::Length
    }

    /// All values finite?
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Elements `g` with `0 < l(g) < inf` — the valid denominators for the
    /// suprema defining the dual metrics.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0 && v.is_finite())
            .map(|(g, _)| g)
            .collect()
    }
}

/// Word length for a generating set with optional positive weights
/// (default 1). Generators are symmetrized with `w(s^-1) = w(s)` so the
/// result is symmetric; elements outside the generated subgroup get `+inf`.
pub fn word_length(
    group: &FiniteGroup,
    gens: &[usize],
    weights: Option<&[f64]>,
) -> Result<LengthFunction> {
    if gens.is_empty() && group.order() > 1 {
        return Err(Error::InvalidArgument("empty generating set".into()));
    }
    for &g in gens {
        if g >= group.order() {
            return Err(Error::InvalidArgument(format!("generator {g} out of range")));
        }
    }
    let weights: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != gens.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} weights for {} generators",
                    w.len(),
                    gens.len()
                )));
            }
            for &x in w {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "generator weights must be positive and finite, got {x}"
                    )));
                }
            }
            w.to_vec()
        }
        None => vec![1.0; gens.len()],
    };

    // Symmetrized generator list.
    let mut edges: Vec<(usize, f64)> = Vec::new();
    for (&s, &w) in gens.iter().zip(&weights) {
        edges.push((s, w));
        edges.push((group.inv(s), w));
    }

    // Dijkstra from the identity (dense O(n^2), plenty for order <= 4096).
    let n = group.order();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[group.identity()] = 0.0;
    loop {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if !done[v]
                && dist[v].is_finite()
                && best.map_or(true, |b| dist[v] < dist[b])
            {
                best = Some(v);
            }
        }
        let Some(v) = best else { break };
        done[v] = true;
        for &(s, w) in &edges {
            let u = group.mul(v, s);
            if dist[v] + w < dist[u] {
                dist[u] = dist[v] + w;
            }
        }
    }
    LengthFunction::new(group, dist)
}

/// Seeded random genuine length function: positive values are drawn for
/// every non-identity element, symmetrized by the pairwise minimum with the
/// inverse, then closed under subadditivity by a min-plus fixpoint (each
/// value becomes the cheapest factorization cost). The result vanishes only
/// at the identity, since every factorization of a non-identity element
/// contains a non-identity factor.
pub fn random_length<R: Rng>(group: &FiniteGroup, rng: &mut R) -> LengthFunction {
    let n = group.order();
    let id = group.identity();
    let mut v: Vec<f64> = (0..n)
        .map(|g| if g == id { 0.0 } else { rng.gen_range(0.25..2.0) })
        .collect();
    for g in 0..n {
        let gi = group.inv(g);
        let m = v[g].min(v[gi]);
        v[g] = m;
        v[gi] = m;
    }
    loop {
        let mut changed = false;
        for g in 0..n {
            for h in 0..n {
                let s = v[g] + v[h];
                let gh = group.mul(g, h);
                if s < v[gh] {
                    v[gh] = s;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    LengthFunction::new(group, v).expect("the closure enforces every axiom")
}

/// A homomorphism between finite groups, stored as the image of every
/// source element.
#[derive(Debug, Clone)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    map: Vec<usize>,
}

impl GroupHom {
    /// Validate that `map` is a homomorphism `source -> target`.
    pub fn new(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        map: Vec<usize>,
    ) -> Result<Self> {
        if map.len() != source.order() {
            return Err(Error::InvalidArgument(format!(
                "map has {} entries for a source of order {}",
                map.len(),
                source.order()
            )));
        }
        for (g, &h) in map.iter().enumerate() {
            if h >= target.order() {
                return Err(Error::InvalidArgument(format!(
                    "image of {g} is {h}, out of range"
                )));
            }
        }
        if map[source.identity()] != target.identity() {
            return Err(Error::NotAHomomorphism {
                a: source.identity(),
                b: source.identity(),
            });
        }
        for a in source.elements() {
            for b in source.elements() {
                if map[source.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(Error::NotAHomomorphism { a, b });
                }
            }
        }
        Ok(GroupHom { source, target, map })
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn apply(&self, g: usize) -> usize {
        self.map[g]
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.order()];
        for &h in &self.map {
            hit[h] = true;
        }
        hit.into_iter().all(|x| x)
    }
}

/// Push a length function forward along a homomorphism:
/// `l'(h) = min { l(g) : phi(g) = h }`, with `+inf` on elements outside the
/// image. The result is validated (it is automatically a semi-length when
/// `phi` is a homomorphism).
pub fn quotient_length(hom: &GroupHom, l: &LengthFunction) -> Result<LengthFunction> {
    if l.values().len() != hom.source.order() {
        return Err(Error::InvalidLength(
            "length function does not match the source group".into(),
        ));
    }
    let mut values = vec![f64::INFINITY; hom.target.order()];
    for g in hom.source.elements() {
        let h = hom.apply(g);
        if l.value(g) < values[h] {
            values[h] = l.value(g);
        }
    }
    LengthFunction::new(&hom.target, values)
}

/// Result of checking `l_target(phi(g)) <= l_source(g)` for all `g`.
#[derive(Debug, Clone)]
pub struct NonExpansionCheck {
    pub ok: bool,
    /// Element with the largest excess, when any comparison is meaningful.
    pub worst_element: Option<usize>,
    /// Largest value of `l_target(phi(g)) - l_source(g)` over finite pairs.
    pub max_excess: f64,
}

/// Check that pushing forward along `hom` does not increase lengths.
pub fn check_nonexpanding(
    hom: &GroupHom,
    l_source: &LengthFunction,
    l_target: &LengthFunction,
) -> Result<NonExpansionCheck> {
    if l_source.values().len() != hom.source.order() {
        return Err(Error::InvalidLength(
            "source length does not match the source group".into(),
        ));
    }
    if l_target.values().len() != hom.target.order() {
        return Err(Error::InvalidLength(
            "target length does not match the target group".into(),
        ));
    }
    let mut ok = true;
    let mut worst: Option<usize> = None;
    let mut max_excess = f64::NEG_INFINITY;
    for g in hom.source.elements() {
        let lhs = l_target.value(hom.apply(g));
        let rhs = l_source.value(g);
        if lhs.is_infinite() && rhs.is_infinite() {
            continue;
        }
        let excess = lhs - rhs; // inf - finite = inf, finite - inf = -inf
        if excess > max_excess {
            max_excess = excess;
            worst = Some(g);
        }
        if excess > LENGTH_AXIOM_TOL {
            ok = false;
        }
    }
    Ok(NonExpansionCheck { ok, worst_element: worst, max_excess })
}
