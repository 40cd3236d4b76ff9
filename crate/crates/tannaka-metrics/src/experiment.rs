//! Spec-driven experiment harness.
//!
//! An [`ExperimentSpec`] is a JSON document naming a command plus the data
//! it needs; [`run`] executes it and writes `report.json` / `report.csv`
//! into an output directory. Reports are byte-identical for identical spec
//! and seed: all randomness flows from the spec seed through ChaCha8
//! streams, and parallel reductions are order-independent. Every report
//! embeds the fully resolved spec, so it is sufficient to reproduce itself.
//!
//! Output is buffered: nothing is written until the computation succeeded,
//! so a validation failure leaves no partial files. Optimizer
//! non-convergence is not a failure — the report is still written and the
//! outcome flags it so a front-end can signal it (exit code 3).

use crate::dual::{
    dreps, dreps_oracle, stability_check_with, DoubleDual, DrepsOptions, DrepsOutcome,
    DualityReport, GroupSummary, RepFamily,
};
use crate::error::{Error, Result};
use crate::group::{word_length, FiniteGroup, LengthFunction};
use crate::lipnorm::{lip_comparison, LipComparisonReport, NormFlag};
use crate::pontryagin::{
    dual_length_hat, lattice_dual_length, lattice_dual_length_sampled, torus_quotient_check,
    z_circle_check, QuadraticLattice, TorusQuotientReport, ZCircleReport,
};
use crate::linalg::CMatrix;
use crate::rep::{direct_sum, irreps_of, random_rep, UnitaryRep};
use crate::unitary::{MetricChoice, DIM_CAP};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Envelope schema for every report this harness writes.
pub const REPORT_SCHEMA: &str = "tannaka-metrics.report.v1";
/// Name and version of the seeded generator behind all randomness.
pub const GENERATOR: &str = "chacha8-v1";

/// A nonnegative extended real that serializes as a number or the string
/// `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a nonnegative number or the string \"inf\"")
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(ExtReal(f64::INFINITY)),
                    other => Err(E::custom(format!(
                        "expected a number or \"inf\", got {other:?}"
                    ))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Which computation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Dual and double-dual lengths of a (semi-)length on a finite group.
    Dual,
    /// Full stability verdict for a genuine length function.
    Stability,
    /// Closed-form continuous duals: lattice or circle.
    Pontryagin,
    /// Sampled torus-quotient validation.
    Torus,
    /// Distance between two representations.
    Dreps,
    /// Lipschitz-seminorm comparison of two representation algebras.
    Lipnorm,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Dual => "dual",
            Command::Stability => "stability",
            Command::Pontryagin => "pontryagin",
            Command::Torus => "torus",
            Command::Dreps => "dreps",
            Command::Lipnorm => "lipnorm",
        };
        write!(f, "{name}")
    }
}

/// Finite group constructors reachable from a spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "family")]
pub enum GroupSpec {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Product { factors: Vec<GroupSpec> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<Arc<FiniteGroup>> {
        match self {
            GroupSpec::Cyclic { n } => Ok(Arc::new(FiniteGroup::cyclic(*n)?)),
            GroupSpec::Dihedral { n } => Ok(Arc::new(FiniteGroup::dihedral(*n)?)),
            GroupSpec::Product { factors } => {
                let mut built = factors.iter().map(|f| f.build());
                let first = built.next().ok_or_else(|| {
                    Error::InvalidSpec("product group needs at least one factor".into())
                })??;
                built.try_fold(first, |acc, g| {
                    Ok(Arc::new(FiniteGroup::product(&acc, &g?)?))
                })
            }
        }
    }
}

/// Length-function constructors reachable from a spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum LengthSpec {
    /// Weighted word length over the given generator elements.
    Word {
        generators: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// Explicit per-element values; `"inf"` marks elements outside the
    /// support.
    Values { values: Vec<ExtReal> },
}

impl LengthSpec {
    pub fn build(&self, group: &Arc<FiniteGroup>) -> Result<LengthFunction> {
        match self {
            LengthSpec::Word { generators, weights } => {
                word_length(group, generators, weights.as_deref())
            }
            LengthSpec::Values { values } => {
                LengthFunction::new(group, values.iter().map(|v| v.0).collect())
            }
        }
    }
}

/// Representation constructors reachable from a spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "type")]
pub enum RepSpec {
    /// The `index`-th canonical irreducible.
    Irrep { index: usize },
    /// Plain direct sum: one multiplicity per canonical irreducible.
    Sum { multiplicities: Vec<usize> },
    /// Same direct sum in a scrambled basis, conjugated by a seeded unitary.
    /// `seed` is mixed with the spec seed, so distinct random reps in one
    /// spec decouple by declaring distinct seeds.
    Random {
        multiplicities: Vec<usize>,
        #[serde(default)]
        seed: u64,
    },
    /// Explicit per-element matrices, row-major, each entry as `[re, im]`;
    /// validated as a unitary homomorphism.
    Matrices { matrices: Vec<Vec<Vec<[f64; 2]>>> },
}

impl RepSpec {
    fn checked_total_dim(
        multiplicities: &[usize],
        irreps: &[UnitaryRep],
    ) -> Result<usize> {
        if multiplicities.len() != irreps.len() {
            return Err(Error::InvalidSpec(format!(
                "need one multiplicity per irreducible: got {}, the group has {}",
                multiplicities.len(),
                irreps.len()
            )));
        }
        let total: usize = multiplicities
            .iter()
            .zip(irreps)
            .map(|(&m, r)| m * r.dim())
            .sum();
        if total == 0 {
            return Err(Error::InvalidSpec(
                "at least one irreducible must appear with positive multiplicity".into(),
            ));
        }
        if total > DIM_CAP {
            return Err(Error::DimTooLarge { dim: total, cap: DIM_CAP });
        }
        Ok(total)
    }

    pub fn build(
        &self,
        group: &Arc<FiniteGroup>,
        irreps: &[UnitaryRep],
        seed: u64,
    ) -> Result<UnitaryRep> {
        match self {
            RepSpec::Irrep { index } => irreps.get(*index).cloned().ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "irrep index {index} out of range (the group has {})",
                    irreps.len()
                ))
            }),
            RepSpec::Sum { multiplicities } => {
                Self::checked_total_dim(multiplicities, irreps)?;
                let mut parts = multiplicities
                    .iter()
                    .zip(irreps)
                    .flat_map(|(&m, r)| std::iter::repeat_with(|| r.clone()).take(m));
                let first = parts.next().expect("total dimension is positive");
                parts.try_fold(first, |acc, r| direct_sum(&acc, &r))
            }
            RepSpec::Random { multiplicities, seed: rep_seed } => {
                Self::checked_total_dim(multiplicities, irreps)?;
                let mut rng = crate::linalg::rng_for(seed, 0x5EED_0000 ^ rep_seed);
                random_rep(group, irreps, multiplicities, &mut rng)
            }
            RepSpec::Matrices { matrices } => {
                let ms: Vec<CMatrix> = matrices
                    .iter()
                    .map(|rows| {
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            return Err(Error::InvalidSpec(
                                "explicit matrices must be square".into(),
                            ));
                        }
                        Ok(CMatrix::from_fn(n, n, |i, j| {
                            num_complex::Complex64::new(rows[i][j][0], rows[i][j][1])
                        }))
                    })
                    .collect::<Result<_>>()?;
                UnitaryRep::new(Arc::clone(group), ms)
            }
        }
    }
}

/// Quadratic form plus lattice basis, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct LatticeSpec {
    pub form: Vec<Vec<f64>>,
    /// Columns of the matrix generate the lattice; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<QuadraticLattice> {
        let to_matrix = |rows: &Vec<Vec<f64>>, what: &str| -> Result<DMatrix<f64>> {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidSpec(format!("{what} must be a square matrix")));
            }
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        };
        let form = to_matrix(&self.form, "form")?;
        let basis = match &self.basis {
            Some(rows) => to_matrix(rows, "basis")?,
            None => DMatrix::identity(form.nrows(), form.nrows()),
        };
        QuadraticLattice::new(form, basis)
    }
}

/// Input to a circle-duality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CircleSpec {
    pub alpha: f64,
    pub thetas: Vec<f64>,
    pub n_max: usize,
}

fn default_stability_tol() -> f64 {
    crate::dual::STABILITY_TOL
}

/// Report-level tolerances; defaults match the library constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Tolerances {
    #[serde(default = "default_stability_tol")]
    pub stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { stability: default_stability_tol() }
    }
}

fn default_metric() -> MetricChoice {
    MetricChoice::Arclength
}

fn default_family() -> RepFamily {
    RepFamily::DirectSums
}

/// A complete experiment description. Unknown fields are rejected so typos
/// fail loudly instead of silently running defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<LengthSpec>,
    #[serde(default = "default_metric")]
    pub metric: MetricChoice,
    #[serde(default = "default_family")]
    pub family: RepFamily,
    /// Root seed; every run is reproducible from it.
    #[serde(default)]
    pub seed: u64,
    /// Exactly two representations for `dreps` / `lipnorm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<Vec<RepSpec>>,
    /// Extra padding above the minimal common dimension for `dreps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// When positive, also run the random-conjugation search as an upper
    /// baseline next to the reported `dreps` value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell_radius: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<CircleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormFlag>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentSpec {
    /// Parse a JSON spec, reporting the offending line and column on
    /// schema violations.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::InvalidSpec(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })
    }

    fn require_group(&self) -> Result<&GroupSpec> {
        self.group.as_ref().ok_or_else(|| {
            Error::InvalidSpec(format!("command {} needs a \"group\"", self.command))
        })
    }

    fn require_length(&self) -> Result<&LengthSpec> {
        self.length.as_ref().ok_or_else(|| {
            Error::InvalidSpec(format!("command {} needs a \"length\"", self.command))
        })
    }

    fn dreps_options(&self) -> Result<DrepsOptions> {
        let mut opts = DrepsOptions { seed: self.seed, ..DrepsOptions::default() };
        if let Some(s) = self.slack {
            opts.slack = s;
        }
        if let Some(r) = self.restarts {
            if r == 0 {
                return Err(Error::InvalidSpec("restarts must be at least 1".into()));
            }
            opts.restarts = r;
        }
        if let Some(m) = self.max_iters {
            if m == 0 {
                return Err(Error::InvalidSpec("max-iters must be at least 1".into()));
            }
            opts.max_iters = m;
        }
        Ok(opts)
    }

    fn two_reps(
        &self,
        group: &Arc<FiniteGroup>,
        irreps: &[UnitaryRep],
    ) -> Result<(UnitaryRep, UnitaryRep)> {
        let reps = self.reps.as_ref().ok_or_else(|| {
            Error::InvalidSpec(format!(
                "command {} needs \"reps\" with exactly two entries",
                self.command
            ))
        })?;
        if reps.len() != 2 {
            return Err(Error::InvalidSpec(format!(
                "command {} needs exactly two reps, got {}",
                self.command,
                reps.len()
            )));
        }
        Ok((
            reps[0].build(group, irreps, self.seed)?,
            reps[1].build(group, irreps, self.seed)?,
        ))
    }
}

/// Typed result body, one variant per command.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "body")]
pub enum ReportBody {
    Dual(DualBody),
    Stability(DualityReport),
    Lattice(LatticeBody),
    Circle(ZCircleReport),
    Torus(TorusQuotientReport),
    Dreps(DrepsBody),
    Lipnorm(LipComparisonReport),
}

/// Dual + double-dual values for a finite (semi-)length.
#[derive(Debug, Clone, Serialize)]
pub struct DualBody {
    pub group: GroupSummary,
    pub metric: MetricChoice,
    pub family: RepFamily,
    /// Per-element input and double-dual values.
    pub elements: Vec<DualRow>,
    pub lreps_per_irrep: Vec<f64>,
    pub irrep_dims: Vec<usize>,
    /// Character-only dual lengths (abelian groups).
    pub hat: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRow {
    pub element: usize,
    pub label: String,
    pub ell: ExtReal,
    pub ldd: f64,
}

/// Closed-form and sampled lattice dual values.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeBody {
    pub expected: f64,
    pub sampled: f64,
    pub relative_error: f64,
    pub samples: usize,
    pub basis_condition_number: f64,
}

/// Representation distance plus an optional sampled baseline.
#[derive(Debug, Clone, Serialize)]
pub struct DrepsBody {
    #[serde(flatten)]
    pub outcome: DrepsOutcome,
    /// Best value found by seeded random conjugations (never below the
    /// reported value minus numerical noise).
    pub oracle: Option<f64>,
}

/// The complete JSON document written by [`run`].
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    /// Seeded random generator family backing every stochastic step.
    pub generator: &'static str,
    /// The resolved spec (defaults filled in) that produced this report.
    pub spec: ExperimentSpec,
    pub result: ReportBody,
}

/// What `run` produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Files written, in creation order.
    pub files: Vec<PathBuf>,
    /// False when an optimizer-backed computation stopped on its iteration
    /// cap instead of its gradient tolerance.
    pub converged: bool,
    /// One-line human summary.
    pub summary: String,
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn ext(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "inf".to_string()
    }
}

fn csv_for(body: &ReportBody) -> String {
    match body {
        ReportBody::Dual(b) => {
            let mut out = String::from("element,label,ell,ldd\n");
            for r in &b.elements {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.element,
                    csv_escape(&r.label),
                    ext(r.ell.0),
                    r.ldd
                ));
            }
            out
        }
        ReportBody::Stability(b) => {
            let mut out = String::from("element,label,ell,ldd,defect\n");
            for r in &b.elements {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.element,
                    csv_escape(&r.label),
                    r.ell,
                    r.ldd,
                    r.defect
                ));
            }
            out
        }
        ReportBody::Lattice(b) => format!(
            "expected,sampled,relative_error,samples\n{},{},{},{}\n",
            b.expected, b.sampled, b.relative_error, b.samples
        ),
        ReportBody::Circle(b) => {
            let mut out = String::from("theta,computed,expected,deviation\n");
            for r in &b.rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.theta, r.computed, r.expected, r.deviation
                ));
            }
            out
        }
        ReportBody::Torus(b) => format!(
            "expected,sampled,relative_error,samples,shell_radius\n{},{},{},{},{}\n",
            b.expected, b.sampled, b.relative_error, b.samples, b.shell_radius
        ),
        ReportBody::Dreps(b) => format!(
            "value,padded_dim,method,oracle\n{},{},{},{}\n",
            b.outcome.value,
            b.outcome.padded_dim,
            b.outcome.method,
            b.oracle.map(|v| v.to_string()).unwrap_or_default()
        ),
        ReportBody::Lipnorm(b) => b.csv(),
    }
}

/// Which files [`run`] writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("expected json, csv, or both, got {other:?}")),
        }
    }
}

fn execute(spec: &ExperimentSpec) -> Result<(ReportBody, bool, String)> {
    match spec.command {
        Command::Dual => {
            let group = spec.require_group()?.build()?;
            let l = spec.require_length()?.build(&group)?;
            let irreps = irreps_of(&group)?;
            let DoubleDual { values, lreps_per_irrep } =
                crate::dual::double_dual_length(&group, &l, spec.metric, spec.family)?;
            let hat = if group.is_abelian() {
                Some(dual_length_hat(&group, &l, spec.metric)?)
            } else {
                None
            };
            let elements = group
                .elements()
                .map(|g| DualRow {
                    element: g,
                    label: group.label(g).to_string(),
                    ell: ExtReal(l.value(g)),
                    ldd: values[g],
                })
                .collect();
            let body = DualBody {
                group: GroupSummary::of(&group),
                metric: spec.metric,
                family: spec.family,
                elements,
                lreps_per_irrep,
                irrep_dims: irreps.iter().map(|r| r.dim()).collect(),
                hat,
            };
            let summary = format!(
                "dual lengths over {} elements, {} irreps",
                group.order(),
                irreps.len()
            );
            Ok((ReportBody::Dual(body), true, summary))
        }
        Command::Stability => {
            let group = spec.require_group()?.build()?;
            let l = spec.require_length()?.build(&group)?;
            let report = stability_check_with(
                &group,
                &l,
                spec.metric,
                spec.family,
                spec.tolerances.stability,
            )?;
            let summary = format!(
                "verdict {} (max defect {:.3e})",
                if report.stable { "stable" } else { "unstable" },
                report.max_defect
            );
            Ok((ReportBody::Stability(report), true, summary))
        }
        Command::Pontryagin => match (&spec.lattice, &spec.circle) {
            (Some(lat), None) => {
                let q = lat.build()?;
                let p = spec.character.as_ref().ok_or_else(|| {
                    Error::InvalidSpec("lattice mode needs a \"character\" vector".into())
                })?;
                let expected = lattice_dual_length(&q, p)?;
                let samples = spec.samples.unwrap_or(100_000);
                let sampled = lattice_dual_length_sampled(&q, p, samples, spec.seed)?;
                let relative_error = if expected > 0.0 {
                    (sampled - expected).abs() / expected
                } else {
                    sampled.abs()
                };
                let body = LatticeBody {
                    expected,
                    sampled,
                    relative_error,
                    samples,
                    basis_condition_number: q.condition_number(),
                };
                let summary = format!(
                    "closed form {expected:.9}, sampled {sampled:.9} ({relative_error:.2e} rel)"
                );
                Ok((ReportBody::Lattice(body), true, summary))
            }
            (None, Some(c)) => {
                let report = z_circle_check(c.alpha, &c.thetas, c.n_max)?;
                let summary = format!(
                    "{} angles, max deviation {:.3e}",
                    report.rows.len(),
                    report.max_deviation
                );
                Ok((ReportBody::Circle(report), true, summary))
            }
            _ => Err(Error::InvalidSpec(
                "pontryagin needs exactly one of \"lattice\" or \"circle\"".into(),
            )),
        },
        Command::Torus => {
            let lat = spec.lattice.as_ref().ok_or_else(|| {
                Error::InvalidSpec("torus needs a \"lattice\"".into())
            })?;
            let q = lat.build()?;
            let p = spec.character.as_ref().ok_or_else(|| {
                Error::InvalidSpec("torus needs a \"character\" vector".into())
            })?;
            let report = torus_quotient_check(
                &q,
                p,
                spec.samples.unwrap_or(20_000),
                spec.shell_radius.unwrap_or(3),
                spec.seed,
            )?;
            let summary = format!(
                "expected {:.9}, sampled {:.9} ({:.2e} rel)",
                report.expected, report.sampled, report.relative_error
            );
            Ok((ReportBody::Torus(report), true, summary))
        }
        Command::Dreps => {
            let group = spec.require_group()?.build()?;
            let l = spec.require_length()?.build(&group)?;
            let irreps = irreps_of(&group)?;
            let (a, b) = spec.two_reps(&group, &irreps)?;
            let opts = spec.dreps_options()?;
            let outcome = dreps(&a, &b, &l, spec.metric, &opts)?;
            let oracle = match spec.oracle_samples {
                Some(n) if n > 0 => Some(dreps_oracle(
                    &a,
                    &b,
                    &l,
                    spec.metric,
                    opts.slack,
                    n,
                    spec.seed,
                )?),
                _ => None,
            };
            let converged = outcome.optimizer.as_ref().map_or(true, |d| d.converged);
            let summary = format!(
                "dreps = {:.9} at padded dimension {} via {}",
                outcome.value, outcome.padded_dim, outcome.method
            );
            Ok((
                ReportBody::Dreps(DrepsBody { outcome, oracle }),
                converged,
                summary,
            ))
        }
        Command::Lipnorm => {
            let group = spec.require_group()?.build()?;
            let l = spec.require_length()?.build(&group)?;
            let irreps = irreps_of(&group)?;
            let (a, b) = spec.two_reps(&group, &irreps)?;
            let opts = spec.dreps_options()?;
            let report = lip_comparison(
                &a,
                &b,
                &l,
                spec.metric,
                spec.norm.unwrap_or(NormFlag::HilbertSchmidt),
                spec.probes.unwrap_or(8),
                spec.seed,
                &opts,
            )?;
            let converged = report.dreps.optimizer.as_ref().map_or(true, |d| d.converged);
            let summary = format!(
                "{} probes, dreps = {:.9}",
                report.rows.len(),
                report.dreps.value
            );
            Ok((ReportBody::Lipnorm(report), converged, summary))
        }
    }
}

/// Execute a spec and write buffered reports under `out`.
pub fn run(spec: &ExperimentSpec, out: &Path, format: OutputFormat) -> Result<RunOutcome> {
    let (result, converged, summary) = execute(spec)?;
    let report = Report {
        schema: REPORT_SCHEMA,
        tool_version: crate::VERSION,
        generator: GENERATOR,
        spec: spec.clone(),
        result,
    };
    let json = serde_json::to_string_pretty(&report).map_err(Error::Json)?;
    let csv = csv_for(&report.result);

    std::fs::create_dir_all(out).map_err(Error::Io)?;
    let mut files = Vec::new();
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = out.join("report.json");
        std::fs::write(&path, json.as_bytes()).map_err(Error::Io)?;
        files.push(path);
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let path = out.join("report.csv");
        std::fs::write(&path, csv.as_bytes()).map_err(Error::Io)?;
        files.push(path);
    }
    Ok(RunOutcome { files, converged, summary })
}

/// Human-readable inventory of everything a spec can name.
pub fn list_builtins() -> String {
    format!(
        "tool version:  {}\n\
         generator:     {GENERATOR} (ChaCha8, one independent stream per task)\n\
         \n\
         group families:\n\
         \x20 cyclic {{\"family\": \"cyclic\", \"n\": 4}}\n\
         \x20 dihedral {{\"family\": \"dihedral\", \"n\": 3}}\n\
         \x20 product {{\"family\": \"product\", \"factors\": [ ... ]}}\n\
         \n\
         length kinds:  word (generators + optional weights), values (numbers or \"inf\")\n\
         metrics:       operator, arclength\n\
         rep families:  irreps-only, direct-sums, tensor-closure {{\"depth\": d}}\n\
         rep specs:     {{\"type\": \"irrep\", \"index\": k}}, {{\"type\": \"sum\", \"multiplicities\": [...]}},\n\
         \x20              {{\"type\": \"random\", \"multiplicities\": [...], \"seed\": s}},\n\
         \x20              {{\"type\": \"matrices\", \"matrices\": [[[[re, im], ...], ...], ...]}}\n\
         norms:         hilbert-schmidt, operator\n\
         commands:      dual, stability, pontryagin, torus, dreps, lipnorm\n\
         \n\
         default tolerances:\n\
         \x20 stability        1e-6\n\
         \x20 sandwich checks  1e-9\n\
         \x20 unitarity        1e-10\n\
         \x20 homomorphism     1e-9\n",
        crate::VERSION
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4_stability_spec() -> ExperimentSpec {
        ExperimentSpec::from_json(
            r#"{
                "command": "stability",
                "group": {"family": "cyclic", "n": 4},
                "length": {"kind": "word", "generators": [1]},
                "metric": "arclength",
                "family": "irreps-only"
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn z4_stability_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let spec = z4_stability_spec();
        let outcome = run(&spec, dir.path(), OutputFormat::Both).unwrap();
        assert!(outcome.converged);
        assert!(outcome.summary.contains("stable"));
        assert_eq!(outcome.files.len(), 2);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.files[0]).unwrap()).unwrap();
        assert_eq!(json["schema"], REPORT_SCHEMA);
        assert_eq!(json["spec"]["command"], "stability");
        assert_eq!(json["spec"]["seed"], 0, "default seed embedded");
        assert_eq!(json["result"]["stable"], true);
        let csv = std::fs::read_to_string(&outcome.files[1]).unwrap();
        assert!(csv.starts_with("element,label,ell,ldd,defect\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let spec = ExperimentSpec::from_json(
            r#"{
                "command": "dreps",
                "group": {"family": "dihedral", "n": 3},
                "length": {"kind": "word", "generators": [1, 3]},
                "metric": "arclength",
                "seed": 9,
                "slack": 1,
                "restarts": 4,
                "max_iters": 60,
                "reps": [
                    {"type": "irrep", "index": 2},
                    {"type": "sum", "multiplicities": [1, 1, 0]}
                ]
            }"#,
        );
        // Field names are kebab-case.
        assert!(spec.is_err());
        let spec = ExperimentSpec::from_json(
            r#"{
                "command": "dreps",
                "group": {"family": "dihedral", "n": 3},
                "length": {"kind": "word", "generators": [1, 3]},
                "metric": "arclength",
                "seed": 9,
                "slack": 1,
                "restarts": 4,
                "max-iters": 60,
                "reps": [
                    {"type": "irrep", "index": 2},
                    {"type": "sum", "multiplicities": [1, 1, 0]}
                ]
            }"#,
        )
        .unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(&spec, d1.path(), OutputFormat::Both).unwrap();
        run(&spec, d2.path(), OutputFormat::Both).unwrap();
        for name in ["report.json", "report.csv"] {
            let a = std::fs::read(d1.path().join(name)).unwrap();
            let b = std::fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn malformed_specs_leave_no_output() {
        let err = ExperimentSpec::from_json("{\"command\": \"stability\",").unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
        assert!(err.to_string().contains("line"), "diagnostics carry position");

        // Unknown field.
        assert!(ExperimentSpec::from_json(
            r#"{"command": "stability", "grop": {"family": "cyclic", "n": 4}}"#
        )
        .is_err());

        // Valid JSON, invalid parameters: nothing written.
        let dir = tempfile::tempdir().unwrap();
        let mut spec = z4_stability_spec();
        spec.restarts = Some(0);
        spec.command = Command::Dreps;
        let err = run(&spec, dir.path(), OutputFormat::Both).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
    }

    #[test]
    fn infinite_length_values_round_trip() {
        let spec = ExperimentSpec::from_json(
            r#"{
                "command": "dreps",
                "group": {"family": "cyclic", "n": 2},
                "length": {"kind": "values", "values": [0, "inf"]},
                "reps": [{"type": "irrep", "index": 0}, {"type": "irrep", "index": 1}]
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        // A length with empty support makes every pair distance 0, and the
        // spec echo preserves the "inf".
        let outcome = run(&spec, dir.path(), OutputFormat::Json).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.files[0]).unwrap()).unwrap();
        assert_eq!(json["spec"]["length"]["values"][1], "inf");
        assert_eq!(json["result"]["value"], 0.0);
        assert_eq!(json["result"]["method"], "empty-support");

        // Commands built on the double dual require finite lengths.
        let mut dual = spec.clone();
        dual.command = Command::Dual;
        dual.reps = None;
        assert!(matches!(
            run(&dual, dir.path(), OutputFormat::Json),
            Err(Error::InfiniteLength { .. })
        ));
    }

    #[test]
    fn pontryagin_lattice_and_circle_modes() {
        let lattice = ExperimentSpec::from_json(
            r#"{
                "command": "pontryagin",
                "lattice": {"form": [[4.0, 0.0], [0.0, 1.0]]},
                "character": [2.0, 0.0],
                "samples": 2000
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let outcome = run(&lattice, dir.path(), OutputFormat::Json).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.files[0]).unwrap()).unwrap();
        assert!((json["result"]["expected"].as_f64().unwrap() - 1.0).abs() < 1e-12);

        let circle = ExperimentSpec::from_json(
            r#"{
                "command": "pontryagin",
                "circle": {"alpha": 2.0, "thetas": [1.0, -0.5], "n-max": 50}
            }"#,
        )
        .unwrap();
        let outcome = run(&circle, dir.path(), OutputFormat::Csv).unwrap();
        let csv = std::fs::read_to_string(&outcome.files[0]).unwrap();
        assert!(csv.starts_with("theta,computed,expected,deviation\n"));
        assert_eq!(csv.lines().count(), 3);

        // Both modes at once is ambiguous.
        let mut bad = lattice.clone();
        bad.circle = Some(CircleSpec { alpha: 1.0, thetas: vec![1.0], n_max: 5 });
        assert!(run(&bad, dir.path(), OutputFormat::Json).is_err());
    }

    #[test]
    fn builtins_listing_is_stable_and_complete() {
        let a = list_builtins();
        let b = list_builtins();
        assert_eq!(a, b);
        for needle in [
            "cyclic",
            "dihedral",
            "operator",
            "arclength",
            "\"irrep\"",
            "\"sum\"",
            "\"random\"",
            "\"matrices\"",
            crate::VERSION,
        ] {
            assert!(a.contains(needle), "missing {needle}");
        }
    }

    #[test]
    fn every_rep_spec_variant_builds() {
        // `sum` and `random` with equal multiplicities are unitarily
        // equivalent, so their distance vanishes by the multiplicity
        // shortcut; the explicit-matrices form spells out the sign
        // character of Z_2 and must behave like irrep index 1.
        let spec = ExperimentSpec::from_json(
            r#"{
                "command": "dreps",
                "group": {"family": "cyclic", "n": 4},
                "length": {"kind": "word", "generators": [1]},
                "seed": 3,
                "reps": [
                    {"type": "sum", "multiplicities": [0, 1, 1, 0]},
                    {"type": "random", "multiplicities": [0, 1, 1, 0], "seed": 8}
                ]
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let outcome = run(&spec, dir.path(), OutputFormat::Json).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.files[0]).unwrap()).unwrap();
        assert_eq!(json["result"]["value"], 0.0);
        assert_eq!(json["result"]["method"], "equivalent-multiplicities");
        // The resolved spec embeds the rep constructors verbatim.
        assert_eq!(json["spec"]["reps"][1]["seed"], 8);

        let explicit = ExperimentSpec::from_json(
            r#"{
                "command": "dreps",
                "group": {"family": "cyclic", "n": 2},
                "length": {"kind": "word", "generators": [1]},
                "reps": [
                    {"type": "matrices", "matrices": [[[[1.0, 0.0]]], [[[-1.0, 0.0]]]]},
                    {"type": "irrep", "index": 1}
                ]
            }"#,
        )
        .unwrap();
        let outcome = run(&explicit, dir.path(), OutputFormat::Json).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.files[0]).unwrap()).unwrap();
        assert_eq!(json["result"]["value"], 0.0);

        // Non-unitary explicit matrices are rejected before any output.
        let bad = ExperimentSpec::from_json(
            r#"{
                "command": "dreps",
                "group": {"family": "cyclic", "n": 2},
                "length": {"kind": "word", "generators": [1]},
                "reps": [
                    {"type": "matrices", "matrices": [[[[1.0, 0.0]]], [[[-2.0, 0.0]]]]},
                    {"type": "irrep", "index": 1}
                ]
            }"#,
        )
        .unwrap();
        let empty = tempfile::tempdir().unwrap();
        assert!(run(&bad, empty.path(), OutputFormat::Both).is_err());
        assert!(std::fs::read_dir(empty.path()).unwrap().next().is_none());
    }
}
