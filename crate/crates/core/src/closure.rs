//! Candidate resolutions of unity built from coherent-state outer products,
//! evaluated as matrices on a low Fock block.
//!
//! Every entry is assembled from the analytic components `<n|z>`, so the Fock
//! cutoff never enters. The generic form is
//!
//! ```text
//! M[m, n] = sum_nodes w(u) <m|f(v)> <v|n> / <v|f(v)>,   v = u + shift,
//! ```
//!
//! with the division present only when the normalizer is enabled. In that
//! case the product collapses to `f^m v*^n / sqrt(m! n!) * exp(-v* f)`, which
//! is what gets evaluated; the amplification `1/<v|f(v)>` is never formed on
//! its own.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::fock::{ln_factorial, log_overlap, overlap};
use crate::quadrature::{
    auto_radius, required_angular, required_radial, ComplexSum, GridParams, PhaseGrid, CHUNK,
};
use crate::C64;

/// Largest `|zeta|` accepted by the offset closures.
pub const MAX_OFFSET: f64 = 2.0;

/// Truncation radius beyond which the explicit scaled-closure weights overflow.
const MAX_RADIUS: f64 = 60.0;

pub type Density = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// The map from bra label `v` to ket label `f(v)`.
#[derive(Clone)]
pub enum Pairing {
    Identity,
    Scale(f64),
    Translate(C64),
    Custom(Arc<dyn Fn(C64) -> C64 + Send + Sync>),
}

impl Pairing {
    pub fn apply(&self, v: C64) -> C64 {
        match self {
            Pairing::Identity => v,
            Pairing::Scale(l) => v * *l,
            Pairing::Translate(c) => v + c,
            Pairing::Custom(f) => f(v),
        }
    }

    /// Angular frequency scale the pairing introduces through `exp(-v* f)`.
    fn oscillation(&self) -> f64 {
        match self {
            Pairing::Translate(c) => 0.5 * c.norm(),
            _ => 0.0,
        }
    }
}

impl std::fmt::Debug for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pairing::Identity => write!(f, "Identity"),
            Pairing::Scale(l) => write!(f, "Scale({l})"),
            Pairing::Translate(c) => write!(f, "Translate({c})"),
            Pairing::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone)]
pub struct ClosureSpec {
    pub pairing: Pairing,
    /// Bra label is `v = node + shift`.
    pub shift: C64,
    /// Measure density in the node variable.
    pub weight: Density,
    /// Divide by `<v|f(v)>`.
    pub normalizer: bool,
    /// Verify indices `0..=block`.
    pub block: usize,
    pub grid: GridParams,
    /// Extra angular frequency carried by `weight`, in units of `|zeta|`.
    pub weight_oscillation: f64,
}

impl ClosureSpec {
    pub fn new(pairing: Pairing, block: usize, grid: GridParams) -> Self {
        Self {
            pairing,
            shift: C64::new(0.0, 0.0),
            weight: Arc::new(|_| C64::new(1.0, 0.0)),
            normalizer: false,
            block,
            grid,
            weight_oscillation: 0.0,
        }
    }

    pub fn with_weight(mut self, weight: Density) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_shift(mut self, shift: C64) -> Self {
        self.shift = shift;
        self
    }

    pub fn normalized(mut self) -> Self {
        self.normalizer = true;
        self
    }

    fn oscillation(&self) -> f64 {
        self.pairing.oscillation().max(self.weight_oscillation)
    }

    /// Angular count needed to resolve the block harmonics and the oscillating
    /// factor over the grid radius.
    pub fn required_angular(&self) -> usize {
        required_angular(self.block as u32, self.oscillation(), self.grid.radius)
    }

    fn validate(&self) -> Result<()> {
        let need = self.required_angular();
        if self.grid.n_angular < need {
            return Err(Error::UnderResolvedGrid {
                have: self.grid.n_angular,
                need,
            });
        }
        Ok(())
    }
}

impl std::fmt::Debug for ClosureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosureSpec")
            .field("pairing", &self.pairing)
            .field("shift", &self.shift)
            .field("normalizer", &self.normalizer)
            .field("block", &self.block)
            .field("grid", &self.grid)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub n_radial: usize,
    pub n_angular: usize,
    pub radius: f64,
    pub dev_max: f64,
}

fn ser_matrix<S: Serializer>(m: &DMatrix<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

fn ser_opt_complex<S: Serializer>(c: &Option<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.map(|c| [c.re, c.im]).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub label: String,
    pub block: usize,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<C64>,
    pub dev_max: f64,
    pub dev_fro: f64,
    #[serde(serialize_with = "ser_opt_complex")]
    pub ratio_to_identity: Option<C64>,
    pub convergence: Vec<ConvergenceRow>,
    pub grid: Option<GridParams>,
    pub est_tail: f64,
    /// `min_node |<v|f(v)>|` (natural log); `None` when no normalizer is used.
    pub min_log_overlap: Option<f64>,
    /// Secondary discrepancy measured alongside the main evaluation.
    pub cross_check: Option<f64>,
    pub note: Option<String>,
}

/// `(max, Frobenius)` norms of `matrix - I`.
pub fn identity_deviation(matrix: &DMatrix<C64>) -> (f64, f64) {
    let mut max: f64 = 0.0;
    let mut fro = 0.0;
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            let t = if i == j { 1.0 } else { 0.0 };
            let d = (matrix[(i, j)] - t).norm();
            max = max.max(d);
            fro += d * d;
        }
    }
    (max, fro.sqrt())
}

impl ClosureReport {
    pub fn from_matrix(label: impl Into<String>, matrix: DMatrix<C64>) -> Self {
        let (dev_max, dev_fro) = identity_deviation(&matrix);
        Self {
            label: label.into(),
            block: matrix.nrows().saturating_sub(1),
            matrix,
            dev_max,
            dev_fro,
            ratio_to_identity: None,
            convergence: Vec::new(),
            grid: None,
            est_tail: 0.0,
            min_log_overlap: None,
            cross_check: None,
            note: None,
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest off-diagonal entry and largest spread of the diagonal about
    /// its mean, with that mean.
    pub fn proportionality(&self) -> (f64, f64, C64) {
        let m = &self.matrix;
        let d = m.nrows();
        let mean = (0..d).map(|i| m[(i, i)]).sum::<C64>() / d as f64;
        let mut off: f64 = 0.0;
        let mut spread: f64 = 0.0;
        for i in 0..d {
            spread = spread.max((m[(i, i)] - mean).norm());
            for j in 0..d {
                if i != j {
                    off = off.max(m[(i, j)].norm());
                }
            }
        }
        (off, spread, mean)
    }
}

/// `ln(x^k / sqrt(k!))` for `k = 0..=block`, or `None` entries when `x = 0`.
fn log_monomials(x: C64, block: usize, ln_fact: &[f64]) -> Vec<Option<C64>> {
    let lx = if x.norm() == 0.0 { None } else { Some(x.ln()) };
    (0..=block)
        .map(|k| match (k, lx) {
            (0, _) => Some(C64::new(0.0, 0.0)),
            (_, None) => None,
            (_, Some(l)) => Some(l * k as f64 - 0.5 * ln_fact[k]),
        })
        .collect()
}

struct NodeTerms {
    ket: Vec<C64>,
    bra: Vec<C64>,
    log_overlap: f64,
}

fn node_terms(spec: &ClosureSpec, u: C64, ln_fact: &[f64]) -> NodeTerms {
    let v = spec.shift + u;
    let f = spec.pairing.apply(v);
    let lo = log_overlap(v, f);
    // exponent shared between ket and bra factors
    let common = if spec.normalizer {
        -v.conj() * f
    } else {
        C64::new(-0.5 * (v.norm_sqr() + f.norm_sqr()), 0.0)
    };
    let half = common * 0.5;
    let expand = |logs: Vec<Option<C64>>| -> Vec<C64> {
        logs.into_iter()
            .map(|l| l.map_or(C64::new(0.0, 0.0), |l| (l + half).exp()))
            .collect()
    };
    NodeTerms {
        ket: expand(log_monomials(f, spec.block, ln_fact)),
        bra: expand(log_monomials(v.conj(), spec.block, ln_fact)),
        log_overlap: lo.re,
    }
}

/// Matrix on one grid plus the smallest `ln |<v|f(v)>|` seen.
fn assemble(spec: &ClosureSpec, grid: &PhaseGrid) -> Result<(DMatrix<C64>, f64)> {
    let dim = spec.block + 1;
    let ln_fact: Vec<f64> = (0..=spec.block).map(ln_factorial).collect();
    let floor = f64::MIN_POSITIVE.ln();
    let n = grid.len();
    let partials: Vec<Result<(Vec<C64>, f64)>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![ComplexSum::default(); dim * dim];
            let mut min_lo = f64::INFINITY;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let u = grid.nodes[i];
                let t = node_terms(spec, u, &ln_fact);
                if spec.normalizer && t.log_overlap < floor {
                    return Err(Error::VanishingOverlap {
                        node: i,
                        log_overlap: t.log_overlap,
                    });
                }
                min_lo = min_lo.min(t.log_overlap);
                let w = (spec.weight)(u) * grid.weights[i];
                for m in 0..dim {
                    let km = t.ket[m] * w;
                    for (k, b) in t.bra.iter().enumerate() {
                        acc[m * dim + k].add(km * b);
                    }
                }
            }
            Ok((acc.iter().map(|s| s.value()).collect(), min_lo))
        })
        .collect();
    let mut total = vec![ComplexSum::default(); dim * dim];
    let mut min_lo = f64::INFINITY;
    for p in partials {
        let (vals, lo) = p?;
        min_lo = min_lo.min(lo);
        for (t, v) in total.iter_mut().zip(vals) {
            t.add(v);
        }
    }
    Ok((DMatrix::from_fn(dim, dim, |m, k| total[m * dim + k].value()), min_lo))
}

fn convergence_row(params: &GridParams, matrix: &DMatrix<C64>) -> ConvergenceRow {
    ConvergenceRow {
        nodes: params.node_count(),
        n_radial: params.n_radial,
        n_angular: params.n_angular,
        radius: params.radius,
        dev_max: identity_deviation(matrix).0,
    }
}

/// Evaluate a candidate closure on its grid and on one refinement of it.
pub fn evaluate_closure(spec: &ClosureSpec) -> Result<ClosureReport> {
    spec.validate()?;
    let grid = spec.grid.build()?;
    let (matrix, min_lo) = assemble(spec, &grid)?;
    let refined_params = spec.grid.refined();
    let (fine, _) = assemble(spec, &refined_params.build()?)?;
    let mut report = ClosureReport::from_matrix("closure", matrix);
    report.convergence = vec![
        convergence_row(&spec.grid, &report.matrix),
        convergence_row(&refined_params, &fine),
    ];
    report.grid = Some(spec.grid);
    report.est_tail = grid.est_tail;
    report.min_log_overlap = spec.normalizer.then_some(min_lo);
    Ok(report)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", "must lie in (0, 1)"));
    }
    Ok(())
}

fn check_offset(zeta: C64) -> Result<()> {
    if !(zeta.norm() <= MAX_OFFSET) {
        return Err(invalid("zeta", format!("|zeta| must not exceed {MAX_OFFSET}")));
    }
    Ok(())
}

/// Grid for `|z|^{2 block} e^{-kappa |z|^2}` integrands carrying an
/// oscillation of scale `osc`.
fn closure_grid(kappa: f64, block: usize, prefactor: f64, osc: f64, tol: f64) -> Result<GridParams> {
    let degree = 2 * block as u32;
    let radius = auto_radius(kappa, degree, prefactor, tol)?;
    if radius > MAX_RADIUS {
        return Err(Error::RadiusTooLarge {
            radius,
            limit: MAX_RADIUS,
        });
    }
    Ok(GridParams {
        radius,
        n_radial: required_radial(degree, osc, radius, kappa),
        n_angular: required_angular(block as u32, osc, radius),
        kappa,
    })
}

/// `I = int d^2z/pi |z><z|`
pub fn standard_spec(block: usize, grid: GridParams) -> ClosureSpec {
    ClosureSpec::new(Pairing::Identity, block, grid)
}

pub fn standard_closure(block: usize, tol: f64) -> Result<ClosureReport> {
    check_tol(tol)?;
    let grid = closure_grid(1.0, block, 1.0, 0.0, tol)?;
    standard_closure_on(block, grid)
}

pub fn standard_closure_on(block: usize, grid: GridParams) -> Result<ClosureReport> {
    let mut r = evaluate_closure(&standard_spec(block, grid))?;
    r.label = "standard".into();
    Ok(r)
}

/// `lambda / <z|lambda z>` form, with the Jacobian `lambda` as the weight.
pub fn lambda_spec(lambda: f64, block: usize, grid: GridParams) -> ClosureSpec {
    ClosureSpec::new(Pairing::Scale(lambda), block, grid)
        .with_weight(Arc::new(move |_| C64::new(lambda, 0.0)))
        .normalized()
}

/// Explicit-weight form `lambda exp((1 - lambda)^2 |z|^2 / 2)` without normalizer.
pub fn lambda_weight_spec(lambda: f64, block: usize, grid: GridParams) -> ClosureSpec {
    let s = 0.5 * (1.0 - lambda).powi(2);
    ClosureSpec::new(Pairing::Scale(lambda), block, grid)
        .with_weight(Arc::new(move |z: C64| C64::new(lambda * (s * z.norm_sqr()).exp(), 0.0)))
}

/// Largest relative difference between `lambda e^{(1-lambda)^2|z|^2/2}` and
/// `lambda / <z|lambda z>` over the given nodes.
pub fn lambda_weight_discrepancy(lambda: f64, nodes: &[C64]) -> f64 {
    let s = 0.5 * (1.0 - lambda).powi(2);
    nodes
        .iter()
        .map(|&z| {
            let explicit = lambda * (s * z.norm_sqr()).exp();
            let via_overlap = lambda / overlap(z, z * lambda);
            ((via_overlap - explicit) / explicit).norm()
        })
        .fold(0.0, f64::max)
}

/// Scaled unlike closure `int (lambda d^2z/pi) |lambda z><z| / <z|lambda z>`.
///
/// Both integrand forms are checked against each other at every node before
/// integrating; the report's `cross_check` holds the entrywise difference
/// between the two integrated matrices.
pub fn lambda_closure(lambda: f64, block: usize, tol: f64) -> Result<ClosureReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be positive"));
    }
    check_tol(tol)?;
    let prefactor = lambda.max(1.0).powi(block as i32 + 1);
    let grid = closure_grid(lambda, block, prefactor, 0.0, tol)?;
    // the explicit weight must stay finite out to the radius
    let exponent = 0.5 * (1.0 - lambda).powi(2) * grid.radius * grid.radius;
    if exponent > 700.0 {
        return Err(Error::RadiusTooLarge {
            radius: grid.radius,
            limit: (1400.0f64).sqrt() / (1.0 - lambda).abs(),
        });
    }
    lambda_closure_on(lambda, block, grid)
}

pub fn lambda_closure_on(lambda: f64, block: usize, grid: GridParams) -> Result<ClosureReport> {
    let nodes = grid.build()?.nodes;
    let discrepancy = lambda_weight_discrepancy(lambda, &nodes);
    if discrepancy > 1e-12 {
        return Err(Error::FormMismatch { discrepancy });
    }
    let mut report = evaluate_closure(&lambda_spec(lambda, block, grid))?;
    let explicit = evaluate_closure(&lambda_weight_spec(lambda, block, grid))?;
    let diff = (&report.matrix - &explicit.matrix)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    report.label = format!("lambda={lambda}");
    report.cross_check = Some(diff);
    Ok(report)
}

/// How the offset closure is parameterized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum OffsetForm {
    /// Integrate over centers `z`, outer product `|z - zeta><z + zeta|`.
    #[default]
    Centered,
    /// Integrate over the bra label `v = z + zeta` directly.
    Relabeled,
}

/// `int d^2z/pi |z - zeta><z + zeta| / <z + zeta|z - zeta>`
pub fn weyl_spec(zeta: C64, block: usize, grid: GridParams, form: OffsetForm) -> ClosureSpec {
    let spec = ClosureSpec::new(Pairing::Translate(-2.0 * zeta), block, grid).normalized();
    match form {
        OffsetForm::Centered => spec.with_shift(zeta),
        OffsetForm::Relabeled => spec,
    }
}

fn weyl_grid(zeta: C64, block: usize, tol: f64, form: OffsetForm, osc: f64) -> Result<GridParams> {
    let a = zeta.norm();
    let prefactor = (a * a).exp() * (1.0 + a).powi(2 * block as i32);
    let mut grid = closure_grid(1.0, block, prefactor, osc, tol)?;
    if form == OffsetForm::Relabeled {
        // integrand is centered at v = zeta
        grid.radius += a;
        grid.n_radial = required_radial(2 * block as u32, a, grid.radius, 1.0);
        grid.n_angular = required_angular(block as u32, a, grid.radius);
    }
    Ok(grid)
}

pub fn weyl_closure(zeta: C64, block: usize, tol: f64) -> Result<ClosureReport> {
    weyl_closure_with(zeta, block, tol, OffsetForm::Centered)
}

pub fn weyl_closure_with(zeta: C64, block: usize, tol: f64, form: OffsetForm) -> Result<ClosureReport> {
    check_offset(zeta)?;
    check_tol(tol)?;
    let grid = weyl_grid(zeta, block, tol, form, zeta.norm())?;
    weyl_closure_on(zeta, block, grid, form)
}

pub fn weyl_closure_on(zeta: C64, block: usize, grid: GridParams, form: OffsetForm) -> Result<ClosureReport> {
    check_offset(zeta)?;
    let mut r = evaluate_closure(&weyl_spec(zeta, block, grid, form))?;
    r.label = format!("weyl zeta={zeta}");
    Ok(r)
}

/// Weight `exp(-|zeta|^2/2 - zeta* z + zeta z*)` without normalizer.
pub fn b_operator_spec(zeta: C64, block: usize, grid: GridParams) -> ClosureSpec {
    let c0 = -0.5 * zeta.norm_sqr();
    let mut spec = ClosureSpec::new(Pairing::Translate(-2.0 * zeta), block, grid)
        .with_shift(zeta)
        .with_weight(Arc::new(move |z: C64| (c0 - zeta.conj() * z + zeta * z.conj()).exp()));
    spec.weight_oscillation = 2.0 * zeta.norm();
    spec
}

/// Measure the operator built with the printed weight
/// `exp(-|zeta|^2/2 - zeta* z + zeta z*)`.
///
/// The result is proportional to the identity; `ratio_to_identity` carries
/// the constant whenever the off-diagonal entries and the diagonal spread are
/// both below `tol`. A constant different from one is reported, not treated
/// as a failure.
pub fn b_operator(zeta: C64, block: usize, tol: f64) -> Result<ClosureReport> {
    check_offset(zeta)?;
    check_tol(tol)?;
    let spec = b_operator_spec(zeta, block, GridParams { radius: 1.0, n_radial: 2, n_angular: 4, kappa: 1.0 });
    let grid = weyl_grid(
        zeta,
        block,
        tol * (-2.5 * zeta.norm_sqr()).exp(),
        OffsetForm::Centered,
        spec.oscillation(),
    )?;
    let mut r = evaluate_closure(&ClosureSpec { grid, ..spec })?;
    r.label = format!("b-operator zeta={zeta}");
    let (off, spread, mean) = r.proportionality();
    if off <= tol && spread <= tol {
        r.ratio_to_identity = Some(mean);
        if (mean - 1.0).norm() > tol {
            r.note = Some(format!(
                "proportional to identity with constant {:.12e}{:+.3e}i, not 1; \
                 the normalized offset closure is exact",
                mean.re, mean.im
            ));
        }
    }
    Ok(r)
}

/// Single and squared standard closure.
#[derive(Clone, Debug, Serialize)]
pub struct DoubleClosure {
    pub single: ClosureReport,
    pub squared: ClosureReport,
}

/// `A * A` on the block for a given single-closure matrix `A`.
pub fn square_report(a: &DMatrix<C64>) -> ClosureReport {
    let mut r = ClosureReport::from_matrix("double", a * a);
    r.cross_check = Some(identity_deviation(a).0);
    r
}

pub fn double_closure(block: usize, tol: f64) -> Result<DoubleClosure> {
    check_tol(tol)?;
    let grid = closure_grid(1.0, block, 1.0, 0.0, tol)?;
    double_closure_on(block, grid)
}

/// The double-integration identity `I = I^2`, realized as the product of the
/// single closure matrix with itself.
pub fn double_closure_on(block: usize, grid: GridParams) -> Result<DoubleClosure> {
    let single = standard_closure_on(block, grid)?;
    let mut squared = square_report(&single.matrix);
    squared.grid = Some(grid);
    squared.est_tail = single.est_tail;
    Ok(DoubleClosure { single, squared })
}
