//! Spin-j coherent states on the (2j+1)-dimensional space and their
//! standard and scaled ("unlike") closures.
//!
//! Basis index `n = 0..=2j` stands for the magnetic number `m = j - n`.
//! Components follow `<j-n|w> = (1+|w|^2)^{-j} sqrt(C(2j,n)) w^n`, which makes
//! `<w|w'> = (1+|w|^2)^{-j} (1+|w'|^2)^{-j} (1 + w* w')^{2j}` hold exactly.
//! A ladder convention `J~± = (J1 ± i J2)/sqrt(2)` would rescale the
//! components by powers of `sqrt(2)` and break that formula.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::function::beta::beta;

use crate::closure::ClosureReport;
use crate::error::{invalid, Result};
use crate::fock::ln_factorial;
use crate::quadrature::{GaussLegendre, GridParams, CHUNK};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinSystem {
    two_j: u32,
}

impl SpinSystem {
    pub fn new(two_j: u32) -> Self {
        Self { two_j }
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        0.5 * self.two_j as f64
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn ln_binomial(&self, n: usize) -> f64 {
        let t = self.two_j as usize;
        ln_factorial(t) - ln_factorial(n) - ln_factorial(t - n)
    }

    pub fn binomial(&self, n: usize) -> f64 {
        self.ln_binomial(n).exp().round()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinCoherent {
    pub w: C64,
    /// Index `n` holds the component along `m = j - n`.
    pub components: DVector<C64>,
}

impl SpinCoherent {
    pub fn inner(&self, ket: &SpinCoherent) -> C64 {
        self.components.dotc(&ket.components)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }
}

pub fn spin_coherent(sys: SpinSystem, w: C64) -> SpinCoherent {
    let j = sys.j();
    let ln_n = -j * (1.0 + w.norm_sqr()).ln();
    let lw = (w.norm() > 0.0).then(|| w.ln());
    let components = DVector::from_fn(sys.dim(), |n, _| match (n, lw) {
        (0, _) => C64::new(ln_n.exp(), 0.0),
        (_, None) => C64::new(0.0, 0.0),
        (_, Some(l)) => (l * n as f64 + ln_n + 0.5 * sys.ln_binomial(n)).exp(),
    });
    SpinCoherent { w, components }
}

/// `<w|w'>` from its closed form.
pub fn spin_overlap(sys: SpinSystem, w: C64, w2: C64) -> C64 {
    let j = sys.j();
    (1.0 + w.norm_sqr()).powf(-j) * (1.0 + w2.norm_sqr()).powf(-j) * (1.0 + w.conj() * w2).powu(sys.two_j)
}

/// `(2j+1) C(2j,n) B(n+1, 2j+1-n)`, which equals one for every `n`.
pub fn beta_identity(sys: SpinSystem, n: usize) -> f64 {
    let t = sys.two_j as f64;
    (t + 1.0) * sys.binomial(n) * beta(n as f64 + 1.0, t + 1.0 - n as f64)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be positive"));
    }
    Ok(())
}

/// Diagonal after the angular reduction and `x = lambda r^2`:
/// `(2j+1) C(2j,n) int_0^inf x^n (1+x)^{-2j-2} dx`, integrated with
/// `x = t/(1-t)`, where the integrand becomes the polynomial `t^n (1-t)^{2j-n}`.
fn reduced_diagonal(sys: SpinSystem, n_radial: usize) -> Result<Vec<f64>> {
    let gl = GaussLegendre::new(n_radial)?;
    let t2 = sys.two_j as i32;
    Ok((0..sys.dim())
        .map(|n| {
            let c = (t2 as f64 + 1.0) * sys.binomial(n);
            c * gl.integrate(0.0, 1.0, |t| t.powi(n as i32) * (1.0 - t).powi(t2 - n as i32))
        })
        .collect())
}

fn diagonal_report(label: String, diag: Vec<f64>) -> ClosureReport {
    let d = diag.len();
    let m = DMatrix::from_fn(d, d, |i, k| if i == k { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) });
    ClosureReport::from_matrix(label, m)
}

fn minimum_radial(sys: SpinSystem) -> usize {
    // Gauss-Legendre with n nodes is exact through degree 2n - 1
    (sys.two_j as usize / 2 + 1).max(2)
}

/// `(2j+1)/pi int d^2w (1+|w|^2)^{-2} |w><w|`.
///
/// The main evaluation uses the exact angular reduction; `cross_check`
/// holds the largest entrywise difference to a full two-dimensional
/// quadrature on `n_radial x n_angular` nodes.
pub fn spin_standard_closure(sys: SpinSystem, n_radial: usize, n_angular: usize) -> Result<ClosureReport> {
    spin_closure(sys, 1.0, n_radial, n_angular, "spin standard")
}

/// `lambda (2j+1)/pi int d^2w (1+lambda|w|^2)^{-2} |lambda w><w| / <w|lambda w>`.
pub fn spin_unlike_closure(sys: SpinSystem, lambda: f64) -> Result<ClosureReport> {
    let n_radial = 96;
    let n_angular = 2 * sys.dim() + 4;
    spin_closure(sys, lambda, n_radial, n_angular, "spin unlike")
}

fn spin_closure(sys: SpinSystem, lambda: f64, n_radial: usize, n_angular: usize, label: &str) -> Result<ClosureReport> {
    check_lambda(lambda)?;
    let need = minimum_radial(sys);
    if n_radial < need {
        return Err(invalid("n_radial", format!("need at least {need} nodes for 2j = {}", sys.two_j)));
    }
    let diag = reduced_diagonal(sys, n_radial)?;
    let mut report = diagonal_report(format!("{label} 2j={} lambda={lambda}", sys.two_j), diag);
    let full = spin_closure_full(sys, lambda, n_radial, n_angular)?;
    let diff = (&report.matrix - &full).iter().map(|c| c.norm()).fold(0.0, f64::max);
    report.cross_check = Some(diff);
    report.grid = Some(GridParams {
        radius: f64::INFINITY,
        n_radial,
        n_angular,
        kappa: 1.0,
    });
    Ok(report)
}

/// Two-dimensional quadrature without angular reduction, in the unscaled
/// variable `x = |w|^2 = t/(1-t)` and built from the coherent vectors
/// themselves.
pub fn spin_closure_full(sys: SpinSystem, lambda: f64, n_radial: usize, n_angular: usize) -> Result<DMatrix<C64>> {
    check_lambda(lambda)?;
    if n_angular < 2 * sys.dim() {
        return Err(invalid("n_angular", format!("need at least {} nodes", 2 * sys.dim())));
    }
    let gl = GaussLegendre::new(n_radial)?;
    let nodes: Vec<(f64, f64)> = gl.mapped(0.0, 1.0).collect();
    let d = sys.dim();
    let pref = lambda * (sys.two_j as f64 + 1.0);
    let dphi = 2.0 * std::f64::consts::PI / n_angular as f64;
    let total = n_radial * n_angular;
    let partials: Vec<DMatrix<C64>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = DMatrix::<C64>::zeros(d, d);
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let (t, wt) = nodes[idx / n_angular];
                let k = idx % n_angular;
                let x = t / (1.0 - t);
                let w = C64::from_polar(x.sqrt(), dphi * (k as f64 + 0.5));
                // d^2w/pi = dx dphi / (2 pi), dx = dt / (1-t)^2
                let measure = wt / (1.0 - t).powi(2) / n_angular as f64;
                let bra = spin_coherent(sys, w);
                let ket = spin_coherent(sys, w * lambda);
                let norm = bra.inner(&ket);
                let s = measure * pref / (1.0 + lambda * x).powi(2);
                acc += (&ket.components * bra.components.adjoint()) * (s / norm);
            }
            acc
        })
        .collect();
    Ok(partials.into_iter().fold(DMatrix::zeros(d, d), |a, b| a + b))
}
