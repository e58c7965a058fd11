//! Truncated Fock-space linear algebra.
//!
//! States and operators live on levels `0..=cutoff`. Products of truncated
//! operators are only trusted on the low block `0..=cutoff/2`; every
//! comparison in this crate is restricted there.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Default tolerance on truncated probability mass.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// `ln n!`, exact summation for small `n`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Fock component `<n|z> = exp(-|z|^2/2) z^n / sqrt(n!)`, evaluated from its
/// logarithm so that neither the power nor the factorial overflows.
pub fn coherent_amplitude(n: usize, z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let log_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * ln_factorial(n);
    C64::from_polar(log_mag.exp(), n as f64 * z.arg())
}

/// `ln <w|v> = -|w|^2/2 - |v|^2/2 + w* v`.
pub fn log_overlap(w: C64, v: C64) -> C64 {
    -0.5 * (w.norm_sqr() + v.norm_sqr()) + w.conj() * v
}

/// Closed-form coherent-state overlap `<w|v>`.
pub fn overlap(w: C64, v: C64) -> C64 {
    log_overlap(w, v).exp()
}

/// Upper bound on the Poisson mass `sum_{n > cutoff} e^{-x} x^n / n!`.
pub fn poisson_tail(x: f64, cutoff: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let next = cutoff as f64 + 1.0;
    if x < next + 1.0 {
        // geometric bound on the ratio of consecutive terms
        let log_first = -x + next * x.ln() - ln_factorial(cutoff + 1);
        let ratio = x / (next + 1.0);
        (log_first.exp() / (1.0 - ratio)).min(1.0)
    } else {
        gamma_lr(next, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockSpace {
    cutoff: usize,
    hbar: f64,
    alpha: f64,
    tolerance: f64,
}

impl FockSpace {
    /// Units with `hbar = 1` and `alpha = m*omega = 1`, so the length scale is 1.
    pub fn new(cutoff: usize) -> Self {
        Self {
            cutoff,
            hbar: 1.0,
            alpha: 1.0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_units(cutoff: usize, hbar: f64, alpha: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(invalid("hbar", "must be positive"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive"));
        }
        Ok(Self {
            hbar,
            alpha,
            ..Self::new(cutoff)
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(invalid("tolerance", "must lie in (0, 1)"));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `b = sqrt(hbar / alpha)`.
    pub fn length_scale(&self) -> f64 {
        (self.hbar / self.alpha).sqrt()
    }

    /// Highest index of the block on which truncated products are trusted.
    pub fn trusted_block(&self) -> usize {
        self.cutoff / 2
    }

    /// Phase-space point to coherent label, `z = (q/b + i b p / hbar) / sqrt(2)`.
    pub fn encode(&self, q: f64, p: f64) -> C64 {
        let b = self.length_scale();
        C64::new(q / b, b * p / self.hbar) / std::f64::consts::SQRT_2
    }

    pub fn decode(&self, z: C64) -> (f64, f64) {
        let b = self.length_scale();
        let s = std::f64::consts::SQRT_2;
        (s * b * z.re, s * self.hbar * z.im / b)
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: DVector<C64>,
    /// Upper bound on the norm of the discarded `n > cutoff` part.
    pub tail_bound: f64,
}

impl StateVector {
    pub fn basis(space: &FockSpace, n: usize) -> Result<Self> {
        if n > space.cutoff() {
            return Err(invalid("n", format!("level {n} exceeds cutoff {}", space.cutoff())));
        }
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            tail_bound: 0.0,
        })
    }

    pub fn from_amplitudes(amplitudes: DVector<C64>) -> Self {
        Self {
            amplitudes,
            tail_bound: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Retained mass plus the tail bound is within `eps` of one.
    pub fn is_normalized(&self, eps: f64) -> bool {
        (self.norm_sqr() + self.tail_bound * self.tail_bound - 1.0).abs() <= eps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Dense operator on a truncated Fock space, row index = bra level.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            entries: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self {
            entries: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.entries[(m, n)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            entries: &self.entries * s,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries + &other.entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries - &other.entries,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries * &other.entries,
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector {
            amplitudes: &self.entries * &state.amplitudes,
            tail_bound: state.tail_bound,
        }
    }

    /// `<bra| self |ket>`.
    pub fn sandwich(&self, bra: &StateVector, ket: &StateVector) -> C64 {
        bra.amplitudes.dotc(&(&self.entries * &ket.amplitudes))
    }

    /// Largest `|self - I|` entry over indices `0..=block`.
    pub fn deviation_from_identity(&self, block: usize) -> f64 {
        let top = block.min(self.dim() - 1);
        let mut worst: f64 = 0.0;
        for m in 0..=top {
            for n in 0..=top {
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((self.entries[(m, n)] - target).norm());
            }
        }
        worst
    }

    /// Largest entrywise difference over indices `0..=block`.
    pub fn max_diff(&self, other: &Self, block: usize) -> f64 {
        let top = block.min(self.dim() - 1).min(other.dim() - 1);
        let mut worst: f64 = 0.0;
        for m in 0..=top {
            for n in 0..=top {
                worst = worst.max((self.entries[(m, n)] - other.entries[(m, n)]).norm());
            }
        }
        worst
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..d {
            for n in m..d {
                worst = worst.max((self.entries[(m, n)] - self.entries[(n, m)].conj()).norm());
            }
        }
        worst
    }
}

/// Coherent state `|z>` on the truncated space.
pub fn coherent_vector(space: &FockSpace, z: C64) -> Result<StateVector> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid("z", "must be finite"));
    }
    let x = z.norm_sqr();
    let tail_mass = poisson_tail(x, space.cutoff());
    if tail_mass > space.tolerance() {
        let mut required = space.cutoff() + 1;
        while poisson_tail(x, required) > space.tolerance() {
            required += 1;
        }
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            required,
            tail: tail_mass,
        });
    }
    let amplitudes = DVector::from_fn(space.dim(), |n, _| coherent_amplitude(n, z));
    Ok(StateVector {
        amplitudes,
        tail_bound: tail_mass.sqrt(),
    })
}

/// Annihilation and creation matrices, `a[n-1, n] = sqrt(n)`.
///
/// `[a, a^dag]` equals the identity except at `(cutoff, cutoff)`, where the
/// truncation leaves `-cutoff`.
pub fn ladder_matrices(space: &FockSpace) -> (OperatorMatrix, OperatorMatrix) {
    let d = space.dim();
    let a = OperatorMatrix::from_fn(d, |m, n| {
        if n == m + 1 {
            C64::new((n as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let adag = a.adjoint();
    (a, adag)
}

/// Generalized Laguerre values `L_k^{(alpha)}(x)` for `k = 0..=kmax`.
fn laguerre_column(alpha: usize, x: f64, kmax: usize) -> Vec<f64> {
    let a = alpha as f64;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax >= 1 {
        out.push(1.0 + a - x);
    }
    for k in 1..kmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Exact matrix elements `<m|D(z)|n>` of the untruncated displacement
/// operator, for `m, n <= cutoff`.
fn displacement_entries(dim: usize, z: C64) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    if z.norm() == 0.0 {
        for n in 0..dim {
            out[(n, n)] = C64::new(1.0, 0.0);
        }
        return out;
    }
    let x = z.norm_sqr();
    let lr = z.norm().ln();
    let theta = z.arg();
    let minus_conj_arg = (-z.conj()).arg();
    let ln_fact: Vec<f64> = (0..dim).map(ln_factorial).collect();
    for offset in 0..dim {
        let lag = laguerre_column(offset, x, dim - 1 - offset);
        let off = offset as f64;
        for (k, l) in lag.iter().enumerate() {
            let (lo, hi) = (k, k + offset);
            let log_pref = 0.5 * (ln_fact[lo] - ln_fact[hi]) + off * lr - 0.5 * x;
            let mag = log_pref.exp() * l;
            // lower triangle: m = hi >= n = lo, phase z^{offset}
            out[(hi, lo)] = C64::from_polar(1.0, off * theta) * mag;
            if offset > 0 {
                // upper triangle: m = lo < n = hi, phase (-z*)^{offset}
                out[(lo, hi)] = C64::from_polar(1.0, off * minus_conj_arg) * mag;
            }
        }
    }
    out
}

/// Missing probability of `D(z)|k>` beyond the cutoff.
fn displaced_column_deficit(dim: usize, z: C64, k: usize) -> f64 {
    let d = displacement_entries(dim, z);
    let kept: f64 = (0..dim).map(|m| d[(m, k)].norm_sqr()).sum();
    (1.0 - kept).max(0.0)
}

/// Displacement operator `D(z) = exp(-|z|^2/2) exp(z a^dag) exp(-z* a)`
/// from its closed-form Laguerre matrix elements.
///
/// Fails when `D(z)|cutoff/2>` loses more than the space tolerance beyond
/// the cutoff; the error suggests a cutoff that does not.
pub fn displacement_matrix(space: &FockSpace, z: C64) -> Result<OperatorMatrix> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid("z", "must be finite"));
    }
    let dim = space.dim();
    let entries = displacement_entries(dim, z);
    let k = space.trusted_block();
    let kept: f64 = (0..dim).map(|m| entries[(m, k)].norm_sqr()).sum();
    let deficit = (1.0 - kept).max(0.0);
    if deficit > space.tolerance() {
        let mut cutoff = space.cutoff() + 2;
        while displaced_column_deficit(cutoff + 1, z, cutoff / 2) > space.tolerance() {
            cutoff += 2;
        }
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            required: cutoff,
            tail: deficit,
        });
    }
    OperatorMatrix::new(entries)
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub propagator: OperatorMatrix,
    /// `max |U^dag U - I|` on the trusted block.
    pub unitarity_defect: f64,
}

/// `exp(-i T H / hbar)` by eigendecomposition of the Hermitian truncation.
pub fn evolve(space: &FockSpace, h: &OperatorMatrix, t: f64) -> Result<Evolution> {
    space.check_dim(h.dim())?;
    if !t.is_finite() {
        return Err(invalid("T", "must be finite"));
    }
    let scale = h.entries().iter().map(|c| c.norm()).fold(1.0, f64::max);
    let defect = h.hermiticity_defect();
    let tol = 1e-10 * scale;
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let dim = h.dim();
    if t == 0.0 {
        return Ok(Evolution {
            propagator: OperatorMatrix::identity(dim),
            unitarity_defect: 0.0,
        });
    }
    // symmetrize to remove rounding-level anti-Hermitian noise
    let sym = (h.entries() + h.entries().adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let phases = DVector::from_fn(dim, |k, _| {
        C64::from_polar(1.0, -t * eig.eigenvalues[k] / space.hbar())
    });
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[k];
    }
    let u = OperatorMatrix::new(scaled * v.adjoint())?;
    let unitarity_defect = u.adjoint().matmul(&u).deviation_from_identity(space.trusted_block());
    Ok(Evolution {
        propagator: u,
        unitarity_defect,
    })
}
