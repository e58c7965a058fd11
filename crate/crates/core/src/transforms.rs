//! Phase-space transforms: the Weyl symbol of a Fock-space operator, the
//! dual Bargmann integral along a straight segment, and the rewriting of the
//! Fourier transform through plane-wave overlaps.
//!
//! Plane waves are normalized as `<x|p> = exp(i p x / hbar) / sqrt(2 pi hbar)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::{FockSpace, OperatorMatrix};
use crate::quadrature::{GaussLegendre, ComplexSum};
use crate::C64;

/// Values of the Hermite functions `phi_0..phi_{count-1}` at `xi`
/// (unit length scale), by the three-term recurrence carried with a running
/// exponent so that high orders far from the origin do not underflow.
pub fn hermite_functions(count: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let mut log_scale = -0.5 * xi * xi - 0.25 * PI.ln();
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    out.push(log_scale.exp());
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev /= 1e150;
            cur /= 1e150;
            log_scale += 1e150f64.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

/// `<x|n>` for `n = 0..count-1` on the space's length scale.
pub fn position_basis(space: &FockSpace, count: usize, x: f64) -> Vec<f64> {
    let b = space.length_scale();
    let s = b.sqrt().recip();
    hermite_functions(count, x / b).into_iter().map(|v| v * s).collect()
}

/// Half-width beyond which `<x|n>` is negligible for every `n < count`.
pub fn support_radius(space: &FockSpace, count: usize) -> f64 {
    space.length_scale() * ((2.0 * count as f64 + 1.0).sqrt() + 7.0)
}

/// Options for [`weyl_symbol`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct WeylOptions {
    /// Half-width of the offset window; chosen from the operator when `None`.
    pub half_width: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylValue {
    /// `int dx <q+x/2|A|q-x/2> exp(-i p x / hbar)`
    pub plane_wave: C64,
    /// The same integral with the phase written as
    /// `1 / (2 pi hbar <q+x/2|p><p|q-x/2>)`.
    pub overlap_form: C64,
    pub half_width: f64,
    pub nodes: usize,
}

impl WeylValue {
    pub fn discrepancy(&self) -> f64 {
        (self.plane_wave - self.overlap_form).norm()
    }
}

fn plane_wave(hbar: f64, p: f64, x: f64) -> C64 {
    C64::from_polar((2.0 * PI * hbar).sqrt().recip(), p * x / hbar)
}

/// `exp(-i p x / hbar)` as `1 / (2 pi hbar <q+x/2|p><p|q-x/2>)`.
pub fn overlap_phase(hbar: f64, q: f64, p: f64, x: f64) -> C64 {
    let a = plane_wave(hbar, p, q + 0.5 * x);
    let b = plane_wave(hbar, p, q - 0.5 * x).conj();
    (a * b * (2.0 * PI * hbar)).inv()
}

/// Highest Fock index touched by a nonzero entry.
fn support_index(a: &OperatorMatrix) -> usize {
    let m = a.entries();
    let mut top = 0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)].norm() > 0.0 {
                top = top.max(i).max(j);
            }
        }
    }
    top
}

fn is_diagonal(a: &OperatorMatrix) -> bool {
    let m = a.entries();
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() == 0.0))
}

/// Weyl symbol `W(q, p) = int dx <q+x/2|A|q-x/2> exp(-i p x / hbar)` of an
/// operator given on the Fock basis. The integral runs over a finite window
/// by the trapezoid rule, which converges geometrically for the Gaussian-
/// decaying kernel.
pub fn weyl_symbol(space: &FockSpace, a: &OperatorMatrix, q: f64, p: f64, opts: WeylOptions) -> Result<WeylValue> {
    if a.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: a.dim(),
        });
    }
    let count = support_index(a) + 1;
    let b = space.length_scale();
    let hbar = space.hbar();
    // both q +- x/2 must reach the support edge
    let need = 2.0 * support_radius(space, count);
    let half_width = match opts.half_width {
        Some(w) if w < need => return Err(Error::WindowTooSmall { have: w, need }),
        Some(w) => w,
        None => need,
    };
    let k_max = p.abs() / hbar + (2.0 * count as f64 + 2.0).sqrt() / b;
    let dx = (0.5 * PI / k_max).min(0.25 * b);
    let nodes = 2 * (half_width / dx).ceil() as usize + 1;
    let dx = 2.0 * half_width / (nodes - 1) as f64;
    let diagonal = is_diagonal(a);
    let m = a.entries();
    let kernel = |x: f64| -> C64 {
        let u = position_basis(space, count, q + 0.5 * x);
        let v = position_basis(space, count, q - 0.5 * x);
        if diagonal {
            (0..count).map(|n| m[(n, n)] * (u[n] * v[n])).sum()
        } else {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..count {
                if u[i] == 0.0 {
                    continue;
                }
                let mut row = C64::new(0.0, 0.0);
                for j in 0..count {
                    row += m[(i, j)] * v[j];
                }
                acc += row * u[i];
            }
            acc
        }
    };
    let partials: Vec<(C64, C64)> = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let x = -half_width + i as f64 * dx;
            let w = if i == 0 || i == nodes - 1 { 0.5 * dx } else { dx };
            let k = kernel(x) * w;
            (k * C64::from_polar(1.0, -p * x / hbar), k * overlap_phase(hbar, q, p, x))
        })
        .collect();
    let mut first = ComplexSum::default();
    let mut second = ComplexSum::default();
    for (f, s) in partials {
        first.add(f);
        second.add(s);
    }
    Ok(WeylValue {
        plane_wave: first.value(),
        overlap_form: second.value(),
        half_width,
        nodes,
    })
}

/// `2 exp(-(alpha q^2 + p^2 / alpha) / hbar)`, the symbol of `|0><0|`.
pub fn vacuum_symbol(space: &FockSpace, q: f64, p: f64) -> f64 {
    let a = space.alpha();
    2.0 * (-(a * q * q + p * p / a) / space.hbar()).exp()
}

/// Symbol of `exp(-gamma n)`: `2/(1+e^{-gamma}) exp(-2 tanh(gamma/2) |z|^2)`
/// with `z` the coherent label of `(q, p)`. Tends to one as `gamma -> 0`.
pub fn damped_identity_symbol(space: &FockSpace, gamma: f64, q: f64, p: f64) -> f64 {
    let z2 = space.encode(q, p).norm_sqr();
    2.0 / (1.0 + (-gamma).exp()) * (-2.0 * (0.5 * gamma).tanh() * z2).exp()
}

/// `exp(-gamma n)` on the space.
pub fn damped_identity(space: &FockSpace, gamma: f64) -> OperatorMatrix {
    let diag: Vec<C64> = (0..space.dim()).map(|n| C64::new((-gamma * n as f64).exp(), 0.0)).collect();
    OperatorMatrix::from_diagonal(&diag)
}

/// Symbol of the identity at `(q, p)`, from the damped identities at
/// `gamma, gamma/2, gamma/4` extrapolated to `gamma = 0`. The cutoff of each
/// damped operator is raised until its truncated weight is below `1e-13`.
pub fn identity_symbol(gamma: f64, hbar: f64, alpha: f64, q: f64, p: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid("gamma", "must lie in (0, 1]"));
    }
    let mut vals = [0.0; 3];
    for (k, v) in vals.iter_mut().enumerate() {
        let g = gamma / (1 << k) as f64;
        let cutoff = (30.0 / g).ceil() as usize;
        let space = FockSpace::with_units(cutoff, hbar, alpha)?;
        *v = weyl_symbol(&space, &damped_identity(&space, g), q, p, WeylOptions::default())?.plane_wave.re;
    }
    // Richardson for a series in gamma
    let r1 = 2.0 * vals[1] - vals[0];
    let r2 = 2.0 * vals[2] - vals[1];
    Ok((4.0 * r2 - r1) / 3.0)
}

/// Straight segment `from -> to` in the `z*` plane.
pub type Segment = (C64, C64);

/// `int_gamma dz* psi(z*) exp(-z* w)` along a straight segment by
/// Gauss-Legendre in the segment parameter.
pub fn dual_bargmann(psi: impl Fn(C64) -> C64, w: C64, segment: Segment, n_nodes: usize) -> Result<C64> {
    if n_nodes < 16 {
        return Err(invalid("n_nodes", "need at least 16 nodes"));
    }
    let gl = GaussLegendre::new(n_nodes)?;
    let (a, b) = segment;
    let d = b - a;
    Ok(gl.integrate_complex(0.0, 1.0, |t| {
        let u = a + d * t;
        psi(u) * (-u * w).exp()
    }) * d)
}

/// Bargmann function of `|z0>`: `exp(z* z0 - |z0|^2 / 2)`.
pub fn coherent_bargmann(z0: C64) -> impl Fn(C64) -> C64 {
    move |u: C64| (u * z0 - 0.5 * z0.norm_sqr()).exp()
}

/// Sampled `psi(x) = <x|psi>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionWavefunction {
    pub x: Vec<f64>,
    pub values: Vec<C64>,
    pub hbar: f64,
    pub alpha: f64,
}

fn trapezoid(x: &[f64], f: impl Fn(usize) -> C64) -> C64 {
    let mut acc = ComplexSum::default();
    for i in 1..x.len() {
        acc.add((f(i) + f(i - 1)) * (0.5 * (x[i] - x[i - 1])));
    }
    acc.value()
}

impl PositionWavefunction {
    pub fn new(x: Vec<f64>, values: Vec<C64>, hbar: f64, alpha: f64) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: values.len(),
            });
        }
        if x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("x", "need at least two increasing samples"));
        }
        let psi = Self { x, values, hbar, alpha };
        let norm = psi.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(invalid("values", format!("norm {norm} differs from one by more than 1e-6")));
        }
        Ok(psi)
    }

    /// Fock state `n` sampled on `samples` uniform points covering its support.
    pub fn fock(space: &FockSpace, n: usize, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(invalid("samples", "need at least two samples"));
        }
        let r = support_radius(space, n + 1);
        let x: Vec<f64> = (0..samples).map(|i| -r + 2.0 * r * i as f64 / (samples - 1) as f64).collect();
        let values = x.iter().map(|&xi| C64::new(position_basis(space, n + 1, xi)[n], 0.0)).collect();
        Self::new(x, values, space.hbar(), space.alpha())
    }

    pub fn norm_sqr(&self) -> f64 {
        trapezoid(&self.x, |i| C64::new(self.values[i].norm_sqr(), 0.0)).re
    }

    /// `(2 pi hbar)^{-1/2} int psi(x) exp(-i p x / hbar) dx`
    pub fn momentum_amplitude(&self, p: f64) -> C64 {
        let c = (2.0 * PI * self.hbar).sqrt().recip();
        trapezoid(&self.x, |i| self.values[i] * C64::from_polar(1.0, -p * self.x[i] / self.hbar)) * c
    }

    /// `(2 pi hbar)^{-1} int psi(x) / <x|p> dx`
    pub fn momentum_amplitude_by_overlap(&self, p: f64) -> C64 {
        let c = (2.0 * PI * self.hbar).recip();
        trapezoid(&self.x, |i| self.values[i] / plane_wave(self.hbar, p, self.x[i])) * c
    }
}

/// Difference between the two ways of writing the momentum amplitude.
pub fn fourier_identity_check(psi: &PositionWavefunction, p: f64) -> f64 {
    (psi.momentum_amplitude(p) - psi.momentum_amplitude_by_overlap(p)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 40;
        let h = 0.02;
        let mut gram = vec![0.0; n * n];
        let mut x = -14.0;
        while x <= 14.0 {
            let v = hermite_functions(n, x);
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += h * v[i] * v[j];
                }
            }
            x += h;
        }
        for i in 0..n {
            for j in 0..n {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * n + j] - t).abs() < 1e-10, "{i} {j}");
            }
        }
    }

    #[test]
    fn high_order_far_from_origin_does_not_underflow() {
        let v = hermite_functions(1501, 52.0);
        assert!(v[1500].abs() > 1e-10);
        assert!(v[0] == 0.0);
    }

    #[test]
    fn vacuum_symbol_matches_closed_form() {
        let space = FockSpace::with_units(8, 0.7, 1.9).unwrap();
        let mut a = OperatorMatrix::zeros(9).into_entries();
        a[(0, 0)] = C64::new(1.0, 0.0);
        let a = OperatorMatrix::new(a).unwrap();
        for (q, p) in [(0.0, 0.0), (0.4, -0.3), (-0.8, 0.9)] {
            let w = weyl_symbol(&space, &a, q, p, WeylOptions::default()).unwrap();
            assert!((w.plane_wave - vacuum_symbol(&space, q, p)).norm() < 1e-10);
            assert!(w.discrepancy() < 1e-12);
        }
    }

    #[test]
    fn narrow_window_is_rejected() {
        let space = FockSpace::new(4);
        let a = OperatorMatrix::identity(5);
        let err = weyl_symbol(&space, &a, 0.0, 0.0, WeylOptions { half_width: Some(1.0) }).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall { .. }));
    }

    #[test]
    fn damped_identity_closed_form() {
        let space = FockSpace::new(400);
        let g = 0.3;
        let w = weyl_symbol(&space, &damped_identity(&space, g), 0.5, -0.4, WeylOptions::default()).unwrap();
        assert!((w.plane_wave.re - damped_identity_symbol(&space, g, 0.5, -0.4)).abs() < 1e-10);
    }

    #[test]
    fn coherent_segment_integral() {
        let z0 = C64::new(0.6, -0.2);
        let w = C64::new(-0.3, 0.5);
        let s = C64::new(1.2, 0.7);
        let v = dual_bargmann(coherent_bargmann(z0), w, (C64::new(0.0, 0.0), s), 24).unwrap();
        let expected = (-0.5 * z0.norm_sqr()) * 1.0;
        let expected = expected.exp() * (((s * (z0 - w)).exp() - 1.0) / (z0 - w));
        assert!((v - expected).norm() < 1e-12);
        assert!(dual_bargmann(coherent_bargmann(z0), w, (C64::new(0.0, 0.0), s), 8).is_err());
    }

    #[test]
    fn normalization_is_enforced() {
        let x = vec![0.0, 1.0, 2.0];
        let v = vec![C64::new(3.0, 0.0); 3];
        assert!(PositionWavefunction::new(x, v, 1.0, 1.0).is_err());
    }
}
