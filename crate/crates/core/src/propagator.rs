//! Coherent-state propagator `K(z', z'', T) = <z''|exp(-i T H / hbar)|z'>`:
//! exact evaluation, the sliced phase-space integral built from offset
//! closures, and the generalized action of a sampled path.
//!
//! Slice `n` of the discrete integral contributes
//!
//! ```text
//! <z_{n+1}+zeta_{n+1}|z_n-zeta_n> exp(-i tau H_n / hbar) / <z_n+zeta_n|z_n-zeta_n>
//! ```
//!
//! with `H_n` the weak value between the two labels, `zeta_0 = 0`,
//! `z_0 = z'` and `z_{N+1} + zeta_{N+1} = z''`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::{coherent_vector, evolve, log_overlap, overlap, FockSpace};
use crate::ladder::LadderPoly;
use crate::quadrature::{
    auto_radius, required_angular, required_radial, ComplexSum, GridParams, PhaseGrid, CHUNK,
};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    DiscreteQuadrature,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropagatorResult {
    pub value: C64,
    pub method: Method,
    pub error_estimate: f64,
    pub n_slices: usize,
}

/// `<z2| exp(-i T H / hbar) |z1>` by eigendecomposition of the truncated
/// Hamiltonian. The error estimate is the change under doubling the cutoff;
/// a change above the space's tolerance is an error.
pub fn exact_propagator(space: &FockSpace, z1: C64, z2: C64, t: f64, h: &LadderPoly) -> Result<PropagatorResult> {
    let coarse = truncated_propagator(space, z1, z2, t, h)?;
    let doubled = FockSpace::with_units(2 * space.cutoff(), space.hbar(), space.alpha())?.with_tolerance(space.tolerance())?;
    let fine = truncated_propagator(&doubled, z1, z2, t, h)?;
    let delta = (fine - coarse).norm();
    if delta > space.tolerance() {
        return Err(Error::NotConverged {
            delta,
            tol: space.tolerance(),
        });
    }
    Ok(PropagatorResult {
        value: fine,
        method: Method::Exact,
        error_estimate: delta,
        n_slices: 0,
    })
}

fn truncated_propagator(space: &FockSpace, z1: C64, z2: C64, t: f64, h: &LadderPoly) -> Result<C64> {
    let ket = coherent_vector(space, z1)?;
    let bra = coherent_vector(space, z2)?;
    if t == 0.0 {
        return Ok(bra.inner(&ket));
    }
    let u = evolve(space, &h.to_matrix(space), t)?.propagator;
    Ok(u.sandwich(&bra, &ket))
}

/// `sum_n c_n v^n / sqrt(n!)`, so that `<phi|v> = exp(-|v|^2/2) * poly(conj(phi), v)`.
fn bargmann_poly(coeffs: &[C64], v: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (n, c) in coeffs.iter().enumerate().rev() {
        acc = acc * v / ((n + 1) as f64).sqrt() + c;
    }
    acc
}

/// Splits `exp(-i T H / hbar)` in two halves, inserts the offset closure
/// between them and integrates over the centers. Returns the absolute
/// difference to the propagator computed without the insertion.
pub fn insertion_identity_check(
    space: &FockSpace,
    z1: C64,
    z2: C64,
    t: f64,
    zeta: C64,
    h: &LadderPoly,
    tol: f64,
) -> Result<f64> {
    if !(zeta.norm() <= 1.0) {
        return Err(invalid("zeta", "|zeta| must not exceed 1"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", "must lie in (0, 1)"));
    }
    let ket = coherent_vector(space, z1)?;
    let bra = coherent_vector(space, z2)?;
    let half = evolve(space, &h.to_matrix(space), 0.5 * t)?.propagator;
    // phi = U^dag |z''>, chi = U |z'>
    let phi = half.adjoint().apply(&bra);
    let chi = half.apply(&ket);
    let direct = phi.inner(&chi);

    let phi_c: Vec<C64> = phi.amplitudes.iter().map(|c| c.conj()).collect();
    let chi_c: Vec<C64> = chi.amplitudes.iter().copied().collect();
    let reach = z1.norm().max(z2.norm());
    let base = auto_radius(1.0, 0, (2.0 * zeta.norm_sqr()).exp(), tol)?;
    let radius = base + reach + zeta.norm();
    let osc = zeta.norm() + reach;
    let grid = GridParams {
        radius,
        n_radial: required_radial(0, osc, radius, 1.0),
        n_angular: required_angular(0, osc, radius),
        kappa: 1.0,
    }
    .build()?;
    let integrand = |z: C64| {
        let v = z - zeta;
        let u = z + zeta;
        // <phi|v> <u|chi> / <u|v>: the Gaussian prefactors cancel into exp(-u* v)
        bargmann_poly(&phi_c, v) * bargmann_poly(&chi_c, u.conj()) * (-u.conj() * v).exp()
    };
    let value = grid.integrate(integrand);
    Ok((value - direct).norm())
}

/// First-order slice factor or its exponentiated form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SliceFactor {
    /// `exp(-i tau H_n / hbar)`
    #[default]
    Exponential,
    /// `1 - i tau H_n / hbar`; the sliced integral then equals
    /// `<z''|(1 - i tau H / hbar)^{N+1}|z'>` for every offset schedule.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MonteCarlo {
    pub seed: u64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct DiscreteSpec {
    pub z_initial: C64,
    pub z_final: C64,
    pub t_total: f64,
    pub slices: usize,
    /// Offsets `zeta_0..=zeta_{N+1}`; `zeta_0` must vanish.
    pub zeta: Vec<C64>,
    pub h: LadderPoly,
    pub hbar: f64,
    pub factor: SliceFactor,
    pub monte_carlo: Option<MonteCarlo>,
    /// Quadrature tolerance for the nested grids.
    pub tol: f64,
}

impl DiscreteSpec {
    pub fn new(z_initial: C64, z_final: C64, t_total: f64, slices: usize, h: LadderPoly) -> Self {
        Self {
            z_initial,
            z_final,
            t_total,
            slices,
            zeta: vec![C64::new(0.0, 0.0); slices + 2],
            h,
            hbar: 1.0,
            factor: SliceFactor::Exponential,
            monte_carlo: None,
            tol: 1e-10,
        }
    }

    pub fn with_zeta(mut self, zeta: Vec<C64>) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn tau(&self) -> f64 {
        self.t_total / (self.slices + 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.zeta.len() != self.slices + 2 {
            return Err(Error::DimensionMismatch {
                expected: self.slices + 2,
                found: self.zeta.len(),
            });
        }
        if self.zeta[0] != C64::new(0.0, 0.0) {
            return Err(invalid("zeta", "the first offset must be zero"));
        }
        if !(self.t_total.is_finite() && self.t_total >= 0.0) {
            return Err(invalid("T", "must be finite and nonnegative"));
        }
        if !(self.hbar > 0.0) {
            return Err(invalid("hbar", "must be positive"));
        }
        if self.factor == SliceFactor::Exponential && self.h.degree() > 2 {
            return Err(invalid(
                "h",
                "the exponentiated slice factor grows without bound beyond quadratic order; use the linear factor",
            ));
        }
        Ok(())
    }

    /// `s_n` with `y_n = z_n + s_n` turning every slice overlap into a
    /// function of `y_{n+1} - y_n`.
    fn shifts(&self) -> Vec<C64> {
        let mut s = vec![C64::new(0.0, 0.0); self.slices + 2];
        for n in 0..=self.slices {
            s[n + 1] = s[n] + self.zeta[n + 1] + self.zeta[n];
        }
        s
    }

    /// End point `y_{N+1}` of the bridge.
    fn bridge_end(&self, s: &[C64]) -> C64 {
        let n = self.slices;
        self.z_final + s[n] + self.zeta[n]
    }

    /// Largest coefficient growth of `|exp(-i tau H / hbar)|` in `|z|^2`.
    fn growth(&self) -> f64 {
        match self.factor {
            SliceFactor::Linear => 0.0,
            SliceFactor::Exponential => {
                let g: f64 = self.h.terms().filter(|((j, k), _)| j + k == 2).map(|(_, c)| c.norm()).sum();
                self.tau() * g / self.hbar
            }
        }
    }

    /// Factor of slice `n` between bra label `a = z_{n+1} + zeta_{n+1}` and
    /// ket label `b = z_n - zeta_n`.
    fn slice(&self, a: C64, b: C64) -> C64 {
        let x = C64::new(0.0, -self.tau() / self.hbar) * self.h.coherent_ratio(a, b);
        match self.factor {
            SliceFactor::Exponential => (log_overlap(a, b) + x).exp(),
            SliceFactor::Linear => overlap(a, b) * (1.0 + x),
        }
    }

    /// `1 / <z_n+zeta_n|z_n-zeta_n>`
    fn amplification(&self, n: usize, z: C64) -> C64 {
        let zeta = self.zeta[n];
        (-log_overlap(z + zeta, z - zeta)).exp()
    }
}

const OSC_SPAN: f64 = 0.5;
const OSC_RADIUS: f64 = 0.2;

/// Grid for integration variable `n`, in the bridge coordinate `y_n`.
fn bridge_grid(spec: &DiscreteSpec, n: usize, center: C64, span: f64, tol: f64) -> Result<(GridParams, C64)> {
    let big = (spec.slices + 1) as f64;
    let k = n as f64;
    let kappa_bridge = big / (2.0 * k * (big - k));
    let kappa = kappa_bridge - 2.0 * spec.growth();
    if kappa < 0.1 * kappa_bridge {
        return Err(invalid("T", "time step too large for the exponentiated slice factor"));
    }
    let radius = auto_radius(kappa, 0, 1.0, tol)?;
    let zeta_max = spec.zeta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let osc = OSC_SPAN * span + OSC_RADIUS * radius + zeta_max;
    Ok((
        GridParams {
            radius,
            n_radial: required_radial(0, osc, radius, kappa),
            n_angular: required_angular(0, osc, radius),
            kappa,
        },
        center,
    ))
}

fn shifted(grid: &PhaseGrid, center: C64, shift: C64) -> Vec<C64> {
    grid.nodes.iter().map(|y| y + center - shift).collect()
}

fn scale_grid(p: GridParams, num: usize, den: usize) -> GridParams {
    GridParams {
        n_radial: (p.n_radial * num).div_ceil(den),
        n_angular: (p.n_angular * num).div_ceil(den),
        ..p
    }
}

fn nested(spec: &DiscreteSpec, refine: (usize, usize)) -> Result<C64> {
    let n = spec.slices;
    let zp = spec.z_initial;
    let zpp = spec.z_final;
    let zeta = &spec.zeta;
    if n == 0 {
        return Ok(spec.slice(zpp, zp));
    }
    let s = spec.shifts();
    let y0 = zp;
    let y_end = spec.bridge_end(&s);
    let span = (y_end - y0).norm() + zp.norm().max(zpp.norm());
    let mean = |k: usize| y0 + (y_end - y0) * (k as f64 / (n + 1) as f64);
    let (p1, c1) = bridge_grid(spec, 1, mean(1), span, spec.tol)?;
    let g1 = scale_grid(p1, refine.0, refine.1).build()?;
    let z1: Vec<C64> = shifted(&g1, c1, s[1]);
    // product of every factor that involves only z_1 (and the fixed ends)
    let first: Vec<C64> = z1
        .iter()
        .zip(&g1.weights)
        .map(|(&z, &w)| spec.slice(z + zeta[1], zp) * spec.amplification(1, z) * w)
        .collect();
    if n == 1 {
        let total = crate::quadrature::fixed_tree_sum(z1.len(), |i| first[i] * spec.slice(zpp, z1[i] - zeta[1]));
        return Ok(total);
    }
    if n != 2 {
        return Err(Error::TooManySlices { slices: n });
    }
    let (p2, c2) = bridge_grid(spec, 2, mean(2), span, spec.tol)?;
    let g2 = scale_grid(p2, refine.0, refine.1).build()?;
    let z2: Vec<C64> = shifted(&g2, c2, s[2]);
    let last: Vec<C64> = z2
        .iter()
        .zip(&g2.weights)
        .map(|(&z, &w)| spec.slice(zpp, z - zeta[2]) * spec.amplification(2, z) * w)
        .collect();
    let n1 = z1.len();
    let partials: Vec<C64> = (0..n1.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ComplexSum::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n1) {
                let b = z1[i] - zeta[1];
                let mut inner = ComplexSum::default();
                for (k, z) in z2.iter().enumerate() {
                    inner.add(last[k] * spec.slice(z + zeta[2], b));
                }
                acc.add(first[i] * inner.value());
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in partials {
        total.add(p);
    }
    Ok(total.value())
}

/// Importance-sampled estimate with a complex Brownian bridge from `y_0` to
/// `y_{N+1}` as proposal. Returns `(mean, standard error)`.
fn monte_carlo(spec: &DiscreteSpec, mc: MonteCarlo) -> Result<(C64, f64)> {
    if mc.samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    let n = spec.slices;
    let s = spec.shifts();
    let y0 = spec.z_initial;
    let y_end = spec.bridge_end(&s);
    let zeta = &spec.zeta;
    const BATCH: usize = 4096;
    let batches = mc.samples.div_ceil(BATCH);
    let partials: Vec<(C64, f64)> = (0..batches)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(c as u64);
            let mut sum = ComplexSum::default();
            let mut sq = crate::quadrature::CompensatedSum::default();
            let mut y = vec![C64::new(0.0, 0.0); n + 2];
            for _ in c * BATCH..((c + 1) * BATCH).min(mc.samples) {
                y[0] = y0;
                y[n + 1] = y_end;
                let mut log_q = 0.0;
                for k in 1..=n {
                    let remaining = (n + 2 - k) as f64;
                    let mu = y[k - 1] + (y_end - y[k - 1]) / remaining;
                    let var = 2.0 * (remaining - 1.0) / remaining;
                    let sd = (0.5 * var).sqrt();
                    let g = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
                    y[k] = mu + g * sd;
                    // proposal density times pi per variable
                    log_q += -(y[k] - mu).norm_sqr() / var - var.ln();
                }
                let z: Vec<C64> = (0..=n + 1).map(|k| y[k] - s[k]).collect();
                let mut f = spec.slice(spec.z_final, z[n] - zeta[n]);
                for k in 1..=n {
                    f *= spec.slice(z[k] + zeta[k], z[k - 1] - zeta[k - 1]) * spec.amplification(k, z[k]);
                }
                let w = f * (-log_q).exp();
                sum.add(w);
                sq.add(w.norm_sqr());
            }
            (sum.value(), sq.value())
        })
        .collect();
    let mut sum = ComplexSum::default();
    let mut sq = crate::quadrature::CompensatedSum::default();
    for (a, b) in partials {
        sum.add(a);
        sq.add(b);
    }
    let m = mc.samples as f64;
    let mean = sum.value() / m;
    let var = (sq.value() / m - mean.norm_sqr()).max(0.0) * m / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

fn evaluate(spec: &DiscreteSpec) -> Result<(C64, f64, Method)> {
    match spec.monte_carlo {
        Some(mc) if spec.slices > 0 => {
            let (v, se) = monte_carlo(spec, mc)?;
            Ok((v, se, Method::MonteCarlo))
        }
        _ => {
            if spec.slices > 2 {
                return Err(Error::TooManySlices { slices: spec.slices });
            }
            let v = nested(spec, (1, 1))?;
            let q = if spec.slices == 0 { 0.0 } else { (nested(spec, (5, 4))? - v).norm() };
            Ok((v, q, Method::DiscreteQuadrature))
        }
    }
}

/// Same endpoints and total time with one slice fewer or more.
fn neighbour(spec: &DiscreteSpec, slices: usize) -> DiscreteSpec {
    let mut zeta = vec![C64::new(0.0, 0.0); slices + 2];
    let keep = slices.min(spec.slices);
    zeta[1..=keep].copy_from_slice(&spec.zeta[1..=keep]);
    zeta[slices + 1] = spec.zeta[spec.slices + 1];
    DiscreteSpec {
        slices,
        zeta,
        monte_carlo: if slices > 0 { spec.monte_carlo } else { None },
        ..spec.clone()
    }
}

/// Sliced phase-space integral with `N` intermediate closures.
///
/// `N <= 2` is integrated by nested product quadrature; larger `N` needs a
/// Monte Carlo seed. The error estimate adds the quadrature (or sampling)
/// error to a slicing error `C (N+1) tau^2`, with `C` fitted from the
/// neighbouring slice count at the same total time.
pub fn discrete_propagator(spec: &DiscreteSpec) -> Result<PropagatorResult> {
    spec.validate()?;
    if spec.slices > 2 && spec.monte_carlo.is_none() {
        return Err(Error::TooManySlices { slices: spec.slices });
    }
    let (value, numeric, method) = evaluate(spec)?;
    let slicing = if spec.slices == 0 {
        let (v1, _, _) = evaluate(&neighbour(spec, 1))?;
        2.0 * (v1 - value).norm()
    } else {
        let (v0, _, _) = evaluate(&neighbour(spec, spec.slices - 1))?;
        spec.slices as f64 * (value - v0).norm()
    };
    Ok(PropagatorResult {
        value,
        method,
        error_estimate: numeric + slicing,
        n_slices: spec.slices,
    })
}

/// Sampled path on a uniform time grid.
#[derive(Clone, Debug)]
pub struct PathSpec {
    pub z: Vec<C64>,
    /// Same length as `z`; the first entry must vanish.
    pub zeta: Vec<C64>,
    pub t_total: f64,
    pub h: LadderPoly,
    pub hbar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakAction {
    pub surface: C64,
    pub action: C64,
}

/// Second-order differences: centered inside, one-sided at the ends.
pub fn time_derivative(f: &[C64], dt: f64) -> Vec<C64> {
    let m = f.len();
    (0..m)
        .map(|i| {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt)
            } else if i == m - 1 {
                (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * dt)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Composite Simpson on uniform samples, closing with the 3/8 rule when
/// the interval count is odd.
pub fn composite_simpson(f: &[C64], dt: f64) -> C64 {
    let m = f.len();
    let simpson = |a: usize, b: usize| -> C64 {
        let mut acc = f[a] + f[b];
        for i in a + 1..b {
            acc += f[i] * if (i - a) % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * dt / 3.0
    };
    match m {
        0 | 1 => C64::new(0.0, 0.0),
        2 => (f[0] + f[1]) * 0.5 * dt,
        _ if (m - 1) % 2 == 0 => simpson(0, m - 1),
        _ => {
            let k = m - 4;
            let tail = (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]) * (3.0 * dt / 8.0);
            let head = if k > 0 { simpson(0, k) } else { C64::new(0.0, 0.0) };
            head + tail
        }
    }
}

/// Surface term and generalized action of a sampled path.
///
/// `action = int [ i hbar/2 (z+zeta)* (z'-zeta') - i hbar/2 (z-zeta)(z'+zeta')* - H_zeta ] dt`
/// and `surface = -zeta(T) (z(T) + zeta(T))*`, the boundary value of
/// `-d/dt[zeta (z + zeta)*]` given `zeta(0) = 0`.
pub fn weak_action(path: &PathSpec) -> Result<WeakAction> {
    let m = path.z.len();
    if m < 3 {
        return Err(invalid("z", "need at least three time samples"));
    }
    if path.zeta.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: path.zeta.len(),
        });
    }
    if path.zeta[0] != C64::new(0.0, 0.0) {
        return Err(invalid("zeta", "the first offset must be zero"));
    }
    if !(path.t_total > 0.0) {
        return Err(invalid("T", "must be positive"));
    }
    let dt = path.t_total / (m - 1) as f64;
    let plus: Vec<C64> = path.z.iter().zip(&path.zeta).map(|(z, s)| z + s).collect();
    let minus: Vec<C64> = path.z.iter().zip(&path.zeta).map(|(z, s)| z - s).collect();
    let d_plus = time_derivative(&plus, dt);
    let d_minus = time_derivative(&minus, dt);
    let half = C64::new(0.0, 0.5 * path.hbar);
    let lagrangian: Vec<C64> = (0..m)
        .map(|i| {
            half * plus[i].conj() * d_minus[i] - half * minus[i] * d_plus[i].conj()
                - path.h.coherent_ratio(plus[i], minus[i])
        })
        .collect();
    let last = m - 1;
    Ok(WeakAction {
        surface: -path.zeta[last] * plus[last].conj(),
        action: composite_simpson(&lagrangian, dt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::oscillator;

    fn osc_exact(z1: C64, z2: C64, wt: f64) -> C64 {
        let e = C64::from_polar(1.0, -wt);
        (C64::new(0.0, -0.5 * wt) - 0.5 * z1.norm_sqr() - 0.5 * z2.norm_sqr() + z2.conj() * z1 * e).exp()
    }

    #[test]
    fn exact_matches_closed_form() {
        let space = FockSpace::new(40);
        let h = oscillator(&space, 1.0);
        let (z1, z2) = (C64::new(1.2, -0.4), C64::new(-0.3, 0.9));
        let r = exact_propagator(&space, z1, z2, 0.7, &h).unwrap();
        assert!((r.value - osc_exact(z1, z2, 0.7)).norm() < 1e-10);
        let r0 = exact_propagator(&space, z1, z2, 0.0, &h).unwrap();
        assert!((r0.value - overlap(z2, z1)).norm() < 1e-14);
    }

    #[test]
    fn insertion_at_zero_time() {
        let space = FockSpace::new(30);
        let h = oscillator(&space, 1.0);
        let d = insertion_identity_check(&space, C64::new(0.5, 0.0), C64::new(0.2, 0.3), 0.0, C64::new(0.1, 0.1), &h, 1e-10).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn free_slices_telescope() {
        let (z1, z2) = (C64::new(0.4, 0.1), C64::new(-0.2, 0.5));
        for n in 0..=2 {
            let mut zeta = vec![C64::new(0.0, 0.0); n + 2];
            if n > 0 {
                zeta[1] = C64::new(0.05, -0.02);
            }
            let spec = DiscreteSpec::new(z1, z2, 1.0, n, LadderPoly::zero()).with_zeta(zeta);
            let r = discrete_propagator(&spec).unwrap();
            assert!((r.value - overlap(z2, z1)).norm() < 1e-6, "{n}: {}", r.value);
        }
    }

    #[test]
    fn nonzero_first_offset_is_rejected() {
        let mut spec = DiscreteSpec::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0, 1, LadderPoly::zero());
        spec.zeta[0] = C64::new(0.1, 0.0);
        assert!(discrete_propagator(&spec).is_err());
    }

    #[test]
    fn many_slices_need_a_seed() {
        let spec = DiscreteSpec::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0, 3, LadderPoly::zero());
        assert!(matches!(discrete_propagator(&spec), Err(Error::TooManySlices { slices: 3 })));
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        for m in [3usize, 4, 5, 8] {
            let dt = 1.0 / (m - 1) as f64;
            let f: Vec<C64> = (0..m).map(|i| C64::new((i as f64 * dt).powi(3), 0.0)).collect();
            assert!((composite_simpson(&f, dt).re - 0.25).abs() < 1e-14, "{m}");
        }
    }

    #[test]
    fn short_paths_are_rejected() {
        let path = PathSpec {
            z: vec![C64::new(0.0, 0.0); 2],
            zeta: vec![C64::new(0.0, 0.0); 2],
            t_total: 1.0,
            h: LadderPoly::zero(),
            hbar: 1.0,
        };
        assert!(weak_action(&path).is_err());
    }
}
