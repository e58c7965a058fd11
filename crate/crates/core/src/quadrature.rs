//! Quadrature rules for `d^2 z / pi` over the complex plane, Gauss-Legendre
//! on intervals, and principal values through simple poles.
//!
//! All sums are compensated and run in a fixed node order. Parallel sums
//! split the nodes into chunks of [`CHUNK`] and add the partial results in
//! chunk order, so a result depends only on the configuration and never on
//! the number of worker threads.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Fixed reduction granularity for parallel sums.
pub const CHUNK: usize = 256;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Sum `f(i)` for `i in 0..n` with the fixed chunked reduction tree.
pub fn fixed_tree_sum<F>(n: usize, f: F) -> C64
where
    F: Fn(usize) -> C64 + Sync,
{
    let partials: Vec<C64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ComplexSum::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in partials {
        total.add(p);
    }
    total.value()
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "Gauss-Legendre needs at least one node"));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }

    pub fn integrate_complex(&self, a: f64, b: f64, f: impl Fn(f64) -> C64) -> C64 {
        let mut acc = ComplexSum::default();
        for (x, w) in self.mapped(a, b) {
            acc.add(f(x) * w);
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// Parameters of a polar product grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub radius: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub kappa: f64,
}

impl GridParams {
    /// Half the radial spacing and twice the angular count.
    pub fn refined(&self) -> Self {
        Self {
            n_radial: self.n_radial * 2,
            n_angular: self.n_angular * 2,
            ..*self
        }
    }

    pub fn build(&self) -> Result<PhaseGrid> {
        build_polar_grid(self.radius, self.n_radial, self.n_angular, self.kappa)
    }

    pub fn node_count(&self) -> usize {
        self.n_radial * self.n_angular
    }
}

/// Nodes and positive weights representing `d^2 z / pi` on the disk `|z| <= R`.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    pub params: GridParams,
    /// Mass of `e^{-kappa |z|^2}` outside the disk.
    pub est_tail: f64,
}

/// Gauss-Legendre in `r` on `[0, R]` (Jacobian `r` folded into the weights)
/// times the uniform trapezoid in the angle, which is exact for angular
/// harmonics below `n_angular`.
pub fn build_polar_grid(radius: f64, n_radial: usize, n_angular: usize, kappa: f64) -> Result<PhaseGrid> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", "must be positive"));
    }
    if n_radial < 2 {
        return Err(invalid("n_radial", "must be at least 2"));
    }
    if n_angular < 4 {
        return Err(invalid("n_angular", "must be at least 4"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa", "must be positive"));
    }
    let gl = GaussLegendre::new(n_radial)?;
    let mut nodes = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    let dphi = 2.0 * PI / n_angular as f64;
    for (r, w) in gl.mapped(0.0, radius) {
        for k in 0..n_angular {
            let phi = dphi * (k as f64 + 0.5);
            nodes.push(C64::from_polar(r, phi));
            // (1/pi) r dr dphi
            weights.push(w * r * dphi / PI);
        }
    }
    Ok(PhaseGrid {
        nodes,
        weights,
        params: GridParams {
            radius,
            n_radial,
            n_angular,
            kappa,
        },
        est_tail: tail_estimate(radius, kappa),
    })
}

/// `(1/pi) * integral_{|z| > R} e^{-kappa |z|^2} d^2 z`
pub fn tail_estimate(radius: f64, kappa: f64) -> f64 {
    (-kappa * radius * radius).exp() / kappa
}

impl PhaseGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.params.radius
    }

    pub fn integrate<F>(&self, f: F) -> C64
    where
        F: Fn(C64) -> C64 + Sync,
    {
        fixed_tree_sum(self.len(), |i| f(self.nodes[i]) * self.weights[i])
    }

    pub fn refined(&self) -> Result<Self> {
        self.params.refined().build()
    }
}

/// Smallest `R` with `prefactor * e^{-kappa R^2} R^degree <= tol / 10`,
/// by fixed-point iteration on `R^2 = (ln(10 prefactor / tol) + degree ln R) / kappa`.
pub fn auto_radius(kappa: f64, degree: u32, prefactor: f64, tol: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(invalid("kappa", "must be positive"));
    }
    if !(tol > 0.0 && prefactor > 0.0) {
        return Err(invalid("tol", "tolerance and prefactor must be positive"));
    }
    let log_target = (10.0 * prefactor / tol).ln().max(0.0);
    let d = degree as f64;
    let mut r: f64 = (log_target / kappa).sqrt().max(1.0);
    for _ in 0..200 {
        let next = ((log_target + d * r.ln()) / kappa).max(1.0).sqrt();
        if (next - r).abs() < 1e-12 {
            r = next;
            break;
        }
        r = next;
    }
    Ok(r)
}

/// `n_angular >= degree + ceil(4 |zeta| R) + 8`.
pub fn required_angular(degree: u32, zeta_abs: f64, radius: f64) -> usize {
    degree as usize + (4.0 * zeta_abs * radius).ceil() as usize + 8
}

/// Radial count for a Gaussian of rate `kappa` times polynomial weight of
/// `degree` on `[0, R]`, with an oscillation of frequency about `2 |zeta|`.
pub fn required_radial(degree: u32, zeta_abs: f64, radius: f64, kappa: f64) -> usize {
    let spread = radius * (kappa.sqrt() + 2.0 * zeta_abs);
    (degree as usize + (2.0 * spread).ceil() as usize + 24).max(32)
}

/// Grid sized from a tolerance for an integrand bounded by
/// `prefactor * |z|^degree e^{-kappa |z|^2}` with oscillation scale `|zeta|`.
pub fn auto_grid(kappa: f64, degree: u32, prefactor: f64, zeta_abs: f64, tol: f64) -> Result<GridParams> {
    let radius = auto_radius(kappa, degree, prefactor, tol)?;
    Ok(GridParams {
        radius,
        n_radial: required_radial(degree, zeta_abs, radius, kappa),
        n_angular: required_angular(degree, zeta_abs, radius),
        kappa,
    })
}

/// Principal-value rule on `[a, b]` with declared simple poles.
///
/// Around each pole `p` a window `[p - h, p + h]` is folded onto `[0, h]`,
/// where `f(p + t) + f(p - t)` is regular; the remaining pieces are smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct PvRule {
    pub a: f64,
    pub b: f64,
    pub poles: Vec<f64>,
    pub n_nodes: usize,
    /// Refinement delta above which the integral is declared divergent.
    pub divergence_tol: f64,
    windows: Vec<f64>,
}

impl PvRule {
    pub fn new(a: f64, b: f64, mut poles: Vec<f64>, n_nodes: usize) -> Result<Self> {
        if !(a < b) {
            return Err(invalid("interval", "need a < b"));
        }
        if n_nodes < 4 {
            return Err(invalid("n_nodes", "need at least 4 nodes per piece"));
        }
        poles.sort_by(|x, y| x.total_cmp(y));
        if poles.iter().any(|&p| !(p > a && p < b)) {
            return Err(invalid("poles", "every pole must lie strictly inside (a, b)"));
        }
        if poles.windows(2).any(|w| w[1] - w[0] <= 0.0) {
            return Err(invalid("poles", "poles must be distinct"));
        }
        let windows = poles
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut h = (p - a).min(b - p);
                if i > 0 {
                    h = h.min(0.5 * (p - poles[i - 1]));
                }
                if i + 1 < poles.len() {
                    h = h.min(0.5 * (poles[i + 1] - p));
                }
                h
            })
            .collect();
        Ok(Self {
            a,
            b,
            poles,
            n_nodes,
            divergence_tol: 1e-6,
            windows,
        })
    }

    /// Nodes actually sampled by the folded rule: pairs `p +- t`.
    pub fn pair_nodes(&self) -> Result<Vec<(f64, f64)>> {
        let gl = GaussLegendre::new(self.n_nodes)?;
        let mut out = Vec::new();
        for (&p, &h) in self.poles.iter().zip(&self.windows) {
            for (t, _) in gl.mapped(0.0, h) {
                out.push((p - t, p + t));
            }
        }
        Ok(out)
    }

    fn evaluate(&self, f: &dyn Fn(f64) -> f64, n: usize) -> Result<f64> {
        let gl = GaussLegendre::new(n)?;
        let mut acc = CompensatedSum::default();
        let mut left = self.a;
        for (&p, &h) in self.poles.iter().zip(&self.windows) {
            if p - h > left {
                acc.add(gl.integrate(left, p - h, f));
            }
            acc.add(gl.integrate(0.0, h, |t| f(p + t) + f(p - t)));
            left = p + h;
        }
        if self.b > left {
            acc.add(gl.integrate(left, self.b, f));
        }
        Ok(acc.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvEstimate {
    pub value: f64,
    /// `|I(2n) - I(n)|`
    pub error: f64,
}

/// Principal value of `f` over the rule's interval.
pub fn pv_integrate(f: impl Fn(f64) -> f64, rule: &PvRule) -> Result<PvEstimate> {
    let coarse = rule.evaluate(&f, rule.n_nodes)?;
    let fine = rule.evaluate(&f, 2 * rule.n_nodes)?;
    let delta = (fine - coarse).abs();
    if !fine.is_finite() || delta > rule.divergence_tol * fine.abs().max(1.0) {
        return Err(Error::UndeclaredPole { delta });
    }
    Ok(PvEstimate {
        value: fine,
        error: delta,
    })
}
