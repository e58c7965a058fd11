use std::collections::BTreeMap;
use std::f64::consts::PI;

use cohframe::closure::{b_operator, lambda_closure, lambda_weight_discrepancy, standard_closure, weyl_closure};
use cohframe::fock::{coherent_vector, FockSpace, OperatorMatrix};
use cohframe::ladder::{kerr, oscillator, quartic_position, LadderPoly};
use cohframe::plane::{
    anisotropy_constants, frame_operator, max_deviation_from_identity, min_pairwise_overlap, unlike_operator,
    PlaneFrame,
};
use cohframe::propagator::{discrete_propagator, exact_propagator, insertion_identity_check, DiscreteSpec, MonteCarlo};
use cohframe::quadrature::GridParams;
use cohframe::spin::{beta_identity, spin_unlike_closure, SpinSystem};
use cohframe::transforms::{
    coherent_bargmann, dual_bargmann, fourier_identity_check, overlap_phase, vacuum_symbol, weyl_symbol,
    PositionWavefunction, WeylOptions,
};
use cohframe::weak::{h_zeta, h_zeta_exact, h_zeta_first_order_exact, weak_value, WeakValueInput, ZetaPair};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Closure,
    Spin,
    Weak,
    Propagator,
    Plane,
    Transforms,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Closure => "closure",
            Suite::Spin => "spin",
            Suite::Weak => "weak",
            Suite::Propagator => "propagator",
            Suite::Plane => "plane",
            Suite::Transforms => "transforms",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Closure, Suite::Spin, Suite::Weak, Suite::Propagator, Suite::Plane, Suite::Transforms],
            s => vec![s],
        }
    }
}

/// One check. Passes when `|value - expected| <= tolerance`, or, for a
/// floor check (no tolerance), when `value >= expected`. Checks with
/// neither field are informational and always pass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridParams>,
}

#[derive(Default)]
pub struct SuiteOutput {
    pub checks: Vec<CheckResult>,
    pub details: BTreeMap<String, Value>,
    /// `(index, x, y)` of the plane frame vectors.
    pub frame: Vec<(usize, f64, f64)>,
}

struct Out {
    suite: &'static str,
    inner: SuiteOutput,
}

impl Out {
    fn new(suite: &'static str) -> Self {
        Self { suite, inner: SuiteOutput::default() }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, expected: Option<f64>, tolerance: Option<f64>, pass: bool) -> &mut CheckResult {
        self.inner.checks.push(CheckResult { suite: self.suite, name: name.into(), value, expected, tolerance, pass, grid: None });
        self.inner.checks.last_mut().unwrap()
    }

    fn near(&mut self, name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> &mut CheckResult {
        let pass = (value - expected).abs() <= tolerance;
        self.push(name, value, Some(expected), Some(tolerance), pass)
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, floor: f64) {
        self.push(name, value, Some(floor), None, value >= floor);
    }

    fn info(&mut self, name: impl Into<String>, value: f64) {
        self.push(name, value, None, None, true);
    }

    fn detail(&mut self, key: &str, v: impl Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))?;
        self.inner.details.insert(key.to_string(), v);
        Ok(())
    }
}

fn zeta(cfg: &Resolved) -> C64 {
    C64::new(cfg.zeta[0], cfg.zeta[1])
}

pub fn run(suite: Suite, cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    match suite {
        Suite::Closure => closure(cfg),
        Suite::Spin => spin(cfg),
        Suite::Weak => weak(cfg),
        Suite::Propagator => propagator(cfg),
        Suite::Plane => plane(cfg),
        Suite::Transforms => transforms(cfg),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn closure(cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    let mut o = Out::new("closure");
    let tol = cfg.tol;
    let r = standard_closure(12, tol)?;
    o.near("standard.dev_max", r.dev_max, 0.0, tol).grid = r.grid;
    o.near("standard.hermiticity", r.hermiticity_defect(), 0.0, 1e-12);
    o.detail("standard", &r)?;

    let r = lambda_closure(cfg.lambda, 8, tol)?;
    o.near(format!("lambda={}.dev_max", cfg.lambda), r.dev_max, 0.0, tol).grid = r.grid;
    o.near(format!("lambda={}.two_forms", cfg.lambda), r.cross_check.unwrap_or(f64::NAN), 0.0, tol);
    o.detail("lambda", &r)?;

    let nodes = random_nodes(cfg.seed, 1000, 6.0);
    for l in [0.3, 0.5, 1.0, 2.0, 3.0] {
        o.near(format!("weight_identity.lambda={l}"), lambda_weight_discrepancy(l, &nodes), 0.0, 1e-12);
    }

    let z = zeta(cfg);
    let r = weyl_closure(z, 6, tol)?;
    o.near(format!("offset.zeta={z}.dev_max"), r.dev_max, 0.0, tol).grid = r.grid;
    o.detail("offset", &r)?;

    let r = b_operator(z, 6, tol)?;
    let (off, spread, mean) = r.proportionality();
    o.near("b_operator.off_diagonal", off, 0.0, tol);
    o.near("b_operator.diagonal_spread", spread, 0.0, tol);
    o.near("b_operator.constant", mean.re, (-2.5 * z.norm_sqr()).exp(), tol).grid = r.grid;
    o.detail("b_operator", &r)?;
    Ok(o.inner)
}

fn random_nodes(seed: u64, count: usize, radius: f64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| C64::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>()))
        .collect()
}

fn spin(cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    let mut o = Out::new("spin");
    for two_j in 1..=4u32 {
        let sys = SpinSystem::new(two_j);
        for l in [cfg.lambda, 1.0] {
            let r = spin_unlike_closure(sys, l)?;
            let (mut diag, mut off) = (0.0f64, 0.0f64);
            for i in 0..sys.dim() {
                for k in 0..sys.dim() {
                    let v = r.matrix[(i, k)];
                    if i == k {
                        diag = diag.max((v - 1.0).norm());
                    } else {
                        off = off.max(v.norm());
                    }
                }
            }
            let tag = format!("j={}.lambda={l}", sys.j());
            o.near(format!("{tag}.diagonal"), diag, 0.0, 1e-10);
            o.near(format!("{tag}.off_diagonal"), off, 0.0, 0.0);
            o.near(format!("{tag}.full_quadrature"), r.cross_check.unwrap_or(f64::NAN), 0.0, 1e-8);
        }
    }
    let mut worst = 0.0f64;
    for two_j in 0..=12 {
        let sys = SpinSystem::new(two_j);
        for n in 0..sys.dim() {
            worst = worst.max((beta_identity(sys, n) - 1.0).abs());
        }
    }
    o.near("beta_identity", worst, 0.0, 1e-12);
    Ok(o.inner)
}

fn slope(h: &LadderPoly, z: C64, phase: f64) -> (f64, Vec<(f64, f64)>) {
    let pts: Vec<(f64, f64)> = (0..9)
        .map(|k| {
            let r = 10f64.powf(-3.0 + 0.25 * k as f64);
            let pair = ZetaPair::new(z, C64::from_polar(r, phase));
            (r, (h_zeta_exact(&pair, h) - h_zeta_first_order_exact(&pair, h)).norm())
        })
        .collect();
    let n = pts.len() as f64;
    let lx: Vec<(f64, f64)> = pts.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
    let mx = lx.iter().map(|p| p.0).sum::<f64>() / n;
    let my = lx.iter().map(|p| p.1).sum::<f64>() / n;
    let s = lx.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / lx.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    (s, pts)
}

fn weak(cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    let mut o = Out::new("weak");
    let space = FockSpace::with_units(80, cfg.hbar, cfg.alpha)?;
    let z = C64::new(0.7, 0.4);
    let zt = zeta(cfg);
    let hams = [
        ("harmonic", oscillator(&space, 1.0)),
        ("kerr", kerr(1.0)),
        ("quartic", quartic_position(&space, 1.0)),
    ];
    let mut sweep = Vec::new();
    for (name, h) in &hams {
        let (s, pts) = slope(h, z, zt.arg());
        o.near(format!("{name}.expansion_slope"), s, 2.0, 0.1);
        for (r, err) in pts {
            let pair = ZetaPair::new(z, C64::from_polar(r, zt.arg()));
            let hz = h_zeta_exact(&pair, h);
            sweep.push(json!({"hamiltonian": name, "zeta": [pair.zeta.re, pair.zeta.im], "h_zeta": [hz.re, hz.im], "error_vs_expansion": err}));
        }
        let m = h.to_matrix(&space);
        let pair = ZetaPair::with_units(z, zt, cfg.hbar, cfg.alpha)?;
        let fwd = h_zeta(&space, &pair, &m)?.value;
        let back = weak_value(&WeakValueInput {
            psi0: coherent_vector(&space, z + zt)?,
            psif: coherent_vector(&space, z - zt)?,
            h: m,
        })?
        .value;
        o.near(format!("{name}.conjugate_pair"), (fwd.conj() - back).norm(), 0.0, 1e-10 * (1.0 + fwd.norm()));
    }
    let omega = 1.0;
    let h = oscillator(&space, omega);
    let pair = ZetaPair::with_units(z, zt, cfg.hbar, cfg.alpha)?;
    let expected = ((z + zt).conj() * (z - zt) + 0.5) * (cfg.hbar * omega);
    let got = h_zeta(&space, &pair, &h.to_matrix(&space))?.value;
    o.near("harmonic.closed_form", (got - expected).norm(), 0.0, 1e-10);
    o.detail("sweep", sweep)?;
    Ok(o.inner)
}

fn osc_closed_form(z1: C64, z2: C64, wt: f64) -> C64 {
    let e = C64::from_polar(1.0, -wt);
    (-0.5 * z1.norm_sqr() - 0.5 * z2.norm_sqr() + z2.conj() * z1 * e - C64::new(0.0, 0.5 * wt)).exp()
}

fn propagator(cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    let mut o = Out::new("propagator");
    let space = FockSpace::with_units(48, cfg.hbar, cfg.alpha)?;
    let h = oscillator(&space, 1.0);
    let mut worst = 0.0f64;
    for (z1, z2, wt) in [
        (C64::new(2.0, 0.0), C64::new(0.0, 2.0), PI),
        (C64::new(1.0, -1.0), C64::new(0.5, 0.3), 1.0),
        (C64::new(-1.4, 1.4), C64::new(1.2, 0.9), 2.5),
    ] {
        worst = worst.max((exact_propagator(&space, z1, z2, wt, &h)?.value - osc_closed_form(z1, z2, wt)).norm());
    }
    o.near("exact_vs_closed_form", worst, 0.0, 1e-8);
    let small = FockSpace::with_units(40, cfg.hbar, cfg.alpha)?;
    let d = insertion_identity_check(&small, C64::new(0.4, 0.1), C64::new(-0.2, 0.3), 0.6, C64::new(0.2, 0.1), &h, 1e-8)?;
    o.near("insertion_identity", d, 0.0, 1e-6);

    let make = |t: f64, n: usize| {
        let z1 = C64::new(0.5, 0.0);
        let mut s = DiscreteSpec::new(z1, z1 * C64::from_polar(1.0, -t), t, n, h.clone());
        s.hbar = cfg.hbar;
        s
    };
    let mut table = Vec::new();
    let mut err = |s: &DiscreteSpec| -> Result<f64, CliError> {
        let k = discrete_propagator(s)?;
        let e = (k.value - osc_closed_form(s.z_initial, s.z_final, s.t_total)).norm();
        table.push(json!({"tau": s.tau(), "slices": s.slices, "t_total": s.t_total, "error": e, "estimate": k.error_estimate}));
        Ok(e)
    };
    let e0 = err(&make(0.1, 0))?;
    let e1 = err(&make(0.1, 1))?;
    err(&make(0.1, 2))?;
    let e_half = err(&make(0.05, 1))?;
    o.near("discrete.N=1.error", e1, 0.0, 1e-3);
    o.near("discrete.tau_exponent", (e1 / e_half).log2(), 2.0, 0.3);
    o.info("discrete.fixed_T_exponent", (e0 / e1).log2());

    let mut mc = make(0.1, 3);
    mc.monte_carlo = Some(MonteCarlo { seed: cfg.seed, samples: cfg.samples });
    let k = discrete_propagator(&mc)?;
    let e = (k.value - osc_closed_form(mc.z_initial, mc.z_final, 0.1)).norm();
    o.near("monte_carlo.N=3.error", e, 0.0, 3.0 * k.error_estimate);
    o.detail("convergence", table)?;
    Ok(o.inner)
}

fn plane(cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    let mut o = Out::new("plane");
    let eps = cfg.eps;
    let frame = PlaneFrame::new(cfg.n, eps)?;
    o.inner.frame = frame.coordinates();
    o.at_least(format!("N={}.min_pairwise_overlap", cfg.n), min_pairwise_overlap(&frame), 1e-8);
    o.near(format!("N={}.frame_deviation", cfg.n), max_deviation_from_identity(&frame_operator(&frame)), 0.0, 5.0 * eps);
    let u = unlike_operator(&frame)?;
    o.info(format!("N={}.unlike_deviation", cfg.n), max_deviation_from_identity(&u.matrix));
    o.info(format!("N={}.max_weight", cfg.n), u.max_weight);

    let big = PlaneFrame::new(1_000_000, eps)?;
    let ub = unlike_operator(&big)?;
    let a = anisotropy_constants(big.delta_theta)?;
    o.at_least("N=1e6.min_pairwise_overlap", min_pairwise_overlap(&big), 1e-8);
    o.near("N=1e6.unlike_deviation", max_deviation_from_identity(&ub.matrix), 0.0, 10.0 * eps);
    o.near("L", ub.corrected[0][0] - 1.0, a.l, 1e-3);
    o.near("J+", a.j_plus, 0.0, 10.0 * eps * eps);
    o.near("J-", a.j_minus, 0.0, 10.0 * eps * eps);
    o.detail("anisotropy", a)?;
    o.detail("unlike_corrected_N=1e6", ub.corrected)?;
    o.detail("unlike_N", u)?;
    Ok(o.inner)
}

fn transforms(cfg: &Resolved) -> Result<SuiteOutput, CliError> {
    let mut o = Out::new("transforms");
    let space = FockSpace::with_units(6, cfg.hbar, cfg.alpha)?;
    let vac = OperatorMatrix::from_fn(7, |i, k| C64::new(if i == 0 && k == 0 { 1.0 } else { 0.0 }, 0.0));
    let herm = OperatorMatrix::from_fn(7, |i, k| C64::new((i + 2 * k) as f64 * 0.1, i as f64 - k as f64));
    let herm = herm.add(&herm.adjoint());
    let (mut forms, mut gauss, mut pointwise, mut imag) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let b = space.length_scale();
    for (q, p) in [(0.0, 0.0), (0.6, -0.4), (-1.2, 0.9), (1.8, 1.1)] {
        let (q, p) = (q * b, p * cfg.hbar / b);
        let w = weyl_symbol(&space, &vac, q, p, WeylOptions::default())?;
        gauss = gauss.max((w.plane_wave - vacuum_symbol(&space, q, p)).norm());
        forms = forms.max(w.discrepancy());
        let wh = weyl_symbol(&space, &herm, q, p, WeylOptions::default())?;
        forms = forms.max(wh.discrepancy());
        imag = imag.max(wh.plane_wave.im.abs());
        for k in 0..50 {
            let x = (-6.0 + 0.24 * k as f64) * b;
            pointwise = pointwise.max((C64::from_polar(1.0, -p * x / cfg.hbar) - overlap_phase(cfg.hbar, q, p, x)).norm());
        }
    }
    o.near("weyl.phase_forms_pointwise", pointwise, 0.0, 1e-12);
    o.near("weyl.two_forms", forms, 0.0, 1e-12);
    o.near("weyl.vacuum_gaussian", gauss, 0.0, 1e-6);
    o.near("weyl.hermitian_real", imag, 0.0, 1e-10);
    let (z0, w, s) = (C64::new(0.6, -0.2), C64::new(-0.3, 0.5), C64::new(1.2, 0.7));
    let v = dual_bargmann(coherent_bargmann(z0), w, (C64::new(0.0, 0.0), s), 24)?;
    let expected = (-0.5 * z0.norm_sqr()).exp() * (((s * (z0 - w)).exp() - 1.0) / (z0 - w));
    o.near("dual_bargmann.segment", (v - expected).norm(), 0.0, 1e-10);
    let mut f = 0.0f64;
    for n in 0..3 {
        let psi = PositionWavefunction::fock(&space, n, 2001)?;
        for p in [-1.0, 0.0, 0.7, 2.0] {
            f = f.max(fourier_identity_check(&psi, p * cfg.hbar / b));
        }
    }
    o.near("fourier.two_forms", f, 0.0, 1e-12);
    Ok(o.inner)
}
