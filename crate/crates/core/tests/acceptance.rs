//! One PASS/FAIL line per acceptance criterion. Runs without the test
//! harness so the lines always reach the output; exits non-zero on failure.

use std::f64::consts::PI;
use std::time::Instant;

use cohframe::closure::{
    b_operator, lambda_closure, lambda_weight_discrepancy, standard_closure, standard_closure_on, weyl_closure,
    weyl_closure_on, OffsetForm,
};
use cohframe::fock::{FockSpace, OperatorMatrix};
use cohframe::ladder::{kerr, oscillator, quartic_position, LadderPoly};
use cohframe::plane::{
    anisotropy_constants, frame_operator, max_deviation_from_identity, min_pairwise_overlap, reference_epsilon,
    unlike_operator, PlaneFrame,
};
use cohframe::propagator::{
    discrete_propagator, exact_propagator, insertion_identity_check, weak_action, DiscreteSpec, PathSpec,
};
use cohframe::quadrature::GridParams;
use cohframe::spin::{beta_identity, spin_unlike_closure, SpinSystem};
use cohframe::transforms::{
    coherent_bargmann, dual_bargmann, fourier_identity_check, overlap_phase, vacuum_symbol, weyl_symbol,
    PositionWavefunction, WeylOptions,
};
use cohframe::weak::{h_zeta, h_zeta_exact, h_zeta_first_order_exact, ZetaPair};
use cohframe::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Board {
    failed: usize,
    total: usize,
}

impl Board {
    fn check(&mut self, id: &str, what: &str, value: f64, bound: f64) {
        self.line(id, what, value <= bound, format!("{value:.3e} <= {bound:.1e}"));
    }

    fn line(&mut self, id: &str, what: &str, ok: bool, detail: String) {
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
        println!("{} {id:<4} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn osc() -> LadderPoly {
    oscillator(&FockSpace::new(1), 1.0)
}

fn osc_closed_form(z1: C64, z2: C64, wt: f64) -> C64 {
    let e = C64::from_polar(1.0, -wt);
    (-0.5 * z1.norm_sqr() - 0.5 * z2.norm_sqr() + z2.conj() * z1 * e - c(0.0, 0.5 * wt)).exp()
}

fn standard(b: &mut Board) {
    let t = Instant::now();
    let r = standard_closure(12, 1e-8).unwrap();
    let secs = t.elapsed().as_secs_f64();
    b.check("C1", "standard closure block 12, auto grid, dev_max", r.dev_max, 1e-6);
    b.check("C1", "standard closure runtime [s]", secs, 5.0);
    let g = GridParams { radius: 9.0, n_radial: 120, n_angular: 64, kappa: 1.0 };
    let r = standard_closure_on(12, g).unwrap();
    b.check("C1", "standard closure block 12 on R=9, 120x64, dev_max", r.dev_max, 1e-8);
}

fn lambda(b: &mut Board) {
    for l in [0.5, 1.0, 2.0] {
        let r = lambda_closure(l, 8, 1e-8).unwrap();
        b.check("C2", &format!("scaled closure lambda={l} block 8, dev_max"), r.dev_max, 1e-6);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let nodes: Vec<C64> = (0..1000)
        .map(|_| C64::from_polar(6.0 * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>()))
        .collect();
    for l in [0.3, 0.5, 1.0, 2.0, 3.0] {
        b.check("C2", &format!("weight identity lambda={l}, 1000 nodes, max rel"), lambda_weight_discrepancy(l, &nodes), 1e-12);
    }
}

fn offset(b: &mut Board) {
    for z in [c(0.3, 0.2), c(1.0, 0.0)] {
        let r = weyl_closure(z, 6, 1e-7).unwrap();
        b.check("C3", &format!("offset closure zeta={z} block 6, dev_max"), r.dev_max, 1e-5);
    }
    let g = GridParams { radius: 9.0, n_radial: 120, n_angular: 64, kappa: 1.0 };
    let w = weyl_closure_on(c(0.0, 0.0), 12, g, OffsetForm::Centered).unwrap();
    let s = standard_closure_on(12, g).unwrap();
    let diff = (&w.matrix - &s.matrix).iter().map(|x| x.norm()).fold(0.0, f64::max);
    b.check("C3", "offset closure at zeta=0 vs standard closure, max entry diff", diff, 1e-12);
    b.check("C3", "offset closure at zeta=0, dev_max", w.dev_max, 1e-6);
}

/// `(1/pi) int d^2z exp(-|z|^2 - zeta* z + zeta z*)` on a plain rectangle,
/// times `exp(-3|zeta|^2/2)` from the two coherent factors of `<0|.|0>`.
fn b_vacuum_oracle(zeta: C64) -> f64 {
    let (half, n) = (8.0, 400);
    let h = 2.0 * half / n as f64;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            let z = c(-half + (i as f64 + 0.5) * h, -half + (k as f64 + 0.5) * h);
            acc += (-z.norm_sqr() - zeta.conj() * z + zeta * z.conj()).exp();
        }
    }
    (acc * h * h / PI).re * (-1.5 * zeta.norm_sqr()).exp()
}

fn b_audit(b: &mut Board) {
    let probe = c(0.6, 0.0);
    let k_oracle = b_vacuum_oracle(probe).ln() / probe.norm_sqr();
    b.check("C4", "oracle exponent k vs -5/2", (k_oracle + 2.5).abs(), 1e-8);
    let zetas = [c(0.5, 0.0), c(0.0, 0.8)];
    let mut consts = Vec::new();
    for z in zetas {
        let r = b_operator(z, 6, 1e-9).unwrap();
        let (off, spread, mean) = r.proportionality();
        b.check("C4", &format!("B at zeta={z}: off-diagonal"), off, 1e-6);
        b.check("C4", &format!("B at zeta={z}: diagonal spread"), spread, 1e-6);
        b.line("C4", &format!("B at zeta={z}: discrepancy flagged in report"), r.note.is_some(), format!("constant {:.12}", mean.re));
        consts.push(mean.re);
    }
    let k_fit = (consts[0] / consts[1]).ln() / (zetas[0].norm_sqr() - zetas[1].norm_sqr());
    b.check("C4", &format!("fitted k={k_fit:.8} vs oracle k={k_oracle:.8}"), (k_fit - k_oracle).abs(), 1e-6);
    for (z, cz) in zetas.iter().zip(&consts) {
        b.check("C4", &format!("single law e^(k|zeta|^2) at zeta={z}"), (cz - (k_oracle * z.norm_sqr()).exp()).abs(), 1e-6);
    }
}

fn spin(b: &mut Board) {
    for two_j in 1..=4 {
        let sys = SpinSystem::new(two_j);
        for l in [0.5, 1.0, 2.0] {
            let r = spin_unlike_closure(sys, l).unwrap();
            let m = &r.matrix;
            let mut diag = 0.0f64;
            let mut off = 0.0f64;
            for i in 0..sys.dim() {
                for k in 0..sys.dim() {
                    if i == k {
                        diag = diag.max((m[(i, i)] - 1.0).norm());
                    } else {
                        off = off.max(m[(i, k)].norm());
                    }
                }
            }
            b.check("C5", &format!("spin j={} lambda={l}: diagonal deviation", sys.j()), diag, 1e-10);
            b.line("C5", &format!("spin j={} lambda={l}: off-diagonal", sys.j()), off == 0.0, format!("{off:e} == 0"));
        }
    }
    let mut worst = 0.0f64;
    for two_j in 0..=12 {
        let sys = SpinSystem::new(two_j);
        for n in 0..sys.dim() {
            worst = worst.max((beta_identity(sys, n) - 1.0).abs());
        }
    }
    b.check("C5", "Beta identity (2j+1) C(2j,n) B(n+1,2j+1-n) = 1, 2j<=12", worst, 1e-12);
}

fn slope(h: &LadderPoly) -> f64 {
    let z = c(0.7, 0.4);
    let pts: Vec<(f64, f64)> = (0..9)
        .map(|k| {
            let r = 10f64.powf(-3.0 + 0.25 * k as f64);
            let pair = ZetaPair::new(z, C64::from_polar(r, 0.3));
            ((r).ln(), (h_zeta_exact(&pair, h) - h_zeta_first_order_exact(&pair, h)).norm().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

fn weak(b: &mut Board) {
    let space = FockSpace::new(60);
    for (name, h) in [("harmonic", osc()), ("Kerr", kerr(1.0)), ("quartic", quartic_position(&space, 1.0))] {
        let s = slope(&h);
        b.check("C6", &format!("{name} expansion slope {s:.4}, |slope-2|"), (s - 2.0).abs(), 0.1);
    }
    let omega = 1.3;
    let h = oscillator(&space, omega);
    let mut worst = 0.0f64;
    for (z, zeta) in [(c(1.0, 0.5), c(0.1, -0.2)), (c(-0.4, 1.2), c(0.3, 0.3)), (c(1.5, 0.0), c(0.0, 0.5))] {
        let pair = ZetaPair::new(z, zeta);
        let expected = ((z + zeta).conj() * (z - zeta) + 0.5) * omega;
        worst = worst.max((h_zeta(&space, &pair, &h.to_matrix(&space)).unwrap().value - expected).norm());
    }
    b.check("C6", "oscillator H_zeta vs closed form", worst, 1e-10);
}

fn propagator(b: &mut Board) {
    let space = FockSpace::new(48);
    let mut worst = 0.0f64;
    for (z1, z2, wt) in [(c(2.0, 0.0), c(0.0, 2.0), PI), (c(1.0, -1.0), c(0.5, 0.3), 1.0), (c(-1.4, 1.4), c(1.2, 0.9), 2.5)] {
        let k = exact_propagator(&space, z1, z2, wt, &osc()).unwrap();
        worst = worst.max((k.value - osc_closed_form(z1, z2, wt)).norm());
    }
    b.check("C7", "exact oscillator propagator vs closed form", worst, 1e-8);
    let d = insertion_identity_check(&FockSpace::new(40), c(0.4, 0.1), c(-0.2, 0.3), 0.6, c(0.2, 0.1), &osc(), 1e-8).unwrap();
    b.check("C7", "insertion identity zeta=0.2+0.1i", d, 1e-6);

    let spec = |t: f64, n: usize| {
        let z1 = c(0.5, 0.0);
        DiscreteSpec::new(z1, z1 * C64::from_polar(1.0, -t), t, n, osc())
    };
    let err = |s: &DiscreteSpec| (discrete_propagator(s).unwrap().value - osc_closed_form(s.z_initial, s.z_final, s.t_total)).norm();
    let t0 = Instant::now();
    let e1 = err(&spec(0.1, 1));
    let secs = t0.elapsed().as_secs_f64();
    b.check("C7", "discrete propagator N=1, wT=0.1, |K - K_exact|", e1, 1e-3);
    b.check("C7", "N=1 nested quadrature runtime [s]", secs, 60.0);
    let e_half = err(&spec(0.05, 1));
    let p = (e1 / e_half).log2();
    b.check("C7", &format!("tau-scaling exponent {p:.3} (N=1, tau halved), |p-2|"), (p - 2.0).abs(), 0.3);
    let e0 = err(&spec(0.1, 0));
    let q = (e0 / e1).log2();
    println!("INFO C7   at fixed T the exponent is {q:.3} (N=0 -> 1): the O(tau^2) slice error accumulates over N+1 slices");
}

fn action(b: &mut Board) {
    let (t, m) = (1.0, 200_001);
    let dt = t / (m - 1) as f64;
    let z0 = c(0.8, -0.3);
    let z: Vec<C64> = (0..m).map(|i| z0 * C64::from_polar(1.0, -(i as f64) * dt)).collect();
    let w = weak_action(&PathSpec { z, zeta: vec![c(0.0, 0.0); m], t_total: t, h: osc(), hbar: 1.0 }).unwrap();
    b.check("C8", "zero-offset action vs int[(p qdot - q pdot)/2 - H0] dt", (w.action + 0.5 * t).norm(), 1e-10);
    let m = 201;
    let dt = t / (m - 1) as f64;
    let path = PathSpec {
        z: (0..m).map(|i| z0 * C64::from_polar(1.0, -(i as f64) * dt)).collect(),
        zeta: (0..m).map(|i| c(0.1, 0.05) * ((i as f64 * dt) * (t - i as f64 * dt))).collect(),
        t_total: t,
        h: osc(),
        hbar: 1.0,
    };
    b.check("C8", "surface term with zeta(T)=0", weak_action(&path).unwrap().surface.norm(), 0.0);
}

fn plane(b: &mut Board) {
    let eps = reference_epsilon();
    let fig = PlaneFrame::new(33, eps).unwrap();
    let u = unlike_operator(&fig).unwrap();
    b.line("C9", "N=33 unlike operator finite", u.max_weight.is_finite(), format!("max weight {:.3}", u.max_weight));
    let mut worst = f64::INFINITY;
    for n in [33usize, 1_000, 100_000, 1_000_000] {
        worst = worst.min(min_pairwise_overlap(&PlaneFrame::new(n, eps).unwrap()));
    }
    b.line("C9", "min pairwise overlap over N in {33..1e6}", worst >= 1e-8, format!("{worst:.3e} >= 1e-8"));
    let big = PlaneFrame::new(1_000_000, eps).unwrap();
    let u = unlike_operator(&big).unwrap();
    b.check("C9", "N=1e6 raw ||B_N - I||_max vs 10 eps", max_deviation_from_identity(&u.matrix), 10.0 * eps);
    let a = anisotropy_constants(big.delta_theta).unwrap();
    b.check("C9", &format!("L={:.10} (PV) vs discrete-sum limit", a.l), (u.corrected[0][0] - 1.0 - a.l).abs(), 1e-3);
    b.check("C9", &format!("|J+|={:.3e} vs 10 eps^2", a.j_plus.abs()), a.j_plus.abs(), 10.0 * eps * eps);
    b.check("C9", &format!("|J-|={:.3e} vs 10 eps^2", a.j_minus.abs()), a.j_minus.abs(), 10.0 * eps * eps);
    b.check("C9", "N=1e6 ||A_N - I||_max vs 5 eps", max_deviation_from_identity(&frame_operator(&big)), 5.0 * eps);
}

fn transforms(b: &mut Board) {
    let space = FockSpace::with_units(6, 0.9, 1.4).unwrap();
    let vac = OperatorMatrix::from_fn(7, |i, k| c(if i == 0 && k == 0 { 1.0 } else { 0.0 }, 0.0));
    let herm = OperatorMatrix::from_fn(7, |i, k| c((i + 2 * k) as f64 * 0.1, i as f64 - k as f64));
    let herm = herm.add(&herm.adjoint());
    let (mut forms, mut gauss, mut pointwise) = (0.0f64, 0.0f64, 0.0f64);
    for (q, p) in [(0.0, 0.0), (0.6, -0.4), (-1.2, 0.9), (1.8, 1.1)] {
        let w = weyl_symbol(&space, &vac, q, p, WeylOptions::default()).unwrap();
        gauss = gauss.max((w.plane_wave - vacuum_symbol(&space, q, p)).norm());
        forms = forms.max(w.discrepancy());
        forms = forms.max(weyl_symbol(&space, &herm, q, p, WeylOptions::default()).unwrap().discrepancy());
        for k in 0..50 {
            let x = -6.0 + 0.24 * k as f64;
            pointwise = pointwise.max((C64::from_polar(1.0, -p * x / space.hbar()) - overlap_phase(space.hbar(), q, p, x)).norm());
        }
    }
    b.check("C10", "Weyl symbol two forms, pointwise phase", pointwise, 1e-12);
    b.check("C10", "Weyl symbol two forms, integrated", forms, 1e-12);
    b.check("C10", "|0><0| symbol vs 2exp(-(aq^2+p^2/a)/hbar)", gauss, 1e-6);
    let (z0, w, s) = (c(0.6, -0.2), c(-0.3, 0.5), c(1.2, 0.7));
    let v = dual_bargmann(coherent_bargmann(z0), w, (c(0.0, 0.0), s), 24).unwrap();
    let expected = (-0.5 * z0.norm_sqr()).exp() * (((s * (z0 - w)).exp() - 1.0) / (z0 - w));
    b.check("C10", "dual Bargmann segment vs antiderivative", (v - expected).norm(), 1e-10);
    let mut f = 0.0f64;
    for n in 0..3 {
        let psi = PositionWavefunction::fock(&space, n, 2001).unwrap();
        for p in [-1.0, 0.0, 0.7, 2.0] {
            f = f.max(fourier_identity_check(&psi, p));
        }
    }
    b.check("C10", "Fourier amplitude two forms", f, 1e-12);
}

fn main() {
    let mut b = Board::default();
    standard(&mut b);
    lambda(&mut b);
    offset(&mut b);
    b_audit(&mut b);
    spin(&mut b);
    weak(&mut b);
    propagator(&mut b);
    action(&mut b);
    plane(&mut b);
    transforms(&mut b);
    println!("{} of {} checks passed", b.total - b.failed, b.total);
    if b.failed > 0 {
        std::process::exit(1);
    }
}
