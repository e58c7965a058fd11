//! Overcomplete frame of N unit vectors in the plane,
//! `|Z_n> = cos(theta_n)|U> + sin(theta_n)|V>`, its frame operator
//! `A_N = (2/N) sum |Z_n><Z_n|` and the unlike operator
//! `B_N = (2/N) sum |Z_{N-n}><Z_n| / <Z_n|Z_{N-n}>`.
//!
//! With `Delta = (2 - eps) pi` and irrational `eps` no two frame vectors are
//! orthogonal. The weights of `B_N` have simple poles wherever
//! `cos(2 theta - Delta)` vanishes, so the plain sum has no limit as
//! `N -> inf`: each pole leaves a term `pi cot(pi delta_p)` that depends on
//! where the grid falls relative to the pole. [`unlike_operator`] reports
//! both the plain sum and the sum with those terms removed; only the latter
//! converges to the principal-value limit.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{pv_integrate, CompensatedSum, PvRule, CHUNK};

/// Smallest admissible `|<Z_n|Z_{N-n}>|`.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// `sqrt(2) / 35`, the irrational offset of the reference frame.
pub fn reference_epsilon() -> f64 {
    2f64.sqrt() / 35.0
}

/// How frame angles are spaced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleConvention {
    /// `theta_n = n Delta / N`, `n = 1..N`.
    #[default]
    Uniform,
    /// `theta_n = (n - 1) Delta / (N - 1)`: first and last vectors sit exactly
    /// `Delta` apart.
    Endpoints,
}

pub type Mat2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlaneFrame {
    pub n: usize,
    pub epsilon: f64,
    pub delta_theta: f64,
    pub convention: AngleConvention,
}

impl PlaneFrame {
    /// `Delta = (2 - eps) pi`.
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(invalid("epsilon", "must lie in (0, 0.5)"));
        }
        Self::with_delta(n, (2.0 - epsilon) * PI)
    }

    /// Arbitrary total angle; `epsilon` is recorded as `2 - Delta / pi`.
    pub fn with_delta(n: usize, delta_theta: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("N", "need at least two vectors"));
        }
        if !(delta_theta > 0.0 && delta_theta.is_finite()) {
            return Err(invalid("delta_theta", "must be positive"));
        }
        Ok(Self {
            n,
            epsilon: 2.0 - delta_theta / PI,
            delta_theta,
            convention: AngleConvention::Uniform,
        })
    }

    pub fn with_convention(mut self, convention: AngleConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn angle(&self, n: i64) -> f64 {
        let nn = self.n as f64;
        match self.convention {
            AngleConvention::Uniform => n as f64 * self.delta_theta / nn,
            AngleConvention::Endpoints => (n - 1) as f64 * self.delta_theta / (nn - 1.0),
        }
    }

    pub fn vector(&self, n: i64) -> [f64; 2] {
        let (s, c) = self.angle(n).sin_cos();
        [c, s]
    }

    /// `(n, x, y)` for `n = 1..N`.
    pub fn coordinates(&self) -> Vec<(usize, f64, f64)> {
        (1..=self.n)
            .map(|n| {
                let [x, y] = self.vector(n as i64);
                (n, x, y)
            })
            .collect()
    }

    /// Angle step between consecutive vectors.
    pub fn step(&self) -> f64 {
        self.angle(2) - self.angle(1)
    }
}

fn sum_matrices(n: usize, term: impl Fn(usize) -> Mat2 + Sync) -> Mat2 {
    let partials: Vec<[f64; 4]> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [CompensatedSum::default(); 4];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let m = term(i);
                acc[0].add(m[0][0]);
                acc[1].add(m[0][1]);
                acc[2].add(m[1][0]);
                acc[3].add(m[1][1]);
            }
            [acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value()]
        })
        .collect();
    let mut acc = [CompensatedSum::default(); 4];
    for p in partials {
        for k in 0..4 {
            acc[k].add(p[k]);
        }
    }
    [[acc[0].value(), acc[1].value()], [acc[2].value(), acc[3].value()]]
}

pub fn max_deviation_from_identity(m: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let t = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((x - t).abs());
        }
    }
    worst
}

/// `(2/N) sum_n |Z_n><Z_n|`
pub fn frame_operator(frame: &PlaneFrame) -> Mat2 {
    let s = 2.0 / frame.n as f64;
    sum_matrices(frame.n, |i| {
        let [c, si] = frame.vector(i as i64 + 1);
        [[s * c * c, s * c * si], [s * si * c, s * si * si]]
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnlikeOperator {
    /// The plain finite sum.
    pub matrix: Mat2,
    /// The sum with the grid-offset term of every weight pole removed.
    pub corrected: Mat2,
    /// `max_n |1 / <Z_n|Z_{N-n}>|`
    pub max_weight: f64,
    /// Index attaining `max_weight`.
    pub argmax: usize,
    pub poles: Vec<f64>,
}

/// Poles of `sec(2 theta - Delta)` inside `(0, Delta)`.
pub fn weight_poles(delta_theta: f64) -> Vec<f64> {
    let mut out = Vec::new();
    // 2 theta - Delta = (k + 1/2) pi
    let kmax = (delta_theta / PI).ceil() as i64 + 1;
    for k in -kmax - 1..=kmax {
        let p = 0.5 * (delta_theta + (k as f64 + 0.5) * PI);
        if p > 0.0 && p < delta_theta {
            out.push(p);
        }
    }
    out
}

fn unlike_term(frame: &PlaneFrame, n: usize) -> (Mat2, f64) {
    let nn = frame.n as i64;
    let [cn, sn] = frame.vector(n as i64);
    let [ck, sk] = frame.vector(nn - n as i64);
    let overlap = cn * ck + sn * sk;
    // |Z_k><Z_n|: row from Z_k, column from Z_n
    ([[ck * cn, ck * sn], [sk * cn, sk * sn]], overlap)
}

/// `(2/N) sum_{n=1}^{N} |Z_{N-n}><Z_n| / <Z_n|Z_{N-n}>`.
pub fn unlike_operator(frame: &PlaneFrame) -> Result<UnlikeOperator> {
    let n = frame.n;
    // floor check first, naming the offending index
    let mut max_weight: f64 = 0.0;
    let mut argmax = 1;
    for k in 1..=n {
        let (_, ov) = unlike_term(frame, k);
        if ov.abs() < WEIGHT_FLOOR {
            return Err(Error::SingularTerm {
                n: k as i64,
                value: ov,
                floor: WEIGHT_FLOOR,
            });
        }
        if 1.0 / ov.abs() > max_weight {
            max_weight = 1.0 / ov.abs();
            argmax = k;
        }
    }
    let s = 2.0 / n as f64;
    let matrix = sum_matrices(n, |i| {
        let (m, ov) = unlike_term(frame, i + 1);
        let w = s / ov;
        [[w * m[0][0], w * m[0][1]], [w * m[1][0], w * m[1][1]]]
    });

    let mut corrected = matrix;
    let poles = match frame.convention {
        AngleConvention::Uniform => weight_poles(frame.delta_theta),
        AngleConvention::Endpoints => Vec::new(),
    };
    let h = frame.delta_theta / n as f64;
    for &p in &poles {
        let a = p / h;
        let offset = a.ceil() - a;
        let (num, _) = numerators(frame.delta_theta, p);
        // residue of num / cos(2 theta - Delta) at the pole
        let r = 1.0 / (-2.0 * (2.0 * p - frame.delta_theta).sin());
        let shift = (2.0 / frame.delta_theta) * PI / (PI * offset).tan() * r;
        for i in 0..2 {
            for j in 0..2 {
                corrected[i][j] -= shift * num[i][j];
            }
        }
    }
    Ok(UnlikeOperator {
        matrix,
        corrected,
        max_weight,
        argmax,
        poles,
    })
}

/// Entries of `|Z(Delta - theta)><Z(theta)|` and the overlap at `theta`.
fn numerators(delta: f64, theta: f64) -> (Mat2, f64) {
    let (sn, cn) = theta.sin_cos();
    let (sk, ck) = (delta - theta).sin_cos();
    ([[ck * cn, ck * sn], [sk * cn, sk * sn]], cn * ck + sn * sk)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Anisotropy {
    pub l: f64,
    pub j_plus: f64,
    pub j_minus: f64,
    /// `PV int_0^Delta sec(2 theta - Delta) d theta`
    pub pv_sec: f64,
    /// `PV int_0^Delta tan(2 theta - Delta) d theta`
    pub pv_tan: f64,
    /// Largest refinement delta of the two principal values.
    pub error: f64,
}

/// `L = cos(Delta)/Delta PV int sec(2 theta - Delta)` and
/// `J± = tan(Delta) L ± (1/Delta) PV int tan(2 theta - Delta)`, the
/// coefficients of the limit `diag(1 + L, 1 - L) + antidiag(J+, J-)`.
pub fn anisotropy_constants(delta_theta: f64) -> Result<Anisotropy> {
    if !(delta_theta > 0.0 && delta_theta.is_finite()) {
        return Err(invalid("delta_theta", "must be positive"));
    }
    let poles = weight_poles(delta_theta);
    let rule = PvRule::new(0.0, delta_theta, poles, 64)?;
    let sec = pv_integrate(|t| 1.0 / (2.0 * t - delta_theta).cos(), &rule)?;
    let tan = pv_integrate(|t| (2.0 * t - delta_theta).tan(), &rule)?;
    let l = delta_theta.cos() / delta_theta * sec.value;
    let cross = delta_theta.tan() * l;
    let odd = tan.value / delta_theta;
    Ok(Anisotropy {
        l,
        j_plus: cross + odd,
        j_minus: cross - odd,
        pv_sec: sec.value,
        pv_tan: tan.value,
        error: sec.error.max(tan.error),
    })
}

/// `ln|sec(Delta) + tan(Delta)|`, the principal value of
/// `int_0^Delta sec(2 theta - Delta) d theta`.
pub fn pv_sec_closed_form(delta_theta: f64) -> f64 {
    (1.0 / delta_theta.cos() + delta_theta.tan()).abs().ln()
}

/// `min |<Z_n|Z_m>|` over all pairs, using that the overlap depends only on
/// `n - m`.
pub fn min_pairwise_overlap(frame: &PlaneFrame) -> f64 {
    let step = frame.step();
    (1..frame.n)
        .into_par_iter()
        .map(|d| (d as f64 * step).cos().abs())
        .reduce(|| f64::INFINITY, f64::min)
}
