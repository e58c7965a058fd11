//! Normal-ordered polynomials in the ladder operators,
//! `H = sum_{j,k} c_{jk} (a^dag)^j a^k`.
//!
//! Normal ordering makes coherent-state matrix elements exact:
//! `<w|H|v> / <w|v> = sum c_{jk} (w*)^j v^k`. No Fock truncation enters.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::fock::{ln_factorial, FockSpace, OperatorMatrix};
use crate::C64;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LadderPoly {
    // (power of a^dag, power of a) -> coefficient
    terms: BTreeMap<(u32, u32), C64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl LadderPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn identity() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn annihilation() -> Self {
        Self::monomial(0, 1, C64::new(1.0, 0.0))
    }

    pub fn creation() -> Self {
        Self::monomial(1, 0, C64::new(1.0, 0.0))
    }

    /// `a^dag a`
    pub fn number() -> Self {
        Self::monomial(1, 1, C64::new(1.0, 0.0))
    }

    pub fn monomial(creation: u32, annihilation: u32, coeff: C64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != C64::new(0.0, 0.0) {
            terms.insert((creation, annihilation), coeff);
        }
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), C64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of the highest monomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(j, k)| j + k).max().unwrap_or(0)
    }

    fn accumulate(&mut self, key: (u32, u32), c: C64) {
        let entry = self.terms.entry(key).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.accumulate(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero();
        for (k, c) in self.terms() {
            out.accumulate(k, c * s);
        }
        out
    }

    /// Product, re-normal-ordered with
    /// `a^k (a^dag)^l = sum_i C(k,i) C(l,i) i! (a^dag)^{l-i} a^{k-i}`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((j1, k1), c1) in self.terms() {
            for ((j2, k2), c2) in other.terms() {
                let mut fact = 1.0;
                for i in 0..=k1.min(j2) {
                    if i > 0 {
                        fact *= i as f64;
                    }
                    let w = binomial(k1, i) * binomial(j2, i) * fact;
                    out.accumulate((j1 + j2 - i, k1 + k2 - i), c1 * c2 * w);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc.mul(self))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for ((j, k), c) in self.terms() {
            out.accumulate((k, j), c.conj());
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = self.sub(&self.adjoint());
        let ok = diff.terms().all(|(_, c)| c.norm() <= tol);
        ok
    }

    /// Exact `<w|H|v> / <w|v>` for coherent labels `w` (bra) and `v` (ket).
    pub fn coherent_ratio(&self, w: C64, v: C64) -> C64 {
        let wc = w.conj();
        self.terms()
            .map(|((j, k), c)| c * wc.powu(j) * v.powu(k))
            .sum()
    }

    /// `<z|H|z>`.
    pub fn expectation(&self, z: C64) -> C64 {
        self.coherent_ratio(z, z)
    }

    /// Matrix elements of the untruncated operator on levels `0..=cutoff`.
    pub fn to_matrix(&self, space: &FockSpace) -> OperatorMatrix {
        let dim = space.dim();
        let mut out = OperatorMatrix::zeros(dim).into_entries();
        let ln_fact: Vec<f64> = (0..dim).map(ln_factorial).collect();
        for ((j, k), c) in self.terms() {
            let (j, k) = (j as usize, k as usize);
            for n in k..dim {
                let r = n - k;
                let m = r + j;
                if m >= dim {
                    break;
                }
                let mag = (0.5 * (ln_fact[n] - ln_fact[r]) + 0.5 * (ln_fact[m] - ln_fact[r])).exp();
                out[(m, n)] += c * mag;
            }
        }
        OperatorMatrix::new(out).expect("square by construction")
    }
}

/// `hbar omega (a^dag a + 1/2)`
pub fn oscillator(space: &FockSpace, omega: f64) -> LadderPoly {
    let e = space.hbar() * omega;
    LadderPoly::number()
        .scale(C64::new(e, 0.0))
        .add(&LadderPoly::constant(C64::new(0.5 * e, 0.0)))
}

/// `chi (a^dag a)^2`
pub fn kerr(chi: f64) -> LadderPoly {
    LadderPoly::number().pow(2).scale(C64::new(chi, 0.0))
}

/// `q = b (a + a^dag) / sqrt(2)`
pub fn position(space: &FockSpace) -> LadderPoly {
    LadderPoly::annihilation()
        .add(&LadderPoly::creation())
        .scale(C64::new(space.length_scale() / SQRT_2, 0.0))
}

/// `p = -i hbar (a - a^dag) / (b sqrt(2))`
pub fn momentum(space: &FockSpace) -> LadderPoly {
    LadderPoly::annihilation()
        .sub(&LadderPoly::creation())
        .scale(C64::new(0.0, -space.hbar() / (space.length_scale() * SQRT_2)))
}

/// `g q^4`
pub fn quartic_position(space: &FockSpace, g: f64) -> LadderPoly {
    position(space).pow(4).scale(C64::new(g, 0.0))
}
