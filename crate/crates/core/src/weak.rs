//! Weak values `<psi_f|H|psi_0> / <psi_f|psi_0>`, specialized to the coherent
//! pair `psi_0 = |z - zeta>`, `psi_f = |z + zeta>`.
//!
//! Two evaluation paths exist. Matrices on a truncated Fock space handle any
//! operator; normal-ordered [`LadderPoly`] Hamiltonians are evaluated exactly
//! from the coherent labels.
//!
//! Note that `<z|[a, H]|z>` is not `i hbar dz/dt` along an arbitrary path,
//! because `|z(t)>` need not solve the Schrodinger equation. Nothing here
//! equates the two.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::{coherent_vector, ladder_matrices, poisson_tail, FockSpace, OperatorMatrix, StateVector};
use crate::ladder::LadderPoly;
use crate::C64;

/// Smallest admissible `|<psi_f|psi_0>|`.
pub const OVERLAP_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct WeakValueInput {
    pub psi0: StateVector,
    pub psif: StateVector,
    pub h: OperatorMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakValue {
    pub value: C64,
    pub numerator: C64,
    pub denominator: C64,
}

pub fn weak_value(input: &WeakValueInput) -> Result<WeakValue> {
    let d = input.h.dim();
    for found in [input.psi0.dim(), input.psif.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let denominator = input.psif.inner(&input.psi0);
    if !(denominator.norm() > OVERLAP_FLOOR) {
        return Err(Error::OverlapBelowFloor {
            overlap: denominator.norm(),
            floor: OVERLAP_FLOOR,
        });
    }
    let numerator = input.h.sandwich(&input.psif, &input.psi0);
    Ok(WeakValue {
        value: numerator / denominator,
        numerator,
        denominator,
    })
}

/// Center `z` and offset `zeta` of a coherent pair, with the units that map
/// `zeta` to the phase-space offsets `(X, Pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaPair {
    pub z: C64,
    pub zeta: C64,
    pub hbar: f64,
    pub alpha: f64,
}

impl ZetaPair {
    pub fn new(z: C64, zeta: C64) -> Self {
        Self { z, zeta, hbar: 1.0, alpha: 1.0 }
    }

    pub fn with_units(z: C64, zeta: C64, hbar: f64, alpha: f64) -> Result<Self> {
        if !(hbar > 0.0 && alpha > 0.0) {
            return Err(invalid("alpha", "hbar and alpha must be positive"));
        }
        Ok(Self { z, zeta, hbar, alpha })
    }

    /// `zeta = X / (sqrt(2) b) + i b Pi / (sqrt(2) hbar)`, `b = sqrt(hbar / alpha)`.
    pub fn from_offsets(z: C64, x: f64, pi: f64, hbar: f64, alpha: f64) -> Result<Self> {
        let mut pair = Self::with_units(z, C64::new(0.0, 0.0), hbar, alpha)?;
        let b = pair.length_scale();
        pair.zeta = C64::new(x / b, b * pi / hbar) / std::f64::consts::SQRT_2;
        Ok(pair)
    }

    pub fn length_scale(&self) -> f64 {
        (self.hbar / self.alpha).sqrt()
    }

    /// `(X, Pi)`
    pub fn offsets(&self) -> (f64, f64) {
        let b = self.length_scale();
        let s = std::f64::consts::SQRT_2;
        (s * b * self.zeta.re, s * self.hbar * self.zeta.im / b)
    }

    /// Ket label `z - zeta`.
    pub fn initial(&self) -> C64 {
        self.z - self.zeta
    }

    /// Bra label `z + zeta`.
    pub fn final_label(&self) -> C64 {
        self.z + self.zeta
    }
}

/// `<z+zeta|H|z-zeta> / <z+zeta|z-zeta>` with truncated coherent vectors.
pub fn h_zeta(space: &FockSpace, pair: &ZetaPair, h: &OperatorMatrix) -> Result<WeakValue> {
    weak_value(&WeakValueInput {
        psi0: coherent_vector(space, pair.initial())?,
        psif: coherent_vector(space, pair.final_label())?,
        h: h.clone(),
    })
}

/// Exact `H_zeta` for a normal-ordered Hamiltonian.
pub fn h_zeta_exact(pair: &ZetaPair, h: &LadderPoly) -> C64 {
    h.coherent_ratio(pair.final_label(), pair.initial())
}

/// `H_0 + zeta* <z|[a,H]|z> + zeta <z|[a^dag,H]|z>` with truncated commutators.
///
/// The coherent vector must live on the trusted block, where truncated
/// products agree with the untruncated operators.
pub fn h_zeta_first_order(space: &FockSpace, pair: &ZetaPair, h: &OperatorMatrix) -> Result<C64> {
    let x = pair.z.norm_sqr();
    let block = space.trusted_block();
    let spill = poisson_tail(x, block);
    if spill > space.tolerance() {
        let mut required = space.cutoff() + 2;
        while poisson_tail(x, required / 2) > space.tolerance() {
            required += 2;
        }
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            required,
            tail: spill,
        });
    }
    let v = coherent_vector(space, pair.z)?;
    let (a, adag) = ladder_matrices(space);
    let h0 = h.sandwich(&v, &v);
    let ca = a.commutator(h).sandwich(&v, &v);
    let cd = adag.commutator(h).sandwich(&v, &v);
    Ok(h0 + pair.zeta.conj() * ca + pair.zeta * cd)
}

/// First-order expansion evaluated exactly for a normal-ordered Hamiltonian.
pub fn h_zeta_first_order_exact(pair: &ZetaPair, h: &LadderPoly) -> C64 {
    let z = pair.z;
    let ca = LadderPoly::annihilation().commutator(h).expectation(z);
    let cd = LadderPoly::creation().commutator(h).expectation(z);
    h.expectation(z) + pair.zeta.conj() * ca + pair.zeta * cd
}

/// `H_class + i (alpha X qdot + Pi pdot / alpha)`.
pub fn h_quasiclassical(pair: &ZetaPair, h_class: f64, qdot: f64, pdot: f64) -> C64 {
    let (x, pi) = pair.offsets();
    C64::new(h_class, pair.alpha * x * qdot + pi * pdot / pair.alpha)
}
