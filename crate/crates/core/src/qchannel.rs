//! Two-dimensional channels acting on a pair subspace.
//!
//! The basis ordering throughout is `(first, second)`: for a lattice pair
//! `(a, b)` the first basis vector is site `a`. A diagonal state
//! `diag(m, 1 - m)` carries excitation probability `m` on the first basis
//! vector, and the stochastic matrix `[[1 - p, q], [p, 1 - q]]` moves
//! probability `p` from first to second and `q` from second to first.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::ParamError;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ParamError::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

/// Classical two-state transition matrix `T_{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StochasticMatrix2 {
    p: f64,
    q: f64,
}

impl StochasticMatrix2 {
    pub fn new(p: f64, q: f64) -> Result<Self, ParamError> {
        Ok(Self {
            p: check_unit("p", p)?,
            q: check_unit("q", q)?,
        })
    }

    /// Probability of hopping from the first state to the second.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Probability of hopping from the second state to the first.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.p == self.q
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p, self.q], [self.p, 1.0 - self.q]]
    }

    /// Applies the matrix to an unnormalised pair of populations.
    pub fn apply_pair(&self, first: f64, second: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.matrix();
        (a * first + b * second, c * first + d * second)
    }
}

/// Diagonal qubit state `diag(m, 1 - m)`, identified with the vector `(m, 1 - m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagState2 {
    m: f64,
}

impl DiagState2 {
    pub fn new(m: f64) -> Result<Self, ParamError> {
        Ok(Self {
            m: check_unit("m", m)?,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn density(&self) -> Mat2 {
        Mat2::new(re(self.m), C64::default(), C64::default(), re(1.0 - self.m))
    }

    /// Reads the excitation probability off a density matrix, discarding coherences.
    pub fn from_density(rho: &Mat2) -> Self {
        Self { m: rho[(0, 0)].re }
    }
}

/// `m' = (1 - p - q) m + q`.
pub fn stochastic_apply(t: &StochasticMatrix2, v: DiagState2) -> DiagState2 {
    DiagState2 {
        m: (1.0 - t.p - t.q) * v.m + t.q,
    }
}

/// Angles of the 2x2 unitary `[[cos θ, sin θ e^{iφ2}], [-sin θ e^{iφ1}, cos θ e^{i(φ1+φ2)}]]`.
///
/// Phases are reduced into `[0, 2π)` on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryParams {
    theta: f64,
    phi1: f64,
    phi2: f64,
}

impl UnitaryParams {
    pub fn new(theta: f64, phi1: f64, phi2: f64) -> Result<Self, ParamError> {
        if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
            return Err(ParamError::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, pi]",
            });
        }
        Ok(Self {
            theta,
            phi1: wrap_phase("phi1", phi1)?,
            phi2: wrap_phase("phi2", phi2)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn matrix(&self) -> Mat2 {
        build_unitary(self)
    }
}

fn wrap_phase(name: &'static str, phi: f64) -> Result<f64, ParamError> {
    if !phi.is_finite() {
        return Err(ParamError::OutOfRange {
            name,
            value: phi,
            range: "finite radians",
        });
    }
    if (0.0..TAU).contains(&phi) {
        Ok(phi)
    } else {
        Ok(phi.rem_euclid(TAU))
    }
}

pub fn build_unitary(u: &UnitaryParams) -> Mat2 {
    let (s, c) = u.theta.sin_cos();
    let e1 = C64::from_polar(1.0, u.phi1);
    let e2 = C64::from_polar(1.0, u.phi2);
    let e12 = C64::from_polar(1.0, u.phi1 + u.phi2);
    Mat2::new(re(c), e2 * s, -e1 * s, e12 * c)
}

/// Kraus operators `√(1-ξ)·1`, `√ξ·(1+σz)/2`, `√ξ·(σz-1)/2`.
pub fn dephasing_kraus(xi: f64) -> [Mat2; 3] {
    let a = (1.0 - xi).sqrt();
    let b = xi.sqrt();
    [
        Mat2::new(re(a), C64::default(), C64::default(), re(a)),
        Mat2::new(re(b), C64::default(), C64::default(), C64::default()),
        Mat2::new(C64::default(), C64::default(), C64::default(), re(-b)),
    ]
}

/// Kraus pair for amplitude damping. For `η ≥ 0` population flows from the
/// second basis vector into the first; negative `η` gives the σx-conjugated
/// ("swapped") channel with strength `|η|`.
pub fn amp_damp_kraus(eta: f64) -> [Mat2; 2] {
    let s = eta.abs();
    let zero = C64::default();
    let l0 = Mat2::new(re(1.0), zero, zero, re((1.0 - s).sqrt()));
    let l1 = Mat2::new(zero, re(s.sqrt()), zero, zero);
    if eta >= 0.0 {
        [l0, l1]
    } else {
        let x = sigma_x();
        [x * l0 * x, x * l1 * x]
    }
}

pub fn sigma_x() -> Mat2 {
    let zero = C64::default();
    Mat2::new(zero, re(1.0), re(1.0), zero)
}

pub fn apply_kraus(ops: &[Mat2], rho: &Mat2) -> Mat2 {
    ops.iter().map(|k| k * rho * k.adjoint()).sum()
}

/// Dephasing map `Φ_ξ` evaluated through its Kraus sum.
pub fn dephase_2d(rho: &Mat2, xi: f64) -> Mat2 {
    apply_kraus(&dephasing_kraus(xi), rho)
}

/// Amplitude damping `Ξ_η` evaluated through its Kraus sum.
pub fn amp_damp_2d(rho: &Mat2, eta: f64) -> Mat2 {
    apply_kraus(&amp_damp_kraus(eta), rho)
}

/// Parameters of the composite pair channel `Ξ_η ∘ Φ_ξ ∘ U`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    eta: f64,
    xi: f64,
    unitary: UnitaryParams,
}

impl ChannelParams {
    pub fn new(eta: f64, xi: f64, unitary: UnitaryParams) -> Result<Self, ParamError> {
        if !(eta.is_finite() && (-1.0..=1.0).contains(&eta)) {
            return Err(ParamError::OutOfRange {
                name: "eta",
                value: eta,
                range: "[-1, 1]",
            });
        }
        Ok(Self {
            eta,
            xi: check_unit("xi", xi)?,
            unitary,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn unitary(&self) -> &UnitaryParams {
        &self.unitary
    }

    /// The full pair channel on a 2x2 density matrix.
    pub fn apply_2d(&self, rho: &Mat2) -> Mat2 {
        let u = self.unitary.matrix();
        let rotated = u * rho * u.adjoint();
        amp_damp_2d(&dephase_2d(&rotated, self.xi), self.eta)
    }
}

/// Output of [`classical_to_channel`]: the damping strength and rotation
/// angle reproducing a stochastic matrix. Dephasing and phases stay free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelEmbedding {
    pub eta: f64,
    pub theta: f64,
    /// Set when `|q - p| = 1`, where the angle is undetermined and fixed to π/4.
    pub degenerate: bool,
}

impl ChannelEmbedding {
    pub fn cos_2theta(&self) -> f64 {
        (2.0 * self.theta).cos()
    }

    pub fn with(&self, xi: f64, phi1: f64, phi2: f64) -> Result<ChannelParams, ParamError> {
        ChannelParams::new(self.eta, xi, UnitaryParams::new(self.theta, phi1, phi2)?)
    }
}

/// `η = q - p`, `cos 2θ = (1 - p - q) / (1 - |q - p|)`.
pub fn classical_to_channel(t: &StochasticMatrix2) -> ChannelEmbedding {
    let eta = t.q - t.p;
    let denom = 1.0 - eta.abs();
    if denom <= 0.0 {
        return ChannelEmbedding {
            eta: eta.signum(),
            theta: FRAC_PI_4,
            degenerate: true,
        };
    }
    let cos2 = ((1.0 - t.p - t.q) / denom).clamp(-1.0, 1.0);
    ChannelEmbedding {
        eta,
        theta: 0.5 * cos2.acos(),
        degenerate: false,
    }
}

/// Runs `diag(m, 1-m)` through the embedded channel and reads back the
/// excitation probability.
pub fn embedded_apply(t: &StochasticMatrix2, m: DiagState2, xi: f64) -> DiagState2 {
    let params = classical_to_channel(t)
        .with(xi, 0.0, 0.0)
        .expect("embedding parameters lie in range");
    DiagState2::from_density(&params.apply_2d(&m.density()))
}
