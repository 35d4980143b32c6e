//! One-way and round-trip transfer matrices of the doubly coupled MZI,
//! closed-form intensities, and independent analytic oracles.
//!
//! The one-way interferometer is always built by composition,
//! `BS . diag(e^{i zeta2}, e^{i(phi + zeta1)}) . BS`; the round trip is the
//! product of the return interferometer, the coupler phase layer, and the
//! outbound interferometer. Nothing here transcribes the round-trip matrix in
//! closed form — [`closed_form_ia`] is the independent intensity oracle it is
//! validated against.

use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::optics::{
    apply, beam_splitter, compose, intensity, phase_layer, FieldState, TransferMatrix,
};

/// A protocol phase (Bob's phi or Alice's psi), canonically reduced to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSetting(f64);

impl PhaseSetting {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::NonFinitePhase(radians));
        }
        Ok(Self(radians.rem_euclid(TAU)))
    }

    pub fn zero() -> Self {
        Self(0.0)
    }

    pub fn pi() -> Self {
        Self(std::f64::consts::PI)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Circular distance between two angles, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Environmental phase noise in the two transmission channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelNoise {
    pub zeta1: f64,
    pub zeta2: f64,
}

impl ChannelNoise {
    pub fn new(zeta1: f64, zeta2: f64) -> Self {
        assert!(zeta1.is_finite() && zeta2.is_finite());
        Self { zeta1, zeta2 }
    }

    pub fn quiet() -> Self {
        Self::new(0.0, 0.0)
    }

    /// Effective channel noise `zeta = zeta2 - zeta1`, reduced to `[0, 2pi)`.
    pub fn zeta(&self) -> f64 {
        (self.zeta2 - self.zeta1).rem_euclid(TAU)
    }
}

/// Phase noise in the intermediate coupler section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerNoise {
    pub zeta_alpha: f64,
    pub zeta_beta: f64,
}

impl CouplerNoise {
    pub fn new(zeta_alpha: f64, zeta_beta: f64) -> Self {
        assert!(zeta_alpha.is_finite() && zeta_beta.is_finite());
        Self {
            zeta_alpha,
            zeta_beta,
        }
    }

    pub fn quiet() -> Self {
        Self::new(0.0, 0.0)
    }

    /// `zeta'' = zeta_alpha - zeta_beta`, reduced to `[0, 2pi)`.
    pub fn zeta_double_prime(&self) -> f64 {
        (self.zeta_alpha - self.zeta_beta).rem_euclid(TAU)
    }
}

/// One-way MZI transfer matrix: upper arm carries `zeta2`, lower arm carries
/// `phi + zeta1`.
pub fn mzi_forward(phi: PhaseSetting, noise: ChannelNoise) -> TransferMatrix {
    let arms = phase_layer(noise.zeta2, phi.radians() + noise.zeta1)
        .expect("arm phases are finite by construction");
    compose(beam_splitter(), compose(arms, beam_splitter()))
}

/// One-way output intensities `(I_alpha, I_beta)` as a function of the
/// effective channel noise `zeta`, in units of I0 = 1.
pub fn one_way_intensities(phi: PhaseSetting, zeta: f64) -> (f64, f64) {
    let c = (phi.radians() - zeta).cos();
    (0.5 * (1.0 - c), 0.5 * (1.0 + c))
}

/// Round-trip transfer matrix: return MZI (psi), coupler phase layer, outbound
/// MZI (phi). Inbound channel noise equals outbound.
pub fn round_trip(
    phi: PhaseSetting,
    psi: PhaseSetting,
    chan: ChannelNoise,
    coupler: CouplerNoise,
) -> TransferMatrix {
    round_trip_independent_inbound(phi, psi, chan, chan, coupler)
}

/// Round-trip matrix with independently specified inbound channel noise, for
/// stress tests of the shared-noise assumption.
pub fn round_trip_independent_inbound(
    phi: PhaseSetting,
    psi: PhaseSetting,
    outbound: ChannelNoise,
    inbound: ChannelNoise,
    coupler: CouplerNoise,
) -> TransferMatrix {
    let coupler_layer = phase_layer(coupler.zeta_alpha, coupler.zeta_beta)
        .expect("coupler phases are finite by construction");
    compose(
        mzi_forward(psi, inbound),
        compose(coupler_layer, mzi_forward(phi, outbound)),
    )
}

/// Round-trip output intensities `(I_A, I_B)` for the canonical input `(1, 0)`.
pub fn round_trip_intensities(
    phi: PhaseSetting,
    psi: PhaseSetting,
    chan: ChannelNoise,
    coupler: CouplerNoise,
) -> (f64, f64) {
    intensity(apply(round_trip(phi, psi, chan, coupler), FieldState::input()))
}

/// Independent analytic oracle for the round-trip intensity `I_A`:
///
/// `I_A = (1/16) |e^{i zeta''}(e^{i zeta} - e^{i psi})(e^{i zeta} - e^{i phi})
///               - (e^{i zeta} + e^{i psi})(e^{i zeta} + e^{i phi})|^2`
///
/// The round-trip intensities depend on the four arm phases only through
/// `zeta` and `zeta''`.
pub fn closed_form_ia(
    phi: PhaseSetting,
    psi: PhaseSetting,
    zeta: f64,
    zeta_double_prime: f64,
) -> f64 {
    use num_complex::Complex64;
    let ez = Complex64::from_polar(1.0, zeta);
    let ephi = Complex64::from_polar(1.0, phi.radians());
    let epsi = Complex64::from_polar(1.0, psi.radians());
    let ezpp = Complex64::from_polar(1.0, zeta_double_prime);
    let amp = ezpp * (ez - epsi) * (ez - ephi) - (ez + epsi) * (ez + ephi);
    amp.norm_sqr() / 16.0
}

/// Mean of `I_A` over coupler noise `zeta''` uniform on `[0, 2pi)`:
/// `1/2 [1 + cos(zeta - psi) cos(zeta - phi)]`.
pub fn expected_ia_over_coupler(phi: PhaseSetting, psi: PhaseSetting, zeta: f64) -> f64 {
    0.5 * (1.0 + (zeta - psi.radians()).cos() * (zeta - phi.radians()).cos())
}
