//! Complex 2x2 linear algebra for two-port optical elements.
//!
//! Conventions: port amplitudes are dimensionless in units of `sqrt(I0)` with the
//! input intensity normalized to 1. The beam splitter is the symmetric
//! `(1/sqrt(2)) [[1, i], [i, 1]]`; this is the unique common convention under which
//! `BS . diag . BS` reproduces the one-way MZI closed form used throughout the
//! crate (see [`crate::verify::eq1_closed_form`]).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default element-wise tolerance for unitarity checks of single elements.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Two complex port amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldState {
    pub upper: Complex64,
    pub lower: Complex64,
}

impl FieldState {
    pub fn new(upper: Complex64, lower: Complex64) -> Self {
        Self { upper, lower }
    }

    /// The canonical input field `(1, 0)`: all power in the upper port.
    pub fn input() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// `|upper|^2 + |lower|^2`.
    pub fn total_intensity(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }
}

/// A 2x2 complex transfer matrix acting on [`FieldState`] values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m00: Complex64,
    pub m01: Complex64,
    pub m10: Complex64,
    pub m11: Complex64,
}

impl TransferMatrix {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self { m00, m01, m10, m11 }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn elements(&self) -> [Complex64; 4] {
        [self.m00, self.m01, self.m10, self.m11]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::new(
            self.m00.conj(),
            self.m10.conj(),
            self.m01.conj(),
            self.m11.conj(),
        )
    }

    /// Scalar multiple of the matrix.
    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(
            factor * self.m00,
            factor * self.m01,
            factor * self.m10,
            factor * self.m11,
        )
    }

    /// Maximum element-wise deviation of `M† M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = compose(self.dagger(), *self);
        let id = Self::identity();
        p.elements()
            .iter()
            .zip(id.elements().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Maximum element-wise distance to another matrix.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.elements()
            .iter()
            .zip(other.elements().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Symmetric 50:50 beam splitter `(1/sqrt(2)) [[1, i], [i, 1]]`.
pub fn beam_splitter() -> TransferMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    TransferMatrix::new(
        Complex64::new(s, 0.0),
        Complex64::new(0.0, s),
        Complex64::new(0.0, s),
        Complex64::new(s, 0.0),
    )
}

/// Diagonal phase element `diag(e^{i upper}, e^{i lower})`.
pub fn phase_layer(upper_phase: f64, lower_phase: f64) -> Result<TransferMatrix> {
    if !upper_phase.is_finite() {
        return Err(Error::NonFinitePhase(upper_phase));
    }
    if !lower_phase.is_finite() {
        return Err(Error::NonFinitePhase(lower_phase));
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(TransferMatrix::new(
        Complex64::from_polar(1.0, upper_phase),
        zero,
        zero,
        Complex64::from_polar(1.0, lower_phase),
    ))
}

/// Matrix product `second * first`: `second` acts after `first`.
pub fn compose(second: TransferMatrix, first: TransferMatrix) -> TransferMatrix {
    TransferMatrix::new(
        second.m00 * first.m00 + second.m01 * first.m10,
        second.m00 * first.m01 + second.m01 * first.m11,
        second.m10 * first.m00 + second.m11 * first.m10,
        second.m10 * first.m01 + second.m11 * first.m11,
    )
}

/// Matrix-vector product.
pub fn apply(m: TransferMatrix, f: FieldState) -> FieldState {
    FieldState::new(
        m.m00 * f.upper + m.m01 * f.lower,
        m.m10 * f.upper + m.m11 * f.lower,
    )
}

/// Squared moduli of the two port amplitudes, in units of I0.
pub fn intensity(f: FieldState) -> (f64, f64) {
    (f.upper.norm_sqr(), f.lower.norm_sqr())
}

/// True iff `a = lambda * b` element-wise within `tol` for some unit complex
/// `lambda`, chosen from the largest-modulus element of `b`.
pub fn equal_up_to_global_phase(a: TransferMatrix, b: TransferMatrix, tol: f64) -> Result<bool> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::NonPositiveTolerance(tol));
    }
    let be = b.elements();
    let ae = a.elements();
    let (k, bmax) = be
        .iter()
        .map(|c| c.norm())
        .enumerate()
        .fold((0, 0.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
    if bmax == 0.0 {
        if ae.iter().map(|c| c.norm()).fold(0.0, f64::max) == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        return Ok(false);
    }
    let ratio = ae[k] / be[k];
    if ratio.norm() == 0.0 {
        return Ok(false);
    }
    let lambda = ratio / ratio.norm();
    Ok(a.max_distance(&b.scale(lambda)) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseStream;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn random_phase(stream: &mut NoiseStream) -> f64 {
        stream.next_uniform() * TAU
    }

    fn random_unitary(stream: &mut NoiseStream) -> TransferMatrix {
        let layer = phase_layer(random_phase(stream), random_phase(stream)).unwrap();
        compose(beam_splitter(), compose(layer, beam_splitter()))
    }

    #[test]
    fn beam_splitter_splits_evenly() {
        let out = apply(beam_splitter(), FieldState::input());
        assert!((out.upper - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out.lower - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        let (iu, il) = intensity(out);
        assert!((iu - 0.5).abs() < 1e-15);
        assert!((il - 0.5).abs() < 1e-15);
    }

    #[test]
    fn double_beam_splitter_is_cross_port() {
        // BS^2 = i X: all power exits the cross port.
        let out = apply(compose(beam_splitter(), beam_splitter()), FieldState::input());
        assert!(out.upper.norm() < 1e-15);
        assert!((out.lower - Complex64::new(0.0, 1.0)).norm() < 1e-15);

        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        let i_x = TransferMatrix::new(zero, i, i, zero);
        assert!(compose(beam_splitter(), beam_splitter()).max_distance(&i_x) < 1e-15);
    }

    #[test]
    fn beam_splitter_is_unitary() {
        assert!(beam_splitter().is_unitary(UNITARITY_TOL));
    }

    #[test]
    fn phase_layer_identity_and_sign_flip() {
        assert!(phase_layer(0.0, 0.0)
            .unwrap()
            .max_distance(&TransferMatrix::identity())
            < 1e-15);

        let f = FieldState::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        );
        let out = apply(phase_layer(PI, 0.0).unwrap(), f);
        assert!((out.upper - Complex64::new(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out.lower - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_layer_rejects_non_finite() {
        assert!(phase_layer(f64::NAN, 0.0).is_err());
        assert!(phase_layer(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn phase_layers_compose_additively() {
        let mut stream = NoiseStream::substream(7, 0);
        for _ in 0..100 {
            let (a, b) = (random_phase(&mut stream), random_phase(&mut stream));
            let (c, d) = (random_phase(&mut stream), random_phase(&mut stream));
            let composed = compose(phase_layer(a, b).unwrap(), phase_layer(c, d).unwrap());
            let direct = phase_layer(a + c, b + d).unwrap();
            assert!(composed.max_distance(&direct) < 1e-12);
        }
    }

    #[test]
    fn compose_identity_and_associativity() {
        let mut stream = NoiseStream::substream(11, 0);
        let m = random_unitary(&mut stream);
        assert!(compose(TransferMatrix::identity(), m).max_distance(&m) < 1e-15);

        for _ in 0..100 {
            let a = random_unitary(&mut stream);
            let b = random_unitary(&mut stream);
            let c = random_unitary(&mut stream);
            let left = compose(compose(a, b), c);
            let right = compose(a, compose(b, c));
            assert!(left.max_distance(&right) < 1e-12);
        }
    }

    #[test]
    fn apply_matches_composition() {
        let mut stream = NoiseStream::substream(13, 0);
        let f0 = FieldState::input();
        assert_eq!(apply(TransferMatrix::identity(), f0), f0);
        for _ in 0..100 {
            let a = random_unitary(&mut stream);
            let b = random_unitary(&mut stream);
            let f = FieldState::new(
                Complex64::from_polar(stream.next_uniform(), random_phase(&mut stream)),
                Complex64::from_polar(stream.next_uniform(), random_phase(&mut stream)),
            );
            let via_compose = apply(compose(a, b), f);
            let nested = apply(a, apply(b, f));
            assert!((via_compose.upper - nested.upper).norm() < 1e-12);
            assert!((via_compose.lower - nested.lower).norm() < 1e-12);
        }
    }

    #[test]
    fn intensity_basics_and_conservation() {
        assert_eq!(intensity(FieldState::input()), (1.0, 0.0));
        let f = FieldState::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        );
        let (iu, il) = intensity(f);
        assert!((iu - 0.5).abs() < 1e-15 && (il - 0.5).abs() < 1e-15);

        let mut stream = NoiseStream::substream(17, 0);
        for _ in 0..100 {
            let m = random_unitary(&mut stream);
            let f = FieldState::new(
                Complex64::from_polar(stream.next_uniform(), random_phase(&mut stream)),
                Complex64::from_polar(stream.next_uniform(), random_phase(&mut stream)),
            );
            let out = apply(m, f);
            assert!((out.total_intensity() - f.total_intensity()).abs() < 1e-12);
        }
    }

    #[test]
    fn global_phase_predicate() {
        let mut stream = NoiseStream::substream(19, 0);
        let m = random_unitary(&mut stream);
        let rotated = m.scale(Complex64::from_polar(1.0, PI / 3.0));
        assert!(equal_up_to_global_phase(m, rotated, 1e-12).unwrap());
        assert!(!equal_up_to_global_phase(beam_splitter(), phase_layer(0.0, 0.0).unwrap(), 1e-12)
            .unwrap());
    }

    #[test]
    fn global_phase_predicate_rejects_zero_matrices() {
        let zero = Complex64::new(0.0, 0.0);
        let z = TransferMatrix::new(zero, zero, zero, zero);
        assert!(matches!(
            equal_up_to_global_phase(z, z, 1e-12),
            Err(Error::ZeroMatrix)
        ));
        // One-sided zero compares unequal, not an error.
        assert!(!equal_up_to_global_phase(z, beam_splitter(), 1e-12).unwrap());
        assert!(matches!(
            equal_up_to_global_phase(z, z, 0.0),
            Err(Error::NonPositiveTolerance(_))
        ));
    }
}
