//! Self-contained invariant suite: unitarity, the one-way composition oracle,
//! round-trip noise immunity, oracle agreement, energy conservation, and the
//! classical one-way limit.
//!
//! The checks are ordinary library functions so both the test suite and the CLI
//! `verify` command share one implementation. A deliberate fault mode (beam
//! splitter sign flip) is provided as a negative control.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::mzi::{
    closed_form_ia, one_way_intensities, round_trip_intensities, ChannelNoise, CouplerNoise,
    PhaseSetting,
};
use crate::noise::NoiseStream;
use crate::optics::{beam_splitter, compose, phase_layer, FieldState, TransferMatrix};

/// Literal transcription of the one-way MZI closed form:
///
/// `(1/2) e^{i zeta1} [[e^{i zeta} - e^{i phi}, i(e^{i zeta} + e^{i phi})],
///                     [i(e^{i zeta} + e^{i phi}), -(e^{i zeta} - e^{i phi})]]`
///
/// with `zeta = zeta2 - zeta1`. Kept independent of the composition path in
/// [`crate::mzi::mzi_forward`] so the two can be checked against each other.
pub fn eq1_closed_form(phi: f64, zeta1: f64, zeta2: f64) -> TransferMatrix {
    let pre = Complex64::from_polar(0.5, zeta1);
    let ez = Complex64::from_polar(1.0, zeta2 - zeta1);
    let ep = Complex64::from_polar(1.0, phi);
    let i = Complex64::new(0.0, 1.0);
    TransferMatrix::new(
        pre * (ez - ep),
        pre * i * (ez + ep),
        pre * i * (ez + ep),
        -pre * (ez - ep),
    )
}

/// Outcome of one named invariant check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Options for [`run_checks`].
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Reduced draw counts; every check still runs.
    pub quick: bool,
    /// Negative control: flip the sign of the beam splitter's cross coupling in
    /// the composition path of the one-way oracle check, which must then fail.
    pub flip_bs_sign: bool,
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Run the full invariant suite and report per-check results.
pub fn run_checks(opts: VerifyOptions) -> Vec<Check> {
    let div = if opts.quick { 10 } else { 1 };
    vec![
        check_unitarity(1000 / div),
        check_eq1_composition(1000 / div, opts.flip_bs_sign),
        check_noise_immunity(10_000 / div),
        check_oracle_agreement(10_000 / div),
        check_energy_conservation(1000 / div),
        check_classical_limit(100_000 / div),
    ]
}

fn check_unitarity(draws: usize) -> Check {
    let mut s = NoiseStream::substream(0x0511, 0);
    let mut worst_single: f64 = beam_splitter().unitarity_deviation();
    let mut worst_cascade: f64 = 0.0;
    for _ in 0..draws {
        let layer = phase_layer(s.next_uniform() * TAU, s.next_uniform() * TAU).unwrap();
        worst_single = worst_single.max(layer.unitarity_deviation());
        let mut m = TransferMatrix::identity();
        for _ in 0..8 {
            let elem = if s.next_bit() {
                beam_splitter()
            } else {
                phase_layer(s.next_uniform() * TAU, s.next_uniform() * TAU).unwrap()
            };
            m = compose(elem, m);
        }
        worst_cascade = worst_cascade.max(m.unitarity_deviation());
    }
    Check::new(
        "unitarity",
        worst_single <= 1e-12 && worst_cascade <= 1e-10,
        format!("max deviation: single {worst_single:.2e}, 8-cascade {worst_cascade:.2e}"),
    )
}

fn check_eq1_composition(draws: usize, flip_bs_sign: bool) -> Check {
    let mut s = NoiseStream::substream(0x0511, 1);
    let bs = if flip_bs_sign {
        // Injected fault: flip the sign of the cross-coupling elements. A global
        // sign flip would cancel between the two splitters of the cascade.
        let good = beam_splitter();
        TransferMatrix::new(good.m00, -good.m01, -good.m10, good.m11)
    } else {
        beam_splitter()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let phi = s.next_uniform() * TAU;
        let zeta1 = s.next_uniform() * TAU;
        let zeta2 = s.next_uniform() * TAU;
        let arms = phase_layer(zeta2, phi + zeta1).unwrap();
        let composed = compose(bs, compose(arms, bs));
        worst = worst.max(composed.max_distance(&eq1_closed_form(phi, zeta1, zeta2)));
    }
    Check::new(
        "one-way-composition-oracle",
        worst <= 1e-12,
        format!("max element-wise deviation {worst:.2e} over {draws} draws"),
    )
}

fn check_noise_immunity(draws: usize) -> Check {
    let bases = [PhaseSetting::zero(), PhaseSetting::pi()];
    let mut passed = true;
    let mut worst_var: f64 = 0.0;
    let mut worst_mean_err: f64 = 0.0;
    for phi in bases {
        for psi in bases {
            let expected = 0.5 * (1.0 + (psi.radians() - phi.radians()).cos());
            let mut s = NoiseStream::substream(0x0511, 2);
            let samples: Vec<f64> = (0..draws)
                .map(|_| {
                    let chan = ChannelNoise::new(s.next_uniform() * TAU, s.next_uniform() * TAU);
                    let common = s.next_uniform() * TAU;
                    let (ia, _) =
                        round_trip_intensities(phi, psi, chan, CouplerNoise::new(common, common));
                    ia
                })
                .collect();
            let mean = samples.iter().sum::<f64>() / draws as f64;
            let var =
                samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / draws as f64;
            worst_var = worst_var.max(var);
            worst_mean_err = worst_mean_err.max((mean - expected).abs());
            passed &= var < 1e-20 && (mean - expected).abs() < 1e-12;
        }
    }
    Check::new(
        "round-trip-noise-immunity",
        passed,
        format!("max variance {worst_var:.2e}, max mean error {worst_mean_err:.2e}"),
    )
}

fn check_oracle_agreement(draws: usize) -> Check {
    let mut s = NoiseStream::substream(0x0511, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let phi = PhaseSetting::new(s.next_uniform() * TAU).unwrap();
        let psi = PhaseSetting::new(s.next_uniform() * TAU).unwrap();
        let chan = ChannelNoise::new(s.next_uniform() * TAU, s.next_uniform() * TAU);
        let coupler = CouplerNoise::new(s.next_uniform() * TAU, s.next_uniform() * TAU);
        let (ia, _) = round_trip_intensities(phi, psi, chan, coupler);
        let oracle = closed_form_ia(phi, psi, chan.zeta(), coupler.zeta_double_prime());
        worst = worst.max((ia - oracle).abs());
    }
    Check::new(
        "round-trip-oracle-agreement",
        worst <= 1e-12,
        format!("max |I_A - oracle| = {worst:.2e} over {draws} draws"),
    )
}

fn check_energy_conservation(draws: usize) -> Check {
    let mut s = NoiseStream::substream(0x0511, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let phi = PhaseSetting::new(s.next_uniform() * TAU).unwrap();
        let psi = PhaseSetting::new(s.next_uniform() * TAU).unwrap();
        let chan = ChannelNoise::new(s.next_uniform() * TAU, s.next_uniform() * TAU);
        let coupler = CouplerNoise::new(s.next_uniform() * TAU, s.next_uniform() * TAU);
        let (ia, ib) = round_trip_intensities(phi, psi, chan, coupler);
        worst = worst.max((ia + ib - FieldState::input().total_intensity()).abs());
    }
    Check::new(
        "energy-conservation",
        worst <= 1e-12,
        format!("max |I_A + I_B - 1| = {worst:.2e}"),
    )
}

fn check_classical_limit(draws: usize) -> Check {
    let mut s = NoiseStream::substream(0x0511, 5);
    let (mut sa, mut sb) = (0.0, 0.0);
    for _ in 0..draws {
        let (ia, ib) = one_way_intensities(PhaseSetting::zero(), s.next_uniform() * TAU);
        sa += ia;
        sb += ib;
    }
    let (ma, mb) = (sa / draws as f64, sb / draws as f64);
    // 3 sigma of the MC mean with Var(I) = 1/8, floored at the reference band.
    let tol = (3.0 * (1.0f64 / 8.0).sqrt() / (draws as f64).sqrt()).max(0.005);
    Check::new(
        "one-way-classical-limit",
        (ma - 0.5).abs() < tol && (mb - 0.5).abs() < tol,
        format!("means ({ma:.4}, {mb:.4}) vs 0.5 +/- {tol:.4}"),
    )
}
