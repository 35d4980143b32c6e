//! Key-distribution sessions over the round-trip interferometer: basis
//! preparation, thresholded detection with a guard band, identity/inversion
//! inference, sifting, and eavesdropper strategies with empirical leakage
//! measurement.
//!
//! Detector mapping: D1 is Alice's alpha-port detector (bright when phi = pi
//! under quiet channels), D2 the beta port; D4 is Bob's A-port detector (bright
//! when psi = phi), D3 the B port. Key-bit convention: bit 0 is basis 0, bit 1
//! is basis pi; the shared key is Alice's basis sequence as inferred by Bob.

use crate::error::{Error, Result};
use crate::mzi::{one_way_intensities, round_trip_intensities, PhaseSetting};
use crate::noise::{CouplerMode, NoiseModel, NoiseStream, NoiseVector};
use crate::optics::{apply, beam_splitter, intensity, phase_layer, FieldState};

/// The binary protocol phase alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Zero,
    Pi,
}

impl Basis {
    pub fn phase(self) -> PhaseSetting {
        match self {
            Basis::Zero => PhaseSetting::zero(),
            Basis::Pi => PhaseSetting::pi(),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Basis::Zero => 0,
            Basis::Pi => 1,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::Pi
        } else {
            Basis::Zero
        }
    }
}

/// Alice's outbound detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutboundClick {
    D1,
    D2,
    Inconclusive,
}

/// Bob's return detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnClick {
    D3,
    D4,
    Inconclusive,
}

/// Inferred basis relation for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Identity,
    Inversion,
    Inconclusive,
}

/// Eavesdropper model. Observations are non-invasive copies of the outbound
/// channel fields (the carrier is classical light and can be cloned).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveStrategy {
    None,
    /// Taps the intensity of one transmission channel.
    IntensityTap,
    /// Recombines both channels with her own beam splitter. `assume_zeta` is a
    /// diagnostic point prior on the channel noise; `None` means the honest
    /// uniform prior, under which the observation is uninformative.
    InterferometricTap { assume_zeta: Option<f64> },
}

/// Full record of one protocol round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub bob_basis: Basis,
    pub alice_basis: Basis,
    pub outbound_click: OutboundClick,
    pub return_click: ReturnClick,
    pub relation: Relation,
    pub key_bit: Option<u8>,
    pub noise: NoiseVector,
    pub eve_guess: Option<Basis>,
}

/// Session parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub rounds: usize,
    /// Intensity margin around I0/2 below which a detection is inconclusive.
    pub guard_band: f64,
    pub chan_model: NoiseModel,
    pub coupler_model: NoiseModel,
    pub coupler_mode: CouplerMode,
    pub eve: EveStrategy,
    pub seed: u64,
}

pub const DEFAULT_GUARD_BAND: f64 = 0.1;

impl SessionConfig {
    pub fn new(rounds: usize, chan_model: NoiseModel, coupler_model: NoiseModel, seed: u64) -> Self {
        Self {
            rounds,
            guard_band: DEFAULT_GUARD_BAND,
            chan_model,
            coupler_model,
            coupler_mode: CouplerMode::Direct,
            eve: EveStrategy::None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::InvalidConfig("rounds must be >= 1".into()));
        }
        if !(0.0..0.5).contains(&self.guard_band) {
            return Err(Error::InvalidConfig(format!(
                "guard_band must be in [0, 0.5), got {}",
                self.guard_band
            )));
        }
        Ok(())
    }
}

/// Brighter-port decision under the guard band: `Some(true)` if the first port
/// clicks, `None` if the contrast is inside the guard band.
fn click(first: f64, second: f64, guard: f64) -> Option<bool> {
    if (first - second).abs() < guard {
        None
    } else {
        Some(first > second)
    }
}

/// Outbound channel fields after the first beam splitter and the arm phases:
/// the light Eve can tap in transit.
pub fn outbound_channel_fields(bob: Basis, noise: &NoiseVector) -> FieldState {
    let arms = phase_layer(noise.zeta2, bob.phase().radians() + noise.zeta1)
        .expect("arm phases are finite by construction");
    apply(arms, apply(beam_splitter(), FieldState::input()))
}

/// Eve's observation and basis guess for one round. Returns `None` when no
/// eavesdropper is configured.
pub fn eve_observe_and_guess(
    strategy: EveStrategy,
    outbound: FieldState,
    stream: &mut NoiseStream,
) -> Option<Basis> {
    match strategy {
        EveStrategy::None => None,
        EveStrategy::IntensityTap => {
            // Each channel carries I0/2 regardless of phi: the observation is
            // uninformative and the guess is a coin flip.
            let _observed = outbound.upper.norm_sqr();
            Some(Basis::from_bit(stream.next_bit()))
        }
        EveStrategy::InterferometricTap { assume_zeta } => {
            let (observed, _) = intensity(apply(beam_splitter(), outbound));
            match assume_zeta {
                // Uniform-zeta prior: the two likelihoods coincide, so the
                // maximum-likelihood rule degenerates to a fair tie-break.
                None => Some(Basis::from_bit(stream.next_bit())),
                Some(z) => {
                    let predict = |basis: Basis| {
                        let (ia, _) = one_way_intensities(basis.phase(), z);
                        (observed - ia).abs()
                    };
                    let (d0, d1) = (predict(Basis::Zero), predict(Basis::Pi));
                    if d0 < d1 {
                        Some(Basis::Zero)
                    } else if d1 < d0 {
                        Some(Basis::Pi)
                    } else {
                        Some(Basis::from_bit(stream.next_bit()))
                    }
                }
            }
        }
    }
}

/// Run one round with everything fixed: bases, the noise draw, and Eve's
/// tie-break stream. The sampling wrappers build on this.
pub fn run_round_with(
    config: &SessionConfig,
    bob: Basis,
    alice: Basis,
    noise: NoiseVector,
    eve_stream: &mut NoiseStream,
) -> RoundRecord {
    let (i_alpha, i_beta) = one_way_intensities(bob.phase(), noise.zeta());
    let outbound_click = match click(i_alpha, i_beta, config.guard_band) {
        Some(true) => OutboundClick::D1,
        Some(false) => OutboundClick::D2,
        None => OutboundClick::Inconclusive,
    };

    let (i_a, i_b) =
        round_trip_intensities(bob.phase(), alice.phase(), noise.channel(), noise.coupler());
    let (return_click, relation) = match click(i_a, i_b, config.guard_band) {
        Some(true) => (ReturnClick::D4, Relation::Identity),
        Some(false) => (ReturnClick::D3, Relation::Inversion),
        None => (ReturnClick::Inconclusive, Relation::Inconclusive),
    };

    let key_bit = match relation {
        Relation::Identity => Some(bob.bit()),
        Relation::Inversion => Some(bob.bit() ^ 1),
        Relation::Inconclusive => None,
    };

    let eve_guess = eve_observe_and_guess(
        config.eve,
        outbound_channel_fields(bob, &noise),
        eve_stream,
    );

    RoundRecord {
        bob_basis: bob,
        alice_basis: alice,
        outbound_click,
        return_click,
        relation,
        key_bit,
        noise,
        eve_guess,
    }
}

/// Draw bases and noise from `stream` and run one round.
pub fn run_round(
    config: &SessionConfig,
    stream: &mut NoiseStream,
    eve_stream: &mut NoiseStream,
) -> RoundRecord {
    let bob = Basis::from_bit(stream.next_bit());
    let alice = Basis::from_bit(stream.next_bit());
    let noise = stream.sample(config.chan_model, config.coupler_model, config.coupler_mode);
    run_round_with(config, bob, alice, noise, eve_stream)
}

/// Run all rounds of a session.
pub fn run_rounds(config: &SessionConfig) -> Result<Vec<RoundRecord>> {
    config.validate()?;
    let mut stream = NoiseStream::substream(config.seed, 0);
    let mut eve_stream = NoiseStream::substream(config.seed, 1);
    Ok((0..config.rounds)
        .map(|_| run_round(config, &mut stream, &mut eve_stream))
        .collect())
}

/// Sifted key material.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyMaterial {
    /// Bob's inferred bits (his estimate of Alice's basis sequence).
    pub bob_key: Vec<u8>,
    /// Alice's actual basis bits.
    pub alice_key: Vec<u8>,
    pub discard_count: usize,
}

impl KeyMaterial {
    /// Hamming fraction between the two keys; 0 for empty keys.
    pub fn error_rate(&self) -> f64 {
        if self.bob_key.is_empty() {
            return 0.0;
        }
        let errors = self
            .bob_key
            .iter()
            .zip(&self.alice_key)
            .filter(|(b, a)| b != a)
            .count();
        errors as f64 / self.bob_key.len() as f64
    }
}

/// Drop inconclusive rounds and collect both parties' key bits.
pub fn sift(records: &[RoundRecord]) -> KeyMaterial {
    let mut bob_key = Vec::new();
    let mut alice_key = Vec::new();
    let mut discard_count = 0;
    for r in records {
        match r.key_bit {
            Some(bit) => {
                bob_key.push(bit);
                alice_key.push(r.alice_basis.bit());
            }
            None => discard_count += 1,
        }
    }
    KeyMaterial {
        bob_key,
        alice_key,
        discard_count,
    }
}

/// Aggregate session statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionStats {
    /// Conclusive key bits per round.
    pub key_rate: f64,
    pub error_rate: f64,
    pub discard_rate: f64,
    /// Fraction of rounds where Eve's guess matched Bob's basis; `None` without
    /// an eavesdropper.
    pub eve_guess_rate: Option<f64>,
}

impl SessionStats {
    pub fn from_records(records: &[RoundRecord]) -> Self {
        let rounds = records.len();
        let key = sift(records);
        let guesses = records.iter().filter(|r| r.eve_guess.is_some()).count();
        let eve_guess_rate = if guesses > 0 {
            let hits = records
                .iter()
                .filter(|r| r.eve_guess == Some(r.bob_basis))
                .count();
            Some(hits as f64 / guesses as f64)
        } else {
            None
        };
        Self {
            key_rate: key.bob_key.len() as f64 / rounds as f64,
            error_rate: key.error_rate(),
            discard_rate: key.discard_count as f64 / rounds as f64,
            eve_guess_rate,
        }
    }
}

/// Run a full session and aggregate its statistics.
pub fn run_session(config: &SessionConfig) -> Result<SessionStats> {
    Ok(SessionStats::from_records(&run_rounds(config)?))
}
