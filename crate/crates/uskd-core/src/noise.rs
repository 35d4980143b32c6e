//! Deterministic, seedable phase-noise processes.
//!
//! The generator is counter-based: each output is a pure function of
//! `(seed, trial_index, cursor)`, so distinct trials can be evaluated in any order
//! (or in parallel) without changing a single bit of any stream.

use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::mzi::{ChannelNoise, CouplerNoise};

/// A phase-noise process for one pair of arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NoiseModel {
    /// Independent samples uniform on `[0, range)`.
    IidUniform { range: f64 },
    /// Reflecting random walk on `[0, bound]` with per-sample increments
    /// uniform on `[-step, step]`. Models slowly varying noise.
    BoundedWalk { step: f64, bound: f64 },
}

impl NoiseModel {
    /// Uniform model; `range` must lie in `[0, 2pi]` (values a hair above 2pi,
    /// e.g. a truncated decimal like 6.2832, are clamped).
    pub fn iid_uniform(range: f64) -> Result<Self> {
        if !range.is_finite() || range < 0.0 || range > TAU + 1e-3 {
            return Err(Error::InvalidNoiseModel(format!(
                "uniform range must be in [0, 2pi], got {range}"
            )));
        }
        Ok(Self::IidUniform {
            range: range.min(TAU),
        })
    }

    pub fn bounded_walk(step: f64, bound: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidNoiseModel(format!(
                "walk step must be positive, got {step}"
            )));
        }
        if !bound.is_finite() || bound <= 0.0 || bound > TAU + 1e-3 {
            return Err(Error::InvalidNoiseModel(format!(
                "walk bound must be in (0, 2pi], got {bound}"
            )));
        }
        Ok(Self::BoundedWalk {
            step,
            bound: bound.min(TAU),
        })
    }

    /// Default step for the slowly varying process: 2pi/1000 per sample.
    pub const DEFAULT_WALK_STEP: f64 = TAU / 1000.0;
}

/// How coupler-section noise is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplerMode {
    /// Draw the difference zeta'' directly from the model; the beta arm stays 0.
    Direct,
    /// Draw zeta_alpha and zeta_beta independently from the model.
    PerArm,
}

/// One draw of the four arm phases, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseVector {
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta_alpha: f64,
    pub zeta_beta: f64,
}

impl NoiseVector {
    pub fn zeros() -> Self {
        Self {
            zeta1: 0.0,
            zeta2: 0.0,
            zeta_alpha: 0.0,
            zeta_beta: 0.0,
        }
    }

    /// Effective channel noise `zeta = zeta2 - zeta1`, reduced to `[0, 2pi)`.
    pub fn zeta(&self) -> f64 {
        (self.zeta2 - self.zeta1).rem_euclid(TAU)
    }

    /// Coupler noise `zeta'' = zeta_alpha - zeta_beta`, reduced to `[0, 2pi)`.
    pub fn zeta_double_prime(&self) -> f64 {
        (self.zeta_alpha - self.zeta_beta).rem_euclid(TAU)
    }

    pub fn channel(&self) -> ChannelNoise {
        ChannelNoise::new(self.zeta1, self.zeta2)
    }

    pub fn coupler(&self) -> CouplerNoise {
        CouplerNoise::new(self.zeta_alpha, self.zeta_beta)
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A splittable random stream keyed by `(seed, trial_index)`.
///
/// Identical keys reproduce identical sample sequences bit-for-bit; distinct
/// trial indices give statistically independent streams.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStream {
    pub seed: u64,
    pub trial_index: u64,
    pub cursor: u64,
    key: u64,
    // Walk position per arm (zeta1, zeta2, zeta_alpha, zeta_beta), lazily seeded.
    walk: [Option<f64>; 4],
}

impl NoiseStream {
    pub fn substream(seed: u64, trial_index: u64) -> Self {
        let key = mix64(seed ^ mix64(trial_index.wrapping_mul(GOLDEN) ^ 0x5851_f42d_4c95_7f2d));
        Self {
            seed,
            trial_index,
            cursor: 0,
            key,
            walk: [None; 4],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.key.wrapping_add(self.cursor.wrapping_mul(GOLDEN)));
        self.cursor += 1;
        out
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One fair random bit.
    pub fn next_bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    fn draw(&mut self, model: NoiseModel, arm: usize) -> f64 {
        match model {
            NoiseModel::IidUniform { range } => self.next_uniform() * range,
            NoiseModel::BoundedWalk { step, bound } => {
                let pos = match self.walk[arm] {
                    None => self.next_uniform() * bound,
                    Some(prev) => {
                        let mut p = prev + (2.0 * self.next_uniform() - 1.0) * step;
                        loop {
                            if p < 0.0 {
                                p = -p;
                            } else if p > bound {
                                p = 2.0 * bound - p;
                            } else {
                                break;
                            }
                        }
                        p
                    }
                };
                self.walk[arm] = Some(pos);
                pos
            }
        }
    }

    /// One channel-noise draw (arms zeta1, zeta2).
    pub fn sample_channel(&mut self, model: NoiseModel) -> ChannelNoise {
        let zeta1 = self.draw(model, 0);
        let zeta2 = self.draw(model, 1);
        ChannelNoise::new(zeta1, zeta2)
    }

    /// One coupler-noise draw (arms zeta_alpha, zeta_beta).
    pub fn sample_coupler(&mut self, model: NoiseModel, mode: CouplerMode) -> CouplerNoise {
        match mode {
            CouplerMode::Direct => CouplerNoise::new(self.draw(model, 2), 0.0),
            CouplerMode::PerArm => {
                let zeta_alpha = self.draw(model, 2);
                let zeta_beta = self.draw(model, 3);
                CouplerNoise::new(zeta_alpha, zeta_beta)
            }
        }
    }

    /// One draw of all four arm phases.
    pub fn sample(
        &mut self,
        chan_model: NoiseModel,
        coupler_model: NoiseModel,
        mode: CouplerMode,
    ) -> NoiseVector {
        let chan = self.sample_channel(chan_model);
        let coupler = self.sample_coupler(coupler_model, mode);
        NoiseVector {
            zeta1: chan.zeta1,
            zeta2: chan.zeta2,
            zeta_alpha: coupler.zeta_alpha,
            zeta_beta: coupler.zeta_beta,
        }
    }
}
