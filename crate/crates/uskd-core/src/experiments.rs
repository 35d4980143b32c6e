//! Monte Carlo sweep engine for the intensity-averaging figures: per-sample
//! traces, averages over coupler noise, repeated trials, averages over channel
//! noise, and the averaging-number fluctuation analysis.
//!
//! Every trace is a pure function of its spec and seed. Each grid point and
//! repeat draws from its own substream, so results do not depend on evaluation
//! order.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::mzi::{round_trip_intensities, ChannelNoise, CouplerNoise, PhaseSetting};
use crate::noise::{CouplerMode, NoiseModel, NoiseStream};

// Substream domains, one per sweep kind.
const DOMAIN_INDIVIDUAL: u64 = 1;
const DOMAIN_AVG_COUPLER: u64 = 2;
const DOMAIN_REPEATS: u64 = 3;
const DOMAIN_AVG_CHANNEL: u64 = 4;
const DOMAIN_FIG3B: u64 = 5;

/// Substream keyed by (domain, outer index, inner index).
fn stream_for(seed: u64, domain: u64, a: u64, b: u64) -> NoiseStream {
    NoiseStream::substream(seed, (domain << 48) | ((a & 0xff_ffff) << 24) | (b & 0xff_ffff))
}

/// Description of one Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub phi: PhaseSetting,
    pub psi: PhaseSetting,
    /// Coupler-noise ranges, one trace per entry.
    pub coupler_ranges: Vec<f64>,
    /// Samples averaged per grid point (n).
    pub samples_per_point: usize,
    /// Number of grid points along the swept axis.
    pub zeta_grid: usize,
    pub repeats: usize,
    pub seed: u64,
    pub coupler_mode: CouplerMode,
    /// Channel-noise range for the panels that randomize the channel.
    pub chan_range: f64,
}

impl SweepSpec {
    /// Defaults sized so each figure reproduces in seconds.
    pub fn new(seed: u64) -> Self {
        Self {
            phi: PhaseSetting::zero(),
            psi: PhaseSetting::zero(),
            coupler_ranges: vec![TAU],
            samples_per_point: 2000,
            zeta_grid: 200,
            repeats: 10,
            seed,
            coupler_mode: CouplerMode::Direct,
            chan_range: TAU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_point < 1 {
            return Err(Error::InvalidSpec("samples_per_point must be >= 1".into()));
        }
        if self.zeta_grid < 2 {
            return Err(Error::InvalidSpec("zeta_grid must be >= 2".into()));
        }
        if self.coupler_ranges.is_empty() {
            return Err(Error::InvalidSpec("coupler_ranges must be non-empty".into()));
        }
        for &r in &self.coupler_ranges {
            if !r.is_finite() || r < 0.0 || r > TAU + 1e-3 {
                return Err(Error::InvalidSpec(format!(
                    "coupler range must be in [0, 2pi], got {r}"
                )));
            }
        }
        if !self.chan_range.is_finite() || self.chan_range < 0.0 || self.chan_range > TAU + 1e-3 {
            return Err(Error::InvalidSpec(format!(
                "chan_range must be in [0, 2pi], got {}",
                self.chan_range
            )));
        }
        Ok(())
    }

    /// Hex digest of the serialized spec, recorded in trace manifests.
    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

fn digest_of<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("spec serialization cannot fail");
    let hash = Sha256::digest(json.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reproducibility stamp carried by every trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceManifest {
    pub seed: u64,
    pub spec_digest: String,
}

/// Per-grid-point intensity statistics for one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub axis: Vec<f64>,
    pub mean_ia: Vec<f64>,
    pub mean_ib: Vec<f64>,
    pub std_ia: Vec<f64>,
    pub std_ib: Vec<f64>,
    /// Grid points where the labeled-bright output fell to or below 0.5.
    pub crossover_count: usize,
    pub manifest: TraceManifest,
}

/// Crossover threshold: the "middle line" between the two outputs.
pub const CROSSOVER_THRESHOLD: f64 = 0.5;

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

struct TraceAccum {
    axis: Vec<f64>,
    mean_ia: Vec<f64>,
    mean_ib: Vec<f64>,
    std_ia: Vec<f64>,
    std_ib: Vec<f64>,
}

impl TraceAccum {
    fn with_capacity(n: usize) -> Self {
        Self {
            axis: Vec::with_capacity(n),
            mean_ia: Vec::with_capacity(n),
            mean_ib: Vec::with_capacity(n),
            std_ia: Vec::with_capacity(n),
            std_ib: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, axis: f64, ia: &[f64], ib: &[f64]) {
        let (ma, sa) = mean_and_std(ia);
        let (mb, sb) = mean_and_std(ib);
        self.axis.push(axis);
        self.mean_ia.push(ma);
        self.mean_ib.push(mb);
        self.std_ia.push(sa);
        self.std_ib.push(sb);
    }

    fn finish(self, bright_is_ia: bool, manifest: TraceManifest) -> TraceResult {
        let bright = if bright_is_ia {
            &self.mean_ia
        } else {
            &self.mean_ib
        };
        let crossover_count = bright
            .iter()
            .filter(|&&v| v <= CROSSOVER_THRESHOLD)
            .count();
        TraceResult {
            axis: self.axis,
            mean_ia: self.mean_ia,
            mean_ib: self.mean_ib,
            std_ia: self.std_ia,
            std_ib: self.std_ib,
            crossover_count,
            manifest,
        }
    }
}

fn bright_is_ia(phi: PhaseSetting, psi: PhaseSetting) -> bool {
    (psi.radians() - phi.radians()).cos() >= 0.0
}

/// Grid of `count` points over `[0, 2pi)`, end exclusive.
fn circular_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| TAU * k as f64 / count as f64).collect()
}

/// Grid of `count` points over `[0, hi]`, ends inclusive.
fn linear_grid(count: usize, hi: f64) -> Vec<f64> {
    (0..count)
        .map(|k| hi * k as f64 / (count - 1) as f64)
        .collect()
}

/// Per-sample (unaveraged) round-trip intensities under fully random channel
/// and coupler noise. The axis carries each draw's effective channel noise.
pub fn fig2_individual(spec: &SweepSpec) -> Result<TraceResult> {
    spec.validate()?;
    let manifest = TraceManifest {
        seed: spec.seed,
        spec_digest: spec.digest(),
    };
    let chan_model = NoiseModel::iid_uniform(spec.chan_range)?;
    let coupler_model = NoiseModel::iid_uniform(spec.coupler_ranges[0])?;
    let mut stream = stream_for(spec.seed, DOMAIN_INDIVIDUAL, 0, 0);
    let mut acc = TraceAccum::with_capacity(spec.samples_per_point);
    for _ in 0..spec.samples_per_point {
        let nv = stream.sample(chan_model, coupler_model, spec.coupler_mode);
        let (ia, ib) = round_trip_intensities(spec.phi, spec.psi, nv.channel(), nv.coupler());
        acc.push(nv.zeta(), &[ia], &[ib]);
    }
    Ok(acc.finish(bright_is_ia(spec.phi, spec.psi), manifest))
}

/// One trace per coupler range: at each channel-noise grid point, the mean of
/// the round-trip intensities over `n` coupler draws from `[0, range)`.
pub fn fig2_avg_over_coupler(spec: &SweepSpec) -> Result<Vec<TraceResult>> {
    spec.validate()?;
    (0..spec.coupler_ranges.len())
        .map(|ri| avg_over_coupler_trace(spec, DOMAIN_AVG_COUPLER, ri as u64, ri))
        .collect()
}

fn avg_over_coupler_trace(
    spec: &SweepSpec,
    domain: u64,
    outer: u64,
    range_index: usize,
) -> Result<TraceResult> {
    let range = spec.coupler_ranges[range_index];
    let coupler_model = NoiseModel::iid_uniform(range)?;
    let manifest = TraceManifest {
        seed: spec.seed,
        spec_digest: spec.digest(),
    };
    let n = spec.samples_per_point;
    let mut acc = TraceAccum::with_capacity(spec.zeta_grid);
    for (pi, &zeta) in circular_grid(spec.zeta_grid).iter().enumerate() {
        let mut stream = stream_for(spec.seed, domain, outer, pi as u64);
        let chan = ChannelNoise::new(0.0, zeta);
        let mut ia = Vec::with_capacity(n);
        let mut ib = Vec::with_capacity(n);
        for _ in 0..n {
            let coupler = stream.sample_coupler(coupler_model, spec.coupler_mode);
            let (a, b) = round_trip_intensities(spec.phi, spec.psi, chan, coupler);
            ia.push(a);
            ib.push(b);
        }
        acc.push(zeta, &ia, &ib);
    }
    Ok(acc.finish(bright_is_ia(spec.phi, spec.psi), manifest))
}

/// Independent repeats of the coupler-averaged trace at the first coupler range.
pub fn fig2_repeat_trials(spec: &SweepSpec) -> Result<Vec<TraceResult>> {
    spec.validate()?;
    if spec.repeats < 2 {
        return Err(Error::InvalidSpec("repeats must be >= 2".into()));
    }
    (0..spec.repeats)
        .map(|r| avg_over_coupler_trace(spec, DOMAIN_REPEATS, r as u64, 0))
        .collect()
}

/// One trace per coupler range: x-axis is the coupler noise `zeta''` swept over
/// `[0, range]`; each point is the mean over `n` random channel-noise draws.
pub fn fig2_avg_over_channel(spec: &SweepSpec) -> Result<Vec<TraceResult>> {
    spec.validate()?;
    let chan_model = NoiseModel::iid_uniform(spec.chan_range)?;
    let manifest = TraceManifest {
        seed: spec.seed,
        spec_digest: spec.digest(),
    };
    let n = spec.samples_per_point;
    spec.coupler_ranges
        .iter()
        .enumerate()
        .map(|(ri, &range)| {
            let mut acc = TraceAccum::with_capacity(spec.zeta_grid);
            for (pi, &zpp) in linear_grid(spec.zeta_grid, range).iter().enumerate() {
                let mut stream = stream_for(spec.seed, DOMAIN_AVG_CHANNEL, ri as u64, pi as u64);
                let coupler = CouplerNoise::new(zpp, 0.0);
                let mut ia = Vec::with_capacity(n);
                let mut ib = Vec::with_capacity(n);
                for _ in 0..n {
                    let chan = stream.sample_channel(chan_model);
                    let (a, b) = round_trip_intensities(spec.phi, spec.psi, chan, coupler);
                    ia.push(a);
                    ib.push(b);
                }
                acc.push(zpp, &ia, &ib);
            }
            Ok(acc.finish(bright_is_ia(spec.phi, spec.psi), manifest.clone()))
        })
        .collect()
}

/// Spec for the averaging-number fluctuation analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3bSpec {
    pub n_small: usize,
    pub n_large: usize,
    pub zeta_grid: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Fig3bSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            n_small: 20,
            n_large: 2000,
            zeta_grid: 41,
            repeats: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_small < 1 || self.n_large < 1 {
            return Err(Error::InvalidSpec("average numbers must be >= 1".into()));
        }
        if self.zeta_grid < 2 {
            return Err(Error::InvalidSpec("zeta_grid must be >= 2".into()));
        }
        if self.repeats < 2 {
            return Err(Error::InvalidSpec("repeats must be >= 2".into()));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

/// Deterministic `zeta''` sweep over `[0, 2pi]` comparing two averaging numbers.
///
/// At each grid point the channel-averaged intensities are recomputed `repeats`
/// times with independent substreams; the trace's std columns hold the
/// fluctuation std of the n-sample mean across repeats.
pub fn fig3b_averaging(spec: &Fig3bSpec) -> Result<(TraceResult, TraceResult)> {
    spec.validate()?;
    let small = fig3b_trace(spec, spec.n_small, 0)?;
    let large = fig3b_trace(spec, spec.n_large, 1)?;
    Ok((small, large))
}

fn fig3b_trace(spec: &Fig3bSpec, n: usize, branch: u64) -> Result<TraceResult> {
    let chan_model = NoiseModel::iid_uniform(TAU)?;
    let manifest = TraceManifest {
        seed: spec.seed,
        spec_digest: spec.digest(),
    };
    let phi = PhaseSetting::zero();
    let psi = PhaseSetting::zero();
    let mut acc = TraceAccum::with_capacity(spec.zeta_grid);
    for (pi, &zpp) in linear_grid(spec.zeta_grid, TAU).iter().enumerate() {
        let coupler = CouplerNoise::new(zpp, 0.0);
        let mut means_ia = Vec::with_capacity(spec.repeats);
        let mut means_ib = Vec::with_capacity(spec.repeats);
        for r in 0..spec.repeats {
            let mut stream = stream_for(
                spec.seed,
                DOMAIN_FIG3B,
                (branch << 20) | pi as u64,
                r as u64,
            );
            let (mut sa, mut sb) = (0.0, 0.0);
            for _ in 0..n {
                let chan = stream.sample_channel(chan_model);
                let (a, b) = round_trip_intensities(phi, psi, chan, coupler);
                sa += a;
                sb += b;
            }
            means_ia.push(sa / n as f64);
            means_ib.push(sb / n as f64);
        }
        acc.push(zpp, &means_ia, &means_ib);
    }
    Ok(acc.finish(true, manifest))
}

/// Summary statistics of a trace's bright-output column.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub crossover_count: usize,
}

/// Summarize the `mean_ia` column of a trace; crossovers are the grid points
/// where it fell to or below 0.5.
pub fn summarize(trace: &TraceResult) -> Result<Summary> {
    if trace.mean_ia.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let (mean, std) = mean_and_std(&trace.mean_ia);
    let min = trace.mean_ia.iter().copied().fold(f64::INFINITY, f64::min);
    let max = trace
        .mean_ia
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let crossover_count = trace
        .mean_ia
        .iter()
        .filter(|&&v| v <= CROSSOVER_THRESHOLD)
        .count();
    Ok(Summary {
        mean,
        std,
        min,
        max,
        crossover_count,
    })
}
