//! Logical error rate Monte Carlo and threshold crossings.
//!
//! A shot runs `d` noisy rounds and one noiseless round on a distance-`d`
//! lattice, decodes both stabilizer types and counts a failure if either
//! logical operator flipped. Shot `k` of grid point `i` at distance `d` uses
//! stream `substream((i << 8) | d, k)` of the master seed, and failure counts
//! are integer sums, so results do not depend on the thread count.

use crate::decoder::{DecodeError, Decoder};
use crate::rng::{stream_rng, substream};
use crate::stabilizer_protocol::{extract_round_distribution, NoiseParams, ProtocolError, StabilizerType};
use crate::surface_code::{build_lattice, logical_failure, ShotSampler, SurfaceError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub const MIN_SHOTS: u64 = 1000;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("at least {MIN_SHOTS} shots per point required, got {0}")]
    TooFewShots(u64),
    #[error("sweep needs at least two distances and one grid value")]
    EmptySweep,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    PSwap,
    PSh,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    let z = Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(0.5 + confidence / 2.0);
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub failures: u64,
    pub shots: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn from_counts(failures: u64, shots: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, shots, 0.95);
        RateEstimate { failures, shots, rate: failures as f64 / shots as f64, ci_low, ci_high }
    }

    /// 95% intervals do not overlap and `self` lies below.
    pub fn clearly_below(&self, other: &RateEstimate) -> bool {
        self.ci_high < other.ci_low
    }
}

/// Failure count over shots `0..shots` of the given stream tag.
fn count_failures(d: usize, noise: &NoiseParams, shots: u64, seed: u64, tag: u32) -> Result<u64, LabError> {
    let lattice = build_lattice(d)?;
    let dz = extract_round_distribution(StabilizerType::Z, noise)?;
    let dx = extract_round_distribution(StabilizerType::X, noise)?;
    let sampler = ShotSampler::new(&lattice, &dz, &dx)?;
    let decoder = Decoder::new(&lattice, &dz, &dx, d)?;
    (0..shots)
        .into_par_iter()
        .map(|k| -> Result<u64, LabError> {
            let (record, frame) = sampler.sample(d, &mut stream_rng(seed, substream(tag, k)));
            let correction = decoder.decode(&record)?;
            let (z, x) = logical_failure(&lattice, &frame.compose(&correction))?;
            Ok((z || x) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Logical error rate at one noise point.
pub fn estimate_logical_rate(d: usize, noise: &NoiseParams, shots: u64, seed: u64) -> Result<RateEstimate, LabError> {
    if shots < MIN_SHOTS {
        return Err(LabError::TooFewShots(shots));
    }
    let f = count_failures(d, noise, shots, seed, d as u32)?;
    Ok(RateEstimate::from_counts(f, shots))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSweep {
    pub parameter: SweepParameter,
    /// p_1q / p_swap
    pub ratio_1q: f64,
    /// p_swap while sweeping p_sh
    #[serde(default)]
    pub fixed_p_swap: f64,
    /// p_sh while sweeping p_swap
    #[serde(default)]
    pub fixed_p_sh: f64,
    pub distances: Vec<usize>,
    pub grid: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
}

impl ThresholdSweep {
    pub fn noise_at(&self, value: f64) -> NoiseParams {
        match self.parameter {
            SweepParameter::PSwap => NoiseParams::new(self.ratio_1q * value, value, self.fixed_p_sh),
            SweepParameter::PSh => NoiseParams::new(self.ratio_1q * self.fixed_p_swap, self.fixed_p_swap, value),
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.distances.is_empty() || self.grid.is_empty() {
            return Err(LabError::EmptySweep);
        }
        if self.shots < MIN_SHOTS {
            return Err(LabError::TooFewShots(self.shots));
        }
        for &d in &self.distances {
            build_lattice(d)?;
        }
        for &v in &self.grid {
            self.noise_at(v).validate(0.1)?;
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub parameter: f64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub shots: u64,
    pub seed: u64,
}

/// Rows ordered by distance, then grid value.
pub fn run_sweep(sweep: &ThresholdSweep) -> Result<Vec<SweepRow>, LabError> {
    sweep.validate()?;
    let mut rows = Vec::new();
    for &d in &sweep.distances {
        for (i, &v) in sweep.grid.iter().enumerate() {
            let tag = ((i as u32) << 8) | d as u32;
            let f = count_failures(d, &sweep.noise_at(v), sweep.shots, sweep.seed, tag)?;
            let est = RateEstimate::from_counts(f, sweep.shots);
            log::info!("d={d} value={v:e} rate={:.3e}", est.rate);
            rows.push(SweepRow {
                d,
                parameter: v,
                rate: est.rate,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                shots: sweep.shots,
                seed: sweep.seed,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub d_small: usize,
    pub d_large: usize,
    pub value: f64,
    pub uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdFit {
    pub crossings: Vec<Crossing>,
    /// mean of the pairwise crossings
    pub threshold: Option<f64>,
    pub uncertainty: Option<f64>,
}

fn curve(rows: &[SweepRow], d: usize) -> Vec<&SweepRow> {
    let mut c: Vec<&SweepRow> = rows.iter().filter(|r| r.d == d).collect();
    c.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    c
}

/// First grid interval where the larger code stops being better; the root
/// of the log-rate difference is interpolated linearly in the log of the
/// parameter.
fn crossing_of(small: &[&SweepRow], large: &[&SweepRow], pick: impl Fn(&SweepRow, bool) -> f64) -> Option<f64> {
    let ln = |x: f64| x.max(1e-300).ln();
    let diff: Vec<(f64, f64)> = small
        .iter()
        .zip(large)
        .map(|(s, l)| (ln(s.parameter), ln(pick(l, true)) - ln(pick(s, false))))
        .collect();
    diff.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0).map(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        (x0 + (x1 - x0) * (-y0) / (y1 - y0)).exp()
    })
}

/// Pairwise crossings of consecutive distances, averaged. The uncertainty
/// of each crossing is half the spread obtained by shifting both curves to
/// opposite ends of their confidence intervals.
pub fn locate_threshold(rows: &[SweepRow]) -> ThresholdFit {
    let mut ds: Vec<usize> = rows.iter().map(|r| r.d).collect();
    ds.sort_unstable();
    ds.dedup();
    let mut crossings = Vec::new();
    for pair in ds.windows(2) {
        let small = curve(rows, pair[0]);
        let large = curve(rows, pair[1]);
        if small.len() != large.len() || small.iter().zip(&large).any(|(a, b)| a.parameter != b.parameter) {
            continue;
        }
        let Some(value) = crossing_of(&small, &large, |r, _| r.rate) else { continue };
        let early = crossing_of(&small, &large, |r, is_large| if is_large { r.ci_high } else { r.ci_low });
        let late = crossing_of(&small, &large, |r, is_large| if is_large { r.ci_low } else { r.ci_high });
        let uncertainty = match (early, late) {
            (Some(a), Some(b)) => 0.5 * (b - a).abs(),
            _ => f64::NAN,
        };
        crossings.push(Crossing { d_small: pair[0], d_large: pair[1], value, uncertainty });
    }
    if crossings.is_empty() {
        return ThresholdFit { crossings, threshold: None, uncertainty: None };
    }
    let n = crossings.len() as f64;
    let threshold = crossings.iter().map(|c| c.value).sum::<f64>() / n;
    let unc = (crossings.iter().map(|c| c.uncertainty * c.uncertainty).sum::<f64>()).sqrt() / n;
    ThresholdFit { crossings, threshold: Some(threshold), uncertainty: Some(unc) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10/100 at 95%: (0.05523, 0.17437)
        let (lo, hi) = wilson_interval(10, 100, 0.95);
        assert!((lo - 0.055229).abs() < 1e-5 && (hi - 0.174367).abs() < 1e-5);
        let (lo, hi) = wilson_interval(0, 1000, 0.95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.004);
    }

    fn row(d: usize, p: f64, rate: f64) -> SweepRow {
        SweepRow { d, parameter: p, rate, ci_low: rate * 0.9, ci_high: rate * 1.1, shots: 1000, seed: 0 }
    }

    #[test]
    fn crossing_of_synthetic_power_laws() {
        // rate = (p / p_th)^((d + 1) / 2) crosses exactly at p_th
        let pth = 3e-3;
        let grid = [1e-3, 2e-3, 4e-3, 6e-3];
        let mut rows = Vec::new();
        for d in [3usize, 5, 7] {
            for &p in &grid {
                rows.push(row(d, p, 0.1 * (p / pth).powf((d as f64 + 1.0) / 2.0)));
            }
        }
        let fit = locate_threshold(&rows);
        assert_eq!(fit.crossings.len(), 2);
        for c in &fit.crossings {
            assert!((c.value - pth).abs() < 1e-12, "{c:?}");
            assert!(c.uncertainty > 0.0);
        }
    }

    #[test]
    fn no_crossing_is_reported() {
        let rows = vec![row(3, 1e-3, 0.1), row(3, 2e-3, 0.2), row(5, 1e-3, 0.05), row(5, 2e-3, 0.1)];
        assert_eq!(locate_threshold(&rows).threshold, None);
    }
}
