//! 7-bit SAR ADC behavioral model.
//!
//! The input polarity selects the reference direction and the successive
//! approximation then quantizes the magnitude against the effective bit
//! weights (nominal 2^b) with decisions centered half an LSB up; the
//! sampled midpoint code is a plain output offset. An ideal instance
//! realizes the mid-tread quantizer
//! `code = clamp(offset_code + round_half_away(v))`, and because a
//! conversion of -v walks the mirror image of the decision path of +v over
//! the same capacitors, the transfer is odd around the offset code for any
//! mismatch instance. Transition levels, DNL, and INL are extracted
//! analytically from the decision structure.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seeds;

/// Number of ADC bits.
pub const ADC_BITS: usize = 7;
/// Code range is [0, 127].
pub const CODE_MAX: u8 = 127;

/// Effective CDAC bit weights in LSB units. An ideal instance has
/// w[b] = 2^b exactly; a sampled instance draws each bit's relative error
/// as zero-mean Gaussian with std `sigma_u / sqrt(lsb_units * 2^b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CdacInstance {
    weights: [f64; ADC_BITS],
    seed: u64,
}

impl CdacInstance {
    pub fn ideal() -> Self {
        CdacInstance { weights: core::array::from_fn(|b| (1u32 << b) as f64), seed: 0 }
    }

    /// Draw a mismatched instance. `lsb_units` is the number of unit
    /// capacitors composing the LSB (bit b uses lsb_units * 2^b units).
    pub fn sample(sigma_u: f64, lsb_units: u32, seed: u64) -> Self {
        assert!(sigma_u >= 0.0 && lsb_units >= 1);
        if sigma_u == 0.0 {
            return CdacInstance { seed, ..CdacInstance::ideal() };
        }
        let mut rng = seeds::rng(seed, &[u64::from_le_bytes(*b"cdacbits")]);
        let weights = core::array::from_fn(|b| {
            let nominal = (1u32 << b) as f64;
            let std = sigma_u / (lsb_units as f64 * nominal).sqrt();
            let eps = Normal::new(0.0, std).unwrap().sample(&mut rng);
            nominal * (1.0 + eps)
        });
        CdacInstance { weights, seed }
    }

    pub fn weights(&self) -> &[f64; ADC_BITS] {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdcConfig {
    /// Code sampled onto the CDAC during the sampling phase; acts as a plain
    /// output offset. Default 0x40 (midpoint).
    pub offset_code: u8,
    /// Comparator offset added to the input, in LSB units.
    pub comparator_offset: f64,
    /// Per-comparison Gaussian noise std, in LSB units.
    pub comparator_noise_std: f64,
    /// Unit capacitors composing the CDAC LSB.
    pub lsb_units: u32,
}

impl Default for AdcConfig {
    fn default() -> Self {
        AdcConfig {
            offset_code: 0x40,
            comparator_offset: 0.0,
            comparator_noise_std: 0.0,
            lsb_units: 16,
        }
    }
}

/// Magnitude decision threshold for bit `b` given the already-accumulated
/// DAC value `acc`, centered half an LSB up.
#[inline]
fn bit_threshold(cdac: &CdacInstance, acc: f64, b: usize) -> f64 {
    acc + cdac.weights[b] - 0.5
}

fn sar_loop(cdac: &CdacInstance, cfg: &AdcConfig, v: f64, mut noise: impl FnMut() -> f64) -> u8 {
    // Polarity comparison sets the reference direction for the magnitude
    // search.
    let positive = v + cfg.comparator_offset + noise() > 0.0;
    let mut acc = 0.0;
    let mut mag = 0i32;
    for b in (0..ADC_BITS).rev() {
        let u = v + cfg.comparator_offset + noise();
        let m = if positive { u } else { -u };
        // Ties include the bit: exact half-LSB magnitudes round up, i.e.
        // away from zero in the signed output.
        if m >= bit_threshold(cdac, acc, b) {
            acc += cdac.weights[b];
            mag |= 1 << b;
        }
    }
    let signed = if positive { mag } else { -mag };
    (cfg.offset_code as i32 + signed).clamp(0, CODE_MAX as i32) as u8
}

/// Noise-free conversion of `v` (in LSB units) to a code in [0, 127].
/// Inputs beyond range saturate at the end codes.
pub fn convert(cdac: &CdacInstance, cfg: &AdcConfig, v: f64) -> u8 {
    debug_assert!(cfg.comparator_noise_std == 0.0, "use convert_noisy for noisy configs");
    sar_loop(cdac, cfg, v, || 0.0)
}

/// Conversion with a fresh comparator noise draw per bit decision.
pub fn convert_noisy<R: Rng>(cdac: &CdacInstance, cfg: &AdcConfig, v: f64, rng: &mut R) -> u8 {
    if cfg.comparator_noise_std == 0.0 {
        return convert(cdac, cfg, v);
    }
    let normal = Normal::new(0.0, cfg.comparator_noise_std).unwrap();
    sar_loop(cdac, cfg, v, || normal.sample(rng))
}

/// The 127 input levels where the output code increments, plus a flag for
/// instances whose decision structure skips codes (missing codes show up as
/// zero-width steps rather than a failure).
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionLevels {
    /// `levels[k-1]` is the transition from code k-1 to k, k in 1..=127.
    pub levels: Vec<f64>,
    pub missing_codes: bool,
}

/// Analytic transition levels of the noise-free converter.
///
/// For each magnitude code the SAR decision path admits the magnitude
/// interval `[max theta over set bits, min theta over clear bits)`; empty
/// intervals are unreachable codes. The magnitude transfer is monotone
/// because all weights are positive, and the signed transfer mirrors it
/// around the offset code.
pub fn transition_levels(cdac: &CdacInstance, cfg: &AdcConfig) -> TransitionLevels {
    assert!(cfg.comparator_noise_std == 0.0, "transition levels require a noise-free config");
    let mut lower = [f64::NEG_INFINITY; 128];
    let mut upper = [f64::INFINITY; 128];
    for mag in 0..=CODE_MAX {
        let mut acc = 0.0;
        for b in (0..ADC_BITS).rev() {
            let theta = bit_threshold(cdac, acc, b);
            if mag & (1 << b) != 0 {
                lower[mag as usize] = lower[mag as usize].max(theta);
                acc += cdac.weights[b];
            } else {
                upper[mag as usize] = upper[mag as usize].min(theta);
            }
        }
    }
    // mu[m] = smallest magnitude input reaching mag >= m. Only magnitudes
    // that map into the signed output range matter for the missing flag.
    let offset = cfg.offset_code as i32;
    let relevant_max = offset.max(CODE_MAX as i32 - offset) as usize;
    let mut missing = false;
    let mut mu = [0.0f64; 128];
    let mut best = f64::INFINITY;
    for m in (1..=CODE_MAX as usize).rev() {
        if lower[m] < upper[m] {
            best = best.min(lower[m]);
        } else if m <= relevant_max {
            missing = true;
        }
        mu[m] = best;
    }
    let levels = (1..=CODE_MAX as i32)
        .map(|k| {
            let t = if k > offset { mu[(k - offset) as usize] } else { -mu[(offset - k + 1) as usize] };
            t - cfg.comparator_offset
        })
        .collect();
    TransitionLevels { levels, missing_codes: missing }
}

/// Static linearity extracted from transition levels.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearityReport {
    /// DNL per step, `dnl[k-1] = T[k+1] - T[k] - 1` for k in 1..=126, LSB.
    pub dnl: Vec<f64>,
    /// Endpoint-referenced INL per transition, k in 1..=127, LSB.
    pub inl: Vec<f64>,
    /// RMS of the per-step DNL.
    pub dnl_rms: f64,
    /// Worst-step |DNL|.
    pub dnl_max: f64,
    pub inl_max: f64,
    pub missing_codes: bool,
}

/// DNL/INL of a noise-free instance. INL references the endpoint line
/// through the first and last transitions.
pub fn dnl_inl(cdac: &CdacInstance, cfg: &AdcConfig) -> LinearityReport {
    let t = transition_levels(cdac, cfg);
    let n = t.levels.len();
    let dnl: Vec<f64> = (0..n - 1).map(|k| t.levels[k + 1] - t.levels[k] - 1.0).collect();
    let avg_step = (t.levels[n - 1] - t.levels[0]) / (n - 1) as f64;
    let inl: Vec<f64> = (0..n)
        .map(|k| t.levels[k] - t.levels[0] - k as f64 * avg_step)
        .collect();
    let dnl_rms = (dnl.iter().map(|d| d * d).sum::<f64>() / dnl.len() as f64).sqrt();
    let dnl_max = dnl.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let inl_max = inl.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    LinearityReport { dnl, inl, dnl_rms, dnl_max, inl_max, missing_codes: t.missing_codes }
}

/// Closed-form mid-tread quantizer the ideal converter must match:
/// `clamp(offset_code + round_half_away(v), 0, 127)`.
pub fn ideal_code(offset_code: u8, v: f64) -> u8 {
    let rounded = if v >= 0.0 { (v + 0.5).floor() } else { (v - 0.5).ceil() };
    (offset_code as f64 + rounded).clamp(0.0, CODE_MAX as f64) as u8
}
