//! Measurement harnesses: transfer/INL sweeps, uniform-input RMS error,
//! Monte Carlo RMS-vs-mismatch curves, and ADC characterization.
//!
//! Error sums accumulate in exact integers before conversion, so every
//! report is reproducible bit-for-bit from (config, seed) regardless of
//! aggregation order.

use rand::Rng;
use serde::Serialize;

use crate::cmacro::{
    full_precision_reference, oracle_reference, CimMacro, MacroConfig, MacroMode, RowSelect,
    UNITS,
};
use crate::numfmt::{Complex8, Smf8, DCIM_UNIT, VECTOR_LEN};
use crate::saradc::{self, AdcConfig, CdacInstance};
use crate::seeds;

/// Positive full scale of one accumulated real component: 16 * 127 * 127.
pub const FULL_SCALE: i64 = 258064;

/// One sweep point. `inl` is the deviation from the exact transfer line
/// (code error in output LSB); `inl_fit` is the conventional endpoint-fit
/// INL used for locating nonlinearity features.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepPoint {
    pub input: i32,
    pub mean_code: f64,
    pub ideal_code: i32,
    pub inl: f64,
    pub inl_fit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Least-squares line through (input, mean_code).
    pub gain: f64,
    pub offset: f64,
    /// Worst deviation from the exact line.
    pub max_abs_inl: f64,
    /// Worst endpoint-fit INL and the input where it occurs.
    pub max_abs_inl_fit: f64,
    pub argmax_inl_fit_input: i32,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,mean_code,ideal_code,inl,inl_fit\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.input, p.mean_code, p.ideal_code, p.inl, p.inl_fit
            ));
        }
        out
    }
}

/// Sweep the input from negative to positive full scale with weights fixed
/// at negative full scale on both components.
///
/// Inputs drive (re = x, im = -x) so all 16 lanes of the real output are
/// exercised; the exact accumulated value is -2032 * x and the reported INL
/// is the deviation of the measured code from that value in units of 2048.
pub fn transfer_sweep(cfg: &MacroConfig) -> SweepResult {
    let mut mac = CimMacro::new(*cfg);
    let w = [Complex8::encode(-127, -127).expect("in range"); VECTOR_LEN];
    for unit in 0..UNITS {
        mac.write_weights(unit, 0, &w).expect("in range");
    }
    let mut points = Vec::with_capacity(255);
    for x in -127..=127i32 {
        let input = [Complex8::encode(x, -x).expect("in range"); VECTOR_LEN];
        let out = mac.execute(&input, &RowSelect::Shared(0)).expect("valid row");
        let code = out.units[0].re as f64;
        let ideal = oracle_reference(&input, &w, &cfg.partition).expect("valid").re as i32;
        let (true_re, _) = full_precision_reference(&input, &w).expect("valid");
        let inl = code - true_re as f64 / DCIM_UNIT as f64;
        points.push(SweepPoint { input: x, mean_code: code, ideal_code: ideal, inl, inl_fit: 0.0 });
    }

    // Endpoint fit for the conventional INL.
    let first = points.first().expect("nonempty");
    let last = points.last().expect("nonempty");
    let ep_gain = (last.mean_code - first.mean_code) / (last.input - first.input) as f64;
    let ep_offset = first.mean_code - ep_gain * first.input as f64;
    for p in points.iter_mut() {
        p.inl_fit = p.mean_code - (ep_gain * p.input as f64 + ep_offset);
    }

    // Least-squares fit of the measured staircase.
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.input as f64).sum();
    let sy: f64 = points.iter().map(|p| p.mean_code).sum();
    let sxx: f64 = points.iter().map(|p| (p.input as f64).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.input as f64 * p.mean_code).sum();
    let gain = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let offset = (sy - gain * sx) / n;

    let mut max_abs_inl = 0.0f64;
    let (mut max_fit, mut argmax_fit) = (0.0f64, 0i32);
    for p in &points {
        max_abs_inl = max_abs_inl.max(p.inl.abs());
        if p.inl_fit.abs() > max_fit {
            max_fit = p.inl_fit.abs();
            argmax_fit = p.input;
        }
    }
    SweepResult {
        points,
        gain,
        offset,
        max_abs_inl,
        max_abs_inl_fit: max_fit,
        argmax_inl_fit_input: argmax_fit,
    }
}

/// Uniform-input RMS error of the complex MAC.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RmsReport {
    /// RMS error as percent of positive full scale (258064).
    pub rms_pct_fs: f64,
    /// RMS error as percent of the full range (516128); half of
    /// `rms_pct_fs` by construction.
    pub rms_pct_range: f64,
    /// Number of complex outputs evaluated (two real error samples each).
    pub trials: u64,
    pub seed: u64,
    /// Exact sum of squared integer errors behind the RMS figures.
    pub sum_sq_err: u128,
    pub error_samples: u64,
}

/// Draw inputs and weights uniformly over all signed-magnitude bit patterns
/// and accumulate `code * 2048 - exact` per real component.
///
/// One execute serves eight trials: the eight units share the input vector
/// (as in hardware) but carry independent weight rows.
pub fn rms_error(cfg: &MacroConfig, trials: u64, seed: u64) -> RmsReport {
    let mut mac = CimMacro::new(*cfg);
    let mut sum_sq: u128 = 0;
    let mut done: u64 = 0;
    let mut batch: u64 = 0;
    while done < trials {
        let mut rng = seeds::rng(seed, &[0x7261, batch]);
        let input = random_vector(&mut rng);
        let take = (trials - done).min(UNITS as u64);
        let mut weights = [[Complex8::ZERO; VECTOR_LEN]; UNITS];
        for w in weights.iter_mut() {
            *w = random_vector(&mut rng);
        }
        for (unit, w) in weights.iter().enumerate() {
            mac.write_weights(unit, 0, w).expect("in range");
        }
        let out = mac.execute(&input, &RowSelect::Shared(0)).expect("valid row");
        for (code, w) in out.units.iter().zip(weights.iter()).take(take as usize) {
            let (re_full, im_full) = full_precision_reference(&input, w).expect("valid");
            let re_err = code.re as i64 * DCIM_UNIT - re_full;
            let im_err = code.im as i64 * DCIM_UNIT - im_full;
            sum_sq += (re_err * re_err) as u128 + (im_err * im_err) as u128;
        }
        done += take;
        batch += 1;
    }
    let samples = 2 * trials;
    let rms = ((sum_sq as f64) / samples as f64).sqrt();
    RmsReport {
        rms_pct_fs: 100.0 * rms / FULL_SCALE as f64,
        rms_pct_range: 100.0 * rms / (2 * FULL_SCALE) as f64,
        trials,
        seed,
        sum_sq_err: sum_sq,
        error_samples: samples,
    }
}

fn random_vector<R: Rng>(rng: &mut R) -> [Complex8; VECTOR_LEN] {
    core::array::from_fn(|_| Complex8 {
        re: Smf8::from_byte(rng.gen()),
        im: Smf8::from_byte(rng.gen()),
    })
}

/// One point of the RMS-vs-mismatch curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MismatchCurvePoint {
    pub sigma_u: f64,
    pub median_rms_pct_fs: f64,
    pub p05: f64,
    pub p95: f64,
    pub mean: f64,
    /// Standard error of the median estimate (1.2533 * sd / sqrt(n)).
    pub median_stderr: f64,
    pub seeds: u32,
}

pub fn curve_to_csv(points: &[MismatchCurvePoint]) -> String {
    let mut out = String::from("sigma,median,p05,p95\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.sigma_u, p.median_rms_pct_fs, p.p05, p.p95));
    }
    out
}

/// Monte Carlo RMS error across capacitor mismatch levels. Both the 2D
/// arrays and the ADC CDACs draw at each sigma; per-seed RMS uses
/// `trials_per_seed` complex outputs.
pub fn mismatch_sweep(
    cfg: &MacroConfig,
    sigma_list: &[f64],
    seeds_per_point: u32,
    trials_per_seed: u64,
    master_seed: u64,
) -> Vec<MismatchCurvePoint> {
    sigma_list
        .iter()
        .map(|&sigma| {
            let mut values: Vec<f64> = (0..seeds_per_point)
                .map(|s| {
                    let mut point_cfg = *cfg;
                    point_cfg.analog.sigma_u = sigma;
                    point_cfg.mode =
                        MacroMode::Mismatch { seed: seeds::derive(master_seed, &[0x4d43, s as u64]) };
                    rms_error(&point_cfg, trials_per_seed, seeds::derive(master_seed, &[s as u64]))
                        .rms_pct_fs
                })
                .collect();
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let n = values.len();
            let median = percentile(&values, 0.5);
            let mean = values.iter().sum::<f64>() / n as f64;
            let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / (n.max(2) - 1) as f64)
                .sqrt();
            MismatchCurvePoint {
                sigma_u: sigma,
                median_rms_pct_fs: median,
                p05: percentile(&values, 0.05),
                p95: percentile(&values, 0.95),
                mean,
                median_stderr: 1.2533 * sd / (n as f64).sqrt(),
                seeds: seeds_per_point,
            }
        })
        .collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Where the worst transfer-sweep endpoint-fit |INL| lands across mismatch
/// seeds.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroCrossingReport {
    pub n_seeds: u32,
    /// Input window around zero counted as "at the crossing".
    pub window: i32,
    /// Fraction of seeds whose worst-|INL| input lies within the window;
    /// `None` when every sweep is INL-flat.
    pub fraction_near_zero: Option<f64>,
    /// Worst-INL input per seed; `None` for flat sweeps.
    pub locations: Vec<Option<i32>>,
    pub max_abs_inl_median: f64,
}

/// Run mismatched transfer sweeps and report where the endpoint-fit |INL|
/// peaks. This is a report, not an assertion: the physical asymmetry behind
/// the measured zero-crossing peak is configurable via `sign_gain_asym`.
pub fn zero_crossing_inl(cfg: &MacroConfig, n_seeds: u32, master_seed: u64) -> ZeroCrossingReport {
    const WINDOW: i32 = 4;
    const FLAT: f64 = 1e-9;
    let mut locations = Vec::with_capacity(n_seeds as usize);
    let mut peaks = Vec::with_capacity(n_seeds as usize);
    for s in 0..n_seeds {
        let mut seed_cfg = *cfg;
        seed_cfg.mode = MacroMode::Mismatch { seed: seeds::derive(master_seed, &[0x494e, s as u64]) };
        let sweep = transfer_sweep(&seed_cfg);
        peaks.push(sweep.max_abs_inl_fit);
        if sweep.max_abs_inl_fit < FLAT {
            locations.push(None);
        } else {
            locations.push(Some(sweep.argmax_inl_fit_input));
        }
    }
    let measured: Vec<i32> = locations.iter().flatten().copied().collect();
    let fraction_near_zero = if measured.is_empty() {
        None
    } else {
        Some(measured.iter().filter(|x| x.abs() <= WINDOW).count() as f64 / measured.len() as f64)
    };
    peaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    ZeroCrossingReport {
        n_seeds,
        window: WINDOW,
        fraction_near_zero,
        locations,
        max_abs_inl_median: percentile(&peaks, 0.5),
    }
}

/// Aggregated ADC linearity across mismatch seeds.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AdcCharReport {
    pub sigma_u: f64,
    pub lsb_units: u32,
    pub seeds: u32,
    /// Median across seeds of the per-instance rms DNL over all 126 steps.
    pub median_dnl_rms: f64,
    /// Median across seeds of the per-instance worst-step |DNL|.
    pub median_dnl_max: f64,
    /// RMS across seeds of the worst-step |DNL| (the usual "x LSB rms"
    /// worst-code figure).
    pub rms_dnl_max: f64,
    pub p95_dnl_max: f64,
    pub median_inl_max: f64,
    pub missing_code_fraction: f64,
}

/// Characterize CDAC linearity over `n_seeds` mismatch draws.
pub fn adc_characterization(
    sigma_u: f64,
    lsb_units: u32,
    n_seeds: u32,
    master_seed: u64,
) -> AdcCharReport {
    let cfg = AdcConfig { lsb_units, ..AdcConfig::default() };
    let mut dnl_rms = Vec::with_capacity(n_seeds as usize);
    let mut dnl_max = Vec::with_capacity(n_seeds as usize);
    let mut inl_max = Vec::with_capacity(n_seeds as usize);
    let mut missing = 0u32;
    for s in 0..n_seeds {
        let cdac = CdacInstance::sample(sigma_u, lsb_units, seeds::derive(master_seed, &[s as u64]));
        let rep = saradc::dnl_inl(&cdac, &cfg);
        dnl_rms.push(rep.dnl_rms);
        dnl_max.push(rep.dnl_max);
        inl_max.push(rep.inl_max);
        missing += rep.missing_codes as u32;
    }
    for v in [&mut dnl_rms, &mut dnl_max, &mut inl_max] {
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    }
    AdcCharReport {
        sigma_u,
        lsb_units,
        seeds: n_seeds,
        median_dnl_rms: percentile(&dnl_rms, 0.5),
        median_dnl_max: percentile(&dnl_max, 0.5),
        rms_dnl_max: (dnl_max.iter().map(|d| d * d).sum::<f64>() / dnl_max.len() as f64).sqrt(),
        p95_dnl_max: percentile(&dnl_max, 0.95),
        median_inl_max: percentile(&inl_max, 0.5),
        missing_code_fraction: missing as f64 / n_seeds as f64,
    }
}
