//! Analog path: 16 per-lane 2D-weighted capacitor arrays summing the
//! partial-product residuals in the charge domain.
//!
//! The capacitor at grid position (i, j) carries weight 2^(i+j); lane signs
//! enter through reference polarity, so a fixed instance negates exactly
//! under global sign flips. The voltage chain (VREFSR sampling, VREFAD at
//! twice VREFSR, midpoint code) is collapsed into ADC-LSB units with
//! 1 LSB = 2048 product units; [`lsb_to_volts`] recovers physical volts for
//! reporting.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::numfmt::{BitPartition, ProductTerm, Sign, DCIM_UNIT, LANES, MAG_BITS};
use crate::seeds;

/// How capacitors are composed from unit caps, which sets how mismatch
/// scales with weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    /// Every cap is 2^(i+j-m) units, m the smallest exponent in the set.
    Flat,
    /// Caps at or above the bridge exponent restart at one unit
    /// (2^(i+j-bridge) units), trading capacitor count for mismatch.
    SplitDac { bridge_exp: u32 },
}

/// Whether the charge-sum gain uses the nominal or the drawn total
/// capacitance. The drawn total produces a small per-instance gain error,
/// which the measurement harness can then report against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainErrorMode {
    NominalTotal,
    ActualTotal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalogParams {
    /// Sampling reference, volts.
    pub vrefsr: f64,
    /// ADC reference, volts; twice `vrefsr` in the default configuration.
    pub vrefad: f64,
    /// Unit capacitance, farads.
    pub unit_cap: f64,
    /// Relative rms mismatch of one unit capacitor.
    pub sigma_u: f64,
    pub gain_error_mode: GainErrorMode,
    pub composition: Composition,
    /// Relative gain difference between the two reference polarities:
    /// positive lanes scale by 1 + a/2, negative lanes by 1 - a/2.
    pub sign_gain_asym: f64,
}

impl Default for AnalogParams {
    fn default() -> Self {
        AnalogParams {
            vrefsr: 0.350,
            vrefad: 0.700,
            unit_cap: 48e-18,
            sigma_u: 0.0296,
            gain_error_mode: GainErrorMode::ActualTotal,
            composition: Composition::Flat,
            sign_gain_asym: 0.0,
        }
    }
}

/// Convert an LSB-unit charge-sum value to the physical comparator-node
/// voltage (reporting only; the simulation stays in LSB units).
pub fn lsb_to_volts(v_lsb: f64, params: &AnalogParams) -> f64 {
    v_lsb * params.vrefad / 128.0
}

/// One drawn set of 16 lane arrays: per-capacitor relative errors plus the
/// gain implied by the drawn total capacitance.
#[derive(Clone, Debug, PartialEq)]
pub struct CapArrayInstance {
    /// Relative error per lane and packed grid position; zero outside the
    /// analog set.
    eps: Box<[[f64; MAG_BITS * MAG_BITS]; LANES]>,
    acim_mask: u64,
    gain: f64,
    sign_gain_asym: f64,
    seed: u64,
}

impl CapArrayInstance {
    /// Mismatch-free instance (unit gain, no asymmetry).
    pub fn ideal(part: &BitPartition) -> Self {
        CapArrayInstance {
            eps: Box::new([[0.0; MAG_BITS * MAG_BITS]; LANES]),
            acim_mask: part.acim_mask(),
            gain: 1.0,
            sign_gain_asym: 0.0,
            seed: 0,
        }
    }

    /// Draw per-capacitor errors for all 16 lanes. Deterministic given the
    /// seed; capacitors are visited lane-major in ascending packed order.
    pub fn sample(params: &AnalogParams, part: &BitPartition, seed: u64) -> Self {
        let mut inst = CapArrayInstance::ideal(part);
        inst.seed = seed;
        inst.sign_gain_asym = params.sign_gain_asym;
        let m = part.acim_min_exponent().unwrap_or(0);
        if params.sigma_u > 0.0 {
            let mut rng = seeds::rng(seed, &[u64::from_le_bytes(*b"caparray")]);
            for lane in 0..LANES {
                for (i, j) in part.acim_positions() {
                    let e = (i + j) as u32;
                    let n_units = match params.composition {
                        Composition::Flat => 1u64 << (e - m),
                        Composition::SplitDac { bridge_exp } if e >= bridge_exp.max(m) => {
                            1u64 << (e - bridge_exp.max(m))
                        }
                        Composition::SplitDac { .. } => 1u64 << (e - m),
                    };
                    let std = params.sigma_u / (n_units as f64).sqrt();
                    inst.eps[lane][MAG_BITS * i + j] =
                        Normal::new(0.0, std).unwrap().sample(&mut rng);
                }
            }
        }
        if params.gain_error_mode == GainErrorMode::ActualTotal {
            let mut c_nominal = 0.0;
            let mut c_actual = 0.0;
            for lane in 0..LANES {
                for (i, j) in part.acim_positions() {
                    let w = (1u64 << (i + j)) as f64;
                    c_nominal += w;
                    c_actual += w * (1.0 + inst.eps[lane][MAG_BITS * i + j]);
                }
            }
            if c_actual > 0.0 {
                inst.gain = c_nominal / c_actual;
            }
        }
        inst
    }

    pub fn eps_at(&self, lane: usize, i: usize, j: usize) -> f64 {
        self.eps[lane][MAG_BITS * i + j]
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Charge-domain sum of the 16 lanes in ADC-LSB units.
    ///
    /// Ideal instances compute `sum_p sign_p * r_p / 2048` exactly: the
    /// per-lane residual accumulates in integers and the final division by
    /// 2048 is a power-of-two scale.
    pub fn evaluate(&self, terms: &[ProductTerm]) -> f64 {
        debug_assert_eq!(terms.len(), LANES);
        let pos_scale = 1.0 + 0.5 * self.sign_gain_asym;
        let neg_scale = 1.0 - 0.5 * self.sign_gain_asym;
        let mut exact: i64 = 0;
        let mut perturbed = 0.0;
        for (lane, term) in terms.iter().enumerate() {
            let active = term.ppm().raw() & self.acim_mask;
            let mut lane_exact: i64 = 0;
            let mut lane_err = 0.0;
            let mut bits = active;
            while bits != 0 {
                let pos = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let w = 1i64 << (pos / MAG_BITS + pos % MAG_BITS);
                lane_exact += w;
                let e = self.eps[lane][pos];
                if e != 0.0 {
                    lane_err += w as f64 * e;
                }
            }
            let polarity = match term.sign {
                Sign::Pos => pos_scale,
                Sign::Neg => -neg_scale,
            };
            if polarity == 1.0 {
                exact += lane_exact;
            } else if polarity == -1.0 {
                exact -= lane_exact;
            } else {
                perturbed += polarity * lane_exact as f64;
            }
            perturbed += polarity * lane_err;
        }
        self.gain * (exact as f64 + perturbed) / DCIM_UNIT as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfmt::{complex_expand, partial_products, split, Complex8, Smf8, VECTOR_LEN};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lanes_of(pairs: &[(i32, i32)]) -> Vec<ProductTerm> {
        let part = BitPartition::default();
        let mut v: Vec<ProductTerm> = pairs
            .iter()
            .map(|(a, b)| {
                split(
                    partial_products(a.unsigned_abs() as u8, b.unsigned_abs() as u8),
                    &part,
                    *a < 0,
                    *b < 0,
                )
            })
            .collect();
        v.resize(LANES, ProductTerm::ZERO);
        v
    }

    #[test]
    fn ideal_single_lane_and_full_scale() {
        let part = BitPartition::default();
        let inst = CapArrayInstance::ideal(&part);

        let one = lanes_of(&[(127, 127)]);
        assert_eq!(inst.evaluate(&one), 7937.0 / 2048.0);

        let full = lanes_of(&[(127, 127); LANES]);
        // 16 * 7937 / 2048
        assert_eq!(inst.evaluate(&full), 126992.0 / 2048.0);

        let zeros = lanes_of(&[]);
        assert_eq!(inst.evaluate(&zeros), 0.0);
    }

    #[test]
    fn ideal_matches_integer_residual_oracle() {
        let part = BitPartition::default();
        let inst = CapArrayInstance::ideal(&part);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20_000 {
            let draw = |rng: &mut ChaCha8Rng| {
                core::array::from_fn::<_, VECTOR_LEN, _>(|_| Complex8 {
                    re: Smf8::from_byte(rng.gen()),
                    im: Smf8::from_byte(rng.gen()),
                })
            };
            let (re, _) = complex_expand(&draw(&mut rng), &draw(&mut rng), &part).unwrap();
            let oracle: i64 = re.iter().map(|t| t.sign.unit() * t.r as i64).sum();
            let v = inst.evaluate(&re);
            assert_eq!(v, oracle as f64 / 2048.0);
            assert!(v.abs() <= 126992.0 / 2048.0);
        }
    }

    #[test]
    fn sampling_determinism_and_zero_sigma() {
        let part = BitPartition::default();
        let params = AnalogParams::default();
        let a = CapArrayInstance::sample(&params, &part, 99);
        let b = CapArrayInstance::sample(&params, &part, 99);
        assert_eq!(a, b);
        assert_ne!(a, CapArrayInstance::sample(&params, &part, 100));

        let quiet = AnalogParams { sigma_u: 0.0, ..params };
        let c = CapArrayInstance::sample(&quiet, &part, 99);
        assert_eq!(c.eps_at(0, 0, 0), 0.0);
        assert_eq!(c.gain(), 1.0);
    }

    #[test]
    fn unit_cap_mismatch_std_matches_sigma() {
        // Position (0,0) is a single unit: eps std must come out near
        // sigma_u over many draws.
        let part = BitPartition::default();
        let params = AnalogParams { gain_error_mode: GainErrorMode::NominalTotal, ..Default::default() };
        let n = 10_000usize;
        let mut sum_sq = 0.0;
        for seed in 0..(n / LANES) as u64 {
            let inst = CapArrayInstance::sample(&params, &part, seed);
            for lane in 0..LANES {
                sum_sq += inst.eps_at(lane, 0, 0).powi(2);
            }
        }
        let std = (sum_sq / n as f64).sqrt();
        assert!(
            (std - 0.0296).abs() < 0.05 * 0.0296,
            "eps std {std} vs sigma_u 0.0296"
        );
    }

    #[test]
    fn mismatch_scales_inversely_with_unit_count() {
        let part = BitPartition::default();
        let params = AnalogParams { gain_error_mode: GainErrorMode::NominalTotal, ..Default::default() };
        let mut sum_sq_small = 0.0;
        let mut sum_sq_big = 0.0;
        let n = 2000u64;
        for seed in 0..n {
            let inst = CapArrayInstance::sample(&params, &part, seed);
            sum_sq_small += inst.eps_at(3, 0, 0).powi(2);
            // (4,4) has 2^8 = 256 units.
            sum_sq_big += inst.eps_at(3, 4, 4).powi(2);
        }
        let ratio = (sum_sq_small / sum_sq_big).sqrt();
        assert!((12.0..22.0).contains(&ratio), "expected ~16, got {ratio}");
    }

    #[test]
    fn split_dac_increases_msb_mismatch_only() {
        let part = BitPartition::default();
        let flat = AnalogParams { gain_error_mode: GainErrorMode::NominalTotal, ..Default::default() };
        let split = AnalogParams {
            composition: Composition::SplitDac { bridge_exp: 6 },
            ..flat
        };
        let n = 3000u64;
        let mut flat_hi = 0.0;
        let mut split_hi = 0.0;
        let mut flat_lo = 0.0;
        let mut split_lo = 0.0;
        for seed in 0..n {
            flat_hi += CapArrayInstance::sample(&flat, &part, seed).eps_at(0, 5, 5).powi(2);
            split_hi += CapArrayInstance::sample(&split, &part, seed).eps_at(0, 5, 5).powi(2);
            flat_lo += CapArrayInstance::sample(&flat, &part, seed).eps_at(0, 1, 1).powi(2);
            split_lo += CapArrayInstance::sample(&split, &part, seed).eps_at(0, 1, 1).powi(2);
        }
        // Exponent 10 cap: 2^10 units flat, 2^4 units beyond the bridge at 6.
        let hi_ratio = (split_hi / flat_hi).sqrt();
        assert!((5.0..13.0).contains(&hi_ratio), "expected ~8, got {hi_ratio}");
        // Below the bridge nothing changes.
        let lo_ratio = (split_lo / flat_lo).sqrt();
        assert!((0.8..1.25).contains(&lo_ratio), "expected ~1, got {lo_ratio}");
    }

    #[test]
    fn sign_flip_negates_exactly_for_fixed_instance() {
        let part = BitPartition::default();
        let params = AnalogParams::default();
        let inst = CapArrayInstance::sample(&params, &part, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5000 {
            let draw = |rng: &mut ChaCha8Rng| {
                core::array::from_fn::<_, VECTOR_LEN, _>(|_| Complex8 {
                    re: Smf8::from_byte(rng.gen()),
                    im: Smf8::from_byte(rng.gen()),
                })
            };
            let (re, _) = complex_expand(&draw(&mut rng), &draw(&mut rng), &part).unwrap();
            let flipped: Vec<ProductTerm> = re.iter().map(|t| t.negated()).collect();
            assert_eq!(inst.evaluate(&flipped), -inst.evaluate(&re));
        }
    }

    #[test]
    fn monotone_in_added_positive_bit() {
        let part = BitPartition::default();
        let inst = CapArrayInstance::ideal(&part);
        let mut lanes = lanes_of(&[(100, 100)]);
        let v0 = inst.evaluate(&lanes);
        lanes[1] = lanes_of(&[(1, 1)])[0];
        assert!(inst.evaluate(&lanes) > v0 - 1e-15);
    }

    #[test]
    fn soft_range_bound_under_mismatch() {
        let part = BitPartition::default();
        let params = AnalogParams { sigma_u: 0.05, ..Default::default() };
        let full = lanes_of(&[(127, 127); LANES]);
        let bound = (126992.0 / 2048.0) * (1.0 + 5.0 * params.sigma_u);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut draws = 0u32;
        for _ in 0..500 {
            let inst = CapArrayInstance::sample(&params, &part, rng.gen());
            assert!(inst.evaluate(&full).abs() <= bound);
            for _ in 0..200 {
                let draw = |rng: &mut ChaCha8Rng| {
                    core::array::from_fn::<_, VECTOR_LEN, _>(|_| Complex8 {
                        re: Smf8::from_byte(rng.gen()),
                        im: Smf8::from_byte(rng.gen()),
                    })
                };
                let (re, _) = complex_expand(&draw(&mut rng), &draw(&mut rng), &part).unwrap();
                assert!(inst.evaluate(&re).abs() <= bound);
                draws += 1;
            }
        }
        assert!(draws >= 100_000);
    }

    #[test]
    fn gain_asymmetry_kinks_by_polarity() {
        let part = BitPartition::default();
        let params = AnalogParams { sigma_u: 0.0, sign_gain_asym: 0.02, ..Default::default() };
        let inst = CapArrayInstance::sample(&params, &part, 1);
        let pos = lanes_of(&[(127, 127)]);
        let neg: Vec<ProductTerm> = pos.iter().map(|t| t.negated()).collect();
        let vp = inst.evaluate(&pos);
        let vn = inst.evaluate(&neg);
        assert!((vp - 7937.0 / 2048.0 * 1.01).abs() < 1e-12);
        assert!((vn + 7937.0 / 2048.0 * 0.99).abs() < 1e-12);
    }

    #[test]
    fn volts_reporting() {
        let params = AnalogParams::default();
        assert!((lsb_to_volts(128.0, &params) - 0.7).abs() < 1e-15);
    }
}
