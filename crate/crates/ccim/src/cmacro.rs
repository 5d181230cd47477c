//! Macro integration: weight memory, eight complex units, the two-phase
//! pipeline contract, and exact-integer reference paths.
//!
//! Each unit evaluates one complex dot product per execute: the digital path
//! contributes the signed digit sum, the analog path converts the
//! charge-domain residual through its own ADC, and the post-digital combiner
//! reports `dcim + (adc - offset)` as one signed 8-bit code per real
//! component.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acim2d::{AnalogParams, CapArrayInstance};
use crate::dcim;
use crate::numfmt::{
    complex_expand, partial_products, split, BitPartition, Complex8, NumFmtError, ProductTerm,
    DCIM_UNIT, LANES, VECTOR_LEN,
};
use crate::saradc::{self, AdcConfig, CdacInstance};
use crate::seeds;

/// Number of complex CIM units.
pub const UNITS: usize = 8;
/// Weight rows per unit.
pub const ROWS_PER_UNIT: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MacroError {
    #[error("unit index {0} out of range (8 units)")]
    UnitOutOfRange(usize),
    #[error("row index {0} out of range (64 rows)")]
    RowOutOfRange(usize),
    #[error(transparent)]
    Format(#[from] NumFmtError),
}

/// Weight storage: 8 units x 64 rows x 8 complex operands (128 bits per
/// row, 64 kbit total).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMemory {
    rows: Box<[[Complex8; VECTOR_LEN]; UNITS * ROWS_PER_UNIT]>,
}

impl Default for WeightMemory {
    fn default() -> Self {
        Self::new()
    }
}

impl WeightMemory {
    pub fn new() -> Self {
        WeightMemory { rows: Box::new([[Complex8::ZERO; VECTOR_LEN]; UNITS * ROWS_PER_UNIT]) }
    }

    fn index(unit: usize, row: usize) -> Result<usize, MacroError> {
        if unit >= UNITS {
            return Err(MacroError::UnitOutOfRange(unit));
        }
        if row >= ROWS_PER_UNIT {
            return Err(MacroError::RowOutOfRange(row));
        }
        Ok(unit * ROWS_PER_UNIT + row)
    }

    pub fn write_row(
        &mut self,
        unit: usize,
        row: usize,
        values: &[Complex8; VECTOR_LEN],
    ) -> Result<(), MacroError> {
        self.rows[Self::index(unit, row)?] = *values;
        Ok(())
    }

    pub fn read_row(&self, unit: usize, row: usize) -> Result<[Complex8; VECTOR_LEN], MacroError> {
        Ok(self.rows[Self::index(unit, row)?])
    }
}

/// Ideal evaluation or a drawn mismatch instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MacroMode {
    Ideal,
    Mismatch { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MacroConfig {
    pub partition: BitPartition,
    pub analog: AnalogParams,
    pub adc: AdcConfig,
    pub mode: MacroMode,
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig {
            partition: BitPartition::default(),
            analog: AnalogParams::default(),
            adc: AdcConfig::default(),
            mode: MacroMode::Ideal,
        }
    }
}

/// Row selection per execute: one shared word line or an independent row per
/// unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSelect {
    Shared(usize),
    PerUnit([usize; UNITS]),
}

impl RowSelect {
    fn row_for(&self, unit: usize) -> usize {
        match self {
            RowSelect::Shared(r) => *r,
            RowSelect::PerUnit(rows) => rows[unit],
        }
    }

    fn validate(&self) -> Result<(), MacroError> {
        let check = |r: usize| {
            if r >= ROWS_PER_UNIT {
                Err(MacroError::RowOutOfRange(r))
            } else {
                Ok(())
            }
        };
        match self {
            RowSelect::Shared(r) => check(*r),
            RowSelect::PerUnit(rows) => rows.iter().try_for_each(|r| check(*r)),
        }
    }
}

/// One complex output code pair; each component is the signed 8-bit
/// combiner result in [-128, 127] (nominally within +/-126).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexCode {
    pub re: i16,
    pub im: i16,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MacroOutput {
    pub units: [ComplexCode; UNITS],
}

/// Analog instances for one real output path (its lane arrays and its ADC).
#[derive(Clone, Debug)]
struct PathInstance {
    caps: CapArrayInstance,
    cdac: CdacInstance,
}

/// A configured macro: weight memory plus one drawn analog instance per
/// (unit, re/im) output path. Immutable during execute; weight writes need
/// exclusive access.
#[derive(Clone, Debug)]
pub struct CimMacro {
    cfg: MacroConfig,
    mem: WeightMemory,
    paths: Vec<[PathInstance; 2]>,
}

impl CimMacro {
    pub fn new(cfg: MacroConfig) -> Self {
        let paths = (0..UNITS as u64)
            .map(|unit| {
                core::array::from_fn(|path| match cfg.mode {
                    MacroMode::Ideal => PathInstance {
                        caps: CapArrayInstance::ideal(&cfg.partition),
                        cdac: CdacInstance::ideal(),
                    },
                    MacroMode::Mismatch { seed } => PathInstance {
                        caps: CapArrayInstance::sample(
                            &cfg.analog,
                            &cfg.partition,
                            seeds::derive(seed, &[unit, path as u64, 0xa2]),
                        ),
                        cdac: CdacInstance::sample(
                            cfg.analog.sigma_u,
                            cfg.adc.lsb_units,
                            seeds::derive(seed, &[unit, path as u64, 0xdc]),
                        ),
                    },
                })
            })
            .collect();
        CimMacro { cfg, mem: WeightMemory::new(), paths }
    }

    pub fn config(&self) -> &MacroConfig {
        &self.cfg
    }

    pub fn memory(&self) -> &WeightMemory {
        &self.mem
    }

    pub fn load_memory(&mut self, mem: WeightMemory) {
        self.mem = mem;
    }

    pub fn write_weights(
        &mut self,
        unit: usize,
        row: usize,
        values: &[Complex8; VECTOR_LEN],
    ) -> Result<(), MacroError> {
        self.mem.write_row(unit, row, values)
    }

    pub fn read_weights(
        &self,
        unit: usize,
        row: usize,
    ) -> Result<[Complex8; VECTOR_LEN], MacroError> {
        self.mem.read_row(unit, row)
    }

    fn combine(&self, terms: &[ProductTerm; LANES], path: &PathInstance) -> i16 {
        let digital = dcim::phase_digit_sum(terms, crate::numfmt::Sign::Pos)
            - dcim::phase_digit_sum(terms, crate::numfmt::Sign::Neg);
        let v = path.caps.evaluate(terms);
        let adc = saradc::convert(&path.cdac, &self.cfg.adc, v);
        (digital + adc as i32 - self.cfg.adc.offset_code as i32).clamp(-128, 127) as i16
    }

    fn combine_noisy<R: Rng>(
        &self,
        terms: &[ProductTerm; LANES],
        path: &PathInstance,
        rng: &mut R,
    ) -> i16 {
        let digital = dcim::phase_digit_sum(terms, crate::numfmt::Sign::Pos)
            - dcim::phase_digit_sum(terms, crate::numfmt::Sign::Neg);
        let v = path.caps.evaluate(terms);
        let adc = saradc::convert_noisy(&path.cdac, &self.cfg.adc, v, rng);
        (digital + adc as i32 - self.cfg.adc.offset_code as i32).clamp(-128, 127) as i16
    }

    /// Evaluate all eight units against the shared input vector. Noise-free
    /// (ADC comparator noise must be zero; see [`CimMacro::execute_noisy`]).
    pub fn execute(
        &self,
        input: &[Complex8],
        rows: &RowSelect,
    ) -> Result<MacroOutput, MacroError> {
        rows.validate()?;
        let mut out = MacroOutput::default();
        for unit in 0..UNITS {
            let weights = self.mem.read_row(unit, rows.row_for(unit))?;
            let (re_terms, im_terms) = complex_expand(input, &weights, &self.cfg.partition)?;
            out.units[unit] = ComplexCode {
                re: self.combine(&re_terms, &self.paths[unit][0]),
                im: self.combine(&im_terms, &self.paths[unit][1]),
            };
        }
        Ok(out)
    }

    /// Evaluate with per-comparison ADC noise drawn from `rng`.
    pub fn execute_noisy<R: Rng>(
        &self,
        input: &[Complex8],
        rows: &RowSelect,
        rng: &mut R,
    ) -> Result<MacroOutput, MacroError> {
        rows.validate()?;
        let mut out = MacroOutput::default();
        for unit in 0..UNITS {
            let weights = self.mem.read_row(unit, rows.row_for(unit))?;
            let (re_terms, im_terms) = complex_expand(input, &weights, &self.cfg.partition)?;
            out.units[unit] = ComplexCode {
                re: self.combine_noisy(&re_terms, &self.paths[unit][0], rng),
                im: self.combine_noisy(&im_terms, &self.paths[unit][1], rng),
            };
        }
        Ok(out)
    }
}

/// Round-half-away-from-zero of `num / 2048` in exact integer arithmetic.
fn round_residual(num: i64) -> i64 {
    let half = DCIM_UNIT / 2;
    if num >= 0 {
        (num + half) / DCIM_UNIT
    } else {
        -((-num + half) / DCIM_UNIT)
    }
}

/// Exact-integer reference for one unit output: the digital digit sum plus
/// the half-away rounded residual sum, clamped to the 8-bit report range.
/// Matches ideal-mode [`CimMacro::execute`] exactly.
pub fn oracle_reference(
    input: &[Complex8],
    weights: &[Complex8],
    part: &BitPartition,
) -> Result<ComplexCode, MacroError> {
    let (re_terms, im_terms) = complex_expand(input, weights, part)?;
    let code = |terms: &[ProductTerm; LANES]| {
        let d: i64 = terms.iter().map(|t| t.sign.unit() * t.d as i64).sum();
        let r: i64 = terms.iter().map(|t| t.sign.unit() * t.r as i64).sum();
        (d + round_residual(r)).clamp(-128, 127) as i16
    };
    Ok(ComplexCode { re: code(&re_terms), im: code(&im_terms) })
}

/// Exact complex multiply-accumulate over the 8 elements; components bounded
/// by 258064 in magnitude.
pub fn full_precision_reference(
    input: &[Complex8],
    weights: &[Complex8],
) -> Result<(i64, i64), MacroError> {
    if input.len() != VECTOR_LEN {
        return Err(NumFmtError::LengthMismatch { expected: VECTOR_LEN, got: input.len() }.into());
    }
    if weights.len() != VECTOR_LEN {
        return Err(
            NumFmtError::LengthMismatch { expected: VECTOR_LEN, got: weights.len() }.into()
        );
    }
    let mut re = 0i64;
    let mut im = 0i64;
    for (x, w) in input.iter().zip(weights.iter()) {
        let (a, b) = (x.re.value() as i64, x.im.value() as i64);
        let (c, d) = (w.re.value() as i64, w.im.value() as i64);
        re += a * c - b * d;
        im += a * d + b * c;
    }
    Ok((re, im))
}

/// Two-phase pipeline wrapper: inputs latch at a sampling-phase start and
/// the corresponding outputs appear one step later.
#[derive(Clone, Debug)]
pub struct MacroPipeline<'a> {
    mac: &'a CimMacro,
    latched: Option<(Vec<Complex8>, RowSelect)>,
}

impl<'a> MacroPipeline<'a> {
    pub fn new(mac: &'a CimMacro) -> Self {
        MacroPipeline { mac, latched: None }
    }

    /// Latch a new input and return the output of the previously latched
    /// one; `None` on the first step.
    pub fn step(
        &mut self,
        input: &[Complex8],
        rows: RowSelect,
    ) -> Result<Option<MacroOutput>, MacroError> {
        let out = match self.latched.take() {
            Some((prev_input, prev_rows)) => Some(self.mac.execute(&prev_input, &prev_rows)?),
            None => None,
        };
        self.latched = Some((input.to_vec(), rows));
        Ok(out)
    }
}

/// Per-lane decomposition of a single magnitude pair, used by sweep
/// harnesses that need the exact digital/analog split of one product.
pub fn decompose_product(mag_i: u8, mag_w: u8, part: &BitPartition) -> (u8, u16) {
    let t = split(partial_products(mag_i, mag_w), part, false, false);
    (t.d, t.r)
}
