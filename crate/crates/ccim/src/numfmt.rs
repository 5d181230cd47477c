//! Signed-magnitude operand formats and partial-product decomposition.
//!
//! Operands are 8-bit signed-magnitude (sign bit plus 7-bit magnitude).
//! The product of two magnitudes expands into a 7x7 grid of AND terms
//! weighted 2^(i+j); a [`BitPartition`] assigns each grid position to the
//! digital path, the analog path, or truncation. [`complex_expand`] maps a
//! length-8 complex dot product onto the 16 real product lanes the macro
//! evaluates per output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest representable magnitude (7 bits).
pub const MAG_MAX: u8 = 127;
/// Number of magnitude bits per operand.
pub const MAG_BITS: usize = 7;
/// Complex vector length consumed by one macro unit.
pub const VECTOR_LEN: usize = 8;
/// Real product lanes per output (8 complex elements, 2 real products each).
pub const LANES: usize = 16;
/// Weight of one digital-path digit: the top partial products sit at or
/// above 2^11, so `d` counts in units of 2048.
pub const DCIM_UNIT: i64 = 2048;
const DCIM_SHIFT: u32 = 11;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumFmtError {
    #[error("value {0} outside signed-magnitude range [-127, 127]")]
    OutOfRange(i32),
    #[error("vector length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid bit partition: {0}")]
    InvalidPartition(String),
}

/// Lane polarity. Products carry an explicit sign so the analog path can
/// apply it through reference polarity rather than arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn from_xor(a: bool, b: bool) -> Self {
        if a ^ b {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    /// +1 or -1.
    pub fn unit(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// 8-bit signed-magnitude scalar: sign bit plus magnitude in [0, 127].
///
/// Both +0 and -0 are representable and compare equal by value; `PartialEq`
/// on the struct is bit-pattern equality, use [`Smf8::value`] for numeric
/// comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Smf8 {
    sign: bool,
    mag: u8,
}

impl Smf8 {
    pub const ZERO: Smf8 = Smf8 { sign: false, mag: 0 };

    pub fn new(sign: bool, mag: u8) -> Result<Self, NumFmtError> {
        if mag > MAG_MAX {
            return Err(NumFmtError::OutOfRange(mag as i32));
        }
        Ok(Smf8 { sign, mag })
    }

    /// Encode an integer, picking `sign_of_zero` as the sign bit when v = 0.
    pub fn encode(v: i32, sign_of_zero: bool) -> Result<Self, NumFmtError> {
        if v.unsigned_abs() > MAG_MAX as u32 {
            return Err(NumFmtError::OutOfRange(v));
        }
        let sign = if v == 0 { sign_of_zero } else { v < 0 };
        Ok(Smf8 { sign, mag: v.unsigned_abs() as u8 })
    }

    /// Bit 7 is the sign, bits 6:0 the magnitude. Every byte is valid.
    pub fn from_byte(b: u8) -> Self {
        Smf8 { sign: b & 0x80 != 0, mag: b & 0x7f }
    }

    pub fn to_byte(self) -> u8 {
        (self.sign as u8) << 7 | self.mag
    }

    pub fn value(self) -> i32 {
        if self.sign {
            -(self.mag as i32)
        } else {
            self.mag as i32
        }
    }

    pub fn sign(self) -> bool {
        self.sign
    }

    pub fn mag(self) -> u8 {
        self.mag
    }

    /// Flip the sign bit (also turns +0 into -0).
    pub fn negate(self) -> Self {
        Smf8 { sign: !self.sign, mag: self.mag }
    }
}

/// Complex operand: a pair of signed-magnitude components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Complex8 {
    pub re: Smf8,
    pub im: Smf8,
}

impl Complex8 {
    pub const ZERO: Complex8 = Complex8 { re: Smf8::ZERO, im: Smf8::ZERO };

    pub fn new(re: Smf8, im: Smf8) -> Self {
        Complex8 { re, im }
    }

    /// Encode a (re, im) integer pair; zeros get a positive sign bit.
    pub fn encode(re: i32, im: i32) -> Result<Self, NumFmtError> {
        Ok(Complex8 { re: Smf8::encode(re, false)?, im: Smf8::encode(im, false)? })
    }

    /// Negate both components (sign-bit flips only).
    pub fn negate(self) -> Self {
        Complex8 { re: self.re.negate(), im: self.im.negate() }
    }
}

/// Index of grid position (i, j) in a packed 49-bit mask.
#[inline]
fn grid_bit(i: usize, j: usize) -> u64 {
    1u64 << (MAG_BITS * i + j)
}

/// Mask covering the full 7x7 grid.
const GRID_MASK: u64 = (1u64 << (MAG_BITS * MAG_BITS)) - 1;

/// 7x7 grid of partial-product bits: bit (i, j) = magI[i] AND magW[j],
/// weighted 2^(i+j). The weighted sum reconstructs magI * magW exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PartialProductMatrix {
    bits: u64,
}

impl PartialProductMatrix {
    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.bits & grid_bit(i, j) != 0
    }

    pub fn raw(&self) -> u64 {
        self.bits
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Sum of 2^(i+j) over the set bits: equals magI * magW.
    pub fn weighted_sum(&self) -> u32 {
        weighted_sum_of_mask(self.bits)
    }
}

fn weighted_sum_of_mask(mask: u64) -> u32 {
    let mut sum = 0u32;
    let mut m = mask;
    while m != 0 {
        let pos = m.trailing_zeros() as usize;
        m &= m - 1;
        sum += 1u32 << (pos / MAG_BITS + pos % MAG_BITS);
    }
    sum
}

/// Expand the product of two 7-bit magnitudes into the AND grid.
pub fn partial_products(mag_i: u8, mag_w: u8) -> PartialProductMatrix {
    assert!(mag_i <= MAG_MAX && mag_w <= MAG_MAX, "magnitude out of range");
    let mut bits = 0u64;
    for i in 0..MAG_BITS {
        if mag_i & (1 << i) != 0 {
            bits |= (mag_w as u64) << (MAG_BITS * i);
        }
    }
    PartialProductMatrix { bits }
}

/// Serialized form of a partition: explicit digital and truncated positions,
/// analog set implied as the remainder.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct PartitionSpec {
    dcim: Vec<(u8, u8)>,
    #[serde(default)]
    trunc: Vec<(u8, u8)>,
}

/// Assignment of the 49 grid positions to the digital set, analog set, and
/// truncated set. The three sets partition the grid. Digital positions must
/// carry weight >= 2^11 so the digital digit counts in units of 2048.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct BitPartition {
    dcim: u64,
    acim: u64,
    trunc: u64,
}

impl Default for BitPartition {
    /// Digital set {(6,6), (6,5), (5,6)}, nothing truncated.
    fn default() -> Self {
        let dcim = grid_bit(6, 6) | grid_bit(6, 5) | grid_bit(5, 6);
        BitPartition { dcim, acim: GRID_MASK & !dcim, trunc: 0 }
    }
}

impl BitPartition {
    pub fn new(dcim: &[(u8, u8)], trunc: &[(u8, u8)]) -> Result<Self, NumFmtError> {
        let dcim_mask = mask_of(dcim)?;
        let trunc_mask = mask_of(trunc)?;
        if dcim_mask & trunc_mask != 0 {
            return Err(NumFmtError::InvalidPartition(
                "dcim and trunc sets overlap".into(),
            ));
        }
        for (i, j) in dcim {
            if (*i as usize + *j as usize) < DCIM_SHIFT as usize {
                return Err(NumFmtError::InvalidPartition(format!(
                    "dcim position ({i},{j}) has weight below 2^{DCIM_SHIFT}"
                )));
            }
        }
        Ok(BitPartition {
            dcim: dcim_mask,
            acim: GRID_MASK & !(dcim_mask | trunc_mask),
            trunc: trunc_mask,
        })
    }

    pub fn dcim_mask(&self) -> u64 {
        self.dcim
    }

    pub fn acim_mask(&self) -> u64 {
        self.acim
    }

    pub fn trunc_mask(&self) -> u64 {
        self.trunc
    }

    /// Grid positions of the analog set, ascending by packed index.
    pub fn acim_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        mask_positions(self.acim)
    }

    /// Smallest exponent i+j present in the analog set.
    pub fn acim_min_exponent(&self) -> Option<u32> {
        mask_positions(self.acim).map(|(i, j)| (i + j) as u32).min()
    }

    /// Largest representable analog residual: sum of 2^(i+j) over the set.
    pub fn max_residual(&self) -> u32 {
        weighted_sum_of_mask(self.acim)
    }

    /// Largest digital digit per lane.
    pub fn max_digit(&self) -> u32 {
        weighted_sum_of_mask(self.dcim) >> DCIM_SHIFT
    }
}

fn mask_of(pairs: &[(u8, u8)]) -> Result<u64, NumFmtError> {
    let mut mask = 0u64;
    for (i, j) in pairs {
        if *i as usize >= MAG_BITS || *j as usize >= MAG_BITS {
            return Err(NumFmtError::InvalidPartition(format!(
                "grid position ({i},{j}) outside 7x7"
            )));
        }
        let bit = grid_bit(*i as usize, *j as usize);
        if mask & bit != 0 {
            return Err(NumFmtError::InvalidPartition(format!(
                "duplicate grid position ({i},{j})"
            )));
        }
        mask |= bit;
    }
    Ok(mask)
}

fn mask_positions(mask: u64) -> impl Iterator<Item = (usize, usize)> {
    (0..MAG_BITS * MAG_BITS)
        .filter(move |p| mask & (1 << p) != 0)
        .map(|p| (p / MAG_BITS, p % MAG_BITS))
}

impl TryFrom<PartitionSpec> for BitPartition {
    type Error = NumFmtError;
    fn try_from(spec: PartitionSpec) -> Result<Self, Self::Error> {
        BitPartition::new(&spec.dcim, &spec.trunc)
    }
}

impl From<BitPartition> for PartitionSpec {
    fn from(p: BitPartition) -> Self {
        let pairs = |mask| mask_positions(mask).map(|(i, j)| (i as u8, j as u8)).collect();
        PartitionSpec { dcim: pairs(p.dcim), trunc: pairs(p.trunc) }
    }
}

/// One real product lane: lane sign, digital digit d, analog residual r, and
/// the partial-product grid the analog array consumes bit by bit.
///
/// With nothing truncated, sign * (2048*d + r) equals the exact integer
/// product of the generating operand pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductTerm {
    pub sign: Sign,
    pub d: u8,
    pub r: u16,
    ppm: PartialProductMatrix,
}

impl ProductTerm {
    pub const ZERO: ProductTerm = ProductTerm {
        sign: Sign::Pos,
        d: 0,
        r: 0,
        ppm: PartialProductMatrix { bits: 0 },
    };

    pub fn ppm(&self) -> &PartialProductMatrix {
        &self.ppm
    }

    /// sign * (2048*d + r); excludes any truncated bits.
    pub fn represented_value(&self) -> i64 {
        self.sign.unit() * (DCIM_UNIT * self.d as i64 + self.r as i64)
    }

    /// Same lane with the opposite polarity.
    pub fn negated(&self) -> ProductTerm {
        ProductTerm { sign: self.sign.flip(), ..*self }
    }
}

/// Split a partial-product grid into a lane term under a partition. The lane
/// sign is the XOR of the operand signs; truncated bits are discarded.
pub fn split(
    ppm: PartialProductMatrix,
    part: &BitPartition,
    sign_i: bool,
    sign_w: bool,
) -> ProductTerm {
    let d = (weighted_sum_of_mask(ppm.bits & part.dcim) >> DCIM_SHIFT) as u8;
    let r = weighted_sum_of_mask(ppm.bits & part.acim) as u16;
    ProductTerm { sign: Sign::from_xor(sign_i, sign_w), d, r, ppm }
}

fn product_term(i: Smf8, w: Smf8, part: &BitPartition) -> ProductTerm {
    split(partial_products(i.mag(), w.mag()), part, i.sign(), w.sign())
}

/// Fractional contribution of grid regions to the full product weight
/// 16129 = 127*127.
#[derive(Clone, Debug, PartialEq)]
pub struct ContributionTable {
    /// Integer weight sums per set; `total` is 16129.
    pub dcim_weight: u32,
    pub acim_weight: u32,
    pub trunc_weight: u32,
    pub total: u32,
    /// Per weight-bit column j: fraction contributed by all products
    /// involving w[j], i.e. 127 * 2^j / 16129.
    pub per_column: [f64; MAG_BITS],
}

impl ContributionTable {
    pub fn dcim_fraction(&self) -> f64 {
        self.dcim_weight as f64 / self.total as f64
    }

    pub fn acim_fraction(&self) -> f64 {
        self.acim_weight as f64 / self.total as f64
    }

    pub fn trunc_fraction(&self) -> f64 {
        self.trunc_weight as f64 / self.total as f64
    }
}

/// Weight accounting for a partition; fractions over the three sets sum to 1.
pub fn contribution_table(part: &BitPartition) -> ContributionTable {
    let total = weighted_sum_of_mask(GRID_MASK);
    let mut per_column = [0.0; MAG_BITS];
    for (j, col) in per_column.iter_mut().enumerate() {
        let col_weight: u32 = (0..MAG_BITS).map(|i| 1u32 << (i + j)).sum();
        *col = col_weight as f64 / total as f64;
    }
    ContributionTable {
        dcim_weight: weighted_sum_of_mask(part.dcim),
        acim_weight: weighted_sum_of_mask(part.acim),
        trunc_weight: weighted_sum_of_mask(part.trunc),
        total,
        per_column,
    }
}

/// Expand a length-8 complex dot product into the 16 real product lanes per
/// output. Real output lanes are (Re x_k, Re w_k) for k in 0..8 followed by
/// (Im x_k, Im w_k) with an extra polarity flip, realizing ac - bd without a
/// subtractor. Imaginary output lanes are (Re x_k, Im w_k) then (Im x_k, Re w_k).
pub fn complex_expand(
    x: &[Complex8],
    w: &[Complex8],
    part: &BitPartition,
) -> Result<([ProductTerm; LANES], [ProductTerm; LANES]), NumFmtError> {
    if x.len() != VECTOR_LEN {
        return Err(NumFmtError::LengthMismatch { expected: VECTOR_LEN, got: x.len() });
    }
    if w.len() != VECTOR_LEN {
        return Err(NumFmtError::LengthMismatch { expected: VECTOR_LEN, got: w.len() });
    }
    let mut re_terms = [ProductTerm::ZERO; LANES];
    let mut im_terms = [ProductTerm::ZERO; LANES];
    for k in 0..VECTOR_LEN {
        re_terms[k] = product_term(x[k].re, w[k].re, part);
        re_terms[VECTOR_LEN + k] = product_term(x[k].im, w[k].im, part).negated();
        im_terms[k] = product_term(x[k].re, w[k].im, part);
        im_terms[VECTOR_LEN + k] = product_term(x[k].im, w[k].re, part);
    }
    Ok((re_terms, im_terms))
}
