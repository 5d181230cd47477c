//! Digital path over the 16 product lanes.
//!
//! The positive and negative lane populations are counted in two
//! time-multiplexed phases sharing one adder tree, then subtracted. With the
//! default partition each lane digit is 2*P66 + P65 + P56, so the phase
//! counters tally set bits per weight class and the final result lands in
//! [-64, +64].

use crate::numfmt::{ProductTerm, Sign};

/// Set-bit counts per weight class over the lanes selected in one phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DcimPhaseCounts {
    pub c66: u8,
    pub c65: u8,
    pub c56: u8,
}

/// Count the top-three partial-product bits over lanes whose sign matches
/// `phase`; opposite-sign lanes contribute nothing.
pub fn count_phase(terms: &[ProductTerm], phase: Sign) -> DcimPhaseCounts {
    let mut counts = DcimPhaseCounts::default();
    for t in terms.iter().filter(|t| t.sign == phase) {
        counts.c66 += t.ppm().bit(6, 6) as u8;
        counts.c65 += t.ppm().bit(6, 5) as u8;
        counts.c56 += t.ppm().bit(5, 6) as u8;
    }
    counts
}

/// Subtract the two phase tallies: (2*c66 + c65 + c56)+ minus the same for
/// the negative phase.
pub fn dcim_result(pos: &DcimPhaseCounts, neg: &DcimPhaseCounts) -> i32 {
    let weigh = |c: &DcimPhaseCounts| 2 * c.c66 as i32 + c.c65 as i32 + c.c56 as i32;
    weigh(pos) - weigh(neg)
}

/// Sum of lane digits over lanes matching `phase`. Equals the weighted phase
/// count for the default partition and generalizes to custom digital sets.
pub fn phase_digit_sum(terms: &[ProductTerm], phase: Sign) -> i32 {
    terms.iter().filter(|t| t.sign == phase).map(|t| t.d as i32).sum()
}

/// Two-phase digital result for a lane set: positive-phase digit sum minus
/// negative-phase digit sum.
pub fn dcim_of_terms(terms: &[ProductTerm]) -> i32 {
    phase_digit_sum(terms, Sign::Pos) - phase_digit_sum(terms, Sign::Neg)
}
