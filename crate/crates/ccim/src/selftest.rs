//! Oracle-equivalence suites behind the CLI `selftest` subcommand.
//!
//! Each check exercises one cross-path identity with reduced trial counts;
//! the full-depth versions live in the acceptance test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmacro::{
    full_precision_reference, oracle_reference, CimMacro, MacroConfig, MacroMode, RowSelect, UNITS,
};
use crate::numfmt::{partial_products, split, BitPartition, Complex8, Smf8, DCIM_UNIT, VECTOR_LEN};
use crate::saradc::{self, AdcConfig, CdacInstance};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_vector(rng: &mut ChaCha8Rng) -> [Complex8; VECTOR_LEN] {
    core::array::from_fn(|_| Complex8 {
        re: Smf8::from_byte(rng.gen()),
        im: Smf8::from_byte(rng.gen()),
    })
}

/// Run all self checks with roughly `trials` random cases each.
pub fn run(trials: u64) -> Vec<CheckResult> {
    vec![
        check_reconstruction(),
        check_oracle_equivalence(trials),
        check_adc_ideal(),
        check_negation_symmetry(trials / 10),
    ]
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Exhaustive product reconstruction over all magnitude pairs.
fn check_reconstruction() -> CheckResult {
    let part = BitPartition::default();
    for a in 0..=127u8 {
        for b in 0..=127u8 {
            let t = split(partial_products(a, b), &part, false, false);
            if t.represented_value() != a as i64 * b as i64 || t.d > 4 || t.r > 7937 {
                return CheckResult {
                    name: "partial-product-reconstruction",
                    passed: false,
                    detail: format!("failed at {a}x{b}"),
                };
            }
        }
    }
    CheckResult {
        name: "partial-product-reconstruction",
        passed: true,
        detail: "16384 magnitude pairs exact".into(),
    }
}

/// Ideal-mode execute equals the exact-integer oracle and respects the
/// quantization bound.
fn check_oracle_equivalence(trials: u64) -> CheckResult {
    let name = "ideal-oracle-equivalence";
    let mut mac = CimMacro::new(MacroConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(0x0541);
    let mut done = 0u64;
    while done < trials {
        let input = random_vector(&mut rng);
        let mut weights = [[Complex8::ZERO; VECTOR_LEN]; UNITS];
        for w in weights.iter_mut() {
            *w = random_vector(&mut rng);
        }
        for (unit, w) in weights.iter().enumerate() {
            mac.write_weights(unit, 0, w).expect("in range");
        }
        let out = mac.execute(&input, &RowSelect::Shared(0)).expect("valid");
        for (code, w) in out.units.iter().zip(weights.iter()) {
            let oracle =
                oracle_reference(&input, w, &MacroConfig::default().partition).expect("valid");
            if *code != oracle {
                return CheckResult {
                    name,
                    passed: false,
                    detail: format!("mismatch {code:?} vs {oracle:?}"),
                };
            }
            let (re_full, im_full) = full_precision_reference(&input, w).expect("valid");
            if (code.re as i64 * DCIM_UNIT - re_full).abs() > 1024
                || (code.im as i64 * DCIM_UNIT - im_full).abs() > 1024
            {
                return CheckResult {
                    name,
                    passed: false,
                    detail: "quantization bound exceeded".into(),
                };
            }
        }
        done += UNITS as u64;
    }
    CheckResult { name, passed: true, detail: format!("{done} outputs exact") }
}

/// Ideal ADC: mid-tread quantizer match and zero DNL/INL.
fn check_adc_ideal() -> CheckResult {
    let name = "adc-ideal-quantizer";
    let cdac = CdacInstance::ideal();
    let cfg = AdcConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xadc);
    for _ in 0..20_000 {
        let v: f64 = rng.gen_range(-70.0..70.0);
        if saradc::convert(&cdac, &cfg, v) != saradc::ideal_code(cfg.offset_code, v) {
            return CheckResult { name, passed: false, detail: format!("mismatch at v={v}") };
        }
    }
    let rep = saradc::dnl_inl(&cdac, &cfg);
    if rep.dnl_max > 1e-9 || rep.inl_max > 1e-9 {
        return CheckResult { name, passed: false, detail: "nonzero ideal DNL/INL".into() };
    }
    CheckResult { name, passed: true, detail: "quantizer exact, DNL=INL=0".into() }
}

/// Global input negation negates both output codes under mismatch.
fn check_negation_symmetry(trials: u64) -> CheckResult {
    let name = "global-negation-symmetry";
    let cfg = MacroConfig { mode: MacroMode::Mismatch { seed: 0xbeef }, ..Default::default() };
    let mut mac = CimMacro::new(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(0x515);
    for unit in 0..UNITS {
        let w = random_vector(&mut rng);
        mac.write_weights(unit, 0, &w).expect("in range");
    }
    for _ in 0..trials.max(100) {
        let input = random_vector(&mut rng);
        let negated: [Complex8; VECTOR_LEN] = core::array::from_fn(|k| input[k].negate());
        let a = mac.execute(&input, &RowSelect::Shared(0)).expect("valid");
        let b = mac.execute(&negated, &RowSelect::Shared(0)).expect("valid");
        for unit in 0..UNITS {
            if b.units[unit].re != -a.units[unit].re || b.units[unit].im != -a.units[unit].im {
                return CheckResult { name, passed: false, detail: "negation asymmetry".into() };
            }
        }
    }
    CheckResult { name, passed: true, detail: "codes negate exactly".into() }
}
