//! First-order relative cost accounting for complex-CIM architectures.
//!
//! Compares the shared-weight hybrid design against the two conventional
//! complex-MAC organizations: duplicated complex weights (1.5x on the weight
//! array for parallel cross products) and sequential reuse of one real-MAC
//! datapath (2.2x latency). All quantities are relative; the shipped example
//! numbers are illustrative, not a derivation of silicon figures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Area multiplier on the weight array for the duplicated-weights baseline.
pub const DUPLICATED_WEIGHT_SCALE: f64 = 1.5;
/// Latency multiplier for the sequential baseline.
pub const SEQUENTIAL_LATENCY_SCALE: f64 = 2.2;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("negative cost in component {0}")]
    Negative(&'static str),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostPair {
    pub area: f64,
    pub power: f64,
}

impl CostPair {
    fn scaled(self, k: f64) -> CostPair {
        CostPair { area: self.area * k, power: self.power * k }
    }
}

/// Per-component costs of one macro in arbitrary units, plus the cycle count
/// of one complex MAC on the proposed datapath. Baselines additionally scale
/// the orchestration logic (`*_control_scale`), reflecting the separate
/// control both conventional organizations need.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComponentCosts {
    pub weight_array: CostPair,
    pub mac_logic: CostPair,
    pub control: CostPair,
    pub adc: CostPair,
    /// Cycles per complex MAC, proposed architecture.
    pub cycle_latency: f64,
    pub dup_control_scale: f64,
    pub seq_control_scale: f64,
}

impl Default for ComponentCosts {
    fn default() -> Self {
        ComponentCosts {
            weight_array: CostPair::default(),
            mac_logic: CostPair::default(),
            control: CostPair::default(),
            adc: CostPair::default(),
            cycle_latency: 1.0,
            dup_control_scale: 2.0,
            seq_control_scale: 2.0,
        }
    }
}

impl ComponentCosts {
    /// Illustrative breakdown for the shipped example config; the split
    /// between components is a placeholder, not measured data.
    pub fn illustrative() -> Self {
        ComponentCosts {
            weight_array: CostPair { area: 1.0, power: 0.4 },
            mac_logic: CostPair { area: 0.5, power: 0.8 },
            control: CostPair { area: 0.4, power: 0.5 },
            adc: CostPair { area: 0.3, power: 1.0 },
            cycle_latency: 1.0,
            dup_control_scale: 2.0,
            seq_control_scale: 2.0,
        }
    }

    fn validate(&self) -> Result<(), CostError> {
        let checks = [
            (self.weight_array, "weight_array"),
            (self.mac_logic, "mac_logic"),
            (self.control, "control"),
            (self.adc, "adc"),
        ];
        for (pair, name) in checks {
            if pair.area < 0.0 || pair.power < 0.0 {
                return Err(CostError::Negative(name));
            }
        }
        if self.cycle_latency < 0.0 {
            return Err(CostError::Negative("cycle_latency"));
        }
        if self.dup_control_scale < 0.0 || self.seq_control_scale < 0.0 {
            return Err(CostError::Negative("control_scale"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchCost {
    pub area: f64,
    pub latency: f64,
    pub power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub proposed: ArchCost,
    pub duplicated: ArchCost,
    pub sequential: ArchCost,
}

impl CostTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("architecture,area,latency,power\n");
        for (name, arch) in [
            ("proposed", &self.proposed),
            ("duplicated", &self.duplicated),
            ("sequential", &self.sequential),
        ] {
            out.push_str(&format!("{},{},{},{}\n", name, arch.area, arch.latency, arch.power));
        }
        out
    }
}

/// Total area/latency/power of the three organizations.
///
/// The proposed design shares one weight array between the real and
/// imaginary paths. The duplicated baseline multiplies the weight component
/// by 1.5; the sequential baseline runs 2.2x longer. Both baselines scale
/// the control component by their configured factor.
pub fn evaluate_architectures(costs: &ComponentCosts) -> Result<CostTable, CostError> {
    costs.validate()?;
    let sum = |w: CostPair, m: CostPair, c: CostPair, a: CostPair| ArchCost {
        area: w.area + m.area + c.area + a.area,
        latency: 0.0,
        power: w.power + m.power + c.power + a.power,
    };
    let mut proposed = sum(costs.weight_array, costs.mac_logic, costs.control, costs.adc);
    proposed.latency = costs.cycle_latency;

    let mut duplicated = sum(
        costs.weight_array.scaled(DUPLICATED_WEIGHT_SCALE),
        costs.mac_logic,
        costs.control.scaled(costs.dup_control_scale),
        costs.adc,
    );
    duplicated.latency = costs.cycle_latency;

    let mut sequential = sum(
        costs.weight_array,
        costs.mac_logic,
        costs.control.scaled(costs.seq_control_scale),
        costs.adc,
    );
    sequential.latency = costs.cycle_latency * SEQUENTIAL_LATENCY_SCALE;

    Ok(CostTable { proposed, duplicated, sequential })
}

/// Percent reduction of the proposed design against the best baseline per
/// metric: `1 - proposed / min(baselines)`. `None` when the best baseline
/// is zero (undefined metric). Negative reductions are reported, not
/// clamped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub area_pct: Option<f64>,
    pub latency_pct: Option<f64>,
    pub power_pct: Option<f64>,
}

pub fn reduction_report(table: &CostTable) -> ReductionReport {
    let reduce = |proposed: f64, a: f64, b: f64| {
        let best = a.min(b);
        if best == 0.0 {
            None
        } else {
            Some(100.0 * (1.0 - proposed / best))
        }
    };
    ReductionReport {
        area_pct: reduce(table.proposed.area, table.duplicated.area, table.sequential.area),
        latency_pct: reduce(
            table.proposed.latency,
            table.duplicated.latency,
            table.sequential.latency,
        ),
        power_pct: reduce(table.proposed.power, table.duplicated.power, table.sequential.power),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight_dominated() -> ComponentCosts {
        ComponentCosts {
            weight_array: CostPair { area: 1.0, power: 1.0 },
            ..ComponentCosts::default()
        }
    }

    #[test]
    fn baseline_multipliers() {
        let table = evaluate_architectures(&weight_dominated()).unwrap();
        assert_eq!(table.duplicated.area / table.proposed.area, 1.5);
        assert_eq!(table.sequential.latency / table.proposed.latency, 2.2);
    }

    #[test]
    fn zero_costs_zero_totals() {
        let costs = ComponentCosts { cycle_latency: 0.0, ..ComponentCosts::default() };
        let table = evaluate_architectures(&costs).unwrap();
        for arch in [table.proposed, table.duplicated, table.sequential] {
            assert_eq!((arch.area, arch.latency, arch.power), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn reduction_identities() {
        let table = CostTable {
            proposed: ArchCost { area: 0.65, latency: 0.65, power: 0.65 },
            duplicated: ArchCost { area: 1.0, latency: 1.2, power: 1.0 },
            sequential: ArchCost { area: 1.1, latency: 1.0, power: 1.3 },
        };
        let rep = reduction_report(&table);
        assert!((rep.area_pct.unwrap() - 35.0).abs() < 1e-12);
        assert!((rep.latency_pct.unwrap() - 35.0).abs() < 1e-12);

        let same = CostTable { proposed: table.duplicated, ..table };
        assert_eq!(reduction_report(&same).area_pct, Some(0.0));

        let worse = CostTable {
            proposed: ArchCost { area: 2.0, latency: 2.0, power: 2.0 },
            ..table
        };
        assert!(reduction_report(&worse).area_pct.unwrap() < 0.0);
    }

    #[test]
    fn zero_baseline_is_undefined() {
        let table = evaluate_architectures(&ComponentCosts {
            cycle_latency: 0.0,
            ..ComponentCosts::default()
        })
        .unwrap();
        let rep = reduction_report(&table);
        assert_eq!(rep.area_pct, None);
        assert_eq!(rep.latency_pct, None);
    }

    #[test]
    fn scale_invariance() {
        let base = ComponentCosts::illustrative();
        let table = evaluate_architectures(&base).unwrap();
        let rep = reduction_report(&table);
        let scaled = ComponentCosts {
            weight_array: base.weight_array.scaled(3.5),
            mac_logic: base.mac_logic.scaled(3.5),
            control: base.control.scaled(3.5),
            adc: base.adc.scaled(3.5),
            cycle_latency: base.cycle_latency * 3.5,
            ..base
        };
        let scaled_rep = reduction_report(&evaluate_architectures(&scaled).unwrap());
        assert!((rep.area_pct.unwrap() - scaled_rep.area_pct.unwrap()).abs() < 1e-9);
        assert!((rep.latency_pct.unwrap() - scaled_rep.latency_pct.unwrap()).abs() < 1e-9);
        assert!((rep.power_pct.unwrap() - scaled_rep.power_pct.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn negative_costs_rejected() {
        let bad = ComponentCosts {
            adc: CostPair { area: -1.0, power: 0.0 },
            ..ComponentCosts::default()
        };
        assert_eq!(evaluate_architectures(&bad), Err(CostError::Negative("adc")));
    }

    #[test]
    fn reductions_use_per_metric_best_baseline() {
        let table = CostTable {
            proposed: ArchCost { area: 1.0, latency: 1.0, power: 1.0 },
            duplicated: ArchCost { area: 2.0, latency: 4.0, power: 3.0 },
            sequential: ArchCost { area: 4.0, latency: 2.0, power: 5.0 },
        };
        let rep = reduction_report(&table);
        assert_eq!(rep.area_pct, Some(50.0));
        assert_eq!(rep.latency_pct, Some(50.0));
        assert!((rep.power_pct.unwrap() - (100.0 * (1.0 - 1.0 / 3.0))).abs() < 1e-12);
    }
}
