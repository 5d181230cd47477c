//! DOA scenario TOML parser plus the synthesis path behind it: accepted
//! scenarios (clamped to fuzz-sized workloads) must synthesize and estimate
//! without panicking.

#![no_main]

use ccim::doa::{synth_snapshots, FloatBeamscanner};
use ccim::runcfg::doa_scenario_from_toml;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 16 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mut sc) = doa_scenario_from_toml(text) {
        sc.n_snapshots = sc.n_snapshots.min(4);
        if sc.angle_grid_deg.len() > 64 {
            return;
        }
        if let Ok(snaps) = synth_snapshots(&sc) {
            let _ = FloatBeamscanner::new(&sc.angle_grid_deg).estimate(&snaps);
        }
    }
});
