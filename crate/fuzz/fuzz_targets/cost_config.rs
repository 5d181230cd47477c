//! Cost-config TOML parser plus the accounting that consumes it: accepted
//! documents must evaluate without panicking.

#![no_main]

use ccim::costmodel;
use ccim::runcfg::cost_config_from_toml;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(costs) = cost_config_from_toml(text) {
        if let Ok(table) = costmodel::evaluate_architectures(&costs) {
            let _ = costmodel::reduction_report(&table);
            let _ = table.to_csv();
        }
    }
});
