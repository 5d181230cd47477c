//! Run-config TOML parser: arbitrary documents must never panic, and every
//! accepted config must re-serialize to a document that parses back.

#![no_main]

use ccim::runcfg::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_toml_str(text) {
        let echoed = cfg.to_toml_string();
        RunConfig::from_toml_str(&echoed).expect("echoed config parses");
    }
});
