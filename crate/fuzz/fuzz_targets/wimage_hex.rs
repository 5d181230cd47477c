//! Hex-text weight-image parser: must never panic on arbitrary text, and
//! accepted inputs must survive an emit/reparse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mem) = ccim::wimage::from_hex(text) {
        let canonical = ccim::wimage::to_hex(&mem);
        let back = ccim::wimage::from_hex(&canonical).expect("canonical form parses");
        assert_eq!(back, mem);
    }
});
