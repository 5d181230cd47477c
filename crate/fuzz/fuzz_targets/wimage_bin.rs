//! Binary weight-image parser: arbitrary byte buffers must either be
//! rejected with a length error or parse into memory that re-serializes to
//! the identical bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    match ccim::wimage::from_bytes(data) {
        Ok(mem) => {
            assert_eq!(data.len(), ccim::wimage::IMAGE_BYTES);
            assert_eq!(ccim::wimage::to_bytes(&mem), data);
        }
        Err(_) => assert_ne!(data.len(), ccim::wimage::IMAGE_BYTES),
    }
});
