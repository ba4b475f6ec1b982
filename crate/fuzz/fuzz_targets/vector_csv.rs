#![no_main]

use fejer_core::io::{parse_vector_csv, write_vector_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_vector_csv(text) {
        let back = parse_vector_csv(&write_vector_csv(&v)).expect("round trip");
        assert_eq!(back, v);
    }
});
