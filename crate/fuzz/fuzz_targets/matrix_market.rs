#![no_main]

use fejer_core::io::{parse_matrix_market, write_matrix_market, MatrixMarketLayout};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_matrix_market(text) {
        for layout in [MatrixMarketLayout::Array, MatrixMarketLayout::Coordinate] {
            let back = parse_matrix_market(&write_matrix_market(&m, layout)).expect("round trip");
            assert_eq!(back.max_abs_diff(&m), 0.0);
        }
    }
});
