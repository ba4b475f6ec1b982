#![no_main]

use fejer_core::io::{spectral_form_from_json, spectral_form_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = spectral_form_from_json(text) {
        let back = spectral_form_from_json(&spectral_form_to_json(&s)).expect("round trip");
        assert_eq!(back.dim(), s.dim());
    }
});
