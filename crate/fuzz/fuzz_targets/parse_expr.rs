#![no_main]

use fejer_core::funcexpr::parse;
use fejer_core::C64;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(expr) = parse(src) else {
        return;
    };
    // printing is canonical: reparsing the printed form gives the same tree
    let printed = expr.to_string();
    let again = parse(&printed).expect("printed expression must parse");
    assert_eq!(again.to_string(), printed);
    let _ = expr.eval(C64::new(0.6, 0.8));
});
