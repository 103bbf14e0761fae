#![no_main]
use libfuzzer_sys::fuzz_target;
use morin_core::parse::parse_framed;
use morin_core::ruling::{ruling_morin1_check, FramedCurve};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(src) = parse_framed(text) {
            let reparsed = parse_framed(&src.to_string()).expect("printed curve must parse");
            assert_eq!(reparsed, src);
            if src.n <= 3 && src.order <= 6 {
                if let Ok(fc) = FramedCurve::from_source(&src) {
                    let _ = ruling_morin1_check(&fc);
                }
            }
        }
    }
});
