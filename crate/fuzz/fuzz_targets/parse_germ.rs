#![no_main]
use libfuzzer_sys::fuzz_target;
use morin_core::classify::morin_classify;
use morin_core::parse::parse_germ;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(src) = parse_germ(text) else {
        return;
    };
    // keep classification cheap: small germs only
    if src.m < src.n && src.m <= 4 && src.order <= 5 {
        let _ = morin_classify(&src.to_map_jet(), (src.order as usize).saturating_sub(2).max(1));
    }
});
