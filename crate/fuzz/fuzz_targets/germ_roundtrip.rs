#![no_main]
use libfuzzer_sys::fuzz_target;
use morin_core::parse::{parse_germ, GermSource};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(src) = parse_germ(text) {
            let printed = src.to_string();
            let reparsed = parse_germ(&printed).expect("printed germ must parse");
            assert_eq!(reparsed, src, "tree changed through printing");
            assert_eq!(reparsed.to_string(), printed);
            let expanded = GermSource::from_map_jet(&src.to_map_jet());
            let again = parse_germ(&expanded.to_string()).expect("expanded germ must parse");
            assert_eq!(again.to_map_jet(), src.to_map_jet());
        }
    }
});
