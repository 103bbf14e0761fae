#![no_main]
use libfuzzer_sys::fuzz_target;
use morin_core::report::Document;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = serde_json::from_slice::<Document>(data) {
        let text = doc.to_json();
        let back: Document = serde_json::from_str(&text).expect("emitted report must decode");
        assert_eq!(back, doc);
    }
});
