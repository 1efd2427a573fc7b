#![no_main]

use eigsense::io::iq::format_iq_header;
use eigsense::io::parse_iq_header;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = parse_iq_header(text) {
        assert_eq!(parse_iq_header(&format_iq_header(&h)).expect("header reparses"), h);
    }
});
