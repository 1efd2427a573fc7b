#![no_main]

use eigsense::io::{parse_config_str, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_config_str(text);
    if let Ok(cfg) = RunConfig::from_str_config(text) {
        let again = RunConfig::from_str_config(&cfg.to_config_string()).expect("effective config reparses");
        assert_eq!(again.hash(), cfg.hash());
    }
});
