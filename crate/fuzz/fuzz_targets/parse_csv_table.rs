#![no_main]

use eigsense::io::parse_csv_table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_csv_table(text) {
        let again = parse_csv_table(&t.to_csv_string()).expect("serialized table reparses");
        assert_eq!(again.to_csv_string(), t.to_csv_string());
    }
});
