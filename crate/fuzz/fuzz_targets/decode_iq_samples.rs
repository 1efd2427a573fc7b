#![no_main]

use eigsense::io::iq::encode_iq_samples;
use eigsense::io::{decode_iq_samples, IqHeader};
use libfuzzer_sys::fuzz_target;

// First two bytes: declared sample count. The rest: sample payload.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let length = u16::from_le_bytes([data[0], data[1]]) as usize;
    let header = IqHeader { sample_rate: 1.0, length };
    if let Ok(samples) = decode_iq_samples(&data[2..], &header) {
        assert_eq!(samples.len(), length);
        assert_eq!(encode_iq_samples(&samples), &data[2..]);
    }
});
