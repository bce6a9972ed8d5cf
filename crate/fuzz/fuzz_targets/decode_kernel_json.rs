#![no_main]

use libfuzzer_sys::fuzz_target;

use dergreen::cli::{decode_kernel_json, encode_kernel_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(k) = decode_kernel_json(text) else { return };
    let back = decode_kernel_json(&encode_kernel_json(&k)).expect("encoded kernel must decode");
    assert_eq!(back, k);
    let t = k.half_width();
    for (x, y) in [(0.0, 0.0), (t, -t), (-t / 3.0, t / 2.0)] {
        let _ = k.eval(x, y);
    }
});
