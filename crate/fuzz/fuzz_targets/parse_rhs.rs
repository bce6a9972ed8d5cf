#![no_main]

use libfuzzer_sys::fuzz_target;

use dergreen::cli::parse_rhs;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(e) = parse_rhs(text) else { return };
    assert_eq!(parse_rhs(&e.to_string()).as_ref(), Ok(&e));
    let p = e.to_exppoly();
    let _ = p.eval(0.5);
});
