#![no_main]

use libfuzzer_sys::fuzz_target;

use dergreen::cli::parse_problem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pf) = parse_problem(text) else { return };
    let again = parse_problem(&pf.to_string()).expect("printed problem must parse");
    assert_eq!(again, pf);
    let _ = pf.to_problem();
});
