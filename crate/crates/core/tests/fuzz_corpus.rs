//! Replays the fuzz corpus seeds through the fuzz targets' invariants.

use std::path::PathBuf;

use dergreen::cli::{decode_kernel_json, encode_kernel_json, parse_problem, parse_rhs};
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn check_problem(data: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(data) else { return false };
    let Ok(pf) = parse_problem(text) else { return false };
    assert_eq!(parse_problem(&pf.to_string()).unwrap(), pf);
    let _ = pf.to_problem();
    true
}

fn check_rhs(data: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(data) else { return false };
    let Ok(e) = parse_rhs(text) else { return false };
    assert_eq!(parse_rhs(&e.to_string()).unwrap(), e);
    let _ = e.to_exppoly().eval(0.5);
    true
}

fn check_kernel(data: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(data) else { return false };
    let Ok(k) = decode_kernel_json(text) else { return false };
    assert_eq!(decode_kernel_json(&encode_kernel_json(&k)).unwrap(), k);
    let t = k.half_width();
    for (x, y) in [(0.0, 0.0), (t, -t), (-t / 3.0, t / 2.0)] {
        let _ = k.eval(x, y);
    }
    true
}

#[test]
fn problem_seeds() {
    let accepted = seeds("parse_problem").iter().filter(|(_, d)| check_problem(d)).count();
    assert_eq!(accepted, 4);
}

#[test]
fn rhs_seeds() {
    let accepted = seeds("parse_rhs").iter().filter(|(_, d)| check_rhs(d)).count();
    assert_eq!(accepted, 3);
}

#[test]
fn kernel_seeds() {
    for (p, d) in seeds("decode_kernel_json") {
        assert!(check_kernel(&d), "{}", p.display());
    }
}

proptest! {
    #[test]
    fn arbitrary_rhs_text(s in "[-+*^()0-9a-z. ]{0,40}") {
        check_rhs(s.as_bytes());
    }

    #[test]
    fn arbitrary_kernel_bytes(d in prop::collection::vec(any::<u8>(), 0..200)) {
        check_kernel(&d);
    }

    #[test]
    fn mutated_kernel_seed(pos in 0usize..142, byte in any::<u8>()) {
        let mut d = br#"{"half_width": 1.0, "pieces": [{"region": [], "terms": [{"exp_t": [0.0, 1.0], "exp_s": [-1.0, 0.0], "coeffs": [[[1.0, 0.0], [0.0, 2.0]]]}]}]}"#.to_vec();
        let at = pos % d.len();
        d[at] = byte;
        check_kernel(&d);
    }
}
