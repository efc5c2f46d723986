#![no_main]

use libfuzzer_sys::fuzz_target;
use vbqc_core::LocalHamiltonian;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = LocalHamiltonian::from_json(text) {
        let again = LocalHamiltonian::from_json(&h.to_json().to_string()).expect("exported JSON reparses");
        assert_eq!(again.terms(), h.terms());
    }
});
