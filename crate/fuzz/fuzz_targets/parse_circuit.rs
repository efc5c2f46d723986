#![no_main]

use libfuzzer_sys::fuzz_target;
use vbqc_core::parse_circuit;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_circuit(text, "fuzz") {
        let again = parse_circuit(&c.to_text(), "fuzz").expect("printed circuit reparses");
        assert_eq!(again.num_qubits(), c.num_qubits());
        assert_eq!(again.depth(), c.depth());
    }
});
