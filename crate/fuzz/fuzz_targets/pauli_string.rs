#![no_main]

use libfuzzer_sys::fuzz_target;
use vbqc_core::PauliString;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = text.parse::<PauliString>() {
        let again: PauliString = s.to_string().parse().expect("printed string reparses");
        assert_eq!(again, s);
    }
});
