#![no_main]

use libfuzzer_sys::fuzz_target;
use obstacle_liouville::io::read_radial_table;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_radial_table(text);
    }
});
