#![no_main]

use libfuzzer_sys::fuzz_target;
use obstacle_liouville::io::read_reaction_table;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_reaction_table(text);
    }
});
