#![no_main]

use libfuzzer_sys::fuzz_target;
use obstacle_liouville::io::{raster_from_pgm, read_pgm};

fuzz_target!(|data: &[u8]| {
    if read_pgm(data).is_ok() {
        let _ = raster_from_pgm(data, 1.0);
    }
});
