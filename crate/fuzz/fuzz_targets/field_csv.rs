#![no_main]

use std::sync::{Arc, OnceLock};

use libfuzzer_sys::fuzz_target;
use obstacle_liouville::grid::Grid2D;
use obstacle_liouville::io::{read_field_csv, write_field_csv};

fn grid() -> &'static Arc<Grid2D> {
    static GRID: OnceLock<Arc<Grid2D>> = OnceLock::new();
    GRID.get_or_init(|| Arc::new(Grid2D::new(1.0, 4).unwrap()))
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = read_field_csv(text, grid(), 0.0) {
        // Whatever parses must survive a write and re-read unchanged.
        let again = write_field_csv(&field).unwrap();
        let back = read_field_csv(&again, grid(), 0.0).unwrap();
        assert_eq!(field.values(), back.values());
    }
});
