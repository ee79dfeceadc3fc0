//! Replays the checked-in fuzz seeds through the parsers on stable.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use obstacle_liouville::grid::Grid2D;
use obstacle_liouville::io::{
    parse_config, raster_from_pgm, read_field_csv, read_pgm, read_radial_table, read_reaction_table,
};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<Vec<u8>> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| fs::read(entry.unwrap().path()).unwrap())
        .collect();
    assert!(!out.is_empty(), "no seeds for {target}");
    out.sort();
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn config_seeds() {
    let outcomes: Vec<bool> = seeds("config")
        .iter()
        .map(|s| parse_config(text(s), None).is_ok())
        .collect();
    // Seeds that name files on disk fail without a base directory.
    assert!(outcomes.iter().any(|ok| *ok));
    assert!(outcomes.iter().any(|ok| !*ok));
}

#[test]
fn pgm_seeds_parse() {
    for s in seeds("pgm") {
        let map = read_pgm(&s).unwrap();
        assert_eq!(raster_from_pgm(&s, 1.0).is_ok(), map.width == map.height);
    }
}

#[test]
fn table_seeds_parse() {
    for s in seeds("radial_table") {
        read_radial_table(text(&s)).unwrap();
    }
    for s in seeds("reaction_table") {
        read_reaction_table(text(&s)).unwrap();
    }
    let grid = Arc::new(Grid2D::new(1.0, 4).unwrap());
    for s in seeds("field_csv") {
        let _ = read_field_csv(text(&s), &grid, 0.0);
    }
}
