//! File formats: run configs, graymaps and CSV tables.

pub mod config;
pub mod pgm;
pub mod tables;

pub use config::{load_config, parse_config, ConfigFile, RunConfig};
pub use pgm::{field_to_pgm, raster_from_pgm, read_pgm, Graymap};
pub use tables::{
    read_field_csv, read_radial_table, read_reaction_table, write_field_csv, write_profile_csv,
};
