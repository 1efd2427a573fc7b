//! Run configuration, CSV tables and raw I/Q files.

pub mod config;
pub mod csv;
pub mod iq;
pub mod run;

pub use config::{
    parse_config_str, AuxKind, ConfigEntry, RunConfig, TheoryKind, FORMAT_VERSION, PRESETS,
};
pub use csv::{parse_csv_table, Cell, Column, CsvTable};
pub use iq::{decode_iq_samples, parse_iq_header, read_iq, write_iq, IqHeader};
pub use run::{run_command, verify_table, Command, Verification};
