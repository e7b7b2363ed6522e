//! Trial-set ingestion and generation: the ETS container, CSV import and the
//! seeded synthetic generator.

mod csv_import;
pub mod ets;
pub mod synth;

pub use csv_import::import_csv;
pub use ets::{fingerprint, read_ets, read_ets_file, write_ets, write_ets_file, EtsHeader};
pub use synth::{synth, SynthSpec};
