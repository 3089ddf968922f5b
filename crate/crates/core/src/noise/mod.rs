pub mod bank;
pub mod gram;
pub mod seed;

pub use bank::{Channel, ModeDriverBank, ModeState, DUMP_RECORD_BYTES};
pub use seed::{seed_derive, stream, Label};
