pub mod bench;
pub mod plot;
pub mod simulate;
pub mod train;
