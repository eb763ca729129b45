pub mod ablate;
pub mod evaluate;
pub mod gallery;
pub mod simulate;
pub mod train;
