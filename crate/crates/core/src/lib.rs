pub mod cell_models;
pub mod complex;
pub mod homology;
pub mod io;
pub mod samples;
pub mod table_gen;
pub mod thinning;
pub mod verify;
