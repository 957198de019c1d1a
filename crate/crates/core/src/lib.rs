pub mod arrangement;
pub mod bounds;
pub mod constructions;
pub mod geometry;
pub mod homotopy;
pub mod interface;
