//! Discrete-group constructions: reflection groups, bending, polygons, word balls and Lie-algebra closures.

pub mod bending;
pub mod coxeter;
pub mod lie;
pub mod polygon;
pub mod words;
