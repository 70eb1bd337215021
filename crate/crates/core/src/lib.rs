pub mod canonize;
pub mod error;
pub mod exact;
pub mod group;
pub mod polyhedron;
pub mod predicates;
pub mod structures;
pub mod render;
pub mod io;
