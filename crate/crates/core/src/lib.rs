//! Numerical workbench for the generalized McMullen family
//! `R(z) = z^n + a/z^n + b` and its subfamily with a fixed critical point.

pub mod cmath;
pub mod dynamics;
pub mod geometry;
pub mod maps;
pub mod palette;
pub mod regions;
pub mod render;
pub mod verify;

pub use num_complex::Complex64;
