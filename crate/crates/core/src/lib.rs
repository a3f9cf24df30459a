//! Coxeter systems, finite buildings and their self-twins, wall-connectedness
//! checks, matrix root-group data, and affine rank-3 certificates.

pub mod affine;
pub mod building;
pub mod coxeter;
pub mod error;
pub mod fq;
pub mod isometry;
pub mod paths;
pub mod report;
pub mod rgd;
pub mod twin;
pub mod zoo;

pub use coxeter::{CoxeterMatrix, CoxeterSystem, GenSet, Order, Root, WeylElement, WeylTable};
pub use error::{Error, Result};
