//! Exact symbolic computations with Lie infinity-algebroids over polynomial
//! rings with rational coefficients.

pub mod chain;
pub mod families;
pub mod io;
pub mod linalg;
pub mod morphisms;
pub mod oid;
pub mod pages;
pub mod polyring;
pub mod symwords;
