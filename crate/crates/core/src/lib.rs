pub mod exactalg;
pub mod cohomology;
pub mod nodalcurve;
pub mod family;
pub mod blowup;
pub mod config;
pub mod extension;
pub mod selftest;
pub mod cli;
