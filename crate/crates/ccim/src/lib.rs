//! Bit-accurate behavioral simulator of a hybrid digital/analog
//! compute-in-memory macro for 8b:8b complex multiply-accumulate.
//!
//! The macro stores complex weights once and evaluates the real and
//! imaginary outputs in parallel over eight units. Per real output, the
//! three largest partial products of each of the 16 product lanes go through
//! a digital counting path while the remainder sums in the charge domain on
//! 2D-weighted capacitor arrays and converts through a 7-bit SAR ADC; a
//! post-digital adder combines the two paths into one signed 8-bit code.
//!
//! * [`numfmt`] — signed-magnitude formats and partial-product partitioning
//! * [`dcim`] / [`acim2d`] / [`saradc`] — the two compute paths and the ADC
//! * [`cmacro`] — weight memory, unit integration, reference oracles
//! * [`wimage`] — weight-image file format
//! * [`metrology`] — transfer sweeps, RMS error, Monte Carlo mismatch curves
//! * [`costmodel`] — relative area/latency/power accounting
//! * [`doa`] — direction-of-arrival estimation demo
//! * [`runcfg`] — run configuration schema for the CLI
//! * [`selftest`] — oracle-equivalence checks behind the CLI selftest

pub mod acim2d;
pub mod cmacro;
pub mod costmodel;
pub mod dcim;
pub mod doa;
pub mod metrology;
pub mod numfmt;
pub mod runcfg;
pub mod saradc;
pub mod seeds;
pub mod selftest;
pub mod wimage;

pub use cmacro::{CimMacro, MacroConfig, MacroMode, MacroOutput, RowSelect, WeightMemory};
pub use numfmt::{BitPartition, Complex8, Smf8};
