#![no_std]
#![doc = include_str!("../README.md")]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod fft;
pub mod interp;
pub mod kernel;
pub mod lattice;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{build_kernel, Kernel, KernelClass, KernelSpec, Regime, ScalingClass};
pub use lattice::{LatticeField, PeriodicLattice, Sign};
