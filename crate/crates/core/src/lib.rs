//! Fabry-Perot design toolkit for metal-coated semiconductor nanocylinder
//! cavities: guided-mode solver, interface coefficients, Purcell factor and
//! extraction efficiency, resonant-geometry design, and entangled-pair
//! fidelity for off-axis emitters.

pub mod entangle;
pub mod fpcavity;
pub mod interfaces;
pub mod materials;
pub mod modesolver;
pub mod special;

pub use num_complex::Complex64;
