//! Two-state discrete-time quantum walks on the integer lattice with
//! position-dependent coins, and the spectral machinery to detect
//! perfect-reflection ("edge") defects through eigenvalues embedded in the
//! interior of the essential spectrum.
//!
//! The walk operator is U = SC: a 2x2 unitary coin C(x) acts on the spinor
//! at every site, then the shift S moves component 0 one site left and
//! component 1 one site right. For a translation-invariant coin the
//! spectrum of U is purely essential and fills two symmetric arcs of the
//! unit circle; a coin that degenerates to an anti-diagonal reflection on a
//! finite set of sites decouples the lattice and pins exact, compactly
//! supported eigenfunctions at phases determined solely by the reflection
//! phase. Detecting those eigenvalues inside the bands is the point of this
//! crate.
//!
//! Module layout:
//! - [`lattice`]: windows, states, coins, coin fields, the walk step and
//!   time evolution under padded / periodic / truncating boundaries.
//! - [`symbol`]: momentum-space symbol of the bulk walk, dispersion
//!   relation, band arcs and thresholds, level sets, quasi-modes.
//! - [`spectra`]: dense truncations of U, eigendecomposition, localization
//!   measure and spectral classification.
//! - [`defects`]: exact defect eigenfunctions, compact-kernel extraction,
//!   and the two defect-detection strategies.

pub mod defects;
pub mod error;
pub mod lattice;
pub mod spectra;
pub mod symbol;

pub use error::{Error, Result};
