//! Single-excitation decay dynamics of a one-dimensional atomic array coupled
//! to a waveguide.
//!
//! The crate covers the full chain from geometry to observables:
//!
//! * [`model`] builds chain geometries and the phased Dicke initial state,
//! * [`hamiltonian`] assembles the non-Hermitian effective Hamiltonian and
//!   splits its decay matrix into channels,
//! * [`dynamics`] evolves amplitudes in the Markovian limit and derives the
//!   excitation probabilities and the emitted-energy bookkeeping,
//! * [`spectral`] solves the frequency-resolved resolvent with the retarded
//!   exchange kernel and synthesizes the time evolution from it,
//! * [`emission`] turns resolvent slices into directional guided spectra,
//!   outgoing pulse profiles and an energy ledger,
//! * [`analytic`] holds the closed-form cavity reference model, mirror
//!   reflectance and the regime classifier.
//!
//! Units: rates are in units of the free-space decay rate `gamma` (so times
//! are in `1/gamma`), lengths are in units of the guided wavelength.

pub mod analytic;
pub mod dynamics;
pub mod emission;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod model;
pub mod spectral;

pub use num_complex::Complex64 as C64;

pub use analytic::{JcParams, RegimeReport};
pub use dynamics::{AmplitudeTrajectory, ProbabilitySeries};
pub use emission::{Direction, EmissionRecord, EmissionSpectrum, EnergyLedger, SpatialProfile};
pub use error::{Error, Result};
pub use hamiltonian::{DecayPartition, EffectiveHamiltonian};
pub use model::{AtomArray, ChainSpec, PhysParams, SegmentRole, SegmentSpec, StateVector};
pub use spectral::{ResolventSlice, ResolventSweep, SpectralGrid};
