//! Circuit-QED simulation of a 1+1 dimensional Dirac particle.
//!
//! A driven qubit coupled to a resonator obeys, after two frame changes and a
//! rotating-wave approximation, the Dirac equation with the resonator
//! quadratures as position and momentum and the qubit as spinor. The crate
//! builds the Hamiltonians in every frame, propagates states, evaluates
//! observables and closed-form results, and runs the figure scenarios.

pub mod analytics;
pub mod check;
pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub mod linalg;
pub mod observables;
pub mod propagation;
pub mod scenarios;

pub use error::{Error, Result};
pub use hamiltonians::{AngleConvention, DiracParams, DriveParams, Hamiltonians};
pub use hilbert::{JointOps, Operator, QubitFieldState, SpinState, Truncation};
