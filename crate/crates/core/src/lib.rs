//! Phase-space models of twin-beam and photon-subtracted states, with a
//! truncated Fock-space oracle and the Bell tests built on top of them.

pub mod bell;
pub mod error;
pub mod fock;
pub mod homodyne;
pub mod ips;
pub mod phase_space;
pub mod real;

pub use bell::{
    bell_b, bell_c, bell_general, maximize_bell, parity_expectation, BellResult, BellSettings, Family, Optimum,
    Parameterization, SearchBox, SweepRecord,
};
pub use error::{Error, Result};
pub use homodyne::{
    bell_s, monte_carlo_sign_correlation, quadrature_joint, sign_correlation, HomodyneAngles, HomodyneRecord,
    QuadratureJoint,
};
pub use ips::{click_probability, coefficient_table, ips_wigner, CoefficientRow, IpsParams};
pub use phase_space::{
    twb_wigner, vacuum_wigner, GaussianSumRecord, GaussianTerm, PhasePoint, TermRecord, TwbParams,
    TwoModeGaussianSum,
};
