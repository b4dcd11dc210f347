//! Nonexpansive dynamics: orbits, translation numbers, Denjoy–Wolff limits,
//! spectral certificates and CAT(0) tracking.

mod cat0;
mod certificate;
mod extremal;
mod maps;
pub mod mobius;
mod orbit;

pub use cat0::{circumcenter, fixed_point_bounded_orbit, geodesic_tracking, FixedPointResult, Tracking};
pub use certificate::{
    default_candidates, limit_set_dualstar_check, spectral_certificate, LimitSetReport, SpectralCertificate,
    SpectralOutcome,
};
pub use extremal::{extremal_length_spectrum, ExtremalSpectrum};
pub use maps::{MapSpec, NonexpansiveMap};
pub use orbit::{
    denjoy_wolff, horoball_drift, iterate, minimal_displacement, translation_number, DenjoyWolff, Displacement,
    OrbitRecord, TauBracket,
};
