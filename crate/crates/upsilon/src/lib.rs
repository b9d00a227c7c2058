//! Toolkit for infinitely divisible distributions on R^d (d <= 3):
//! stochastic-integral mappings acting on generating triplets, numerical
//! class-membership tests (B, L, M, T, E_alpha), the correspondence between
//! mixing measures Q and monotone integrands h, and a seeded compound
//! Poisson engine that checks every identity by Monte Carlo against
//! quadrature.
//!
//! Modules follow the pipeline: [`triplet`] holds the domain types and the
//! Levy-Khintchine cumulant, [`numerics`] the quadrature and special
//! functions, [`mappings`] the kernel transforms, [`classes`] the membership
//! tests, [`qrep`] the mixing-measure machinery, [`simulate`] the Monte
//! Carlo engine, [`verify`] the named verification suites, and [`schema`]
//! the JSON wire formats.
//!
//! ```
//! use upsilon::classes::{is_member_e_alpha, DEFAULT_CM_TOL};
//! use upsilon::mappings::{transform_triplet, Kernel, KernelKind};
//! use upsilon::qrep::{h_from_q, tail_identity_check};
//! use upsilon::triplet::{GeneratingTriplet, LevyMeasure, MixingMeasure, RadialMeasure};
//!
//! // the unit-jump compound Poisson law, mapped through the alpha = 2 kernel
//! let mu = GeneratingTriplet::compound_poisson_1d(
//!     LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0)),
//! )?;
//! let kernel = Kernel::new(KernelKind::EAlpha(2.0))?;
//! let mapped = transform_triplet(&kernel, &mu)?;
//!
//! // the image lands in the class it should, with an explicit certificate
//! assert!(is_member_e_alpha(mapped.levy(), 2.0, DEFAULT_CM_TOL)?.passed());
//!
//! // mixing measure -> integrand, and the tail identity that ties them
//! let q = MixingMeasure::dirac(1.0, 1.0);
//! let h = h_from_q(&q, 2.0)?;
//! let err = tail_identity_check(&q, &h, 2.0, &[0.5, 1.0, 2.0])?;
//! assert!(err < 1e-10);
//! # Ok::<(), upsilon::Error>(())
//! ```

pub mod classes;
pub mod error;
pub mod expr;
pub mod mappings;
pub mod numerics;
pub mod qrep;
pub mod schema;
pub mod simulate;
pub mod triplet;
pub mod verify;

pub use error::{Error, Result};
