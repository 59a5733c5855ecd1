//! Numerical envelopes of ω-plurisubharmonic functions.
//!
//! For a closed positive (1,1)-current ω = dd^c ψ with a global potential ψ and an
//! ω-upper-semicontinuous obstacle φ, the largest ω-psh minorant of φ at a point x
//! can be approached from two sides:
//!
//! * from above, as the infimum of the Poisson disc functional
//!   `H(f) = -R_{f*ω}(0) + ∫_T φ∘f dσ` over closed analytic discs with `f(0) = x`
//!   ([`envelope`]);
//! * from below, as a Perron-type supremum computed on a grid ([`oracle`]).
//!
//! The crate is `no_std` (with `alloc`). All transcendental functions go through
//! `libm`, so results do not depend on whether the `std` feature is enabled.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod disc;
pub mod domain;
pub mod envelope;
pub mod ext;
pub mod extremal;
pub(crate) mod math;
pub mod obstacle;
pub mod oracle;
pub mod poly;
pub mod potential;
pub mod rng;
pub mod roots;
pub mod search;

pub use disc::{
    blaschke_finite, disc_in_domain, eval_disc, poisson_functional, pullback_atoms, riesz_direct,
    riesz_fast, DiscError, DiscParams, PullbackAtoms, Quadrature, QuadratureError, QuadratureParams,
    RieszEstimate,
};
pub use domain::{contains, green_disc, CPoint, Domain, GreenError, C64};
pub use envelope::{
    envelope_at, envelope_near_singular, EnvelopeError, EnvelopeResult, LadderRung, OptBudget,
    Scenario, ScenarioError,
};
pub use ext::ExtReal;
pub use extremal::{
    hull_membership, relative_extremal_disc, relative_extremal_oracle, replay_certificate,
    CompactSpec, HullCertificate, HullDecision, HullRung, HullVerdict,
};
pub use obstacle::{eval_obstacle, IndicatorSet, LogAffine, Obstacle, SquareModulusTerm};
pub use oracle::{
    biconjugate, check_subaverage, sup_side_1d, sup_side_toric, GridField, GridGeometry, GridKind,
    GridNode, OracleError, PlanarObstacleProblem, SubaverageReport,
};
pub use potential::{eval_potential, Atom, Monomial, Polynomial, PotentialSpec, SmoothPart};
pub use search::{local_search, SearchOptions, SearchOutcome, Termination};
