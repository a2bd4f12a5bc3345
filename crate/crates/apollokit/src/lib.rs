//! Exact arithmetic for Descartes configurations of tangent spheres in n
//! dimensions: the quadratic forms that govern them, the Apollonian and dual
//! Apollonian groups acting on them, orbit generation, rational equivalence
//! of the forms, and the Möbius action on curvature-center coordinates.
//!
//! All group-theoretic and arithmetic computations run over exact rationals;
//! floating point appears only where the geometry itself is irrational
//! (sphere centers of simplex seeds, dual-sphere curvatures, eigenvalue
//! checks) and is clearly marked at the type level.

pub mod arith;
pub mod cli;
pub mod configs;
pub mod ensembles;
pub mod exactq;
pub mod forms;
pub mod groups;
pub mod moebius;
pub mod spheres;


pub use configs::DescartesConfig;
pub use exactq::{Rational, RationalMatrix};
pub use forms::QuadraticForm;
pub use groups::Word;
pub use spheres::{AccVector, OrientedSphere};

