//! Two-frame projective analysis of rigid point bodies under perspective
//! projection with unknown, varying camera geometry.
//!
//! From seven point correspondences between two frames, the projection of
//! frame 1's focal point onto frame 2 can be constructed ([`focal`]); every
//! further point is then confined to a predictable line in frame 2
//! ([`epipolar`]), which makes the extra measurements redundant for
//! structure/motion but usable for correspondence matching and rigid-body
//! membership tests ([`matching`]). A degrees-of-freedom ledger ([`dof`])
//! accounts for five camera-knowledge regimes, and an exact synthetic-scene
//! engine ([`scene`]) provides the ground truth everything is tested against,
//! including the one-parameter families of distinct bodies that reproduce
//! both frames exactly.

pub mod dof;
pub mod epipolar;
pub mod error;
pub mod focal;
pub mod frame;
pub mod geometry;
pub mod matching;
pub mod poly;
pub mod scene;
pub mod transfer;

pub use error::{Error, Result};
pub use frame::LabeledFrame;
pub use geometry::{Line2, Point2, Point3};
