//! Classification engine and verification oracle for the 3x3 characteristic
//! matrices of finite p-groups G with d(G) = 3, Phi(G) <= Z(G) and
//! G' isomorphic to C_p^3.
//!
//! The crate has two independent halves that check each other:
//!
//! * the matrix side ([`pair`], [`action`], [`classify`], [`invariants`]):
//!   canonical forms under (sub-)congruence and the masked isomorphism
//!   action, constructive classification to labeled families, and the
//!   subgroup-index invariants read off matrices;
//! * the group side ([`group`]): concrete groups built from a matrix, with
//!   normal-form arithmetic, subgroup enumeration and brute-force
//!   isomorphism, used as the ground truth the matrix side is validated
//!   against.

pub mod action;
pub mod classify;
pub mod error;
pub mod family;
pub mod field;
pub mod group;
pub mod invariants;
pub mod mat;
pub mod pair;
pub mod report;

pub use action::{apply, case_tag, CaseTag, CharMatrix, ExponentType, IsoTransform};
pub use error::{Error, Result};
pub use family::{FamilyLabel, FamilyParams, Series};
pub use field::{Fp, PrimeContext};
pub use mat::{Mat2, Mat3};
pub use pair::{canonical_pair, PairLabel, PairRelation};
