//! Exact computations with fusion systems of finite groups: basic localities,
//! their kernel functors and filtrations, functor cohomology over exterior
//! quotients, and the synthesis of perfect localities on selfcentralizing
//! subgroups.

pub mod abelian;
pub mod basic_set;
pub mod cohomology;
pub mod error;
pub mod examples;
pub mod functor;
pub mod fusion;
pub mod group;
pub mod locality;
pub mod perfect;
pub mod perm;
pub mod smith;

pub use error::{Error, Result};
