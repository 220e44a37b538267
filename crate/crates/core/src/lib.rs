//! Finite, exhaustive checks for Waldhausen and Segal K-theory on small
//! Waldhausen categories, and for the natural comparison between them.

pub mod fincat;
pub mod report;
pub mod simplicial;
pub mod fixtures;
pub mod wald;
pub mod ecat;
pub mod sdot;
pub mod segal;
pub mod compare;
pub mod suite;
