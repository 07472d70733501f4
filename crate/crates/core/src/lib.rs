//! Period towers for free Burnside groups.
//!
//! Builds the groups `B(i-1) = <a_1..a_m | A_1^n, ..., A_{i-1}^n>` where each
//! period `A_i` is the shortlex-least word of infinite order in the previous
//! group, deciding element orders soundly with coset enumeration, rewriting and
//! abelian certificates for finite-index subgroups.

pub mod cosets;
pub mod dihedral;
pub mod oracle;
pub mod presentation;
pub mod rewrite;
pub mod subgrp;
pub mod tower;
pub mod words;

pub use presentation::{Presentation, TowerState, TowerStatus};
pub use words::{Generator, Word};
