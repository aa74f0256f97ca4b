//! Exact and `p`-adic arithmetic for the cyclic, weakly ramified degree-`p`
//! extensions of an unramified `p`-adic field.
//!
//! The crate builds each extension from a Dwork exponential Kummer
//! generator, constructs its self-dual normal basis generator of the square
//! root of the inverse different, and verifies the resolvent, norm and
//! Galois Gauss sum identities that combine into the product formula
//! `N(alpha | chi) * tau*(chi - psi_2(chi)) = 1`.

pub mod cyclotomic;
pub mod error;
pub mod dwork;
pub mod extension;
pub mod gauss;
pub mod padic;
pub mod resolvent;
pub mod verify;

pub use cyclotomic::CycInt;
pub use error::{Error, Result};
pub use padic::{Level, PadicElem, Tower, TowerDesc, Val};
