//! Exact-arithmetic tools for Diophantine approximation.

pub mod apery;
pub mod certify;
pub mod constants;
pub mod contfrac;
pub mod csvio;
pub mod enclosure;
pub mod error;
pub mod farey;
mod fixed;
pub mod log;
pub mod multiform;
pub mod oracle;
pub mod orbit;
pub mod rational;
pub mod seq;
pub mod suite;
pub mod verify;

pub use certify::Certifier;
pub use constants::Constant;
pub use enclosure::Enclosure;
pub use error::{Error, ErrorClass, Result};
pub use oracle::{CfSpec, RealOracle};

// Every chapter of the guide compiles and runs as a doc-test.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/continued-fractions.md")]
    mod continued_fractions {}
    #[doc = include_str!("../../../book/src/two-case-search.md")]
    mod two_case_search {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/linear-forms.md")]
    mod linear_forms {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
