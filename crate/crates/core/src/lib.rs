//! Identity-term annotation and augmentation engine.
//!
//! The crate is organised around an identity [`lexicon`]: text is tokenized
//! by [`text`], matched and disambiguated by [`annotate`], varied by
//! [`counterfactual`] using the geometry in [`embed`], and scored by
//! [`metrics`]. [`debias`] ties these together for dataset rebalancing and
//! synthetic probe generation.

pub mod annotate;
pub mod counterfactual;
pub mod debias;
pub mod embed;
pub mod error;
pub mod lexicon;
pub mod metrics;
pub mod text;

pub use error::{Error, ErrorKind, Result};
