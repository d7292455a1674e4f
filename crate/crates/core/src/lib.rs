//! Evolutionary game between AI content creators and users who may consult
//! media outlets before trusting a creator.

pub mod abm;
pub mod cli;
pub mod equilibria;
pub mod error;
pub mod io;
pub mod params;
pub mod payoff;
pub mod render;
pub mod replicator;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{CreatorStrategy, GameParams, ParamName, UserStrategy};
pub use payoff::PopulationState;
