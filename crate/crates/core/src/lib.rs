//! Fixed-point engine for concentrated circular and superelliptical market
//! makers: invariants, Cartesian and polar swaps, angle ticks, liquidity
//! fingerprints and tick-based hedges.

pub mod error;
pub mod fingerprint;
pub mod hedge;
pub mod invariant;
pub mod numerics;
pub mod polar;
pub mod pool;
pub mod swap_cartesian;
pub mod ticks;

pub use error::{AmmError, Result};
pub use invariant::{CurveMode, CurveParams, PoolState};
pub use numerics::{fd, FixedDecimal};
pub use pool::{PoolFile, Route};
pub use swap_cartesian::SwapQuote;
