//! Geometric progressions `{a Q^i}` inside value sets of rational functions.
//!
//! The crate has three layers:
//!
//! * exact arithmetic: [`exactnum`], [`polynom`];
//! * elliptic curve machinery: [`ellcurve`], [`descent2`], [`ptsearch`], [`birat`];
//! * constructions and experiments: [`progressions`], [`lab`], [`store`].

pub mod birat;
pub mod descent2;
pub mod ellcurve;
pub mod exactnum;
pub mod polynom;
pub mod progressions;
pub mod ptsearch;
pub mod store;
pub mod lab;
