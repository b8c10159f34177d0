//! Root data, c-functions, spherical expansions and quadrature oracles for
//! non-compactly causal symmetric spaces.
//!
//! The crate is organised in two layers that deliberately do not share code
//! paths:
//!
//! * **closed forms** — exact rational root data ([`roots`], [`catalog`]),
//!   Gamma/Beta products with explicit pole bookkeeping ([`special`],
//!   [`cfun`]), and Harish-Chandra series expansions ([`spherical`]);
//! * **oracles** — explicit matrix decompositions ([`matgeom`]) driven by
//!   direct numerical quadrature ([`oracle`]) that recompute the same
//!   quantities from their integral definitions, sharing nothing with the
//!   closed forms beyond the root data themselves.
//!
//! Every identity the closed forms rely on can therefore be checked against
//! an independent computation; the `verify` subcommand of the companion CLI
//! and the crate's acceptance tests do exactly that.
//!
//! The crate is `no_std`-compatible (with `alloc`) when built without the
//! default `std` feature; all floating-point transcendentals are routed
//! through `libm` in that configuration.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod catalog;
pub mod cfun;
pub mod matgeom;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod special;
pub mod spherical;
