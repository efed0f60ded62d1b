//! Workbench for finite creatures: partial orders with a coded
//! unique-minimal-upper-bound function, the gadget coding of binary
//! relations, the finite simulation of the forcing step that realises the
//! coded function as an order, amalgamation of creatures and first-order
//! definability of monotone maps.

pub mod amalgam;
pub mod audit;
pub mod builder;
pub mod coder;
pub mod corpus;
pub mod creature;
pub mod error;
pub mod format;
pub mod logic;
pub mod order;

pub use error::{Error, Result};
