//! A Prolog with a predicate-based module system.
//!
//! Programs are read by [`reader`], loaded into a [`moduledb::Database`],
//! optionally rewritten by [`expander`] and [`specializer`], and run by
//! [`engine::Engine`] under either meaning of `:/2`.

pub mod bench;
pub mod cli;
pub mod engine;
pub mod error;
pub mod expander;
pub mod lint;
pub mod moduledb;
pub mod reader;
pub mod reflect;
pub mod specializer;
pub mod term;

pub use engine::{Engine, Flags, Solution};
pub use error::{EngineError, LoadError, SyntaxError};
pub use expander::SemanticsFlag;
pub use moduledb::Database;
pub use term::{Atom, Indicator, Term};
