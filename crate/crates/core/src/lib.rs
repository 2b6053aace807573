//! QLMNtal: hierarchical graph rewriting with quantifiers.
//!
//! Processes are multisets of atoms and nested membranes wired by links;
//! rules rewrite them. Beyond plain rewriting, rule templates may carry
//! quantifiers: `l<z1,z2>T` matches between `z1` and `z2` copies of `T` at
//! once, `l<^>T` demands that no further copy remains, and the shorthands
//! `l<*>T` and `l<+>T` take all copies (at least one, for `<+>`). The
//! crate provides the syntax ([`syntax`]), structural congruence with
//! canonical forms ([`congruence`]), template matching ([`matcher`]), the
//! quantified rewrite relation ([`rewrite`]), and execution and state-space
//! exploration on top of it ([`engine`]).

pub mod congruence;
pub mod diagnostics;
pub mod engine;
pub mod matcher;
pub mod process;
pub mod rewrite;
pub mod syntax;
pub mod template;
