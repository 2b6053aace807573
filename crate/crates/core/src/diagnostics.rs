//! Diagnostics shared by the parser, validator, and engine.

use thiserror::Error;

/// Source position, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Fatal problems found while reading or preparing a program.
#[derive(Debug, Error, Clone)]
pub enum Diagnostic {
    /// Lexical or grammatical error at a source position.
    #[error("syntax error at {span}: {message}")]
    Syntax { span: Span, message: String },

    /// A link name occurs more often than its position permits.
    #[error("link condition violated {place}: link {link} occurs {count} times ({detail})")]
    LinkCondition {
        link: String,
        count: usize,
        place: String,
        detail: String,
    },

    /// A process context occurs somewhere it may not.
    #[error("context placement error {place}: {message}")]
    ContextPlacement { place: String, message: String },

    /// A link or context crosses between differently quantified templates.
    #[error("quantifier scope error {place}: {name} occurs both {first} and {second}")]
    QuantifierScope {
        name: String,
        place: String,
        first: String,
        second: String,
    },

    /// A cardinality quantifier whose template can never anchor a replica.
    #[error("vacuous quantifier {place}: template under {quantifier} contains no atom or membrane")]
    VacuousQuantifier { quantifier: String, place: String },

    /// Quantifiers and contexts are rule-side syntax only.
    #[error("initial process at {span} may not contain {what}")]
    NotGround { span: Span, what: String },

    /// Internal consistency failure; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

/// Non-fatal observations reported alongside successful loads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// One label names cardinality groups with different ranges or kinds.
    /// Such occurrences form distinct groups and never unroll together.
    MixedLabelGroups { label: String, place: String },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::MixedLabelGroups { label, place } => write!(
                f,
                "warning: label {label} {place} marks groups with different kinds or ranges; they are unrolled independently"
            ),
        }
    }
}
