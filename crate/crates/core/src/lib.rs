//! Grounding and solving for the logics PS and PS+.
//!
//! A data-program pair is parsed ([`parser`]), validated ([`ast::validate`]),
//! grounded and simplified to a propositional core ([`grounder`]), and then
//! solved natively ([`solver`]) or exported as CNF ([`dimacs`]).
//!
//! ```
//! use psplus::{parser, solver, DataProgramPair};
//!
//! let data = parser::parse_data("vtx(1..3). edge(1,2). edge(2,3). edge(1,3). color(1..3).").unwrap();
//! let program = parser::parse_program(psplus::bench::encoding(psplus::bench::Encoding::ColoringCard)).unwrap();
//! let core = psplus::core_of(&DataProgramPair::new(data, program)).unwrap();
//! let mut count = 0;
//! solver::solve(&core, &solver::SolveOptions::default(), |_| {
//!     count += 1;
//!     true
//! });
//! assert_eq!(count, 6);
//! ```

pub mod ast;
pub mod bench;
pub mod dimacs;
pub mod grounder;
pub mod parser;
pub mod solver;
pub mod theory;
pub mod translate;

pub use ast::{Bindings, DataProgramPair};
pub use theory::GroundTheory;

use thiserror::Error;

/// Any error the pipeline can report. [`Error::code`] gives the stable
/// diagnostic code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] parser::ParseError),
    #[error(transparent)]
    Binding(#[from] parser::BindingError),
    #[error(transparent)]
    Validation(#[from] ast::ValidationError),
    #[error(transparent)]
    Ground(#[from] grounder::GroundError),
    #[error(transparent)]
    Core(#[from] theory::CoreFormatError),
    #[error(transparent)]
    Dimacs(#[from] dimacs::DimacsError),
    #[error(transparent)]
    Translate(#[from] translate::TranslateError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(e) => e.code(),
            Error::Binding(e) => e.code(),
            Error::Validation(e) => e.code(),
            Error::Ground(e) => e.code(),
            Error::Core(_) => "E_CORE_FORMAT",
            Error::Dimacs(e) => e.code(),
            Error::Translate(e) => e.code(),
            Error::Bench(e) => e.code(),
        }
    }
}

/// Validates, grounds and simplifies a pair.
pub fn core_of(pair: &DataProgramPair) -> Result<GroundTheory, Error> {
    let validated = ast::validate(pair)?;
    let raw = grounder::ground_pair(&validated)?;
    Ok(grounder::simplify_to_core(&raw)?)
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/grounding.md")]
    mod grounding {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/translation.md")]
    mod translation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
