//! Shape-program AST, the statement registry, and the textual grammar.
//!
//! ```text
//! program   := "(" "program" block* ")"
//! block     := "(" "block" item ")"
//! item      := draw | for
//! for       := "(" "for" INT ("trans" REAL REAL REAL | "rot") draw+ ")"
//! draw      := "(" "draw" IDENT REAL* ")"
//! ```

mod format;
mod parse;
mod registry;
mod validate;

pub use format::{format_program, format_real};
pub use parse::parse_program;
pub use registry::{Archetype, StatementDef, StatementRegistry};
pub use validate::{validate_program, Diagnostic, DiagnosticKind};

use serde::{Deserialize, Serialize};

/// A draw statement: a registered statement name and its positional reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statement {
    pub name: String,
    pub params: Vec<f64>,
}

impl Statement {
    pub fn new(name: impl Into<String>, params: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            params,
        }
    }
}

/// One program block: a lone draw statement or a loop over draw statements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Block {
    Single(Statement),
    TranslationFor {
        count: u32,
        delta: [f64; 3],
        body: Vec<Statement>,
    },
    /// `count` repetitions about the x-axis, `2π/count` apart.
    RotationFor { count: u32, body: Vec<Statement> },
}

impl Block {
    pub fn statements(&self) -> &[Statement] {
        match self {
            Block::Single(s) => std::slice::from_ref(s),
            Block::TranslationFor { body, .. } | Block::RotationFor { body, .. } => body,
        }
    }

    pub fn statements_mut(&mut self) -> &mut [Statement] {
        match self {
            Block::Single(s) => std::slice::from_mut(s),
            Block::TranslationFor { body, .. } | Block::RotationFor { body, .. } => body,
        }
    }

    /// Number of unrolled iterations.
    pub fn iterations(&self) -> u32 {
        match self {
            Block::Single(_) => 1,
            Block::TranslationFor { count, .. } | Block::RotationFor { count, .. } => *count,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub blocks: Vec<Block>,
}

impl Program {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_program(self))
    }
}
