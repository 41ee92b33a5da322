use std::fmt;

use serde::Serialize;

use super::{Archetype, Block, Program, Statement, StatementRegistry};
use crate::lowering::DEGENERATE_LINE_EPS;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    UnknownStatement(String),
    ArityMismatch { expected: usize, got: usize },
    NonFiniteParameter(usize),
    NonPositiveSize(usize),
    DegenerateLine,
    NonPositiveLoopCount,
    EmptyLoopBody,
    NonFiniteLoopDelta,
}

/// A single validation finding, located by block and (where relevant)
/// statement index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub block: usize,
    pub statement: Option<usize>,
    pub kind: DiagnosticKind,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticKind::UnknownStatement(n) => write!(f, "unknown statement `{n}`"),
            DiagnosticKind::ArityMismatch { expected, got } => {
                write!(f, "arity mismatch: expected {expected} parameters, got {got}")
            }
            DiagnosticKind::NonFiniteParameter(i) => write!(f, "non-finite parameter {i}"),
            DiagnosticKind::NonPositiveSize(i) => write!(f, "non-positive size (parameter {i})"),
            DiagnosticKind::DegenerateLine => f.write_str("degenerate line"),
            DiagnosticKind::NonPositiveLoopCount => f.write_str("non-positive loop count"),
            DiagnosticKind::EmptyLoopBody => f.write_str("empty loop body"),
            DiagnosticKind::NonFiniteLoopDelta => f.write_str("non-finite loop delta"),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.statement {
            Some(s) => write!(f, "block {} statement {}: {}", self.block, s, self.kind),
            None => write!(f, "block {}: {}", self.block, self.kind),
        }
    }
}

fn check_statement(s: &Statement, registry: &StatementRegistry, mut emit: impl FnMut(DiagnosticKind)) {
    let Some(def) = registry.get(&s.name) else {
        emit(DiagnosticKind::UnknownStatement(s.name.clone()));
        return;
    };
    if def.arity() != s.params.len() {
        emit(DiagnosticKind::ArityMismatch {
            expected: def.arity(),
            got: s.params.len(),
        });
        return;
    }
    let mut finite = true;
    for (i, p) in s.params.iter().enumerate() {
        if !p.is_finite() {
            emit(DiagnosticKind::NonFiniteParameter(i));
            finite = false;
        }
    }
    if !finite {
        return;
    }
    for &i in def.archetype.size_slots() {
        if s.params[i] <= 0.0 {
            emit(DiagnosticKind::NonPositiveSize(i));
        }
    }
    if def.archetype == Archetype::LineCylinder {
        let p = &s.params;
        let len = ((p[3] - p[0]).powi(2) + (p[4] - p[1]).powi(2) + (p[5] - p[2]).powi(2)).sqrt();
        if len < DEGENERATE_LINE_EPS {
            emit(DiagnosticKind::DegenerateLine);
        }
    }
}

/// Checks every block and statement invariant plus the geometric
/// preconditions of lowering. An empty result means lowering will succeed.
pub fn validate_program(p: &Program, registry: &StatementRegistry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (b, block) in p.blocks.iter().enumerate() {
        let mut block_diag = |kind| {
            out.push(Diagnostic {
                block: b,
                statement: None,
                kind,
            })
        };
        match block {
            Block::Single(_) => {}
            Block::TranslationFor { count, delta, body } => {
                if *count == 0 {
                    block_diag(DiagnosticKind::NonPositiveLoopCount);
                }
                if delta.iter().any(|d| !d.is_finite()) {
                    block_diag(DiagnosticKind::NonFiniteLoopDelta);
                }
                if body.is_empty() {
                    block_diag(DiagnosticKind::EmptyLoopBody);
                }
            }
            Block::RotationFor { count, body } => {
                if *count == 0 {
                    block_diag(DiagnosticKind::NonPositiveLoopCount);
                }
                if body.is_empty() {
                    block_diag(DiagnosticKind::EmptyLoopBody);
                }
            }
        }
        for (j, s) in block.statements().iter().enumerate() {
            check_statement(s, registry, |kind| {
                out.push(Diagnostic {
                    block: b,
                    statement: Some(j),
                    kind,
                })
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(name: &str, params: Vec<f64>) -> Program {
        Program::new(vec![Block::Single(Statement::new(name, params))])
    }

    #[test]
    fn unit_cuboid_is_valid() {
        let p = single("cuboid", vec![0., 0., 0., 1., 1., 1., 0., 0., 0.]);
        assert!(validate_program(&p, &StatementRegistry::builtin()).is_empty());
    }

    #[test]
    fn degenerate_line() {
        let p = single("line", vec![1., 2., 3., 1., 2., 3., 0.1]);
        let d = validate_program(&p, &StatementRegistry::builtin());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind.to_string(), "degenerate line");
    }

    #[test]
    fn negative_extent() {
        let p = single("cuboid", vec![0., 0., 0., 1., -1., 1., 0., 0., 0.]);
        let d = validate_program(&p, &StatementRegistry::builtin());
        assert_eq!(d.len(), 1);
        assert!(d[0].kind.to_string().starts_with("non-positive size"));
    }

    #[test]
    fn structural_problems_are_reported() {
        let reg = StatementRegistry::builtin();
        let p = Program::new(vec![
            Block::RotationFor { count: 0, body: vec![] },
            Block::TranslationFor {
                count: 2,
                delta: [f64::NAN, 0., 0.],
                body: vec![Statement::new("nope", vec![]), Statement::new("line", vec![1.0])],
            },
            Block::Single(Statement::new("cylinder", vec![0., 0., 0., 1., 0., 0., 0., f64::INFINITY])),
        ]);
        let kinds: Vec<_> = validate_program(&p, &reg).into_iter().map(|d| d.kind).collect();
        assert_eq!(
            kinds,
            vec![
                DiagnosticKind::NonPositiveLoopCount,
                DiagnosticKind::EmptyLoopBody,
                DiagnosticKind::NonFiniteLoopDelta,
                DiagnosticKind::UnknownStatement("nope".into()),
                DiagnosticKind::ArityMismatch { expected: 7, got: 1 },
                DiagnosticKind::NonFiniteParameter(7),
            ]
        );
    }
}
