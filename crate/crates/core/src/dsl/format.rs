use std::fmt::Write;

use super::{Block, Program, Statement};

/// Shortest decimal text that parses back to exactly `v`.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_draw(out: &mut String, s: &Statement) {
    out.push_str("(draw ");
    out.push_str(&s.name);
    for p in &s.params {
        out.push(' ');
        out.push_str(&format_real(*p));
    }
    out.push(')');
}

fn write_body(out: &mut String, body: &[Statement]) {
    for s in body {
        out.push_str("\n    ");
        write_draw(out, s);
    }
}

/// Renders a program in the canonical layout: one block per line.
pub fn format_program(p: &Program) -> String {
    if p.blocks.is_empty() {
        return "(program)".to_string();
    }
    let mut out = String::from("(program");
    for block in &p.blocks {
        out.push_str("\n  (block ");
        match block {
            Block::Single(s) => write_draw(&mut out, s),
            Block::TranslationFor { count, delta, body } => {
                let _ = write!(
                    out,
                    "(for {count} trans {} {} {}",
                    format_real(delta[0]),
                    format_real(delta[1]),
                    format_real(delta[2])
                );
                write_body(&mut out, body);
                out.push(')');
            }
            Block::RotationFor { count, body } => {
                let _ = write!(out, "(for {count} rot");
                write_body(&mut out, body);
                out.push(')');
            }
        }
        out.push(')');
    }
    out.push(')');
    out
}
