use super::registry::is_identifier;
use super::{Block, Program, Statement, StatementRegistry};
use crate::error::{Error, ParseError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '(' | ')' => {
                chars.next();
                let tok = if c == '(' { Tok::Open } else { Tok::Close };
                out.push(Token { tok, line, column });
                column += 1;
            }
            _ => {
                let (l, col) = (line, column);
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                    column += 1;
                }
                out.push(Token {
                    tok: Tok::Atom(atom),
                    line: l,
                    column: col,
                });
            }
        }
    }
    out
}

/// `[+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?`
fn is_real_literal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    registry: &'a StatementRegistry,
    eof: (usize, usize),
}

impl<'a> Parser<'a> {
    fn syntax(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse(ParseError {
            line,
            column,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.column))
    }

    fn next(&mut self, what: &str) -> Result<Token> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.syntax(self.eof.0, self.eof.1, format!("unexpected end of input, expected {what}"))),
        }
    }

    fn expect_open(&mut self) -> Result<()> {
        let t = self.next("`(`")?;
        match t.tok {
            Tok::Open => Ok(()),
            _ => Err(self.syntax(t.line, t.column, "expected `(`")),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        let t = self.next("`)`")?;
        match t.tok {
            Tok::Close => Ok(()),
            Tok::Atom(a) => Err(self.syntax(t.line, t.column, format!("expected `)`, found `{a}`"))),
            Tok::Open => Err(self.syntax(t.line, t.column, "expected `)`, found `(`")),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.next(&format!("`{kw}`"))?;
        match t.tok {
            Tok::Atom(a) if a == kw => Ok(()),
            Tok::Atom(a) => Err(self.syntax(t.line, t.column, format!("expected `{kw}`, found `{a}`"))),
            _ => Err(self.syntax(t.line, t.column, format!("expected `{kw}`"))),
        }
    }

    fn at_close(&self) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Close, .. }))
    }

    fn real(&mut self) -> Result<f64> {
        let t = self.next("a number")?;
        match &t.tok {
            Tok::Atom(a) if is_real_literal(a) => a
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| self.syntax(t.line, t.column, format!("number `{a}` is out of range"))),
            Tok::Atom(a) => Err(self.syntax(t.line, t.column, format!("expected a number, found `{a}`"))),
            _ => Err(self.syntax(t.line, t.column, "expected a number")),
        }
    }

    fn program(&mut self) -> Result<Program> {
        self.expect_open()?;
        self.expect_keyword("program")?;
        let mut blocks = Vec::new();
        while !self.at_close() {
            blocks.push(self.block()?);
        }
        self.expect_close()?;
        if let Some(t) = self.peek() {
            return Err(self.syntax(t.line, t.column, "trailing input after program"));
        }
        Ok(Program { blocks })
    }

    fn block(&mut self) -> Result<Block> {
        self.expect_open()?;
        self.expect_keyword("block")?;
        self.expect_open()?;
        let (line, column) = self.here();
        let head = match self.next("`draw` or `for`")?.tok {
            Tok::Atom(a) => a,
            _ => return Err(self.syntax(line, column, "expected `draw` or `for`")),
        };
        let block = match head.as_str() {
            "draw" => Block::Single(self.draw_body(line, column)?),
            "for" => self.for_body()?,
            other => {
                return Err(self.syntax(line, column, format!("expected `draw` or `for`, found `{other}`")))
            }
        };
        self.expect_close()?;
        Ok(block)
    }

    fn for_body(&mut self) -> Result<Block> {
        let t = self.next("a loop count")?;
        let count = match &t.tok {
            Tok::Atom(a) => parse_count(a).ok_or_else(|| {
                self.syntax(t.line, t.column, format!("expected an integer loop count, found `{a}`"))
            })?,
            _ => return Err(self.syntax(t.line, t.column, "expected an integer loop count")),
        };
        if count <= 0 {
            return Err(Error::NonPositiveLoopCount {
                line: t.line,
                column: t.column,
            });
        }
        let count = u32::try_from(count)
            .map_err(|_| self.syntax(t.line, t.column, "loop count is too large"))?;

        let t = self.next("`trans` or `rot`")?;
        let delta = match &t.tok {
            Tok::Atom(a) if a == "trans" => Some([self.real()?, self.real()?, self.real()?]),
            Tok::Atom(a) if a == "rot" => None,
            _ => return Err(self.syntax(t.line, t.column, "expected `trans` or `rot`")),
        };

        let mut body = Vec::new();
        while !self.at_close() {
            self.expect_open()?;
            let (line, column) = self.here();
            self.expect_keyword("draw")?;
            body.push(self.draw_body(line, column)?);
        }
        if body.is_empty() {
            let (line, column) = self.here();
            return Err(self.syntax(line, column, "loop body needs at least one draw statement"));
        }
        self.expect_close()?;
        Ok(match delta {
            Some(delta) => Block::TranslationFor { count, delta, body },
            None => Block::RotationFor { count, body },
        })
    }

    /// Parses `IDENT REAL* ")"` after the `draw` keyword.
    fn draw_body(&mut self, line: usize, column: usize) -> Result<Statement> {
        let t = self.next("a statement name")?;
        let name = match t.tok {
            Tok::Atom(a) if is_identifier(&a) => a,
            _ => return Err(self.syntax(t.line, t.column, "expected a statement name")),
        };
        let mut params = Vec::new();
        while !self.at_close() {
            params.push(self.real()?);
        }
        self.expect_close()?;
        let def = self
            .registry
            .get(&name)
            .ok_or_else(|| Error::UnknownStatement {
                name: name.clone(),
                line: t.line,
                column: t.column,
            })?;
        if def.arity() != params.len() {
            return Err(Error::ArityMismatch {
                name,
                expected: def.arity(),
                got: params.len(),
                line,
                column,
            });
        }
        Ok(Statement { name, params })
    }
}

fn parse_count(s: &str) -> Option<i64> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<i64>().ok()
}

/// Parses program text against `registry`.
pub fn parse_program(text: &str, registry: &StatementRegistry) -> Result<Program> {
    let tokens = tokenize(text);
    let eof = text
        .lines()
        .enumerate()
        .last()
        .map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut parser = Parser {
        tokens,
        pos: 0,
        registry,
        eof,
    };
    parser.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> StatementRegistry {
        StatementRegistry::builtin()
    }

    #[test]
    fn minimal_program() {
        let p = parse_program("(program (block (draw cuboid 0 0 0 1 1 1 0 0 0)))", &reg()).unwrap();
        assert_eq!(p.blocks.len(), 1);
        match &p.blocks[0] {
            Block::Single(s) => {
                assert_eq!(s.name, "cuboid");
                assert_eq!(s.params, vec![0., 0., 0., 1., 1., 1., 0., 0., 0.]);
            }
            other => panic!("unexpected block {other:?}"),
        }
    }

    #[test]
    fn rotation_loop() {
        let p = parse_program("(program (block (for 4 rot (draw line 0 0 0 0 0 1 0.1))))", &reg()).unwrap();
        match &p.blocks[0] {
            Block::RotationFor { count, body } => {
                assert_eq!(*count, 4);
                assert_eq!(body.len(), 1);
                assert_eq!(body[0].name, "line");
            }
            other => panic!("unexpected block {other:?}"),
        }
    }

    #[test]
    fn translation_loop_with_comments_and_exponents() {
        let text = "; a comment\n(program\n  (block (for 3 trans 0 0 5e-1 ; step\n    (draw line 0 0 0 1E0 0 0 .1)\n    (draw cuboid 0 0 0 1 1 1 0 0 0))))";
        let p = parse_program(text, &reg()).unwrap();
        match &p.blocks[0] {
            Block::TranslationFor { count, delta, body } => {
                assert_eq!(*count, 3);
                assert_eq!(*delta, [0.0, 0.0, 0.5]);
                assert_eq!(body.len(), 2);
                assert_eq!(body[0].params[6], 0.1);
            }
            other => panic!("unexpected block {other:?}"),
        }
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_program("(program (block (draw line 0 0 0)))", &reg()).unwrap_err();
        assert!(
            matches!(err, Error::ArityMismatch { ref name, expected: 7, got: 3, .. } if name == "line"),
            "{err}"
        );
    }

    #[test]
    fn unknown_statement() {
        let err = parse_program("(program (block (draw teapot 1 2 3)))", &reg()).unwrap_err();
        assert!(matches!(err, Error::UnknownStatement { ref name, line: 1, column: 23 } if name == "teapot"));
    }

    #[test]
    fn non_positive_loop_count() {
        for count in ["0", "-2"] {
            let text = format!("(program (block (for {count} rot (draw line 0 0 0 0 0 1 0.1))))");
            let err = parse_program(&text, &reg()).unwrap_err();
            assert!(matches!(err, Error::NonPositiveLoopCount { .. }), "{err}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_program("(program\n  (block (draw cuboid 0 0 x 1 1 1 0 0 0)))", &reg()).unwrap_err();
        match err {
            Error::Parse(e) => assert_eq!((e.line, e.column), (2, 27)),
            other => panic!("expected syntax error, got {other}"),
        }
        for bad in [
            "",
            "(program",
            "(program (block))",
            "(program (block (for 2.5 rot (draw line 0 0 0 0 0 1 1))))",
            "(program (block (for 2 rot)))",
            "(program (block (for 2 spin (draw line 0 0 0 0 0 1 1))))",
            "(program) (program)",
            "(program (block (draw cuboid 0 0 0 1 1 1 0 0 0) (draw cuboid 0 0 0 1 1 1 0 0 0)))",
            "(program (block (draw cuboid 0 0 0 1 1 1 0 0 nan)))",
            "(program (block (draw cuboid 0 0 0 1 1 1 0 0 1e999)))",
        ] {
            assert!(matches!(parse_program(bad, &reg()), Err(Error::Parse(_))), "accepted {bad:?}");
        }
    }

    #[test]
    fn real_literals() {
        for ok in ["0", "-1", "+2.5", ".5", "5.", "1e3", "1.5E-7", "-0"] {
            assert!(is_real_literal(ok), "{ok}");
        }
        for bad in ["", ".", "e5", "1e", "1.2.3", "inf", "NaN", "0x10", "--1"] {
            assert!(!is_real_literal(bad), "{bad}");
        }
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("(program)", &reg()).unwrap().is_empty());
        assert!(parse_program("  ( program ; nothing\n )  ", &reg()).unwrap().is_empty());
    }
}
