//! Line-oriented source syntax for BSS programs.
//!
//! ```text
//! <id>: input [-> <id>]
//! <id>: c[<k>] := <expr> -> <id>
//! <id>: if <expr> >= 0 -> <id> else <id>
//! <id>: shift left|right -> <id>
//! <id>: output c[<i>] | c[<i>..<j>]
//! ```
//!
//! Expressions use `+ - * /`, parentheses, cell references `c[k]` and
//! rational literals. `a/b` written without spaces is a single literal;
//! `a / b` is a division. An input node without an explicit successor falls
//! through to the node on the next line. `#` starts a comment.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::program::{
    valid_id, BinOp, BssNode, BssProgram, Direction, Expr, NodeKind, ProgramError,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: expected {expected}")]
    SyntaxError {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("line {line}: successor {target:?} is not defined")]
    DanglingSuccessor { line: usize, target: String },
    #[error("line {line}: second input node (first on line {first})")]
    MultipleInputs { line: usize, first: usize },
    #[error("line {line}: duplicate node id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: input node on the last line needs an explicit successor")]
    MissingSuccessor { line: usize },
    #[error("invalid UTF-8 at byte {0}")]
    InvalidUtf8(usize),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Ratio(BigInt, BigInt),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

const SYMBOLS: [&str; 14] = [
    ":=", "->", ">=", "..", ":", "[", "]", "(", ")", "+", "-", "*", "/", "#",
];

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        line,
        col,
        expected: expected.into(),
    }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let num: String = chars[start..i].iter().collect();
            let num: BigInt = num.parse().expect("digits");
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let ds = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let den: String = chars[ds..i].iter().collect();
                let den: BigInt = den.parse().expect("digits");
                if den.is_zero() {
                    return Err(syntax(line_no, ds + 1, "nonzero denominator"));
                }
                out.push(Spanned {
                    tok: Tok::Ratio(num, den),
                    col,
                });
            } else {
                out.push(Spanned {
                    tok: Tok::Int(num),
                    col,
                });
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                // ids such as 12a are allowed
                let start = col - 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.pop();
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    col,
                });
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(&"#") => break,
            Some(s) => {
                out.push(Spanned {
                    tok: Tok::Sym(s),
                    col,
                });
                i += s.chars().count();
            }
            None => return Err(syntax(line_no, col, "a token")),
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn err(&self, expected: &str) -> ParseError {
        syntax(self.line, self.col(), expected)
    }

    fn sym(&mut self, s: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(t)) if *t == s => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(&format!("'{s}'"))),
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        self.sym(s).is_ok()
    }

    fn keyword(&mut self, k: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(t)) if t == k => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(&format!("'{k}'"))),
        }
    }

    fn id(&mut self) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(t)) => {
                self.pos += 1;
                Ok((t.clone(), col))
            }
            Some(Tok::Int(n)) if n.sign() != num_bigint::Sign::Minus => {
                self.pos += 1;
                Ok((n.to_string(), col))
            }
            _ => Err(self.err("node id")),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat_sym("-");
        match self.peek() {
            Some(Tok::Int(n)) => {
                let v: i64 = n
                    .try_into()
                    .map_err(|_| self.err("cell index in i64 range"))?;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.err("integer")),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("end of line")),
        }
    }

    /// `c[k]`, or `c[i..j]` when `range` is set.
    fn cell(&mut self, range: bool) -> Result<(i64, i64), ParseError> {
        self.keyword("c")?;
        self.sym("[")?;
        let a = self.int()?;
        let b = if range && self.eat_sym("..") {
            self.int()?
        } else {
            a
        };
        self.sym("]")?;
        Ok((a, b))
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > 200 {
            return Err(self.err("shallower nesting"));
        }
        let mut e = self.term(depth)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => BinOp::Add,
                Some(Tok::Sym("-")) => BinOp::Sub,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::bin(op, e, self.term(depth)?);
        }
    }

    fn term(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let mut e = self.unary(depth)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("*")) => BinOp::Mul,
                Some(Tok::Sym("/")) => BinOp::Div,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::bin(op, e, self.unary(depth)?);
        }
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > 200 {
            return Err(self.err("shallower nesting"));
        }
        if self.eat_sym("-") {
            return Ok(Expr::negated(self.unary(depth + 1)?));
        }
        match self.peek() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Lit(Rational::from_integer(n.clone())))
            }
            Some(Tok::Ratio(n, d)) => {
                self.pos += 1;
                Ok(Expr::Lit(Rational::new(n.clone(), d.clone())))
            }
            Some(Tok::Ident(c)) if c == "c" => Ok(Expr::Cell(self.cell(false)?.0)),
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr(depth + 1)?;
                self.sym(")")?;
                Ok(e)
            }
            _ => Err(self.err("expression")),
        }
    }
}

enum Pending {
    Input(Option<(String, usize)>),
    Computation(i64, Expr, (String, usize)),
    Branch(Expr, (String, usize), (String, usize)),
    Shift(Direction, (String, usize)),
    Output(i64, i64),
}

fn parse_line(c: &mut Cursor<'_>) -> Result<(String, Pending), ParseError> {
    let (id, id_col) = c.id()?;
    if !valid_id(&id) {
        return Err(syntax(c.line, id_col, "node id"));
    }
    c.sym(":")?;
    let pending = match c.peek() {
        Some(Tok::Ident(k)) if k == "input" => {
            c.pos += 1;
            let next = if c.eat_sym("->") { Some(c.id()?) } else { None };
            Pending::Input(next)
        }
        Some(Tok::Ident(k)) if k == "if" => {
            c.pos += 1;
            let e = c.expr(0)?;
            c.sym(">=")?;
            match c.peek() {
                Some(Tok::Int(n)) if n.is_zero() => c.pos += 1,
                _ => return Err(c.err("'0'")),
            }
            c.sym("->")?;
            let a = c.id()?;
            c.keyword("else")?;
            let b = c.id()?;
            Pending::Branch(e, a, b)
        }
        Some(Tok::Ident(k)) if k == "shift" => {
            c.pos += 1;
            let dir = match c.peek() {
                Some(Tok::Ident(d)) if d == "left" => Direction::Left,
                Some(Tok::Ident(d)) if d == "right" => Direction::Right,
                _ => return Err(c.err("'left' or 'right'")),
            };
            c.pos += 1;
            c.sym("->")?;
            Pending::Shift(dir, c.id()?)
        }
        Some(Tok::Ident(k)) if k == "output" => {
            c.pos += 1;
            let (a, b) = c.cell(true)?;
            if a > b {
                return Err(c.err("nonempty cell range"));
            }
            Pending::Output(a, b)
        }
        Some(Tok::Ident(k)) if k == "c" => {
            let (target, _) = c.cell(false)?;
            c.sym(":=")?;
            let e = c.expr(0)?;
            c.sym("->")?;
            Pending::Computation(target, e, c.id()?)
        }
        _ => return Err(c.err("input, c[k] :=, if, shift or output")),
    };
    c.done()?;
    Ok((id, pending))
}

/// Parses program source. Total: every input yields a program or an error.
pub fn parse_program(text: &str) -> Result<BssProgram, ParseError> {
    let mut lines: Vec<(usize, String, Pending)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            toks: &toks,
            pos: 0,
            line,
            end_col: raw.chars().count() + 1,
        };
        let (id, p) = parse_line(&mut c)?;
        lines.push((line, id, p));
    }
    if lines.is_empty() {
        return Err(ProgramError::Empty.into());
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut first_input: Option<usize> = None;
    for (i, (line, id, p)) in lines.iter().enumerate() {
        if index.insert(id.as_str(), i).is_some() {
            return Err(ParseError::DuplicateId {
                line: *line,
                id: id.clone(),
            });
        }
        if matches!(p, Pending::Input(_)) {
            if let Some(first) = first_input {
                return Err(ParseError::MultipleInputs { line: *line, first });
            }
            first_input = Some(*line);
        }
    }
    let resolve = |line: usize, (target, _): &(String, usize)| {
        index
            .get(target.as_str())
            .copied()
            .ok_or_else(|| ParseError::DanglingSuccessor {
                line,
                target: target.clone(),
            })
    };

    let mut nodes = Vec::with_capacity(lines.len());
    for (i, (line, id, p)) in lines.iter().enumerate() {
        let line = *line;
        let kind = match p {
            Pending::Input(Some(n)) => NodeKind::Input {
                next: resolve(line, n)?,
            },
            Pending::Input(None) if i + 1 < lines.len() => NodeKind::Input { next: i + 1 },
            Pending::Input(None) => return Err(ParseError::MissingSuccessor { line }),
            Pending::Computation(t, e, n) => NodeKind::Computation {
                target: *t,
                expr: e.clone(),
                next: resolve(line, n)?,
            },
            Pending::Branch(e, a, b) => NodeKind::Branch {
                expr: e.clone(),
                if_nonneg: resolve(line, a)?,
                if_neg: resolve(line, b)?,
            },
            Pending::Shift(d, n) => NodeKind::Shift {
                dir: *d,
                next: resolve(line, n)?,
            },
            Pending::Output(a, b) => NodeKind::Output {
                first: *a,
                last: *b,
            },
        };
        nodes.push(BssNode {
            id: id.clone(),
            kind,
        });
    }
    Ok(BssProgram::new(nodes)?)
}

/// As [`parse_program`], for raw bytes.
pub fn parse_program_bytes(bytes: &[u8]) -> Result<BssProgram, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_program(text),
        Err(e) => Err(ParseError::InvalidUtf8(e.valid_up_to())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    const SQUARE: &str = "in: input\nsq: c[0] := c[0] * c[0] -> out\nout: output c[0]\n";

    #[test]
    fn squaring_program() {
        let p = parse_program(SQUARE).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_source(), SQUARE);
    }

    #[test]
    fn literals_and_division() {
        let p =
            parse_program("i: input\na: c[1] := 3/2 * c[0] / 2 -> o\no: output c[0..1]\n").unwrap();
        match &p.node(1).kind {
            NodeKind::Computation { expr, .. } => {
                let want = Expr::bin(
                    BinOp::Div,
                    Expr::bin(BinOp::Mul, Expr::Lit(rat(3, 2)), Expr::Cell(0)),
                    Expr::Lit(int(2)),
                );
                assert_eq!(expr, &want);
            }
            k => panic!("{k:?}"),
        }
        assert_eq!(p.constants(), &[rat(3, 2), int(2)]);
        let p = parse_program("i: input\na: c[0] := -3/4 - -c[-2] -> o\no: output c[0]").unwrap();
        assert_eq!(
            p.to_source(),
            "i: input\na: c[0] := -3/4 - -c[-2] -> o\no: output c[0]\n"
        );
    }

    #[test]
    fn comments_blank_lines_and_explicit_input_successor() {
        let src =
            "# squares\n\nx: output c[0]\ni: input -> s  # entry\ns: c[0] := c[0]*c[0] -> x\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.entry(), 1);
        assert_eq!(parse_program(&p.to_source()).unwrap(), p);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_program("i: input\na: c[0] := c[0] -> nowhere\no: output c[0]"),
            Err(ParseError::DanglingSuccessor { line: 2, .. })
        ));
        assert!(matches!(
            parse_program("i: input\nj: input\no: output c[0]"),
            Err(ParseError::MultipleInputs { line: 2, first: 1 })
        ));
        assert_eq!(
            parse_program("i: input\no: output c[0]\na: c[0] := c[0] + -> o"),
            Err(ParseError::SyntaxError {
                line: 3,
                col: 19,
                expected: "expression".into()
            })
        );
        assert!(matches!(
            parse_program("i: input\no: output c[0]\no: output c[1]"),
            Err(ParseError::DuplicateId { line: 3, .. })
        ));
        assert!(matches!(
            parse_program("o: output c[0]\ni: input"),
            Err(ParseError::MissingSuccessor { line: 2 })
        ));
        assert!(matches!(
            parse_program("i: input\no: output c[0]\nb: if c[0] >= 1 -> o else o"),
            Err(ParseError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_program("i: input\no: output c[0]\na: c[0] := 1/0 -> o"),
            Err(ParseError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_program_bytes(b"i: input\xff"),
            Err(ParseError::InvalidUtf8(8))
        ));
        assert!(matches!(
            parse_program(""),
            Err(ParseError::Program(ProgramError::Empty))
        ));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!(
            "i: input\no: output c[0]\na: c[0] := {}1{} -> o",
            "(".repeat(5000),
            ")".repeat(5000)
        );
        assert!(matches!(
            parse_program(&src),
            Err(ParseError::SyntaxError { .. })
        ));
        let src = format!(
            "i: input\no: output c[0]\na: c[0] := {}1 -> o",
            "-".repeat(5000)
        );
        assert!(parse_program(&src).is_err());
    }
}
