//! Surface language front end.
//!
//! A source file is a sequence of top-level items. Each item starts at
//! column 1; lines that continue an item must be indented. Every item but
//! the last is a definition `pattern = expr`; the last may instead be the
//! program's result expression.
//!
//! Inside an item, `;` sequencing binds loosest. A lambda body extends over
//! sequences, while the bodies of `for`, `if` and `case` and the right-hand
//! side of `<-` stop at the next `;`.

mod desugar;
mod lexer;
pub mod surface;

use std::sync::Arc;

pub use desugar::{desugar, desugar_with_prelude};
pub use surface::{
    is_operator_name, print_program, write_expr, Clause, ClauseKey, Definition, Pattern,
    SurfaceExpr, SurfaceProgram,
};

use crate::error::{ParseError, Pos};
use crate::syntax::{Expr, Literal, Name};
use lexer::{Tok, Token};

const KEYWORDS: &[&str] = &[
    "for", "handle", "handler", "perform", "return", "traverse", "if", "then", "else", "case",
    "of", "true", "false", "Left", "Right",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses a whole source file.
pub fn parse(source: &str) -> Result<SurfaceProgram, ParseError> {
    let tokens = lexer::lex(source)?;
    let mut items: Vec<Vec<Token>> = Vec::new();
    let eof = tokens.last().cloned().expect("lexer always emits Eof");
    for t in tokens {
        if t.tok == Tok::Eof {
            break;
        }
        if t.pos.col == 1 || items.is_empty() {
            items.push(Vec::new());
        }
        items.last_mut().expect("pushed above").push(t);
    }
    let mut definitions = Vec::new();
    let mut main = None;
    let count = items.len();
    for (i, mut item) in items.into_iter().enumerate() {
        let end_pos = item.last().map(|t| t.pos).unwrap_or(eof.pos);
        item.push(Token {
            tok: Tok::Eof,
            pos: end_pos,
        });
        let mut p = Parser {
            toks: item,
            at: 0,
            item_end: true,
        };
        match p.item()? {
            Item::Def(def) => definitions.push(def),
            Item::Expr(e) if i + 1 == count => main = Some(e),
            Item::Expr(_) => {
                return Err(ParseError::new(
                    p.toks[0].pos,
                    "only the last top-level item may be an expression; \
                     continuation lines must be indented",
                ))
            }
        }
    }
    Ok(SurfaceProgram { definitions, main })
}

/// Parses a single expression (no top-level definitions).
pub fn parse_expr(source: &str) -> Result<SurfaceExpr, ParseError> {
    let toks = lexer::lex(source)?;
    let mut p = Parser {
        toks,
        at: 0,
        item_end: false,
    };
    let e = p.seq()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

/// Parses and desugars `source` as a program, with the prelude in scope
/// unless `with_prelude` is false.
pub fn compile(source: &str, with_prelude: bool) -> Result<Expr, ParseError> {
    let program = parse(source)?;
    if with_prelude {
        desugar_with_prelude(&program)
    } else {
        desugar(&program)
    }
}

enum Item {
    Def(Definition),
    Expr(SurfaceExpr),
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    item_end: bool,
}

fn infix_level(op: &str) -> u8 {
    match op {
        "*" | "/" => 4,
        "+" | "-" | "++" => 3,
        "==" | "!=" | "<" | "<=" | ">" | ">=" => 2,
        _ => 1,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Tok::Eof if self.item_end => "end of definition".to_string(),
            t => t.describe(),
        };
        ParseError {
            pos: self.pos(),
            message: format!("unexpected {found}"),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn ident(&mut self) -> Result<(Name, Pos), ParseError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let name: Name = Arc::from(s.as_str());
                self.bump();
                Ok((name, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let start = self.at;
        let pos = self.pos();
        if let Ok(pattern) = self.pattern() {
            if *self.peek() == Tok::Equals {
                self.bump();
                let body = self.seq()?;
                self.expect(Tok::Eof, "end of definition")?;
                return Ok(Item::Def(Definition { pattern, body, pos }));
            }
        }
        self.at = start;
        let e = self.seq()?;
        self.expect(Tok::Eof, "end of expression")?;
        Ok(Item::Expr(e))
    }

    /// `_`, a name, `(op)`, or a tuple/table of patterns.
    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Underscore => {
                self.bump();
                Ok(Pattern::Wild)
            }
            Tok::Ident(_) => {
                let (n, pos) = self.ident()?;
                Ok(Pattern::Var(n, pos))
            }
            Tok::LParen => {
                if let (Tok::Op(op), Tok::RParen) = (self.peek_at(1).clone(), self.peek_at(2)) {
                    self.bump();
                    self.bump();
                    self.bump();
                    return Ok(Pattern::Var(Arc::from(op.as_str()), pos));
                }
                self.bump();
                let first = self.pattern()?;
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(first);
                }
                let mut ps = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    ps.push(self.pattern()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Pattern::Tuple(ps))
            }
            Tok::LBracket => {
                self.bump();
                let mut ps = vec![self.pattern()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    ps.push(self.pattern()?);
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Pattern::Table(ps))
            }
            _ => Err(self.error(&["pattern"])),
        }
    }

    fn binder(&mut self) -> Result<Option<Name>, ParseError> {
        match self.peek().clone() {
            Tok::Underscore => {
                self.bump();
                Ok(None)
            }
            Tok::LParen => {
                if let (Tok::Op(op), Tok::RParen) = (self.peek_at(1).clone(), self.peek_at(2)) {
                    self.bump();
                    self.bump();
                    self.bump();
                    Ok(Some(Arc::from(op.as_str())))
                } else {
                    Err(self.error(&["binder"]))
                }
            }
            _ => Ok(Some(self.ident()?.0)),
        }
    }

    /// Sequencing level: `p <- e; rest`, `e; rest`, or a single expression.
    fn seq(&mut self) -> Result<SurfaceExpr, ParseError> {
        let start = self.at;
        if let Ok(pattern) = self.pattern() {
            if *self.peek() == Tok::LArrow {
                self.bump();
                let rhs = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let rest = self.seq()?;
                return Ok(SurfaceExpr::Bind(pattern, Box::new(rhs), Box::new(rest)));
            }
        }
        self.at = start;
        let first = self.expr()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            let rest = self.seq()?;
            return Ok(SurfaceExpr::Seq(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    /// Everything except top-level sequencing.
    fn expr(&mut self) -> Result<SurfaceExpr, ParseError> {
        match self.peek() {
            Tok::Backslash => {
                self.bump();
                let b = self.binder()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.seq()?;
                Ok(SurfaceExpr::Lam(b, Box::new(body)))
            }
            Tok::Ident(kw) => match kw.as_str() {
                "for" => {
                    self.bump();
                    let x = self.binder()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let size = self.infix(0)?;
                    self.expect(Tok::Dot, "`.`")?;
                    let body = self.expr()?;
                    Ok(SurfaceExpr::For(x, Box::new(size), Box::new(body)))
                }
                "handle" | "handler" => {
                    let thunk = kw == "handler";
                    let pos = self.pos();
                    self.bump();
                    let clauses = self.clauses()?;
                    let state = self.atom()?;
                    let body = self.atom()?;
                    Ok(SurfaceExpr::Handle {
                        clauses,
                        state: Box::new(state),
                        body: Box::new(body),
                        thunk,
                        pos,
                    })
                }
                "if" => {
                    self.bump();
                    let c = self.expr()?;
                    self.expect_kw("then")?;
                    let t = self.expr()?;
                    self.expect_kw("else")?;
                    let f = self.expr()?;
                    Ok(SurfaceExpr::If(Box::new(c), Box::new(t), Box::new(f)))
                }
                "case" => self.case(),
                _ => self.infix(0),
            },
            _ => self.infix(0),
        }
    }

    fn case(&mut self) -> Result<SurfaceExpr, ParseError> {
        self.bump();
        let scrutinee = self.expr()?;
        self.expect_kw("of")?;
        if *self.peek() == Tok::Bar {
            self.bump();
        }
        self.expect_kw("Left")?;
        let lv = self.binder()?;
        self.expect(Tok::RArrow, "`->`")?;
        let lb = self.expr()?;
        self.expect(Tok::Bar, "`|`")?;
        self.expect_kw("Right")?;
        let rv = self.binder()?;
        self.expect(Tok::RArrow, "`->`")?;
        let rb = self.expr()?;
        Ok(SurfaceExpr::Case {
            scrutinee: Box::new(scrutinee),
            left: (lv, Box::new(lb)),
            right: (rv, Box::new(rb)),
        })
    }

    fn clauses(&mut self) -> Result<Vec<Clause>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut clauses = Vec::new();
        loop {
            let pos = self.pos();
            let key = match self.peek().clone() {
                Tok::Ident(s) if s == "return" => ClauseKey::Return,
                Tok::Ident(s) if s == "traverse" => ClauseKey::Traverse,
                Tok::Ident(s) if !is_keyword(&s) => ClauseKey::Op(Arc::from(s.as_str())),
                _ => return Err(self.error(&["`return`", "`traverse`", "operation name"])),
            };
            self.bump();
            self.expect(Tok::MapsTo, "`|->`")?;
            let body = self.seq()?;
            clauses.push(Clause { key, body, pos });
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    // Allow a trailing comma before the closing brace.
                    if *self.peek() == Tok::RBrace {
                        self.bump();
                        return Ok(clauses);
                    }
                }
                Tok::RBrace => {
                    self.bump();
                    return Ok(clauses);
                }
                _ => return Err(self.error(&["`,`", "`}`"])),
            }
        }
    }

    /// Left-associative binary operators over application chains.
    fn infix(&mut self, min_level: u8) -> Result<SurfaceExpr, ParseError> {
        let mut lhs = self.app()?;
        loop {
            let Tok::Op(op) = self.peek().clone() else {
                return Ok(lhs);
            };
            let level = infix_level(&op);
            if level < min_level.max(1) {
                return Ok(lhs);
            }
            let pos = self.pos();
            self.bump();
            let rhs = self.infix(level + 1)?;
            lhs = SurfaceExpr::Infix(Arc::from(op.as_str()), pos, Box::new(lhs), Box::new(rhs));
        }
    }

    fn app(&mut self) -> Result<SurfaceExpr, ParseError> {
        let mut f =
            if let (Tok::Op(m), Tok::Int(_) | Tok::Float(_)) = (self.peek(), self.peek_at(1)) {
                if m != "-" {
                    return Err(self.error(&["expression"]));
                }
                self.negative_literal()?
            } else {
                self.atom()?
            };
        while self.starts_atom() {
            let a = self.atom()?;
            f = SurfaceExpr::App(Box::new(f), Box::new(a));
        }
        Ok(f)
    }

    fn negative_literal(&mut self) -> Result<SurfaceExpr, ParseError> {
        let pos = self.pos();
        self.bump();
        match self.bump() {
            Tok::Int(i) if i <= 1u64 << 63 => Ok(SurfaceExpr::Lit(Literal::Int(
                (i as i128).wrapping_neg() as i64,
            ))),
            Tok::Int(_) => Err(ParseError::new(pos, "integer literal out of range")),
            Tok::Float(x) => Ok(SurfaceExpr::Lit(Literal::Float(-x))),
            _ => unreachable!("checked by caller"),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Float(_) | Tok::Str(_) | Tok::LParen | Tok::LBracket => true,
            Tok::Ident(s) => {
                !is_keyword(s)
                    || matches!(s.as_str(), "perform" | "true" | "false" | "Left" | "Right")
            }
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<SurfaceExpr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                let i = i64::try_from(i)
                    .map_err(|_| ParseError::new(pos, "integer literal out of range"))?;
                Ok(SurfaceExpr::Lit(Literal::Int(i)))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(SurfaceExpr::Lit(Literal::Float(x)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(SurfaceExpr::Lit(Literal::Str(Arc::from(s.as_str()))))
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(SurfaceExpr::Lit(Literal::Bool(s == "true")))
                }
                "Left" | "Right" => {
                    self.bump();
                    Ok(SurfaceExpr::Var(Arc::from(s.as_str()), pos))
                }
                "perform" => {
                    self.bump();
                    let (op, _) = self.ident()?;
                    Ok(SurfaceExpr::Perform(op))
                }
                _ => {
                    let (n, pos) = self.ident()?;
                    Ok(SurfaceExpr::Var(n, pos))
                }
            },
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(SurfaceExpr::Lit(Literal::Unit));
                }
                if let (Tok::Op(op), Tok::RParen) = (self.peek().clone(), self.peek_at(1)) {
                    self.bump();
                    self.bump();
                    return Ok(SurfaceExpr::Var(Arc::from(op.as_str()), pos));
                }
                let first = self.seq()?;
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(first);
                }
                let mut elems = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    elems.push(self.seq()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(SurfaceExpr::Tuple(elems))
            }
            Tok::LBracket => {
                self.bump();
                let mut elems = Vec::new();
                if *self.peek() != Tok::RBracket {
                    elems.push(self.seq()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        elems.push(self.seq()?);
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(SurfaceExpr::Table(elems))
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}
