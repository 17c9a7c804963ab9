use crate::error::{ParseError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Operator symbol such as `+`, `++` or `<>`.
    Op(String),
    /// Unsigned; the parser applies a leading minus.
    Int(u64),
    Float(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Colon,
    Backslash,
    Underscore,
    /// `|->`
    MapsTo,
    /// `<-`
    LArrow,
    /// `->`
    RArrow,
    Bar,
    Equals,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(s) => format!("operator `{s}`"),
            Tok::Int(i) => format!("number {i}"),
            Tok::Float(x) => format!("number {x}"),
            Tok::Str(_) => "string literal".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::MapsTo => "`|->`".into(),
            Tok::LArrow => "`<-`".into(),
            Tok::RArrow => "`->`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn is_op_char(c: char) -> bool {
    matches!(
        c,
        '+' | '-'
            | '*'
            | '/'
            | '<'
            | '>'
            | '='
            | '!'
            | '&'
            | '|'
            | '^'
            | '%'
            | '~'
            | '?'
            | '@'
            | '$'
    )
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn number(&mut self, start: Pos) -> Result<Tok, ParseError> {
        let mut text = self.take_while(|c| c.is_ascii_digit());
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            text.push('.');
            self.bump();
            text.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mut look = self.chars.clone();
            look.next();
            let mut exp = String::from("e");
            if let Some(sign @ ('+' | '-')) = look.peek().copied() {
                exp.push(sign);
                look.next();
            }
            if look.peek().is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..exp.len() {
                    self.bump();
                }
                is_float = true;
                text.push_str(&exp);
                text.push_str(&self.take_while(|c| c.is_ascii_digit()));
            }
        }
        if is_float {
            text.parse::<f64>()
                .map(Tok::Float)
                .map_err(|_| ParseError::new(start, format!("malformed number {text}")))
        } else {
            text.parse::<u64>()
                .map(Tok::Int)
                .map_err(|_| ParseError::new(start, format!("integer literal {text} too large")))
        }
    }

    fn string(&mut self, start: Pos) -> Result<Tok, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(ParseError::new(start, "unterminated string literal"));
            };
            match c {
                '"' => return Ok(Tok::Str(s)),
                '\\' => {
                    let esc_pos = self.pos();
                    match self.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('r') => s.push('\r'),
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('u') => s.push(self.unicode_escape(esc_pos)?),
                        _ => return Err(ParseError::new(esc_pos, "unknown escape sequence")),
                    }
                }
                c => s.push(c),
            }
        }
    }

    fn unicode_escape(&mut self, pos: Pos) -> Result<char, ParseError> {
        let bad = || ParseError::new(pos, "malformed \\u{...} escape");
        if self.bump() != Some('{') {
            return Err(bad());
        }
        let hex = self.take_while(|c| c.is_ascii_hexdigit());
        if self.bump() != Some('}') {
            return Err(bad());
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(bad)
    }
}

pub fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        chars: source.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        let pos = lx.pos();
        let Some(c) = lx.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = match c {
            '0'..='9' => lx.number(pos)?,
            '"' => lx.string(pos)?,
            c if is_ident_start(c) => {
                let word = lx.take_while(is_ident_char);
                if word == "_" {
                    Tok::Underscore
                } else {
                    Tok::Ident(word)
                }
            }
            c if is_op_char(c) => {
                let sym = lx.take_while(is_op_char);
                match sym.as_str() {
                    "=" => Tok::Equals,
                    "|" => Tok::Bar,
                    "|->" => Tok::MapsTo,
                    "<-" => Tok::LArrow,
                    "->" => Tok::RArrow,
                    _ => Tok::Op(sym),
                }
            }
            _ => {
                lx.bump();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    '\\' => Tok::Backslash,
                    other => {
                        return Err(ParseError::new(
                            pos,
                            format!("unexpected character {other:?}"),
                        ))
                    }
                }
            }
        };
        out.push(Token { tok, pos });
    }
}
