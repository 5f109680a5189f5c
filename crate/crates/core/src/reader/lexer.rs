use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Atom name; `quoted` atoms are never operators.
    Atom { name: String, quoted: bool },
    Var(String),
    Int(i64),
    /// `(` with `functional` set when it directly follows a name.
    Open { functional: bool },
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Whitespace or a comment precedes this token.
    pub spaced: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

pub fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

pub struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1, _src: src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    /// Skips layout and `%` comments; reports whether anything was skipped.
    fn skip_layout(&mut self) -> bool {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        self.pos > start
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out: Vec<Token> = Vec::new();
        loop {
            let spaced = self.skip_layout() || out.is_empty();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, col, spaced });
                return Ok(out);
            };
            let prev_is_name = matches!(
                out.last(),
                Some(Token { tok: Tok::Atom { .. } | Tok::Var(_), .. })
            );
            let tok = if c.is_ascii_digit() {
                self.number()?
            } else if c == '_' || c.is_uppercase() {
                Tok::Var(self.word())
            } else if c.is_alphabetic() {
                Tok::Atom { name: self.word(), quoted: false }
            } else if c == '\'' {
                Tok::Atom { name: self.quoted()?, quoted: true }
            } else {
                match c {
                    '(' => {
                        self.bump();
                        Tok::Open { functional: prev_is_name && !spaced }
                    }
                    ')' => {
                        self.bump();
                        Tok::Close
                    }
                    '[' => {
                        self.bump();
                        Tok::OpenList
                    }
                    ']' => {
                        self.bump();
                        Tok::CloseList
                    }
                    '|' => {
                        self.bump();
                        Tok::Bar
                    }
                    ',' => {
                        self.bump();
                        Tok::Comma
                    }
                    '!' | ';' => {
                        self.bump();
                        Tok::Atom { name: c.to_string(), quoted: false }
                    }
                    '.' if self
                        .peek_at(1)
                        .is_none_or(|n| n.is_whitespace() || n == '%') =>
                    {
                        self.bump();
                        Tok::End
                    }
                    c if is_symbol_char(c) => {
                        let mut s = String::new();
                        while let Some(c) = self.peek() {
                            if !is_symbol_char(c) {
                                break;
                            }
                            // a trailing '.' followed by layout ends the clause
                            if c == '.'
                                && !s.is_empty()
                                && self.peek_at(1).is_none_or(|n| n.is_whitespace() || n == '%')
                            {
                                break;
                            }
                            s.push(c);
                            self.bump();
                        }
                        Tok::Atom { name: s, quoted: false }
                    }
                    other => return Err(self.error(format!("unexpected character {other:?}"))),
                }
            };
            out.push(Token { tok, line, col, spaced });
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s.parse::<i64>()
            .map(Tok::Int)
            .map_err(|_| self.error(format!("integer out of range: {s}")))
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated quoted atom")),
                Some('\'') => {
                    if self.peek() == Some('\'') {
                        self.bump();
                        s.push('\'');
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('\\') => s.push('\\'),
                    Some('\'') => s.push('\''),
                    Some(c) => return Err(self.error(format!("unknown escape \\{c}"))),
                    None => return Err(self.error("unterminated quoted atom")),
                },
                Some(c) => s.push(c),
            }
        }
    }
}
