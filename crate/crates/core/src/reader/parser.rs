use std::collections::HashMap;

use super::lexer::{is_symbol_char, Lexer, Tok, Token};
use super::{infix_op, prefix_op, OpType, ParseError, MAX_ARITY};
use crate::terms::{Term, Var, VarGen};

pub struct Parser<'g> {
    toks: Vec<Token>,
    pos: usize,
    gen: &'g mut VarGen,
    names: HashMap<String, Var>,
    order: Vec<Var>,
}

impl<'g> Parser<'g> {
    pub fn new(text: &str, gen: &'g mut VarGen) -> Result<Self, ParseError> {
        let toks = Lexer::new(text).tokenize()?;
        Ok(Parser { toks, pos: 0, gen, names: HashMap::new(), order: Vec::new() })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(tok: &Token, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: tok.line, col: tok.col, msg: msg.into() }
    }

    fn unexpected(&self) -> ParseError {
        let tok = self.peek();
        match &tok.tok {
            Tok::Atom { name, quoted: false } if name.chars().all(is_symbol_char) => {
                ParseError::UnknownOperator { line: tok.line, col: tok.col, op: name.clone() }
            }
            other => Self::error_at(tok, format!("unexpected {}", describe(other))),
        }
    }

    pub fn named_vars(&self) -> Vec<Var> {
        self.order.clone()
    }

    /// Next `.`-terminated sentence with its start position; `None` at end of input.
    pub fn next_sentence(&mut self) -> Result<Option<(Term, usize, usize)>, ParseError> {
        if self.peek().tok == Tok::Eof {
            return Ok(None);
        }
        self.names.clear();
        self.order.clear();
        let (line, col) = (self.peek().line, self.peek().col);
        let t = self.parse(1200)?;
        match self.peek().tok {
            Tok::End => {
                self.advance();
                Ok(Some((t, line, col)))
            }
            _ => Err(self.unexpected()),
        }
    }

    pub fn single_term(&mut self) -> Result<Term, ParseError> {
        let t = self.parse(1200)?;
        if self.peek().tok == Tok::End {
            self.advance();
        }
        match self.peek().tok {
            Tok::Eof => Ok(t),
            _ => Err(self.unexpected()),
        }
    }

    fn var(&mut self, name: String) -> Term {
        if name == "_" {
            return Term::Var(self.gen.fresh(Some("_".into())));
        }
        if let Some(v) = self.names.get(&name) {
            return Term::Var(v.clone());
        }
        let v = self.gen.fresh(Some(name.as_str().into()));
        self.names.insert(name, v.clone());
        self.order.push(v.clone());
        Term::Var(v)
    }

    fn can_start_term(tok: &Tok) -> bool {
        match tok {
            Tok::Atom { name, quoted } => *quoted || infix_op(name).is_none() || prefix_op(name).is_some(),
            Tok::Var(_) | Tok::Int(_) | Tok::Open { .. } | Tok::OpenList => true,
            _ => false,
        }
    }

    fn parse(&mut self, max: u16) -> Result<Term, ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        loop {
            let name = match &self.peek().tok {
                Tok::Comma => ",".to_string(),
                Tok::Atom { name, quoted: false } => name.clone(),
                _ => break,
            };
            let Some(op) = infix_op(&name) else { break };
            let p = op.priority;
            let (lmax, rmax) = match op.kind {
                OpType::Xfx => (p - 1, p - 1),
                OpType::Xfy => (p - 1, p),
                _ => (p, p - 1),
            };
            if p > max || left_prec > lmax {
                break;
            }
            self.advance();
            let right = self.parse(rmax)?;
            left = Term::compound(&name, vec![left, right]);
            left_prec = p;
        }
        Ok(left)
    }

    fn primary(&mut self, _max: u16) -> Result<(Term, u16), ParseError> {
        let tok = self.advance();
        match tok.tok.clone() {
            Tok::Int(n) => Ok((Term::Int(n), 0)),
            Tok::Var(name) => Ok((self.var(name), 0)),
            Tok::Open { .. } => {
                let t = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok((t, 0))
            }
            Tok::OpenList => {
                if self.peek().tok == Tok::CloseList {
                    self.advance();
                    return Ok((Term::nil(), 0));
                }
                let mut items = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.advance();
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.advance();
                    self.parse(999)?
                } else {
                    Term::nil()
                };
                self.expect(Tok::CloseList, "`]`")?;
                Ok((Term::list_with_tail(items, tail), 0))
            }
            Tok::Atom { name, quoted } => {
                if let Tok::Open { functional: true } = self.peek().tok {
                    self.advance();
                    let mut args = vec![self.parse(999)?];
                    while self.peek().tok == Tok::Comma {
                        self.advance();
                        args.push(self.parse(999)?);
                    }
                    self.expect(Tok::Close, "`)` or `,`")?;
                    if args.len() > MAX_ARITY {
                        return Err(ParseError::ArityOverflow {
                            line: tok.line,
                            col: tok.col,
                            arity: args.len(),
                        });
                    }
                    return Ok((Term::compound(&name, args), 0));
                }
                if !quoted && name == "-" {
                    if let Tok::Int(n) = self.peek().tok {
                        if !self.peek().spaced {
                            self.advance();
                            return Ok((Term::Int(-n), 0));
                        }
                    }
                }
                if !quoted {
                    if let Some(op) = prefix_op(&name) {
                        if Self::can_start_term(&self.peek().tok)
                            && !self.infix_follows_atom()
                        {
                            let p = op.priority;
                            let amax = if op.kind == OpType::Fy { p } else { p - 1 };
                            let arg = self.parse(amax)?;
                            return Ok((Term::compound(&name, vec![arg]), p));
                        }
                    }
                }
                Ok((Term::Atom(name.as_str().into()), 0))
            }
            other => Err(Self::error_at(&tok, format!("unexpected {}", describe(&other)))),
        }
    }

    /// A prefix-op atom directly followed by an infix operator is an operand, as in `- = x`.
    fn infix_follows_atom(&self) -> bool {
        match &self.peek().tok {
            Tok::Atom { name, quoted: false } => {
                infix_op(name).is_some()
                    && prefix_op(name).is_none()
                    && !matches!(self.peek2().tok, Tok::Open { functional: true })
            }
            _ => false,
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == want {
            self.advance();
            Ok(())
        } else if matches!(self.peek().tok, Tok::Atom { quoted: false, .. }) {
            Err(self.unexpected())
        } else {
            Err(Self::error_at(
                self.peek(),
                format!("expected {what}, found {}", describe(&self.peek().tok)),
            ))
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Atom { name, .. } => format!("atom `{name}`"),
        Tok::Var(v) => format!("variable `{v}`"),
        Tok::Int(n) => format!("integer {n}"),
        Tok::Open { .. } => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::OpenList => "`[`".into(),
        Tok::CloseList => "`]`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}
