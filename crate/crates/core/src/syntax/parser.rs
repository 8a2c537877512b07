use std::collections::HashMap;
use std::sync::Arc;

use super::ast::{is_builtin, DFormula, GFormula, SourceModule};
use super::lexer::{tokenize, Pos, Tok, Token};
use super::ParseError;
use crate::term::{Term, Var, SOURCE_VAR_BASE};

/// Bounds on parenthesis and term nesting, so parsing never exhausts the stack.
const MAX_NESTING: usize = 128;
const MAX_TERM_NESTING: usize = 2048;

/// Operator-level parse tree shared by goals and clauses; converted to a
/// G- or D-formula depending on where it appears.
#[derive(Debug)]
enum Expr {
    Term(Term, Pos),
    Str(String, Pos),
    Conj(Box<Expr>, Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>, Pos),
    Imp(Box<Expr>, Box<Expr>, Pos),
    Choice(Box<Expr>, Box<Expr>, Pos),
}

impl Expr {
    fn pos(&self) -> Pos {
        match self {
            Expr::Term(_, p) | Expr::Str(_, p) => *p,
            Expr::Conj(l, _) => l.pos(),
            Expr::Arrow(_, _, p) | Expr::Imp(_, _, p) | Expr::Choice(_, _, p) => *p,
        }
    }
}

#[derive(Default)]
struct Scope {
    names: HashMap<String, Var>,
    next: u64,
}

impl Scope {
    fn var(&mut self, name: &str) -> Var {
        if name == "_" {
            return self.mint(name);
        }
        if let Some(v) = self.names.get(name) {
            return v.clone();
        }
        let v = self.mint(name);
        self.names.insert(name.to_string(), v.clone());
        v
    }

    fn mint(&mut self, name: &str) -> Var {
        let v = Var::new(SOURCE_VAR_BASE + self.next, Some(Arc::from(name)));
        self.next += 1;
        v
    }
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    nesting: usize,
    scope: Scope,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            i: 0,
            nesting: 0,
            scope: Scope::default(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.i + k).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            self.pos(),
            format!("unexpected {}", self.peek().describe()),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&[t.symbol()]))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(ParseError::new(
                self.pos(),
                format!("nesting deeper than {MAX_NESTING}"),
                vec![],
            ));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }

    // choice := imp ('&' imp)*, right-associated
    fn choice(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![(self.imp()?, Pos::default())];
        while *self.peek() == Tok::Amp {
            let pos = self.pos();
            self.advance();
            items.push((self.imp()?, pos));
        }
        let (mut acc, mut acc_pos) = items.pop().unwrap();
        while let Some((left, pos)) = items.pop() {
            acc = Expr::Choice(Box::new(left), Box::new(acc), acc_pos);
            acc_pos = pos;
        }
        Ok(acc)
    }

    // imp := conj (':-' conj)?
    fn imp(&mut self) -> Result<Expr, ParseError> {
        let head = self.conj()?;
        if *self.peek() == Tok::Neck {
            let pos = self.pos();
            self.advance();
            let body = self.conj()?;
            return Ok(Expr::Imp(Box::new(head), Box::new(body), pos));
        }
        Ok(head)
    }

    // conj := arrow (',' arrow)*, right-associated
    fn conj(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.arrow()?];
        while self.eat(&Tok::Comma) {
            items.push(self.arrow()?);
        }
        let mut acc = items.pop().unwrap();
        while let Some(left) = items.pop() {
            acc = Expr::Conj(Box::new(left), Box::new(acc));
        }
        Ok(acc)
    }

    // arrow := primary ('=>' arrow)?
    fn arrow(&mut self) -> Result<Expr, ParseError> {
        let left = self.primary()?;
        if *self.peek() == Tok::Arrow {
            let pos = self.pos();
            self.advance();
            self.enter()?;
            let right = self.arrow()?;
            self.leave();
            return Ok(Expr::Arrow(Box::new(left), Box::new(right), pos));
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                self.enter()?;
                let inner = self.choice()?;
                self.leave();
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Str(s, pos))
            }
            Tok::Atom(_) | Tok::Var(_) | Tok::Int(_) | Tok::LBracket => {
                let left = self.term()?;
                let op = match self.peek() {
                    Tok::Ge => "ge",
                    Tok::Gt => "gt",
                    Tok::Le => "le",
                    Tok::Lt => "lt",
                    Tok::Eq => "=",
                    _ => return Ok(Expr::Term(left, pos)),
                };
                self.advance();
                let right = self.term()?;
                Ok(Expr::Term(Term::compound(op, vec![left, right]), pos))
            }
            _ => Err(self.unexpected(&["atom", "variable", "string", "("])),
        }
    }

    /// Terms are parsed with an explicit stack, so nesting depth costs heap
    /// rather than native stack.
    fn term(&mut self) -> Result<Term, ParseError> {
        enum Open {
            Compound(String, Vec<Term>),
            List(Vec<Term>, bool),
        }
        let mut stack: Vec<Open> = Vec::new();
        loop {
            if stack.len() > MAX_TERM_NESTING {
                return Err(ParseError::new(
                    self.pos(),
                    format!("term nesting deeper than {MAX_TERM_NESTING}"),
                    vec![],
                ));
            }
            let mut done = match self.peek().clone() {
                Tok::Var(name) => {
                    self.advance();
                    Term::Var(self.scope.var(&name))
                }
                Tok::Int(i) => {
                    self.advance();
                    Term::Int(i)
                }
                Tok::Atom(name) => {
                    self.advance();
                    if self.eat(&Tok::LParen) {
                        stack.push(Open::Compound(name, Vec::new()));
                        continue;
                    }
                    Term::constant(&name)
                }
                Tok::LBracket => {
                    self.advance();
                    if self.eat(&Tok::RBracket) {
                        Term::nil()
                    } else {
                        stack.push(Open::List(Vec::new(), false));
                        continue;
                    }
                }
                Tok::Str(_) => {
                    return Err(ParseError::new(
                        self.pos(),
                        "strings are only allowed as module URLs".to_string(),
                        vec![],
                    ))
                }
                _ => return Err(self.unexpected(&["atom", "variable", "integer", "["])),
            };
            // fold the finished term into its enclosing compound or list
            loop {
                match stack.last_mut() {
                    None => return Ok(done),
                    Some(Open::Compound(_, args)) => {
                        args.push(done);
                        if self.eat(&Tok::Comma) {
                            break;
                        }
                        self.expect(Tok::RParen)?;
                        let Some(Open::Compound(name, args)) = stack.pop() else {
                            unreachable!()
                        };
                        done = Term::compound(&name, args);
                    }
                    Some(Open::List(items, in_tail)) => {
                        if *in_tail {
                            self.expect(Tok::RBracket)?;
                            let Some(Open::List(items, _)) = stack.pop() else {
                                unreachable!()
                            };
                            done = Term::list_with_tail(items, done);
                            continue;
                        }
                        items.push(done);
                        if self.eat(&Tok::Comma) {
                            break;
                        }
                        if self.eat(&Tok::Bar) {
                            *in_tail = true;
                            break;
                        }
                        if *self.peek() != Tok::RBracket {
                            return Err(self.unexpected(&[",", "|", "]"]));
                        }
                        self.advance();
                        let Some(Open::List(items, _)) = stack.pop() else {
                            unreachable!()
                        };
                        done = Term::list(items);
                    }
                }
            }
        }
    }

    fn is_mod_decl(&self) -> bool {
        matches!(self.peek(), Tok::Atom(a) if a == "mod")
            && *self.peek_at(1) == Tok::LParen
            && matches!(self.peek_at(2), Tok::Str(_))
    }
}

fn to_goal(e: Expr) -> Result<GFormula, ParseError> {
    match e {
        Expr::Term(t, pos) => {
            if !t.is_callable() {
                return Err(ParseError::new(
                    pos,
                    format!("goal must be an atom, found {t}"),
                    vec![],
                ));
            }
            Ok(GFormula::atom(t))
        }
        Expr::Conj(l, r) => Ok(GFormula::and(to_goal(*l)?, to_goal(*r)?)),
        Expr::Arrow(l, r, _) => {
            let body = to_goal(*r)?;
            match *l {
                Expr::Str(url, pos) => {
                    if url.is_empty() {
                        return Err(ParseError::new(pos, "empty module URL".to_string(), vec![]));
                    }
                    Ok(GFormula::load(&url, body))
                }
                other => Ok(GFormula::assume(to_clause(other)?, body)),
            }
        }
        Expr::Str(_, pos) => Err(ParseError::new(
            pos,
            "a module URL must be followed by `=>`".to_string(),
            vec!["=>".to_string()],
        )),
        Expr::Imp(_, _, pos) | Expr::Choice(_, _, pos) => Err(ParseError::new(
            pos,
            "clause in goal position; write `(Clause) => Goal` to assume it".to_string(),
            vec![],
        )),
    }
}

fn to_clause(e: Expr) -> Result<DFormula, ParseError> {
    match e {
        Expr::Term(t, pos) => {
            let Some((name, arity)) = t.functor() else {
                return Err(ParseError::new(
                    pos,
                    format!("clause head must be an atom, found {t}"),
                    vec![],
                ));
            };
            if is_builtin(name, arity) {
                return Err(ParseError::new(
                    pos,
                    format!("cannot define builtin {name}/{arity}"),
                    vec![],
                ));
            }
            Ok(DFormula::Atom(t))
        }
        Expr::Imp(head, body, _) => Ok(DFormula::imp(to_goal(*body)?, to_clause(*head)?)),
        Expr::Choice(l, r, _) => Ok(DFormula::choice(to_clause(*l)?, to_clause(*r)?)),
        other => Err(ParseError::new(
            other.pos(),
            "expected a clause".to_string(),
            vec![],
        )),
    }
}

/// Parses a whole `.lw` program.
pub fn parse_program(text: &str) -> Result<SourceModule, ParseError> {
    let mut p = Parser::new(text)?;
    let mut module = SourceModule::default();
    while *p.peek() != Tok::Eof {
        if p.is_mod_decl() {
            let pos = p.pos();
            if module.url.is_some() {
                return Err(ParseError::new(
                    pos,
                    "duplicate mod declaration".to_string(),
                    vec![],
                ));
            }
            if !module.clauses.is_empty() {
                return Err(ParseError::new(
                    pos,
                    "mod declaration must precede all clauses".to_string(),
                    vec![],
                ));
            }
            p.advance();
            p.advance();
            let Tok::Str(url) = p.advance() else {
                unreachable!()
            };
            if url.is_empty() {
                return Err(ParseError::new(pos, "empty module URL".to_string(), vec![]));
            }
            p.expect(Tok::RParen)?;
            p.expect(Tok::Period)?;
            module.url = Some(url);
            continue;
        }
        module.clauses.push(clause_unit(&mut p)?);
    }
    Ok(module)
}

fn clause_unit(p: &mut Parser) -> Result<DFormula, ParseError> {
    p.scope = Scope::default();
    let e = p.choice()?;
    if *p.peek() != Tok::Period {
        return Err(p.unexpected(&[".", "&", ":-", ","]));
    }
    p.advance();
    Ok(to_clause(e)?.close())
}

/// Parses a single clause unit (the trailing period is optional).
pub fn parse_clause(text: &str) -> Result<DFormula, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.choice()?;
    p.eat(&Tok::Period);
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(to_clause(e)?.close())
}

/// Parses a query. Free variables become the outer existentials, in
/// first-occurrence order.
pub fn parse_goal(text: &str) -> Result<GFormula, ParseError> {
    let mut p = Parser::new(text)?;
    if matches!(p.peek(), Tok::Eof | Tok::Period) {
        return Err(ParseError::new(p.pos(), "empty goal".to_string(), vec![]));
    }
    let e = p.choice()?;
    p.eat(&Tok::Period);
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["end of input", ",", "=>"]));
    }
    Ok(to_goal(e)?.close())
}

/// Parses a single term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(t)
}
