use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier or quoted atom.
    Atom(String),
    /// Uppercase- or underscore-initial identifier.
    Var(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Comma,
    Period,
    Amp,
    Neck,
    Arrow,
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Atom(a) => format!("atom `{a}`"),
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Bar => "|",
            Tok::Comma => ",",
            Tok::Period => ".",
            Tok::Amp => "&",
            Tok::Neck => ":-",
            Tok::Arrow => "=>",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Le => "=<",
            Tok::Lt => "<",
            Tok::Eq => "=",
            _ => "",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    Lexer {
        chars: src.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
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

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, pos });
                return Ok(out);
            };
            let tok = match c {
                '(' => self.single(Tok::LParen),
                ')' => self.single(Tok::RParen),
                '[' => self.single(Tok::LBracket),
                ']' => self.single(Tok::RBracket),
                '|' => self.single(Tok::Bar),
                ',' => self.single(Tok::Comma),
                '.' => self.single(Tok::Period),
                '&' => self.single(Tok::Amp),
                ':' if self.peek_at(1) == Some('-') => self.double(Tok::Neck),
                '=' if self.peek_at(1) == Some('>') => self.double(Tok::Arrow),
                '=' if self.peek_at(1) == Some('<') => self.double(Tok::Le),
                '=' => self.single(Tok::Eq),
                '>' if self.peek_at(1) == Some('=') => self.double(Tok::Ge),
                '>' => self.single(Tok::Gt),
                '<' => self.single(Tok::Lt),
                '"' => Tok::Str(self.quoted('"', pos)?),
                '\'' => Tok::Atom(self.quoted('\'', pos)?),
                '-' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    self.bump();
                    self.integer(true, pos)?
                }
                d if d.is_ascii_digit() => self.integer(false, pos)?,
                a if a.is_lowercase() => Tok::Atom(self.ident()),
                v if v.is_uppercase() || v == '_' => Tok::Var(self.ident()),
                other => {
                    return Err(ParseError::new(
                        pos,
                        format!("unexpected character {other:?}"),
                        vec![],
                    ))
                }
            };
            out.push(Token { tok, pos });
        }
    }

    fn single(&mut self, t: Tok) -> Tok {
        self.bump();
        t
    }

    fn double(&mut self, t: Tok) -> Tok {
        self.bump();
        self.bump();
        t
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> String {
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

    fn integer(&mut self, negative: bool, pos: Pos) -> Result<Tok, ParseError> {
        let mut s = String::new();
        if negative {
            s.push('-');
        }
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
            .map_err(|_| ParseError::new(pos, format!("integer literal {s} out of range"), vec![]))
    }

    fn quoted(&mut self, quote: char, pos: Pos) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(ParseError::new(
                        pos,
                        "unterminated quoted literal".to_string(),
                        vec![quote.to_string()],
                    ))
                }
                Some('\\') => match self.bump() {
                    Some(c) if c == '\\' || c == quote => s.push(c),
                    Some(c) => {
                        return Err(ParseError::new(
                            self.pos(),
                            format!("unsupported escape \\{c}"),
                            vec![],
                        ))
                    }
                    None => continue,
                },
                Some(c) if c == quote => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_lex_longest_match() {
        assert_eq!(
            toks("=> =< = >= > < :- &"),
            vec![
                Tok::Arrow,
                Tok::Le,
                Tok::Eq,
                Tok::Ge,
                Tok::Gt,
                Tok::Lt,
                Tok::Neck,
                Tok::Amp,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("% hi\n  foo(X).").unwrap();
        assert_eq!(t[0].tok, Tok::Atom("foo".into()));
        assert_eq!(t[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(t[2].tok, Tok::Var("X".into()));
    }

    #[test]
    fn strings_and_negative_ints() {
        assert_eq!(
            toks(r#""a\"b" -12 'x y'"#),
            vec![
                Tok::Str("a\"b".into()),
                Tok::Int(-12),
                Tok::Atom("x y".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn bad_input_is_positioned() {
        let err = tokenize("p(#)").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
        assert!(tokenize("\"open").is_err());
    }
}
