use magpi_core::{Diagnostic, Pos, Span};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Integer literal, kept as written so it can double as a label.
    Int(String),
    Real(f64),
    Str(String),
    Punct(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Real(r) => format!("real `{r}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCT: &str = "(){}[]<>,.;:!?&+|@=";

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let start = cur.pos;
        let Some(c) = cur.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                span: Span::new(start, start),
            });
            return Ok(out);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '\'') {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() || (c == '-' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            number(&mut cur, start)?
        } else if c == '"' {
            Tok::Str(string(&mut cur, start)?)
        } else if PUNCT.contains(c) {
            cur.bump();
            Tok::Punct(c)
        } else {
            cur.bump();
            return Err(Diagnostic::error(
                "UnexpectedChar",
                Span::new(start, cur.pos),
                format!("unexpected character `{c}`"),
            ));
        };
        out.push(Token {
            tok,
            span: Span::new(start, cur.pos),
        });
    }
}

fn skip_trivia(cur: &mut Cursor<'_>) -> Result<(), Diagnostic> {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek2() == Some('/') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            Some('/') if cur.peek2() == Some('*') => {
                let start = cur.pos;
                cur.bump();
                cur.bump();
                loop {
                    match cur.bump() {
                        Some('*') if cur.peek() == Some('/') => {
                            cur.bump();
                            break;
                        }
                        Some(_) => {}
                        None => {
                            return Err(Diagnostic::error(
                                "UnterminatedComment",
                                Span::new(start, cur.pos),
                                "block comment is never closed",
                            ))
                        }
                    }
                }
            }
            _ => return Ok(()),
        }
    }
}

fn number(cur: &mut Cursor<'_>, start: Pos) -> Result<Tok, Diagnostic> {
    let mut s = String::new();
    if cur.peek() == Some('-') {
        s.push('-');
        cur.bump();
    }
    let digits = |cur: &mut Cursor<'_>, s: &mut String| {
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            s.push(c);
            cur.bump();
        }
    };
    digits(cur, &mut s);
    let mut real = false;
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        real = true;
        s.push('.');
        cur.bump();
        digits(cur, &mut s);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let save = (cur.chars.clone(), cur.pos);
        let mut exp = String::from("e");
        cur.bump();
        if let Some(c @ ('-' | '+')) = cur.peek() {
            exp.push(c);
            cur.bump();
        }
        if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            real = true;
            s.push_str(&exp);
            digits(cur, &mut s);
        } else {
            (cur.chars, cur.pos) = save;
        }
    }
    if real {
        s.parse::<f64>()
            .map(Tok::Real)
            .map_err(|e| Diagnostic::error("BadNumber", Span::new(start, cur.pos), e.to_string()))
    } else {
        Ok(Tok::Int(s))
    }
}

fn string(cur: &mut Cursor<'_>, start: Pos) -> Result<String, Diagnostic> {
    cur.bump();
    let mut s = String::new();
    loop {
        match cur.bump() {
            Some('"') => return Ok(s),
            Some('\\') => match cur.bump() {
                Some('n') => s.push('\n'),
                Some('t') => s.push('\t'),
                Some(c @ ('"' | '\\')) => s.push(c),
                other => {
                    return Err(Diagnostic::error(
                        "BadEscape",
                        Span::new(start, cur.pos),
                        format!("unknown escape `\\{}`", other.map(String::from).unwrap_or_default()),
                    ))
                }
            },
            Some(c) => s.push(c),
            None => {
                return Err(Diagnostic::error(
                    "UnterminatedString",
                    Span::new(start, cur.pos),
                    "string literal is never closed",
                ))
            }
        }
    }
}
