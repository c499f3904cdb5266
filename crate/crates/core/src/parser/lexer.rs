use super::{ParseError, ParseErrorKind};
use crate::ast::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Lower-case identifier or one starting with `_` followed by more
    /// characters: predicate names and symbolic constants.
    Ident(String),
    Var(String),
    Int(i64),
    Underscore,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    DotDot,
    Semi,
    Colon,
    Bar,
    Arrow,
    LArrow,
    ColonDash,
    Plus,
    Minus,
    Star,
    Slash,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    True,
    False,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Underscore => "_",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::LArrow => "<-",
            Tok::ColonDash => ":-",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Mod => "mod",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::True => "true",
            Tok::False => "false",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn tokenize(text: &str, file: Option<&str>) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;
    let span = |start: usize, end: usize, line: usize, line_start: usize| SourceSpan {
        file: file.map(str::to_string),
        line,
        column: text[line_start..start].chars().count() + 1,
        start,
        end,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let two = if i + 1 < bytes.len() { Some(bytes[i + 1]) } else { None };
        let (tok, len) = match (c, two) {
            (b'-', Some(b'>')) => (Tok::Arrow, 2),
            (b'<', Some(b'-')) => (Tok::LArrow, 2),
            (b'<', Some(b'=')) => (Tok::Le, 2),
            (b'>', Some(b'=')) => (Tok::Ge, 2),
            (b'!', Some(b'=')) => (Tok::Ne, 2),
            (b':', Some(b'-')) => (Tok::ColonDash, 2),
            (b'.', Some(b'.')) => (Tok::DotDot, 2),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b',', _) => (Tok::Comma, 1),
            (b'.', _) => (Tok::Dot, 1),
            (b';', _) => (Tok::Semi, 1),
            (b':', _) => (Tok::Colon, 1),
            (b'|', _) => (Tok::Bar, 1),
            (b'+', _) => (Tok::Plus, 1),
            (b'-', _) => (Tok::Minus, 1),
            (b'*', _) => (Tok::Star, 1),
            (b'/', _) => (Tok::Slash, 1),
            (b'=', _) => (Tok::Eq, 1),
            (b'<', _) => (Tok::Lt, 1),
            (b'>', _) => (Tok::Gt, 1),
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let v: i64 = text[i..j]
                    .parse()
                    .map_err(|_| ParseError::new(ParseErrorKind::IntegerOverflow, span(i, j, line, line_start)))?;
                (Tok::Int(v), j - i)
            }
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &text[i..j];
                let tok = match word {
                    "_" => Tok::Underscore,
                    "mod" => Tok::Mod,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ if c.is_ascii_uppercase() => Tok::Var(word.to_string()),
                    _ => Tok::Ident(word.to_string()),
                };
                (tok, j - i)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(ParseError::new(
                    ParseErrorKind::UnexpectedChar(ch),
                    span(i, i + ch.len_utf8(), line, line_start),
                ));
            }
        };
        i += len;
        out.push(Token { tok, span: span(start, i, line, line_start) });
    }
    // End of input points at the last character so that the span stays
    // inside the text whenever the text is non-empty.
    let end = text.len();
    let last = text.char_indices().last().map_or(0, |(i, _)| i);
    let last_line_start = text[..last].rfind('\n').map_or(0, |p| p + 1);
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan {
            file: file.map(str::to_string),
            line: 1 + text[..last].matches('\n').count(),
            column: text[last_line_start..last].chars().count() + 1,
            start: last,
            end,
        },
    });
    Ok(out)
}
