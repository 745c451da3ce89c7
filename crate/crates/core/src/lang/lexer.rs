use crate::error::{ParseError, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Var,
    Array,
    If,
    Else,
    While,
    Assert,
    Output,
    Cost,
    And,
    Or,
    Not,
    Colon,
    Comma,
    Assign,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Var => "var",
            Tok::Array => "array",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Assert => "assert",
            Tok::Output => "output",
            Tok::Cost => "cost",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let at = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "var" => Tok::Var,
                "array" => Tok::Array,
                "if" => Tok::If,
                "else" => Tok::Else,
                "while" => Tok::While,
                "assert" => Tok::Assert,
                "output" => Tok::Output,
                "cost" => Tok::Cost,
                "and" => Tok::And,
                "or" => Tok::Or,
                "not" => Tok::Not,
                _ => Tok::Ident(word),
            };
            out.push((tok, at));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let (radix, digits_from) =
                if c == '0' && matches!(chars.get(i + 1), Some('x') | Some('X')) { (16, i + 2) } else { (10, i) };
            i = digits_from;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let digits: String = chars[digits_from..i].iter().collect();
            col += i - start;
            let value = u64::from_str_radix(&digits, radix).map_err(|_| ParseError::Syntax {
                at,
                message: format!("invalid integer literal `{}`", chars[start..i].iter().collect::<String>()),
            })?;
            out.push((Tok::Int(value), at));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::And, 2),
            ('|', Some('|')) => (Tok::Or, 2),
            ('=', _) => (Tok::Assign, 1),
            ('!', _) => (Tok::Not, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            _ => return Err(ParseError::Syntax { at, message: format!("unexpected character `{c}`") }),
        };
        out.push((tok, at));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}
