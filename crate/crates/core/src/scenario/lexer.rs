#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    Comma,
    Colon,
    Eq,
    Pipe,
    Amp,
    Arrow,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

/// Token with its 1-based column.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub col: usize,
}

fn is_word_char(ch: char) -> bool {
    ch.is_ascii_alphanumeric() || matches!(ch, '_' | '.' | '+' | '-')
}

/// Tokens of one line (comment stripped), or the column of a bad character.
pub(crate) fn lex_line(line: &str) -> Result<Vec<Spanned>, (usize, String)> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let col = i + 1;
        if ch == '#' {
            break;
        }
        if ch == ' ' || ch == '\t' {
            i += 1;
            continue;
        }
        if ch == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Spanned { tok: Tok::Arrow, col });
            i += 2;
            continue;
        }
        let punct = match ch {
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            '|' => Some(Tok::Pipe),
            '&' => Some(Tok::Amp),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = punct {
            out.push(Spanned { tok, col });
            i += 1;
            continue;
        }
        if !is_word_char(ch) {
            return Err((col, format!("unexpected character `{ch}`")));
        }
        let start = i;
        while i < chars.len() && is_word_char(chars[i]) {
            if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                break;
            }
            i += 1;
        }
        out.push(Spanned { tok: Tok::Word(chars[start..i].iter().collect()), col });
    }
    Ok(out)
}
