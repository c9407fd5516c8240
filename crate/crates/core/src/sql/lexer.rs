use super::SqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Raw numeric text, sign excluded.
    Number(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 15] = [
    "<=", ">=", "<>", "!=", "(", ")", ",", ";", "*", ".", "=", "<", ">", "[", "]",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, SqlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut s = String::new();
            let mut seen_exp = false;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = seen_exp
                    && (d == '+' || d == '-')
                    && matches!(s.chars().last(), Some('e' | 'E'));
                if d.is_ascii_digit() || d == '.' || exp_sign {
                    s.push(d);
                } else if (d == 'e' || d == 'E') && !seen_exp {
                    seen_exp = true;
                    s.push(d);
                } else {
                    break;
                }
                advance(&mut i, &mut line, &mut col, d);
            }
            if s.parse::<f64>().is_err() {
                return Err(SqlError::syntax(tl, tc, format!("malformed number '{s}'")));
            }
            out.push(Token {
                tok: Tok::Number(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '\'' {
            let mut s = String::new();
            advance(&mut i, &mut line, &mut col, c);
            loop {
                match chars.get(i) {
                    None => return Err(SqlError::syntax(tl, tc, "unterminated string literal")),
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        s.push('\'');
                        advance(&mut i, &mut line, &mut col, '\'');
                        advance(&mut i, &mut line, &mut col, '\'');
                    }
                    Some('\'') => {
                        advance(&mut i, &mut line, &mut col, '\'');
                        break;
                    }
                    Some(&d) => {
                        s.push(d);
                        advance(&mut i, &mut line, &mut col, d);
                    }
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '-' {
            advance(&mut i, &mut line, &mut col, c);
            out.push(Token {
                tok: Tok::Sym("-"),
                line: tl,
                col: tc,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                for _ in 0..s.len() {
                    {
                        let ch = chars[i];
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
                out.push(Token {
                    tok: Tok::Sym(s),
                    line: tl,
                    col: tc,
                });
            }
            None => {
                return Err(SqlError::syntax(
                    tl,
                    tc,
                    format!("unexpected character '{c}'"),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
