use serde::{Deserialize, Serialize};

use super::StaticError;

/// Words that are never counted as variables.
pub const RESERVED: [&str; 5] = ["int", "input", "if", "else", "print"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Symbol,
    Literal,
    StringFragment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Zero-based line index within the source.
    pub line: usize,
    /// Byte range of the lexeme within its line.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is_symbol(&self, s: &str) -> bool {
        self.kind == TokenKind::Symbol && self.lexeme == s
    }

    pub fn is_keyword(&self, s: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == s
    }
}

const TWO_CHAR_OPS: [&str; 6] = ["==", "!=", "<=", ">=", "&&", "||"];
const ONE_CHAR_OPS: &str = "=<>+-*/%(){},;!";

fn is_quote(c: char) -> bool {
    matches!(c, '"' | '\u{201c}' | '\u{201d}')
}

fn is_word(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits toy-language source into tokens. `//` comments are dropped.
///
/// String literals are broken into their quote characters, word fragments,
/// and individual punctuation characters, so `"Median:"` yields four tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, StaticError> {
    let mut tokens = Vec::new();
    for (line_no, line) in source.lines().enumerate() {
        tokenize_line(line, line_no, &mut tokens)?;
    }
    Ok(tokens)
}

pub(crate) fn tokenize_line(
    line: &str,
    line_no: usize,
    out: &mut Vec<Token>,
) -> Result<(), StaticError> {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(line.len(), |&(b, _)| b);
    let push = |out: &mut Vec<Token>, kind, start: usize, end: usize| {
        out.push(Token {
            kind,
            lexeme: line[start..end].to_string(),
            line: line_no,
            start,
            end,
        })
    };

    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if line[pos..].starts_with("//") {
            break;
        }
        if is_quote(c) {
            push(out, TokenKind::Symbol, pos, end_of(i + 1));
            i += 1;
            let mut closed = false;
            while i < chars.len() {
                let (p, ch) = chars[i];
                if is_quote(ch) {
                    push(out, TokenKind::Symbol, p, end_of(i + 1));
                    i += 1;
                    closed = true;
                    break;
                }
                if ch.is_whitespace() {
                    i += 1;
                } else if is_word(ch) {
                    let mut j = i;
                    while j < chars.len() && is_word(chars[j].1) {
                        j += 1;
                    }
                    push(out, TokenKind::StringFragment, p, end_of(j));
                    i = j;
                } else {
                    push(out, TokenKind::Symbol, p, end_of(i + 1));
                    i += 1;
                }
            }
            if !closed {
                return Err(StaticError::Lex {
                    line: line_no,
                    message: "unterminated string literal".into(),
                });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            push(out, TokenKind::Literal, pos, end_of(j));
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && is_word(chars[j].1) {
                j += 1;
            }
            let word = &line[pos..end_of(j)];
            let kind = if RESERVED.contains(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            push(out, kind, pos, end_of(j));
            i = j;
            continue;
        }
        if let Some(op) = TWO_CHAR_OPS.iter().find(|op| line[pos..].starts_with(**op)) {
            push(out, TokenKind::Symbol, pos, pos + op.len());
            i += 2;
            continue;
        }
        if ONE_CHAR_OPS.contains(c) {
            push(out, TokenKind::Symbol, pos, end_of(i + 1));
            i += 1;
            continue;
        }
        return Err(StaticError::Lex {
            line: line_no,
            message: format!("illegal character {c:?}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn assignment_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("m = z;"),
            vec![
                (Identifier, "m".into()),
                (Symbol, "=".into()),
                (Identifier, "z".into()),
                (Symbol, ";".into()),
            ]
        );
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("   \n\n").unwrap().is_empty());
    }

    #[test]
    fn condition_header() {
        let toks = tokenize("if (y < z)").unwrap();
        let idents = toks.iter().filter(|t| t.kind == TokenKind::Identifier).count();
        let syms = toks.iter().filter(|t| t.kind == TokenKind::Symbol).count();
        assert_eq!((idents, syms), (2, 3));
    }

    #[test]
    fn string_literal_is_split() {
        let toks = tokenize("print(\"Median:\", m);").unwrap();
        let lexemes: Vec<_> = toks.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lexemes, ["print", "(", "\"", "Median", ":", "\"", ",", "m", ")", ";"]);
        let curly = tokenize("print(\u{201c}Median:\u{201d}, m);").unwrap();
        assert_eq!(curly.len(), toks.len());
    }

    #[test]
    fn comments_and_two_char_ops() {
        let toks = tokenize("if (a <= b) // note").unwrap();
        assert!(toks.iter().any(|t| t.lexeme == "<="));
        assert!(!toks.iter().any(|t| t.lexeme == "note"));
    }

    #[test]
    fn lex_errors_carry_line() {
        match tokenize("m = z;\nm = @;") {
            Err(StaticError::Lex { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            tokenize("print(\"abc);"),
            Err(StaticError::Lex { line: 0, .. })
        ));
    }

    #[test]
    fn spans_cover_lexemes() {
        let src = "  x = y + 10;";
        for t in tokenize(src).unwrap() {
            assert_eq!(&src[t.start..t.end], t.lexeme);
        }
    }
}
