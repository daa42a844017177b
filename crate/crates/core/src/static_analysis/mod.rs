//! Text-based features for a small C-like language.
//!
//! The language covers declarations (`int`), `input`, assignments, `print`
//! and `if` / `else if` / `else` chains with single-statement or braced arms.
//! Every source line is one statement record; features are computed per line.

pub mod cfg;
pub mod features;
pub mod lexer;
pub mod parser;

use thiserror::Error;

pub use cfg::{build_cfg, BasicBlock, Cfg};
pub use features::{branch_path_counts, count_text_features, LineFeatures, TextFeatures};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaticError {
    #[error("lex error on line {}: {message}", line + 1)]
    Lex { line: usize, message: String },
    #[error("parse error on line {}: {message}", line + 1)]
    Parse { line: usize, message: String },
}

/// The faulty median-of-three program with its static feature table.
///
/// Rows are `(source line, branch paths, variables, symbols)`.
pub const MEDIAN_TABLE: [(&str, usize, usize, usize); 14] = [
    ("int x, y, z, m;", 3, 4, 4),
    ("input x, y, z;", 3, 3, 3),
    ("m = z;", 3, 2, 2),
    ("if (y < z)", 3, 2, 3),
    ("    if (x < y)", 2, 2, 3),
    ("        m = y;", 1, 2, 2),
    ("    else if (x < z)", 2, 2, 3),
    ("        m = y; //bug", 1, 2, 2),
    ("else", 3, 0, 0),
    ("    if (x > y)", 2, 2, 3),
    ("        m = y;", 1, 2, 2),
    ("    else if (x > z)", 2, 2, 3),
    ("        m = x;", 1, 2, 2),
    ("print(\u{201c}Median:\u{201d}, m);", 3, 1, 7),
];

pub fn median_table_source() -> String {
    MEDIAN_TABLE
        .iter()
        .map(|row| row.0)
        .collect::<Vec<_>>()
        .join("\n")
}
