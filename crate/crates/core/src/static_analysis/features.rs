use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Token, TokenKind};
use super::parser::{parse, Program, Stmt, StmtKind};
use super::StaticError;

/// Token-derived metrics for one source line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFeatures {
    /// Character length of the line, trailing whitespace excluded.
    pub length: usize,
    pub variables: usize,
    pub symbols: usize,
    /// Reserved words plus identifiers in callee position.
    pub keywords: usize,
    /// Numeric literals and string fragments.
    pub literals: usize,
    pub branch_paths: usize,
}

impl LineFeatures {
    pub fn token_total(&self) -> usize {
        self.variables + self.symbols + self.keywords + self.literals
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextFeatures {
    pub lines: Vec<LineFeatures>,
}

impl TextFeatures {
    /// Sum of per-line character lengths.
    pub fn total_length(&self) -> usize {
        self.lines.iter().map(|l| l.length).sum()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn total_variables(&self) -> usize {
        self.lines.iter().map(|l| l.variables).sum()
    }

    pub fn total_symbols(&self) -> usize {
        self.lines.iter().map(|l| l.symbols).sum()
    }
}

fn classify_line(tokens: &[&Token], out: &mut LineFeatures) {
    for (i, t) in tokens.iter().enumerate() {
        match t.kind {
            TokenKind::Identifier => {
                let is_callee = tokens.get(i + 1).is_some_and(|n| n.is_symbol("("));
                if is_callee {
                    out.keywords += 1;
                } else {
                    out.variables += 1;
                }
            }
            TokenKind::Keyword => out.keywords += 1,
            TokenKind::Symbol => out.symbols += 1,
            TokenKind::Literal | TokenKind::StringFragment => out.literals += 1,
        }
    }
}

pub fn count_text_features(source: &str) -> Result<TextFeatures, StaticError> {
    let tokens = tokenize(source)?;
    let program = parse(source)?;
    let paths = branch_path_counts(&program);

    let mut lines: Vec<LineFeatures> = source
        .lines()
        .map(|l| LineFeatures {
            length: l.trim_end().chars().count(),
            ..Default::default()
        })
        .collect();
    for (i, feat) in lines.iter_mut().enumerate() {
        let on_line: Vec<&Token> = tokens.iter().filter(|t| t.line == i).collect();
        classify_line(&on_line, feat);
        feat.branch_paths = paths[i];
    }
    Ok(TextFeatures { lines })
}

/// Per-line branch-path counts.
///
/// Rules, applied to the syntax tree:
/// - a statement inside a conditional arm that does not itself branch: 1
/// - an `if` header nested inside another conditional: 2
/// - an `else` line: the number of leaf paths through its arm
/// - the outermost `if` header: the larger leaf-path count of its two arms
/// - any other top-level line: the largest such value over top-level `if`s, or 1
pub fn branch_path_counts(program: &Program) -> Vec<usize> {
    let outer_arm_max = |s: &Stmt| match &s.kind {
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => then_branch
            .leaf_paths()
            .max(else_branch.as_ref().map_or(1, |e| e.leaf_paths())),
        _ => 1,
    };
    let top_value = program
        .body
        .iter()
        .filter(|s| s.contains_conditional())
        .flat_map(|s| top_level_ifs(s))
        .map(outer_arm_max)
        .max()
        .unwrap_or(1);

    let mut counts = vec![top_value; program.line_count];
    for stmt in &program.body {
        assign(stmt, false, top_value, &mut counts);
    }
    counts
}

fn top_level_ifs(stmt: &Stmt) -> Vec<&Stmt> {
    match &stmt.kind {
        StmtKind::If { .. } => vec![stmt],
        StmtKind::Block(body) => body.iter().flat_map(top_level_ifs).collect(),
        _ => Vec::new(),
    }
}

fn assign(stmt: &Stmt, nested: bool, top_value: usize, counts: &mut [usize]) {
    match &stmt.kind {
        StmtKind::If {
            then_branch,
            else_line,
            else_branch,
            ..
        } => {
            counts[stmt.line] = if nested {
                2
            } else {
                then_branch
                    .leaf_paths()
                    .max(else_branch.as_ref().map_or(1, |e| e.leaf_paths()))
            };
            assign(then_branch, true, top_value, counts);
            if let (Some(line), Some(arm)) = (else_line, else_branch) {
                if *line != arm.line {
                    counts[*line] = arm.leaf_paths();
                }
                assign(arm, true, top_value, counts);
            }
        }
        StmtKind::Block(body) => {
            if nested {
                counts[stmt.line] = 1;
            }
            for s in body {
                assign(s, nested, top_value, counts);
            }
        }
        _ => counts[stmt.line] = if nested { 1 } else { top_value },
    }
}
