use super::lexer::{tokenize, Token, TokenKind};
use super::StaticError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl RelOp {
    pub fn from_lexeme(s: &str) -> Option<Self> {
        Some(match s {
            "<" => RelOp::Lt,
            "<=" => RelOp::Le,
            ">" => RelOp::Gt,
            ">=" => RelOp::Ge,
            "==" => RelOp::Eq,
            "!=" => RelOp::Ne,
            _ => return None,
        })
    }

    pub fn eval(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Int(i64),
    Neg(Box<Expr>),
    Binary {
        op: ArithOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub lhs: Expr,
    pub op: RelOp,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintArg {
    Text(String),
    Value(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Declare(Vec<String>),
    Input(Vec<String>),
    Assign { target: String, value: Expr },
    Print(Vec<PrintArg>),
    If {
        cond: Condition,
        then_branch: Box<Stmt>,
        /// Line of the `else` keyword, when an else arm exists.
        else_line: Option<usize>,
        else_branch: Option<Box<Stmt>>,
    },
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub line: usize,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn is_conditional(&self) -> bool {
        matches!(self.kind, StmtKind::If { .. })
    }

    /// Whether this statement or anything beneath it branches.
    pub fn contains_conditional(&self) -> bool {
        match &self.kind {
            StmtKind::If { .. } => true,
            StmtKind::Block(body) => body.iter().any(Stmt::contains_conditional),
            _ => false,
        }
    }

    /// Number of distinct acyclic paths through this statement.
    pub fn leaf_paths(&self) -> usize {
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => then_branch.leaf_paths() + else_branch.as_ref().map_or(1, |e| e.leaf_paths()),
            StmtKind::Block(body) => body.iter().map(Stmt::leaf_paths).product(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub body: Vec<Stmt>,
    pub line_count: usize,
}

impl Program {
    pub fn leaf_paths(&self) -> usize {
        self.body.iter().map(Stmt::leaf_paths).product()
    }
}

pub fn parse(source: &str) -> Result<Program, StaticError> {
    let tokens = tokenize(source)?;
    let lines: Vec<&str> = source.lines().collect();
    let mut p = Parser {
        tokens: &tokens,
        lines: &lines,
        pos: 0,
    };
    let mut body = Vec::new();
    while !p.at_end() {
        body.push(p.statement()?);
    }
    Ok(Program {
        body,
        line_count: lines.len(),
    })
}

struct Parser<'a> {
    tokens: &'a [Token],
    lines: &'a [&'a str],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn current_line(&self) -> usize {
        self.peek()
            .or_else(|| self.tokens.last())
            .map_or(0, |t| t.line)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, StaticError> {
        Err(StaticError::Parse {
            line: self.current_line(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Result<&'a Token, StaticError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => self.error("unexpected end of input"),
        }
    }

    fn expect_symbol(&mut self, s: &str) -> Result<&'a Token, StaticError> {
        match self.peek() {
            Some(t) if t.is_symbol(s) => {
                self.pos += 1;
                Ok(t)
            }
            Some(t) => self.error(format!("expected `{s}`, found `{}`", t.lexeme)),
            None => self.error(format!("expected `{s}`, found end of input")),
        }
    }

    fn eat_symbol(&mut self, s: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_symbol(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn identifier(&mut self) -> Result<String, StaticError> {
        let t = self.next()?;
        if t.kind == TokenKind::Identifier {
            Ok(t.lexeme.clone())
        } else {
            self.pos -= 1;
            self.error(format!("expected identifier, found `{}`", t.lexeme))
        }
    }

    fn identifier_list(&mut self) -> Result<Vec<String>, StaticError> {
        let mut names = vec![self.identifier()?];
        while self.eat_symbol(",") {
            names.push(self.identifier()?);
        }
        self.expect_symbol(";")?;
        Ok(names)
    }

    fn statement(&mut self) -> Result<Stmt, StaticError> {
        let Some(first) = self.peek() else {
            return self.error("expected statement");
        };
        let line = first.line;
        let kind = match (first.kind, first.lexeme.as_str()) {
            (TokenKind::Keyword, "int") => {
                self.pos += 1;
                StmtKind::Declare(self.identifier_list()?)
            }
            (TokenKind::Keyword, "input") => {
                self.pos += 1;
                StmtKind::Input(self.identifier_list()?)
            }
            (TokenKind::Keyword, "print") => {
                self.pos += 1;
                self.print_args()?
            }
            (TokenKind::Keyword, "if") => {
                self.pos += 1;
                self.if_tail()?
            }
            (TokenKind::Keyword, "else") => return self.error("`else` without matching `if`"),
            (TokenKind::Symbol, "{") => {
                self.pos += 1;
                let mut body = Vec::new();
                while !self.eat_symbol("}") {
                    if self.at_end() {
                        return self.error("unclosed `{`");
                    }
                    body.push(self.statement()?);
                }
                StmtKind::Block(body)
            }
            (TokenKind::Identifier, _) => {
                let target = self.identifier()?;
                self.expect_symbol("=")?;
                let value = self.expr()?;
                self.expect_symbol(";")?;
                StmtKind::Assign { target, value }
            }
            _ => return self.error(format!("unexpected `{}`", first.lexeme)),
        };
        Ok(Stmt { line, kind })
    }

    /// Column of the first token on `line`.
    fn line_indent(&self, line: usize) -> usize {
        self.tokens
            .iter()
            .find(|t| t.line == line)
            .map_or(0, |t| t.start)
    }

    /// An `else` that opens its line binds to the `if` at the same
    /// indentation; an `else` mid-line binds to the nearest `if`.
    fn else_binds_here(&self, else_tok: &Token, if_line: usize) -> bool {
        let else_indent = self.line_indent(else_tok.line);
        else_tok.start != else_indent || else_indent == self.line_indent(if_line)
    }

    fn if_tail(&mut self) -> Result<StmtKind, StaticError> {
        let if_line = self.tokens[self.pos - 1].line;
        self.expect_symbol("(")?;
        let lhs = self.expr()?;
        let op_tok = self.next()?;
        let Some(op) = RelOp::from_lexeme(&op_tok.lexeme) else {
            self.pos -= 1;
            return self.error(format!("expected comparison, found `{}`", op_tok.lexeme));
        };
        let rhs = self.expr()?;
        self.expect_symbol(")")?;
        let then_branch = Box::new(self.statement()?);
        let (else_line, else_branch) = match self.peek() {
            Some(t) if t.is_keyword("else") && self.else_binds_here(t, if_line) => {
                self.pos += 1;
                (Some(t.line), Some(Box::new(self.statement()?)))
            }
            _ => (None, None),
        };
        Ok(StmtKind::If {
            cond: Condition { lhs, op, rhs },
            then_branch,
            else_line,
            else_branch,
        })
    }

    fn print_args(&mut self) -> Result<StmtKind, StaticError> {
        self.expect_symbol("(")?;
        let mut args = Vec::new();
        loop {
            let t = self.peek();
            if t.is_some_and(|t| t.kind == TokenKind::Symbol && is_quote_lexeme(&t.lexeme)) {
                let open = self.next()?;
                loop {
                    let t = self.next()?;
                    if t.kind == TokenKind::Symbol && is_quote_lexeme(&t.lexeme) && t.line == open.line {
                        let text = self.lines[open.line][open.end..t.start].to_string();
                        args.push(PrintArg::Text(text));
                        break;
                    }
                }
            } else {
                args.push(PrintArg::Value(self.expr()?));
            }
            if !self.eat_symbol(",") {
                break;
            }
        }
        self.expect_symbol(")")?;
        self.expect_symbol(";")?;
        Ok(StmtKind::Print(args))
    }

    fn expr(&mut self) -> Result<Expr, StaticError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.is_symbol("+") => ArithOp::Add,
                Some(t) if t.is_symbol("-") => ArithOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, StaticError> {
        let mut lhs = self.atom()?;
        while self.eat_symbol("*") {
            let rhs = self.atom()?;
            lhs = Expr::Binary {
                op: ArithOp::Mul,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, StaticError> {
        let t = self.next()?;
        match t.kind {
            TokenKind::Identifier => Ok(Expr::Var(t.lexeme.clone())),
            TokenKind::Literal => match t.lexeme.parse() {
                Ok(v) => Ok(Expr::Int(v)),
                Err(_) => self.error(format!("integer literal `{}` out of range", t.lexeme)),
            },
            TokenKind::Symbol if t.lexeme == "-" => Ok(Expr::Neg(Box::new(self.atom()?))),
            TokenKind::Symbol if t.lexeme == "(" => {
                let e = self.expr()?;
                self.expect_symbol(")")?;
                Ok(e)
            }
            _ => {
                self.pos -= 1;
                self.error(format!("expected expression, found `{}`", t.lexeme))
            }
        }
    }
}

fn is_quote_lexeme(s: &str) -> bool {
    matches!(s, "\"" | "\u{201c}" | "\u{201d}")
}
