//! Tree-walking interpreter for the toy language, recording line coverage.

use std::collections::HashMap;

use crate::static_analysis::parser::{ArithOp, Condition, Expr, PrintArg, Program, Stmt, StmtKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub output: Vec<String>,
    pub covered: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("line {}: use of undeclared variable `{name}`", line + 1)]
    Undeclared { line: usize, name: String },
    #[error("line {}: input exhausted", line + 1)]
    InputExhausted { line: usize },
}

struct Machine<'a> {
    vars: HashMap<&'a str, i64>,
    inputs: std::slice::Iter<'a, i64>,
    output: Vec<String>,
    covered: Vec<bool>,
}

pub fn run_program(program: &Program, inputs: &[i64]) -> Result<RunResult, RuntimeError> {
    let mut m = Machine {
        vars: HashMap::new(),
        inputs: inputs.iter(),
        output: Vec::new(),
        covered: vec![false; program.line_count],
    };
    for s in &program.body {
        m.exec(s)?;
    }
    Ok(RunResult {
        output: m.output,
        covered: m.covered,
    })
}

impl<'a> Machine<'a> {
    fn var(&self, line: usize, name: &str) -> Result<i64, RuntimeError> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| RuntimeError::Undeclared {
                line,
                name: name.into(),
            })
    }

    fn eval(&self, line: usize, e: &Expr) -> Result<i64, RuntimeError> {
        Ok(match e {
            Expr::Var(n) => self.var(line, n)?,
            Expr::Int(v) => *v,
            Expr::Neg(inner) => self.eval(line, inner)?.wrapping_neg(),
            Expr::Binary { op, lhs, rhs } => {
                let (a, b) = (self.eval(line, lhs)?, self.eval(line, rhs)?);
                match op {
                    ArithOp::Add => a.wrapping_add(b),
                    ArithOp::Sub => a.wrapping_sub(b),
                    ArithOp::Mul => a.wrapping_mul(b),
                }
            }
        })
    }

    fn test(&self, line: usize, c: &Condition) -> Result<bool, RuntimeError> {
        Ok(c.op.eval(self.eval(line, &c.lhs)?, self.eval(line, &c.rhs)?))
    }

    fn exec(&mut self, s: &'a Stmt) -> Result<(), RuntimeError> {
        self.covered[s.line] = true;
        match &s.kind {
            StmtKind::Declare(names) => {
                for n in names {
                    self.vars.insert(n, 0);
                }
            }
            StmtKind::Input(names) => {
                for n in names {
                    self.var(s.line, n)?;
                    let v = *self
                        .inputs
                        .next()
                        .ok_or(RuntimeError::InputExhausted { line: s.line })?;
                    self.vars.insert(n, v);
                }
            }
            StmtKind::Assign { target, value } => {
                self.var(s.line, target)?;
                let v = self.eval(s.line, value)?;
                self.vars.insert(target, v);
            }
            StmtKind::Print(args) => {
                let mut line = String::new();
                for a in args {
                    match a {
                        PrintArg::Text(t) => line.push_str(t),
                        PrintArg::Value(e) => line.push_str(&self.eval(s.line, e)?.to_string()),
                    }
                }
                self.output.push(line);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_line,
                else_branch,
            } => {
                if self.test(s.line, cond)? {
                    self.exec(then_branch)?;
                } else if let Some(arm) = else_branch {
                    if let Some(l) = else_line {
                        self.covered[*l] = true;
                    }
                    self.exec(arm)?;
                }
            }
            StmtKind::Block(body) => {
                for b in body {
                    self.exec(b)?;
                }
            }
        }
        Ok(())
    }
}
