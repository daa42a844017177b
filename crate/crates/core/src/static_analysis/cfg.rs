use serde::{Deserialize, Serialize};

use super::parser::{parse, Program, Stmt, StmtKind};
use super::StaticError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicBlock {
    /// Source lines (statement ids) in execution order.
    pub lines: Vec<usize>,
    /// True when the block ends in a two-way branch.
    pub conditional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfg {
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<(usize, usize)>,
    pub entry: usize,
    pub exit: usize,
}

impl Cfg {
    pub fn successors(&self, block: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|(from, _)| *from == block)
            .map(|&(_, to)| to)
            .collect()
    }

    pub fn block_of_line(&self, line: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.lines.contains(&line))
    }

    /// Counts entry-to-exit paths by depth-first enumeration.
    pub fn count_paths(&self) -> usize {
        fn dfs(cfg: &Cfg, node: usize, on_path: &mut Vec<bool>) -> usize {
            if node == cfg.exit {
                return 1;
            }
            on_path[node] = true;
            let mut total = 0;
            for s in cfg.successors(node) {
                if !on_path[s] {
                    total += dfs(cfg, s, on_path);
                }
            }
            on_path[node] = false;
            total
        }
        let mut on_path = vec![false; self.blocks.len()];
        dfs(self, self.entry, &mut on_path)
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.blocks.len()];
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            for &(a, b) in &self.edges {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == n && !seen[to] {
                    stack.push(to);
                }
            }
        }
        seen
    }

    /// Checks reachability from entry, reachability of exit, and branch arity.
    pub fn is_well_formed(&self) -> bool {
        let fwd = self.reach(self.entry, true);
        let bwd = self.reach(self.exit, false);
        let arity_ok = self.blocks.iter().enumerate().all(|(i, b)| {
            let n = self.successors(i).len();
            if b.conditional {
                n == 2
            } else {
                n <= 1
            }
        });
        arity_ok && fwd.iter().all(|&x| x) && bwd.iter().all(|&x| x)
    }
}

pub fn build_cfg(source: &str) -> Result<Cfg, StaticError> {
    Ok(cfg_from_program(&parse(source)?))
}

pub fn cfg_from_program(program: &Program) -> Cfg {
    let mut b = Builder {
        blocks: vec![BasicBlock::default()],
        edges: Vec::new(),
    };
    let exit = b.sequence(&program.body, 0);
    Cfg {
        blocks: b.blocks,
        edges: b.edges,
        entry: 0,
        exit,
    }
}

struct Builder {
    blocks: Vec<BasicBlock>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn new_block(&mut self) -> usize {
        self.blocks.push(BasicBlock::default());
        self.blocks.len() - 1
    }

    fn push_line(&mut self, block: usize, line: usize) {
        let lines = &mut self.blocks[block].lines;
        if lines.last() != Some(&line) {
            lines.push(line);
        }
    }

    fn sequence(&mut self, stmts: &[Stmt], mut cur: usize) -> usize {
        for s in stmts {
            cur = self.statement(s, cur);
        }
        cur
    }

    fn statement(&mut self, stmt: &Stmt, cur: usize) -> usize {
        match &stmt.kind {
            StmtKind::Block(body) => self.sequence(body, cur),
            StmtKind::If {
                then_branch,
                else_line,
                else_branch,
                ..
            } => {
                self.push_line(cur, stmt.line);
                self.blocks[cur].conditional = true;

                let then_start = self.new_block();
                let then_end = self.statement(then_branch, then_start);

                let else_arm = else_branch.as_ref().map(|arm| {
                    let start = self.new_block();
                    if let Some(l) = *else_line {
                        self.push_line(start, l);
                    }
                    (start, self.statement(arm, start))
                });

                let merge = self.new_block();
                self.edges.push((cur, then_start));
                self.edges.push((then_end, merge));
                match else_arm {
                    Some((start, end)) => {
                        self.edges.push((cur, start));
                        self.edges.push((end, merge));
                    }
                    None => self.edges.push((cur, merge)),
                }
                merge
            }
            _ => {
                self.push_line(cur, stmt.line);
                cur
            }
        }
    }
}
