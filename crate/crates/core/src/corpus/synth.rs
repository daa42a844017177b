//! Synthetic fault datasets built from small toy-language templates.
//!
//! A template is an oracle program; one statement is corrupted with a
//! mutation operator, random test inputs are executed against both versions,
//! and a mutant campaign over the faulty program fills the kill matrix.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::interp::{run_program, RunResult};
use super::{CorpusError, FaultDataset, Mutant, Statement, Verdict};
use crate::static_analysis::lexer::{tokenize, TokenKind};
use crate::static_analysis::parser::{parse, Program, RelOp, StmtKind};

const INPUT_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    Median3,
    Triangle,
    MaxArray,
}

impl Template {
    pub const ALL: [Template; 3] = [Template::Median3, Template::Triangle, Template::MaxArray];

    pub fn name(self) -> &'static str {
        match self {
            Template::Median3 => "median3",
            Template::Triangle => "triangle",
            Template::MaxArray => "maxarray",
        }
    }

    fn input_range(self) -> std::ops::RangeInclusive<i64> {
        match self {
            Template::Median3 => 0..=9,
            Template::Triangle => 1..=6,
            Template::MaxArray => 0..=20,
        }
    }

    /// Correct program lines and the number of inputs each test supplies.
    pub fn program(self, statements: Option<usize>) -> (Vec<String>, usize) {
        let lines: Vec<String> = match self {
            Template::Median3 => [
                "int x, y, z, m;",
                "input x, y, z;",
                "m = z;",
                "if (y < z)",
                "    if (x < y)",
                "        m = y;",
                "    else if (x < z)",
                "        m = x;",
                "else",
                "    if (x > y)",
                "        m = y;",
                "    else if (x > z)",
                "        m = x;",
                "print(\"Median:\", m);",
            ]
            .map(String::from)
            .into(),
            Template::Triangle => [
                "int a, b, c, t;",
                "input a, b, c;",
                "t = 0;",
                "if (a + b <= c)",
                "    t = 4;",
                "else if (a + c <= b)",
                "    t = 4;",
                "else if (b + c <= a)",
                "    t = 4;",
                "else if (a == b)",
                "    if (b == c)",
                "        t = 1;",
                "    else",
                "        t = 2;",
                "else if (a == c)",
                "    t = 2;",
                "else if (b == c)",
                "    t = 2;",
                "else",
                "    t = 3;",
                "print(\"Type:\", t);",
            ]
            .map(String::from)
            .into(),
            Template::MaxArray => {
                let k = statements.map_or(5, |n| (n.saturating_sub(2) / 2).max(2));
                let names: Vec<String> = (0..k).map(|i| format!("a{i}")).collect();
                let mut lines = vec![
                    format!("int {}, m;", names.join(", ")),
                    format!("input {};", names.join(", ")),
                    "m = a0;".to_string(),
                ];
                for n in &names[1..] {
                    lines.push(format!("if ({n} > m)"));
                    lines.push(format!("    m = {n};"));
                }
                lines.push("print(\"Max:\", m);".to_string());
                return (lines, k);
            }
        };
        let inputs = match self {
            Template::Median3 | Template::Triangle => 3,
            Template::MaxArray => unreachable!(),
        };
        (lines, inputs)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown template {s:?} (expected median3, triangle or maxarray)"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    /// First applicable of relational flip, arithmetic flip, variable swap, constant shift.
    #[default]
    Auto,
    RelationalFlip,
    ArithmeticFlip,
    VariableSwap,
    ConstantShift,
}

impl FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => FaultKind::Auto,
            "relational-flip" | "relational-op-flip" => FaultKind::RelationalFlip,
            "arithmetic-flip" => FaultKind::ArithmeticFlip,
            "variable-swap" => FaultKind::VariableSwap,
            "constant-shift" => FaultKind::ConstantShift,
            _ => return Err(format!("unknown fault kind {s:?}")),
        })
    }
}

/// Which statement to corrupt and how. `statement: None` lets the seed pick
/// a corruption that fails some but not all tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRule {
    pub statement: Option<usize>,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub template: Template,
    /// Only the array template is resizable; the others have a fixed shape.
    pub statements: Option<usize>,
    pub tests: usize,
    pub fault: FaultRule,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(template: Template, tests: usize, seed: u64) -> Self {
        SyntheticSpec {
            template,
            statements: None,
            tests,
            fault: FaultRule::default(),
            seed,
        }
    }
}

/// A single-token rewrite of one source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutation {
    pub line: usize,
    pub start: usize,
    pub end: usize,
    pub replacement: String,
    pub kind: FaultKind,
}

impl Mutation {
    pub fn apply(&self, lines: &[String]) -> Vec<String> {
        let mut out = lines.to_vec();
        let l = &mut out[self.line];
        l.replace_range(self.start..self.end, &self.replacement);
        out
    }
}

const REL_OPS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

fn flipped_relop(op: &str) -> &'static str {
    match op {
        "<" => ">",
        ">" => "<",
        "<=" => ">=",
        ">=" => "<=",
        "==" => "!=",
        _ => "==",
    }
}

fn declared_variables(program: &Program) -> Vec<String> {
    program
        .body
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Declare(names) => Some(names.clone()),
            _ => None,
        })
        .flatten()
        .collect()
}

/// Every mutation the catalogue can apply to `line`, grouped by operator in
/// the order relational, arithmetic, variable, constant.
pub fn line_mutations(text: &str, line: usize, variables: &[String]) -> Vec<Mutation> {
    let Ok(tokens) = tokenize(text) else {
        return Vec::new();
    };
    if tokens
        .first()
        .is_some_and(|t| t.is_keyword("int") || t.is_keyword("input"))
    {
        return Vec::new();
    }
    let mk = |t: &crate::static_analysis::Token, replacement: String, kind| Mutation {
        line,
        start: t.start,
        end: t.end,
        replacement,
        kind,
    };
    let mut rel = Vec::new();
    let mut arith = Vec::new();
    let mut var = Vec::new();
    let mut constant = Vec::new();
    let mut in_string = false;
    for (i, t) in tokens.iter().enumerate() {
        if t.kind == TokenKind::Symbol && matches!(t.lexeme.as_str(), "\"" | "\u{201c}" | "\u{201d}")
        {
            in_string = !in_string;
            continue;
        }
        if in_string {
            continue;
        }
        match t.kind {
            TokenKind::Symbol if RelOp::from_lexeme(&t.lexeme).is_some() => {
                let flip = flipped_relop(&t.lexeme);
                rel.push(mk(t, flip.into(), FaultKind::RelationalFlip));
                for op in REL_OPS {
                    if op != t.lexeme && op != flip {
                        rel.push(mk(t, op.into(), FaultKind::RelationalFlip));
                    }
                }
            }
            TokenKind::Symbol if matches!(t.lexeme.as_str(), "+" | "-" | "*") => {
                let alts: &[&str] = match t.lexeme.as_str() {
                    "+" => &["-", "*"],
                    "-" => &["+", "*"],
                    _ => &["+", "-"],
                };
                for a in alts {
                    arith.push(mk(t, (*a).into(), FaultKind::ArithmeticFlip));
                }
            }
            TokenKind::Identifier => {
                let is_target = tokens.get(i + 1).is_some_and(|n| n.is_symbol("="));
                if is_target || !variables.contains(&t.lexeme) {
                    continue;
                }
                let pos = variables.iter().position(|v| *v == t.lexeme).unwrap();
                for k in 1..variables.len() {
                    let v = &variables[(pos + k) % variables.len()];
                    var.push(mk(t, v.clone(), FaultKind::VariableSwap));
                }
            }
            TokenKind::Literal => {
                if let Ok(v) = t.lexeme.parse::<i64>() {
                    constant.push(mk(t, (v + 1).to_string(), FaultKind::ConstantShift));
                    if v > 0 {
                        constant.push(mk(t, (v - 1).to_string(), FaultKind::ConstantShift));
                    }
                }
            }
            _ => {}
        }
    }
    rel.into_iter()
        .chain(arith)
        .chain(var)
        .chain(constant)
        .collect()
}

fn injected_fault(
    lines: &[String],
    variables: &[String],
    line: usize,
    kind: FaultKind,
) -> Result<Mutation, CorpusError> {
    let text = lines.get(line).ok_or_else(|| {
        CorpusError::InfeasibleSpec(format!(
            "fault statement {line} out of range for {} statements",
            lines.len()
        ))
    })?;
    let candidates = line_mutations(text, line, variables);
    let found = match kind {
        FaultKind::Auto => candidates.into_iter().next(),
        k => candidates.into_iter().find(|m| m.kind == k),
    };
    found.ok_or_else(|| {
        CorpusError::InfeasibleSpec(format!("no {kind:?} site on statement {line}: {text:?}"))
    })
}

struct Campaign {
    tests: Vec<Vec<i64>>,
    expected: Vec<Vec<String>>,
}

impl Campaign {
    fn new(correct: &Program, tests: Vec<Vec<i64>>) -> Result<Self, CorpusError> {
        let expected = tests
            .iter()
            .map(|t| run_program(correct, t).map(|r| r.output))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::Program(e.to_string()))?;
        Ok(Campaign {
            tests,
            expected,
        })
    }

    fn runs(&self, program: &Program) -> Vec<Option<RunResult>> {
        self.tests.iter().map(|t| run_program(program, t).ok()).collect()
    }

    fn failures(&self, runs: &[Option<RunResult>]) -> usize {
        runs.iter()
            .zip(&self.expected)
            .filter(|(r, e)| r.as_ref().is_none_or(|r| r.output != **e))
            .count()
    }
}

fn draw_tests(rng: &mut ChaCha8Rng, template: Template, n: usize, arity: usize) -> Vec<Vec<i64>> {
    let range = template.input_range();
    (0..n)
        .map(|_| (0..arity).map(|_| rng.random_range(range.clone())).collect())
        .collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<FaultDataset, CorpusError> {
    if spec.statements.is_some_and(|n| n < 5) {
        return Err(CorpusError::InfeasibleSpec(
            "at least 5 statements are required".into(),
        ));
    }
    if spec.tests < 4 {
        return Err(CorpusError::InfeasibleSpec("at least 4 tests are required".into()));
    }
    let (lines, arity) = spec.template.program(spec.statements);
    let source = lines.join("\n");
    let correct = parse(&source).map_err(|e| CorpusError::Program(e.to_string()))?;
    let variables = declared_variables(&correct);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let parse_mutant = |lines: &[String]| parse(&lines.join("\n")).ok();

    let mut chosen = None;
    match spec.fault.statement {
        Some(line) => {
            let fault = injected_fault(&lines, &variables, line, spec.fault.kind)?;
            let faulty_lines = fault.apply(&lines);
            let faulty = parse_mutant(&faulty_lines)
                .ok_or_else(|| CorpusError::InfeasibleSpec("fault breaks the program".into()))?;
            for _ in 0..INPUT_ATTEMPTS {
                let tests = draw_tests(&mut rng, spec.template, spec.tests, arity);
                let campaign = Campaign::new(&correct, tests)?;
                let runs = campaign.runs(&faulty);
                if campaign.failures(&runs) >= 1 {
                    chosen = Some((fault, faulty_lines, campaign, runs));
                    break;
                }
            }
        }
        None => {
            let mut candidates: Vec<Mutation> = lines
                .iter()
                .enumerate()
                .flat_map(|(i, l)| line_mutations(l, i, &variables))
                .filter(|m| spec.fault.kind == FaultKind::Auto || m.kind == spec.fault.kind)
                .collect();
            candidates.shuffle(&mut rng);
            'attempts: for _ in 0..INPUT_ATTEMPTS / 4 {
                let tests = draw_tests(&mut rng, spec.template, spec.tests, arity);
                let campaign = Campaign::new(&correct, tests)?;
                for fault in &candidates {
                    let faulty_lines = fault.apply(&lines);
                    let Some(faulty) = parse_mutant(&faulty_lines) else {
                        continue;
                    };
                    let runs = campaign.runs(&faulty);
                    if runs.iter().any(Option::is_none) {
                        continue;
                    }
                    let fails = campaign.failures(&runs);
                    if fails >= 1 && fails < spec.tests {
                        chosen = Some((fault.clone(), faulty_lines, campaign, runs));
                        break 'attempts;
                    }
                }
            }
        }
    }
    let Some((fault, faulty_lines, campaign, runs)) = chosen else {
        return Err(CorpusError::InfeasibleSpec(format!(
            "no failing test found for {} after {INPUT_ATTEMPTS} input draws",
            spec.template
        )));
    };

    let n_stmts = faulty_lines.len();
    let faulty_runs: Vec<RunResult> = runs
        .into_iter()
        .map(|r| r.ok_or_else(|| CorpusError::InfeasibleSpec("faulty program crashed".into())))
        .collect::<Result<_, _>>()?;
    let outcomes: Vec<Verdict> = faulty_runs
        .iter()
        .zip(&campaign.expected)
        .map(|(r, e)| if r.output == *e { Verdict::Pass } else { Verdict::Fail })
        .collect();
    let coverage: Vec<Vec<bool>> = faulty_runs.iter().map(|r| r.covered.clone()).collect();

    let mut mutants = Vec::new();
    for m in faulty_lines
        .iter()
        .enumerate()
        .flat_map(|(i, l)| line_mutations(l, i, &variables))
    {
        let Some(prog) = parse_mutant(&m.apply(&faulty_lines)) else {
            continue;
        };
        let kills = campaign
            .tests
            .iter()
            .zip(&faulty_runs)
            .map(|(t, base)| match run_program(&prog, t) {
                Ok(r) => r.output != base.output,
                Err(_) => true,
            })
            .collect();
        mutants.push(Mutant {
            id: format!("m{}", mutants.len()),
            statement: m.line,
            kills,
        });
    }

    let file = format!("{}.c", spec.template);
    let dataset = FaultDataset {
        name: format!("{}-s{}", spec.template, spec.seed),
        statements: faulty_lines
            .into_iter()
            .enumerate()
            .map(|(i, text)| Statement {
                id: i,
                file: file.clone(),
                line: i + 1,
                text,
            })
            .collect(),
        test_ids: (0..spec.tests).map(|i| format!("t{i}")).collect(),
        coverage,
        outcomes,
        mutants,
        faults: [fault.line].into_iter().collect(),
    };
    debug_assert_eq!(dataset.n_statements(), n_stmts);
    dataset.validate()?;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_parse_and_have_min_size() {
        for t in Template::ALL {
            let (lines, arity) = t.program(None);
            assert!(lines.len() >= 5, "{t}");
            assert!(arity >= 2);
            parse(&lines.join("\n")).unwrap();
        }
        assert_eq!(Template::MaxArray.program(Some(20)).0.len(), 20);
    }

    #[test]
    fn median_fault_at_s7_reproduces_the_classic_bug() {
        let mut spec = SyntheticSpec::new(Template::Median3, 100, 7);
        spec.fault = FaultRule {
            statement: Some(7),
            kind: FaultKind::Auto,
        };
        let d = generate_synthetic(&spec).unwrap();
        assert_eq!(d.faults.iter().copied().collect::<Vec<_>>(), vec![7]);
        assert_eq!(d.statements[7].text, "        m = y;");
    }

    #[test]
    fn relational_flip_needs_a_comparison() {
        let mut spec = SyntheticSpec::new(Template::Median3, 100, 7);
        spec.fault = FaultRule {
            statement: Some(7),
            kind: FaultKind::RelationalFlip,
        };
        assert!(matches!(
            generate_synthetic(&spec),
            Err(CorpusError::InfeasibleSpec(_))
        ));
        spec.fault.statement = Some(4);
        let d = generate_synthetic(&spec).unwrap();
        assert_eq!(d.statements[4].text, "    if (x > y)");
    }

    #[test]
    fn regeneration_is_identical() {
        let spec = SyntheticSpec::new(Template::Median3, 100, 7);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
    }

    #[test]
    fn undersized_specs_rejected() {
        let spec = SyntheticSpec::new(Template::Median3, 3, 7);
        assert!(matches!(generate_synthetic(&spec), Err(CorpusError::InfeasibleSpec(_))));
        let mut spec = SyntheticSpec::new(Template::MaxArray, 10, 7);
        spec.statements = Some(4);
        assert!(matches!(generate_synthetic(&spec), Err(CorpusError::InfeasibleSpec(_))));
    }

    #[test]
    fn equivalent_fault_is_infeasible() {
        // `>` to `>=` in the array template never changes the maximum.
        let mut spec = SyntheticSpec::new(Template::MaxArray, 20, 1);
        spec.fault = FaultRule {
            statement: Some(3),
            kind: FaultKind::RelationalFlip,
        };
        // The flip (`<`) is observable; the catalogue keeps `>=` for mutants only.
        assert!(generate_synthetic(&spec).is_ok());
        let lines = Template::MaxArray.program(None).0;
        let m = Mutation {
            line: 3,
            start: 7,
            end: 8,
            replacement: ">=".into(),
            kind: FaultKind::RelationalFlip,
        };
        assert_eq!(m.apply(&lines)[3], "if (a1 >= m)");
    }

    #[test]
    fn line_mutations_skip_declarations_and_strings() {
        let vars = vec!["x".to_string(), "m".to_string()];
        assert!(line_mutations("int x, m;", 0, &vars).is_empty());
        assert!(line_mutations("input x;", 1, &vars).is_empty());
        let p = line_mutations("print(\"a < b\", m);", 2, &vars);
        assert!(p.iter().all(|m| m.kind == FaultKind::VariableSwap));
        assert_eq!(p.len(), 1);
    }
}
