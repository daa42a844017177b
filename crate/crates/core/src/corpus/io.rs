use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CorpusError, FaultDataset, Mutant, Statement, Verdict};

pub const STATEMENTS_FILE: &str = "statements.tsv";
pub const COVERAGE_FILE: &str = "coverage.csv";
pub const OUTCOMES_FILE: &str = "outcomes.csv";
pub const MUTANTS_FILE: &str = "mutants.csv";
pub const FAULTS_FILE: &str = "faults.txt";

fn read(dir: &Path, name: &str) -> Result<String, CorpusError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(CorpusError::MissingFile(path));
    }
    Ok(fs::read_to_string(path)?)
}

fn format_err(file: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::Format {
        file: file.into(),
        message: message.into(),
    }
}

fn parse_bit(file: &str, row: usize, col: usize, cell: &str) -> Result<bool, CorpusError> {
    match cell.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(CorpusError::InvalidCellValue {
            file: file.into(),
            row,
            col,
            value: other.into(),
        }),
    }
}

fn csv_reader(text: &str, headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// Loads and validates a dataset directory. The dataset is named after the
/// directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<FaultDataset, CorpusError> {
    let dir = dir.as_ref();
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());

    let mut statements = Vec::new();
    for (row, line) in read(dir, STATEMENTS_FILE)?.lines().enumerate() {
        let mut parts = line.splitn(4, '\t');
        let (Some(id), Some(file), Some(lineno), Some(text)) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(format_err(STATEMENTS_FILE, format!("row {row} has fewer than 4 fields")));
        };
        let id = id
            .parse()
            .map_err(|_| format_err(STATEMENTS_FILE, format!("bad id {id:?} on row {row}")))?;
        let line = lineno.parse().map_err(|_| {
            format_err(STATEMENTS_FILE, format!("bad line number {lineno:?} on row {row}"))
        })?;
        statements.push(Statement {
            id,
            file: file.into(),
            line,
            text: text.into(),
        });
    }

    let coverage_text = read(dir, COVERAGE_FILE)?;
    let mut rdr = csv_reader(&coverage_text, true);
    let header_len = rdr
        .headers()
        .map_err(|e| format_err(COVERAGE_FILE, e.to_string()))?
        .iter()
        .filter(|h| !h.is_empty())
        .count();
    if header_len != statements.len() {
        return Err(CorpusError::DimensionMismatch(format!(
            "coverage header names {header_len} statements, statements.tsv has {}",
            statements.len()
        )));
    }
    let mut coverage = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format_err(COVERAGE_FILE, e.to_string()))?;
        let cells = rec
            .iter()
            .enumerate()
            .map(|(col, c)| parse_bit(COVERAGE_FILE, row, col, c))
            .collect::<Result<Vec<_>, _>>()?;
        coverage.push(cells);
    }

    let outcomes_text = read(dir, OUTCOMES_FILE)?;
    let mut test_ids = Vec::new();
    let mut outcomes = Vec::new();
    for (row, rec) in csv_reader(&outcomes_text, false).records().enumerate() {
        let rec = rec.map_err(|e| format_err(OUTCOMES_FILE, e.to_string()))?;
        if rec.len() != 2 {
            return Err(format_err(OUTCOMES_FILE, format!("row {row} must have 2 fields")));
        }
        test_ids.push(rec[0].to_string());
        outcomes.push(match rec[1].trim() {
            "pass" => Verdict::Pass,
            "fail" => Verdict::Fail,
            other => {
                return Err(CorpusError::InvalidCellValue {
                    file: OUTCOMES_FILE.into(),
                    row,
                    col: 1,
                    value: other.into(),
                })
            }
        });
    }

    let mutants_text = read(dir, MUTANTS_FILE)?;
    let mut mutants = Vec::new();
    for (row, rec) in csv_reader(&mutants_text, false).records().enumerate() {
        let rec = rec.map_err(|e| format_err(MUTANTS_FILE, e.to_string()))?;
        if rec.len() < 2 {
            return Err(format_err(MUTANTS_FILE, format!("row {row} has fewer than 2 fields")));
        }
        let statement = rec[1].parse().map_err(|_| {
            format_err(MUTANTS_FILE, format!("bad statement id {:?} on row {row}", &rec[1]))
        })?;
        let kills = rec
            .iter()
            .enumerate()
            .skip(2)
            .map(|(col, c)| parse_bit(MUTANTS_FILE, row, col, c))
            .collect::<Result<Vec<_>, _>>()?;
        mutants.push(Mutant {
            id: rec[0].to_string(),
            statement,
            kills,
        });
    }

    let mut faults = std::collections::BTreeSet::new();
    for (row, line) in read(dir, FAULTS_FILE)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let id = line
            .parse()
            .map_err(|_| format_err(FAULTS_FILE, format!("bad fault id {line:?} on row {row}")))?;
        faults.insert(id);
    }

    let dataset = FaultDataset {
        name,
        statements,
        test_ids,
        coverage,
        outcomes,
        mutants,
        faults,
    };
    dataset.validate()?;
    Ok(dataset)
}

fn bits(row: &[bool]) -> String {
    row.iter()
        .map(|&b| if b { "1" } else { "0" })
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the dataset in its canonical directory form.
pub fn save_dataset(dataset: &FaultDataset, dir: impl AsRef<Path>) -> Result<(), CorpusError> {
    dataset.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut out = String::new();
    for s in &dataset.statements {
        if s.text.contains('\n') || s.file.contains('\t') {
            return Err(format_err(STATEMENTS_FILE, format!("statement {} is not one line", s.id)));
        }
        writeln!(out, "{}\t{}\t{}\t{}", s.id, s.file, s.line, s.text).unwrap();
    }
    fs::write(dir.join(STATEMENTS_FILE), out)?;

    let mut out = (0..dataset.n_statements())
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in &dataset.coverage {
        out.push_str(&bits(row));
        out.push('\n');
    }
    fs::write(dir.join(COVERAGE_FILE), out)?;

    let mut out = String::new();
    for (id, v) in dataset.test_ids.iter().zip(&dataset.outcomes) {
        let v = match v {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        };
        writeln!(out, "{id},{v}").unwrap();
    }
    fs::write(dir.join(OUTCOMES_FILE), out)?;

    let mut out = String::new();
    for m in &dataset.mutants {
        writeln!(out, "{},{},{}", m.id, m.statement, bits(&m.kills)).unwrap();
    }
    fs::write(dir.join(MUTANTS_FILE), out)?;

    let mut out = String::new();
    for f in &dataset.faults {
        writeln!(out, "{f}").unwrap();
    }
    fs::write(dir.join(FAULTS_FILE), out)?;
    Ok(())
}
