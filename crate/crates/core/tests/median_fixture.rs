use faultfuse::static_analysis::{
    build_cfg, count_text_features, median_table_source, tokenize, MEDIAN_TABLE,
};

#[test]
fn median_table_triples_reproduced() {
    let source = median_table_source();
    let feats = count_text_features(&source).unwrap();
    assert_eq!(feats.lines.len(), MEDIAN_TABLE.len());
    for (i, (text, paths, vars, syms)) in MEDIAN_TABLE.iter().enumerate() {
        let got = &feats.lines[i];
        assert_eq!(
            (got.branch_paths, got.variables, got.symbols),
            (*paths, *vars, *syms),
            "row {i}: {text}"
        );
    }
}

#[test]
fn ascii_quotes_give_same_counts() {
    let source = median_table_source().replace(['\u{201c}', '\u{201d}'], "\"");
    let feats = count_text_features(&source).unwrap();
    assert_eq!(feats.lines[13].symbols, 7);
    assert_eq!(feats.lines[13].variables, 1);
}

#[test]
fn median_cfg_has_six_leaf_paths() {
    let cfg = build_cfg(&median_table_source()).unwrap();
    assert!(cfg.is_well_formed());
    assert_eq!(cfg.count_paths(), 6);
    // Every statement line lands in exactly one block.
    for line in 0..MEDIAN_TABLE.len() {
        let hits = cfg.blocks.iter().filter(|b| b.lines.contains(&line)).count();
        assert_eq!(hits, 1, "line {line}");
    }
}

#[test]
fn token_count_conservation() {
    let source = median_table_source();
    let tokens = tokenize(&source).unwrap();
    let feats = count_text_features(&source).unwrap();
    for (i, lf) in feats.lines.iter().enumerate() {
        let n = tokens.iter().filter(|t| t.line == i).count();
        assert_eq!(lf.token_total(), n, "line {i}");
    }
}

#[test]
fn program_length_is_sum_of_lines() {
    let source = median_table_source();
    let feats = count_text_features(&source).unwrap();
    let expected: usize = source.lines().map(|l| l.trim_end().chars().count()).sum();
    assert_eq!(feats.total_length(), expected);
    assert_eq!(feats.line_count(), 14);
}
