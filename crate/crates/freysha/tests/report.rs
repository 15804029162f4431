use std::path::PathBuf;

use freysha::output::{load_records, parse_integer, render_records, select, TABLE_HEADERS};
use freysha::{OutputFormat, ReportFilter, ReportRecord, SortKey, Table};
use num_bigint::BigInt;

fn records() -> Vec<ReportRecord> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/records.csv");
    load_records(&path).unwrap()
}

fn roots(rows: &[ReportRecord]) -> Vec<u64> {
    rows.iter()
        .map(|r| r.root().unwrap().try_into().unwrap())
        .collect()
}

#[test]
fn large_sha_and_g_gives_twenty_rows() {
    let all = records();
    assert_eq!(all.len(), 71);
    let filter = ReportFilter {
        min_root: Some(BigInt::from(250_000)),
        min_g: Some(12.0),
        ..Default::default()
    };
    let rows = select(&all, &filter, SortKey::Sha);
    assert_eq!(rows.len(), 20);
    assert_eq!(rows, all[..20]);
    assert_eq!(roots(&rows)[..3], [1937832, 804572, 793656]);
}

#[test]
fn fixed_c_and_a_gives_twenty_rows() {
    let filter = ReportFilter {
        min_g: Some(4.0),
        a: parse_integer("44"),
        c: parse_integer("5^9 139^6"),
        ..Default::default()
    };
    let rows = select(&records(), &filter, SortKey::Sha);
    assert_eq!(
        roots(&rows),
        [
            479144, 439312, 321584, 240848, 211784, 183200, 176832, 144752, 117552, 117168, 83536,
            83168, 78048, 70400, 55336, 51872, 49388, 38920, 24428, 15888
        ]
    );
    assert!(rows.iter().all(|r| r.a == "2^2 11"));
}

#[test]
fn sorting() {
    let all = records();
    let by_g = select(&all, &ReportFilter::default(), SortKey::G);
    assert_eq!(by_g[0].g, "163.119");
    assert!(by_g.windows(2).all(|w| w[0].g_value() >= w[1].g_value()));
    let by_triple = select(&all, &ReportFilter::default(), SortKey::Triple);
    let keys: Vec<(BigInt, BigInt, i64)> = by_triple
        .iter()
        .map(|r| {
            (
                parse_integer(&r.c).unwrap(),
                parse_integer(&r.a).unwrap(),
                r.q.parse().unwrap(),
            )
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    // equal |Sha| falls back to the triple order
    let tied: Vec<ReportRecord> = select(&all, &ReportFilter::default(), SortKey::Sha)
        .into_iter()
        .filter(|r| r.sha == "40800^2")
        .collect();
    assert_eq!(tied.len(), 2);
    assert!(parse_integer(&tied[0].c) < parse_integer(&tied[1].c));
}

#[test]
fn empty_input_gives_empty_table() {
    let rows = select(&[], &ReportFilter::default(), SortKey::Sha);
    assert!(rows.is_empty());
    assert_eq!(
        render_records(&rows, OutputFormat::Json).unwrap().trim(),
        "[]"
    );
    assert_eq!(
        render_records(&rows, OutputFormat::Csv).unwrap(),
        "sha,c,a,q,k,L,G\n"
    );
    assert_eq!(
        render_records(&rows, OutputFormat::Text)
            .unwrap()
            .lines()
            .count(),
        1
    );
}

#[test]
fn formats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<ReportRecord> = records().into_iter().take(5).collect();
    let csv_path = dir.path().join("out.csv");
    std::fs::write(&csv_path, render_records(&rows, OutputFormat::Csv).unwrap()).unwrap();
    assert_eq!(load_records(&csv_path).unwrap(), rows);
    let json_path = dir.path().join("out.json");
    std::fs::write(
        &json_path,
        render_records(&rows, OutputFormat::Json).unwrap(),
    )
    .unwrap();
    assert_eq!(load_records(&json_path).unwrap(), rows);
    let text = render_records(&rows, OutputFormat::Text).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, TABLE_HEADERS);
    let first = text.lines().nth(1).unwrap();
    assert!(
        first.trim_start().starts_with("1937832^2") && first.ends_with("153.084"),
        "{first}"
    );
    assert!(first.contains("  3^19 11^4 463^5  "));
}

#[test]
fn single_row_tables_print_as_fields() {
    let mut t = Table::new(["name", "value"]);
    t.push(["N", "51636585"]);
    assert_eq!(
        t.render(OutputFormat::Text).unwrap(),
        "name   N\nvalue  51636585\n"
    );
    t.push(["s", "0"]);
    assert_eq!(
        t.render(OutputFormat::Text).unwrap(),
        "name     value\n   N  51636585\n   s         0\n"
    );
    let json: serde_json::Value =
        serde_json::from_str(&t.render(OutputFormat::Json).unwrap()).unwrap();
    assert_eq!(json[1]["value"], "0");
}
