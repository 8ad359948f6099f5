mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use roundtax::report::KeyValueDoc;

const TABLE_ARGS: [&str; 4] = ["--share-tolerance", "0.002", "--taxes", "TAXES"];

fn roundtax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roundtax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn table_args<'a>(taxes: &'a str, profiles: &'a str) -> Vec<&'a str> {
    let mut v = vec!["--profiles", profiles];
    v.extend(TABLE_ARGS.iter().map(|&a| if a == "TAXES" { taxes } else { a }));
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn report_table_and_key_values_agree() {
    let table = common::data_dir("table1");
    let taxes = table.join("taxes.csv");
    let before = snapshot(&table);
    let tmp = tempfile::tempdir().unwrap();
    let kv_path = tmp.path().join("report.kv");

    let mut args = vec!["report"];
    args.extend(table_args(path_str(&taxes), path_str(&table)));
    args.extend(["--per-capita", "--share-of-revenue", "--out", path_str(&kv_path)]);
    let out = roundtax(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);

    let kv = KeyValueDoc::parse(&fs::read_to_string(&kv_path).unwrap()).unwrap();
    for store in ["supermarkets_drugstores", "small_grocery", "convenience"] {
        let line = text.lines().find(|l| l.starts_with(store)).expect("row printed");
        let cells: Vec<&str> = line.split_whitespace().collect();
        for (cell, key) in cells[cells.len() - 3..].iter().zip(["equal_tax", "max_tax", "min_tax"]) {
            let printed: f64 = cell.replace(',', "").parse().unwrap();
            let value = kv.get_f64(&format!("{store}.{key}")).unwrap();
            assert_eq!(printed, value.round(), "{store}.{key}");
        }
    }
    assert!(text.contains("10.6%") && text.contains("29.8%"));
    assert!(text.contains("Share of revenue"));
    assert!(text.contains("Per person"));
    let share = kv.get_f64("total.max.share_of_revenue").unwrap();
    assert!((1e-5..=2e-5).contains(&share));
    assert_eq!(before, snapshot(&table), "inputs were modified");
}

#[test]
fn missing_profiles_directory_is_an_input_error() {
    let out = roundtax(&["expect", "--profiles", "/nonexistent/dir"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("/nonexistent/dir"));
}

#[test]
fn default_share_tolerance_rejects_rounded_shares() {
    let dir = common::data_dir("sample_text");
    let out = roundtax(&["expect", "--profiles", path_str(&dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row"), "{}", stderr(&out));
}

#[test]
fn malformed_row_reports_its_row_number() {
    let tmp = tempfile::tempdir().unwrap();
    for f in ["endings.csv", "baskets.csv", "profiles.csv"] {
        fs::copy(common::data_dir("sample_text").join(f), tmp.path().join(f)).unwrap();
    }
    let endings = tmp.path().join("endings.csv");
    let mut text = fs::read_to_string(&endings).unwrap();
    text.push_str("extra,0.5,0.5,0,0,0,0,0,0,0,0.1\n");
    fs::write(&endings, &text).unwrap();
    let row = text.lines().count();
    let out = roundtax(&["expect", "--profiles", path_str(tmp.path()), "--share-tolerance", "0.002"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(&format!("row {row}")), "{}", stderr(&out));
}

#[test]
fn infeasible_overall_share_exits_3_without_partial_output() {
    let table = common::data_dir("table1");
    let taxes = table.join("taxes.csv");
    let tmp = tempfile::tempdir().unwrap();
    let kv_path = tmp.path().join("out.kv");
    let mut args = vec!["extremize"];
    args.extend(table_args(path_str(&taxes), path_str(&table)));
    args.extend(["--overall", "1.5", "--out", path_str(&kv_path)]);
    let out = roundtax(&args);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).is_empty());
    assert!(!kv_path.exists(), "partial output written");
}

#[test]
fn extremize_reads_overall_from_scenario_file() {
    let table = common::data_dir("table1");
    let taxes = table.join("taxes.csv");
    let scenario = table.join("extremize.txt");
    let mut args = vec!["extremize"];
    args.extend(table_args(path_str(&taxes), path_str(&table)));
    args.extend(["--scenario", path_str(&scenario), "--sense", "min"]);
    let out = roundtax(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("422,137"), "{}", stdout(&out));
}

#[test]
fn aggregate_rejects_unknown_store() {
    let table = common::data_dir("table1");
    let taxes = table.join("taxes.csv");
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("s.txt");
    fs::write(
        &scenario,
        "supermarkets_drugstores=0.2\nsmall_grocery=0.2\nconvenience=0.2\nkiosk=0.5\n",
    )
    .unwrap();
    let mut args = vec!["aggregate"];
    args.extend(table_args(path_str(&taxes), path_str(&table)));
    args.extend(["--scenario", path_str(&scenario)]);
    let out = roundtax(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kiosk"));
}

#[test]
fn simulation_dump_matches_summary() {
    let dir = common::data_dir("sample_text");
    let tmp = tempfile::tempdir().unwrap();
    let dump = tmp.path().join("dump");
    let kv_path = tmp.path().join("sim.kv");
    let args = [
        "simulate",
        "--profiles",
        path_str(&dir),
        "--share-tolerance",
        "0.002",
        "--n",
        "2000",
        "--seed",
        "9",
        "--dump",
        path_str(&dump),
        "--out",
        path_str(&kv_path),
    ];
    let first = roundtax(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let kv = KeyValueDoc::parse(&fs::read_to_string(&kv_path).unwrap()).unwrap();
    for store in ["supermarkets_drugstores", "small_grocery", "convenience"] {
        let csv = fs::read_to_string(dump.join(format!("{store}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("txn_index,basket_size,residue,delta_agorot"));
        let deltas: Vec<i64> = lines
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(deltas.len(), 2000);
        let mean = deltas.iter().sum::<i64>() as f64 / 2000.0 / 100.0;
        let reported = kv.get_f64(&format!("{store}.mean_tax")).expect("mean key");
        assert!((mean - reported).abs() < 1e-12, "{store}: {mean} vs {reported}");
    }
    // Same seed, same output.
    let second = roundtax(&args);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn plot_data_writes_three_files() {
    let dir = common::data_dir("sample_text");
    let tmp = tempfile::tempdir().unwrap();
    let out = roundtax(&[
        "plot-data",
        "--profiles",
        path_str(&dir),
        "--share-tolerance",
        "0.002",
        "--out-dir",
        path_str(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["endings.csv", "baskets.csv", "residues.csv"] {
        let text = fs::read_to_string(tmp.path().join(f)).unwrap();
        assert!(text.lines().count() > 3, "{f} is too short");
    }
}

#[test]
fn custom_rule_text_is_accepted() {
    let dir = common::data_dir("sample_text");
    let out = roundtax(&[
        "expect",
        "--profiles",
        path_str(&dir),
        "--share-tolerance",
        "0.002",
        "--rule",
        "grid=10; down=1,2,3,4,5; up=6,7,8,9",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let bad = roundtax(&["expect", "--profiles", path_str(&dir), "--rule", "grid=10; down=1"]);
    assert_eq!(bad.status.code(), Some(2));
}
