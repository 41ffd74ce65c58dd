use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn squeeze(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeeze"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn template(dir: &Path, kind: &str, extra: &[&str], out: &str) {
    let mut args = vec!["template", kind];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out]);
    let o = squeeze(dir, &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_check_feistel_passes() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "feistel", &["--n", "1"], "f.scheme");
    let o = squeeze(dir.path(), &["oracle-check", "--scheme", "f.scheme"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));

    template(dir.path(), "fox", &["--n", "1"], "fox.scheme");
    let o = squeeze(
        dir.path(),
        &["oracle-check", "--scheme", "fox.scheme", "--key", "10"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn malformed_bit_string_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "feistel", &["--n", "1"], "f.scheme");
    let o = squeeze(
        dir.path(),
        &[
            "reduce", "--scheme", "f.scheme", "--alpha", "1x", "--beta", "00",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = squeeze(
        dir.path(),
        &[
            "reduce", "--scheme", "f.scheme", "--alpha", "101", "--beta", "00",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = squeeze(
        dir.path(),
        &[
            "reduce", "--scheme", "f.scheme", "--alpha", "10", "--beta", "01",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rowspace_condition true"));
}

#[test]
fn type1_bound_collapses_at_four() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "type1", &["--n", "1", "--N", "4"], "t1.scheme");
    let o = squeeze(
        dir.path(),
        &[
            "--format",
            "csv",
            "bound",
            "--scheme",
            "t1.scheme",
            "--rounds",
            "6",
            "--mode",
            "diff",
        ],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let collapsed: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",true"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(collapsed.first(), Some(&"4"), "{text}");
    let row3 = text.lines().find(|l| l.starts_with("3,")).unwrap();
    assert!(row3.starts_with("3,1,3,3,"), "{row3}");
}

#[test]
fn type3_collapses_in_a_third_of_the_rounds() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "type3", &["--n", "1", "--N", "4"], "t3.scheme");
    assert!(dir.path().join("t3_f3.nlmap").exists());
    let o = squeeze(dir.path(), &["check", "--scheme", "t3.scheme"]);
    assert!(o.status.success());
    let o = squeeze(
        dir.path(),
        &[
            "--format",
            "csv",
            "bound",
            "--scheme",
            "t3.scheme",
            "--rounds",
            "5",
            "--mode",
            "diff",
        ],
    );
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("4,0,12,") && l.ends_with(",true")));
}

#[test]
fn template_files_round_trip() {
    let dir = TempDir::new().unwrap();
    for kind in ["feistel", "fox", "linear", "type1"] {
        let name = format!("{kind}.scheme");
        template(dir.path(), kind, &["--n", "2"], &name);
        let o = squeeze(dir.path(), &["check", "--scheme", &name]);
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", stdout(&o));
    }
    let o = squeeze(
        dir.path(),
        &[
            "encrypt",
            "--scheme",
            "feistel.scheme",
            "--keys",
            "01,10,11",
            "--input",
            "1001",
        ],
    );
    let y = stdout(&o).trim().to_string();
    let o = squeeze(
        dir.path(),
        &[
            "decrypt",
            "--scheme",
            "feistel.scheme",
            "--keys",
            "01,10,11",
            "--input",
            &y,
        ],
    );
    assert_eq!(stdout(&o).trim(), "1001");
}

#[test]
fn check_reports_bad_matrices() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "feistel", &["--n", "1"], "f.scheme");
    let good = fs::read_to_string(dir.path().join("f.scheme")).unwrap();

    let not_perp = good.replacen("B\n1 2\n01", "B\n1 2\n11", 1);
    fs::write(dir.path().join("p.scheme"), not_perp).unwrap();
    let o = squeeze(dir.path(), &["check", "--scheme", "p.scheme"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL A B^t = 0"), "{}", stdout(&o));

    let deficient = good.replacen("A\n1 2\n10", "A\n1 2\n00", 1);
    fs::write(dir.path().join("r.scheme"), deficient).unwrap();
    let o = squeeze(dir.path(), &["check", "--scheme", "r.scheme"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL rank A"), "{}", stdout(&o));

    let broken = good.replacen("T\n2 2\n01", "T\n2 2\n0z", 1);
    fs::write(dir.path().join("b.scheme"), broken).unwrap();
    let o = squeeze(dir.path(), &["check", "--scheme", "b.scheme"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 14"));
}

#[test]
fn gen_perp_writes_a_pair() {
    let dir = TempDir::new().unwrap();
    let o = squeeze(
        dir.path(),
        &[
            "--seed", "3", "--out", "pair", "gen-perp", "--l1", "2", "--l2", "2", "--rows-a", "1",
            "--rows-b", "1", "--j", "1,3",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = fs::read_to_string(dir.path().join("pair_A.mat")).unwrap();
    let row = a.lines().nth(1).unwrap();
    assert_eq!(
        (&row[0..1], &row[2..3]),
        ("0", "0"),
        "A must vanish on J = {{1, 3}}: {a}"
    );
    assert!(dir.path().join("pair_B.mat").exists());

    let o = squeeze(
        dir.path(),
        &[
            "gen-perp", "--l1", "1", "--l2", "1", "--rows-a", "2", "--rows-b", "1",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trail_and_linear_attack_succeed() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "feistel", &["--n", "2"], "f.scheme");
    let o = squeeze(
        dir.path(),
        &[
            "trail", "--scheme", "f.scheme", "--alpha0", "0010", "--rounds", "4",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = squeeze(
        dir.path(),
        &[
            "trail", "--scheme", "f.scheme", "--alpha0", "1000", "--rounds", "4",
        ],
    );
    assert_eq!(o.status.code(), Some(2));

    let o = squeeze(
        dir.path(),
        &["linear-attack", "--trials", "30", "--rounds", "12"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("recovered: 30/30"));
}

#[test]
fn tables_print_csv() {
    let dir = TempDir::new().unwrap();
    template(dir.path(), "feistel", &["--n", "3"], "f.scheme");
    let o = squeeze(dir.path(), &["ddt", "--nlmap", "f.nlmap"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().nth(1).unwrap().starts_with("0,8,0"));
    let o = squeeze(dir.path(), &["lat", "--nlmap", "f.nlmap", "--row", "000"]);
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "0,8,0,0,0,0,0,0,0");
}
