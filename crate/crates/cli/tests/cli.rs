use std::process::{Command, Output};

fn slab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slab"))
        .args(args)
        .env_remove("SLAB_WORKERS")
        .output()
        .expect("spawn slab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn field_reports_modulus_and_group_order() {
    let out = slab(&["field", "--p", "3", "--r", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("q: 9"));
    assert!(text.contains("modulus (constant term first): [1,0,1]"));
    assert!(text.contains("|SL2|: 720"));
    assert!(text.contains("0 failures"));
}

#[test]
fn stab_of_subfield_plane() {
    let out = slab(&[
        "stab",
        "--p",
        "2",
        "--r",
        "2",
        "--set",
        "family:subfield-plane:sub-r=1",
        "--list",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("|R_E|: 6"));
    assert!(text.contains("|R_E|/|E|^1.5: 0.750000"));
    // six listed matrices after the report
    assert_eq!(
        text.lines().filter(|l| l.starts_with('[')).count(),
        6,
        "{text}"
    );
}

#[test]
fn csv_output_has_version_and_header() {
    let out = slab(&["exhaustive", "--p", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# slab-v1"));
    let header = lines.next().unwrap();
    assert!(header.starts_with("set,size,size_punctured,lines_meeting,r_e,"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn json_output_mirrors_csv_rows() {
    let out = slab(&["exhaustive", "--p", "2", "--format", "json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows[0].get("r_e").is_some());
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["exhaustive", "--p", "2", "--campaign", "nonsense"][..],
        &["stab", "--p", "4", "--set", "family:full"],
        &["stab", "--p", "3", "--set", "family:no-such-family"],
        &["exhaustive", "--p", "2", "--format", "xml"],
    ] {
        let out = slab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn checkpoint_ranges_concatenate() {
    let whole = stdout(&slab(&["exhaustive", "--p", "3"]));
    let first = stdout(&slab(&[
        "exhaustive",
        "--p",
        "3",
        "--start",
        "0",
        "--end",
        "200",
    ]));
    let second = stdout(&slab(&[
        "exhaustive",
        "--p",
        "3",
        "--start",
        "200",
        "--end",
        "512",
    ]));
    assert_eq!(first + &second, whole);
}

#[test]
fn worker_count_does_not_change_output() {
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_slab"))
            .args(["exhaustive", "--p", "2", "--r", "2"])
            .env("SLAB_WORKERS", workers)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("1"));
}

#[test]
fn writes_to_file() {
    let path = std::env::temp_dir().join(format!("slab-cli-test-{}.csv", std::process::id()));
    let out = slab(&[
        "audit",
        "--p",
        "3",
        "--r",
        "2",
        "--budget",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("# slab-v1\n"));
    assert!(out.stdout.is_empty());
}
