use std::process::Command;

fn parasymm(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_parasymm"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn verify_exit_codes() {
    let (code, _) = parasymm(&[
        "verify",
        "--program",
        "programs/star_mutex.json",
        "--topology",
        "star",
        "--mode",
        "maximal",
    ]);
    assert_eq!(code, 0);
    let (code, out) = parasymm(&[
        "verify",
        "--program",
        "programs/star_mutex_broken.json",
        "--topology",
        "star",
        "--mode",
        "refine",
        "--json",
    ]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
    let (code, _) = parasymm(&[
        "verify",
        "--program",
        "programs/star_mutex.json",
        "--topology",
        "star",
        "--max-steps",
        "1",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn input_errors_exit_3() {
    assert_eq!(
        parasymm(&["verify", "--program", "missing.json", "--topology", "star"]).0,
        3
    );
    assert_eq!(
        parasymm(&["classes", "--topology", "star", "--dim", "5"]).0,
        3
    );
    assert_eq!(parasymm(&["frobnicate"]).0, 3);
}

#[test]
fn oracle_and_classes() {
    let (code, _) = parasymm(&[
        "oracle",
        "--program",
        "programs/token_ring_broken.json",
        "--topology",
        "ring",
        "--params",
        "3",
    ]);
    assert_eq!(code, 1);
    let (code, out) = parasymm(&["classes", "--topology", "star", "--dim", "2", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(out.contains("u2"), "{v}");
}
