use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn twb(args: &[&str]) -> (i32, String, String) {
    twb_env(args, &[])
}

fn twb_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_twb"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("twb runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn body(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).collect()
}

fn value(s: &str, key: &str) -> String {
    s.lines().find_map(|l| l.strip_prefix(&format!("{key} "))).unwrap_or_else(|| panic!("no {key} line in\n{s}")).to_string()
}

#[test]
fn manifest_header() {
    let (code, out, _) = twb(&["dc", "A", "1", "--c", "1"]);
    assert_eq!(code, 0);
    let header: Vec<&str> = out.lines().take_while(|l| l.starts_with('#')).collect();
    assert_eq!(header.len(), 5);
    assert!(header[0].ends_with("subcommand: dc"));
    assert!(header[3].contains(env!("CARGO_PKG_VERSION")));
    assert!(header[4].ends_with("exact_arithmetic: true"));
}

#[test]
fn dc_tables() {
    let (code, out, _) = twb(&["dc", "A", "1", "--tau", "id", "--h", "0", "--m", "1", "--c", "2"]);
    assert_eq!(code, 0);
    assert_eq!(body(&out).iter().filter(|l| l.starts_with("weight ")).count(), 3);

    let (code, out, _) = twb(&["dc", "A", "2", "--tau", "flip", "--m", "2", "--c", "1"]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "zero_in_dc"), "false");
    let rows: Vec<&str> = body(&out).into_iter().filter(|l| l.starts_with("weight ")).collect();
    assert_eq!(rows, vec!["weight (1) n 1 0"]);
}

#[test]
fn dc_rejects_bad_h() {
    let (code, _, err) = twb(&["dc", "A", "1", "--h=-1", "--m", "2", "--c", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha_i(h) >= 0"), "{err}");
    let (code, _, err) = twb(&["dc", "A", "1", "--h", "3", "--m", "2", "--c", "1"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = twb(&["dc", "A", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn virasoro_scalars() {
    let (code, out, _) = twb(&["virasoro", "A", "1", "--c", "1", "--d-max", "4", "--n", "2", "--k=-2"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = body(&out).into_iter().filter(|l| l.starts_with("degree ")).collect();
    assert_eq!(rows, vec!["degree 0 scalar 1/2", "degree 1 scalar 1/2", "degree 2 scalar 1/2"]);
    let (_, out, _) = twb(&["virasoro", "A", "1", "--c", "1", "--d-max", "4", "--n", "1", "--k=-1"]);
    assert!(body(&out).iter().filter(|l| l.starts_with("degree ")).all(|l| l.ends_with("scalar 0")));
}

#[test]
fn virasoro_window() {
    let (code, _, err) = twb(&["virasoro", "A", "1", "--c", "1", "--d-max", "1", "--n=-2", "--k=-1"]);
    assert_eq!(code, 3);
    assert!(err.contains("required d_max 3"), "{err}");
}

#[test]
fn gluing_check_sl2() {
    let (code, out, _) = twb(&["gluing-check", "A", "1", "--c", "2", "--mu", "1", "--d-max", "5", "--n-max", "2"]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "routes_agree"), "true");
    assert_eq!(value(&out, "delta0_identity"), "true");
    assert!(value(&out, "checked").ends_with("failures 0"));
    let (code, _, _) = twb(&["gluing-check", "A", "1", "--c", "2", "--d-max", "2"]);
    assert_eq!(code, 3);
}

#[test]
fn dim_four_points_level_one() {
    let f = example("p1_4pt_sl2_c1.json");
    let (code, out, _) = twb(&["dim", f.to_str().unwrap(), "--oracle"]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "dimension"), "1");
    let f = example("p1_4pt_sl2_c2.json");
    let (_, out, _) = twb(&["dim", f.to_str().unwrap(), "--oracle", "--check-orders", "2", "--seed", "3"]);
    assert_eq!(value(&out, "dimension"), "2");
}

#[test]
fn dim_trinion_echoes_table() {
    let c = example("trinion_sl2_c1.json");
    let t = example("trinion_sl2_c1_fusion.json");
    let (code, out, _) = twb(&["dim", c.to_str().unwrap(), "--fusion", t.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "dimension"), "1");
}

#[test]
fn dim_missing_entries() {
    let c = example("p1_4pt_sl2_c1.json");
    let (code, out, err) = twb(&["dim", c.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(out.is_empty());
    assert!(err.contains("lacks 2 trinion(s)"), "{err}");
    assert!(err.contains("id[0]m1:(1) | id[0]m1:(1) | id[0]m1:(1)"), "{err}");
}

#[test]
fn dim_genus_one() {
    let c = example("nodal_genus1_sl2_c1.json");
    let (code, out, _) = twb(&["dim", c.to_str().unwrap(), "--oracle"]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "dimension"), "2");
}

#[test]
fn z2_factorized_matches_direct() {
    let r = example("z2_sl2_inner_c2_ramified.json");
    let (code, out, _) = twb(&["dim", r.to_str().unwrap(), "--oracle"]);
    assert_eq!(code, 0);
    assert!(out.lines().filter(|l| l.starts_with("oracle bruteforce")).all(|l| l.ends_with("stabilized true")));
    let s = example("z2_sl2_inner_c2_smooth.json");
    let (code, direct, _) = twb(&["oracle", s.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(value(&direct, "stabilized"), "true");
    assert_eq!(value(&out, "dimension"), value(&direct, "value"));
}

#[test]
fn oracle_memory_cap() {
    let s = example("z2_sl2_inner_c2_smooth.json");
    let (code, _, err) = twb_env(&["oracle", s.to_str().unwrap()], &[("TWB_MAX_STATES", "2")]);
    assert_eq!(code, 3);
    assert!(err.contains("TWB_MAX_STATES"));
    let (code, _, _) = twb_env(&["oracle", s.to_str().unwrap()], &[("TWB_MAX_STATES", "lots")]);
    assert_eq!(code, 2);
}

#[test]
fn factorize_log_and_invalid_curve() {
    let r = example("z2_sl2_inner_c2_ramified.json");
    let (code, out, _) = twb(&["factorize", r.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "leaves"), "6");
    assert_eq!(out.lines().filter(|l| l.starts_with("factor node=0 kind=separating")).count(), 3);

    let dir = std::env::temp_dir().join(format!("twb-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"algebra":{"series":"A","rank":1},"level":1,"group":{"order":1},"components":[{"genus":0,"markings":[]}],"nodes":[]}"#).unwrap();
    let (code, _, err) = twb(&["factorize", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("marked orbit condition"), "{err}");
    let (code, _, _) = twb(&["dim", dir.join("absent.json").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn write_fusion_round_trip() {
    let c = example("p1_4pt_sl2_c2.json");
    let dir = std::env::temp_dir().join(format!("twb-fusion-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let t = dir.join("table.json");
    let (code, _, _) = twb(&["dim", c.to_str().unwrap(), "--oracle", "--write-fusion", t.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out, _) = twb(&["dim", c.to_str().unwrap(), "--fusion", t.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "dimension"), "2");
}

#[test]
fn output_is_deterministic() {
    let c = example("z2_sl2_inner_c2_ramified.json");
    let a = twb(&["dim", c.to_str().unwrap(), "--oracle", "--check-orders", "3", "--seed", "11"]);
    let b = twb(&["dim", c.to_str().unwrap(), "--oracle", "--check-orders", "3", "--seed", "11"]);
    assert_eq!(a, b);
}
