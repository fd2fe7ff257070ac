#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_cylab");

pub struct Run {
    pub code: i32,
    pub stderr: String,
    pub out: PathBuf,
}

/// Runs `cylab <args> --out <dir>/<name>`.
pub fn run(dir: &Path, name: &str, args: &[&str]) -> Run {
    let out = dir.join(name);
    let o = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .expect("cylab runs");
    Run {
        code: o.status.code().expect("exited normally"),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        out,
    }
}

pub fn report(out: &Path) -> Value {
    let text = std::fs::read_to_string(out.join("report.json")).expect("report.json exists");
    serde_json::from_str(&text).expect("report.json parses")
}

pub fn schema(command: &str) -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{command}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(p).expect("schema exists"))
        .expect("schema parses")
}

pub fn schema_errors(command: &str, doc: &Value) -> Vec<String> {
    let v = jsonschema::validator_for(&schema(command)).expect("schema compiles");
    v.iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

/// One small run per command, with the flags each needs.
pub fn command_cases() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        (
            "density",
            vec![
                "density",
                "--points",
                r#"{"type":"perturbed","alpha":3.14159,"Q":0.1,"seed":7,"n_min":-40,"n_max":40}"#,
                "--alpha",
                "3.14159",
            ],
        ),
        (
            "frame-bounds",
            vec![
                "frame-bounds",
                "--points",
                r#"{"type":"lattice","x0":0,"spacing":0.8,"n_min":-40,"n_max":40}"#,
                "--k-list",
                "[12,16]",
            ],
        ),
        (
            "riesz-bounds",
            vec![
                "riesz-bounds",
                "--points",
                r#"{"type":"lattice","x0":0,"spacing":1.5,"n_min":-16,"n_max":16}"#,
                "--k-list",
                "[8,16]",
            ],
        ),
        (
            "sweep",
            vec![
                "sweep",
                "--beta-min",
                "0.7",
                "--beta-max",
                "1.4",
                "--steps",
                "5",
                "--k-list",
                "[12,16]",
            ],
        ),
        (
            "interpolate",
            vec![
                "interpolate",
                "--points",
                r#"{"type":"lattice","x0":0,"spacing":1.4285714285714286,"n_min":-3,"n_max":3}"#,
            ],
        ),
        (
            "reconstruct",
            vec![
                "reconstruct",
                "--points",
                r#"{"type":"lattice","x0":0,"spacing":0.7692307692307693,"n_min":-40,"n_max":40}"#,
                "--beta",
                "4.084070449666731",
                "--n-probes",
                "8",
            ],
        ),
        (
            "growth",
            vec![
                "growth",
                "--points",
                r#"{"type":"perturbed","alpha":3.14159,"Q":0.2,"seed":3,"n_min":-30,"n_max":30}"#,
                "--y-max",
                "5",
                "--ny",
                "41",
                "--nx",
                "8",
            ],
        ),
        ("kernel-check", vec!["kernel-check", "--n-pairs", "10"]),
        (
            "theta-eval",
            vec![
                "theta-eval",
                "--z",
                "[0.3,0.2]",
                "--tau",
                "[0.1,1.2]",
                "--a",
                "0.5",
            ],
        ),
    ]
}
