mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use common::{command_cases, run};

/// Every output file except the timing ones, by name.
fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .expect("output directory exists")
        .map(|e| e.unwrap())
        .filter(|e| !e.file_name().to_string_lossy().starts_with("timing."))
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism(dir: &Path) -> Result<String, String> {
    let mut files = 0;
    for (cmd, args) in command_cases() {
        let mut outputs = Vec::new();
        for (i, threads) in ["1", "4", "4"].iter().enumerate() {
            let mut a = args.clone();
            a.extend(["--seed", "7", "--threads", threads]);
            let r = run(dir, &format!("{cmd}-{i}"), &a);
            if r.code != 0 {
                return Err(format!("{cmd} exited {}: {}", r.code, r.stderr.trim()));
            }
            outputs.push(data_files(&r.out));
        }
        if outputs[0].len() < 2 {
            return Err(format!("{cmd} wrote only {:?}", outputs[0].keys()));
        }
        for (i, o) in outputs.iter().enumerate().skip(1) {
            if o != &outputs[0] {
                let diff: Vec<_> = o
                    .keys()
                    .filter(|k| outputs[0].get(*k) != o.get(*k))
                    .collect();
                return Err(format!("{cmd} run {i} differs in {diff:?}"));
            }
        }
        files += outputs[0].len();
    }
    // a different seed must reach the seeded commands
    let (cmd, mut args) = command_cases()
        .into_iter()
        .find(|c| c.0 == "kernel-check")
        .unwrap();
    args.extend(["--seed", "8"]);
    let r = run(dir, &format!("{cmd}-seed8"), &args);
    if data_files(&r.out).get("table.csv")
        == data_files(&dir.join(format!("{cmd}-0"))).get("table.csv")
    {
        return Err("kernel-check ignores the seed".into());
    }
    Ok(format!(
        "{} commands x 3 runs (threads 1, 4, 4), {files} data files byte-identical",
        command_cases().len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    let (ok, detail) = match determinism(dir.path()) {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!(
        "criterion 11 {} determinism: {detail} ({:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    if !ok {
        std::process::exit(1);
    }
}
