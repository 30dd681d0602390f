//! End-to-end tests driving the compiled `pthash` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn pthash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pthash"))
        .args(args)
        .output()
        .expect("the pthash binary should run")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[track_caller]
fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout_of(out),
        stderr_of(out)
    );
}

fn path_str(path: &Path) -> &str {
    path.to_str().expect("temp paths are valid UTF-8")
}

const CSV_HEADER: &str = "n,c,alpha,encoder,workers,mode,construction_seconds,\
                          bits_per_key,lookup_ns_per_key,pilot_attempts,seed";

#[test]
fn build_reports_stats_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("fn.bin");

    let out = pthash(&[
        "build", "--gen", "1000", "--seed", "1", "-c", "7.0", "--output", path_str(&file),
    ]);
    assert_exit(&out, 0);
    // ceil(7.0 * 1000 / log2(1000)) buckets.
    assert!(stderr_of(&out).contains("703 buckets"), "stderr: {}", stderr_of(&out));

    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "1000");
    assert_eq!(cells[1], "7");
    assert_eq!(cells[2], "0.94");
    assert_eq!(cells[3], "dd");
    assert_eq!(cells[4], "1");
    assert_eq!(cells[5], "internal-flat");
    assert!(cells[6].parse::<f64>().unwrap() > 0.0);
    assert!(cells[7].parse::<f64>().unwrap() > 1.0);
    assert_eq!(cells[8], "", "build rows leave the lookup column empty");
    assert!(cells[9].parse::<u64>().unwrap() >= 703);
    assert_eq!(cells[10], "1");

    let out = pthash(&["verify", path_str(&file), "--gen", "1000", "--seed", "1"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).starts_with("ok: 1000 keys"));
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.bin");
    let second = dir.path().join("b.bin");
    for (file, encoder) in [(&first, "ef"), (&second, "ef")] {
        let out = pthash(&[
            "build", "--gen", "4096", "--seed", "11", "--encoder", encoder, "--threads", "2",
            "--output", path_str(file),
        ]);
        assert_exit(&out, 0);
    }
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn empty_function_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("empty.bin");

    let out = pthash(&["build", "--gen", "0", "--output", path_str(&file)]);
    assert_exit(&out, 0);

    let out = pthash(&["verify", path_str(&file), "--gen", "0"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).starts_with("ok: 0 keys"));

    // No keys, nothing to time: bench exits cleanly without emitting rows.
    let out = pthash(&["bench", path_str(&file), "--gen", "0"]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "");

    // Lookups on an empty function are pinned to zero.
    let out = pthash(&["query", path_str(&file), "anything"]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "0\n");
}

#[test]
fn key_file_pipeline_builds_verifies_and_queries() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    let file = dir.path().join("fn.bin");
    // Five keys including an empty line, with no trailing newline.
    fs::write(&keys, b"apple\nbanana\ncherry\n\ndurian").unwrap();

    let out = pthash(&["build", "--input", path_str(&keys), "--output", path_str(&file)]);
    assert_exit(&out, 0);

    let out = pthash(&["verify", path_str(&file), "--input", path_str(&keys)]);
    assert_exit(&out, 0);

    // Explicit keys print one value per line, in argument order.
    let out = pthash(&["query", path_str(&file), "apple", "banana"]);
    assert_exit(&out, 0);
    let values: Vec<u64> = stdout_of(&out).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 2);
    assert!(values.iter().all(|&v| v < 5));
    assert_ne!(values[0], values[1]);

    // Stdin keys: the whole file through the function is a permutation.
    let mut child = Command::new(env!("CARGO_BIN_EXE_pthash"))
        .args(["query", path_str(&file)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(&fs::read(&keys).unwrap()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_exit(&out, 0);
    let mut values: Vec<u64> = stdout_of(&out).lines().map(|l| l.parse().unwrap()).collect();
    values.sort_unstable();
    assert_eq!(values, vec![0, 1, 2, 3, 4]);
}

#[test]
fn duplicate_lines_fail_the_build_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("dup.txt");
    let file = dir.path().join("fn.bin");
    fs::write(&keys, b"a\nb\nc\nb\n").unwrap();

    let out = pthash(&["build", "--input", path_str(&keys), "--output", path_str(&file)]);
    assert_exit(&out, 3);
    let stderr = stderr_of(&out);
    assert!(stderr.contains("line 4"), "stderr: {stderr}");
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(!file.exists(), "a failed build must not leave a function file");
}

#[test]
fn wrong_key_sources_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("fn.bin");
    let out = pthash(&["build", "--gen", "500", "--seed", "1", "--output", path_str(&file)]);
    assert_exit(&out, 0);

    // Mismatched key count.
    let out = pthash(&["verify", path_str(&file), "--gen", "499", "--seed", "1"]);
    assert_exit(&out, 4);
    assert!(stderr_of(&out).contains("499"));

    // Same count, different keys: some pair collides with overwhelming
    // probability, and deterministically for this seed.
    let out = pthash(&["verify", path_str(&file), "--gen", "500", "--seed", "2"]);
    assert_exit(&out, 4);
    assert!(stderr_of(&out).contains("both map to"));
}

#[test]
fn external_build_matches_internal_and_cleans_its_tmp_dir() {
    let dir = tempfile::tempdir().unwrap();
    let spill = dir.path().join("spill");
    fs::create_dir(&spill).unwrap();
    let external = dir.path().join("ext.bin");
    let internal = dir.path().join("int.bin");

    let out = pthash(&[
        "build", "--gen", "20000", "--seed", "3", "--external", "--ram-budget", "65536",
        "--tmp-dir", path_str(&spill), "--output", path_str(&external),
    ]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("external-flat"));

    let out = pthash(&["build", "--gen", "20000", "--seed", "3", "--output", path_str(&internal)]);
    assert_exit(&out, 0);

    assert_eq!(fs::read(&external).unwrap(), fs::read(&internal).unwrap());
    assert_eq!(fs::read_dir(&spill).unwrap().count(), 0, "spill files must be cleaned up");
}

#[test]
fn partitioned_build_verifies_and_benches() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("hem.bin");

    let out = pthash(&[
        "build", "--gen", "5000", "--seed", "7", "--partitions", "4", "--output", path_str(&file),
    ]);
    assert_exit(&out, 0);
    assert!(stderr_of(&out).contains("across 4 partitions"));
    assert!(stdout_of(&out).contains("internal-hem"));
    assert_eq!(fs::read(&file).unwrap()[10], 0xF0, "partitioned container tag");

    let out = pthash(&["verify", path_str(&file), "--gen", "5000", "--seed", "7"]);
    assert_exit(&out, 0);

    let out = pthash(&["bench", path_str(&file), "--gen", "5000", "--seed", "7", "--reps", "2"]);
    assert_exit(&out, 0);
    let stdout = stdout_of(&out);
    let row = stdout.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[0], "5000");
    assert_eq!(cells[3], "dd");
    assert_eq!(cells[5], "hem");
    assert!(cells[8].parse::<f64>().unwrap() > 0.0);

    // The same partition count reached through the average-size flag.
    let sized = dir.path().join("sized.bin");
    let out = pthash(&[
        "build", "--gen", "5000", "--seed", "7", "--avg-partition-size", "1250",
        "--output", path_str(&sized),
    ]);
    assert_exit(&out, 0);
    assert!(stderr_of(&out).contains("across 4 partitions"));
    assert_eq!(fs::read(&sized).unwrap(), fs::read(&file).unwrap());
}

#[test]
fn report_file_collects_rows_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let file = dir.path().join("fn.bin");

    for encoder in ["dd", "pc"] {
        let out = pthash(&[
            "build", "--gen", "2000", "--encoder", encoder, "--output", path_str(&file),
            "--report", path_str(&report),
        ]);
        assert_exit(&out, 0);
        assert_eq!(stdout_of(&out), "", "rows go to the report file, not stdout");
    }
    let out = pthash(&[
        "bench", path_str(&file), "--gen", "2000", "--reps", "2", "--report", path_str(&report),
    ]);
    assert_exit(&out, 0);

    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "header plus three rows:\n{text}");
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].contains(",dd,"));
    assert!(lines[2].contains(",pc,"));
    assert!(lines[3].contains(",pc,"), "bench reads the encoder back from the file");
    assert_eq!(lines.iter().filter(|l| l.starts_with("n,")).count(), 1);
}

#[test]
fn conflicting_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fn.bin");
    let cases: Vec<Vec<&str>> = vec![
        // Two key sources.
        vec!["build", "--gen", "10", "--input", "keys.txt", "--output", path_str(&out)],
        // No key source at all.
        vec!["build", "--output", path_str(&out)],
        // External mode without a budget.
        vec!["build", "--gen", "10", "--external", "--output", path_str(&out)],
        // External and partitioned at once.
        vec![
            "build", "--gen", "10", "--external", "--ram-budget", "4096", "--partitions", "2",
            "--output", path_str(&out),
        ],
        // Unknown encoder.
        vec!["build", "--gen", "10", "--encoder", "zip", "--output", path_str(&out)],
    ];
    for args in cases {
        let run = pthash(&args);
        assert_eq!(run.status.code(), Some(2), "args {args:?} should be a usage error");
    }
}

#[test]
fn unreadable_or_corrupt_function_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();

    let missing = dir.path().join("missing.bin");
    let out = pthash(&["verify", path_str(&missing), "--gen", "10"]);
    assert_exit(&out, 5);

    let garbage = dir.path().join("garbage.bin");
    fs::write(&garbage, b"pilot tables ahoy").unwrap();
    let out = pthash(&["query", path_str(&garbage), "key"]);
    assert_exit(&out, 5);
    assert!(stderr_of(&out).contains("decoding"));

    let valid = dir.path().join("fn.bin");
    let run = pthash(&["build", "--gen", "100", "--output", path_str(&valid)]);
    assert_exit(&run, 0);
    let bytes = fs::read(&valid).unwrap();
    let truncated = dir.path().join("short.bin");
    fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    let out = pthash(&["bench", path_str(&truncated), "--gen", "100"]);
    assert_exit(&out, 5);
}
