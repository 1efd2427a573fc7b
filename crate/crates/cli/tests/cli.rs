use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eigsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigsense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn theory_lists_all_detectors() {
    let o = eigsense(&[
        "theory",
        "--kind",
        "fig4",
        "--set",
        "fig4_snr_min=0.02",
        "--set",
        "fig4_snr_max=0.2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("snr[1],detector[],detection_snr[1]\n"));
    for name in ["smed", "med_consistent", "med_as_printed", "fmd"] {
        assert!(
            text.lines().any(|l| l.split(',').nth(1) == Some(name)),
            "{name}"
        );
    }
    let cross: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# crossover_snr="))
        .and_then(|v| v.parse().ok())
        .expect("crossover recorded");
    assert!((0.07..=0.21).contains(&cross));
    assert!(text.contains("# config.theory_kind=fig4"));
}

#[test]
fn config_errors_exit_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# operating point\nn = 40\np = 30\n").unwrap();
    let o = eigsense(&["--config", cfg.to_str().unwrap(), "theory"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2 (key `n`)"), "{}", stderr(&o));

    assert_eq!(
        eigsense(&["--set", "n=abc", "theory"]).status.code(),
        Some(1)
    );
    assert_eq!(
        eigsense(&["--set", "nonsense", "theory"]).status.code(),
        Some(1)
    );
    assert_eq!(eigsense(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        eigsense(&["--config", "/nonexistent/run.cfg", "theory"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn numeric_errors_exit_two() {
    let o = eigsense(&["--set", "pfa=0.01", "--set", "n_trials=1000", "calibrate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("5000"));
}

#[test]
fn verify_round_trip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let args = [
        "--preset",
        "quick",
        "--set",
        "n_trials=500",
        "--set",
        "snr_grid_db=-18,-14",
        "--seed",
        "5",
    ];
    let mut run = args.to_vec();
    run.extend(["--out", out.to_str().unwrap(), "sweep-snr"]);
    assert!(eigsense(&run).status.success());

    let v = eigsense(&["verify", out.to_str().unwrap()]);
    assert!(v.status.success(), "{}{}", stdout(&v), stderr(&v));
    assert!(stdout(&v).contains("body=identical"));

    let text = fs::read_to_string(&out).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = &mut lines[1];
    let last = row.rfind(',').unwrap();
    row.replace_range(last + 1.., "12345");
    let tampered = dir.path().join("tampered.csv");
    fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    let v = eigsense(&["verify", tampered.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stdout(&v).contains("body=different"));
}

#[test]
fn output_is_independent_of_thread_count() {
    let base = [
        "--set",
        "n_trials=500",
        "--set",
        "snr_grid_db=-16",
        "--seed",
        "9",
    ];
    let run = |threads: &str| {
        let mut a = base.to_vec();
        a.extend(["--threads", threads, "sweep-snr"]);
        let o = eigsense(&a);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    assert_eq!(body(&one), body(&run("3")));
}

#[test]
fn synth_then_detect_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let iq = dir.path().join("obs.iq");
    let o = eigsense(&["--set", "snr_db=0", "--out", iq.to_str().unwrap(), "synth"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(Path::new(&format!("{}.hdr", iq.display())).exists());
    assert_eq!(fs::metadata(&iq).unwrap().len(), 40 * 100 * 8);

    let o = eigsense(&[
        "--set",
        "n_trials=500",
        "detect",
        "--input",
        iq.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let detected = header
        .iter()
        .position(|h| h.starts_with("detected"))
        .expect("detected column");
    let rows: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(
        rows.iter()
            .all(|r| r.split(',').nth(detected) == Some("true")),
        "{text}"
    );
}

#[test]
fn synth_requires_out() {
    assert_eq!(eigsense(&["synth"]).status.code(), Some(1));
}
