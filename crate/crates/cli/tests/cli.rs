use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gmc::analysis::{compare, peak, FrequencyResponse};
use gmc::wav::write_wav_pcm16;

fn gmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmc"))
        .args(args)
        .output()
        .expect("gmc runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

const XSF: [&str; 10] = [
    "--topology",
    "xsf",
    "--gm1",
    "253.2n",
    "--gm2",
    "253.2n",
    "--c1",
    "2p",
    "--c2",
    "8p",
];

fn response(extra: &[&str]) -> Output {
    let mut args = vec!["response"];
    args.extend(XSF);
    args.extend(extra);
    gmc(&args)
}

#[test]
fn xsf_lpf_peak_near_design_frequency() {
    let out = response(&[
        "--probe",
        "LPF",
        "--f-start",
        "1k",
        "--f-stop",
        "100k",
        "--points",
        "2001",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let resp = FrequencyResponse::from_csv(&stdout(&out)).unwrap();
    let p = peak(&resp).unwrap();
    // Q = 2 puts the low-pass peak just below f0 = 10.07 kHz.
    assert!(p.f_peak > 9_300.0 && p.f_peak < 10_075.0, "{}", p.f_peak);
    assert!(!p.at_boundary);
}

#[test]
fn engines_agree() {
    let closed = response(&["--probe", "GmX"]);
    let mna = response(&["--probe", "GmX", "--engine", "mna"]);
    assert_eq!(code(&closed), 0);
    assert_eq!(code(&mna), 0);
    let a = FrequencyResponse::from_csv(&stdout(&closed)).unwrap();
    let b = FrequencyResponse::from_csv(&stdout(&mna)).unwrap();
    assert_eq!(a.len(), 512);
    assert!(compare(&b, &a).unwrap() <= 1e-9);
}

#[test]
fn unknown_probe_lists_available() {
    let out = response(&["--probe", "BOGUS"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    for label in ["GmX", "LPF", "X", "Y"] {
        assert!(err.contains(label), "{err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["response", "--topology", "nope", "--preset", "paper"][..],
        &["response", "--topology", "xsf", "--gm1", "1q"],
        &["response", "--topology", "xsf", "--gm1", "1n"],
        &["response", "--topology", "xsf", "--preset", "paper", "--c-in", "1p"],
        &["response", "--topology", "xsf", "--preset", "paper", "--variant", "II"],
        &["response", "--topology", "xsf", "--preset", "paper", "--gm1", "-1n"],
        &["response", "--topology", "xsf", "--preset", "paper", "--points", "1"],
        &["verify", "--tol", "0"],
        &["verify", "--topology", "nope"],
        &["poles", "--topology", "biquad-lpf", "--q", "2"],
        &["poles", "--topology", "xsf", "--preset", "paper", "--q", "2"],
        &["bank-design", "--channels", "0"],
        &["frobnicate"],
    ] {
        let out = gmc(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn params_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ssf.json");
    std::fs::write(
        &p,
        r#"{"topology":"ssf","variant":"II","gm1":2.528e-7,"gm2":2.273e-7,"c1":1e-12,"c2":4e-12}"#,
    )
    .unwrap();
    let from_file = gmc(&["poles", "--params", p.to_str().unwrap(), "--format", "csv"]);
    let preset = gmc(&[
        "poles",
        "--topology",
        "ssf",
        "--variant",
        "II",
        "--preset",
        "paper",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&preset));
    let changed = gmc(&["poles", "--params", p.to_str().unwrap(), "--c2", "1p"]);
    assert_ne!(stdout(&changed), stdout(&from_file));
    let clash = gmc(&["poles", "--params", p.to_str().unwrap(), "--topology", "fvf"]);
    assert_eq!(code(&clash), 2);
}

#[test]
fn verify_all_passes() {
    let out = gmc(&["verify", "--topology", "all", "--tol", "1e-9"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 10);
}

#[test]
fn verify_below_epsilon_fails() {
    let out = gmc(&["verify", "--topology", "all", "--tol", "1e-30"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_ssf_has_both_variants() {
    let out = gmc(&["verify", "--topology", "ssf"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<_> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("ssf-I "));
    assert!(rows[1].starts_with("ssf-II "));
}

fn q_line(out: &Output) -> f64 {
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix("q: "))
        .expect("q line")
        .parse()
        .unwrap()
}

#[test]
fn poles_reports() {
    let xsf = gmc(&["poles", "--topology", "xsf", "--preset", "paper"]);
    assert_eq!(code(&xsf), 0);
    assert!((q_line(&xsf) - 2.0).abs() < 5e-4);
    assert_eq!(stdout(&xsf).matches("pole: ").count(), 2);

    let lossy = gmc(&[
        "poles",
        "--topology",
        "cascaded-lossy",
        "--omega1",
        "1k",
        "--omega2",
        "1k",
    ]);
    assert!((q_line(&lossy) - 0.5).abs() < 1e-12);

    let ssf = gmc(&["poles", "--topology", "ssf", "--preset", "paper"]);
    assert!((q_line(&ssf) - 2.109).abs() < 5e-4);

    let csv = gmc(&["poles", "--topology", "xsf", "--preset", "paper", "--format", "csv"]);
    let text = stdout(&csv);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("topology,f0_hz,omega0_rad_s,q,pole_re,pole_im"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn response_writes_file_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = response(&["--probe", "LPF", "--points", "16", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 17);
    // Only the output file is left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn bank_design_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("bank.json");
    let out = gmc(&["bank-design", "--out", bank.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&bank).unwrap();
    assert_eq!(text, std::fs::read_to_string(fixture("fixtures/bank.json")).unwrap());

    let wav = dir.path().join("tone.wav");
    let fs = 22_050.0;
    let tone: Vec<f64> = (0..22_050)
        .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 1_000.0 * i as f64 / fs).sin())
        .collect();
    write_wav_pcm16(&wav, &tone, 22_050).unwrap();
    let feats = dir.path().join("f.csv");
    let out = gmc(&[
        "bank-run",
        "--bank",
        bank.to_str().unwrap(),
        "--wav",
        wav.to_str().unwrap(),
        "--out",
        feats.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(&feats).unwrap();
    let mut sums = [0.0f64; 16];
    for row in csv.lines().skip(1) {
        for (k, v) in row.split(',').skip(1).enumerate() {
            sums[k] += v.parse::<f64>().unwrap();
        }
    }
    let best = (0..16).max_by(|&a, &b| sums[a].total_cmp(&sums[b])).unwrap();
    // 1 kHz is nearest the ninth center, 1035 Hz.
    assert_eq!(best, 8);
}

#[test]
fn bank_nyquist_names_channel() {
    let design = gmc(&["bank-design", "--fs", "16k"]);
    assert_eq!(code(&design), 1);
    assert!(stderr(&design).contains("[15]"), "{}", stderr(&design));

    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    write_wav_pcm16(&wav, &[0.0f64; 1600], 16_000).unwrap();
    let out = gmc(&[
        "bank-run",
        "--bank",
        fixture("fixtures/bank.json").to_str().unwrap(),
        "--wav",
        wav.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("[15]"), "{}", stderr(&out));
}

#[test]
fn silence_gives_zero_features() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    write_wav_pcm16(&wav, &[0.0f64; 2_205], 22_050).unwrap();
    let out = gmc(&[
        "bank-run",
        "--bank",
        fixture("fixtures/bank.json").to_str().unwrap(),
        "--wav",
        wav.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2_205 / 221);
    for row in rows {
        assert!(row.split(',').skip(1).all(|v| v == "0"), "{row}");
    }
}

#[test]
fn wav_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.wav");
    std::fs::write(&bad, b"not a wav file").unwrap();
    let bank = fixture("fixtures/bank.json");
    for wav in [bad, dir.path().join("missing.wav")] {
        let out = gmc(&[
            "bank-run",
            "--bank",
            bank.to_str().unwrap(),
            "--wav",
            wav.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 1, "{}", stderr(&out));
    }
}

#[test]
fn outputs_are_deterministic() {
    let a = response(&["--probe", "Y", "--engine", "mna"]);
    let b = response(&["--probe", "Y", "--engine", "mna"]);
    assert_eq!(a.stdout, b.stdout);
}
