use gmc::analysis::{compare, peak, sweep_netlist, sweep_tf, FrequencyGrid, FrequencyResponse};
use gmc::filterbank::{discretize, run_bank, BankConfig, Prototype};
use gmc::netlist::Probe;
use gmc::scalar::hz_to_rad;
use gmc::tf::biquad_bpf_equal_poles;
use gmc::topology::{TopologyKind, TopologyParams};
use gmc::wav::{read_wav, write_wav_pcm16};
use proptest::prelude::*;

fn bank_config(fs_hz: f64) -> BankConfig {
    BankConfig {
        channels: 16,
        f_lo_hz: 100.0,
        f_hi_hz: 8000.0,
        q: 2.0,
        prototype: Prototype::EqualPoleBpf,
        fs_hz,
        smooth_hz: 25.0,
        frame_rate_hz: 100.0,
        log_compress: false,
        normalize_peak: false,
    }
}

#[test]
fn wav_to_features() {
    let fs = 22_050u32;
    let tone: Vec<f64> = (0..fs / 2)
        .map(|i| 0.5 * (hz_to_rad(2_487.0) * f64::from(i) / f64::from(fs)).sin())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tone.wav");
    write_wav_pcm16(&path, &tone, fs).unwrap();

    let wav = read_wav::<f64>(&path).unwrap();
    let cfg = bank_config(f64::from(wav.sample_rate));
    let bank = cfg.discretize().unwrap();
    let feats = run_bank(&bank, &wav.samples, cfg.fs_hz, &cfg.envelope()).unwrap();
    let means = feats.channel_means();
    let best = (0..16).max_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap();
    assert_eq!(best, 11);
    assert_eq!(feats.frames(), 11_025 / 221);
}

#[test]
fn bank_config_json_round_trip() {
    let cfg = bank_config(22_050.0);
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<BankConfig>(&text).unwrap(), cfg);
    assert!(serde_json::from_str::<BankConfig>(&text.replace("\"q\"", "\"quality\"")).is_err());
}

#[test]
fn preset_params_round_trip_through_json() {
    for kind in TopologyKind::ALL {
        let p = kind.preset::<f64>();
        let text = serde_json::to_string(&p).unwrap();
        let back: TopologyParams<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.kind(), kind);
    }
}

#[test]
fn response_csv_is_lossless() {
    let b = TopologyKind::Xsf.preset::<f64>().build().unwrap();
    let resp = sweep_netlist(&b.netlist, "Y", &FrequencyGrid::default()).unwrap();
    let back = FrequencyResponse::from_csv(&resp.to_csv()).unwrap();
    assert_eq!(back, resp);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equal_pole_peak_is_q(f0 in 10.0f64..1e5, q in 0.8f64..20.0) {
        let tf = biquad_bpf_equal_poles(hz_to_rad(f0), q).unwrap();
        let grid = FrequencyGrid::log(f0 / 3.0, f0 * 3.0, 2001).unwrap();
        let p = peak(&sweep_tf(&tf, &grid).unwrap()).unwrap();
        prop_assert!((p.mag_db - 20.0 * q.log10()).abs() < 0.01);
        prop_assert!((p.f_peak / f0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn prewarped_center_gain_is_exact(ratio in 0.001f64..0.49, q in 0.5f64..10.0) {
        let fs = 48_000.0;
        let f0 = ratio * fs;
        let tf = biquad_bpf_equal_poles(hz_to_rad(f0), q).unwrap();
        let d = discretize(&tf, f0, fs).unwrap();
        let ct = tf.eval(f0).unwrap();
        prop_assert!((d.response_at(f0, fs) - ct).norm() / ct.norm() < 1e-9);
        prop_assert!(d.is_stable());
    }

    #[test]
    fn scaled_presets_still_verify(k in 0.1f64..10.0, idx in 0usize..10) {
        // Scaling every element by k leaves voltage gains unchanged and
        // scales transconductance outputs by k.
        let kind = TopologyKind::ALL[idx];
        let base = kind.preset::<f64>().build().unwrap();
        let serde_json::Value::Object(mut obj) = serde_json::to_value(kind.preset::<f64>()).unwrap() else {
            unreachable!()
        };
        for v in obj.values_mut() {
            if let Some(x) = v.as_f64() {
                *v = (x * k).into();
            }
        }
        let scaled: TopologyParams<f64> = serde_json::from_value(serde_json::Value::Object(obj)).unwrap();
        let b = scaled.build().unwrap();
        let grid = FrequencyGrid::log(1.0, 1e6, 64).unwrap();
        for label in base.closed_forms.keys() {
            let a = sweep_netlist(&b.netlist, label, &grid).unwrap();
            let mut expect = base.closed_forms[label].clone();
            if matches!(base.netlist.probe(label).unwrap(), Probe::Current(_)) {
                expect = expect.scale(k);
            }
            let r = sweep_tf(&expect, &grid).unwrap();
            prop_assert!(compare(&a, &r).unwrap() < 1e-9, "{} {}", kind, label);
        }
    }
}
