use std::collections::BTreeMap;

use posture_core::emg::{
    self, load_channel_map, load_emg_csv, write_emg_csv, ConditionId, EmgFixture, EmgPipelineConfig,
};
use posture_core::BenchConfig;

fn fixture() -> EmgFixture {
    EmgFixture::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/emg_six_subjects.json")).unwrap()
}

#[test]
fn report_is_deterministic() {
    let f = fixture();
    let cfg = EmgPipelineConfig::default();
    let run = || {
        let subjects = f.subjects[..2]
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let loads: BTreeMap<_, _> = ConditionId::ALL
                    .into_iter()
                    .map(|c| (c, emg::load_estimate(&f.synthesize(i, c).unwrap(), &cfg).unwrap()))
                    .collect();
                (s.id.clone(), loads)
            })
            .collect();
        emg::ratio_report(subjects).unwrap().to_json()
    };
    assert_eq!(run(), run());
}

#[test]
fn renamed_columns_via_channel_map() {
    let f = fixture();
    let rec = f.synthesize(0, ConditionId::A).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut csv = Vec::new();
    write_emg_csv(&rec, &mut csv).unwrap();
    let text = String::from_utf8(csv)
        .unwrap()
        .replacen("gastrocnemius_left", "ch1", 1)
        .replacen("gastrocnemius_right", "ch2", 1);
    let data = dir.path().join("a.csv");
    std::fs::write(&data, text).unwrap();
    let map = dir.path().join("map.json");
    std::fs::write(
        &map,
        r#"{"ch1": {"muscle": "gastrocnemius", "side": "left"},
            "ch2": {"muscle": "gastrocnemius", "side": "right"}}"#,
    )
    .unwrap();
    let back = load_emg_csv(&data, Some(&load_channel_map(&map).unwrap())).unwrap();
    let cfg = EmgPipelineConfig::default();
    assert_eq!(
        emg::load_estimate(&back, &cfg).unwrap(),
        emg::load_estimate(&rec, &cfg).unwrap()
    );
}

#[test]
fn shipped_config_is_valid() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/default.json");
    let c = BenchConfig::load(path).unwrap();
    let mut without_subjects = c.clone();
    without_subjects.subjects.clear();
    assert_eq!(without_subjects, BenchConfig::default());
    assert!(c.regions_for(Some("S3")).unwrap().is_some());
}
