use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use padfair_cli::augment::{png_bytes, AugmentRecord};
use padfair_cli::report::{read_curve_csv, ReportBundle};
use padfair_core::protocol::TrainTestPlan;
use padfair_core::synth::{synth_manifest, ManifestShape};
use padfair_core::{
    serialize_manifest, AttributeSet, Gender, PadLabel, RasterImage, SampleManifest, SampleRecord, Split,
};

fn padfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padfair"))
        .args(args)
        .env_remove("PADFAIR_SEED")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_manifest(path: &Path, records: Vec<SampleRecord>) {
    let manifest = SampleManifest::new(records).unwrap();
    let mut bytes = Vec::new();
    serialize_manifest(&manifest, &mut bytes).unwrap();
    fs::write(path, bytes).unwrap();
}

fn record(id: &str, label: PadLabel, gender: Gender, split: Split) -> SampleRecord {
    SampleRecord {
        sample_id: id.to_string(),
        subject_id: id.to_string(),
        media_path: None,
        pad_label: label,
        attack_type: None,
        split,
        attributes: AttributeSet {
            gender: Some(gender),
            ..Default::default()
        },
    }
}

#[test]
fn fair_fixture_report() {
    let dir = tempfile::tempdir().unwrap();
    let (scores, manifest, out) = (
        dir.path().join("s.csv"),
        dir.path().join("m.jsonl"),
        dir.path().join("rep"),
    );
    let synth = padfair(&[
        "synth",
        "--n-per-class",
        "10000",
        "--seed",
        "7",
        "--out",
        s(&scores),
        "--manifest-out",
        s(&manifest),
    ]);
    assert!(synth.status.success(), "{}", String::from_utf8_lossy(&synth.stderr));
    let eval = padfair(&[
        "evaluate",
        "--manifest",
        s(&manifest),
        "--scores",
        s(&scores),
        "--out",
        s(&out),
        "--seed",
        "7",
    ]);
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));

    let report: ReportBundle = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.config.seed, 7);
    assert_eq!(report.config.partition, "gender");
    assert!(report.curves.fdr.auc >= 0.97, "FDR-AUC {}", report.curves.fdr.auc);

    let rows = read_curve_csv(fs::File::open(out.join("fdr_curve.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 40);
    for (row, p) in rows.iter().zip(&report.curves.fdr.points) {
        assert_eq!(row.value, p.value.as_ref().map(|v| v.value));
    }
    for name in ["abf_curve.csv", "odta_fused.csv", "odta_male.csv", "odta_female.csv"] {
        assert!(out.join(name).exists(), "{name} missing");
    }

    // Same inputs and seed give the same bytes.
    let again = dir.path().join("rep2");
    padfair(&[
        "report",
        "--manifest",
        s(&manifest),
        "--scores",
        s(&scores),
        "--out",
        s(&again),
        "--seed",
        "7",
    ]);
    for name in ["fdr_curve.csv", "abf_curve.csv", "odta_fused.csv"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn hand_rates_give_fdr_point_of_0_9() {
    // Pooled attacks: 6 of 40 below 0.75, so x = 0.15 puts tau at 0.75.
    // Male: APCER 4/20, BPCER 1/20. Female: APCER 2/20, BPCER 3/20.
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    let mut csv = String::from("sample_id,score\n");
    for (gender, tag, attacks_below, bona_above) in [(Gender::Male, "m", 4, 1), (Gender::Female, "f", 2, 3)] {
        for i in 0..20 {
            let id = format!("{tag}-pa-{i}");
            csv += &format!("{id},{}\n", if i < attacks_below { 0.25 } else { 0.75 });
            records.push(record(&id, PadLabel::Attack, gender, Split::Test));
            let id = format!("{tag}-bf-{i}");
            csv += &format!("{id},{}\n", if i < bona_above { 0.75 } else { 0.25 });
            records.push(record(&id, PadLabel::BonaFide, gender, Split::Test));
        }
    }
    let (manifest, scores) = (dir.path().join("m.jsonl"), dir.path().join("s.csv"));
    write_manifest(&manifest, records);
    fs::write(&scores, csv).unwrap();
    let out = padfair(&[
        "sweep",
        "--manifest",
        s(&manifest),
        "--scores",
        s(&scores),
        "--grid-start",
        "0.15",
        "--grid-end",
        "0.15",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_curve_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].value, Some(0.9));
}

#[test]
fn missing_score_file_exits_2_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.jsonl");
    write_manifest(
        &manifest,
        vec![record("a", PadLabel::Attack, Gender::Male, Split::Test)],
    );
    let missing = dir.path().join("absent-scores.csv");
    let out = padfair(&[
        "evaluate",
        "--manifest",
        s(&manifest),
        "--scores",
        s(&missing),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&missing)));

    let out = padfair(&[
        "--error-json",
        "odta",
        "--manifest",
        s(&manifest),
        "--scores",
        s(&missing),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "io");
    assert_eq!(err["path"], s(&missing));
}

#[test]
fn degenerate_group_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    let mut csv = String::from("sample_id,score\n");
    for i in 0..10 {
        for (id, label, gender) in [
            (format!("m-bf-{i}"), PadLabel::BonaFide, Gender::Male),
            (format!("m-pa-{i}"), PadLabel::Attack, Gender::Male),
            (format!("f-bf-{i}"), PadLabel::BonaFide, Gender::Female),
        ] {
            csv += &format!("{id},{}\n", i as f64 / 10.0);
            records.push(record(&id, label, gender, Split::Test));
        }
    }
    let (manifest, scores) = (dir.path().join("m.jsonl"), dir.path().join("s.csv"));
    write_manifest(&manifest, records);
    fs::write(&scores, csv).unwrap();
    let out = padfair(&[
        "--error-json",
        "sweep",
        "--manifest",
        s(&manifest),
        "--scores",
        s(&scores),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "undefined-rate");
}

#[test]
fn split_plans() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("m.jsonl");
    let manifest = synth_manifest(&ManifestShape::default(), 4).unwrap();
    let mut bytes = Vec::new();
    serialize_manifest(&manifest, &mut bytes).unwrap();
    fs::write(&manifest_path, bytes).unwrap();

    for extra in [&[][..], &["--resplit"][..]] {
        let plan_path = dir.path().join("plan.json");
        let mut args = vec![
            "split",
            "--manifest",
            s(&manifest_path),
            "--protocol",
            "P1.2",
            "--seed",
            "9",
            "--out",
            s(&plan_path),
        ];
        args.extend_from_slice(extra);
        let out = padfair(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let plan: TrainTestPlan = serde_json::from_slice(&fs::read(&plan_path).unwrap()).unwrap();
        assert_eq!(plan.protocol.to_string(), "P1.2");
        assert!(plan
            .train_ids
            .iter()
            .all(|id| manifest.get(id).unwrap().attributes.gender == Some(Gender::Female)));
        assert_eq!(plan.test_sets.keys().collect::<Vec<_>>(), ["female", "male"]);
    }

    let out = padfair(&["split", "--manifest", s(&manifest_path), "--protocol", "P3:gender"]);
    assert_eq!(out.status.code(), Some(2));
}

/// Eight 224x224 training images over two genders and both classes.
fn image_corpus(dir: &Path) -> PathBuf {
    fs::create_dir_all(dir.join("img")).unwrap();
    let mut records = Vec::new();
    for i in 0..8u8 {
        let data: Vec<u8> = (0..224 * 224)
            .flat_map(|p| [i * 30, (p % 224) as u8, (p / 224) as u8])
            .collect();
        let image = RasterImage::new(224, 224, data).unwrap();
        fs::write(dir.join(format!("img/{i}.png")), png_bytes(&image)).unwrap();
        let label = if i % 2 == 0 {
            PadLabel::BonaFide
        } else {
            PadLabel::Attack
        };
        let gender = if i < 4 { Gender::Male } else { Gender::Female };
        let mut r = record(&format!("s{i}"), label, gender, Split::Train);
        r.media_path = Some(format!("img/{i}.png"));
        records.push(r);
    }
    let manifest = dir.join("m.jsonl");
    write_manifest(&manifest, records);
    manifest
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn read_records(path: &Path) -> Vec<AugmentRecord> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn augment_is_reproducible_and_label_safe() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = image_corpus(dir.path());
    let run = |out: &str, extra: &[&str]| {
        let out = dir.path().join(out);
        let mut args = vec![
            "augment",
            "--manifest",
            s(&manifest),
            "--out",
            s(&out),
            "--p1",
            "1",
            "--p2",
            "1",
        ];
        args.extend_from_slice(extra);
        let status = padfair(&args);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let a = run("a", &["--seed", "5"]);
    let b = run("b", &["--seed", "5"]);
    assert_eq!(tree(&a), tree(&b));
    assert_ne!(tree(&a), tree(&run("c", &["--seed", "6"])));

    let records = read_records(&a.join("manifest.jsonl"));
    assert_eq!(records.len(), 8);
    for r in &records {
        assert!(r.applied);
        assert_eq!(r.binary_label, r.pad_label);
        if r.pad_label == PadLabel::BonaFide {
            let donor: usize = r.donor_id.as_ref().unwrap()[1..].parse().unwrap();
            assert_eq!(donor % 2, 0, "{} got attack donor s{donor}", r.sample_id);
        }
        assert!(a.join(&r.media_path).exists() && a.join(&r.map_path).exists());
    }

    // The seed also comes from the environment.
    let env_out = dir.path().join("env");
    let status = Command::new(env!("CARGO_BIN_EXE_padfair"))
        .args([
            "augment",
            "--manifest",
            s(&manifest),
            "--out",
            s(&env_out),
            "--p1",
            "1",
            "--p2",
            "1",
        ])
        .env("PADFAIR_SEED", "5")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(tree(&a), tree(&env_out));
}

#[test]
fn augment_with_zero_probabilities_copies_images() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = image_corpus(dir.path());
    let out = dir.path().join("out");
    let status = padfair(&[
        "augment",
        "--manifest",
        s(&manifest),
        "--out",
        s(&out),
        "--p1",
        "0",
        "--p2",
        "0",
        "--map-format",
        "png",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for r in read_records(&out.join("manifest.jsonl")) {
        assert!(!r.applied && r.region.is_none());
        let original = padfair_cli::augment::read_png(&dir.path().join(&r.source_media_path)).unwrap();
        let copy = padfair_cli::augment::read_png(&out.join(&r.media_path)).unwrap();
        assert_eq!(original, copy);
        assert_eq!(r.map_path.extension().unwrap(), "png");
    }
}

#[test]
fn augment_missing_image_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = image_corpus(dir.path());
    fs::remove_file(dir.path().join("img/3.png")).unwrap();
    let out = padfair(&["augment", "--manifest", s(&manifest), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3.png"));
}
