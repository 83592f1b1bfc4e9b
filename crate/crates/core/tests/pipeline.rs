use padfair_core::fairness::{MetricConfig, SweepGrid};
use padfair_core::odta::default_sources;
use padfair_core::synth::{synth_manifest, synth_scores, GroupScoreSpec, ManifestShape};
use padfair_core::{
    fairness_curve, odta_report, parse_manifest, parse_scores, serialize_manifest, write_scores, Metric, PartitionKind,
};

const MANIFEST: &str = r#"
{"sample_id":"a1","subject_id":"u1","pad_label":"attack","attack_type":"print","split":"test","attributes":{"gender":"male","beard":true,"eyeglasses":false,"bangs":false}}
{"sample_id":"b1","subject_id":"u1","pad_label":"bonafide","split":"test","attributes":{"gender":"male","beard":false,"eyeglasses":false,"bangs":false}}
{"sample_id":"a2","subject_id":"u2","pad_label":"attack","attack_type":"replay","split":"test","attributes":{"gender":"female","beard":false,"eyeglasses":true,"bangs":false}}
{"sample_id":"b2","subject_id":"u2","pad_label":"bonafide","split":"test","attributes":{"gender":"female","beard":false,"eyeglasses":false,"bangs":false}}
{"sample_id":"b3","subject_id":"u3","pad_label":"bonafide","split":"test","attributes":{"makeup":true}}
"#;

const SCORES: &str = "sample_id,score\na1,0.9\nb1,0.2\na2,0.4\nb2,0.6\nb3,0.1\n";

#[test]
fn text_inputs_to_partitioned_rates() {
    let manifest = parse_manifest(MANIFEST.as_bytes()).unwrap();
    let scores = parse_scores(SCORES.as_bytes(), Some(&manifest)).unwrap();
    assert_eq!(scores.len(), 5);

    // b3 has no gender and drops out of the gender partition.
    let gender = scores.partitioned(PartitionKind::Gender).unwrap();
    assert_eq!(gender.len(), 4);
    let occlusion = scores.partitioned(PartitionKind::Occlusion).unwrap();
    let groups: Vec<_> = occlusion
        .records()
        .iter()
        .map(|r| r.group("occlusion").unwrap())
        .collect();
    assert_eq!(groups, ["occlusion", "non-occlusion", "occlusion", "non-occlusion"]);

    let partition = gender.partition().unwrap();
    let report = odta_report(&gender, partition, &default_sources(partition), &[0.5]).unwrap();
    let female_self = report
        .rows
        .iter()
        .find(|r| r.threshold_source.label() == "female" && r.eval_group == "female")
        .unwrap();
    assert_eq!(female_self.tau, 0.4);
    assert_eq!(female_self.rates.apcer, 0.0);
    assert_eq!(female_self.rates.bpcer, 1.0);
}

#[test]
fn score_and_manifest_files_round_trip() {
    let scores = synth_scores(&GroupScoreSpec::two_groups("gender", "male", "female", 300, -0.5), 8).unwrap();
    let mut csv = Vec::new();
    write_scores(&scores, &mut csv).unwrap();
    let back = parse_scores(csv.as_slice(), None).unwrap();
    assert_eq!(back.len(), scores.len());
    for (a, b) in back.records().iter().zip(scores.records()) {
        assert_eq!(
            (a.sample_id.as_str(), a.score, a.pad_label),
            (b.sample_id.as_str(), b.score, b.pad_label)
        );
    }

    let manifest = synth_manifest(
        &ManifestShape {
            subjects: 50,
            ..Default::default()
        },
        2,
    )
    .unwrap();
    let mut jsonl = Vec::new();
    serialize_manifest(&manifest, &mut jsonl).unwrap();
    assert_eq!(parse_manifest(jsonl.as_slice()).unwrap(), manifest);
}

#[test]
fn curves_from_pooled_thresholds() {
    let fair = synth_scores(&GroupScoreSpec::two_groups("gender", "male", "female", 3000, 0.0), 4).unwrap();
    let unfair = synth_scores(&GroupScoreSpec::two_groups("gender", "male", "female", 3000, -1.5), 4).unwrap();
    let config = MetricConfig::new(0.5, SweepGrid::default()).unwrap();
    let auc = |set: &padfair_core::ScoreSet, metric| {
        fairness_curve(set, set.partition().unwrap(), metric, &config, set)
            .unwrap()
            .auc
    };
    assert!(auc(&fair, Metric::Fdr) > auc(&unfair, Metric::Fdr));
    assert!(auc(&fair, Metric::Abf) > auc(&unfair, Metric::Abf));
    assert!(auc(&unfair, Metric::Abf) <= auc(&unfair, Metric::Fdr));
}
