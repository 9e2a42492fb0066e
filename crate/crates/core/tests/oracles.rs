use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use tactslip::campaign::{run_campaign, write_corpus, CampaignConfig};
use tactslip::eval::eval_slip;
use tactslip::io::track_csv;
use tactslip::metrics::dice_iou;
use tactslip::pipeline::run_track_batch;
use tactslip::synth::{gen_sequence, rasterize, SequenceSpec, ShapeKind, ShapeSpec};
use tactslip::SegScoreF64;
use tempfile::tempdir;

#[test]
fn boundary_noise_keeps_dice_above_point_nine() {
    let shape = ShapeSpec::centered(ShapeKind::Capsule, 60.0, 20.0, 30.0, (128, 96));
    let clean = rasterize(&shape).unwrap();
    let mut worst = 1.0f64;
    for seed in 0..100 {
        let noisy = gen_sequence(&SequenceSpec::new(shape, vec![30.0], 0.05, seed)).unwrap();
        let score: SegScoreF64 = dice_iou(&noisy[0].mask, &clean).unwrap();
        worst = worst.min(score.dice);
    }
    assert!(worst >= 0.9, "worst dice {worst}");
}

/// `(frame, value)` rows of a two-column selection from a CSV file, parsed by hand.
fn columns(path: &Path, value_col: usize, valid_col: Option<usize>) -> BTreeMap<u64, f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| valid_col.is_none_or(|v| f[v] == "true"))
        .map(|f| (f[0].parse().unwrap(), f[value_col].parse().unwrap()))
        .collect()
}

#[test]
fn campaign_report_matches_recomputation_from_csv() {
    let tmp = tempdir().unwrap();
    let cfg = CampaignConfig::default();
    let dirs = write_corpus(tmp.path(), &cfg, None).unwrap();
    assert_eq!(dirs.len(), 45);
    for (dir, track) in dirs.iter().zip(run_track_batch(&dirs, &cfg.pipeline, None)) {
        fs::write(
            dir.join("track.csv"),
            track_csv(track.unwrap().samples()).unwrap(),
        )
        .unwrap();
    }
    let report = eval_slip(tmp.path(), tmp.path()).unwrap();
    assert_eq!(report.trials.len(), 45);
    assert_eq!(report.groups.len(), 9);

    // label -> (every per-frame error, every final-frame error)
    let mut by_label: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for dir in &dirs {
        let label = dir
            .parent()
            .unwrap()
            .file_name()
            .unwrap()
            .to_str()
            .unwrap()
            .to_string();
        let pred = columns(&dir.join("track.csv"), 2, Some(4));
        let truth = columns(&dir.join("truth.csv"), 1, None);
        let errors: Vec<(u64, f64)> = truth
            .iter()
            .filter_map(|(f, t)| pred.get(f).map(|p| (*f, (p - t).abs())))
            .collect();
        let entry = by_label.entry(label).or_default();
        entry.0.extend(errors.iter().map(|e| e.1));
        entry.1.push(errors.last().unwrap().1);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for g in &report.groups {
        let (frames, finals) = &by_label[&g.label];
        assert_eq!(g.trials, finals.len());
        assert!(
            (g.per_frame_mean_deg - mean(frames)).abs() < 1e-9,
            "{}",
            g.label
        );
        assert!(
            (g.final_mean_deg - mean(finals)).abs() < 1e-9,
            "{}",
            g.label
        );
        let max = finals.iter().copied().fold(0.0, f64::max);
        assert!((g.final_max_deg - max).abs() < 1e-9);
    }

    // the in-memory campaign differs only by the CSVs' three-decimal rounding
    let direct = run_campaign(&cfg).unwrap();
    for a in &direct.groups {
        let b = report.group(&a.label).unwrap();
        assert!((a.per_frame_mean_deg - b.per_frame_mean_deg).abs() < 1e-3);
        assert!((a.final_mean_deg - b.final_mean_deg).abs() < 1e-3);
    }
}
