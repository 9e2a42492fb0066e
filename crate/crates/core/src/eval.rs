//! Evaluation over file corpora: Dice/IoU between mask directories and slip
//! error between track and ground-truth CSVs, grouped per object.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{find_named, fmt3, read_mask, read_track, read_truth};
use crate::metrics::{dice_iou, mean_std, sample_error, SegScore, SlipError};

#[derive(Debug, Clone, PartialEq)]
pub struct SegPair {
    pub name: String,
    pub score: SegScore<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegReport {
    pub pairs: Vec<SegPair>,
    pub dice_mean: f64,
    pub dice_std: f64,
    pub iou_mean: f64,
    pub iou_std: f64,
}

impl SegReport {
    pub fn from_pairs(pairs: Vec<SegPair>) -> Self {
        let dice: Vec<f64> = pairs.iter().map(|p| p.score.dice).collect();
        let iou: Vec<f64> = pairs.iter().map(|p| p.score.iou).collect();
        let (dice_mean, dice_std) = mean_std(&dice).unwrap_or_default();
        let (iou_mean, iou_std) = mean_std(&iou).unwrap_or_default();
        Self {
            pairs,
            dice_mean,
            dice_std,
            iou_mean,
            iou_std,
        }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("name,dice,iou,intersection,union\n");
        for p in &self.pairs {
            let c = p.score.counts;
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{},{}",
                p.name, p.score.dice, p.score.iou, c.intersection, c.union
            );
        }
        out
    }

    pub fn table(&self) -> String {
        format!(
            "pairs  {}\ndice   {:.3} ± {:.3}\niou    {:.3} ± {:.3}\n",
            self.pairs.len(),
            self.dice_mean,
            self.dice_std,
            self.iou_mean,
            self.iou_std
        )
    }
}

fn pgm_names(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().and_then(|e| e.to_str()) == Some("pgm") {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.push(name.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

fn unmatched(only_pred: &[String], only_truth: &[String]) -> Error {
    let mut parts = Vec::new();
    if !only_pred.is_empty() {
        parts.push(format!("no ground truth for {}", only_pred.join(", ")));
    }
    if !only_truth.is_empty() {
        parts.push(format!("no prediction for {}", only_truth.join(", ")));
    }
    Error::Unmatched(parts.join("; "))
}

/// Scores every `.pgm` mask in `pred_dir` against the same file name in
/// `truth_dir`. Both directories must hold the same set of names.
pub fn eval_seg(pred_dir: &Path, truth_dir: &Path) -> Result<SegReport> {
    let pred = pgm_names(pred_dir)?;
    let truth = pgm_names(truth_dir)?;
    if pred.is_empty() {
        return Err(Error::Unmatched(format!(
            "no .pgm masks in {}",
            pred_dir.display()
        )));
    }
    if pred != truth {
        let only_pred: Vec<String> = pred
            .iter()
            .filter(|n| !truth.contains(n))
            .cloned()
            .collect();
        let only_truth: Vec<String> = truth
            .iter()
            .filter(|n| !pred.contains(n))
            .cloned()
            .collect();
        return Err(unmatched(&only_pred, &only_truth));
    }
    let pairs = pred
        .into_iter()
        .map(|name| {
            let p = read_mask(&pred_dir.join(&name))?;
            let t = read_mask(&truth_dir.join(&name))?;
            let score =
                dice_iou(&p, &t).map_err(|e| Error::format(pred_dir.join(&name), e.to_string()))?;
            Ok(SegPair { name, score })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SegReport::from_pairs(pairs))
}

/// Slip error of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialError {
    pub label: String,
    pub trial: String,
    pub error: SlipError<f64>,
    pub invalid_frames: usize,
    pub final_slip_deg: f64,
}

/// Errors pooled over all trials of one object. The per-frame figures pool
/// every compared frame; the final figures use one value per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: String,
    pub trials: usize,
    pub per_frame_mean_deg: f64,
    pub per_frame_std_deg: f64,
    pub final_mean_deg: f64,
    pub final_std_deg: f64,
    pub final_max_deg: f64,
}

impl GroupSummary {
    fn of(label: &str, trials: &[&TrialError]) -> Self {
        let frames: Vec<f64> = trials
            .iter()
            .flat_map(|t| t.error.per_frame_abs_deg.iter().map(|&(_, e)| e))
            .collect();
        let finals: Vec<f64> = trials.iter().map(|t| t.error.final_abs_deg).collect();
        let (per_frame_mean_deg, per_frame_std_deg) = mean_std(&frames).unwrap_or_default();
        let (final_mean_deg, final_std_deg) = mean_std(&finals).unwrap_or_default();
        Self {
            label: label.to_string(),
            trials: trials.len(),
            per_frame_mean_deg,
            per_frame_std_deg,
            final_mean_deg,
            final_std_deg,
            final_max_deg: finals.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlipReport {
    pub trials: Vec<TrialError>,
    /// One entry per label, in order of first appearance.
    pub groups: Vec<GroupSummary>,
    pub overall: GroupSummary,
}

impl SlipReport {
    pub fn from_trials(trials: Vec<TrialError>) -> Self {
        let mut labels: Vec<&str> = Vec::new();
        for t in &trials {
            if !labels.contains(&t.label.as_str()) {
                labels.push(&t.label);
            }
        }
        let groups = labels
            .iter()
            .map(|&label| {
                let members: Vec<&TrialError> =
                    trials.iter().filter(|t| t.label == label).collect();
                GroupSummary::of(label, &members)
            })
            .collect();
        let overall = GroupSummary::of("all", &trials.iter().collect::<Vec<_>>());
        Self {
            trials,
            groups,
            overall,
        }
    }

    pub fn group(&self, label: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.label == label)
    }

    /// Per-trial rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("label,trial,per_frame_mean_deg,per_frame_std_deg,final_abs_deg,final_slip_deg,invalid_frames\n");
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t.label,
                t.trial,
                fmt3(t.error.mean_abs_deg),
                fmt3(t.error.std_deg),
                fmt3(t.error.final_abs_deg),
                fmt3(t.final_slip_deg),
                t.invalid_frames
            );
        }
        out
    }

    pub fn table(&self) -> String {
        let width = self
            .groups
            .iter()
            .map(|g| g.label.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = format!(
            "{:<width$}  {:>6}  {:>19}  {:>19}  {:>9}\n",
            "object", "trials", "per-frame mean (deg)", "final-angle mean", "final max"
        );
        for g in self.groups.iter().chain(std::iter::once(&self.overall)) {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>8.3} ± {:<8.3}  {:>8.3} ± {:<8.3}  {:>9.3}",
                g.label,
                g.trials,
                g.per_frame_mean_deg,
                g.per_frame_std_deg,
                g.final_mean_deg,
                g.final_std_deg,
                g.final_max_deg
            );
        }
        out
    }
}

fn label_of(rel_dir: &Path) -> String {
    rel_dir
        .components()
        .next()
        .and_then(|c| c.as_os_str().to_str())
        .unwrap_or(".")
        .to_string()
}

fn display_dir(rel_dir: &Path) -> String {
    match rel_dir.to_str() {
        Some("") | None => ".".into(),
        Some(s) => s.replace('\\', "/"),
    }
}

/// Pairs every `track.csv` below `pred_root` with the `truth.csv` at the same
/// relative directory below `truth_root`. The first directory component is
/// the object label.
pub fn eval_slip(pred_root: &Path, truth_root: &Path) -> Result<SlipReport> {
    let dirs = |root: &Path, name: &str| -> Result<Vec<PathBuf>> {
        Ok(find_named(root, name)?
            .into_iter()
            .map(|p| p.parent().map(Path::to_path_buf).unwrap_or_default())
            .collect())
    };
    let pred = dirs(pred_root, "track.csv")?;
    let truth = dirs(truth_root, "truth.csv")?;
    if pred.is_empty() {
        return Err(Error::Unmatched(format!(
            "no track.csv below {}",
            pred_root.display()
        )));
    }
    if pred != truth {
        let only_pred: Vec<String> = pred
            .iter()
            .filter(|d| !truth.contains(d))
            .map(|d| display_dir(d))
            .collect();
        let only_truth: Vec<String> = truth
            .iter()
            .filter(|d| !pred.contains(d))
            .map(|d| display_dir(d))
            .collect();
        return Err(unmatched(&only_pred, &only_truth));
    }
    let trials = pred
        .iter()
        .map(|rel| {
            let track_path = pred_root.join(rel).join("track.csv");
            let samples = read_track(&track_path)?;
            let truth = read_truth(&truth_root.join(rel).join("truth.csv"))?;
            let error = sample_error(&samples, &truth)
                .map_err(|e| Error::format(&track_path, e.to_string()))?;
            Ok(TrialError {
                label: label_of(rel),
                trial: display_dir(rel),
                error,
                invalid_frames: samples.iter().filter(|s| !s.valid).count(),
                final_slip_deg: samples.last().map_or(0.0, |s| s.slip_deg),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SlipReport::from_trials(trials))
}
