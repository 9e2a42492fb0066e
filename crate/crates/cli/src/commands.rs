use std::io::Write;
use std::path::{Path, PathBuf};

use tactslip::bench::{run_bench, BenchParams, END_TO_END};
use tactslip::campaign::{write_corpus, CampaignConfig};
use tactslip::eval::{eval_seg as score_masks, eval_slip as score_tracks};
use tactslip::io::{manifest_text, read_pgm, track_csv, write_mask, PgmStream, TrackWriter};
use tactslip::mask::largest_component;
use tactslip::pipeline::{estimate_region, find_sequence_dirs, run_track_batch, run_track_dir};
use tactslip::segmenter::segment_diff;
use tactslip::synth::{linear_schedule, write_sequence_dir, SequenceSpec, ShapeKind, ShapeSpec};
use tactslip::{thin, Connectivity, Error, Pipeline, PipelineConfig, SlipTrackF64, TrackSummary};

use crate::{
    AngleArgs, BenchArgs, ConfigArgs, EvalSegArgs, EvalSlipArgs, Failure, SegmentArgs, SynthArgs,
    TrackArgs,
};

type CmdResult = Result<(), Failure>;

fn write_file(path: &Path, bytes: &[u8]) -> tactslip::Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stdout_error(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// Resolves the configuration, or prints it and returns `None` for `--print-config`.
fn config_or_print(args: &ConfigArgs) -> tactslip::Result<Option<PipelineConfig>> {
    let cfg = args.resolve()?;
    if args.print_config {
        print!("{}", manifest_text(&cfg.to_entries()));
        return Ok(None);
    }
    Ok(Some(cfg))
}

fn summary_line(track: &SlipTrackF64) -> String {
    let s = TrackSummary::of(track);
    format!(
        "frames {}, invalid frames {}, final slip {} deg",
        s.frames,
        s.invalid_frames,
        tactslip::io::fmt3(s.final_slip_deg)
    )
}

pub fn segment(args: SegmentArgs) -> CmdResult {
    let Some(cfg) = config_or_print(&args.config)? else {
        return Ok(());
    };
    let mask = segment_diff(
        &read_pgm(&args.frame)?,
        &read_pgm(&args.reference)?,
        &cfg.segment,
    )?;
    write_mask(&args.out, &mask)?;
    println!("contact pixels {}", mask.count());
    Ok(())
}

pub fn angle(args: AngleArgs) -> CmdResult {
    let Some(cfg) = config_or_print(&args.config)? else {
        return Ok(());
    };
    let input = read_pgm(&args.input)?;
    let mask = match &args.reference {
        Some(r) => segment_diff(&input, &read_pgm(r)?, &cfg.segment)?,
        None => input.to_mask(),
    };
    let estimate = estimate_region(&mask, &cfg)?;
    if let Some(path) = &args.skeleton {
        let skeleton = thin(&largest_component(&mask, Connectivity::Eight))?;
        write_mask(path, &skeleton.to_mask())?;
    }
    println!("angle_deg,elongation,valid");
    println!(
        "{},{},{}",
        tactslip::io::fmt3(estimate.angle_deg),
        tactslip::io::fmt3(estimate.elongation),
        estimate.valid
    );
    Ok(())
}

pub fn track(args: TrackArgs) -> CmdResult {
    let Some(cfg) = config_or_print(&args.config)? else {
        return Ok(());
    };
    if args.stdin {
        return track_stream(&cfg, args.reference.as_deref());
    }
    if let Some(root) = &args.batch {
        return track_batch(
            &cfg,
            root,
            args.out_root.as_deref(),
            args.reference.as_deref(),
        );
    }
    let input = args.input.expect("clap requires an input");
    let reference = args.reference.as_deref().map(read_pgm).transpose()?;
    let track = run_track_dir(&input, &cfg, reference.as_ref())?;
    let csv = track_csv(track.samples())?;
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => std::io::stdout().write_all(&csv).map_err(stdout_error)?,
    }
    eprintln!("{}", summary_line(&track));
    Ok(())
}

fn track_stream(cfg: &PipelineConfig, reference: Option<&Path>) -> CmdResult {
    let mut pipeline = match reference {
        Some(path) => Pipeline::with_reference(*cfg, read_pgm(path)?),
        None => Pipeline::new(*cfg),
    };
    let stdout = std::io::stdout();
    let mut writer = TrackWriter::new(stdout.lock())?;
    for (k, frame) in PgmStream::new(std::io::stdin().lock()).enumerate() {
        let sample = pipeline.push_frame(k as u64, &frame?)?;
        writer.write(&sample)?;
    }
    match pipeline.track() {
        Some(track) => eprintln!("{}", summary_line(track)),
        None => eprintln!("frames 0"),
    }
    Ok(())
}

fn track_batch(
    cfg: &PipelineConfig,
    root: &Path,
    out_root: Option<&Path>,
    reference: Option<&Path>,
) -> CmdResult {
    let dirs = find_sequence_dirs(root)?;
    if dirs.is_empty() {
        return Err(Error::format(root, "no directory with numbered .pgm frames").into());
    }
    let results = run_track_batch(&dirs, cfg, reference);
    let mut first_error = None;
    for (dir, result) in dirs.iter().zip(results) {
        let rel = dir.strip_prefix(root).expect("below root");
        let shown = if rel.as_os_str().is_empty() {
            Path::new(".")
        } else {
            rel
        };
        match result {
            Ok(track) => {
                let out_dir = out_root.map_or_else(|| dir.clone(), |o| o.join(rel));
                std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
                    path: out_dir.clone(),
                    source,
                })?;
                write_file(&out_dir.join("track.csv"), &track_csv(track.samples())?)?;
                println!("{}: {}", shown.display(), summary_line(&track));
            }
            Err(e) => {
                eprintln!("{}: error: {e}", shown.display());
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn eval_seg(args: EvalSegArgs) -> CmdResult {
    let report = score_masks(&args.pred, &args.truth)?;
    if let Some(path) = &args.csv {
        write_file(path, report.csv().as_bytes())?;
    }
    print!("{}", report.table());
    let mut violations = Vec::new();
    if let Some(min) = args.min_dice.filter(|&m| report.dice_mean < m) {
        violations.push(format!("mean dice {:.6} < {min}", report.dice_mean));
    }
    if let Some(min) = args.min_iou.filter(|&m| report.iou_mean < m) {
        violations.push(format!("mean iou {:.6} < {min}", report.iou_mean));
    }
    threshold_result(violations)
}

pub fn eval_slip(args: EvalSlipArgs) -> CmdResult {
    let report = score_tracks(&args.pred, &args.truth)?;
    if let Some(path) = &args.csv {
        write_file(path, report.csv().as_bytes())?;
    }
    print!("{}", report.table());
    let mut violations = Vec::new();
    for g in &report.groups {
        if let Some(max) = args.max_mean_deg.filter(|&m| g.per_frame_mean_deg > m) {
            violations.push(format!(
                "{}: per-frame mean {:.3} > {max}",
                g.label, g.per_frame_mean_deg
            ));
        }
        if let Some(max) = args.max_final_deg.filter(|&m| g.final_mean_deg > m) {
            violations.push(format!(
                "{}: final-angle mean {:.3} > {max}",
                g.label, g.final_mean_deg
            ));
        }
    }
    threshold_result(violations)
}

fn threshold_result(violations: Vec<String>) -> CmdResult {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Threshold(violations.join("; ")))
    }
}

pub fn synth(args: SynthArgs) -> CmdResult {
    if args.campaign {
        let cfg = CampaignConfig {
            seeds: (1..=args.trials).collect(),
            boundary_noise_p: args.noise,
            ..CampaignConfig::default()
        };
        let dirs = write_corpus(&args.out, &cfg, args.gray)?;
        println!("wrote {} sequences", dirs.len());
        return Ok(());
    }
    let kind: ShapeKind = args.shape.parse()?;
    let shape = ShapeSpec::centered(
        kind,
        args.length,
        args.width,
        args.start_deg,
        (args.canvas_width, args.canvas_height),
    );
    if !(args.step_deg.is_finite() && args.step_deg > 0.0) {
        return Err(
            Error::Config(format!("step_deg must be positive, got {}", args.step_deg)).into(),
        );
    }
    let schedule = linear_schedule(args.start_deg, args.end_deg, args.step_deg);
    let mut spec = SequenceSpec::new(shape, schedule, args.noise, args.seed);
    spec.salt_pepper_p = args.salt_pepper;
    write_sequence_dir(&args.out, &spec, args.gray)?;
    println!("wrote {} frames", spec.schedule.len());
    Ok(())
}

pub fn bench(args: BenchArgs) -> CmdResult {
    let Some(cfg) = config_or_print(&args.config)? else {
        return Ok(());
    };
    let params = BenchParams {
        width: args.width,
        height: args.height,
        reps: args.reps,
        warmup: args.warmup,
    };
    if params.reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()).into());
    }
    let stages = run_bench(&params, &cfg)?;
    let mut csv = String::from("stage,mean_ms,std_ms,median_ms\n");
    println!(
        "{}x{}, {} reps after {} warm-up",
        params.width, params.height, params.reps, params.warmup
    );
    println!(
        "{:<22}  {:>18}  {:>10}",
        "stage", "mean ± std (ms)", "median (ms)"
    );
    for s in &stages {
        let (mean, std) = s.mean_std();
        let median = s.median();
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            s.stage,
            mean * 1e3,
            std * 1e3,
            median * 1e3
        ));
        println!(
            "{:<22}  {:>8.3} ± {:<7.3}  {:>10.3}",
            s.stage,
            mean * 1e3,
            std * 1e3,
            median * 1e3
        );
    }
    if let Some(path) = &args.csv {
        write_file(path, csv.as_bytes())?;
    }
    let end_to_end = stages
        .iter()
        .find(|s| s.stage == END_TO_END)
        .expect("end-to-end stage");
    let median_ms = end_to_end.median() * 1e3;
    match args.budget_ms {
        Some(budget) if median_ms > budget => Err(Failure::Threshold(format!(
            "end-to-end median {median_ms:.3} ms > {budget} ms"
        ))),
        _ => Ok(()),
    }
}
