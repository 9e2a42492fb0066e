//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness. By default the process exits 0 once every
//! criterion has been evaluated, so a known failure is reported without
//! hiding the remaining checks; pass `--strict` to exit 1 on any FAIL.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tactslip::campaign::{run_campaign, CampaignConfig};
use tactslip::mask::component_count;
use tactslip::metrics::{dice_iou, SegScore};
use tactslip::orientation::RawMoments;
use tactslip::synth::{rasterize, ShapeKind, ShapeSpec};
use tactslip::thinning::thin_counting_passes;
use tactslip::{
    reduce_axis_deg, thin, AngleEstimate, BinaryMask, Connectivity, Estimator, OrientationParams,
    SlipTrack,
};

// tolerances
const CAMPAIGN_MEAN_DEG: f64 = 2.0;
const CAMPAIGN_FINAL_DEG: f64 = 2.0;
const CLEAN_MEAN_DEG: f64 = 0.5;
const CAMPAIGN_SECONDS: f64 = 60.0;
const TRANSLATION_DEG: f64 = 1e-9;
const EQUIVARIANCE_DEG: f64 = 1.0;
const AGREEMENT_DEG: f64 = 1.5;
const RAMP_JUMP_DEG: f64 = 4.0;
const LATENCY_MS: f64 = 5.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    reduce_axis_deg(a - b).abs()
}

fn random_spec(
    rng: &mut ChaCha8Rng,
    kinds: &[ShapeKind],
    canvas: (usize, usize),
) -> ShapeSpec<f64> {
    let kind = kinds[rng.random_range(0..kinds.len())];
    let width = rng.random_range(4.0..20.0);
    let aspect = rng.random_range(1.5..4.0);
    let angle = rng.random_range(-90.0..90.0);
    ShapeSpec::centered(kind, width * aspect, width, angle, canvas)
}

/// Capsule whose rasterized second-moment elongation is at least 2.
fn elongated_capsule(rng: &mut ChaCha8Rng, canvas: (usize, usize)) -> ShapeSpec<f64> {
    loop {
        let width = rng.random_range(12.0..32.0);
        let length = width * rng.random_range(1.0..4.0);
        let mut spec = ShapeSpec::centered(
            ShapeKind::Capsule,
            length,
            width,
            rng.random_range(-90.0..90.0),
            canvas,
        );
        spec.center.0 += rng.random_range(-0.5..0.5);
        spec.center.1 += rng.random_range(-0.5..0.5);
        let Ok(mask) = rasterize(&spec) else { continue };
        if RawMoments::from_mask(&mask).principal_axis::<f64>().1 >= 2.0 {
            return spec;
        }
    }
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let noisy = run_campaign(&CampaignConfig::default()).expect("campaign");
    let seconds = started.elapsed().as_secs_f64();
    let clean = run_campaign(&CampaignConfig {
        boundary_noise_p: 0.0,
        ..CampaignConfig::default()
    })
    .expect("clean campaign");

    let mut failures = Vec::new();
    println!(
        "  p = 0.03, skeleton estimator, {} trials in {seconds:.2} s",
        noisy.trials.len()
    );
    println!(
        "    {:<12} {:>10} {:>10} {:>10}",
        "object", "mean", "final", "clean mean"
    );
    for (g, c) in noisy.groups.iter().zip(&clean.groups) {
        println!(
            "    {:<12} {:>10.3} {:>10.3} {:>10.3}",
            g.label, g.per_frame_mean_deg, g.final_mean_deg, c.per_frame_mean_deg
        );
        if g.per_frame_mean_deg > CAMPAIGN_MEAN_DEG || g.final_mean_deg > CAMPAIGN_FINAL_DEG {
            failures.push(format!("{} noisy", g.label));
        }
        if c.per_frame_mean_deg > CLEAN_MEAN_DEG {
            failures.push(format!("{} clean", g.label));
        }
    }
    for est in [Estimator::Pca, Estimator::Ellipse] {
        let report =
            run_campaign(&CampaignConfig::default().with_estimator(est)).expect("campaign");
        let worst = report
            .groups
            .iter()
            .map(|g| g.per_frame_mean_deg)
            .fold(0.0, f64::max);
        println!(
            "  for comparison, {est} estimator at p = 0.03: overall mean {:.3} deg, worst object {worst:.3} deg",
            report.overall.per_frame_mean_deg
        );
    }
    let fast = seconds <= CAMPAIGN_SECONDS;
    if !fast {
        failures.push(format!("runtime {seconds:.1} s"));
    }
    let detail = format!(
        "overall mean {:.3} deg, final {:.3} deg, clean mean {:.3} deg, {seconds:.2} s{}",
        noisy.overall.per_frame_mean_deg,
        noisy.overall.final_mean_deg,
        clean.overall.per_frame_mean_deg,
        if failures.is_empty() {
            String::new()
        } else {
            format!("; over tolerance: {}", failures.join(", "))
        }
    );
    outcome(failures.is_empty(), detail)
}

fn brute_force(a: &BinaryMask, b: &BinaryMask) -> (Ratio<u64>, Ratio<u64>) {
    let (mut inter, mut union, mut na, mut nb) = (0u64, 0u64, 0u64, 0u64);
    for r in 0..a.height() {
        for c in 0..a.width() {
            let (x, y) = (a.get(r, c), b.get(r, c));
            inter += u64::from(x && y);
            union += u64::from(x || y);
            na += u64::from(x);
            nb += u64::from(y);
        }
    }
    if union == 0 {
        return (Ratio::from_integer(1), Ratio::from_integer(1));
    }
    (Ratio::new(2 * inter, na + nb), Ratio::new(inter, union))
}

fn criterion_2() -> Outcome {
    let exact =
        |a: &BinaryMask, b: &BinaryMask| -> SegScore<Ratio<u64>> { dice_iou(a, b).unwrap() };
    let block = BinaryMask::from_ascii(&["##..", "##..", "....", "...."]).unwrap();
    let other = BinaryMask::from_ascii(&["....", "....", "..##", "..##"]).unwrap();
    let a = BinaryMask::from_ascii(&["##."]).unwrap();
    let b = BinaryMask::from_ascii(&[".##"]).unwrap();
    let one = Ratio::from_integer(1);
    let zero = Ratio::from_integer(0);
    let mut trivial = 0;
    let mut ok = true;
    for (x, y, dice, iou) in [
        (&block, &block, one, one),
        (&block, &other, zero, zero),
        (&a, &b, Ratio::new(1, 2), Ratio::new(1, 3)),
    ] {
        let s = exact(x, y);
        ok &= s.dice == dice && s.iou == iou;
        let f: SegScore<f64> = dice_iou(x, y).unwrap();
        ok &= f.dice == *dice.numer() as f64 / *dice.denom() as f64;
        ok &= f.iou == *iou.numer() as f64 / *iou.denom() as f64;
        trivial += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut matched, mut identity) = (0, 0);
    let pairs = 1000;
    for _ in 0..pairs {
        let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
        let (pa, pb) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let x =
            BinaryMask::from_vec(w, h, (0..w * h).map(|_| rng.random_bool(pa)).collect()).unwrap();
        let y =
            BinaryMask::from_vec(w, h, (0..w * h).map(|_| rng.random_bool(pb)).collect()).unwrap();
        let s = exact(&x, &y);
        if (s.dice, s.iou) == brute_force(&x, &y) {
            matched += 1;
        }
        if s.dice == s.iou * 2 / (s.iou + 1) {
            identity += 1;
        }
    }
    let pass = ok && matched == pairs && identity == pairs;
    outcome(
        pass,
        format!(
            "{trivial} analytic cases {}, {matched}/{pairs} pairs match brute force, identity on {identity}/{pairs}",
            if ok { "exact" } else { "WRONG" }
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kinds = [ShapeKind::Capsule, ShapeKind::Rectangle, ShapeKind::Ellipse];
    let (mut subset, mut fixed, mut components, mut capped, mut max_passes) = (0, 0, 0, 0, 0);
    let shapes = 200;
    for _ in 0..shapes {
        let spec = random_spec(&mut rng, &kinds, (128, 128));
        let mask = rasterize(&spec).unwrap();
        match thin_counting_passes(&mask) {
            Ok((skeleton, passes)) => {
                max_passes = max_passes.max(passes);
                let sk = skeleton.to_mask();
                subset += usize::from(!sk.is_subset_of(&mask));
                fixed += usize::from(thin(&sk).unwrap().to_mask() != sk);
                components += usize::from(
                    component_count(&sk, Connectivity::Eight)
                        != component_count(&mask, Connectivity::Eight),
                );
            }
            Err(_) => capped += 1,
        }
    }
    outcome(
        subset + fixed + components + capped == 0,
        format!(
            "{shapes} shapes (aspect 1.5-4, width 4-20 px): violations subset {subset}, idempotence {fixed}, \
             8-cc count {components}; cap hit {capped}, most passes {max_passes}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let params = OrientationParams::<f64>::default();
    let estimate = |est: Estimator, m: &BinaryMask| -> AngleEstimate<f64> {
        est.estimate(m, &params).unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let canvas = (160, 160);

    let mut translation_worst = 0.0f64;
    for _ in 0..100 {
        let mask = rasterize(&elongated_capsule(&mut rng, canvas)).unwrap();
        let shifted = loop {
            let (dr, dc) = (rng.random_range(-15i64..=15), rng.random_range(-15i64..=15));
            let shifted = mask.shifted(dr as isize, dc as isize);
            if shifted.count() == mask.count() {
                break shifted;
            }
        };
        for est in Estimator::ALL {
            translation_worst = translation_worst.max(angle_gap(
                estimate(est, &mask).angle_deg,
                estimate(est, &shifted).angle_deg,
            ));
        }
    }

    let mut equivariance_worst = [0.0f64; 3];
    let mut agreement_worst = 0.0f64;
    let mut invalid_capsules = [0usize; 3];
    for _ in 0..100 {
        let spec = elongated_capsule(&mut rng, canvas);
        let delta = rng.random_range(-60.0..=60.0);
        let base = rasterize(&spec).unwrap();
        let turned = rasterize(&spec.at_angle(spec.angle_deg + delta)).unwrap();
        let angles: Vec<f64> = Estimator::ALL
            .iter()
            .map(|&e| estimate(e, &base).angle_deg)
            .collect();
        for (k, est) in Estimator::ALL.into_iter().enumerate() {
            let (a, b) = (estimate(est, &base), estimate(est, &turned));
            invalid_capsules[k] += usize::from(!a.valid || !b.valid);
            equivariance_worst[k] =
                equivariance_worst[k].max(angle_gap(b.angle_deg - a.angle_deg, delta));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                agreement_worst = agreement_worst.max(angle_gap(angles[i], angles[j]));
            }
        }
    }

    let (mut round, mut round_valid) = (0, 0);
    for _ in 0..100 {
        let side = rng.random_range(3.0..60.0);
        for kind in [ShapeKind::Disc, ShapeKind::Rectangle] {
            let mut spec =
                ShapeSpec::centered(kind, side, side, rng.random_range(-90.0..90.0), (96, 96));
            spec.center.0 += rng.random_range(-0.5..0.5);
            spec.center.1 += rng.random_range(-0.5..0.5);
            let mask = rasterize(&spec).unwrap();
            for est in Estimator::ALL {
                round += 1;
                round_valid += usize::from(estimate(est, &mask).valid);
            }
        }
    }

    let pass = translation_worst <= TRANSLATION_DEG
        && equivariance_worst.iter().all(|&e| e <= EQUIVARIANCE_DEG)
        && agreement_worst <= AGREEMENT_DEG
        && invalid_capsules == [0; 3]
        && round_valid == 0;
    outcome(
        pass,
        format!(
            "translation worst {translation_worst:.1e} deg; equivariance worst skeleton {:.3} / pca {:.3} / \
             ellipse {:.3} deg; agreement worst {agreement_worst:.3} deg; invalid capsule pairs {:?}; \
             discs and squares valid {round_valid}/{round}",
            equivariance_worst[0], equivariance_worst[1], equivariance_worst[2], invalid_capsules
        ),
    )
}

fn slips(reference: f64, angles: &[Option<f64>]) -> Vec<(f64, bool)> {
    let mut track = SlipTrack::start(&AngleEstimate::valid(reference, 3.0), 0).unwrap();
    for (k, a) in angles.iter().enumerate() {
        let est = match a {
            Some(a) => AngleEstimate::valid(*a, 3.0),
            None => AngleEstimate::invalid(1.0),
        };
        track.update(&est, k as u64 + 1).unwrap();
    }
    track
        .samples()
        .iter()
        .map(|s| (s.slip_deg, s.valid))
        .collect()
}

/// Slip chosen among every `k * 180` representative by smallest step.
fn brute_force_slips(reference: f64, angles: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    let mut out = vec![0.0];
    for &a in angles {
        let best = (-4..=4)
            .map(|k| a - reference + 180.0 * f64::from(k))
            .min_by(|x, y| (x - prev).abs().total_cmp(&(y - prev).abs()))
            .unwrap();
        out.push(best);
        prev = best;
    }
    out
}

fn criterion_5() -> Outcome {
    let close = |got: &[(f64, bool)], want: &[f64]| {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g.0 - w).abs() < 1e-9)
    };
    let mut hand = 0;
    let mut hand_ok = 0;
    for (reference, angles, want) in [
        (10.0, vec![Some(12.0)], vec![0.0, 2.0]),
        (85.0, vec![Some(-88.0)], vec![0.0, 7.0]),
        (
            0.0,
            vec![Some(30.0), Some(60.0), Some(89.0), Some(-89.0)],
            vec![0.0, 30.0, 60.0, 89.0, 91.0],
        ),
        (0.0, vec![Some(15.0), None], vec![0.0, 15.0, 15.0]),
        (-89.5, vec![], vec![0.0]),
        (-89.5, vec![Some(-89.5)], vec![0.0, 0.0]),
    ] {
        hand += 1;
        let got = slips(reference, &angles);
        let holds = angles
            .last()
            .is_none_or(|a| a.is_some() || !got.last().unwrap().1);
        hand_ok += usize::from(close(&got, &want) && holds);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut oracle_ok = 0;
    let sequences = 200;
    for _ in 0..sequences {
        let reference = rng.random_range(-89.9..=90.0);
        let mut truth = 0.0;
        let angles: Vec<f64> = (0..30)
            .map(|_| {
                truth += rng.random_range(-60.0..60.0);
                reduce_axis_deg(reference + truth)
            })
            .collect();
        let got = slips(
            reference,
            &angles.iter().map(|&a| Some(a)).collect::<Vec<_>>(),
        );
        let want = brute_force_slips(reference, &angles);
        oracle_ok += usize::from(got.iter().zip(&want).all(|(g, w)| (g.0 - w).abs() < 1e-9));
    }

    let ramp: Vec<f64> = (0..=60).map(|k| 2.0 * f64::from(k)).collect();
    let raw: Vec<Option<f64>> = ramp[1..]
        .iter()
        .map(|&a| Some(reduce_axis_deg(a)))
        .collect();
    let tracked = slips(0.0, &raw);
    let max_jump = tracked
        .windows(2)
        .map(|w| (w[1].0 - w[0].0).abs())
        .fold(0.0, f64::max);
    let ramp_final = tracked.last().unwrap().0;

    // the same ramp rendered and estimated end to end
    let spec = ShapeSpec::centered(ShapeKind::Capsule, 80.0, 20.0, 0.0, (160, 160));
    let params = OrientationParams::<f64>::default();
    let mut track: Option<SlipTrack<f64>> = None;
    for (k, &a) in ramp.iter().enumerate() {
        let est = Estimator::Skeleton
            .estimate(&rasterize(&spec.at_angle(a)).unwrap(), &params)
            .unwrap();
        match &mut track {
            None => track = Some(SlipTrack::start(&est, 0).unwrap()),
            Some(t) => {
                t.update(&est, k as u64).unwrap();
            }
        }
    }
    let rendered: Vec<f64> = track
        .unwrap()
        .samples()
        .iter()
        .map(|s| s.slip_deg)
        .collect();
    let rendered_jump = rendered
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);

    let pass = hand_ok == hand
        && oracle_ok == sequences
        && max_jump <= RAMP_JUMP_DEG
        && (ramp_final - 120.0).abs() < 1e-9
        && rendered_jump <= RAMP_JUMP_DEG;
    outcome(
        pass,
        format!(
            "{hand_ok}/{hand} hand sequences, {oracle_ok}/{sequences} match the brute-force unwrapper; \
             0-120 deg ramp: largest step {max_jump:.3} deg (rendered capsule {rendered_jump:.3} deg), \
             final {ramp_final:.3} deg"
        ),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tactslip"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("run tactslip");
    assert!(
        out.status.success(),
        "{:?}: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn criterion_6(tmp: &Path) -> Outcome {
    let csv = tmp.join("bench.csv");
    let table = run_ok(
        bin()
            .args([
                "bench", "--width", "320", "--height", "240", "--reps", "100", "--warmup", "10",
                "--csv",
            ])
            .arg(&csv),
    );
    print!(
        "{}",
        table
            .lines()
            .map(|l| format!("  {l}\n"))
            .collect::<String>()
    );
    let text = fs::read_to_string(&csv).unwrap();
    let median_ms: f64 = text
        .lines()
        .find(|l| l.starts_with("end_to_end,"))
        .and_then(|l| l.rsplit(',').next())
        .and_then(|v| v.parse().ok())
        .expect("end_to_end row");
    outcome(
        median_ms <= LATENCY_MS,
        format!("end-to-end median {median_ms:.3} ms on 320x240 (100 reps)"),
    )
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn criterion_7(tmp: &Path) -> Outcome {
    let run = |tag: &str| {
        let root = tmp.join(tag);
        let corpus = root.join("corpus");
        run_ok(
            bin()
                .args([
                    "synth",
                    "--campaign",
                    "--trials",
                    "2",
                    "--noise",
                    "0.03",
                    "--gray",
                    "60",
                    "-o",
                ])
                .arg(&corpus),
        );
        run_ok(
            bin()
                .args(["track", "--reference", "reference.pgm", "--batch"])
                .arg(&corpus)
                .arg("--out-root")
                .arg(root.join("tracks")),
        );
        let seq = corpus.join("ellipse-b/seed-2");
        run_ok(
            bin()
                .arg("segment")
                .arg(seq.join("00007.pgm"))
                .arg("--reference")
                .arg(seq.join("reference.pgm"))
                .arg("-o")
                .arg(root.join("segmented.pgm")),
        );
        run_ok(
            bin()
                .arg("eval-slip")
                .arg("--pred")
                .arg(root.join("tracks"))
                .arg("--truth")
                .arg(&corpus)
                .arg("--csv")
                .arg(root.join("slip.csv")),
        );
        tree(&root)
    };
    let first = run("first");
    let second = run("second");
    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.display().to_string())
        .collect();
    let same_files =
        first.len() == second.len() && first.iter().zip(&second).all(|(a, b)| a.0 == b.0);
    let csvs = first
        .iter()
        .filter(|(p, _)| p.extension().is_some_and(|e| e == "csv"))
        .count();
    let masks = first
        .iter()
        .filter(|(p, _)| p.extension().is_some_and(|e| e == "pgm"))
        .count();
    outcome(
        same_files && differing.is_empty(),
        format!(
            "{} files ({csvs} csv, {masks} pgm) compared across two runs, {} differ",
            first.len(),
            differing.len()
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let strict = std::env::args().any(|a| a == "--strict");
    let tmp = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Check)> = vec![
        ("1 synthetic slip campaign", Box::new(criterion_1)),
        ("2 metric exactness", Box::new(criterion_2)),
        ("3 thinning properties", Box::new(criterion_3)),
        ("4 orientation properties", Box::new(criterion_4)),
        ("5 tracker unwrapping", Box::new(criterion_5)),
        ("6 latency budget", Box::new(|| criterion_6(tmp.path()))),
        ("7 determinism", Box::new(|| criterion_7(tmp.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        println!("criterion {name}");
        let result = check();
        println!(
            "{} criterion {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
        failed += usize::from(!result.pass);
    }
    println!(
        "{}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
