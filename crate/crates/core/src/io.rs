//! File formats: binary PGM (P5) frames and masks, a length-prefixed PGM
//! stream, track and ground-truth CSVs, and flat `key = value` manifests.
//!
//! PGM: `P5`, width, height and maxval (1..=255) separated by whitespace, with
//! `#` comments allowed in the header, one whitespace byte, then `width *
//! height` bytes in row-major order. Samples are rescaled to 0..=255 on load;
//! masks treat values >= 128 as foreground and are written as 0/255.
//!
//! Stream: each frame is a little-endian `u32` byte count followed by that many
//! bytes of PGM.
//!
//! Track CSV: header `frame,raw_angle_deg,slip_deg,elongation,valid`, numbers
//! with three decimals, `valid` as `true`/`false`. Truth CSV: header
//! `frame,angle_deg`, angles with three decimals.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, GrayFrame};
use crate::tracker::SlipSample;

pub const TRACK_HEADER: [&str; 5] = ["frame", "raw_angle_deg", "slip_deg", "elongation", "valid"];
pub const TRUTH_HEADER: [&str; 2] = ["frame", "angle_deg"];

const STDIN: &str = "<stdin>";

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayFrame> {
    let bad = |msg: &str| Error::format(path, msg);
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated or malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| bad("header value out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if !(1..=255).contains(&maxval) {
        return Err(bad("maxval must be between 1 and 255"));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| bad("image too large"))?;
    let raster = bytes.get(pos..pos + n).ok_or_else(|| {
        Error::format(
            path,
            format!("expected {n} pixel bytes, got {}", bytes.len() - pos),
        )
    })?;
    let data = if maxval == 255 {
        raster.to_vec()
    } else {
        raster
            .iter()
            .map(|&v| {
                let v = usize::from(v).min(maxval);
                ((v * 255 + maxval / 2) / maxval) as u8
            })
            .collect()
    };
    GrayFrame::from_vec(width, height, data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn encode_pgm(frame: &GrayFrame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.data());
    out
}

pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    fs::write(path, encode_pgm(frame)).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    Ok(read_pgm(path)?.to_mask())
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_pgm(path, &GrayFrame::from_mask(mask))
}

/// Frames from a length-prefixed PGM stream. Ends cleanly only at a frame
/// boundary.
pub struct PgmStream<R> {
    reader: R,
    done: bool,
}

impl<R: Read> PgmStream<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            done: false,
        }
    }

    fn next_frame(&mut self) -> Result<Option<GrayFrame>> {
        let stdin = Path::new(STDIN);
        let mut prefix = [0u8; 4];
        let mut filled = 0;
        while filled < 4 {
            match self.reader.read(&mut prefix[filled..]) {
                Ok(0) if filled == 0 => return Ok(None),
                Ok(0) => return Err(Error::format(stdin, "stream ended inside a length prefix")),
                Ok(k) => filled += k,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::io(stdin, e)),
            }
        }
        let len = u32::from_le_bytes(prefix) as usize;
        let mut bytes = vec![0u8; len];
        self.reader
            .read_exact(&mut bytes)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    Error::format(stdin, format!("stream ended inside a {len}-byte frame"))
                }
                _ => Error::io(stdin, e),
            })?;
        decode_pgm(&bytes, stdin).map(Some)
    }
}

impl<R: Read> Iterator for PgmStream<R> {
    type Item = Result<GrayFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.next_frame().transpose();
        self.done = !matches!(item, Some(Ok(_)));
        item
    }
}

/// Appends one frame to a length-prefixed stream.
pub fn write_stream_frame<W: Write>(out: &mut W, frame: &GrayFrame) -> std::io::Result<()> {
    let bytes = encode_pgm(frame);
    let len =
        u32::try_from(bytes.len()).map_err(|_| std::io::Error::other("frame larger than 4 GiB"))?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(&bytes)
}

/// Three decimals, never `-0.000`.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Writes track rows. Row output is flushed per call, so a stream consumer
/// sees every row as soon as its frame is processed.
pub struct TrackWriter<W: Write> {
    csv: csv::Writer<W>,
}

impl<W: Write> TrackWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(TRACK_HEADER)?;
        csv.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(Self { csv })
    }

    pub fn write(&mut self, s: &SlipSample<f64>) -> Result<()> {
        self.csv.write_record([
            s.frame_index.to_string(),
            fmt3(s.raw_angle_deg),
            fmt3(s.slip_deg),
            fmt3(s.elongation),
            s.valid.to_string(),
        ])?;
        self.csv.flush().map_err(|e| Error::io("<output>", e))
    }
}

pub fn track_csv(samples: &[SlipSample<f64>]) -> Result<Vec<u8>> {
    let mut w = TrackWriter::new(Vec::new())?;
    for s in samples {
        w.write(s)?;
    }
    w.csv
        .into_inner()
        .map_err(|e| Error::io("<output>", e.into_error()))
}

fn open_csv(path: &Path, header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let found = reader.headers()?.clone();
    if !found.iter().eq(header.iter().copied()) {
        return Err(Error::format(
            path,
            format!(
                "expected header '{}', got '{}'",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(reader)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    record
        .get(i)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::format(path, format!("line {line}: bad {name}")))
}

fn check_increasing(path: &Path, frames: impl Iterator<Item = u64>) -> Result<()> {
    let mut last = None;
    for f in frames {
        if last.is_some_and(|l| f <= l) {
            return Err(Error::format(
                path,
                format!("frame {f} is not after frame {}", last.unwrap()),
            ));
        }
        last = Some(f);
    }
    Ok(())
}

pub fn read_track(path: &Path) -> Result<Vec<SlipSample<f64>>> {
    let mut samples = Vec::new();
    for record in open_csv(path, &TRACK_HEADER)?.records() {
        let r = record?;
        samples.push(SlipSample {
            frame_index: field(path, &r, 0, "frame")?,
            raw_angle_deg: field(path, &r, 1, "raw_angle_deg")?,
            slip_deg: field(path, &r, 2, "slip_deg")?,
            elongation: field(path, &r, 3, "elongation")?,
            valid: field(path, &r, 4, "valid")?,
        });
    }
    check_increasing(path, samples.iter().map(|s| s.frame_index))?;
    Ok(samples)
}

pub fn write_truth(path: &Path, truth: &[(u64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRUTH_HEADER)?;
    for &(frame, angle) in truth {
        w.write_record([frame.to_string(), fmt3(angle)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<Vec<(u64, f64)>> {
    let mut truth = Vec::new();
    for record in open_csv(path, &TRUTH_HEADER)?.records() {
        let r = record?;
        truth.push((
            field(path, &r, 0, "frame")?,
            field(path, &r, 1, "angle_deg")?,
        ));
    }
    check_increasing(path, truth.iter().map(|t| t.0))?;
    Ok(truth)
}

pub fn manifest_text(entries: &[(String, String)]) -> String {
    entries
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

pub fn write_manifest(path: &Path, entries: &[(String, String)]) -> Result<()> {
    fs::write(path, manifest_text(entries)).map_err(|e| Error::io(path, e))
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped and
/// repeated keys are rejected.
pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::format(path, format!("line {}: expected 'key = value'", i + 1))
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::format(path, format!("line {}: empty key", i + 1)));
        }
        if entries.iter().any(|(seen, _)| seen == k) {
            return Err(Error::format(
                path,
                format!("line {}: duplicate key '{k}'", i + 1),
            ));
        }
        entries.push((k.to_string(), v.to_string()));
    }
    Ok(entries)
}

pub fn read_manifest(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path)
}

/// `.pgm` files in `dir` whose stem is a decimal frame number, in numeric
/// order. Other files are ignored.
pub fn list_frames(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("pgm") {
            continue;
        }
        let Some(index) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<u64>().ok())
        else {
            continue;
        };
        frames.push((index, path));
    }
    frames.sort();
    if let Some(w) = frames.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::format(
            dir,
            format!("frame number {} appears twice", w[0].0),
        ));
    }
    Ok(frames)
}

/// Frame file name for index `k`.
pub fn frame_name(k: u64) -> String {
    format!("{k:05}.pgm")
}

/// Relative paths of every file named `name` below `root`, sorted.
pub fn find_named(root: &Path, name: &str) -> Result<Vec<PathBuf>> {
    fn walk(root: &Path, dir: &Path, name: &str, out: &mut Vec<PathBuf>) -> Result<()> {
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path = entry.path();
            let kind = entry.file_type().map_err(|e| Error::io(&path, e))?;
            if kind.is_dir() {
                walk(root, &path, name, out)?;
            } else if entry.file_name() == name {
                out.push(path.strip_prefix(root).expect("below root").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, name, &mut out)?;
    out.sort();
    Ok(out)
}
