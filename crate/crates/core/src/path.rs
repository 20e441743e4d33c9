//! Path data model, resampling, the content distance and corpus files.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::KeyboardLayout;
use crate::synth::StyleParams;

/// Default number of points per model input.
pub const DEFAULT_LENGTH: usize = 64;

/// Stored coordinates must lie in `[-COORD_MARGIN, 1 + COORD_MARGIN]`.
pub const COORD_MARGIN: f64 = 0.25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Where a path came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Produced by the user-style simulator (stands in for real user traces).
    User,
    /// Clean cubic-spline synthesis.
    Synthetic,
    /// Output of the style-transfer generator.
    Gan,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::User => "user",
            Source::Synthetic => "synthetic",
            Source::Gan => "gan",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(Source::User),
            "synthetic" => Ok(Source::Synthetic),
            "gan" => Ok(Source::Gan),
            other => Err(Error::invalid(format!("unknown source {other:?}"))),
        }
    }
}

/// A word trace: points are uniformly spaced in time by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub word: String,
    pub source: Source,
    pub points: Vec<Point>,
}

impl Path {
    pub fn new(word: impl Into<String>, source: Source, points: Vec<Point>) -> Self {
        Path {
            word: word.into(),
            source,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Bitwise equality of coordinates (used for train/test disjointness).
    pub fn same_points(&self, other: &Path) -> bool {
        self.points.len() == other.points.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| {
                a.x.to_bits() == b.x.to_bits() && a.y.to_bits() == b.y.to_bits()
            })
    }
}

/// Resamples to `n` points evenly spaced by arc length along the polyline.
pub fn resample(path: &Path, n: usize) -> Result<Path> {
    if n < 2 {
        return Err(Error::invalid(format!("resample needs n >= 2, got {n}")));
    }
    if path.points.len() < 2 {
        return Err(Error::invalid("resample needs a path with at least 2 points"));
    }
    let points = resample_points(&path.points, n);
    Ok(Path::new(path.word.clone(), path.source, points))
}

pub(crate) fn resample_points(pts: &[Point], n: usize) -> Vec<Point> {
    let mut cum = Vec::with_capacity(pts.len());
    let mut total = 0.0;
    cum.push(0.0);
    for w in pts.windows(2) {
        total += w[0].dist(w[1]);
        cum.push(total);
    }
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if total == 0.0 {
        return vec![first; n];
    }
    let mut out = Vec::with_capacity(n);
    out.push(first);
    let mut seg = 0;
    for j in 1..n - 1 {
        let target = total * j as f64 / (n - 1) as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let t = if span > 0.0 { (target - cum[seg]) / span } else { 0.0 };
        out.push(pts[seg].lerp(pts[seg + 1], t.clamp(0.0, 1.0)));
    }
    out.push(last);
    out
}

/// Mean squared pointwise distance between equal-length paths.
pub fn path_distance(x: &Path, y: &Path) -> Result<f64> {
    point_distance(&x.points, &y.points)
}

pub fn point_distance(x: &[Point], y: &[Point]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    Ok(x.iter().zip(y).map(|(a, b)| a.dist_sq(*b)).sum::<f64>() / x.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStats {
    pub arc_length: f64,
    /// Mean absolute turning angle over interior points, in radians.
    pub mean_turning_angle: f64,
    /// Distance from the first point to the first letter's key center.
    pub start_key_distance: f64,
    /// Distance from the last point to the last letter's key center.
    pub end_key_distance: f64,
}

pub fn path_stats(path: &Path, layout: &KeyboardLayout) -> Result<PathStats> {
    if path.points.len() < 2 {
        return Err(Error::invalid("path_stats needs at least 2 points"));
    }
    let first = path.word.chars().next().ok_or_else(|| Error::invalid("empty word"))?;
    let last = path.word.chars().last().unwrap_or(first);
    let pts = &path.points;
    Ok(PathStats {
        arc_length: path.arc_length(),
        mean_turning_angle: mean_turning_angle(pts),
        start_key_distance: pts[0].dist(layout.key_center(first)?),
        end_key_distance: pts[pts.len() - 1].dist(layout.key_center(last)?),
    })
}

/// Mean |signed angle| between consecutive segments; 0 for fewer than 3 points.
pub fn mean_turning_angle(pts: &[Point]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let total: f64 = pts
        .windows(3)
        .map(|w| {
            let (ax, ay) = (w[1].x - w[0].x, w[1].y - w[0].y);
            let (bx, by) = (w[2].x - w[1].x, w[2].y - w[1].y);
            (ax * by - ay * bx).atan2(ax * bx + ay * by).abs()
        })
        .sum();
    total / (pts.len() - 2) as f64
}

/// Provenance recorded on the first line of a corpus file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetadata {
    pub layout: String,
    pub seed: u64,
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<StyleParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub metadata: CorpusMetadata,
    pub paths: Vec<Path>,
}

impl Corpus {
    pub fn new(metadata: CorpusMetadata, paths: Vec<Path>) -> Self {
        Corpus { metadata, paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Serializes as JSONL: metadata line, then one record per path.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.metadata)?;
        out.write_all(b"\n")?;
        for path in &self.paths {
            serde_json::to_writer(&mut out, path)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Corpus> {
        let mut lines = input.lines().enumerate();
        let metadata: CorpusMetadata = match lines.next() {
            Some((_, line)) => serde_json::from_str(&line?).map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing metadata line".into(),
                })
            }
        };
        let mut paths = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: lineno, message };
            let path: Path = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            if path.word.is_empty() {
                return Err(parse_err("empty word".into()));
            }
            if path.points.len() < 2 {
                return Err(parse_err("fewer than 2 points".into()));
            }
            let lo = -COORD_MARGIN;
            let hi = 1.0 + COORD_MARGIN;
            let ok = |v: f64| v.is_finite() && (lo..=hi).contains(&v);
            if !path.points.iter().all(|p| ok(p.x) && ok(p.y)) {
                return Err(parse_err("coordinate outside the stored range".into()));
            }
            paths.push(path);
        }
        Ok(Corpus { metadata, paths })
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<Corpus> {
        let file = std::fs::File::open(path)?;
        Corpus::read_from(std::io::BufReader::new(file))
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes()?)
    }

    pub fn stats(&self) -> CorpusStats {
        let n = self.paths.len().max(1) as f64;
        CorpusStats {
            mean_arc_length: self.paths.iter().map(Path::arc_length).sum::<f64>() / n,
            mean_turning_angle: self
                .paths
                .iter()
                .map(|p| mean_turning_angle(&p.points))
                .sum::<f64>()
                / n,
        }
    }
}

/// Style statistics averaged over a corpus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusStats {
    pub mean_arc_length: f64,
    pub mean_turning_angle: f64,
}

/// Writes `bytes` to a sibling temp file, then renames it over `dest`.
pub fn write_atomic(dest: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let dir = match dest.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = dest
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", dest.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, dest)?;
    Ok(())
}
