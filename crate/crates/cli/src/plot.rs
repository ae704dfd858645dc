use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use roa_core::geometry::{Point, Polyunion};
use roa_core::lyapunov::level_set_polylines;
use roa_core::refine::{IterationState, RunRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    Single(usize),
    All,
    Progression,
}

#[derive(Clone, Debug)]
pub struct PlotSpec {
    pub selector: Selector,
    pub out_dir: PathBuf,
    pub size: u32,
}

const LEVEL: &str = "#1f4fd1";
const UNCERTIFIED: &str = "#d62728";
const PREVIOUS: &str = "#2ca02c";
const ATTRACTED: &str = "#ff7f0e";
const INITIAL_A: &str = "#f2d024";

/// Maps state coordinates to pixels, with `y` pointing up.
struct Frame {
    lo: [f64; 2],
    scale: f64,
    size: f64,
}

impl Frame {
    fn new(region: &Polyunion<f64>, size: u32) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in region.vertices() {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]) * 1.1;
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        Frame {
            lo: [mid[0] - span / 2.0, mid[1] - span / 2.0],
            scale: size as f64 / span,
            size: size as f64,
        }
    }

    fn map(&self, p: &Point<f64>) -> (f64, f64) {
        ((p[0] - self.lo[0]) * self.scale, self.size - (p[1] - self.lo[1]) * self.scale)
    }

    fn points(&self, pts: &[Point<f64>]) -> String {
        let mut s = String::new();
        for p in pts {
            let (x, y) = self.map(p);
            let _ = write!(s, "{x:.2},{y:.2} ");
        }
        s.trim_end().to_string()
    }
}

struct Svg {
    body: String,
    size: u32,
}

impl Svg {
    fn new(size: u32) -> Self {
        let mut body = String::new();
        let _ = writeln!(body, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
        Svg { body, size }
    }

    fn region(&mut self, frame: &Frame, shape: &Polyunion<f64>, style: &str) {
        for part in shape.parts() {
            let _ = writeln!(self.body, r#"<polygon points="{}" {style}/>"#, frame.points(part.vertices()));
        }
    }

    fn polyline(&mut self, frame: &Frame, pts: &[Point<f64>], style: &str) {
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" {style}/>"#, frame.points(pts));
    }

    fn text(&mut self, x: f64, y: f64, text: &str) {
        let _ = writeln!(self.body, r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="14">{text}</text>"#);
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n{}</svg>\n",
            self.body,
            s = self.size
        )
    }
}

/// Accepted iterations of the record, in order.
fn accepted(record: &RunRecord) -> anyhow::Result<Vec<&IterationState>> {
    let mut out = Vec::new();
    for l in &record.certified_level_sets {
        let Some(s) = record.states.iter().find(|s| s.k == l.k && s.is_solved()) else {
            bail!("level set {} refers to a missing state", l.k);
        };
        if s.x.dim() != 2 {
            bail!("plotting is restricted to planar systems");
        }
        out.push(s);
    }
    if out.is_empty() {
        bail!("record has no accepted iteration to plot");
    }
    Ok(out)
}

/// Writes the requested files and returns their paths.
pub fn plot(record: &RunRecord, spec: &PlotSpec) -> anyhow::Result<Vec<PathBuf>> {
    let states = accepted(record)?;
    std::fs::create_dir_all(&spec.out_dir).with_context(|| format!("creating {}", spec.out_dir.display()))?;
    let a0 = &record.states[0].a;
    let frame = Frame::new(&record.states[0].x, spec.size);
    let mut files = Vec::new();
    let chosen: Vec<usize> = match spec.selector {
        Selector::All => (0..states.len()).collect(),
        Selector::Progression => Vec::new(),
        Selector::Single(k) => match states.iter().position(|s| s.k == k) {
            Some(i) => vec![i],
            None => bail!("iteration {k} is not in the record (0..{})", states.len()),
        },
    };
    for i in chosen {
        let s = states[i];
        let previous = if i > 0 { states[i - 1].c.as_ref() } else { None };
        let lines = level_lines(s);
        let svg = iteration_svg(s, previous, a0, &lines, &frame, spec.size);
        files.push(write(&spec.out_dir, &format!("iteration_{}.svg", s.k), &svg)?);
        let path = spec.out_dir.join(format!("level_set_{}.csv", s.k));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["x", "y", "level", "path"])?;
        let alpha = s.alpha_k.unwrap_or(f64::NAN);
        for (j, line) in lines.iter().enumerate() {
            for p in line {
                w.write_record([p[0].to_string(), p[1].to_string(), alpha.to_string(), j.to_string()])?;
            }
        }
        w.flush()?;
        files.push(path);
    }
    if !matches!(spec.selector, Selector::Single(_)) {
        let all: Vec<(usize, Vec<Vec<Point<f64>>>)> = states.iter().map(|s| (s.k, level_lines(s))).collect();
        files.push(write(&spec.out_dir, "progression.svg", &progression_svg(&all, a0, &frame, spec.size))?);
        let path = spec.out_dir.join("level_sets.csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["x", "y", "k", "path"])?;
        for (k, lines) in &all {
            for (j, line) in lines.iter().enumerate() {
                for p in line {
                    w.write_record([p[0].to_string(), p[1].to_string(), k.to_string(), j.to_string()])?;
                }
            }
        }
        w.flush()?;
        files.push(path);
    }
    Ok(files)
}

fn level_lines(s: &IterationState) -> Vec<Vec<Point<f64>>> {
    match (&s.v, s.alpha_k) {
        (Some(v), Some(alpha)) => level_set_polylines(v, alpha),
        _ => Vec::new(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn iteration_svg(
    s: &IterationState,
    previous: Option<&Polyunion<f64>>,
    a0: &Polyunion<f64>,
    lines: &[Vec<Point<f64>>],
    frame: &Frame,
    size: u32,
) -> String {
    let mut svg = Svg::new(size);
    if let Some(v) = &s.v {
        let tess = v.tess();
        for c in 0..tess.num_cells() {
            let pts: Vec<Point<f64>> = tess.cell_points(c).into_iter().cloned().collect();
            let fill = if v.is_certified(c) { "none" } else { "#f4b6b6" };
            let _ = writeln!(
                svg.body,
                r##"<polygon points="{}" fill="{fill}" stroke="#cccccc" stroke-width="0.4"/>"##,
                frame.points(&pts)
            );
        }
    }
    svg.region(frame, a0, &format!(r#"fill="{INITIAL_A}" fill-opacity="0.35" stroke="none""#));
    svg.region(frame, &s.a, &format!(r#"fill="none" stroke="{ATTRACTED}" stroke-width="2""#));
    if let Some(c) = previous {
        svg.region(frame, c, &format!(r#"fill="none" stroke="{PREVIOUS}" stroke-width="2""#));
    }
    if let Some(c) = &s.c {
        if c != &s.a {
            svg.region(frame, c, &format!(r#"fill="{UNCERTIFIED}" fill-opacity="0.25" stroke="{UNCERTIFIED}" stroke-width="2""#));
        }
    }
    svg.region(frame, &s.x, r#"fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="8 5""#);
    for line in lines {
        svg.polyline(frame, line, &format!(r#"stroke="{LEVEL}" stroke-width="2""#));
    }
    let alpha = s.alpha_k.map(|a| format!("{a:.3}")).unwrap_or_else(|| "none".into());
    let beta = s.beta_k.map(|b| format!(", beta = {b:.3}")).unwrap_or_default();
    svg.text(10.0, 20.0, &format!("k = {}, alpha = {alpha}{beta}", s.k));
    svg.finish()
}

/// Level-set boundaries of every iteration, from green (first) to blue (last).
fn progression_svg(all: &[(usize, Vec<Vec<Point<f64>>>)], a0: &Polyunion<f64>, frame: &Frame, size: u32) -> String {
    let mut svg = Svg::new(size);
    svg.region(frame, a0, &format!(r#"fill="{INITIAL_A}" fill-opacity="0.35" stroke="none""#));
    let n = all.len().max(2) - 1;
    for (i, (_, lines)) in all.iter().enumerate() {
        let t = i as f64 / n as f64;
        let color = format!(
            "rgb({},{},{})",
            (44.0 + t * (31.0 - 44.0)) as u8,
            (160.0 + t * (79.0 - 160.0)) as u8,
            (44.0 + t * (209.0 - 44.0)) as u8
        );
        for line in lines {
            svg.polyline(frame, line, &format!(r#"stroke="{color}" stroke-width="2""#));
        }
    }
    svg.text(10.0, 20.0, &format!("{} level sets", all.len()));
    svg.finish()
}
