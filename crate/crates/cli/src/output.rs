use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(Self(path.to_path_buf()))
    }

    fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.file(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    /// Column-major data written row by row under `header`.
    pub fn write_columns(&self, name: &str, header: &[String], columns: &[&[f64]]) -> Result<()> {
        let path = self.file(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(header)?;
        let rows = columns.first().map_or(0, |c| c.len());
        for r in 0..rows {
            w.write_record(columns.iter().map(|c| c[r].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

pub fn numbered(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// Wraps a report with the schema version and command name.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, body: T) -> Self {
        Self {
            schema: SCHEMA,
            command,
            body,
        }
    }
}

/// Static scatter of the first two coordinates; a third, if present, sets the color.
pub fn scatter_svg(coords: &[Vec<f64>], title: &str) -> String {
    const SIZE: f64 = 480.0;
    const PAD: f64 = 36.0;
    let coord = |row: &Vec<f64>, c: usize| row.get(c).copied().unwrap_or(0.0);
    let range = |c: usize| {
        let (lo, hi) = coords
            .iter()
            .map(|r| coord(r, c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if coords.is_empty() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = range(0);
    let (y0, y1) = range(1);
    let (c0, c1) = range(2);
    let colored = coords.first().is_some_and(|r| r.len() > 2);
    let span = SIZE - 2.0 * PAD;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{PAD}" y="{PAD}" width="{span}" height="{span}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    for row in coords {
        let x = PAD + (coord(row, 0) - x0) / (x1 - x0) * span;
        let y = SIZE - PAD - (coord(row, 1) - y0) / (y1 - y0) * span;
        let fill = if colored {
            ramp((coord(row, 2) - c0) / (c1 - c0))
        } else {
            "#1f5fa8".to_string()
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{fill}" fill-opacity="0.8"/>"#
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Blue to red.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * t) as u8;
    let b = (220.0 - 180.0 * t) as u8;
    format!("#{r:02x}50{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_circle_per_point() {
        let svg = scatter_svg(
            &[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 0.0], vec![0.5, 0.5, 1.0]],
            "a < b",
        );
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a &lt; b"));
        let flat = scatter_svg(&[vec![1.0], vec![1.0]], "flat");
        assert!(!flat.contains("NaN"));
    }
}
