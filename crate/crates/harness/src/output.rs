//! Result files. Each carries the version, the resolved config, its
//! SHA-256 and the seed; nothing time- or host-dependent is written, so
//! reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub config: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_toml: &str, seed: u64) -> Provenance {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config_toml.to_string(),
            config_hash: hex::encode(Sha256::digest(config_toml.as_bytes())),
            seed,
        }
    }

    /// Header lines, each prefixed with `prefix`.
    fn lines(&self, prefix: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{prefix}fibertherm {}", self.version);
        let _ = writeln!(s, "{prefix}config_sha256: {}", self.config_hash);
        let _ = writeln!(s, "{prefix}seed: {}", self.seed);
        let _ = writeln!(s, "{prefix}config:");
        for line in self.config.lines() {
            let _ = writeln!(s, "{prefix}  {line}");
        }
        s
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": self.version,
            "config_sha256": self.config_hash,
            "seed": self.seed,
            "config": self.config,
        })
    }
}

/// Writes result files into one directory and remembers their paths.
pub struct OutputDir {
    root: PathBuf,
    provenance: Provenance,
    pub written: Vec<PathBuf>,
}

/// Shortest round-trip formatting, stable across runs.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl OutputDir {
    pub fn create(root: &Path, provenance: Provenance) -> io::Result<OutputDir> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            provenance,
            written: Vec::new(),
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn put(&mut self, name: &str, body: &str) -> io::Result<()> {
        let path = self.root.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    /// CSV with a `#` provenance header.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut s = self.provenance.lines("# ");
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.put(name, &s)
    }

    /// JSON object with a `provenance` member added.
    pub fn json(&mut self, name: &str, mut value: serde_json::Value) -> io::Result<()> {
        if let Some(obj) = value.as_object_mut() {
            obj.insert("provenance".into(), self.provenance.json());
        }
        let mut s = serde_json::to_string_pretty(&value).expect("json serializes");
        s.push('\n');
        self.put(name, &s)
    }

    pub fn svg(&mut self, name: &str, chart: &Chart) -> io::Result<()> {
        let body = chart.render(&self.provenance.lines(""));
        self.put(name, &body)
    }
}

/// A line chart of one or more named series.
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

impl Chart {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        (x0, x1, y0, y1)
    }

    pub fn render(&self, comment: &str) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(s, "<!--\n{}-->", escape(comment));
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        );
        // Axes with min/max tick labels.
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, "<path d=\"M{l} {t} L{l} {b} L{r} {b}\" stroke=\"black\" fill=\"none\"/>");
        for (v, anchor, x, y) in [
            (x0, "start", l, b + 16.0),
            (x1, "end", r, b + 16.0),
            (y0, "end", l - 6.0, b),
            (y1, "end", l - 6.0, t + 4.0),
        ] {
            let _ = writeln!(
                s,
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
                format_tick(v)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, (name, pts)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let d: Vec<String> = pts
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .enumerate()
                .map(|(j, &(x, y))| format!("{}{:.2} {:.2}", if j == 0 { "M" } else { "L" }, sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, "<path d=\"{}\" stroke=\"{color}\" stroke-width=\"2\" fill=\"none\"/>", d.join(" "));
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>",
                r - 150.0,
                t + 16.0 * (i as f64 + 1.0),
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn format_tick(v: f64) -> String {
    format!("{:.3}", v)
}
