//! Column-oriented time series with CSV and static SVG output.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub index_name: String,
    pub index: Vec<f64>,
    /// Print the index as integers (step counters).
    pub integer_index: bool,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(index_name: &str, index: Vec<f64>, integer_index: bool) -> Self {
        Self { index_name: index_name.into(), index, integer_index, columns: Vec::new() }
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.index.len(), "column {name} has the wrong length");
        self.columns.push((name.into(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = self.index_name.clone();
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (r, t) in self.index.iter().enumerate() {
            if self.integer_index {
                write!(out, "{}", *t as i64).unwrap();
            } else {
                write!(out, "{t:.16e}").unwrap();
            }
            for (_, col) in &self.columns {
                write!(out, ",{:.16e}", col[r]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_csv())
    }

    /// Line plot of every column against the index.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 720.0;
        const H: f64 = 420.0;
        const PAD: f64 = 56.0;
        const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
        let finite = |v: &&f64| v.is_finite();
        let (x0, x1) = bounds(self.index.iter().filter(finite).copied());
        let (y0, y1) = bounds(self.columns.iter().flat_map(|(_, c)| c.iter().filter(finite).copied()));
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
        writeln!(
            s,
            r#"<path d="M{PAD},{PAD} L{PAD},{b} L{r},{b}" fill="none" stroke="black"/>"#,
            b = H - PAD,
            r = W - PAD
        )
        .unwrap();
        for (v, x, y, anchor) in [
            (x0, PAD, H - PAD + 16.0, "start"),
            (x1, W - PAD, H - PAD + 16.0, "end"),
        ] {
            writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#).unwrap();
        }
        for (v, y) in [(y0, H - PAD), (y1, PAD)] {
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0, y + 4.0).unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(&self.index_name)).unwrap();
        for (k, (name, col)) in self.columns.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mut d = String::new();
            let mut pen_up = true;
            for (x, y) in self.index.iter().zip(col) {
                if !x.is_finite() || !y.is_finite() {
                    pen_up = true;
                    continue;
                }
                write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, sx(*x), sy(*y)).unwrap();
                pen_up = false;
            }
            writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end()).unwrap();
            let ly = PAD + 16.0 * k as f64;
            writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#, W - PAD - 140.0, escape(name)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write_svg(&self, path: impl AsRef<Path>, title: &str) -> Result<()> {
        write_text(path.as_ref(), &self.to_svg(title))
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}
