//! Experiment report: fixed-schema CSV rows, spectrum dumps, and small SVG
//! plots. Emission is byte-deterministic for a fixed report.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// One row of the fixed schema
/// `experiment,symbol_id,weight_id,n,L,p,q,form,scope,value,ratio_partner,ratio`.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub experiment: String,
    pub symbol_id: String,
    pub weight_id: String,
    pub n: usize,
    pub level: usize,
    pub p: f64,
    pub q: f64,
    pub form: String,
    pub scope: String,
    pub value: f64,
    pub ratio_partner: String,
    pub ratio: Option<f64>,
}

pub const CSV_HEADER: &str = "experiment,symbol_id,weight_id,n,L,p,q,form,scope,value,ratio_partner,ratio";

fn fmt_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

impl ReportRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.12e},{},{}",
            self.experiment,
            self.symbol_id,
            self.weight_id,
            self.n,
            self.level,
            self.p,
            fmt_q(self.q),
            self.form,
            self.scope,
            self.value,
            self.ratio_partner,
            self.ratio.map(|r| format!("{r:.12e}")).unwrap_or_default()
        )
    }
}

/// Full outcome of one or more experiment runs.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// Singular spectra collected along the way, keyed by a stable id.
    pub spectra: Vec<(String, Vec<f64>)>,
}

impl ExperimentReport {
    pub fn merge(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.spectra.extend(other.spectra);
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    SvgPlot,
}

/// Write the report under `dir`: `report.csv` plus per-spectrum CSV dumps,
/// or (for the SVG format) log-log spectrum plots and ratio-vs-L curves.
pub fn emit(report: &ExperimentReport, format: EmitFormat, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    if report.is_empty() {
        return Err(Error::EmptyReport);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        EmitFormat::Csv => {
            let path = dir.join("report.csv");
            std::fs::write(&path, report.csv())?;
            written.push(path);
            if !report.spectra.is_empty() {
                let sdir = dir.join("spectra");
                std::fs::create_dir_all(&sdir)?;
                for (id, values) in &report.spectra {
                    let mut text = String::from("k,s_k\n");
                    for (k, s) in values.iter().enumerate() {
                        writeln!(text, "{},{:.12e}", k + 1, s).expect("string write");
                    }
                    let path = sdir.join(format!("{id}.csv"));
                    std::fs::write(&path, text)?;
                    written.push(path);
                }
            }
        }
        EmitFormat::SvgPlot => {
            let pdir = dir.join("plots");
            std::fs::create_dir_all(&pdir)?;
            for (id, values) in &report.spectra {
                let pts: Vec<(f64, f64)> = values
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s > 0.0)
                    .map(|(k, &s)| (((k + 1) as f64).log10(), s.log10()))
                    .collect();
                if pts.is_empty() {
                    continue;
                }
                let path = pdir.join(format!("spectrum-{id}.svg"));
                std::fs::write(&path, polyline_svg(&pts, "log10 k", "log10 s_k", id))?;
                written.push(path);
            }
            // ratio-vs-L curves grouped by (experiment, symbol, weights, form)
            use std::collections::BTreeMap;
            let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for row in &report.rows {
                if let Some(r) = row.ratio {
                    if r.is_finite() && r > 0.0 {
                        let key = format!(
                            "{}-{}-{}-{}",
                            row.experiment, row.symbol_id, row.weight_id, row.form
                        );
                        curves.entry(key).or_default().push((row.level as f64, r.log10()));
                    }
                }
            }
            for (key, mut pts) in curves {
                if pts.len() < 2 {
                    continue;
                }
                pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite levels"));
                let path = pdir.join(format!("ratio-{key}.svg"));
                std::fs::write(&path, polyline_svg(&pts, "L", "log10 ratio", &key))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Minimal standalone SVG polyline plot.
fn polyline_svg(points: &[(f64, f64)], xlabel: &str, ylabel: &str, title: &str) -> String {
    let (w, h, margin) = (640.0, 420.0, 50.0);
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if xmax - xmin < 1e-12 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| margin + (x - xmin) / (xmax - xmin) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - ymin) / (ymax - ymin) * (h - 2.0 * margin);
    let mut path = String::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        write!(path, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, sx(x), sy(y)).expect("fmt");
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{title}</text>\n",
            "<line x1=\"{m}\" y1=\"{ybase}\" x2=\"{xend}\" y2=\"{ybase}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ybase}\" stroke=\"black\"/>\n",
            "<text x=\"{tx}\" y=\"{h2}\" text-anchor=\"middle\" font-size=\"11\">{xlabel}</text>\n",
            "<text x=\"14\" y=\"{ty}\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 {ty})\">{ylabel}</text>\n",
            "<path d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
            "<text x=\"{m}\" y=\"{ylab}\" font-size=\"9\">({xmin:.3}, {ymin:.3}) .. ({xmax:.3}, {ymax:.3})</text>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        m = margin,
        tx = w / 2.0,
        ty = h / 2.0,
        h2 = h - 12.0,
        ybase = h - margin,
        xend = w - margin,
        ylab = h - 4.0,
        title = title,
        xlabel = xlabel,
        ylabel = ylabel,
        path = path,
        xmin = xmin,
        ymin = ymin,
        xmax = xmax,
        ymax = ymax,
    )
}
