//! CSV and SVG writers.
//!
//! `density.csv` has the header `t,n_1,...,n_L,se_1,...,se_L`, one row per
//! recorded time, every number printed with 9 significant digits.
//! `events.csv` has `traj,step,site,action` with 1-based sites matching the
//! `n_<site>` columns and 1-based step numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::HarnessError;
use crate::open_system::{ContactAction, EnsembleResult, TrajectoryEvent};

/// Formats like C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn density_csv(result: &EnsembleResult) -> String {
    let l = result.num_sites();
    let mut out = String::from("t");
    for q in 1..=l {
        let _ = write!(out, ",n_{q}");
    }
    for q in 1..=l {
        let _ = write!(out, ",se_{q}");
    }
    out.push('\n');
    for ((t, n), se) in result.times.iter().zip(&result.mean_density).zip(&result.stderr) {
        out.push_str(&fmt_sig(*t));
        for v in n.iter().chain(se) {
            out.push(',');
            out.push_str(&fmt_sig(*v));
        }
        out.push('\n');
    }
    out
}

pub fn events_csv(events: &[TrajectoryEvent]) -> String {
    let mut out = String::from("traj,step,site,action\n");
    for e in events {
        let _ = writeln!(out, "{},{},{},{}", e.trajectory, e.step, e.qubit + 1, e.action.as_str());
    }
    out
}

/// Table parsed back from `density.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    pub times: Vec<f64>,
    pub mean_density: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

pub fn parse_density_csv(text: &str) -> Result<DensityTable, String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty file")?.split(',').collect();
    if header.first() != Some(&"t") || header.len() % 2 != 1 {
        return Err(format!("unexpected header {header:?}"));
    }
    let l = (header.len() - 1) / 2;
    for q in 1..=l {
        if header[q] != format!("n_{q}") || header[l + q] != format!("se_{q}") {
            return Err(format!("unexpected header {header:?}"));
        }
    }
    let mut table = DensityTable {
        times: vec![],
        mean_density: vec![],
        stderr: vec![],
    };
    for (k, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|e| format!("row {}: {e}", k + 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        if vals.len() != header.len() {
            return Err(format!("row {} has {} fields", k + 1, vals.len()));
        }
        table.times.push(vals[0]);
        table.mean_density.push(vals[1..=l].to_vec());
        table.stderr.push(vals[l + 1..].to_vec());
    }
    Ok(table)
}

/// Grayscale heatmap of `<n_q(t)>`: time runs left to right, site 1 is the
/// top row, black is empty and white is occupied. Effective injections are
/// drawn as filled circles and effective removals as hollow ones, each in
/// the column of the first recorded time that includes it.
pub fn heatmap_svg(result: &EnsembleResult, title: &str) -> String {
    let cols = result.times.len().max(1);
    let rows = result.num_sites().max(1);
    let cw = (720.0 / cols as f64).clamp(4.0, 24.0);
    let ch = (360.0 / rows as f64).clamp(8.0, 32.0);
    let (left, top) = (60.0, 30.0);
    let width = left + cw * cols as f64 + 20.0;
    let height = top + ch * rows as f64 + 45.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="18" font-family="sans-serif" font-size="13">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(s, r#"<g class="cells">"#);
    for (k, row) in result.mean_density.iter().enumerate() {
        for (q, n) in row.iter().enumerate() {
            let g = (n.clamp(0.0, 1.0) * 255.0).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({g},{g},{g})"/>"#,
                left + k as f64 * cw,
                top + q as f64 * ch,
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let r = 0.3 * cw.min(ch);
    let _ = writeln!(s, r#"<g class="events">"#);
    for e in result.events.iter().filter(|e| e.action.is_effective()) {
        let col = result.steps.iter().position(|&st| st >= e.step).unwrap_or(cols - 1);
        let cx = left + (col as f64 + 0.5) * cw;
        let cy = top + (e.qubit as f64 + 0.5) * ch;
        match e.action {
            ContactAction::Inject => {
                let _ = writeln!(
                    s,
                    r##"<circle class="inject" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="#d62728" stroke="#d62728"/>"##
                );
            }
            _ => {
                let _ = writeln!(
                    s,
                    r##"<circle class="remove" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##
                );
            }
        }
    }
    let _ = writeln!(s, "</g>");

    let bottom = top + ch * rows as f64;
    let t_end = result.times.last().copied().unwrap_or(0.0);
    let font = r#"font-family="sans-serif" font-size="11""#;
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" {font}>1</text>"#,
        left - 6.0,
        top + 0.5 * ch + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" {font}>{rows}</text>"#,
        left - 6.0,
        bottom - 0.5 * ch + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" {font} transform="rotate(-90 14 {:.2})">site</text>"#,
        top + 0.5 * ch * rows as f64,
        top + 0.5 * ch * rows as f64
    );
    let _ = writeln!(s, r#"<text x="{left:.2}" y="{:.2}" {font}>0</text>"#, bottom + 14.0);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" {font}>{}</text>"#,
        left + cw * cols as f64,
        bottom + 14.0,
        fmt_sig(t_end)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" {font}>t (hbar/meV)</text>"#,
        left + 0.5 * cw * cols as f64,
        bottom + 32.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
