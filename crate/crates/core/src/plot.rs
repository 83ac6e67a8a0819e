//! Curve CSV interchange and static SVG rendering of force comparisons.
//!
//! A curve file holds one net vertical force comparison per video with the
//! header `frame,gt_N,pred_N`. Rendering draws ground truth and prediction as
//! polylines, marks the top-3 detected ground-truth and predicted peaks with
//! horizontal lines, and annotates RMSE and the k-peaks distances. Multiple
//! panels render side by side in one SVG, which is how two training variants
//! of the same video are compared.

use crate::metrics::{detect_peaks, mean_k_peaks, MetricError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Required first line of a curve CSV.
pub const CURVE_CSV_HEADER: &str = "frame,gt_N,pred_N";

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("curve CSV line 1: expected header `{CURVE_CSV_HEADER}`, found `{found}`")]
    Header { found: String },
    #[error("curve CSV line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("curve CSV has a header but no data rows")]
    Empty,
    #[error("ground truth has {gt} frames but prediction has {pred}")]
    LengthMismatch { gt: usize, pred: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Serialize a ground-truth/prediction pair as curve CSV text. Frame numbers
/// are the row indices; floats use shortest round-trip formatting.
pub fn write_curve_csv(gt: &[f64], pred: &[f64]) -> Result<String, PlotError> {
    if gt.len() != pred.len() {
        return Err(PlotError::LengthMismatch {
            gt: gt.len(),
            pred: pred.len(),
        });
    }
    let mut out = String::with_capacity(16 * gt.len() + 24);
    out.push_str(CURVE_CSV_HEADER);
    out.push('\n');
    for (i, (g, p)) in gt.iter().zip(pred).enumerate() {
        let _ = writeln!(out, "{i},{g},{p}");
    }
    Ok(out)
}

/// Parse curve CSV text back into `(gt, pred)` series. Errors carry the
/// 1-based line number of the offending row.
pub fn parse_curve_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>), PlotError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != CURVE_CSV_HEADER {
        return Err(PlotError::Header {
            found: header.to_string(),
        });
    }
    let mut gt = Vec::new();
    let mut pred = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split(',');
        let (frame, g, p) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(f), Some(g), Some(p), None) => (f, g, p),
            _ => {
                return Err(PlotError::Row {
                    line,
                    message: format!("expected 3 comma-separated fields, got `{row}`"),
                })
            }
        };
        let parse = |name: &str, v: &str| -> Result<f64, PlotError> {
            v.trim().parse::<f64>().map_err(|e| PlotError::Row {
                line,
                message: format!("bad {name} value `{v}`: {e}"),
            })
        };
        let frame_no = frame.trim().parse::<usize>().map_err(|e| PlotError::Row {
            line,
            message: format!("bad frame number `{frame}`: {e}"),
        })?;
        if frame_no != gt.len() {
            return Err(PlotError::Row {
                line,
                message: format!("expected frame {} but found {}", gt.len(), frame_no),
            });
        }
        gt.push(parse("gt_N", g)?);
        pred.push(parse("pred_N", p)?);
    }
    if gt.is_empty() {
        return Err(PlotError::Empty);
    }
    Ok((gt, pred))
}

/// One rendered plot: a labeled ground-truth/prediction comparison with its
/// score annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    pub title: String,
    pub gt: Vec<f64>,
    pub pred: Vec<f64>,
    /// Root-mean-square error of the plotted signals, newtons.
    pub rmse: f64,
    /// k-peaks distance per k; empty when ground truth has no peaks.
    pub kpeaks: BTreeMap<usize, f64>,
}

impl PanelSpec {
    /// Build a panel from raw curves, computing the RMSE and k-peaks
    /// annotations that rendering displays. `ks` values whose ground truth
    /// has no detectable peak are omitted from the annotation.
    pub fn from_curves(
        title: &str,
        gt: Vec<f64>,
        pred: Vec<f64>,
        ks: &[usize],
        min_peak_distance: usize,
    ) -> Result<PanelSpec, PlotError> {
        if gt.len() != pred.len() {
            return Err(PlotError::LengthMismatch {
                gt: gt.len(),
                pred: pred.len(),
            });
        }
        if gt.is_empty() {
            return Err(PlotError::Empty);
        }
        let mse = gt
            .iter()
            .zip(&pred)
            .map(|(g, p)| (g - p) * (g - p))
            .sum::<f64>()
            / gt.len() as f64;
        let mut kpeaks = BTreeMap::new();
        for &k in ks {
            match mean_k_peaks(&pred, &gt, k, min_peak_distance) {
                Ok(v) => {
                    kpeaks.insert(k, v);
                }
                Err(MetricError::NoGroundTruthPeaks) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(PanelSpec {
            title: title.to_string(),
            gt,
            pred,
            rmse: mse.sqrt(),
            kpeaks,
        })
    }
}

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 36.0;
/// How many of the strongest peaks each curve gets marked with.
const MARKED_PEAKS: usize = 3;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Scale {
    n: usize,
    y_min: f64,
    y_max: f64,
}

impl Scale {
    fn of(gt: &[f64], pred: &[f64]) -> Scale {
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for v in gt.iter().chain(pred) {
            y_min = y_min.min(*v);
            y_max = y_max.max(*v);
        }
        // Pad 5% so curves do not touch the frame; widen degenerate ranges.
        let span = y_max - y_min;
        let pad = if span > 0.0 { 0.05 * span } else { 1.0 };
        Scale {
            n: gt.len(),
            y_min: y_min - pad,
            y_max: y_max + pad,
        }
    }

    fn x(&self, frame: usize) -> f64 {
        let usable = PANEL_W - MARGIN_L - MARGIN_R;
        if self.n <= 1 {
            return MARGIN_L + usable / 2.0;
        }
        MARGIN_L + usable * frame as f64 / (self.n - 1) as f64
    }

    fn y(&self, value: f64) -> f64 {
        let usable = PANEL_H - MARGIN_T - MARGIN_B;
        let t = (value - self.y_min) / (self.y_max - self.y_min);
        PANEL_H - MARGIN_B - usable * t
    }
}

fn polyline_points(series: &[f64], scale: &Scale) -> String {
    let mut pts = String::with_capacity(series.len() * 12);
    for (i, v) in series.iter().enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{:.2},{:.2}", scale.x(i), scale.y(*v));
    }
    pts
}

fn peak_lines(
    out: &mut String,
    series: &[f64],
    scale: &Scale,
    min_peak_distance: usize,
    class: &str,
    color: &str,
) {
    let peaks = detect_peaks(series, MARKED_PEAKS, min_peak_distance);
    for (frame, value) in &peaks.peaks {
        let y = scale.y(*value);
        let _ = writeln!(
            out,
            r##"  <line class="{class}" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1" stroke-dasharray="6 4"/>"##,
            scale.x(0),
            scale.x(scale.n.saturating_sub(1)),
        );
        let _ = writeln!(
            out,
            r##"  <circle class="{class}" cx="{:.2}" cy="{y:.2}" r="3" fill="{color}"/>"##,
            scale.x(*frame),
        );
    }
}

fn render_panel(out: &mut String, panel: &PanelSpec, min_peak_distance: usize, x_offset: f64) {
    let scale = Scale::of(&panel.gt, &panel.pred);
    let _ = writeln!(out, r##" <g class="panel" transform="translate({x_offset:.2},0)">"##);
    let _ = writeln!(
        out,
        r##"  <rect x="0" y="0" width="{PANEL_W}" height="{PANEL_H}" fill="#ffffff" stroke="#cccccc"/>"##
    );
    // Axes: left and bottom frame lines plus min/max tick labels.
    let x0 = MARGIN_L;
    let x1 = PANEL_W - MARGIN_R;
    let y0 = PANEL_H - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        out,
        r##"  <line x1="{x0}" y1="{y1}" x2="{x0}" y2="{y0}" stroke="#444444" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r##"  <line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#444444" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r##"  <text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end" fill="#444444">{:.1}</text>"##,
        x0 - 4.0,
        scale.y(scale.y_max) + 4.0,
        scale.y_max
    );
    let _ = writeln!(
        out,
        r##"  <text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end" fill="#444444">{:.1}</text>"##,
        x0 - 4.0,
        scale.y(scale.y_min) + 4.0,
        scale.y_min
    );
    let _ = writeln!(
        out,
        r##"  <text x="{x0}" y="{:.2}" font-size="11" fill="#444444">0</text>"##,
        y0 + 14.0
    );
    let _ = writeln!(
        out,
        r##"  <text x="{x1}" y="{:.2}" font-size="11" text-anchor="end" fill="#444444">{}</text>"##,
        y0 + 14.0,
        scale.n.saturating_sub(1)
    );
    // Zero-force reference if it lies inside the range.
    if scale.y_min < 0.0 && scale.y_max > 0.0 {
        let zy = scale.y(0.0);
        let _ = writeln!(
            out,
            r##"  <line class="zero" x1="{x0}" y1="{zy:.2}" x2="{x1}" y2="{zy:.2}" stroke="#dddddd" stroke-width="1"/>"##
        );
    }
    peak_lines(out, &panel.gt, &scale, min_peak_distance, "peak-gt", "#999999");
    peak_lines(out, &panel.pred, &scale, min_peak_distance, "peak-pred", "#f2a097");
    let _ = writeln!(
        out,
        r##"  <polyline class="gt" points="{}" fill="none" stroke="#222222" stroke-width="1.5"/>"##,
        polyline_points(&panel.gt, &scale)
    );
    let _ = writeln!(
        out,
        r##"  <polyline class="pred" points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
        polyline_points(&panel.pred, &scale)
    );
    // Title, legend and score annotations.
    let _ = writeln!(
        out,
        r##"  <text class="title" x="{:.2}" y="20" font-size="14" font-weight="bold" fill="#222222">{}</text>"##,
        MARGIN_L,
        escape(&panel.title)
    );
    let legend_x = x1 - 150.0;
    let _ = writeln!(
        out,
        r##"  <line x1="{legend_x}" y1="16" x2="{:.2}" y2="16" stroke="#222222" stroke-width="1.5"/>"##,
        legend_x + 24.0
    );
    let _ = writeln!(
        out,
        r##"  <text x="{:.2}" y="20" font-size="11" fill="#222222">truth</text>"##,
        legend_x + 28.0
    );
    let _ = writeln!(
        out,
        r##"  <line x1="{:.2}" y1="16" x2="{:.2}" y2="16" stroke="#d62728" stroke-width="1.5"/>"##,
        legend_x + 70.0,
        legend_x + 94.0
    );
    let _ = writeln!(
        out,
        r##"  <text x="{:.2}" y="20" font-size="11" fill="#d62728">predicted</text>"##,
        legend_x + 98.0
    );
    let mut annotation = format!("RMSE {:.3} N", panel.rmse);
    for (k, v) in &panel.kpeaks {
        let _ = write!(annotation, "  {k}-peaks {v:.3}");
    }
    let _ = writeln!(
        out,
        r##"  <text class="scores" x="{:.2}" y="{:.2}" font-size="12" fill="#222222">{}</text>"##,
        MARGIN_L,
        MARGIN_T - 6.0,
        escape(&annotation)
    );
    let _ = writeln!(out, " </g>");
}

/// Render one or more panels side by side as a standalone SVG document.
/// Output is a pure function of the inputs.
pub fn render_svg(panels: &[PanelSpec], min_peak_distance: usize) -> String {
    let count = panels.len().max(1);
    let width = PANEL_W * count as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">"##
    );
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, min_peak_distance, PANEL_W * i as f64);
    }
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 800.0 * (i as f64 * 0.2).sin() + 700.0)
            .collect()
    }

    #[test]
    fn curve_csv_round_trips_bit_exact() {
        let gt = vec![1.5, -2.25, 0.1 + 0.2, 1e-17];
        let pred = vec![0.0, 3.5, -1.125, 2.0];
        let text = write_curve_csv(&gt, &pred).unwrap();
        assert!(text.starts_with("frame,gt_N,pred_N\n"));
        let (g2, p2) = parse_curve_csv(&text).unwrap();
        assert_eq!(g2, gt);
        assert_eq!(p2, pred);
    }

    #[test]
    fn malformed_csv_reports_line_numbers() {
        match parse_curve_csv("frame,gt_N\n") {
            Err(PlotError::Header { .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }
        match parse_curve_csv("frame,gt_N,pred_N\n0,1.0,2.0\n1,oops,2.0\n") {
            Err(PlotError::Row { line: 3, .. }) => {}
            other => panic!("expected row error on line 3, got {other:?}"),
        }
        match parse_curve_csv("frame,gt_N,pred_N\n0,1.0\n") {
            Err(PlotError::Row { line: 2, .. }) => {}
            other => panic!("expected field-count error, got {other:?}"),
        }
        match parse_curve_csv("frame,gt_N,pred_N\n") {
            Err(PlotError::Empty) => {}
            other => panic!("expected empty error, got {other:?}"),
        }
        match parse_curve_csv("") {
            Err(PlotError::Header { .. }) => {}
            other => panic!("expected header error on empty file, got {other:?}"),
        }
    }

    #[test]
    fn identical_curves_overlap_and_annotate_zero() {
        let gt = wave(120);
        let panel =
            PanelSpec::from_curves("video-0", gt.clone(), gt.clone(), &[1, 3], 10).unwrap();
        assert_eq!(panel.rmse, 0.0);
        assert!(panel.kpeaks.values().all(|v| *v == 0.0));
        let svg = render_svg(&[panel], 10);
        // Both polylines carry identical coordinates: perfectly overlapping.
        let points: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains("<polyline"))
            .collect();
        assert_eq!(points.len(), 2);
        let extract = |line: &str| {
            let start = line.find("points=\"").unwrap() + 8;
            let end = line[start..].find('"').unwrap() + start;
            line[start..end].to_string()
        };
        assert_eq!(extract(points[0]), extract(points[1]));
        assert!(svg.contains("RMSE 0.000 N"));
        assert!(svg.contains("1-peaks 0.000"));
        assert!(svg.contains("3-peaks 0.000"));
    }

    #[test]
    fn top_three_peaks_are_marked_per_curve() {
        let gt = wave(200); // several well-separated extrema
        let pred: Vec<f64> = wave(200).iter().map(|v| v * 0.9).collect();
        let panel = PanelSpec::from_curves("video-1", gt, pred, &[1], 10).unwrap();
        let svg = render_svg(&[panel], 10);
        let gt_lines = svg.matches(r##"<line class="peak-gt""##).count();
        let pred_lines = svg.matches(r##"<line class="peak-pred""##).count();
        assert_eq!(gt_lines, 3);
        assert_eq!(pred_lines, 3);
    }

    #[test]
    fn two_reports_render_side_by_side() {
        let gt = wave(80);
        let a = PanelSpec::from_curves("plain", gt.clone(), vec![700.0; 80], &[1], 10).unwrap();
        let b = PanelSpec::from_curves("gated", gt.clone(), gt.clone(), &[1], 10).unwrap();
        let svg = render_svg(&[a.clone(), b.clone()], 10);
        assert_eq!(svg.matches(r##"<g class="panel""##).count(), 2);
        assert!(svg.contains(r##"translate(0.00,0)"##));
        assert!(svg.contains(r##"translate(640.00,0)"##));
        assert!(svg.contains(">plain<"));
        assert!(svg.contains(">gated<"));
        assert!(svg.contains(r##"width="1280""##));
        // Rendering is deterministic.
        assert_eq!(svg, render_svg(&[a, b], 10));
    }
}
