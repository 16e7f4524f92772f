//! Self-contained SVG line charts.

use std::fmt::Write as _;

use super::SummaryStats;
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

const MEAN_COLOR: &str = "#1f77b4";
const REFERENCE_COLOR: &str = "#d62728";
const PREDICTION_COLOR: &str = "#2ca02c";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    SampleSize,
    Offset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartStyle {
    pub title: String,
    pub x_axis: XAxis,
}

/// Series of one chart. NaN entries of `mean` are skipped; `band` holds
/// half-widths around `mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub band: Option<Vec<f64>>,
    pub reference: Vec<f64>,
    pub prediction: Vec<Option<f64>>,
    pub mean_label: String,
    pub reference_label: String,
    pub prediction_label: String,
}

/// Chart of one slice of a sweep: mean with a one-std band, the boundary
/// supremum dashed, the finite-order prediction solid.
pub fn emit_svg(stats: &SummaryStats, style: &ChartStyle) -> Result<String> {
    if stats.rows.is_empty() {
        return Err(Error::InvalidInput("cannot chart empty statistics".into()));
    }
    let mut rows = stats.rows.clone();
    let key = |r: &super::SummaryRow| match style.x_axis {
        XAxis::SampleSize => r.n as f64,
        XAxis::Offset => r.c,
    };
    rows.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let chart = Chart {
        title: style.title.clone(),
        x_label: match style.x_axis {
            XAxis::SampleSize => "n".into(),
            XAxis::Offset => "c".into(),
        },
        y_label: "omega".into(),
        x: rows.iter().map(key).collect(),
        mean: rows.iter().map(|r| r.mean_omega).collect(),
        band: Some(rows.iter().map(|r| r.std_omega).collect()),
        reference: rows.iter().map(|r| r.sup_p).collect(),
        prediction: rows.iter().map(|r| r.prediction_m).collect(),
        mean_label: "mean empirical bandwidth".into(),
        reference_label: "sup of density on boundary".into(),
        prediction_label: format!("finite-m prediction ({})", stats.variant.name()),
    };
    render_chart(&chart)
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn points(frame: &Frame, pts: &[(f64, f64)]) -> String {
    pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect::<Vec<_>>().join(" ")
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

pub fn render_chart(chart: &Chart) -> Result<String> {
    let k = chart.x.len();
    if k == 0 {
        return Err(Error::InvalidInput("cannot chart an empty series".into()));
    }
    if chart.mean.len() != k || chart.reference.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: chart.mean.len().min(chart.reference.len()) });
    }
    let band = chart.band.as_deref().unwrap_or(&[]);
    let mean_pts: Vec<(f64, f64)> = (0..k).filter(|&i| chart.mean[i].is_finite()).map(|i| (chart.x[i], chart.mean[i])).collect();
    let band_pts: Vec<(f64, f64, f64)> = (0..band.len().min(k))
        .filter(|&i| chart.mean[i].is_finite() && band[i].is_finite())
        .map(|i| (chart.x[i], chart.mean[i] - band[i], chart.mean[i] + band[i]))
        .collect();
    let ref_pts: Vec<(f64, f64)> = (0..k).filter(|&i| chart.reference[i].is_finite()).map(|i| (chart.x[i], chart.reference[i])).collect();
    let pred_pts: Vec<(f64, f64)> =
        chart.prediction.iter().enumerate().filter_map(|(i, p)| p.filter(|v| v.is_finite()).map(|v| (chart.x[i], v))).collect();

    let (mut x0, mut x1) = chart.x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if x1 - x0 <= 0.0 {
        let pad = if x0 == 0.0 { 1.0 } else { 0.1 * x0.abs() };
        x0 -= pad;
        x1 += pad;
    }
    let ys = mean_pts
        .iter()
        .map(|p| p.1)
        .chain(band_pts.iter().flat_map(|b| [b.1, b.2]))
        .chain(ref_pts.iter().map(|p| p.1))
        .chain(pred_pts.iter().map(|p| p.1));
    let y_max = ys.fold(0.0f64, f64::max);
    let frame = Frame { x0, x1, y0: 0.0, y1: if y_max > 0.0 { 1.1 * y_max } else { 1.0 } };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(&chart.title));

    // axes and ticks
    let (bx, by) = (LEFT, HEIGHT - BOTTOM);
    let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{:.2}" y2="{by}" stroke="black"/>"#, WIDTH - RIGHT);
    let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{bx}" y2="{TOP}" stroke="black"/>"#);
    for t in 0..=TICKS {
        let f = t as f64 / TICKS as f64;
        let xv = frame.x0 + f * (frame.x1 - frame.x0);
        let yv = frame.y0 + f * (frame.y1 - frame.y0);
        let (px, py) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{by}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, by + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, by + 20.0, tick_label(xv));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{bx}" y2="{py:.2}" stroke="black"/>"#, bx - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, bx - 8.0, py + 4.0, tick_label(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - 15.0, escape(&chart.x_label));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(&chart.y_label)
    );

    if band_pts.len() >= 2 {
        let upper: Vec<(f64, f64)> = band_pts.iter().map(|b| (b.0, b.2)).collect();
        let lower: Vec<(f64, f64)> = band_pts.iter().rev().map(|b| (b.0, b.1.max(frame.y0))).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{} {}" fill="{MEAN_COLOR}" fill-opacity="0.25" stroke="none"/>"#,
            points(&frame, &upper),
            points(&frame, &lower)
        );
    }
    if ref_pts.len() >= 2 {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{REFERENCE_COLOR}" stroke-width="2" stroke-dasharray="8,5"/>"#, points(&frame, &ref_pts));
    } else if let Some(&(_, y)) = ref_pts.first() {
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="{REFERENCE_COLOR}" stroke-width="2" stroke-dasharray="8,5"/>"#,
            WIDTH - RIGHT,
            py = frame.py(y)
        );
    }
    if pred_pts.len() >= 2 {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{PREDICTION_COLOR}" stroke-width="2"/>"#, points(&frame, &pred_pts));
    }
    if mean_pts.len() >= 2 {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{MEAN_COLOR}" stroke-width="2"/>"#, points(&frame, &mean_pts));
    } else if let Some(&(x, y)) = mean_pts.first() {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{MEAN_COLOR}"/>"#, frame.px(x), frame.py(y));
    }

    // legend
    let mut ly = TOP + 10.0;
    let lx = WIDTH - RIGHT - 230.0;
    let mut entry = |s: &mut String, color: &str, dash: &str, label: &str| {
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 25.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 32.0, ly + 4.0, escape(label));
        ly += 18.0;
    };
    entry(&mut s, MEAN_COLOR, "", &chart.mean_label);
    entry(&mut s, REFERENCE_COLOR, r#" stroke-dasharray="8,5""#, &chart.reference_label);
    if !pred_pts.is_empty() {
        entry(&mut s, PREDICTION_COLOR, "", &chart.prediction_label);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::TVariant;
    use crate::harness::SummaryRow;

    fn row(n: usize, mean: f64) -> SummaryRow {
        SummaryRow {
            n,
            m: 10,
            c: 0.0,
            trials_used: 3,
            trials_excluded: 0,
            mean_omega: mean,
            std_omega: 0.01,
            sup_p: 0.13,
            prediction_m: Some(0.07),
        }
    }

    fn style() -> ChartStyle {
        ChartStyle { title: "t".into(), x_axis: XAxis::SampleSize }
    }

    #[test]
    fn full_chart_has_all_layers() {
        let stats = SummaryStats { variant: TVariant::Corrected, rows: vec![row(1000, 0.08), row(500, 0.07), row(1500, 0.09)] };
        let svg = emit_svg(&stats, &style()).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polygon"));
        assert!(svg.contains("stroke-dasharray=\"8,5\""));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(!svg.contains("href"));
        assert_eq!(svg, emit_svg(&stats, &style()).unwrap());
    }

    #[test]
    fn single_point_is_a_marker() {
        let stats = SummaryStats { variant: TVariant::Corrected, rows: vec![row(500, 0.07)] };
        let svg = emit_svg(&stats, &style()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<polygon"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn empty_stats_rejected() {
        let stats = SummaryStats { variant: TVariant::Corrected, rows: vec![] };
        assert!(emit_svg(&stats, &style()).is_err());
    }

    #[test]
    fn nan_means_are_skipped() {
        let stats = SummaryStats { variant: TVariant::Corrected, rows: vec![row(500, f64::NAN), row(1000, 0.08), row(1500, 0.09)] };
        let svg = emit_svg(&stats, &style()).unwrap();
        assert!(!svg.contains("NaN"));
    }
}
