//! CSV and SVG output for the `(tr A, det A)` stability diagram.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::catalogue::CatalogueRecord;
use crate::error::{Error, Result};
use crate::families::{FamilySample, PointData};
use crate::symplectic::{GitPoint, Region, Sign};

/// One dot of the diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSample {
    pub jacobi: f64,
    pub p: GitPoint,
    pub region: Region,
    /// `ε` at each symmetric point, in point order.
    pub epsilon: Vec<Option<Vec<Sign>>>,
}

fn eps_of(points: &[PointData]) -> Vec<Option<Vec<Sign>>> {
    points.iter().map(|p| p.data.epsilon.clone()).collect()
}

impl From<&FamilySample> for PlotSample {
    fn from(s: &FamilySample) -> Self {
        PlotSample {
            jacobi: s.jacobi,
            p: s.record.p,
            region: s.record.region,
            epsilon: eps_of(&s.record.points),
        }
    }
}

impl From<&CatalogueRecord> for PlotSample {
    fn from(r: &CatalogueRecord) -> Self {
        PlotSample {
            jacobi: r.jacobi,
            p: r.p,
            region: r.region,
            epsilon: eps_of(&r.points),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Sample(Box<FamilySample>),
    Record(Box<CatalogueRecord>),
}

/// Reads a family path or a catalogue, both JSON-lines.
pub fn parse_plot_input(text: &str) -> Result<Vec<PlotSample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(line).map_err(|_| {
            Error::Parse(format!(
                "line {}: neither a family sample nor a catalogue record",
                i + 1
            ))
        })?;
        out.push(match parsed {
            Line::Sample(s) => PlotSample::from(s.as_ref()),
            Line::Record(r) => PlotSample::from(r.as_ref()),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

fn sign_str(s: &[Sign]) -> String {
    let inner: Vec<String> = s.iter().map(|x| x.as_char().to_string()).collect();
    format!("({})", inner.join(","))
}

/// `jacobi,x,y,region,symmetric_points` followed by `eps1_pK,eps2_pK` for
/// every point index that carries a signature somewhere in the input.
pub fn to_csv(samples: &[PlotSample]) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let width = samples
        .iter()
        .map(|s| s.epsilon.iter().rposition(Option::is_some).map_or(0, |i| i + 1))
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["jacobi", "x", "y", "region", "symmetric_points"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for k in 1..=width {
        header.push(format!("eps1_p{k}"));
        header.push(format!("eps2_p{k}"));
    }
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![
            format!("{:.16e}", s.jacobi),
            format!("{:.16e}", s.p.x),
            format!("{:.16e}", s.p.y),
            s.region.to_string(),
            s.epsilon.len().to_string(),
        ];
        for k in 0..width {
            let e = s.epsilon.get(k).cloned().flatten();
            for j in 0..2 {
                row.push(
                    e.as_ref()
                        .and_then(|v| v.get(j))
                        .map_or(String::new(), |x| x.as_char().to_string()),
                );
            }
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn region_color(r: Region) -> &'static str {
    match r {
        Region::E2 | Region::Elliptic => "#1b9e77",
        Region::EHplus => "#d95f02",
        Region::EHminus => "#7570b3",
        Region::Hpp | Region::PosHyp => "#e7298a",
        Region::Hmm | Region::NegHyp => "#66a61e",
        Region::Hmp => "#e6ab02",
        Region::N => "#a6761d",
        _ => "#666666",
    }
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 48.0;

struct View {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl View {
    fn fit(samples: &[PlotSample]) -> View {
        let xs = samples.iter().map(|s| s.p.x);
        let ys = samples.iter().map(|s| s.p.y);
        let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let hx = (0.6 * (xmax - xmin)).max(0.01);
        let hy = (0.6 * (ymax - ymin)).max(0.01);
        let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
        View {
            x0: cx - hx,
            x1: cx + hx,
            y0: cy - hy,
            y1: cy + hy,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

/// SVG of the diagram: the parabola `y = x²/4`, the lines `Γ_{l/k}` for
/// `k <= k_max`, one dot per sample coloured by region and the B-signs of
/// each sample next to its dot.
pub fn to_svg(samples: &[PlotSample], k_max: u32) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.iter().any(|s| !s.p.x.is_finite() || !s.p.y.is_finite()) {
        return Err(Error::NonFinite);
    }
    let v = View::fit(samples);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath></defs>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<g clip-path="url(#plot)">"#);
    let n = 200;
    let pts: Vec<String> = (0..=n)
        .map(|i| {
            let x = v.x0 + (v.x1 - v.x0) * i as f64 / n as f64;
            format!("{:.2},{:.2}", v.px(x), v.py(0.25 * x * x))
        })
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="parabola" points="{}" fill="none" stroke="#000" stroke-width="1.5"/>"##,
        pts.join(" ")
    );
    for locus in crate::families::pencil_loci(k_max) {
        let crate::families::Locus::Pencil { l, k, alpha } = locus else {
            continue;
        };
        let y = |x: f64| alpha * x - alpha * alpha;
        let _ = writeln!(
            s,
            r##"<line class="pencil" data-locus="{l}/{k}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            v.px(v.x0),
            v.py(y(v.x0)),
            v.px(v.x1),
            v.py(y(v.x1))
        );
    }
    let _ = writeln!(s, "</g>");
    for (i, smp) in samples.iter().enumerate() {
        let (cx, cy) = (v.px(smp.p.x), v.py(smp.p.y));
        let _ = writeln!(
            s,
            r#"<circle class="sample" data-jacobi="{:.16e}" data-region="{}" cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{}"/>"#,
            smp.jacobi,
            smp.region,
            region_color(smp.region)
        );
        let labels: Vec<String> = smp
            .epsilon
            .iter()
            .enumerate()
            .filter_map(|(k, e)| e.as_ref().map(|e| format!("P{}{}", k + 1, sign_str(e))))
            .collect();
        if !labels.is_empty() {
            let dy = if i % 2 == 0 { -8.0 } else { 16.0 };
            let _ = writeln!(
                s,
                r#"<text class="epsilon" x="{:.2}" y="{:.2}">{}</text>"#,
                cx + 6.0,
                cy + dy,
                labels.join(" ")
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">tr A  [{:.6}, {:.6}]</text>"#,
        W / 2.0,
        H - 14.0,
        v.x0,
        v.x1
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">det A  [{:.6}, {:.6}]</text>"#,
        H / 2.0,
        H / 2.0,
        v.y0,
        v.y1
    );
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sign::{Minus as M, Plus as P};

    fn snitch() -> Vec<PlotSample> {
        vec![
            PlotSample {
                jacobi: 3.00357414,
                p: GitPoint::new(-1.302169, 0.302205),
                region: Region::E2,
                epsilon: vec![Some(vec![P, P]), Some(vec![P, P])],
            },
            PlotSample {
                jacobi: 3.0035738826,
                p: GitPoint::new(-1.311417, 0.311120),
                region: Region::EHminus,
                epsilon: vec![Some(vec![M, P]), Some(vec![P, P])],
            },
        ]
    }

    #[test]
    fn csv_columns() {
        let text = to_csv(&snitch()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "jacobi,x,y,region,symmetric_points,eps1_p1,eps2_p1,eps1_p2,eps2_p2"
        );
        for l in lines {
            assert_eq!(l.split(',').count(), 5 + 2 * 2);
        }
        assert!(text.contains("EHminus,2,-,+,+,+"));
    }

    #[test]
    fn svg_has_two_dots_and_labels() {
        let svg = to_svg(&snitch(), 2).unwrap();
        assert_eq!(svg.matches(r#"class="sample""#).count(), 2);
        assert!(svg.contains("P1(+,+)") && svg.contains("P1(-,+)"));
        assert!(svg.contains(r#"data-locus="1/2""#));
        assert!(!svg.contains(r#"data-locus="1/3""#));
    }

    #[test]
    fn single_record() {
        let one = &snitch()[..1];
        let svg = to_svg(one, 12).unwrap();
        assert_eq!(svg.matches(r#"class="sample""#).count(), 1);
        assert_eq!(to_csv(one).unwrap().lines().count(), 2);
    }

    #[test]
    fn empty_input() {
        assert!(matches!(to_svg(&[], 12), Err(Error::EmptyInput)));
        assert!(matches!(to_csv(&[]), Err(Error::EmptyInput)));
        assert!(matches!(parse_plot_input("\n"), Err(Error::EmptyInput)));
    }
}
