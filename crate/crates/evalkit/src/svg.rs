//! Self-contained SVG plotting: line charts and grouped histograms.
//! Deliberately minimal so reports carry no charting dependency.

use crate::histogram::Histogram;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct LineSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        (min - 0.5, max + 0.5)
    } else {
        let pad = (max - min) * 0.05;
        (min - pad, max + pad)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{x}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        x = WIDTH / 2.0,
        title = escape(title),
    )
}

fn axes(xlabel: &str, ylabel: &str, xr: (f64, f64), yr: (f64, f64)) -> String {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let mut out = format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"{xm}\" y=\"{yb}\" text-anchor=\"middle\">{xl}</text>\n\
         <text x=\"18\" y=\"{ym}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {ym})\">{yl}</text>\n",
        xm = (x0 + x1) / 2.0,
        yb = HEIGHT - 14.0,
        ym = (y0 + y1) / 2.0,
        xl = escape(xlabel),
        yl = escape(ylabel),
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = xr.0 + (xr.1 - xr.0) * t;
        let yv = yr.0 + (yr.1 - yr.0) * t;
        let xp = x0 + (x1 - x0) * t;
        let yp = y0 - (y0 - y1) * t;
        out.push_str(&format!(
            "<line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 5.0,
            y0 + 20.0,
            trim_num(xv),
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            yp + 4.0,
            trim_num(yv),
        ));
    }
    out
}

fn scale(v: f64, range: (f64, f64), lo: f64, hi: f64) -> f64 {
    lo + (v - range.0) / (range.1 - range.0) * (hi - lo)
}

fn legend(labels: &[String]) -> String {
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_T + 18.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        out.push_str(&format!(
            "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            y - 10.0,
            WIDTH - MARGIN_R + 26.0,
            y,
            escape(label),
            x = WIDTH - MARGIN_R + 10.0,
        ));
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn trim_num(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[LineSeries]) -> String {
    let xr = axis_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = axis_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut out = header(title);
    out.push_str(&axes(xlabel, ylabel, xr, yr));
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| {
                format!(
                    "{:.2},{:.2}",
                    scale(x, xr, MARGIN_L, WIDTH - MARGIN_R),
                    scale(y, yr, HEIGHT - MARGIN_B, MARGIN_T)
                )
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                scale(x, xr, MARGIN_L, WIDTH - MARGIN_R),
                scale(y, yr, HEIGHT - MARGIN_B, MARGIN_T)
            ));
        }
    }
    out.push_str(&legend(&series.iter().map(|s| s.label.clone()).collect::<Vec<_>>()));
    out.push_str("</svg>\n");
    out
}

/// Overlaid translucent histograms, normalized to densities so groups of
/// different sizes are comparable.
pub fn histogram_chart(title: &str, xlabel: &str, groups: &[(String, Histogram)]) -> String {
    let xr = axis_range(groups.iter().flat_map(|(_, h)| h.edges.iter().copied()));
    let yr = {
        let mut max_density = 0.0f64;
        for (_, h) in groups {
            let total: usize = h.counts.iter().sum();
            for (i, &c) in h.counts.iter().enumerate() {
                let w = (h.edges[i + 1] - h.edges[i]).max(1e-12);
                max_density = max_density.max(c as f64 / total as f64 / w);
            }
        }
        (0.0, max_density * 1.05 + 1e-12)
    };
    let mut out = header(title);
    out.push_str(&axes(xlabel, "density", xr, yr));
    for (gi, (_, h)) in groups.iter().enumerate() {
        let color = PALETTE[gi % PALETTE.len()];
        let total: usize = h.counts.iter().sum();
        for (i, &c) in h.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let w = (h.edges[i + 1] - h.edges[i]).max(1e-12);
            let density = c as f64 / total as f64 / w;
            let x0 = scale(h.edges[i], xr, MARGIN_L, WIDTH - MARGIN_R);
            let x1 = scale(h.edges[i + 1], xr, MARGIN_L, WIDTH - MARGIN_R);
            let y = scale(density, yr, HEIGHT - MARGIN_B, MARGIN_T);
            out.push_str(&format!(
                "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"{color}\" fill-opacity=\"0.45\"/>\n",
                (x1 - x0).max(0.5),
                (HEIGHT - MARGIN_B - y).max(0.0),
            ));
        }
    }
    out.push_str(&legend(&groups.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>()));
    out.push_str("</svg>\n");
    out
}
