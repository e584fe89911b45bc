//! Hand-rolled standalone SVG line and CDF plots with deterministic layout.
//! CSV tables are the contract; these are conveniences for eyeballing runs.

use std::fmt::Write;

use crate::{EcgError, Result};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    log_y: bool,
}

impl Frame {
    fn from_points(points: &[(f64, f64)], log_y: bool) -> Result<Frame> {
        if points.is_empty() {
            return Err(EcgError::EmptyInput("plot with no points".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points
            .iter()
            .map(|p| {
                if log_y {
                    p.1.max(f64::MIN_POSITIVE).log10()
                } else {
                    p.1
                }
            })
            .collect();
        let (x_min, x_max) = span(&xs);
        let (y_min, y_max) = span(&ys);
        Ok(Frame {
            x_min,
            x_max,
            y_min,
            y_max,
            log_y,
        })
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min).max(1e-300) * (W - 2.0 * MARGIN)
    }

    fn y(&self, y: f64) -> f64 {
        let y = if self.log_y {
            y.max(f64::MIN_POSITIVE).log10()
        } else {
            y
        };
        H - MARGIN - (y - self.y_min) / (self.y_max - self.y_min).max(1e-300) * (H - 2.0 * MARGIN)
    }
}

fn span(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}

fn header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
            "width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" ",
            "text-anchor=\"middle\">{title}</text>\n"
        ),
        w = W,
        h = H,
        tx = W / 2.0,
        title = title
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        concat!(
            "<line x1=\"{m:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
            "<line x1=\"{m:.1}\" y1=\"{t:.1}\" x2=\"{m:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
            "<text x=\"{cx:.1}\" y=\"{ly:.1}\" font-family=\"monospace\" font-size=\"12\" ",
            "text-anchor=\"middle\">{xl}</text>\n",
            "<text x=\"16\" y=\"{cy:.1}\" font-family=\"monospace\" font-size=\"12\" ",
            "text-anchor=\"middle\" transform=\"rotate(-90 16 {cy:.1})\">{yl}</text>\n",
        ),
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        cx = W / 2.0,
        cy = H / 2.0,
        ly = H - 16.0,
        xl = x_label,
        yl = y_label,
    );
    // corner tick labels
    let fmt = |v: f64, log: bool| {
        if log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    };
    let _ = write!(
        s,
        concat!(
            "<text x=\"{m:.1}\" y=\"{by:.1}\" font-family=\"monospace\" font-size=\"10\">{x0}</text>\n",
            "<text x=\"{r:.1}\" y=\"{by:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{x1}</text>\n",
            "<text x=\"{mx:.1}\" y=\"{b:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{y0}</text>\n",
            "<text x=\"{mx:.1}\" y=\"{ty:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{y1}</text>\n",
        ),
        m = MARGIN,
        by = H - MARGIN + 14.0,
        r = W - MARGIN,
        x0 = format!("{:.3}", frame.x_min),
        x1 = format!("{:.3}", frame.x_max),
        mx = MARGIN - 4.0,
        b = H - MARGIN,
        ty = MARGIN + 4.0,
        y0 = fmt(frame.y_min, frame.log_y),
        y1 = fmt(frame.y_max, frame.log_y),
    );
    s
}

fn polyline(frame: &Frame, points: &[(f64, f64)], color: &str) -> String {
    let mut path = String::from("<polyline fill=\"none\" stroke=\"");
    path.push_str(color);
    path.push_str("\" stroke-width=\"1.5\" points=\"");
    for (x, y) in points {
        let _ = write!(path, "{:.2},{:.2} ", frame.x(*x), frame.y(*y));
    }
    path.push_str("\"/>\n");
    path
}

/// A single line plot, optionally with a logarithmic y axis.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    log_y: bool,
) -> Result<String> {
    let frame = Frame::from_points(points, log_y)?;
    let mut svg = header(title);
    svg.push_str(&axes(&frame, x_label, y_label));
    svg.push_str(&polyline(&frame, points, "#1f77b4"));
    for (x, y) in points {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f77b4\"/>",
            frame.x(*x),
            frame.y(*y)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Empirical step CDF of `sample` overlaid with a reference CDF curve.
pub fn cdf_plot(
    title: &str,
    x_label: &str,
    sample: &[f64],
    reference: impl Fn(f64) -> f64,
) -> Result<String> {
    if sample.is_empty() {
        return Err(EcgError::EmptyInput("cdf plot with no data".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let mut steps: Vec<(f64, f64)> = Vec::with_capacity(2 * n);
    for (i, &x) in sorted.iter().enumerate() {
        steps.push((x, i as f64 / n as f64));
        steps.push((x, (i + 1) as f64 / n as f64));
    }
    let frame = Frame::from_points(&steps, false)?;
    let mut svg = header(title);
    svg.push_str(&axes(&frame, x_label, "cdf"));
    svg.push_str(&polyline(&frame, &steps, "#1f77b4"));
    let grid = 200;
    let curve: Vec<(f64, f64)> = (0..=grid)
        .map(|i| {
            let x = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / grid as f64;
            (x, reference(x))
        })
        .collect();
    svg.push_str(&polyline(&frame, &curve, "#d62728"));
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_deterministic_svg() {
        let pts = [(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)];
        let a = line_plot("t", "n", "c", &pts, true).unwrap();
        let b = line_plot("t", "n", "c", &pts, true).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("polyline"));
    }

    #[test]
    fn empty_plot_is_an_error() {
        assert!(line_plot("t", "x", "y", &[], false).is_err());
        assert!(cdf_plot("t", "x", &[], |_| 0.0).is_err());
    }

    #[test]
    fn cdf_plot_renders_two_curves() {
        let svg = cdf_plot("cdf", "x", &[0.5, 1.0, 2.0], |x| x / 3.0).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
