//! Minimal built-in SVG line charts. Charts are rendered from CSV text alone,
//! never from in-memory simulation state, so any external tool can reproduce
//! them from the emitted files.

use crate::error::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Which two CSV series to plot against the sweep value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// `mean_coop_ratio` and `mean_defect_ratio`.
    Ratios,
    /// `mean_util_coop` and `mean_util_defect`.
    Utilities,
}

impl ChartKind {
    fn columns(self) -> [&'static str; 2] {
        match self {
            ChartKind::Ratios => ["mean_coop_ratio", "mean_defect_ratio"],
            ChartKind::Utilities => ["mean_util_coop", "mean_util_defect"],
        }
    }
}

fn column_index(header: &str, name: &str) -> Result<usize, CliError> {
    header
        .split(',')
        .position(|c| c == name)
        .ok_or_else(|| CliError::Io(format!("CSV is missing column {name:?}")))
}

fn parse_field(row: &str, line_no: usize, idx: usize) -> Result<f64, CliError> {
    row.split(',')
        .nth(idx)
        .and_then(|f| f.parse::<f64>().ok())
        .ok_or_else(|| CliError::Io(format!("CSV line {line_no}: bad numeric field {idx}")))
}

/// Render a two-series line chart from sweep CSV text.
pub fn render_chart(csv: &str, kind: ChartKind, title: &str) -> Result<String, CliError> {
    let mut lines = csv.lines();
    let header = lines.next().ok_or_else(|| CliError::Io("empty CSV".into()))?;
    let x_idx = column_index(header, "sweep_value")?;
    let [a_name, b_name] = kind.columns();
    let a_idx = column_index(header, a_name)?;
    let b_idx = column_index(header, b_name)?;

    let mut xs = Vec::new();
    let mut series_a = Vec::new();
    let mut series_b = Vec::new();
    for (line_no, row) in lines.enumerate() {
        if row.trim().is_empty() {
            continue;
        }
        xs.push(parse_field(row, line_no + 2, x_idx)?);
        series_a.push(parse_field(row, line_no + 2, a_idx)?);
        series_b.push(parse_field(row, line_no + 2, b_idx)?);
    }
    if xs.is_empty() {
        return Err(CliError::Io("CSV has no data rows".into()));
    }

    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&[series_a.as_slice(), series_b.as_slice()].concat());
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / x_span * plot_w;
    let py = |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / y_span) * plot_h;

    let polyline = |ys: &[f64], color: &str| {
        let points: Vec<String> =
            xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    // axes
    svg.push_str(&format!(
        "  <line x1=\"{l}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n  <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
    ));
    // axis extent labels
    svg.push_str(&format!(
        "  <text x=\"{l}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\">{x_min}</text>\n  <text x=\"{r:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{x_max}</text>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        y = HEIGHT - MARGIN_BOTTOM + 18.0,
    ));
    svg.push_str(&format!(
        "  <text x=\"{x:.1}\" y=\"{b:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{y_min}</text>\n  <text x=\"{x:.1}\" y=\"{t:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{y_max}</text>\n",
        x = MARGIN_LEFT - 6.0,
        b = HEIGHT - MARGIN_BOTTOM,
        t = MARGIN_TOP + 10.0,
    ));
    svg.push_str(&polyline(&series_a, "#1f77b4"));
    svg.push_str(&polyline(&series_b, "#d62728"));
    // legend
    svg.push_str(&format!(
        "  <rect x=\"{x}\" y=\"{y}\" width=\"12\" height=\"3\" fill=\"#1f77b4\"/>\n  <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{a_name}</text>\n",
        x = MARGIN_LEFT + 10.0,
        y = MARGIN_TOP + 8.0,
        tx = MARGIN_LEFT + 28.0,
        ty = MARGIN_TOP + 12.0,
    ));
    svg.push_str(&format!(
        "  <rect x=\"{x}\" y=\"{y}\" width=\"12\" height=\"3\" fill=\"#d62728\"/>\n  <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{b_name}</text>\n",
        x = MARGIN_LEFT + 10.0,
        y = MARGIN_TOP + 24.0,
        tx = MARGIN_LEFT + 28.0,
        ty = MARGIN_TOP + 28.0,
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
