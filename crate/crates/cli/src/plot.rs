//! Static SVG line chart drawn from report columns.

use crate::output::{PlotSpec, Report};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn tick_label(v: f64, log: bool) -> String {
    let x = if log { 10f64.powf(v) } else { v };
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-2) {
        format!("{x:.1e}")
    } else {
        format!("{x:.3}")
    }
}

pub fn svg(report: &Report, spec: &PlotSpec) -> Result<String, String> {
    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };
    let xs: Vec<f64> = report
        .series(&spec.x)
        .ok_or_else(|| format!("no numeric column {}", spec.x))?
        .into_iter()
        .map(tx)
        .collect();
    let mut lines = Vec::new();
    for y in &spec.ys {
        let ys: Vec<f64> = report.series(y).ok_or_else(|| format!("no numeric column {y}"))?.into_iter().map(ty).collect();
        lines.push((y.clone(), ys));
    }
    let pts = |(x, y): (f64, f64)| x.is_finite() && y.is_finite();
    let all: Vec<(f64, f64)> = lines.iter().flat_map(|(_, ys)| xs.iter().copied().zip(ys.iter().copied())).filter(|p| pts(*p)).collect();
    if all.is_empty() {
        return Err("nothing finite to plot".into());
    }
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">\n");
    s.push_str(&format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" points=\"{PAD},{PAD} {PAD},{} {},{}\"/>\n",
        H - PAD,
        W - PAD,
        H - PAD
    ));
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n", px(fx), H - PAD + 16.0, tick_label(fx, spec.log_x)));
        s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n", PAD - 6.0, py(fy) + 4.0, tick_label(fy, spec.log_y)));
    }
    s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n", W / 2.0, H - 12.0, spec.x));
    for (i, (name, ys)) in lines.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let p: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| pts((**x, **y)))
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        s.push_str(&format!("<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>\n", p.join(" ")));
        s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{c}\">{name}</text>\n", W - PAD - 100.0, PAD + 14.0 * (i as f64 + 1.0)));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
