use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use qslbound_core::bounds::BoundCurve;

use crate::config::{OutputFormat, RunConfig, ScenarioParams};

pub const CSV_HEADER: &str = "T,mean_value,t_qslo,t_sqslo,r_bar,warnings_count";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn metadata(cfg: &RunConfig, curve: &BoundCurve) -> Vec<(String, String)> {
    let mut m = vec![
        ("generator".to_string(), format!("qslbound {}", env!("CARGO_PKG_VERSION"))),
        ("scenario".to_string(), cfg.kind.as_str().to_string()),
    ];
    if let Some(label) = &cfg.label {
        m.push(("label".into(), label.clone()));
    }
    match cfg.params {
        ScenarioParams::TwoQubit { p, theta, mu3 } => {
            m.push(("p".into(), num(p)));
            m.push(("theta".into(), num(theta)));
            m.push(("mu3".into(), num(mu3)));
        }
        ScenarioParams::Battery {
            omega,
            omega_drive,
            j,
            mode,
        } => {
            m.push(("mode".into(), mode.to_string()));
            m.push(("omega".into(), num(omega)));
            m.push(("Omega".into(), num(omega_drive)));
            m.push(("J".into(), num(j)));
        }
        ScenarioParams::None => {}
    }
    m.push(("t_max".into(), num(cfg.t_max)));
    m.push(("steps".into(), cfg.steps.to_string()));
    m.push(("warnings".into(), curve.warnings.len().to_string()));
    m
}

/// CSV text with `#` metadata lines, LF line endings and 17 significant digits.
pub fn render_csv(cfg: &RunConfig, curve: &BoundCurve) -> String {
    let mut s = String::new();
    for (k, v) in metadata(cfg, curve) {
        writeln!(s, "# {k}: {v}").unwrap();
    }
    for w in &curve.warnings {
        writeln!(s, "# warning: t={} {}", num(w.t), w.reason).unwrap();
    }
    writeln!(s, "{CSV_HEADER}").unwrap();
    for k in 0..curve.grid.len() {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            num(curve.grid.point(k)),
            num(curve.mean_values[k]),
            num(curve.t_qslo[k]),
            num(curve.t_sqslo[k]),
            num(curve.r_bar[k]),
            curve.warnings_up_to(k)
        )
        .unwrap();
    }
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn polyline(xs: &[f64], ys: &[f64], scale: f64, style: &str) -> String {
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let px = MARGIN + plot_w * x / scale;
            let py = HEIGHT - MARGIN - plot_h * y / scale;
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!(r#"<polyline fill="none" {style} points="{}"/>"#, points.join(" "))
}

/// Line chart of both bounds against `T` with the diagonal `t = T` dotted.
pub fn render_svg(cfg: &RunConfig, curve: &BoundCurve) -> String {
    let xs = curve.grid.points();
    let scale = cfg.t_max;
    let title = match &cfg.label {
        Some(l) => format!("{} {l}", cfg.kind.as_str()),
        None => cfg.kind.as_str().to_string(),
    };
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="32" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#, WIDTH / 2.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">T (0 to {})</text>"#, WIDTH / 2.0, HEIGHT - 16.0, num(scale)).unwrap();
    writeln!(s, "{}", polyline(&[0.0, scale], &[0.0, scale], scale, r#"stroke="gray" stroke-dasharray="2,4""#)).unwrap();
    writeln!(s, "{}", polyline(&xs, &curve.t_qslo, scale, r#"stroke="blue""#)).unwrap();
    writeln!(s, "{}", polyline(&xs, &curve.t_sqslo, scale, r#"stroke="red""#)).unwrap();
    let legend = [("T", "gray"), ("t_qslo", "blue"), ("t_sqslo", "red")];
    for (i, (name, color)) in legend.iter().enumerate() {
        let y = MARGIN + 20.0 + 18.0 * i as f64;
        writeln!(
            s,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="12" fill="{color}">{name}</text>"#,
            MARGIN + 10.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)
}

/// Writes the CSV and, if requested, the SVG next to it. Returns the paths
/// written.
pub fn emit_curves(cfg: &RunConfig, curve: &BoundCurve) -> io::Result<Vec<std::path::PathBuf>> {
    let mut written = vec![cfg.out.clone()];
    write_file(&cfg.out, &render_csv(cfg, curve))?;
    if cfg.format == OutputFormat::CsvSvg {
        let svg = cfg.out.with_extension("svg");
        write_file(&svg, &render_svg(cfg, curve))?;
        written.push(svg);
    }
    Ok(written)
}
