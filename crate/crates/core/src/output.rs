//! CSV tables and static SVG plots of sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::ChannelPath;
use crate::sweeps::{SweepParam, SweepResult};

pub const CSV_HEADER: [&str; 6] = [
    "frequency_hz",
    "path",
    "gain_db",
    "phase_deg",
    "param_name",
    "param_value",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Renders a result as CSV text, one row per record in result order.
pub fn csv_string(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        source: std::io::Error::other(e.to_string()),
    };
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for r in &result.records {
        w.write_record([
            r.point.frequency_hz.to_string(),
            r.path.label().to_string(),
            r.point.gain_db.to_string(),
            r.point.phase_deg.to_string(),
            result.param.label(),
            result.param.to_report_unit(r.value).to_string(),
        ])
        .map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| to_err(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the CSV table of `result` to `path`. An empty result is written as
/// a header-only file unless `strict` is set, in which case it is an error.
pub fn write_csv(result: &SweepResult, path: &Path, strict: bool) -> Result<()> {
    if strict && result.records.is_empty() {
        return Err(Error::Config("result is empty".into()));
    }
    fs::write(path, csv_string(result)?).map_err(io_err(path))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

fn path_colour(p: ChannelPath) -> &'static str {
    match p {
        ChannelPath::SS => "#1f77b4",
        ChannelPath::SM => "#ff7f0e",
        ChannelPath::MS => "#2ca02c",
        ChannelPath::MM => "#d62728",
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// SVG document plotting gain against the swept parameter, one line per
/// path. Frequency sweeps use a logarithmic x axis.
pub fn plot_svg(result: &SweepResult) -> Result<String> {
    if result.records.is_empty() {
        return Err(Error::Config("nothing to plot: result is empty".into()));
    }
    let log_x = result.param == SweepParam::Frequency;
    let xs: Vec<f64> = result
        .records
        .iter()
        .map(|r| result.param.to_report_unit(r.value))
        .collect();
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let (mut x0, mut x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(tx(v)), b.max(tx(v)))
        });
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let gains: Vec<f64> = result
        .records
        .iter()
        .map(|r| r.point.gain_db)
        .filter(|g| g.is_finite())
        .collect();
    let (gmin, gmax) = gains
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (gmin, gmax) = if gains.is_empty() {
        (-1.0, 0.0)
    } else if gmax - gmin < 1.0 {
        (gmin - 0.5, gmax + 0.5)
    } else {
        (gmin, gmax)
    };
    let step = nice_step(gmax - gmin);
    let (y0, y1) = ((gmin / step).floor() * step, (gmax / step).ceil() * step);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (tx(v) - x0) / (x1 - x0) * pw;
    let py = |g: f64| TOP + (y1 - g) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let mut y = y0;
    while y <= y1 + step * 1e-9 {
        let yy = py(y);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            yy + 4.0,
            (y * 1e6).round() / 1e6
        );
        y += step;
    }
    let ticks: Vec<f64> = if log_x {
        let (lo, hi) = (x0.floor() as i32, x1.ceil() as i32);
        (lo..=hi)
            .flat_map(|e| [1.0, 2.0, 5.0].map(|m| m * 10f64.powi(e)))
            .filter(|v| tx(*v) >= x0 - 1e-9 && tx(*v) <= x1 + 1e-9)
            .collect()
    } else {
        let st = nice_step(x1 - x0);
        let mut v = (x0 / st).ceil() * st;
        let mut out = Vec::new();
        while v <= x1 + st * 1e-9 {
            out.push(v);
            v += st;
        }
        out
    };
    for v in ticks {
        let xx = px(v);
        let label = if log_x && v >= 1e3 {
            format!("{}k", v / 1e3)
        } else {
            format!("{}", (v * 1e6).round() / 1e6)
        };
        let _ = writeln!(
            s,
            r##"<line x1="{xx:.2}" y1="{TOP}" x2="{xx:.2}" y2="{:.2}" stroke="#ddd"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        result.param.label()
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">gain_db</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, path) in result.paths().into_iter().enumerate() {
        let pts: Vec<String> = result
            .series(path)
            .iter()
            .filter(|r| r.point.gain_db.is_finite())
            .map(|r| {
                format!(
                    "{:.2},{:.2}",
                    px(result.param.to_report_unit(r.value)),
                    py(r.point.gain_db)
                )
            })
            .collect();
        let colour = path_colour(path);
        let _ = writeln!(
            s,
            r#"<polyline class="series" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 16.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            path.label()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the plot of `result` to `path`. With `strict`, an empty result is
/// an error; otherwise nothing is written and `Ok(false)` is returned.
pub fn emit_plot(result: &SweepResult, path: &Path, strict: bool) -> Result<bool> {
    if result.records.is_empty() {
        return if strict {
            Err(Error::Config("nothing to plot: result is empty".into()))
        } else {
            Ok(false)
        };
    }
    fs::write(path, plot_svg(result)?).map_err(io_err(path))?;
    Ok(true)
}
