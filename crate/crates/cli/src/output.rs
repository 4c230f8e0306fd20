use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use irsvlc::Scenario;

use crate::error::{CliError, Result};
use crate::run::{RunOutput, SweepOutput};

pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "effective_config.toml";
pub const SVG_FILE: &str = "curves.svg";
pub const SWEEP_CSV_FILE: &str = "sweep.csv";
pub const SWEEP_JSON_FILE: &str = "sweep.json";

/// Curves as CSV rows sorted by density, scenario name and SNR.
pub fn curves_csv(out: &RunOutput) -> String {
    let mut rows = Vec::new();
    for run in &out.runs {
        for curve in &run.curves {
            for p in &curve.points {
                rows.push((run.density, curve.scenario.name(), p.snr_db, p.ser));
            }
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.total_cmp(&b.2)));
    let mut text = String::from("snr_db,scenario,blocker_density,ser\n");
    for (density, scenario, snr, ser) in rows {
        writeln!(text, "{snr},{scenario},{density},{ser:e}").unwrap();
    }
    text
}

pub fn sweep_csv(out: &SweepOutput) -> String {
    let mut text = String::from("value,scenario,blocker_density,required_snr_db\n");
    for row in &out.rows {
        let req = row.required_snr.db().map_or_else(|| "unreachable".to_owned(), |db| db.to_string());
        writeln!(text, "{},{},{},{req}", row.value, row.scenario, row.blocker_density).unwrap();
    }
    text
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::output(&path, e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary types serialize");
    s.push('\n');
    s
}

/// Writes CSV, JSON summary, the effective config and, if enabled, the SVG
/// chart. Returns the written paths.
pub fn write_run(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = vec![
        write(dir, CURVES_FILE, &curves_csv(out))?,
        write(dir, SUMMARY_FILE, &json(&out.summary()))?,
        write(dir, CONFIG_FILE, &out.config.to_toml_string()?)?,
    ];
    if out.config.output.svg {
        written.push(write(dir, SVG_FILE, &svg_chart(out))?);
    }
    Ok(written)
}

pub fn write_sweep(out: &SweepOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    Ok(vec![
        write(dir, SWEEP_CSV_FILE, &sweep_csv(out))?,
        write(dir, SWEEP_JSON_FILE, &json(out))?,
        write(dir, CONFIG_FILE, &out.config.to_toml_string()?)?,
    ])
}

fn scenario_color(s: Scenario) -> &'static str {
    match s {
        Scenario::LosOnly => "#d62728",
        Scenario::LosNlos => "#1f77b4",
        Scenario::LosNlosIrs => "#2ca02c",
    }
}

const DASHES: [&str; 4] = ["none", "7 4", "2 3", "8 3 2 3"];

/// Self-contained line chart of SER against average SNR with a logarithmic
/// SER axis.
pub fn svg_chart(out: &RunOutput) -> String {
    const W: f64 = 760.0;
    const H: f64 = 500.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 200.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;
    let grid = out.config.grid();
    let (x0, x1) = (grid.start_db, grid.stop_db.max(grid.start_db + grid.step_db));
    let min_ser = out
        .runs
        .iter()
        .flat_map(|r| &r.curves)
        .flat_map(|c| &c.points)
        .map(|p| p.ser)
        .filter(|&s| s > 0.0)
        .fold(1.0_f64, f64::min);
    let y_lo = min_ser.log10().floor().clamp(-8.0, -1.0);
    let y_hi = 0.0;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |ser: f64| {
        let l = if ser > 0.0 { ser.log10().max(y_lo) } else { y_lo };
        TOP + (y_hi - l) / (y_hi - y_lo) * (H - TOP - BOTTOM)
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    let (plot_w, plot_h) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#)
        .unwrap();
    for decade in (y_lo as i32)..=(y_hi as i32) {
        let y = py(10f64.powi(decade));
        writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{decade}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    let x_step = ((x1 - x0) / 8.0).max(grid.step_db).ceil();
    let mut x = x0;
    while x <= x1 + 1e-9 {
        let xp = px(x);
        writeln!(
            s,
            r##"<line x1="{xp:.2}" y1="{TOP}" x2="{xp:.2}" y2="{:.2}" stroke="#eee"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{x}</text>"##,
            H - BOTTOM,
            H - BOTTOM + 18.0
        )
        .unwrap();
        x += x_step;
    }
    let target = py(out.config.snr.target_ser);
    writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{target:.2}" x2="{:.2}" y2="{target:.2}" stroke="#888" stroke-dasharray="4 4"/>"##,
        W - RIGHT
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">average received SNR (dB)</text>"#,
        LEFT + plot_w / 2.0,
        H - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">SER</text>"#,
        TOP + plot_h / 2.0
    )
    .unwrap();

    let mut legend_y = TOP + 10.0;
    for (k, run) in out.runs.iter().enumerate() {
        let dash = DASHES[k % DASHES.len()];
        for curve in &run.curves {
            let color = scenario_color(curve.scenario);
            let points: Vec<String> =
                curve.points.iter().map(|p| format!("{:.2},{:.2}", px(p.snr_db), py(p.ser))).collect();
            writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" stroke-dasharray="{dash}" points="{}"/>"#,
                points.join(" ")
            )
            .unwrap();
            let lx = W - RIGHT + 12.0;
            writeln!(
                s,
                r#"<line x1="{lx}" y1="{legend_y}" x2="{:.2}" y2="{legend_y}" stroke="{color}" stroke-width="1.6" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}">{} λ={}</text>"#,
                lx + 28.0,
                lx + 34.0,
                legend_y + 4.0,
                curve.scenario,
                run.density
            )
            .unwrap();
            legend_y += 18.0;
        }
    }
    s.push_str("</svg>\n");
    s
}
