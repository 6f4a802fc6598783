//! Library surface of the command-line front end, exposed so integration
//! tests can drive the suites and compare emitted artifacts byte for byte.

pub mod config;
pub mod suites;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use cocycle_lab::error::{LabError, Result};
use cocycle_lab::report::Report;

use config::LabConfig;
use suites::SuiteOutput;

/// Run one suite (or `all`) and write report, series and plots into `out`.
/// Returns the combined report and the list of files written.
pub fn run_and_write(
    suite: &str,
    cfg: &LabConfig,
    out: &Path,
    literal: bool,
) -> Result<(Report, Vec<PathBuf>)> {
    fs::create_dir_all(out)
        .map_err(|e| LabError::InvalidInput(format!("cannot create output dir: {e}")))?;
    let names: Vec<&str> = if suite == "all" {
        suites::SUITES.to_vec()
    } else {
        vec![suite]
    };
    let mut combined = Report::new();
    let mut written = Vec::new();
    for name in names {
        let SuiteOutput { report, plots } = suites::run_suite(name, cfg, literal)?;
        let report_path = out.join(format!("{name}_report.txt"));
        fs::write(&report_path, report.render())
            .map_err(|e| LabError::InvalidInput(format!("write failed: {e}")))?;
        written.push(report_path);
        for (series_name, _) in &report.series {
            if let Some(csv) = report.render_series(series_name) {
                let p = out.join(format!("{name}_{series_name}.csv"));
                fs::write(&p, csv)
                    .map_err(|e| LabError::InvalidInput(format!("write failed: {e}")))?;
                written.push(p);
            }
        }
        for (plot_name, content) in &plots {
            let p = out.join(plot_name);
            fs::write(&p, content)
                .map_err(|e| LabError::InvalidInput(format!("write failed: {e}")))?;
            written.push(p);
        }
        combined.extend(report);
    }
    Ok((combined, written))
}
