//! Single runs, sweeps and their output files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use jcstark::{asymmetry_metric, peak_find, physical_spectrum, PeakSearch, SpectrumResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{run_checks, Report};
use crate::config::{fmt_f64, ConfigError, ConfigLayer, OracleMode, RunConfig, StarkSpec};

/// Peaks below this fraction of the maximum are not reported.
pub const PEAK_PROMINENCE: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numeric(#[from] jcstark::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(e) => e.kind(),
            RunError::Usage(_) => "usage",
            RunError::Numeric(_) => "numeric",
            RunError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => crate::EXIT_INVALID,
            RunError::Numeric(_) | RunError::Io { .. } => crate::EXIT_FAILURE,
        }
    }
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

#[derive(Debug, Clone)]
pub struct Computed {
    pub spectrum: SpectrumResult,
    /// `None` when the grid is not symmetric about zero.
    pub asymmetry: Option<f64>,
    pub peaks: PeakSearch,
}

pub fn compute(cfg: &RunConfig) -> Result<Computed, jcstark::Error> {
    let spectrum = physical_spectrum(&cfg.dist, &cfg.params, cfg.chi, cfg.weight_mode, &cfg.grid)?;
    let asymmetry = match asymmetry_metric(&spectrum) {
        Ok(a) => Some(a),
        Err(jcstark::Error::AsymmetricGrid { .. }) => None,
        Err(e) => return Err(e),
    };
    let peaks = peak_find(&spectrum, PEAK_PROMINENCE);
    Ok(Computed {
        spectrum,
        asymmetry,
        peaks,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), fmt_f64)
}

pub fn csv_text(cfg: &RunConfig, c: &Computed) -> String {
    let mut s = String::from("# jcstark physical spectrum\n");
    for (k, v) in cfg.echo() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    let _ = writeln!(s, "# asymmetry = {}", fmt_opt(c.asymmetry));
    let _ = writeln!(s, "# lines = {}", c.spectrum.lines.len());
    s.push_str("# columns: delta,S\n");
    for (d, v) in c.spectrum.grid.iter().zip(&c.spectrum.values) {
        let _ = writeln!(s, "{d:.16e},{v:.16e}");
    }
    s
}

#[derive(Serialize)]
struct LineRecord<'a> {
    label: &'a str,
    m: usize,
    center: f64,
    weight: f64,
}

pub fn lines_json(spectrum: &SpectrumResult) -> String {
    let records: Vec<LineRecord> = spectrum
        .lines
        .iter()
        .map(|l| LineRecord {
            label: l.transition.label(),
            m: l.m,
            center: l.center,
            weight: l.weight,
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("line records serialise") + "\n"
}

pub fn plot_script(cfg: &RunConfig, csv: &Path) -> String {
    let name = csv.file_name().map_or_else(|| csv.display().to_string(), |n| n.to_string_lossy().into_owned());
    let png = name.trim_end_matches(".csv").to_string() + ".png";
    let title = format!(
        "{} nbar={} Delta={} chi={}",
        cfg.field.name(),
        fmt_f64(cfg.dist.nbar()),
        fmt_f64(cfg.params.delta),
        fmt_f64(cfg.chi)
    );
    format!(
        "# gnuplot script; run from the directory containing {name}\n\
         set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set terminal pngcairo size 900,600\n\
         set output '{png}'\n\
         set xlabel 'delta = (nu - omega)/lambda'\n\
         set ylabel 'S(delta)'\n\
         set title '{title}'\n\
         plot '{name}' using 1:2 with lines lw 1.5 notitle\n"
    )
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub computed: Computed,
    pub report: Option<Report>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn oracle_passed(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.passed)
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let computed = compute(cfg)?;
    let csv = with_suffix(&cfg.out, ".csv");
    let lines = with_suffix(&cfg.out, ".lines.json");
    let plot = with_suffix(&cfg.out, ".gp");
    write_file(&csv, &csv_text(cfg, &computed))?;
    write_file(&lines, &lines_json(&computed.spectrum))?;
    write_file(&plot, &plot_script(cfg, &csv))?;
    let mut files = vec![csv, lines, plot];
    let report = (cfg.oracle != OracleMode::Off).then(|| run_checks(cfg, &computed.spectrum));
    if let Some(report) = &report {
        let path = with_suffix(&cfg.out, ".report.json");
        write_file(&path, &(serde_json::to_string_pretty(report).expect("report serialises") + "\n"))?;
        files.push(path);
    }
    Ok(RunOutcome {
        computed,
        report,
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Nbar,
    Delta,
    Chi,
    Gamma,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Nbar => "nbar",
            SweepAxis::Delta => "delta",
            SweepAxis::Chi => "chi",
            SweepAxis::Gamma => "gamma",
        }
    }

    fn apply(self, layer: &mut ConfigLayer, value: f64) {
        match self {
            SweepAxis::Nbar => layer.nbar = Some(value),
            SweepAxis::Delta => layer.delta = Some(value),
            SweepAxis::Chi => layer.stark = Some(StarkSpec::Chi(value)),
            SweepAxis::Gamma => layer.gamma = Some(value),
        }
    }
}

/// `axis=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(SweepAxis, Vec<f64>), RunError> {
    let (axis, values) = spec
        .split_once('=')
        .ok_or_else(|| RunError::Usage(format!("sweep `{spec}` is not axis=v1,v2,...")))?;
    let axis = match axis.trim() {
        "nbar" => SweepAxis::Nbar,
        "delta" => SweepAxis::Delta,
        "chi" => SweepAxis::Chi,
        "gamma" => SweepAxis::Gamma,
        other => return Err(RunError::Usage(format!("unknown sweep axis `{other}` (nbar|delta|chi|gamma)"))),
    };
    let values = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| RunError::Usage(format!("sweep value `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(RunError::Usage("sweep needs at least one value".into()));
    }
    Ok((axis, values))
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub points: Vec<RunOutcome>,
    pub summary: PathBuf,
}

impl SweepOutcome {
    pub fn oracle_passed(&self) -> bool {
        self.points.iter().all(RunOutcome::oracle_passed)
    }
}

pub fn point_prefix(out: &Path, axis: SweepAxis, index: usize) -> PathBuf {
    with_suffix(out, &format!("_{}_{index}", axis.name()))
}

pub fn summary_text(axis: SweepAxis, values: &[f64], points: &[RunOutcome]) -> String {
    let mut s = format!("# jcstark sweep\n# axis = {}\n# columns: value,peaks,asymmetry\n", axis.name());
    for (v, p) in values.iter().zip(points) {
        let peaks: Vec<String> = p.computed.peaks.peaks.iter().map(|(d, _)| format!("{d:.16e}")).collect();
        let asym = p.computed.asymmetry.map_or_else(|| "n/a".into(), |a| format!("{a:.16e}"));
        let _ = writeln!(s, "{v:.16e},{},{asym}", peaks.join(";"));
    }
    s
}

/// Runs every value concurrently; each point writes its own files under
/// `<out>_<axis>_<i>` and the summary goes to `<out>.sweep.csv`.
pub fn sweep(layers: &[&ConfigLayer], axis: SweepAxis, values: &[f64]) -> Result<SweepOutcome, RunError> {
    let base = ConfigLayer::resolve_layers(layers)?;
    let configs = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut point = ConfigLayer {
                out: Some(point_prefix(&base.out, axis, i)),
                ..ConfigLayer::default()
            };
            axis.apply(&mut point, v);
            let mut stack = layers.to_vec();
            stack.push(&point);
            ConfigLayer::resolve_layers(&stack)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let points = configs
        .par_iter()
        .map(run)
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let summary = with_suffix(&base.out, ".sweep.csv");
    write_file(&summary, &summary_text(axis, values, &points))?;
    Ok(SweepOutcome {
        axis,
        values: values.to_vec(),
        points,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_specs() {
        let (axis, values) = parse_sweep("chi=0,0.3, 0.6,0.9").unwrap();
        assert_eq!(axis, SweepAxis::Chi);
        assert_eq!(values, [0.0, 0.3, 0.6, 0.9]);
        assert!(parse_sweep("chi=").is_err());
        assert!(parse_sweep("lambda=1,2").is_err());
        assert!(parse_sweep("chi").is_err());
        assert!(parse_sweep("chi=1,x").is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = ConfigLayer::from_key_values("preset = fig2b\ngrid = -1:1:5").unwrap();
        let cfg = ConfigLayer::resolve_layers(&[&cfg]).unwrap();
        let text = csv_text(&cfg, &compute(&cfg).unwrap());
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 5);
        assert!(rows[0].starts_with("-1.0000000000000000e0,"));
        assert!(text.contains("# chi = 0.9\n"));
        assert!(text.contains("# columns: delta,S\n"));
    }

    #[test]
    fn asymmetric_grid_has_no_metric() {
        let cfg = ConfigLayer::from_key_values("grid = 0:2:5").unwrap().resolve().unwrap();
        assert!(compute(&cfg).unwrap().asymmetry.is_none());
    }

    #[test]
    fn suffixes() {
        assert_eq!(with_suffix(Path::new("out/a"), ".csv"), PathBuf::from("out/a.csv"));
        assert_eq!(point_prefix(Path::new("x"), SweepAxis::Gamma, 3), PathBuf::from("x_gamma_3"));
    }
}
