//! Command-line front end for the `jcstark` spectrum library.

pub mod checks;
pub mod config;
pub mod presets;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use config::ConfigLayer;
use run::RunError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

/// Physical spectrum of the Jaynes-Cummings model with Stark-shifting nearby levels.
///
/// Settings are applied in order: preset, config file, flags.
#[derive(Debug, Parser)]
#[command(name = "jcstark", version)]
pub struct Cli {
    /// Config file, `key = value` lines or a JSON object
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Figure preset, fig2a .. fig5d (or figNc-prose / figNd-prose)
    #[arg(long)]
    pub preset: Option<String>,
    /// vacuum | coherent | thermal | custom
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub nbar: Option<String>,
    /// Photon-number probabilities for a custom field, comma separated
    #[arg(long, value_name = "P0,P1,..")]
    pub probs: Option<String>,
    /// Atom-field detuning omega0 - omega
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Stark parameter, given directly
    #[arg(long, allow_hyphen_values = true, conflicts_with = "nearby")]
    pub chi: Option<String>,
    /// Nearby levels as absolute frequency and coupling pairs
    #[arg(long, value_name = "OMEGA:ETA,..")]
    pub nearby: Option<String>,
    /// Field frequency
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    /// Detector half-width
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true, value_name = "MIN:MAX:POINTS")]
    pub grid: Option<String>,
    /// probability | squared_literal
    #[arg(long)]
    pub weight_mode: Option<String>,
    /// off | verify | full
    #[arg(long)]
    pub oracle: Option<String>,
    /// Output path prefix
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<String>,
    /// Photon distribution tail tolerance
    #[arg(long)]
    pub tail_tol: Option<String>,
    /// Parameter sweep, axis in nbar | delta | chi | gamma
    #[arg(long, value_name = "AXIS=V1,V2,..")]
    pub sweep: Option<String>,
    /// Print the preset names and exit
    #[arg(long)]
    pub list_presets: bool,
}

impl Cli {
    pub fn flag_layer(&self) -> Result<ConfigLayer, RunError> {
        let mut layer = ConfigLayer::default();
        let flags = [
            ("preset", &self.preset),
            ("field", &self.field),
            ("nbar", &self.nbar),
            ("probs", &self.probs),
            ("delta", &self.delta),
            ("chi", &self.chi),
            ("nearby", &self.nearby),
            ("omega", &self.omega),
            ("lambda", &self.lambda),
            ("gamma", &self.gamma),
            ("grid", &self.grid),
            ("weight_mode", &self.weight_mode),
            ("oracle", &self.oracle),
            ("out", &self.out),
            ("tail_tol", &self.tail_tol),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                layer.set(key, v)?;
            }
        }
        Ok(layer)
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, RunError> {
    if cli.list_presets {
        for name in presets::names().iter().chain(&presets::prose_names()) {
            let _ = writeln!(out, "{name}");
        }
        return Ok(EXIT_OK);
    }
    let file = match &cli.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    let flags = cli.flag_layer()?;
    let layers = [&file, &flags];
    if let Some(spec) = &cli.sweep {
        let (axis, values) = run::parse_sweep(spec)?;
        let outcome = run::sweep(&layers, axis, &values)?;
        let summary = json!({
            "sweep": axis.name(),
            "values": outcome.values,
            "summary": outcome.summary.display().to_string(),
            "oracle_passed": outcome.oracle_passed(),
        });
        let _ = writeln!(out, "{summary}");
        return Ok(if outcome.oracle_passed() { EXIT_OK } else { EXIT_ORACLE });
    }
    let cfg = ConfigLayer::resolve_layers(&layers)?;
    let outcome = run::run(&cfg)?;
    let summary = json!({
        "files": outcome.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "asymmetry": outcome.computed.asymmetry,
        "peaks": outcome.computed.peaks.peaks.iter().map(|p| p.0).collect::<Vec<_>>(),
        "oracle_passed": outcome.report.as_ref().map(|r| r.passed),
    });
    let _ = writeln!(out, "{summary}");
    Ok(if outcome.oracle_passed() { EXIT_OK } else { EXIT_ORACLE })
}

/// Parses `args` (including the program name), runs, and returns the exit code.
/// Errors are written to `err` as one JSON object.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = writeln!(err, "{}", error_json("usage", e.to_string().trim()));
            return EXIT_INVALID;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(e.kind(), &e.to_string()));
            e.exit_code()
        }
    }
}
