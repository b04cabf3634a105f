//! Batch front-end. Each subcommand writes its artifacts and a
//! `manifest.json` (config snapshot plus SHA-256 of every output) into
//! `<out>/<subcommand>/`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    cases_for_all_modes, command_grid, find_lobes, lobes_csv, rcs_table, rcs_table_csv,
    reference_angle_cases, squint_error, steering_sweep, sweep_csv, AnalysisConfig,
};
use crate::dynamics::synthesize_slow_time;
use crate::emfield::pattern_scan;
use crate::io::{fmt_g9, sha256_hex, write_atomic};
use crate::phasing::{profile_csv, quantize_one_bit, synthesize, ProfileMode, SteeringCommand};
use crate::scene::{load_scenario, PlaneWave};
use crate::specgram::{stft, WindowShape, WindowSpec};
use crate::{Error, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_COMPUTE: i32 = 5;

const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (unknown subcommand or flag, bad flag value)
  3  invalid scenario config
  4  I/O failure reading config or writing outputs
  5  invalid simulation argument (angle out of range, bad grid, ...)";

#[derive(Debug, Parser)]
#[command(name = "ris-lab", version, about = "RIS-assisted radar simulator", after_help = EXIT_CODES_HELP)]
pub struct Cli {
    /// Scenario config file (`key = value`); the built-in reference scene when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(
        long,
        global = true,
        env = "RIS_LAB_OUT",
        default_value = "ris-lab-out"
    )]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Steer {
    /// metal, one or dual
    #[arg(long, value_parser = parse_mode)]
    pub mode: ProfileMode,
    /// Incidence angle (deg).
    #[arg(long, allow_negative_numbers = true)]
    pub phi_i: f64,
    /// Desired reflection angle (deg).
    #[arg(long, allow_negative_numbers = true)]
    pub phi_d: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Far-field pattern and its lobes for one steering command.
    Pattern {
        #[command(flatten)]
        steer: Steer,
        /// Observation grid step (deg).
        #[arg(long, default_value_t = 0.1)]
        grid_step: f64,
        /// Lobe floor relative to the peak (dB).
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        floor_db: f64,
    },
    /// Strongest lobes while the commanded angle sweeps −90°..90°.
    Sweep {
        #[arg(long, value_parser = parse_mode)]
        mode: ProfileMode,
        #[arg(long, allow_negative_numbers = true)]
        phi_i: f64,
        /// Commanded-angle step (deg).
        #[arg(long, default_value_t = 2.0)]
        step: f64,
    },
    /// Forward/reverse RCS of every mode for a list of angle cases.
    RcsTable {
        /// Angle case `phi_i:phi_d`, repeatable. Defaults to -30:30, 0:30, 0:45.
        #[arg(long = "case", value_parser = parse_case, allow_hyphen_values = true)]
        cases: Vec<(f64, f64)>,
        /// Constant added to every RCS value (dB).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        calibration_offset_db: f64,
    },
    /// Slow-time return of the scenario targets and its spectrogram.
    Spectrogram {
        #[command(flatten)]
        steer: Steer,
        /// Window duration (s).
        #[arg(long, default_value_t = 0.1)]
        window_s: f64,
        /// Hop between frames (s).
        #[arg(long, default_value_t = 0.01)]
        hop_s: f64,
    },
    /// Beam squint of the realized lobes against the commanded direction.
    Squint {
        #[command(flatten)]
        steer: Steer,
    },
}

fn parse_mode(s: &str) -> Result<ProfileMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_case(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected phi_i:phi_d, got {s:?}"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad angle {v:?}"))
    };
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Vec<(String, String)>,
    pub config: String,
    pub outputs: Vec<OutputFile>,
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn new(out: &Path, subcommand: &str, scenario: &Scenario) -> Self {
        Self {
            dir: out.join(subcommand),
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                parameters: Vec::new(),
                config: scenario.to_config_string(),
                outputs: Vec::new(),
            },
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.manifest
            .parameters
            .push((key.to_string(), value.to_string()));
    }

    fn emit(&mut self, name: &str, contents: &str) -> crate::Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.manifest.outputs.push(OutputFile {
            name: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }

    fn finish(self) -> crate::Result<PathBuf> {
        write_manifest(&self.dir, &self.manifest)?;
        Ok(self.dir)
    }
}

/// Serializes the manifest next to the outputs it lists.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> crate::Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    json.push('\n');
    write_atomic(&dir.join("manifest.json"), json.as_bytes())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_COMPUTE,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Human-readable summaries go to `stdout`, a one-line
/// diagnostic to stderr on failure.
pub fn run<I, A>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            eprintln!("ris-lab: {}", line.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ris-lab: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> crate::Result<()> {
    let scenario: Scenario = match &cli.config {
        Some(path) => load_scenario(path)?,
        None => Scenario::reference(),
    };
    let k0 = scenario.carrier.k0();
    let ris = scenario.ris;
    let mut cfg = AnalysisConfig::<f64>::default();
    let say = |stdout: &mut dyn Write, line: String| {
        let _ = writeln!(stdout, "{line}");
    };

    let dir = match &cli.command {
        Command::Pattern {
            steer,
            grid_step,
            floor_db,
        } => {
            let cmd = SteeringCommand::new(steer.phi_i, steer.phi_d)?;
            let profile = synthesize(steer.mode, cmd, k0, ris.spacing_m, ris.element_count);
            let pattern = pattern_scan(
                &profile,
                &PlaneWave::unit(steer.phi_i)?,
                cfg.rho_m,
                &ris,
                k0,
                *grid_step,
            )?;
            let lobes = find_lobes(&pattern, *floor_db)?;

            let mut run = Run::new(&cli.out, "pattern", &scenario);
            steer_params(&mut run, steer);
            run.param("grid_step_deg", grid_step);
            run.param("floor_db", floor_db);
            run.emit("pattern.csv", &pattern.to_csv())?;
            run.emit("lobes.csv", &lobes_csv(&lobes))?;
            let ideal = synthesize(
                ProfileMode::OneBeam,
                cmd,
                k0,
                ris.spacing_m,
                ris.element_count,
            );
            let shown = match steer.mode {
                ProfileMode::DualBeamOneBit => quantize_one_bit(&ideal),
                _ => profile.clone(),
            };
            run.emit("profile.csv", &profile_csv(&ideal, &shown)?)?;
            for l in &lobes {
                say(
                    stdout,
                    format!(
                        "lobe {}: {} deg, {} dB",
                        l.rank,
                        fmt_g9(l.angle_deg),
                        fmt_g9(l.power_db)
                    ),
                );
            }
            run.finish()?
        }
        Command::Sweep { mode, phi_i, step } => {
            let grid = command_grid(*step)?;
            let rows = steering_sweep(*mode, *phi_i, &grid, &scenario, &cfg)?;
            let mut run = Run::new(&cli.out, "sweep", &scenario);
            run.param("mode", mode);
            run.param("phi_i_deg", phi_i);
            run.param("step_deg", step);
            run.emit("sweep.csv", &sweep_csv(&rows))?;
            say(stdout, format!("{} commanded directions", rows.len()));
            run.finish()?
        }
        Command::RcsTable {
            cases,
            calibration_offset_db,
        } => {
            cfg.calibration_offset_db = *calibration_offset_db;
            let angles = if cases.is_empty() {
                reference_angle_cases()
            } else {
                cases.clone()
            };
            let table = rcs_table(&scenario, &cases_for_all_modes(&angles), &cfg)?;
            let mut run = Run::new(&cli.out, "rcs-table", &scenario);
            run.param(
                "cases",
                angles
                    .iter()
                    .map(|(i, d)| format!("{}:{}", fmt_g9(*i), fmt_g9(*d)))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            run.param("calibration_offset_db", calibration_offset_db);
            run.emit("rcs_table.csv", &rcs_table_csv(&table))?;
            for e in &table {
                say(
                    stdout,
                    format!(
                        "{:>5} phi_i={:>4} phi_d={:>4}  sigma_f={} dB  sigma_r={} dB",
                        e.mode.as_str(),
                        fmt_g9(e.phi_i_deg),
                        fmt_g9(e.phi_d_deg),
                        fmt_g9(e.sigma_f_db),
                        fmt_g9(e.sigma_r_db)
                    ),
                );
            }
            run.finish()?
        }
        Command::Spectrogram {
            steer,
            window_s,
            hop_s,
        } => {
            let cmd = SteeringCommand::new(steer.phi_i, steer.phi_d)?;
            let signal = synthesize_slow_time(&scenario, steer.mode, cmd)?;
            let window = WindowSpec {
                duration_s: *window_s,
                hop_s: *hop_s,
                shape: WindowShape::Hann,
            };
            let spec = stft(&signal, &window)?;
            let mut run = Run::new(&cli.out, "spectrogram", &scenario);
            steer_params(&mut run, steer);
            run.param("window_s", window_s);
            run.param("hop_s", hop_s);
            run.emit("slow_time.csv", &signal.to_csv())?;
            run.emit("spectrogram.csv", &spec.to_csv())?;
            say(
                stdout,
                format!(
                    "{} samples, {} frames x {} bins",
                    signal.len(),
                    spec.times_s.len(),
                    spec.freqs_hz.len()
                ),
            );
            run.finish()?
        }
        Command::Squint { steer } => {
            let cmd = SteeringCommand::new(steer.phi_i, steer.phi_d)?;
            let profile = synthesize(steer.mode, cmd, k0, ris.spacing_m, ris.element_count);
            let pattern = pattern_scan(
                &profile,
                &PlaneWave::unit(steer.phi_i)?,
                cfg.rho_m,
                &ris,
                k0,
                cfg.grid_step_deg,
            )?;
            let lobes = find_lobes(&pattern, cfg.floor_db)?;
            let mut targets = vec![steer.phi_d];
            if steer.mode == ProfileMode::DualBeamOneBit && steer.phi_d != 0.0 {
                targets.push(-steer.phi_d);
            }
            let mut csv = String::from("target_deg,nearest_lobe_deg,squint_deg\n");
            for &target in &targets {
                let err = squint_error(&lobes, target)?;
                let nearest = lobes
                    .iter()
                    .map(|l| l.angle_deg)
                    .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
                    .expect("non-empty lobes");
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_g9(target),
                    fmt_g9(nearest),
                    fmt_g9(err)
                ));
                say(
                    stdout,
                    format!(
                        "target {} deg: lobe at {} deg, squint {} deg",
                        fmt_g9(target),
                        fmt_g9(nearest),
                        fmt_g9(err)
                    ),
                );
            }
            let mut run = Run::new(&cli.out, "squint", &scenario);
            steer_params(&mut run, steer);
            run.emit("squint.csv", &csv)?;
            run.emit("lobes.csv", &lobes_csv(&lobes))?;
            run.finish()?
        }
    };
    say(stdout, format!("wrote {}", dir.display()));
    Ok(())
}

fn steer_params(run: &mut Run, steer: &Steer) {
    run.param("mode", steer.mode);
    run.param("phi_i_deg", steer.phi_i);
    run.param("phi_d_deg", steer.phi_d);
}
