//! Command-line front end for chromaharmony, plus the JSON wire format the
//! HTTP service shares.

pub mod config;
pub mod render;
pub mod sweep;
pub mod wire;

use chromaharmony::engine::{evaluate_palette, evaluate_palette_weighted};
use chromaharmony::generate::{generate_line_palette, GenHuePattern, GenSpec};
use chromaharmony::{Color, HarmonyParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use config::{resolve_params, ParamOverrides, PARAMS_ENV};
use render::Layout;
use wire::{parse_color, PaletteJson, ReportJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INHARMONIC: i32 = 2;
pub const EXIT_GENERATION_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "chromaharmony",
    version,
    about = "Evaluate and generate harmonic color palettes"
)]
pub struct Cli {
    /// Parameter file with `key = value` lines. Falls back to $CHROMAHARMONY_PARAMS.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether a list of colors is harmonic.
    Evaluate(EvaluateArgs),
    /// Generate a palette along a tone-plane line.
    Generate(GenerateArgs),
    /// Generation success and round-trip rates over a grid of lines, as CSV.
    Sweep(SweepArgs),
    /// Print the effective parameters.
    Params(ParamsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Ansi,
    Png,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Shorthand for --format json.
    #[arg(long)]
    pub json: bool,
    /// Write to a file instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Layout::Strip)]
    pub layout: Layout,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Colors as #RRGGBB or lch(L,c,h).
    pub colors: Vec<String>,
    /// Read colors from a file, one per line. `-` reads stdin.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// Per-color weights (e.g. area); colors are processed heaviest first.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Option<Vec<f64>>,
    #[command(flatten)]
    pub out: OutputArgs,
    #[command(flatten)]
    pub params: ParamOverrides,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Normal length of the line.
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Normal inclination in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    /// Number of colors.
    #[arg(long, short)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Force a hue pattern instead of sampling one.
    #[arg(long, value_parser = parse_gen_pattern)]
    pub pattern: Option<GenHuePattern>,
    #[command(flatten)]
    pub out: OutputArgs,
    #[command(flatten)]
    pub params: ParamOverrides,
}

fn parse_gen_pattern(s: &str) -> Result<GenHuePattern, String> {
    s.parse()
        .map_err(|_| format!("unknown pattern {s:?}; expected analog, opposite, triad or incomplete_triad"))
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Values of r: a number, a comma list, or start:end:step (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    pub r: String,
    /// Values of phi in degrees, same syntax as --r.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: String,
    #[arg(long, short, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamsFormat {
    Toml,
    Json,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long, value_enum, default_value_t = ParamsFormat::Toml)]
    pub format: ParamsFormat,
    #[command(flatten)]
    pub params: ParamOverrides,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn params_for(cli: &Cli, flags: &ParamOverrides) -> Result<HarmonyParams, Failure> {
    let env = std::env::var_os(PARAMS_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    Ok(resolve_params(cli.config.as_deref(), env.as_deref(), flags)?)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Evaluate(a) => evaluate(a, params_for(cli, &a.params)?, out, err),
        Command::Generate(a) => generate(a, params_for(cli, &a.params)?, out, err),
        Command::Sweep(a) => sweep::run_sweep(a, &params_for(cli, &a.params)?, out, err),
        Command::Params(a) => {
            let p = params_for(cli, &a.params)?;
            let full = ParamOverrides::from(&p);
            let text = match a.format {
                ParamsFormat::Toml => toml::to_string(&full)?,
                ParamsFormat::Json => serde_json::to_string_pretty(&full)? + "\n",
            };
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn read_tokens(path: &Path) -> Result<Vec<String>, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    }
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn emit(out_args: &OutputArgs, bytes: &[u8], out: &mut dyn Write) -> Result<(), Failure> {
    match &out_args.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure(format!("cannot write {}: {e}", path.display()))),
        None => Ok(out.write_all(bytes)?),
    }
}

fn evaluate(a: &EvaluateArgs, p: HarmonyParams, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut tokens = a.colors.clone();
    if let Some(path) = &a.file {
        tokens.extend(read_tokens(path)?);
    }
    if tokens.is_empty() {
        return Err(Failure("no colors given".into()));
    }
    let mut colors = Vec::with_capacity(tokens.len());
    for t in &tokens {
        let parsed = parse_color(t)?;
        if parsed.chroma_clamped {
            writeln!(err, "warning: {t} exceeds chroma 100 and was clamped")?;
        }
        colors.push(parsed.color);
    }
    let report = match &a.weights {
        Some(w) => evaluate_palette_weighted(&colors, w, &p)?,
        None => evaluate_palette(&colors, &p)?,
    };
    let json = ReportJson::from(&report);
    let ordered: Vec<Color> = report.per_color.iter().map(|d| d.color).collect();
    let bytes = match a.out.format() {
        Format::Json => (serde_json::to_string_pretty(&json)? + "\n").into_bytes(),
        Format::Text => render::report_text(&json, &ordered, false).into_bytes(),
        Format::Ansi => render::report_text(&json, &ordered, true).into_bytes(),
        Format::Png => render::png_bytes(&ordered, a.out.layout),
    };
    emit(&a.out, &bytes, out)?;
    Ok(if report.harmonic { EXIT_OK } else { EXIT_INHARMONIC })
}

fn generate(a: &GenerateArgs, p: HarmonyParams, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    if !a.r.is_finite() || !a.phi.is_finite() {
        return Err(Failure("r and phi must be finite".into()));
    }
    let spec = GenSpec {
        r: a.r,
        phi: a.phi,
        k: a.k,
        seed: a.seed,
        pattern_override: a.pattern,
    };
    let res = generate_line_palette(&spec, &p)?;
    let json = PaletteJson::new(&spec, &res);
    let bytes = match a.out.format() {
        Format::Json => Some((serde_json::to_string_pretty(&json)? + "\n").into_bytes()),
        Format::Text | Format::Ansi => {
            let mut s = String::new();
            if let (Some(pat), Some(h)) = (res.pattern_used, res.base_hue) {
                s.push_str(&format!("pattern: {} (base hue {h:.2})\n", pat.name()));
            }
            s.push_str(&render::palette_text(&res.colors, a.out.format() == Format::Ansi));
            Some(s.into_bytes())
        }
        Format::Png if res.is_success() => Some(render::png_bytes(&res.colors, a.out.layout)),
        Format::Png => None,
    };
    if let Some(bytes) = bytes {
        emit(&a.out, &bytes, out)?;
    }
    match res.failure {
        None => Ok(EXIT_OK),
        Some(f) => {
            writeln!(err, "generation failed: {}", f.reason())?;
            Ok(EXIT_GENERATION_FAILED)
        }
    }
}
