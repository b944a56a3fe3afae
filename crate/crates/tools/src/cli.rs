//! `texfm` command line. Exit status 0 on success, 1 on usage errors, 2 on
//! data errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use texfm_core::fixword::{parse_decimal, FixWord};
use texfm_core::optical::{OpticalParams, Ratio};
use texfm_core::pl::CharcodeFormat;
use texfm_core::tfm::emit_tfm;
use texfm_core::vf::emit_vpl;

use crate::manifest::parse_manifest;
use crate::ops::{self, stem, AfmRequest, EncFile};
use crate::runner::{run, RunOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "texfm", version, about = "TeX font metric conversions and cached font builds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a TFM file to a property list.
    Tftopl {
        #[arg(long, default_value = "default", value_parser = parse_charcode)]
        charcode_format: CharcodeFormat,
        /// Encoding file for the names format.
        #[arg(long)]
        enc: Option<PathBuf>,
        /// Resolve a coding scheme through a loaded vector, as SCHEME=VECTOR.
        #[arg(long, value_parser = parse_declare)]
        declare: Option<(String, String)>,
        input: PathBuf,
        /// Defaults to standard output.
        output: Option<PathBuf>,
    },
    /// Convert a property list to a TFM file.
    Pltotf { input: PathBuf, output: PathBuf },
    /// Convert AFM metrics to a TFM file.
    Afm2tfm {
        input: PathBuf,
        /// Re-encode with this encoding file.
        #[arg(short = 'T', long = "enc")]
        enc: Option<PathBuf>,
        /// Also write a virtual property list forwarding to the TFM.
        #[arg(short = 'v', long = "vpl")]
        vpl: Option<PathBuf>,
        /// Defaults to the AFM name with a .tfm extension.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Print the map line on standard output.
        #[arg(long)]
        map: bool,
        #[arg(long, default_value = "10", value_parser = parse_fix)]
        design: FixWord,
        /// Font file named in the map line.
        #[arg(long)]
        pfb: Option<String>,
        /// Use octal character codes in the VPL.
        #[arg(short = 'O')]
        octal: bool,
    },
    /// Convert a VPL file to VF and TFM files.
    Vptovf { input: PathBuf, vf: PathBuf, tfm: PathBuf },
    /// Convert VF and TFM files to a VPL file.
    Vftovp {
        #[arg(long, default_value = "default", value_parser = parse_charcode)]
        charcode_format: CharcodeFormat,
        vf: PathBuf,
        tfm: PathBuf,
        output: Option<PathBuf>,
    },
    /// Apply the EW transform to a TFM file.
    Optical(OpticalArgs),
    /// Set the slant to zero.
    Unslant { input: PathBuf, output: PathBuf },
    /// Build a virtual font from a composition plan.
    Compose {
        plan: PathBuf,
        /// Directory holding the base TFM files; defaults to the plan's.
        #[arg(long)]
        fonts_dir: Option<PathBuf>,
        #[arg(long)]
        vf: PathBuf,
        #[arg(long)]
        tfm: PathBuf,
        #[arg(long)]
        vpl: Option<PathBuf>,
    },
    /// Print the map line for an AFM file.
    Map {
        input: PathBuf,
        #[arg(long)]
        tfm_name: Option<String>,
        #[arg(short = 'T', long = "enc")]
        enc: Option<PathBuf>,
        #[arg(long)]
        pfb: Option<String>,
    },
    /// Run a build manifest.
    Build {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Defaults to .cache beside the manifest.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        verify: bool,
    },
    /// Summarize a font file.
    Inspect {
        input: PathBuf,
        /// For Type1 fonts: show the outline data of one glyph.
        #[arg(long)]
        glyph: Option<String>,
    },
}

#[derive(Args, Debug)]
struct OpticalArgs {
    #[arg(long, default_value = "ew", value_parser = ["ew", "ew2", "observed7pt", "identity"])]
    preset: String,
    #[arg(long, value_parser = parse_ratio)]
    vstem_scale: Option<Ratio>,
    #[arg(long, value_parser = parse_ratio)]
    width_scale: Option<Ratio>,
    /// Left side-bearing change in thousandths of an em.
    #[arg(long, allow_hyphen_values = true)]
    lsb: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    rsb: Option<i32>,
    /// Leave kern amounts unchanged.
    #[arg(long)]
    no_kern_scale: bool,
    /// Apply the transform twice.
    #[arg(long)]
    twice: bool,
    input: PathBuf,
    output: PathBuf,
}

fn parse_charcode(s: &str) -> Result<CharcodeFormat, String> {
    s.parse()
}

fn parse_declare(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| "expected SCHEME=VECTOR".into())
}

fn parse_fix(s: &str) -> Result<FixWord, String> {
    parse_decimal(s).map_err(|e| e.to_string())
}

fn parse_ratio(s: &str) -> Result<Ratio, String> {
    s.parse().map_err(|_| format!("expected a decimal or N/D ratio, found {s:?}"))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn path_str(p: &Path) -> Result<&str> {
    p.to_str().ok_or_else(|| anyhow!("{} is not valid UTF-8", p.display()))
}

fn load_enc(path: &Option<PathBuf>) -> Result<Option<EncFile>> {
    path.as_ref().map(|p| EncFile::read(path_str(p)?, &read(p)?)).transpose()
}

fn emit(out: &mut dyn Write, target: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match target {
        Some(p) => write(p, bytes),
        None => Ok(out.write_all(bytes)?),
    }
}

/// Runs one command. Returns the exit status; anything for standard output
/// goes to `out`, diagnostics to `err`.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
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
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "texfm: {e:#}");
            EXIT_DATA
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Tftopl {
            charcode_format,
            enc,
            declare,
            input,
            output,
        } => {
            let enc = load_enc(&enc)?;
            let declare = declare.as_ref().map(|(a, b)| (a.as_str(), b.as_str()));
            let pl = ops::tftopl(&read(&input)?, charcode_format, enc.as_ref(), declare)?;
            emit(out, &output, pl.as_bytes())?;
        }
        Command::Pltotf { input, output } => write(&output, &ops::pltotf(&read_text(&input)?)?)?,
        Command::Afm2tfm {
            input,
            enc,
            vpl,
            output,
            map,
            design,
            pfb,
            octal,
        } => {
            let output = output.unwrap_or_else(|| input.with_extension("tfm"));
            let enc = load_enc(&enc)?;
            let conv = ops::afm2tfm(
                &read_text(&input)?,
                &AfmRequest {
                    tfm_name: stem(path_str(&output)?).into(),
                    enc: enc.as_ref(),
                    design,
                    pfb,
                    virtual_font: vpl.is_some(),
                },
            )?;
            write(&output, &emit_tfm(&conv.metrics)?)?;
            if let (Some(path), Some((v, m))) = (&vpl, &conv.virtual_font) {
                let fmt = if octal { CharcodeFormat::Octal } else { CharcodeFormat::Default };
                write(path, emit_vpl(v, m, fmt)?.as_bytes())?;
            }
            if map {
                writeln!(out, "{}", texfm_core::afm::emit_map_line(&conv.map))?;
            }
        }
        Command::Vptovf { input, vf, tfm } => {
            let (v, t) = ops::vptovf(&read_text(&input)?)?;
            write(&vf, &v)?;
            write(&tfm, &t)?;
        }
        Command::Vftovp {
            charcode_format,
            vf,
            tfm,
            output,
        } => {
            let vpl = ops::vftovp(&read(&vf)?, &read(&tfm)?, charcode_format)?;
            emit(out, &output, vpl.as_bytes())?;
        }
        Command::Optical(a) => {
            let mut p: OpticalParams = ops::preset(&a.preset)?;
            if let Some(r) = a.vstem_scale {
                p.vstem_scale = r;
            }
            if let Some(r) = a.width_scale {
                p.width_scale = r;
            }
            p.lsb_delta = a.lsb.unwrap_or(p.lsb_delta);
            p.rsb_delta = a.rsb.unwrap_or(p.rsb_delta);
            p.scale_kerns = !a.no_kern_scale;
            let twice = a.twice || a.preset == "ew2";
            write(&a.output, &ops::optical(&read(&a.input)?, &p, twice)?)?;
        }
        Command::Unslant { input, output } => write(&output, &ops::unslant(&read(&input)?)?)?,
        Command::Compose { plan, fonts_dir, vf, tfm, vpl } => {
            let src = read_text(&plan)?;
            let parsed = crate::plan::parse_plan(&src)?;
            let dir = fonts_dir.unwrap_or_else(|| plan.parent().map(Path::to_path_buf).unwrap_or_default());
            let mut sources = BTreeMap::new();
            for name in parsed.font_order() {
                sources.insert(name.to_string(), read(&dir.join(format!("{name}.tfm")))?);
            }
            let (v, t, text) = ops::compose(&src, &sources, CharcodeFormat::Default)?;
            write(&vf, &v)?;
            write(&tfm, &t)?;
            if let Some(p) = vpl {
                write(&p, text.as_bytes())?;
            }
        }
        Command::Map { input, tfm_name, enc, pfb } => {
            let enc = load_enc(&enc)?;
            let conv = ops::afm2tfm(
                &read_text(&input)?,
                &AfmRequest {
                    tfm_name: tfm_name.unwrap_or_else(|| stem(path_str(&input).unwrap_or("font")).into()),
                    enc: enc.as_ref(),
                    design: FixWord::from_int(10),
                    pfb,
                    virtual_font: false,
                },
            )?;
            writeln!(out, "{}", texfm_core::afm::emit_map_line(&conv.map))?;
        }
        Command::Build {
            manifest,
            jobs,
            cache,
            dry_run,
            verify,
        } => {
            if jobs == 0 {
                writeln!(err, "texfm: --jobs must be at least 1")?;
                return Ok(EXIT_USAGE);
            }
            let parsed = parse_manifest(&read_text(&manifest)?).with_context(|| format!("in {}", manifest.display()))?;
            let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
            let opts = RunOptions {
                cache_dir: cache.unwrap_or_else(|| base.join(".cache")),
                jobs,
                dry_run,
                verify,
            };
            let report = run(&parsed, &base, &opts)?;
            writeln!(out, "{report}")?;
            if !report.success() {
                return Ok(EXIT_DATA);
            }
        }
        Command::Inspect { input, glyph } => {
            let summary = ops::inspect(path_str(&input)?, &read(&input)?, glyph.as_deref())?;
            out.write_all(summary.as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}
