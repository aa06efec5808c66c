//! Command-line front end. Scalar results are printed as one JSON object per
//! run; bulk results go to CSV or PGM files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebraic::{compose_branch_condition, diagonal_critical_polynomial};
use crate::curves::{
    counterexample_scan, diagonal_limits, linspace, raster, sidecar_path, trace_isentrope,
    BisectOptions, Field, Preset, ScanOptions, Window, DEFAULT_DEPTH, DEFAULT_TOL,
};
use crate::exec::Execution;
use crate::symbolic::{symbols_to_string, GapSeq, KneadingSeq, Word};
use crate::tentmap::TentParams;
use crate::theta::{
    theta_eval_with, theta_grad_with, theta_hessian_with, Summation, ThetaSpec,
    COUNTEREXAMPLE_BETAS, MAX_TERMS,
};

#[derive(Debug, Parser)]
#[command(
    name = "skewtent",
    version,
    about = "Kneading theory and isentropes of skew tent maps"
)]
pub struct Cli {
    /// Evaluate sequentially even when built with the parallel feature.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kneading prefix K(alpha, beta).
    Knead {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
    /// Value of the auxiliary series with an error bound.
    Theta(PointArgs),
    /// Gradient of the auxiliary series.
    Grad(PointArgs),
    /// Hessian of the auxiliary series and its null slopes.
    Hessian(PointArgs),
    /// Trace an isentrope over an alpha grid as CSV.
    Isentrope {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        alpha_from: f64,
        #[arg(long)]
        alpha_to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagonal endpoints and tangent slopes for a finite word.
    Diagonal {
        #[arg(long)]
        seq: String,
    },
    /// Zeros of theta along a vertical, labeled by kneading order.
    Counterexample {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long)]
        alpha0: Option<f64>,
        #[arg(long)]
        beta_lo: Option<f64>,
        #[arg(long)]
        beta_hi: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Label roots against this sequence instead of the spec's own.
        #[arg(long)]
        target: Option<String>,
    },
    /// Parameter-plane raster as PGM (with a JSON sidecar) or CSV.
    Raster {
        #[arg(long, value_enum)]
        field: FieldKind,
        #[command(flatten)]
        source: SpecSource,
        /// alpha_min,alpha_max,beta_min,beta_max
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// WIDTHxHEIGHT
        #[arg(long)]
        size: String,
        /// Output path ending in .pgm or .csv.
        #[arg(long)]
        out: PathBuf,
        /// Prefix length for kneading_class.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Topological entropy from lap-number growth, in nats.
    Entropy {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 40)]
        depth: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FieldKind {
    ThetaValue,
    ThetaSign,
    KneadingClass,
}

/// Where the gap data comes from.
#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct SpecSource {
    /// Kneading sequence, e.g. RLC or RL(LR).
    #[arg(long)]
    pub seq: Option<String>,
    /// Gap text, e.g. gaps=6,5,0;tail=R.
    #[arg(long)]
    pub gaps: Option<String>,
    /// thex, k0815 or k0992.
    #[arg(long)]
    pub preset: Option<String>,
}

impl SpecSource {
    fn preset(&self) -> Result<Option<Preset>> {
        self.preset
            .as_deref()
            .map(|p| p.parse::<Preset>().map_err(Into::into))
            .transpose()
    }

    fn resolve(&self) -> Result<ThetaSpec> {
        if let Some(s) = &self.seq {
            let m: KneadingSeq = s.parse().with_context(|| format!("parsing --seq {s}"))?;
            return ThetaSpec::from_sequence(&m).with_context(|| format!("gaps of {m}"));
        }
        if let Some(g) = &self.gaps {
            let gaps: GapSeq = g.parse().with_context(|| format!("parsing --gaps {g}"))?;
            return ThetaSpec::new(gaps).context("gap spec");
        }
        if let Some(p) = self.preset()? {
            return Ok(p.spec()?);
        }
        bail!("one of --seq, --gaps or --preset is required")
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    /// Sum directly to this remainder instead of using closed-form tails.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl PointArgs {
    fn mode(&self) -> Summation {
        match self.tol {
            Some(tol) => Summation::Truncated {
                tol,
                max_terms: MAX_TERMS,
            },
            None => Summation::ClosedForm,
        }
    }
}

fn print_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("size must look like WIDTHxHEIGHT, got {s}"))?;
    Ok((w.parse().context("width")?, h.parse().context("height")?))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Knead { alpha, beta, depth } => {
            let p = TentParams::new(*alpha, *beta)?;
            print_json(
                out,
                &json!({
                    "alpha": alpha,
                    "beta": beta,
                    "depth": depth,
                    "kneading": symbols_to_string(&p.kneading_prefix(*depth)),
                }),
            )
        }
        Command::Theta(args) => {
            let spec = args.source.resolve()?;
            let v = theta_eval_with(&spec, args.alpha, args.beta, args.mode())?;
            print_json(
                out,
                &json!({
                    "alpha": args.alpha,
                    "beta": args.beta,
                    "value": v.value,
                    "error_bound": v.error_bound,
                    "terms_used": v.terms_used,
                }),
            )
        }
        Command::Grad(args) => {
            let spec = args.source.resolve()?;
            let g = theta_grad_with(&spec, args.alpha, args.beta, args.mode())?;
            print_json(
                out,
                &json!({
                    "alpha": args.alpha,
                    "beta": args.beta,
                    "d_alpha": g.d_alpha,
                    "d_beta": g.d_beta,
                    "error_bound": g.error_bound,
                }),
            )
        }
        Command::Hessian(args) => {
            let spec = args.source.resolve()?;
            let h = theta_hessian_with(&spec, args.alpha, args.beta, args.mode())?;
            let slopes = h.quadratic.slope_roots().ok().map(|(a, b)| [a, b]);
            print_json(
                out,
                &json!({
                    "alpha": args.alpha,
                    "beta": args.beta,
                    "d_alpha_alpha": h.quadratic.a,
                    "d_alpha_beta": h.quadratic.b,
                    "d_beta_beta": h.quadratic.c,
                    "error_bound": h.error_bound,
                    "slopes": slopes,
                }),
            )
        }
        Command::Isentrope {
            seq,
            alpha_from,
            alpha_to,
            steps,
            depth,
            tol,
            out: path,
        } => {
            let m: KneadingSeq = seq
                .parse()
                .with_context(|| format!("parsing --seq {seq}"))?;
            let alphas = linspace(*alpha_from, *alpha_to, *steps);
            let opts = BisectOptions {
                depth: *depth,
                tol: *tol,
            };
            let trace = trace_isentrope(&m, &alphas, opts, exec);
            let mut csv = String::from("alpha,beta,value\n");
            let mut failures = Vec::new();
            for (a, r) in alphas.iter().zip(&trace) {
                match r {
                    Ok(pt) => csv.push_str(&format!(
                        "{},{},{}\n",
                        pt.alpha,
                        pt.beta,
                        pt.residual_theta.unwrap_or(f64::NAN)
                    )),
                    Err(e) => {
                        csv.push_str(&format!("{a},NaN,NaN\n"));
                        failures.push(json!({"alpha": a, "error": e.to_string()}));
                    }
                }
            }
            match path {
                None => {
                    out.write_all(csv.as_bytes())?;
                    Ok(())
                }
                Some(p) => {
                    std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
                    let ok = trace
                        .iter()
                        .filter(|r| r.as_ref().is_ok_and(|p| p.kneading_ok))
                        .count();
                    print_json(
                        out,
                        &json!({
                            "out": p.display().to_string(),
                            "nodes": alphas.len(),
                            "kneading_ok": ok,
                            "failures": failures,
                        }),
                    )
                }
            }
        }
        Command::Diagonal { seq } => {
            let w: Word = seq
                .parse()
                .with_context(|| format!("parsing --seq {seq}"))?;
            let p = compose_branch_condition(&w)?;
            let q = diagonal_critical_polynomial(&p)?;
            let roots = diagonal_limits(&w, 1e-4)?;
            print_json(
                out,
                &json!({
                    "word": seq,
                    "polynomial": p.to_string(),
                    "critical_polynomial": q.to_string(),
                    "roots": roots,
                }),
            )
        }
        Command::Counterexample {
            source,
            alpha0,
            beta_lo,
            beta_hi,
            samples,
            target,
        } => {
            let preset = source.preset()?;
            let no_source = source.seq.is_none() && source.gaps.is_none() && preset.is_none();
            let preset = if no_source {
                Some(Preset::Counterexample)
            } else {
                preset
            };
            let spec = match preset {
                Some(p) => p.spec()?,
                None => source.resolve()?,
            };
            let is_counterexample = preset == Some(Preset::Counterexample);
            let alpha0 = alpha0
                .or(preset.map(Preset::alpha0))
                .ok_or_else(|| anyhow!("--alpha0 is required without a preset"))?;
            let beta_lo = beta_lo
                .or(is_counterexample.then_some(COUNTEREXAMPLE_BETAS[0]))
                .ok_or_else(|| anyhow!("--beta-lo is required"))?;
            let beta_hi = beta_hi
                .or(is_counterexample.then_some(COUNTEREXAMPLE_BETAS[2]))
                .ok_or_else(|| anyhow!("--beta-hi is required"))?;
            let target = target
                .as_deref()
                .map(str::parse::<KneadingSeq>)
                .transpose()
                .context("parsing --target")?;
            let opts = ScanOptions {
                samples: *samples,
                depth: DEFAULT_DEPTH,
                target: target.clone(),
            };
            let roots = counterexample_scan(&spec, alpha0, beta_lo, beta_hi, &opts, exec)?;
            let label = target.unwrap_or_else(|| spec.gaps().to_sequence());
            print_json(
                out,
                &json!({
                    "alpha0": alpha0,
                    "beta_lo": beta_lo,
                    "beta_hi": beta_hi,
                    "samples": samples,
                    "gaps": spec.gaps().to_string(),
                    "target": label.to_string(),
                    "roots": roots,
                }),
            )
        }
        Command::Raster {
            field,
            source,
            window,
            size,
            out: path,
            depth,
        } => {
            let window: Window = window.parse()?;
            let (w, h) = parse_size(size)?;
            let field = match field {
                FieldKind::ThetaValue => Field::ThetaValue(source.resolve()?),
                FieldKind::ThetaSign => Field::ThetaSign(source.resolve()?),
                FieldKind::KneadingClass => Field::KneadingClass { depth: *depth },
            };
            let grid = raster(&field, window, w, h, exec)?;
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut writer = BufWriter::new(file);
            let sidecar = match ext {
                "pgm" => {
                    let meta = grid.write_pgm(&mut writer)?;
                    let side = sidecar_path(path);
                    std::fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")
                        .with_context(|| format!("writing {}", side.display()))?;
                    Some(side.display().to_string())
                }
                "csv" => {
                    grid.write_csv(&mut writer)?;
                    None
                }
                other => bail!("unsupported raster extension {other:?}; use .pgm or .csv"),
            };
            writer.flush()?;
            print_json(
                out,
                &json!({
                    "out": path.display().to_string(),
                    "sidecar": sidecar,
                    "field": grid.field,
                    "width": w,
                    "height": h,
                    "classes": grid.legend.len(),
                }),
            )
        }
        Command::Entropy { alpha, beta, depth } => {
            let p = TentParams::new(*alpha, *beta)?;
            let laps = p.lap_numbers(*depth)?;
            print_json(
                out,
                &json!({
                    "alpha": alpha,
                    "beta": beta,
                    "depth": depth,
                    "entropy": p.entropy_lap(*depth)?,
                    "lap_number": laps.last().map(|l| l.to_string()),
                }),
            )
        }
    }
}

/// Parses `args` and runs; errors come back as a single-line JSON object.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> std::result::Result<(), String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return Ok(());
            }
            return Err(error_line(&e.to_string()));
        }
    };
    run(&cli, out).map_err(|e| error_line(&format!("{e:#}")))
}

fn error_line(msg: &str) -> String {
    json!({ "error": msg.trim() }).to_string()
}
