//! Command-line surface.
//!
//! Exit codes: 0 success, 1 invariant failure (`check`), 2 usage or
//! configuration error. JSON output prints every float with 17 significant
//! digits, CSV with 12.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{
    convolve, convolve_quadrature, fiber_integrated_trace, kernel_trace, kernel_trace_quadrature,
    AlgebraElement,
};
use crate::character::{
    character_series, direct_trace_character, fixed_point_character, regularized_character,
    tail_bound,
};
use crate::check::{random_point_in_ball, run_checks, CheckConfig, Status};
use crate::error::Error;
use crate::multi_index::MultiIndex;
use crate::phase_space::{build_quadrature, ComplexPoint, PhaseSpaceConfig};
use crate::polarization::{
    annihilation_residual, annihilation_residual_of, evolve, ground_state_period_phase,
    ground_state_profile, maslov_phase, spectrum, PolarizedState,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "halfform",
    version,
    about = "Half-form quantization of the harmonic oscillator on C^n"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Complex dimension n.
    #[arg(long, global = true, default_value_t = 1)]
    pub n: usize,

    /// Action unit ħ; the fiber period is h = 2πħ.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,

    /// Fock cutoff: maximum total degree retained.
    #[arg(long, global = true, default_value_t = 6)]
    pub cutoff: usize,

    /// Gauss-Hermite points per real axis.
    #[arg(long = "quad-order", global = true, default_value_t = 40)]
    pub quad_order: usize,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Seed for every randomized sample.
    #[arg(long, global = true, default_value_t = 20260130)]
    pub seed: u64,

    /// Write the payload here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels ħ(|a| + n/2) for every |a| ≤ max-level.
    Spectrum {
        #[arg(long = "max-level", default_value_t = 3)]
        max_level: usize,
    },
    /// Fixed-point character against its truncated q-series.
    Character {
        /// Point of the open unit disk, e.g. `0.5` or `0.3+0.2i`.
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        q: String,
        #[arg(long = "max-level", default_value_t = 60)]
        max_level: usize,
        /// Also evaluate the fixed-point formula at this real time.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Also compute the trace of the truncated evolution operator.
        #[arg(long)]
        direct: bool,
    },
    /// Residual of the anti-holomorphic annihilation equation over a disk.
    GroundState {
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = crate::polarization::DEFAULT_FD_STEP)]
        step: f64,
    },
    /// Phase of the ground state after evolving for time t (default 2π).
    Maslov {
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
    },
    /// Convolve two algebra element files.
    Convolve {
        left: PathBuf,
        right: PathBuf,
        /// Use the quadrature backend instead of the matrix product.
        #[arg(long)]
        quadrature: bool,
    },
    /// Kernel and fiber-integrated traces of an element file.
    Trace {
        element: PathBuf,
        /// Also integrate the kernel diagonal on a grid.
        #[arg(long)]
        quadrature: bool,
    },
    /// Run the seeded invariant suite.
    Check,
}

/// Global parameters shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub hbar: f64,
    pub cutoff: usize,
    pub quad_order: usize,
    pub output_format: OutputFormat,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let cfg = Self {
            n: cli.n,
            hbar: cli.hbar,
            cutoff: cli.cutoff,
            quad_order: cli.quad_order,
            output_format: cli.format,
            seed: cli.seed,
        };
        if cfg.quad_order < 2 {
            return Err(CliError::Usage(format!(
                "--quad-order must be at least 2, got {}",
                cfg.quad_order
            )));
        }
        cfg.phase_space()?;
        Ok(cfg)
    }

    pub fn phase_space(&self) -> Result<PhaseSpaceConfig, CliError> {
        Ok(PhaseSpaceConfig::new(self.n, self.hbar)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Rendered payload plus the exit code it should produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub payload: String,
    pub code: i32,
}

impl Outcome {
    fn ok(payload: String) -> Self {
        Self {
            payload,
            code: EXIT_OK,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.command {
        Command::Spectrum { max_level } => cmd_spectrum(&cfg, *max_level).map(Outcome::ok),
        Command::Character {
            q,
            max_level,
            t,
            direct,
        } => {
            let q = parse_complex(q)?;
            cmd_character(&cfg, q, *max_level, *t, *direct).map(Outcome::ok)
        }
        Command::GroundState {
            radius,
            points,
            step,
        } => cmd_ground_state(&cfg, *radius, *points, *step).map(Outcome::ok),
        Command::Maslov { t } => cmd_maslov(&cfg, t.unwrap_or(2.0 * PI)).map(Outcome::ok),
        Command::Convolve {
            left,
            right,
            quadrature,
        } => {
            let a = read_element(left)?;
            let b = read_element(right)?;
            cmd_convolve(&cfg, &a, &b, *quadrature).map(Outcome::ok)
        }
        Command::Trace {
            element,
            quadrature,
        } => cmd_trace(&cfg, &read_element(element)?, *quadrature).map(Outcome::ok),
        Command::Check => cmd_check(&cfg),
    }
}

/// Parses `0.5`, `-0.2+0.3i` or `0.1i`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let trimmed = s.trim();
    trimmed
        .parse::<Complex64>()
        .ok()
        .filter(|q| q.re.is_finite() && q.im.is_finite())
        .ok_or_else(|| CliError::Usage(format!("cannot parse complex number '{trimmed}'")))
}

fn read_element(path: &PathBuf) -> Result<AlgebraElement, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(AlgebraElement::from_json(&text)?)
}

pub fn cmd_spectrum(cfg: &RunConfig, max_level: usize) -> Result<String, CliError> {
    let space = cfg.phase_space()?;
    let mut rows: Vec<(MultiIndex, f64)> = MultiIndex::up_to(space.n(), max_level)
        .into_iter()
        .map(|a| {
            let e = spectrum(&a, &space);
            (a, e)
        })
        .collect();
    // Equal energies are listed with the larger leading index first.
    rows.sort_by(|(a, ea), (b, eb)| ea.total_cmp(eb).then_with(|| b.cmp(a)));
    Ok(match cfg.output_format {
        OutputFormat::Json => render_json(&json!({
            "n": space.n(),
            "hbar": space.hbar(),
            "max_level": max_level,
            "rows": rows.iter().map(|(a, e)| json!({"a": a.entries(), "energy": e})).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => {
            let mut out = String::new();
            let header: Vec<String> = (1..=space.n()).map(|k| format!("a_{k}")).collect();
            writeln!(out, "{},energy", header.join(",")).unwrap();
            for (a, e) in &rows {
                let idx: Vec<String> = a.entries().iter().map(|k| k.to_string()).collect();
                writeln!(out, "{},{}", idx.join(","), fmt_csv(*e)).unwrap();
            }
            out
        }
    })
}

pub fn cmd_character(
    cfg: &RunConfig,
    q: Complex64,
    max_level: usize,
    t: Option<f64>,
    direct: bool,
) -> Result<String, CliError> {
    let space = cfg.phase_space()?;
    let n = space.n();
    let reg = regularized_character(q, n, max_level)?;
    let series = character_series(n, max_level)?;
    let bound = tail_bound(q.norm(), n, max_level);
    let direct = if direct {
        Some(direct_trace_character(q, max_level, &space)?)
    } else {
        None
    };
    let fixed = t
        .map(|t| fixed_point_character(Complex64::new(t, 0.0), n))
        .transpose()?;

    Ok(match cfg.output_format {
        OutputFormat::Json => {
            let mut record = json!({
                "n": n,
                "q": complex_json(q),
                "max_level": max_level,
                "closed": complex_json(reg.closed),
                "partial": complex_json(reg.partial),
                "abs_error": reg.abs_error(),
                "tail_bound": bound,
                "offset_num": n,
                "offset_den": 2,
                "degeneracies": series.coeffs(),
            });
            if let Some(d) = direct {
                record["direct_trace"] = complex_json(d);
            }
            if let (Some(t), Some(c)) = (t, fixed) {
                record["t"] = json!(t);
                record["fixed_point"] = complex_json(c);
            }
            render_json(&record)
        }
        OutputFormat::Csv => {
            let mut fields = vec![
                ("n", n.to_string()),
                ("q_re", fmt_csv(q.re)),
                ("q_im", fmt_csv(q.im)),
                ("max_level", max_level.to_string()),
                ("closed_re", fmt_csv(reg.closed.re)),
                ("closed_im", fmt_csv(reg.closed.im)),
                ("partial_re", fmt_csv(reg.partial.re)),
                ("partial_im", fmt_csv(reg.partial.im)),
                ("abs_error", fmt_csv(reg.abs_error())),
                ("tail_bound", fmt_csv(bound)),
            ];
            if let Some(d) = direct {
                fields.push(("direct_trace_re", fmt_csv(d.re)));
                fields.push(("direct_trace_im", fmt_csv(d.im)));
            }
            if let (Some(t), Some(c)) = (t, fixed) {
                fields.push(("t", fmt_csv(t)));
                fields.push(("fixed_point_re", fmt_csv(c.re)));
                fields.push(("fixed_point_im", fmt_csv(c.im)));
            }
            let degeneracies: Vec<String> = series.coeffs().iter().map(|g| g.to_string()).collect();
            fields.push(("degeneracies", degeneracies.join(" ")));
            render_csv_record(&fields)
        }
    })
}

pub fn cmd_ground_state(
    cfg: &RunConfig,
    radius: f64,
    points: usize,
    step: f64,
) -> Result<String, CliError> {
    let space = cfg.phase_space()?;
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(CliError::Usage(format!(
            "--radius must be non-negative, got {radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut max_residual: f64 = 0.0;
    for _ in 0..points {
        let z = random_point_in_ball(&mut rng, space.n(), radius);
        max_residual = max_residual.max(annihilation_residual(&z, step, &space)?);
    }
    let origin = ComplexPoint::zeros(space.n());
    let mut probe = vec![Complex64::new(0.0, 0.0); space.n()];
    probe[0] = Complex64::new(1.0, 0.0);
    let probe = ComplexPoint::new(probe)?;
    let hbar = space.hbar();
    let control = annihilation_residual_of(
        |w| Complex64::new((-w.norm_sqr() / hbar).exp(), 0.0),
        &probe,
        step,
        &space,
    )?;
    let at_origin = ground_state_profile(&origin, &space).re;
    Ok(match cfg.output_format {
        OutputFormat::Json => render_json(&json!({
            "n": space.n(),
            "hbar": hbar,
            "radius": radius,
            "points": points,
            "step": step,
            "max_residual": max_residual,
            "profile_at_origin": at_origin,
            "negative_control_residual": control,
        })),
        OutputFormat::Csv => render_csv_record(&[
            ("n", space.n().to_string()),
            ("hbar", fmt_csv(hbar)),
            ("radius", fmt_csv(radius)),
            ("points", points.to_string()),
            ("step", fmt_csv(step)),
            ("max_residual", fmt_csv(max_residual)),
            ("profile_at_origin", fmt_csv(at_origin)),
            ("negative_control_residual", fmt_csv(control)),
        ]),
    })
}

pub fn cmd_maslov(cfg: &RunConfig, t: f64) -> Result<String, CliError> {
    let space = cfg.phase_space()?;
    let n = space.n();
    let ground = PolarizedState::ground(&space, 0);
    let zero = MultiIndex::zero(n);
    let ratio = evolve(&ground, t).get(&zero) / ground.get(&zero);
    let period = ground_state_period_phase(&space);
    Ok(match cfg.output_format {
        OutputFormat::Json => render_json(&json!({
            "n": n,
            "t": t,
            "maslov_phase": maslov_phase(n),
            "ground_state_phase": complex_json(ratio),
            "period_phase": complex_json(period),
        })),
        OutputFormat::Csv => render_csv_record(&[
            ("n", n.to_string()),
            ("t", fmt_csv(t)),
            ("maslov_phase", maslov_phase(n).to_string()),
            ("ground_state_phase_re", fmt_csv(ratio.re)),
            ("ground_state_phase_im", fmt_csv(ratio.im)),
            ("period_phase_re", fmt_csv(period.re)),
            ("period_phase_im", fmt_csv(period.im)),
        ]),
    })
}

pub fn cmd_convolve(
    cfg: &RunConfig,
    a: &AlgebraElement,
    b: &AlgebraElement,
    quadrature: bool,
) -> Result<String, CliError> {
    let product = if quadrature {
        let grid = build_quadrature(a.config(), cfg.quad_order)?;
        convolve_quadrature(a, b, &grid)?
    } else {
        convolve(a, b)?
    };
    Ok(match cfg.output_format {
        OutputFormat::Json => render_json(&product.to_json_value()),
        OutputFormat::Csv => {
            let mut out = String::from("a,b,re,im\n");
            for (p, q, c) in product.entries() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    index_field(p),
                    index_field(q),
                    fmt_csv(c.re),
                    fmt_csv(c.im)
                )
                .unwrap();
            }
            out
        }
    })
}

pub fn cmd_trace(
    cfg: &RunConfig,
    a: &AlgebraElement,
    quadrature: bool,
) -> Result<String, CliError> {
    let kt = kernel_trace(a);
    let ft = fiber_integrated_trace(a);
    let qt = if quadrature {
        let grid = build_quadrature(a.config(), cfg.quad_order)?;
        Some(kernel_trace_quadrature(a, &grid)?)
    } else {
        None
    };
    Ok(match cfg.output_format {
        OutputFormat::Json => {
            let mut record = json!({
                "mode": a.mode(),
                "kernel_trace": complex_json(kt),
                "fiber_integrated_trace": complex_json(ft),
            });
            if let Some(q) = qt {
                record["quadrature_trace"] = complex_json(q);
            }
            render_json(&record)
        }
        OutputFormat::Csv => {
            let mut fields = vec![
                ("mode", a.mode().to_string()),
                ("kernel_trace_re", fmt_csv(kt.re)),
                ("kernel_trace_im", fmt_csv(kt.im)),
                ("fiber_integrated_trace_re", fmt_csv(ft.re)),
                ("fiber_integrated_trace_im", fmt_csv(ft.im)),
            ];
            if let Some(q) = qt {
                fields.push(("quadrature_trace_re", fmt_csv(q.re)));
                fields.push(("quadrature_trace_im", fmt_csv(q.im)));
            }
            render_csv_record(&fields)
        }
    })
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = run_checks(&CheckConfig {
        hbar: cfg.hbar,
        cutoff: cfg.cutoff,
        quad_order: cfg.quad_order,
        seed: cfg.seed,
    })?;
    let payload = match cfg.output_format {
        OutputFormat::Json => {
            render_json(&serde_json::to_value(&report).expect("report serializes"))
        }
        OutputFormat::Csv => {
            let mut out = String::from("name,status,max_error,tolerance,samples,note\n");
            for c in &report.checks {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Skipped => "skipped",
                };
                let err = c.max_error.map(fmt_csv).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},\"{}\"",
                    c.name,
                    status,
                    err,
                    fmt_csv(c.tolerance),
                    c.samples,
                    c.note.replace('"', "\"\"")
                )
                .unwrap();
            }
            out
        }
    };
    let code = if report.all_passed {
        EXIT_OK
    } else {
        EXIT_INVARIANT_FAILURE
    };
    Ok(Outcome { payload, code })
}

fn index_field(a: &MultiIndex) -> String {
    a.entries()
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn complex_json(c: Complex64) -> Value {
    json!({"re": c.re, "im": c.im})
}

fn render_csv_record(fields: &[(&str, String)]) -> String {
    let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
    let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}

/// Writes floats as `d.dddddddddddddddde±x` (17 significant digits).
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn render_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    serde::Serialize::serialize(value, &mut ser).expect("in-memory JSON write");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// `%.12g`-style formatting.
pub fn fmt_csv(value: f64) -> String {
    fmt_significant(value, 12)
}

fn fmt_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -5 || exponent >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exponent}");
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    trim_zeros(&format!("{value:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
