//! Command dispatcher behind the `mcmullen` binary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mcmullen_core::geometry::{center_record, spine_polyline, SpineOrder};
use mcmullen_core::render::{default_budget, render_plane, write_image, ImageFormat, Overlay, PlaneSpec, Viewport};
use mcmullen_core::verify::{fmt_real, quote, reports_to_text, run_suite, SuiteConfig, SuiteId, DEFAULT_SEED};
use mcmullen_core::Complex64;
use mcmullen_service::params::{
    check_budget, check_degree, check_px, check_width, parse_complex, plane_kind, ParamError, SliceArgs, SliceKind,
};
use mcmullen_service::{serve, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const LOCI_SCHEMA: &str =
    "# mcmullen-loci v1: one record per line; kinds center|spine|note; fields key=value; reals carry 17 significant digits";

/// Largest residual accepted by `centers --verify`.
pub const CENTER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "mcmullen", version, about = "Parameter slices, Julia sets and checks for z^n + a/z^n + b")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a parameter-space slice.
    RenderParam(RenderParam),
    /// Render the dynamical plane of one map.
    RenderJulia(RenderJulia),
    /// Centers a_k of the capture components of the fixed-critical slice.
    Centers {
        #[arg(long)]
        n: u32,
        /// Check the critical relation at every center.
        #[arg(long)]
        verify: bool,
    },
    /// Spine polyline, the locus where |v-| = 1 along the real symmetry.
    Spine {
        /// Degree, or `inf` for the limiting cardioid.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Run verification suites.
    Verify {
        /// Comma-separated suite ids, or `all`.
        #[arg(long, value_delimiter = ',', required = true)]
        suite: Vec<String>,
        #[arg(long, value_name = "LO:HI", value_parser = parse_range)]
        n_range: Option<(u32, u32)>,
        #[arg(long)]
        seed: Option<u64>,
        /// Append per-suite runtimes; output then varies between runs.
        #[arg(long)]
        timing: bool,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve /tile, /classify and /loci over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Origin allowed by CORS; any origin when omitted.
        #[arg(long)]
        origin: Option<String>,
    },
}

#[derive(Debug, Args)]
struct View {
    #[arg(long, value_name = "X,Y", default_value = "0,0", allow_hyphen_values = true, value_parser = complex_arg)]
    center: Complex64,
    #[arg(long, allow_hyphen_values = true)]
    width: f64,
    #[arg(long, default_value_t = 512)]
    px: usize,
    /// Iteration budget; grows with zoom when omitted.
    #[arg(long)]
    max_iter: Option<u32>,
    /// PNG, or PPM when the file name ends in .ppm.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated overlays: centers, spine, critical-values, zero.
    #[arg(long, value_delimiter = ',')]
    overlay: Vec<String>,
}

#[derive(Debug, Args)]
struct RenderParam {
    #[arg(long, default_value = "fixed-crit")]
    slice: String,
    #[arg(long)]
    n: u32,
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true, value_parser = complex_arg)]
    a: Option<Complex64>,
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true, value_parser = complex_arg)]
    b: Option<Complex64>,
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true, value_parser = complex_arg)]
    t: Option<Complex64>,
    #[command(flatten)]
    view: View,
}

#[derive(Debug, Args)]
struct RenderJulia {
    #[arg(long)]
    n: u32,
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true, value_parser = complex_arg)]
    a: Complex64,
    /// Defaults to the value that fixes the principal critical point.
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true, value_parser = complex_arg)]
    b: Option<Complex64>,
    #[command(flatten)]
    view: View,
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    Ok((lo, hi))
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
    Checks,
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `argv` (program name first) and runs the command. Records go to
/// `out`, diagnostics to `err`. Returns the process exit code: 2 for usage
/// errors, 1 for failed checks or I/O errors, 0 otherwise.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::RenderParam(r) => render_param(r, out),
        Command::RenderJulia(r) => render_julia(r, out),
        Command::Centers { n, verify } => centers(n, verify, out),
        Command::Spine { n, samples } => spine(&n, samples, out),
        Command::Verify {
            suite,
            n_range,
            seed,
            timing,
            out: path,
        } => verify(&suite, n_range, seed, timing, path, out),
        Command::Serve { port, host, origin } => run_server(SocketAddr::new(host, port), origin, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Checks) => EXIT_FAILURE,
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_FAILURE
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
    }
}

fn plane_spec(kind: SliceKind, args: &SliceArgs, view: &View) -> Result<(PlaneSpec, Viewport), Failure> {
    let plane = plane_kind(kind, args)?;
    let width = check_width(view.width)?;
    let px = check_px(view.px)?;
    let max_iter = match view.max_iter {
        Some(m) => check_budget(m)?,
        None => default_budget(width),
    };
    let overlays = view
        .overlay
        .iter()
        .map(|s| Overlay::parse(s.trim()).ok_or_else(|| Failure::Usage(format!("unknown overlay {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let vp = Viewport::square(view.center, width, px).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((PlaneSpec::new(plane, max_iter).with_overlays(&overlays), vp))
}

fn render_to_file(spec: &PlaneSpec, vp: &Viewport, path: &PathBuf, out: &mut dyn Write) -> Result<(), Failure> {
    let img = render_plane(spec, vp);
    let format = ImageFormat::from_path(path);
    let mut file = BufWriter::new(File::create(path)?);
    write_image(&img, format, &mut file).map_err(|e| Failure::Runtime(e.to_string()))?;
    file.flush()?;
    writeln!(
        out,
        "image path={} width={} height={} max_iter={}",
        quote(&path.display().to_string()),
        img.width(),
        img.height(),
        spec.max_iter
    )?;
    Ok(())
}

fn render_param(r: RenderParam, out: &mut dyn Write) -> Result<(), Failure> {
    let kind = SliceKind::parse(&r.slice)?;
    if kind == SliceKind::Julia {
        return Err(Failure::Usage("use render-julia for dynamical planes".into()));
    }
    let args = SliceArgs {
        n: r.n,
        a: r.a,
        b: r.b,
        t: r.t,
    };
    let (spec, vp) = plane_spec(kind, &args, &r.view)?;
    render_to_file(&spec, &vp, &r.view.out, out)
}

fn render_julia(r: RenderJulia, out: &mut dyn Write) -> Result<(), Failure> {
    let args = SliceArgs {
        n: r.n,
        a: Some(r.a),
        b: r.b,
        t: None,
    };
    let (spec, vp) = plane_spec(SliceKind::Julia, &args, &r.view)?;
    render_to_file(&spec, &vp, &r.view.out, out)
}

fn centers(n: u32, verify: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let n = check_degree(n)?;
    let mut all_pass = true;
    writeln!(out, "{LOCI_SCHEMA}")?;
    for k in 1..2 * n {
        let c = center_record(n, k).map_err(|e| Failure::Runtime(e.to_string()))?;
        write!(
            out,
            "center n={n} k={k} re={} im={} relation={}",
            fmt_real(c.a.re),
            fmt_real(c.a.im),
            quote(c.relation.label())
        )?;
        if verify {
            let pass = c.residual < CENTER_TOLERANCE;
            all_pass &= pass;
            write!(out, " residual={} tolerance={} pass={pass}", fmt_real(c.residual), fmt_real(CENTER_TOLERANCE))?;
        }
        writeln!(out)?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn spine(n: &str, samples: usize, out: &mut dyn Write) -> Result<(), Failure> {
    let order = if n == "inf" {
        SpineOrder::Infinite
    } else {
        let n = n
            .parse()
            .map_err(|_| Failure::Usage(format!("--n expects an integer or inf, got {n:?}")))?;
        SpineOrder::Finite(check_degree(n)?)
    };
    if samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let label = match order {
        SpineOrder::Infinite => "inf".to_string(),
        SpineOrder::Finite(n) => n.to_string(),
    };
    let points = spine_polyline(order, samples).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(out, "{LOCI_SCHEMA}")?;
    if points.len() < samples {
        let text = format!(
            "{} of {samples} angles have no principal-branch solution and are omitted",
            samples - points.len()
        );
        writeln!(out, "note n={label} text={}", quote(&text))?;
    }
    for s in points {
        writeln!(
            out,
            "spine n={label} theta={} re={} im={}",
            fmt_real(s.theta),
            fmt_real(s.a.re),
            fmt_real(s.a.im)
        )?;
    }
    Ok(())
}

fn verify(
    names: &[String],
    n_range: Option<(u32, u32)>,
    seed: Option<u64>,
    timing: bool,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut ids = Vec::new();
    for name in names {
        match name.trim() {
            "all" => ids.extend(SuiteId::ALL),
            s => ids.push(SuiteId::parse(s).map_err(|e| Failure::Usage(e.to_string()))?),
        }
    }
    let config = SuiteConfig {
        n_range,
        seed: seed.unwrap_or(DEFAULT_SEED),
        ..SuiteConfig::default()
    };
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        reports.push(run_suite(id, &config).map_err(|e| Failure::Usage(e.to_string()))?);
    }
    let text = reports_to_text(&reports, timing);
    match path {
        Some(p) => std::fs::write(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn run_server(addr: SocketAddr, origin: Option<String>, err: &mut dyn Write) -> Result<(), Failure> {
    let config = ServiceConfig {
        ui_origin: origin,
        ..ServiceConfig::default()
    };
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    writeln!(err, "listening on http://{addr}")?;
    runtime.block_on(serve(addr, config))?;
    Ok(())
}
