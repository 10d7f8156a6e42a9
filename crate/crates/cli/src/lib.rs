//! Command-line front end for `mes-topology`.
//!
//! Results go to stdout as JSON; traces and fringes go to CSV with `--output`.
//! Every number is printed with 12 significant digits.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mes_topology::evolution::{
    berry_phase_from_area, crossing_events, dynamical_phase, evolve_path, precession_demo, Axis,
    Trajectory, AXIS_NORM_TOL, DEFAULT_SAMPLES_PER_SEGMENT,
};
use mes_topology::optics::{
    compile_plates, fit_fringe, run_experiment, visibility_report, ExperimentConfig, FringeRecord,
    PhiRange, Placement,
};
use mes_topology::qstate::VertexLabel;
use mes_topology::topology::{classification, classify, standard_circuit, CircuitKind};
use serde_json::{json, Value};

pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Failure,
    Usage,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Usage => 2,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Library(mes_topology::Error),
    Io(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::Library(_) | CliError::Io(_) => ExitStatus::Failure,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "IoError: {m}"),
        }
    }
}

impl From<mes_topology::Error> for CliError {
    fn from(e: mes_topology::Error) -> Self {
        CliError::Library(e)
    }
}

/// Round to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap()
}

/// Shortest decimal that carries the 12-digit rounding; exponent form for
/// very small or very large magnitudes.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || (1e-5..1e16).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().unwrap())),
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_json).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        v => v,
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

// --- argument parsing ---

#[derive(Parser, Debug)]
#[command(name = "mestopo", version, about = "Topological phases of maximally entangled two-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the sixteen hypercube vertices.
    Vertices,
    /// Evolve a circuit and report closure, class, crossings and phases.
    Evolve {
        /// `plus`, `minus`, or a trajectory JSON file.
        #[arg(long)]
        circuit: CircuitArg,
        /// Samples per segment.
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_SEGMENT)]
        samples: usize,
        /// Write the sampled trace as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify a closed trajectory as plus or minus.
    Classify {
        #[arg(long)]
        file: PathBuf,
    },
    /// Scan the interferometer phase and report fringes and visibility.
    Fringes {
        #[arg(long, value_enum, default_value_t = PlacementArg::Folded)]
        placement: PlacementArg,
        /// `plus`, `minus`, or a trajectory JSON file; unused for reference.
        #[arg(long)]
        circuit: Option<CircuitArg>,
        #[arg(long, default_value_t = 101)]
        phi_steps: usize,
        /// Write the fringe records as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Wave-plate angles realising rotation about an axis for a time.
    CompilePlates {
        /// Unit axis as `x,y,z`.
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
        axis: Axis,
        #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
        time: f64,
    },
    /// Dynamical/geometric split for a precessing spin.
    Precession {
        #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlacementArg {
    Folded,
    Literal,
    Reference,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Folded => Placement::Folded,
            PlacementArg::Literal => Placement::Literal,
            PlacementArg::Reference => Placement::Reference,
        }
    }
}

#[derive(Debug, Clone)]
enum CircuitArg {
    Standard(CircuitKind),
    File(PathBuf),
}

impl std::str::FromStr for CircuitArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(kind) = s.parse::<CircuitKind>() {
            return Ok(CircuitArg::Standard(kind));
        }
        let path = PathBuf::from(s);
        check_readable(&path)?;
        Ok(CircuitArg::File(path))
    }
}

impl CircuitArg {
    fn label(&self) -> String {
        match self {
            CircuitArg::Standard(k) => k.to_string(),
            CircuitArg::File(p) => p.display().to_string(),
        }
    }

    fn load(&self) -> Result<Trajectory, CliError> {
        match self {
            CircuitArg::Standard(k) => Ok(standard_circuit(*k)),
            CircuitArg::File(p) => load_trajectory(p),
        }
    }
}

fn check_readable(path: &Path) -> Result<(), String> {
    fs::File::open(path)
        .map(|_| ())
        .map_err(|e| format!("cannot read '{}': {e}", path.display()))
}

fn load_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read '{}': {e}", path.display())))?;
    Ok(Trajectory::from_json(&text)?)
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts = s.split(',').map(parse_finite).collect::<Result<Vec<_>, _>>()?;
    let [x, y, z] = parts[..] else {
        return Err(format!("axis needs three components, got {}", parts.len()));
    };
    let norm = (x * x + y * y + z * z).sqrt();
    if (norm - 1.0).abs() > AXIS_NORM_TOL {
        return Err(format!("axis ({x}, {y}, {z}) is not a unit vector (norm {norm})"));
    }
    Axis::new(x, y, z).map_err(|e| e.to_string())
}

// --- commands ---

/// Write fringe records as CSV (`phi,p_ab,p_ac`). Checks the records first,
/// so an empty scan never touches the file.
pub fn render_fringes(records: &[FringeRecord], path: &Path) -> Result<(), CliError> {
    if records.is_empty() {
        return Err(mes_topology::Error::Domain("no fringe records to write".into()).into());
    }
    let mut out = String::from("phi,p_ab,p_ac\n");
    for r in records {
        out.push_str(&format!("{},{},{}\n", fmt_sig(r.phi), fmt_sig(r.p_ab), fmt_sig(r.p_ac)));
    }
    write_file(path, &out)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn vertices() -> Value {
    let rows: Vec<Value> = VertexLabel::all()
        .map(|l| {
            let v = l.vertex();
            json!({
                "label": to_json(&v.label),
                "pair": to_json(&v.pair),
                "state": to_json(&v.pair.to_mes()),
            })
        })
        .collect();
    json!({ "vertices": rows })
}

fn evolve(circuit: &CircuitArg, samples: usize, output: Option<&Path>) -> Result<Value, CliError> {
    let traj = circuit.load()?;
    let trace = evolve_path(&traj, samples)?;
    let crossings = crossing_events(&trace);
    let cls = classification(&traj);
    let z = trace.final_overlap();
    if let Some(path) = output {
        write_file(path, &trace.to_csv(fmt_sig))?;
    }
    Ok(json!({
        "circuit": circuit.label(),
        "samples_per_segment": samples,
        "final_overlap": [z.re, z.im],
        "closed": cls.closed,
        "class": to_json(&cls.class),
        "lift_endpoint": to_json(&cls.lift_endpoint),
        "parity": crossings.parity,
        "crossings": crossings.crossings,
        "tangential": crossings.tangential,
        "dynamical_phase": dynamical_phase(&trace),
        "trajectory": to_json(&traj),
    }))
}

fn classify_file(path: &Path) -> Result<Value, CliError> {
    let traj = load_trajectory(path)?;
    let class = classify(&traj)?;
    let cls = classification(&traj);
    Ok(json!({
        "class": to_json(&class),
        "parity": class.parity(),
        "lift_endpoint": to_json(&cls.lift_endpoint),
    }))
}

fn fringes(
    placement: Placement,
    circuit: Option<&CircuitArg>,
    steps: usize,
    output: Option<&Path>,
) -> Result<Value, CliError> {
    let traj = match (placement, circuit) {
        (Placement::Reference, _) => None,
        (_, Some(c)) => Some(c.load()?),
        (_, None) => return Err(CliError::Usage("--circuit is required for this placement".into())),
    };
    let config = ExperimentConfig::new(placement, traj, PhiRange::full_period(steps).values())?;
    let records = run_experiment(&config)?;
    // a scan too short to fit a full period still yields its records
    let report = visibility_report(&config, &records).ok();
    let fit = fit_fringe(&records).ok();
    let mut out = json!({
        "placement": to_json(&placement),
        "circuit": circuit.filter(|_| placement != Placement::Reference).map(|c| c.label()),
        "phi_steps": steps,
        "visibility": report.map(|r| r.visibility),
        "overlap_abs": config.interfering_overlap(),
        "fit": fit.map(|f| json!({ "offset": f.offset, "amplitude": f.amplitude, "phase": f.phase })),
    });
    match output {
        Some(path) => render_fringes(&records, path)?,
        None => out["records"] = to_json(&records),
    }
    Ok(out)
}

fn compile(axis: &Axis, time: f64) -> Result<Value, CliError> {
    Ok(to_json(&compile_plates(axis, time)?))
}

fn precession(theta: f64, steps: usize) -> Result<Value, CliError> {
    let p = precession_demo(theta, steps)?;
    Ok(json!({
        "theta": theta,
        "steps": steps,
        "dynamical": p.dynamical,
        "geometric": p.geometric,
        "total": p.total,
        "berry_from_area": berry_phase_from_area(theta),
    }))
}

fn execute(cmd: &Command) -> Result<Value, CliError> {
    match cmd {
        Command::Vertices => Ok(vertices()),
        Command::Evolve { circuit, samples, output } => evolve(circuit, *samples, output.as_deref()),
        Command::Classify { file } => classify_file(file),
        Command::Fringes { placement, circuit, phi_steps, output } => {
            fringes((*placement).into(), circuit.as_ref(), *phi_steps, output.as_deref())
        }
        Command::CompilePlates { axis, time } => compile(axis, *time),
        Command::Precession { theta, steps } => precession(*theta, *steps),
    }
}

fn one_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .first()
        .map(|l| l.to_string())
        .unwrap_or_default()
}

/// Parse `argv` (program name first), run the command, and write the JSON
/// result to `out` or a one-line diagnostic to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    ExitStatus::Success
                }
                _ => {
                    let _ = writeln!(err, "{}", one_line(&e.render().to_string()));
                    ExitStatus::Usage
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(value) => {
            let text = serde_json::to_string_pretty(&round_json(value)).expect("JSON renders");
            if writeln!(out, "{text}").is_err() {
                let _ = writeln!(err, "IoError: cannot write to standard output");
                return ExitStatus::Failure;
            }
            ExitStatus::Success
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", one_line(&e.to_string()));
            e.status()
        }
    }
}

/// [`run`] against the process's standard streams.
pub fn dispatch<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
