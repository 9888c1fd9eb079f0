//! `heyde`: batch front end over `heyde-core`.
//!
//! Exit codes: 0 success / property holds, 1 property violated or infeasible,
//! 2 invalid input.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heyde_core::finite_abelian::GroupAutomorphism;
use heyde_core::heyde::{default_probes, equation_residual, mc_symmetry_test, SGrid};
use heyde_core::io::{CaseFile, GenerateSpec};
use heyde_core::structure::{decompose, generate_instance, random_spec, rigidity_decision, InstanceSpec};
use heyde_core::theta::ThetaParams;
use heyde_core::{AmbientGroup, Error, Measure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

const DEFAULT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "heyde", version, about = "Heyde-type characterization checks on R x Z(2) x G")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Residual of the characteristic-function equation for a case (mu1, mu2, alpha).
    Check {
        case: PathBuf,
        /// Number of grid points per real coordinate.
        #[arg(long)]
        grid: Option<usize>,
        /// Half-width of the real grid.
        #[arg(long)]
        smax: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also run the Monte-Carlo symmetry test with this many samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a case file satisfying the equation; missing spec fields are drawn from the seed.
    Generate {
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Structural decomposition of a case.
    Decompose {
        case: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Membership of Theta parameters `{"sigma", "sigma_p", "m", "m_p", "kappa"}`.
    Theta { params: PathBuf },
    /// Whether the factorization `gamma * omega` of a case is unique.
    Rigidity { case: PathBuf },
    /// Monte-Carlo symmetry test of `L2 | L1`.
    Simulate {
        case: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the drawn samples of xi1 and xi2 as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Densities of a case measure on each coset, as CSV.
    DensityDump {
        case: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        /// Which measure of the case: 1 or 2.
        #[arg(long, default_value_t = 1)]
        measure: u8,
        #[arg(long, default_value_t = 401)]
        grid: usize,
        #[arg(long)]
        smax: Option<f64>,
    },
}

enum Failure {
    Violated(Value),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Hypothesis(_) | Error::Vanishing(_) | Error::NotADistribution(_) | Error::NotThetaShape(_) => {
                Failure::Violated(json!({ "error": e.to_string() }))
            }
            Error::Infeasible(v) => Failure::Violated(json!({ "violations": v })),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

/// Floats as `{:.16e}`: 17 significant digits, exact round trip.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

fn to_json_bytes<S: Serialize>(value: &S) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser).expect("reports serialize");
    out.push(b'\n');
    out
}

fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn to_value<S: Serialize>(v: &S) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn cmd_check(case: &Path, grid: Option<usize>, smax: Option<f64>, tol: f64, samples: Option<usize>, seed: u64) -> Outcome {
    let case: CaseFile = read_json(case)?;
    let alpha = case.alpha()?;
    let (mu1, mu2) = case.mu_pair()?;
    let default = SGrid::default_for(&mu1, &mu2);
    let grid = SGrid::new(smax.unwrap_or(default.half_width), grid.unwrap_or(default.points))?;
    let report = equation_residual(&mu1, &mu2, &alpha, &grid)?;
    let mut pass = report.residual <= tol && report.nonvanishing();
    let mut out = json!({
        "residual": report.residual,
        "tol": tol,
        "grid": to_value(&report.grid),
        "argmax": to_value(&report.argmax),
        "flags": report.flags,
    });
    if let Some(n) = samples {
        let probes = default_probes(&mu1, &mu2, &alpha);
        let mc = mc_symmetry_test(&mu1, &mu2, &alpha, n, &probes, seed)?;
        pass &= mc.pass;
        out["mc"] = to_value(&mc);
    }
    out["pass"] = json!(pass);
    Ok((out, pass))
}

fn default_generate_spec() -> GenerateSpec {
    GenerateSpec {
        group: AmbientGroup::with_orders(&[3]).expect("Z(3)"),
        a: -2.0,
        alpha_g: None,
        theta2: None,
        kappa1: None,
        omega2: None,
        vartheta: None,
        x2: None,
    }
}

fn cmd_generate(spec: Option<&Path>, seed: u64) -> Outcome {
    let spec = match spec {
        Some(p) => read_json(p)?,
        None => default_generate_spec(),
    };
    let alpha_g: GroupAutomorphism = spec.alpha_g()?;
    if spec.a == 0.0 || !spec.a.is_finite() {
        return Err(Failure::Violated(json!({ "violations": [format!("a must be finite and nonzero, got {}", spec.a)] })));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: InstanceSpec<f64> = random_spec(&mut rng, &spec.group, &alpha_g, spec.a);
    let full = spec.apply(base)?;
    let inst = generate_instance(&full)?;
    let case = CaseFile::from_pair(&full.group, &inst.alpha, &inst.mu1, &inst.mu2);
    Ok((to_value(&case), true))
}

fn cmd_decompose(case: &Path, tol: f64) -> Outcome {
    let case: CaseFile = read_json(case)?;
    let alpha = case.alpha()?;
    let (mu1, mu2) = case.mu_pair()?;
    let dec = decompose(&mu1, &mu2, &alpha, tol)?;
    Ok((json!({ "decomposition": to_value(&dec) }), true))
}

fn cmd_theta(params: &Path) -> Outcome {
    let p: ThetaParams<f64> = read_json(params)?;
    p.validate()?;
    let x = AmbientGroup::real_line_times_z2();
    let verdict = p.to_measure(&x)?.is_distribution(1e-12);
    let inside = p.is_in_theta();
    Ok((
        json!({
            "params": to_value(&p),
            "in_theta": inside,
            "membership": to_value(&p.membership()),
            "rho": p.rho().ok(),
            "distribution": to_value(&verdict),
        }),
        inside,
    ))
}

fn cmd_rigidity(case: &Path) -> Outcome {
    let case: CaseFile = read_json(case)?;
    let (gamma, omega) = case.gamma_omega()?;
    let r = rigidity_decision(&gamma, &omega)?;
    Ok((json!({ "rigidity": to_value(&r) }), true))
}

fn cmd_simulate(case: &Path, samples: usize, seed: u64, csv: Option<&Path>) -> Outcome {
    let case: CaseFile = read_json(case)?;
    let alpha = case.alpha()?;
    let (mu1, mu2) = case.mu_pair()?;
    let probes = default_probes(&mu1, &mu2, &alpha);
    let mc = mc_symmetry_test(&mu1, &mu2, &alpha, samples, &probes, seed)?;
    if let Some(path) = csv {
        let xs1 = mu1.sample(seed, samples)?;
        let xs2 = mu2.sample(seed.wrapping_add(1), samples)?;
        let rank = case.group.finite().rank();
        let mut text = String::from("j,t,m");
        for k in 0..rank {
            let _ = write!(text, ",g{k}");
        }
        text.push('\n');
        for (j, xs) in [(1, &xs1), (2, &xs2)] {
            for x in xs {
                let _ = write!(text, "{j},{:.16e},{}", x.t, x.m);
                for c in x.g.coords() {
                    let _ = write!(text, ",{c}");
                }
                text.push('\n');
            }
        }
        write_atomically(path, text.as_bytes()).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    }
    let pass = mc.pass;
    Ok((json!({ "mc": to_value(&mc) }), pass))
}

fn cmd_density_dump(case: &Path, csv: &Path, which: u8, points: usize, smax: Option<f64>) -> Outcome {
    let case: CaseFile = read_json(case)?;
    let spec = match which {
        1 => case.mu1.as_ref(),
        2 => case.mu2.as_ref(),
        _ => return Err(Failure::Invalid(format!("--measure must be 1 or 2, got {which}"))),
    }
    .ok_or_else(|| Failure::Invalid(format!("case file has no mu{which}")))?;
    let mu: Measure = spec.build(&case.group)?;
    if points < 2 {
        return Err(Failure::Invalid("--grid needs at least 2 points".into()));
    }
    let half = smax.unwrap_or_else(|| {
        let spread = mu.terms().iter().fold(0.0f64, |m, t| m.max(t.shift.abs() + 6.0 * (2.0 * t.sigma).sqrt()));
        spread.max(1.0)
    });
    let rank = case.group.finite().rank();
    let mut text = String::from("m");
    for k in 0..rank {
        let _ = write!(text, ",g{k}");
    }
    text.push_str(",t,density\n");
    let mut rows = 0usize;
    for (m, g) in mu.cosets() {
        for i in 0..points {
            let t = -half + 2.0 * half * i as f64 / (points - 1) as f64;
            let profile = mu.density_profile(m, &g, t);
            let _ = write!(text, "{m}");
            for c in g.coords() {
                let _ = write!(text, ",{c}");
            }
            let _ = writeln!(text, ",{t:.16e},{:.16e}", profile.density);
            rows += 1;
        }
    }
    write_atomically(csv, text.as_bytes()).map_err(|e| Failure::Invalid(format!("{}: {e}", csv.display())))?;
    Ok((json!({ "csv": csv.display().to_string(), "rows": rows, "half_width": half }), true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, seed, outcome) = match &cli.command {
        Command::Check { case, grid, smax, tol, samples, seed } => {
            ("check", samples.map(|_| *seed), cmd_check(case, *grid, *smax, *tol, *samples, *seed))
        }
        Command::Generate { spec, seed } => ("generate", Some(*seed), cmd_generate(spec.as_deref(), *seed)),
        Command::Decompose { case, tol } => ("decompose", None, cmd_decompose(case, *tol)),
        Command::Theta { params } => ("theta", None, cmd_theta(params)),
        Command::Rigidity { case } => ("rigidity", None, cmd_rigidity(case)),
        Command::Simulate { case, samples, seed, csv } => {
            ("simulate", Some(*seed), cmd_simulate(case, *samples, *seed, csv.as_deref()))
        }
        Command::DensityDump { case, csv, measure, grid, smax } => {
            ("density-dump", None, cmd_density_dump(case, csv, *measure, *grid, *smax))
        }
    };

    let (report, code) = match outcome {
        // `generate` emits the bare case file so it can be fed straight back in.
        Ok((body, _)) if name == "generate" => (body, 0u8),
        Ok((mut body, holds)) => {
            body["status"] = json!(if holds { "ok" } else { "violated" });
            (body, if holds { 0 } else { 1 })
        }
        Err(Failure::Violated(mut body)) => {
            body["status"] = json!("violated");
            (body, 1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("heyde {name}: {msg}");
            (json!({ "status": "invalid", "error": msg }), 2)
        }
    };
    let report = if name == "generate" && code == 0 {
        report
    } else {
        let mut full = json!({ "command": name, "version": env!("CARGO_PKG_VERSION") });
        if let Some(s) = seed {
            full["seed"] = json!(s);
        }
        if let (Value::Object(dst), Value::Object(src)) = (&mut full, report) {
            dst.extend(src);
        }
        full
    };

    let bytes = to_json_bytes(&report);
    if let Some(path) = &cli.json {
        if let Err(e) = write_atomically(path, &bytes) {
            eprintln!("heyde {name}: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if io::stdout().write_all(&bytes).is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
