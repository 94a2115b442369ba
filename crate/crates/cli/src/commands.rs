use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lame_susy::lame::{BlochBasis, BlochPair, LameModel};
use lame_susy::parallel;
use lame_susy::spectral::{band_structure, schrodinger_residual};
use lame_susy::susy::{defect_bound_state, PartnerKind, PartnerPotential, SeedSpec};
use lame_susy::verify::{self, Check, Suite, VerifyConfig};
use lame_susy::{Complex64, Error};

use crate::output::{format_f64, SampledCurve};
use crate::{
    BandEdgesArgs, BlochArgs, FigureArgs, FigureName, OutputArgs, PartnerArgs, ReportFormat, SampleArgs, SuiteArg,
    VerifyArgs, EXIT_SINGULAR, EXIT_UNSUPPORTED, EXIT_USAGE, EXIT_VERIFY, NORMALIZATION,
};

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnsupportedModel { .. } => EXIT_UNSUPPORTED,
            Error::NodalSeed(_) | Error::SingularTransformation(_) | Error::AboveGroundState { .. } => EXIT_SINGULAR,
            _ => EXIT_USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Verification tolerance scale from `LAME_SUSY_TOL`, default 1.
pub fn tolerance_scale() -> CliResult<f64> {
    match std::env::var("LAME_SUSY_TOL") {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            _ => Err(CliError::usage(format!("LAME_SUSY_TOL must be a positive number, got '{s}'"))),
        },
    }
}

fn complex_str(z: Complex64) -> String {
    format!("{}{}i", format_f64(z.re), if z.im < 0.0 { format_f64(z.im) } else { format!("+{}", format_f64(z.im)) })
}

fn common_metadata(curve: &mut SampledCurve, command: &str, model: &LameModel) {
    curve.meta("command", command);
    curve.meta("version", env!("CARGO_PKG_VERSION"));
    curve.meta("m", model.m);
    curve.meta("ell", model.ell);
    curve.meta("k2", format_f64(model.k2()));
    curve.meta("normalization", NORMALIZATION);
    curve.meta("period", format_f64(model.period()));
}

fn auxiliary_metadata(curve: &mut SampledCurve, basis: &BlochBasis) {
    let pts: Vec<String> = basis.auxiliary.points.iter().map(|&p| complex_str(p)).collect();
    curve.meta("auxiliary_points", pts.join("; "));
    curve.meta("degenerate", basis.degenerate);
}

fn emit(curve: &SampledCurve, out: &OutputArgs) -> CliResult<()> {
    match &out.output {
        Some(path) => write_to(path, |w| curve.write(out.format, w)),
        None => curve.write(out.format, io::stdout().lock()).map_err(Into::into),
    }
}

fn write_to(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn sample_grid(model: &LameModel, s: &SampleArgs) -> CliResult<Vec<f64>> {
    let k = model.modulus.big_k;
    let a = s.x_min.unwrap_or(-4.0 * k);
    let b = s.x_max.unwrap_or(4.0 * k);
    if s.samples < 2 {
        return Err(CliError::usage("--samples must be at least 2"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(CliError::usage(format!("need x-min < x-max, got {a} and {b}")));
    }
    Ok(grid(a, b, s.samples))
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn sample<F>(xs: &[f64], f: F) -> CliResult<Vec<f64>>
where
    F: Fn(f64) -> lame_susy::Result<f64> + Sync + Send,
{
    parallel::map(xs, |&x| f(x)).into_iter().collect::<lame_susy::Result<Vec<_>>>().map_err(Into::into)
}

pub fn band_edges(args: &BandEdgesArgs) -> CliResult<SampledCurve> {
    let model = LameModel::new(args.model.m, args.model.ell, args.model.k2)?;
    let analytic = model.band_edges()?;
    let top = analytic[analytic.len() - 1];
    let energies = grid(analytic[0] - 1.0, top + 3.0, 800);
    let v = |x: f64| model.potential(x);
    let bs = band_structure(&v, model.period(), &energies)?;
    if bs.edges.len() != analytic.len() {
        return Err(CliError::usage(format!(
            "discriminant located {} edges, expected {}: {:?}",
            bs.edges.len(),
            analytic.len(),
            bs.edges
        )));
    }
    let deviation: Vec<f64> = analytic.iter().zip(&bs.edges).map(|(a, b)| (a - b).abs()).collect();
    let mut curve = SampledCurve::default();
    common_metadata(&mut curve, "band-edges", &model);
    curve.meta("finite_bands", bs.finite_bands());
    curve.meta("finite_gaps", bs.finite_gaps());
    curve.meta("max_deviation", format_f64(deviation.iter().copied().fold(0.0, f64::max)));
    for w in &bs.warnings {
        curve.meta("warning", w);
    }
    curve.push_column("index", (0..analytic.len()).map(|i| i as f64).collect());
    curve.push_column("analytic", analytic);
    curve.push_column("numeric", bs.edges.clone());
    curve.push_column("deviation", deviation);
    Ok(curve)
}

pub fn bloch(args: &BlochArgs) -> CliResult<SampledCurve> {
    let model = LameModel::new(args.model.m, args.model.ell, args.model.k2)?;
    let xs = sample_grid(&model, &args.sample)?;
    let basis = BlochBasis::new(&model, args.energy)?;
    // at a real node of psi the log-derivative has a pole; keep psi, mark the rest NaN
    let pairs = parallel::map(&xs, |&x| match basis.pair(x) {
        Err(Error::PoleProximity { .. }) => Ok(BlochPair {
            x,
            psi1: basis.first.value(x),
            psi2: basis.second.value(x),
            dlog1: Complex64::new(f64::NAN, f64::NAN),
            dlog2: Complex64::new(f64::NAN, f64::NAN),
            wronskian: if basis.degenerate { Complex64::new(0.0, 0.0) } else { Complex64::new(f64::NAN, f64::NAN) },
            degenerate: basis.degenerate,
        }),
        other => other,
    })
    .into_iter()
    .collect::<lame_susy::Result<Vec<_>>>()?;
    let nodes: Vec<String> = pairs.iter().filter(|p| p.dlog1.re.is_nan()).map(|p| format_f64(p.x)).collect();

    let t = model.period();
    let period_xs: Vec<f64> = (0..64).map(|i| t * (i as f64 + 0.5) / 64.0).collect();
    let v = |x: f64| model.potential(x);
    let h = 5e-3 * t;
    let residual = [&basis.first, &basis.second]
        .iter()
        .map(|sol| schrodinger_residual(&|x| sol.value(x), &v, args.energy, &period_xs, h))
        .fold(0.0, f64::max);

    let mut curve = SampledCurve::default();
    common_metadata(&mut curve, "bloch", &model);
    curve.meta("energy", format_f64(args.energy));
    curve.meta("etilde", format_f64(basis.first.etilde));
    auxiliary_metadata(&mut curve, &basis);
    curve.meta("multiplier", complex_str(basis.first.multiplier()));
    curve.meta("discriminant", format_f64(basis.discriminant()));
    curve.meta("residual", format_f64(residual));
    if !nodes.is_empty() {
        curve.meta("nodes", nodes.join("; "));
    }

    curve.push_column("x", xs.clone());
    curve.push_column("V", xs.iter().map(|&x| model.potential(x)).collect());
    type Part = fn(&BlochPair) -> Complex64;
    let parts: [(&str, Part); 5] = [
        ("psi1", |p| p.psi1),
        ("psi2", |p| p.psi2),
        ("dlog1", |p| p.dlog1),
        ("dlog2", |p| p.dlog2),
        ("wronskian", |p| p.wronskian),
    ];
    for (name, get) in parts {
        curve.push_column(&format!("{name}_re"), pairs.iter().map(|p| get(p).re).collect());
        curve.push_column(&format!("{name}_im"), pairs.iter().map(|p| get(p).im).collect());
    }
    Ok(curve)
}

pub fn partner(args: &PartnerArgs) -> CliResult<SampledCurve> {
    let model = LameModel::new(args.model.m, args.model.ell, args.model.k2)?;
    let xs = sample_grid(&model, &args.sample)?;
    partner_curve(&model, args.epsilon, args.lambda, args.allow_unsafe, &xs, "partner")
}

fn partner_curve(
    model: &LameModel,
    epsilon: f64,
    lambda: f64,
    allow_unsafe: bool,
    xs: &[f64],
    command: &str,
) -> CliResult<SampledCurve> {
    let seed = SeedSpec::new(model, epsilon, lambda, allow_unsafe)?;
    let range = (xs[0], xs[xs.len() - 1]);
    let mut curve = SampledCurve::default();
    common_metadata(&mut curve, command, model);
    curve.meta("epsilon", format_f64(epsilon));
    curve.meta("lambda", if lambda.is_infinite() { "inf".to_string() } else { format_f64(lambda) });
    auxiliary_metadata(&mut curve, &seed.basis);
    let p = PartnerPotential::new(seed, range)?;
    let defect_state = match p.kind {
        PartnerKind::Defect => Some(defect_bound_state(&p.seed, range)?),
        PartnerKind::PeriodicBloch(_) => None,
    };

    curve.push_column("x", xs.to_vec());
    curve.push_column("V", xs.iter().map(|&x| model.potential(x)).collect());
    let numeric = sample(xs, |x| p.value(x))?;
    match defect_state {
        None => {
            curve.meta("partner", "periodic");
            if p.closed_form(xs[0]).is_some() {
                let closed = sample(xs, |x| p.closed_form(x).expect("closed form available"))?;
                let dev: Vec<f64> = closed.iter().zip(&numeric).map(|(a, b)| (a - b).abs()).collect();
                curve.meta("residual", format_f64(dev.iter().copied().fold(0.0, f64::max)));
                curve.push_column("Vtilde_closed", closed);
                curve.push_column("Vtilde_numeric", numeric);
                curve.push_column("deviation", dev);
            } else {
                curve.meta("closed_form", "unavailable for this model");
                curve.push_column("Vtilde_numeric", numeric);
            }
        }
        Some(state) => {
            curve.meta("partner", "defect");
            let sparse: Vec<f64> = grid(range.0, range.1, 81);
            curve.meta("residual", format_f64(p.bound_state_residual(&sparse)?));
            curve.meta("bound_state_energy", format_f64(state.epsilon));
            curve.meta("bound_state_norm_squared", format_f64(state.norm_squared));
            curve.meta("decay_rate", format_f64(state.decay_rate));
            curve.meta("floquet_rate", format_f64(state.floquet_rate));
            let scale = state.norm_squared.sqrt();
            let phi = sample(xs, |x| p.bound_state(x).map(|v| v / scale))?;
            curve.push_column("Vtilde", numeric);
            curve.push_column("phi", phi);
        }
    }
    Ok(curve)
}

pub fn figure(args: &FigureArgs) -> CliResult<SampledCurve> {
    let (m, ell, k2, epsilon, lambda) = match args.name {
        FigureName::Figure1 => (1, 1, 0.99, 2.4, 1.5),
        FigureName::Figure2 => (2, 1, 0.95, 3.5, 1.0),
    };
    let model = LameModel::new(m, ell, k2)?;
    let k = model.modulus.big_k;
    if args.samples < 2 {
        return Err(CliError::usage("--samples must be at least 2"));
    }
    let xs = grid(-4.0 * k, 4.0 * k, args.samples);
    let full = partner_curve(&model, epsilon, lambda, false, &xs, "figure")?;
    let v = full.column("V").expect("V column").to_vec();
    let vt = full.column("Vtilde").expect("Vtilde column").to_vec();
    let mut curve = SampledCurve { metadata: full.metadata, columns: Vec::new() };
    curve.meta("figure", format!("{:?}", args.name).to_lowercase());
    curve.push_column("x", xs);
    curve.push_column("V_gray", v);
    curve.push_column("Vtilde_black", vt);
    Ok(curve)
}

pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(w, "[{tag}] {:<9} {:<44} measured {:.3e}  tol {:.1e}", c.suite, c.name, c.measured, c.tolerance)?;
        }
        writeln!(w, "{} of {} checks passed", self.checks.len() - self.failures(), self.checks.len())
    }

    fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "suite": c.suite.name(),
                    "name": c.name,
                    "tolerance": c.tolerance,
                    "measured": if c.measured.is_finite() { Some(c.measured) } else { None },
                    "passed": c.passed,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "failed": self.failures(),
            "checks": checks,
        });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<VerifyReport> {
    let cfg = VerifyConfig {
        m: args.model.m,
        ell: args.model.ell,
        k2: args.model.k2,
        tol_scale: tolerance_scale()?,
        inject_bug: args.inject_bug,
    };
    let suites: Vec<Suite> = match args.suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Elliptic => vec![Suite::Elliptic],
        SuiteArg::Solutions => vec![Suite::Solutions],
        SuiteArg::Susy => vec![Suite::Susy],
        SuiteArg::Spectral => vec![Suite::Spectral],
    };
    Ok(VerifyReport { checks: verify::run(&cfg, &suites)? })
}

/// Dispatch a parsed command; returns the exit code.
pub fn execute(cli: &crate::Cli) -> CliResult<i32> {
    use crate::Command;
    let (curve, out) = match &cli.command {
        Command::BandEdges(a) => (band_edges(a)?, &a.output),
        Command::Bloch(a) => (bloch(a)?, &a.output),
        Command::Partner(a) => (partner(a)?, &a.output),
        Command::Figure(a) => (figure(a)?, &a.output),
        Command::Verify(a) => {
            let report = verify(a)?;
            let write = |w: &mut dyn Write| match a.format {
                ReportFormat::Text => report.write_text(w),
                ReportFormat::Json => report.write_json(w),
            };
            match &a.output {
                Some(path) => write_to(path, |w| write(w))?,
                None => write(&mut io::stdout().lock())?,
            }
            return Ok(if report.failures() == 0 { crate::EXIT_OK } else { EXIT_VERIFY });
        }
    };
    emit(&curve, out)?;
    Ok(crate::EXIT_OK)
}
