use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use kontsevich_cp2::fit::{preset_windows, write_fit_csv, write_fit_json, FitRecord};
use kontsevich_cp2::frobenius::{write_scan_csv, ScanRecord};
use kontsevich_cp2::precision::to_decimal;
use kontsevich_cp2::rug::Float;
use kontsevich_cp2::series::{default_singular_samples, write_phi_csv, write_phi_json};
use kontsevich_cp2::*;
use serde::Serialize;

use crate::args::{Command, Format, GlobalArgs, Preset};
use crate::error::{CliError, CliResult};

pub const DEFAULT_N_MAX: usize = 1000;
pub const DEFAULT_FIT_N0: usize = 900;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub digits: u32,
    /// `None` means "the table's size", or [`DEFAULT_N_MAX`] without a table.
    pub n_max: Option<usize>,
    pub fit_n0: usize,
    pub output_format: Format,
    pub table_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub print_digits: usize,
}

impl RunConfig {
    pub fn new(global: &GlobalArgs, fit_n0: usize) -> CliResult<Self> {
        if global.n_max == Some(0) {
            return Err(CliError::Config("--n-max must be at least 1".into()));
        }
        if global.print_digits == 0 {
            return Err(CliError::Config("--print-digits must be at least 1".into()));
        }
        Ok(RunConfig {
            digits: global.digits,
            n_max: global.n_max,
            fit_n0,
            output_format: global.format,
            table_path: global.table.clone(),
            output_path: global.output.clone(),
            print_digits: global.print_digits.min(global.digits as usize),
        })
    }

    fn ctx(&self) -> CliResult<PrecisionContext> {
        Ok(PrecisionContext::new(self.digits)?)
    }

    /// Table from `--table` when given, otherwise computed in memory.
    fn load_table(&self) -> CliResult<CoefficientTable> {
        let Some(path) = &self.table_path else {
            return Ok(compute_coefficients(self.n_max.unwrap_or(DEFAULT_N_MAX))?);
        };
        let file = File::open(path)
            .map_err(|e| CliError::Io(format!("cannot open table {}: {e}", path.display())))?;
        let table = CoefficientTable::read_from(BufReader::new(file))?;
        match self.n_max {
            Some(n) if n > table.n_max() => Err(CliError::Config(format!(
                "--n-max {n} exceeds the {} coefficients in {}",
                table.n_max(),
                path.display()
            ))),
            Some(n) => Ok(table.truncated(n)?),
            None => Ok(table),
        }
    }

    fn boundary_point(&self, table: &CoefficientTable, ctx: PrecisionContext) -> CliResult<Float> {
        let window = FitWindow::new(self.fit_n0, table.n_max())?;
        let fit = fit_growth(table, window, ctx)?;
        Ok(derive_x0(&fit)?)
    }

    fn emit(&self, bytes: &[u8]) -> CliResult<()> {
        write_to(self.output_path.as_ref(), bytes)
    }

    fn decimal(&self, x: &Float) -> String {
        to_decimal(x, self.print_digits)
    }
}

fn write_to(path: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn run(global: &GlobalArgs, command: &Command) -> CliResult<()> {
    match command {
        Command::Invariants => invariants(&RunConfig::new(global, DEFAULT_FIT_N0)?),
        Command::Fit { n0, n, preset } => {
            let cfg = RunConfig::new(global, n0.unwrap_or(DEFAULT_FIT_N0))?;
            fit(&cfg, *n, *preset)
        }
        Command::PhiEval { x, at_boundary, n0 } => phi_eval(&RunConfig::new(global, *n0)?, x, *at_boundary),
        Command::PdeCheck { t2, t3 } => pde_check(&RunConfig::new(global, DEFAULT_FIT_N0)?, t2, t3),
        Command::Singularity {
            t1,
            t3,
            deltas,
            constraint_check,
            n0,
        } => {
            let cfg = RunConfig::new(global, *n0)?;
            if *constraint_check {
                constraint(&cfg)
            } else {
                singularity(&cfg, t1, t3, deltas)
            }
        }
    }
}

fn invariants(cfg: &RunConfig) -> CliResult<()> {
    let n = cfg.n_max.unwrap_or(DEFAULT_N_MAX);
    let table = compute_coefficients(n)?;
    let mut buf = Vec::new();
    table.write_to(&mut buf)?;
    write_to(cfg.output_path.as_ref().or(cfg.table_path.as_ref()), &buf)?;

    let first = gw_invariant(&table, 1)?.value;
    let last = gw_invariant(&table, n)?.value;
    eprintln!(
        "computed A_1..A_{n}; N_1 = {first}; N_{n} has {} digits",
        last.to_string().len()
    );
    Ok(())
}

fn fit(cfg: &RunConfig, n: Option<usize>, preset: Option<Preset>) -> CliResult<()> {
    let ctx = cfg.ctx()?;
    let table = cfg.load_table()?;
    let windows = match preset {
        Some(Preset::Paper) => preset_windows(),
        None => vec![FitWindow::new(cfg.fit_n0, n.unwrap_or(table.n_max()))?],
    };
    let mut records: Vec<FitRecord> = Vec::with_capacity(windows.len());
    for window in windows {
        let result = fit_growth(&table, window, ctx)?;
        if result.low_confidence() {
            eprintln!(
                "warning: window {}..{} has {} points; the line is exact and the fit is low-confidence",
                window.n0(),
                window.n(),
                window.len()
            );
        }
        records.push(result.record(cfg.print_digits));
    }
    let mut buf = Vec::new();
    match cfg.output_format {
        Format::Csv => write_fit_csv(&mut buf, &records)?,
        Format::Json => write_fit_json(&mut buf, &records)?,
    }
    cfg.emit(&buf)
}

fn phi_eval(cfg: &RunConfig, xs: &[String], at_boundary: bool) -> CliResult<()> {
    let ctx = cfg.ctx()?;
    let mut points = xs.iter().map(|s| ctx.parse(s)).collect::<Result<Vec<_>>>()?;
    if points.is_empty() && !at_boundary {
        return Err(CliError::Config("give at least one --x or --at-boundary".into()));
    }
    let table = cfg.load_table()?;
    if at_boundary {
        points.push(cfg.boundary_point(&table, ctx)?);
    }
    let eval = SeriesEvaluator::new(&table, ctx);
    let rows: Vec<PhiValues> = points.iter().map(|x| eval.phi(x)).collect();
    for row in rows.iter().filter(|r| r.outside_proven_region()) {
        eprintln!(
            "warning: X = {} is on or past the convergence boundary (a e^X = {:.6}); phi3 is a divergent partial sum",
            cfg.decimal(&row.x),
            row.tail_ratio
        );
    }
    let mut buf = Vec::new();
    match cfg.output_format {
        Format::Csv => write_phi_csv(&mut buf, &rows, cfg.print_digits)?,
        Format::Json => write_phi_json(&mut buf, &rows, cfg.print_digits)?,
    }
    cfg.emit(&buf)
}

#[derive(Serialize)]
struct PdeRecord {
    t2: String,
    t3: String,
    residual: String,
    truncation_bound: Option<String>,
    rounding_bound: String,
    within_bound: bool,
}

fn pde_check(cfg: &RunConfig, t2: &str, t3: &str) -> CliResult<()> {
    let ctx = cfg.ctx()?;
    let (t2, t3) = (ctx.parse(t2)?, ctx.parse(t3)?);
    let table = cfg.load_table()?;
    let res = pde_residual(&table, &t2, &t3, ctx)?;
    let record = PdeRecord {
        t2: cfg.decimal(&t2),
        t3: cfg.decimal(&t3),
        residual: cfg.decimal(&res.residual),
        truncation_bound: res.truncation_bound.as_ref().map(|b| cfg.decimal(b)),
        rounding_bound: cfg.decimal(&res.rounding_bound),
        within_bound: res.within_bound(),
    };
    cfg.emit(&serialize_one(cfg.output_format, &record)?)?;
    if record.within_bound {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "residual {} exceeds the truncation and rounding bound",
            record.residual
        )))
    }
}

#[derive(Serialize)]
struct ConstraintRecord {
    #[serde(rename = "X0")]
    x0: String,
    direct: String,
    refined: String,
}

fn constraint(cfg: &RunConfig) -> CliResult<()> {
    let ctx = cfg.ctx()?;
    let table = cfg.load_table()?;
    let x0 = cfg.boundary_point(&table, ctx)?;
    let phi = eval_phi(&table, &x0, ctx);
    let record = ConstraintRecord {
        x0: cfg.decimal(&x0),
        direct: cfg.decimal(&constraint_residual(&phi)),
        refined: cfg.decimal(&constraint_residual(&phi.with_refined_phi2())),
    };
    cfg.emit(&serialize_one(cfg.output_format, &record)?)
}

#[derive(Serialize)]
struct EndpointRecord {
    u1_re: String,
    u1_im: String,
    u2_re: String,
    u2_im: String,
    u3_re: String,
    u3_im: String,
    separation: String,
    near_degenerate: bool,
}

#[derive(Serialize)]
struct SingularityReport {
    #[serde(rename = "X0")]
    x0: String,
    endpoint: EndpointRecord,
    constraint_residual: String,
    j2_exponent: Option<String>,
    verdict: String,
    scan: Vec<ScanRecord>,
}

fn singularity(cfg: &RunConfig, t1: &str, t3: &str, deltas: &[f64]) -> CliResult<()> {
    let ctx = cfg.ctx()?;
    let (t1, t3) = (ctx.parse(t1)?, ctx.parse(t3)?);
    let deltas = if deltas.is_empty() {
        default_singular_samples()
    } else {
        deltas.to_vec()
    };
    let table = cfg.load_table()?;
    let x0 = cfg.boundary_point(&table, ctx)?;

    let phi = eval_phi(&table, &x0, ctx);
    let point = FlatPoint::from_x(t1.clone(), &x0, t3.clone())?;
    let form = intersection_form(&point, &phi.with_refined_phi2())?;
    let end = canonical_coordinates(&characteristic_cubic(&form), ctx);
    let scan = singularity_scan(&table, (&t1, &t3), &x0, &deltas, ctx)?;

    let min_sep = scan.min_separation().expect("scan has at least one row");
    let distinct = !end.near_degenerate
        && scan.rows.iter().all(|r| !r.coords.near_degenerate)
        && Float::with_val(min_sep.prec(), min_sep * 2u32) >= end.separation;
    let verdict = format!(
        "{}: min separation {} over the sweep, {} at X0",
        if distinct {
            "coordinates remain distinct"
        } else {
            "coordinates approach a collision"
        },
        to_decimal(min_sep, 6),
        to_decimal(&end.separation, 6),
    );
    let d = |v: &Float| cfg.decimal(v);
    let [u1, u2, u3] = &end.u;
    let endpoint = EndpointRecord {
        u1_re: d(&u1.re),
        u1_im: d(&u1.im),
        u2_re: d(&u2.re),
        u2_im: d(&u2.im),
        u3_re: d(&u3.re),
        u3_im: d(&u3.im),
        separation: d(&end.separation),
        near_degenerate: end.near_degenerate,
    };
    let report = SingularityReport {
        x0: d(&x0),
        constraint_residual: d(&constraint_residual(&phi)),
        j2_exponent: scan.j2_exponent.as_ref().map(d),
        verdict: verdict.clone(),
        scan: scan.rows.iter().map(|r| r.record(cfg.print_digits)).collect(),
        endpoint,
    };

    let mut buf = Vec::new();
    match cfg.output_format {
        Format::Json => {
            serde_json::to_writer(&mut buf, &report).map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            write_scan_csv(&mut buf, &scan.rows, cfg.print_digits)?;
            eprintln!("X0 = {}", report.x0);
            eprintln!(
                "endpoint u1 = {:.8}, u2 = {:.8}, u3 = {:.8}",
                end.u[0], end.u[1], end.u[2]
            );
            eprintln!("constraint residual (direct sums) = {}", report.constraint_residual);
            if let Some(e) = &report.j2_exponent {
                eprintln!("|j2| exponent = {e}");
            }
        }
    }
    cfg.emit(&buf)?;
    eprintln!("{verdict}");
    Ok(())
}

fn serialize_one<T: Serialize>(format: Format, record: &T) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Json => {
            serde_json::to_writer(&mut buf, record).map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.serialize(record).map_err(|e| CliError::Io(e.to_string()))?;
            w.flush()?;
        }
    }
    Ok(buf)
}
