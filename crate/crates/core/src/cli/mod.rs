//! The `nodal-zeta` command-line tool.

mod input;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

pub use input::{Overrides, ProblemInput};
pub use output::Report;

use crate::error::{Error, Result};
use crate::frobenius::ReductionMode;
use crate::oracle::{count_points, verify_zeta, DEFAULT_BUDGET};
use crate::poly::groebner_with_cofactors;
use crate::singular::{equisingularity_check, tau_count_rational, tau_from_groebner, SingularPointSet};
use crate::spectral::{b_formula, e2_basis, koszul_dim};
use crate::zeta::{compute_zeta, format_factors, reduce_mod_power, ZetaFunction, ZetaOptions, ZetaResult};

#[derive(Parser, Debug)]
#[command(name = "nodal-zeta", version, about = "Zeta functions of nodal hypersurfaces over prime fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Koszul and E2 dimensions, τ and the equisingularity verdict.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Largest coefficient degree in the Koszul tables.
        #[arg(long)]
        max_j: Option<i32>,
    },
    /// The zeta function over F_p.
    Zeta {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        zeta: ZetaArgs,
    },
    /// Brute-force point counts over F_{p^r}, r = 1..=R.
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'r', long = "max-r", default_value_t = 1)]
        max_r: u32,
    },
    /// Compares a zeta function with brute-force counts for r = 1..=R.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        zeta: ZetaArgs,
        #[arg(short = 'R', long = "max-r", default_value_t = 2)]
        max_r: u32,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Zeta { common, .. }
            | Command::Count { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

#[derive(Args, Debug)]
pub struct Common {
    /// Problem file (TOML).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub prime: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Enumeration budget for point counts.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    /// Recovery precision D.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Number of series terms M.
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Add series terms until Q(T) stops changing (uncertified).
    #[arg(long)]
    pub early_stop: bool,
    /// Print the contribution of every series term to every column.
    #[arg(long)]
    pub dump_reductions: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Padic,
    Multimodular,
    Rational,
}

fn mode_name(m: ReductionMode) -> &'static str {
    match m {
        ReductionMode::Padic => "padic",
        ReductionMode::Multimodular => "multimodular",
        ReductionMode::Rational => "rational",
    }
}

fn parse_mode(s: &str) -> Result<ReductionMode> {
    match s {
        "padic" => Ok(ReductionMode::Padic),
        "multimodular" => Ok(ReductionMode::Multimodular),
        "rational" => Ok(ReductionMode::Rational),
        _ => Err(Error::Invalid(format!("unknown mode {s}"))),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn config(report: &mut Report, command: &str, input: &ProblemInput, p: Option<u64>) {
    report.push("command", command);
    report.push("config.n", input.n);
    report.push("config.polynomial", &input.polynomial_text);
    report.push("config.degree", input.f.degree());
    report.push("config.field_modulus", input.field.modulus_string());
    if let Some(p) = p {
        report.push("config.prime", p);
    }
    if let Some(nodes) = &input.nodes {
        report.push("config.nodes", nodes.points.len());
    }
}

fn prime_of(common: &Common, input: &ProblemInput) -> Result<u64> {
    let p = common
        .prime
        .or(input.prime)
        .ok_or_else(|| Error::Invalid("no prime given".into()))?;
    if !crate::arith::is_prime(p) || (p as usize) + 1 <= input.n {
        return Err(Error::Invalid(format!("p = {p} must be a prime greater than n − 1")));
    }
    Ok(p)
}

fn budget_of(common: &Common, input: &ProblemInput) -> u128 {
    common.budget.or(input.overrides.budget).unwrap_or(DEFAULT_BUDGET)
}

/// The listed nodes, or an empty set after checking that f is smooth.
pub fn node_set(input: &ProblemInput) -> Result<SingularPointSet> {
    if let Some(nodes) = &input.nodes {
        return Ok(nodes.clone());
    }
    let tau = tau_count_rational(&input.f)?;
    if tau > 0 {
        return Err(Error::Invalid(format!(
            "the hypersurface has τ = {tau} but no nodes are listed"
        )));
    }
    Ok(SingularPointSet {
        points: Vec::new(),
        tau: 0,
        field: input.field.clone(),
    })
}

fn run_zeta_pipeline(input: &ProblemInput, p: u64, args: &ZetaArgs, jobs: usize) -> Result<(ZetaResult, ZetaOptions)> {
    let nodes = node_set(input)?;
    let mode = match (args.mode, &input.overrides.mode) {
        (Some(ModeArg::Padic), _) => ReductionMode::Padic,
        (Some(ModeArg::Multimodular), _) => ReductionMode::Multimodular,
        (Some(ModeArg::Rational), _) => ReductionMode::Rational,
        (None, Some(s)) => parse_mode(s)?,
        (None, None) => ReductionMode::Padic,
    };
    let opts = ZetaOptions {
        precision: args.precision.or(input.overrides.precision),
        terms: args.terms.or(input.overrides.terms),
        early_stop: args.early_stop || input.overrides.early_stop.unwrap_or(false),
        mode,
        jobs,
        per_term: args.dump_reductions,
    };
    Ok((compute_zeta(&input.f, &nodes, p, &opts)?, opts))
}

fn zeta_report(report: &mut Report, r: &ZetaResult, opts: &ZetaOptions, dump: bool) {
    let d = &r.diagnostics;
    report.push("config.precision", d.precision_bound);
    report.push("config.terms", d.terms_used);
    report.push("config.mode", mode_name(opts.mode));
    report.push("config.early_stop", opts.early_stop);
    report.push("tau", r.tau);
    report.push("dims.E2", r.frobenius.basis.len());
    report.push(
        "e2_basis",
        r.frobenius
            .basis
            .iter()
            .map(|(m, s)| format!("{m}/f^{s}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    report.push("q_coefficients", join(&r.zeta.interesting));
    report.push("q_factored", format_factors(&r.zeta.factors()));
    report.push("denominator_exponents", join(&r.zeta.denominator_exponents()));
    report.push("zeta", &r.zeta);
    report.push("diagnostics.certified", d.certified);
    report.push("diagnostics.formal_terms", d.formal_terms);
    report.push("diagnostics.working_precision", d.working_precision);
    report.push(
        "diagnostics.padic_precision",
        d.padic_precision.map_or("exact".to_string(), |k| k.to_string()),
    );
    report.push("diagnostics.primes_used", d.primes_used);
    report.push("diagnostics.functional_equation_sign", d.sign);
    report.push("diagnostics.weil_deviation", format!("{:.3e}", d.weil_deviation));
    report.push("diagnostics.variable_permutation", join(&d.permutation));
    report.push("diagnostics.equisingularity", r.equisingularity.passed);
    let p = r.frobenius.p;
    for (i, row) in r.frobenius.matrix.iter().enumerate() {
        let reduced: Vec<_> = row.iter().map(|x| reduce_mod_power(x, p, d.working_precision)).collect();
        report.push(format!("frobenius.row{i}"), join(&reduced));
    }
    if dump {
        if let Some(contrib) = &r.frobenius.contributions {
            for (j, col) in contrib.iter().enumerate() {
                let (m, s) = &r.frobenius.basis[j];
                for (k, v) in col.iter().enumerate() {
                    report.push(format!("reductions.{m}/f^{s}.r{k}"), join(v));
                }
            }
        }
    }
}

fn analyze(input: &ProblemInput, p: Option<u64>, max_j: Option<i32>, report: &mut Report) -> Result<()> {
    let f = &input.f;
    let n = input.n;
    let big_n = f.degree();
    let gb = groebner_with_cofactors(&f.gradient());
    let tau = tau_from_groebner(&gb, f)?;
    report.push("tau", tau);
    report.push("b", b_formula(n, big_n as u32));
    let max_j = max_j.unwrap_or((n as i32 + 1) * big_n - n as i32 - 1);
    for level in [n, n + 1] {
        let dims: Vec<usize> = (0..=max_j).map(|j| koszul_dim(f, level, j)).collect();
        report.push(format!("dims.H{level}"), join(&dims));
    }
    let e2 = e2_basis(f, &gb, tau)?;
    report.push("dims.E2", e2.len());
    for sl in &e2.slices {
        report.push(format!("dims.E2.s{}", sl.s), sl.representatives.len());
    }
    report.push(
        "e2_basis",
        e2.entries.iter().map(|(m, s)| format!("{m}/f^{s}")).collect::<Vec<_>>().join(","),
    );
    if let Some(p) = p {
        let eq = equisingularity_check(f, input.nodes.as_ref(), p);
        report.push("equisingularity.passed", eq.passed);
        report.push(
            "equisingularity.tau_mod_p",
            eq.tau_mod_p.as_ref().map_or_else(|e| e.to_string(), |t| t.to_string()),
        );
        for node in &eq.nodes {
            report.push(format!("equisingularity.node{}.hessian_norm", node.index), &node.norm);
            report.push(format!("equisingularity.node{}.unit", node.index), node.hessian_unit && node.p_integral);
        }
        report.push("equisingularity.reasons", eq.reasons.join("; "));
    }
    Ok(())
}

/// Runs one command and returns the report text.
pub fn execute(cli: &Cli) -> Result<String> {
    let common = cli.command.common();
    let jobs = common.jobs.unwrap_or(1).max(1);
    // a second initialization (e.g. in tests) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    let input = ProblemInput::read(&common.input)?;
    let mut report = Report::default();
    match &cli.command {
        Command::Analyze { max_j, .. } => {
            let p = common.prime.or(input.prime);
            config(&mut report, "analyze", &input, p);
            analyze(&input, p, *max_j, &mut report)?;
        }
        Command::Zeta { zeta, .. } => {
            let p = prime_of(common, &input)?;
            config(&mut report, "zeta", &input, Some(p));
            let (r, opts) = run_zeta_pipeline(&input, p, zeta, jobs)?;
            zeta_report(&mut report, &r, &opts, zeta.dump_reductions);
        }
        Command::Count { max_r, .. } => {
            let p = prime_of(common, &input)?;
            let budget = budget_of(common, &input);
            config(&mut report, "count", &input, Some(p));
            report.push("config.budget", budget);
            for r in 1..=*max_r {
                report.push(format!("count.r{r}"), count_points(&input.f, p, r, budget)?);
            }
        }
        Command::Verify { zeta, max_r, .. } => {
            let p = prime_of(common, &input)?;
            let budget = budget_of(common, &input);
            config(&mut report, "verify", &input, Some(p));
            report.push("config.budget", budget);
            let z = match &input.q_coefficients {
                Some(q) => ZetaFunction::new(q.iter().map(|&c| BigInt::from(c)).collect(), p, input.n),
                None => {
                    let (r, opts) = run_zeta_pipeline(&input, p, zeta, jobs)?;
                    zeta_report(&mut report, &r, &opts, false);
                    r.zeta
                }
            };
            if input.q_coefficients.is_some() {
                report.push("q_coefficients", join(&z.interesting));
                report.push("zeta", &z);
            }
            for c in verify_zeta(&z, &input.f, *max_r, budget)? {
                report.push(format!("verify.r{}", c.r), format!("{} {}", c.predicted, c.counted));
            }
            report.push("verify.passed", true);
        }
    }
    let text = report.render();
    if let Some(path) = &common.output {
        std::fs::write(path, &text).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(text)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Invalid(e.to_string()))?;
    execute(&cli)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            if cli.command.common().output.is_none() {
                print!("{text}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
