use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use coallab::limits::{self, LimitLaw};
use coallab::measures::{CoalescentMeasure, MeasureConfig};
use coallab::rates::RateTable;
use coallab::rng::SeedSpec;
use coallab::simulator::{simulate_replicate, JumpChainPath};
use coallab::stats::{self, tolerances, ConvergenceKind, Sampler, VerificationReport};

mod output;

use output::write_ecdf;

#[derive(Parser, Debug)]
#[command(
    name = "coallab",
    version,
    about = "Lambda-coalescent rates, samplers and limit-law checks"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "COALLAB_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merger rates, total rates and the first-jump law for `b` blocks.
    Rates {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-replicate CSV output.
    Simulate {
        #[command(subcommand)]
        what: SimulateCommand,
    },
    /// Monte Carlo checks against the limit laws; JSON report output.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// Closed-form limit laws.
    Limits {
        #[command(subcommand)]
        what: LimitsCommand,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct MeasureChoice {
    /// Beta(A, B) measure.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    beta: Option<Vec<f64>>,
    /// Point mass at 0.
    #[arg(long)]
    kingman: bool,
    /// Registered density name.
    #[arg(long, value_name = "NAME")]
    density: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct MeasureArgs {
    #[command(flatten)]
    choice: MeasureChoice,
    /// Regular-variation constant of a density measure.
    #[arg(long, requires = "density")]
    c0: Option<f64>,
    /// Regular-variation index of a density measure.
    #[arg(long, requires = "density")]
    alpha: Option<f64>,
}

impl MeasureArgs {
    fn config(&self) -> anyhow::Result<MeasureConfig> {
        let c = &self.choice;
        Ok(if c.kingman {
            MeasureConfig::Kingman
        } else if let Some(ab) = &c.beta {
            MeasureConfig::Beta { a: ab[0], b: ab[1] }
        } else if let Some(name) = &c.density {
            let (Some(c0), Some(alpha)) = (self.c0, self.alpha) else {
                bail!("--density needs --c0 and --alpha");
            };
            MeasureConfig::Density {
                name: name.clone(),
                c0,
                alpha,
            }
        } else {
            bail!("no measure given");
        })
    }

    fn build(&self) -> anyhow::Result<CoalescentMeasure> {
        Ok(self.config()?.build()?)
    }
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    /// Sample size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    /// Number of replicates.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn n(&self) -> usize {
        self.n as usize
    }

    fn reps(&self) -> usize {
        self.reps as usize
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Right end of the rescaled time grid.
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = tolerances::BLOCK_GRID)]
    grid: usize,
}

#[derive(Subcommand, Debug)]
enum SimulateCommand {
    /// `replicate,n,sigma,t_len,tau,y_at_sigma`.
    External {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Block count on a grid of rescaled times.
    Blockcount {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Full jump-chain paths.
    Chain {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Direct,
    Cox,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Sigma,
    Tlen,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    Sigma {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the ecdf grid as CSV.
        #[arg(long)]
        ecdf: Option<PathBuf>,
    },
    Tlen {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = SamplerArg::Direct)]
        sampler: SamplerArg,
        #[arg(long)]
        ecdf: Option<PathBuf>,
    },
    Blockcount {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    Ratios {
        #[command(flatten)]
        run: RunArgs,
    },
    Cox {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Small-n exact law and the explicit partition sampler.
    SmallN {
        #[command(flatten)]
        run: RunArgs,
    },
    Convergence {
        #[command(flatten)]
        measure: MeasureArgs,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = KindArg::Sigma)]
        kind: KindArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LawArg {
    Sigma,
    Tlen,
    Ysigma,
    KingmanSigma,
    KingmanTlen,
    KingmanYsigma,
    Exp,
    BsSigma,
    BsTlen,
    /// Deterministic block-count curve.
    Block,
    KingmanBlock,
}

#[derive(Subcommand, Debug)]
enum LimitsCommand {
    /// `t,cdf,pdf` on a uniform grid (`t,fraction` for block curves).
    Tabulate {
        #[arg(long, value_enum)]
        law: LawArg,
        #[arg(long)]
        alpha: Option<f64>,
        /// `C0`; defaults to the Beta(2 - alpha, alpha) value.
        #[arg(long)]
        c0: Option<f64>,
        /// Rate of the exponential law.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_out(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_reports(reports: &[VerificationReport], out: &Option<PathBuf>) -> anyhow::Result<bool> {
    let mut w = open_out(out)?;
    let summaries: Vec<VerificationReport> = reports.iter().map(|r| r.summary()).collect();
    if let [single] = summaries.as_slice() {
        serde_json::to_writer_pretty(&mut w, single)?;
    } else {
        serde_json::to_writer_pretty(&mut w, &summaries)?;
    }
    writeln!(w)?;
    w.flush()?;
    Ok(reports.iter().all(|r| r.passed))
}

/// `Ok(true)` on success, `Ok(false)` on a failed verification.
fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Rates { measure, b, out } => {
            let m = measure.build()?;
            if b < 2 {
                bail!("--b must be at least 2");
            }
            let table = RateTable::new(&m, b)?;
            let law = table.first_jump_law(b)?;
            let g = table.total_rate(b)?;
            let mut w = open_out(&out)?;
            writeln!(w, "b,k,lambda,total_rate,first_jump_pmf")?;
            for k in 2..=b {
                let row = [
                    b.to_string(),
                    k.to_string(),
                    table.lambda(b, k)?.to_string(),
                    g.to_string(),
                    law.prob(k - 1).to_string(),
                ]
                .join(",");
                writeln!(w, "{row}")?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Simulate { what } => simulate(what),
        Command::Verify { what } => verify(what),
        Command::Limits { what } => tabulate(what),
    }
}

fn replicate_paths(
    run: &RunArgs,
    table: &RateTable,
) -> anyhow::Result<Vec<(coallab::simulator::ExternalBranchSample, JumpChainPath)>> {
    use rayon::prelude::*;
    let n = run.n();
    Ok((0..run.reps)
        .into_par_iter()
        .map(|r| simulate_replicate(table, n, SeedSpec::new(run.seed, r)))
        .collect::<coallab::Result<Vec<_>>>()?)
}

fn simulate(what: SimulateCommand) -> anyhow::Result<bool> {
    match what {
        SimulateCommand::External { run } => {
            use rayon::prelude::*;
            let m = run.measure.build()?;
            let n = run.n();
            let table = RateTable::new(&m, n)?;
            let samples = (0..run.reps)
                .into_par_iter()
                .map(|r| coallab::simulator::external_branch(&table, n, SeedSpec::new(run.seed, r)))
                .collect::<coallab::Result<Vec<_>>>()?;
            let mut w = open_out(&run.out)?;
            writeln!(w, "replicate,n,sigma,t_len,tau,y_at_sigma")?;
            for (r, s) in samples.iter().enumerate() {
                let row = [
                    r.to_string(),
                    n.to_string(),
                    s.sigma.to_string(),
                    s.t_len.to_string(),
                    s.tau.to_string(),
                    s.y_at_sigma.to_string(),
                ]
                .join(",");
                writeln!(w, "{row}")?;
            }
            w.flush()?;
        }
        SimulateCommand::Blockcount { run, grid } => {
            let m = run.measure.build()?;
            let n = run.n();
            if grid.grid < 2 || grid.t_max.is_nan() || grid.t_max <= 0.0 {
                bail!("--grid must be at least 2 and --t-max positive");
            }
            // rescaled time axis when a scaling is known, raw time otherwise
            let scale = if m.is_kingman() {
                1.0 / n as f64
            } else if let Ok((_, alpha)) = m.c0_alpha() {
                (n as f64).powf(1.0 - alpha)
            } else {
                1.0
            };
            let table = RateTable::new(&m, n)?;
            let ts: Vec<f64> = (0..grid.grid)
                .map(|i| grid.t_max * i as f64 / (grid.grid - 1) as f64)
                .collect();
            let times: Vec<f64> = ts.iter().map(|t| t * scale).collect();
            let paths = replicate_paths(&run, &table)?;
            let mut w = open_out(&run.out)?;
            writeln!(w, "replicate,t,time,blocks")?;
            for (r, (_, path)) in paths.iter().enumerate() {
                let counts = path.block_count_at(&times)?;
                for ((t, time), c) in ts.iter().zip(&times).zip(counts) {
                    let row = [
                        r.to_string(),
                        t.to_string(),
                        time.to_string(),
                        c.to_string(),
                    ]
                    .join(",");
                    writeln!(w, "{row}")?;
                }
            }
            w.flush()?;
        }
        SimulateCommand::Chain { run } => {
            let m = run.measure.build()?;
            let table = RateTable::new(&m, run.n())?;
            let paths = replicate_paths(&run, &table)?;
            let mut w = open_out(&run.out)?;
            writeln!(w, "replicate,step,blocks,lost,wait,time")?;
            for (r, (_, path)) in paths.iter().enumerate() {
                let mut clock = 0.0;
                for i in 0..path.tau {
                    clock += path.waits[i];
                    let row = [
                        r.to_string(),
                        (i + 1).to_string(),
                        path.y[i + 1].to_string(),
                        path.x[i].to_string(),
                        path.waits[i].to_string(),
                        clock.to_string(),
                    ]
                    .join(",");
                    writeln!(w, "{row}")?;
                }
            }
            w.flush()?;
        }
    }
    Ok(true)
}

fn verify(what: VerifyCommand) -> anyhow::Result<bool> {
    match what {
        VerifyCommand::Sigma { run, ecdf } => {
            let m = run.measure.build()?;
            let report = if m.is_kingman() {
                stats::verify_kingman_sigma(run.n(), run.reps(), run.seed)?
            } else if m.is_bolthausen_sznitman() {
                stats::verify_bs_sigma(run.n(), run.reps(), run.seed)?
            } else {
                stats::verify_sigma(&m, run.n(), run.reps(), run.seed)?
            };
            if let Some(path) = ecdf {
                write_ecdf(&report, &path)?;
            }
            write_reports(&[report], &run.out)
        }
        VerifyCommand::Tlen { run, sampler, ecdf } => {
            let m = run.measure.build()?;
            let sampler = match sampler {
                SamplerArg::Direct => Sampler::Direct,
                SamplerArg::Cox => Sampler::Cox,
            };
            let report = stats::verify_tlen(&m, run.n(), run.reps(), run.seed, sampler)?;
            if let Some(path) = ecdf {
                write_ecdf(&report, &path)?;
            }
            write_reports(&[report], &run.out)
        }
        VerifyCommand::Blockcount { run, grid } => {
            let m = run.measure.build()?;
            let report =
                stats::verify_blockcount(&m, run.n(), grid.t_max, grid.grid, run.reps(), run.seed)?;
            write_reports(&[report], &run.out)
        }
        VerifyCommand::Ratios { run } => {
            let m = run.measure.build()?;
            let reports = stats::verify_ratios(&m, run.n(), run.reps(), run.seed)?;
            write_reports(&reports, &run.out)
        }
        VerifyCommand::Cox { run } => {
            let m = run.measure.build()?;
            let report = stats::verify_cox(&m, run.n(), run.reps(), run.seed)?;
            write_reports(&[report], &run.out)
        }
        VerifyCommand::SmallN { run } => {
            let m = run.measure.build()?;
            let mut reports = vec![stats::verify_small_n(&m, run.n(), run.reps(), run.seed)?];
            if run.n() <= coallab::simulator::MAX_PARTITION_N {
                reports.push(stats::verify_partition_agreement(
                    &m,
                    run.n(),
                    run.reps(),
                    run.seed,
                )?);
            }
            write_reports(&reports, &run.out)
        }
        VerifyCommand::Convergence {
            measure,
            n_list,
            reps,
            seed,
            kind,
            out,
        } => {
            let m = measure.build()?;
            if n_list.iter().any(|&n| n < 2) {
                bail!("every n in --n-list must be at least 2");
            }
            let kind = match kind {
                KindArg::Sigma => ConvergenceKind::Sigma,
                KindArg::Tlen => ConvergenceKind::Tlen,
            };
            let reports = stats::convergence_table(&m, &n_list, reps, seed, kind)?;
            // per-n thresholds are informative here; the criterion is the trend
            write_reports(&reports, &out)?;
            Ok(stats::is_decreasing(&reports))
        }
    }
}

fn tabulate(what: LimitsCommand) -> anyhow::Result<bool> {
    let LimitsCommand::Tabulate {
        law,
        alpha,
        c0,
        mu,
        lo,
        hi,
        points,
        out,
    } = what;
    let need_alpha = || alpha.context("--alpha is required for this law");
    let c0_for = |a: f64| c0.unwrap_or_else(|| limits::beta_class_c0(a));
    if lo.is_nan() || hi.is_nan() || lo > hi || points < 2 {
        bail!("need lo <= hi and at least 2 points");
    }
    let mut w = open_out(&out)?;
    let curve = |w: &mut Box<dyn Write>, f: &dyn Fn(f64) -> f64| -> anyhow::Result<()> {
        writeln!(w, "t,fraction")?;
        for i in 0..points {
            let t = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            writeln!(w, "{}", [t.to_string(), f(t).to_string()].join(","))?;
        }
        Ok(())
    };
    let law: LimitLaw = match law {
        LawArg::Block => {
            let a = need_alpha()?;
            let c = c0_for(a);
            curve(&mut w, &|t| limits::block_limit(a, c, t))?;
            w.flush()?;
            return Ok(true);
        }
        LawArg::KingmanBlock => {
            curve(&mut w, &limits::kingman_block_limit)?;
            w.flush()?;
            return Ok(true);
        }
        LawArg::Sigma => limits::sigma_limit(need_alpha()?)?,
        LawArg::Tlen => {
            let a = need_alpha()?;
            limits::t_limit(a, c0_for(a))?
        }
        LawArg::Ysigma => limits::y_sigma_limit(need_alpha()?)?,
        LawArg::KingmanSigma => limits::kingman_sigma_limit(),
        LawArg::KingmanTlen => limits::kingman_t_limit(),
        LawArg::KingmanYsigma => limits::kingman_y_sigma_limit(),
        LawArg::Exp => limits::exp_limit(mu.context("--mu is required for the exponential law")?)?,
        LawArg::BsSigma => limits::bs_sigma_limit(),
        LawArg::BsTlen => limits::bs_t_limit(),
    };
    writeln!(w, "t,cdf,pdf")?;
    for (x, c, p) in law.tabulate(lo, hi, points) {
        writeln!(
            w,
            "{}",
            [x.to_string(), c.to_string(), p.to_string()].join(",")
        )?;
    }
    w.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let pool = match cli.workers {
        Some(0) => {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        Some(k) => rayon::ThreadPoolBuilder::new().num_threads(k).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
