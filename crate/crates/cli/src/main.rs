// SPDX-License-Identifier: Apache-2.0

mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use amsplace::io::{self as formats, GsrcOptions, SolverInfo};
use amsplace::syngen::{compose_copies, generate, GenParams};
use amsplace::{check_feasible, evaluate, Instance};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use run::{Algo, CliError, SolveOptions};

#[derive(Parser, Debug)]
#[command(name = "amsplace", version, about = "Analog placement engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Wall-clock limit in seconds for search plus refinement.
    #[arg(long, value_parser = parse_seconds)]
    time_limit: Option<Duration>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// GA generations or CMA-ES iterations; makes the run independent of the clock.
    #[arg(long)]
    generations: Option<usize>,
    /// GA population size or CMA-ES offspring count.
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    no_refine: bool,
}

#[derive(Args, Debug)]
struct WeightArgs {
    #[arg(long)]
    c_area: Option<f64>,
    #[arg(long)]
    c_conn: Option<f64>,
    #[arg(long)]
    c_prox: Option<f64>,
    #[arg(long)]
    c_inter: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a placement.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "ga")]
        algo: Algo,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the criterion report of a placement as JSON.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        placement: PathBuf,
    },
    /// Generate a synthetic instance.
    Gen {
        #[arg(long)]
        n: usize,
        /// Net count range `LO:HI`.
        #[arg(long, value_parser = parse_range)]
        nets: (usize, usize),
        #[arg(long)]
        symmetry: bool,
        #[arg(long)]
        negative_distances: bool,
        #[arg(long, default_value_t = 0)]
        blockages: usize,
        #[arg(long, default_value_t = 0.5)]
        multi_variant: f64,
        /// Number of disjoint copies to compose.
        #[arg(long)]
        compose: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a GSRC block/net pair to an instance file.
    ConvertGsrc {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        nets: PathBuf,
        /// Keep terminals as 1x1 rectangles that take part in nets.
        #[arg(long)]
        include_terminals: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a placement as SVG.
    Plot {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        placement: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve every instance of a directory and write an aRD report.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated algorithms.
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        algo: Vec<Algo>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_seconds(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    Duration::try_from_secs_f64(v).map_err(|_| format!("`{s}` is not a valid duration"))
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form LO:HI"))?;
    let lo = lo.trim().parse().map_err(|_| format!("bad lower bound in `{s}`"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad upper bound in `{s}`"))?;
    Ok((lo, hi))
}

impl SearchArgs {
    fn options(&self, algo: Algo) -> SolveOptions {
        // Without any budget a run would not terminate on its own clock.
        let time_limit = match (self.time_limit, self.generations) {
            (None, None) => Some(Duration::from_secs(10)),
            (t, _) => t,
        };
        SolveOptions {
            algo,
            seed: self.seed,
            time_limit,
            generations: self.generations,
            pop_size: self.pop_size,
            refine: !self.no_refine,
        }
    }
}

impl WeightArgs {
    fn apply(&self, inst: &mut Instance) -> Result<(), CliError> {
        let w = &mut inst.weights;
        for (slot, v, name) in [
            (&mut w.c_area, self.c_area, "c-area"),
            (&mut w.c_conn, self.c_conn, "c-conn"),
            (&mut w.c_prox, self.c_prox, "c-prox"),
            (&mut w.c_inter, self.c_inter, "c-inter"),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CliError::Usage(format!("--{name} must be finite and non-negative")));
                }
                *slot = v;
            }
        }
        Ok(())
    }
}

/// Print to standard output; a closed pipe is not an error.
fn say(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn load_placement(inst: &Instance, path: &Path) -> Result<amsplace::Placement, CliError> {
    let doc = formats::parse_placement::<f64>(&run::read(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    doc.to_placement(inst).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn feasible_placement(inst: &Instance, path: &Path) -> Result<amsplace::Placement, CliError> {
    let p = load_placement(inst, path)?;
    if let Some(v) = check_feasible(inst, &p)? {
        return Err(CliError::Data(format!("{}: infeasible placement: {v}", path.display())));
    }
    Ok(p)
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Solve { instance, algo, search, weights, out } => {
            let mut inst = run::load_instance(&instance)?;
            weights.apply(&mut inst)?;
            let opts = search.options(algo);
            let o = run::solve(&inst, &opts)?;
            let info = SolverInfo {
                algorithm: algo.name().to_owned(),
                seed: opts.seed,
                wall_time_s: o.wall_time_s,
                evaluations: o.evaluations,
            };
            let doc = formats::placement_file(&inst, &o.placement, Some(o.report.clone()), Some(info));
            run::write(&out, &formats::write_placement(&doc))?;
            say(&format!(
                "total {} (W {} H {}) in {:.2} s, {} evaluations",
                o.report.total, o.report.width, o.report.height, o.wall_time_s, o.evaluations
            ));
        }
        Command::Eval { instance, placement } => {
            let inst = run::load_instance(&instance)?;
            let p = feasible_placement(&inst, &placement)?;
            let report = evaluate(&p, &inst);
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            say(&text);
        }
        Command::Gen { n, nets, symmetry, negative_distances, blockages, multi_variant, compose, seed, out } => {
            let params = GenParams {
                n_rects: n,
                n_nets_range: nets,
                n_blockages: blockages,
                multi_variant_fraction: multi_variant,
                with_symmetry: symmetry,
                allow_negative_distances: negative_distances,
                rng_seed: seed,
            };
            let usage = |e: amsplace::syngen::GenError| CliError::Usage(e.to_string());
            let mut inst: Instance = generate(&params).map_err(usage)?;
            if let Some(k) = compose {
                inst = compose_copies(&inst, k).map_err(usage)?;
            }
            run::write(&out, &formats::write_instance(&inst))?;
            say(&format!("{} rectangles, {} nets", inst.len(), inst.nets.len()));
        }
        Command::ConvertGsrc { blocks, nets, include_terminals, out } => {
            let (inst, stats) = formats::parse_gsrc::<f64>(
                &run::read(&blocks)?,
                &run::read(&nets)?,
                GsrcOptions { include_terminals },
            )?;
            run::write(&out, &formats::write_instance(&inst))?;
            say(&format!(
                "{} blocks, {} terminals, {} nets declared, {} kept, {} dropped",
                stats.blocks, stats.terminals, stats.declared_nets, stats.kept_nets, stats.dropped_nets
            ));
        }
        Command::Plot { instance, placement, out } => {
            let inst = run::load_instance(&instance)?;
            let p = load_placement(&inst, &placement)?;
            run::write(&out, &formats::render_svg(&p, &inst))?;
        }
        Command::Bench { dir, algo, repeats, search, out } => {
            if repeats == 0 {
                return Err(CliError::Usage("--repeats must be positive".into()));
            }
            let files = run::instance_files(&dir)?;
            let records = run::bench(&files, &algo, repeats, &search.options(algo[0]))?;
            let rows = formats::aggregate(&records);
            run::write(&out, &formats::write_report(&rows)?)?;
            for r in rows.iter().filter(|r| r.instance == formats::bench::SUMMARY) {
                say(&format!("{}: aRD {:.4} %, {} best", r.algorithm, r.rel_diff_pct, r.is_best));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("usage error: {first}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
