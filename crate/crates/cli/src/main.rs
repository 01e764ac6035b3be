//! Command-line front end: single runs, mesh sweeps, and benchmark-table
//! reproductions from flat config files.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 validation failure.

mod config;

use config::RunConfig;
use mppfv::harness::{
    self, execute, run_table, table_to_csv, table_to_text, ConvergenceRow, TableBlock,
    TableOptions, TableResult,
};
use mppfv::integrate::StepConfig;
use mppfv::problems::Problem;
use mppfv::reconstruct::ReconScheme;
use mppfv::SolverError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const USAGE: &str = "usage:
  mppfv run         --config PATH [--output DIR] [--threads N] [--quiet]
  mppfv convergence --config PATH [--output DIR] [--threads N] [--quiet]
  mppfv table       --id t1..t13 [--meshes N,N,...] [--output DIR] [--threads N] [--quiet]
";

struct Cli {
    command: String,
    config: Option<String>,
    id: Option<String>,
    meshes: Option<Vec<usize>>,
    output: Option<String>,
    threads: usize,
    quiet: bool,
}

fn parse_args(args: &[String]) -> Result<Cli, String> {
    if args.is_empty() {
        return Err("missing command".into());
    }
    let mut cli = Cli {
        command: args[0].clone(),
        config: None,
        id: None,
        meshes: None,
        output: None,
        threads: 1,
        quiet: false,
    };
    let mut i = 1;
    while i < args.len() {
        let need_value = |i: usize| -> Result<&String, String> {
            args.get(i + 1)
                .ok_or(format!("flag {} needs a value", args[i]))
        };
        match args[i].as_str() {
            "--config" => {
                cli.config = Some(need_value(i)?.clone());
                i += 2;
            }
            "--id" => {
                cli.id = Some(need_value(i)?.clone());
                i += 2;
            }
            "--meshes" => {
                let list = need_value(i)?
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| "bad mesh".to_string())
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                cli.meshes = Some(list);
                i += 2;
            }
            "--output" => {
                cli.output = Some(need_value(i)?.clone());
                i += 2;
            }
            "--threads" => {
                cli.threads = need_value(i)?
                    .parse()
                    .map_err(|_| "bad thread count".to_string())?;
                i += 2;
            }
            "--quiet" => {
                cli.quiet = true;
                i += 1;
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(cli)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command.as_str() {
        "run" => cmd_run(&cli),
        "convergence" => cmd_convergence(&cli),
        "table" => cmd_table(&cli),
        other => {
            eprintln!("error: unknown command `{other}`\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidConfig(_)
            | SolverError::UnknownProblem(_)
            | SolverError::UnknownTable(_)
            | SolverError::InvalidGrid(_)
            | SolverError::UnsupportedOrder(_) => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or(CliError::Validation("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
    let cfg = RunConfig::parse(&text)?;
    Ok(cfg)
}

fn step_config(cfg: &RunConfig, threads: usize) -> Result<StepConfig, CliError> {
    Ok(StepConfig {
        cflc: cfg.cflc,
        cfld: cfg.cfld,
        limiter_on: cfg.limiter,
        limit_stages: cfg.limit_stages,
        t_end: cfg.t_end,
        dt_rule: cfg.dt_rule(),
        scheme: ReconScheme::new((cfg.order - 1) / 2, cfg.weight_mode)?,
        monotone: cfg.monotone_flux,
        threads,
    })
}

fn out_dir(cli: &Cli, cfg_dir: &str) -> PathBuf {
    PathBuf::from(cli.output.clone().unwrap_or_else(|| cfg_dir.to_string()))
}

/// Write via a temp file in the target directory, then rename into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn cmd_run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let problem = cfg.build_problem()?;
    let sc = step_config(&cfg, cli.threads)?;
    let out = execute(&problem, cfg.nx, cfg.ny, sc)?;

    let mut solution = String::new();
    match (&out.field_1d, &out.field_2d) {
        (Some(f), _) => {
            solution.push_str("x,u\n");
            for (j, v) in f.values.iter().enumerate() {
                solution.push_str(&format!("{:.16e},{:.16e}\n", f.grid.cell_center(j), v));
            }
        }
        (_, Some(f)) => {
            solution.push_str("x,y,u\n");
            for j in 0..f.grid.ny {
                for i in 0..f.grid.nx {
                    let (x, y) = f.grid.cell_center(i, j);
                    solution.push_str(&format!(
                        "{x:.16e},{y:.16e},{:.16e}\n",
                        f.values[f.grid.idx(i, j)]
                    ));
                }
            }
        }
        _ => unreachable!(),
    }
    let mut diagnostics = String::from("t,dt,min,max,min_theta,mass\n");
    for d in &out.trace {
        diagnostics.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            d.t, d.dt_used, d.global_min, d.global_max, d.min_theta, d.mass
        ));
    }
    let dir = out_dir(cli, &cfg.output_dir);
    write_atomic(&dir.join("solution.csv"), &solution)?;
    write_atomic(&dir.join("diagnostics.csv"), &diagnostics)?;
    // resolved settings, for exact reruns
    write_atomic(&dir.join("config_used.cfg"), &cfg.serialize())?;
    if !cli.quiet {
        let (l1, linf) = (out.l1, out.linf);
        print!(
            "{}: {} steps, min {:.12}, max {:.12}",
            cfg.problem, out.report.steps, out.report.final_min, out.report.final_max
        );
        if let (Some(l1), Some(linf)) = (l1, linf) {
            print!(", L1 {l1:.3e}, Linf {linf:.3e}");
        }
        println!();
    }
    Ok(())
}

fn cmd_convergence(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if cfg.meshes.is_empty() {
        return Err(CliError::Validation("empty mesh list".into()));
    }
    let problem = cfg.build_problem()?;
    let sc = step_config(&cfg, cli.threads)?;
    let mut blocks = Vec::new();
    for limiter_on in [false, true] {
        let mut rows: Vec<ConvergenceRow> = Vec::new();
        let mut l1s = Vec::new();
        let mut lis = Vec::new();
        for &n in &cfg.meshes {
            let mut sc = sc;
            sc.limiter_on = limiter_on;
            let out = execute(&problem, n, 0, sc)?;
            l1s.push(out.l1.unwrap_or(0.0));
            lis.push(out.linf.unwrap_or(0.0));
            rows.push(ConvergenceRow {
                mesh: match &problem {
                    Problem::D1(_) => format!("{n}"),
                    Problem::D2(_) => format!("{n}x{n}"),
                },
                l1_error: out.l1,
                l1_order: None,
                linf_error: out.linf,
                linf_order: None,
                umax: out.report.final_max,
                umin: out.report.final_min,
            });
        }
        let l1o = harness::convergence_orders(&l1s);
        let lio = harness::convergence_orders(&lis);
        for (i, r) in rows.iter_mut().enumerate() {
            r.l1_order = l1o[i];
            r.linf_order = lio[i];
        }
        blocks.push(TableBlock {
            label: if limiter_on { "MPP" } else { "NonMPP" }.into(),
            rows,
        });
    }
    let table = TableResult {
        id: "convergence".into(),
        title: format!("{} mesh sweep, T = {}", cfg.problem, cfg.t_end),
        blocks,
    };
    let dir = out_dir(cli, &cfg.output_dir);
    write_atomic(&dir.join("convergence.csv"), &table_to_csv(&table))?;
    if !cli.quiet {
        print!("{}", table_to_text(&table));
    }
    Ok(())
}

fn cmd_table(cli: &Cli) -> Result<(), CliError> {
    let id = cli
        .id
        .as_ref()
        .ok_or(CliError::Validation("--id is required (t1..t13)".into()))?;
    let options = TableOptions {
        meshes: cli.meshes.clone(),
        threads: cli.threads,
        barenblatt_mode: None,
    };
    let table = run_table(id, &options)?;
    let dir = out_dir(cli, ".");
    write_atomic(&dir.join(format!("{id}.csv")), &table_to_csv(&table))?;
    if !cli.quiet {
        print!("{}", table_to_text(&table));
    }
    Ok(())
}
