use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ose_cli::batch::{self, Failure, InputPaths, Output};
use ose_cli::server::{app, AppState, Defaults};
use ose_planner::ose::{validate_db, WhatIfField};
use ose_planner::pipeline::{parse_osedb, parse_part, parse_tools, read_file};
use ose_planner::session::SessionStore;

/// Knowledge-based process planning for milled parts.
///
/// Exit codes: 0 success, 1 input error, 2 validation or audit findings,
/// 3 pipeline infeasibility.
#[derive(Debug, Parser)]
#[command(name = "ose", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Args)]
struct Common {
    /// Part JSON (faces as sampled grids with adjacency).
    #[arg(long)]
    part: Option<PathBuf>,
    /// OSE database JSON.
    #[arg(long)]
    osedb: Option<PathBuf>,
    /// Cutting-set list JSON.
    #[arg(long)]
    tools: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Classification and accessibility tolerances JSON; missing keys keep
    /// their defaults.
    #[arg(long)]
    tolerances: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Field {
    MfgType,
    Mode,
    Tmc,
}

impl From<Field> for WhatIfField {
    fn from(f: Field) -> Self {
        match f {
            Field::MfgType => WhatIfField::MfgType,
            Field::Mode => WhatIfField::Mode,
            Field::Tmc => WhatIfField::Tmc,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Classify faces and compute their attributes.
    Transform(Common),
    /// Rank candidate (OSE, cutting set) pairs for every face.
    Match(Common),
    /// Run the whole pipeline and write the plan document JSON.
    Plan(Common),
    /// Audit the OSE database for shadowing, duplicates and unsatisfiable OSEs.
    Audit(Common),
    /// List single-field variations of an OSE and whether the database covers them.
    Whatif {
        #[command(flatten)]
        common: Common,
        /// OSE id.
        #[arg(long)]
        ose: String,
        /// Fields to vary; all when absent.
        #[arg(long, value_enum, value_delimiter = ',')]
        vary: Vec<Field>,
    },
    /// Render the plan document as text.
    Report {
        #[command(flatten)]
        common: Common,
        /// Existing plan document JSON to render instead of running the pipeline.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Serve the HTTP session API.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory holding the session documents.
        #[arg(long, default_value = "sessions")]
        store: PathBuf,
    },
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure::Input(format!("missing --{flag}")))
}

fn paths(c: &Common) -> Result<InputPaths<'_>, Failure> {
    Ok(InputPaths {
        part: need(&c.part, "part")?,
        osedb: need(&c.osedb, "osedb")?,
        tools: need(&c.tools, "tools")?,
    })
}

fn write(out: &Option<PathBuf>, o: &Output) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, &o.body).map_err(|e| Failure::Input(format!("{}: cannot write: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(o.body.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Input(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn serve(common: &Common, host: std::net::IpAddr, port: u16, store: &Path) -> Result<(), Failure> {
    let osedb = need(&common.osedb, "osedb")?;
    let tools = need(&common.tools, "tools")?;
    let db = parse_osedb(&read_file(osedb)?, &osedb.display().to_string())?;
    let findings = validate_db(&db);
    if !findings.is_empty() {
        let list: Vec<String> = findings.iter().map(|f| f.to_string()).collect();
        return Err(Failure::Validation(format!("[validate] osedb:\n{}", list.join("\n"))));
    }
    let tools = parse_tools(&read_file(tools)?, &tools.display().to_string())?;
    let part = match &common.part {
        Some(p) => Some(parse_part(&read_file(p)?, &p.display().to_string())?),
        None => None,
    };
    let defaults = Defaults {
        part,
        db,
        tools,
        tolerances: batch::load_tolerances(common.tolerances.as_deref())?,
    };
    let store = SessionStore::open(store).map_err(|e| Failure::Input(e.to_string()))?;
    let router = app(AppState::new(store, defaults));
    let addr = SocketAddr::new(host, port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Input(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router).await
    })
    .map_err(|e| Failure::Input(format!("{addr}: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (common, result) = match &cli.verb {
        Verb::Transform(c) => (c, batch::transform(need(&c.part, "part")?, &batch::load_tolerances(c.tolerances.as_deref())?)),
        Verb::Match(c) => (c, batch::match_faces(paths(c)?, &batch::load_tolerances(c.tolerances.as_deref())?)),
        Verb::Plan(c) => (c, batch::plan(paths(c)?, &batch::load_tolerances(c.tolerances.as_deref())?)),
        Verb::Audit(c) => (c, batch::audit(need(&c.osedb, "osedb")?)),
        Verb::Whatif { common, ose, vary } => {
            let vary: Vec<WhatIfField> = vary.iter().map(|&f| f.into()).collect();
            (common, batch::whatif(need(&common.osedb, "osedb")?, ose, &vary))
        }
        Verb::Report { common, plan } => {
            let inputs = if plan.is_some() { None } else { Some(paths(common)?) };
            let tol = batch::load_tolerances(common.tolerances.as_deref())?;
            (common, batch::report(plan.as_deref(), inputs, &tol))
        }
        Verb::Serve {
            common,
            port,
            host,
            store,
        } => {
            serve(common, *host, *port, store)?;
            return Ok(batch::EXIT_OK);
        }
    };
    let output = result?;
    write(&common.out, &output)?;
    Ok(output.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { batch::EXIT_INPUT } else { batch::EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
