use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use privjourney::coding::{read_coded, tally, write_coded};
use privjourney::config::Config;
use privjourney::gateway::{ProviderMode, TranscriptCache};
use privjourney::storyboard::ReportFormat;
use privjourney::workspace::Workspace;
use privjourney_cli::api::{router, AppState};
use privjourney_cli::ops::{self, StoryRequest};
use privjourney_cli::AppError;

#[derive(Debug, Parser)]
#[command(name = "privjourney", version, about = "Persona journeys and storyboards for privacy design reviews")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "PRIVJOURNEY_CONFIG")]
    config: Option<PathBuf>,
    /// Model provider: live, replay or mock.
    #[arg(long, global = true)]
    provider: Option<ProviderMode>,
    /// Workspace root.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create the workspace, store the shipped features and seed the cache
    /// with the demo transcripts.
    Init,
    /// Validate a feature document; exits 0 iff the report is empty.
    Validate { file: PathBuf },
    #[command(subcommand)]
    Personas(PersonasCmd),
    #[command(subcommand)]
    Story(StoryCmd),
    #[command(subcommand)]
    Storyboard(StoryboardCmd),
    #[command(subcommand)]
    Code(CodeCmd),
    /// Cohen's kappa between two label columns of a TSV table.
    Kappa {
        table: PathBuf,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    #[command(subcommand)]
    Cache(CacheCmd),
}

#[derive(Debug, Subcommand)]
enum PersonasCmd {
    /// Generate a persona library and store it in the workspace.
    Build {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    List,
    Filter {
        #[arg(long)]
        dimension: Option<String>,
        #[arg(long)]
        protected_info: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum StoryCmd {
    /// Generate and store a journey story; prints the story document.
    Generate {
        #[arg(long)]
        persona: String,
        /// Feature id in the workspace, or a feature document to add first.
        #[arg(long)]
        feature: String,
        /// Comma-separated function ids, in order.
        #[arg(long, value_delimiter = ',', required = true)]
        functions: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
enum StoryboardCmd {
    /// Render a stored story's annotated storyboard report.
    Render {
        story_id: String,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum CodeCmd {
    /// Code a findings table; prints the coded table and stores the batch.
    Findings { table: PathBuf },
    /// Tally a stored batch id or a coded table file.
    Tally { source: String },
}

#[derive(Debug, Subcommand)]
enum CacheCmd {
    Export { dir: PathBuf },
    Import { dir: PathBuf },
}

fn read(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::new("IoError", format!("IoError: {}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AppError::new("IoError", e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn load_config(cli: &Cli) -> Result<Config, AppError> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(mode) = cli.provider {
        config.provider = mode;
    }
    if let Some(ws) = &cli.workspace {
        config.workspace = ws.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), AppError> {
    let config = load_config(&cli)?;
    let open = || Workspace::open(&config.workspace).map_err(AppError::from);
    match cli.command {
        Command::Init => {
            let ws = Workspace::init(&config.workspace, Some(&config.cache_dir()))?;
            println!("workspace {} ({} features, {} personas)", ws.root().display(), ws.features().len(), ws.library().personas.len());
        }
        Command::Validate { file } => {
            let report = ops::validate_feature_text(&read(&file)?)?;
            if let Some(kind) = report.first_kind() {
                println!("{report}");
                return Err(AppError::new(kind.name(), format!("{} violation(s) in {}", report.violations.len(), file.display())));
            }
            println!("ok");
        }
        Command::Personas(cmd) => {
            let ws = open()?;
            match cmd {
                PersonasCmd::Build { count } => {
                    let library = ops::build_personas(&ws, &config.build_gateway()?, count)?;
                    print_json(&library)?;
                }
                PersonasCmd::List => print_json(&ws.library().personas)?,
                PersonasCmd::Filter { dimension, protected_info } => {
                    print_json(&ops::personas(&ws, dimension.as_deref(), protected_info.as_deref())?)?
                }
            }
        }
        Command::Story(StoryCmd::Generate { persona, feature, functions }) => {
            let ws = open()?;
            let path = Path::new(&feature);
            let feature_id = if path.is_file() { ws.put_feature(&read(path)?)?.feature_id } else { feature };
            let req = StoryRequest { persona_id: persona, feature_id, functions };
            let story = ops::create_story(&ws, &config.build_gateway()?, &req)?;
            eprintln!("story {}", story.story_id);
            print!("{}", story.to_document());
        }
        Command::Storyboard(StoryboardCmd::Render { story_id, format, out }) => {
            let (text, _) = ops::render(&open()?, &story_id, format)?;
            if let Some(out) = out {
                fs::write(&out, &text).map_err(|e| AppError::new("IoError", format!("IoError: {}: {e}", out.display())))?;
            }
            print!("{text}");
        }
        Command::Code(CodeCmd::Findings { table }) => {
            let batch = ops::code_findings(&open()?, &config.build_gateway()?, &read(&table)?)?;
            eprintln!("batch {}", batch.batch_id);
            write_coded(io::stdout().lock(), &batch.coded)?;
        }
        Command::Code(CodeCmd::Tally { source }) => {
            let path = Path::new(&source);
            let t = if path.is_file() {
                tally(&read_coded(read(path)?.as_bytes())?)
            } else {
                ops::coded_batch(&open()?, &source)?.tally
            };
            print_json(&t)?;
        }
        Command::Kappa { table, a, b } => {
            let result = ops::kappa(&read(&table)?, a.as_deref(), b.as_deref())?;
            println!("{}", ops::format_kappa(result.kappa));
        }
        Command::Serve { port, bind } => {
            let ws = open()?;
            let gateway = config.build_gateway()?;
            let addr: SocketAddr = format!("{bind}:{}", port.unwrap_or(config.port))
                .parse()
                .map_err(|e| AppError::bad_request(format!("bad bind address: {e}")))?;
            serve(AppState::new(ws, gateway), addr)?;
        }
        Command::Cache(cmd) => {
            let cache = TranscriptCache::open(config.cache_dir())?;
            let n = match cmd {
                CacheCmd::Export { dir } => cache.export(&dir)?,
                CacheCmd::Import { dir } => cache.import(&dir)?,
            };
            println!("{n} transcripts");
        }
    }
    Ok(())
}

fn serve(state: AppState, addr: SocketAddr) -> Result<(), AppError> {
    let io_err = |e: io::Error| AppError::new("IoError", format!("IoError: {e}"));
    let runtime = tokio::runtime::Runtime::new().map_err(io_err)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(io_err)?;
        tracing::info!(%addr, mode = %state.gateway.mode(), "serving");
        eprintln!("listening on http://{addr}/v1");
        axum::serve(listener, router(state)).await.map_err(io_err)
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
