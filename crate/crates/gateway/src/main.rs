use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use migbot_core::analytics::{
    demographics_table, student_t_independent, student_t_raw, sus_summary, Demographics,
    GroupKey, GroupStats,
};
use migbot_core::persistence::{export_csv, import_csv, JsonFileStore, RecordStore};
use migbot_gateway::app::router;
use migbot_gateway::config::ServeArgs;

#[derive(Parser)]
#[command(name = "migbot", about = "Survey chatbot gateway and reporting tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the webhook and loopback HTTP server.
    Serve(ServeArgs),
    /// Write all records as CSV.
    Export {
        #[arg(long, env = "MIGBOT_STORE", default_value = "migbot-store.json")]
        store: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only records that completed the survey.
        #[arg(long)]
        finalized: bool,
    },
    /// Reports over a CSV export.
    Analytics {
        #[command(subcommand)]
        report: Report,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum By {
    Device,
    Immigrant,
}

impl From<By> for GroupKey {
    fn from(b: By) -> Self {
        match b {
            By::Device => GroupKey::Device,
            By::Immigrant => GroupKey::Immigrant,
        }
    }
}

#[derive(Subcommand)]
enum Report {
    /// Participant counts and percentages.
    Demographics {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// SUS score per group against the 68 benchmark.
    Sus {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "device")]
        by: By,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Pooled t-test of SUS scores between immigrants and non-immigrants,
    /// or between two groups given as n,mean,sd.
    Ttest {
        csv: Option<PathBuf>,
        #[arg(long, value_parser = parse_stats, requires = "b")]
        a: Option<GroupStats>,
        #[arg(long, value_parser = parse_stats)]
        b: Option<GroupStats>,
    },
}

fn parse_stats(s: &str) -> Result<GroupStats, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, mean, sd] = parts.as_slice() else {
        return Err("expected n,mean,sd".into());
    };
    Ok(GroupStats {
        n: n.parse().map_err(|e| format!("n: {e}"))?,
        mean: mean.parse().map_err(|e| format!("mean: {e}"))?,
        sd: sd.parse().map_err(|e| format!("sd: {e}"))?,
    })
}

fn read_records(path: &PathBuf) -> Result<Vec<migbot_core::persistence::SessionRecord>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    import_csv(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn report(r: Report) -> Result<(), String> {
    match r {
        Report::Demographics { csv, format } => {
            let rows: Vec<Demographics> = read_records(&csv)?.iter().map(Demographics::from_record).collect();
            let table = demographics_table(&rows);
            match format {
                Format::Text => print!("{table}"),
                Format::Csv => print!("{}", table.to_csv()),
            }
        }
        Report::Sus { csv, by, format } => {
            let rows = sus_summary(&read_records(&csv)?, by.into());
            match format {
                Format::Text => {
                    println!("{:<14} {:>4} {:>7} {:>7}  vs 68", "Group", "N", "M", "SD");
                    for r in rows {
                        let sd = r.sd.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
                        println!("{:<14} {:>4} {:>7.2} {:>7}  {}", r.group, r.n, r.mean, sd, r.flag.label());
                    }
                }
                Format::Csv => {
                    println!("Group,N,M,SD,Benchmark");
                    for r in rows {
                        let sd = r.sd.map(|v| format!("{v:.2}")).unwrap_or_default();
                        println!("{},{},{:.2},{sd},{}", r.group, r.n, r.mean, r.flag.label());
                    }
                }
            }
        }
        Report::Ttest { csv, a, b } => {
            let result = match (csv, a, b) {
                (_, Some(a), Some(b)) => student_t_independent(&a, &b),
                (Some(csv), None, None) => {
                    let records = read_records(&csv)?;
                    let scores = |flag: bool| -> Vec<f64> {
                        records
                            .iter()
                            .filter(|r| r.immigrant == Some(flag))
                            .filter_map(|r| r.sus_score().map(|s| s.value()))
                            .collect()
                    };
                    let (natives, immigrants) = (scores(false), scores(true));
                    for (name, g) in [("non-immigrant", &natives), ("immigrant", &immigrants)] {
                        if g.len() < 2 {
                            return Err(format!("{name} group has {} SUS scores, need at least 2", g.len()));
                        }
                    }
                    student_t_raw(&natives, &immigrants)
                }
                _ => return Err("give a CSV export or both --a and --b".into()),
            }
            .map_err(|e| e.to_string())?;
            println!("{result}");
        }
    }
    Ok(())
}

async fn serve(args: ServeArgs) -> Result<(), String> {
    let gw = Arc::new(args.build()?);
    let listener = tokio::net::TcpListener::bind(&args.bind)
        .await
        .map_err(|e| format!("bind {}: {e}", args.bind))?;
    log::info!("listening on {}", args.bind);
    axum::serve(listener, router(gw))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => serve(args).await,
        Command::Export { store, out, finalized } => JsonFileStore::open(&store)
            .map_err(|e| e.to_string())
            .and_then(|s| {
                let records: Vec<_> = s.records().into_iter().filter(|r| !finalized || r.finalized).collect();
                export_csv(&records).map_err(|e| e.to_string())
            })
            .and_then(|csv| match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }),
        Command::Analytics { report: r } => report(r),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("migbot: {e}");
            ExitCode::FAILURE
        }
    }
}
