use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use migbot_core::flow::Engine;
use migbot_core::localization::Locale;
use migbot_core::message::OutboundMessage;
use migbot_core::persistence::JsonFileStore;
use migbot_core::Bundle;
use migbot_gateway::profile::StaticProfiles;
use migbot_gateway::testing::{test_config, RecordingTransport};
use migbot_gateway::Gateway;
use migbot_sim::load::{check_gap_free, run_concurrent};
use migbot_sim::record::{parse_inputs, record};
use migbot_sim::{run_script, Client, Http, InProcess, Script};
use tokio::io::{AsyncBufReadExt, BufReader};

#[derive(Parser)]
#[command(name = "sim", about = "Conversation simulator for the survey bot")]
struct Cli {
    /// Talk to a running gateway instead of an in-process one.
    #[arg(long, global = true)]
    url: Option<String>,
    /// Flow and catalogs for the in-process gateway.
    #[arg(long, global = true)]
    config_dir: Option<PathBuf>,
    /// How long to wait for each expected message.
    #[arg(long, global = true, default_value_t = 5000)]
    wait_ms: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay scripts; exit code 0 iff all pass.
    Run {
        #[arg(required = true)]
        scripts: Vec<PathBuf>,
        #[arg(long)]
        user: Option<String>,
    },
    /// Chat with the bot from the terminal.
    Chat {
        #[arg(long, default_value = "sim-chat")]
        user: String,
        /// Answer the language prompt automatically (pl, uk or en).
        #[arg(long)]
        locale_hint: Option<String>,
    },
    /// Run one script as several users at once.
    Load {
        #[arg(long, default_value_t = 5)]
        clients: usize,
        #[arg(long)]
        script: PathBuf,
        /// Inter-message delay of the in-process gateway.
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
    },
    /// Turn a file of inputs into a script by recording the replies.
    Record {
        inputs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        locale: Option<String>,
        #[arg(long, default_value = "sim-record")]
        user: String,
    },
}

fn locale(code: &str) -> Result<Locale, String> {
    Locale::ALL
        .into_iter()
        .find(|l| l.code() == code)
        .ok_or_else(|| format!("unknown locale {code:?}"))
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_script(path: &Path) -> Result<Script, String> {
    migbot_sim::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

struct Target {
    client: Box<dyn Client>,
    gateway: Option<Arc<Gateway>>,
}

fn target(cli: &Cli, delay: Duration, profiles: StaticProfiles) -> Result<Target, String> {
    if let Some(url) = &cli.url {
        return Ok(Target { client: Box::new(Http::new(url)), gateway: None });
    }
    let bundle = match &cli.config_dir {
        Some(dir) => Bundle::from_dir(dir),
        None => Bundle::default_bundle(),
    }
    .map_err(|e| e.to_string())?;
    let gw = Arc::new(Gateway::new(
        test_config(delay),
        Engine::new(bundle),
        Box::new(JsonFileStore::in_memory()),
        Arc::new(profiles),
        Arc::new(RecordingTransport::default()),
    ));
    Ok(Target { client: Box::new(InProcess(gw.clone())), gateway: Some(gw) })
}

fn profiles_for(script: &Script, users: &[String]) -> StaticProfiles {
    let mut p = StaticProfiles::default();
    if let Some(profile) = &script.profile {
        for u in users {
            p.0.insert(u.clone(), profile.clone());
        }
    }
    p
}

fn print_message(m: &OutboundMessage) {
    for (i, line) in m.text.lines().enumerate() {
        if i == 0 {
            println!("[{}] {line}", m.seq);
        } else {
            println!("     {line}");
        }
    }
    if !m.quick_replies.is_empty() {
        let opts: Vec<String> = m.quick_replies.iter().map(|q| format!("({}) {}", q.payload, q.label)).collect();
        println!("     {}", opts.join("  "));
    }
}

async fn cmd_run(cli: &Cli, scripts: &[PathBuf], user: Option<&str>) -> Result<bool, String> {
    let wait = Duration::from_millis(cli.wait_ms);
    let mut all = true;
    for (i, path) in scripts.iter().enumerate() {
        let script = load_script(path)?;
        let user = user.map(String::from).unwrap_or_else(|| format!("sim-run-{i}"));
        let t = target(cli, Duration::ZERO, profiles_for(&script, std::slice::from_ref(&user)))?;
        let run = run_script(t.client.as_ref(), &script, &user, wait).await.map_err(|e| e.to_string())?;
        println!("{}: {}", path.display(), run.verdict);
        all &= run.passed();
    }
    Ok(all)
}

async fn cmd_load(cli: &Cli, clients: usize, path: &Path, delay: Duration) -> Result<bool, String> {
    let script = load_script(path)?;
    let users: Vec<String> = (1..=clients).map(|i| format!("sim-load-{i}")).collect();
    let t = target(cli, delay, profiles_for(&script, &users))?;
    let wait = Duration::from_millis(cli.wait_ms) + delay * 64;
    let runs = run_concurrent(t.client.as_ref(), &script, &users, wait)
        .await
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    for r in &runs {
        println!("{}: {} ({} messages)", r.user, r.verdict, r.log.len());
        ok &= r.passed();
    }
    if let Some(gw) = &t.gateway {
        gw.outbox().flush().await;
        let log = gw.deliveries();
        match check_gap_free(log.iter().map(|d| (d.recipient.as_str(), d.seq))) {
            Ok(_) => println!("transport log: {} deliveries, gap-free per session", log.len()),
            Err(e) => {
                println!("transport log: {e}");
                ok = false;
            }
        }
    }
    let first = runs.first().map(|r| r.texts());
    if runs.iter().any(|r| Some(r.texts()) != first) {
        println!("sessions diverged from each other");
        ok = false;
    }
    Ok(ok)
}

async fn cmd_record(
    cli: &Cli,
    inputs: &Path,
    out: Option<&Path>,
    locale: Option<Locale>,
    user: &str,
) -> Result<bool, String> {
    let inputs = parse_inputs(&read(inputs)?);
    let t = target(cli, Duration::ZERO, StaticProfiles::default())?;
    // a short wait only bounds the poll after a batch that never closes
    let script = record(t.client.as_ref(), user, &inputs, locale, Duration::from_millis(cli.wait_ms.min(1000)))
        .await
        .map_err(|e| e.to_string())?;
    match out {
        Some(p) => std::fs::write(p, script.to_string()).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{script}"),
    }
    Ok(true)
}

async fn cmd_chat(cli: &Cli, user: &str, hint: Option<Locale>) -> Result<bool, String> {
    let t = target(cli, Duration::ZERO, StaticProfiles::default())?;
    let client = t.client.as_ref();
    let short = Duration::from_millis(300);
    let mut seen = 0;
    let show = |msgs: Vec<OutboundMessage>, seen: &mut u64| {
        for m in msgs {
            *seen = m.seq;
            print_message(&m);
        }
    };
    let history = client.poll(user, 0, Duration::ZERO).await.map_err(|e| e.to_string())?;
    let fresh = history.is_empty();
    show(history, &mut seen);
    if let (true, Some(l)) = (fresh, hint) {
        let index = Locale::ALL.iter().position(|&x| x == l).unwrap_or(0) + 1;
        for text in ["hi".to_string(), index.to_string()] {
            println!("> {text}");
            client.send(user, &text).await.map_err(|e| e.to_string())?;
            show(client.poll(user, seen, short).await.map_err(|e| e.to_string())?, &mut seen);
        }
    }
    let mut lines = BufReader::new(tokio::io::stdin()).lines();
    while let Some(line) = lines.next_line().await.map_err(|e| e.to_string())? {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        client.send(user, line).await.map_err(|e| e.to_string())?;
        let wait = Duration::from_millis(cli.wait_ms);
        loop {
            let batch = client.poll(user, seen, wait).await.map_err(|e| e.to_string())?;
            let done = batch.last().is_none_or(|m| m.end_of_batch);
            show(batch, &mut seen);
            if done {
                break;
            }
        }
    }
    Ok(true)
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { scripts, user } => cmd_run(&cli, scripts, user.as_deref()).await,
        Cmd::Chat { user, locale_hint } => match locale_hint.as_deref().map(locale).transpose() {
            Ok(hint) => cmd_chat(&cli, user, hint).await,
            Err(e) => Err(e),
        },
        Cmd::Load { clients, script, delay_ms } => {
            cmd_load(&cli, *clients, script, Duration::from_millis(*delay_ms)).await
        }
        Cmd::Record { inputs, out, locale: l, user } => match l.as_deref().map(locale).transpose() {
            Ok(l) => cmd_record(&cli, inputs, out.as_deref(), l, user).await,
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(2)
        }
    }
}
