use std::io::IsTerminal;
use std::net::SocketAddr;
use std::process::ExitCode;
use std::time::Duration;

use alnmatch_service::cli::{run, Cli, Command};
use alnmatch_service::server::{serve, Config};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve {
        port,
        bind,
        ttl,
        reaper,
    } = cli.command
    {
        return match start(SocketAddr::new(bind, port), ttl, reaper) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error[serve]: {e:#}");
                ExitCode::FAILURE
            }
        };
    }
    match run(&cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit as u8)
        }
    }
}

fn start(addr: SocketAddr, ttl: u64, reaper: u64) -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let config = Config {
        ttl: Duration::from_secs(ttl),
        reaper_period: Duration::from_secs(reaper.max(1)),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(addr = %listener.local_addr()?, ttl, reaper, "listening");
        serve(listener, config).await?;
        anyhow::Ok(())
    })
}
