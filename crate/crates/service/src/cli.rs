//! Command-line front end. Every command but `serve` is a pure function from
//! arguments to output text, so it can be tested without a process.
//!
//! Concept arguments are either concept syntax or `@id`, naming an
//! `instance` of the `--kb` file.

use std::fmt;
use std::fmt::Write as _;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use alnmatch::eval::{parse_preference, parse_ranking};
use alnmatch::{
    cnf, embed, parse_concept, parse_kb, rank_offers, render_concept, rnorm, vsm_rank, Concept, Error,
    KbError, KnowledgeBase, Side, SourceSpan,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::ops;

#[derive(Debug, Parser)]
#[command(name = "alnmatch", version, about = "Semantic matchmaking over ALN descriptions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Vsm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match class of a supply against a demand.
    Classify {
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        sup: String,
        #[arg(long)]
        dem: String,
    },
    /// What C lacks to entail D, and its length.
    Abduce {
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long = "c")]
        c: String,
        #[arg(long = "d")]
        d: String,
        /// Prune redundant conjuncts against the KB terminology.
        #[arg(long)]
        tbox_step5: bool,
    },
    /// What C gives up and keeps to become compatible with D.
    Contract {
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long = "c")]
        c: String,
        #[arg(long = "d")]
        d: String,
    },
    /// Ranks offers against a request.
    Rank {
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        request: String,
        /// A .kb file whose instances form the pool. Defaults to the supply
        /// instances of --kb.
        #[arg(long)]
        offers: Option<PathBuf>,
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Agreement of a ranking with a reference preference.
    EvalRnorm {
        #[arg(long)]
        sys: PathBuf,
        #[arg(long)]
        usr: PathBuf,
    },
    /// Canonical form of a concept.
    Normalize {
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        concept: String,
    },
    /// Runs the multi-KB XML service.
    Serve {
        #[arg(long, env = "MAMAS_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, env = "MAMAS_TTL_SECONDS", default_value_t = 300)]
        ttl: u64,
        /// Seconds between sweeps for idle KBs.
        #[arg(long, default_value_t = 10)]
        reaper: u64,
    },
}

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: &'static str,
    pub location: Option<(String, SourceSpan)>,
    pub message: String,
    pub exit: i32,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let Some((source, span)) = &self.location {
            write!(f, " {source}:{span}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl CliError {
    fn from_error(e: Error, source: &str) -> Self {
        let exit = match e {
            Error::Syntax(_) | Error::InvalidTBox(_) => EXIT_DATA,
            _ => EXIT_FAILURE,
        };
        match e {
            Error::Syntax(s) => CliError {
                code: "syntax",
                location: Some((source.to_string(), s.span)),
                message: s.message,
                exit,
            },
            e => CliError {
                code: e.code(),
                location: None,
                message: e.to_string(),
                exit,
            },
        }
    }

    fn data(code: &'static str, message: String) -> Self {
        CliError {
            code,
            location: None,
            message,
            exit: EXIT_DATA,
        }
    }
}

fn reasoning(e: Error) -> CliError {
    CliError::from_error(e, "")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        code: "io",
        location: None,
        message: format!("{}: {e}", path.display()),
        exit: EXIT_NO_INPUT,
    })
}

fn load_kb(path: Option<&Path>) -> Result<KnowledgeBase, CliError> {
    let Some(path) = path else {
        return Ok(KnowledgeBase::default());
    };
    parse_kb(&read(path)?).map_err(|e: KbError| CliError::from_error(e.into(), &path.display().to_string()))
}

/// `@id` names an instance of `kb`; anything else is concept syntax.
fn concept_arg(arg: &str, flag: &str, kb: &KnowledgeBase) -> Result<Concept, CliError> {
    match arg.strip_prefix('@') {
        Some(id) => kb
            .advertisement(id)
            .map(|a| a.concept.clone())
            .ok_or_else(|| CliError::data("unknown-instance", format!("no instance `{id}` in the KB"))),
        None => parse_concept(arg).map_err(|e| CliError::from_error(e.into(), flag)),
    }
}

fn rank(
    kb: Option<&Path>,
    request: &str,
    offers: Option<&Path>,
    baseline: Option<Baseline>,
    format: Format,
) -> Result<String, CliError> {
    let kb = load_kb(kb)?;
    let req = concept_arg(request, "--request", &kb)?;
    let (tbox, pool) = match offers {
        Some(path) => {
            let extra = load_kb(Some(path))?;
            let tbox = kb
                .tbox
                .extended(extra.tbox.axioms().iter().cloned())
                .map_err(|e| CliError::from_error(e.into(), &path.display().to_string()))?;
            let pool = extra.advertisements.into_iter().map(|a| (a.id, a.concept)).collect();
            (tbox, pool)
        }
        None => {
            let skip = request.strip_prefix('@');
            let pool: Vec<(String, Concept)> = kb
                .advertisements
                .iter()
                .filter(|a| a.side == Side::Supply && Some(a.id.as_str()) != skip)
                .map(|a| (a.id.clone(), a.concept.clone()))
                .collect();
            (kb.tbox.clone(), pool)
        }
    };
    if baseline == Some(Baseline::Vsm) {
        let scores = vsm_rank(&req, &pool, &tbox).map_err(reasoning)?;
        return Ok(match format {
            Format::Json => {
                let rows: Vec<_> = scores
                    .iter()
                    .enumerate()
                    .map(|(i, (id, s))| serde_json::json!({"rank": i + 1, "id": id, "score": s}))
                    .collect();
                format!("{:#}\n", serde_json::json!({ "results": rows }))
            }
            Format::Table => {
                let w = scores.iter().map(|(id, _)| id.len()).max().unwrap_or(0).max(2);
                let mut out = format!("rank  {:<w$}  score\n", "id");
                for (i, (id, s)) in scores.iter().enumerate() {
                    let _ = writeln!(out, "{:<4}  {:<w$}  {:.4}", i + 1, id, s);
                }
                out
            }
        });
    }
    let ranked = rank_offers(&req, &pool, &tbox).map_err(reasoning)?;
    Ok(match format {
        Format::Table => ranked.to_table(),
        Format::Json => format!("{:#}\n", ranked.to_json()),
    })
}

/// Runs a command other than `serve`, returning what it prints.
pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Classify { kb, sup, dem } => {
            let kb = load_kb(kb.as_deref())?;
            let s = concept_arg(sup, "--sup", &kb)?;
            let d = concept_arg(dem, "--dem", &kb)?;
            let m = ops::classify(&s, &d, &kb.tbox).map_err(reasoning)?;
            Ok(format!("{m}\n"))
        }
        Command::Abduce { kb, c, d, tbox_step5 } => {
            let kb = load_kb(kb.as_deref())?;
            let c = concept_arg(c, "--c", &kb)?;
            let d = concept_arg(d, "--d", &kb)?;
            let sol = ops::hypothesis(&c, &d, &kb.tbox, *tbox_step5).map_err(reasoning)?;
            Ok(format!(
                "H = {}\npenalty = {}\n",
                render_concept(&sol.hypothesis),
                sol.penalty
            ))
        }
        Command::Contract { kb, c, d } => {
            let kb = load_kb(kb.as_deref())?;
            let c = concept_arg(c, "--c", &kb)?;
            let d = concept_arg(d, "--d", &kb)?;
            let pair = ops::contraction(&c, &d, &kb.tbox).map_err(reasoning)?;
            Ok(format!(
                "G = {}\nK = {}\npenalty = {}\n",
                render_concept(&pair.give_up),
                render_concept(&pair.keep),
                pair.penalty
            ))
        }
        Command::Rank {
            kb,
            request,
            offers,
            baseline,
            format,
        } => rank(kb.as_deref(), request, offers.as_deref(), *baseline, *format),
        Command::EvalRnorm { sys, usr } => {
            let sys = parse_ranking(&read(sys)?);
            let usr = parse_preference(&read(usr)?);
            let r = rnorm(&sys, &usr).map_err(reasoning)?;
            Ok(format!("{r}\n"))
        }
        Command::Normalize { kb, concept } => {
            let kb = load_kb(kb.as_deref())?;
            let c = concept_arg(concept, "--concept", &kb)?;
            let n = cnf(&c, &kb.tbox).map_err(|e| reasoning(e.into()))?;
            Ok(format!("{}\n", render_concept(&embed(&n))))
        }
        Command::Serve { .. } => unreachable!("`serve` is handled by the binary"),
    }
}
