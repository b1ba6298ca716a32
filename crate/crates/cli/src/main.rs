mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causaloop::affects::DEFAULT_ENUM_CAP;
use causaloop::error::{Error, Result};
use causaloop::format::{self, ModelFile};
use causaloop::prob::{parse_ratio, Prob};
use causaloop::scenarios::{library, run_scenario, scenario};
use causaloop::spacetime::minkowski::{apex_1p1, slice_contained};
use causaloop::spacetime::{Containment, Embedding, Event, Point};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use report::Report;

#[derive(Parser)]
#[command(name = "causaloop", version, about = "Affects relations, signalling and spacetime compatibility for finite causal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(clap::Args)]
struct EnumArgs {
    /// Also evaluate relations conditioned on observed nodes.
    #[arg(long)]
    conditional: bool,
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
    max_nodes: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Every affects relation of a model, with arrows, NS verdicts, compatibility and loops where the file allows.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: EnumArgs,
        /// Report holding relations only.
        #[arg(long)]
        holding: bool,
    },
    /// Non-signalling verdicts for the roles in the file.
    Ns { file: PathBuf },
    /// Compatibility of the model with its embedding.
    Compat {
        file: PathBuf,
        #[command(flatten)]
        opts: EnumArgs,
    },
    /// Affects-loop certification, and hidden-loop certification against a witness model.
    Loops {
        file: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        opts: EnumArgs,
    },
    /// Light-cone queries on raw events; coordinates are spatial first, time last.
    Geometry {
        #[command(subcommand)]
        query: Geometry,
    },
    /// Runs library scenarios and checks their expectations.
    Scenario {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        #[arg(long)]
        list: bool,
        /// Print the scenario as a model file instead of running it.
        #[arg(long, requires = "name")]
        export: bool,
    },
}

#[derive(Subcommand)]
enum Geometry {
    /// Order of Q relative to P.
    Precedes {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(allow_hyphen_values = true, required = true)]
        coords: Vec<String>,
    },
    /// Earliest point of the joint future of two 1+1D events.
    Apex {
        #[arg(allow_hyphen_values = true, num_args = 4)]
        coords: Vec<String>,
    },
    /// Whether the joint future of all but the last event lies in the future of the last.
    Contain {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(allow_hyphen_values = true, required = true)]
        coords: Vec<String>,
    },
    /// The same question for events A, C, B restricted to time T.
    Slice {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(allow_hyphen_values = true, required = true)]
        coords: Vec<String>,
    },
}

fn read(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    format::parse(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

fn points(coords: &[String], dim: usize, count: Option<usize>) -> Result<Vec<Point>> {
    let vals: Vec<Prob> = coords
        .iter()
        .map(|c| parse_ratio(c).ok_or_else(|| Error::InvalidArgument(format!("`{c}` is not a rational number"))))
        .collect::<Result<_>>()?;
    let k = dim + 1;
    if dim == 0 || vals.len() % k != 0 || count.is_some_and(|n| vals.len() != n * k) {
        return Err(Error::InvalidArgument(format!("expected groups of {k} coordinates")));
    }
    Ok(vals.chunks(k).map(|c| Point::new(c[..dim].to_vec(), c[dim])).collect())
}

fn geometry(q: &Geometry) -> Result<serde_json::Value> {
    Ok(match q {
        Geometry::Precedes { dim, coords } => {
            let p = points(coords, *dim, Some(2))?;
            let e = Embedding::minkowski(*dim)?;
            let o = e.precedes(&Event::Point(p[0].clone()), &Event::Point(p[1].clone()))?;
            json!({ "query": "precedes", "answer": serde_json::to_value(o).expect("order") })
        }
        Geometry::Apex { coords } => {
            let p = points(coords, 1, Some(2))?;
            json!({ "query": "apex", "answer": apex_1p1(&p[0], &p[1])?.render() })
        }
        Geometry::Contain { dim, coords } => {
            let p = points(coords, *dim, None)?;
            if p.len() < 2 {
                return Err(Error::InvalidArgument("need at least one left event and the right event".into()));
            }
            let (right, left) = p.split_last().unwrap();
            let e = Embedding::minkowski(*dim)?;
            let left: Vec<Event> = left.iter().cloned().map(Event::Point).collect();
            let c: Containment = e.joint_future_contained(&left, &[Event::Point(right.clone())])?;
            json!({ "query": "contain", "answer": serde_json::to_value(c).expect("containment") })
        }
        Geometry::Slice { dim, coords } => {
            let t = coords.last().and_then(|c| parse_ratio(c)).ok_or_else(|| Error::InvalidArgument("missing slice time".into()))?;
            let p = points(&coords[..coords.len() - 1], *dim, Some(3))?;
            json!({ "query": "slice", "answer": slice_contained(&p[0], &p[1], &p[2], &t)?.to_string() })
        }
    })
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Analyze { file, opts, holding } => {
            let f = read(file)?;
            let m = f.model()?;
            let vs = report::verdicts(m, opts.conditional, opts.max_nodes)?;
            let mut r = Report::new("analyze");
            report::relations_into(&mut r, m, &vs, *holding)?;
            if let Some(roles) = &f.roles {
                r.ns = Some(report::ns_report(&f.distribution()?, roles, Some(m))?);
            }
            if f.embedding.is_some() {
                r.compat = Some(report::compat_section(&f, &vs)?);
            }
            r.loops = Some(report::loop_section(m, &vs, None, opts.conditional)?);
            Ok(r)
        }
        Command::Ns { file } => {
            let f = read(file)?;
            let mut r = Report::new("ns");
            r.ns = Some(report::ns_report(&f.distribution()?, f.roles()?, f.model.as_ref())?);
            Ok(r)
        }
        Command::Compat { file, opts } => {
            let f = read(file)?;
            f.embedding()?;
            let vs = report::verdicts(f.model()?, opts.conditional, opts.max_nodes)?;
            let mut r = Report::new("compat");
            r.compat = Some(report::compat_section(&f, &vs)?);
            Ok(r)
        }
        Command::Loops { file, witness, opts } => {
            let f = read(file)?;
            let m = f.model()?;
            let w = witness.as_deref().map(read).transpose()?;
            let wm = w.as_ref().map(ModelFile::model).transpose()?;
            let vs = report::verdicts(m, opts.conditional, opts.max_nodes)?;
            let mut r = Report::new("loops");
            r.loops = Some(report::loop_section(m, &vs, wm, opts.conditional)?);
            Ok(r)
        }
        Command::Geometry { query } => {
            let mut r = Report::new("geometry");
            r.geometry = Some(geometry(query)?);
            Ok(r)
        }
        Command::Scenario { name, all, list, export } => {
            let mut r = Report::new("scenario");
            if *list {
                for s in library()? {
                    println!("{:<28} {}", s.name, s.summary);
                }
                return Ok(r);
            }
            let suite = match (name, all) {
                (Some(n), _) => vec![scenario(n)?],
                (None, true) => library()?,
                (None, false) => return Err(Error::InvalidArgument("give a scenario name, --all or --list".into())),
            };
            if *export {
                let s = &suite[0];
                let roles = s.model.as_ref().is_none_or(|m| s.roles.validate(m).is_ok()).then(|| s.roles.clone());
                let f = ModelFile { model: s.model.clone(), table: s.table.clone(), roles, embedding: s.embedding.clone() };
                print!("{}", format::export(&f)?);
                return Ok(r);
            }
            r.scenarios = suite.iter().map(run_scenario).collect();
            Ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            let quiet = matches!(&cli.command, Command::Scenario { list: true, .. } | Command::Scenario { export: true, .. });
            if !quiet {
                match cli.format {
                    OutputFormat::Json => print!("{}", report::to_json(&r)),
                    OutputFormat::Text => print!("{}", report::to_text(&r)),
                }
            }
            if r.failed() {
                ExitCode::from(1)
            } else if r.undetermined() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
