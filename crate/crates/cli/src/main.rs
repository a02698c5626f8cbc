use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mso2dd::assignment::{describe_bits, parse_assignment};
use mso2dd::decomp::{make_nice, parse_decomposition};
use mso2dd::graph::{parse_graph, Graph};
use mso2dd::io::{
    decomposition_to_dot, diagram_to_dot, obdd_doc, read_diagram, sdd_doc, write_doc, AnyDiagram,
};
use mso2dd::mso::{parse_formula, Formula};
use mso2dd::pipeline::{bench_kt, bench_table, compile, first_mismatch, prepare, Target};
use mso2dd::query::{
    cnf_of_graph, enumerate_models, is_satisfiable, min_cardinality_model, model_count, variables_of, Diagram,
};

#[derive(Parser)]
#[command(name = "mso2dd", version, about = "Compile MSO2 graph properties into SDDs and OBDDs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Sdd,
    Obdd,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Sdd => Target::Sdd,
            TargetArg::Obdd => Target::Obdd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryKind {
    Sat,
    Count,
    Enumerate,
    MinCard,
    Eval,
}

#[derive(clap::Args)]
struct Inputs {
    /// Graph in PACE `.gr` format.
    #[arg(long)]
    graph: PathBuf,
    /// Tree decomposition in PACE `.td` format; computed when absent.
    #[arg(long)]
    td: Option<PathBuf>,
    /// File holding the formula.
    #[arg(long)]
    formula: PathBuf,
    #[arg(long, value_enum, default_value = "sdd")]
    target: TargetArg,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula on a graph and write the diagram.
    Compile {
        #[command(flatten)]
        inputs: Inputs,
        /// Diagram output path; the statistics go to stdout either way.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the reachable states of every decomposition node here.
        #[arg(long)]
        dump_states: Option<PathBuf>,
    },
    /// Compare a diagram with brute-force evaluation on every assignment.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Check this diagram file instead of compiling one.
        #[arg(long)]
        diagram: Option<PathBuf>,
        /// Largest number of decision variables to enumerate.
        #[arg(long, default_value_t = 20)]
        cap: usize,
    },
    /// Answer a query on a diagram file.
    Query {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, value_enum)]
        query: QueryKind,
        /// Most models to print for `enumerate`.
        #[arg(long, default_value_t = 10)]
        limit: usize,
        /// Free variables whose decision variables are counted by `min-card`.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<String>,
        /// Free variables forced empty (all decision variables false) for `min-card`.
        #[arg(long, value_delimiter = ',')]
        zero: Vec<String>,
        /// Assignment file for `eval`.
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
    /// OBDD sizes of the cover constraints of clique trees.
    BenchKt {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        r_max: u32,
    },
    /// Graphviz rendering of a diagram file, or of the nice decomposition
    /// used for a graph.
    ExportDot {
        #[arg(long, conflicts_with = "graph")]
        diagram: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        td: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The cover constraints of a graph in DIMACS format.
    ExportCnf {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    parse_graph(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_inputs(i: &Inputs) -> Result<(Formula, Graph, Option<mso2dd::decomp::TreeDecomposition>)> {
    let g = load_graph(&i.graph)?;
    let phi = parse_formula(&read(&i.formula)?).with_context(|| format!("in {}", i.formula.display()))?;
    let td = match &i.td {
        Some(p) => Some(parse_decomposition(&read(p)?).with_context(|| format!("in {}", p.display()))?),
        None => None,
    };
    Ok((phi, g, td))
}

fn load_diagram(path: &Path) -> Result<AnyDiagram> {
    read_diagram(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Compile { inputs, out, dump_states } => {
            let (phi, g, td) = load_inputs(&inputs)?;
            let c = compile(&phi, &g, td.as_ref(), inputs.target.into())?;
            if let Some(p) = dump_states {
                let mut m = c.instance.machine();
                let reach = c.instance.reachable(&mut m);
                emit(Some(&p), &c.instance.dump_states(&mut m, &reach))?;
            }
            if let Some(p) = out {
                let doc = match &c.diagram {
                    AnyDiagram::Sdd(s) => sdd_doc(s, c.stats.pairs()),
                    AnyDiagram::Obdd(o) => obdd_doc(o, c.stats.pairs()),
                };
                emit(Some(&p), &write_doc(&doc))?;
            }
            print!("{}", c.stats.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { inputs, diagram, cap } => {
            let (phi, g, td) = load_inputs(&inputs)?;
            let d = match diagram {
                Some(p) => load_diagram(&p)?,
                None => compile(&phi, &g, td.as_ref(), inputs.target.into())?.diagram,
            };
            let expected = mso2dd::assignment::Legend::new(&phi, &g);
            if d.legend().decision_variables() != expected.decision_variables() {
                bail!("diagram variables do not match the formula and graph");
            }
            match first_mismatch(&phi, &g, &d, cap)? {
                None => {
                    println!("OK: {} agrees with the oracle on all 2^{} assignments", d.kind(), expected.decision_count());
                    Ok(ExitCode::SUCCESS)
                }
                Some(bits) => {
                    println!("MISMATCH at {}", describe_bits(d.legend(), &bits));
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Query { diagram, query, limit, targets, zero, assignment } => {
            let d = load_diagram(&diagram)?;
            match query {
                QueryKind::Sat => println!("{}", if is_satisfiable(&d) { "SAT" } else { "UNSAT" }),
                QueryKind::Count => println!("{}", model_count(&d)),
                QueryKind::Enumerate => {
                    if limit == 0 {
                        bail!("--limit must be at least 1");
                    }
                    for (i, (_, alpha)) in enumerate_models(&d, limit).iter().enumerate() {
                        println!("c model {}", i + 1);
                        print!("{alpha}");
                    }
                }
                QueryKind::MinCard => {
                    let legend = d.legend();
                    let t = if targets.is_empty() {
                        (0..legend.decision_count()).collect()
                    } else {
                        variables_of(legend, &targets)?
                    };
                    let z = variables_of(legend, &zero)?;
                    let r = min_cardinality_model(&d, &t, &z)?;
                    println!("min-card {}", r.cardinality);
                    print!("{}", r.assignment);
                }
                QueryKind::Eval => {
                    let Some(p) = assignment else { bail!("eval needs --assignment") };
                    let legend = d.legend();
                    let alpha = parse_assignment(&read(&p)?, legend.free())?;
                    let mut bits = legend.encode_bits(&alpha)?;
                    bits.resize(legend.len(), false);
                    println!("{}", d.evaluate_bits(&bits));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::BenchKt { k, r_max } => {
            let rows = bench_kt(k, r_max)?;
            print!("{}", bench_table(k, &rows));
            let failed = rows.iter().any(|r| r.bound_holds == Some(false));
            Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::ExportDot { diagram, graph, td, out } => {
            let text = match (diagram, graph) {
                (Some(p), _) => diagram_to_dot(&load_diagram(&p)?),
                (None, Some(gp)) => {
                    let g = load_graph(&gp)?;
                    match td {
                        Some(p) => decomposition_to_dot(&make_nice(&g, &parse_decomposition(&read(&p)?)?)?),
                        None => {
                            let phi = parse_formula("exists vertex v. (v = v)")?;
                            let (inst, _) = prepare(&phi, &g, None, Target::Sdd)?;
                            decomposition_to_dot(inst.decomposition())
                        }
                    }
                }
                (None, None) => bail!("export-dot needs --diagram or --graph"),
            };
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportCnf { graph, out } => {
            emit(out.as_deref(), &cnf_of_graph(&load_graph(&graph)?).to_dimacs())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
