//! Command-line driver: builds pavings, triangulates and validates them,
//! computes systoles, links and barrier certificates, verifies the wall
//! polyhedron and its volume, and runs the Nielsen-move operations. Every
//! invocation emits a deterministic JSON report; progress text and timings
//! go to stderr only.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use tetralink_core::dual_graph::{
    build_dual_graph, homological_systole, homology_annotations, Annotations, HatTau,
    SystoleOutcome, DEFAULT_SYSTOLE_CAP,
};
use tetralink_core::halfspace::{
    build_tangle_polyhedron, expected_tangle_angle_table, verify_polyhedron,
};
use tetralink_core::nielsen::{
    equivalence_search, lift_moves, nielsen_reduce, GroupTuple, Move, Target, Word,
};
use tetralink_core::paving::{torus_paving, triangulate, validate_paving, Paving};
use tetralink_core::tangle::{
    barrier_certificate, build_link, complement_volume, face_tangle_svg, surface_family,
};
use tetralink_core::triangulation::validate_cooper_thurston;
use tetralink_core::volume::{polyhedron_volume, QuadratureParams};

const DEFAULT_TOL: f64 = 1e-9;
const DEFAULT_QUAD_DEPTH: u32 = 8;
const QUADRATURE_CELL_BUDGET: u64 = 100_000_000;

#[derive(Parser)]
#[command(name = "tetralink", version, about = "Cubical pavings, triangulations, systoles, links and barrier certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SourceArgs {
    /// Side length k of the built-in k x k x k torus paving.
    #[arg(long, value_name = "K", conflicts_with = "paving")]
    torus: Option<usize>,
    /// Paving described as JSON (cubes and face gluings).
    #[arg(long, value_name = "FILE")]
    paving: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Tolerance in radians/coordinates for angle-table comparison.
    #[arg(long, env = "TETRALINK_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Subdivision depth of the volume quadrature.
    #[arg(long, env = "TETRALINK_QUAD_DEPTH", default_value_t = DEFAULT_QUAD_DEPTH)]
    quad_depth: u32,
    /// State cap for the covering-space systole search.
    #[arg(long, env = "TETRALINK_CAP", default_value_t = DEFAULT_SYSTOLE_CAP)]
    cap: usize,
    /// Record that the fundamental group is abelian, making the homological
    /// systole the true combinatorial systole.
    #[arg(long)]
    assert_abelian_pi1: bool,
}

impl Default for ConfigArgs {
    fn default() -> Self {
        ConfigArgs {
            tol: DEFAULT_TOL,
            quad_depth: DEFAULT_QUAD_DEPTH,
            cap: DEFAULT_SYSTOLE_CAP,
            assert_abelian_pi1: false,
        }
    }
}

#[derive(Args, Clone, Default)]
struct OutputArgs {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, value_name = "FILE.json")]
    out: Option<PathBuf>,
    /// Suppress progress text.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    /// Free group.
    Free,
    /// Free-abelian group.
    Ab,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Free => Target::Free,
            TargetArg::Ab => Target::FreeAbelian,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Paving, triangulation and validation; --all adds systole, link,
    /// certificate, polyhedron and volume stages.
    Pipeline {
        #[command(flatten)]
        source: SourceArgs,
        /// Run every stage.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Homological systole of the dual barycenter graph.
    Systole {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Link assembly and surface family summary.
    Link {
        #[command(flatten)]
        source: SourceArgs,
        /// Write the per-face tangle picture as SVG.
        #[arg(long, value_name = "FILE.svg")]
        svg: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Barrier certificate along a shortest homologically nontrivial loop.
    Certificate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nielsen moves on tuples: lifting, reduction, bounded search.
    Nielsen {
        #[command(subcommand)]
        op: NielsenOp,
    },
    /// Hyperbolic volume of the wall polyhedron, and of the glued complement
    /// when a paving source is given.
    Volume {
        /// Which polyhedron to integrate (only "canonical" is built in).
        #[arg(long, default_value = "canonical")]
        polyhedron: String,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// The canonical six-wall polyhedron: verification and export.
    Polyhedron {
        #[command(subcommand)]
        op: PolyhedronOp,
    },
}

#[derive(Subcommand)]
enum NielsenOp {
    /// Apply a move sequence to the standard basis and to its images under
    /// the homomorphism those images determine.
    Lift {
        /// Rank of the free group upstairs.
        #[arg(long)]
        rank: usize,
        /// Target of the homomorphism.
        #[arg(long, value_enum, default_value_t = TargetArg::Free)]
        target: TargetArg,
        /// Images of the standard generators, semicolon-separated ("a; b").
        /// Defaults to the standard generators themselves.
        #[arg(long)]
        images: Option<String>,
        /// Move list like "R 1 2; I 2; S 1 2".
        #[arg(long, default_value = "")]
        moves: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nielsen-reduce a tuple and report whether it is a basis.
    Reduce {
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = TargetArg::Free)]
        target: TargetArg,
        /// Tuple entries, semicolon-separated.
        #[arg(long)]
        words: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bounded breadth-first search for a connecting move sequence.
    Search {
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = TargetArg::Free)]
        target: TargetArg,
        /// Starting tuple, semicolon-separated.
        #[arg(long)]
        from: String,
        /// Goal tuple, semicolon-separated.
        #[arg(long)]
        to: String,
        /// Total-length bound on intermediate tuples.
        #[arg(long)]
        max_len: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum PolyhedronOp {
    /// Check the wall family against the expected angle table.
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the wall family, labels and expected angles as JSON.
    Export {
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
#[serde(rename_all = "camelCase")]
struct RunReport {
    command: String,
    inputs: Inputs,
    stages: Vec<Stage>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
#[serde(rename_all = "camelCase")]
struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<Value>,
    tol: f64,
    quad_depth: u32,
    cap: usize,
    assert_abelian_pi1: bool,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
#[serde(rename_all = "camelCase")]
struct Stage {
    name: String,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<Value>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug, Clone, Copy)]
#[serde(rename_all = "camelCase")]
enum Status {
    Passed,
    Failed,
    Skipped,
}

struct Runner {
    stages: Vec<Stage>,
    quiet: bool,
}

enum StageOutcome {
    Pass(Option<Value>),
    Fail(String, Option<Value>),
}

impl Runner {
    fn new(quiet: bool) -> Self {
        Runner { stages: Vec::new(), quiet }
    }

    fn skip(&mut self, name: &str, reason: &str) {
        if !self.quiet {
            eprintln!("stage {name}: skipped ({reason})");
        }
        self.stages.push(Stage {
            name: name.to_string(),
            status: Status::Skipped,
            reason: Some(reason.to_string()),
            data: None,
        });
    }

    fn run(&mut self, name: &str, f: impl FnOnce() -> StageOutcome) -> bool {
        let start = Instant::now();
        let outcome = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let (status, reason, data) = match outcome {
            StageOutcome::Pass(data) => (Status::Passed, None, data),
            StageOutcome::Fail(reason, data) => (Status::Failed, Some(reason), data),
        };
        if !self.quiet {
            match &reason {
                None => eprintln!("stage {name}: passed [{ms:.1} ms]"),
                Some(r) => eprintln!("stage {name}: failed ({r}) [{ms:.1} ms]"),
            }
        }
        let passed = status == Status::Passed;
        self.stages.push(Stage { name: name.to_string(), status, reason, data });
        passed
    }

    fn finish(self, command: &str, inputs: Inputs, output: &OutputArgs) -> ExitCode {
        let failed: Vec<String> = self
            .stages
            .iter()
            .filter(|s| s.status == Status::Failed)
            .map(|s| s.name.clone())
            .collect();
        let report = RunReport { command: command.to_string(), inputs, stages: self.stages };
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        match &output.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::FAILURE;
                }
                if !self.quiet {
                    eprintln!("report written to {}", path.display());
                }
            }
            None => print!("{text}"),
        }
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            eprintln!("failing stage: {}", failed.join(", "));
            ExitCode::FAILURE
        }
    }
}

fn to_value<T: Serialize>(t: &T) -> Option<Value> {
    Some(serde_json::to_value(t).expect("stage data serializes"))
}

fn source_label(source: &SourceArgs) -> Option<String> {
    match (&source.torus, &source.paving) {
        (Some(k), _) => Some(format!("torus({k})")),
        (_, Some(p)) => Some(p.display().to_string()),
        _ => None,
    }
}

fn load_paving(source: &SourceArgs) -> Result<Paving, String> {
    match (&source.torus, &source.paving) {
        (Some(0), None) => Err("--torus requires k >= 1".to_string()),
        (Some(k), None) => Ok(torus_paving(*k)),
        (None, Some(file)) => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            serde_json::from_str::<Paving>(&text)
                .map_err(|e| format!("cannot parse {}: {e}", file.display()))
        }
        (None, None) => Err("one of --torus or --paving is required".to_string()),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn inputs_for(source: &SourceArgs, config: &ConfigArgs, parameters: Option<Value>) -> Inputs {
    Inputs {
        source: source_label(source),
        parameters,
        tol: config.tol,
        quad_depth: config.quad_depth,
        cap: config.cap,
        assert_abelian_pi1: config.assert_abelian_pi1,
    }
}

/// The fixed stage universe of complex-based commands, in dependency order.
const COMPLEX_STAGES: [&str; 8] = [
    "paving",
    "triangulation",
    "ctValidation",
    "systole",
    "link",
    "certificate",
    "polyhedron",
    "volume",
];

#[allow(clippy::too_many_arguments)]
fn run_complex(
    command: &str,
    wants: &[&str],
    source: &SourceArgs,
    config: &ConfigArgs,
    output: &OutputArgs,
    svg: Option<&Path>,
) -> ExitCode {
    let mut runner = Runner::new(output.quiet);

    let mut paving: Option<Paving> = None;
    let mut geo = None;
    let mut ct_valid = false;
    let mut graph: Option<HatTau> = None;
    let mut annotations: Option<Annotations> = None;
    let mut shortest: Option<(usize, Vec<u32>)> = None;
    let mut systole_settled = false; // finite or proven null-homologous

    for &stage in &COMPLEX_STAGES {
        if !wants.contains(&stage) {
            runner.skip(stage, "not requested");
            continue;
        }
        match stage {
            "paving" => {
                runner.run("paving", || match load_paving(source) {
                    Err(msg) => StageOutcome::Fail(msg, None),
                    Ok(p) => match validate_paving(&p) {
                        Err(e) => StageOutcome::Fail(e.to_string(), None),
                        Ok(report) if report.valid => {
                            paving = Some(p);
                            StageOutcome::Pass(to_value(&report))
                        }
                        Ok(report) => StageOutcome::Fail(
                            format!("paving invalid: {}", report.reasons.join("; ")),
                            to_value(&report),
                        ),
                    },
                });
            }
            "triangulation" => {
                let Some(p) = &paving else {
                    runner.skip("triangulation", "paving unavailable");
                    continue;
                };
                runner.run("triangulation", || {
                    let g = triangulate(p);
                    let t = &g.tri;
                    let data = json!({
                        "tetrahedra": t.n_tetrahedra(),
                        "vertexClasses": t.vertex_classes().n_classes,
                        "edgeClasses": t.edge_classes().n_classes,
                        "faceClasses": t.face_classes().n_classes,
                        "orientable": t.orientable(),
                    });
                    geo = Some(g);
                    StageOutcome::Pass(Some(data))
                });
            }
            "ctValidation" => {
                let Some(g) = &geo else {
                    runner.skip("ctValidation", "triangulation unavailable");
                    continue;
                };
                runner.run("ctValidation", || {
                    let report = validate_cooper_thurston(&g.tri);
                    ct_valid = report.is_valid();
                    if ct_valid {
                        StageOutcome::Pass(to_value(&report))
                    } else {
                        StageOutcome::Fail(report.failures.join("; "), to_value(&report))
                    }
                });
            }
            "systole" => {
                let Some(g) = &geo else {
                    runner.skip("systole", "triangulation unavailable");
                    continue;
                };
                runner.run("systole", || {
                    let hat = build_dual_graph(&g.tri);
                    let ann = match homology_annotations(&g.tri, &hat) {
                        Ok(ann) => ann,
                        Err(e) => return StageOutcome::Fail(e.to_string(), None),
                    };
                    let report =
                        homological_systole(&hat, &ann, config.cap, config.assert_abelian_pi1);
                    let outcome = match &report.outcome {
                        SystoleOutcome::Finite { length, witness } => {
                            shortest = Some((*length, witness.clone()));
                            systole_settled = true;
                            None
                        }
                        SystoleOutcome::AllCyclesNullHomologous => {
                            systole_settled = true;
                            None
                        }
                        SystoleOutcome::LowerBoundOnly { explored_radius } => Some(format!(
                            "state cap {} reached at radius {}",
                            config.cap, explored_radius
                        )),
                    };
                    graph = Some(hat);
                    annotations = Some(ann);
                    match outcome {
                        None => StageOutcome::Pass(to_value(&report)),
                        Some(reason) => StageOutcome::Fail(reason, to_value(&report)),
                    }
                });
            }
            "link" => {
                let Some(g) = &geo else {
                    runner.skip("link", "triangulation unavailable");
                    continue;
                };
                if !ct_valid {
                    runner.skip("link", "requires a valid Cooper-Thurston triangulation");
                    continue;
                }
                runner.run("link", || {
                    let link = match build_link(&g.tri) {
                        Ok(l) => l,
                        Err(e) => return StageOutcome::Fail(e.to_string(), None),
                    };
                    let surfaces = surface_family(&g.tri, &link);
                    let n_faces = g.tri.face_classes().n_classes;
                    let puncture_max =
                        surfaces.iter().map(|s| s.puncture_count).max().unwrap_or(0);
                    if let Some(path) = svg {
                        if let Err(e) = std::fs::write(path, face_tangle_svg()) {
                            return StageOutcome::Fail(
                                format!("cannot write {}: {e}", path.display()),
                                None,
                            );
                        }
                    }
                    StageOutcome::Pass(Some(json!({
                        "components": link.n_components(),
                        "faceComponents": n_faces,
                        "edgeComponents": link.n_components() - n_faces,
                        "totalArcs": link.total_arcs(),
                        "surfaces": surfaces.len(),
                        "punctureMax": puncture_max,
                    })))
                });
            }
            "certificate" => {
                let (Some(g), Some(hat), Some(ann)) = (&geo, &graph, &annotations) else {
                    runner.skip("certificate", "requires the systole stage");
                    continue;
                };
                if systole_settled && shortest.is_none() {
                    runner.skip("certificate", "nothing to certify: all cycles null-homologous");
                    continue;
                }
                let Some((length, witness)) = &shortest else {
                    runner.skip("certificate", "requires a computed systole");
                    continue;
                };
                runner.run("certificate", || {
                    match barrier_certificate(&g.tri, hat, ann, witness, *length) {
                        Ok(cert) => StageOutcome::Pass(to_value(&cert)),
                        Err(e) => StageOutcome::Fail(e.to_string(), None),
                    }
                });
            }
            "polyhedron" => {
                runner.run("polyhedron", || {
                    let spec = build_tangle_polyhedron();
                    let expected = expected_tangle_angle_table();
                    let report = verify_polyhedron(&spec, Some(&expected), config.tol);
                    if report.pass {
                        StageOutcome::Pass(to_value(&report))
                    } else {
                        StageOutcome::Fail(
                            format!("{} angle mismatches", report.mismatches.len()),
                            to_value(&report),
                        )
                    }
                });
            }
            "volume" => {
                runner.run("volume", || {
                    let spec = build_tangle_polyhedron();
                    let params = QuadratureParams {
                        max_depth: config.quad_depth,
                        tol: config.tol,
                        max_cells: QUADRATURE_CELL_BUDGET,
                    };
                    match polyhedron_volume(&spec, &params) {
                        Err(e) => StageOutcome::Fail(e.to_string(), None),
                        Ok(est) => {
                            let complement = geo
                                .as_ref()
                                .map(|g| complement_volume(&g.tri, est.value));
                            StageOutcome::Pass(Some(json!({
                                "estimate": est,
                                "complementVolume": complement,
                            })))
                        }
                    }
                });
            }
            other => unreachable!("unknown stage {other}"),
        }
    }

    runner.finish(command, inputs_for(source, config, None), output)
}

fn parse_words(text: &str) -> Result<Vec<Word>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Word::parse(s).map_err(|e| e.to_string()))
        .collect()
}

fn parse_tuple(rank: usize, target: TargetArg, text: &str) -> Result<GroupTuple, String> {
    let words = parse_words(text)?;
    let built = match target {
        TargetArg::Free => GroupTuple::free(rank, words),
        TargetArg::Ab => GroupTuple::free_abelian(rank, words),
    };
    built.map_err(|e| e.to_string())
}

fn parse_moves(text: &str) -> Result<Vec<Move>, String> {
    let mut out = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = part.split_whitespace().collect();
        let idx = |s: &str| -> Result<usize, String> {
            s.parse::<usize>().map_err(|_| format!("bad index {s:?} in move {part:?}"))
        };
        let m = match (tokens[0].to_ascii_uppercase().as_str(), tokens.len()) {
            ("I", 2) => Move::Invert { i: idx(tokens[1])? },
            ("R", 3) => Move::RightMultiply { i: idx(tokens[1])?, j: idx(tokens[2])? },
            ("S", 3) => Move::Swap { i: idx(tokens[1])?, j: idx(tokens[2])? },
            _ => return Err(format!("cannot parse move {part:?}: expected I i, R i j, or S i j")),
        };
        out.push(m);
    }
    Ok(out)
}

fn run_nielsen(op: &NielsenOp) -> ExitCode {
    let (output, name, params) = match op {
        NielsenOp::Lift { rank, target, images, moves, output } => (
            output,
            "nielsen lift",
            json!({
                "rank": rank,
                "target": if *target == TargetArg::Ab { "ab" } else { "free" },
                "images": images,
                "moves": moves,
            }),
        ),
        NielsenOp::Reduce { rank, target, words, output } => (
            output,
            "nielsen reduce",
            json!({
                "rank": rank,
                "target": if *target == TargetArg::Ab { "ab" } else { "free" },
                "words": words,
            }),
        ),
        NielsenOp::Search { rank, target, from, to, max_len, output } => (
            output,
            "nielsen search",
            json!({
                "rank": rank,
                "target": if *target == TargetArg::Ab { "ab" } else { "free" },
                "from": from,
                "to": to,
                "maxLen": max_len,
            }),
        ),
    };
    let mut runner = Runner::new(output.quiet);
    runner.run("nielsen", || match op {
        NielsenOp::Lift { rank, target, images, moves, .. } => {
            let image_words = match images {
                Some(text) => match parse_words(text) {
                    Ok(w) => w,
                    Err(e) => return StageOutcome::Fail(e, None),
                },
                None => (1..=*rank).map(Word::generator).collect(),
            };
            let image_rank = image_words.iter().map(Word::max_generator).max().unwrap_or(1).max(1);
            let images = match target {
                TargetArg::Free => GroupTuple::free(image_rank, image_words),
                TargetArg::Ab => GroupTuple::free_abelian(image_rank, image_words),
            };
            let images = match images {
                Ok(t) => t,
                Err(e) => return StageOutcome::Fail(e.to_string(), None),
            };
            let moves = match parse_moves(moves) {
                Ok(m) => m,
                Err(e) => return StageOutcome::Fail(e, None),
            };
            let basis = GroupTuple::standard_basis(*rank);
            match lift_moves(&basis, &images, &moves) {
                Ok((new_basis, new_images)) => StageOutcome::Pass(Some(json!({
                    "newBasis": new_basis,
                    "newImages": new_images,
                    "moves": moves,
                }))),
                Err(e) => StageOutcome::Fail(e.to_string(), None),
            }
        }
        NielsenOp::Reduce { rank, target, words, .. } => {
            let tuple = match parse_tuple(*rank, *target, words) {
                Ok(t) => t,
                Err(e) => return StageOutcome::Fail(e, None),
            };
            let (reduced, basis) = nielsen_reduce(&tuple);
            StageOutcome::Pass(Some(json!({ "isBasis": basis, "reduced": reduced })))
        }
        NielsenOp::Search { rank, target, from, to, max_len, .. } => {
            let t1 = match parse_tuple(*rank, *target, from) {
                Ok(t) => t,
                Err(e) => return StageOutcome::Fail(e, None),
            };
            let t2 = match parse_tuple(*rank, *target, to) {
                Ok(t) => t,
                Err(e) => return StageOutcome::Fail(e, None),
            };
            match equivalence_search(&t1, &t2, *max_len) {
                Ok(outcome) => StageOutcome::Pass(to_value(&outcome)),
                Err(e) => StageOutcome::Fail(e.to_string(), None),
            }
        }
    });
    let inputs = inputs_for(&SourceArgs::default(), &ConfigArgs::default(), Some(params));
    runner.finish(name, inputs, output)
}

fn run_polyhedron(op: &PolyhedronOp) -> ExitCode {
    match op {
        PolyhedronOp::Verify { config, output } => {
            let mut runner = Runner::new(output.quiet);
            runner.run("polyhedron", || {
                let spec = build_tangle_polyhedron();
                let expected = expected_tangle_angle_table();
                let report = verify_polyhedron(&spec, Some(&expected), config.tol);
                if report.pass {
                    StageOutcome::Pass(to_value(&report))
                } else {
                    StageOutcome::Fail(
                        format!("{} angle mismatches", report.mismatches.len()),
                        to_value(&report),
                    )
                }
            });
            runner.finish("polyhedron verify", inputs_for(&SourceArgs::default(), config, None), output)
        }
        PolyhedronOp::Export { output } => {
            let mut runner = Runner::new(output.quiet);
            runner.run("polyhedronExport", || {
                let spec = build_tangle_polyhedron();
                let expected = expected_tangle_angle_table();
                StageOutcome::Pass(Some(json!({
                    "spec": spec,
                    "expectedAngles": expected,
                })))
            });
            let inputs = inputs_for(&SourceArgs::default(), &ConfigArgs::default(), None);
            runner.finish("polyhedron export", inputs, output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Pipeline { source, all, config, output } => {
            let wants: Vec<&str> = if *all {
                COMPLEX_STAGES.to_vec()
            } else {
                vec!["paving", "triangulation", "ctValidation"]
            };
            run_complex("pipeline", &wants, source, config, output, None)
        }
        Command::Systole { source, config, output } => run_complex(
            "systole",
            &["paving", "triangulation", "systole"],
            source,
            config,
            output,
            None,
        ),
        Command::Link { source, svg, config, output } => run_complex(
            "link",
            &["paving", "triangulation", "ctValidation", "link"],
            source,
            config,
            output,
            svg.as_deref(),
        ),
        Command::Certificate { source, config, output } => run_complex(
            "certificate",
            &["paving", "triangulation", "systole", "certificate"],
            source,
            config,
            output,
            None,
        ),
        Command::Nielsen { op } => run_nielsen(op),
        Command::Volume { polyhedron, source, config, output } => {
            if polyhedron != "canonical" {
                eprintln!("unknown polyhedron {polyhedron:?}; only \"canonical\" is built in");
                return ExitCode::FAILURE;
            }
            let wants: Vec<&str> = if source.torus.is_some() || source.paving.is_some() {
                vec!["paving", "triangulation", "volume"]
            } else {
                vec!["volume"]
            };
            run_complex("volume", &wants, source, config, output, None)
        }
        Command::Polyhedron { op } => run_polyhedron(op),
    }
}
