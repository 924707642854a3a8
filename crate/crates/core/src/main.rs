use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cellthin::cell_models::ModelKind;
use cellthin::complex::{ComplexError, TopCellComplex};
use cellthin::io::{self, IoError, Mesh};
use cellthin::samples;
use cellthin::table_gen::{
    analyze_euler_claims, audit_collapsibility, configuration_betti, generate_table, lazy_oracle,
    load_table, save_table, AcyclicityLookup, GenerateOptions, TableError, FORMAT_VERSION,
};
use cellthin::thinning::{thin, thin_anchored, Algorithm, ThinError, ThinOptions};
use cellthin::verify::{self, VerifyError};

/// Environment variable naming the table cache used by `--auto-table`.
const CACHE_ENV: &str = "CELLTHIN_CACHE_DIR";

#[derive(Parser)]
#[command(
    name = "cellthin",
    version,
    about = "Topology-preserving thinning of simplicial and cubical complexes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an acyclicity table and write it to a file.
    GenTables {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        out: PathBuf,
        /// Allow the 2^30-entry 4-simplex table.
        #[arg(long)]
        eager: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Summarize a table, optionally checking Euler-characteristic shortcuts
    /// and collapsibility of its acyclic configurations.
    TableStats {
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        table: Option<PathBuf>,
        /// Use the lazy oracle for a model instead of a table file.
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        euler_report: bool,
        #[arg(long)]
        collapse_audit: bool,
        /// Audit only this many acyclic configurations.
        #[arg(long, requires = "collapse_audit")]
        sample: Option<usize>,
    },
    /// Thin a mesh and write the kept cell ids.
    Thin(ThinArgs),
    /// Compare the homology of a mesh with that of a skeleton.
    Verify {
        #[command(flatten)]
        input: MeshArgs,
        #[arg(long)]
        skeleton: PathBuf,
    },
    /// Print cell counts, boundary size and Euler characteristic.
    Info {
        #[command(flatten)]
        input: MeshArgs,
    },
    /// Write a built-in sample mesh (.node/.ele pair or .vox file).
    Sample {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(samples::SAMPLE_NAMES))]
        name: String,
        /// Output prefix; `.node`/`.ele` or `.vox` is appended.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MeshArgs {
    /// TetGen files as `N.node,E.ele`.
    #[arg(long)]
    mesh: Option<String>,
    /// Occupancy grid in the `VOX nx ny nz` format.
    #[arg(long)]
    voxels: Option<PathBuf>,
    /// A built-in sample mesh.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(samples::SAMPLE_NAMES))]
    sample: Option<String>,
}

#[derive(Args)]
struct ThinArgs {
    #[command(flatten)]
    input: MeshArgs,
    /// Force the cube dimension of a voxel file (2 or 3).
    #[arg(long, requires = "voxels")]
    cube_dim: Option<u8>,
    #[arg(
        long,
        conflicts_with = "auto_table",
        required_unless_present = "auto_table"
    )]
    table: Option<PathBuf>,
    /// Generate or load a cached table (the 4-simplex model is served lazily).
    #[arg(long)]
    auto_table: bool,
    #[arg(long, value_enum, default_value = "topo")]
    algorithm: AlgorithmArg,
    #[arg(long)]
    anchors: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    vtk: Option<PathBuf>,
    /// Check the skeleton's homology against the input's.
    #[arg(long)]
    certify: bool,
    /// Recompute homology after every removal (at most 500 cells).
    #[arg(long)]
    debug_mv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Topo,
    Shape,
}

enum Failure {
    Usage(String),
    Parse(String),
    Certify(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Certify(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Certify(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Unsupported(_) => Failure::Usage(e.to_string()),
            IoError::EmptySkeleton => Failure::Internal(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<TableError> for Failure {
    fn from(e: TableError) -> Self {
        match e {
            TableError::EagerRefused(_) | TableError::KindMismatch { .. } | TableError::Pool(_) => {
                Failure::Usage(e.to_string())
            }
            TableError::Corrupt { .. } | TableError::Io(_) => Failure::Parse(e.to_string()),
            TableError::Homology(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<ComplexError> for Failure {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::Invariant(_)
            | ComplexError::DeadCell(_)
            | ComplexError::UnknownCell(_) => Failure::Internal(e.to_string()),
            ComplexError::Table(t) => t.into(),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::TooLarge(_) => Failure::Usage(e.to_string()),
            VerifyError::NotASubset(..) | VerifyError::DuplicateId(_) => {
                Failure::Parse(e.to_string())
            }
            VerifyError::KindMismatch(_) | VerifyError::Homology(_) => {
                Failure::Internal(e.to_string())
            }
        }
    }
}

impl From<ThinError> for Failure {
    fn from(e: ThinError) -> Self {
        match e {
            ThinError::Complex(c) => c.into(),
            ThinError::Table(t) => t.into(),
            ThinError::Verify(v) => v.into(),
            ThinError::DebugTooLarge(_) | ThinError::NoAnchors => Failure::Usage(e.to_string()),
            ThinError::HomologyChanged { .. } | ThinError::SimpleCellsRemain { .. } => {
                Failure::Internal(e.to_string())
            }
        }
    }
}

fn load_mesh(input: &MeshArgs, cube_dim: Option<u8>) -> Result<Mesh, Failure> {
    if let Some(spec) = &input.mesh {
        let (node, ele) = spec
            .split_once(',')
            .ok_or_else(|| Failure::Usage(format!("--mesh expects N.node,E.ele, got '{spec}'")))?;
        return Ok(io::read_simplicial(Path::new(node), Path::new(ele))?);
    }
    if let Some(path) = &input.voxels {
        let kind = match cube_dim {
            None => None,
            Some(2) => Some(ModelKind::Cube2),
            Some(3) => Some(ModelKind::Cube3),
            Some(d) => {
                return Err(Failure::Usage(format!(
                    "--cube-dim must be 2 or 3, got {d}"
                )))
            }
        };
        return Ok(io::read_voxels(path, kind)?);
    }
    let name = input.sample.as_deref().unwrap_or_default();
    samples::by_name(name).ok_or_else(|| Failure::Usage(format!("unknown sample '{name}'")))
}

fn cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join("cellthin");
    }
    if let Some(home) = std::env::var_os("HOME") {
        return PathBuf::from(home).join(".cache").join("cellthin");
    }
    std::env::temp_dir().join("cellthin")
}

/// Loads the cached table for `kind`, regenerating it when missing or unreadable.
fn auto_table(kind: ModelKind) -> Result<Box<dyn AcyclicityLookup>, Failure> {
    if kind == ModelKind::Simplex4 {
        return Ok(Box::new(lazy_oracle(kind)));
    }
    let dir = cache_dir();
    let path = dir.join(format!("{kind}-v{FORMAT_VERSION}.acy"));
    if let Ok(table) = load_table(&path) {
        if table.kind() == kind {
            return Ok(Box::new(table));
        }
    }
    let table = generate_table(kind, GenerateOptions::default())?;
    let stored = std::fs::create_dir_all(&dir)
        .map_err(TableError::from)
        .and_then(|_| {
            let tmp = dir.join(format!(".{kind}-{}.tmp", std::process::id()));
            save_table(&table, &tmp)?;
            std::fs::rename(&tmp, &path).map_err(TableError::from)
        });
    if let Err(e) = stored {
        eprintln!("warning: table cache {} not written: {e}", dir.display());
    }
    Ok(Box::new(table))
}

fn fmt_betti(b: &[usize]) -> String {
    let parts: Vec<String> = b.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

fn cmd_thin(args: ThinArgs) -> Result<(), Failure> {
    let mesh = load_mesh(&args.input, args.cube_dim)?;
    let table: Box<dyn AcyclicityLookup> = match (&args.table, args.auto_table) {
        (Some(path), _) => Box::new(load_table(path)?),
        (None, true) => auto_table(mesh.kind)?,
        (None, false) => {
            return Err(Failure::Usage(
                "either --table or --auto-table is required".into(),
            ))
        }
    };
    table.ensure_kind(mesh.kind)?;
    let anchors = match &args.anchors {
        Some(p) => io::read_anchors(p, mesh.kind)?,
        None => Vec::new(),
    };
    if args.debug_mv && mesh.len() > cellthin::thinning::DEBUG_MV_LIMIT {
        return Err(Failure::Usage(format!(
            "--debug-mv is limited to {} cells, input has {}",
            cellthin::thinning::DEBUG_MV_LIMIT,
            mesh.len()
        )));
    }
    let mut complex = TopCellComplex::build(mesh.kind, mesh.cells.clone(), &anchors)?;
    let algorithm = match args.algorithm {
        AlgorithmArg::Topo => Algorithm::Topology,
        AlgorithmArg::Shape => Algorithm::Shape,
    };
    let opts = ThinOptions {
        verify_final: true,
        debug_mv: args.debug_mv,
    };
    let outcome = if anchors.is_empty() {
        thin(&mut complex, table.as_ref(), algorithm, opts)?
    } else {
        thin_anchored(&mut complex, table.as_ref(), algorithm, opts)?
    };
    let stats = &outcome.stats;
    if algorithm == Algorithm::Topology
        && stats.queue_pushes > (stats.max_neighbors + 1) * stats.initial_count
    {
        return Err(Failure::Internal(format!(
            "queue pushes {} exceed (k+1)|K| = {}",
            stats.queue_pushes,
            (stats.max_neighbors + 1) * stats.initial_count
        )));
    }
    io::write_skeleton(mesh.kind, algorithm, &outcome, &args.out)?;
    println!("kind {}", mesh.kind);
    println!(
        "cells {} kept {} passes {} queue_pushes {} max_neighbors {}",
        stats.initial_count,
        stats.kept_count,
        outcome.passes,
        stats.queue_pushes,
        stats.max_neighbors
    );
    if algorithm == Algorithm::Shape {
        println!("stopped_on_boundary {}", outcome.stopped_on_boundary);
    }
    if let Some(vtk) = &args.vtk {
        let mut kept = vec![false; mesh.len()];
        for &id in &outcome.kept {
            kept[id] = true;
        }
        io::write_vtk(&mesh, &kept, vtk)?;
    }
    if args.certify {
        certify(&mesh, &outcome.kept)?;
    }
    Ok(())
}

fn certify(mesh: &Mesh, kept: &[usize]) -> Result<(), Failure> {
    let report = verify::certify(&mesh.cells, kept, mesh.kind)?;
    // The top Betti number is zero for anything embedded in its own
    // dimension, so it is shown only when it is not.
    let d = mesh.kind.dim();
    let shown = if report.betti_in[d] == 0 && report.betti_out[d] == 0 { d } else { d + 1 };
    let line = format!(
        "betti {}{}{}",
        fmt_betti(&report.betti_in[..shown]),
        if report.isomorphic { "=" } else { "!=" },
        fmt_betti(&report.betti_out[..shown])
    );
    if report.isomorphic {
        println!("{line}");
        println!("certified");
        Ok(())
    } else {
        println!("{line}");
        let torsion = if report.torsion_free_in == report.torsion_free_out {
            String::new()
        } else {
            format!(
                " (torsion-free {} vs {})",
                report.torsion_free_in, report.torsion_free_out
            )
        };
        Err(Failure::Certify(format!("homology not preserved{torsion}")))
    }
}

fn cmd_info(input: MeshArgs) -> Result<(), Failure> {
    let mesh = load_mesh(&input, None)?;
    let complex = TopCellComplex::build(mesh.kind, mesh.cells.clone(), &[])?;
    println!("kind {}", mesh.kind);
    println!("top_cells {}", complex.len());
    println!("vertices {}", complex.vertex_count());
    println!("facets {}", complex.face_count());
    println!("boundary_facets {}", complex.boundary_face_count());
    match verify::full_complex(&mesh.cells, mesh.kind) {
        Ok(cc) => {
            let counts: Vec<String> = cc.counts().iter().map(usize::to_string).collect();
            println!("cell_counts {}", counts.join(" "));
            println!("euler_characteristic {}", cc.euler_characteristic());
        }
        Err(VerifyError::TooLarge(_)) => {
            println!("euler_characteristic unavailable (input too large)")
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn cmd_table_stats(
    table: Option<PathBuf>,
    model: Option<ModelKind>,
    euler: bool,
    collapse: bool,
    sample: Option<usize>,
) -> Result<(), Failure> {
    let lookup: Box<dyn AcyclicityLookup> = match (table, model) {
        (Some(path), _) => {
            let t = load_table(&path)?;
            println!("format_version {}", t.meta().format_version);
            println!(
                "generator_fingerprint {:016x}",
                t.meta().generator_fingerprint
            );
            println!("checksum {:016x}", t.checksum());
            println!("bytes {}", t.byte_len());
            Box::new(t)
        }
        (None, Some(kind)) if kind == ModelKind::Simplex4 => Box::new(lazy_oracle(kind)),
        (None, Some(kind)) => Box::new(generate_table(kind, GenerateOptions::default())?),
        (None, None) => return Err(Failure::Usage("--table or --model is required".into())),
    };
    let kind = lookup.kind();
    let model = kind.model();
    let closed = model.closed_configurations();
    let acyclic = closed.iter().filter(|&&m| lookup.lookup(m)).count();
    println!("kind {kind}");
    println!("boundary_elements {}", kind.boundary_element_count());
    println!("closed_configurations {}", closed.len());
    println!("acyclic_configurations {acyclic}");
    if euler {
        let r = analyze_euler_claims(lookup.as_ref());
        println!(
            "euler_only_false_positives = {}",
            r.euler_only_false_positives
        );
        println!("euler_disconnected = {}", r.euler_disconnected);
        println!(
            "euler_plus_connected_false_positives = {}",
            r.euler_plus_connected_false_positives
        );
        for (label, w) in [
            ("disconnected_witness", r.disconnected_witness),
            ("connected_witness", r.connected_witness),
        ] {
            if let Some(mask) = w {
                let betti = configuration_betti(model, mask)
                    .map_err(|e| Failure::Internal(e.to_string()))?;
                println!(
                    "{label} = {mask} (paper_index {}, betti {})",
                    2 * u64::from(mask),
                    fmt_betti(&betti)
                );
            }
        }
    }
    if collapse {
        let r = audit_collapsibility(lookup.as_ref(), sample);
        println!("collapse_audited = {}", r.audited);
        println!("collapse_failures = {}", r.failures.len());
        if !r.failures.is_empty() {
            return Err(Failure::Internal(format!(
                "{} acyclic configurations do not collapse (first {})",
                r.failures.len(),
                r.failures[0]
            )));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::GenTables {
            model,
            out,
            eager,
            jobs,
        } => {
            let table = generate_table(model, GenerateOptions { eager, jobs }).map_err(|e| match e {
                TableError::EagerRefused(_) => Failure::Usage(format!(
                    "{e}; pass --eager to build it anyway, or use --auto-table when thinning to query it lazily"
                )),
                e => e.into(),
            })?;
            save_table(&table, &out)?;
            println!("kind {model}");
            println!("acyclic {} of {}", table.count_acyclic(), table.len());
            println!("checksum {:016x}", table.checksum());
            Ok(())
        }
        Command::TableStats {
            table,
            model,
            euler_report,
            collapse_audit,
            sample,
        } => cmd_table_stats(table, model, euler_report, collapse_audit, sample),
        Command::Thin(args) => cmd_thin(args),
        Command::Verify { input, skeleton } => {
            let mesh = load_mesh(&input, None)?;
            let kept = io::read_skeleton(&skeleton)?;
            certify(&mesh, &kept)
        }
        Command::Info { input } => cmd_info(input),
        Command::Sample { name, out } => {
            let mesh = samples::by_name(&name)
                .ok_or_else(|| Failure::Usage(format!("unknown sample '{name}'")))?;
            if mesh.kind.is_cubical() {
                let path = out.with_extension("vox");
                io::write_voxels(&mesh, &path)?;
                println!("{}", path.display());
            } else {
                let node = out.with_extension("node");
                let ele = out.with_extension("ele");
                io::write_simplicial(&mesh, &node, &ele)?;
                println!("{},{}", node.display(), ele.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
