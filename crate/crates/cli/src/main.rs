use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use eikonal_depth::analysis::fit_scatter;
use eikonal_depth::analysis::reports::{run_check, CheckParams, CHECKS};
use eikonal_depth::graph::{
    build_kernel_graph, build_knn_graph, labeled_depth, local_maxima, path_depth, pointcloud_eikonal, GraphDepth,
    Kernel, KernelSpec, KnnWeight, LabeledScheme, WeightedGraph,
};
use eikonal_depth::grid::{level_set, solve_depth};
use eikonal_depth::io;
use eikonal_depth::{BoundaryCondition, Error, GridSpec, PhiSpec, PointCloud, Support};
use serde_json::json;

#[derive(Parser)]
#[command(name = "eikdepth", version, about = "Eikonal depth on grids, graphs and point clouds")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Suppress the summary on standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a regular grid covering the density's default domain.
    GridSolve(GridSolveArgs),
    /// Solve on a graph built from a points CSV.
    GraphSolve(GraphSolveArgs),
    /// Depth of one class with every other class as the boundary.
    LabeledDepth(LabeledArgs),
    /// Draw points from a density.
    Sample(SampleArgs),
    /// Map points to zero mean and identity covariance.
    Whiten(WhitenArgs),
    /// Run a named property check and emit JSON lines.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GridBoundary {
    /// u = 0 on the outer box.
    BoxEdge,
    /// Box edge holds the axis-tail upper bound.
    Supersolution,
    /// u = 0 on the box edge and wherever the density vanishes.
    Support,
}

#[derive(Args)]
struct GridSolveArgs {
    #[arg(long)]
    density: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Nodes per axis.
    #[arg(long, default_value_t = 129)]
    n: usize,
    /// Comma-separated levels (2-D only).
    #[arg(long, value_delimiter = ',')]
    contours: Vec<f64>,
    #[arg(long, value_enum, default_value_t = GridBoundary::BoxEdge)]
    boundary: GridBoundary,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Indicator,
    Gaussian4,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightArg {
    MnistExp,
    Unit,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Path,
    Difference,
}

#[derive(Args)]
struct GraphSolveArgs {
    #[arg(long)]
    points: PathBuf,
    /// Kernel graph with bandwidth --h.
    #[arg(long, value_enum, conflicts_with = "knn")]
    kernel: Option<KernelArg>,
    #[arg(long)]
    h: Option<f64>,
    /// k-nearest-neighbor graph instead of a kernel graph.
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long, value_enum, default_value_t = WeightArg::MnistExp)]
    weight: WeightArg,
    /// Node indices, comma or newline separated.
    #[arg(long, conflicts_with = "boundary_band")]
    boundary_file: Option<PathBuf>,
    /// Nodes within this distance of the domain box along --band-axes.
    #[arg(long)]
    boundary_band: Option<f64>,
    /// Axes the band applies to (default: all).
    #[arg(long, value_delimiter = ',')]
    band_axes: Vec<usize>,
    /// Domain box corners for the band (default: the cloud's bounding box).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    band_lo: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    band_hi: Vec<f64>,
    /// Density JSON evaluated at the nodes; 1 everywhere if absent.
    #[arg(long)]
    density: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Difference)]
    scheme: SchemeArg,
}

#[derive(Args)]
struct LabeledArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Path)]
    scheme: SchemeArg,
    /// Required with --scheme difference.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    density: PathBuf,
    #[arg(long)]
    n: usize,
    /// Label written on every row.
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value = "points.csv")]
    output: String,
}

#[derive(Args)]
struct WhitenArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long, default_value = "whitened.csv")]
    output: String,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    check: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 4.0)]
    sep: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 20)]
    instances: usize,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyBoundary
            | Error::NoFiniteNeighbor
            | Error::NaN(_)
            | Error::Degenerate(_)
            | Error::OutsideGrid
            | Error::Unsupported(_) => Failure::Solver(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow::anyhow!(msg.into()))
}

fn with_path<T>(r: eikonal_depth::Result<T>, path: &Path) -> Result<T, Failure> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Config(e) => Failure::Config(e.context(path.display().to_string())),
        other => other,
    })
}

struct Ctx {
    seed: u64,
    out_dir: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn summary(&self, value: &serde_json::Value) {
        if !self.quiet {
            println!("{value}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { seed: cli.seed, out_dir: cli.out_dir, quiet: cli.quiet };
    if let Err(e) = fs::create_dir_all(&ctx.out_dir).context("creating output directory") {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::GridSolve(a) => grid_solve(&ctx, a),
        Command::GraphSolve(a) => graph_solve(&ctx, a),
        Command::LabeledDepth(a) => labeled(&ctx, a),
        Command::Sample(a) => sample(&ctx, a),
        Command::Whiten(a) => whiten(&ctx, a),
        Command::Report(a) => report(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::ChecksFailed) => ExitCode::from(1),
    }
}

fn grid_solve(ctx: &Ctx, a: GridSolveArgs) -> Result<(), Failure> {
    let model = with_path(io::read_density(&a.density), &a.density)?;
    let phi = PhiSpec::new(a.alpha)?;
    let domain = model.default_domain()?;
    let (lo, hi) = domain.bounds();
    let grid = GridSpec::covering(lo, hi, a.n)?;
    let bc = match a.boundary {
        GridBoundary::BoxEdge => BoundaryCondition::ZeroOnBoxEdge,
        GridBoundary::Supersolution => BoundaryCondition::SupersolutionOnBoxEdge,
        GridBoundary::Support => {
            if matches!(model.support(), Support::AllSpace) {
                return Err(config("--boundary support needs a bounded support"));
            }
            let mut mask = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                mask.push(grid.on_box_edge(i) || model.eval(&grid.position(i))? == 0.0);
            }
            BoundaryCondition::ZeroOnMask(mask)
        }
    };
    if !a.contours.is_empty() && grid.dim() != 2 {
        return Err(config("--contours needs a 2-D density"));
    }
    let field = solve_depth(&model, phi, &grid, &bc)?;
    let mut families = Vec::new();
    for &c in &a.contours {
        families.push((c, level_set(&field, c)?));
    }
    io::write_depth_field(&ctx.out("depth.json"), &field)?;
    if !families.is_empty() {
        io::write_contours(&ctx.out("contours.csv"), &families)?;
    }
    ctx.summary(&json!({
        "nodes": grid.len(),
        "spacing": grid.spacing(),
        "max_depth": field.max(),
        "local_maxima": field.local_maxima(eikonal_depth::graph::MAXIMA_MARGIN).len(),
        "contours": families.iter().map(|(c, l)| json!({"level": c, "polylines": l.len()})).collect::<Vec<_>>(),
    }));
    Ok(())
}

fn band_mask(points: &PointCloud, a: &GraphSolveArgs, band: f64) -> Result<Vec<bool>, Failure> {
    let d = points.dim();
    let axes: Vec<usize> = if a.band_axes.is_empty() { (0..d).collect() } else { a.band_axes.clone() };
    if axes.iter().any(|&k| k >= d) {
        return Err(config(format!("--band-axes must be below the point dimension {d}")));
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points.iter() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    for (given, slot) in [(&a.band_lo, &mut lo), (&a.band_hi, &mut hi)] {
        if !given.is_empty() {
            if given.len() != d {
                return Err(config(format!("domain corners need {d} coordinates")));
            }
            slot.clone_from(given);
        }
    }
    Ok(points.iter().map(|p| axes.iter().any(|&k| p[k] - lo[k] <= band || hi[k] - p[k] <= band)).collect())
}

fn solve_graph(graph: &WeightedGraph, scheme: SchemeArg, h: Option<f64>) -> Result<GraphDepth, Failure> {
    Ok(match scheme {
        SchemeArg::Path => path_depth(graph)?,
        SchemeArg::Difference => pointcloud_eikonal(graph, h.ok_or_else(|| config("--scheme difference needs --h"))?)?,
    })
}

fn graph_solve(ctx: &Ctx, a: GraphSolveArgs) -> Result<(), Failure> {
    let table = with_path(io::read_points(&a.points), &a.points)?;
    let points = &table.points;
    let n = points.len();
    let mut graph = match (a.kernel, a.knn) {
        (_, Some(k)) => {
            let rule = match a.weight {
                WeightArg::MnistExp => KnnWeight::MnistExp,
                WeightArg::Unit => KnnWeight::Unit,
            };
            build_knn_graph(points, k, rule)?
        }
        (kernel, None) => {
            let eta = match kernel.unwrap_or(KernelArg::Indicator) {
                KernelArg::Indicator => Kernel::Indicator,
                KernelArg::Gaussian4 => Kernel::Gaussian4,
            };
            let h = a.h.ok_or_else(|| config("kernel graphs need --h"))?;
            build_kernel_graph(points, &KernelSpec::new(eta, h, points.dim())?, n)?
        }
    };
    if let Some(path) = &a.density {
        let model = with_path(io::read_density(path), path)?;
        let rho = points.iter().map(|p| model.eval(p)).collect::<eikonal_depth::Result<Vec<_>>>()?;
        graph.set_density(rho)?;
    }
    match (&a.boundary_file, a.boundary_band) {
        (Some(path), _) => graph.set_boundary(&with_path(io::read_node_list(path), path)?)?,
        (None, Some(band)) => graph.set_boundary_mask(band_mask(points, &a, band)?)?,
        (None, None) => return Err(config("give --boundary-file or --boundary-band")),
    }
    let depth = solve_graph(&graph, a.scheme, a.h)?;
    io::write_graph_depth(&ctx.out("depth.csv"), &depth, None)?;
    let summary = json!({
        "nodes": n,
        "edges": graph.edge_count(),
        "boundary_nodes": graph.boundary_nodes().len(),
        "isolated_nodes": graph.isolated_nodes().len(),
        "unreached": depth.reached.iter().filter(|r| !**r).count(),
        "max_depth": depth.max(),
        "local_maxima": local_maxima(&depth, &graph).len(),
    });
    io::write_atomic(&ctx.out("summary.json"), format!("{summary}\n").as_bytes())?;
    ctx.summary(&summary);
    Ok(())
}

fn labeled(ctx: &Ctx, a: LabeledArgs) -> Result<(), Failure> {
    let table = with_path(io::read_points(&a.points), &a.points)?;
    let labels = table.labels.ok_or_else(|| config("points file has no label column"))?;
    let scheme = match a.scheme {
        SchemeArg::Path => LabeledScheme::Path,
        SchemeArg::Difference => {
            LabeledScheme::Difference { h: a.h.ok_or_else(|| config("--scheme difference needs --h"))? }
        }
    };
    let (_, depth) = labeled_depth(&table.points, &labels, &a.target, a.k, scheme)?;
    let mut order: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == a.target).collect();
    // Descending depth, ties by index.
    order.sort_by(|&i, &j| depth.values[j].total_cmp(&depth.values[i]).then(i.cmp(&j)));
    io::write_graph_depth(&ctx.out("labeled_depth.csv"), &depth, Some(&order))?;
    ctx.summary(&json!({
        "target": a.target,
        "target_nodes": order.len(),
        "deepest": order.first(),
        "max_depth": order.first().map(|&i| depth.values[i]),
    }));
    Ok(())
}

fn sample(ctx: &Ctx, a: SampleArgs) -> Result<(), Failure> {
    let model = with_path(io::read_density(&a.density), &a.density)?;
    let pts = model.sample(a.n, ctx.seed)?;
    let labels = a.label.map(|l| vec![l; pts.len()]);
    io::write_points(&ctx.out(&a.output), &pts, labels.as_deref())?;
    ctx.summary(&json!({"points": pts.len(), "dim": pts.dim()}));
    Ok(())
}

fn whiten(ctx: &Ctx, a: WhitenArgs) -> Result<(), Failure> {
    let table = with_path(io::read_points(&a.points), &a.points)?;
    let t = fit_scatter(&table.points)?;
    let out = t.whiten(&table.points)?;
    io::write_points(&ctx.out(&a.output), &out, table.labels.as_deref())?;
    let d = t.dim();
    let rows = |m: &dyn std::ops::Index<(usize, usize), Output = f64>| -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()
    };
    let info = json!({
        "location": t.location(),
        "scatter": rows(t.scatter()),
        "inverse_sqrt": rows(t.inverse_sqrt()),
    });
    io::write_atomic(&ctx.out("scatter.json"), format!("{info}\n").as_bytes())?;
    ctx.summary(&json!({"points": out.len(), "dim": d}));
    Ok(())
}

fn report(ctx: &Ctx, a: ReportArgs) -> Result<(), Failure> {
    if !CHECKS.contains(&a.check.as_str()) {
        return Err(config(format!("unknown check {:?}; expected one of {}", a.check, CHECKS.join(", "))));
    }
    let params = CheckParams {
        seed: ctx.seed,
        alpha: a.alpha,
        scale: a.a,
        separation: a.sep,
        epsilon: a.epsilon,
        instances: a.instances,
    };
    let reports = run_check(&a.check, &params)?;
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    io::write_atomic(&ctx.out(&format!("report_{}.jsonl", a.check)), text.as_bytes())?;
    if !ctx.quiet {
        print!("{text}");
    }
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}
