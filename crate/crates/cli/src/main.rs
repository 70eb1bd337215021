use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use canonical_cells::canonize::{canonize_run, cell_heights, cells_certificate, scramble, DEFAULT_MAX_STEPS};
use canonical_cells::error::Error;
use canonical_cells::exact::{format_scalar, parse_scalar, Scalar};
use canonical_cells::io;
use canonical_cells::polyhedron::{CellDecomposition, QuotientPolyhedron};
use canonical_cells::render::{boundary_samples, conic_outliers, decimal, develop, fit_conic, render_svg, Chart, Scene2D, SvgOptions};
use canonical_cells::structures::{sym_square_lift, sweep, StructureSpec};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccells", version, about = "Canonical cell decompositions of cusped convex projective surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flip algorithm from a structure's starting triangulation, or from a stored polyhedron.
    Canonize {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Develop cells into a chart and draw them.
    Develop {
        input: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "klein")]
        chart: String,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Sample the cusp orbit in a chart.
    Orbit {
        input: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        fit_conic: bool,
    },
    /// Check that no truncated orbit point lies below any cell.
    Certify {
        input: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Canonize, then apply seeded random non-admissible flips.
    Scramble {
        input: PathBuf,
        #[arg(long)]
        flips: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample Goldman structures along a segment and bracket the changes of cells.
    Sweep {
        #[arg(long)]
        start: String,
        #[arg(long)]
        end: String,
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[arg(long, default_value = "1/10000")]
        bisect_width: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Print the 3x3 image of a unimodular 2x2 matrix.
    LiftPsl2 { input: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Geometry(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Geometry(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn checked(p: QuotientPolyhedron) -> std::result::Result<QuotientPolyhedron, Failure> {
    match p.validate().first() {
        None => Ok(p),
        Some(v) => Err(Error::InternalInconsistency(format!("invalid polyhedron, {v}")).into()),
    }
}

/// A polyhedron document is used as is. Anything else is read as a structure.
fn load_start(text: &str) -> std::result::Result<(QuotientPolyhedron, Option<StructureSpec>), Failure> {
    if let Ok(p) = io::polyhedron_from_str(text) {
        return Ok((checked(p)?, None));
    }
    let spec = io::structure_from_str(text)?;
    Ok((checked(spec.initial_polyhedron()?)?, Some(spec)))
}

fn load_cells(text: &str) -> std::result::Result<CellDecomposition, Failure> {
    let d = io::decomposition_from_str(text)?;
    match d.validate().first() {
        None => Ok(d),
        Some(v) => Err(Error::InternalInconsistency(format!("invalid decomposition, {v}")).into()),
    }
}

fn parse_tuple(text: &str) -> std::result::Result<[Scalar; 6], Failure> {
    let values: Vec<Scalar> = text
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|x| parse_scalar(x.trim()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    values.try_into().map_err(|_| Failure::Usage(format!("expected six comma-separated values, got `{text}`")))
}

fn svg_scene(scene: &Scene2D, unit_circle: bool) -> Vec<u8> {
    render_svg(scene, &SvgOptions { unit_circle, ..SvgOptions::default() })
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Canonize { input, max_steps, trace, out } => {
            let (start, _) = load_start(&read(&input)?)?;
            let run = canonize_run(&start, max_steps)?;
            for p in &run.history {
                checked(p.clone())?;
            }
            let log = io::trace_to_log(&run.trace);
            print!("{log}");
            println!("faces={} edges={}", run.decomposition.faces.len(), run.decomposition.edge_count());
            if let Some(path) = trace {
                write(&path, &log)?;
            }
            if let Some(path) = out {
                write(&path, io::decomposition_to_string(&run.decomposition))?;
            }
        }
        Command::Develop { input, depth, chart, svg } => {
            let d = load_cells(&read(&input)?)?;
            let chart = Chart::parse(&chart).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut scene = develop(&d, depth, &chart)?;
            scene.metadata.push(("flip steps".into(), d.trace.steps.len().to_string()));
            write(&svg, svg_scene(&scene, chart.name == "klein"))?;
            println!("polygons={}", scene.polygons.len());
        }
        Command::Orbit { input, depth, chart, svg, fit_conic: fit } => {
            let spec = io::structure_from_str(&read(&input)?)?;
            let chart = match chart {
                Some(c) => Chart::parse(&c).map_err(|e| Failure::Usage(e.to_string()))?,
                None => Chart::default_for(&spec.provenance),
            };
            let points = boundary_samples(&spec.group()?, depth, &chart)?;
            println!("points={}", points.len());
            let mut options = SvgOptions { unit_circle: chart.name == "klein", ..SvgOptions::default() };
            if fit {
                let (conic, chosen) = fit_conic(&points)?;
                let coeffs: Vec<String> = conic.coeffs.iter().map(format_scalar).collect();
                println!("conic through samples {chosen:?}: {}", coeffs.join(" "));
                let off = conic_outliers(&conic, &points);
                println!("samples off the conic: {} of {}", off.len(), points.len());
                options.conic = Some(conic);
            }
            if let Some(path) = svg {
                let scene = Scene2D {
                    boundary_dots: points,
                    metadata: vec![("chart".into(), chart.name.clone()), ("provenance".into(), spec.provenance.tag().into())],
                    ..Scene2D::default()
                };
                write(&path, render_svg(&scene, &options))?;
            }
        }
        Command::Certify { input, depth } => {
            let text = read(&input)?;
            // Triangulations are certified whether or not they are convex; cell files must already be.
            let d = match io::polyhedron_from_str(&text) {
                Ok(p) => checked(p)?.cells(),
                Err(_) => load_cells(&text)?,
            };
            let ok = cells_certificate(&d, depth);
            println!("certificate depth={depth}: {}", if ok { "convex" } else { "not convex" });
            for (k, h) in cell_heights(&d, depth).iter().enumerate() {
                println!("face {k}: height {h}");
            }
            if !ok {
                return Err(Error::NotConvex("an orbit point lies strictly below a cell".into()).into());
            }
        }
        Command::Scramble { input, flips, seed, out } => {
            let (start, _) = load_start(&read(&input)?)?;
            let canonical = canonize_run(&start, DEFAULT_MAX_STEPS)?.terminal().clone();
            let scrambled = checked(scramble(&canonical, flips, seed)?)?;
            write(&out, io::polyhedron_to_string(&scrambled))?;
        }
        Command::Sweep { start, end, samples, bisect_width, out_dir, depth } => {
            let (a, b) = (parse_tuple(&start)?, parse_tuple(&end)?);
            let width = parse_scalar(&bisect_width).map_err(|e| Failure::Usage(e.to_string()))?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
            let report = sweep(&a, &b, samples, &width)?;
            let mut text = format!("ordering {}\n", report.ordering.join(","));
            let chart = Chart::affine_sum();
            for (k, s) in report.samples.iter().enumerate() {
                match &s.outcome {
                    Ok((cells, trace)) => {
                        text.push_str(&format!(
                            "sample {k} lambda={} ({}) flips={} faces={}\n",
                            format_scalar(&s.lambda),
                            decimal(&s.lambda),
                            trace.steps.len(),
                            cells.faces.len()
                        ));
                        let mut scene = develop(cells, depth, &chart)?;
                        scene.metadata.push(("lambda".into(), format_scalar(&s.lambda)));
                        write(&out_dir.join(format!("sample_{k:02}.svg")), svg_scene(&scene, false))?;
                    }
                    Err(e) => text.push_str(&format!("sample {k} lambda={} invalid: {e}\n", format_scalar(&s.lambda))),
                }
            }
            text.push_str(&format!("changes {}\n", report.brackets.len()));
            for br in &report.brackets {
                text.push_str(&format!(
                    "bracket ({}, {}) ~ ({}, {}) width {}",
                    format_scalar(&br.lo),
                    format_scalar(&br.hi),
                    decimal(&br.lo),
                    decimal(&br.hi),
                    decimal(&(&br.hi - &br.lo))
                ));
                if let Some(note) = &br.note {
                    text.push_str(&format!(" note: {note}"));
                }
                text.push('\n');
            }
            print!("{text}");
            write(&out_dir.join("report.txt"), &text)?;
        }
        Command::LiftPsl2 { input } => {
            let m = io::mat2_from_str(&read(&input)?)?;
            println!("{}", sym_square_lift(&m)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Geometry(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
