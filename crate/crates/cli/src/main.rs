use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use polyexp::bench::{emit_csv, run_sweep, BenchConfig};
use polyexp::eigen4::{classify_screw, eig_homogeneous, EigenOptions};
use polyexp::field::{read_field, write_field, AnyField, Grid3, Interp, WarpOptions};
use polyexp::linalg::{norm_2, ExpmConfig, Mat4};
use polyexp::polyrigid::{flow_many, load_scene};
use polyexp::se3::RigidTransform;
use polyexp::synth;
use polyexp::transform_json::{read_transform, write_transform, TransformFile};
use polyexp::{Backend, Error};

const MEMORY_CAP_ENV: &str = "POLYEXP_MEMORY_CAP_BYTES";
/// Rigidity tolerance for transforms read from disk, which are often
/// rounded to ten digits.
const INPUT_RIGID_TOL: f64 = 1e-6;
/// Distance of λ₃ from 1 below which the report calls it a repeated root.
const REPORT_REPEAT_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "polyexp", version, about = "Polyrigid transforms: exp/log kernels, flows and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BackendArg {
    Squaring,
    Eigen,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum InterpArg {
    Trilinear,
    CubicBspline,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SynthWhat {
    Fixtures,
    Scene,
    Grids,
}

#[derive(clap::Args, Debug)]
struct BackendOpts {
    #[arg(long, value_enum, default_value = "squaring")]
    backend: BackendArg,
    /// Fixed scaling exponent for the squaring backend (default: norm-adaptive, at least 6).
    #[arg(long)]
    s: Option<u32>,
}

impl BackendOpts {
    fn backend(&self) -> Backend {
        match self.backend {
            BackendArg::Squaring => Backend::Squaring(self.s.map(ExpmConfig::fixed).unwrap_or_default()),
            BackendArg::Eigen => Backend::Eigen(EigenOptions::default()),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write exp(t·log T).
    Exp {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        backend: BackendOpts,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the principal logarithm of T.
    Log {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        backend: BackendOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print eigenvalues, screw analysis and a diagonalizability verdict.
    Eig {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also print eigenvectors and the eigenbasis condition number.
        #[arg(long)]
        report: bool,
    },
    /// Evaluate the fused flow of a scene at one or more times.
    Flow {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        t: Vec<f64>,
        #[command(flatten)]
        backend: BackendOpts,
        #[arg(long)]
        out_prefix: PathBuf,
        /// Volume to warp to each requested time.
        #[arg(long)]
        warp: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "trilinear")]
        interp: InterpArg,
        /// Value for samples mapped outside the volume.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        fill: f64,
        /// Write per-voxel 4×4 matrices instead of displacements.
        #[arg(long)]
        matrices: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a grid benchmark sweep and write CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Write fixtures, a synthetic joint scene, or benchmark grids to disk.
    Synth {
        #[arg(long, value_enum)]
        what: SynthWhat,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Grid size for scenes and benchmark grids.
        #[arg(long, default_value_t = 32)]
        n: usize,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numeric() { 2 } else { 1 }, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

type CmdResult = std::result::Result<(), Failure>;

fn require_file(path: &Path) -> CmdResult {
    if !path.is_file() {
        return Err(usage(format!("no such file: {}", path.display())));
    }
    Ok(())
}

fn require_parent(path: &Path) -> CmdResult {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(usage(format!("output directory does not exist: {}", parent.display())));
    }
    Ok(())
}

fn load_matrix(path: &Path) -> std::result::Result<Mat4, Failure> {
    Ok(read_transform(path)?.mat()?)
}

fn cmd_exp(input: &Path, opts: &BackendOpts, t: f64, out: &Path) -> CmdResult {
    require_file(input)?;
    require_parent(out)?;
    let m = load_matrix(input)?;
    let backend = opts.backend();
    let result = backend.power(&m, t)?;
    eprintln!("backend {}: ‖T‖₂ = {:.6e}, ‖T^t‖₂ = {:.6e}", backend.name(), norm_2(&m), norm_2(&result));
    let file = TransformFile::new(&result).with_meta("op", "exp").with_meta("t", t).with_meta("backend", backend.name());
    write_transform(&file, out)?;
    Ok(())
}

fn cmd_log(input: &Path, opts: &BackendOpts, out: &Path) -> CmdResult {
    require_file(input)?;
    require_parent(out)?;
    let m = load_matrix(input)?;
    let backend = opts.backend();
    let l = backend.log(&m)?;
    let back = backend.exp(&l)?;
    eprintln!("backend {}: ‖log T‖₂ = {:.6e}, ‖exp(log T) − T‖₂ = {:.3e}", backend.name(), norm_2(&l), norm_2(&(back - m)));
    let file = TransformFile::new(&l).with_meta("op", "log").with_meta("backend", backend.name());
    write_transform(&file, out)?;
    Ok(())
}

fn fmt_c(z: num_complex::Complex64) -> String {
    format!("{:+.10} {:+.10}i", z.re, z.im)
}

fn cmd_eig(input: &Path, report: bool) -> CmdResult {
    require_file(input)?;
    let m = load_matrix(input)?;
    let opts = EigenOptions::default();
    if let Ok(rigid) = RigidTransform::with_tolerance(m, INPUT_RIGID_TOL) {
        match classify_screw(&rigid, opts.pitch_tol) {
            Ok(r) if r.near_identity => println!("near_identity: rotation angle {:.3e} rad", r.angle),
            Ok(r) => {
                println!("axis: ({:.9}, {:.9}, {:.9})", r.axis[0], r.axis[1], r.axis[2]);
                println!("angle: {:.9} rad ({:.6} deg)", r.angle, r.angle.to_degrees());
                println!("pitch: {:.6e} mm", r.pitch);
                println!("rodrigues: ({:.9}, {:.9}, {:.9})", r.rodrigues[0], r.rodrigues[1], r.rodrigues[2]);
                println!("screw: {}", r.is_screw);
            }
            Err(e) => println!("screw analysis: {e}"),
        }
    } else {
        println!("not rigid: screw analysis skipped");
    }
    let dec = eig_homogeneous(&m, &opts)?;
    for (k, l) in dec.lambdas.iter().enumerate() {
        println!("lambda{}: {}", k + 1, fmt_c(*l));
    }
    let repeated = dec.has_repeated_unit(REPORT_REPEAT_TOL);
    let verdict = match (repeated, dec.branch) {
        (_, polyexp::eigen4::Branch::NearIdentity) => "near identity, diagonalizable",
        (true, _) => "repeated λ=1, diagonalizable",
        (false, _) => "distinct eigenvalues, diagonalizable",
    };
    println!("verdict: {verdict}");
    if report {
        println!("branch: {:?}", dec.branch);
        println!("cond2(P): {:.6e}", dec.cond);
        for k in 0..4 {
            let v = dec.p.column(k);
            println!("v{}: [{}]", k + 1, v.iter().map(|z| fmt_c(*z)).collect::<Vec<_>>().join(", "));
        }
    }
    Ok(())
}

fn build_pool(threads: Option<usize>) -> std::result::Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| usage(e.to_string()))
}

fn time_label(t: f64) -> String {
    format!("{t}").replace('-', "m")
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    scene: &Path,
    times: &[f64],
    opts: &BackendOpts,
    prefix: &Path,
    warp: Option<&Path>,
    interp: InterpArg,
    fill: f64,
    matrices: bool,
    threads: Option<usize>,
) -> CmdResult {
    require_file(scene)?;
    if let Some(v) = warp {
        require_file(v)?;
    }
    require_parent(prefix)?;
    if let Some(t) = times.iter().find(|t| t.is_nan() || t.abs() > 1.0) {
        return Err(usage(format!("--t value {t} outside [-1, 1]")));
    }
    let pool = build_pool(threads)?;
    let backend = opts.backend();
    pool.install(|| -> CmdResult {
        let start = Instant::now();
        let model = load_scene(scene, &backend)?;
        eprintln!("model: {} components on {:?}, {:.3}s", model.components.len(), model.grid.dims, start.elapsed().as_secs_f64());
        let volume = match warp {
            Some(v) => {
                let vol = read_field(v)?.into_scalar()?;
                if vol.grid != model.grid {
                    return Err(Error::IncompatibleGrids.into());
                }
                Some(vol)
            }
            None => None,
        };
        // Pull-back warping to time t samples the source at exp(−t·L)·x.
        let mut all = times.to_vec();
        if volume.is_some() {
            all.extend(times.iter().map(|t| -t));
        }
        let start = Instant::now();
        let flow = flow_many(&model, &all, &backend)?;
        eprintln!(
            "flow: {} times, backend {}, {:.3}s, fallback voxels {}",
            all.len(),
            backend.name(),
            start.elapsed().as_secs_f64(),
            flow.fallback_voxels
        );
        let base = prefix.to_string_lossy().into_owned();
        for (k, &t) in times.iter().enumerate() {
            let path = PathBuf::from(format!("{base}_t{}.pgf", time_label(t)));
            let field: AnyField = if matrices { flow.matrices[k].clone().into() } else { flow.displacement(k).into() };
            write_field(&field, &path)?;
            if let Some(vol) = &volume {
                let opts = WarpOptions {
                    interp: match interp {
                        InterpArg::Trilinear => Interp::Trilinear,
                        InterpArg::CubicBspline => Interp::CubicBspline,
                    },
                    fill,
                };
                let warped = polyexp::field::warp_matrices(vol, &flow.matrices[times.len() + k], opts)?;
                write_field(&AnyField::Scalar(warped), format!("{base}_t{}_warped.pgf", time_label(t)))?;
            }
        }
        Ok(())
    })
}

fn memory_cap_override() -> std::result::Result<Option<u64>, Failure> {
    match std::env::var(MEMORY_CAP_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| usage(format!("{MEMORY_CAP_ENV} must be an integer byte count"))),
        Err(_) => Ok(None),
    }
}

fn cmd_bench(config: &Path, csv_path: &Path, threads: usize) -> CmdResult {
    require_file(config)?;
    require_parent(csv_path)?;
    let text = std::fs::read_to_string(config).map_err(Error::from)?;
    let mut cfg: BenchConfig = serde_json::from_str(&text).map_err(|e| usage(format!("bad bench config: {e}")))?;
    if let Some(cap) = memory_cap_override()? {
        cfg.memory_cap_bytes = Some(cap);
    }
    let pool = build_pool(Some(threads))?;
    let records = pool.install(|| run_sweep(&cfg))?;
    for r in &records {
        eprintln!("{} n={} s={} {:.4}s {} B err {:.3e}", r.method, r.n, r.s, r.wall_time_s, r.modeled_peak_bytes, r.max_error);
    }
    let file = std::fs::File::create(csv_path).map_err(Error::from)?;
    emit_csv(&records, file)?;
    Ok(())
}

fn cmd_synth(what: SynthWhat, seed: u64, out: &Path, n: usize) -> CmdResult {
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    std::fs::create_dir_all(out).map_err(Error::from)?;
    match what {
        SynthWhat::Fixtures => {
            for f in synth::fixtures() {
                let file = TransformFile::new(&f.matrix).with_meta("name", f.name.clone()).with_meta("provenance", f.provenance);
                write_transform(&file, out.join(format!("{}.json", f.name)))?;
            }
            let screw = synth::screw_z(std::f64::consts::FRAC_PI_3, [0.0, 0.0, 1.0]).matrix();
            write_transform(&TransformFile::new(&screw).with_meta("name", "screw_z"), out.join("screw.json"))?;
        }
        SynthWhat::Scene => {
            let path = synth::joint_scene(&Grid3::cube(n), seed).write(out)?;
            eprintln!("scene written to {}", path.display());
        }
        SynthWhat::Grids => {
            let grid = Grid3::cube(n);
            let v = polyexp::field::Field::filled(grid, polyexp::bench::quarter_turn_log());
            write_field(&AnyField::Mat(v), out.join(format!("velocity_n{n}.pgf")))?;
            let c = grid.center();
            let r = n as f64 / 4.0;
            let mask = synth::ellipsoid_mask(&grid, c, [r, 0.8 * r, 1.2 * r]);
            write_field(&AnyField::Mask(mask), out.join(format!("ellipsoid_n{n}.pgf")))?;
            let rigid = synth::random_rigid_non_screw(seed, 170.0, 20.0).matrix();
            write_transform(&TransformFile::new(&rigid).with_meta("seed", seed), out.join(format!("rigid_seed{seed}.json")))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Exp { input, backend, t, out } => cmd_exp(&input, &backend, t, &out),
        Command::Log { input, backend, out } => cmd_log(&input, &backend, &out),
        Command::Eig { input, report } => cmd_eig(&input, report),
        Command::Flow { scene, t, backend, out_prefix, warp, interp, fill, matrices, threads } => {
            cmd_flow(&scene, &t, &backend, &out_prefix, warp.as_deref(), interp, fill, matrices, threads)
        }
        Command::Bench { config, csv, threads } => cmd_bench(&config, &csv, threads),
        Command::Synth { what, seed, out, n } => cmd_synth(what, seed, &out, n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
