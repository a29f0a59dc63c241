use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use cadseq_core::codec::{encode, QuantConfig};
use cadseq_core::kernel::ExecConfig;
use cadseq_harness::corpus::{self, CorpusSpec};
use cadseq_harness::pipeline::{self, Failure};
use cadseq_harness::quant::{self, QuantStudyConfig};
use cadseq_harness::report::{self, MetricsConfig};
use cadseq_harness::{gradcheck, resolve};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cadseq", version, about = "Pointer-based CAD command sequences")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, env = "POINTERCAD_SEED", default_value_t = 0)]
    seed: u64,
    /// Value quantization bits.
    #[arg(long, global = true, default_value_t = 8)]
    q: u32,
    #[arg(long, global = true, default_value_t = 64)]
    tess_segments: usize,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Program JSON to token stream JSON.
    Encode { program: PathBuf, #[arg(short, long)] out: Option<PathBuf> },
    /// Token stream JSON to program JSON.
    Decode { stream: PathBuf, #[arg(short, long)] out: Option<PathBuf> },
    /// Checks a program JSON against the grammar.
    Validate { program: PathBuf },
    /// Decodes, validates and executes a token stream.
    Build {
        stream: PathBuf,
        #[arg(long)]
        stl: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    GenCorpus {
        out_dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        n_models: usize,
        #[arg(long, default_value_t = 2)]
        min_steps: usize,
        #[arg(long, default_value_t = 4)]
        max_steps: usize,
        #[arg(long, default_value_t = 0.1)]
        chamfer_prob: f64,
        #[arg(long, default_value_t = 0.1)]
        fillet_prob: f64,
    },
    QuantStudy {
        corpus_dir: PathBuf,
        out_csv: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = (4..=10).collect::<Vec<u32>>())]
        q_values: Vec<u32>,
        #[arg(long, default_value_t = cadseq_core::metrics::CD_SAMPLES)]
        n_samples: usize,
        /// Also write per-model CDs here.
        #[arg(long)]
        rows: Option<PathBuf>,
    },
    Metrics {
        pred_dir: PathBuf,
        gt_dir: PathBuf,
        out_csv: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = cadseq_core::metrics::CD_SAMPLES)]
        n_samples: usize,
        /// Dihedral angle in degrees below which faces merge.
        #[arg(long, default_value_t = cadseq_core::metrics::SEG_THRESHOLD_DEG)]
        seg_thresh: f64,
        #[arg(long, default_value_t = cadseq_core::metrics::F1_TOL)]
        f1_tol: f64,
    },
    /// Ranks the candidates of a built solid against one entity.
    Resolve {
        stream: PathBuf,
        /// `face:ID`, `edge:ID` or `base:ID`.
        entity: String,
        /// Use the solid before this step instead of the final one.
        #[arg(long)]
        step: Option<usize>,
    },
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_build(stream: &Path, stl: Option<&Path>, json: Option<&Path>, cfg: &ExecConfig) -> Result<(), Failure> {
    let s = pipeline::read_stream(stream)?;
    let (_, exec) = pipeline::build_stream(&s, cfg)?;
    let solid = exec.final_solid();
    let io_err = |e: io::Error| Failure::Decode(e.to_string());
    if let Some(p) = stl {
        let mut buf = Vec::new();
        solid.mesh.write_stl(&mut buf).map_err(io_err)?;
        fs::write(p, buf).map_err(io_err)?;
    }
    let dump = serde_json::to_string_pretty(&solid.to_json()).expect("json value");
    match json {
        Some(p) => fs::write(p, dump).map_err(io_err)?,
        None => println!("{dump}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = &cli.global;
    let exec_cfg = ExecConfig { tess_segments: g.tess_segments, snap_vertex_radius: 0.0 };
    match cli.command {
        Command::Encode { program, out } => {
            let p = pipeline::read_program(&program)?;
            let stream = encode(&p, &QuantConfig::with_q(g.q))?;
            write_out(out.as_deref(), &stream.to_json())?;
        }
        Command::Decode { stream, out } => {
            let s = pipeline::read_stream(&stream);
            match s.and_then(|s| pipeline::decode_checked(&s)) {
                Ok(p) => write_out(out.as_deref(), &serde_json::to_string_pretty(&p)?)?,
                Err(f) => {
                    eprintln!("{f}");
                    return Ok(ExitCode::from(f.exit_code() as u8));
                }
            }
        }
        Command::Validate { program } => {
            let p = pipeline::read_program(&program)?;
            let d = cadseq_core::grammar::validate(&p);
            if !d.is_empty() {
                for x in d.iter() {
                    eprintln!("{x}");
                }
                return Ok(ExitCode::from(3));
            }
            println!("ok");
        }
        Command::Build { stream, stl, json } => {
            if let Err(f) = cmd_build(&stream, stl.as_deref(), json.as_deref(), &exec_cfg) {
                eprintln!("{f}");
                return Ok(ExitCode::from(f.exit_code() as u8));
            }
        }
        Command::GenCorpus { out_dir, n_models, min_steps, max_steps, chamfer_prob, fillet_prob } => {
            let spec = CorpusSpec { n_models, min_steps, max_steps, chamfer_prob, fillet_prob, seed: g.seed, ..CorpusSpec::default() };
            let models = corpus::generate(&spec, &exec_cfg);
            let manifest = corpus::write_corpus(&models, &spec, g.q, &exec_cfg, &out_dir)?;
            println!("wrote {} models to {}", manifest.models.len(), out_dir.display());
        }
        Command::QuantStudy { corpus_dir, out_csv, q_values, n_samples, rows } => {
            let programs = corpus::read_programs(&corpus_dir)?;
            let cfg = QuantStudyConfig { q_values, n_samples, seed: g.seed, tess_segments: g.tess_segments };
            let study = quant::run_study(&programs, &cfg);
            study.write_csv(&out_csv)?;
            if let Some(r) = rows {
                study.write_rows_csv(&r)?;
            }
            if !study.excluded.is_empty() {
                eprintln!("excluded {} legacy-incompatible models", study.excluded.len());
            }
        }
        Command::Metrics { pred_dir, gt_dir, out_csv, json, n_samples, seg_thresh, f1_tol } => {
            let cfg = MetricsConfig { n_samples, seed: g.seed, seg_thresh_deg: seg_thresh, f1_tol, tess_segments: g.tess_segments };
            let (rep, missing) = report::evaluate_dirs(&pred_dir, &gt_dir, &cfg)?;
            for m in &missing {
                eprintln!("skipped {m}: no ground truth");
            }
            report::write_csv(&rep, &out_csv)?;
            if let Some(j) = json {
                report::write_json(&rep, &j)?;
            }
        }
        Command::Resolve { stream, entity, step } => {
            let target = resolve::parse_entity(&entity)?;
            let s = pipeline::read_stream(&stream)?;
            let (_, exec) = pipeline::build_stream(&s, &exec_cfg)?;
            let solid = match step {
                Some(k) => exec.before(k),
                None => exec.final_solid().clone(),
            };
            resolve::write_table(&solid, &target, g.seed, &mut io::stdout().lock())?;
        }
        Command::Gradcheck { trials } => {
            let r = gradcheck::run(g.seed, trials);
            println!("label_value {:e}", r.label_value);
            println!("pointer {:e}", r.pointer);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global().expect("thread pool");
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
