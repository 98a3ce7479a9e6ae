//! Command-line front end.

use crate::abelian::Abelian;
use crate::error::{Result, ZsbError};
use crate::evolution::{illposedness_demo, DemoConfig, GridState, Mkdv};
use crate::pipeline::Pipeline;
use crate::potential::Potential;
use crate::roots_products::Side;
use crate::seq_analysis::RunConfig;
use crate::spectrum::gap_check;
use crate::zs_core::ZsSolver;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "zsb", version, about = "Periodic Zakharov–Shabat spectra, actions and mKdV frequencies")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration (key = value lines or JSON); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Potential JSON file; the zero potential when absent.
    #[arg(long, global = true)]
    pub potential: Option<PathBuf>,
    /// Spectral window half-width.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Root-product tail index.
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Periodic eigenvalues, gap data and isolating discs.
    Spectrum,
    /// Actions by both contour formulas.
    Actions,
    /// Actions and mKdV frequencies for the given indices.
    Freqs {
        /// Indices (default: the whole window).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ns: Option<Vec<i64>>,
    },
    /// The abelian integral F.
    Abelian {
        #[command(subcommand)]
        op: AbelianOp,
    },
    /// Pseudospectral mKdV / mKdV# integration of a real potential.
    Evolve {
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Integrate mKdV# instead of mKdV.
        #[arg(long)]
        sharp: bool,
        /// Conserved quantities every this many steps.
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
    },
    /// H₁ and ω★ along truncations of a Fourier–Lebesgue datum.
    IllposedDemo {
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 512)]
        kmax: usize,
        #[arg(long, default_value_t = 8)]
        kmin: usize,
        #[arg(long, default_value_t = 0.1)]
        amplitude: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        ns: Vec<i64>,
    },
    /// Runs the acceptance suite.
    Validate {
        /// Only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
    },
    /// Direct evaluation of the Zakharov–Shabat transfer matrix.
    Zs {
        #[command(subcommand)]
        op: ZsOp,
    },
}

#[derive(Subcommand, Debug)]
pub enum AbelianOp {
    /// F (or F_n) at points `re` or `re:im`.
    Eval {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambda: Vec<String>,
        /// Evaluate F_n instead of F.
        #[arg(long = "n", id = "gap_index", allow_hyphen_values = true)]
        n: Option<i64>,
        /// Gap side for points on a gap: plus or minus.
        #[arg(long)]
        side: Option<String>,
    },
    /// H₁..H_p from the large-λ expansion of F.
    Laurent {
        #[arg(long)]
        jmin: Option<usize>,
        #[arg(long)]
        jmax: Option<usize>,
        #[arg(long, default_value_t = 14)]
        powers: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ZsOp {
    /// Δ, Δ̇ and the fundamental matrix at points `re` or `re:im`.
    Eval {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambda: Vec<String>,
    },
}

fn parse_point(s: &str) -> Result<C64> {
    let bad = || ZsbError::Input(format!("cannot parse point '{s}' (use re or re:im)"));
    match s.split_once(':') {
        Some((a, b)) => Ok(C64::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok(C64::new(s.trim().parse().map_err(|_| bad())?, 0.0)),
    }
}

fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Output sink: files under `--out`, or stdout.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Sink { dir })
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(name, &s)
    }

    fn text(&self, name: &str, s: &str) -> Result<()> {
        match &self.dir {
            Some(d) => std::fs::write(d.join(name), s)?,
            None => {
                if name.ends_with(".csv") {
                    println!("# {name}");
                }
                print!("{s}");
            }
        }
        Ok(())
    }
}

fn resolve(common: &Common) -> Result<(RunConfig, Potential)> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(n) = common.n {
        cfg.n = n;
    }
    if let Some(m) = common.m {
        cfg.m = Some(m);
    }
    if let Some(t) = common.tol {
        cfg.tol = t;
    }
    if let Some(p) = &common.potential {
        cfg.potential = Some(p.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    let phi = match &cfg.potential {
        Some(p) => load_potential(p)?,
        None => Potential::zero(),
    };
    Ok((cfg, phi))
}

fn load_potential(p: &Path) -> Result<Potential> {
    Potential::load(p).map_err(|e| ZsbError::Input(format!("{}: {e}", p.display())))
}

/// Caps the global thread pool at `ZSB_THREADS`.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ZSB_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| ZsbError::Input(format!("ZSB_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(ZsbError::Input("ZSB_THREADS must be positive".into()));
        }
        // a pool that already exists (library use) keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed command; returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    init_threads()?;
    if let Cmd::Validate { only } = &cli.cmd {
        return validate(only.as_deref(), cli.common.out.clone());
    }
    let (cfg, phi) = resolve(&cli.common)?;
    let sink = Sink::new(cfg.out.clone())?;
    match cli.cmd {
        Cmd::Spectrum => {
            let pl = Pipeline::new(&phi, cfg.n, cfg.m, cfg.tol)?;
            let sd = &pl.sd;
            sink.json("spectrum.json", sd.as_ref())?;
            let mut csv = String::from("n,lam_minus_re,lam_minus_im,lam_plus_re,lam_plus_im,tau_re,tau_im,gamma_re,gamma_im,lam_dot_re,lam_dot_im\n");
            for n in sd.indices() {
                let z = [sd.lam_minus(n), sd.lam_plus(n), sd.tau(n), sd.gamma(n), sd.lam_dot(n)];
                let _ = write!(csv, "{n}");
                for v in z {
                    let _ = write!(csv, ",{:e},{:e}", v.re, v.im);
                }
                csv.push('\n');
            }
            sink.text("gaps.csv", &csv)?;
            sink.json("gap_report.json", &gap_check(sd, &phi))?;
        }
        Cmd::Actions => {
            let pl = Pipeline::new(&phi, cfg.n, cfg.m, cfg.tol)?;
            let fr = pl.frequencies(cfg.tol)?;
            let acts = pl.sd.indices().map(|n| fr.action(n)).collect::<Result<Vec<_>>>()?;
            sink.json("actions.json", &acts)?;
            let mut csv = String::from("n,I_re,I_im,alt_re,alt_im,discrepancy\n");
            for a in &acts {
                let _ = writeln!(csv, "{},{:e},{:e},{:e},{:e},{:e}", a.n, a.value.re, a.value.im, a.alt.re, a.alt.im, a.discrepancy);
            }
            sink.text("actions.csv", &csv)?;
        }
        Cmd::Freqs { ns } => {
            let pl = Pipeline::new(&phi, cfg.n, cfg.m, cfg.tol)?;
            let fr = pl.frequencies(cfg.tol)?;
            let ns = ns.unwrap_or_else(|| pl.sd.indices().collect());
            let fs = fr.frequency_spectrum(&ns)?;
            let rows: Vec<Value> = (0..fs.ns.len())
                .map(|i| {
                    let mut r = json!({
                        "n": fs.ns[i],
                        "I": fs.actions[i].value.re,
                        "omega_star": fs.omega_star[i].re,
                        "omega_sharp": fs.omega_sharp[i].re,
                        "trunc_err": fs.trunc_err[i],
                        "imag": {
                            "I": fs.actions[i].value.im,
                            "omega_star": fs.omega_star[i].im,
                            "omega_sharp": fs.omega_sharp[i].im,
                        },
                    });
                    if let Some(w) = &fs.omega {
                        r["omega"] = json!(w[i].re);
                    }
                    r
                })
                .collect();
            sink.json("freqs.json", &rows)?;
            sink.json(
                "freqs_diagnostics.json",
                &json!({
                    "h1": cx(fs.h1), "h2": cx(fs.h2),
                    "m0_defect": fs.m0_defect, "odd_defect": fs.odd_defect,
                    "scale_defect": fs.scale_defect, "psi_residual": fs.psi_residual,
                    "open_gaps": fs.open,
                }),
            )?;
        }
        Cmd::Abelian { op } => {
            let pl = Pipeline::new(&phi, cfg.n, cfg.m, cfg.tol)?;
            abelian(&pl.ab, op, &sink, phi.nmodes)?;
        }
        Cmd::Evolve { grid, dt, t_end, sharp, sample_every } => {
            let g = grid.unwrap_or(cfg.grid);
            let dt = dt.unwrap_or(cfg.dt);
            let t_end = t_end.unwrap_or(cfg.t_end);
            let u0 = GridState::from_potential(&phi, g)?;
            let (u, samples) = Mkdv::new(g, sharp).evolve(&u0, t_end, dt, sample_every)?;
            let mut csv = String::from("t,mean,l2,energy\n");
            for s in &samples {
                let _ = writeln!(csv, "{:e},{:e},{:e},{:e}", s.t, s.mean, s.l2, s.energy);
            }
            sink.text("trajectory.csv", &csv)?;
            let mut csv = String::from("x,u\n");
            for (j, v) in u.u.iter().enumerate() {
                let _ = writeln!(csv, "{:e},{:e}", j as f64 / g as f64, v);
            }
            sink.text("final_state.csv", &csv)?;
        }
        Cmd::IllposedDemo { p, alpha, kmax, kmin, amplitude, ns } => {
            let t = illposedness_demo(&DemoConfig { p, alpha, kmax, kmin, amplitude, ns, tol: cfg.tol })?;
            sink.json("illposed_demo.json", &t)?;
            let mut csv = String::from("k,h1,lp_norm");
            for n in &t.ns {
                let _ = write!(csv, ",omega_star_{n}");
            }
            csv.push('\n');
            for r in &t.rows {
                let _ = write!(csv, "{},{:e},{:e}", r.k, r.h1, r.lp_norm);
                for w in &r.omega_star {
                    let _ = write!(csv, ",{w:e}");
                }
                csv.push('\n');
            }
            sink.text("illposed_demo.csv", &csv)?;
        }
        Cmd::Zs { op: ZsOp::Eval { lambda } } => {
            let solver = ZsSolver::new(&phi);
            let mut rows = Vec::new();
            for s in &lambda {
                let z = parse_point(s)?;
                let r = solver.transfer(z)?;
                rows.push(json!({
                    "lambda": cx(z),
                    "delta": cx(r.delta()),
                    "delta_dot": cx(r.ddelta()),
                    "m": [[cx(r.m11), cx(r.m12)], [cx(r.m21), cx(r.m22)]],
                    "det": cx(r.det()),
                }));
            }
            sink.json("zs_eval.json", &rows)?;
        }
        Cmd::Validate { .. } => unreachable!("handled above"),
    }
    Ok(0)
}

fn abelian(ab: &Abelian, op: AbelianOp, sink: &Sink, nmodes: usize) -> Result<()> {
    match op {
        AbelianOp::Eval { lambda, n, side } => {
            let side = match side.as_deref() {
                None => None,
                Some("plus") => Some(Side::Plus),
                Some("minus") => Some(Side::Minus),
                Some(s) => return Err(ZsbError::Input(format!("side must be plus or minus, got '{s}'"))),
            };
            let mut rows = Vec::new();
            for s in &lambda {
                let z = parse_point(s)?;
                let f = match n {
                    Some(n) => ab.f_n(n, z, side)?,
                    None => ab.f(z, side)?,
                };
                rows.push(json!({ "lambda": cx(z), "F": cx(f) }));
            }
            sink.json("abelian_eval.json", &rows)
        }
        AbelianOp::Laurent { jmin, jmax, powers } => {
            let jmin = jmin.unwrap_or((2 * nmodes).max(6));
            let fit = ab.laurent_fit(jmin, jmax.unwrap_or(jmin + 74), powers)?;
            sink.json("laurent.json", &fit)
        }
    }
}

fn validate(only: Option<&[u32]>, out: Option<PathBuf>) -> Result<i32> {
    let sink = Sink::new(out.clone())?;
    let mut results = Vec::new();
    for (i, check) in crate::acceptance::CHECKS.iter().enumerate() {
        let id = i as u32 + 1;
        if only.is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let c = check();
        eprintln!("{c}");
        results.push(c);
    }
    let failed: Vec<u32> = results.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    if out.is_some() {
        sink.json("validate.json", &results)?;
    }
    if failed.is_empty() {
        eprintln!("all {} criteria passed", results.len());
        Ok(0)
    } else {
        eprintln!("failed criteria: {failed:?}");
        Ok(1)
    }
}
