//! `sunflower` — command-line driver for the sunflower toolkit.
//!
//! One binary, eight subcommands. All randomness flows from `--seed`
//! (default 0), so every run is reproducible. Exit status: 0 on success,
//! 1 for honest negative outcomes (no sunflower found, suite failures),
//! 2 for invalid input.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use sunflower_core::{
    alg::StructureFile,
    bounds::{check_beta_certificate, gamma, AlphaSpec, BetaFn, MonotoneMap},
    build_mk_fragment, greedy_sunflower, materialize,
    search::{exact_sf, SearchBudget, SfCertificate},
    sets::{FiniteSet, SetFamily},
    synth_beta,
    verify::{
        bound_sanity, closure_cross_check_suite, lemma_guarantee_suite, nbeta_invariant_suite,
        padding_suite, proposition_suite, theorem_bound_cells, BoundCell, SuiteReport,
    },
    FinStructure, MkFragmentSpec,
};

#[derive(Parser)]
#[command(name = "sunflower", version, about = "Sunflower search, exact thresholds, and structure experiments")]
struct Cli {
    /// Worker-thread cap for the parallel kernels (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for every pseudo-random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file (defaults to stdout where applicable)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search a family file for an n-sunflower and write the witness
    FindSunflower {
        /// JSON family file: {"universe": int?, "sets": [[atom,...],...]}
        family: PathBuf,
        #[arg(long)]
        n: usize,
        /// Member-size cap; defaults to the largest member in the file
        #[arg(long)]
        k: Option<usize>,
    },
    /// Exact least family size forcing an n-sunflower among <=k-sets
    ExactSf {
        n: u64,
        k: u64,
        #[arg(long)]
        max_universe: Option<u32>,
        #[arg(long)]
        max_family: Option<usize>,
        /// Soft wall-clock budget in seconds
        #[arg(long)]
        time_hint: Option<f64>,
    },
    /// Emit a structure file for one of the two constructions
    Build {
        #[command(subcommand)]
        what: BuildCmd,
    },
    /// Closure of a seed set inside a structure file
    Closure {
        structure: PathBuf,
        /// Comma-separated element ids (empty for the empty seed)
        #[arg(long, default_value = "")]
        elements: String,
    },
    /// Search for an isomorphism between two structure files
    Iso {
        a: PathBuf,
        b: PathBuf,
        /// Generate the left substructure from these elements (default: all)
        #[arg(long)]
        sub_a: Option<String>,
        /// Generate the right substructure from these elements (default: all)
        #[arg(long)]
        sub_b: Option<String>,
    },
    /// Run a verification suite; non-zero exit on any failed check
    Verify {
        /// invariants | proposition | theorem
        suite: String,
        /// Cycle-length schedule, e.g. 3,4,5
        #[arg(long, default_value = "3,4,5")]
        beta: String,
        /// Growth map, e.g. affine:1,3 or poly:2,2,3 or table:3,4,5,...
        #[arg(long, default_value = "affine:1,3")]
        alpha: String,
        /// Largest sunflower size probed (proposition suite)
        #[arg(long)]
        n: Option<u64>,
        /// Largest member size / carrier cap probed
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 8)]
        copies: usize,
    },
    /// Synthesize a cycle-length schedule from a growth map, with certificate
    SynthBeta {
        #[arg(long, default_value = "affine:1,3")]
        alpha: String,
        /// Certification horizon for the emitted certificate
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
    },
    /// Full experiment battery: text table on stdout, JSON sidecar on --out
    Report {
        #[arg(long, default_value = "3,4,5")]
        beta: String,
        #[arg(long, default_value = "affine:1,3")]
        alpha: String,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Disjoint k-cycles under one unary symbol
    Mk {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        copies: usize,
    },
    /// Materialized rotation-tuple fragment over a base set
    Nbeta {
        /// Cycle-length schedule, e.g. 3,4
        #[arg(long)]
        beta: String,
        /// Comma-separated base atoms (empty for the empty base)
        #[arg(long, default_value = "")]
        base: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // the search kernels pick this pool up when they parallelize
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {:#}", err);
            let invalid = err
                .downcast_ref::<sunflower_core::Error>()
                .map(|e| {
                    matches!(
                        e,
                        sunflower_core::Error::InvalidInput(_)
                            | sunflower_core::Error::Precondition(_)
                    )
                })
                .unwrap_or(true);
            ExitCode::from(if invalid { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.cmd {
        Cmd::FindSunflower { family, n, k } => cmd_find_sunflower(cli, family, *n, *k),
        Cmd::ExactSf {
            n,
            k,
            max_universe,
            max_family,
            time_hint,
        } => cmd_exact_sf(cli, *n, *k, *max_universe, *max_family, *time_hint),
        Cmd::Build { what } => cmd_build(cli, what),
        Cmd::Closure { structure, elements } => cmd_closure(cli, structure, elements),
        Cmd::Iso { a, b, sub_a, sub_b } => cmd_iso(cli, a, b, sub_a.as_deref(), sub_b.as_deref()),
        Cmd::Verify {
            suite,
            beta,
            alpha,
            n,
            k,
            cases,
            copies,
        } => cmd_verify(cli, suite, beta, alpha, *n, *k, *cases, *copies),
        Cmd::SynthBeta { alpha, horizon } => cmd_synth_beta(cli, alpha, *horizon),
        Cmd::Report { beta, alpha, cases } => cmd_report(cli, beta, alpha, *cases),
    }
}

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

fn parse_u64_list(s: &str, what: &str) -> anyhow::Result<Vec<u64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| anyhow::anyhow!("invalid {} entry: {:?}", what, p))
        })
        .collect()
}

fn parse_beta(s: &str) -> anyhow::Result<BetaFn> {
    Ok(BetaFn::new(parse_u64_list(s, "beta")?)?)
}

fn parse_alpha(s: &str) -> anyhow::Result<MonotoneMap> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| anyhow::anyhow!("alpha spec needs kind:params, got {:?}", s))?;
    let nums = parse_u64_list(rest, "alpha")?;
    let spec = match (kind, nums.as_slice()) {
        ("affine", [slope, offset]) => AlphaSpec::Affine {
            slope: *slope,
            offset: *offset,
        },
        ("poly", [coeff, degree, offset]) => AlphaSpec::Poly {
            coeff: *coeff,
            degree: *degree as u32,
            offset: *offset,
        },
        ("table", values) if !values.is_empty() => AlphaSpec::Table {
            values: values.to_vec(),
        },
        _ => anyhow::bail!(
            "unrecognized alpha spec {:?} (expected affine:a,b poly:c,d,e or table:v0,v1,...)",
            s
        ),
    };
    Ok(MonotoneMap::new(spec)?)
}

fn parse_atoms(s: &str) -> anyhow::Result<Vec<u32>> {
    Ok(parse_u64_list(s, "atom")?.into_iter().map(|v| v as u32).collect())
}

fn load_structure(path: &Path) -> anyhow::Result<FinStructure> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {}", path.display(), e))?;
    let file: StructureFile = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("{}: {}", path.display(), e))?;
    Ok(FinStructure::from_file_format(file)?)
}

fn emit<T: Serialize>(cli: &Cli, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &cli.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{}", text),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_find_sunflower(
    cli: &Cli,
    family_path: &Path,
    n: usize,
    k: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(family_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {}", family_path.display(), e))?;
    let family: SetFamily = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("{}: {}", family_path.display(), e))?;
    family.validate()?;
    let k = k.unwrap_or_else(|| {
        family
            .members()
            .iter()
            .map(|m| m.len())
            .max()
            .unwrap_or(0)
    });
    if let Some(over) = family.members().iter().find(|m| m.len() > k) {
        anyhow::bail!(sunflower_core::Error::InvalidInput(format!(
            "member {:?} larger than k = {}",
            over, k
        )));
    }
    match greedy_sunflower(&family, n, k) {
        Some(witness) => {
            emit(cli, &witness)?;
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("no {}-sunflower found among {} members", n, family.len());
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_exact_sf(
    cli: &Cli,
    n: u64,
    k: u64,
    max_universe: Option<u32>,
    max_family: Option<usize>,
    time_hint: Option<f64>,
) -> anyhow::Result<ExitCode> {
    let cache = std::env::var_os("SUNFLOWER_CACHE_DIR").map(PathBuf::from);
    let cache_file = cache.as_ref().map(|d| d.join(format!("exact-sf-{}-{}.json", n, k)));
    if let Some(f) = &cache_file {
        if let Ok(text) = fs::read_to_string(f) {
            if let Ok(cert) = serde_json::from_str::<SfCertificate>(&text) {
                if cert.status == "exact" && cert.n == n && cert.k == k {
                    emit(cli, &cert)?;
                    return Ok(ExitCode::SUCCESS);
                }
            }
        }
    }
    let default = SearchBudget::for_cell(n, k)?;
    let budget = SearchBudget::new(
        max_universe.unwrap_or(default.max_universe),
        max_family.unwrap_or(default.max_family),
        time_hint.or(default.time_hint),
    )?;
    let answer = exact_sf(n, k, &budget)?;
    let cert = answer.to_certificate();
    if answer.exact {
        if let (Some(dir), Some(f)) = (&cache, &cache_file) {
            fs::create_dir_all(dir).ok();
            fs::write(f, serde_json::to_string_pretty(&cert)?).ok();
        }
    }
    emit(cli, &cert)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_build(cli: &Cli, what: &BuildCmd) -> anyhow::Result<ExitCode> {
    let structure = match what {
        BuildCmd::Mk { k, copies } => build_mk_fragment(&MkFragmentSpec {
            k: *k,
            copies: *copies,
        })?,
        BuildCmd::Nbeta { beta, base } => {
            let beta = parse_beta(beta)?;
            let base = FiniteSet::from_atoms(parse_atoms(base)?);
            materialize(&beta, &base)?
        }
    };
    emit(cli, &structure.to_file_format())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_closure(cli: &Cli, path: &Path, elements: &str) -> anyhow::Result<ExitCode> {
    let m = load_structure(path)?;
    let seed: BTreeSet<usize> = parse_atoms(elements)?.into_iter().map(|v| v as usize).collect();
    let closed = m.closure(&seed)?;
    emit(cli, &closed)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_iso(
    cli: &Cli,
    a: &Path,
    b: &Path,
    sub_a: Option<&str>,
    sub_b: Option<&str>,
) -> anyhow::Result<ExitCode> {
    let ma = load_structure(a)?;
    let mb = load_structure(b)?;
    let ga = match sub_a {
        Some(s) => ma.closure(&parse_atoms(s)?.into_iter().map(|v| v as usize).collect())?,
        None => ma.full_carrier(),
    };
    let gb = match sub_b {
        Some(s) => mb.closure(&parse_atoms(s)?.into_iter().map(|v| v as usize).collect())?,
        None => mb.full_carrier(),
    };
    match sunflower_core::find_isomorphism(&ma, &ga, &mb, &gb)? {
        Some(map) => {
            let pairs: Vec<(usize, usize)> = map.into_iter().collect();
            emit(cli, &pairs)?;
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("no isomorphism");
            Ok(ExitCode::from(1))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cli: &Cli,
    suite: &str,
    beta: &str,
    alpha: &str,
    n: Option<u64>,
    k: Option<u64>,
    cases: usize,
    copies: usize,
) -> anyhow::Result<ExitCode> {
    match suite {
        "invariants" => {
            let beta = parse_beta(beta)?;
            let max_base = beta.horizon().min(3);
            let inv = nbeta_invariant_suite(&beta, max_base, cases, cli.seed)?;
            let cls = closure_cross_check_suite(&beta, cases.min(200), cli.seed)?;
            finish_suites(cli, &[inv, cls])
        }
        "proposition" => {
            let k_max = k.unwrap_or(6).max(2) as usize;
            let ks: Vec<usize> = (2..=k_max).collect();
            let report = proposition_suite(&ks, copies, n.unwrap_or(5) as usize)?;
            finish_suites(cli, &[report])
        }
        "theorem" => {
            let beta = parse_beta(beta)?;
            let alpha = parse_alpha(alpha)?;
            let k_max = match k {
                Some(k) => k,
                None => gamma(&beta, beta.horizon().min(2))?,
            };
            let cells = theorem_bound_cells(&alpha, &beta, &[2, 3], k_max)?;
            print_cells(&cells);
            let mut failures: Vec<String> = cells
                .iter()
                .filter(|c| !c.within_alpha || !c.within_derived)
                .map(|c| {
                    format!(
                        "n={} k={}: exact {} vs alpha bound {} / derived bound {}",
                        c.n, c.k, c.empirical, c.alpha_bound, c.derived_bound
                    )
                })
                .collect();
            failures.extend(bound_sanity(&cells));
            emit(cli, &cells)?;
            if failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for f in &failures {
                    eprintln!("FAIL {}", f);
                }
                Ok(ExitCode::from(1))
            }
        }
        other => anyhow::bail!("unknown suite {:?} (invariants | proposition | theorem)", other),
    }
}

fn finish_suites(cli: &Cli, reports: &[SuiteReport]) -> anyhow::Result<ExitCode> {
    let mut failed = false;
    for r in reports {
        let verdict = if r.passed() { "pass" } else { "FAIL" };
        println!(
            "{:<24} {:>6} cases {:>8} checks  {}{}",
            r.name,
            r.cases,
            r.checks,
            verdict,
            if r.truncated { "  (truncated)" } else { "" }
        );
        for f in &r.failures {
            eprintln!("  {}", f);
        }
        failed |= !r.passed();
    }
    emit(cli, &reports)?;
    Ok(ExitCode::from(if failed { 1 } else { 0 }))
}

fn cmd_synth_beta(cli: &Cli, alpha: &str, horizon: u64) -> anyhow::Result<ExitCode> {
    let alpha = parse_alpha(alpha)?;
    let (beta, cert) = synth_beta(&alpha, horizon)?;
    // re-verify through the independent checker before emitting
    let cert = check_beta_certificate(&alpha, &beta, cert.checked_k)?;
    emit(cli, &cert)?;
    Ok(ExitCode::SUCCESS)
}

/// Everything the battery produces, serialized as the JSON sidecar.
#[derive(Serialize)]
struct ExperimentReport {
    parameters: ReportParameters,
    suites: Vec<SuiteReport>,
    finder_cells: Vec<sunflower_core::EmpiricalReport>,
    bound_cells: Vec<BoundCell>,
    certificate: sunflower_core::BetaCertificate,
}

#[derive(Serialize)]
struct ReportParameters {
    beta: Vec<u64>,
    alpha: String,
    seed: u64,
    cases: usize,
}

fn cmd_report(cli: &Cli, beta: &str, alpha: &str, cases: usize) -> anyhow::Result<ExitCode> {
    let beta = parse_beta(beta)?;
    let alpha = parse_alpha(alpha)?;
    let started = std::time::Instant::now();

    let mut suites = Vec::new();
    suites.push(proposition_suite(&[2, 3, 4, 5, 6], 8, 5)?);
    suites.push(nbeta_invariant_suite(&beta, beta.horizon().min(3), cases, cli.seed)?);
    suites.push(closure_cross_check_suite(&beta, cases.min(200), cli.seed)?);
    suites.push(padding_suite(cases, cli.seed)?);
    let finder_cells = lemma_guarantee_suite(&[(3, 2), (3, 3), (2, 5)], 25, cli.seed)?;
    let k_max = gamma(&beta, beta.horizon().min(2))?;
    let bound_cells = theorem_bound_cells(&alpha, &beta, &[2, 3], k_max)?;
    let (synthesized, certificate) = synth_beta(&alpha, 10_000)?;
    let certificate = check_beta_certificate(&alpha, &synthesized, certificate.checked_k)?;

    println!("suite results (seed {}):", cli.seed);
    for r in &suites {
        println!(
            "  {:<24} {:>6} cases {:>8} checks  {}",
            r.name,
            r.cases,
            r.checks,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    println!("finder guarantee at the factorial threshold:");
    for c in &finder_cells {
        println!(
            "  n={} k={} size={}  {}/{} found",
            c.n, c.k, c.family_size, c.successes, c.count
        );
    }
    println!("bound table (exact thresholds via base-set transfer):");
    print_cells(&bound_cells);
    println!(
        "schedule certificate: beta={:?} checked_k={} ok={}",
        certificate.beta, certificate.checked_k, certificate.ok
    );
    println!("total wall time: {:.1}s", started.elapsed().as_secs_f64());

    let report = ExperimentReport {
        parameters: ReportParameters {
            beta: beta.values().to_vec(),
            alpha: alpha.describe(),
            seed: cli.seed,
            cases,
        },
        suites,
        finder_cells,
        bound_cells,
        certificate,
    };
    let sidecar = cli.out.clone().unwrap_or_else(|| PathBuf::from("report.json"));
    fs::write(&sidecar, serde_json::to_string_pretty(&report)? + "\n")?;
    println!("json sidecar: {}", sidecar.display());

    let ok = report.suites.iter().all(|s| s.passed())
        && report.finder_cells.iter().all(|c| c.failures.is_empty());
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}

fn print_cells(cells: &[BoundCell]) {
    println!(
        "  {:>2} {:>3} {:>8} {:>5} {:>6} {:>14} {:>14}",
        "n", "k", "base cap", "exact", "value", "alpha bound", "derived bound"
    );
    for c in cells {
        println!(
            "  {:>2} {:>3} {:>8} {:>5} {:>6} {:>14} {:>14}{}",
            c.n,
            c.k,
            c.base_cap,
            if c.exact { "yes" } else { "soft" },
            c.empirical,
            c.alpha_bound,
            c.derived_bound,
            if c.within_alpha && c.within_derived {
                ""
            } else {
                "  <-- above bound"
            }
        );
    }
}
