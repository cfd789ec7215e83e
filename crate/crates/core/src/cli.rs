//! Command-line front end. `run` returns the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::automorphism::{periodic_class_scan, AutError, Automorphism, MappingTorus, MappingTorusElement};
use crate::config::AnalysisConfig;
use crate::ctfiber::{
    fiber_report, simple_point_check, singular_search, BoundsCheck, CandidatePool, FiberError, FiberReport,
    Languages, PointClass, SearchResult, SimplePointReport, Verdict,
};
use crate::lamination::{language_compare, FactorLanguage, LaminationError, LanguageOrder, Provenance, StageInfo};
use crate::parse::{parse_automorphism, parse_subgroup, parse_traintrack, AutomorphismFile};
use crate::subgroup::{CarriedVerdict, IndexKind, SubgroupGraph};
use crate::traintrack::{GraphMap, PfData, TrainTrackError, TrainTrackVerdict, TransitionMatrix};
use crate::word::{Basis, Ray, ReducedWord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lamina", version, about = "Laminations and Cannon-Thurston fibers for free-by-cyclic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Factor length for languages and leaf tests.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    iter_max: Option<usize>,
    #[arg(long, global = true)]
    stall: Option<usize>,
    /// Length bound on classes generating the laminations.
    #[arg(long, global = true)]
    ball: Option<usize>,
    /// Length bound on `w` in candidates `w,m`.
    #[arg(long, global = true)]
    word_radius: Option<usize>,
    /// Bound on `|m|` in candidates `w,m`.
    #[arg(long, global = true)]
    exp_max: Option<usize>,
    #[arg(long, global = true)]
    period_max: Option<usize>,
    #[arg(long, global = true)]
    probe: Option<usize>,
    #[arg(long, global = true)]
    slack: Option<usize>,
    /// Maximal word length produced by any iteration.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores). Does not affect results.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON report here; the text summary then goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train track check, transition matrix, growth and lamination summaries.
    Analyze {
        aut: PathBuf,
        /// Train-track representative; defaults to the map on the rose.
        #[arg(long)]
        traintrack: Option<PathBuf>,
    },
    /// Cannon-Thurston fiber of `g^∞` for `g = w,m`.
    Fiber {
        aut: PathBuf,
        /// Element `w,m`, e.g. `1,1` for `t` or `a,-1`.
        #[arg(allow_hyphen_values = true)]
        element: String,
    },
    /// Enumerate `w,m` within the bounds and report singular points.
    SingularSearch { aut: PathBuf },
    /// Whether a ray or leaf is carried by a finitely generated subgroup.
    Carried {
        subgroup: PathBuf,
        /// `head(period)^inf`, `(period)^inf`, or a word `w` for `w^inf`.
        ray: String,
        /// Second half-leaf; tests the leaf through both rays.
        #[arg(long)]
        with: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 12)]
        carry_depth: usize,
    },
    /// Check the index bounds on a search, plus any supplied candidates.
    VerifyBounds {
        aut: PathBuf,
        #[arg(long = "candidate", allow_hyphen_values = true)]
        candidates: Vec<String>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
    Undecided(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Budget(_) => EXIT_BUDGET,
            Failure::Undecided(_) => EXIT_UNDECIDED,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Budget(m) | Failure::Undecided(m) => m,
        }
    }
}

impl From<AutError> for Failure {
    fn from(e: AutError) -> Self {
        match e {
            AutError::Budget { .. } => Failure::Budget(e.to_string()),
            AutError::NoInverse | AutError::BadInverse(_) | AutError::ImageCount { .. } | AutError::Word(_) => {
                Failure::Usage(e.to_string())
            }
            AutError::NoConvergence { .. } => Failure::Undecided(e.to_string()),
        }
    }
}

impl From<FiberError> for Failure {
    fn from(e: FiberError) -> Self {
        match e {
            FiberError::Aut(a) | FiberError::Lamination(LaminationError::Aut(a)) => a.into(),
            FiberError::ZeroExponent(_) | FiberError::NoInverse => Failure::Usage(e.to_string()),
            FiberError::Lamination(_) => Failure::Undecided(e.to_string()),
        }
    }
}

impl From<TrainTrackError> for Failure {
    fn from(e: TrainTrackError) -> Self {
        match e {
            TrainTrackError::Budget { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

struct Output {
    json: String,
    summary: String,
    code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cfg = match config_from(&cli.opts) {
        Ok(cfg) => cfg,
        Err(m) => {
            let _ = writeln!(stderr, "error: {m}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.opts.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    let mut warnings = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &cfg, &mut warnings));
    for w in &warnings {
        log::warn!("{w}");
        let _ = writeln!(stderr, "warning: {w}");
    }
    match result {
        Ok(out) => {
            let written = match &cli.opts.out {
                Some(path) => fs::write(path, &out.json)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))
                    .and_then(|_| stdout.write_all(out.summary.as_bytes()).map_err(|e| e.to_string())),
                None => stdout
                    .write_all(out.json.as_bytes())
                    .and_then(|_| stderr.write_all(out.summary.as_bytes()))
                    .map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => out.code,
                Err(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                    EXIT_USAGE
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn config_from(o: &GlobalOpts) -> Result<AnalysisConfig, String> {
    let d = AnalysisConfig::default();
    let cfg = AnalysisConfig {
        depth: o.depth.unwrap_or(d.depth),
        iter_max: o.iter_max.unwrap_or(d.iter_max),
        stall: o.stall.unwrap_or(d.stall),
        ball: o.ball.unwrap_or(d.ball),
        word_radius: o.word_radius.unwrap_or(d.word_radius),
        exp_max: o.exp_max.unwrap_or(d.exp_max),
        period_max: o.period_max.unwrap_or(d.period_max),
        probe: o.probe.unwrap_or(d.probe),
        slack: o.slack.unwrap_or(d.slack),
        budget: o.budget.unwrap_or(d.budget),
        tol: o.tol.unwrap_or(d.tol),
    };
    if o.jobs == Some(0) {
        return Err("--jobs must be positive".into());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: &Command, cfg: &AnalysisConfig, warnings: &mut Vec<String>) -> Result<Output, Failure> {
    match cmd {
        Command::Analyze { aut, traintrack } => {
            let file = load_aut(aut, cfg, warnings)?;
            let tt = match traintrack {
                Some(p) => Some(parse_traintrack(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?),
                None => None,
            };
            analyze(&file, tt, cfg)
        }
        Command::Fiber { aut, element } => {
            let file = load_aut(aut, cfg, warnings)?;
            let g: MappingTorusElement = element.parse().map_err(|e: crate::automorphism::ElementParseError| Failure::Usage(e.to_string()))?;
            file.automorphism.basis().check(&g.w).map_err(|e| Failure::Usage(e.to_string()))?;
            fiber(file.automorphism, &g, cfg)
        }
        Command::SingularSearch { aut } => {
            let file = load_aut(aut, cfg, warnings)?;
            warnings.extend(hypothesis_warnings(&file.automorphism, cfg)?);
            search(file.automorphism, cfg)
        }
        Command::Carried { subgroup, ray, with, rank, carry_depth } => {
            carried(subgroup, ray, with.as_deref(), *rank, *carry_depth, cfg)
        }
        Command::VerifyBounds { aut, candidates } => {
            let file = load_aut(aut, cfg, warnings)?;
            warnings.extend(hypothesis_warnings(&file.automorphism, cfg)?);
            let mut extra = Vec::new();
            for c in candidates {
                let g: MappingTorusElement =
                    c.parse().map_err(|e: crate::automorphism::ElementParseError| Failure::Usage(e.to_string()))?;
                file.automorphism.basis().check(&g.w).map_err(|e| Failure::Usage(e.to_string()))?;
                if g.m == 0 {
                    return Err(Failure::Usage(format!("candidate {g} has exponent 0")));
                }
                extra.push(g);
            }
            verify_bounds(file.automorphism, &extra, cfg)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_aut(path: &Path, cfg: &AnalysisConfig, warnings: &mut Vec<String>) -> Result<AutomorphismFile, Failure> {
    let file = parse_automorphism(&read(path)?, cfg.budget).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    warnings.extend(rank_warning(file.automorphism.rank()));
    Ok(file)
}

fn rank_warning(n: usize) -> Option<String> {
    (n == 2).then(|| {
        "rank 2: every automorphism of F_2 is geometric, so no fully irreducible atoroidal example exists".to_string()
    })
}

/// A periodic conjugacy class means the map is not atoroidal, so the index
/// bounds need not hold and a violation is not a bug.
fn hypothesis_warnings(phi: &Automorphism, cfg: &AnalysisConfig) -> Result<Option<String>, Failure> {
    let periodic = periodic_class_scan(phi, 2 * cfg.ball, cfg.period_max as u32)?;
    Ok(periodic.first().map(|(c, n)| {
        format!("the class {c} is fixed by phi^{n}: the map is not atoroidal and the bounds do not apply")
    }))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Two-column text block with keys padded to a common width.
fn table(title: &str, rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = format!("{title}\n");
    for (k, v) in rows {
        let _ = writeln!(s, "  {k:<width$}  {v}");
    }
    s
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

#[derive(Debug, Serialize)]
struct LanguageSummary {
    depth: usize,
    size: usize,
    top_layer: usize,
    stabilized: bool,
    provenance: Provenance,
    stages: Option<StageInfo>,
}

impl LanguageSummary {
    fn of(lang: &FactorLanguage) -> Self {
        LanguageSummary {
            depth: lang.depth(),
            size: lang.len(),
            top_layer: lang.top_layer().count(),
            stabilized: lang.is_stabilized(),
            provenance: lang.provenance(),
            stages: lang.stages(),
        }
    }
}

#[derive(Debug, Serialize)]
struct TrainTrackSummary {
    source: &'static str,
    vertices: usize,
    edges: usize,
    images: Vec<String>,
    valid: bool,
    /// `turn`, `edge`, `iterate` of the first illegal turn found.
    illegal_turn: Option<(String, char, usize)>,
    transition_matrix: TransitionMatrix,
    irreducible: bool,
    pf: Option<PfData>,
    pf_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    rank: usize,
    warnings: Vec<String>,
    assertions: Vec<String>,
    images: Vec<String>,
    inverse_images: Option<Vec<String>>,
    train_track: TrainTrackSummary,
    periodic_classes: Vec<(String, u32)>,
    periodic_scan_bounds: (usize, u32),
    phi: LanguageSummary,
    phi_inverse: Option<LanguageSummary>,
    bfh: Option<LanguageSummary>,
    /// How the rose/train-track language compares with the orbit language.
    bfh_vs_phi: Option<LanguageOrder>,
    phi_vs_phi_inverse: Option<LanguageOrder>,
    config: AnalysisConfig,
}

fn words(ws: &[ReducedWord]) -> Vec<String> {
    ws.iter().map(|w| w.to_string()).collect()
}

fn analyze(file: &AutomorphismFile, tt: Option<GraphMap>, cfg: &AnalysisConfig) -> Result<Output, Failure> {
    let phi = &file.automorphism;
    let mut warnings: Vec<String> = rank_warning(phi.rank()).into_iter().collect();
    let source = if tt.is_some() { "file" } else { "rose" };
    let map = match tt {
        Some(m) => m,
        None => GraphMap::from_automorphism(phi)?,
    }
    .with_budget(cfg.budget);
    let verdict = map.validate_train_track(cfg.iter_max);
    let matrix = map.transition_matrix();
    let (pf, pf_error) = match matrix.pf_eigen(cfg.tol) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let illegal_turn = match verdict {
        TrainTrackVerdict::Pass => None,
        TrainTrackVerdict::Fail { turn, edge, iterate } => {
            warnings.push(format!("not a train track: turn {{{},{}}} is illegal", turn.0, turn.1));
            Some((format!("{{{},{}}}", turn.0, turn.1), edge.to_char(), iterate))
        }
    };
    let valid = illegal_turn.is_none();
    let scan_len = 2 * cfg.ball;
    let scan_power = cfg.period_max as u32;
    let periodic: Vec<(String, u32)> =
        periodic_class_scan(phi, scan_len, scan_power)?.into_iter().map(|(c, n)| (c.to_string(), n)).collect();
    if !periodic.is_empty() {
        warnings.push(format!("{} periodic conjugacy classes found: the map is not atoroidal", periodic.len()));
    }
    let forward = crate::lamination::mitra_language(phi, cfg.ball, cfg.depth, cfg.iter_max, cfg.stall, Default::default());
    let backward = match phi.inverse() {
        Ok(inv) => Some(crate::lamination::mitra_language(&inv, cfg.ball, cfg.depth, cfg.iter_max, cfg.stall, Default::default())),
        Err(_) => {
            warnings.push("no inverse images supplied: the repelling lamination is skipped".into());
            None
        }
    };
    let bfh = valid.then(|| map.bfh_language(cfg.depth, cfg.stall, cfg.iter_max));
    let report = AnalyzeReport {
        rank: phi.rank(),
        assertions: file.assertions.clone(),
        images: words(phi.images()),
        inverse_images: phi.inverse_images().map(words),
        train_track: TrainTrackSummary {
            source,
            vertices: map.graph().vertex_count(),
            edges: map.graph().edge_count(),
            images: words(map.images()),
            valid,
            illegal_turn,
            irreducible: matrix.is_irreducible(),
            transition_matrix: matrix,
            pf,
            pf_error,
        },
        periodic_classes: periodic,
        periodic_scan_bounds: (scan_len, scan_power),
        phi: LanguageSummary::of(&forward.language),
        phi_inverse: backward.as_ref().map(|b| LanguageSummary::of(&b.language)),
        bfh_vs_phi: bfh.as_ref().map(|b| language_compare(b, &forward.language)),
        phi_vs_phi_inverse: backward.as_ref().map(|b| language_compare(&forward.language, &b.language)),
        bfh: bfh.as_ref().map(LanguageSummary::of),
        warnings,
        config: cfg.clone(),
    };
    let tt = &report.train_track;
    let lang_row = |l: &LanguageSummary| format!("{} words at depth {}, stabilized={}", l.size, l.depth, l.stabilized);
    let mut rows = vec![
        row("rank", report.rank),
        row("graph", format!("{} ({} vertices, {} edges)", tt.source, tt.vertices, tt.edges)),
        row("train track", if tt.valid { "yes".to_string() } else { format!("no, illegal turn {}", tt.illegal_turn.as_ref().unwrap().0) }),
        row("irreducible", tt.irreducible),
        row("PF eigenvalue", tt.pf.as_ref().map_or_else(|| tt.pf_error.clone().unwrap_or_default(), |p| format!("{:.9}", p.eigenvalue))),
        row("periodic classes", format!("{} (|w| <= {}, n <= {})", report.periodic_classes.len(), scan_len, scan_power)),
        row("L(phi)", lang_row(&report.phi)),
    ];
    if let Some(l) = &report.phi_inverse {
        rows.push(row("L(phi^-1)", lang_row(l)));
    }
    if let Some(l) = &report.bfh {
        rows.push(row("L(train track)", lang_row(l)));
    }
    if let Some(o) = report.bfh_vs_phi {
        rows.push(row("train track vs phi", format!("{o:?}").to_lowercase()));
    }
    for w in &report.warnings {
        rows.push(row("warning", w));
    }
    Ok(Output { json: to_json(&report), summary: table("analyze", &rows), code: EXIT_OK })
}

fn class_name(c: PointClass) -> &'static str {
    match c {
        PointClass::Simple => "simple",
        PointClass::Regular => "regular",
        PointClass::Singular => "singular",
        PointClass::Undetermined => "undetermined",
    }
}

fn fiber_summary(r: &FiberReport) -> Vec<(String, String)> {
    let mut rows = vec![
        row("element", &r.element),
        row("rays", r.ray_tags.len()),
        row("degree (lower bound)", r.degree_lower_bound),
        row("class", class_name(r.class)),
        row("type", format!("{:?}", r.point_type)),
        row("stabilized", r.stabilized),
        row("undecided pairs", r.undecided_pairs.len()),
    ];
    for (i, comp) in r.partition.iter().enumerate().filter(|(_, c)| c.len() > 1) {
        let tags: Vec<&str> = comp.iter().map(|&j| r.ray_tags[j].as_str()).collect();
        rows.push(row(&format!("component {i}"), tags.join("  ")));
    }
    for v in r.violations() {
        rows.push(row("VIOLATION", v));
    }
    rows
}

fn fiber(phi: Automorphism, g: &MappingTorusElement, cfg: &AnalysisConfig) -> Result<Output, Failure> {
    let mt = MappingTorus::new(phi);
    let langs = Languages::build(mt.phi(), cfg)?;
    if g.m == 0 {
        if g.w.is_identity() {
            return Err(Failure::Usage("the identity has no limit point".into()));
        }
        let pool = CandidatePool::build(&mt, cfg)?;
        let report: SimplePointReport = simple_point_check(&g.w, &langs, &pool, cfg)?;
        let code = match report.verdict {
            Verdict::Pass => EXIT_OK,
            Verdict::Fail => EXIT_VIOLATION,
            Verdict::Undecided => EXIT_UNDECIDED,
        };
        let mut rows = vec![
            row("element", g),
            row("verdict", format!("{:?}", report.verdict).to_uppercase()),
            row("candidates tested", report.candidates_tested),
            row("excluded (equal/undecided)", report.excluded_equal_or_undecided),
        ];
        for t in &report.identified_with {
            rows.push(row("identified with", t));
        }
        for w in &report.warnings {
            rows.push(row("warning", w));
        }
        return Ok(Output { json: to_json(&report), summary: table("simple point check", &rows), code });
    }
    let report = fiber_report(&mt, g, &langs, cfg)?;
    let code = if !report.violations().is_empty() {
        EXIT_VIOLATION
    } else if report.class == PointClass::Undetermined {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    Ok(Output { json: to_json(&report), summary: table("fiber", &fiber_summary(&report)), code })
}

fn bounds_rows(b: &BoundsCheck) -> Vec<(String, String)> {
    let t = &b.thresholds;
    vec![
        row("thresholds", format!("2N={} 2N-2={} 4N-5={} 4N-1={}", t.two_n, t.two_n_minus_2, t.four_n_minus_5, t.four_n_minus_1)),
        row("orbits of singular points", format!("{} (<= {}: {})", b.sigma_found, t.four_n_minus_5, b.sigma_within_bound)),
        row("max degree", format!("{} (<= {}: {})", b.max_degree, t.two_n, b.degree_within_bound)),
        row("phi-type sum", format!("{} (<= {})", b.phi_type_sum, t.two_n_minus_2)),
        row("phi^-1-type sum", format!("{} (<= {})", b.phi_inverse_type_sum, t.two_n_minus_2)),
        row("type sums hold", b.type_sums_within_bound),
        row("orbit counts hold", b.orbit_counts_within_bound),
        row("pair sums hold", b.pair_sums_within_bound),
        row("pair types differ", b.pair_types_differ),
        row("cross-check violations", b.cross_check_violations),
        row("all bounds hold", b.all_hold()),
    ]
}

fn search_rows(s: &SearchResult) -> Vec<(String, String)> {
    let mut rows = vec![
        row("candidates", s.candidates.len()),
        row("proper powers skipped", s.skipped_proper_powers.len()),
        row("undetermined", s.undetermined.len()),
    ];
    if s.families.is_empty() {
        rows.push(row("singular points", "no witnesses at bounds"));
    }
    for f in &s.families {
        let members: Vec<String> = f.members.iter().map(|m| m.to_string()).collect();
        rows.push(row(
            &format!("{} ({:?}, degree {})", f.representative.element, f.point_type, f.degree),
            members.join(" "),
        ));
    }
    rows.extend(bounds_rows(&s.bounds));
    for n in &s.notes {
        rows.push(row("note", n));
    }
    rows
}

fn search(phi: Automorphism, cfg: &AnalysisConfig) -> Result<Output, Failure> {
    let mt = MappingTorus::new(phi);
    let langs = Languages::build(mt.phi(), cfg)?;
    let result = singular_search(&mt, &langs, cfg)?;
    let code = if !result.bounds.all_hold() {
        EXIT_VIOLATION
    } else if !result.undetermined.is_empty() {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    Ok(Output { json: to_json(&result), summary: table("singular search", &search_rows(&result)), code })
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    search: &'a SearchResult,
    extra: Vec<FiberReport>,
    bounds: BoundsCheck,
    config: AnalysisConfig,
}

fn verify_bounds(phi: Automorphism, extra: &[MappingTorusElement], cfg: &AnalysisConfig) -> Result<Output, Failure> {
    let mt = MappingTorus::new(phi);
    let langs = Languages::build(mt.phi(), cfg)?;
    let result = singular_search(&mt, &langs, cfg)?;
    let extra: Vec<FiberReport> = extra.iter().map(|g| fiber_report(&mt, g, &langs, cfg)).collect::<Result<_, _>>()?;
    let all: Vec<FiberReport> = result.reports.iter().chain(&extra).cloned().collect();
    let bounds = BoundsCheck::from_reports(mt.rank(), &all, &result.families);
    let code = if bounds.all_hold() { EXIT_OK } else { EXIT_VIOLATION };
    let mut rows = search_rows(&result);
    for r in &extra {
        rows.push(row(&format!("candidate {}", r.element), format!("degree {} ({})", r.degree_lower_bound, class_name(r.class))));
    }
    rows.push(row("all bounds hold (with candidates)", bounds.all_hold()));
    let report = VerifyReport { search: &result, extra, bounds, config: cfg.clone() };
    Ok(Output { json: to_json(&report), summary: table("verify bounds", &rows), code })
}

/// `head(period)^inf`, `(period)^inf`, or a bare word `w` meaning `w^inf`.
fn parse_ray(spec: &str) -> Result<Ray, Failure> {
    let bad = |m: String| Failure::Usage(format!("bad ray {spec:?}: {m}"));
    let s = spec.trim();
    let (head, period) = match s.strip_suffix(")^inf") {
        Some(rest) => {
            let (head, period) = rest.split_once('(').ok_or_else(|| bad("missing `(`".into()))?;
            (head, period)
        }
        None => ("", s),
    };
    let head: ReducedWord = if head.is_empty() { ReducedWord::identity() } else { head.parse().map_err(|e: crate::word::WordError| bad(e.to_string()))? };
    let period: ReducedWord = period.parse().map_err(|e: crate::word::WordError| bad(e.to_string()))?;
    Ray::periodic(&head, &period).map_err(|e| bad(e.to_string()))
}

#[derive(Debug, Serialize)]
struct CarriedReport {
    generators: Vec<String>,
    rank: usize,
    vertices: usize,
    edges: usize,
    index: IndexKind,
    ray: String,
    with: Option<String>,
    depth: usize,
    result: CarriedVerdict,
}

fn max_generator(words: &[&ReducedWord]) -> usize {
    words.iter().flat_map(|w| w.letters().iter()).map(|l| l.generator() + 1).max().unwrap_or(1)
}

fn carried(
    subgroup: &Path,
    ray: &str,
    with: Option<&str>,
    rank: Option<usize>,
    depth: usize,
    cfg: &AnalysisConfig,
) -> Result<Output, Failure> {
    let text = read(subgroup)?;
    let wide = Basis::new(26).expect("26 letters");
    let gens = parse_subgroup(&text, &wide).map_err(|e| Failure::Usage(format!("{}: {e}", subgroup.display())))?;
    let x = parse_ray(ray)?;
    let y = with.map(parse_ray).transpose()?;
    let mut used: Vec<&ReducedWord> = gens.iter().collect();
    let parts: Vec<ReducedWord> = [Some(&x), y.as_ref()]
        .into_iter()
        .flatten()
        .filter_map(|r| match r {
            Ray::Periodic { head, period } => Some(head.multiply(period)),
            _ => None,
        })
        .collect();
    used.extend(parts.iter());
    let n = rank.unwrap_or_else(|| max_generator(&used));
    let basis = Basis::new(n).map_err(|e| Failure::Usage(e.to_string()))?;
    for w in &used {
        basis.check(w).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let graph = SubgroupGraph::build(&basis, &gens).map_err(|e| Failure::Usage(e.to_string()))?;
    let result = match &y {
        Some(y) => graph.carries_leaf(&x, y, depth, &cfg.window_params()),
        None => graph.carries_ray(&x, depth),
    };
    let code = if matches!(result, CarriedVerdict::Undecided { .. }) { EXIT_UNDECIDED } else { EXIT_OK };
    let report = CarriedReport {
        generators: words(&gens),
        rank: n,
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        index: graph.index_kind(),
        ray: x.tag(),
        with: y.as_ref().map(|y| y.tag()),
        depth,
        result,
    };
    let verdict = match &report.result {
        CarriedVerdict::CarriedAtDepth { depth } => format!("carried (checked to depth {depth})"),
        CarriedVerdict::NotCarried { witness_depth } => format!("not carried (witness at depth {witness_depth})"),
        CarriedVerdict::Undecided { reason } => format!("undecided: {reason}"),
    };
    let index = match report.index {
        IndexKind::Finite(k) => format!("finite ({k})"),
        IndexKind::Infinite => "infinite".to_string(),
    };
    let mut rows = vec![
        row("subgroup", format!("<{}>", report.generators.join(", "))),
        row("core graph", format!("{} vertices, {} edges", report.vertices, report.edges)),
        row("index", index),
        row("ray", &report.ray),
    ];
    if let Some(w) = &report.with {
        rows.push(row("with", w));
    }
    rows.push(row("verdict", verdict));
    Ok(Output { json: to_json(&report), summary: table("carried", &rows), code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_search_says_no_witnesses() {
        let result = SearchResult {
            candidates: Vec::new(),
            skipped_proper_powers: Vec::new(),
            undetermined: Vec::new(),
            families: Vec::new(),
            bounds: BoundsCheck::from_reports(3, &[], &[]),
            notes: Vec::new(),
            config: AnalysisConfig::default(),
            reports: Vec::new(),
        };
        let text = table("singular search", &search_rows(&result));
        assert!(text.contains("no witnesses at bounds"));
        assert!(text.contains("2N=6 2N-2=4 4N-5=7 4N-1=11"));
    }

    #[test]
    fn ray_specs() {
        assert_eq!(parse_ray("a").unwrap().tag(), "(a)^inf");
        assert_eq!(parse_ray("(ab)^inf").unwrap().tag(), "(ab)^inf");
        assert_eq!(parse_ray("c(ab)^inf").unwrap().tag(), "c(ab)^inf");
        assert!(parse_ray("1").is_err());
        assert!(parse_ray("ab)^inf").is_err());
    }

    #[test]
    fn rank_two_warns() {
        assert!(rank_warning(2).is_some());
        assert!(rank_warning(3).is_none());
    }

    #[test]
    fn table_aligns_values() {
        let t = table("t", &[row("a", 1), row("long key", 2)]);
        assert_eq!(t, "t\n  a         1\n  long key  2\n");
    }
}
