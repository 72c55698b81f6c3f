//! Command-line front end.
//!
//! ```text
//! invar arrangement lattice|cdr|betti|lyubeznik|oracle --input FILE
//! invar fan validate|picard|projective|lyubeznik --input FILE
//! invar table check|deduce --input FILE [--bound B]
//! invar tables small --dim D --a A
//! ```
//!
//! Exit codes: 0 success, 2 bad input or usage, 3 infeasible table.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arrangement::{self, IntersectionLattice};
use crate::io::{table_to_json, ArrangementFile, FanFile, TableFile};
use crate::qlinalg::format_rational;
use crate::sstables::{self, DeduceConfig, DifferentialRank, SpectralError};
use crate::table::{self, InvariantTable, TableKind};
use crate::toric::{self, Fan3, ToricError};

pub const SEARCH_LIMIT_VAR: &str = "INVAR_SEARCH_LIMIT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "invar", version, about = "Local cohomology invariant tables")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Treat warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Subspace arrangements.
    #[command(subcommand)]
    Arrangement(ArrangementCmd),
    /// Complete fans in Z^3.
    #[command(subcommand)]
    Fan(FanCmd),
    /// Check or complete a table file.
    #[command(subcommand)]
    Table(TableCmd),
    /// Closed-form tables.
    #[command(subcommand)]
    Tables(TablesCmd),
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand, Debug)]
enum ArrangementCmd {
    /// Intersection lattice.
    Lattice(InputArgs),
    /// Čech–de Rham table.
    Cdr(InputArgs),
    /// Reduced Betti numbers of the complement.
    Betti(InputArgs),
    /// Lyubeznik table (variety of dimension at most 2).
    Lyubeznik(InputArgs),
    /// Betti numbers of the complement from the Möbius function.
    Oracle(InputArgs),
}

#[derive(Subcommand, Debug)]
enum FanCmd {
    /// Check that the fan is complete and well formed.
    Validate(InputArgs),
    /// Picard and class group ranks.
    Picard(InputArgs),
    /// Search for a strictly convex support function.
    Projective(InputArgs),
    /// Lyubeznik table of the cone over the toric 3-fold.
    Lyubeznik(InputArgs),
}

#[derive(Subcommand, Debug)]
enum TableCmd {
    /// Structural checks and convergence.
    Check(InputArgs),
    /// Enumerate completions of the unknown cells.
    Deduce {
        #[command(flatten)]
        input: InputArgs,
        /// Upper bound for unknown entries.
        #[arg(long)]
        bound: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum TablesCmd {
    /// λ-table of an ideal of dimension 0, 1 or 2.
    Small {
        #[arg(long)]
        dim: usize,
        /// Connected components of the punctured spectrum.
        #[arg(long = "a", default_value_t = 1)]
        a: u64,
    },
}

/// A failed command: exit code plus the message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Report written to standard output before failing.
    report: Option<Report>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
            report: None,
        }
    }
}

#[derive(Debug)]
struct Report {
    json: String,
    pretty: String,
}

impl Report {
    fn new<T: Serialize>(value: &T, pretty: String) -> Self {
        let mut json = serde_json::to_string_pretty(value).expect("report serializes");
        json.push('\n');
        Report { json, pretty }
    }

    fn table(table: &InvariantTable, notes: Vec<String>) -> Self {
        let title = match table.kind() {
            TableKind::Lyubeznik => "Lyubeznik numbers λ_{p,q}",
            TableKind::CechDeRham => "Čech–de Rham numbers ρ_{p,q}",
        };
        let mut pretty = format!("{title}, d = {}\n{table}", table.dim());
        for n in &notes {
            pretty.push_str(&format!("note: {n}\n"));
        }
        Report {
            json: table_to_json(table, &notes),
            pretty,
        }
    }
}

struct Ctx {
    format: Format,
    strict: bool,
    warnings: Vec<String>,
}

impl Ctx {
    fn warn(&mut self, w: impl Into<String>) -> Result<(), Failure> {
        let w = w.into();
        if self.strict {
            return Err(Failure::input(format!("warning treated as error: {w}")));
        }
        self.warnings.push(w);
        Ok(())
    }
}

/// Runs the tool on `argv` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    if !rendered.contains("Usage:") {
                        let _ = writeln!(stderr, "\n{}", Cli::command().render_usage());
                    }
                    EXIT_INPUT
                }
            };
        }
    };
    let mut ctx = Ctx {
        format: cli.format,
        strict: cli.strict,
        warnings: Vec::new(),
    };
    let result = dispatch(&cli.command, &mut ctx);
    for w in &ctx.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let emit = |out: &mut dyn Write, r: &Report| {
        let text = match ctx.format {
            Format::Json => &r.json,
            Format::Pretty => &r.pretty,
        };
        let _ = write!(out, "{text}");
    };
    match result {
        Ok(r) => {
            emit(stdout, &r);
            EXIT_OK
        }
        Err(f) => {
            if let Some(r) = &f.report {
                emit(stdout, r);
            }
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<Report, Failure> {
    match cmd {
        Command::Arrangement(a) => arrangement_cmd(a, ctx),
        Command::Fan(f) => fan_cmd(f, ctx),
        Command::Table(TableCmd::Check(i)) => table_check(&i.input),
        Command::Table(TableCmd::Deduce { input, bound }) => table_deduce(&input.input, *bound),
        Command::Tables(TablesCmd::Small { dim, a }) => {
            let t = table::canonical_small_tables(*dim, *a).map_err(|e| Failure::input(e.to_string()))?;
            Ok(Report::table(&t, Vec::new()))
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_lattice(path: &Path, ctx: &mut Ctx) -> Result<(ArrangementFile, IntersectionLattice), Failure> {
    let file = ArrangementFile::parse(&read(path)?).map_err(|e| Failure::input(e.to_string()))?;
    let components = file.components().map_err(|e| Failure::input(e.to_string()))?;
    let lattice = arrangement::build_lattice(&components).map_err(|e| Failure::input(e.to_string()))?;
    for w in lattice.warnings() {
        ctx.warn(w.to_string())?;
    }
    Ok((file, lattice))
}

#[derive(Serialize)]
struct FlatOut {
    id: usize,
    dim: usize,
    equations: Vec<Vec<String>>,
    covers: Vec<usize>,
}

#[derive(Serialize)]
struct LatticeOut {
    kind: &'static str,
    ambient_dim: usize,
    central: bool,
    components: Vec<usize>,
    flats: Vec<FlatOut>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct BettiOut {
    kind: &'static str,
    ambient_dim: usize,
    /// First entry is degree 0.
    betti: Vec<u64>,
    notes: Vec<String>,
}

fn betti_pretty(title: &str, betti: &[u64]) -> String {
    let mut s = format!("{title}\n");
    for (k, b) in betti.iter().enumerate() {
        s.push_str(&format!("  degree {k}: {b}\n"));
    }
    s
}

fn arrangement_cmd(cmd: &ArrangementCmd, ctx: &mut Ctx) -> Result<Report, Failure> {
    match cmd {
        ArrangementCmd::Lattice(i) => {
            let (_, lat) = load_lattice(&i.input, ctx)?;
            let flats: Vec<FlatOut> = lat
                .flats()
                .iter()
                .map(|f| {
                    let eq = f.subspace.equations();
                    FlatOut {
                        id: f.id,
                        dim: f.dim,
                        equations: eq.row_vecs().iter().map(|r| r.iter().map(format_rational).collect()).collect(),
                        covers: lat.covers(f.id),
                    }
                })
                .collect();
            let mut pretty = format!(
                "{} flats in C^{} ({})\n",
                flats.len(),
                lat.ambient_dim(),
                if lat.is_central() { "central" } else { "affine" }
            );
            for f in &flats {
                let tag = if f.id == lat.top() {
                    " ambient"
                } else if lat.components().contains(&f.id) {
                    " component"
                } else {
                    ""
                };
                let eqs: Vec<String> = f.equations.iter().map(|r| format!("[{}]", r.join(" "))).collect();
                pretty.push_str(&format!(
                    "  F{:<3} dim {}{tag}  eqs {}  covers {:?}\n",
                    f.id,
                    f.dim,
                    if eqs.is_empty() { "-".to_string() } else { eqs.join(" ") },
                    f.covers
                ));
            }
            let out = LatticeOut {
                kind: "lattice",
                ambient_dim: lat.ambient_dim(),
                central: lat.is_central(),
                components: lat.components().to_vec(),
                flats,
                notes: ctx.warnings.clone(),
            };
            Ok(Report::new(&out, pretty))
        }
        ArrangementCmd::Cdr(i) => {
            let (_, lat) = load_lattice(&i.input, ctx)?;
            let t = arrangement::cdr_table(&lat);
            let mut notes = vec!["the sequence collapses at E_2; this is every page r >= 2".to_string()];
            notes.extend(ctx.warnings.iter().cloned());
            Ok(Report::table(&t, notes))
        }
        ArrangementCmd::Betti(i) => {
            let (_, lat) = load_lattice(&i.input, ctx)?;
            let n = lat.ambient_dim();
            let betti = arrangement::complement_betti(&arrangement::cdr_table(&lat), n);
            let pretty = betti_pretty("reduced Betti numbers of the complement", &betti);
            let out = BettiOut {
                kind: "complement_betti",
                ambient_dim: n,
                betti,
                notes: ctx.warnings.clone(),
            };
            Ok(Report::new(&out, pretty))
        }
        ArrangementCmd::Oracle(i) => {
            let (_, lat) = load_lattice(&i.input, ctx)?;
            let betti = arrangement::moebius_betti_oracle(&lat).map_err(|e| Failure::input(e.to_string()))?;
            let pretty = betti_pretty("Betti numbers of the complement (Möbius)", &betti);
            let out = BettiOut {
                kind: "moebius_betti",
                ambient_dim: lat.ambient_dim(),
                betti,
                notes: ctx.warnings.clone(),
            };
            Ok(Report::new(&out, pretty))
        }
        ArrangementCmd::Lyubeznik(i) => {
            let file = ArrangementFile::parse(&read(&i.input)?).map_err(|e| Failure::input(e.to_string()))?;
            let components = file.components().map_err(|e| Failure::input(e.to_string()))?;
            let t = arrangement::lyubeznik_dim2(&components).map_err(|e| Failure::input(e.to_string()))?;
            Ok(Report::table(&t, Vec::new()))
        }
    }
}

fn load_fan(path: &Path, ctx: &mut Ctx) -> Result<Fan3, Failure> {
    let file = FanFile::parse(&read(path)?).map_err(|e| Failure::input(e.to_string()))?;
    let (fan, warnings) = file.to_fan().map_err(|e| Failure::input(e.to_string()))?;
    for w in warnings {
        ctx.warn(w)?;
    }
    Ok(fan)
}

fn toric_failure(e: ToricError) -> Failure {
    match e {
        ToricError::InvalidFan(v) => Failure::input(
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
        ),
        other => Failure::input(other.to_string()),
    }
}

#[derive(Serialize)]
struct ValidateOut {
    kind: &'static str,
    valid: bool,
    simplicial: bool,
    walls: usize,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct PicardOut {
    kind: &'static str,
    picard_rank: usize,
    class_rank: usize,
    projective: bool,
}

#[derive(Serialize)]
struct ProjectiveOut {
    kind: &'static str,
    projective: bool,
    /// One linear form per maximal cone.
    support_function: Option<Vec<Vec<String>>>,
}

fn fan_cmd(cmd: &FanCmd, ctx: &mut Ctx) -> Result<Report, Failure> {
    match cmd {
        FanCmd::Validate(i) => {
            let fan = load_fan(&i.input, ctx)?;
            let report = toric::validate_fan(&fan);
            let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            if !report.is_valid() {
                return Err(Failure::input(format!("invalid fan: {}", violations.join("; "))));
            }
            let pretty = format!(
                "valid complete fan: {} rays, {} maximal cones, {} walls{}\n",
                fan.rays.len(),
                fan.max_cones.len(),
                report.walls.len(),
                if report.simplicial { ", simplicial" } else { "" }
            );
            let out = ValidateOut {
                kind: "fan_validation",
                valid: true,
                simplicial: report.simplicial,
                walls: report.walls.len(),
                violations,
            };
            Ok(Report::new(&out, pretty))
        }
        FanCmd::Picard(i) => {
            let fan = load_fan(&i.input, ctx)?;
            let picard_rank = toric::picard_rank(&fan).map_err(toric_failure)?;
            let class_rank = toric::class_rank(&fan).map_err(toric_failure)?;
            let projective = toric::is_projective(&fan).map_err(toric_failure)?.projective;
            let pretty = format!(
                "Picard rank {picard_rank}\nclass group rank {class_rank}\nprojective: {}\n",
                if projective { "yes" } else { "no" }
            );
            let out = PicardOut {
                kind: "picard",
                picard_rank,
                class_rank,
                projective,
            };
            Ok(Report::new(&out, pretty))
        }
        FanCmd::Projective(i) => {
            let fan = load_fan(&i.input, ctx)?;
            let p = toric::is_projective(&fan).map_err(toric_failure)?;
            let support_function: Option<Vec<Vec<String>>> = p
                .support_function
                .as_ref()
                .map(|m| m.iter().map(|f| f.iter().map(format_rational).collect()).collect());
            let mut pretty = format!("projective: {}\n", if p.projective { "yes" } else { "no" });
            if let Some(sf) = &support_function {
                for (c, f) in sf.iter().enumerate() {
                    pretty.push_str(&format!("  m_{c} = ({})\n", f.join(", ")));
                }
            }
            let out = ProjectiveOut {
                kind: "projectivity",
                projective: p.projective,
                support_function,
            };
            Ok(Report::new(&out, pretty))
        }
        FanCmd::Lyubeznik(i) => {
            let fan = load_fan(&i.input, ctx)?;
            let t = toric::toric_lyubeznik(&fan).map_err(toric_failure)?;
            Ok(Report::table(&t, ctx.warnings.clone()))
        }
    }
}

fn load_table(path: &Path) -> Result<(TableFile, InvariantTable), Failure> {
    let file = TableFile::parse(&read(path)?).map_err(|e| Failure::input(e.to_string()))?;
    let t = file.to_table().map_err(|e| Failure::input(e.to_string()))?;
    Ok((file, t))
}

fn node_limit() -> Result<u64, Failure> {
    match std::env::var(SEARCH_LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("{SEARCH_LIMIT_VAR}={v:?} is not a node count"))),
        Err(_) => Ok(sstables::DEFAULT_NODE_LIMIT),
    }
}

fn spectral_failure(e: SpectralError) -> Failure {
    Failure::input(e.to_string())
}

#[derive(Serialize)]
struct CheckOut {
    kind: &'static str,
    table: &'static str,
    dim: usize,
    valid: bool,
    diagnostics: Vec<String>,
    euler_sum: Option<i64>,
    /// Convergence (λ) or Betti abutment (ρ); absent when not checked.
    feasible: Option<bool>,
    degenerate: Option<bool>,
    witness: Vec<String>,
}

impl CheckOut {
    fn pretty(&self) -> String {
        let mut s = format!("{} table, d = {}\n", self.table, self.dim);
        if self.diagnostics.is_empty() {
            s.push_str("structure: ok\n");
        }
        for d in &self.diagnostics {
            s.push_str(&format!("violation: {d}\n"));
        }
        if let Some(e) = self.euler_sum {
            s.push_str(&format!("Euler sum: {e}\n"));
        }
        if let Some(f) = self.feasible {
            s.push_str(&format!("abutment: {}\n", if f { "feasible" } else { "infeasible" }));
        }
        if let Some(d) = self.degenerate {
            s.push_str(&format!("degenerate at E_2: {}\n", if d { "yes" } else { "no" }));
        }
        for w in &self.witness {
            s.push_str(&format!("  {w}\n"));
        }
        s
    }
}

fn witness_strings(w: &[DifferentialRank]) -> Vec<String> {
    w.iter().map(|d| d.to_string()).collect()
}

fn table_check(path: &Path) -> Result<Report, Failure> {
    let (file, t) = load_table(path)?;
    if !t.is_complete() {
        return Err(Failure::input(format!(
            "table has unknown entries at {:?}; use `table deduce`",
            t.unknown_cells()
        )));
    }
    let euler = table::euler_sum(&t).ok();
    let mut out = CheckOut {
        kind: "check",
        table: t.kind().as_str(),
        dim: t.dim(),
        valid: true,
        diagnostics: Vec::new(),
        euler_sum: euler,
        feasible: None,
        degenerate: None,
        witness: Vec::new(),
    };
    let fail = |out: CheckOut, msg: &str| -> Failure {
        let pretty = out.pretty();
        Failure {
            code: EXIT_INFEASIBLE,
            message: msg.to_string(),
            report: Some(Report::new(&out, pretty)),
        }
    };
    match t.kind() {
        TableKind::Lyubeznik => {
            let ogus = file.ogus_bounds();
            if file.ogus.is_some() && ogus.is_none() {
                return Err(Failure::input("ogus bounds need ambient_dim"));
            }
            let diags = table::validate_lambda(&t, ogus.as_ref()).map_err(|e| Failure::input(e.to_string()))?;
            out.diagnostics = diags.iter().map(|d| d.to_string()).collect();
            if !diags.is_empty() {
                out.valid = false;
                return Err(fail(out, "structural violations"));
            }
            let conv = sstables::check_convergence_lambda_limited(&t, node_limit()?).map_err(spectral_failure)?;
            out.feasible = Some(conv.feasible);
            out.witness = witness_strings(&conv.witness);
            if !conv.feasible {
                out.valid = false;
                return Err(fail(out, "no choice of differentials converges"));
            }
        }
        TableKind::CechDeRham => {
            let diags = table::validate_rho(&t).map_err(|e| Failure::input(e.to_string()))?;
            out.diagnostics = diags.iter().map(|d| d.to_string()).collect();
            if !diags.is_empty() {
                out.valid = false;
                return Err(fail(out, "structural violations"));
            }
            match (&file.betti, file.ambient_dim) {
                (Some(betti), Some(n)) => {
                    let equi = file.homogeneous_equidimensional.unwrap_or(false);
                    let c = sstables::check_cdr(&t, betti, n, equi).map_err(spectral_failure)?;
                    out.feasible = Some(c.feasible);
                    out.degenerate = Some(c.degenerate);
                    out.witness = witness_strings(&c.witness);
                    if !c.accepted {
                        out.valid = false;
                        let msg = if c.feasible {
                            "only a non-degenerate solution reproduces the Betti numbers"
                        } else {
                            "no choice of differentials reproduces the Betti numbers"
                        };
                        return Err(fail(out, msg));
                    }
                }
                (Some(_), None) => return Err(Failure::input("betti check needs ambient_dim")),
                _ => {}
            }
        }
    }
    let pretty = out.pretty();
    Ok(Report::new(&out, pretty))
}

#[derive(Serialize)]
struct ForcedOut {
    cell: [usize; 2],
    value: u64,
}

#[derive(Serialize)]
struct DeduceOut {
    kind: &'static str,
    dim: usize,
    bound: u64,
    unknowns: Vec<[usize; 2]>,
    structural_zeros: Vec<[usize; 2]>,
    feasible_count: usize,
    forced: Vec<ForcedOut>,
    identities: Vec<String>,
    nodes: u64,
}

fn table_deduce(path: &Path, bound: Option<u64>) -> Result<Report, Failure> {
    let (file, t) = load_table(path)?;
    if t.kind() != TableKind::Lyubeznik {
        return Err(Failure::input("deduction is implemented for Lyubeznik tables only"));
    }
    let ogus = file.ogus_bounds();
    if file.ogus.is_some() && ogus.is_none() {
        return Err(Failure::input("ogus bounds need ambient_dim"));
    }
    let config = DeduceConfig {
        bound: bound.or(file.bound).unwrap_or(sstables::DEFAULT_BOUND),
        node_limit: node_limit()?,
        ogus,
    };
    let d = sstables::deduce_lambda(&t, &config).map_err(spectral_failure)?;
    let cell = |c: &(usize, usize)| [c.0, c.1];
    let out = DeduceOut {
        kind: "deduction",
        dim: d.dim,
        bound: config.bound,
        unknowns: d.unknowns.iter().map(cell).collect(),
        structural_zeros: d.structural_zeros.iter().map(cell).collect(),
        feasible_count: d.feasible.len(),
        forced: d
            .forced
            .iter()
            .map(|(c, v)| ForcedOut {
                cell: cell(c),
                value: *v,
            })
            .collect(),
        identities: d.identities.iter().map(|i| i.to_string()).collect(),
        nodes: d.nodes,
    };
    let mut pretty = format!(
        "d = {}, {} unknowns, bound {}: {} feasible completions\n",
        out.dim,
        out.unknowns.len(),
        out.bound,
        out.feasible_count
    );
    if !out.structural_zeros.is_empty() {
        pretty.push_str(&format!("structural zeros: {:?}\n", d.structural_zeros));
    }
    for f in &out.forced {
        pretty.push_str(&format!("forced: λ_{{{},{}}} = {}\n", f.cell[0], f.cell[1], f.value));
    }
    for i in &out.identities {
        pretty.push_str(&format!("identity: {i}\n"));
    }
    let report = Report::new(&out, pretty);
    if d.is_contradiction() {
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: "no completion within the bound is consistent".to_string(),
            report: Some(report),
        });
    }
    Ok(report)
}
