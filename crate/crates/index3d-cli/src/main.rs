//! `index3d`: exact 3D index computations on ideal triangulations.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 the lattice
//! sum did not close.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;

use index3d::anglestruct::{self, ChoiceStatus, EfficiencyOptions, EfficiencyReport};
use index3d::edgebasis::{self, BasisCheck, BasisSelection};
use index3d::indexengine::{self, IndexError, IndexJob, Parametrization};
use index3d::pachner::{self, InvarianceError, MoveKind, MoveSpec};
use index3d::qlaurent::TruncatedSeries;
use index3d::tetindex::{self, TetIndexCache};
use index3d::triangulation::{CombTriangulation, GluingData, PeripheralVector};

const FORMATS: &str = "tri v1 / nz v1 / peri v1";

#[derive(Parser, Debug)]
#[command(name = "index3d", version = FORMATS, about = "Exact 3D index of ideal triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index at a peripheral class, to a given order in q.
    Index {
        file: PathBuf,
        /// Order in q; a trailing `.5` asks for one more half-power.
        #[arg(long)]
        order: String,
        /// `peri v1` file with the turning-number vector.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Comma-separated excluded edges, e.g. `2,3`.
        #[arg(long, value_delimiter = ',')]
        excluded: Option<Vec<usize>>,
        #[arg(long)]
        threads: Option<usize>,
        /// Recompute with a second valid selection and compare.
        #[arg(long)]
        coset_check: bool,
        /// Print bare integer coefficients of q^0, q^1, ...
        #[arg(long)]
        emit_coeffs: bool,
        /// Guard radius for the lattice search.
        #[arg(long)]
        guard_radius: Option<i64>,
    },
    /// Checks the tetrahedron-index identities.
    Identities {
        #[arg(long, default_value_t = 3)]
        range: i64,
        /// Order in q.
        #[arg(long, default_value = "20")]
        order: String,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Decides whether the triangulation admits an index structure.
    Efficiency {
        file: PathBuf,
        #[arg(long, default_value_t = anglestruct::DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        all_certificates: bool,
        /// Decide one quad choice per orbit of identical tetrahedron columns.
        #[arg(long)]
        symmetry: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Prints the default basic-edge selection.
    Basis {
        file: PathBuf,
        /// Validate this excluded set instead.
        #[arg(long, value_delimiter = ',')]
        excluded: Option<Vec<usize>>,
    },
    /// Applies a local move and writes the new triangulation.
    Move {
        file: PathBuf,
        #[arg(long)]
        kind: MoveKind,
        #[arg(long)]
        at: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Compares the index before and after a local move.
    VerifyMove {
        file: PathBuf,
        #[arg(long)]
        kind: MoveKind,
        #[arg(long)]
        at: String,
        /// Order in q.
        #[arg(long)]
        order: String,
        #[arg(long)]
        assume_convergent: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parses a file and prints a summary.
    ParseCheck { file: PathBuf },
}

/// Errors mapped onto exit codes.
enum Failure {
    Input(String),
    Verification(String),
    Divergent(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Divergent(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Verification(m) | Failure::Divergent(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn from_index(e: IndexError) -> Failure {
    match e {
        IndexError::Divergent { .. } => Failure::Divergent(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

struct Loaded {
    tri: Option<CombTriangulation>,
    g: GluingData,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn first_content_line(text: &str) -> Option<&str> {
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty())
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read(path)?;
    let ctx = |e: index3d::triangulation::TriError| Failure::Input(format!("{}: {e}", path.display()));
    match first_content_line(&text) {
        Some("tri v1") => {
            let t = CombTriangulation::parse(&text).map_err(ctx)?;
            let g = GluingData::from_triangulation(&t).map_err(ctx)?;
            Ok(Loaded { tri: Some(t), g })
        }
        Some("nz v1") => Ok(Loaded { tri: None, g: GluingData::parse(&text).map_err(ctx)? }),
        _ => Err(Failure::Input(format!("{}: expected a `tri v1` or `nz v1` header", path.display()))),
    }
}

fn load_tri(path: &Path) -> Result<CombTriangulation, Failure> {
    load(path)?.tri.ok_or_else(|| Failure::Input(format!("{}: moves need a `tri v1` gluing table", path.display())))
}

/// Order in q (`K` or `K.5`) to half-units.
fn parse_order(s: &str) -> Result<i64, Failure> {
    let bad = || Failure::Input(format!("order `{s}` is not a nonnegative multiple of 1/2"));
    let (whole, half) = match s.split_once('.') {
        None => (s, false),
        Some((w, "5")) => (w, true),
        Some((w, f)) if f.chars().all(|c| c == '0') => (w, false),
        _ => return Err(bad()),
    };
    let k: i64 = whole.parse().map_err(|_| bad())?;
    if k < 0 {
        return Err(bad());
    }
    Ok(2 * k + i64::from(half))
}

fn set_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(input)?;
    }
    Ok(())
}

fn coefficient_line(s: &TruncatedSeries) -> String {
    match s.integer_q_coefficients() {
        Some(c) => c.iter().map(BigInt::to_string).collect::<Vec<_>>().join(" "),
        None => {
            // half-integral powers: list q^(j/2) coefficients from the lowest term
            let lo = s.min_exponent().unwrap_or(0).min(0);
            (lo..=s.trunc_order()).map(|e| s.coeff(e).to_string()).collect::<Vec<_>>().join(" ")
        }
    }
}

fn edges(list: &[usize]) -> String {
    list.iter().map(|e| format!("e{e}")).collect::<Vec<_>>().join(", ")
}

fn cmd_index(
    file: &Path,
    order: &str,
    curve: Option<&Path>,
    excluded: Option<&[usize]>,
    coset_check: bool,
    emit_coeffs: bool,
    guard_radius: Option<i64>,
) -> Result<String, Failure> {
    let order = parse_order(order)?;
    let Loaded { g, .. } = load(file)?;
    let peripheral = match curve {
        Some(p) => PeripheralVector::parse(&read(p)?, g.n()).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => PeripheralVector::zero(g.n()),
    };
    let basis = match excluded {
        Some(x) => BasisSelection::from_excluded(g.n(), x).map_err(input)?,
        None => edgebasis::select_basis(&g).map_err(input)?,
    };
    let cache = TetIndexCache::new();
    let run = |sel: &BasisSelection| -> Result<TruncatedSeries, Failure> {
        let mut job = IndexJob::new(&g, sel, &peripheral, order).map_err(from_index)?;
        if let Some(r) = guard_radius {
            job = job.with_guard_radius(r);
        }
        job.compute(&cache).map_err(from_index)
    };
    let series = run(&basis)?;
    let mut out = String::new();
    if emit_coeffs {
        writeln!(out, "{}", coefficient_line(&series)).unwrap();
    } else {
        writeln!(out, "excluded {{{}}}", edges(&basis.excluded)).unwrap();
        writeln!(out, "{series}").unwrap();
    }
    if coset_check {
        let other = alternative_selection(&g, &basis);
        let check = match &other {
            Some(sel) => run(sel)?,
            // no second selection: fall back to an offset coset parametrisation
            None => {
                let mut param = Parametrization::basic_edges(g.n(), &basis.basic);
                if let Some(row) = edgebasis::cusp_saturation(&g).first() {
                    param.offset = row.iter().map(|x| i64::try_from(x).expect("small cusp vector")).collect();
                }
                indexengine::compute_index_coset_sum(&g, &peripheral, &param, order, &cache).map_err(from_index)?
            }
        };
        let how = match &other {
            Some(sel) => format!("excluded {{{}}}", edges(&sel.excluded)),
            None => "shifted coset representatives".to_string(),
        };
        if check != series {
            return Err(Failure::Verification(format!("{out}coset check FAILED against {how}")));
        }
        writeln!(out, "coset check: equal with {how}").unwrap();
    }
    Ok(out)
}

/// First valid excluded set, in lexicographic order, other than `basis`.
fn alternative_selection(g: &GluingData, basis: &BasisSelection) -> Option<BasisSelection> {
    let n = g.n();
    let r = g.r();
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        if subset != basis.excluded {
            if let Ok(sel) = BasisSelection::from_excluded(n, &subset) {
                if edgebasis::validate_basis(g, &sel) == Ok(BasisCheck::Valid) {
                    return Some(sel);
                }
            }
        }
        // next r-subset of 0..n
        let mut i = r;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if subset[i] < n - r + i {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..r {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

fn cmd_identities(range: i64, order: &str) -> Result<String, Failure> {
    let order = parse_order(order)?;
    let report = tetindex::verify_identities(range, order);
    let mut out = String::new();
    for o in &report.outcomes {
        match &o.counterexample {
            None => writeln!(out, "PASS {} ({} instances)", o.name, o.checked).unwrap(),
            Some(at) => writeln!(out, "FAIL {} at {at}", o.name).unwrap(),
        }
    }
    if report.all_passed() {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

fn render_efficiency(report: &EfficiencyReport) -> String {
    let mut out = String::new();
    if report.has_index_structure() {
        writeln!(out, "INDEX STRUCTURE: yes ({}/{} quad-choices feasible)", report.n_feasible(), report.n_choices).unwrap();
    } else {
        writeln!(out, "INDEX STRUCTURE: no ({} infeasible quad-choice(s) found, {} of {} decided)", report.obstructions.len(), report.statuses.len(), report.n_choices)
            .unwrap();
    }
    for (c, s) in &report.statuses {
        match s {
            ChoiceStatus::Feasible(w) => writeln!(out, "{c} feasible: {w}").unwrap(),
            ChoiceStatus::Infeasible => writeln!(out, "{c} infeasible").unwrap(),
        }
    }
    for ob in &report.obstructions {
        writeln!(out, "certificate {}", ob.choice).unwrap();
        writeln!(out, "{}", ob.certificate).unwrap();
        writeln!(out, "chi* {}", ob.chi).unwrap();
        if let Some(s) = &ob.surface {
            let links: Vec<String> = s.link_multiples.iter().map(ToString::to_string).collect();
            writeln!(out, "links {}", links.join(" ")).unwrap();
            writeln!(out, "normal class (t0 t1 t2 t3 q q' q'' per tetrahedron)").unwrap();
            writeln!(out, "{}", s.class).unwrap();
        }
    }
    out
}

fn cmd_basis(file: &Path, excluded: Option<&[usize]>) -> Result<String, Failure> {
    let Loaded { g, .. } = load(file)?;
    let sel = match excluded {
        Some(x) => BasisSelection::from_excluded(g.n(), x).map_err(input)?,
        None => edgebasis::select_basis(&g).map_err(input)?,
    };
    let mut out = String::new();
    writeln!(out, "excluded {{{}}}", edges(&sel.excluded)).unwrap();
    writeln!(out, "basic {{{}}}", edges(&sel.basic)).unwrap();
    match edgebasis::validate_basis(&g, &sel).map_err(input)? {
        BasisCheck::Valid => {}
        BasisCheck::SublatticeIndex(k) => {
            writeln!(out, "sublattice index {k}").unwrap();
            return Err(Failure::Verification(out));
        }
    }
    let rows = edgebasis::express_excluded_rows(&g, &sel).map_err(input)?;
    for (&x, lambda) in sel.excluded.iter().zip(&rows) {
        let mut rhs = String::new();
        for (e, &c) in lambda.iter().enumerate().filter(|&(_, &c)| c != 0) {
            let sign = if c < 0 { "-" } else if rhs.is_empty() { "" } else { "+" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            if rhs.is_empty() {
                write!(rhs, "{sign}{mag}E{e}").unwrap();
            } else {
                write!(rhs, " {sign} {mag}E{e}").unwrap();
            }
        }
        if rhs.is_empty() {
            rhs.push('0');
        }
        writeln!(out, "E{x} = {rhs}").unwrap();
    }
    Ok(out)
}

fn cmd_move(file: &Path, kind: MoveKind, at: &str, output: &Path) -> Result<String, Failure> {
    let t = load_tri(file)?;
    let mv = MoveSpec::parse(kind, at).map_err(input)?;
    let moved = pachner::apply_move(&t, &mv).map_err(input)?;
    std::fs::write(output, moved.serialize()).map_err(|e| Failure::Input(format!("{}: {e}", output.display())))?;
    let classes = moved.edge_classes().map_err(input)?;
    let degrees: Vec<String> = classes.iter().map(|c| c.degree().to_string()).collect();
    Ok(format!("{mv}: {} -> {} tetrahedra, edge degrees {}\n", t.n_tets(), moved.n_tets(), degrees.join(" ")))
}

fn cmd_verify_move(file: &Path, kind: MoveKind, at: &str, order: &str, assume_convergent: bool) -> Result<String, Failure> {
    let order_h = parse_order(order)?;
    let t = load_tri(file)?;
    let mv = MoveSpec::parse(kind, at).map_err(input)?;
    let report = pachner::verify_move_invariance(&t, &mv, order_h, assume_convergent).map_err(|e| match e {
        InvarianceError::Index { source: IndexError::Divergent { .. }, .. } => Failure::Divergent(e.to_string()),
        other => Failure::Input(other.to_string()),
    })?;
    let mut out = format!("{mv}: {} -> {} tetrahedra\n", t.n_tets(), report.moved.n_tets());
    writeln!(out, "before {}", report.before).unwrap();
    writeln!(out, "after  {}", report.after).unwrap();
    match report.first_difference {
        None => {
            writeln!(out, "EQUAL to order {order}").unwrap();
            Ok(out)
        }
        Some(e) => {
            let at = if e % 2 == 0 { format!("q^{}", e / 2) } else { format!("q^({e}/2)") };
            writeln!(out, "DIFFER first at {at}").unwrap();
            Err(Failure::Verification(out))
        }
    }
}

fn cmd_parse_check(file: &Path) -> Result<String, Failure> {
    let Loaded { tri, g } = load(file)?;
    let mut out = String::new();
    match &tri {
        Some(t) => {
            let degrees: Vec<String> = t.edge_classes().map_err(input)?.iter().map(|c| c.degree().to_string()).collect();
            writeln!(out, "tri v1: {} tetrahedra, edge degrees {}, {} cusp(s)", t.n_tets(), degrees.join(" "), g.r()).unwrap();
        }
        None => writeln!(out, "nz v1: N = {}, {} cusp(s)", g.n(), g.r()).unwrap(),
    }
    let degrees: Vec<String> = g.edge_degrees().iter().map(ToString::to_string).collect();
    writeln!(out, "edge equation degrees {}", degrees.join(" ")).unwrap();
    Ok(out)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Index { file, order, curve, excluded, threads, coset_check, emit_coeffs, guard_radius } => {
            set_threads(threads)?;
            cmd_index(&file, &order, curve.as_deref(), excluded.as_deref(), coset_check, emit_coeffs, guard_radius)
        }
        Command::Identities { range, order, threads } => {
            set_threads(threads)?;
            cmd_identities(range, &order)
        }
        Command::Efficiency { file, cap, force, all_certificates, symmetry, threads } => {
            set_threads(threads)?;
            let Loaded { tri, g } = load(&file)?;
            let opts = EfficiencyOptions { cap, force, all_certificates, symmetry };
            let report = anglestruct::has_index_structure(&g, tri.as_ref(), &opts).map_err(input)?;
            Ok(render_efficiency(&report))
        }
        Command::Basis { file, excluded } => cmd_basis(&file, excluded.as_deref()),
        Command::Move { file, kind, at, output } => cmd_move(&file, kind, &at, &output),
        Command::VerifyMove { file, kind, at, order, assume_convergent, threads } => {
            set_threads(threads)?;
            cmd_verify_move(&file, kind, &at, &order, assume_convergent)
        }
        Command::ParseCheck { file } => cmd_parse_check(&file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Failure::Verification(out) = &f {
                print!("{out}");
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
