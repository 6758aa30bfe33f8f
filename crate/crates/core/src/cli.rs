//! The `pushfwd` command-line driver. Everything is computed in-process and
//! returned as text, so the same entry point serves the binary and tests.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};

use crate::blowup::{kernel_local_freeness, resolve_check, BlowupSpec};
use crate::cohomology::{euler_char_multi, h_multi, MultiDegree};
use crate::config::{parse_config, ConfigBody, ConfigDocument, DEFAULT_KMAX};
use crate::exactalg::DEFAULT_DEGREE_BOUND;
use crate::extension::{check_cocycle, extend_all, ladder_dims, Trivialization, TwistSpec};
use crate::family::{pushforward, r1_model, splitting_steps, stratum_sweep, FamilyConfig};
use crate::nodalcurve::{euler_char, h0_h1, BundleOnCurve, CurveGraph};
use crate::selftest::run_all;

#[derive(Parser, Debug)]
#[command(name = "pushfwd", version, about = "Direct images of O(mS) on families of nodal genus-one curves")]
pub struct Cli {
    /// Degree bound for fiber-dimension computations.
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_BOUND)]
    pub degree_bound: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Kv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cohomology of O(a1,...,ar) on (P^1)^r.
    Cohom {
        #[arg(allow_hyphen_values = true, value_delimiter = ',', required = true)]
        degrees: Vec<i64>,
    },
    /// Structure and cohomology of a nodal curve.
    Curve { file: String },
    /// The direct image of O(mS) for a family.
    Family {
        file: String,
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<i64>>,
        /// Compare fiber ranks with fiber cohomology on every stratum.
        #[arg(long)]
        fiber_ranks: bool,
        /// Ext¹ obstructions of the inductive extensions (multiprojective only).
        #[arg(long)]
        splitting: bool,
    },
    /// Local freeness of the kernel after blowups, applied in order.
    Blowup {
        file: String,
        /// Comma-separated center; repeat for a sequence of blowups.
        #[arg(long)]
        center: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<i64>>,
    },
    /// Extension of central-fiber sections to the thickenings.
    Extend {
        file: Option<String>,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long, value_parser = ["none", "d0-d1"])]
        twist: Option<String>,
        #[arg(long)]
        kmax: Option<u32>,
    },
    /// Run the acceptance checks.
    Selftest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

enum Failure {
    Usage(String),
    Computation(String),
}

fn computation<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Computation(e.to_string())
}

/// A report: scalar fields and tables, rendered as aligned text or as
/// `key=value` lines.
#[derive(Default)]
struct Report {
    blocks: Vec<Block>,
}

enum Block {
    Field(String, String),
    Table { name: String, columns: Vec<String>, rows: Vec<Vec<String>> },
}

impl Report {
    fn field(&mut self, key: &str, value: impl ToString) {
        self.blocks.push(Block::Field(key.to_string(), value.to_string()));
    }

    fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<String>>) {
        self.blocks.push(Block::Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows });
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            match (b, format) {
                (Block::Field(k, v), Format::Text) => writeln!(out, "{k}: {v}").unwrap(),
                (Block::Field(k, v), Format::Kv) => writeln!(out, "{k}={v}").unwrap(),
                (Block::Table { name, columns, rows }, Format::Kv) => {
                    for (i, row) in rows.iter().enumerate() {
                        for (c, v) in columns.iter().zip(row) {
                            writeln!(out, "{name}.{i}.{c}={v}").unwrap();
                        }
                    }
                }
                (Block::Table { name, columns, rows }, Format::Text) => {
                    let widths: Vec<usize> = (0..columns.len())
                        .map(|j| rows.iter().map(|r| r[j].chars().count()).chain([columns[j].chars().count()]).max().unwrap())
                        .collect();
                    let line = |cells: &[String]| {
                        let padded: Vec<String> =
                            cells.iter().zip(&widths).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
                        padded.join("  ").trim_end().to_string()
                    };
                    writeln!(out, "{name}:").unwrap();
                    writeln!(out, "  {}", line(columns)).unwrap();
                    for r in rows {
                        writeln!(out, "  {}", line(r)).unwrap();
                    }
                }
            }
        }
        out
    }
}

fn load(path: &str) -> Result<ConfigDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    parse_config(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn wrong_kind(path: &str, doc: &ConfigDocument, want: &str) -> Failure {
    Failure::Usage(format!("{path}: expected a {want} file, found kind = {}", doc.kind()))
}

fn load_family(path: &str, m: &Option<Vec<i64>>) -> Result<(ConfigDocument, FamilyConfig), Failure> {
    let doc = load(path)?;
    let ConfigBody::Family(cfg) = &doc.body else { return Err(wrong_kind(path, &doc, "family")) };
    let cfg = match m {
        Some(m) => cfg.with_m(m).map_err(|e| Failure::Usage(format!("--m: {e}")))?,
        None => cfg.clone(),
    };
    Ok((doc, cfg))
}

fn set_label(s: &BTreeSet<String>) -> String {
    if s.is_empty() {
        "-".to_string()
    } else {
        s.iter().cloned().collect::<Vec<_>>().join(",")
    }
}

fn list<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "-".to_string()
    } else {
        v.join(" ")
    }
}

fn meta(report: &mut Report, doc: &ConfigDocument) {
    if let Some(n) = &doc.name {
        report.field("name", n);
    }
}

fn cohom(degrees: &[i64]) -> Result<Report, Failure> {
    let a = MultiDegree::new(degrees.to_vec()).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut r = Report::default();
    r.field("bundle", &a);
    for (i, h) in h_multi(&a).iter().enumerate() {
        r.field(&format!("h{i}"), h);
    }
    r.field("chi", euler_char_multi(&a));
    Ok(r)
}

fn curve_report(r: &mut Report, graph: &CurveGraph, bundle: Option<&BundleOnCurve>) -> Result<(), Failure> {
    r.field("components", list(graph.components().iter().map(|c| format!("{}:{}", c.id, c.genus))));
    r.field("nodes", graph.nodes().len());
    r.field("arithmetic_genus", graph.arithmetic_genus().map_err(computation)?);
    if graph.check_genus_one().is_ok() {
        r.field("core", set_label(&graph.core().map_err(computation)?));
        let tails: Vec<String> = graph.tails().map_err(computation)?.iter().map(set_label).collect();
        r.field("tails", list(tails.iter().map(|t| format!("{{{t}}}"))));
    }
    if let Some(b) = bundle {
        r.field("degrees", list(b.degrees.iter().map(|(c, d)| format!("{c}:{d}"))));
        let (h0, h1) = h0_h1(graph, b).map_err(computation)?;
        r.field("h0", h0);
        r.field("h1", h1);
        r.field("chi", euler_char(graph, b).map_err(computation)?);
    }
    Ok(())
}

fn family(cfg: &FamilyConfig, doc: &ConfigDocument, fiber_ranks: bool, splitting: bool, bound: u32) -> Result<Report, Failure> {
    let mut r = Report::default();
    meta(&mut r, doc);
    let model = pushforward(cfg);
    r.field("m", list(cfg.multiplicities()));
    r.field("dropped", list(&model.dropped));
    r.field("parameters", list(model.universe()));
    r.field("free_part", list(&model.v_m0));
    r.field("beta_source", list(&model.v1));
    r.field("beta", &model.beta);
    let gens: Vec<String> = model
        .kernel_generators
        .iter()
        .map(|g| format!("({})", g.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    r.field("kernel_generators", list(gens));
    r.field("r1_support", list(r1_model(cfg).support.iter().map(|s| format!("{{{}}}", set_label(s)))));
    if fiber_ranks {
        let reports = stratum_sweep(cfg, bound).map_err(computation)?;
        if let Some(first) = reports.first() {
            r.field("generic_rank", first.generic_rank);
        }
        let rows = reports
            .iter()
            .map(|b| {
                vec![
                    set_label(&b.stratum),
                    b.module_fiber.to_string(),
                    b.h0.to_string(),
                    b.h1.to_string(),
                    b.chi.to_string(),
                    b.r1_fiber.to_string(),
                    b.verdict.to_string(),
                ]
            })
            .collect();
        r.table("strata", &["vanishing", "rank", "h0", "h1", "chi", "r1", "verdict"], rows);
        if let Some(last) = reports.last() {
            r.field("origin_rank", last.module_fiber);
        }
    }
    if splitting {
        let steps = splitting_steps(cfg).map_err(computation)?;
        let rows = steps
            .iter()
            .map(|s| vec![list(&s.from), cfg.tails[s.tail].param.clone(), s.quotient.to_string(), s.obstruction.to_string()])
            .collect();
        r.table("splitting", &["from", "tail", "quotient", "ext1"], rows);
        r.field("nonsplit_steps", steps.iter().filter(|s| s.obstruction != 0).count());
    }
    Ok(r)
}

fn blowup(cfg: &FamilyConfig, doc: &ConfigDocument, centers: &[Vec<String>], bound: u32) -> Result<Report, Failure> {
    let mut r = Report::default();
    meta(&mut r, doc);
    let row = pushforward(cfg).beta.entries;
    r.field("before", kernel_local_freeness(&row, bound).map_err(computation)?);
    let specs = centers.iter().map(|c| BlowupSpec::new(c)).collect::<Result<Vec<_>, _>>().map_err(|e| Failure::Usage(e.to_string()))?;
    for (i, s) in specs.iter().enumerate() {
        r.field(&format!("center{}", i + 1), s.center.join(","));
    }
    let report = resolve_check(cfg, &specs, bound).map_err(computation)?;
    let rows = report
        .leaves
        .iter()
        .map(|l| {
            let subs: Vec<String> = l.substitution.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let row: Vec<String> = l.row.iter().map(|m| m.to_string()).collect();
            vec![list(&l.path), subs.join(" "), format!("({})", row.join(", ")), l.verdict.to_string()]
        })
        .collect();
    r.table("charts", &["chart", "substitution", "beta", "verdict"], rows);
    r.field("result", if report.resolved() { "RESOLVED" } else { "NOT_RESOLVED" });
    Ok(r)
}

fn extend(m: i64, twist: TwistSpec, kmax: u32) -> Result<Report, Failure> {
    let mut r = Report::default();
    let rep = extend_all(m, twist, kmax).map_err(computation)?;
    r.field("m", m);
    r.field("twist", twist);
    r.field("central_sections", list(&rep.central));
    r.field("h0_w1", rep.h0_w1);
    let mut columns = vec!["level".to_string(), "obstruction".to_string()];
    columns.extend(rep.central.iter().map(|s| s.to_string()));
    let rows = rep
        .levels
        .iter()
        .map(|l| {
            let mut row = vec![l.level.to_string(), l.obstruction.to_string()];
            row.extend(l.statuses.iter().map(|(_, s)| s.to_string()));
            row
        })
        .collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    r.table("levels", &cols, rows);
    r.field("surviving", list(rep.surviving()));
    let ladder = ladder_dims(m, twist, kmax.min(3)).map_err(computation)?;
    r.field("h0_ladder", list(ladder.iter().map(|d| d.map_or("?".to_string(), |x| x.to_string()))));
    if twist == TwistSpec::None {
        let c = check_cocycle(&Trivialization::standard(m));
        r.field("cocycle", c.failure.unwrap_or_else(|| "ok".to_string()));
    }
    Ok(r)
}

fn dispatch(cli: &Cli) -> Result<(String, i32), Failure> {
    let bound = cli.degree_bound;
    let report = match &cli.command {
        Command::Cohom { degrees } => cohom(degrees)?,
        Command::Curve { file } => {
            let doc = load(file)?;
            let ConfigBody::Curve { graph, bundle } = &doc.body else { return Err(wrong_kind(file, &doc, "curve")) };
            let mut r = Report::default();
            meta(&mut r, &doc);
            curve_report(&mut r, graph, bundle.as_ref())?;
            r
        }
        Command::Family { file, m, fiber_ranks, splitting } => {
            let (doc, cfg) = load_family(file, m)?;
            family(&cfg, &doc, *fiber_ranks, *splitting, bound)?
        }
        Command::Blowup { file, center, m } => {
            let (doc, cfg) = load_family(file, m)?;
            let centers: Vec<Vec<String>> = if center.is_empty() {
                vec![cfg.universe()]
            } else {
                center.iter().map(|c| c.split(',').map(|x| x.trim().to_string()).collect()).collect()
            };
            let universe = cfg.normalized().0.universe();
            if let Some(x) = centers.iter().flatten().find(|x| !universe.contains(x)) {
                return Err(Failure::Usage(format!("--center: `{x}` is not a base parameter ({})", universe.join(","))));
            }
            blowup(&cfg, &doc, &centers, bound)?
        }
        Command::Extend { file, m, twist, kmax } => {
            let (mut em, mut et, mut ek) = (None, TwistSpec::None, DEFAULT_KMAX);
            if let Some(path) = file {
                let doc = load(path)?;
                let ConfigBody::Extension { m, twist, kmax } = doc.body else { return Err(wrong_kind(path, &doc, "extension")) };
                (em, et, ek) = (Some(m), twist, kmax);
            }
            let m = m.or(em).ok_or_else(|| Failure::Usage("extend needs --m or an extension file".into()))?;
            if let Some(t) = twist {
                et = TwistSpec::parse(t).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            extend(m, et, kmax.unwrap_or(ek))?
        }
        Command::Selftest => {
            let results = run_all();
            let mut out = String::new();
            for r in &results {
                match cli.format {
                    Format::Text => writeln!(out, "{r}").unwrap(),
                    Format::Kv => writeln!(out, "criterion.{}.{}={}", r.id, r.name.replace(' ', "_"), if r.passed { "pass" } else { "fail" }).unwrap(),
                }
            }
            let code = if results.iter().all(|r| r.passed) { 0 } else { 1 };
            return Ok((out, code));
        }
    };
    Ok((report.render(cli.format), 0))
}

/// Run with the given arguments (program name first). Exit codes: 0 on
/// success, 1 on a computation error or failed check, 2 on a usage or
/// parse error.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    match dispatch(&cli) {
        Ok((stdout, code)) => Outcome { stdout, stderr: String::new(), code },
        Err(Failure::Usage(msg)) => Outcome { stdout: String::new(), stderr: format!("error: {msg}\n"), code: 2 },
        Err(Failure::Computation(msg)) => Outcome { stdout: String::new(), stderr: format!("error: {msg}\n"), code: 1 },
    }
}
