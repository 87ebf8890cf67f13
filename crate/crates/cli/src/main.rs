//! `surgery`: command-line front end for `surgery-core`.
//!
//! Exit codes: 0 success, 1 usage/parse/IO errors, 2 domain errors (slope 1,
//! contact coefficient 0, impossible triangles, rank contradictions),
//! 3 certificate verification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use surgery_core::contact_certifier::{
    certify_tight, verify_certificate, Certificate, CertifyError, Premise,
};
use surgery_core::contact_diagram::{
    count_presentations, ContactDiagram, DiagramError, NormalizeChoices,
};
use surgery_core::floer_engine::{base_facts, propagate, triangle_solve, vk_triangles, RankError};
use surgery_core::formats::{
    diagram_to_json, parse_diagram, parse_facts, parse_framed_link, parse_json, parse_triangles,
    FormatError,
};
use surgery_core::rationals::RationalError;
use surgery_core::smooth_topology::{
    det_signed, h1, linking_matrix, FramedLink, ManifoldId, TopologyError,
};
use surgery_core::{generate_yr_diagram, SurgeryCoefficient};

#[derive(Parser)]
#[command(
    name = "surgery",
    version,
    about = "Contact surgery calculus on the right-handed trefoil"
)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Slope r of the trefoil diagram.
    #[arg(long = "r", value_name = "P/Q", allow_hyphen_values = true)]
    r: Option<SurgeryCoefficient>,
    /// Contact diagram file.
    #[arg(long, value_name = "FILE")]
    diagram: Option<PathBuf>,
    /// Framed link file.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a contact surgery diagram to contact (+/-1)-surgeries.
    Convert {
        #[arg(
            long = "r",
            value_name = "P/Q",
            allow_hyphen_values = true,
            conflicts_with = "input"
        )]
        r: Option<SurgeryCoefficient>,
        /// Contact diagram file.
        #[arg(long, value_name = "FILE", required_unless_present = "r")]
        input: Option<PathBuf>,
        /// Write the normalized diagram here instead of stdout.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// First homology of the surgered manifold.
    H1 {
        #[command(flatten)]
        source: Source,
    },
    /// Determinant of the linking matrix.
    Det {
        #[command(flatten)]
        source: Source,
    },
    /// Number of presentations produced by normalizing contact r-surgery.
    Count {
        #[arg(long = "r", value_name = "P/Q", allow_hyphen_values = true)]
        r: SurgeryCoefficient,
    },
    /// Heegaard Floer ranks after propagating through exact triangles.
    Ranks {
        #[arg(long, value_name = "K", default_value_t = 10)]
        max_k: u64,
        /// Rank facts replacing the built-in ones.
        #[arg(long, value_name = "FILE")]
        facts: Option<PathBuf>,
        /// Triangles replacing the built-in families.
        #[arg(long, value_name = "FILE")]
        triangles: Option<PathBuf>,
        /// List every manifold, not only -V_k.
        #[arg(long)]
        all: bool,
    },
    /// Solve an exact triangle with the given dimensions.
    Triangle {
        #[arg(long, num_args = 3, value_names = ["A", "B", "C"], required = true)]
        solve: Vec<u64>,
    },
    /// Produce and check a tightness certificate.
    Certify {
        #[arg(
            long = "r",
            value_name = "P/Q",
            allow_hyphen_values = true,
            required_unless_present = "batch"
        )]
        r: Option<SurgeryCoefficient>,
        /// File with one slope per line ('#' starts a comment).
        #[arg(long, value_name = "FILE", conflicts_with_all = ["r", "emit"])]
        batch: Option<PathBuf>,
        /// Write the certificate as JSON.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Check a certificate file.
    Verify { file: PathBuf },
}

enum Failure {
    Usage(String),
    Domain(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Diagram(d) => d.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        match e {
            DiagramError::NoTightExtension(_)
            | DiagramError::Domain { .. }
            | DiagramError::Rational(RationalError::ExcludedSlope | RationalError::Domain(_)) => {
                Failure::Domain(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<RankError> for Failure {
    fn from(e: RankError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::Diagram(d) => d.into(),
            CertifyError::Internal(m) => {
                Failure::Verification(format!("internal invariant violated: {m}"))
            }
            other => Failure::Domain(other.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn framed_link(source: &Source) -> Result<FramedLink, Failure> {
    if let Some(path) = &source.input {
        return Ok(parse_framed_link(&read(path)?)?);
    }
    let d = match (&source.r, &source.diagram) {
        (Some(r), _) => generate_yr_diagram(r)?,
        (None, Some(path)) => parse_diagram(&read(path)?)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let normalized = d.dg_normalize(&NormalizeChoices::default())?;
    Ok(linking_matrix(&normalized)?)
}

fn matrix_text(m: &[Vec<i64>]) -> String {
    let width = m
        .iter()
        .flatten()
        .map(|x| x.to_string().len())
        .max()
        .unwrap_or(1);
    m.iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
            format!("  [{}]\n", cells.join(" "))
        })
        .collect()
}

fn diagram_text(d: &ContactDiagram) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<14} {:>4} {:>4}  coeff",
        "id", "type", "tb", "rot"
    );
    for c in d.components() {
        let kind = match &c.topo {
            surgery_core::contact_diagram::TopoType::Unknot => "unknot".to_string(),
            surgery_core::contact_diagram::TopoType::RhTrefoil => "rhtrefoil".to_string(),
            surgery_core::contact_diagram::TopoType::PushoffOf(p) => format!("pushoff:{p}"),
        };
        let coeff = c
            .coeff
            .as_ref()
            .map_or("-".to_string(), ToString::to_string);
        let _ = writeln!(
            out,
            "{:<12} {:<14} {:>4} {:>4}  {coeff}",
            c.id.0, kind, c.tb, c.rot
        );
    }
    out
}

fn convert(
    r: Option<SurgeryCoefficient>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    as_json: bool,
) -> Outcome {
    let d = match (r, input) {
        (Some(r), _) => generate_yr_diagram(&r)?,
        (None, Some(path)) => parse_diagram(&read(&path)?)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let normalized = d.dg_normalize(&NormalizeChoices::default())?;
    let mut text = diagram_to_json(&normalized);
    text.push('\n');
    match output {
        Some(path) => {
            write(&path, &text)?;
            if as_json {
                Ok(pretty(
                    &json!({"output": path.display().to_string(), "components": normalized.len()}),
                ))
            } else {
                Ok(format!(
                    "wrote {} components to {}\n",
                    normalized.len(),
                    path.display()
                ))
            }
        }
        None if as_json => Ok(text),
        None => Ok(diagram_text(&normalized)),
    }
}

fn homology(source: Source, as_json: bool) -> Outcome {
    let fl = framed_link(&source)?;
    let h = h1(&fl);
    if as_json {
        return Ok(pretty(&json!({
            "matrix": fl.matrix(),
            "free_rank": h.free_rank,
            "torsion": h.torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "order": h.order().to_string(),
            "cyclic": h.is_cyclic(),
        })));
    }
    Ok(format!(
        "linking matrix:\n{}H1 = {h} (order {}{})\n",
        matrix_text(fl.matrix()),
        h.order(),
        if h.order() == 0.into() {
            ", infinite"
        } else {
            ""
        }
    ))
}

fn determinant(source: Source, as_json: bool) -> Outcome {
    let fl = framed_link(&source)?;
    let det = det_signed(fl.matrix())?;
    if as_json {
        return Ok(pretty(
            &json!({"matrix": fl.matrix(), "det": det.to_string()}),
        ));
    }
    Ok(format!(
        "linking matrix:\n{}det = {det}\n",
        matrix_text(fl.matrix())
    ))
}

fn count(r: SurgeryCoefficient, as_json: bool) -> Outcome {
    let n = count_presentations(&r)?;
    if as_json {
        return Ok(pretty(
            &json!({"slope": r.to_string(), "presentations": n.to_string()}),
        ));
    }
    Ok(format!("r = {r}: {n} presentation(s)\n"))
}

fn ranks(
    max_k: u64,
    facts: Option<PathBuf>,
    triangles: Option<PathBuf>,
    all: bool,
    as_json: bool,
) -> Outcome {
    let db = match &facts {
        Some(path) => parse_facts(&read(path)?)?,
        None => base_facts(),
    };
    let ts = match &triangles {
        Some(path) => parse_triangles(&read(path)?)?,
        None => vk_triangles(max_k),
    };
    let out = propagate(&db, &ts)?;
    let mut rows: Vec<(ManifoldId, String)> = if all {
        out.facts()
            .iter()
            .map(|(m, r)| (m.clone(), r.to_string()))
            .collect()
    } else {
        (1..=max_k)
            .map(|k| {
                let m = ManifoldId::MinusVk(k);
                let r = out.get(&m).to_string();
                (m, r)
            })
            .collect()
    };
    rows.dedup();
    if as_json {
        let list: Vec<Value> = rows
            .iter()
            .map(|(m, r)| json!({"manifold": m.to_string(), "rank": r}))
            .collect();
        return Ok(pretty(&json!({"ranks": list})));
    }
    let mut text = format!("{:<16} rank\n", "manifold");
    for (m, r) in rows {
        let _ = writeln!(text, "{:<16} {r}", m.to_string());
    }
    Ok(text)
}

fn triangle(dims: &[u64], as_json: bool) -> Outcome {
    let (a, b, c) = (dims[0], dims[1], dims[2]);
    let s = triangle_solve(a, b, c)?;
    if as_json {
        return Ok(pretty(&json!({"dimensions": [a, b, c], "solution": s})));
    }
    let describe = |name: &str, rank: u64, inj: bool, surj: bool| {
        format!(
            "{name} {}, {} (rank {rank})\n",
            if inj { "injective" } else { "not injective" },
            if surj { "surjective" } else { "not surjective" }
        )
    };
    Ok(format!(
        "dimensions ({a}, {b}, {c})\n{}{}{}",
        describe("f", s.rank_f, s.f_injective, s.f_surjective),
        describe("g", s.rank_g, s.g_injective, s.g_surjective),
        describe("h", s.rank_h, s.h_injective, s.h_surjective),
    ))
}

fn premise_text(p: &Premise) -> String {
    match p {
        Premise::Node { id } => format!("node {id}"),
        Premise::Edge { id } => format!("edge {id}"),
        Premise::Step { index } => format!("step {index}"),
        Premise::Rank { manifold, rank } => format!("rank {manifold} = {rank}"),
        Premise::Triangle { instance, solution } => {
            let (a, b, c) = solution.dimensions();
            format!(
                "triangle {} -> {} -> {} ({a}, {b}, {c})",
                instance.a, instance.b, instance.c
            )
        }
        Premise::Choices { choices } if choices.0.is_empty() => "default stabilizations".into(),
        Premise::Choices { choices } => {
            format!("stabilizations on {} component(s)", choices.0.len())
        }
    }
}

fn certificate_text(cert: &Certificate) -> String {
    let mut out = format!("{}\n", cert.summary());
    for (i, s) in cert.steps.iter().enumerate() {
        let premises: Vec<String> = s.premises.iter().map(premise_text).collect();
        let _ = writeln!(
            out,
            "  {i:>3}  {:<5} {}  [{}]",
            s.rule.to_string(),
            s.conclusion,
            premises.join("; ")
        );
        let _ = writeln!(out, "        \"{}\"", s.provenance);
        for p in &s.premises {
            if let Premise::Triangle { instance, .. } = p {
                let _ = writeln!(out, "        \"{}\"", instance.provenance);
            }
        }
    }
    out
}

fn certify_one(r: &SurgeryCoefficient) -> Result<Certificate, Failure> {
    let cert = certify_tight(r)?;
    verify_certificate(&cert).map_err(|e| {
        Failure::Verification(format!(
            "r = {r}: emitted certificate failed verification: {e}"
        ))
    })?;
    Ok(cert)
}

fn certificate_json(r: &SurgeryCoefficient, result: &Result<Certificate, Failure>) -> Value {
    match result {
        Ok(cert) => json!({
            "slope": r.to_string(),
            "verdict": "TIGHT",
            "summary": cert.summary(),
            "certificate": cert,
        }),
        Err(f) => json!({
            "slope": r.to_string(),
            "verdict": if f.code() == 2 { "EXCLUDED" } else { "ERROR" },
            "error": f.message(),
        }),
    }
}

fn parse_batch(text: &str) -> Result<Vec<SurgeryCoefficient>, Failure> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = body.find(trimmed).unwrap_or(0) + 1;
        let r = trimmed.parse().map_err(|e| {
            Failure::Usage(format!(
                "parse error at line {}, column {column}: {e}",
                n + 1
            ))
        })?;
        out.push(r);
    }
    Ok(out)
}

fn certify(
    r: Option<SurgeryCoefficient>,
    batch: Option<PathBuf>,
    emit: Option<PathBuf>,
    as_json: bool,
) -> Result<(String, Option<Failure>), Failure> {
    if let Some(path) = batch {
        let slopes = parse_batch(&read(&path)?)?;
        let results: Vec<(SurgeryCoefficient, Result<Certificate, Failure>)> = slopes
            .into_par_iter()
            .map(|r| {
                let c = certify_one(&r);
                (r, c)
            })
            .collect();
        let worst = results
            .iter()
            .filter_map(|(_, c)| c.as_ref().err())
            .max_by_key(|f| f.code())
            .map(|f| match f {
                Failure::Usage(m) => Failure::Usage(m.clone()),
                Failure::Domain(_) => Failure::Domain("some slopes were not certified".into()),
                Failure::Verification(m) => Failure::Verification(m.clone()),
            });
        let text = if as_json {
            let list: Vec<Value> = results
                .iter()
                .map(|(r, c)| certificate_json(r, c))
                .collect();
            pretty(&Value::Array(list))
        } else {
            results
                .iter()
                .map(|(r, c)| match c {
                    Ok(cert) => format!("{}\n", cert.summary()),
                    Err(f) => format!("Y({r}): {}\n", f.message()),
                })
                .collect()
        };
        return Ok((text, worst));
    }

    let r = r.expect("clap requires --r without --batch");
    let result = certify_one(&r);
    if let (Some(path), Ok(cert)) = (&emit, &result) {
        let text = serde_json::to_string_pretty(cert).expect("certificates serialize") + "\n";
        write(path, &text)?;
    }
    if as_json {
        let text = pretty(&certificate_json(&r, &result));
        return Ok((text, result.err()));
    }
    match result {
        Ok(cert) => {
            let mut text = certificate_text(&cert);
            let _ = writeln!(text, "verified: all {} steps check", cert.steps.len());
            if let Some(path) = emit {
                let _ = writeln!(text, "certificate written to {}", path.display());
            }
            Ok((text, None))
        }
        Err(f) => Err(f),
    }
}

fn verify(file: PathBuf, as_json: bool) -> Outcome {
    let cert: Certificate = parse_json(&read(&file)?)?;
    let result = verify_certificate(&cert);
    if as_json {
        let v = match &result {
            Ok(()) => json!({"valid": true, "summary": cert.summary()}),
            Err(e) => json!({"valid": false, "step": e.step, "reason": e.reason}),
        };
        return match result {
            Ok(()) => Ok(pretty(&v)),
            Err(_) => Err(Failure::Verification(pretty(&v).trim_end().to_string())),
        };
    }
    match result {
        Ok(()) => Ok(format!("VALID: {}\n", cert.summary())),
        Err(e) => Err(Failure::Verification(format!("INVALID: {e}"))),
    }
}

fn run(cli: Cli) -> (String, Option<Failure>) {
    let json = cli.json;
    let outcome = match cli.command {
        Command::Convert { r, input, output } => convert(r, input, output, json),
        Command::H1 { source } => homology(source, json),
        Command::Det { source } => determinant(source, json),
        Command::Count { r } => count(r, json),
        Command::Ranks {
            max_k,
            facts,
            triangles,
            all,
        } => ranks(max_k, facts, triangles, all, json),
        Command::Triangle { solve } => triangle(&solve, json),
        Command::Certify { r, batch, emit } => {
            return certify(r, batch, emit, json).unwrap_or_else(|f| (String::new(), Some(f)))
        }
        Command::Verify { file } => verify(file, json),
    };
    match outcome {
        Ok(text) => (text, None),
        Err(f) => (String::new(), Some(f)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let as_json = cli.json;
    let (text, failure) = run(cli);
    print!("{text}");
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            if as_json && text.is_empty() {
                println!(
                    "{}",
                    pretty(&json!({"error": f.message(), "exit": f.code()})).trim_end()
                );
            } else if text.is_empty() || !as_json {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
