//! Command-line surface for the icoh library: validate models, print
//! cohomology and Gysin tables, extract Euler data and run comparisons.
//!
//! Exit codes: 0 success (and comparison verdict A), 1 usage error, 2 model
//! load or validation failure, 3 comparison verdicts B and C.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use icoh::cdga::format_combination;
use icoh::classification::{compare_actions, default_sample, BaseIso, Verdict};
use icoh::gysin::GysinModel;
use icoh::linalg::{format_q, parse_q, qi, Q, QMatrix};
use icoh::models::{builtin, load_model};
use icoh::strata::{Perversity, StratumId};
use icoh::{Error, PerverseModel};

#[derive(Parser)]
#[command(
    name = "icoh",
    version,
    about = "Intersection cohomology of circle-fibered stratified spaces from finite orbit-space models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model and report every violated invariant
    Validate {
        /// Path to a model file, or builtin:<name>
        #[arg(long)]
        model: String,
    },
    /// Intersection cohomology of the total space at given perversities
    Cohomology {
        #[arg(long)]
        model: String,
        /// Perversity as a comma list, e.g. "v=2,w=0"; repeatable
        #[arg(long = "perversity")]
        perversities: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Short and long exact sequence tables at given perversities
    Gysin {
        #[arg(long)]
        model: String,
        #[arg(long = "perversity")]
        perversities: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// The Euler perversity and the Euler class of a model
    Euler {
        #[arg(long)]
        model: String,
    },
    /// Compare two fibrations over a common orbit space
    Compare {
        #[arg(long)]
        model: String,
        #[arg(long)]
        model2: String,
        /// Base isomorphism: "identity" or a map file
        #[arg(long, default_value = "identity")]
        map: String,
        /// Perversity sample: "default" or literals joined by ';'
        #[arg(long, default_value = "default")]
        sample: String,
    },
    /// Degree-zero Gysin cohomology and the connecting image of the unit
    #[command(name = "lemma-g")]
    LemmaG {
        #[arg(long)]
        model: String,
        #[arg(long = "perversity")]
        perversities: Vec<String>,
    },
}

enum CliError {
    Usage(String),
    Model(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(spec: &str) -> Result<GysinModel, CliError> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        Ok(builtin(name)?)
    } else {
        Ok(load_model(spec)?)
    }
}

fn parse_perversity(model: &GysinModel, literal: &str) -> Result<Perversity, CliError> {
    let poset = model.base().poset().clone();
    let mut map = BTreeMap::new();
    for part in literal.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(CliError::Usage(format!("empty entry in perversity `{literal}`")));
        }
        let Some((id, value)) = part.split_once('=') else {
            return Err(CliError::Usage(format!(
                "perversity entries look like `v=2`; got `{part}`"
            )));
        };
        let value: i64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad perversity value in `{part}`")))?;
        map.insert(StratumId::new(id.trim()), value);
    }
    Perversity::from_values(poset, &map)
        .map_err(|e| CliError::Usage(format!("perversity `{literal}` does not fit the model: {e}")))
}

fn perversities_or_zero(
    model: &GysinModel,
    literals: &[String],
) -> Result<Vec<Perversity>, CliError> {
    if literals.is_empty() {
        return Ok(vec![Perversity::zero(model.base().poset().clone())]);
    }
    literals.iter().map(|l| parse_perversity(model, l)).collect()
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Validate { model } => cmd_validate(&model),
        Command::Cohomology { model, perversities, format } => {
            cmd_cohomology(&model, &perversities, format)
        }
        Command::Gysin { model, perversities, format } => {
            cmd_gysin(&model, &perversities, format)
        }
        Command::Euler { model } => cmd_euler(&model),
        Command::Compare { model, model2, map, sample } => {
            cmd_compare(&model, &model2, &map, &sample)
        }
        Command::LemmaG { model, perversities } => cmd_lemma_g(&model, &perversities),
    }
}

fn cmd_validate(spec: &str) -> Result<u8, CliError> {
    match load(spec) {
        Ok(_) => {
            println!("valid");
            Ok(0)
        }
        Err(CliError::Model(Error::Invalid(report))) => {
            println!("invalid:");
            for v in &report.violations {
                println!("  {}: {}", v.rule, v.detail);
            }
            Ok(2)
        }
        Err(e) => Err(e),
    }
}

fn dims_line(dims: &[usize]) -> String {
    dims.iter()
        .enumerate()
        .map(|(i, d)| format!("deg {i}: {d}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_cohomology(spec: &str, literals: &[String], format: Format) -> Result<u8, CliError> {
    let model = load(spec)?;
    let ps = perversities_or_zero(&model, literals)?;
    let many = ps.len() > 1;
    for (idx, p) in ps.iter().enumerate() {
        let dims = model.ih_total(p)?.dims();
        match format {
            Format::Table => {
                if many {
                    println!("perversity {p}");
                }
                println!("{}", dims_line(&dims));
            }
            Format::Csv => {
                if many {
                    if idx > 0 {
                        println!();
                    }
                    println!("# perversity {p}");
                }
                println!("degree,dimension");
                for (i, d) in dims.iter().enumerate() {
                    println!("{i},{d}");
                }
            }
        }
    }
    Ok(0)
}

fn cmd_gysin(spec: &str, literals: &[String], format: Format) -> Result<u8, CliError> {
    let model = load(spec)?;
    let ps = perversities_or_zero(&model, literals)?;
    for (idx, p) in ps.iter().enumerate() {
        if idx > 0 {
            println!();
        }
        let ses = model.short_exact_check(p)?;
        let seq = model.long_exact_sequence(p)?;
        match format {
            Format::Table => {
                println!("perversity {p}");
                for row in &ses.rows {
                    println!(
                        "cochain degree {}: omega {}, gysin {}, pair {} ({})",
                        row.degree,
                        row.omega_dim,
                        row.gysin_dim,
                        row.iomega_dim,
                        if row.ok { "exact" } else { "NOT EXACT" }
                    );
                }
                println!("cohomology IH(B): {}", dims_line(&seq.base.dims()));
                println!("cohomology IH(X): {}", dims_line(&seq.total.dims()));
                println!("cohomology H(G):  {}", dims_line(&seq.gysin.dims()));
                for node in &seq.nodes {
                    println!(
                        "node {}: dim {}, rank in {}, rank out {} ({})",
                        node.label,
                        node.dim,
                        node.rank_in,
                        node.rank_out,
                        if node.exact { "exact" } else { "NOT EXACT" }
                    );
                }
                println!(
                    "sequence: {}",
                    if ses.ok && seq.is_exact() { "exact" } else { "NOT EXACT" }
                );
            }
            Format::Csv => {
                println!("# perversity {p}");
                println!("degree,dim_omega,dim_gysin,dim_pair,ih_base,ih_total,h_gysin");
                for row in &ses.rows {
                    let i = row.degree;
                    println!(
                        "{},{},{},{},{},{},{}",
                        i,
                        row.omega_dim,
                        row.gysin_dim,
                        row.iomega_dim,
                        seq.base.dim(i),
                        seq.total.dim(i),
                        if i == 0 { 0 } else { seq.gysin.dim(i - 1) }
                    );
                }
            }
        }
    }
    Ok(0)
}

fn cmd_euler(spec: &str) -> Result<u8, CliError> {
    let model = load(spec)?;
    let euler = model.euler_class()?;
    println!("euler perversity: {}", model.euler_perversity());
    println!("euler class in IH^2_e(B): {}", if euler.is_zero { "zero" } else { "nonzero" });
    let rep = euler.table.representative(&euler.class);
    println!("representative: {}", format_combination(model.base(), &rep));
    Ok(0)
}

fn cmd_lemma_g(spec: &str, literals: &[String]) -> Result<u8, CliError> {
    let model = load(spec)?;
    let ps = perversities_or_zero(&model, literals)?;
    let many = ps.len() > 1;
    for p in &ps {
        let report = model.lemma_g(p)?;
        if many {
            println!("perversity {p}");
        }
        println!("{report}");
    }
    Ok(0)
}

fn parse_map_file(
    path: &str,
    source: &Arc<PerverseModel>,
    target: &Arc<PerverseModel>,
) -> Result<BaseIso, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Model(e.into()))?;
    let mut strata_pairs: Vec<(StratumId, StratumId)> = Vec::new();
    let mut matrix = QMatrix::zeros(source.dim(), target.dim());
    let mut seen = vec![false; target.dim()];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("stratum ") {
            let Some((t, s)) = rest.split_once("->") else {
                return Err(CliError::Model(Error::Parse {
                    line: lineno + 1,
                    msg: "stratum lines are `stratum <target> -> <source>`".into(),
                }));
            };
            // recorded as source -> target for the iso
            strata_pairs.push((StratumId::new(s.trim()), StratumId::new(t.trim())));
            continue;
        }
        let Some((lhs, rhs)) = line.split_once('=') else {
            return Err(CliError::Model(Error::Parse {
                line: lineno + 1,
                msg: format!("expected `<target basis> = <combination>`, got `{line}`"),
            }));
        };
        let j = target.index_of(lhs.trim()).ok_or_else(|| {
            CliError::Model(Error::Parse {
                line: lineno + 1,
                msg: format!("unknown target basis element `{}`", lhs.trim()),
            })
        })?;
        if seen[j] {
            return Err(CliError::Model(Error::Parse {
                line: lineno + 1,
                msg: format!("target basis element `{}` mapped twice", lhs.trim()),
            }));
        }
        seen[j] = true;
        for (i, coeff) in parse_combination(rhs, source)
            .map_err(|msg| CliError::Model(Error::Parse { line: lineno + 1, msg }))?
        {
            matrix.set(i, j, coeff);
        }
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return Err(CliError::Model(Error::Parse {
            line: text.lines().count(),
            msg: format!("target basis element `{}` has no image", target.name_of(j)),
        }));
    }
    BaseIso::new(source.clone(), target.clone(), &strata_pairs, matrix).map_err(CliError::Model)
}

/// Parse "u2 + 2*a1 - 1/3*u0" into (basis index, coefficient) pairs.
fn parse_combination(text: &str, model: &PerverseModel) -> Result<Vec<(usize, Q)>, String> {
    let spaced = text.replace('+', " + ").replace('-', " - ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut out = Vec::new();
    let mut sign = qi(1);
    let mut expect_term = true;
    let mut saw_term = false;
    for tok in tokens {
        match tok {
            "+" | "-" => {
                if expect_term && tok == "-" {
                    sign = -sign;
                    continue;
                }
                if expect_term {
                    return Err("dangling sign".into());
                }
                if tok == "-" {
                    sign = qi(-1);
                }
                expect_term = true;
            }
            term => {
                if !expect_term {
                    return Err(format!("unexpected term `{term}`"));
                }
                let (coeff, name) = match term.split_once('*') {
                    Some((c, n)) => {
                        let c = parse_q(c).ok_or_else(|| format!("bad coefficient `{c}`"))?;
                        (c, n)
                    }
                    None => (qi(1), term),
                };
                let idx = model
                    .index_of(name)
                    .ok_or_else(|| format!("unknown source basis element `{name}`"))?;
                out.push((idx, &sign * &coeff));
                sign = qi(1);
                expect_term = false;
                saw_term = true;
            }
        }
    }
    if expect_term && saw_term {
        return Err("combination ends with a sign".into());
    }
    Ok(out)
}

fn cmd_compare(spec1: &str, spec2: &str, map: &str, sample: &str) -> Result<u8, CliError> {
    let g1 = load(spec1)?;
    let g2 = load(spec2)?;
    let f = if map == "identity" {
        BaseIso::identity(g1.base(), g2.base()).map_err(CliError::Model)?
    } else {
        parse_map_file(map, g1.base(), g2.base())?
    };
    let sample: Option<Vec<Perversity>> = if sample == "default" {
        None
    } else {
        let ps: Result<Vec<Perversity>, CliError> =
            sample.split(';').map(|lit| parse_perversity(&g1, lit.trim())).collect();
        Some(ps?)
    };
    let used_sample = match &sample {
        Some(s) => s.clone(),
        None => default_sample(&g1),
    };
    let verdict = compare_actions(&f, &g1, &g2, sample.as_deref())?;
    match verdict {
        Verdict::NotOptimal { report } => {
            for c in report.strata.iter().filter(|c| !c.ok) {
                println!("not optimal: {} is {} vs {}", c.source, c.source_nature, c.target_nature);
            }
            Ok(3)
        }
        Verdict::NotProportional { witness, obstructions } => {
            println!("optimal but not proportional: {witness}");
            for o in &obstructions {
                println!(
                    "obstruction at {}: IH(X1) dims ({}) vs IH(X2) dims ({})",
                    o.perversity,
                    o.dims_source.iter().map(usize::to_string).collect::<Vec<_>>().join(", "),
                    o.dims_target.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
                );
            }
            Ok(3)
        }
        Verdict::Isomorphic { lambda, gamma, verification } => {
            println!(
                "optimal and proportional: lambda = {}, gamma = {}",
                format_q(&lambda),
                format_combination(g1.base(), gamma.coords())
            );
            println!(
                "sample: {}",
                used_sample.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("; ")
            );
            let ok = |b: bool| if b { "ok" } else { "FAILED" };
            println!(
                "checks: inclusions {}, multiplicative {}, invertible {}, commutes with base map {}, cohomology isomorphism {}",
                ok(verification.inclusion_compatible),
                ok(verification.multiplicative),
                ok(verification.invertible),
                ok(verification.commutes_with_base_map),
                ok(verification.cohomology_isomorphism)
            );
            if verification.pass() {
                println!(
                    "perverse isomorphism constructed and verified; intersection cohomology algebras are isomorphic"
                );
                if verification.homotopy_chain_at_zero {
                    println!("quasi-isomorphism chain realized at the zero perversity");
                }
                Ok(0)
            } else {
                println!("verification FAILED");
                Ok(2)
            }
        }
    }
}
