//! Command-line verbs and their JSON reports.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use demushkin_core::demushkin::{
    classify, cor_q2_parameters, double, is_demushkin, limit_status, standard_character, standard_family,
    standard_relation, subgroup_generators_from_index, DemushkinInvariants,
};
use demushkin_core::gog::{eliminate_tree_letters, fundamental_presentation};
use demushkin_core::magnus::Torsion;
use demushkin_core::matrixcheck::{has_square_root, lyndon_witness_mod, sonn_bound, subgroup_closure, UnitriMatrix};
use demushkin_core::orientation::{character_image, solve_orientation, twisted_fox_all, Character};
use demushkin_core::padic::{Exponent, PAdicRing, UnitKind, UnitSubgroup};
use demushkin_core::words::Presentation;
use demushkin_core::{Error, DEFAULT_PRECISION};
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::dsl::{fresh_name, parse_presentation, render_presentation, render_word, NamedPresentation};
use crate::gogfile;

#[derive(Debug, Parser)]
#[command(name = "demushkin", version, about = "Computations with one-relator pro-p presentations")]
pub struct Cli {
    /// p-adic precision K: residues are kept modulo p^K.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants (n, q, U) and the canonical presentation.
    Classify { presentation: String },
    /// Cup-product matrix and the Demushkin test.
    IsDemushkin { presentation: String },
    /// The standard relation r1(n, q, U).
    Standard(InvariantArgs),
    /// The double <x, x~ | r r~^-1>.
    Double { presentation: String },
    /// The orientation character and its image.
    Orientation { presentation: String },
    /// Generator counts of finite-index subgroups.
    #[command(group(ArgGroup::new("mode").required(true).args(["cor_q2", "index"])))]
    Euler {
        /// Even n = 2d with d odd: solve d - 1 = 2^s (2l - 1).
        #[arg(long)]
        cor_q2: Option<u64>,
        /// Index of the subgroup; needs --n-h.
        #[arg(long, requires = "n_h")]
        index: Option<u64>,
        #[arg(long)]
        n_h: Option<u64>,
    },
    /// Limit-group and residual-freeness status.
    LimitStatus(InvariantArgs),
    /// Unitriangular matrix checks for a^2 b^2 c^2.
    Lyndon {
        #[arg(long, default_value_t = 4)]
        modulus: u64,
    },
    /// Fundamental group presentation of a graph of groups (JSON file).
    Gog {
        file: PathBuf,
        /// Keep the killed tree letters and their relators.
        #[arg(long)]
        keep_tree_letters: bool,
    },
    /// Batch checks over the standard family.
    #[command(group(ArgGroup::new("mode").required(true).args(["doubles", "standard"])))]
    Sweep {
        #[arg(long)]
        doubles: bool,
        #[arg(long)]
        standard: bool,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: u64,
    /// 0 or a power of p.
    #[arg(long)]
    pub q: String,
    /// One of 1, 1+q, <-1>, <-1+2^f>, <-1,1+2^f> (f an integer or inf).
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
}

/// A failed command: a machine-readable kind, a message and an exit code.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub code: i32,
}

impl Failure {
    fn usage(kind: &'static str, message: impl Into<String>) -> Failure {
        Failure { kind, message: message.into(), code: 2 }
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::GeneratorOutOfRange { .. } => "generator_out_of_range",
        Error::NotPrime(_) => "not_prime",
        Error::MultiRelator(_) => "multi_relator",
        Error::NonMinimal => "non_minimal",
        Error::NonUnit => "non_unit",
        Error::PrecisionOutOfRange { .. } => "precision_out_of_range",
        Error::RingMismatch => "ring_mismatch",
        Error::InsufficientPrecision => "insufficient_precision",
        Error::NotProP => "not_pro_p",
        Error::NotDemushkin => "not_demushkin",
        Error::NoSolution => "no_solution",
        Error::MultipleSolutions(_) => "multiple_solutions",
        Error::Inconsistent(_) => "inconsistent",
        Error::BadInput(_) => "bad_input",
        Error::UndefinedRelation => "undefined_relation",
        Error::NotSpanningTree => "not_spanning_tree",
        Error::BoundaryLength { .. } => "boundary_length",
        Error::ClosureTooLarge(_) => "closure_too_large",
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure { kind: error_kind(&e), message: e.to_string(), code: 1 }
    }
}

struct Outcome {
    result: Value,
    citations: Vec<&'static str>,
    /// Exit code for a completed run; a sweep with failures returns 1.
    code: i32,
}

fn done(result: Value, citations: Vec<&'static str>) -> Result<Outcome, Failure> {
    Ok(Outcome { result, citations, code: 0 })
}

fn read_presentation(arg: &str) -> Result<NamedPresentation, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::usage("io", format!("{}: {}", path, e)))?,
        None => arg.to_string(),
    };
    parse_presentation(text.trim()).map_err(|e| {
        let kind = match e {
            crate::dsl::DslError::UnknownGenerator { .. } => "unknown_generator",
            crate::dsl::DslError::Invalid(_) => "invalid_presentation",
            crate::dsl::DslError::Parse { .. } => "parse_error",
        };
        Failure::usage(kind, e.to_string())
    })
}

pub fn parse_torsion(text: &str, p: u64) -> Result<Torsion, Failure> {
    let bad = || Failure::usage("bad_argument", format!("q = {} is not 0 or a positive power of {}", text, p));
    let q: BigUint = text.trim().parse().map_err(|_| bad())?;
    if q == BigUint::from(0u32) {
        return Ok(Torsion::zero(p));
    }
    let mut f = 0u32;
    let mut r = q;
    let pb = BigUint::from(p);
    while &r % &pb == BigUint::from(0u32) {
        r /= &pb;
        f += 1;
    }
    if r != BigUint::from(1u32) || f == 0 {
        return Err(bad());
    }
    Ok(Torsion::power(p, f))
}

fn parse_exponent(text: &str) -> Option<Exponent> {
    if text == "inf" {
        return Some(Exponent::Infinite);
    }
    text.parse().ok().map(Exponent::Finite)
}

/// Parses the unit-subgroup syntax of `--u`; `1+q` takes its level from q.
pub fn parse_units(text: &str, p: u64, q: Torsion) -> Result<UnitSubgroup, Failure> {
    let bad = |why: &str| Failure::usage("bad_argument", format!("U = {}: {}", text, why));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let kind = if t == "1" || t == "{1}" {
        UnitKind::Trivial
    } else if t == "1+q" {
        match q.exponent() {
            Some(f) => UnitKind::Level(f),
            None => return Err(bad("1+q needs q > 0")),
        }
    } else if t == "<-1>" {
        UnitKind::NegSplit(Exponent::Infinite)
    } else if let Some(f) = t.strip_prefix("<-1+2^").and_then(|r| r.strip_suffix('>')) {
        match parse_exponent(f).ok_or_else(|| bad("bad exponent"))? {
            Exponent::Finite(f) => UnitKind::NegCyclic(f),
            Exponent::Infinite => UnitKind::NegSplit(Exponent::Infinite),
        }
    } else if let Some(f) = t.strip_prefix("<-1,1+2^").and_then(|r| r.strip_suffix('>')) {
        UnitKind::NegSplit(parse_exponent(f).ok_or_else(|| bad("bad exponent"))?)
    } else {
        return Err(bad("expected 1, 1+q, <-1>, <-1+2^f> or <-1,1+2^f>"));
    };
    UnitSubgroup::new(p, kind).map_err(|e| bad(&e.to_string()))
}

fn invariants_input(args: &InvariantArgs) -> Value {
    json!({"n": args.n, "p": args.p, "q": args.q, "U": args.u})
}

fn character_json(chi: &Character, names: &[String]) -> Value {
    Value::Array(
        chi.values()
            .iter()
            .zip(names)
            .map(|(v, n)| json!({"generator": n, "value": v.mod_string()}))
            .collect(),
    )
}

fn invariants_json(inv: &DemushkinInvariants) -> Value {
    json!({"n": inv.generators(), "q": inv.torsion().to_string(), "U": inv.units().to_string()})
}

fn matrix_json(m: &UnitriMatrix) -> Value {
    json!(m.entries())
}

fn std_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{}", i)).collect()
}

/// Names for the double: `x1..x2n` when the input uses `x1..xn`, and
/// `<name>t` otherwise.
fn double_names(names: &[String]) -> Vec<String> {
    if names == std_names(names.len()).as_slice() {
        return std_names(2 * names.len());
    }
    let mut out = names.to_vec();
    for n in names {
        let fresh = fresh_name(&format!("{}t", n), &out);
        out.push(fresh);
    }
    out
}

fn run_classify(np: &NamedPresentation, k: u32) -> Result<Outcome, Failure> {
    let c = classify(&np.presentation, k)?;
    let r = np.presentation.relator()?;
    let residuals_zero = twisted_fox_all(r, &c.character).iter().all(|d| d.is_zero());
    let mut result = invariants_json(&c.invariants);
    let n = c.invariants.generators();
    result["character"] = character_json(&c.character, &np.names);
    result["canonical"] = json!(render_presentation(&c.canonical, &std_names(n)));
    result["residuals_zero"] = json!(residuals_zero);
    result["relator_character"] = json!(c.character.evaluate(r).mod_string());
    done(result, vec!["classification", "cup-product-criterion"])
}

fn run_is_demushkin(np: &NamedPresentation, k: u32) -> Result<Outcome, Failure> {
    let t = is_demushkin(&np.presentation, k)?;
    let cup: Vec<Vec<String>> = t.cup.entries.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
    done(
        json!({
            "is_demushkin": t.is_demushkin,
            "n": t.generators,
            "q": t.torsion.to_string(),
            "cup_matrix": cup,
            "modulus": t.cup.modulus.to_string(),
            "determinant": t.cup.determinant().to_string(),
        }),
        vec!["cup-product-criterion"],
    )
}

fn run_standard(args: &InvariantArgs) -> Result<Outcome, Failure> {
    let q = parse_torsion(&args.q, args.p)?;
    let u = parse_units(&args.u, args.p, q)?;
    let names = std_names(args.n);
    let result = match standard_relation(args.n, q, u) {
        Some(r) => {
            let pres = Presentation::one_relator(args.p, args.n, r.clone())?;
            json!({"defined": true, "relator": render_word(&r, &names),
                   "presentation": render_presentation(&pres, &names)})
        }
        None => json!({"defined": false, "relator": null, "presentation": null}),
    };
    done(result, vec!["standard-relation"])
}

fn run_double(np: &NamedPresentation) -> Result<Outcome, Failure> {
    let d = double(&np.presentation)?;
    let names = double_names(&np.names);
    done(json!({"presentation": render_presentation(&d, &names), "generators": names}), vec![])
}

fn run_orientation(np: &NamedPresentation, k: u32) -> Result<Outcome, Failure> {
    let chi = solve_orientation(&np.presentation, k)?;
    let r = np.presentation.relator()?;
    let residuals: Vec<String> = twisted_fox_all(r, &chi).iter().map(|d| d.mod_string()).collect();
    done(
        json!({
            "character": character_json(&chi, &np.names),
            "image": character_image(&chi)?.to_string(),
            "residuals": residuals,
            "relator_character": chi.evaluate(r).mod_string(),
        }),
        vec!["orientation-character"],
    )
}

fn run_euler(cor_q2: Option<u64>, index: Option<u64>, n_h: Option<u64>) -> Result<Outcome, Failure> {
    if let Some(n) = cor_q2 {
        let c = cor_q2_parameters(n)?;
        let index = 1u64 << c.s;
        let m = subgroup_generators_from_index(c.auxiliary_generators, index)?;
        return done(
            json!({"n": n, "d": n / 2, "s": c.s, "l": c.l, "auxiliary_generators": c.auxiliary_generators,
                   "index": index, "m": m, "consistent": m == n}),
            vec!["q2-euler-count"],
        );
    }
    let (Some(index), Some(n_h)) = (index, n_h) else {
        return Err(Failure::usage("usage", "--index needs --n-h"));
    };
    done(json!({"n_h": n_h, "index": index, "m": subgroup_generators_from_index(n_h, index)?}), vec!["euler-characteristic"])
}

fn run_limit_status(args: &InvariantArgs) -> Result<Outcome, Failure> {
    let q = parse_torsion(&args.q, args.p)?;
    let u = parse_units(&args.u, args.p, q)?;
    let inv = DemushkinInvariants::new(args.n, q, u)?;
    let st = limit_status(&inv);
    done(
        json!({
            "is_limit": st.is_limit.to_string(),
            "residually_free": st.residually_free.to_string(),
            "justification": st.justification,
            "note": st.note,
        }),
        vec![st.justification],
    )
}

fn run_lyndon(modulus: u64) -> Result<Outcome, Failure> {
    let w = lyndon_witness_mod(modulus)?;
    let h = subgroup_closure(&[w.a, w.b])?;
    let a2b2 = w.a.pow(2).mul(&w.b.pow(2))?;
    done(
        json!({
            "modulus": modulus,
            "A": matrix_json(&w.a),
            "B": matrix_json(&w.b),
            "C": matrix_json(&w.c),
            "product": matrix_json(&w.product),
            "product_is_identity": w.is_identity,
            "closure_size": h.len(),
            "cyclic_closure_size": subgroup_closure(&[w.a])?.len(),
            "square_root_exists": has_square_root(&a2b2, &h),
            "sonn_bound_3_2": sonn_bound(3, 2),
        }),
        vec!["lyndon-witness", "free-quotient-bound"],
    )
}

fn run_gog(file: &PathBuf, keep: bool) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure::usage("io", format!("{}: {}", file.display(), e)))?;
    let loaded = gogfile::load(&text).map_err(|e| match e {
        gogfile::GogFileError::Core(e) => Failure::from(e),
        other => Failure::usage("bad_graph_file", other.to_string()),
    })?;
    let full = fundamental_presentation(&loaded.gog, &loaded.tree)?;
    let (pres, names) = if keep {
        (full, loaded.names.clone())
    } else {
        let killed: Vec<usize> = loaded.tree.iter().map(|&e| loaded.gog.edge_letter(e).0).collect();
        let names = loaded.names.iter().enumerate().filter(|(i, _)| !killed.contains(i)).map(|(_, n)| n.clone()).collect();
        (eliminate_tree_letters(&loaded.gog, &loaded.tree, &full)?, names)
    };
    done(
        json!({
            "presentation": render_presentation(&pres, &names),
            "generators": names,
            "relator_count": pres.relators().len(),
            "tree_edges": loaded.tree.iter().collect::<Vec<_>>(),
        }),
        vec![],
    )
}

fn sweep_row(inv: &DemushkinInvariants, k: u32, doubles: bool) -> Value {
    let n = inv.generators();
    let base = Presentation::one_relator(inv.prime(), n, inv.standard_relation().expect("family is defined"))
        .expect("standard relation is valid");
    let mut row = invariants_json(inv);
    row["p"] = json!(inv.prime());
    let target = if doubles { double(&base).expect("one relator") } else { base };
    let expected_n = if doubles { 2 * n } else { n };
    match classify(&target, k) {
        Ok(c) => {
            let got = c.invariants;
            let matches = got.generators() == expected_n && got.torsion() == inv.torsion() && got.units() == inv.units();
            let closed = PAdicRing::new(inv.prime(), k).and_then(|ring| standard_character(inv, ring));
            let character_ok = closed.is_ok_and(|chi| {
                let mut want = chi.values().to_vec();
                if doubles {
                    want.extend_from_slice(chi.values());
                }
                c.character.values() == want.as_slice()
            });
            row["found"] = invariants_json(&got);
            row["character_matches"] = json!(character_ok);
            row["status"] = json!(if matches && character_ok { "verified" } else { "failed" });
        }
        Err(e) => {
            row["error"] = json!(e.to_string());
            row["status"] = json!("failed");
        }
    }
    row
}

fn run_sweep(doubles: bool, max_n: usize, k: u32) -> Result<Outcome, Failure> {
    let rows: Vec<Value> = standard_family(max_n).iter().map(|inv| sweep_row(inv, k, doubles)).collect();
    let failed = rows.iter().filter(|r| r["status"] != "verified").count();
    let citation = if doubles { "double-invariants" } else { "classification" };
    Ok(Outcome {
        result: json!({"mode": if doubles { "doubles" } else { "standard" }, "cases": rows.len(),
                       "failed": failed, "rows": rows}),
        citations: vec![citation],
        code: if failed == 0 { 0 } else { 1 },
    })
}

fn verb(cmd: &Command) -> &'static str {
    match cmd {
        Command::Classify { .. } => "classify",
        Command::IsDemushkin { .. } => "is-demushkin",
        Command::Standard(_) => "standard",
        Command::Double { .. } => "double",
        Command::Orientation { .. } => "orientation",
        Command::Euler { .. } => "euler",
        Command::LimitStatus(_) => "limit-status",
        Command::Lyndon { .. } => "lyndon",
        Command::Gog { .. } => "gog",
        Command::Sweep { .. } => "sweep",
    }
}

fn input_echo(cli: &Cli) -> Value {
    let k = cli.precision;
    match &cli.command {
        Command::Classify { presentation }
        | Command::IsDemushkin { presentation }
        | Command::Double { presentation }
        | Command::Orientation { presentation } => json!({"presentation": presentation, "precision": k}),
        Command::Standard(a) | Command::LimitStatus(a) => invariants_input(a),
        Command::Euler { cor_q2, index, n_h } => json!({"cor_q2": cor_q2, "index": index, "n_h": n_h}),
        Command::Lyndon { modulus } => json!({"modulus": modulus}),
        Command::Gog { file, keep_tree_letters } => {
            json!({"file": file.display().to_string(), "keep_tree_letters": keep_tree_letters})
        }
        Command::Sweep { doubles, max_n, .. } => {
            json!({"mode": if *doubles { "doubles" } else { "standard" }, "max_n": max_n, "precision": k})
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let k = cli.precision;
    match &cli.command {
        Command::Classify { presentation } => run_classify(&read_presentation(presentation)?, k),
        Command::IsDemushkin { presentation } => run_is_demushkin(&read_presentation(presentation)?, k),
        Command::Standard(a) => run_standard(a),
        Command::Double { presentation } => run_double(&read_presentation(presentation)?),
        Command::Orientation { presentation } => run_orientation(&read_presentation(presentation)?, k),
        Command::Euler { cor_q2, index, n_h } => run_euler(*cor_q2, *index, *n_h),
        Command::LimitStatus(a) => run_limit_status(a),
        Command::Lyndon { modulus } => run_lyndon(*modulus),
        Command::Gog { file, keep_tree_letters } => run_gog(file, *keep_tree_letters),
        Command::Sweep { doubles, max_n, .. } => run_sweep(*doubles, *max_n, k),
    }
}

/// Runs a parsed command, returning the report and exit code.
pub fn execute(cli: &Cli) -> (Value, i32) {
    let mut report = json!({"verb": verb(&cli.command), "input": input_echo(cli)});
    let code = match dispatch(cli) {
        Ok(out) => {
            report["outcome"] = json!("ok");
            report["result"] = out.result;
            report["citations"] = json!(out.citations);
            out.code
        }
        Err(f) => {
            report["outcome"] = json!("error");
            report["error"] = json!({"kind": f.kind, "message": f.message});
            report["citations"] = json!([]);
            f.code
        }
    };
    (report, code)
}

/// Entry point: parses `args`, writes the JSON report to `out` and
/// diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e);
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            let report = json!({"verb": null, "outcome": "error", "input": null, "citations": [],
                                "error": {"kind": "usage", "message": e.kind().to_string()}});
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json"));
            return 2;
        }
    };
    let (report, code) = execute(&cli);
    if code != 0 {
        let _ = writeln!(err, "{}", report["error"]["message"].as_str().unwrap_or("sweep reported failures"));
    }
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json"));
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_syntax() {
        let q2 = Torsion::power(2, 1);
        assert_eq!(parse_units("<-1>", 2, q2).unwrap(), UnitSubgroup::minus_one());
        assert_eq!(parse_units("<-1+2^3>", 2, q2).unwrap().kind(), UnitKind::NegCyclic(3));
        assert_eq!(parse_units("<-1, 1+2^inf>", 2, q2).unwrap(), UnitSubgroup::minus_one());
        assert_eq!(parse_units("<-1,1+2^2>", 2, q2).unwrap().kind(), UnitKind::NegSplit(Exponent::Finite(2)));
        assert_eq!(parse_units("1+q", 3, Torsion::power(3, 2)).unwrap().kind(), UnitKind::Level(2));
        assert_eq!(parse_units("1", 5, Torsion::zero(5)).unwrap().kind(), UnitKind::Trivial);
        assert!(parse_units("1+q", 3, Torsion::zero(3)).is_err());
        assert!(parse_units("<-1>", 3, Torsion::zero(3)).is_err());
        assert!(parse_units("<1>", 2, q2).is_err());
    }

    #[test]
    fn torsion_syntax() {
        assert_eq!(parse_torsion("0", 3).unwrap(), Torsion::zero(3));
        assert_eq!(parse_torsion("27", 3).unwrap(), Torsion::power(3, 3));
        assert!(parse_torsion("6", 3).is_err());
        assert!(parse_torsion("1", 3).is_err());
        assert!(parse_torsion("-3", 3).is_err());
    }

    #[test]
    fn double_naming() {
        assert_eq!(double_names(&std_names(2)), std_names(4));
        let names: Vec<String> = ["a", "b", "at"].iter().map(|s| s.to_string()).collect();
        assert_eq!(double_names(&names), ["a", "b", "at", "at2", "bt", "att"]);
    }
}
