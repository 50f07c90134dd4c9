//! The `oidkit` command line.  Every verb reads and writes the JSON formats
//! of `oidkit::io`.  Exit codes: 0 success, 1 residuals or failed checks,
//! 2 parse or I/O errors, 3 solver failure within the caps.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use oidkit::chain::{homology_dims, ideal_complex, koszul_complex, verify_complex, Complex};
use oidkit::families::{build_ideal_oid, build_koszul_oid, IdealSpec, KoszulSpec};
use oidkit::io;
use oidkit::morphisms::{check_morphism, construct_morphism, homotopy_step, MorphismError, MorphismResidual};
use oidkit::oid::{rn_bracket, BracketResidual, OidError, OidStructure, ResidualValue, DEFAULT_MAX_ARITY};
use oidkit::pages::{construct_structure, Page, PageError};
use oidkit::polyring::{MonomialOrder, Poly, Ring};

#[derive(Parser, Debug)]
#[command(name = "oidkit", version, about = "Exact Lie infinity-algebroids over polynomial rings")]
struct Cli {
    /// Print a machine-readable JSON report instead of text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Koszul,
    Ideal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Lex,
    Grlex,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an explicit structure (or only its complex)
    Build {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        phi: Option<String>,
        /// semicolon separated generators of the ideal
        #[arg(long)]
        phis: Option<String>,
        #[arg(long, default_value = "x,y,z")]
        vars: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ARITY)]
        max_arity: usize,
        /// write the complex alone
        #[arg(long)]
        complex_only: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check every axiom up to an arity
    Verify {
        file: PathBuf,
        #[arg(long)]
        max_arity: Option<usize>,
    },
    /// Construct brackets on an exact complex by successive lifts
    Construct {
        #[arg(long)]
        complex: PathBuf,
        /// binary bracket on degree -1 pairs, as a structure or a bare table
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ARITY)]
        max_arity: usize,
        #[arg(long, default_value_t = 12)]
        weight_cap: i64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Construct a Taylor morphism into a structure on an exact complex
    Morphism {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 12)]
        weight_cap: i64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Restrict a structure modulo a function preserved by the anchor
    Restrict {
        file: PathBuf,
        #[arg(long)]
        phi: String,
        #[arg(long, value_enum, default_value = "grlex")]
        order: Order,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rescale a structure by a function
    Twist {
        file: PathBuf,
        #[arg(long)]
        chi: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Richardson–Nijenhuis bracket of two brackets of a structure
    Rn {
        file: PathBuf,
        #[arg(long)]
        left: usize,
        #[arg(long)]
        right: usize,
        #[arg(long, default_value_t = 6)]
        cap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Homology ranks per degree and weight
    Homology {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        weight_cap: i64,
        /// fail unless every degree <= -1 is acyclic
        #[arg(long)]
        expect_exact: bool,
    },
    /// Integrate a homotopy from a morphism and check the path stays a morphism
    Homotopy {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        morphism: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long, default_value = "0")]
        start: String,
        #[arg(long, default_value = "1")]
        end: String,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Parse, write and parse again; report whether the canonical form is stable
    Roundtrip {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn io(message: impl Into<String>) -> Exit {
        Exit { code: 2, message: message.into() }
    }
    fn check(message: impl Into<String>) -> Exit {
        Exit { code: 1, message: message.into() }
    }
    fn solver(message: impl Into<String>) -> Exit {
        Exit { code: 3, message: message.into() }
    }
}

impl From<io::IoError> for Exit {
    fn from(e: io::IoError) -> Exit {
        Exit::io(e.to_string())
    }
}

impl From<PageError> for Exit {
    fn from(e: PageError) -> Exit {
        match e {
            PageError::SolverFailed { .. } | PageError::HookLift { .. } => Exit::solver(e.to_string()),
            PageError::Chain(_) | PageError::Oid(_) => Exit::io(e.to_string()),
            PageError::NotExact { .. } | PageError::HookIncompatible { .. } => Exit::check(e.to_string()),
        }
    }
}

impl From<MorphismError> for Exit {
    fn from(e: MorphismError) -> Exit {
        match e {
            MorphismError::Page(p) => p.into(),
            MorphismError::SolverFailed { .. } => Exit::solver(e.to_string()),
            _ => Exit::io(e.to_string()),
        }
    }
}

/// What a verb prints: text lines and the JSON report.
struct Outcome {
    code: i32,
    lines: Vec<String>,
    report: Value,
}

impl Outcome {
    fn ok(lines: Vec<String>, report: Value) -> Outcome {
        Outcome { code: 0, lines, report }
    }
}

fn read_json(path: &Path) -> Result<Value, Exit> {
    let text = fs::read_to_string(path).map_err(|e| Exit::io(format!("{}: {e}", path.display())))?;
    io::parse_text(&text).map_err(|e| Exit::io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Exit> {
    fs::write(path, io::to_text(v)).map_err(|e| Exit::io(format!("{}: {e}", path.display())))
}

fn cert_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".cert.json");
    PathBuf::from(s)
}

fn read_structure(path: &Path) -> Result<OidStructure, Exit> {
    let v = read_json(path)?;
    io::structure_from_json(&v).map_err(|e| Exit::io(format!("{}: {e}", path.display())))
}

/// A complex file, or the complex of a structure file.
fn read_complex(path: &Path) -> Result<Complex, Exit> {
    let v = read_json(path)?;
    let r = match v.get("complex") {
        Some(c) => io::complex_from_json(c, "/complex"),
        None => io::complex_from_json(&v, ""),
    };
    r.map_err(|e| Exit::io(format!("{}: {e}", path.display())))
}

fn residual_json(r: &BracketResidual, s: &OidStructure) -> Value {
    let value = match &r.value {
        ResidualValue::Module(m) => io::modelt_to_json(m, s.basis()),
        ResidualValue::Vector(d) => io::derivation_to_json(d, s.ring()),
    };
    json!({"arity": r.arity, "word": r.word.display(s.basis()), "kind": format!("{:?}", r.kind), "value": value})
}

fn morphism_residual_json(r: &MorphismResidual, source: &OidStructure, target: &OidStructure) -> Value {
    let value = match &r.value {
        ResidualValue::Module(m) => io::modelt_to_json(m, target.basis()),
        ResidualValue::Vector(d) => io::derivation_to_json(d, target.ring()),
    };
    json!({"arity": r.arity, "word": r.word.display(source.basis()), "kind": format!("{:?}", r.kind), "value": value})
}

fn parse_poly(text: &str, ring: &Ring) -> Result<Poly, Exit> {
    Poly::parse(text, ring).map_err(|e| Exit::io(format!("`{text}`: {e}")))
}

fn oid_exit(e: OidError) -> Exit {
    match e {
        OidError::IdealNotInvariant { .. } => Exit::check(e.to_string()),
        _ => Exit::io(e.to_string()),
    }
}

fn verify_report(s: &OidStructure, max_arity: usize) -> Result<Outcome, Exit> {
    let mut residuals = s.verify_axioms(max_arity).map_err(oid_exit)?;
    for v in verify_complex(&s.complex) {
        residuals.push(BracketResidual {
            arity: 1,
            word: oidkit::symwords::SymWord::from_sorted(&[s.basis().lookup(&v.generator).expect("known generator")]),
            kind: oidkit::oid::ResidualKind::Jacobi,
            value: match v.kind {
                oidkit::chain::ViolationKind::DSquared(m) => ResidualValue::Module(m),
                oidkit::chain::ViolationKind::HookOfD(d) => ResidualValue::Vector(d),
            },
        });
    }
    residuals.sort_by(|a, b| (a.arity, &a.word).cmp(&(b.arity, &b.word)));
    residuals.dedup();
    let mut lines: Vec<String> = residuals.iter().map(|r| r.describe(s)).collect();
    lines.push(format!("{} residuals up to arity {max_arity}", residuals.len()));
    let report = json!({
        "max_arity": max_arity,
        "residuals": residuals.iter().map(|r| residual_json(r, s)).collect::<Vec<_>>(),
    });
    Ok(Outcome { code: if residuals.is_empty() { 0 } else { 1 }, lines, report })
}

fn execute(cli: Cli) -> Result<Outcome, Exit> {
    match cli.command {
        Command::Build { family, phi, phis, vars, max_arity, complex_only, output } => {
            let ring = io::parse_vars(&vars)?;
            let s = match family {
                Family::Koszul => {
                    let text = phi.ok_or_else(|| Exit::io("--phi is required for the koszul family"))?;
                    let phi = parse_poly(&text, &ring)?;
                    if complex_only {
                        write_json(&output, &io::complex_to_json(&koszul_complex(&phi)))?;
                        return Ok(Outcome::ok(vec![format!("wrote {}", output.display())], json!({"output": output})));
                    }
                    build_koszul_oid(&KoszulSpec { phi, max_arity })
                }
                Family::Ideal => {
                    let text = phis.ok_or_else(|| Exit::io("--phis is required for the ideal family"))?;
                    let phis = io::parse_poly_list(&text, &ring)?;
                    if phis.is_empty() {
                        return Err(Exit::io("--phis lists no generators"));
                    }
                    if complex_only {
                        write_json(&output, &io::complex_to_json(&ideal_complex(&phis)))?;
                        return Ok(Outcome::ok(vec![format!("wrote {}", output.display())], json!({"output": output})));
                    }
                    build_ideal_oid(&IdealSpec { phis, max_arity })
                }
            };
            write_json(&output, &io::structure_to_json(&s))?;
            let counts: Vec<String> = s.brackets.iter().map(|(k, t)| format!("l_{k}: {} entries", t.len())).collect();
            let mut lines = vec![format!("{} generators", s.basis().len())];
            lines.extend(counts);
            lines.push(format!("wrote {}", output.display()));
            Ok(Outcome::ok(lines, json!({"output": output, "generators": s.basis().len()})))
        }
        Command::Verify { file, max_arity } => {
            let s = read_structure(&file)?;
            let n = max_arity.unwrap_or(s.max_arity_stored);
            verify_report(&s, n)
        }
        Command::Construct { complex, u, max_arity, weight_cap, output } => {
            let c = read_complex(&complex)?;
            let u_table = match u {
                Some(p) => {
                    let v = read_json(&p)?;
                    let t = match v.get("brackets") {
                        Some(b) => b.get("2").cloned().unwrap_or(json!({})),
                        None => v,
                    };
                    Some(io::table_from_json(&t, 2, 1, &c.basis, &c.basis, &c.ring, "")?)
                }
                None => None,
            };
            let (s, report) = construct_structure(&c, u_table.as_ref(), max_arity, weight_cap)?;
            write_json(&output, &io::structure_to_json(&s))?;
            let page = Page::endo(&s.complex);
            let certs: Vec<Value> = report.steps.iter().map(|(n, r)| io::report_to_json(*n, r, &page)).collect();
            write_json(&cert_path(&output), &json!({"kind": "certificate", "steps": certs}))?;
            let residuals = s.verify_axioms(max_arity.max(1)).map_err(oid_exit)?;
            let mut lines: Vec<String> = s.brackets.iter().map(|(k, t)| format!("l_{k}: {} entries", t.len())).collect();
            lines.push(format!("{} residuals up to arity {max_arity}", residuals.len()));
            lines.push(format!("wrote {}", output.display()));
            let code = if residuals.is_empty() { 0 } else { 1 };
            Ok(Outcome { code, lines, report: json!({"output": output, "residuals": residuals.len()}) })
        }
        Command::Morphism { from, to, max_arity, weight_cap, output } => {
            let source = read_structure(&from)?;
            let target = read_structure(&to)?;
            let (phi, reports) = construct_morphism(&source, &target, max_arity, weight_cap)?;
            write_json(&output, &io::morphism_to_json(&phi, source.basis(), target.basis(), source.ring()))?;
            let page = Page::new(&source.complex, &target.complex);
            let certs: Vec<Value> = reports.iter().enumerate().map(|(i, r)| io::report_to_json(i + 1, r, &page)).collect();
            write_json(&cert_path(&output), &json!({"kind": "certificate", "steps": certs}))?;
            let residuals = check_morphism(&phi, &source, &target, max_arity);
            let mut lines: Vec<String> = phi.coeffs.iter().map(|(k, t)| format!("Phi^({k}): {} entries", t.len())).collect();
            lines.push(format!("{} residuals up to arity {max_arity}", residuals.len()));
            lines.push(format!("wrote {}", output.display()));
            let report = json!({
                "output": output,
                "residuals": residuals.iter().map(|r| morphism_residual_json(r, &source, &target)).collect::<Vec<_>>(),
            });
            Ok(Outcome { code: if residuals.is_empty() { 0 } else { 1 }, lines, report })
        }
        Command::Restrict { file, phi, order, output } => {
            let s = read_structure(&file)?;
            let f = parse_poly(&phi, s.ring())?;
            let order = match order {
                Order::Lex => MonomialOrder::lex(s.ring()),
                Order::Grlex => MonomialOrder::grlex(s.ring()),
            };
            let r = s.restrict_mod(&f, &order).map_err(oid_exit)?;
            write_json(&output, &io::structure_to_json(&r))?;
            Ok(Outcome::ok(vec![format!("wrote {}", output.display())], json!({"output": output})))
        }
        Command::Twist { file, chi, output } => {
            let s = read_structure(&file)?;
            let chi = parse_poly(&chi, s.ring())?;
            let t = s.chi_twist(&chi).map_err(oid_exit)?;
            write_json(&output, &io::structure_to_json(&t))?;
            Ok(Outcome::ok(vec![format!("wrote {}", output.display())], json!({"output": output})))
        }
        Command::Rn { file, left, right, cap, output } => {
            let s = read_structure(&file)?;
            let (a, b) = (s.bracket_table(left), s.bracket_table(right));
            let t = rn_bracket(s.basis(), &a, &b, Some(&s.rho), cap).map_err(|e| Exit::io(e.to_string()))?;
            let v = json!({"arity": t.arity, "degree": t.degree, "entries": io::table_to_json(&t, s.basis(), s.basis())});
            if let Some(p) = &output {
                write_json(p, &v)?;
            }
            let mut lines: Vec<String> =
                t.iter().map(|(w, m)| format!("[{}] -> {}", w.display(s.basis()), m.display(s.basis()))).collect();
            lines.push(format!("[l_{left}, l_{right}]: {} nonzero entries", t.len()));
            Ok(Outcome::ok(lines, v))
        }
        Command::Homology { file, weight_cap, expect_exact } => {
            let c = read_complex(&file)?;
            let dims = homology_dims(&c, weight_cap).map_err(|e| Exit::io(e.to_string()))?;
            let nonzero: Vec<((i32, i64), usize)> = dims.iter().filter(|(_, &r)| r > 0).map(|(&k, &r)| (k, r)).collect();
            let mut lines: Vec<String> =
                nonzero.iter().map(|((d, w), r)| format!("H_{d} weight {w}: rank {r}")).collect();
            lines.push(format!("{} nonzero slices up to weight {weight_cap}", nonzero.len()));
            let acyclic = nonzero.iter().all(|((d, _), _)| *d > -1);
            let report = json!({
                "weight_cap": weight_cap,
                "nonzero": nonzero.iter().map(|((d, w), r)| json!({"degree": d, "weight": w, "rank": r})).collect::<Vec<_>>(),
            });
            Ok(Outcome { code: if expect_exact && !acyclic { 1 } else { 0 }, lines, report })
        }
        Command::Homotopy { from, to, morphism, h, start, end, max_arity, output } => {
            let source = read_structure(&from)?;
            let target = read_structure(&to)?;
            let (sb, tb, ring) = (source.basis(), target.basis(), source.ring());
            let phi = io::morphism_from_json(&read_json(&morphism)?, sb, tb, ring)?;
            let hh = io::coderivation_from_json(&read_json(&h)?, sb, tb, ring)?;
            let a = io::parse_rational(&start).ok_or_else(|| Exit::io(format!("bad rational `{start}`")))?;
            let b = io::parse_rational(&end).ok_or_else(|| Exit::io(format!("bad rational `{end}`")))?;
            let trace = homotopy_step(&phi, &hh, &source, &target, a, b, max_arity)?;
            let st = source.embed(&trace.ring).map_err(oid_exit)?;
            let tt = target.embed(&trace.ring).map_err(oid_exit)?;
            let residuals = check_morphism(&trace.phi, &st, &tt, max_arity);
            let endpoint = trace.endpoint(ring).map_err(|e| Exit::io(e.to_string()))?;
            let v = json!({
                "kind": "homotopy",
                "time": trace.ring.vars()[trace.t],
                "start": start,
                "end": end,
                "path": io::morphism_to_json(&trace.phi, sb, tb, &trace.ring),
                "endpoint": io::morphism_to_json(&endpoint, sb, tb, ring),
            });
            write_json(&output, &v)?;
            let lines = vec![
                format!("{} residuals of the path up to arity {max_arity}", residuals.len()),
                format!("wrote {}", output.display()),
            ];
            let report = json!({
                "output": output,
                "residuals": residuals.iter().map(|r| morphism_residual_json(r, &st, &tt)).collect::<Vec<_>>(),
            });
            Ok(Outcome { code: if residuals.is_empty() { 0 } else { 1 }, lines, report })
        }
        Command::Roundtrip { file, output } => {
            let v = read_json(&file)?;
            let first = canonical(&v)?;
            let second = canonical(&first)?;
            if let Some(p) = &output {
                write_json(p, &first)?;
            }
            let stable = first == second;
            let changed = first != v;
            let lines = vec![format!("stable: {stable}, normalized on write: {changed}")];
            Ok(Outcome { code: if stable { 0 } else { 1 }, lines, report: json!({"stable": stable, "changed": changed}) })
        }
    }
}

/// Parse a document of any kind and write it back canonically.
fn canonical(v: &Value) -> Result<Value, Exit> {
    let kind = v.get("kind").and_then(Value::as_str);
    let kind = kind.unwrap_or(if v.get("complex").is_some() {
        "structure"
    } else if v.get("coeffs").is_some() {
        "morphism"
    } else {
        "complex"
    });
    match kind {
        "structure" => Ok(io::structure_to_json(&io::structure_from_json(v)?)),
        "complex" => Ok(io::complex_to_json(&io::complex_from_json(v, "")?)),
        "morphism" => {
            let (ring, s, t) = io::recorded_bases(v)?;
            Ok(io::morphism_to_json(&io::morphism_from_json(v, &s, &t, &ring)?, &s, &t, &ring))
        }
        "coderivation" => {
            let (ring, s, t) = io::recorded_bases(v)?;
            Ok(io::coderivation_to_json(&io::coderivation_from_json(v, &s, &t, &ring)?, &s, &t, &ring))
        }
        other => Err(Exit::io(format!("/kind: cannot round-trip documents of kind `{other}`"))),
    }
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { 0 } else { 2 };
        }
    };
    let json_mode = cli.json;
    match execute(cli) {
        Ok(out) => {
            if json_mode {
                let mut report = out.report;
                report["exit_code"] = json!(out.code);
                print!("{}", io::to_text(&report));
            } else {
                for l in &out.lines {
                    println!("{l}");
                }
            }
            out.code
        }
        Err(e) => {
            if json_mode {
                print!("{}", io::to_text(&json!({"error": e.message, "exit_code": e.code})));
            }
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
