//! Command-line surface: reduce an instance, transport elements and
//! potentials, validate documents, and run the self-test suites.
//!
//! Exit codes: 0 on success, 1 on an internal consistency failure (a law the
//! theory guarantees did not hold at runtime, including round-trip and
//! self-test failures), 2 on input validation failure. Validation errors are
//! emitted as one-line JSON objects on stderr so scripts can parse them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use moret::error::Error;
use moret::morita::{build_qg, QGQuiver};
use moret::quiver::{load_instance_str, Instance};
use moret::selftest::{embedded_fixtures, embedded_golden, run_selftest};
use moret::skew::{make_e_tilde, project, SkewElement, SkewKey};
use moret::transport::{
    fast_pairing_available, transport, transport_potential, verify_roundtrip, PairingMode,
};
use moret::CycNumber;

#[derive(Parser)]
#[command(
    name = "moret",
    version,
    about = "Exact Morita reduction of skew group algebras of quivers",
    long_about = "Computes the reduced quiver Q_G of a quiver with a finite group action and \
                  rewrites corner elements and invariant potentials as exact linear \
                  combinations of reduced paths. Set MORET_WORKERS to parallelize pairing \
                  computations."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the reduced quiver Q_G of an instance document.
    Reduce {
        /// Instance document (JSON).
        instance: PathBuf,
        /// Also print the quiver in DOT format.
        #[arg(long)]
        dot: bool,
        /// Print the quiver as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Decompose the instance potential, or a supplied corner element, as a
    /// linear combination of reduced paths.
    Transport {
        /// Instance document (JSON).
        instance: PathBuf,
        /// Element document (JSON); when omitted the instance potential is
        /// transported.
        #[arg(long)]
        element: Option<PathBuf>,
        /// Project the supplied element onto the corner ẽ·(kQ∗G)·ẽ first.
        #[arg(long)]
        project: bool,
        /// Use the combinatorial pairing (falls back to the general one when
        /// the instance is not monomial with one-dimensional modules).
        #[arg(long, conflicts_with_all = ["slow", "both"])]
        fast: bool,
        /// Use the general pairing.
        #[arg(long, conflicts_with = "both")]
        slow: bool,
        /// Run both pairings and fail on any disagreement.
        #[arg(long)]
        both: bool,
        /// Skip the round-trip verification.
        #[arg(long)]
        no_verify: bool,
        /// Print the combination as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Validate an instance document: schema, group table, actions,
    /// representations, and the potential when present.
    Verify {
        /// Instance document (JSON).
        instance: PathBuf,
    },
    /// Run the identity suites against the shipped fixtures, or against all
    /// instance documents in a directory.
    Selftest {
        /// Directory of instance documents; its golden/ subdirectory may hold
        /// golden files. Defaults to the fixtures shipped in the binary.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Reduce { instance, dot, json } => cmd_reduce(&instance, dot, json),
        Command::Transport {
            instance,
            element,
            project,
            fast,
            slow,
            both,
            no_verify,
            json,
        } => cmd_transport(
            &instance,
            element.as_deref(),
            project,
            mode_of(fast, slow, both),
            fast,
            no_verify,
            json,
        ),
        Command::Verify { instance } => cmd_verify(&instance),
        Command::Selftest { fixtures } => cmd_selftest(fixtures.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let kind = match &e {
                Error::Internal(_) => "internal",
                Error::Io(_) => "io",
                Error::Json(_) => "json",
                _ => "validation",
            };
            let obj = serde_json::json!({"error": {"kind": kind, "message": e.to_string()}});
            eprintln!("{obj}");
            if matches!(e, Error::Internal(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

/// Pairing mode from the three mutually exclusive flags; the default picks
/// the combinatorial algorithm exactly when it applies.
fn mode_of(fast: bool, slow: bool, both: bool) -> Option<PairingMode> {
    if both {
        Some(PairingMode::Both)
    } else if slow {
        Some(PairingMode::Slow)
    } else if fast {
        Some(PairingMode::Fast)
    } else {
        None
    }
}

fn load(path: &Path) -> Result<Instance, Error> {
    let text = std::fs::read_to_string(path)?;
    load_instance_str(&text)
}

fn cmd_reduce(path: &Path, dot: bool, json: bool) -> Result<ExitCode, Error> {
    let inst = load(path)?;
    let qg = build_qg(&inst)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&qg.to_json())?);
    } else {
        print!("{}", describe_quiver(&qg));
    }
    if dot {
        print!("{}", qg.to_dot());
    }
    Ok(ExitCode::SUCCESS)
}

fn describe_quiver(qg: &QGQuiver) -> String {
    let mut out = format!("{} vertices, {} arrows\n", qg.num_vertices(), qg.num_arrows());
    for v in &qg.vertices {
        out.push_str(&format!("vertex {}\n", v.label));
    }
    for (s, sv) in qg.vertices.iter().enumerate() {
        for (t, tv) in qg.vertices.iter().enumerate() {
            let count = qg
                .arrows
                .iter()
                .filter(|a| a.source == s && a.target == t)
                .count();
            if count > 0 {
                out.push_str(&format!(
                    "multiplicity {} -> {}: {count}\n",
                    sv.label, tv.label
                ));
            }
        }
    }
    for a in &qg.arrows {
        out.push_str(&format!("arrow {}\n", a.label));
    }
    out
}

/// Element documents list ambient terms: start vertex, arrow labels in walk
/// order, a group element, and a scalar coefficient.
fn parse_element(text: &str, inst: &Instance) -> Result<SkewElement, Error> {
    let doc: Value = serde_json::from_str(text)?;
    let terms = doc["terms"]
        .as_array()
        .ok_or_else(|| Error::Schema("element document needs a terms array".into()))?;
    let mut out = SkewElement::zero();
    for (i, term) in terms.iter().enumerate() {
        let start = term["start"]
            .as_u64()
            .ok_or_else(|| Error::Schema(format!("term {i}: start must be a vertex id")))?
            as usize;
        if start >= inst.quiver.num_vertices {
            return Err(Error::Schema(format!(
                "term {i}: start vertex {start} is out of range"
            )));
        }
        let labels = term["arrows"]
            .as_array()
            .ok_or_else(|| Error::Schema(format!("term {i}: arrows must be an array")))?;
        let mut arrows = Vec::with_capacity(labels.len());
        let mut at = start;
        for l in labels {
            let label = l
                .as_str()
                .ok_or_else(|| Error::Schema(format!("term {i}: arrow labels are strings")))?;
            let a = inst
                .quiver
                .index_of_label(label)
                .ok_or_else(|| Error::Schema(format!("term {i}: unknown arrow {label}")))?;
            if inst.quiver.arrows[a].source != at {
                return Err(Error::Schema(format!(
                    "term {i}: arrow {label} does not start at vertex {at}"
                )));
            }
            at = inst.quiver.arrows[a].target;
            arrows.push(a);
        }
        let g = term["g"]
            .as_u64()
            .ok_or_else(|| Error::Schema(format!("term {i}: g must be a group element index")))?
            as usize;
        if g >= inst.group.order() {
            return Err(Error::Schema(format!(
                "term {i}: group element {g} is out of range"
            )));
        }
        let coeff = CycNumber::from_json(&term["coeff"])
            .map_err(|e| Error::Schema(format!("term {i}: {e}")))?;
        out = out.add(&SkewElement::term(SkewKey { start, arrows, g }, coeff));
    }
    Ok(out)
}

fn cmd_transport(
    path: &Path,
    element: Option<&Path>,
    project_first: bool,
    mode: Option<PairingMode>,
    fast_requested: bool,
    no_verify: bool,
    json: bool,
) -> Result<ExitCode, Error> {
    let inst = load(path)?;
    let qg = build_qg(&inst)?;
    if fast_requested && !fast_pairing_available(&inst) {
        eprintln!(
            "note: the combinatorial pairing does not apply to this instance \
             (it needs a monomial action and one-dimensional stabilizer modules); \
             using the general algorithm"
        );
    }
    let mode = mode.unwrap_or(if fast_pairing_available(&inst) {
        PairingMode::Fast
    } else {
        PairingMode::Slow
    });

    let (theta, comb) = match element {
        Some(epath) => {
            let text = std::fs::read_to_string(epath)?;
            let mut theta = parse_element(&text, &inst)?;
            if project_first {
                theta = project(&theta, &make_e_tilde(&inst), &inst);
            }
            let comb = transport(&inst, &qg, &theta, mode)?;
            (theta, comb)
        }
        None => {
            if inst.potential.is_none() {
                return Err(Error::Schema(
                    "the instance has no potential; supply --element".into(),
                ));
            }
            let pt = transport_potential(&inst, &qg, mode)?;
            if !pt.invariant {
                eprintln!(
                    "warning: the potential is not G-invariant; its image generates no \
                     well-defined potential on the reduced quiver"
                );
            }
            let theta = projected_potential(&inst);
            (theta, pt.comb)
        }
    };

    if json {
        println!("{}", serde_json::to_string_pretty(&comb.to_json(&qg))?);
    } else {
        println!("{} paths", comb.num_terms());
        println!("{}", comb.render(&qg));
    }

    if !no_verify {
        let report = verify_roundtrip(&inst, &qg, &theta, &comb)?;
        if report.ok {
            if !json {
                println!("round trip: ok");
            }
        } else {
            let detail = report.detail.unwrap_or_else(|| "difference is nonzero".into());
            eprintln!("round trip failed: {detail}");
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// The corner element ẽ·W·ẽ of the instance potential.
fn projected_potential(inst: &Instance) -> SkewElement {
    let mut embedded = SkewElement::zero();
    for (cycle, coeff) in &inst.potential.as_ref().expect("caller checked").terms {
        embedded = embedded.add(&SkewElement::term(
            SkewKey {
                start: inst.quiver.arrows[cycle[0]].source,
                arrows: cycle.clone(),
                g: 0,
            },
            coeff.clone(),
        ));
    }
    project(&embedded, &make_e_tilde(inst), inst)
}

fn cmd_verify(path: &Path) -> Result<ExitCode, Error> {
    let inst = load(path)?;
    println!(
        "instance \"{}\": {} vertices, {} arrows, group of order {}, {} orbits, conductor {}",
        inst.name,
        inst.quiver.num_vertices,
        inst.quiver.num_arrows(),
        inst.group.order(),
        inst.orbits.reps.len(),
        inst.conductor
    );
    for (o, rep) in inst.orbits.reps.iter().enumerate() {
        let labels: Vec<&str> = inst.modules[o].iter().map(|m| m.label.as_str()).collect();
        println!(
            "orbit of vertex {rep}: stabilizer of order {}, modules {}",
            inst.stabilizer(o).elements.len(),
            labels.join(", ")
        );
    }
    if let Some(w) = &inst.potential {
        match moret::quiver::check_invariance(w, &inst.arrow_action, &inst.group) {
            None => println!("potential: {} cycles, G-invariant", w.terms.len()),
            Some(g) => println!(
                "potential: {} cycles, NOT invariant (moved by element {g})",
                w.terms.len()
            ),
        }
    }
    println!("valid");
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(fixtures: Option<&Path>) -> Result<ExitCode, Error> {
    let mut instances = Vec::new();
    let mut golden_text: Option<String> = None;
    match fixtures {
        None => {
            for (name, text) in embedded_fixtures() {
                let inst = load_instance_str(text)
                    .map_err(|e| Error::Internal(format!("embedded fixture {name}: {e}")))?;
                instances.push(inst);
            }
            golden_text = Some(embedded_golden().to_string());
        }
        Some(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            for p in paths {
                let text = std::fs::read_to_string(&p)?;
                let inst = load_instance_str(&text)
                    .map_err(|e| Error::Schema(format!("{}: {e}", p.display())))?;
                instances.push(inst);
            }
            let gpath = dir.join("golden").join("d10_golden.json");
            if gpath.is_file() {
                golden_text = Some(std::fs::read_to_string(&gpath)?);
            }
        }
    }
    let golden: Option<Value> = match &golden_text {
        Some(t) => Some(serde_json::from_str(t)?),
        None => None,
    };
    let report = run_selftest(&instances, golden.as_ref());
    print!("{}", report.render());
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
