//! Named self-test suites: the algebraic identities behind the pipeline run
//! against a set of loaded instances and an optional golden document for the
//! dihedral example.
//!
//! Each suite checks one law exactly and reports a single pass/fail line;
//! failures carry the first offending check, including the exact scalar that
//! disagreed. An empty instance set is a degenerate pass: the per-instance
//! suites are vacuous and the report says so in a notice.

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::cyclotomic::CycNumber;
use crate::intertwiner::{
    circledast, evaluate, f_gamma, pairing, pairing_fast, pairing_fast_terms, phi_gamma,
    Intertwiner,
};
use crate::morita::{build_qg, QGQuiver, QgPath};
use crate::quiver::Instance;
use crate::sampling::Sampler;
use crate::skew::{make_e_tilde, project, skew_graded_dimension, skew_mul, SkewElement, SkewKey};
use crate::transport::{fast_pairing_available, transport_potential, xi, PairingMode};
use crate::CycMatrix;

/// Outcome of one suite: either a success summary or the first failure.
type Check = std::result::Result<String, String>;

pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct SelfTestReport {
    pub suites: Vec<SuiteResult>,
    pub notices: Vec<String>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    /// One line per suite plus trailing notices.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let verdict = if s.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{verdict} {}: {}\n", s.name, s.detail));
        }
        for n in &self.notices {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// The fixture documents shipped with the crate, as (name, JSON text).
pub fn embedded_fixtures() -> &'static [(&'static str, &'static str)] {
    &[
        ("d10", include_str!("../../../fixtures/d10.json")),
        ("trivial", include_str!("../../../fixtures/trivial.json")),
        ("z2swap", include_str!("../../../fixtures/z2swap.json")),
        ("z6", include_str!("../../../fixtures/z6.json")),
        ("nonmono_z2", include_str!("../../../fixtures/nonmono_z2.json")),
        ("s3", include_str!("../../../fixtures/s3.json")),
    ]
}

/// The golden document for the dihedral example shipped with the crate.
pub fn embedded_golden() -> &'static str {
    include_str!("../../../fixtures/golden/d10_golden.json")
}

/// Runs every suite and collects the per-suite verdicts.
pub fn run_selftest(instances: &[Instance], golden: Option<&Value>) -> SelfTestReport {
    let mut notices = Vec::new();
    if instances.is_empty() {
        notices.push("no instances supplied; per-instance suites pass vacuously".into());
    }

    let mut built: Vec<(&Instance, QGQuiver)> = Vec::new();
    let mut reduction = Ok(String::new());
    for inst in instances {
        match build_qg(inst) {
            Ok(qg) => {
                let module_count: usize = (0..inst.orbits.reps.len())
                    .map(|o| inst.modules[o].len())
                    .sum();
                if qg.num_vertices() != module_count {
                    reduction = Err(format!(
                        "{}: {} reduced vertices for {} stabilizer modules",
                        inst.name,
                        qg.num_vertices(),
                        module_count
                    ));
                    continue;
                }
                built.push((inst, qg));
            }
            Err(e) => reduction = Err(format!("{}: reduction failed: {e}", inst.name)),
        }
    }
    if reduction.is_ok() {
        let arrows: usize = built.iter().map(|(_, qg)| qg.num_arrows()).sum();
        reduction = Ok(format!(
            "{} instances reduced, {arrows} arrows total",
            built.len()
        ));
    }

    let suites = vec![
        suite("field-axioms", field_axioms()),
        suite("group-and-orbits", group_and_orbits(instances)),
        suite("idempotents", idempotents(instances)),
        suite("reduction", reduction),
        suite("product-rule", product_rule(&built)),
        suite("composition-associativity", composition_associativity(&built)),
        suite("pairing-factorization", pairing_factorization(&built)),
        suite("biorthogonality", biorthogonality(&built)),
        suite("graded-dimensions", graded_dimensions(&built)),
        suite("fast-slow-agreement", fast_slow_agreement(&built)),
        suite("golden-dihedral", golden_dihedral(&built, golden, &mut notices)),
    ];
    SelfTestReport { suites, notices }
}

fn suite(name: &'static str, outcome: Check) -> SuiteResult {
    match outcome {
        Ok(detail) => SuiteResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => SuiteResult {
            name,
            passed: false,
            detail,
        },
    }
}

/// Field laws of ℚ(ζ_n) on seeded samples, the factorization
/// x^n − 1 = Π_k (x − ζ_n^k), and the embedding homomorphism.
fn field_axioms() -> Check {
    let conductors: [u64; 8] = [1, 2, 3, 4, 5, 6, 8, 12];
    let mut checks = 0usize;
    let mut sampler = Sampler::new(2026);
    for &n in &conductors {
        for _ in 0..4 {
            let a = sampler.scalar(n);
            let b = sampler.scalar(n);
            let c = sampler.scalar(n);
            let laws: [(&str, CycNumber, CycNumber); 5] = [
                ("commutative sum", a.clone() + b.clone(), b.clone() + a.clone()),
                (
                    "associative sum",
                    (a.clone() + b.clone()) + c.clone(),
                    a.clone() + (b.clone() + c.clone()),
                ),
                ("commutative product", a.clone() * b.clone(), b.clone() * a.clone()),
                (
                    "associative product",
                    (a.clone() * b.clone()) * c.clone(),
                    a.clone() * (b.clone() * c.clone()),
                ),
                (
                    "distributive law",
                    a.clone() * (b.clone() + c.clone()),
                    a.clone() * b.clone() + a.clone() * c.clone(),
                ),
            ];
            for (law, lhs, rhs) in laws {
                checks += 1;
                if lhs != rhs {
                    return Err(format!("conductor {n}: {law} fails: {lhs} vs {rhs}"));
                }
            }
            checks += 1;
            if !(a.clone() - a.clone()).is_zero() {
                return Err(format!("conductor {n}: a − a is nonzero for a = {a}"));
            }
            if !a.is_zero() {
                checks += 1;
                let inv = a.inv().map_err(|e| format!("conductor {n}: {e}"))?;
                let one = a.clone() * inv;
                if one != CycNumber::from_int(1) {
                    return Err(format!("conductor {n}: a·a⁻¹ = {one} for a = {a}"));
                }
            }
        }
        // Π_{k<n} (x − ζ_n^k) = x^n − 1, coefficient by coefficient.
        let mut poly = vec![CycNumber::from_int(1)];
        for k in 0..n {
            let root = CycNumber::root_of_unity(n, k as i64);
            let mut next = vec![CycNumber::zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = next[i + 1].clone() + c.clone();
                next[i] = next[i].clone() - root.clone() * c.clone();
            }
            poly = next;
        }
        for (i, c) in poly.iter().enumerate() {
            checks += 1;
            let expect = if i == 0 {
                CycNumber::from_int(-1)
            } else if i == n as usize {
                CycNumber::from_int(1)
            } else {
                CycNumber::zero()
            };
            if *c != expect {
                return Err(format!(
                    "conductor {n}: coefficient of x^{i} in Π(x − ζ^k) is {c}, expected {expect}"
                ));
            }
        }
    }
    // Embedding ℚ(ζ_m) → ℚ(ζ_N) preserves sums and products.
    let mut sampler = Sampler::new(2027);
    for (m, n) in [(2u64, 3u64), (3, 4), (4, 6), (6, 8)] {
        let lcm = m * n / gcd(m, n);
        for _ in 0..4 {
            let a = sampler.scalar(m);
            let b = sampler.scalar(n);
            let ae = a.embed(lcm).map_err(|e| e.to_string())?;
            let be = b.embed(lcm).map_err(|e| e.to_string())?;
            checks += 2;
            if a.clone() + b.clone() != ae.clone() + be.clone() {
                return Err(format!("embedding into ℚ(ζ_{lcm}) breaks the sum {a} + {b}"));
            }
            if a.clone() * b.clone() != ae * be {
                return Err(format!("embedding into ℚ(ζ_{lcm}) breaks the product {a}·{b}"));
            }
        }
    }
    Ok(format!("{checks} checks over conductors {conductors:?}"))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Group table laws and orbit bookkeeping: associativity, identity and
/// inverses from the table, |orbit|·|stabilizer| = |G|, and witness elements
/// carrying each representative onto its vertex.
fn group_and_orbits(instances: &[Instance]) -> Check {
    let mut checks = 0usize;
    for inst in instances {
        let g = &inst.group;
        let n = g.order();
        for a in 0..n {
            checks += 2;
            if g.mul(0, a) != a || g.mul(a, 0) != a {
                return Err(format!("{}: element {a} breaks the identity law", inst.name));
            }
            if g.mul(a, g.inv(a)) != 0 {
                return Err(format!("{}: element {a} breaks the inverse law", inst.name));
            }
            for b in 0..n {
                for c in 0..n {
                    checks += 1;
                    if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                        return Err(format!(
                            "{}: associativity fails on ({a},{b},{c})",
                            inst.name
                        ));
                    }
                }
            }
        }
        let orbits = &inst.orbits;
        let mut covered = 0usize;
        for (o, &rep) in orbits.reps.iter().enumerate() {
            let size = (0..inst.quiver.num_vertices)
                .filter(|&v| orbits.orbit_index[v] == o)
                .count();
            covered += size;
            checks += 1;
            if size * orbits.stabilizers[o].elements.len() != n {
                return Err(format!(
                    "{}: orbit of {rep} has {size} vertices and a stabilizer of order {}",
                    inst.name,
                    orbits.stabilizers[o].elements.len()
                ));
            }
            for h in &orbits.stabilizers[o].elements {
                checks += 1;
                if inst.act_vertex(*h, rep) != rep {
                    return Err(format!(
                        "{}: stabilizer element {h} moves representative {rep}",
                        inst.name
                    ));
                }
            }
        }
        checks += 1;
        if covered != inst.quiver.num_vertices {
            return Err(format!("{}: orbits cover {covered} vertices", inst.name));
        }
        for v in 0..inst.quiver.num_vertices {
            checks += 1;
            if inst.act_vertex(orbits.witness[v], orbits.rep_of[v]) != v {
                return Err(format!(
                    "{}: witness of vertex {v} does not carry its representative",
                    inst.name
                ));
            }
        }
    }
    Ok(format!(
        "{checks} checks over {} instances",
        instances.len()
    ))
}

/// ε_U² = ε_U, orthogonality between distinct modules of one stabilizer,
/// and the rank of the left ideal kHε_U recomputed from the translates h·ε.
fn idempotents(instances: &[Instance]) -> Check {
    let mut checks = 0usize;
    for inst in instances {
        for (o, mods) in inst.modules.iter().enumerate() {
            let h = &inst.stab_groups[o];
            for (mi, m) in mods.iter().enumerate() {
                checks += 1;
                let eps = &m.idempotent;
                if eps.mul(eps, h) != *eps {
                    return Err(format!(
                        "{}: ε_{} of orbit {o} is not idempotent",
                        inst.name, m.label
                    ));
                }
                for other in &mods[mi + 1..] {
                    checks += 1;
                    if !eps.mul(&other.idempotent, h).is_zero()
                        || !other.idempotent.mul(eps, h).is_zero()
                    {
                        return Err(format!(
                            "{}: ε_{} and ε_{} of orbit {o} are not orthogonal",
                            inst.name, m.label, other.label
                        ));
                    }
                }
                let translates: Vec<Vec<CycNumber>> = (0..h.order())
                    .map(|g| eps.translate(g, h).to_vec(h.order()))
                    .collect();
                let rank = CycMatrix::from_rows(translates).rank();
                checks += 1;
                if rank != m.dim {
                    return Err(format!(
                        "{}: kHε_{} of orbit {o} has dimension {rank}, module says {}",
                        inst.name, m.label, m.dim
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{checks} checks over {} instances",
        instances.len()
    ))
}

/// Composition against the algebra: evaluating f′ ⊛ f equals the skew
/// product of the evaluations, for every composable pair of reduced arrows.
fn product_rule(built: &[(&Instance, QGQuiver)]) -> Check {
    let mut checks = 0usize;
    for (inst, qg) in built {
        for a in &qg.arrows {
            for b in &qg.arrows {
                if a.target != b.source {
                    continue;
                }
                checks += 1;
                let ea = evaluate(inst, &a.intertwiner).map_err(|e| e.to_string())?;
                let eb = evaluate(inst, &b.intertwiner).map_err(|e| e.to_string())?;
                let lhs = skew_mul(&ea, &eb, inst);
                let comp =
                    circledast(inst, &b.intertwiner, &a.intertwiner).map_err(|e| e.to_string())?;
                let rhs = evaluate(inst, &comp).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!(
                        "{}: evaluating {} ⊛ {} differs from the algebra product",
                        inst.name, b.label, a.label
                    ));
                }
            }
        }
    }
    Ok(format!("{checks} composable arrow pairs"))
}

/// ⊛ is associative on random composable triples drawn from length-3 paths.
fn composition_associativity(built: &[(&Instance, QGQuiver)]) -> Check {
    let mut pool: Vec<(usize, QgPath)> = Vec::new();
    for (idx, (_, qg)) in built.iter().enumerate() {
        for p in qg.paths(3, None, None) {
            pool.push((idx, p));
        }
    }
    if pool.is_empty() {
        return Ok("no length-3 paths; vacuous".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let draws = 100usize;
    for _ in 0..draws {
        let (idx, path) = &pool[rng.random_range(0..pool.len())];
        let (inst, qg) = &built[*idx];
        let f1 = &qg.arrows[path.arrows[0]].intertwiner;
        let f2 = &qg.arrows[path.arrows[1]].intertwiner;
        let f3 = &qg.arrows[path.arrows[2]].intertwiner;
        let left = circledast(inst, f3, &circledast(inst, f2, f1).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let right = circledast(inst, &circledast(inst, f3, f2).map_err(|e| e.to_string())?, f1)
            .map_err(|e| e.to_string())?;
        if left != right {
            let labels: Vec<&str> = path
                .arrows
                .iter()
                .map(|&a| qg.arrows[a].label.as_str())
                .collect();
            return Err(format!(
                "{}: associativity fails along {}",
                inst.name,
                labels.join(" ")
            ));
        }
    }
    Ok(format!("{draws} random triples"))
}

/// (f₂ ⊛ f₁ | φ₁ ⊛ φ₂) = (f₂|φ₂)·(f₁|φ₁) on random quadruples, with the
/// duals drawn from arbitrary parallel arrows.
fn pairing_factorization(built: &[(&Instance, QGQuiver)]) -> Check {
    let mut pool: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, (_, qg)) in built.iter().enumerate() {
        for (i, a) in qg.arrows.iter().enumerate() {
            for (j, b) in qg.arrows.iter().enumerate() {
                if a.target == b.source {
                    pool.push((idx, i, j));
                }
            }
        }
    }
    if pool.is_empty() {
        return Ok("no composable arrow pairs; vacuous".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let draws = 100usize;
    for _ in 0..draws {
        let (idx, i, j) = pool[rng.random_range(0..pool.len())];
        let (inst, qg) = &built[idx];
        let a = &qg.arrows[i];
        let b = &qg.arrows[j];
        let parallel = |s: usize, t: usize| -> Vec<usize> {
            (0..qg.arrows.len())
                .filter(|&k| qg.arrows[k].source == s && qg.arrows[k].target == t)
                .collect()
        };
        let pa = parallel(a.source, a.target);
        let pb = parallel(b.source, b.target);
        let ap = &qg.arrows[pa[rng.random_range(0..pa.len())]];
        let bp = &qg.arrows[pb[rng.random_range(0..pb.len())]];
        let f = circledast(inst, &b.intertwiner, &a.intertwiner).map_err(|e| e.to_string())?;
        let phi = circledast(inst, &ap.dual, &bp.dual).map_err(|e| e.to_string())?;
        let lhs = pairing(inst, &f, &phi).map_err(|e| e.to_string())?;
        let rhs = pairing(inst, &b.intertwiner, &bp.dual).map_err(|e| e.to_string())?
            * pairing(inst, &a.intertwiner, &ap.dual).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!(
                "{}: pairing of {} ⊛ {} against {}∨ ⊛ {}∨ is {lhs}, factors give {rhs}",
                inst.name, b.label, a.label, ap.label, bp.label
            ));
        }
    }
    Ok(format!("{draws} random quadruples"))
}

/// (f_γ | φ_{γ′}) = δ_{γγ′} for all parallel path pairs of length ≤ 3.
fn biorthogonality(built: &[(&Instance, QGQuiver)]) -> Check {
    let mut checks = 0usize;
    for (inst, qg) in built {
        for n in 1..=3usize {
            let paths = qg.paths(n, None, None);
            for p in &paths {
                let at = (qg.vertices[p.start].orbit, qg.vertices[p.start].module);
                let factors: Vec<&Intertwiner> = p
                    .arrows
                    .iter()
                    .map(|&a| &qg.arrows[a].intertwiner)
                    .collect();
                let f = f_gamma(inst, at, &factors).map_err(|e| e.to_string())?;
                for q in &paths {
                    if q.start != p.start || qg.path_end(q) != qg.path_end(p) {
                        continue;
                    }
                    let duals: Vec<&Intertwiner> =
                        q.arrows.iter().map(|&a| &qg.arrows[a].dual).collect();
                    let phi = phi_gamma(inst, at, &duals).map_err(|e| e.to_string())?;
                    let got = pairing(inst, &f, &phi).map_err(|e| e.to_string())?;
                    let expect = CycNumber::from_int(if p == q { 1 } else { 0 });
                    checks += 1;
                    if got != expect {
                        let name = |path: &QgPath| {
                            path.arrows
                                .iter()
                                .map(|&a| qg.arrows[a].label.as_str())
                                .collect::<Vec<_>>()
                                .join(" ")
                        };
                        return Err(format!(
                            "{}: ({} | {}∨) = {got}, expected {expect}",
                            inst.name,
                            name(p),
                            name(q)
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("{checks} parallel path pairs up to length 3"))
}

/// Length-n path counts of Q_G equal the corner dimensions computed from
/// the skew group algebra directly, for n ≤ 3.
fn graded_dimensions(built: &[(&Instance, QGQuiver)]) -> Check {
    let mut checks = 0usize;
    for (inst, qg) in built {
        for n in 0..=3usize {
            let paths = qg.count_paths(n, None, None);
            let dim = skew_graded_dimension(inst, n).map_err(|e| e.to_string())?;
            checks += 1;
            if paths != dim {
                return Err(format!(
                    "{}: degree {n} has {paths} reduced paths but corner dimension {dim}",
                    inst.name
                ));
            }
        }
    }
    Ok(format!("{checks} graded components"))
}

/// On monomial instances with one-dimensional stabilizer modules, the
/// combinatorial pairing agrees with the general one on every arrow pair and
/// on every transported potential coefficient.
fn fast_slow_agreement(built: &[(&Instance, QGQuiver)]) -> Check {
    let mut checks = 0usize;
    let mut eligible = 0usize;
    for (inst, qg) in built {
        if !fast_pairing_available(inst) {
            continue;
        }
        eligible += 1;
        for a in &qg.arrows {
            for b in &qg.arrows {
                if a.source != b.source || a.target != b.target {
                    continue;
                }
                let slow = pairing(inst, &a.intertwiner, &b.dual).map_err(|e| e.to_string())?;
                let fast =
                    pairing_fast(inst, &a.intertwiner, &b.dual).map_err(|e| e.to_string())?;
                checks += 1;
                if slow != fast {
                    return Err(format!(
                        "{}: ({} | {}∨) is {slow} generally but {fast} combinatorially",
                        inst.name, a.label, b.label
                    ));
                }
            }
        }
        if inst.potential.is_some() {
            checks += 1;
            transport_potential(inst, qg, PairingMode::Both).map_err(|e| {
                format!("{}: transported potential disagrees: {e}", inst.name)
            })?;
        }
    }
    Ok(format!("{checks} checks on {eligible} eligible instances"))
}

/// Parses a scalar from the golden document.
fn golden_scalar(v: &Value, what: &str) -> std::result::Result<CycNumber, String> {
    CycNumber::from_json(v).map_err(|e| format!("golden {what}: {e}"))
}

/// Compares the dihedral reduction and the potential decomposition against
/// the golden document: vertex and arrow counts, idempotent coefficients,
/// and for every length-5 path the pairing terms (coset sequence, the two
/// block coefficients, the translate scalar, the stabilizer tail and its
/// character value) along with the final path coefficient.
fn golden_dihedral(
    built: &[(&Instance, QGQuiver)],
    golden: Option<&Value>,
    notices: &mut Vec<String>,
) -> Check {
    let Some(doc) = golden else {
        notices.push("no golden document supplied; golden-dihedral is vacuous".into());
        return Ok("skipped: no golden document".into());
    };
    let target = doc["instance"].as_str().unwrap_or_default();
    let Some((inst, qg)) = built.iter().find(|(i, _)| i.name == target) else {
        notices.push(format!(
            "golden document targets \"{target}\", which is not among the loaded instances"
        ));
        return Ok(format!("skipped: instance \"{target}\" not loaded"));
    };

    if qg.num_vertices() != doc["vertices"].as_u64().unwrap_or(0) as usize {
        return Err(format!(
            "{} reduced vertices, golden {}",
            qg.num_vertices(),
            doc["vertices"]
        ));
    }
    if qg.num_arrows() != doc["arrows"].as_u64().unwrap_or(0) as usize {
        return Err(format!(
            "{} reduced arrows, golden {}",
            qg.num_arrows(),
            doc["arrows"]
        ));
    }

    let empty = Vec::new();
    for entry in doc["idempotents"].as_array().unwrap_or(&empty) {
        let label = entry["module"].as_str().unwrap_or_default();
        let module = inst.modules[0]
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| format!("golden idempotent {label} is not a module of orbit 0"))?;
        let stab: Vec<usize> = entry["stabilizer"]
            .as_array()
            .unwrap_or(&empty)
            .iter()
            .map(|v| v.as_u64().unwrap_or(u64::MAX) as usize)
            .collect();
        if inst.stabilizer(0).elements != stab {
            return Err(format!(
                "stabilizer of orbit 0 is {:?}, golden {stab:?}",
                inst.stabilizer(0).elements
            ));
        }
        for (pos, coord) in entry["coords"].as_array().unwrap_or(&empty).iter().enumerate() {
            let expect = golden_scalar(coord, &format!("idempotent {label} coordinate {pos}"))?;
            let got = module.idempotent.coeff(pos);
            if got != expect {
                return Err(format!(
                    "idempotent ε_{label} coordinate {pos} is {got}, golden {expect}"
                ));
            }
        }
    }

    let Some(w) = inst.potential.as_ref() else {
        return Err("golden instance carries no potential".into());
    };
    let mut embedded = SkewElement::zero();
    for (cycle, coeff) in &w.terms {
        embedded = embedded.add(&SkewElement::term(
            SkewKey {
                start: inst.quiver.arrows[cycle[0]].source,
                arrows: cycle.clone(),
                g: 0,
            },
            coeff.clone(),
        ));
    }
    let theta = project(&embedded, &make_e_tilde(inst), inst);
    let parts = xi(inst, &theta).map_err(|e| e.to_string())?;

    let mut paths_checked = 0usize;
    for entry in doc["potential_paths"].as_array().unwrap_or(&empty) {
        let labels: Vec<&str> = entry["arrows"]
            .as_array()
            .unwrap_or(&empty)
            .iter()
            .map(|v| v.as_str().unwrap_or_default())
            .collect();
        let display = labels.join(" ");
        let arrows: Vec<usize> = labels
            .iter()
            .map(|l| {
                qg.arrow_by_label(l)
                    .ok_or_else(|| format!("golden path references unknown arrow {l}"))
            })
            .collect::<std::result::Result<_, _>>()?;
        let start_label = entry["start"].as_str().unwrap_or_default();
        let start = qg
            .vertices
            .iter()
            .position(|v| v.label == start_label)
            .ok_or_else(|| format!("golden path starts at unknown vertex {start_label}"))?;
        let path = QgPath { start, arrows };
        let end = qg.path_end(&path);

        let comp = parts.components.iter().find(|c| {
            qg.vertex_of(c.source.0, c.source.1) == Some(path.start)
                && qg.vertex_of(c.vmodule.0, c.vmodule.1) == Some(end)
        });
        let duals: Vec<&Intertwiner> = path.arrows.iter().map(|&a| &qg.arrows[a].dual).collect();

        let golden_coeff = golden_scalar(&entry["coeff"], &format!("coefficient of {display}"))?;
        let golden_terms = entry["terms"].as_array().unwrap_or(&empty);
        match comp {
            None => {
                if !golden_coeff.is_zero() || !golden_terms.is_empty() {
                    return Err(format!(
                        "path {display}: no matching component, golden expects coefficient {golden_coeff}"
                    ));
                }
            }
            Some(comp) => {
                let phi = phi_gamma(inst, comp.vmodule, &duals).map_err(|e| e.to_string())?;
                let coeff = pairing(inst, &comp.f, &phi).map_err(|e| e.to_string())?;
                if coeff != golden_coeff {
                    return Err(format!(
                        "path {display}: coefficient is {coeff}, golden {golden_coeff}"
                    ));
                }
                let terms = pairing_fast_terms(inst, &comp.f, &phi).map_err(|e| e.to_string())?;
                if terms.len() != golden_terms.len() {
                    return Err(format!(
                        "path {display}: {} pairing terms, golden {}",
                        terms.len(),
                        golden_terms.len()
                    ));
                }
                for (i, (term, gt)) in terms.iter().zip(golden_terms).enumerate() {
                    let yseq: Vec<usize> = gt["yseq"]
                        .as_array()
                        .unwrap_or(&empty)
                        .iter()
                        .map(|v| v.as_u64().unwrap_or(u64::MAX) as usize)
                        .collect();
                    if term.yseq != yseq {
                        return Err(format!(
                            "path {display}: term {i} coset sequence is {:?}, golden {yseq:?}",
                            term.yseq
                        ));
                    }
                    let fields: [(&str, &CycNumber); 4] = [
                        ("alpha", &term.alpha),
                        ("beta", &term.beta),
                        ("chi", &term.chi),
                        ("chi_u_h0_inv", &term.chi_u_h0_inv),
                    ];
                    for (name, got) in fields {
                        let expect =
                            golden_scalar(&gt[name], &format!("{name} of {display} term {i}"))?;
                        if *got != expect {
                            return Err(format!(
                                "path {display}: term {i} {name} is {got}, golden {expect}"
                            ));
                        }
                    }
                    let h0 = gt["h0"].as_u64().unwrap_or(u64::MAX) as usize;
                    if term.h0 != h0 {
                        return Err(format!(
                            "path {display}: term {i} stabilizer tail is element {}, golden {h0}",
                            term.h0
                        ));
                    }
                }
            }
        }
        paths_checked += 1;
    }
    Ok(format!(
        "counts, idempotents and {paths_checked} potential paths match"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::load_instance_str;

    fn embedded_instances() -> Vec<Instance> {
        embedded_fixtures()
            .iter()
            .map(|(_, text)| load_instance_str(text).unwrap())
            .collect()
    }

    #[test]
    fn clean_build_passes_every_suite() {
        let instances = embedded_instances();
        let golden: Value = serde_json::from_str(embedded_golden()).unwrap();
        let report = run_selftest(&instances, Some(&golden));
        assert!(report.all_passed(), "{}", report.render());
        assert_eq!(report.suites.len(), 11);
        assert!(report.render().contains("PASS golden-dihedral"));
    }

    #[test]
    fn empty_instance_set_is_a_degenerate_pass_with_a_notice() {
        let report = run_selftest(&[], None);
        assert!(report.all_passed());
        assert!(report
            .notices
            .iter()
            .any(|n| n.contains("pass vacuously")));
        assert!(report.render().contains("note:"));
    }

    #[test]
    fn perturbed_golden_reports_the_exact_mismatching_scalar() {
        let instances = embedded_instances();
        let mut golden: Value = serde_json::from_str(embedded_golden()).unwrap();
        // Flip one beta deep inside the table.
        let entry = golden["potential_paths"]
            .as_array_mut()
            .unwrap()
            .iter_mut()
            .find(|e| !e["terms"].as_array().unwrap().is_empty())
            .unwrap();
        let display = entry["arrows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect::<Vec<_>>()
            .join(" ");
        entry["terms"][0]["beta"] = Value::String("7".into());
        let report = run_selftest(&instances, Some(&golden));
        assert!(!report.all_passed());
        let failed: Vec<&SuiteResult> =
            report.suites.iter().filter(|s| !s.passed).collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].name, "golden-dihedral");
        assert!(failed[0].detail.contains("beta"), "{}", failed[0].detail);
        assert!(failed[0].detail.contains("golden 7"), "{}", failed[0].detail);
        assert!(
            failed[0].detail.contains(&display),
            "{}",
            failed[0].detail
        );
    }

    #[test]
    fn missing_golden_target_is_a_skip_not_a_failure() {
        let golden: Value = serde_json::from_str(embedded_golden()).unwrap();
        let z6 = load_instance_str(
            embedded_fixtures()
                .iter()
                .find(|(n, _)| *n == "z6")
                .unwrap()
                .1,
        )
        .unwrap();
        let report = run_selftest(&[z6], Some(&golden));
        assert!(report.all_passed(), "{}", report.render());
        assert!(report
            .notices
            .iter()
            .any(|n| n.contains("not among the loaded instances")));
    }
}
