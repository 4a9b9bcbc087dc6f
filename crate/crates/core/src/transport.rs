//! The decomposition pipeline: corner elements of the skew group algebra as
//! linear combinations of Q_G paths.
//!
//! Ξ splits a corner element θ = ẽθẽ into intertwiner components, one per
//! (vertex orbit walk, source module U, end module V): the component sends
//! the k-th basis vector of U to (e∗b_k)·θ·(e∗ε_V), decomposed over the
//! basis of the induced module of the walk. Transport then pairs each
//! component against the dual chains φ_γ of matching Q_G paths γ, giving
//! θ = Σ_γ (Ξ(θ)|φ_γ)·γ. The round-trip verifier multiplies the evaluated
//! arrow elements back together in the ambient algebra and compares with θ
//! exactly, which keeps the two directions of the equivalence independent
//! of one another.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::induced::{InducedBasisElt, InducedModule, Side};
use crate::intertwiner::{
    evaluate, fast_eligible, pairing, pairing_fast, phi_gamma, Intertwiner,
};
use crate::matrix::Matrix;
use crate::morita::{QGQuiver, QgPath};
use crate::quiver::{check_invariance, Instance};
use crate::skew::{
    canonicalize, make_e_tilde, project, re_expand, skew_mul, SkewElement, SkewKey,
};
use crate::CycMatrix;

/// Which pairing algorithm computes transport coefficients. `Both` runs the
/// combinatorial and the general algorithm and fails on any disagreement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingMode {
    Fast,
    Slow,
    Both,
}

/// One block of Ξ(θ): the walk's orbit sequence, the source and end module
/// data, and the intertwiner U → M(i̲;V).
#[derive(Clone, Debug)]
pub struct XiComponent {
    pub iseq: Vec<usize>,
    pub source: (usize, usize),
    pub vmodule: (usize, usize),
    pub f: Intertwiner,
}

/// Ξ(θ) as a list of components, ordered by (walk, source, end) data.
#[derive(Clone, Debug, Default)]
pub struct XiElement {
    pub components: Vec<XiComponent>,
}

/// e_i ∗ b_k for the k-th basis vector of the module, expanded over the
/// stabilizer elements it is supported on.
fn basis_vector_element(
    instance: &Instance,
    orbit: usize,
    module: usize,
    k: usize,
) -> SkewElement {
    let stab = instance.stabilizer(orbit);
    let rep = instance.orbits.reps[orbit];
    let m = instance.module(orbit, module);
    let terms = (0..stab.order()).filter_map(|pos| {
        let c = m.basis.get(k, pos);
        if c.is_zero() {
            return None;
        }
        Some((
            SkewKey {
                start: rep,
                arrows: Vec::new(),
                g: stab.elements[pos],
            },
            c.clone(),
        ))
    });
    SkewElement::from_terms(terms, &instance.quiver).expect("vertex terms are well-formed")
}

/// e_i ∗ ε_U, the corner idempotent of a Q_G vertex.
pub fn vertex_idempotent(instance: &Instance, orbit: usize, module: usize) -> SkewElement {
    let stab = instance.stabilizer(orbit);
    let rep = instance.orbits.reps[orbit];
    let m = instance.module(orbit, module);
    let terms = m.idempotent.terms().map(|(pos, c)| {
        (
            SkewKey {
                start: rep,
                arrows: Vec::new(),
                g: stab.elements[pos],
            },
            c.clone(),
        )
    });
    SkewElement::from_terms(terms, &instance.quiver).expect("vertex terms are well-formed")
}

/// Splits a corner element into its Ξ components. Rejects elements that are
/// not fixed by the corner projection.
pub fn xi(instance: &Instance, theta: &SkewElement) -> Result<XiElement> {
    let e_tilde = make_e_tilde(instance);
    if &project(theta, &e_tilde, instance) != theta {
        return Err(Error::NotProjected);
    }
    let canonical = canonicalize(theta, instance)?;
    let mut by_walk: BTreeMap<Vec<usize>, SkewElement> = BTreeMap::new();
    for term in canonical {
        let entry = by_walk
            .entry(term.orbit_path.clone())
            .or_insert_with(SkewElement::zero);
        *entry = entry.add(&re_expand(&term, instance));
    }
    let mut components = Vec::new();
    for (iseq, part) in by_walk {
        let start_orbit = iseq[0];
        let end_orbit = *iseq.last().expect("walks are nonempty");
        let end_stab = instance.stabilizer(end_orbit);
        for ui in 0..instance.modules[start_orbit].len() {
            let u = instance.module(start_orbit, ui);
            for vi in 0..instance.modules[end_orbit].len() {
                let v = instance.module(end_orbit, vi);
                let target =
                    InducedModule::build(instance, Side::M, iseq.clone(), (end_orbit, vi));
                let ev = vertex_idempotent(instance, end_orbit, vi);
                let mut coords: CycMatrix = Matrix::zero(target.dim(), u.dim);
                let bt = v.basis.transpose();
                for k in 0..u.dim {
                    let ek = basis_vector_element(instance, start_orbit, ui, k);
                    let prod = skew_mul(&skew_mul(&ek, &part, instance), &ev, instance);
                    // Group the product by walk block and read off the
                    // group-part coordinates over the end stabilizer.
                    let mut blocks: BTreeMap<(Vec<usize>, Vec<usize>), Vec<CycNumber>> =
                        BTreeMap::new();
                    for term in canonicalize(&prod, instance)? {
                        if term.orbit_path != iseq {
                            return Err(Error::Internal(
                                "corner multiplication left the walk's orbit sequence".into(),
                            ));
                        }
                        let pos = end_stab.position[term.tail]
                            .expect("canonical tails lie in the end stabilizer");
                        let entry = blocks
                            .entry((term.yseq, term.arrows))
                            .or_insert_with(|| vec![CycNumber::zero(); end_stab.order()]);
                        entry[pos] = entry[pos].clone() + term.coeff;
                    }
                    for ((yseq, arrows), vec) in blocks {
                        let rhs = Matrix::column(vec);
                        let x = bt.solve(&rhs).ok_or_else(|| {
                            Error::Internal(
                                "projected block does not lie in the module span".into(),
                            )
                        })?;
                        for vindex in 0..v.dim {
                            let c = x.get(vindex, 0);
                            if c.is_zero() {
                                continue;
                            }
                            let row = target
                                .index_of(&InducedBasisElt {
                                    yseq: yseq.clone(),
                                    arrows: arrows.clone(),
                                    vindex,
                                })
                                .expect("decomposed block is a basis element");
                            coords.set(row, k, c.clone());
                        }
                    }
                }
                if coords.is_zero() {
                    continue;
                }
                let f = Intertwiner::new(instance, (start_orbit, ui), target, coords)?;
                components.push(XiComponent {
                    iseq: iseq.clone(),
                    source: (start_orbit, ui),
                    vmodule: (end_orbit, vi),
                    f,
                });
            }
        }
    }
    Ok(XiElement { components })
}

/// A finite linear combination of Q_G paths with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QGPathComb {
    terms: BTreeMap<QgPath, CycNumber>,
}

impl QGPathComb {
    pub fn zero() -> QGPathComb {
        QGPathComb::default()
    }

    pub fn add_term(&mut self, path: QgPath, coeff: CycNumber) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(path)
            .or_insert_with(CycNumber::zero);
        *entry = entry.clone() + coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn coeff(&self, path: &QgPath) -> CycNumber {
        self.terms
            .get(path)
            .cloned()
            .unwrap_or_else(CycNumber::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QgPath, &CycNumber)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &QGPathComb) -> QGPathComb {
        let mut out = self.clone();
        for (p, c) in other.terms() {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &CycNumber) -> QGPathComb {
        let mut out = QGPathComb::zero();
        for (p, c) in self.terms() {
            out.add_term(p.clone(), c.clone() * s.clone());
        }
        out
    }

    /// JSON rendering: one object per path, in the deterministic path order.
    pub fn to_json(&self, qg: &QGQuiver) -> Value {
        let paths: Vec<Value> = self
            .terms
            .iter()
            .map(|(p, c)| {
                json!({
                    "start": qg.vertices[p.start].label,
                    "arrows": p
                        .arrows
                        .iter()
                        .map(|&a| qg.arrows[a].label.clone())
                        .collect::<Vec<_>>(),
                    "coeff": c.to_json(),
                })
            })
            .collect();
        json!({ "paths": paths })
    }

    /// Human-readable rendering, lazy paths shown as their vertex
    /// idempotent.
    pub fn render(&self, qg: &QGQuiver) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(p, c)| {
                let path = if p.arrows.is_empty() {
                    format!("e{}", qg.vertices[p.start].label)
                } else {
                    p.arrows
                        .iter()
                        .map(|&a| qg.arrows[a].label.as_str())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                format!("({c}) · {path}")
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Concatenation product: composable path pairs concatenate, the rest
/// vanish. The order matches the ambient product, first factor first.
pub fn comb_mul(qg: &QGQuiver, a: &QGPathComb, b: &QGPathComb) -> QGPathComb {
    let mut out = QGPathComb::zero();
    for (p, cp) in a.terms() {
        let end = qg.path_end(p);
        for (q, cq) in b.terms() {
            if q.start != end {
                continue;
            }
            let mut arrows = p.arrows.clone();
            arrows.extend_from_slice(&q.arrows);
            out.add_term(
                QgPath {
                    start: p.start,
                    arrows,
                },
                cp.clone() * cq.clone(),
            );
        }
    }
    out
}

fn workers_from_env() -> usize {
    std::env::var("MORET_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Q_G paths between two vertices whose visited orbits follow the walk.
fn constrained_paths(qg: &QGQuiver, iseq: &[usize], s: usize, t: usize) -> Vec<QgPath> {
    qg.paths(iseq.len() - 1, Some(s), Some(t))
        .into_iter()
        .filter(|p| {
            let mut at = p.start;
            for (slot, &a) in p.arrows.iter().enumerate() {
                if qg.vertices[at].orbit != iseq[slot] {
                    return false;
                }
                at = qg.arrows[a].target;
            }
            qg.vertices[at].orbit == *iseq.last().expect("walks are nonempty")
        })
        .collect()
}

fn path_coefficient(
    instance: &Instance,
    qg: &QGQuiver,
    comp: &XiComponent,
    path: &QgPath,
    mode: PairingMode,
) -> Result<CycNumber> {
    let duals: Vec<&Intertwiner> = path
        .arrows
        .iter()
        .map(|&a| &qg.arrows[a].dual)
        .collect();
    let phi = phi_gamma(instance, comp.vmodule, &duals)?;
    match mode {
        PairingMode::Slow => pairing(instance, &comp.f, &phi),
        PairingMode::Fast => pairing_fast(instance, &comp.f, &phi),
        PairingMode::Both => {
            let slow = pairing(instance, &comp.f, &phi)?;
            let fast = pairing_fast(instance, &comp.f, &phi)?;
            if slow != fast {
                return Err(Error::Internal(format!(
                    "pairing algorithms disagree on a path: general {slow}, combinatorial {fast}"
                )));
            }
            Ok(slow)
        }
    }
}

/// Coefficients for a batch of paths, split over `MORET_WORKERS` threads
/// when that is set; results merge in path order regardless of scheduling.
fn path_coefficients(
    instance: &Instance,
    qg: &QGQuiver,
    comp: &XiComponent,
    paths: &[QgPath],
    mode: PairingMode,
) -> Result<Vec<CycNumber>> {
    let workers = workers_from_env().min(paths.len().max(1));
    if workers <= 1 {
        return paths
            .iter()
            .map(|p| path_coefficient(instance, qg, comp, p, mode))
            .collect();
    }
    let chunks: Vec<Result<Vec<(usize, CycNumber)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|wid| {
                scope.spawn(move || {
                    let mut out = Vec::new();
                    for (idx, p) in paths.iter().enumerate() {
                        if idx % workers != wid {
                            continue;
                        }
                        out.push((idx, path_coefficient(instance, qg, comp, p, mode)?));
                    }
                    Ok(out)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("pairing worker panicked"))
            .collect()
    });
    let mut coeffs = vec![CycNumber::zero(); paths.len()];
    for chunk in chunks {
        for (idx, c) in chunk? {
            coeffs[idx] = c;
        }
    }
    Ok(coeffs)
}

/// Transports Ξ components into a path combination.
pub fn transport_xi(
    instance: &Instance,
    qg: &QGQuiver,
    xi_elt: &XiElement,
    mode: PairingMode,
) -> Result<QGPathComb> {
    let mut comb = QGPathComb::zero();
    for comp in &xi_elt.components {
        let s = qg
            .vertex_of(comp.source.0, comp.source.1)
            .ok_or_else(|| Error::Internal("component source is not a Q_G vertex".into()))?;
        let t = qg
            .vertex_of(comp.vmodule.0, comp.vmodule.1)
            .ok_or_else(|| Error::Internal("component end is not a Q_G vertex".into()))?;
        let paths = constrained_paths(qg, &comp.iseq, s, t);
        let coeffs = path_coefficients(instance, qg, comp, &paths, mode)?;
        for (path, coeff) in paths.into_iter().zip(coeffs) {
            comb.add_term(path, coeff);
        }
    }
    Ok(comb)
}

/// Decomposes a corner element over Q_G paths: θ = Σ_γ (Ξ(θ)|φ_γ)·γ.
pub fn transport(
    instance: &Instance,
    qg: &QGQuiver,
    theta: &SkewElement,
    mode: PairingMode,
) -> Result<QGPathComb> {
    let xi_elt = xi(instance, theta)?;
    transport_xi(instance, qg, &xi_elt, mode)
}

/// The ambient element of a Q_G path: the product of its arrows' evaluated
/// intertwiners, multiplied in the skew group algebra in walk order. The
/// lazy path at a vertex gives that vertex's corner idempotent.
pub fn evaluate_path(instance: &Instance, qg: &QGQuiver, path: &QgPath) -> Result<SkewElement> {
    if path.arrows.is_empty() {
        let v = &qg.vertices[path.start];
        return Ok(vertex_idempotent(instance, v.orbit, v.module));
    }
    let mut acc: Option<SkewElement> = None;
    for &a in &path.arrows {
        let val = evaluate(instance, &qg.arrows[a].intertwiner)?;
        acc = Some(match acc {
            None => val,
            Some(prev) => skew_mul(&prev, &val, instance),
        });
    }
    Ok(acc.expect("nonempty path"))
}

/// Outcome of a round-trip check; a failed check names a differing term.
#[derive(Clone, Debug)]
pub struct RoundtripReport {
    pub ok: bool,
    pub detail: Option<String>,
}

/// Multiplies the combination back out in the ambient algebra and compares
/// with θ exactly. On mismatch the report names the first differing ambient
/// term and, when the coefficients of a freshly transported combination
/// single one out, the offending path.
pub fn verify_roundtrip(
    instance: &Instance,
    qg: &QGQuiver,
    theta: &SkewElement,
    comb: &QGPathComb,
) -> Result<RoundtripReport> {
    let mut sum = SkewElement::zero();
    for (path, coeff) in comb.terms() {
        sum = sum.add(&evaluate_path(instance, qg, path)?.scale(coeff));
    }
    let diff = sum.sub(theta);
    if diff.is_zero() {
        return Ok(RoundtripReport {
            ok: true,
            detail: None,
        });
    }
    let (key, _) = diff.terms().next().expect("nonzero difference");
    let mut detail = format!(
        "reconstruction differs at start {} arrows {:?} group element {}: \
         rebuilt {} vs expected {}",
        key.start,
        key.arrows
            .iter()
            .map(|&a| instance.quiver.arrows[a].label.as_str())
            .collect::<Vec<_>>(),
        key.g,
        sum.coeff(key),
        theta.coeff(key)
    );
    if let Ok(fresh) = transport(instance, qg, theta, PairingMode::Slow) {
        if let Some((path, _)) = fresh
            .terms()
            .find(|(p, c)| comb.coeff(p) != **c)
            .or_else(|| comb.terms().find(|(p, c)| fresh.coeff(p) != **c))
        {
            let labels: Vec<&str> = path
                .arrows
                .iter()
                .map(|&a| qg.arrows[a].label.as_str())
                .collect();
            detail.push_str(&format!(
                "; offending path {} (coefficient {} should be {})",
                if labels.is_empty() {
                    qg.vertices[path.start].label.clone()
                } else {
                    labels.join(" ")
                },
                comb.coeff(path),
                fresh.coeff(path)
            ));
        }
    }
    Ok(RoundtripReport {
        ok: false,
        detail: Some(detail),
    })
}

/// Result of transporting the instance's potential.
#[derive(Clone, Debug)]
pub struct PotentialTransport {
    pub comb: QGPathComb,
    /// Whether the potential is fixed by the group action up to rotation;
    /// the transport is computed either way.
    pub invariant: bool,
}

/// Transports the potential: embeds W as Σ cycles ∗ identity, projects to
/// the corner, and decomposes. An instance without a potential transports
/// to the empty combination.
pub fn transport_potential(
    instance: &Instance,
    qg: &QGQuiver,
    mode: PairingMode,
) -> Result<PotentialTransport> {
    let Some(w) = &instance.potential else {
        return Ok(PotentialTransport {
            comb: QGPathComb::zero(),
            invariant: true,
        });
    };
    let invariant = check_invariance(w, &instance.arrow_action, &instance.group).is_none();
    let mut embedded = SkewElement::zero();
    for (cycle, coeff) in &w.terms {
        let start = instance.quiver.arrows[cycle[0]].source;
        embedded = embedded.add(&SkewElement::term(
            SkewKey {
                start,
                arrows: cycle.clone(),
                g: 0,
            },
            coeff.clone(),
        ));
    }
    let e_tilde = make_e_tilde(instance);
    let theta = project(&embedded, &e_tilde, instance);
    let comb = transport(instance, qg, &theta, mode)?;
    Ok(PotentialTransport { comb, invariant })
}

/// Whether the combinatorial pairing covers this instance; callers surface
/// a notice before falling back to the general algorithm.
pub fn fast_pairing_available(instance: &Instance) -> bool {
    fast_eligible(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morita::build_qg;
    use crate::quiver::test_instances::{
        d10_instance, s3_instance, trivial_document, trivial_instance, z6_instance,
    };
    use crate::quiver::{load_instance, InstanceDocument};
    use crate::skew::e_hat;

    fn minus_one_pow(e: usize) -> CycNumber {
        CycNumber::from_int(if e % 2 == 0 { 1 } else { -1 })
    }

    #[test]
    fn xi_of_the_unit_is_the_identity_on_every_vertex() {
        let inst = d10_instance();
        let e_tilde = make_e_tilde(&inst);
        let parts = xi(&inst, &e_tilde).unwrap();
        assert_eq!(parts.components.len(), 2);
        for (m, comp) in parts.components.iter().enumerate() {
            assert_eq!(comp.iseq, vec![0]);
            assert_eq!(comp.source, (0, m));
            assert_eq!(comp.vmodule, (0, m));
            assert_eq!(comp.f.coords, Matrix::identity(1));
        }
    }

    #[test]
    fn xi_rejects_elements_outside_the_corner() {
        let inst = d10_instance();
        let stray = SkewElement::vertex(0, 1);
        assert!(matches!(xi(&inst, &stray), Err(Error::NotProjected)));
    }

    #[test]
    fn xi_of_the_potential_has_the_frozen_coordinates() {
        // ẽWẽ splits into one component per endpoint pair (r, w) with
        // coefficient ½(1+(−1)^{r+w}) on the forward five-cycle and the
        // negative on the backward one; odd parity components vanish.
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Slow).unwrap();
        assert!(pt.invariant);
        let e_tilde = make_e_tilde(&inst);
        let w = &inst.potential.as_ref().unwrap().terms;
        let mut embedded = SkewElement::zero();
        for (cycle, coeff) in w {
            embedded = embedded.add(&SkewElement::term(
                SkewKey {
                    start: inst.quiver.arrows[cycle[0]].source,
                    arrows: cycle.clone(),
                    g: 0,
                },
                coeff.clone(),
            ));
        }
        let theta = project(&embedded, &e_tilde, &inst);
        let parts = xi(&inst, &theta).unwrap();
        assert_eq!(parts.components.len(), 2);
        let forward: Vec<usize> = ["x01", "x12", "x23", "x34", "x40"]
            .iter()
            .map(|l| inst.quiver.index_of_label(l).unwrap())
            .collect();
        let backward: Vec<usize> = ["x04", "x43", "x32", "x21", "x10"]
            .iter()
            .map(|l| inst.quiver.index_of_label(l).unwrap())
            .collect();
        for comp in &parts.components {
            assert_eq!(comp.iseq, vec![0; 6]);
            assert_eq!(comp.source, comp.vmodule);
            let row_f = comp
                .f
                .target
                .index_of(&InducedBasisElt {
                    yseq: vec![1; 5],
                    arrows: forward.clone(),
                    vindex: 0,
                })
                .unwrap();
            let row_b = comp
                .f
                .target
                .index_of(&InducedBasisElt {
                    yseq: vec![4; 5],
                    arrows: backward.clone(),
                    vindex: 0,
                })
                .unwrap();
            for row in 0..comp.f.target.dim() {
                let expect = if row == row_f {
                    CycNumber::from_int(1)
                } else if row == row_b {
                    CycNumber::from_int(-1)
                } else {
                    CycNumber::from_int(0)
                };
                assert_eq!(comp.f.coords.get(row, 0).clone(), expect);
            }
        }
        // Reassembly: the components evaluate back to θ.
        let mut rebuilt = SkewElement::zero();
        for comp in &parts.components {
            rebuilt = rebuilt.add(&evaluate(&inst, &comp.f).unwrap());
        }
        assert_eq!(rebuilt, theta);
    }

    #[test]
    fn unit_transports_to_the_lazy_paths() {
        for inst in [d10_instance(), z6_instance(), trivial_instance()] {
            let qg = build_qg(&inst).unwrap();
            let e_tilde = make_e_tilde(&inst);
            let comb = transport(&inst, &qg, &e_tilde, PairingMode::Both).unwrap();
            assert_eq!(comb.num_terms(), qg.num_vertices());
            for (path, coeff) in comb.terms() {
                assert!(path.arrows.is_empty());
                assert_eq!(coeff.clone(), CycNumber::from_int(1));
            }
            let report = verify_roundtrip(&inst, &qg, &e_tilde, &comb).unwrap();
            assert!(report.ok);
        }
    }

    #[test]
    fn single_arrow_images_transport_to_themselves() {
        // θ = f(ε_U) for a Q_G arrow must come back as the single path f
        // with coefficient 1; this is biorthogonality read through Ξ.
        for inst in [d10_instance(), z6_instance()] {
            let qg = build_qg(&inst).unwrap();
            for (id, arrow) in qg.arrows.iter().enumerate() {
                let theta = evaluate(&inst, &arrow.intertwiner).unwrap();
                let comb = transport(&inst, &qg, &theta, PairingMode::Both).unwrap();
                assert_eq!(comb.num_terms(), 1);
                let (path, coeff) = comb.terms().next().unwrap();
                assert_eq!(path.arrows, vec![id]);
                assert_eq!(coeff.clone(), CycNumber::from_int(1));
                let report = verify_roundtrip(&inst, &qg, &theta, &comb).unwrap();
                assert!(report.ok);
            }
        }
    }

    #[test]
    fn potential_transport_is_minus_two_on_parity_matching_paths() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Both).unwrap();
        assert!(pt.invariant);
        assert_eq!(pt.comb.num_terms(), 32);
        for (path, coeff) in pt.comb.terms() {
            assert_eq!(path.arrows.len(), 5);
            let end = qg.path_end(path);
            assert_eq!(
                qg.vertices[path.start].module, qg.vertices[end].module,
                "only parity-matching endpoints carry weight"
            );
            assert_eq!(coeff.clone(), CycNumber::from_int(-2));
        }
        // Both parity classes appear, sixteen paths each.
        let loops_at = |m: usize| {
            pt.comb
                .terms()
                .filter(|(p, _)| qg.vertices[p.start].module == m)
                .count()
        };
        assert_eq!(loops_at(0), 16);
        assert_eq!(loops_at(1), 16);
    }

    #[test]
    fn potential_roundtrip_reconstructs_the_projected_potential() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Fast).unwrap();
        let mut embedded = SkewElement::zero();
        for (cycle, coeff) in &inst.potential.as_ref().unwrap().terms {
            embedded = embedded.add(&SkewElement::term(
                SkewKey {
                    start: inst.quiver.arrows[cycle[0]].source,
                    arrows: cycle.clone(),
                    g: 0,
                },
                coeff.clone(),
            ));
        }
        let theta = project(&embedded, &make_e_tilde(&inst), &inst);
        let report = verify_roundtrip(&inst, &qg, &theta, &pt.comb).unwrap();
        assert!(report.ok, "{:?}", report.detail);
    }

    /// The hub-and-rim potential walks through the 2-dimensional standard
    /// module of S₃, where only the general pairing applies; the round trip
    /// certifies the transported combination exactly.
    #[test]
    fn s3_potential_transport_round_trips_through_the_slow_pairing() {
        let inst = s3_instance();
        let qg = build_qg(&inst).unwrap();
        assert!(!fast_pairing_available(&inst));
        let pt = transport_potential(&inst, &qg, PairingMode::Slow).unwrap();
        assert!(pt.invariant);
        assert!(!pt.comb.is_zero());
        for path in pt.comb.terms().map(|(p, _)| p) {
            assert_eq!(path.arrows.len(), 2);
        }
        let mut embedded = SkewElement::zero();
        for (cycle, coeff) in &inst.potential.as_ref().unwrap().terms {
            embedded = embedded.add(&SkewElement::term(
                SkewKey {
                    start: inst.quiver.arrows[cycle[0]].source,
                    arrows: cycle.clone(),
                    g: 0,
                },
                coeff.clone(),
            ));
        }
        let theta = project(&embedded, &make_e_tilde(&inst), &inst);
        let report = verify_roundtrip(&inst, &qg, &theta, &pt.comb).unwrap();
        assert!(report.ok, "{:?}", report.detail);
    }

    #[test]
    fn corrupted_combination_fails_roundtrip_naming_the_path() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Slow).unwrap();
        let theta = {
            let mut embedded = SkewElement::zero();
            for (cycle, coeff) in &inst.potential.as_ref().unwrap().terms {
                embedded = embedded.add(&SkewElement::term(
                    SkewKey {
                        start: inst.quiver.arrows[cycle[0]].source,
                        arrows: cycle.clone(),
                        g: 0,
                    },
                    coeff.clone(),
                ));
            }
            project(&embedded, &make_e_tilde(&inst), &inst)
        };
        let mut corrupted = pt.comb.clone();
        let victim = corrupted.terms().next().unwrap().0.clone();
        corrupted.add_term(victim.clone(), CycNumber::from_int(1));
        let report = verify_roundtrip(&inst, &qg, &theta, &corrupted).unwrap();
        assert!(!report.ok);
        let detail = report.detail.unwrap();
        let first_label = &qg.arrows[victim.arrows[0]].label;
        assert!(
            detail.contains(first_label.as_str()),
            "detail must name the offending path: {detail}"
        );
    }

    #[test]
    fn transport_is_an_algebra_map_on_arrow_products() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        for i in 0..qg.num_arrows() {
            for j in 0..qg.num_arrows() {
                let a = evaluate(&inst, &qg.arrows[i].intertwiner).unwrap();
                let b = evaluate(&inst, &qg.arrows[j].intertwiner).unwrap();
                let prod = skew_mul(&a, &b, &inst);
                let lhs = transport(&inst, &qg, &prod, PairingMode::Slow).unwrap();
                let rhs = comb_mul(
                    &qg,
                    &transport(&inst, &qg, &a, PairingMode::Slow).unwrap(),
                    &transport(&inst, &qg, &b, PairingMode::Slow).unwrap(),
                );
                assert_eq!(lhs, rhs);
                if qg.arrows[i].target != qg.arrows[j].source {
                    assert!(prod.is_zero());
                    assert!(lhs.is_zero());
                }
            }
        }
    }

    #[test]
    fn transport_is_linear() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let a = evaluate(&inst, &qg.arrows[0].intertwiner).unwrap();
        let b = evaluate(&inst, &qg.arrows[1].intertwiner).unwrap();
        let c = CycNumber::from_int(3);
        let combined = a.add(&b.scale(&c));
        let lhs = transport(&inst, &qg, &combined, PairingMode::Slow).unwrap();
        let rhs = transport(&inst, &qg, &a, PairingMode::Slow)
            .unwrap()
            .add(
                &transport(&inst, &qg, &b, PairingMode::Slow)
                    .unwrap()
                    .scale(&c),
            );
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn trivial_group_potential_passes_through_verbatim() {
        let mut doc = trivial_document();
        doc["potential"] = serde_json::json!([
            {"cycle": ["a", "b"], "coeff": 1}
        ]);
        let parsed: InstanceDocument = serde_json::from_value(doc).unwrap();
        let inst = load_instance(&parsed).unwrap();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Both).unwrap();
        assert!(pt.invariant);
        assert_eq!(pt.comb.num_terms(), 1);
        let (path, coeff) = pt.comb.terms().next().unwrap();
        assert_eq!(coeff.clone(), CycNumber::from_int(1));
        let labels: Vec<&str> = path
            .arrows
            .iter()
            .map(|&a| qg.arrows[a].label.as_str())
            .collect();
        assert_eq!(labels, vec!["f[0,chi0->1,chi0]#0", "f[1,chi0->0,chi0]#0"]);
    }

    #[test]
    fn worker_count_does_not_change_the_result() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let baseline = transport_potential(&inst, &qg, PairingMode::Slow).unwrap();
        std::env::set_var("MORET_WORKERS", "3");
        let threaded = transport_potential(&inst, &qg, PairingMode::Slow).unwrap();
        std::env::remove_var("MORET_WORKERS");
        assert_eq!(baseline.comb, threaded.comb);
    }

    #[test]
    fn e_hat_projects_into_the_corner() {
        // ê = Σ e_i∗e over representatives is itself a corner element and
        // transports to the lazy paths weighted by the unit coefficients.
        let inst = z6_instance();
        let qg = build_qg(&inst).unwrap();
        let e_tilde = make_e_tilde(&inst);
        let projected = project(&e_hat(&inst), &e_tilde, &inst);
        let comb = transport(&inst, &qg, &projected, PairingMode::Slow).unwrap();
        assert_eq!(comb.num_terms(), qg.num_vertices());
        let report = verify_roundtrip(&inst, &qg, &projected, &comb).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn render_and_json_are_stable() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Fast).unwrap();
        let js = pt.comb.to_json(&qg);
        let paths = js["paths"].as_array().unwrap();
        assert_eq!(paths.len(), 32);
        // Coefficients are carried in the instance's working field, here
        // conductor 2.
        assert_eq!(
            paths[0]["coeff"],
            CycNumber::from_int(-2).embed(2).unwrap().to_json()
        );
        assert_eq!(paths[0]["arrows"].as_array().unwrap().len(), 5);
        let text = pt.comb.render(&qg);
        assert!(text.contains("(-2) · f[0,chi0->0,chi0]#0"));
        let js2 = pt.comb.to_json(&qg);
        assert_eq!(js, js2);
        let e_comb = transport(&inst, &qg, &make_e_tilde(&inst), PairingMode::Slow).unwrap();
        assert!(e_comb.render(&qg).contains("e(0,chi0)"));
    }

    #[test]
    fn minus_one_signs_cancel_in_cross_parity_components() {
        // The xi block of ẽWẽ between distinct parities is identically zero,
        // so transport never sees a cross-parity path.
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let pt = transport_potential(&inst, &qg, PairingMode::Slow).unwrap();
        for (path, _) in pt.comb.terms() {
            let end = qg.path_end(path);
            assert_eq!(
                minus_one_pow(qg.vertices[path.start].module),
                minus_one_pow(qg.vertices[end].module)
            );
        }
    }
}
