//! The reduced quiver Q_G.
//!
//! Vertices are pairs (i, U) of an orbit representative and an irreducible
//! module of its stabilizer; the arrows (i, U) → (j, V) form a basis of
//! Hom_{kG_i}(U, M(i,j;V)). Each arrow carries both its intertwiner and the
//! dual intertwiner V → M*(j,i;U) it pairs to 1 with: the dual side keeps
//! the echelon hom basis, and the arrow side is corrected by the inverse of
//! the Gram matrix of pairings, so that the pairing of arrow k against dual
//! l is exactly δ_{kl}. Non-degeneracy of the pairing makes the Gram matrix
//! invertible; a singular Gram matrix therefore aborts as an internal error.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::induced::{InducedModule, Side};
use crate::intertwiner::{hom_intertwiners, pairing, Intertwiner};
use crate::matrix::Matrix;
use crate::quiver::Instance;
use crate::CycMatrix;

/// A vertex (i, U) of Q_G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QgVertex {
    /// Index into the orbit list.
    pub orbit: usize,
    /// Index into the module list of that orbit's stabilizer.
    pub module: usize,
    /// The ambient vertex the orbit is represented by.
    pub rep: usize,
    /// Label of the module within its stabilizer.
    pub module_label: String,
    /// Rendered as `(rep,module label)`.
    pub label: String,
}

/// An arrow of Q_G with its intertwiner basis data.
#[derive(Clone, Debug)]
pub struct QgArrow {
    /// Index of the source vertex in `QGQuiver::vertices`.
    pub source: usize,
    /// Index of the target vertex.
    pub target: usize,
    /// Position within the arrow space of this vertex pair.
    pub index: usize,
    /// `f[i,U->j,V]#k`, stable across runs.
    pub label: String,
    /// The arrow as a map U → M(i,j;V), normalized against the duals.
    pub intertwiner: Intertwiner,
    /// The dual map V → M*(j,i;U); pairing `intertwiner` of arrow k against
    /// `dual` of arrow l in the same space gives δ_{kl}.
    pub dual: Intertwiner,
}

/// A path of Q_G, possibly lazy, as a composable arrow-id sequence.
#[derive(Clone, Debug, PartialEq, Eq, Ord, PartialOrd)]
pub struct QgPath {
    /// Start vertex; redundant for nonempty paths, defining for lazy ones.
    pub start: usize,
    pub arrows: Vec<usize>,
}

/// The Morita-reduced quiver with intertwiner data on every arrow.
#[derive(Clone, Debug)]
pub struct QGQuiver {
    pub vertices: Vec<QgVertex>,
    pub arrows: Vec<QgArrow>,
    vertex_index: BTreeMap<(usize, usize), usize>,
}

impl QGQuiver {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    /// Vertex index of (orbit, module).
    pub fn vertex_of(&self, orbit: usize, module: usize) -> Option<usize> {
        self.vertex_index.get(&(orbit, module)).copied()
    }

    pub fn arrow_by_label(&self, label: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.label == label)
    }

    /// End vertex of a path.
    pub fn path_end(&self, path: &QgPath) -> usize {
        path.arrows
            .last()
            .map(|&a| self.arrows[a].target)
            .unwrap_or(path.start)
    }

    /// All composable paths of length n, in lexicographic arrow-id order
    /// (lazy paths ordered by vertex), optionally filtered by endpoints.
    pub fn paths(
        &self,
        n: usize,
        source: Option<usize>,
        target: Option<usize>,
    ) -> Vec<QgPath> {
        let mut out = Vec::new();
        let starts: Vec<usize> = match source {
            Some(s) => vec![s],
            None => (0..self.vertices.len()).collect(),
        };
        // Arrow ids grouped by source, ascending, for lexicographic descent.
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (id, a) in self.arrows.iter().enumerate() {
            outgoing[a.source].push(id);
        }
        fn descend(
            qg: &QGQuiver,
            outgoing: &[Vec<usize>],
            at: usize,
            remaining: usize,
            target: Option<usize>,
            prefix: &mut Vec<usize>,
            start: usize,
            out: &mut Vec<QgPath>,
        ) {
            if remaining == 0 {
                if target.map(|t| t == at).unwrap_or(true) {
                    out.push(QgPath {
                        start,
                        arrows: prefix.clone(),
                    });
                }
                return;
            }
            for &id in &outgoing[at] {
                prefix.push(id);
                descend(
                    qg,
                    outgoing,
                    qg.arrows[id].target,
                    remaining - 1,
                    target,
                    prefix,
                    start,
                    out,
                );
                prefix.pop();
            }
        }
        for s in starts {
            let mut prefix = Vec::new();
            descend(self, &outgoing, s, n, target, &mut prefix, s, &mut out);
        }
        out
    }

    /// Number of paths of length n between the given endpoints.
    pub fn count_paths(&self, n: usize, source: Option<usize>, target: Option<usize>) -> usize {
        self.paths(n, source, target).len()
    }

    /// GraphViz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph QG {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!("  q{i} [label=\"{}\"];\n", v.label));
        }
        for a in &self.arrows {
            out.push_str(&format!(
                "  q{} -> q{} [label=\"{}\"];\n",
                a.source, a.target, a.label
            ));
        }
        out.push_str("}\n");
        out
    }

    /// JSON listing of vertices, per-pair arrow multiplicities, and the
    /// serialized intertwiner of every arrow with its dual.
    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                json!({
                    "index": i,
                    "orbit_rep": v.rep,
                    "module": v.module_label,
                    "label": v.label,
                })
            })
            .collect();
        let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for a in &self.arrows {
            *mult.entry((a.source, a.target)).or_insert(0) += 1;
        }
        let multiplicities: Vec<Value> = mult
            .into_iter()
            .map(|((s, t), c)| json!([s, t, c]))
            .collect();
        let arrows: Vec<Value> = self
            .arrows
            .iter()
            .map(|a| {
                json!({
                    "label": a.label,
                    "source": a.source,
                    "target": a.target,
                    "intertwiner": a.intertwiner.to_json(),
                    "dual": a.dual.to_json(),
                })
            })
            .collect();
        json!({
            "vertices": vertices,
            "multiplicities": multiplicities,
            "arrows": arrows,
        })
    }

}

/// Builds Q_G: for every ordered vertex pair, the hom bases on the M and M*
/// sides, their Gram matrix of pairings, and the normalized arrow basis.
pub fn build_qg(instance: &Instance) -> Result<QGQuiver> {
    let mut vertices = Vec::new();
    let mut vertex_index = BTreeMap::new();
    for (orbit, mods) in instance.modules.iter().enumerate() {
        let rep = instance.orbits.reps[orbit];
        for (module, m) in mods.iter().enumerate() {
            vertex_index.insert((orbit, module), vertices.len());
            vertices.push(QgVertex {
                orbit,
                module,
                rep,
                module_label: m.label.clone(),
                label: format!("({},{})", rep, m.label),
            });
        }
    }
    let mut arrows = Vec::new();
    for (src, sv) in vertices.iter().enumerate() {
        for (tgt, tv) in vertices.iter().enumerate() {
            let m_mod = InducedModule::build(
                instance,
                Side::M,
                vec![sv.orbit, tv.orbit],
                (tv.orbit, tv.module),
            );
            let homs = hom_intertwiners(instance, (sv.orbit, sv.module), &m_mod);
            let mstar = InducedModule::build(
                instance,
                Side::MStar,
                vec![tv.orbit, sv.orbit],
                (sv.orbit, sv.module),
            );
            let duals = hom_intertwiners(instance, (tv.orbit, tv.module), &mstar);
            if homs.len() != duals.len() {
                return Err(Error::Internal(format!(
                    "hom spaces {} -> {} have mismatched dimensions {} and {}",
                    sv.label,
                    tv.label,
                    homs.len(),
                    duals.len()
                )));
            }
            let n = homs.len();
            if n == 0 {
                continue;
            }
            let mut gram_rows = Vec::with_capacity(n);
            for f in &homs {
                let mut row = Vec::with_capacity(n);
                for phi in &duals {
                    row.push(pairing(instance, f, phi)?);
                }
                gram_rows.push(row);
            }
            let gram: CycMatrix = Matrix::from_rows(gram_rows);
            let ginv = gram.inverse().ok_or_else(|| {
                Error::Internal(format!(
                    "Gram matrix of the arrow space {} -> {} is singular",
                    sv.label, tv.label
                ))
            })?;
            for k in 0..n {
                let mut coords: CycMatrix =
                    Matrix::zero(homs[0].coords.rows(), homs[0].coords.cols());
                for (m, hom) in homs.iter().enumerate() {
                    let c = ginv.get(k, m);
                    if c.is_zero() {
                        continue;
                    }
                    coords = coords.add(&hom.coords.scale(c));
                }
                let f = Intertwiner::new(
                    instance,
                    (sv.orbit, sv.module),
                    Arc::clone(&m_mod),
                    coords,
                )?;
                for (l, phi) in duals.iter().enumerate() {
                    let expect = CycNumber::from_int(if l == k { 1 } else { 0 });
                    if pairing(instance, &f, phi)? != expect {
                        return Err(Error::Internal(format!(
                            "normalized arrow {k} of {} -> {} fails biorthogonality \
                             against dual {l}",
                            sv.label, tv.label
                        )));
                    }
                }
                arrows.push(QgArrow {
                    source: src,
                    target: tgt,
                    index: k,
                    label: format!(
                        "f[{},{}->{},{}]#{k}",
                        sv.rep,
                        instance.module(sv.orbit, sv.module).label,
                        tv.rep,
                        instance.module(tv.orbit, tv.module).label
                    ),
                    intertwiner: f,
                    dual: duals[k].clone(),
                });
            }
        }
    }
    Ok(QGQuiver {
        vertices,
        arrows,
        vertex_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intertwiner::{evaluate, f_gamma, phi_gamma};
    use crate::quiver::test_instances::{
        d10_instance, nonmono_z2_instance, s3_instance, trivial_instance, z2swap_instance,
        z6_instance,
    };
    use crate::rational::rat;
    use crate::skew::{skew_graded_dimension, SkewElement, SkewKey};

    fn minus_one_pow(e: usize) -> CycNumber {
        CycNumber::from_int(if e % 2 == 0 { 1 } else { -1 })
    }

    #[test]
    fn trivial_group_reduction_is_the_quiver_itself() {
        let inst = trivial_instance();
        let qg = build_qg(&inst).unwrap();
        assert_eq!(qg.num_vertices(), 2);
        assert_eq!(qg.num_arrows(), 2);
        // Each Q_G arrow evaluates to the corresponding ambient arrow.
        for a in &qg.arrows {
            let val = evaluate(&inst, &a.intertwiner).unwrap();
            let from = qg.vertices[a.source].rep;
            let ambient = inst
                .quiver
                .arrows
                .iter()
                .position(|arr| arr.source == from)
                .unwrap();
            let expect = SkewElement::term(
                SkewKey {
                    start: from,
                    arrows: vec![ambient],
                    g: 0,
                },
                CycNumber::from_int(1),
            );
            assert_eq!(val, expect);
        }
    }

    #[test]
    fn dihedral_reduction_matches_the_two_vertex_four_arrow_quiver() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        assert_eq!(qg.num_vertices(), 2);
        assert_eq!(qg.num_arrows(), 4);
        assert_eq!(qg.vertices[0].label, "(0,chi0)");
        assert_eq!(qg.vertices[1].label, "(0,chi1)");
        let labels: Vec<&str> = qg.arrows.iter().map(|a| a.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "f[0,chi0->0,chi0]#0",
                "f[0,chi0->0,chi1]#0",
                "f[0,chi1->0,chi0]#0",
                "f[0,chi1->0,chi1]#0",
            ]
        );
        // Normalized arrow coordinates: the echelon intertwiner divided by
        // its Gram value 2·(−1)^{1+s+t}.
        for a in &qg.arrows {
            let s = qg.vertices[a.source].module;
            let t = qg.vertices[a.target].module;
            let half = CycNumber::from_rational(rat(1, 2));
            assert_eq!(
                a.intertwiner.coords.get(0, 0).clone(),
                half.clone() * minus_one_pow(1 + s + t)
            );
            assert_eq!(a.intertwiner.coords.get(1, 0).clone(), half);
            // Duals keep leading coefficient one.
            assert_eq!(a.dual.coords.get(0, 0).clone(), CycNumber::from_int(1));
            assert_eq!(
                a.dual.coords.get(1, 0).clone(),
                minus_one_pow(1 + s + t)
            );
            assert_eq!(
                pairing(&inst, &a.intertwiner, &a.dual).unwrap(),
                CycNumber::from_int(1)
            );
        }
    }

    #[test]
    fn swap_action_reduction_is_a_single_loop() {
        let inst = z2swap_instance();
        let qg = build_qg(&inst).unwrap();
        assert_eq!(qg.num_vertices(), 1);
        assert_eq!(qg.num_arrows(), 1);
        assert_eq!(qg.arrows[0].source, qg.arrows[0].target);
        // Independent dimension count in the ambient algebra.
        assert_eq!(skew_graded_dimension(&inst, 1).unwrap(), 1);
        // A single loop has exactly one path of each length.
        assert_eq!(qg.count_paths(7, None, None), 1);
        assert_eq!(qg.count_paths(0, None, None), 1);
    }

    #[test]
    fn twisted_swap_reduction_is_a_three_cycle() {
        let inst = z6_instance();
        let qg = build_qg(&inst).unwrap();
        assert_eq!(qg.num_vertices(), 3);
        assert_eq!(qg.num_arrows(), 3);
        // Each χ_{t+1} maps onto χ_t; together the arrows form a 3-cycle.
        for a in &qg.arrows {
            let s = qg.vertices[a.source].module;
            let t = qg.vertices[a.target].module;
            assert_eq!(s, (t + 1) % 3);
        }
        assert_eq!(qg.count_paths(3, Some(0), Some(0)), 1);
        assert_eq!(qg.count_paths(1, Some(0), Some(0)), 0);
    }

    #[test]
    fn nonmonomial_shear_reduction_has_four_arrows() {
        let inst = nonmono_z2_instance();
        let qg = build_qg(&inst).unwrap();
        assert_eq!(qg.num_vertices(), 2);
        assert_eq!(qg.num_arrows(), 4);
        for a in &qg.arrows {
            assert_eq!(
                pairing(&inst, &a.intertwiner, &a.dual).unwrap(),
                CycNumber::from_int(1)
            );
        }
    }

    #[test]
    fn graded_dimensions_match_the_ambient_corner_algebra() {
        for inst in [
            trivial_instance(),
            z2swap_instance(),
            z6_instance(),
            nonmono_z2_instance(),
            d10_instance(),
            s3_instance(),
        ] {
            let qg = build_qg(&inst).unwrap();
            for n in 0..=3 {
                assert_eq!(
                    qg.count_paths(n, None, None),
                    skew_graded_dimension(&inst, n).unwrap(),
                    "degree {n} of {}",
                    inst.name
                );
            }
        }
    }

    /// Oracle for the hub-and-rim quiver: spokes out of the hub form the
    /// permutation module of S₃ on G/⟨τ⟩, so by Frobenius reciprocity
    /// Hom(U, Ind χ_s) = Hom(Res U, χ_s); spokes into the hub restrict U to
    /// ⟨τ⟩, where triv ↦ χ₀, sign ↦ χ₁ and std splits as χ₀ ⊕ χ₁.
    #[test]
    fn s3_reduced_quiver_matches_frobenius_reciprocity() {
        let inst = s3_instance();
        let qg = build_qg(&inst).unwrap();
        assert_eq!(qg.num_vertices(), 5);
        assert_eq!(qg.num_arrows(), 8);
        let v = |label: &str| {
            qg.vertices
                .iter()
                .position(|x| x.label == label)
                .unwrap_or_else(|| panic!("missing vertex {label}"))
        };
        let hub = ["(0,triv)", "(0,sign)", "(0,std)"].map(|l| v(l));
        let rim = ["(1,chi0)", "(1,chi1)"].map(|l| v(l));
        let mult = |s: usize, t: usize| {
            qg.arrows
                .iter()
                .filter(|a| a.source == s && a.target == t)
                .count()
        };
        let expected_out = [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1), (2, 0, 1), (2, 1, 1)];
        for (u, s, c) in expected_out {
            assert_eq!(mult(hub[u], rim[s]), c, "hub {u} -> rim {s}");
            assert_eq!(mult(rim[s], hub[u]), c, "rim {s} -> hub {u}");
        }
        for a in &hub {
            for b in &hub {
                assert_eq!(mult(*a, *b), 0, "no hub loops");
            }
        }
        for a in &rim {
            for b in &rim {
                assert_eq!(mult(*a, *b), 0, "no rim loops");
            }
        }
    }

    #[test]
    fn path_counts_match_the_transfer_matrix() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        // Adjacency is the 2×2 all-ones matrix; its 5th power has every
        // entry 16, so 16 paths per ordered endpoint pair and 64 total.
        let mut adj = vec![vec![0usize; 2]; 2];
        for a in &qg.arrows {
            adj[a.source][a.target] += 1;
        }
        let mut power = vec![vec![1usize, 0], vec![0, 1]];
        for _ in 0..5 {
            let mut next = vec![vec![0usize; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        next[i][j] += power[i][k] * adj[k][j];
                    }
                }
            }
            power = next;
        }
        let mut total = 0;
        for s in 0..2 {
            for t in 0..2 {
                let c = qg.count_paths(5, Some(s), Some(t));
                assert_eq!(c, power[s][t]);
                assert_eq!(c, 16);
                total += c;
            }
        }
        assert_eq!(total, 64);
        assert_eq!(qg.count_paths(5, None, None), 64);
    }

    #[test]
    fn lazy_paths_enumerate_vertices() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let lazy = qg.paths(0, None, None);
        assert_eq!(lazy.len(), 2);
        assert!(lazy.iter().enumerate().all(|(i, p)| p.start == i && p.arrows.is_empty()));
        assert_eq!(qg.paths(0, Some(1), Some(0)).len(), 0);
    }

    #[test]
    fn paths_are_lexicographically_ordered_and_composable() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let paths = qg.paths(2, None, None);
        assert_eq!(paths.len(), 8);
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(paths, sorted);
        for p in &paths {
            for w in p.arrows.windows(2) {
                assert_eq!(qg.arrows[w[0]].target, qg.arrows[w[1]].source);
            }
        }
    }

    #[test]
    fn chain_biorthogonality_holds_for_parallel_paths() {
        // (f_γ | φ_{γ′}) = δ_{γγ′} for parallel paths γ, γ′ of length ≤ 3.
        for inst in [d10_instance(), z6_instance()] {
            let qg = build_qg(&inst).unwrap();
            for n in 1..=2 {
                let paths = qg.paths(n, None, None);
                for p in &paths {
                    let factors: Vec<&Intertwiner> =
                        p.arrows.iter().map(|&a| &qg.arrows[a].intertwiner).collect();
                    let at = (
                        qg.vertices[p.start].orbit,
                        qg.vertices[p.start].module,
                    );
                    let f = f_gamma(&inst, at, &factors).unwrap();
                    for q in &paths {
                        if q.start != p.start || qg.path_end(q) != qg.path_end(p) {
                            continue;
                        }
                        let duals: Vec<&Intertwiner> =
                            q.arrows.iter().map(|&a| &qg.arrows[a].dual).collect();
                        let phi = phi_gamma(&inst, at, &duals).unwrap();
                        let expect = CycNumber::from_int(if p == q { 1 } else { 0 });
                        assert_eq!(pairing(&inst, &f, &phi).unwrap(), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn exports_render_vertices_and_arrows() {
        let inst = d10_instance();
        let qg = build_qg(&inst).unwrap();
        let dot = qg.to_dot();
        assert!(dot.contains("q0 [label=\"(0,chi0)\"]"));
        assert!(dot.contains("label=\"f[0,chi1->0,chi0]#0\""));
        let js = qg.to_json();
        assert_eq!(js["vertices"].as_array().unwrap().len(), 2);
        assert_eq!(js["arrows"].as_array().unwrap().len(), 4);
        assert_eq!(js["multiplicities"].as_array().unwrap().len(), 4);
        assert_eq!(js["vertices"][0]["module"], "chi0");
        assert!(js["arrows"][0]["intertwiner"].as_array().unwrap().len() >= 1);
    }
}
