//! Induced modules M(i̲;V) over vertex stabilizers.
//!
//! For an orbit sequence i̲ = i₀..i_n and a module V over G_{i_n}, the
//! kG_{i₀}-module M(i̲;V) has basis indexed by coset representative
//! sequences y̲ (y_t ∈ [G/G_{i_t}]), arrow paths realizing the walk
//! i₀ → y₁·i₁ → … → (y₁⋯y_n)·i_n, and a V-basis index. An element g of
//! G_{i₀} rewrites g·y₁⋯y_n through the stabilizer chain as y′₁⋯y′_n·h,
//! acts by ^g on the arrow slots, and by h on the V-part.
//!
//! The dual modules M*(i̲ᵒ;U) are the same construction run over the dual
//! arrows with the dual action; a single `Side` flag selects the variant, so
//! every formula is implemented once.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::quiver::{expand_action_on_sequence, Instance};
use crate::rep::ModuleRep;
use crate::CycMatrix;

/// Which bimodule the walk is taken in: the arrow span M or its dual M*.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    M,
    MStar,
}

/// Endpoints of an arrow id on the chosen side; dual arrows keep their
/// primal ids with source and target exchanged.
pub(crate) fn arrow_endpoints(instance: &Instance, side: Side, a: usize) -> (usize, usize) {
    let arrow = &instance.quiver.arrows[a];
    match side {
        Side::M => (arrow.source, arrow.target),
        Side::MStar => (arrow.target, arrow.source),
    }
}

pub(crate) fn side_matrices(instance: &Instance, side: Side) -> &[CycMatrix] {
    match side {
        Side::M => &instance.arrow_action.matrices,
        Side::MStar => &instance.dual_action.matrices,
    }
}

/// One basis element: coset representatives y̲, the realizing arrow path,
/// and the index of a V-basis vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct InducedBasisElt {
    pub yseq: Vec<usize>,
    pub arrows: Vec<usize>,
    pub vindex: usize,
}

/// An induced module with an enumerated basis and exact action matrices of
/// the stabilizer of the walk's start orbit, indexed by stabilizer position.
#[derive(Debug)]
pub struct InducedModule {
    pub side: Side,
    /// Orbit indices of the walk, length n+1.
    pub iseq: Vec<usize>,
    /// (orbit index, module index) of the target module V.
    pub vmodule: (usize, usize),
    pub basis: Vec<InducedBasisElt>,
    index: BTreeMap<InducedBasisElt, usize>,
    /// Action matrices in the column convention, one per element of the
    /// start-orbit stabilizer (by position).
    pub action: Vec<CycMatrix>,
}

impl InducedModule {
    /// Enumerates the basis and builds the action matrices. The enumeration
    /// is depth-first with coset representatives and arrow ids ascending, so
    /// basis order is deterministic.
    pub fn build(
        instance: &Instance,
        side: Side,
        iseq: Vec<usize>,
        vmodule: (usize, usize),
    ) -> Arc<InducedModule> {
        assert!(!iseq.is_empty(), "orbit sequence must have length ≥ 1");
        assert_eq!(
            vmodule.0,
            *iseq.last().expect("nonempty"),
            "target module must live over the walk's end orbit"
        );
        let v = instance.module(vmodule.0, vmodule.1);
        let n = iseq.len() - 1;
        let mut basis = Vec::new();
        enumerate(
            instance,
            side,
            &iseq,
            v,
            instance.orbits.reps[iseq[0]],
            0,
            n,
            &mut Vec::new(),
            &mut Vec::new(),
            &mut basis,
        );
        let index: BTreeMap<InducedBasisElt, usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, b)| (b, k))
            .collect();
        let mut module = InducedModule {
            side,
            iseq,
            vmodule,
            basis,
            index,
            action: Vec::new(),
        };
        module.action = module.build_action(instance, v);
        Arc::new(module)
    }

    fn build_action(&self, instance: &Instance, v: &ModuleRep) -> Vec<CycMatrix> {
        let start_stab = instance.stabilizer(self.iseq[0]);
        let end_stab = instance.stabilizer(*self.iseq.last().expect("nonempty"));
        let group = &instance.group;
        let matrices = side_matrices(instance, self.side);
        let dim = self.basis.len();
        let mut action = Vec::with_capacity(start_stab.order());
        for &g in &start_stab.elements {
            let mut m: CycMatrix = Matrix::zero(dim, dim);
            for (col, elt) in self.basis.iter().enumerate() {
                // Rewrite g·y₁⋯y_n = y′₁⋯y′_n·h through the chain.
                let mut z = g;
                let mut yprime = Vec::with_capacity(elt.yseq.len());
                for (t, &y) in elt.yseq.iter().enumerate() {
                    let stab_t = &instance.orbits.stabilizers[self.iseq[t + 1]];
                    let (y2, h) = stab_t.factorize(group.mul(z, y));
                    yprime.push(y2);
                    z = h;
                }
                let h_end = z;
                let h_pos = end_stab
                    .position[h_end]
                    .expect("chain tail lies in the end stabilizer");
                let vact = &v.action[h_pos];
                for (image, w) in expand_action_on_sequence(&matrices[g], &elt.arrows) {
                    for v2 in 0..v.dim {
                        let coeff = w.clone() * vact.get(v2, elt.vindex).clone();
                        if coeff.is_zero() {
                            continue;
                        }
                        let target = InducedBasisElt {
                            yseq: yprime.clone(),
                            arrows: image.clone(),
                            vindex: v2,
                        };
                        let row = *self
                            .index
                            .get(&target)
                            .expect("action image is a basis element");
                        m.set(row, col, m.get(row, col).clone() + coeff);
                    }
                }
            }
            action.push(m);
        }
        action
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> usize {
        self.iseq.len() - 1
    }

    pub fn start_orbit(&self) -> usize {
        self.iseq[0]
    }

    pub fn end_orbit(&self) -> usize {
        *self.iseq.last().expect("nonempty")
    }

    pub fn index_of(&self, elt: &InducedBasisElt) -> Option<usize> {
        self.index.get(elt).copied()
    }

    /// Homomorphism check of the action matrices against the stabilizer's
    /// multiplication, used by the test suites.
    pub fn validate_action(&self, instance: &Instance) -> Result<()> {
        let sub = &instance.stab_groups[self.iseq[0]];
        if self.action[0] != Matrix::identity(self.dim()) {
            return Err(Error::Internal(
                "induced action: identity does not act as the identity".into(),
            ));
        }
        for a in 0..sub.order() {
            for b in 0..sub.order() {
                if self.action[a].mul(&self.action[b]) != self.action[sub.mul(a, b)] {
                    return Err(Error::Internal(format!(
                        "induced action violates the homomorphism law at positions ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Depth-first basis enumeration: at slot t the walk sits at `at`; choose
/// y_{t+1} among the coset representatives of the next orbit, then an arrow
/// to the moved vertex, recursing until all n slots are filled.
#[allow(clippy::too_many_arguments)]
fn enumerate(
    instance: &Instance,
    side: Side,
    iseq: &[usize],
    v: &ModuleRep,
    at: usize,
    prefix: usize,
    remaining: usize,
    yseq: &mut Vec<usize>,
    arrows: &mut Vec<usize>,
    out: &mut Vec<InducedBasisElt>,
) {
    if remaining == 0 {
        for vindex in 0..v.dim {
            out.push(InducedBasisElt {
                yseq: yseq.clone(),
                arrows: arrows.clone(),
                vindex,
            });
        }
        return;
    }
    let t = yseq.len();
    let next_orbit = iseq[t + 1];
    let rep = instance.orbits.reps[next_orbit];
    for &y in &instance.orbits.stabilizers[next_orbit].coset_reps {
        let moved = instance.group.mul(prefix, y);
        let target = instance.act_vertex(moved, rep);
        for a in 0..instance.quiver.num_arrows() {
            let (src, tgt) = arrow_endpoints(instance, side, a);
            if src != at || tgt != target {
                continue;
            }
            yseq.push(y);
            arrows.push(a);
            enumerate(
                instance,
                side,
                iseq,
                v,
                target,
                moved,
                remaining - 1,
                yseq,
                arrows,
                out,
            );
            yseq.pop();
            arrows.pop();
        }
    }
}
