//! Intertwiners U → M(i̲;V), their composition product ⊛, and the pairing
//! against dual intertwiners V → M*(i̲ᵒ;U).
//!
//! An intertwiner is stored as an explicit coordinate matrix over the
//! enumerated basis of its target induced module: column k holds the image
//! of the k-th basis vector of the source module U. Composition translates
//! the second factor's arrow slots by the first factor's group prefix and
//! concatenates; the pairing contracts arrow slots against dual-arrow slots
//! along the chain factorization of the coset prefix and produces a scalar
//! by Schur's lemma. A combinatorial shortcut evaluates the same pairing on
//! monomial instances with one-dimensional modules.

use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::group::chain_factorize;
use crate::induced::{side_matrices, InducedBasisElt, InducedModule, Side};
use crate::matrix::Matrix;
use crate::quiver::{expand_action_on_sequence, Instance};
use crate::rep::hom_basis;
use crate::skew::{SkewElement, SkewKey};
use crate::CycMatrix;

/// A module homomorphism U → M(i̲;V) (or U → M*(i̲ᵒ;V) when the target is
/// built on the dual side), given by its coordinate matrix.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    /// (orbit, module index) of the source module U.
    pub source: (usize, usize),
    pub target: Arc<InducedModule>,
    /// dim(target) × dim(U); column k is the image of the k-th basis vector.
    pub coords: CycMatrix,
}

impl PartialEq for Intertwiner {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target.side == other.target.side
            && self.target.iseq == other.target.iseq
            && self.target.vmodule == other.target.vmodule
            && self.coords == other.coords
    }
}

impl Intertwiner {
    /// Wraps a coordinate matrix, checking shape and exact equivariance
    /// coords·ρ_U(g) = A(g)·coords for every stabilizer element g.
    pub fn new(
        instance: &Instance,
        source: (usize, usize),
        target: Arc<InducedModule>,
        coords: CycMatrix,
    ) -> Result<Intertwiner> {
        if source.0 != target.start_orbit() {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "source orbit {} differs from the walk's start orbit {}",
                    source.0,
                    target.start_orbit()
                ),
            });
        }
        let u = instance.module(source.0, source.1);
        if coords.rows() != target.dim() || coords.cols() != u.dim {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "coordinate matrix is {}×{}, expected {}×{}",
                    coords.rows(),
                    coords.cols(),
                    target.dim(),
                    u.dim
                ),
            });
        }
        for pos in 0..u.action.len() {
            if coords.mul(&u.action[pos]) != target.action[pos].mul(&coords) {
                return Err(Error::NotIntertwiner(format!(
                    "map does not commute with stabilizer element at position {pos}"
                )));
            }
        }
        Ok(Intertwiner {
            source,
            target,
            coords,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(
        source: (usize, usize),
        target: Arc<InducedModule>,
        coords: CycMatrix,
    ) -> Intertwiner {
        Intertwiner {
            source,
            target,
            coords,
        }
    }

    /// The unit ε_{(i,U)}: the identity of U viewed as a degree-0
    /// intertwiner into M(i;U) = U.
    pub fn unit(instance: &Instance, orbit: usize, module: usize, side: Side) -> Intertwiner {
        let target = InducedModule::build(instance, side, vec![orbit], (orbit, module));
        let dim = target.dim();
        Intertwiner {
            source: (orbit, module),
            target,
            coords: Matrix::identity(dim),
        }
    }

    pub fn degree(&self) -> usize {
        self.target.degree()
    }

    pub fn side(&self) -> Side {
        self.target.side
    }

    pub fn scale(&self, c: &CycNumber) -> Intertwiner {
        Intertwiner {
            source: self.source,
            target: Arc::clone(&self.target),
            coords: self.coords.scale(c),
        }
    }

    /// Sum of two intertwiners with identical source and target data.
    pub fn try_add(&self, other: &Intertwiner) -> Result<Intertwiner> {
        if self.source != other.source
            || self.target.side != other.target.side
            || self.target.iseq != other.target.iseq
            || self.target.vmodule != other.target.vmodule
        {
            return Err(Error::ShapeMismatch {
                context: "cannot add intertwiners with different endpoint data".into(),
            });
        }
        Ok(Intertwiner {
            source: self.source,
            target: Arc::clone(&self.target),
            coords: self.coords.add(&other.coords),
        })
    }

    /// Serialization as a list of
    /// (U-basis index, y̲, arrow ids, V-basis index, coefficient) tuples,
    /// one per nonzero coordinate.
    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for k in 0..self.coords.cols() {
            for (row, elt) in self.target.basis.iter().enumerate() {
                let c = self.coords.get(row, k);
                if c.is_zero() {
                    continue;
                }
                entries.push(json!([k, elt.yseq, elt.arrows, elt.vindex, c.to_json()]));
            }
        }
        Value::Array(entries)
    }
}

/// All intertwiners from a module into an induced module, as the exact
/// solution basis of the equivariance equations. Coordinates are reduced
/// row echelon vectors with leading coefficient one, so the basis is
/// deterministic.
pub fn hom_intertwiners(
    instance: &Instance,
    source: (usize, usize),
    target: &Arc<InducedModule>,
) -> Vec<Intertwiner> {
    let u = instance.module(source.0, source.1);
    hom_basis(&u.action, &target.action)
        .into_iter()
        .map(|coords| Intertwiner {
            source,
            target: Arc::clone(target),
            coords,
        })
        .collect()
}

/// The composition product f′ ⊛ f of intertwiners along consecutive walks:
/// f covers i₀..i_m, f′ covers i_m..i_{m+n}, and the target module data of
/// f must equal the source data of f′. The composite concatenates the coset
/// sequences, translates the arrow slots of f′ by ^{y₁⋯y_m}, and applies f′
/// to the V-part of f.
pub fn circledast(
    instance: &Instance,
    fprime: &Intertwiner,
    f: &Intertwiner,
) -> Result<Intertwiner> {
    if f.target.side != fprime.target.side {
        return Err(Error::ShapeMismatch {
            context: "cannot compose intertwiners on different sides".into(),
        });
    }
    if f.target.vmodule != fprime.source {
        return Err(Error::ShapeMismatch {
            context: format!(
                "end data {:?} of the first factor differs from the source data {:?} \
                 of the second",
                f.target.vmodule, fprime.source
            ),
        });
    }
    let side = f.target.side;
    let mut iseq = f.target.iseq.clone();
    iseq.extend_from_slice(&fprime.target.iseq[1..]);
    let target = InducedModule::build(instance, side, iseq, fprime.target.vmodule);
    let u = instance.module(f.source.0, f.source.1);
    let matrices = side_matrices(instance, side);
    let mut coords: CycMatrix = Matrix::zero(target.dim(), u.dim);
    for (row_f, elt_f) in f.target.basis.iter().enumerate() {
        let prefix = instance.group.product(&elt_f.yseq);
        for (row_fp, elt_fp) in fprime.target.basis.iter().enumerate() {
            let weight = fprime.coords.get(row_fp, elt_f.vindex);
            if weight.is_zero() {
                continue;
            }
            for (moved, w) in expand_action_on_sequence(&matrices[prefix], &elt_fp.arrows) {
                let mut yseq = elt_f.yseq.clone();
                yseq.extend_from_slice(&elt_fp.yseq);
                let mut arrows = elt_f.arrows.clone();
                arrows.extend_from_slice(&moved);
                let combined = InducedBasisElt {
                    yseq,
                    arrows,
                    vindex: elt_fp.vindex,
                };
                let row = target
                    .index_of(&combined)
                    .expect("translated slots realize the concatenated walk");
                for k in 0..u.dim {
                    let c = f.coords.get(row_f, k);
                    if c.is_zero() {
                        continue;
                    }
                    let add = c.clone() * weight.clone() * w.clone();
                    coords.set(row, k, coords.get(row, k).clone() + add);
                }
            }
        }
    }
    Intertwiner::new(instance, f.source, target, coords)
}

/// f_γ = f_n ⊛ f_{n−1} ⊛ ⋯ ⊛ f₁ for a path whose arrows are given in walk
/// order. The empty path at `at` gives the unit intertwiner.
pub fn f_gamma(instance: &Instance, at: (usize, usize), arrows: &[&Intertwiner]) -> Result<Intertwiner> {
    match arrows.split_first() {
        None => Ok(Intertwiner::unit(instance, at.0, at.1, Side::M)),
        Some((first, rest)) => {
            let mut acc = (*first).clone();
            for f in rest {
                acc = circledast(instance, f, &acc)?;
            }
            Ok(acc)
        }
    }
}

/// φ_γ = f₁^∨ ⊛ f₂^∨ ⊛ ⋯ ⊛ f_n^∨ with the duals given in walk order of γ,
/// folded from the right so that f_n^∨ is the first walk segment on the
/// dual side. The empty path at `at` gives the unit on M*.
pub fn phi_gamma(
    instance: &Instance,
    at: (usize, usize),
    duals: &[&Intertwiner],
) -> Result<Intertwiner> {
    match duals.split_last() {
        None => Ok(Intertwiner::unit(instance, at.0, at.1, Side::MStar)),
        Some((last, init)) => {
            let mut acc = (*last).clone();
            for phi in init.iter().rev() {
                acc = circledast(instance, phi, &acc)?;
            }
            Ok(acc)
        }
    }
}

fn check_pairing_compat(f: &Intertwiner, phi: &Intertwiner) -> Result<()> {
    if f.target.side != Side::M || phi.target.side != Side::MStar {
        return Err(Error::PairingMismatch(
            "pairing takes an intertwiner into M and one into M*".into(),
        ));
    }
    if !phi.target.iseq.iter().rev().eq(f.target.iseq.iter()) {
        return Err(Error::PairingMismatch(format!(
            "orbit walks {:?} and {:?} are not mutually reversed",
            f.target.iseq, phi.target.iseq
        )));
    }
    if phi.source != f.target.vmodule || phi.target.vmodule != f.source {
        return Err(Error::PairingMismatch(format!(
            "endpoint module data ({:?} → {:?} against {:?} → {:?}) does not match",
            f.source, f.target.vmodule, phi.source, phi.target.vmodule
        )));
    }
    Ok(())
}

/// The pairing (f|φ): the scalar by which the contraction of f against φ
/// acts on U. For every f-block (y̲, a̲, v) the dual blocks are read at
/// z̲ = (x_{n−1}, …, x₀) from the chain factorization of y̲; arrow slot t
/// contracts the dual slot n+1−t through ^{(y₁⋯y_n)⁻¹}, and the U-part is
/// twisted by h₀⁻¹. The accumulated matrix on U must be scalar; anything
/// else means the inputs were not intertwiners.
pub fn pairing(instance: &Instance, f: &Intertwiner, phi: &Intertwiner) -> Result<CycNumber> {
    check_pairing_compat(f, phi)?;
    let group = &instance.group;
    let u = instance.module(f.source.0, f.source.1);
    let start_stab = instance.stabilizer(f.source.0);
    let n = f.degree();
    let primal = &instance.arrow_action.matrices;
    // Dual basis rows grouped by coset sequence for direct lookup.
    let mut by_zseq: std::collections::BTreeMap<&[usize], Vec<usize>> = Default::default();
    for (row, elt) in phi.target.basis.iter().enumerate() {
        by_zseq.entry(&elt.yseq).or_default().push(row);
    }
    let mut w: CycMatrix = Matrix::zero(u.dim, u.dim);
    for (row_f, elt_f) in f.target.basis.iter().enumerate() {
        let (xs, h0) = chain_factorize(group, &instance.orbits, &f.target.iseq, &elt_f.yseq);
        let zseq: Vec<usize> = xs.iter().rev().copied().collect();
        let p = group.inv(group.product(&elt_f.yseq));
        let mp = &primal[p];
        let h0_pos = start_stab.position[group.inv(h0)].expect("h₀ lies in the start stabilizer");
        let uact = &u.action[h0_pos];
        if let Some(rows_p) = by_zseq.get(zseq.as_slice()) {
            for &row_p in rows_p {
                let elt_p = &phi.target.basis[row_p];
                let beta = phi.coords.get(row_p, elt_f.vindex);
                if beta.is_zero() {
                    continue;
                }
                let mut prod = CycNumber::from_int(1);
                for t in 0..n {
                    prod = prod * mp.get(elt_p.arrows[n - 1 - t], elt_f.arrows[t]).clone();
                    if prod.is_zero() {
                        break;
                    }
                }
                if prod.is_zero() {
                    continue;
                }
                for k in 0..u.dim {
                    let alpha = f.coords.get(row_f, k);
                    if alpha.is_zero() {
                        continue;
                    }
                    let common = alpha.clone() * beta.clone() * prod.clone();
                    for r2 in 0..u.dim {
                        let uc = uact.get(r2, elt_p.vindex);
                        if uc.is_zero() {
                            continue;
                        }
                        w.set(r2, k, w.get(r2, k).clone() + common.clone() * uc.clone());
                    }
                }
            }
        }
    }
    // w must equal λ·id on U.
    let mut lambda = CycNumber::zero();
    for j in 0..u.dim {
        if !w.get(j, j).is_zero() {
            lambda = w.get(j, j).clone();
            break;
        }
    }
    for r in 0..u.dim {
        for c in 0..u.dim {
            let expect = if r == c { lambda.clone() } else { CycNumber::zero() };
            if w.get(r, c).clone() != expect {
                return Err(Error::NotIntertwiner(format!(
                    "pairing does not act as a scalar on the source module \
                     (entry ({r}, {c}) breaks proportionality)"
                )));
            }
        }
    }
    Ok(lambda)
}

/// Whether the combinatorial pairing formula applies: monomial arrow action
/// and one-dimensional modules at every vertex.
pub fn fast_eligible(instance: &Instance) -> bool {
    instance.arrow_action.monomial
        && instance.dual_action.monomial
        && instance
            .modules
            .iter()
            .all(|mods| mods.iter().all(|m| m.dim == 1))
}

/// One term of the combinatorial pairing: the f-coefficient α on a path
/// block, the φ-coefficient β on the translated reversed dual path, the
/// translation scalar χ, and the stabilizer tail h₀ with its character
/// value.
#[derive(Clone, Debug)]
pub struct FastTerm {
    pub yseq: Vec<usize>,
    pub arrows: Vec<usize>,
    pub alpha: CycNumber,
    pub beta: CycNumber,
    pub chi: CycNumber,
    /// Ambient group element, the tail of the chain factorization.
    pub h0: usize,
    pub chi_u_h0_inv: CycNumber,
}

impl FastTerm {
    pub fn value(&self) -> CycNumber {
        self.alpha.clone() * self.beta.clone() * self.chi.clone() * self.chi_u_h0_inv.clone()
    }
}

/// The terms of the combinatorial pairing, one per f-basis block with
/// nonzero coefficient. Requires a monomial action and one-dimensional
/// modules.
pub fn pairing_fast_terms(
    instance: &Instance,
    f: &Intertwiner,
    phi: &Intertwiner,
) -> Result<Vec<FastTerm>> {
    check_pairing_compat(f, phi)?;
    if !fast_eligible(instance) {
        return Err(Error::PairingMismatch(
            "combinatorial pairing requires a monomial action and one-dimensional modules"
                .into(),
        ));
    }
    let group = &instance.group;
    let u = instance.module(f.source.0, f.source.1);
    let start_stab = instance.stabilizer(f.source.0);
    let primal = &instance.arrow_action.matrices;
    let mut terms = Vec::new();
    for (row_f, elt_f) in f.target.basis.iter().enumerate() {
        let alpha = f.coords.get(row_f, 0);
        if alpha.is_zero() {
            continue;
        }
        let (xs, h0) = chain_factorize(group, &instance.orbits, &f.target.iseq, &elt_f.yseq);
        let zseq: Vec<usize> = xs.iter().rev().copied().collect();
        let p = group.inv(group.product(&elt_f.yseq));
        let mp = &primal[p];
        // Per slot, the monomial action moves the arrow to a unique image.
        let mut chi = CycNumber::from_int(1);
        let mut moved = Vec::with_capacity(elt_f.arrows.len());
        for &a in &elt_f.arrows {
            let (b, c) = (0..mp.rows())
                .find_map(|b| {
                    let c = mp.get(b, a);
                    (!c.is_zero()).then(|| (b, c.clone()))
                })
                .expect("monomial columns have exactly one nonzero entry");
            chi = chi * c;
            moved.push(b);
        }
        let dual_elt = InducedBasisElt {
            yseq: zseq,
            arrows: moved.iter().rev().copied().collect(),
            vindex: 0,
        };
        let beta = phi
            .target
            .index_of(&dual_elt)
            .map(|r| phi.coords.get(r, 0).clone())
            .unwrap_or_else(CycNumber::zero);
        let h0_pos = start_stab.position[group.inv(h0)].expect("h₀ lies in the start stabilizer");
        let chi_u_h0_inv = u.action[h0_pos].get(0, 0).clone();
        terms.push(FastTerm {
            yseq: elt_f.yseq.clone(),
            arrows: elt_f.arrows.clone(),
            alpha: alpha.clone(),
            beta,
            chi,
            h0,
            chi_u_h0_inv,
        });
    }
    Ok(terms)
}

/// The pairing through the combinatorial formula, falling back to the
/// general algorithm when the instance does not qualify.
pub fn pairing_fast(instance: &Instance, f: &Intertwiner, phi: &Intertwiner) -> Result<CycNumber> {
    if !fast_eligible(instance) {
        return pairing(instance, f, phi);
    }
    let mut total = CycNumber::zero();
    for term in pairing_fast_terms(instance, f, phi)? {
        total = total + term.value();
    }
    Ok(total)
}

/// The element f(ε_U) of the skew group algebra: each target basis block
/// (y̲, a̲, v) contributes the path a̲ tensored with (y₁⋯y_n)·b_v, expanded
/// over the group-algebra coordinates of b_v.
pub fn evaluate(instance: &Instance, f: &Intertwiner) -> Result<SkewElement> {
    if f.target.side != Side::M {
        return Err(Error::ShapeMismatch {
            context: "evaluation into the skew group algebra is defined on the M side".into(),
        });
    }
    let u = instance.module(f.source.0, f.source.1);
    let v = instance.module(f.target.vmodule.0, f.target.vmodule.1);
    let end_stab = instance.stabilizer(f.target.end_orbit());
    let start = instance.orbits.reps[f.target.start_orbit()];
    let group = &instance.group;
    let mut terms = Vec::new();
    for (k, epsc) in u.eps_coords.iter().enumerate() {
        if epsc.is_zero() {
            continue;
        }
        for (row, elt) in f.target.basis.iter().enumerate() {
            let c = f.coords.get(row, k);
            if c.is_zero() {
                continue;
            }
            let prefix = group.product(&elt.yseq);
            for (pos, b) in v.basis.row(elt.vindex).iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let g = group.mul(prefix, end_stab.elements[pos]);
                terms.push((
                    SkewKey {
                        start,
                        arrows: elt.arrows.clone(),
                        g,
                    },
                    epsc.clone() * c.clone() * b.clone(),
                ));
            }
        }
    }
    SkewElement::from_terms(terms, &instance.quiver)
}
