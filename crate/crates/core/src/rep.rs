//! Representation theory of the vertex stabilizers: group algebra elements,
//! irreducible representations, primitive idempotents, and intertwiner
//! spaces.
//!
//! Stabilizers with abelian structure get their irreducible characters
//! generated automatically from a cyclic decomposition; nonabelian
//! stabilizers require explicitly supplied representation matrices. Either
//! way, each irreducible U is realized concretely as the left ideal kHε_U
//! cut out by a primitive idempotent, so that module elements live in group
//! algebra coordinates and every action is an exact matrix.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::group::GroupData;
use crate::matrix::Matrix;
use crate::CycMatrix;

/// An element of the group algebra kH, indexed by element position in H.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GroupAlgElem {
    terms: BTreeMap<usize, CycNumber>,
}

impl GroupAlgElem {
    pub fn zero() -> GroupAlgElem {
        GroupAlgElem::default()
    }

    pub fn single(g: usize, coeff: CycNumber) -> GroupAlgElem {
        let mut e = GroupAlgElem::zero();
        e.add_term(g, coeff);
        e
    }

    pub fn add_term(&mut self, g: usize, coeff: CycNumber) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(g).or_insert_with(CycNumber::zero);
        *entry = entry.clone() + coeff;
        if entry.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn coeff(&self, g: usize) -> CycNumber {
        self.terms.get(&g).cloned().unwrap_or_else(CycNumber::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &CycNumber)> {
        self.terms.iter().map(|(&g, c)| (g, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &GroupAlgElem) -> GroupAlgElem {
        let mut out = self.clone();
        for (g, c) in other.terms() {
            out.add_term(g, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &CycNumber) -> GroupAlgElem {
        let mut out = GroupAlgElem::zero();
        for (g, c) in self.terms() {
            out.add_term(g, c.clone() * s.clone());
        }
        out
    }

    /// Convolution product in kH.
    pub fn mul(&self, other: &GroupAlgElem, h: &GroupData) -> GroupAlgElem {
        let mut out = GroupAlgElem::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(h.mul(a, b), ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Coefficient vector of length |H|.
    pub fn to_vec(&self, order: usize) -> Vec<CycNumber> {
        let mut v = vec![CycNumber::zero(); order];
        for (g, c) in self.terms() {
            v[g] = c.clone();
        }
        v
    }

    /// Left translation g·x, i.e. (g·x)[a] = x[g⁻¹a].
    pub fn translate(&self, g: usize, h: &GroupData) -> GroupAlgElem {
        let mut out = GroupAlgElem::zero();
        for (a, c) in self.terms() {
            out.add_term(h.mul(g, a), c.clone());
        }
        out
    }

    /// Reassembles an element from a coefficient vector.
    pub fn from_vec(coeffs: &[CycNumber]) -> GroupAlgElem {
        let mut e = GroupAlgElem::zero();
        for (g, c) in coeffs.iter().enumerate() {
            e.add_term(g, c.clone());
        }
        e
    }
}

impl fmt::Display for GroupAlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (g, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·g{g}")?;
        }
        Ok(())
    }
}

/// An irreducible representation of a finite group, given by one exact
/// matrix per group element (element index = position in the group's table).
#[derive(Clone, Debug)]
pub struct Irrep {
    pub label: String,
    pub dim: usize,
    pub matrices: Vec<CycMatrix>,
}

impl Irrep {
    pub fn character(&self, g: usize) -> CycNumber {
        let m = &self.matrices[g];
        (0..self.dim).fold(CycNumber::zero(), |acc, i| acc + m.get(i, i).clone())
    }

    /// Checks that the matrices form a representation: one square matrix of
    /// the declared dimension per element, identity at the identity, and
    /// ρ(a)ρ(b) = ρ(ab) throughout. Irreducibility is checked separately.
    pub fn validate(&self, h: &GroupData) -> Result<()> {
        if self.matrices.len() != h.order() {
            return Err(Error::Representation(format!(
                "representation {}: {} matrices for a group of order {}",
                self.label,
                self.matrices.len(),
                h.order()
            )));
        }
        for (g, m) in self.matrices.iter().enumerate() {
            if m.rows() != self.dim || m.cols() != self.dim {
                return Err(Error::Representation(format!(
                    "representation {}: matrix for element {g} is {}x{}, expected {}x{}",
                    self.label,
                    m.rows(),
                    m.cols(),
                    self.dim,
                    self.dim
                )));
            }
        }
        if self.matrices[0] != Matrix::identity(self.dim) {
            return Err(Error::Representation(format!(
                "representation {}: identity element is not the identity matrix",
                self.label
            )));
        }
        for a in 0..h.order() {
            for b in 0..h.order() {
                if self.matrices[a].mul(&self.matrices[b]) != self.matrices[h.mul(a, b)] {
                    return Err(Error::Representation(format!(
                        "representation {}: ρ({a})·ρ({b}) ≠ ρ({a}·{b})",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks irreducibility over the working field: the space of
    /// self-intertwiners must be one-dimensional.
    pub fn validate_irreducible(&self) -> Result<()> {
        let selfhom = hom_basis(&self.matrices, &self.matrices);
        if selfhom.len() != 1 {
            return Err(Error::Representation(format!(
                "representation {} is not irreducible over the chosen field: \
                 its self-intertwiner space has dimension {}",
                self.label,
                selfhom.len()
            )));
        }
        Ok(())
    }
}

/// Validates a complete list of pairwise non-isomorphic irreducibles of H:
/// each entry is an irreducible representation, no two are isomorphic, and
/// the squared dimensions sum to |H| (so the list is complete and the group
/// algebra splits over the working field).
pub fn validate_irrep_set(irreps: &[Irrep], h: &GroupData) -> Result<()> {
    for u in irreps {
        u.validate(h)?;
        u.validate_irreducible()?;
    }
    for i in 0..irreps.len() {
        for j in 0..irreps.len() {
            if i == j {
                continue;
            }
            if irreps[i].label == irreps[j].label {
                return Err(Error::Representation(format!(
                    "duplicate representation label {}",
                    irreps[i].label
                )));
            }
            if !hom_basis(&irreps[i].matrices, &irreps[j].matrices).is_empty() {
                return Err(Error::Representation(format!(
                    "representations {} and {} are isomorphic",
                    irreps[i].label, irreps[j].label
                )));
            }
        }
    }
    let sum: usize = irreps.iter().map(|u| u.dim * u.dim).sum();
    if sum != h.order() {
        return Err(Error::Representation(format!(
            "squared dimensions sum to {sum}, expected the group order {}; \
             the supplied list of irreducibles is incomplete or redundant",
            h.order()
        )));
    }
    Ok(())
}

/// Decomposes an abelian group into a direct product of cyclic subgroups,
/// returned as (generator, order) pairs with the product of orders equal to
/// |H|. Greedy: the first generator has maximal order (least element index
/// on ties); the rest come from the quotient, lifted and corrected so the
/// product is direct.
fn cyclic_decomposition(h: &GroupData) -> Vec<(usize, usize)> {
    if h.order() == 1 {
        return Vec::new();
    }
    let a = (0..h.order())
        .max_by_key(|&x| (h.element_order(x), Reverse(x)))
        .expect("nonempty group");
    let m = h.element_order(a);
    let (quot, section) = quotient_by_cyclic(h, a);
    let mut gens = vec![(a, m)];
    for (bbar, mi) in cyclic_decomposition(&quot) {
        let b = section[bbar];
        // b^{mi} lies in ⟨a⟩, say a^j; maximality of m forces mi | j, and
        // b′ = b·a^{−j/mi} is a lift of b̄ of exact order mi.
        let bmi = h.power(b, mi);
        let mut j = 0;
        let mut x = 0;
        while x != bmi {
            x = h.mul(x, a);
            j += 1;
        }
        assert_eq!(j % mi, 0, "maximal-order correction must divide");
        let bprime = h.mul(b, h.power(a, (m - j / mi) % m));
        debug_assert_eq!(h.element_order(bprime), mi);
        gens.push((bprime, mi));
    }
    gens
}

/// Quotient of an abelian group by the cyclic subgroup ⟨a⟩, together with
/// the section mapping each quotient element to its least coset
/// representative.
fn quotient_by_cyclic(h: &GroupData, a: usize) -> (GroupData, Vec<usize>) {
    let mut cyc = vec![0usize];
    let mut x = a;
    while x != 0 {
        cyc.push(x);
        x = h.mul(x, a);
    }
    let n = h.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for g in 0..n {
        if coset_of[g] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        reps.push(g);
        for &c in &cyc {
            coset_of[h.mul(g, c)] = idx;
        }
    }
    let q = reps.len();
    let mut table = vec![vec![0usize; q]; q];
    for (p, &rp) in reps.iter().enumerate() {
        for (r, &rr) in reps.iter().enumerate() {
            table[p][r] = coset_of[h.mul(rp, rr)];
        }
    }
    let quot = GroupData::from_table(table).expect("quotient of a group is a group");
    (quot, reps)
}

/// All irreducible characters of an abelian group, as one-dimensional
/// representations. Characters are ordered lexicographically by their
/// exponent vector on the cyclic generators, so the trivial character comes
/// first; labels are chi0, chi1, ….
pub fn abelian_irreps(h: &GroupData) -> Result<Vec<Irrep>> {
    let all: Vec<usize> = (0..h.order()).collect();
    if !h.is_abelian_subset(&all) {
        return Err(Error::Representation(
            "cannot generate characters of a nonabelian group; supply its \
             irreducible representations explicitly"
                .into(),
        ));
    }
    let gens = cyclic_decomposition(h);
    let orders: Vec<usize> = gens.iter().map(|&(_, m)| m).collect();
    // Exponent coordinates of every element in the direct product.
    let mut exp_of: Vec<Option<Vec<usize>>> = vec![None; h.order()];
    let mut tuple = vec![0usize; gens.len()];
    loop {
        let g = gens
            .iter()
            .zip(&tuple)
            .fold(0, |acc, (&(gen, _), &t)| h.mul(acc, h.power(gen, t)));
        if exp_of[g].is_some() {
            return Err(Error::Internal(
                "cyclic decomposition is not a direct product".into(),
            ));
        }
        exp_of[g] = Some(tuple.clone());
        if !increment(&mut tuple, &orders) {
            break;
        }
    }
    if exp_of.iter().any(Option::is_none) {
        return Err(Error::Internal(
            "cyclic decomposition does not generate the group".into(),
        ));
    }
    let mut irreps = Vec::with_capacity(h.order());
    let mut cvec = vec![0usize; gens.len()];
    let mut index = 0;
    loop {
        let mut matrices = Vec::with_capacity(h.order());
        for g in 0..h.order() {
            let exps = exp_of[g].as_ref().expect("filled above");
            let value = orders
                .iter()
                .zip(cvec.iter().zip(exps))
                .fold(CycNumber::from_int(1), |acc, (&m, (&c, &a))| {
                    acc * CycNumber::root_of_unity(m as u64, (c * a) as i64)
                });
            matrices.push(Matrix::from_rows(vec![vec![value]]));
        }
        irreps.push(Irrep {
            label: format!("chi{index}"),
            dim: 1,
            matrices,
        });
        index += 1;
        if !increment(&mut cvec, &orders) {
            break;
        }
    }
    Ok(irreps)
}

/// Odometer step over mixed radix `orders`, last coordinate fastest.
/// Returns false after wrapping past the final tuple.
fn increment(tuple: &mut [usize], orders: &[usize]) -> bool {
    for i in (0..tuple.len()).rev() {
        tuple[i] += 1;
        if tuple[i] < orders[i] {
            return true;
        }
        tuple[i] = 0;
    }
    false
}

/// Basis of the intertwiner space Hom_{kH}(U, W) = {F : F·ρ_U(g) = ρ_W(g)·F}
/// as matrices of shape dim W × dim U. The equations are solved exactly; the
/// basis is the deterministic kernel basis of the stacked linear system.
pub fn hom_basis(u: &[CycMatrix], w: &[CycMatrix]) -> Vec<CycMatrix> {
    let du = u[0].cols();
    let dw = w[0].rows();
    let unknowns = dw * du;
    // Row per (g, r, c): Σ_k F[r][k]·U_g[k][c] − Σ_k W_g[r][k]·F[k][c] = 0,
    // with F vectorized row-major.
    let mut rows = Vec::new();
    for g in 1..u.len() {
        for r in 0..dw {
            for c in 0..du {
                let mut row = vec![CycNumber::zero(); unknowns];
                for k in 0..du {
                    row[r * du + k] = row[r * du + k].clone() + u[g].get(k, c).clone();
                }
                for k in 0..dw {
                    row[k * du + c] = row[k * du + c].clone() - w[g].get(r, k).clone();
                }
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        // Trivial group: every matrix intertwines.
        rows.push(vec![CycNumber::zero(); unknowns]);
    }
    let system = Matrix::from_rows(rows);
    system
        .kernel_basis()
        .into_iter()
        .map(|v| Matrix::from_fn(dw, du, |r, c| v.get(r * du + c, 0).clone()))
        .collect()
}

/// The primitive idempotent ε_U = (dim U/|H|)·Σ_h [ρ_U(h⁻¹)]₁₁·h attached to
/// the (1,1) matrix position of an irreducible representation.
pub fn primitive_idempotent(u: &Irrep, h: &GroupData) -> GroupAlgElem {
    let scale = CycNumber::from_int(u.dim as i64)
        .try_div(&CycNumber::from_int(h.order() as i64))
        .expect("group order is nonzero");
    let mut eps = GroupAlgElem::zero();
    for g in 0..h.order() {
        eps.add_term(g, u.matrices[h.inv(g)].get(0, 0).clone() * scale.clone());
    }
    eps
}

/// An irreducible module realized inside the group algebra as the left
/// ideal kHε of a primitive idempotent ε.
#[derive(Clone, Debug)]
pub struct ModuleRep {
    pub label: String,
    pub dim: usize,
    /// Basis vectors as rows, in kH coordinates (dim × |H|).
    pub basis: CycMatrix,
    /// Action matrices per group element, column convention:
    /// g·b_c = Σ_r action[g][r][c]·b_r.
    pub action: Vec<CycMatrix>,
    /// Coordinates of ε itself in `basis`.
    pub eps_coords: Vec<CycNumber>,
    /// The defining idempotent.
    pub idempotent: GroupAlgElem,
}

impl ModuleRep {
    pub fn character(&self, g: usize) -> CycNumber {
        let m = &self.action[g];
        (0..self.dim).fold(CycNumber::zero(), |acc, i| acc + m.get(i, i).clone())
    }
}

/// Realizes kHε as an explicit module: a row basis obtained from the left
/// translates {h·ε}, exact action matrices, and the coordinates of ε in
/// that basis. Fails when ε is not idempotent.
pub fn module_of_cyclic_idempotent(
    label: &str,
    eps: &GroupAlgElem,
    h: &GroupData,
) -> Result<ModuleRep> {
    if &eps.mul(eps, h) != eps {
        return Err(Error::Representation(format!(
            "element attached to {label} is not idempotent"
        )));
    }
    if eps.is_zero() {
        return Err(Error::Representation(format!(
            "idempotent attached to {label} is zero"
        )));
    }
    let n = h.order();
    let translates =
        Matrix::from_rows((0..n).map(|g| eps.translate(g, h).to_vec(n)).collect());
    let (rref, pivots) = translates.rref();
    let dim = pivots.len();
    let basis = Matrix::from_fn(dim, n, |r, c| rref.get(r, c).clone());
    // Column r of basisᵀ is the basis vector b_r; solving BᵀX = (g·B)ᵀ gives
    // the coordinate matrix of the g-action in the column convention.
    let bt = basis.transpose();
    let mut action = Vec::with_capacity(n);
    for g in 0..n {
        let moved = Matrix::from_rows(
            (0..dim)
                .map(|r| {
                    GroupAlgElem::from_vec(&basis.row(r))
                        .translate(g, h)
                        .to_vec(n)
                })
                .collect(),
        );
        let coords = bt.solve(&moved.transpose()).ok_or_else(|| {
            Error::Internal(format!(
                "action of element {g} does not preserve the ideal of {label}"
            ))
        })?;
        action.push(coords);
    }
    let eps_vec = Matrix::column(eps.to_vec(n));
    let eps_coords = bt
        .solve(&eps_vec)
        .ok_or_else(|| Error::Internal(format!("{label}: ε is outside its own ideal")))?
        .col(0);
    Ok(ModuleRep {
        label: label.to_string(),
        dim,
        basis,
        action,
        eps_coords,
        idempotent: eps.clone(),
    })
}

/// Builds the module kHε_U of an irreducible representation, checking that
/// its dimension matches the representation.
pub fn module_of_irrep(u: &Irrep, h: &GroupData) -> Result<ModuleRep> {
    let eps = primitive_idempotent(u, h);
    let module = module_of_cyclic_idempotent(&u.label, &eps, h)?;
    if module.dim != u.dim {
        return Err(Error::Representation(format!(
            "ideal of {} has dimension {}, expected {}",
            u.label, module.dim, u.dim
        )));
    }
    Ok(module)
}
