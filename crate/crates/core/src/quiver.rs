//! Problem instances: a quiver Q, a finite group G acting on vertices and
//! arrows, the dual action, optional potential, and the per-orbit
//! representation data.
//!
//! The arrow span M = kQ₁ is an S-bimodule over the vertex algebra S; the
//! G-action is stored as one exact matrix per group element in the column
//! convention ^g a = Σ_b M_g[b][a]·b, with the block structure
//! ^g(_iM_j) = _{g·i}M_{g·j} enforced at load time. The dual action on M*
//! is ^gφ = φ(^{g⁻¹}·), which on matrices is the transpose of the matrix of
//! g⁻¹, so no inversion is ever performed.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Deserialize;

use crate::cyclotomic::{lcm64, CycNumber};
use crate::error::{Error, Result};
use crate::group::{GroupData, OrbitData, StabilizerData};
use crate::matrix::Matrix;
use crate::rep::{abelian_irreps, module_of_irrep, validate_irrep_set, Irrep, ModuleRep};
use crate::CycMatrix;

/// An arrow of the quiver, with dense ids given by position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub label: String,
    pub source: usize,
    pub target: usize,
}

/// A finite quiver. Arrow ids are their positions in `arrows`.
#[derive(Clone, Debug)]
pub struct Quiver {
    pub num_vertices: usize,
    pub arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(num_vertices: usize, arrows: Vec<Arrow>) -> Result<Quiver> {
        for (k, a) in arrows.iter().enumerate() {
            if a.source >= num_vertices || a.target >= num_vertices {
                return Err(Error::Schema(format!(
                    "arrow {} has endpoints ({}, {}) outside 0..{}",
                    a.label, a.source, a.target, num_vertices
                )));
            }
            if a.label.is_empty() {
                return Err(Error::Schema(format!("arrow {k} has an empty label")));
            }
            if arrows[..k].iter().any(|b| b.label == a.label) {
                return Err(Error::Schema(format!("duplicate arrow label {}", a.label)));
            }
        }
        Ok(Quiver {
            num_vertices,
            arrows,
        })
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.label == label)
    }

    /// GraphViz rendering with vertex ids and arrow labels.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n  rankdir=LR;\n");
        for v in 0..self.num_vertices {
            out.push_str(&format!("  v{v} [label=\"{v}\"];\n"));
        }
        for a in &self.arrows {
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{}\"];\n",
                a.source, a.target, a.label
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The G-action on the arrow span, one matrix per group element in the
/// column convention ^g a = Σ_b matrices[g][b][a]·b.
#[derive(Clone, Debug)]
pub struct ArrowAction {
    pub matrices: Vec<CycMatrix>,
    /// True when every image ^g a is a scalar multiple of a single arrow.
    pub monomial: bool,
}

impl ArrowAction {
    /// Wraps raw matrices, validating shapes, the identity, block structure
    /// with respect to the vertex action, and the action axiom
    /// ^{gh}a = ^g(^h a). Errors name the violating pair.
    pub fn new(
        matrices: Vec<CycMatrix>,
        quiver: &Quiver,
        group: &GroupData,
        vertex_action: &[Vec<usize>],
    ) -> Result<ArrowAction> {
        let na = quiver.num_arrows();
        if matrices.len() != group.order() {
            return Err(Error::ActionValidation(format!(
                "arrow action has {} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        for (g, m) in matrices.iter().enumerate() {
            if m.rows() != na || m.cols() != na {
                return Err(Error::ActionValidation(format!(
                    "arrow action of element {g} is {}x{}, expected {na}x{na}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if matrices[0] != Matrix::identity(na) {
            return Err(Error::ActionValidation(
                "identity element does not act as the identity on arrows".into(),
            ));
        }
        for (g, m) in matrices.iter().enumerate() {
            for a in 0..na {
                let (src, tgt) = (quiver.arrows[a].source, quiver.arrows[a].target);
                for b in 0..na {
                    if m.get(b, a).is_zero() {
                        continue;
                    }
                    let ok = quiver.arrows[b].source == vertex_action[g][src]
                        && quiver.arrows[b].target == vertex_action[g][tgt];
                    if !ok {
                        return Err(Error::ActionValidation(format!(
                            "image of arrow {} under element {g} involves arrow {}, \
                             which does not run {}→{}",
                            quiver.arrows[a].label,
                            quiver.arrows[b].label,
                            vertex_action[g][src],
                            vertex_action[g][tgt]
                        )));
                    }
                }
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let lhs = matrices[g].mul(&matrices[h]);
                let rhs = &matrices[group.mul(g, h)];
                if &lhs != rhs {
                    // Name the first arrow whose image disagrees.
                    let a = (0..na)
                        .find(|&a| (0..na).any(|b| lhs.get(b, a) != rhs.get(b, a)))
                        .expect("some column differs");
                    return Err(Error::ActionValidation(format!(
                        "action axiom fails on arrow {}: acting by element {h} then \
                         {g} differs from acting by their product {}",
                        quiver.arrows[a].label,
                        group.mul(g, h)
                    )));
                }
            }
        }
        let monomial = matrices
            .iter()
            .all(|m| (0..na).all(|a| (0..na).filter(|&b| !m.get(b, a).is_zero()).count() == 1));
        Ok(ArrowAction { matrices, monomial })
    }

    /// The induced action on the dual arrow span, ^gφ = φ(^{g⁻¹}·).
    /// Since the matrix of g⁻¹ is the inverse of the matrix of g, the dual
    /// matrix of g is the transpose of the matrix of g⁻¹. Dual arrows carry
    /// the same ids as their primal arrows, with source and target swapped.
    pub fn dualize(&self, group: &GroupData) -> ArrowAction {
        let matrices: Vec<CycMatrix> = (0..group.order())
            .map(|g| self.matrices[group.inv(g)].transpose())
            .collect();
        let na = if matrices.is_empty() {
            0
        } else {
            matrices[0].cols()
        };
        let monomial = matrices
            .iter()
            .all(|m| (0..na).all(|a| (0..na).filter(|&b| !m.get(b, a).is_zero()).count() == 1));
        ArrowAction { matrices, monomial }
    }
}

/// The quiver of dual arrows: same ids, reversed orientation, starred labels.
pub fn dual_quiver(q: &Quiver) -> Quiver {
    Quiver {
        num_vertices: q.num_vertices,
        arrows: q
            .arrows
            .iter()
            .map(|a| Arrow {
                label: format!("{}*", a.label),
                source: a.target,
                target: a.source,
            })
            .collect(),
    }
}

/// A potential: a linear combination of oriented cycles, each cycle a
/// composable arrow sequence read left to right whose end closes on its
/// start.
#[derive(Clone, Debug, Default)]
pub struct Potential {
    pub terms: Vec<(Vec<usize>, CycNumber)>,
}

impl Potential {
    pub fn new(terms: Vec<(Vec<usize>, CycNumber)>, quiver: &Quiver) -> Result<Potential> {
        let mut kept = Vec::new();
        for (cycle, coeff) in terms {
            if cycle.is_empty() {
                return Err(Error::Schema("potential contains an empty cycle".into()));
            }
            for w in cycle.windows(2) {
                if quiver.arrows[w[0]].target != quiver.arrows[w[1]].source {
                    return Err(Error::Schema(format!(
                        "potential cycle breaks between {} and {}",
                        quiver.arrows[w[0]].label, quiver.arrows[w[1]].label
                    )));
                }
            }
            let (first, last) = (cycle[0], cycle[cycle.len() - 1]);
            if quiver.arrows[last].target != quiver.arrows[first].source {
                return Err(Error::Schema(format!(
                    "potential term starting at {} does not close up",
                    quiver.arrows[first].label
                )));
            }
            if !coeff.is_zero() {
                kept.push((cycle, coeff));
            }
        }
        Ok(Potential { terms: kept })
    }
}

/// Least cyclic rotation of an arrow sequence, the normal form used to
/// compare potentials up to rotation of cycles.
fn min_rotation(cycle: &[usize]) -> Vec<usize> {
    let n = cycle.len();
    (0..n)
        .map(|s| {
            let mut rot = Vec::with_capacity(n);
            rot.extend_from_slice(&cycle[s..]);
            rot.extend_from_slice(&cycle[..s]);
            rot
        })
        .min()
        .expect("cycles are nonempty")
}

/// Accumulates a combination of cycles into its rotation normal form.
fn rotation_normal_form(
    terms: impl IntoIterator<Item = (Vec<usize>, CycNumber)>,
) -> BTreeMap<Vec<usize>, CycNumber> {
    let mut acc: BTreeMap<Vec<usize>, CycNumber> = BTreeMap::new();
    for (cycle, coeff) in terms {
        let key = min_rotation(&cycle);
        let entry = acc.entry(key).or_insert_with(CycNumber::zero);
        *entry = entry.clone() + coeff;
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

/// Tensor expansion of a group element acting on an arrow sequence: the
/// image of a₁⊗…⊗a_n under the matrix m is the sum over all choices of
/// image arrows, weighted by the product of matrix entries.
pub(crate) fn expand_action_on_sequence(
    m: &CycMatrix,
    seq: &[usize],
) -> Vec<(Vec<usize>, CycNumber)> {
    let na = m.rows();
    let mut terms: Vec<(Vec<usize>, CycNumber)> = vec![(Vec::new(), CycNumber::from_int(1))];
    for &a in seq {
        let mut next = Vec::new();
        for (path, c) in &terms {
            for b in 0..na {
                let w = m.get(b, a);
                if w.is_zero() {
                    continue;
                }
                let mut p = path.clone();
                p.push(b);
                next.push((p, c.clone() * w.clone()));
            }
        }
        terms = next;
    }
    terms
}

/// Expands ^g applied to one scaled cycle into a combination of cycles.
fn act_on_cycle(
    cycle: &[usize],
    coeff: &CycNumber,
    m: &CycMatrix,
) -> Vec<(Vec<usize>, CycNumber)> {
    expand_action_on_sequence(m, cycle)
        .into_iter()
        .map(|(p, c)| (p, c * coeff.clone()))
        .collect()
}

/// Checks G-invariance of a potential up to cyclic rotation of its cycles.
/// Returns the first group element g with ^gW ≢ W, or `None` when invariant.
pub fn check_invariance(
    potential: &Potential,
    action: &ArrowAction,
    group: &GroupData,
) -> Option<usize> {
    let reference = rotation_normal_form(potential.terms.iter().cloned());
    (1..group.order()).find(|&g| {
        let moved = rotation_normal_form(
            potential
                .terms
                .iter()
                .flat_map(|(cycle, coeff)| act_on_cycle(cycle, coeff, &action.matrices[g])),
        );
        moved != reference
    })
}

/// Raw JSON shape of a problem instance.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(default)]
    pub name: Option<String>,
    pub group: GroupDocument,
    #[serde(default)]
    pub vertices: Option<usize>,
    pub vertex_action: Vec<Vec<usize>>,
    pub arrows: Vec<ArrowDocument>,
    pub arrow_action: ArrowActionDocument,
    #[serde(default)]
    pub irreps: Option<BTreeMap<String, Vec<IrrepDocument>>>,
    #[serde(default)]
    pub potential: Option<Vec<PotentialTermDocument>>,
    #[serde(default)]
    pub conductor: Option<u64>,
}

/// Group field: either an explicit multiplication table or permutation
/// generators whose closure is taken.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDocument {
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub mul: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub permutations: Option<PermutationsDocument>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationsDocument {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowDocument {
    pub label: String,
    pub source: usize,
    pub target: usize,
}

/// Arrow action field: either full matrices (grid[b][a] = coefficient of
/// arrow b in ^g a) or, for monomial actions, one table per element mapping
/// each arrow label to [scalar, image label].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowActionDocument {
    #[serde(default)]
    pub matrices: Option<Vec<Vec<Vec<serde_json::Value>>>>,
    #[serde(default)]
    pub monomial: Option<Vec<BTreeMap<String, (serde_json::Value, String)>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrepDocument {
    pub label: String,
    pub dim: usize,
    /// One dim×dim grid per stabilizer element, in increasing order of the
    /// ambient group element index.
    pub matrices: Vec<Vec<Vec<serde_json::Value>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialTermDocument {
    pub cycle: Vec<String>,
    pub coeff: serde_json::Value,
}

/// A fully validated instance, immutable after load.
#[derive(Debug)]
pub struct Instance {
    pub name: String,
    pub quiver: Quiver,
    pub group: GroupData,
    pub vertex_action: Vec<Vec<usize>>,
    pub arrow_action: ArrowAction,
    pub dual_action: ArrowAction,
    pub orbits: OrbitData,
    /// Conductor of the working cyclotomic field: the exponent of G, the
    /// conductors of all input scalars, and any user override, combined by
    /// lcm.
    pub conductor: u64,
    /// Per orbit, the stabilizer of its representative as a standalone group
    /// on positions.
    pub stab_groups: Vec<GroupData>,
    /// Per orbit, the irreducible modules kG_iε_U in a fixed order.
    pub modules: Vec<Vec<ModuleRep>>,
    pub potential: Option<Potential>,
}

impl Instance {
    pub fn stabilizer(&self, orbit: usize) -> &StabilizerData {
        &self.orbits.stabilizers[orbit]
    }

    pub fn act_vertex(&self, g: usize, v: usize) -> usize {
        self.vertex_action[g][v]
    }

    pub fn module(&self, orbit: usize, m: usize) -> &ModuleRep {
        &self.modules[orbit][m]
    }

    pub fn module_by_label(&self, orbit: usize, label: &str) -> Option<usize> {
        self.modules[orbit].iter().position(|u| u.label == label)
    }
}

fn parse_scalar(v: &serde_json::Value, context: &str) -> Result<CycNumber> {
    CycNumber::from_json(v)
        .map_err(|e| Error::Schema(format!("{context}: {e}")))
}

fn parse_matrix(
    grid: &[Vec<serde_json::Value>],
    rows: usize,
    cols: usize,
    context: &str,
) -> Result<CycMatrix> {
    if grid.len() != rows || grid.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema(format!(
            "{context}: expected a {rows}x{cols} matrix"
        )));
    }
    let mut data = Vec::with_capacity(rows);
    for row in grid {
        let mut out = Vec::with_capacity(cols);
        for v in row {
            out.push(parse_scalar(v, context)?);
        }
        data.push(out);
    }
    Ok(Matrix::from_rows(data))
}

/// Parses and validates a problem instance from its JSON document.
pub fn load_instance(doc: &InstanceDocument) -> Result<Instance> {
    let group = match (&doc.group.mul, &doc.group.permutations) {
        (Some(table), None) => {
            if let Some(order) = doc.group.order {
                if order != table.len() {
                    return Err(Error::Schema(format!(
                        "declared group order {order} does not match the table size {}",
                        table.len()
                    )));
                }
            }
            GroupData::from_table(table.clone())?
        }
        (None, Some(perm)) => {
            let g = GroupData::from_permutations(perm.degree, &perm.generators)?;
            if let Some(order) = doc.group.order {
                if order != g.order() {
                    return Err(Error::Schema(format!(
                        "declared group order {order} does not match the generated order {}",
                        g.order()
                    )));
                }
            }
            g
        }
        _ => {
            return Err(Error::Schema(
                "group must supply exactly one of mul or permutations".into(),
            ))
        }
    };

    if doc.vertex_action.is_empty() || doc.vertex_action[0].is_empty() {
        return Err(Error::Schema("vertex_action must be nonempty".into()));
    }
    let num_vertices = doc.vertex_action[0].len();
    if let Some(v) = doc.vertices {
        if v != num_vertices {
            return Err(Error::Schema(format!(
                "declared vertex count {v} does not match vertex_action rows of length {num_vertices}"
            )));
        }
    }
    let quiver = Quiver::new(
        num_vertices,
        doc.arrows
            .iter()
            .map(|a| Arrow {
                label: a.label.clone(),
                source: a.source,
                target: a.target,
            })
            .collect(),
    )?;
    let orbits = OrbitData::compute(&group, &doc.vertex_action, num_vertices)?;

    let na = quiver.num_arrows();
    let raw_matrices: Vec<CycMatrix> = match (&doc.arrow_action.matrices, &doc.arrow_action.monomial)
    {
        (Some(grids), None) => {
            if grids.len() != group.order() {
                return Err(Error::Schema(format!(
                    "arrow_action.matrices has {} entries for a group of order {}",
                    grids.len(),
                    group.order()
                )));
            }
            grids
                .iter()
                .enumerate()
                .map(|(g, grid)| {
                    parse_matrix(grid, na, na, &format!("arrow_action matrix of element {g}"))
                })
                .collect::<Result<_>>()?
        }
        (None, Some(tables)) => {
            if tables.len() != group.order() {
                return Err(Error::Schema(format!(
                    "arrow_action.monomial has {} entries for a group of order {}",
                    tables.len(),
                    group.order()
                )));
            }
            let mut matrices = Vec::with_capacity(tables.len());
            for (g, table) in tables.iter().enumerate() {
                let mut m: CycMatrix = Matrix::zero(na, na);
                if table.len() != na {
                    return Err(Error::Schema(format!(
                        "monomial table of element {g} lists {} arrows, expected {na}",
                        table.len()
                    )));
                }
                for (label, (scalar, image)) in table {
                    let a = quiver.index_of_label(label).ok_or_else(|| {
                        Error::Schema(format!("monomial table of element {g}: unknown arrow {label}"))
                    })?;
                    let b = quiver.index_of_label(image).ok_or_else(|| {
                        Error::Schema(format!("monomial table of element {g}: unknown arrow {image}"))
                    })?;
                    let c = parse_scalar(
                        scalar,
                        &format!("monomial coefficient of {label} under element {g}"),
                    )?;
                    m.set(b, a, c);
                }
                matrices.push(m);
            }
            matrices
        }
        _ => {
            return Err(Error::Schema(
                "arrow_action must supply exactly one of matrices or monomial".into(),
            ))
        }
    };
    let arrow_action = ArrowAction::new(raw_matrices, &quiver, &group, &doc.vertex_action)?;
    let dual_action = arrow_action.dualize(&group);

    let mut conductor = group.exponent();
    for m in &arrow_action.matrices {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if !m.get(r, c).is_zero() {
                    conductor = lcm64(conductor, m.get(r, c).conductor());
                }
            }
        }
    }
    if let Some(user) = doc.conductor {
        if user == 0 {
            return Err(Error::Schema("conductor override must be positive".into()));
        }
        conductor = lcm64(conductor, user);
    }

    let mut stab_groups = Vec::with_capacity(orbits.reps.len());
    let mut modules = Vec::with_capacity(orbits.reps.len());
    for (idx, &rep) in orbits.reps.iter().enumerate() {
        let stab = &orbits.stabilizers[idx];
        let subgroup = stab.subgroup(&group);
        let supplied = doc
            .irreps
            .as_ref()
            .and_then(|m| m.get(&rep.to_string()));
        let irreps: Vec<Irrep> = match supplied {
            Some(docs) => {
                let mut list = Vec::with_capacity(docs.len());
                for d in docs {
                    let matrices = d
                        .matrices
                        .iter()
                        .enumerate()
                        .map(|(p, grid)| {
                            parse_matrix(
                                grid,
                                d.dim,
                                d.dim,
                                &format!("irrep {} matrix at stabilizer position {p}", d.label),
                            )
                        })
                        .collect::<Result<_>>()?;
                    list.push(Irrep {
                        label: d.label.clone(),
                        dim: d.dim,
                        matrices,
                    });
                }
                validate_irrep_set(&list, &subgroup)?;
                list
            }
            None => abelian_irreps(&subgroup).map_err(|e| {
                Error::Representation(format!(
                    "stabilizer of vertex {rep}: {e}"
                ))
            })?,
        };
        for u in &irreps {
            conductor = lcm64(conductor, subgroup.exponent());
            for m in &u.matrices {
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        if !m.get(r, c).is_zero() {
                            conductor = lcm64(conductor, m.get(r, c).conductor());
                        }
                    }
                }
            }
        }
        let mods = irreps
            .iter()
            .map(|u| module_of_irrep(u, &subgroup))
            .collect::<Result<Vec<_>>>()?;
        stab_groups.push(subgroup);
        modules.push(mods);
    }

    // Irrep keys must reference orbit representatives.
    if let Some(m) = &doc.irreps {
        for key in m.keys() {
            let v: usize = key.parse().map_err(|_| {
                Error::Schema(format!("irreps key {key} is not a vertex id"))
            })?;
            if v >= num_vertices || !orbits.is_rep(v) {
                return Err(Error::Schema(format!(
                    "irreps key {key} is not an orbit representative; representatives are {:?}",
                    orbits.reps
                )));
            }
        }
    }

    let potential = match &doc.potential {
        None => None,
        Some(terms) => {
            let mut parsed = Vec::with_capacity(terms.len());
            for t in terms {
                let cycle = t
                    .cycle
                    .iter()
                    .map(|label| {
                        quiver.index_of_label(label).ok_or_else(|| {
                            Error::Schema(format!("potential references unknown arrow {label}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let coeff = parse_scalar(&t.coeff, "potential coefficient")?;
                conductor = lcm64(conductor, coeff.conductor());
                parsed.push((cycle, coeff));
            }
            Some(Potential::new(parsed, &quiver)?)
        }
    };

    Ok(Instance {
        name: doc.name.clone().unwrap_or_else(|| "instance".into()),
        quiver,
        group,
        vertex_action: doc.vertex_action.clone(),
        arrow_action,
        dual_action,
        orbits,
        conductor,
        stab_groups,
        modules,
        potential,
    })
}

/// Parses an instance from JSON text.
pub fn load_instance_str(text: &str) -> Result<Instance> {
    let doc: InstanceDocument =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    load_instance(&doc)
}
