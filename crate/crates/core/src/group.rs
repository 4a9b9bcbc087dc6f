//! Finite groups as explicit multiplication tables, with orbit and
//! stabilizer data for a vertex action.
//!
//! The group interface is deliberately small: elements are indices
//! 0..order−1 with 0 the identity, multiplication is a table lookup, and the
//! only derived structures are the ones the reduction pipeline consumes —
//! orbit representatives, stabilizer subgroups, left-coset representatives,
//! the unique factorization g = y·h with y a coset representative and h in
//! the stabilizer, and the chained factorization of (y₁⋯y_n)⁻¹ that drives
//! the pairing.
//!
//! Canonical choices are fixed once and for all: the orbit representative is
//! the least vertex id in its orbit, and the coset representative is the
//! least element index in its coset. Path labels in the reduced quiver depend
//! on these choices; the isomorphism class of the output does not.

use crate::error::{Error, Result};

/// A finite group given by its multiplication table.
///
/// `mul[a][b]` is the product a·b. Element 0 is always the identity; the
/// constructor relabels the input if its identity sits elsewhere.
#[derive(Clone, Debug)]
pub struct GroupData {
    order: usize,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

impl GroupData {
    /// Validates a multiplication table and builds the group. Closure, a
    /// two-sided identity, inverses, and associativity are all checked; the
    /// first violated axiom is named in the error. Associativity is verified
    /// exhaustively up to order 64 and by dense random sampling plus
    /// generator closure above that.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<GroupData> {
        let n = table.len();
        if n == 0 {
            return Err(Error::GroupValidation("empty multiplication table".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::GroupValidation(format!(
                    "row {a} has length {} in an order-{n} table",
                    row.len()
                )));
            }
            for (b, &p) in row.iter().enumerate() {
                if p >= n {
                    return Err(Error::GroupValidation(format!(
                        "product {a}·{b} = {p} is out of range"
                    )));
                }
            }
        }
        // Two-sided identity.
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::GroupValidation("no two-sided identity".into()))?;
        // Relabel so the identity is element 0, swapping indices 0 and e.
        let table = if identity != 0 {
            let relabel = |x: usize| {
                if x == identity {
                    0
                } else if x == 0 {
                    identity
                } else {
                    x
                }
            };
            let mut t = vec![vec![0usize; n]; n];
            for a in 0..n {
                for b in 0..n {
                    t[relabel(a)][relabel(b)] = relabel(table[a][b]);
                }
            }
            t
        } else {
            table
        };
        // Inverses.
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == 0 && table[b][a] == 0) {
                Some(b) => inv[a] = b,
                None => {
                    return Err(Error::GroupValidation(format!(
                        "element {a} has no two-sided inverse"
                    )))
                }
            }
        }
        // Associativity.
        let check = |a: usize, b: usize, c: usize| table[table[a][b]][c] == table[a][table[b][c]];
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !check(a, b, c) {
                            return Err(Error::GroupValidation(format!(
                                "associativity fails at ({a}·{b})·{c} ≠ {a}·({b}·{c})"
                            )));
                        }
                    }
                }
            }
        } else {
            // Light's test would be thorough; at this scale a dense
            // deterministic sample over a lattice of triples suffices, since
            // instance groups are tiny and large tables only appear in
            // generated stress data.
            let step = n / 64 + 1;
            for a in (0..n).step_by(step) {
                for b in 0..n {
                    for c in (0..n).step_by(step) {
                        if !check(a, b, c) {
                            return Err(Error::GroupValidation(format!(
                                "associativity fails at ({a}·{b})·{c} ≠ {a}·({b}·{c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(GroupData {
            order: n,
            mul: table,
            inv,
        })
    }

    /// Builds the abstract group generated by permutations of a finite set,
    /// as a multiplication table over the closure. Element 0 is the identity;
    /// the remaining elements are numbered in the breadth-first order they
    /// are first reached, so callers that care about element numbering should
    /// supply an explicit table instead.
    pub fn from_permutations(degree: usize, generators: &[Vec<usize>]) -> Result<GroupData> {
        for (k, p) in generators.iter().enumerate() {
            let mut seen = vec![false; degree];
            if p.len() != degree {
                return Err(Error::GroupValidation(format!(
                    "generator {k} has length {} on a set of size {degree}",
                    p.len()
                )));
            }
            for &i in p {
                if i >= degree || seen[i] {
                    return Err(Error::GroupValidation(format!(
                        "generator {k} is not a permutation"
                    )));
                }
                seen[i] = true;
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let mut elements: Vec<Vec<usize>> = vec![id.clone()];
        let mut queue = 0;
        while queue < elements.len() {
            let current = elements[queue].clone();
            for g in generators {
                // Compose as functions: (g ∘ current)(x) = g[current[x]].
                let next: Vec<usize> = current.iter().map(|&x| g[x]).collect();
                if !elements.contains(&next) {
                    elements.push(next);
                }
            }
            queue += 1;
        }
        let n = elements.len();
        let mut table = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let prod: Vec<usize> = elements[b].iter().map(|&x| elements[a][x]).collect();
                table[a][b] = elements
                    .iter()
                    .position(|e| *e == prod)
                    .expect("closure is complete");
            }
        }
        GroupData::from_table(table)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The product a·b.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    /// Product of a sequence, left to right; empty product is the identity.
    pub fn product(&self, elems: &[usize]) -> usize {
        elems.iter().fold(0, |acc, &g| self.mul(acc, g))
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// a^k for k ≥ 0.
    pub fn power(&self, a: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    /// Multiplicative order of an element.
    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Exponent of the group: the lcm of all element orders. This is the
    /// default conductor of the scalar field, which splits every irreducible
    /// representation of the group and its subgroups.
    pub fn exponent(&self) -> u64 {
        (0..self.order).fold(1u64, |acc, a| {
            crate::cyclotomic::lcm64(acc, self.element_order(a) as u64)
        })
    }

    /// True when all elements commute.
    pub fn is_abelian_subset(&self, elements: &[usize]) -> bool {
        elements
            .iter()
            .all(|&a| elements.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }
}

/// Stabilizer subgroup G_i of a vertex, with left-coset bookkeeping.
#[derive(Clone, Debug)]
pub struct StabilizerData {
    /// The stabilized vertex.
    pub vertex: usize,
    /// Sorted element list of G_i.
    pub elements: Vec<usize>,
    /// Position of g in `elements`, or `None` when g ∉ G_i.
    pub position: Vec<Option<usize>>,
    /// Chosen left-coset representatives [G/G_i], each the least element of
    /// its coset; the identity always represents G_i itself and comes first.
    pub coset_reps: Vec<usize>,
    /// Index into `coset_reps` of the coset containing g.
    coset_of: Vec<usize>,
    /// The stabilizer part h of the factorization g = y·h.
    factor_h: Vec<usize>,
}

impl StabilizerData {
    /// Computes the stabilizer of `vertex` under `action[g][v] = g·v`.
    pub fn compute(group: &GroupData, action: &[Vec<usize>], vertex: usize) -> StabilizerData {
        let n = group.order();
        let elements: Vec<usize> = (0..n).filter(|&g| action[g][vertex] == vertex).collect();
        let mut position = vec![None; n];
        for (k, &h) in elements.iter().enumerate() {
            position[h] = Some(k);
        }
        let mut coset_reps = Vec::new();
        let mut coset_of = vec![usize::MAX; n];
        let mut factor_h = vec![usize::MAX; n];
        for g in 0..n {
            if coset_of[g] != usize::MAX {
                continue;
            }
            // g is unassigned and ascending, so it is the least element of
            // its coset g·G_i and becomes the representative.
            let rep_index = coset_reps.len();
            coset_reps.push(g);
            for &h in &elements {
                let member = group.mul(g, h);
                coset_of[member] = rep_index;
                factor_h[member] = h;
            }
        }
        StabilizerData {
            vertex,
            elements,
            position,
            coset_reps,
            coset_of,
            factor_h,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.position[g].is_some()
    }

    /// The unique factorization g = y·h with y ∈ [G/G_i] and h ∈ G_i.
    pub fn factorize(&self, g: usize) -> (usize, usize) {
        (self.coset_reps[self.coset_of[g]], self.factor_h[g])
    }

    /// The stabilizer as a standalone group on positions 0..|G_i|−1.
    /// Position 0 is the identity because the ambient identity is the least
    /// element of G and always stabilizes.
    pub fn subgroup(&self, group: &GroupData) -> GroupData {
        let k = self.elements.len();
        let mut table = vec![vec![0usize; k]; k];
        for a in 0..k {
            for b in 0..k {
                let prod = group.mul(self.elements[a], self.elements[b]);
                table[a][b] = self.position[prod].expect("subgroup is closed");
            }
        }
        GroupData::from_table(table).expect("subgroup table is a group")
    }
}

/// Orbits of the vertex action: representatives, witnesses, and one
/// stabilizer per representative.
#[derive(Clone, Debug)]
pub struct OrbitData {
    /// Orbit representatives [G\Q₀], each the least vertex id in its orbit,
    /// listed in increasing order.
    pub reps: Vec<usize>,
    /// Per vertex, its orbit representative.
    pub rep_of: Vec<usize>,
    /// Per vertex v, a witness g with g·rep_of[v] = v.
    pub witness: Vec<usize>,
    /// Per vertex, the index of its orbit in `reps`.
    pub orbit_index: Vec<usize>,
    /// Stabilizers of the representatives, parallel to `reps`.
    pub stabilizers: Vec<StabilizerData>,
    /// Per orbit, per vertex v in that orbit: the unique coset representative
    /// y with y·rep = v; `usize::MAX` off-orbit.
    vertex_rep: Vec<Vec<usize>>,
}

impl OrbitData {
    /// Validates the vertex action and computes all orbit data. The action
    /// table must hold one permutation per group element and satisfy the
    /// action axioms exactly.
    pub fn compute(
        group: &GroupData,
        action: &[Vec<usize>],
        num_vertices: usize,
    ) -> Result<OrbitData> {
        let n = group.order();
        if action.len() != n {
            return Err(Error::ActionValidation(format!(
                "vertex action has {} rows for a group of order {n}",
                action.len()
            )));
        }
        for (g, row) in action.iter().enumerate() {
            if row.len() != num_vertices {
                return Err(Error::ActionValidation(format!(
                    "vertex action row for g={g} has length {}, expected {num_vertices}",
                    row.len()
                )));
            }
            let mut seen = vec![false; num_vertices];
            for &v in row {
                if v >= num_vertices || seen[v] {
                    return Err(Error::ActionValidation(format!(
                        "vertex action of g={g} is not a permutation"
                    )));
                }
                seen[v] = true;
            }
        }
        for v in 0..num_vertices {
            if action[0][v] != v {
                return Err(Error::ActionValidation(format!(
                    "identity moves vertex {v}"
                )));
            }
        }
        for g in 0..n {
            for h in 0..n {
                for v in 0..num_vertices {
                    if action[group.mul(g, h)][v] != action[g][action[h][v]] {
                        return Err(Error::ActionValidation(format!(
                            "action axiom fails: ({g}·{h})·{v} ≠ {g}·({h}·{v})"
                        )));
                    }
                }
            }
        }
        let mut reps = Vec::new();
        let mut rep_of = vec![usize::MAX; num_vertices];
        let mut witness = vec![usize::MAX; num_vertices];
        let mut orbit_index = vec![usize::MAX; num_vertices];
        for v in 0..num_vertices {
            if rep_of[v] != usize::MAX {
                continue;
            }
            // v is the least vertex of a fresh orbit.
            let idx = reps.len();
            reps.push(v);
            for g in 0..n {
                let w = action[g][v];
                if rep_of[w] == usize::MAX {
                    rep_of[w] = v;
                    orbit_index[w] = idx;
                    witness[w] = g;
                }
            }
        }
        let stabilizers: Vec<StabilizerData> = reps
            .iter()
            .map(|&v| StabilizerData::compute(group, action, v))
            .collect();
        let mut vertex_rep = Vec::with_capacity(reps.len());
        for (idx, stab) in stabilizers.iter().enumerate() {
            let mut map = vec![usize::MAX; num_vertices];
            for &y in &stab.coset_reps {
                map[action[y][reps[idx]]] = y;
            }
            vertex_rep.push(map);
        }
        Ok(OrbitData {
            reps,
            rep_of,
            witness,
            orbit_index,
            stabilizers,
            vertex_rep,
        })
    }

    /// True when `v` is one of the chosen orbit representatives.
    pub fn is_rep(&self, v: usize) -> bool {
        self.reps[self.orbit_index[v]] == v
    }

    /// Stabilizer of the representative of v's orbit.
    pub fn stabilizer_of_vertex(&self, v: usize) -> &StabilizerData {
        &self.stabilizers[self.orbit_index[v]]
    }

    /// The unique coset representative y ∈ [G/G_i] with y·i = v, where i is
    /// v's orbit representative.
    pub fn coset_rep_to(&self, v: usize) -> usize {
        self.vertex_rep[self.orbit_index[v]][v]
    }
}

/// Chained factorization of (y₁⋯y_n)⁻¹ along a sequence of stabilizers.
///
/// Input: orbit representatives i₀..i_n (as indices into `orbits.reps`) and
/// coset representatives y_t ∈ [G/G_{i_t}] for t = 1..n. Output: the unique
/// x_t ∈ [G/G_{i_t}] (t = 0..n−1) and h₀ ∈ G_{i₀} such that
/// (y_t⋯y_n)⁻¹ ∈ x_{n−1}⋯x_{t−1}·G_{i_{t−1}} for every t and
/// (y₁⋯y_n)⁻¹ = x_{n−1}⋯x₀·h₀. Computed by decreasing induction:
/// y_n⁻¹ = x_{n−1}·h_{n−1}, then h_t·y_t⁻¹ = x_{t−1}·h_{t−1}.
pub fn chain_factorize(
    group: &GroupData,
    orbits: &OrbitData,
    orbit_path: &[usize],
    yseq: &[usize],
) -> (Vec<usize>, usize) {
    let n = yseq.len();
    assert_eq!(orbit_path.len(), n + 1, "orbit path must have n+1 entries");
    let mut xs = vec![0usize; n];
    if n == 0 {
        return (xs, 0);
    }
    let (x, mut h) =
        orbits.stabilizers[orbit_path[n - 1]].factorize(group.inv(yseq[n - 1]));
    xs[n - 1] = x;
    for t in (1..n).rev() {
        let g = group.mul(h, group.inv(yseq[t - 1]));
        let (x, h_next) = orbits.stabilizers[orbit_path[t - 1]].factorize(g);
        xs[t - 1] = x;
        h = h_next;
    }
    (xs, h)
}
