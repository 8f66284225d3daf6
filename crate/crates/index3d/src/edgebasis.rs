//! Choice of basic edges whose equations form an integer basis of the edge
//! equation lattice, and the expression of the remaining edges through them.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::intlinalg;
use crate::triangulation::GluingData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasisError {
    #[error("no maximal tree with a 1- or 3-cycle exists in the edge/cusp graph")]
    NoValidCycle,
    #[error("the basic edge equations are linearly dependent")]
    RankDeficient,
    #[error("odd coefficient while halving the equation for edge e{0}")]
    OddCoefficient(usize),
    #[error("expected {expected} excluded edges, got {got}")]
    WrongSize { expected: usize, got: usize },
    #[error("edge index e{0} out of range")]
    OutOfRange(usize),
    #[error("excluded edges do not form a maximal tree with a 1- or 3-cycle")]
    NotTreeWithCycle,
    #[error("expression for edge e{0} does not reproduce its equation")]
    ExpressionMismatch(usize),
}

/// Cusps as vertices, edges of the triangulation as graph edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCuspGraph {
    pub vertices: usize,
    /// Endpoints of each edge; equal for a loop.
    pub ends: Vec<(usize, usize)>,
}

impl EdgeCuspGraph {
    pub fn new(g: &GluingData) -> Self {
        let c = g.cusp_incidence();
        let ends = (0..g.n())
            .map(|i| {
                let hs: Vec<usize> = (0..g.r()).flat_map(|h| std::iter::repeat_n(h, c[h][i] as usize)).collect();
                (hs[0], hs[1])
            })
            .collect();
        EdgeCuspGraph { vertices: g.r(), ends }
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.ends[e].0 == self.ends[e].1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisSelection {
    pub excluded: Vec<usize>,
    pub basic: Vec<usize>,
}

impl BasisSelection {
    pub fn from_excluded(n: usize, excluded: &[usize]) -> Result<Self, BasisError> {
        let set: BTreeSet<usize> = excluded.iter().copied().collect();
        if let Some(&e) = set.iter().find(|&&e| e >= n) {
            return Err(BasisError::OutOfRange(e));
        }
        Ok(BasisSelection { excluded: set.iter().copied().collect(), basic: (0..n).filter(|e| !set.contains(e)).collect() })
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }

    fn join(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Spanning forest grown from `seed`, then from the remaining non-loop edges
/// in decreasing index order.
fn spanning_tree(graph: &EdgeCuspGraph, seed: &[usize]) -> Option<Vec<usize>> {
    let mut dsu = Dsu::new(graph.vertices);
    let mut tree = Vec::new();
    for &e in seed {
        let (a, b) = graph.ends[e];
        if !dsu.join(a, b) {
            return None;
        }
        tree.push(e);
    }
    for e in (0..graph.ends.len()).rev() {
        let (a, b) = graph.ends[e];
        if a != b && !seed.contains(&e) && dsu.join(a, b) {
            tree.push(e);
        }
    }
    (tree.len() + 1 == graph.vertices).then_some(tree)
}

/// Triangles of the graph (three non-loop edges on three distinct cusps),
/// largest indices first.
fn triangles(graph: &EdgeCuspGraph) -> Vec<[usize; 3]> {
    let n = graph.ends.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if [a, b, c].iter().any(|&e| graph.is_loop(e)) {
                    continue;
                }
                let mut deg = std::collections::BTreeMap::new();
                for e in [a, b, c] {
                    let (x, y) = graph.ends[e];
                    *deg.entry(x).or_insert(0) += 1;
                    *deg.entry(y).or_insert(0) += 1;
                }
                if deg.len() == 3 && deg.values().all(|&d| d == 2) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out.sort_by(|x, y| y.iter().rev().cmp(x.iter().rev()));
    out
}

/// A maximal tree plus a loop when one exists, otherwise a maximal tree
/// containing two sides of a triangle plus the third side. Ties prefer
/// excluding larger edge indices.
pub fn select_basis(g: &GluingData) -> Result<BasisSelection, BasisError> {
    let graph = EdgeCuspGraph::new(g);
    let n = g.n();
    if let Some(lp) = (0..n).rev().find(|&e| graph.is_loop(e)) {
        let mut x = spanning_tree(&graph, &[]).ok_or(BasisError::NoValidCycle)?;
        x.push(lp);
        return BasisSelection::from_excluded(n, &x);
    }
    for [a, b, c] in triangles(&graph) {
        for (s1, s2, third) in [(b, c, a), (a, c, b), (a, b, c)] {
            let Some(mut x) = spanning_tree(&graph, &[s2, s1]) else { continue };
            x.push(third);
            let sel = BasisSelection::from_excluded(n, &x)?;
            if validate_basis(g, &sel) == Ok(BasisCheck::Valid) {
                return Ok(sel);
            }
        }
    }
    Err(BasisError::NoValidCycle)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisCheck {
    Valid,
    SublatticeIndex(BigInt),
}

/// Index of the span of the basic rows inside the span of all edge rows.
pub fn validate_basis(g: &GluingData, sel: &BasisSelection) -> Result<BasisCheck, BasisError> {
    if sel.excluded.len() != g.r() {
        return Err(BasisError::WrongSize { expected: g.r(), got: sel.excluded.len() });
    }
    let rows = intlinalg::from_i64(&g.edge_rows());
    let sub: intlinalg::IntMatrix = sel.basic.iter().map(|&e| rows[e].clone()).collect();
    let index = intlinalg::sublattice_index(&sub, &rows).ok_or(BasisError::RankDeficient)?;
    Ok(if index == BigInt::from(1) { BasisCheck::Valid } else { BasisCheck::SublatticeIndex(index) })
}

/// Integer relation `Σ_e coef[e] E_e = 0` over all edges.
type Relation = Vec<i64>;

fn combine(a: &Relation, ka: i64, b: &Relation, kb: i64) -> Relation {
    a.iter().zip(b).map(|(x, y)| ka * x + kb * y).collect()
}

/// Solves `rel` for edge `s`, which must be its only excluded edge:
/// `E(s) = -(rel - coef_s E(s)) / coef_s`.
fn solve_for(rel: &Relation, s: usize, excluded: &BTreeSet<usize>) -> Result<Vec<i64>, BasisError> {
    let c = rel[s];
    debug_assert!(excluded.iter().all(|&e| e == s || rel[e] == 0));
    let mut out = vec![0; rel.len()];
    for (e, &x) in rel.iter().enumerate() {
        if e == s || x == 0 {
            continue;
        }
        if x % c != 0 {
            return Err(BasisError::OddCoefficient(s));
        }
        out[e] = -x / c;
    }
    Ok(out)
}

/// For each excluded edge `s` (in `sel.excluded` order), integer coefficients
/// `λ` over all edges, zero off the basic edges, with `E(s) = Σ λ_e E(e)`.
///
/// Leaves of the excluded subgraph are collapsed one at a time, merging
/// their cusp relation into the neighbour so the collapsed edge cancels. What
/// remains is a single cusp carrying the loop, or a triangle.
pub fn express_excluded_rows(g: &GluingData, sel: &BasisSelection) -> Result<Vec<Vec<i64>>, BasisError> {
    let graph = EdgeCuspGraph::new(g);
    let n = g.n();
    let xset: BTreeSet<usize> = sel.excluded.iter().copied().collect();
    // super-vertex relations, indexed by surviving representative cusp
    let mut rel: Vec<Option<Relation>> = g.cusp_incidence().iter().map(|r| Some(r.clone())).collect();
    let mut owner: Vec<usize> = (0..graph.vertices).collect();
    let mut remaining: BTreeSet<usize> = xset.clone();
    let mut solved: Vec<Option<Vec<i64>>> = vec![None; n];
    let ends = |e: usize, owner: &Vec<usize>| (owner[graph.ends[e].0], owner[graph.ends[e].1]);

    loop {
        let alive: Vec<usize> = (0..graph.vertices).filter(|&v| rel[v].is_some()).collect();
        let leaf = alive.iter().copied().find_map(|v| {
            let incident: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&e| {
                    let (a, b) = ends(e, &owner);
                    a == v || b == v
                })
                .collect();
            match incident.as_slice() {
                [s] if ends(*s, &owner).0 != ends(*s, &owner).1 => Some((v, *s)),
                _ => None,
            }
        });
        let Some((v, s)) = leaf else { break };
        let (a, b) = ends(s, &owner);
        let w = if a == v { b } else { a };
        let rv = rel[v].take().unwrap();
        solved[s] = Some(solve_for(&rv, s, &xset)?);
        let rw = rel[w].take().unwrap();
        rel[w] = Some(combine(&rw, rv[s], &rv, -rw[s]));
        for o in owner.iter_mut() {
            if *o == v {
                *o = w;
            }
        }
        remaining.remove(&s);
    }

    let alive: Vec<usize> = (0..graph.vertices).filter(|&v| rel[v].is_some()).collect();
    let rest: Vec<usize> = remaining.iter().copied().collect();
    match (alive.as_slice(), rest.as_slice()) {
        ([v], [s]) => {
            solved[*s] = Some(solve_for(rel[*v].as_ref().unwrap(), *s, &xset)?);
        }
        ([x, y, z], [_, _, _]) => {
            let rels = [rel[*x].clone().unwrap(), rel[*y].clone().unwrap(), rel[*z].clone().unwrap()];
            for &t in &rest {
                let mut found = None;
                for sy in [1, -1] {
                    for sz in [1, -1] {
                        let c = combine(&combine(&rels[0], 1, &rels[1], sy), 1, &rels[2], sz);
                        if rest.iter().all(|&e| e == t || c[e] == 0) && c[t] != 0 {
                            found = Some(c);
                        }
                    }
                }
                let c = found.ok_or(BasisError::NotTreeWithCycle)?;
                solved[t] = Some(solve_for(&c, t, &xset)?);
            }
        }
        _ => return Err(BasisError::NotTreeWithCycle),
    }

    let rows = g.edge_rows();
    let mut out = Vec::with_capacity(sel.excluded.len());
    for &s in &sel.excluded {
        let lam = solved[s].clone().ok_or(BasisError::NotTreeWithCycle)?;
        let rebuilt: Vec<i64> = (0..2 * n).map(|c| lam.iter().zip(&rows).map(|(l, r)| l * r[c]).sum()).collect();
        if rebuilt != rows[s] || xset.iter().any(|&e| lam[e] != 0) {
            return Err(BasisError::ExpressionMismatch(s));
        }
        out.push(lam);
    }
    Ok(out)
}

/// Integer basis of the saturation of the row space of `C` in `Z^N`.
pub fn cusp_saturation(g: &GluingData) -> intlinalg::IntMatrix {
    let c = intlinalg::from_i64(g.cusp_incidence());
    let k = intlinalg::integer_kernel(&c, g.n());
    intlinalg::integer_kernel(&k, g.n())
}

/// True when `Z^N` is spanned by the coordinate vectors of `basic` together
/// with the saturated cusp lattice, so the basic coordinates parametrize a
/// complete set of coset representatives.
pub fn spans_complement(g: &GluingData, basic_vectors: &intlinalg::IntMatrix) -> bool {
    let mut rows = basic_vectors.clone();
    rows.extend(cusp_saturation(g));
    let h = intlinalg::hnf(&rows);
    h.len() == g.n() && h.iter().enumerate().all(|(i, r)| r[i].abs().to_i64() == Some(1))
}
