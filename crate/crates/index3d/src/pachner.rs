//! Local moves on face-pairing tables: 2–3, 3–2, 0–2 and 2–0.
//!
//! Moves act on the oriented gluing table. New tetrahedra take the slots of
//! removed ones in increasing order and extra ones are appended; when fewer
//! tetrahedra are created than removed, later indices shift down.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::anglestruct::{self, EfficiencyError, EfficiencyOptions};
use crate::edgebasis;
use crate::indexengine::{self, IndexError};
use crate::qlaurent::TruncatedSeries;
use crate::tetindex::TetIndexCache;
use crate::triangulation::{
    perm_compose, perm_inverse, transposition, CombTriangulation, GluingData, Gluing, Perm, PeripheralVector, TriError, IDENTITY,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    TwoThree,
    ThreeTwo,
    ZeroTwo,
    TwoZero,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::TwoThree => "2-3",
            MoveKind::ThreeTwo => "3-2",
            MoveKind::ZeroTwo => "0-2",
            MoveKind::TwoZero => "2-0",
        })
    }
}

impl std::str::FromStr for MoveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "2-3" | "two_three" | "23" => Ok(MoveKind::TwoThree),
            "3-2" | "three_two" | "32" => Ok(MoveKind::ThreeTwo),
            "0-2" | "zero_two" | "02" => Ok(MoveKind::ZeroTwo),
            "2-0" | "two_zero" | "20" => Ok(MoveKind::TwoZero),
            _ => Err(format!("unknown move kind `{s}` (expected 2-3, 3-2, 0-2 or 2-0)")),
        }
    }
}

/// Where a move happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveSpec {
    /// The face `face` of `tet` and the face it is glued to.
    TwoThree { tet: usize, face: u8 },
    /// An edge class of degree 3.
    ThreeTwo { edge: usize },
    /// The face `face` of `tet`, its edge `ab`, and the face reached after
    /// `steps` steps around that edge (leaving `tet` through `face`).
    ZeroTwo { tet: usize, face: u8, a: u8, b: u8, steps: usize },
    /// An edge class of degree 2.
    TwoZero { edge: usize },
}

impl MoveSpec {
    pub fn kind(&self) -> MoveKind {
        match self {
            MoveSpec::TwoThree { .. } => MoveKind::TwoThree,
            MoveSpec::ThreeTwo { .. } => MoveKind::ThreeTwo,
            MoveSpec::ZeroTwo { .. } => MoveKind::ZeroTwo,
            MoveSpec::TwoZero { .. } => MoveKind::TwoZero,
        }
    }

    /// Parses the comma-separated location of a move: `tet,face` for 2-3,
    /// `edge` for 3-2 and 2-0, `tet,face,a,b,steps` for 0-2.
    pub fn parse(kind: MoveKind, loc: &str) -> Result<Self, MoveError> {
        let nums: Vec<usize> = loc
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| MoveError::BadLocation(format!("`{loc}` is not a list of nonnegative integers")))?;
        let vertex = |x: usize| -> Result<u8, MoveError> {
            if x < 4 {
                Ok(x as u8)
            } else {
                Err(MoveError::BadLocation(format!("vertex or face {x} is not in 0..4")))
            }
        };
        match (kind, nums.as_slice()) {
            (MoveKind::TwoThree, &[tet, face]) => Ok(MoveSpec::TwoThree { tet, face: vertex(face)? }),
            (MoveKind::ThreeTwo, &[edge]) => Ok(MoveSpec::ThreeTwo { edge }),
            (MoveKind::TwoZero, &[edge]) => Ok(MoveSpec::TwoZero { edge }),
            (MoveKind::ZeroTwo, &[tet, face, a, b, steps]) => Ok(MoveSpec::ZeroTwo { tet, face: vertex(face)?, a: vertex(a)?, b: vertex(b)?, steps }),
            (k, _) => Err(MoveError::BadLocation(format!("wrong number of location fields for a {k} move"))),
        }
    }
}

impl fmt::Display for MoveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MoveSpec::TwoThree { tet, face } => write!(f, "2-3 at {tet},{face}"),
            MoveSpec::ThreeTwo { edge } => write!(f, "3-2 at {edge}"),
            MoveSpec::ZeroTwo { tet, face, a, b, steps } => write!(f, "0-2 at {tet},{face},{a},{b},{steps}"),
            MoveSpec::TwoZero { edge } => write!(f, "2-0 at {edge}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("bad move location: {0}")]
    BadLocation(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Triangulation(#[from] TriError),
}

/// How a face of a new tetrahedron is glued.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FaceSpec {
    /// To face `perm[φ]` of new tetrahedron `tet` (local index).
    Internal { tet: usize, perm: Perm },
    /// Takes over the pairing of old face `(tet, face)`, which disappears;
    /// `sigma` maps new vertex labels to labels of the old tetrahedron.
    Replace { tet: usize, face: u8, sigma: Perm },
    /// Glued directly to old face `(tet, face)` through `sigma`.
    Attach { tet: usize, face: u8, sigma: Perm },
}

struct Rewrite {
    removed: Vec<usize>,
    new_tets: Vec<[FaceSpec; 4]>,
}

fn apply_rewrite(t: &CombTriangulation, rw: &Rewrite) -> Result<CombTriangulation, MoveError> {
    let n = t.n_tets();
    let removed: BTreeSet<usize> = rw.removed.iter().copied().collect();
    let k = rw.new_tets.len();
    let mut table: Vec<[Gluing; 4]> = t.gluings().to_vec();
    table.extend(std::iter::repeat_n([Gluing { tet: usize::MAX, perm: IDENTITY }; 4], k));
    let owners: HashMap<(usize, u8), (usize, u8, Perm)> = rw
        .new_tets
        .iter()
        .enumerate()
        .flat_map(|(i, faces)| {
            faces.iter().enumerate().filter_map(move |(phi, s)| match *s {
                FaceSpec::Replace { tet, face, sigma } => Some(((tet, face), (n + i, phi as u8, sigma))),
                _ => None,
            })
        })
        .collect();
    let glue = |table: &mut Vec<[Gluing; 4]>, a: usize, fa: u8, b: usize, perm: Perm| {
        table[a][fa as usize] = Gluing { tet: b, perm };
        table[b][perm[fa as usize] as usize] = Gluing { tet: a, perm: perm_inverse(&perm) };
    };
    for (i, faces) in rw.new_tets.iter().enumerate() {
        let me = n + i;
        for (phi, spec) in faces.iter().enumerate() {
            let phi = phi as u8;
            match *spec {
                FaceSpec::Internal { tet, perm } => glue(&mut table, me, phi, n + tet, perm),
                FaceSpec::Attach { tet, face, sigma } => {
                    debug_assert_eq!(sigma[phi as usize], face);
                    glue(&mut table, me, phi, tet, sigma);
                }
                FaceSpec::Replace { tet, face, sigma } => {
                    let old = t.gluing(tet, face as usize);
                    let far_face = old.perm[face as usize];
                    if removed.contains(&old.tet) {
                        let &(other, ophi, osigma) = owners
                            .get(&(old.tet, far_face))
                            .ok_or_else(|| MoveError::PreconditionFailed(format!("face {far_face} of removed tet {} has no replacement", old.tet)))?;
                        glue(&mut table, me, phi, other, perm_compose(&perm_inverse(&osigma), &perm_compose(&old.perm, &sigma)));
                        debug_assert_eq!(table[other][ophi as usize].tet, me);
                    } else {
                        glue(&mut table, me, phi, old.tet, perm_compose(&old.perm, &sigma));
                    }
                }
            }
        }
    }
    // final placement
    let mut slots: Vec<usize> = removed.iter().copied().collect();
    let mut index = vec![usize::MAX; n + k];
    let mut next_new = 0;
    for &s in &slots {
        if next_new < k {
            index[n + next_new] = s;
            next_new += 1;
        }
    }
    let mut appended = n;
    while next_new < k {
        index[n + next_new] = appended;
        appended += 1;
        next_new += 1;
    }
    slots.drain(..k.min(slots.len()));
    // leftover removed slots are closed up
    for t_old in 0..n {
        if !removed.contains(&t_old) {
            index[t_old] = t_old - slots.iter().filter(|&&s| s < t_old).count();
        }
    }
    for i in 0..k {
        if index[n + i] >= n {
            index[n + i] -= slots.len();
        } else {
            index[n + i] -= slots.iter().filter(|&&s| s < index[n + i]).count();
        }
    }
    let total = n + k - removed.len();
    let mut out = vec![[Gluing { tet: 0, perm: IDENTITY }; 4]; total];
    for (old, faces) in table.iter().enumerate() {
        if old < n && removed.contains(&old) {
            continue;
        }
        for f in 0..4 {
            let g = faces[f];
            out[index[old]][f] = Gluing { tet: index[g.tet], perm: g.perm };
        }
    }
    Ok(CombTriangulation::new(out)?)
}

fn fail(msg: impl Into<String>) -> MoveError {
    MoveError::PreconditionFailed(msg.into())
}

/// Checks the preconditions of a move.
pub fn check_preconditions(t: &CombTriangulation, mv: &MoveSpec) -> Result<(), MoveError> {
    let n = t.n_tets();
    match *mv {
        MoveSpec::TwoThree { tet, face } => {
            if tet >= n || face > 3 {
                return Err(MoveError::BadLocation(format!("no face {face} of tet {tet}")));
            }
            if t.gluing(tet, face as usize).tet == tet {
                return Err(fail("the two tetrahedra meeting at the face are not distinct"));
            }
            Ok(())
        }
        MoveSpec::ThreeTwo { edge } => {
            let classes = t.edge_classes()?;
            let class = classes.get(edge).ok_or_else(|| MoveError::BadLocation(format!("no edge class {edge}")))?;
            if class.degree() != 3 {
                return Err(fail(format!("edge {edge} has degree {}, not 3", class.degree())));
            }
            let tets: BTreeSet<usize> = class.incidences.iter().map(|i| i.tet).collect();
            if tets.len() != 3 {
                return Err(fail("the three tetrahedra incident to the edge are not distinct"));
            }
            Ok(())
        }
        MoveSpec::ZeroTwo { tet, face, a, b, steps } => {
            zero_two_faces(t, tet, face, a, b, steps)?;
            Ok(())
        }
        MoveSpec::TwoZero { edge } => {
            two_zero_parts(t, edge)?;
            Ok(())
        }
    }
}

/// Applies a move after checking its preconditions.
pub fn apply_move(t: &CombTriangulation, mv: &MoveSpec) -> Result<CombTriangulation, MoveError> {
    check_preconditions(t, mv)?;
    match *mv {
        MoveSpec::TwoThree { tet, face } => two_three(t, tet, face),
        MoveSpec::ThreeTwo { edge } => three_two(t, edge),
        MoveSpec::ZeroTwo { tet, face, a, b, steps } => zero_two(t, tet, face, a, b, steps),
        MoveSpec::TwoZero { edge } => two_zero(t, edge),
    }
}

fn two_three(t: &CombTriangulation, t0: usize, f0: u8) -> Result<CombTriangulation, MoveError> {
    let g = t.gluing(t0, f0 as usize);
    let (t1, p) = (g.tet, g.perm);
    let ks: Vec<u8> = (0..4).filter(|&v| v != f0).collect();
    // T_i is t0 with vertex k_i replaced by the far apex
    let new_tets = (0..3)
        .map(|i| {
            let ki = ks[i];
            let mut faces = [FaceSpec::Internal { tet: 0, perm: IDENTITY }; 4];
            faces[ki as usize] = FaceSpec::Replace { tet: t0, face: ki, sigma: IDENTITY };
            let tau = perm_compose(&p, &transposition(f0, ki));
            faces[f0 as usize] = FaceSpec::Replace { tet: t1, face: p[ki as usize], sigma: tau };
            for j in (0..3).filter(|&j| j != i) {
                faces[ks[j] as usize] = FaceSpec::Internal { tet: j, perm: transposition(ki, ks[j]) };
            }
            faces
        })
        .collect();
    apply_rewrite(t, &Rewrite { removed: vec![t0, t1], new_tets })
}

fn three_two(t: &CombTriangulation, edge: usize) -> Result<CombTriangulation, MoveError> {
    let class = &t.edge_classes()?[edge];
    let first = class.incidences[0];
    let a0 = first.tet;
    let [i, j, k, l] = first.verts;
    let p = t.gluing(a0, l as usize);
    let r = t.gluing(a0, k as usize);
    // top = a0 with j replaced by the third equatorial vertex, bottom likewise with i
    let mut top = [FaceSpec::Internal { tet: 1, perm: transposition(i, j) }; 4];
    top[j as usize] = FaceSpec::Replace { tet: a0, face: j, sigma: IDENTITY };
    top[l as usize] = FaceSpec::Replace { tet: p.tet, face: p.perm[j as usize], sigma: perm_compose(&p.perm, &transposition(j, l)) };
    top[k as usize] = FaceSpec::Replace { tet: r.tet, face: r.perm[j as usize], sigma: perm_compose(&r.perm, &transposition(j, k)) };
    let mut bot = [FaceSpec::Internal { tet: 0, perm: transposition(i, j) }; 4];
    bot[i as usize] = FaceSpec::Replace { tet: a0, face: i, sigma: IDENTITY };
    bot[l as usize] = FaceSpec::Replace { tet: p.tet, face: p.perm[i as usize], sigma: perm_compose(&p.perm, &transposition(i, l)) };
    bot[k as usize] = FaceSpec::Replace { tet: r.tet, face: r.perm[i as usize], sigma: perm_compose(&r.perm, &transposition(i, k)) };
    let removed = class.incidences.iter().map(|inc| inc.tet).collect();
    apply_rewrite(t, &Rewrite { removed, new_tets: vec![top, bot] })
}

/// The two faces of a 0-2 move as `(tet, [i, j, k, l])`: the edge is `ij`, the
/// face is `l`, its third vertex `k`.
fn zero_two_faces(t: &CombTriangulation, tet: usize, face: u8, a: u8, b: u8, steps: usize) -> Result<[(usize, [u8; 4]); 2], MoveError> {
    if tet >= t.n_tets() {
        return Err(MoveError::BadLocation(format!("no tet {tet}")));
    }
    if a == b || a == face || b == face {
        return Err(MoveError::BadLocation(format!("{a}{b} is not an edge of face {face}")));
    }
    let k = (0..4).find(|&v| v != a && v != b && v != face).unwrap();
    let start = [a, b, k, face];
    let mut cur = (tet, start);
    let mut walked = 0;
    loop {
        let [i, j, k, l] = cur.1;
        let g = t.gluing(cur.0, l as usize);
        let p = g.perm;
        cur = (g.tet, [p[i as usize], p[j as usize], p[l as usize], p[k as usize]]);
        walked += 1;
        if cur == (tet, start) {
            break;
        }
    }
    if steps == 0 || steps >= walked {
        return Err(MoveError::BadLocation(format!("steps must lie in 1..{walked} for an edge of degree {walked}")));
    }
    let mut second = (tet, start);
    for _ in 0..steps {
        let [i, j, k, l] = second.1;
        let g = t.gluing(second.0, l as usize);
        let p = g.perm;
        second = (g.tet, [p[i as usize], p[j as usize], p[l as usize], p[k as usize]]);
    }
    let (x, [.., lx]) = (tet, start);
    let (y, [.., ly]) = second;
    let gx = t.gluing(x, lx as usize);
    let same = (y, ly) == (x, lx) || (y, ly) == (gx.tet, gx.perm[lx as usize]);
    if same {
        return Err(fail("the two triangles are not distinct"));
    }
    Ok([(tet, start), second])
}

fn zero_two(t: &CombTriangulation, tet: usize, face: u8, a: u8, b: u8, steps: usize) -> Result<CombTriangulation, MoveError> {
    let [(x, [i, j, k, l]), (y, [i2, j2, k2, l2])] = zero_two_faces(t, tet, face, a, b, steps)?;
    let gx = t.gluing(x, l as usize);
    let gy = t.gluing(y, l2 as usize);
    let (xp, p) = (gx.tet, gx.perm);
    let (yp, p2) = (gy.tet, gy.perm);
    let at = |v: [u8; 4]| -> Perm { v };
    let u = |x: u8| x as usize;
    // A = (P, Q, R1, R2), B = (Q, P, R1, R2)
    let a_x = at([p[u(i)], p[u(j)], p[u(k)], p[u(l)]]);
    let a_y = at([i2, j2, l2, k2]);
    let b_x = at([j, i, k, l]);
    let b_y = at([p2[u(j2)], p2[u(i2)], p2[u(l2)], p2[u(k2)]]);
    let swap = transposition(0, 1);
    let tets = [
        [
            FaceSpec::Internal { tet: 1, perm: swap },
            FaceSpec::Internal { tet: 1, perm: swap },
            FaceSpec::Attach { tet: y, face: l2, sigma: a_y },
            FaceSpec::Attach { tet: xp, face: p[u(l)], sigma: a_x },
        ],
        [
            FaceSpec::Internal { tet: 0, perm: swap },
            FaceSpec::Internal { tet: 0, perm: swap },
            FaceSpec::Attach { tet: yp, face: p2[u(l2)], sigma: b_y },
            FaceSpec::Attach { tet: x, face: l, sigma: b_x },
        ],
    ];
    apply_rewrite(t, &Rewrite { removed: Vec::new(), new_tets: tets.to_vec() })
}

struct TwoZeroParts {
    a: usize,
    b: usize,
    /// Maps labels of `a` to labels of `b` across the pillow.
    ab: Perm,
    /// The faces of `a` opposite the ends of the degree-2 edge.
    outer: [u8; 2],
}

fn two_zero_parts(t: &CombTriangulation, edge: usize) -> Result<TwoZeroParts, MoveError> {
    let classes = t.edge_classes()?;
    let class = classes.get(edge).ok_or_else(|| MoveError::BadLocation(format!("no edge class {edge}")))?;
    if class.degree() != 2 {
        return Err(fail(format!("edge {edge} has degree {}, not 2", class.degree())));
    }
    let [i, j, k, l] = class.incidences[0].verts;
    let a = class.incidences[0].tet;
    let b = class.incidences[1].tet;
    if a == b {
        return Err(fail("the two tetrahedra at the edge are not distinct"));
    }
    let gl = t.gluing(a, l as usize);
    let gk = t.gluing(a, k as usize);
    if gl.perm != gk.perm || gl.tet != b || gk.tet != b {
        return Err(fail("the two tetrahedra do not form a pillow"));
    }
    let ab = gl.perm;
    let outer_faces = [(a, i), (a, j), (b, ab[i as usize]), (b, ab[j as usize])];
    for &(s, f) in &outer_faces {
        let g = t.gluing(s, f as usize);
        if outer_faces.contains(&(g.tet, g.perm[f as usize])) {
            return Err(fail("there is a face pairing between the four external faces"));
        }
    }
    let slot = t.edge_class_of_slot()?;
    let e_a = slot[6 * a + crate::triangulation::edge_index(k, l)];
    let e_b = slot[6 * b + crate::triangulation::edge_index(ab[k as usize], ab[l as usize])];
    if e_a == e_b {
        return Err(fail("the two edges opposite the degree-2 edge are identified"));
    }
    Ok(TwoZeroParts { a, b, ab, outer: [i, j] })
}

fn two_zero(t: &CombTriangulation, edge: usize) -> Result<CombTriangulation, MoveError> {
    let parts = two_zero_parts(t, edge)?;
    let n = t.n_tets();
    let mut table = t.gluings().to_vec();
    for &f in &parts.outer {
        let ga = t.gluing(parts.a, f as usize);
        let fb = parts.ab[f as usize];
        let gb = t.gluing(parts.b, fb as usize);
        // partner of a's face ↦ a ↦ b ↦ partner of b's face
        let perm = perm_compose(&gb.perm, &perm_compose(&parts.ab, &perm_inverse(&ga.perm)));
        let yf = ga.perm[f as usize];
        table[ga.tet][yf as usize] = Gluing { tet: gb.tet, perm };
        table[gb.tet][perm[yf as usize] as usize] = Gluing { tet: ga.tet, perm: perm_inverse(&perm) };
    }
    let gone = [parts.a.min(parts.b), parts.a.max(parts.b)];
    let index = |s: usize| s - gone.iter().filter(|&&g| g < s).count();
    let out: Vec<[Gluing; 4]> = (0..n)
        .filter(|s| !gone.contains(s))
        .map(|s| {
            let mut faces = table[s];
            for g in faces.iter_mut() {
                g.tet = index(g.tet);
            }
            faces
        })
        .collect();
    Ok(CombTriangulation::new(out)?)
}

/// Isomorphism-invariant code: the lexicographically least relabelling
/// reached by breadth-first search from any tetrahedron and vertex labelling.
pub fn canonical_code(t: &CombTriangulation) -> Vec<(usize, Perm)> {
    let n = t.n_tets();
    let perms: Vec<Perm> = all_perms();
    let mut best: Option<Vec<(usize, Perm)>> = None;
    for start in 0..n {
        for pi in &perms {
            // relabel[s] maps old labels of s to new labels
            let mut relabel: Vec<Option<Perm>> = vec![None; n];
            let mut order = vec![start];
            let mut new_index = vec![usize::MAX; n];
            new_index[start] = 0;
            relabel[start] = Some(*pi);
            let mut code = Vec::with_capacity(4 * n);
            let mut head = 0;
            while head < order.len() {
                let s = order[head];
                head += 1;
                let rs = relabel[s].unwrap();
                let inv = perm_inverse(&rs);
                for nf in 0..4u8 {
                    let of = inv[nf as usize];
                    let g = t.gluing(s, of as usize);
                    if relabel[g.tet].is_none() {
                        // the new gluing is the identity on labels
                        let mut r = [0u8; 4];
                        for v in 0..4 {
                            r[g.perm[v] as usize] = rs[v];
                        }
                        relabel[g.tet] = Some(r);
                        new_index[g.tet] = order.len();
                        order.push(g.tet);
                    }
                    let rt = relabel[g.tet].unwrap();
                    let np = perm_compose(&rt, &perm_compose(&g.perm, &inv));
                    code.push((new_index[g.tet], np));
                }
            }
            if order.len() < n {
                continue;
            }
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
        }
    }
    best.unwrap_or_default()
}

fn all_perms() -> Vec<Perm> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4u8 {
        for b in (0..4u8).filter(|&b| b != a) {
            for c in (0..4u8).filter(|&c| c != a && c != b) {
                let d = 6 - a - b - c;
                out.push([a, b, c, d]);
            }
        }
    }
    out
}

pub fn is_isomorphic(a: &CombTriangulation, b: &CombTriangulation) -> bool {
    a.n_tets() == b.n_tets() && canonical_code(a) == canonical_code(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvarianceError {
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Triangulation(#[from] TriError),
    #[error("{side} side: {source}")]
    Index { side: &'static str, source: IndexError },
    #[error("{side} side: {source}")]
    Efficiency { side: &'static str, source: EfficiencyError },
    #[error("{side} side is not 1-efficient (pass --assume-convergent to try anyway)")]
    NotEfficient { side: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceReport {
    pub before: TruncatedSeries,
    pub after: TruncatedSeries,
    pub moved: CombTriangulation,
    /// Smallest exponent (half-units) where the two series differ.
    pub first_difference: Option<i64>,
}

impl InvarianceReport {
    pub fn equal(&self) -> bool {
        self.first_difference.is_none()
    }
}

pub fn first_difference(a: &TruncatedSeries, b: &TruncatedSeries) -> Option<i64> {
    let d = a.sub(b);
    d.min_exponent()
}

/// Index at `ϖ = 0` to `order` half-units, optionally checking 1-efficiency.
pub fn index_of(t: &CombTriangulation, order: i64, check_efficiency: bool, side: &'static str, cache: &TetIndexCache) -> Result<TruncatedSeries, InvarianceError> {
    let g = GluingData::from_triangulation(t)?;
    if check_efficiency {
        let opts = EfficiencyOptions { force: true, ..Default::default() };
        let rep = anglestruct::has_index_structure(&g, None, &opts).map_err(|source| InvarianceError::Efficiency { side, source })?;
        if !rep.has_index_structure() {
            return Err(InvarianceError::NotEfficient { side });
        }
    }
    let basis = edgebasis::select_basis(&g).map_err(|e| InvarianceError::Index { side, source: e.into() })?;
    indexengine::compute_index(&g, Some(&basis), &PeripheralVector::zero(g.n()), order, cache).map_err(|source| InvarianceError::Index { side, source })
}

/// Computes the index before and after a move and compares them exactly.
pub fn verify_move_invariance(t: &CombTriangulation, mv: &MoveSpec, order: i64, assume_convergent: bool) -> Result<InvarianceReport, InvarianceError> {
    let moved = apply_move(t, mv)?;
    let cache = TetIndexCache::new();
    let before = index_of(t, order, !assume_convergent, "original", &cache)?;
    let after = index_of(&moved, order, !assume_convergent, "moved", &cache)?;
    let first_difference = first_difference(&before, &after);
    Ok(InvarianceReport { before, after, moved, first_difference })
}
