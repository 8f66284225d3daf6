//! Ideal triangulations at two levels: face-pairing tables and the
//! Neumann–Zagier matrices derived from them.
//!
//! Vertex labels of a tetrahedron are `0..4`; face `f` is opposite vertex `f`.
//! Edges are indexed `01, 02, 03, 12, 13, 23`. Quad `q` separates edges
//! `01`/`23`, `q'` separates `02`/`13`, `q''` separates `03`/`12`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::intlinalg;

pub type Perm = [u8; 4];

pub const IDENTITY: Perm = [0, 1, 2, 3];

pub const EDGES: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn edge_index(a: u8, b: u8) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    EDGES.iter().position(|&e| e == (a, b)).expect("distinct vertices")
}

/// Quad type facing the edge `ab`: 0 for `q`, 1 for `q'`, 2 for `q''`.
pub fn quad_of_edge(a: u8, b: u8) -> usize {
    match edge_index(a, b) {
        0 | 5 => 0,
        1 | 4 => 1,
        _ => 2,
    }
}

pub fn perm_inverse(p: &Perm) -> Perm {
    let mut inv = [0u8; 4];
    for (i, &x) in p.iter().enumerate() {
        inv[x as usize] = i as u8;
    }
    inv
}

/// `(a ∘ b)[i] = a[b[i]]`.
pub fn perm_compose(a: &Perm, b: &Perm) -> Perm {
    [a[b[0] as usize], a[b[1] as usize], a[b[2] as usize], a[b[3] as usize]]
}

pub fn perm_is_odd(p: &Perm) -> bool {
    let mut inversions = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

pub fn perm_is_valid(p: &Perm) -> bool {
    let mut seen = [false; 4];
    for &x in p {
        if x > 3 || seen[x as usize] {
            return false;
        }
        seen[x as usize] = true;
    }
    true
}

pub fn transposition(a: u8, b: u8) -> Perm {
    let mut p = IDENTITY;
    p.swap(a as usize, b as usize);
    p
}

pub fn perm_string(p: &Perm) -> String {
    p.iter().map(|d| char::from(b'0' + d)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("found {found} edge classes, expected {expected} (one per tetrahedron)")]
    EdgeCountMismatch { found: usize, expected: usize },
    #[error("the triangulation is not orientable")]
    NotOrientable,
}

fn parse_err(line: usize, msg: impl Into<String>) -> TriError {
    TriError::Parse { line, msg: msg.into() }
}

/// Target of a face pairing: face `f` of this tetrahedron is glued to face
/// `perm[f]` of `tet`, vertex `v` going to `perm[v]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gluing {
    pub tet: usize,
    pub perm: Perm,
}

/// Oriented ideal triangulation with every face glued.
///
/// Invariants: gluings are involutive, no face is glued to itself, every
/// gluing permutation is odd.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombTriangulation {
    gluings: Vec<[Gluing; 4]>,
    /// Tetrahedra whose input labelling was mirrored (vertices 0 and 1
    /// swapped) to make the triangulation oriented.
    flipped: Vec<bool>,
}

/// One tetrahedron-edge incidence on the cycle around an edge class.
///
/// `verts = [i, j, k, l]`: the edge is `ij`; the walk leaves the tetrahedron
/// through face `l`, which contains `i, j, k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeIncidence {
    pub tet: usize,
    pub verts: [u8; 4],
}

impl EdgeIncidence {
    pub fn edge(&self) -> usize {
        edge_index(self.verts[0], self.verts[1])
    }

    pub fn quad(&self) -> usize {
        quad_of_edge(self.verts[0], self.verts[1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClass {
    pub incidences: Vec<EdgeIncidence>,
}

impl EdgeClass {
    pub fn degree(&self) -> usize {
        self.incidences.len()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // the smaller root wins so classes are named by their first slot
        if ra < rb {
            self.0[rb] = ra;
        } else {
            self.0[ra] = rb;
        }
    }
}

impl CombTriangulation {
    /// Validates the pairing table and orients it, mirroring tetrahedra as
    /// needed.
    pub fn new(gluings: Vec<[Gluing; 4]>) -> Result<Self, TriError> {
        let n = gluings.len();
        if n == 0 {
            return Err(TriError::InvariantViolation("no tetrahedra".into()));
        }
        for (t, faces) in gluings.iter().enumerate() {
            for (f, g) in faces.iter().enumerate() {
                if g.tet >= n {
                    return Err(TriError::InvariantViolation(format!("tet {t} face {f} glued to missing tet {}", g.tet)));
                }
                if !perm_is_valid(&g.perm) {
                    return Err(TriError::InvariantViolation(format!("tet {t} face {f} has an invalid permutation")));
                }
                let back = gluings[g.tet][g.perm[f] as usize];
                if back.tet != t || back.perm != perm_inverse(&g.perm) {
                    return Err(TriError::InvariantViolation(format!("gluing of tet {t} face {f} is not involutive")));
                }
                if g.tet == t && g.perm[f] as usize == f {
                    return Err(TriError::InvariantViolation(format!("tet {t} face {f} is glued to itself")));
                }
            }
        }
        let mut flip: Vec<Option<bool>> = vec![None; n];
        for start in 0..n {
            if flip[start].is_some() {
                continue;
            }
            flip[start] = Some(false);
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                let ft = flip[t].unwrap();
                for g in &gluings[t] {
                    // the pairing is odd after relabelling iff parity(p) + ft + fs is odd
                    let want = !(perm_is_odd(&g.perm) ^ ft);
                    match flip[g.tet] {
                        None => {
                            flip[g.tet] = Some(want);
                            stack.push(g.tet);
                        }
                        Some(fs) if fs != want => return Err(TriError::NotOrientable),
                        Some(_) => {}
                    }
                }
            }
        }
        let flipped: Vec<bool> = flip.into_iter().map(Option::unwrap).collect();
        let tau = transposition(0, 1);
        let relabel = |t: usize| if flipped[t] { tau } else { IDENTITY };
        let mut oriented = gluings.clone();
        for t in 0..n {
            for f in 0..4 {
                let g = gluings[t][f];
                let (rt, rs) = (relabel(t), relabel(g.tet));
                let nf = rt[f] as usize;
                oriented[t][nf] = Gluing { tet: g.tet, perm: perm_compose(&rs, &perm_compose(&g.perm, &rt)) };
            }
        }
        Ok(CombTriangulation { gluings: oriented, flipped })
    }

    pub fn n_tets(&self) -> usize {
        self.gluings.len()
    }

    pub fn gluing(&self, tet: usize, face: usize) -> Gluing {
        self.gluings[tet][face]
    }

    pub fn gluings(&self) -> &[[Gluing; 4]] {
        &self.gluings
    }

    pub fn flipped(&self) -> &[bool] {
        &self.flipped
    }

    /// Edge classes ordered by their smallest `(tet, edge)` slot, each with its
    /// incidences in cyclic order around the edge.
    pub fn edge_classes(&self) -> Result<Vec<EdgeClass>, TriError> {
        let n = self.n_tets();
        let mut seen = vec![false; 6 * n];
        let mut classes = Vec::new();
        for slot in 0..6 * n {
            if seen[slot] {
                continue;
            }
            let (t, e) = (slot / 6, slot % 6);
            let (i, j) = EDGES[e];
            let rest: Vec<u8> = (0..4).filter(|&v| v != i && v != j).collect();
            let start = EdgeIncidence { tet: t, verts: [i, j, rest[0], rest[1]] };
            let mut incidences = Vec::new();
            let mut cur = start;
            loop {
                incidences.push(cur);
                seen[cur.tet * 6 + cur.edge()] = true;
                let [i, j, k, l] = cur.verts;
                let g = self.gluings[cur.tet][l as usize];
                let p = g.perm;
                cur = EdgeIncidence { tet: g.tet, verts: [p[i as usize], p[j as usize], p[l as usize], p[k as usize]] };
                if cur == start {
                    break;
                }
                if incidences.len() > 6 * n {
                    return Err(TriError::InvariantViolation("edge walk does not close".into()));
                }
            }
            classes.push(EdgeClass { incidences });
        }
        if classes.len() != n {
            return Err(TriError::EdgeCountMismatch { found: classes.len(), expected: n });
        }
        Ok(classes)
    }

    /// Edge class index of every `(tet, edge)` slot.
    pub fn edge_class_of_slot(&self) -> Result<Vec<usize>, TriError> {
        let classes = self.edge_classes()?;
        let mut out = vec![0; 6 * self.n_tets()];
        for (c, class) in classes.iter().enumerate() {
            for inc in &class.incidences {
                out[inc.tet * 6 + inc.edge()] = c;
            }
        }
        Ok(out)
    }

    /// Cusp classes of ideal vertices `(tet, vertex)`, ordered by smallest slot.
    pub fn cusp_classes(&self) -> Vec<Vec<(usize, u8)>> {
        let n = self.n_tets();
        let mut uf = UnionFind::new(4 * n);
        for t in 0..n {
            for f in 0..4u8 {
                let g = self.gluings[t][f as usize];
                for v in (0..4u8).filter(|&v| v != f) {
                    uf.union(4 * t + v as usize, 4 * g.tet + g.perm[v as usize] as usize);
                }
            }
        }
        let mut order: Vec<usize> = Vec::new();
        let mut classes: Vec<Vec<(usize, u8)>> = Vec::new();
        for slot in 0..4 * n {
            let root = uf.find(slot);
            let idx = match order.iter().position(|&r| r == root) {
                Some(i) => i,
                None => {
                    order.push(root);
                    classes.push(Vec::new());
                    order.len() - 1
                }
            };
            classes[idx].push((slot / 4, (slot % 4) as u8));
        }
        classes
    }

    /// Relabels tetrahedron `t` as `sigma[t]`; the labelling inside each
    /// tetrahedron is unchanged.
    pub fn relabel_tets(&self, sigma: &[usize]) -> Result<Self, TriError> {
        let n = self.n_tets();
        let mut out = vec![[Gluing { tet: 0, perm: IDENTITY }; 4]; n];
        for t in 0..n {
            for f in 0..4 {
                let g = self.gluings[t][f];
                out[sigma[t]][f] = Gluing { tet: sigma[g.tet], perm: g.perm };
            }
        }
        CombTriangulation::new(out)
    }

    pub fn parse(text: &str) -> Result<Self, TriError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, "tri v1")?;
        let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "missing `tets N` line"))?;
        let n: usize = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["tets", n] => n.parse().map_err(|_| parse_err(ln, "bad tetrahedron count"))?,
            _ => return Err(parse_err(ln, "expected `tets N`")),
        };
        let mut table: Vec<Option<[Gluing; 4]>> = vec![None; n];
        for (ln, line) in lines {
            let (head, body) = line.split_once(':').ok_or_else(|| parse_err(ln, "expected `tet j: ...`"))?;
            let j: usize = head
                .trim()
                .strip_prefix("tet")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| parse_err(ln, "expected `tet j:`"))?;
            if j >= n {
                return Err(parse_err(ln, format!("tetrahedron {j} out of range")));
            }
            if table[j].is_some() {
                return Err(parse_err(ln, format!("tetrahedron {j} listed twice")));
            }
            let mut faces: [Option<Gluing>; 4] = [None; 4];
            for part in body.split(';') {
                let (f, target) = part.split_once("->").ok_or_else(|| parse_err(ln, "expected `fK -> (t, p)`"))?;
                let f: usize = f
                    .trim()
                    .strip_prefix('f')
                    .and_then(|s| s.parse().ok())
                    .filter(|&f: &usize| f < 4)
                    .ok_or_else(|| parse_err(ln, format!("bad face `{}`", f.trim())))?;
                let inner = target
                    .trim()
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| parse_err(ln, "expected `(t, p)`"))?;
                let (t, p) = inner.split_once(',').ok_or_else(|| parse_err(ln, "expected `(t, p)`"))?;
                let t: usize = t.trim().parse().map_err(|_| parse_err(ln, "bad target tetrahedron"))?;
                let digits: Vec<u8> = p.trim().bytes().map(|b| b.wrapping_sub(b'0')).collect();
                if digits.len() != 4 {
                    return Err(parse_err(ln, format!("permutation `{}` must have 4 digits", p.trim())));
                }
                let perm = [digits[0], digits[1], digits[2], digits[3]];
                if !perm_is_valid(&perm) {
                    return Err(parse_err(ln, format!("`{}` is not a permutation of 0123", p.trim())));
                }
                if faces[f].replace(Gluing { tet: t, perm }).is_some() {
                    return Err(parse_err(ln, format!("face f{f} listed twice")));
                }
            }
            let mut row = [Gluing { tet: 0, perm: IDENTITY }; 4];
            for (f, g) in faces.iter().enumerate() {
                row[f] = g.ok_or_else(|| parse_err(ln, format!("face f{f} of tet {j} is unglued")))?;
            }
            table[j] = Some(row);
        }
        let table: Vec<[Gluing; 4]> =
            table.into_iter().enumerate().map(|(j, r)| r.ok_or_else(|| parse_err(0, format!("tetrahedron {j} missing")))).collect::<Result<_, _>>()?;
        CombTriangulation::new(table)
    }

    pub fn serialize(&self) -> String {
        let mut s = format!("tri v1\ntets {}\n", self.n_tets());
        for (j, faces) in self.gluings.iter().enumerate() {
            let parts: Vec<String> = faces.iter().enumerate().map(|(f, g)| format!("f{f} -> ({}, {})", g.tet, perm_string(&g.perm))).collect();
            s.push_str(&format!("tet {j}: {}\n", parts.join(" ; ")));
        }
        s
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn expect_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, header: &str) -> Result<(), TriError> {
    match lines.next() {
        Some((_, l)) if l == header => Ok(()),
        Some((ln, l)) => Err(parse_err(ln, format!("expected header `{header}`, found `{l}`"))),
        None => Err(parse_err(0, format!("empty input, expected `{header}`"))),
    }
}

fn parse_int_row(ln: usize, line: &str, len: usize) -> Result<Vec<i64>, TriError> {
    let row: Vec<i64> = line
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| parse_err(ln, format!("`{w}` is not an integer"))))
        .collect::<Result<_, _>>()?;
    if row.len() != len {
        return Err(parse_err(ln, format!("expected {len} integers, found {}", row.len())));
    }
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuadType {
    Q,
    QPrime,
    QDoublePrime,
}

impl QuadType {
    pub const ALL: [QuadType; 3] = [QuadType::Q, QuadType::QPrime, QuadType::QDoublePrime];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for QuadType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadType::Q => "q",
            QuadType::QPrime => "q'",
            QuadType::QDoublePrime => "q''",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadChoice(pub Vec<QuadType>);

impl QuadChoice {
    pub fn uniform(n: usize, q: QuadType) -> Self {
        QuadChoice(vec![q; n])
    }

    /// The `index`-th choice in lexicographic order (`q < q' < q''`).
    pub fn nth(n: usize, mut index: u64) -> Self {
        let mut v = vec![QuadType::Q; n];
        for slot in v.iter_mut().rev() {
            *slot = QuadType::ALL[(index % 3) as usize];
            index /= 3;
        }
        QuadChoice(v)
    }
}

impl fmt::Display for QuadChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Edge equations with one quad eliminated per tetrahedron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedEquations {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub nu: Vec<i64>,
}

impl ReducedEquations {
    /// Row `i` of `(A|B)`.
    pub fn row(&self, i: usize) -> Vec<i64> {
        self.a[i].iter().chain(&self.b[i]).copied().collect()
    }
}

/// Neumann–Zagier presentation: `abar[i][j]` counts the edges of tetrahedron
/// `j` in class `i` facing quad `q`, likewise `bbar` (`q'`) and `cbar` (`q''`);
/// `cusp[h][i]` counts the ends of edge `i` at cusp `h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GluingData {
    n: usize,
    abar: Vec<Vec<i64>>,
    bbar: Vec<Vec<i64>>,
    cbar: Vec<Vec<i64>>,
    cusp: Vec<Vec<i64>>,
}

impl GluingData {
    pub fn new(abar: Vec<Vec<i64>>, bbar: Vec<Vec<i64>>, cbar: Vec<Vec<i64>>, cusp: Vec<Vec<i64>>) -> Result<Self, TriError> {
        let n = abar.len();
        let bad = |m: &Vec<Vec<i64>>, rows: usize| m.len() != rows || m.iter().any(|r| r.len() != n);
        if n == 0 || bad(&abar, n) || bad(&bbar, n) || bad(&cbar, n) || cusp.is_empty() || bad(&cusp, cusp.len()) {
            return Err(TriError::InvariantViolation("matrix dimensions".into()));
        }
        let g = GluingData { n, abar, bbar, cbar, cusp };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), TriError> {
        let n = self.n;
        let viol = |s: String| Err(TriError::InvariantViolation(s));
        for m in [&self.abar, &self.bbar, &self.cbar] {
            if m.iter().flatten().any(|&x| x < 0) {
                return viol("negative entry in an angle matrix".into());
            }
            for j in 0..n {
                let s: i64 = m.iter().map(|r| r[j]).sum();
                if s != 2 {
                    return viol(format!("column {j} of an angle matrix sums to {s}, expected 2"));
                }
            }
        }
        for j in 0..n {
            let s: i64 = self.cusp.iter().map(|r| r[j]).sum();
            if s != 2 || self.cusp.iter().any(|r| !(0..=2).contains(&r[j])) {
                return viol(format!("column {j} of the cusp matrix must have entries in 0..=2 summing to 2"));
            }
        }
        let red = self.eliminate_quad(&QuadChoice::uniform(n, QuadType::QPrime));
        for (h, crow) in self.cusp.iter().enumerate() {
            let mut acc = vec![0i64; 2 * n];
            for (i, &c) in crow.iter().enumerate() {
                for (a, x) in acc.iter_mut().zip(red.row(i)) {
                    *a += c * x;
                }
            }
            if acc.iter().any(|&x| x != 0) {
                return viol(format!("cusp relation fails for cusp {h}"));
            }
        }
        let rows: Vec<Vec<i64>> = (0..n).map(|i| red.row(i)).collect();
        let rank = intlinalg::rank(&intlinalg::from_i64(&rows));
        if rank + self.r() != n {
            return viol(format!("rank of (A|B) is {rank}, expected {}", n - self.r()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cusps.
    pub fn r(&self) -> usize {
        self.cusp.len()
    }

    pub fn abar(&self) -> &[Vec<i64>] {
        &self.abar
    }

    pub fn bbar(&self) -> &[Vec<i64>] {
        &self.bbar
    }

    pub fn cbar(&self) -> &[Vec<i64>] {
        &self.cbar
    }

    pub fn cusp_incidence(&self) -> &[Vec<i64>] {
        &self.cusp
    }

    /// Angle matrix for quad type `q` (0, 1, 2).
    pub fn quad_matrix(&self, q: usize) -> &[Vec<i64>] {
        match q {
            0 => &self.abar,
            1 => &self.bbar,
            _ => &self.cbar,
        }
    }

    pub fn edge_degrees(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.abar[i].iter().chain(&self.bbar[i]).chain(&self.cbar[i]).sum()).collect()
    }

    /// Eliminates quad `qc[j]` at each tetrahedron. Eliminating `q'` gives
    /// `A = Ā - B̄`, `B = C̄ - B̄`; the other choices rotate along
    /// `q -> q' -> q''`.
    pub fn eliminate_quad(&self, qc: &QuadChoice) -> ReducedEquations {
        let n = self.n;
        let mut a = vec![vec![0; n]; n];
        let mut b = vec![vec![0; n]; n];
        let mut nu = vec![2; n];
        for j in 0..n {
            let (ma, mb, me) = match qc.0[j] {
                QuadType::QPrime => (&self.abar, &self.cbar, &self.bbar),
                QuadType::QDoublePrime => (&self.bbar, &self.abar, &self.cbar),
                QuadType::Q => (&self.cbar, &self.bbar, &self.abar),
            };
            for i in 0..n {
                a[i][j] = ma[i][j] - me[i][j];
                b[i][j] = mb[i][j] - me[i][j];
                nu[i] -= me[i][j];
            }
        }
        ReducedEquations { a, b, nu }
    }

    /// Rows `E_i` of `(A|B)` for the all-`q'` elimination.
    pub fn edge_rows(&self) -> Vec<Vec<i64>> {
        let red = self.eliminate_quad(&QuadChoice::uniform(self.n, QuadType::QPrime));
        (0..self.n).map(|i| red.row(i)).collect()
    }

    /// Permutes tetrahedra (columns) by `sigma` and edges (rows) by `rho`.
    pub fn permuted(&self, sigma: &[usize], rho: &[usize]) -> Self {
        let n = self.n;
        let perm = |m: &Vec<Vec<i64>>| {
            let mut out = vec![vec![0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    out[rho[i]][sigma[j]] = m[i][j];
                }
            }
            out
        };
        let cusp = self
            .cusp
            .iter()
            .map(|r| {
                let mut out = vec![0; n];
                for i in 0..n {
                    out[rho[i]] = r[i];
                }
                out
            })
            .collect();
        GluingData { n, abar: perm(&self.abar), bbar: perm(&self.bbar), cbar: perm(&self.cbar), cusp }
    }

    pub fn parse(text: &str) -> Result<Self, TriError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, "nz v1")?;
        let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "missing `N n cusps r` line"))?;
        let (n, r) = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["N", n, "cusps", r] => (
                n.parse::<usize>().map_err(|_| parse_err(ln, "bad N"))?,
                r.parse::<usize>().map_err(|_| parse_err(ln, "bad cusp count"))?,
            ),
            _ => return Err(parse_err(ln, "expected `N n cusps r`")),
        };
        let mut rows = Vec::with_capacity(3 * n + r);
        let mut last = ln;
        for _ in 0..3 * n + r {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(last, format!("expected {} matrix rows", 3 * n + r)))?;
            rows.push(parse_int_row(ln, line, n)?);
            last = ln;
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing data"));
        }
        let cusp = rows.split_off(3 * n);
        let cbar = rows.split_off(2 * n);
        let bbar = rows.split_off(n);
        GluingData::new(rows, bbar, cbar, cusp).map_err(|e| match e {
            TriError::InvariantViolation(m) => parse_err(last, format!("invariant violation: {m}")),
            other => other,
        })
    }

    pub fn serialize(&self) -> String {
        let mut s = format!("nz v1\nN {} cusps {}\n", self.n, self.r());
        for m in [&self.abar, &self.bbar, &self.cbar, &self.cusp] {
            for row in m {
                let parts: Vec<String> = row.iter().map(ToString::to_string).collect();
                s.push_str(&parts.join(" "));
                s.push('\n');
            }
        }
        s
    }

    /// Derives the matrices from a pairing table.
    pub fn from_triangulation(t: &CombTriangulation) -> Result<Self, TriError> {
        let n = t.n_tets();
        let classes = t.edge_classes()?;
        let mut m = [vec![vec![0i64; n]; n], vec![vec![0i64; n]; n], vec![vec![0i64; n]; n]];
        for (i, class) in classes.iter().enumerate() {
            for inc in &class.incidences {
                m[inc.quad()][i][inc.tet] += 1;
            }
        }
        let cusps = t.cusp_classes();
        let mut cusp_of = vec![0usize; 4 * n];
        for (h, class) in cusps.iter().enumerate() {
            for &(tet, v) in class {
                cusp_of[4 * tet + v as usize] = h;
            }
        }
        let mut cusp = vec![vec![0i64; n]; cusps.len()];
        for (i, class) in classes.iter().enumerate() {
            let inc = class.incidences[0];
            cusp[cusp_of[4 * inc.tet + inc.verts[0] as usize]][i] += 1;
            cusp[cusp_of[4 * inc.tet + inc.verts[1] as usize]][i] += 1;
        }
        for (h, class) in cusps.iter().enumerate() {
            // link: |class| triangles, 3|class|/2 edges, Σ_i c_hi vertices
            let chi = cusp[h].iter().sum::<i64>() - class.len() as i64 / 2;
            if chi != 0 {
                return Err(TriError::InvariantViolation(format!("link of cusp {h} has Euler characteristic {chi}, expected a torus")));
            }
        }
        let [abar, bbar, cbar] = m;
        GluingData::new(abar, bbar, cbar, cusp)
    }
}

/// Turning-number data `(ā_ϖ | b̄_ϖ | c̄_ϖ)` of a peripheral curve.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeripheralVector {
    pub abar: Vec<i64>,
    pub bbar: Vec<i64>,
    pub cbar: Vec<i64>,
}

impl PeripheralVector {
    pub fn zero(n: usize) -> Self {
        PeripheralVector { abar: vec![0; n], bbar: vec![0; n], cbar: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.abar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abar.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.abar.iter().chain(&self.bbar).chain(&self.cbar).all(|&x| x == 0)
    }

    pub fn a(&self) -> Vec<i64> {
        self.abar.iter().zip(&self.bbar).map(|(a, b)| a - b).collect()
    }

    pub fn b(&self) -> Vec<i64> {
        self.cbar.iter().zip(&self.bbar).map(|(c, b)| c - b).collect()
    }

    pub fn nu(&self) -> i64 {
        -self.bbar.iter().sum::<i64>()
    }

    /// Parses a `peri v1` file for a triangulation with `n` tetrahedra.
    pub fn parse(text: &str, n: usize) -> Result<Self, TriError> {
        let mut lines = content_lines(text);
        expect_header(&mut lines, "peri v1")?;
        let mut rows = Vec::new();
        for _ in 0..3 {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "expected three rows"))?;
            rows.push(parse_int_row(ln, line, n)?);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing data"));
        }
        let cbar = rows.pop().unwrap();
        let bbar = rows.pop().unwrap();
        let abar = rows.pop().unwrap();
        Ok(PeripheralVector { abar, bbar, cbar })
    }

    pub fn serialize(&self) -> String {
        let row = |v: &Vec<i64>| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        format!("peri v1\n{}\n{}\n{}\n", row(&self.abar), row(&self.bbar), row(&self.cbar))
    }
}

/// True when `Σ_h c_h E_h = 0` for exactly the rational row space of `C`.
pub fn cusp_relations_are_complete(g: &GluingData) -> bool {
    let rows = intlinalg::from_i64(&g.edge_rows());
    // relations = left kernel of (A|B)
    let transposed: Vec<Vec<BigInt>> = (0..2 * g.n()).map(|c| rows.iter().map(|r| r[c].clone()).collect()).collect();
    let relations = intlinalg::integer_kernel(&transposed, g.n());
    let cusp = intlinalg::from_i64(g.cusp_incidence());
    let cusp_are_relations = cusp.iter().all(|c| intlinalg::mat_vec(&transposed, c).iter().all(Zero::is_zero));
    let mut stacked = cusp.clone();
    stacked.extend(relations);
    cusp_are_relations && intlinalg::rank(&stacked) == intlinalg::rank(&cusp)
}
