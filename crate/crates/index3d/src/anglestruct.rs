//! Angle structures, index structures and normal-surface obstructions.
//!
//! Angles are in units of π. An [`AngleVector`] stores `(Z_1..Z_N, Z'_1..Z'_N,
//! Z''_1..Z''_N)`. A [`NormalClass`] stores seven coordinates per tetrahedron:
//! triangles `t_0..t_3` (the triangle at vertex `v` is `t_v`) then quads
//! `q, q', q''`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::lp::{join_free, rat, split_free, LinearProgram, LpOutcome, Rational};
use crate::triangulation::{quad_of_edge, CombTriangulation, GluingData, QuadChoice, QuadType, TriError};

pub const DEFAULT_CAP: usize = 12;

/// Quad choices decided per parallel batch; results are read in order.
const BATCH: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EfficiencyError {
    #[error("{n} tetrahedra exceeds the quad-choice cap of {cap} (use --force)")]
    CapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    Triangulation(#[from] TriError),
    #[error("triangulation has {tri} tetrahedra but the gluing data has {nz}")]
    SizeMismatch { tri: usize, nz: usize },
    #[error("certificate check failed: {0}")]
    BadCertificate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AngleVector(pub Vec<Rational>);

impl AngleVector {
    pub fn from_i64_ratios(values: &[(i64, i64)]) -> Self {
        AngleVector(values.iter().map(|&(p, q)| Rational::new(BigInt::from(p), BigInt::from(q))).collect())
    }

    pub fn angle(&self, n: usize, q: usize, j: usize) -> &Rational {
        &self.0[q * n + j]
    }
}

impl fmt::Display for AngleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AngleClass {
    NotAStructure,
    Generalised,
    Semi,
    Taut,
    Strict,
}

impl fmt::Display for AngleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleClass::NotAStructure => "not an angle structure",
            AngleClass::Generalised => "generalised",
            AngleClass::Semi => "semi",
            AngleClass::Taut => "taut",
            AngleClass::Strict => "strict",
        })
    }
}

/// Edge sums must be 2 and tetrahedron sums 1. The most specific range class
/// is returned; a taut vector is also semi, a strict one also semi.
pub fn classify_angle_vector(g: &GluingData, v: &AngleVector) -> AngleClass {
    let n = g.n();
    if v.0.len() != 3 * n {
        return AngleClass::NotAStructure;
    }
    let two = rat(2);
    for i in 0..n {
        let s: Rational = (0..3).flat_map(|q| (0..n).map(move |j| (q, j))).map(|(q, j)| rat(g.quad_matrix(q)[i][j]) * v.angle(n, q, j)).sum();
        if s != two {
            return AngleClass::NotAStructure;
        }
    }
    for j in 0..n {
        let s: Rational = (0..3).map(|q| v.angle(n, q, j).clone()).sum();
        if !s.is_one() {
            return AngleClass::NotAStructure;
        }
    }
    let one = Rational::one();
    if v.0.iter().all(|x| x.is_zero() || x.is_one()) {
        AngleClass::Taut
    } else if v.0.iter().all(|x| x.is_positive() && *x < one) {
        AngleClass::Strict
    } else if v.0.iter().all(|x| !x.is_negative() && *x <= one) {
        AngleClass::Semi
    } else {
        AngleClass::Generalised
    }
}

/// Normal coordinates, seven per tetrahedron.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalClass {
    pub coords: Vec<Rational>,
}

pub fn triangle_slot(tet: usize, v: u8) -> usize {
    7 * tet + v as usize
}

pub fn quad_slot(tet: usize, q: usize) -> usize {
    7 * tet + 4 + q
}

impl NormalClass {
    pub fn zero(n: usize) -> Self {
        NormalClass { coords: vec![Rational::zero(); 7 * n] }
    }

    pub fn n_tets(&self) -> usize {
        self.coords.len() / 7
    }

    pub fn triangle(&self, tet: usize, v: u8) -> &Rational {
        &self.coords[triangle_slot(tet, v)]
    }

    pub fn quad(&self, tet: usize, q: usize) -> &Rational {
        &self.coords[quad_slot(tet, q)]
    }

    pub fn add_scaled(&mut self, k: &Rational, other: &NormalClass) {
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            if !b.is_zero() {
                *a += k * b;
            }
        }
    }

    pub fn is_matched(&self, t: &CombTriangulation) -> bool {
        matching_equations(t).iter().all(|row| row.iter().zip(&self.coords).map(|(&a, x)| rat(a) * x).sum::<Rational>().is_zero())
    }

    /// Nonnegative with at most one nonzero quad per tetrahedron.
    pub fn is_admissible(&self) -> bool {
        self.coords.iter().all(|x| !x.is_negative()) && (0..self.n_tets()).all(|t| (0..3).filter(|&q| !self.quad(t, q).is_zero()).count() <= 1)
    }

    pub fn quad_support(&self) -> Vec<(usize, usize)> {
        (0..self.n_tets()).flat_map(|t| (0..3).map(move |q| (t, q))).filter(|&(t, q)| !self.quad(t, q).is_zero()).collect()
    }
}

impl fmt::Display for NormalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, block) in self.coords.chunks(7).enumerate() {
            let parts: Vec<String> = block.iter().map(ToString::to_string).collect();
            if t > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// One equation per (interior face, corner): the arcs cutting off a corner of
/// a face agree on both sides.
pub fn matching_equations(t: &CombTriangulation) -> Vec<Vec<i64>> {
    let n = t.n_tets();
    let mut rows = Vec::new();
    for tet in 0..n {
        for f in 0..4u8 {
            let g = t.gluing(tet, f as usize);
            let pf = g.perm[f as usize];
            if (g.tet, pf) < (tet, f) {
                continue;
            }
            for v in (0..4u8).filter(|&v| v != f) {
                let pv = g.perm[v as usize];
                let mut row = vec![0i64; 7 * n];
                row[triangle_slot(tet, v)] += 1;
                row[quad_slot(tet, quad_of_edge(v, f))] += 1;
                row[triangle_slot(g.tet, pv)] -= 1;
                row[quad_slot(g.tet, quad_of_edge(pv, pf))] -= 1;
                rows.push(row);
            }
        }
    }
    rows
}

/// Edge elements in edge-class order, then tetrahedron elements.
pub fn kang_rubinstein_basis(t: &CombTriangulation) -> Result<Vec<NormalClass>, TriError> {
    let n = t.n_tets();
    let mut out = Vec::with_capacity(2 * n);
    for class in t.edge_classes()? {
        let mut c = NormalClass::zero(n);
        for inc in &class.incidences {
            let [i, j, _, _] = inc.verts;
            c.coords[quad_slot(inc.tet, inc.quad())] -= Rational::one();
            c.coords[triangle_slot(inc.tet, i)] += Rational::one();
            c.coords[triangle_slot(inc.tet, j)] += Rational::one();
        }
        out.push(c);
    }
    for tet in 0..n {
        let mut c = NormalClass::zero(n);
        for v in 0..4 {
            c.coords[triangle_slot(tet, v)] = Rational::one();
        }
        for q in 0..3 {
            c.coords[quad_slot(tet, q)] = -Rational::one();
        }
        out.push(c);
    }
    Ok(out)
}

/// The link of cusp `h`: one triangle at every ideal vertex of the cusp.
pub fn vertex_link(t: &CombTriangulation, h: usize) -> NormalClass {
    let mut c = NormalClass::zero(t.n_tets());
    for &(tet, v) in &t.cusp_classes()[h] {
        c.coords[triangle_slot(tet, v)] = Rational::one();
    }
    c
}

/// Vertices minus edges plus discs, counted in the triangulation.
pub fn generalized_euler_characteristic(t: &CombTriangulation, cls: &NormalClass) -> Result<Rational, TriError> {
    let mut v = Rational::zero();
    for class in t.edge_classes()? {
        let inc = class.incidences[0];
        let [i, j, _, _] = inc.verts;
        v += cls.triangle(inc.tet, i) + cls.triangle(inc.tet, j);
        for q in (0..3).filter(|&q| q != inc.quad()) {
            v += cls.quad(inc.tet, q);
        }
    }
    let (mut tri, mut quad) = (Rational::zero(), Rational::zero());
    for tet in 0..cls.n_tets() {
        for x in 0..4u8 {
            tri += cls.triangle(tet, x);
        }
        for q in 0..3 {
            quad += cls.quad(tet, q);
        }
    }
    let e = (rat(3) * &tri + rat(4) * &quad) / rat(2);
    Ok(v - e + tri + quad)
}

/// Dual variables of an infeasible quad-choice system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FarkasCertificate {
    /// One per edge.
    pub z: Vec<Rational>,
    /// One per tetrahedron.
    pub w: Vec<Rational>,
}

impl FarkasCertificate {
    /// `y · b` for the right-hand side `(2, …, 2 | 1, …, 1)`.
    pub fn dual_value(&self) -> Rational {
        rat(2) * self.z.iter().sum::<Rational>() + self.w.iter().sum::<Rational>()
    }

    /// `w_j + Σ_i z_i M^q_ij`, the dual slack of angle `q` at tetrahedron `j`.
    pub fn column(&self, g: &GluingData, q: usize, j: usize) -> Rational {
        let m = g.quad_matrix(q);
        (0..g.n()).map(|i| rat(m[i][j]) * &self.z[i]).sum::<Rational>() + &self.w[j]
    }

    /// Checks the dual system for `choice`: zero on unrestricted angles,
    /// nonpositive on restricted ones with at least one negative, `y·b ≥ 0`.
    pub fn certifies(&self, g: &GluingData, choice: &QuadChoice) -> bool {
        let n = g.n();
        let mut strict = false;
        for j in 0..n {
            for q in 0..3 {
                let c = self.column(g, q, j);
                if q == choice.0[j].index() {
                    if c.is_positive() {
                        return false;
                    }
                    strict |= c.is_negative();
                } else if !c.is_zero() {
                    return false;
                }
            }
        }
        strict && !self.dual_value().is_negative()
    }

    /// `Σ_i z_i E_i + Σ_j w_j T_j` in the Kang–Rubinstein basis.
    pub fn normal_class(&self, basis: &[NormalClass]) -> NormalClass {
        let n = self.z.len();
        let mut c = NormalClass::zero(n);
        for (k, b) in self.z.iter().chain(&self.w).zip(basis) {
            c.add_scaled(k, b);
        }
        c
    }

    fn scale(&mut self, k: &Rational) {
        for x in self.z.iter_mut().chain(self.w.iter_mut()) {
            *x *= k;
        }
    }
}

impl fmt::Display for FarkasCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z: Vec<String> = self.z.iter().map(ToString::to_string).collect();
        let w: Vec<String> = self.w.iter().map(ToString::to_string).collect();
        write!(f, "z {}\nw {}", z.join(" "), w.join(" "))
    }
}

/// An infeasible quad choice with its dual certificate and, when the
/// triangulation is known, the obstruction surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub choice: QuadChoice,
    pub certificate: FarkasCertificate,
    pub chi: Rational,
    pub surface: Option<ObstructionSurface>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionSurface {
    pub class: NormalClass,
    /// Copies of each vertex link added to clear negative triangles.
    pub link_multiples: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChoiceStatus {
    Feasible(AngleVector),
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficiencyReport {
    pub n_choices: u64,
    /// Decided choices in lexicographic order.
    pub statuses: Vec<(QuadChoice, ChoiceStatus)>,
    pub obstructions: Vec<Obstruction>,
}

impl EfficiencyReport {
    pub fn has_index_structure(&self) -> bool {
        self.obstructions.is_empty()
    }

    pub fn n_feasible(&self) -> usize {
        self.statuses.iter().filter(|(_, s)| matches!(s, ChoiceStatus::Feasible(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficiencyOptions {
    pub cap: usize,
    pub force: bool,
    pub all_certificates: bool,
    /// Decide one choice per orbit of identical-column tetrahedra.
    pub symmetry: bool,
}

impl Default for EfficiencyOptions {
    fn default() -> Self {
        EfficiencyOptions { cap: DEFAULT_CAP, force: false, all_certificates: false, symmetry: false }
    }
}

/// Maximises the minimum restricted angle; a witness exists iff it is positive.
pub fn strict_witness(g: &GluingData, choice: &QuadChoice) -> Option<AngleVector> {
    let n = g.n();
    // columns: 3N angles and t (all free), then N restricted slacks, then u
    let free_cols = 3 * n + 1;
    let width = 2 * free_cols + n + 1;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let blank = || vec![Rational::zero(); free_cols];
    let push = |rows: &mut Vec<Vec<Rational>>, free: Vec<Rational>, slack: Option<usize>| {
        let mut r = split_free(&[free]).pop().unwrap();
        r.resize(width, Rational::zero());
        if let Some(k) = slack {
            r[2 * free_cols + k] = -Rational::one();
        }
        rows.push(r);
    };
    for i in 0..n {
        let mut r = blank();
        for q in 0..3 {
            for j in 0..n {
                r[q * n + j] = rat(g.quad_matrix(q)[i][j]);
            }
        }
        push(&mut rows, r, None);
        rhs.push(rat(2));
    }
    for j in 0..n {
        let mut r = blank();
        for q in 0..3 {
            r[q * n + j] = Rational::one();
        }
        push(&mut rows, r, None);
        rhs.push(Rational::one());
    }
    for j in 0..n {
        let mut r = blank();
        r[choice.0[j].index() * n + j] = Rational::one();
        r[3 * n] = -Rational::one();
        push(&mut rows, r, Some(j));
        rhs.push(Rational::zero());
    }
    let mut r = blank();
    r[3 * n] = Rational::one();
    push(&mut rows, r, None);
    rows.last_mut().unwrap()[width - 1] = Rational::one();
    rhs.push(Rational::one());

    let mut cost = vec![Rational::zero(); width];
    cost[2 * 3 * n] = -Rational::one();
    cost[2 * 3 * n + 1] = Rational::one();
    match LinearProgram::new(rows, rhs, cost).solve() {
        LpOutcome::Optimal { x, value } if value.is_negative() => Some(AngleVector(join_free(&x[..6 * n]))),
        _ => None,
    }
}

/// Searches for dual variables certifying that `choice` is infeasible,
/// preferring certificates with a single nonzero restricted slack.
pub fn farkas_certificate(g: &GluingData, choice: &QuadChoice) -> Option<FarkasCertificate> {
    let n = g.n();
    for only in (0..n).map(Some).chain([None]) {
        if let Some(c) = certificate_lp(g, choice, only) {
            return Some(c);
        }
    }
    None
}

fn certificate_lp(g: &GluingData, choice: &QuadChoice, only: Option<usize>) -> Option<FarkasCertificate> {
    let n = g.n();
    // columns: y = (z, w) free, then N restricted slacks, then σ
    let free_cols = 2 * n;
    let width = 2 * free_cols + n + 1;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let column = |q: usize, j: usize| {
        let mut r = vec![Rational::zero(); free_cols];
        for i in 0..n {
            r[i] = rat(g.quad_matrix(q)[i][j]);
        }
        r[n + j] = Rational::one();
        r
    };
    let extend = |free: Vec<Rational>| {
        let mut r = split_free(&[free]).pop().unwrap();
        r.resize(width, Rational::zero());
        r
    };
    for j in 0..n {
        for q in 0..3 {
            let mut r = extend(column(q, j));
            if q == choice.0[j].index() && only.is_none_or(|k| k == j) {
                r[2 * free_cols + j] = Rational::one();
            }
            rows.push(r);
            rhs.push(Rational::zero());
        }
    }
    let mut b = vec![rat(2); n];
    b.extend(vec![Rational::one(); n]);
    let mut r = extend(b);
    r[width - 1] = -Rational::one();
    rows.push(r);
    rhs.push(Rational::zero());
    let mut r = vec![Rational::zero(); width];
    for j in (0..n).filter(|&j| only.is_none_or(|k| k == j)) {
        r[2 * free_cols + j] = Rational::one();
    }
    rows.push(r);
    rhs.push(Rational::one());

    // smallest total |y| keeps certificates sparse
    let mut cost = vec![Rational::one(); 2 * free_cols];
    cost.resize(width, Rational::zero());
    let LpOutcome::Optimal { x, .. } = LinearProgram::new(rows, rhs, cost).solve() else {
        return None;
    };
    let y = join_free(&x[..2 * free_cols]);
    let mut cert = FarkasCertificate { z: y[..n].to_vec(), w: y[n..].to_vec() };
    // primitive integer scaling
    let den = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let num = y.iter().fold(BigInt::zero(), |acc, v| acc.gcd(&(v.numer() * &den / v.denom())));
    cert.scale(&Rational::new(den, num));
    Some(cert)
}

/// Builds and checks the obstruction surface of a certificate.
pub fn obstruction_surface(t: &CombTriangulation, g: &GluingData, choice: &QuadChoice, cert: &FarkasCertificate) -> Result<ObstructionSurface, EfficiencyError> {
    let n = g.n();
    let basis = kang_rubinstein_basis(t)?;
    let mut class = cert.normal_class(&basis);
    for j in 0..n {
        for q in 0..3 {
            if *class.quad(j, q) != -cert.column(g, q, j) {
                return Err(EfficiencyError::BadCertificate(format!("quad {q} of tet {j} disagrees with the dual")));
            }
            if q != choice.0[j].index() && !class.quad(j, q).is_zero() {
                return Err(EfficiencyError::BadCertificate(format!("quad {q} of tet {j} lies outside the choice")));
            }
        }
    }
    let mut link_multiples = Vec::new();
    for (h, cusp) in t.cusp_classes().iter().enumerate() {
        let worst = cusp.iter().map(|&(tet, v)| class.triangle(tet, v).clone()).min().unwrap_or_else(Rational::zero);
        let k = if worst.is_negative() { (-worst).ceil().to_integer() } else { BigInt::zero() };
        if !k.is_zero() {
            class.add_scaled(&Rational::from_integer(k.clone()), &vertex_link(t, h));
        }
        link_multiples.push(k);
    }
    if !class.is_matched(t) {
        return Err(EfficiencyError::BadCertificate("obstruction class is not matched".into()));
    }
    if !class.is_admissible() {
        return Err(EfficiencyError::BadCertificate("obstruction class is not admissible".into()));
    }
    Ok(ObstructionSurface { class, link_multiples })
}

/// Representative of `choice` under swapping tetrahedra with identical
/// columns; it is the lexicographic minimum of its orbit.
fn canonical_choice(groups: &[Vec<usize>], choice: &QuadChoice) -> QuadChoice {
    let mut out = choice.clone();
    for grp in groups {
        let mut vals: Vec<QuadType> = grp.iter().map(|&j| choice.0[j]).collect();
        vals.sort();
        for (&j, v) in grp.iter().zip(vals) {
            out.0[j] = v;
        }
    }
    out
}

fn column_groups(g: &GluingData) -> Vec<Vec<usize>> {
    let n = g.n();
    let key = |j: usize| -> Vec<i64> { (0..3).flat_map(|q| (0..n).map(move |i| (q, i))).map(|(q, i)| g.quad_matrix(q)[i][j]).collect() };
    let mut groups: Vec<(Vec<i64>, Vec<usize>)> = Vec::new();
    for j in 0..n {
        let k = key(j);
        match groups.iter_mut().find(|(kk, _)| *kk == k) {
            Some((_, v)) => v.push(j),
            None => groups.push((k, vec![j])),
        }
    }
    groups.into_iter().map(|(_, v)| v).filter(|v| v.len() > 1).collect()
}

/// Decides whether every quad choice admits a generalised angle structure
/// strictly positive on its quads. The triangulation, when given, must be
/// the one `g` was derived from; it enables the obstruction surface.
pub fn has_index_structure(g: &GluingData, t: Option<&CombTriangulation>, opts: &EfficiencyOptions) -> Result<EfficiencyReport, EfficiencyError> {
    let n = g.n();
    if n > opts.cap && !opts.force {
        return Err(EfficiencyError::CapExceeded { n, cap: opts.cap });
    }
    if let Some(t) = t {
        if t.n_tets() != n {
            return Err(EfficiencyError::SizeMismatch { tri: t.n_tets(), nz: n });
        }
    }
    let total = 3u64.pow(n as u32);
    let groups = if opts.symmetry { column_groups(g) } else { Vec::new() };
    let mut decided: HashMap<QuadChoice, Option<AngleVector>> = HashMap::new();
    let mut report = EfficiencyReport { n_choices: total, statuses: Vec::new(), obstructions: Vec::new() };
    let mut start = 0;
    while start < total {
        let end = (start + BATCH).min(total);
        let choices: Vec<QuadChoice> = (start..end).map(|i| QuadChoice::nth(n, i)).collect();
        let fresh: Vec<&QuadChoice> = choices.iter().filter(|c| canonical_choice(&groups, c) == **c).collect();
        let solved: Vec<Option<AngleVector>> = fresh.par_iter().map(|c| strict_witness(g, c)).collect();
        for (c, s) in fresh.into_iter().zip(solved) {
            decided.insert(c.clone(), s);
        }
        let mut stop = false;
        for c in choices {
            let rep = canonical_choice(&groups, &c);
            let witness = decided[&rep].clone();
            match witness {
                Some(w) => {
                    let w = if rep == c { w } else { permute_witness(n, &groups, &rep, &c, &w) };
                    report.statuses.push((c, ChoiceStatus::Feasible(w)));
                }
                None => {
                    let certificate = farkas_certificate(g, &c).ok_or_else(|| EfficiencyError::BadCertificate(format!("no dual found for {c}")))?;
                    if !certificate.certifies(g, &c) {
                        return Err(EfficiencyError::BadCertificate(format!("dual for {c} fails the dual system")));
                    }
                    let chi = certificate.dual_value();
                    let surface = t.map(|t| obstruction_surface(t, g, &c, &certificate)).transpose()?;
                    report.statuses.push((c.clone(), ChoiceStatus::Infeasible));
                    report.obstructions.push(Obstruction { choice: c, certificate, chi, surface });
                    if !opts.all_certificates {
                        stop = true;
                        break;
                    }
                }
            }
        }
        if stop {
            break;
        }
        start = end;
    }
    Ok(report)
}

/// Moves a witness for `rep` onto `target` by permuting tetrahedra inside each
/// identical-column group.
fn permute_witness(n: usize, groups: &[Vec<usize>], rep: &QuadChoice, target: &QuadChoice, w: &AngleVector) -> AngleVector {
    let mut sigma: Vec<usize> = (0..n).collect();
    for grp in groups {
        let mut used = vec![false; grp.len()];
        for &j in grp {
            let k = grp.iter().enumerate().position(|(idx, &k)| !used[idx] && rep.0[k] == target.0[j]).expect("same multiset");
            used[k] = true;
            sigma[j] = grp[k];
        }
    }
    let mut out = w.0.clone();
    for q in 0..3 {
        for j in 0..n {
            out[q * n + j] = w.0[q * n + sigma[j]].clone();
        }
    }
    AngleVector(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(text: &str) -> (CombTriangulation, GluingData) {
        let t = CombTriangulation::parse(text).unwrap();
        let g = GluingData::from_triangulation(&t).unwrap();
        (t, g)
    }

    const TREFOIL: &str = "tri v1\ntets 2\n\
        tet 0: f0 -> (1, 0132) ; f1 -> (1, 2103) ; f2 -> (1, 1023) ; f3 -> (1, 1023)\n\
        tet 1: f0 -> (0, 0132) ; f1 -> (0, 2103) ; f2 -> (0, 1023) ; f3 -> (0, 1023)\n";

    const M004: &str = "tri v1\ntets 2\n\
        tet 0: f0 -> (1, 0132) ; f1 -> (1, 1302) ; f2 -> (1, 1023) ; f3 -> (1, 2031)\n\
        tet 1: f0 -> (0, 0132) ; f1 -> (0, 1302) ; f2 -> (0, 1023) ; f3 -> (0, 2031)\n";

    const DEG1: &str = "tri v1\ntets 4\n\
        tet 0: f0 -> (1, 1023) ; f1 -> (1, 1023) ; f2 -> (0, 0132) ; f3 -> (0, 0132)\n\
        tet 1: f0 -> (0, 1023) ; f1 -> (0, 1023) ; f2 -> (2, 2031) ; f3 -> (3, 1230)\n\
        tet 2: f0 -> (3, 3120) ; f1 -> (3, 3201) ; f2 -> (3, 3012) ; f3 -> (1, 1302)\n\
        tet 3: f0 -> (1, 3012) ; f1 -> (2, 1230) ; f2 -> (2, 2310) ; f3 -> (2, 3120)\n";

    fn trefoil_family(x: (i64, i64)) -> AngleVector {
        AngleVector::from_i64_ratios(&[(1, 1), (1, 1), x, x, (-x.0, x.1), (-x.0, x.1)])
    }

    #[test]
    fn trefoil_classification() {
        let (_, g) = tri(TREFOIL);
        assert_eq!(classify_angle_vector(&g, &trefoil_family((0, 1))), AngleClass::Taut);
        assert_eq!(classify_angle_vector(&g, &trefoil_family((1, 2))), AngleClass::Generalised);
        let bad = AngleVector::from_i64_ratios(&[(1, 1), (1, 2), (0, 1), (0, 1), (0, 1), (0, 1)]);
        assert_eq!(classify_angle_vector(&g, &bad), AngleClass::NotAStructure);
    }

    #[test]
    fn figure_eight_thirds_are_strict() {
        let (_, g) = tri(M004);
        let v = AngleVector(vec![Rational::new(BigInt::from(1), BigInt::from(3)); 6]);
        assert_eq!(classify_angle_vector(&g, &v), AngleClass::Strict);
    }

    #[test]
    fn trefoil_has_index_structure() {
        let (t, g) = tri(TREFOIL);
        let r = has_index_structure(&g, Some(&t), &EfficiencyOptions::default()).unwrap();
        assert!(r.has_index_structure());
        assert_eq!(r.n_feasible(), 9);
        for (c, s) in &r.statuses {
            let ChoiceStatus::Feasible(w) = s else { panic!("{c}") };
            assert!(classify_angle_vector(&g, w) >= AngleClass::Generalised);
            for j in 0..2 {
                assert!(w.angle(2, c.0[j].index(), j).is_positive());
            }
        }
    }

    #[test]
    fn degree_one_edge_is_obstructed() {
        let (t, g) = tri(DEG1);
        let r = has_index_structure(&g, Some(&t), &EfficiencyOptions::default()).unwrap();
        assert!(!r.has_index_structure());
        let ob = &r.obstructions[0];
        assert!(ob.certificate.certifies(&g, &ob.choice));
        assert!(!ob.chi.is_negative());
        let s = ob.surface.as_ref().unwrap();
        assert!(s.class.is_matched(&t));
        assert!(s.class.is_admissible());
        let support = s.class.quad_support();
        assert_eq!(support.len(), 1);
        let (tet, q) = support[0];
        assert_eq!(ob.choice.0[tet].index(), q);
        assert_eq!(generalized_euler_characteristic(&t, &s.class).unwrap(), ob.chi);
    }

    #[test]
    fn basis_elements_are_matched() {
        for text in [TREFOIL, M004, DEG1] {
            let (t, _) = tri(text);
            let basis = kang_rubinstein_basis(&t).unwrap();
            assert_eq!(basis.len(), 2 * t.n_tets());
            for b in &basis {
                assert!(b.is_matched(&t));
            }
            let n = t.n_tets();
            let tet = &basis[n];
            let ones: Vec<Rational> = [1, 1, 1, 1, -1, -1, -1].iter().map(|&x| rat(x)).collect();
            assert_eq!(tet.coords[..7], ones[..]);
            // edge elements: χ* 2, tet elements: χ* 1
            for (k, b) in basis.iter().enumerate() {
                let want = if k < n { 2 } else { 1 };
                assert_eq!(generalized_euler_characteristic(&t, b).unwrap(), rat(want));
            }
        }
    }

    #[test]
    fn edge_element_quads_follow_matrices() {
        let (t, g) = tri(M004);
        let basis = kang_rubinstein_basis(&t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for q in 0..3 {
                    assert_eq!(*basis[i].quad(j, q), rat(-g.quad_matrix(q)[i][j]));
                }
            }
        }
    }

    #[test]
    fn vertex_links() {
        for text in [TREFOIL, M004, DEG1] {
            let (t, _) = tri(text);
            let mut sum = NormalClass::zero(t.n_tets());
            for h in 0..t.cusp_classes().len() {
                let l = vertex_link(&t, h);
                assert_eq!(generalized_euler_characteristic(&t, &l).unwrap(), rat(0));
                sum.add_scaled(&Rational::one(), &l);
            }
            assert!(sum.is_matched(&t));
            assert!(sum.is_admissible());
            assert!(sum.quad_support().is_empty());
        }
    }

    #[test]
    fn dual_value_is_linear() {
        let c = FarkasCertificate { z: vec![rat(1), rat(-2)], w: vec![rat(3), rat(0)] };
        let mut d = c.clone();
        d.scale(&rat(2));
        assert_eq!(d.dual_value(), rat(2) * c.dual_value());
        assert_eq!(FarkasCertificate { z: vec![rat(0); 2], w: vec![rat(0); 2] }.dual_value(), rat(0));
    }

    #[test]
    fn symmetry_reduction_agrees() {
        for text in [TREFOIL, M004, DEG1] {
            let (_, g) = tri(text);
            let full = has_index_structure(&g, None, &EfficiencyOptions { all_certificates: true, ..Default::default() }).unwrap();
            let sym = has_index_structure(&g, None, &EfficiencyOptions { all_certificates: true, symmetry: true, ..Default::default() }).unwrap();
            let kinds = |r: &EfficiencyReport| r.statuses.iter().map(|(c, s)| (c.clone(), matches!(s, ChoiceStatus::Feasible(_)))).collect::<Vec<_>>();
            assert_eq!(kinds(&full), kinds(&sym));
            for (c, s) in &sym.statuses {
                if let ChoiceStatus::Feasible(w) = s {
                    assert_ne!(classify_angle_vector(&g, w), AngleClass::NotAStructure, "{c}");
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let (_, g) = tri(DEG1);
        let opts = EfficiencyOptions { cap: 3, ..Default::default() };
        assert_eq!(has_index_structure(&g, None, &opts), Err(EfficiencyError::CapExceeded { n: 4, cap: 3 }));
        assert!(has_index_structure(&g, None, &EfficiencyOptions { force: true, ..opts }).is_ok());
    }

    #[test]
    fn relabelling_preserves_verdicts() {
        let (t, g) = tri(DEG1);
        let sigma = [2, 0, 3, 1];
        let t2 = t.relabel_tets(&sigma).unwrap();
        let g2 = GluingData::from_triangulation(&t2).unwrap();
        let opts = EfficiencyOptions { all_certificates: true, ..Default::default() };
        let a = has_index_structure(&g, None, &opts).unwrap();
        let b = has_index_structure(&g2, Some(&t2), &opts).unwrap();
        let count = |r: &EfficiencyReport| r.obstructions.len();
        assert_eq!(count(&a), count(&b));
        for (c, s) in &a.statuses {
            let mut moved = vec![QuadType::Q; 4];
            for j in 0..4 {
                moved[sigma[j]] = c.0[j];
            }
            let other = b.statuses.iter().find(|(d, _)| d.0 == moved).unwrap();
            assert_eq!(matches!(s, ChoiceStatus::Feasible(_)), matches!(other.1, ChoiceStatus::Feasible(_)));
        }
    }
}
