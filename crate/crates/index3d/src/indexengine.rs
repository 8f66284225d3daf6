//! The index of a triangulation as a lattice sum of products of `J_Δ`.
//!
//! A summand is indexed by `t ∈ Z^d` through `k = offset + Σ_l t_l v_l ∈ Z^N`
//! and equals `q^{Σ_i k_i} Π_j J_Δ(ā_j(k), b̄_j(k), c̄_j(k))`. For a basic-edge
//! selection the `v_l` are the coordinate vectors of the basic edges and the
//! offset is zero. All orders and degrees are in half-units.

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::edgebasis::{self, BasisCheck, BasisError, BasisSelection};
use crate::qlaurent::TruncatedSeries;
use crate::tetindex::{j_degree, TetIndexCache};
use crate::triangulation::{GluingData, PeripheralVector};

/// Extra empty shells scanned after the last shell meeting the sublevel set.
pub const DEFAULT_MARGIN: i64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("summation did not close within guard radius {radius}; the triangulation may not be 1-efficient (run `efficiency`)")]
    Divergent { radius: i64 },
    #[error("invalid basis: {0}")]
    Basis(#[from] BasisError),
    #[error("basic edges span a sublattice of index {0}")]
    Sublattice(BigInt),
    #[error("summation lattice is not a complete set of coset representatives")]
    NotComplement,
    #[error("peripheral vector has length {got}, expected {expected}")]
    PeripheralLength { expected: usize, got: usize },
    #[error("negative order")]
    NegativeOrder,
}

/// Affine map `t ↦ offset + Σ_l t_l directions[l]` into `Z^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parametrization {
    pub offset: Vec<i64>,
    pub directions: Vec<Vec<i64>>,
}

impl Parametrization {
    pub fn basic_edges(n: usize, basic: &[usize]) -> Self {
        let directions = basic.iter().map(|&e| (0..n).map(|i| i64::from(i == e)).collect()).collect();
        Parametrization { offset: vec![0; n], directions }
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }
}

/// Affine form `base + Σ_l lin[l] t_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Affine {
    base: i64,
    lin: Vec<i64>,
}

impl Affine {
    fn at(&self, t: &[i64]) -> i64 {
        self.base + self.lin.iter().zip(t).map(|(a, b)| a * b).sum::<i64>()
    }
}

#[derive(Debug, Clone)]
pub struct IndexJob {
    order: i64,
    guard_radius: i64,
    margin: i64,
    dim: usize,
    sum: Affine,
    /// `(ā_j, b̄_j, c̄_j)` per tetrahedron.
    args: Vec<[Affine; 3]>,
}

impl IndexJob {
    /// Sums over the basic edges of `basis`, which must span the edge lattice.
    pub fn new(g: &GluingData, basis: &BasisSelection, peripheral: &PeripheralVector, order: i64) -> Result<Self, IndexError> {
        match edgebasis::validate_basis(g, basis)? {
            BasisCheck::Valid => {}
            BasisCheck::SublatticeIndex(k) => return Err(IndexError::Sublattice(k)),
        }
        Self::build(g, &Parametrization::basic_edges(g.n(), &basis.basic), peripheral, order)
    }

    /// Sums over an arbitrary complete set of coset representatives of
    /// `Z^N` modulo the saturated cusp lattice.
    pub fn with_parametrization(g: &GluingData, param: &Parametrization, peripheral: &PeripheralVector, order: i64) -> Result<Self, IndexError> {
        let dirs = crate::intlinalg::from_i64(&param.directions);
        if param.dim() + g.r() != g.n() || param.offset.len() != g.n() || !edgebasis::spans_complement(g, &dirs) {
            return Err(IndexError::NotComplement);
        }
        Self::build(g, param, peripheral, order)
    }

    /// No validation of the lattice; used by tests that probe invalid choices.
    pub fn unchecked(g: &GluingData, param: &Parametrization, peripheral: &PeripheralVector, order: i64) -> Result<Self, IndexError> {
        Self::build(g, param, peripheral, order)
    }

    fn build(g: &GluingData, param: &Parametrization, peripheral: &PeripheralVector, order: i64) -> Result<Self, IndexError> {
        let n = g.n();
        if peripheral.len() != n {
            return Err(IndexError::PeripheralLength { expected: n, got: peripheral.len() });
        }
        if order < 0 {
            return Err(IndexError::NegativeOrder);
        }
        let dot = |k: &[i64], m: &[Vec<i64>], j: usize| -> i64 { (0..n).map(|i| k[i] * m[i][j]).sum() };
        let pv = [&peripheral.abar, &peripheral.bbar, &peripheral.cbar];
        let args = (0..n)
            .map(|j| {
                let mk = |q: usize| {
                    let m = g.quad_matrix(q);
                    Affine { base: dot(&param.offset, m, j) + pv[q][j], lin: param.directions.iter().map(|v| dot(v, m, j)).collect() }
                };
                [mk(0), mk(1), mk(2)]
            })
            .collect();
        let sum = Affine { base: param.offset.iter().sum(), lin: param.directions.iter().map(|v| v.iter().sum()).collect() };
        Ok(IndexJob { order, guard_radius: 16 * (order / 2 + 1), margin: DEFAULT_MARGIN, dim: param.dim(), sum, args })
    }

    pub fn with_guard_radius(mut self, radius: i64) -> Self {
        self.guard_radius = radius;
        self
    }

    pub fn with_margin(mut self, margin: i64) -> Self {
        self.margin = margin;
        self
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `J_Δ` arguments of every tetrahedron at `t`.
    pub fn arguments(&self, t: &[i64]) -> Vec<(i64, i64, i64)> {
        self.args.iter().map(|[a, b, c]| (a.at(t), b.at(t), c.at(t))).collect()
    }

    /// Lower bound on the minimum exponent of the summand at `t`.
    pub fn summand_degree(&self, t: &[i64]) -> i64 {
        2 * self.sum.at(t) + self.arguments(t).iter().map(|&(a, b, c)| j_degree(a, b, c)).sum::<i64>()
    }

    /// The summand at `t`, exact through the job's order.
    pub fn summand(&self, cache: &TetIndexCache, t: &[i64]) -> TruncatedSeries {
        let shift = 2 * self.sum.at(t);
        let rel = self.order - shift;
        let args = self.arguments(t);
        let degs: Vec<i64> = args.iter().map(|&(a, b, c)| j_degree(a, b, c)).collect();
        let total: i64 = degs.iter().sum();
        if total > rel || args.is_empty() {
            let base = if args.is_empty() && rel >= 0 { TruncatedSeries::one(rel) } else { TruncatedSeries::zero(rel) };
            return base.shift(shift);
        }
        // each factor is needed to rel minus the degrees of the others
        let mut acc: Option<TruncatedSeries> = None;
        let mut later: i64 = total;
        for (j, &(a, b, c)) in args.iter().enumerate() {
            let f = cache.get_j(a, b, c, rel - (total - degs[j]));
            later -= degs[j];
            acc = Some(match acc {
                None => f,
                Some(p) => p.mul_to(&f, rel - later),
            });
        }
        acc.unwrap().truncate(rel).shift(shift)
    }

    /// Points of the L∞ shell of radius `r` in `Z^dim`, in lexicographic order.
    fn shell(&self, r: i64) -> Vec<Vec<i64>> {
        let d = self.dim;
        if r == 0 {
            return vec![vec![0; d]];
        }
        let mut out = Vec::new();
        let mut cur = vec![0i64; d];
        fn rec(i: usize, r: i64, hit: bool, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if i == cur.len() {
                if hit {
                    out.push(cur.clone());
                }
                return;
            }
            for x in -r..=r {
                cur[i] = x;
                rec(i + 1, r, hit || x.abs() == r, cur, out);
            }
        }
        rec(0, r, false, &mut cur, &mut out);
        out
    }

    /// Lattice points with `summand_degree <= order`, by expanding L∞ shells
    /// until `margin` consecutive shells miss the sublevel set.
    pub fn enumerate_support(&self) -> Result<Vec<Vec<i64>>, IndexError> {
        if self.dim == 0 {
            let t: Vec<i64> = Vec::new();
            return Ok(if self.summand_degree(&t) <= self.order { vec![t] } else { Vec::new() });
        }
        let mut support = Vec::new();
        let mut found = false;
        let mut clear = 0;
        let mut r = 0;
        loop {
            if r > self.guard_radius {
                return Err(IndexError::Divergent { radius: self.guard_radius });
            }
            let hits: Vec<Vec<i64>> = self.shell(r).into_par_iter().filter(|t| self.summand_degree(t) <= self.order).collect();
            if hits.is_empty() {
                if found {
                    clear += 1;
                    if clear >= self.margin.max(1) {
                        break;
                    }
                }
            } else {
                found = true;
                clear = 0;
                support.extend(hits);
            }
            r += 1;
        }
        support.sort();
        Ok(support)
    }

    pub fn compute(&self, cache: &TetIndexCache) -> Result<TruncatedSeries, IndexError> {
        let support = self.enumerate_support()?;
        Ok(support
            .par_iter()
            .map(|t| self.summand(cache, t))
            .reduce(|| TruncatedSeries::zero(self.order), |a, b| a.add(&b))
            .truncate(self.order))
    }
}

/// Index for the basic-edge selection `basis` (or the default selection).
pub fn compute_index(
    g: &GluingData,
    basis: Option<&BasisSelection>,
    peripheral: &PeripheralVector,
    order: i64,
    cache: &TetIndexCache,
) -> Result<TruncatedSeries, IndexError> {
    let chosen;
    let basis = match basis {
        Some(b) => b,
        None => {
            chosen = edgebasis::select_basis(g)?;
            &chosen
        }
    };
    IndexJob::new(g, basis, peripheral, order)?.compute(cache)
}

/// Index summed over `offset + span(directions)`.
pub fn compute_index_coset_sum(
    g: &GluingData,
    peripheral: &PeripheralVector,
    param: &Parametrization,
    order: i64,
    cache: &TetIndexCache,
) -> Result<TruncatedSeries, IndexError> {
    IndexJob::with_parametrization(g, param, peripheral, order)?.compute(cache)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tetindex::tet_index;
    use crate::triangulation::{CombTriangulation, QuadChoice, QuadType};
    use num_traits::One;

    const M004: &str = "tri v1\ntets 2\n\
        tet 0: f0 -> (1, 0132) ; f1 -> (1, 1302) ; f2 -> (1, 1023) ; f3 -> (1, 2031)\n\
        tet 1: f0 -> (0, 0132) ; f1 -> (0, 1302) ; f2 -> (0, 1023) ; f3 -> (0, 2031)\n";

    const TREFOIL: &str = "tri v1\ntets 2\n\
        tet 0: f0 -> (1, 0132) ; f1 -> (1, 2103) ; f2 -> (1, 1023) ; f3 -> (1, 1023)\n\
        tet 1: f0 -> (0, 0132) ; f1 -> (0, 2103) ; f2 -> (0, 1023) ; f3 -> (0, 1023)\n";

    const FIVE_TWO: &str = "nz v1\nN 3 cusps 1\n1 1 1\n0 0 0\n1 1 1\n0 2 0\n1 0 1\n1 0 1\n1 0 1\n1 2 1\n0 0 0\n2 2 2\n";

    fn m004() -> GluingData {
        GluingData::from_triangulation(&CombTriangulation::parse(M004).unwrap()).unwrap()
    }

    fn coeffs(s: &TruncatedSeries) -> Vec<i64> {
        s.integer_q_coefficients().unwrap().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn figure_eight_order_ten() {
        let g = m004();
        let s = compute_index(&g, None, &PeripheralVector::zero(2), 20, &TetIndexCache::new()).unwrap();
        assert_eq!(coeffs(&s), vec![1, -2, -3, 2, 8, 18, 18, 14, -12, -52, -106]);
    }

    #[test]
    fn five_two_order_five() {
        let g = GluingData::parse(FIVE_TWO).unwrap();
        let s = compute_index(&g, None, &PeripheralVector::zero(3), 10, &TetIndexCache::new()).unwrap();
        assert_eq!(coeffs(&s), vec![1, -4, -1, 16, 26, 23]);
    }

    #[test]
    fn figure_eight_summands() {
        let g = m004();
        let sel = edgebasis::select_basis(&g).unwrap();
        let job = IndexJob::new(&g, &sel, &PeripheralVector::zero(2), 30).unwrap();
        let cache = TetIndexCache::new();
        let i00 = tet_index(0, 0, 30);
        assert_eq!(job.summand(&cache, &[0]), i00.mul(&i00).truncate(30));
        let i11 = tet_index(1, 1, 30);
        // q^k cancels the two (-q^{1/2})^{-k} prefactors
        let s = job.summand(&cache, &[1]);
        assert_eq!(s, i11.mul(&i11).truncate(30));
        assert_eq!(s.min_exponent(), Some(6));
        for k in -4i64..=4 {
            assert_eq!(job.summand_degree(&[k]), 4 * k * k + 2 * k.abs());
        }
    }

    #[test]
    fn five_two_degree_in_cone() {
        // cone spanned by (-1,0) and (-1,-1): degree k1^2 - k1 in q units
        let g = GluingData::parse(FIVE_TWO).unwrap();
        let sel = edgebasis::select_basis(&g).unwrap();
        let job = IndexJob::new(&g, &sel, &PeripheralVector::zero(3), 40).unwrap();
        for k1 in -5i64..=0 {
            for k2 in k1..=0 {
                assert_eq!(job.summand_degree(&[k1, k2]), 2 * (k1 * k1 - k1), "({k1},{k2})");
            }
        }
    }

    #[test]
    fn support_of_figure_eight() {
        let g = m004();
        let sel = edgebasis::select_basis(&g).unwrap();
        let job = IndexJob::new(&g, &sel, &PeripheralVector::zero(2), 24).unwrap();
        let ks: Vec<i64> = job.enumerate_support().unwrap().into_iter().map(|t| t[0]).collect();
        assert_eq!(ks, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn above_order_is_empty() {
        let g = m004();
        let sel = edgebasis::select_basis(&g).unwrap();
        let job = IndexJob::new(&g, &sel, &PeripheralVector::zero(2), 6).unwrap();
        assert!(job.summand(&TetIndexCache::new(), &[3]).is_zero());
    }

    /// Brute-force sum over `|k| <= 40` with each factor computed naively.
    fn trefoil_oracle(order: i64) -> TruncatedSeries {
        let g = GluingData::from_triangulation(&CombTriangulation::parse(TREFOIL).unwrap()).unwrap();
        let sel = edgebasis::select_basis(&g).unwrap();
        let basic = sel.basic[0];
        let mut acc = TruncatedSeries::zero(order);
        for k in -40i64..=40 {
            let mut term = TruncatedSeries::monomial(2 * k, BigInt::one(), order + 400);
            for j in 0..2 {
                let a = k * g.abar()[basic][j];
                let b = k * g.bbar()[basic][j];
                let c = k * g.cbar()[basic][j];
                let f = tet_index(b - c, a - b, order + 400).scale_by_signed_half_power(-b);
                term = term.mul(&f);
            }
            acc = acc.add(&term);
        }
        acc.truncate(order)
    }

    #[test]
    fn trefoil_matches_brute_force() {
        let g = GluingData::from_triangulation(&CombTriangulation::parse(TREFOIL).unwrap()).unwrap();
        let s = compute_index(&g, None, &PeripheralVector::zero(2), 20, &TetIndexCache::new()).unwrap();
        assert_eq!(s, trefoil_oracle(20));
    }

    /// The original form with explicit `ν` and `I_Δ(-b, a)` factors.
    fn nu_form(g: &GluingData, qc: &QuadChoice, p: &PeripheralVector, basic: &[usize], range: i64, order: i64) -> TruncatedSeries {
        let red = g.eliminate_quad(qc);
        let n = g.n();
        let (pa, pb, pnu) = (p.a(), p.b(), p.nu());
        let mut acc = TruncatedSeries::zero(order);
        let d = basic.len();
        let total = (2 * range + 1).pow(d as u32);
        for idx in 0..total {
            let mut k = vec![0i64; n];
            let mut x = idx;
            for &e in basic {
                k[e] = x % (2 * range + 1) - range;
                x /= 2 * range + 1;
            }
            let knu: i64 = (0..n).map(|i| k[i] * red.nu[i]).sum::<i64>() + pnu;
            let mut term = TruncatedSeries::one(order + 600).scale_by_signed_half_power(knu);
            for j in 0..n {
                let aj: i64 = (0..n).map(|i| k[i] * red.a[i][j]).sum::<i64>() + pa[j];
                let bj: i64 = (0..n).map(|i| k[i] * red.b[i][j]).sum::<i64>() + pb[j];
                term = term.mul(&tet_index(-bj, aj, order + 600));
            }
            acc = acc.add(&term.truncate(order.max(0)));
        }
        acc.truncate(order)
    }

    #[test]
    fn j_form_matches_nu_form() {
        let g = m004();
        let p = PeripheralVector::zero(2);
        let j = compute_index(&g, None, &p, 12, &TetIndexCache::new()).unwrap();
        for q in QuadType::ALL {
            assert_eq!(nu_form(&g, &QuadChoice::uniform(2, q), &p, &[0], 6, 12), j);
        }
    }

    #[test]
    fn j_form_matches_nu_form_with_curve() {
        // a turning vector with odd ν_ϖ; both forms must agree exactly
        let g = m004();
        let p = PeripheralVector { abar: vec![1, 0], bbar: vec![0, 1], cbar: vec![-1, 0] };
        let j = compute_index(&g, None, &p, 12, &TetIndexCache::new()).unwrap();
        assert_eq!(nu_form(&g, &QuadChoice::uniform(2, QuadType::QPrime), &p, &[0], 8, 12), j);
    }

    #[test]
    fn coset_choices_agree() {
        let g = m004();
        let cache = TetIndexCache::new();
        let p = PeripheralVector::zero(2);
        let a = compute_index_coset_sum(&g, &p, &Parametrization::basic_edges(2, &[0]), 20, &cache).unwrap();
        let b = compute_index_coset_sum(&g, &p, &Parametrization::basic_edges(2, &[1]), 20, &cache).unwrap();
        let shifted = Parametrization { offset: vec![3, -1], directions: vec![vec![1, 0]] };
        let c = compute_index_coset_sum(&g, &p, &shifted, 20, &cache).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let bad = Parametrization { offset: vec![0, 0], directions: vec![vec![2, 0]] };
        assert_eq!(compute_index_coset_sum(&g, &p, &bad, 20, &cache), Err(IndexError::NotComplement));
    }

    #[test]
    fn divergence_guard() {
        let g = m004();
        let sel = edgebasis::select_basis(&g).unwrap();
        let job = IndexJob::new(&g, &sel, &PeripheralVector::zero(2), 2000).unwrap().with_guard_radius(3);
        assert_eq!(job.enumerate_support(), Err(IndexError::Divergent { radius: 3 }));
    }

    #[test]
    fn degree_is_sound_on_support() {
        let g = GluingData::parse(FIVE_TWO).unwrap();
        let sel = edgebasis::select_basis(&g).unwrap();
        let job = IndexJob::new(&g, &sel, &PeripheralVector::zero(3), 16).unwrap();
        let cache = TetIndexCache::new();
        for t in job.enumerate_support().unwrap() {
            let s = job.summand(&cache, &t);
            if let Some(m) = s.min_exponent() {
                assert!(job.summand_degree(&t) <= m, "{t:?}");
            }
        }
    }
}
