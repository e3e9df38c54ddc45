//! The isomorphism criterion as an explicit action on characteristic
//! matrices.
//!
//! An [`IsoTransform`] is a pair (X, X2) of 3x3 matrices built from nine
//! parameters. A parameter in a below-diagonal position of X (or the
//! mirrored above-diagonal position of X2) is multiplied by p^(m_i - m_j),
//! which vanishes mod p unless m_i = m_j, so the realized shape depends only
//! on which exponents coincide. The action is
//!
//! ```text
//! w  |->  det(X)^-1 * X2 * w * X^t
//! ```
//!
//! with one exception: for p = 2 and type (2^m, 2, 2) with m > 1 the first
//! parameter is fixed to 1 and an affine correction with entries
//! x22*x23 and x32*x33 in the first column of rows 2 and 3 is added. Two
//! matrices lie in the same orbit exactly when the groups they describe are
//! isomorphic; p = 2 with m = (1,1,1) has no matrix action at all and is
//! handled by the group oracle.

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeContext, ONE, ZERO};
use crate::mat::{space_size, Mat3};
use crate::pair::UnionFind;
use rayon::prelude::*;
use std::collections::{HashMap, HashSet, VecDeque};

/// Exponent type (m1, m2, m3) of G/G', with m1 >= m2 >= m3 >= 1.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExponentType {
    m: [u32; 3],
}

impl ExponentType {
    pub fn new(m1: u32, m2: u32, m3: u32) -> Result<Self> {
        if !(m1 >= m2 && m2 >= m3 && m3 >= 1) {
            return Err(Error::InvalidExponentType(format!(
                "need m1 >= m2 >= m3 >= 1, got ({m1},{m2},{m3})"
            )));
        }
        Ok(ExponentType { m: [m1, m2, m3] })
    }

    pub fn m(&self) -> [u32; 3] {
        self.m
    }

    pub fn m1(&self) -> u32 {
        self.m[0]
    }

    pub fn m2(&self) -> u32 {
        self.m[1]
    }

    pub fn m3(&self) -> u32 {
        self.m[2]
    }
}

/// Which theorem drives the action for a given (p, exponent type).
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum CaseTag {
    /// m1 > m2 > m3.
    Strict,
    /// m1 > m2 = m3 (for p = 2 this requires m2 > 1).
    Top,
    /// m1 = m2 > m3.
    Bottom,
    /// m1 = m2 = m3 (odd p, or p = 2 with m >= 2).
    Equal,
    /// p = 2, m1 > 1, m2 = m3 = 1: the corrected action.
    P2Special,
    /// p = 2, m = (1,1,1): no matrix action.
    P2Tiny,
}

/// Deterministic dispatch; every ordered triple gets exactly one tag.
pub fn case_tag(ctx: &PrimeContext, etype: &ExponentType) -> CaseTag {
    let [m1, m2, m3] = etype.m;
    if ctx.is_two() && m2 == 1 && m3 == 1 {
        return if m1 == 1 { CaseTag::P2Tiny } else { CaseTag::P2Special };
    }
    if m1 > m2 && m2 > m3 {
        CaseTag::Strict
    } else if m1 > m2 {
        CaseTag::Top
    } else if m2 > m3 {
        CaseTag::Bottom
    } else {
        CaseTag::Equal
    }
}

/// A characteristic matrix in its classification context.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct CharMatrix {
    pub ctx: PrimeContext,
    pub etype: ExponentType,
    pub w: Mat3,
}

impl CharMatrix {
    pub fn new(ctx: PrimeContext, etype: ExponentType, w: Mat3) -> Self {
        CharMatrix { ctx, etype, w }
    }

    pub fn tag(&self) -> CaseTag {
        case_tag(&self.ctx, &self.etype)
    }
}

/// Positions of the nine parameters: diagonal, above-diagonal (free in X),
/// below-diagonal (free in X2, masked in X by the p-power factors).
const UPPER: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const LOWER: [(usize, usize); 3] = [(1, 0), (2, 0), (2, 1)];

/// One element of the isomorphism action: the realized pair (X, X2).
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct IsoTransform {
    ctx: PrimeContext,
    etype: ExponentType,
    x: Mat3,
    x2: Mat3,
}

impl IsoTransform {
    /// Builds the pair from raw parameters
    /// `[x11, x12, x13, x21, x22, x23, x31, x32, x33]`.
    pub fn from_params(ctx: PrimeContext, etype: ExponentType, params: [Fp; 9]) -> Result<Self> {
        let tag = case_tag(&ctx, &etype);
        if tag == CaseTag::P2Tiny {
            return Err(Error::TinyCase);
        }
        if tag == CaseTag::P2Special && params[0] != ONE {
            return Err(Error::InvalidExponentType(
                "the corrected p = 2 action fixes x11 = 1".into(),
            ));
        }
        let at = |i: usize, j: usize| params[3 * i + j];
        let m = etype.m;
        let mut x = Mat3::zero();
        let mut x2 = Mat3::zero();
        for i in 0..3 {
            x.0[i][i] = at(i, i);
            x2.0[i][i] = at(i, i);
        }
        for (i, j) in UPPER {
            x.0[i][j] = at(i, j);
            x2.0[i][j] = if m[i] == m[j] { at(i, j) } else { ZERO };
        }
        for (i, j) in LOWER {
            x2.0[i][j] = at(i, j);
            x.0[i][j] = if m[i] == m[j] { at(i, j) } else { ZERO };
        }
        let t = IsoTransform { ctx, etype, x, x2 };
        t.check()?;
        Ok(t)
    }

    /// Builds from realized matrices, checking they fit the masks.
    pub fn from_parts(ctx: PrimeContext, etype: ExponentType, x: Mat3, x2: Mat3) -> Result<Self> {
        let mut params = [ZERO; 9];
        for i in 0..3 {
            params[3 * i + i] = x.0[i][i];
        }
        for (i, j) in UPPER {
            params[3 * i + j] = x.0[i][j];
        }
        for (i, j) in LOWER {
            params[3 * i + j] = x2.0[i][j];
        }
        let t = Self::from_params(ctx, etype, params)?;
        if t.x != x || t.x2 != x2 {
            return Err(Error::Internal(format!(
                "matrices do not fit the {:?} mask: X={:?} X2={:?}",
                case_tag(&ctx, &etype),
                x,
                x2
            )));
        }
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        if !self.x.is_invertible(&self.ctx) {
            return Err(Error::SingularTransform);
        }
        // X2 invertibility follows from the shared diagonal blocks; assert
        // rather than assume.
        if !self.x2.is_invertible(&self.ctx) {
            return Err(Error::Internal("X2 unexpectedly singular".into()));
        }
        Ok(())
    }

    pub fn identity(ctx: PrimeContext, etype: ExponentType) -> Result<Self> {
        let mut params = [ZERO; 9];
        for i in 0..3 {
            params[3 * i + i] = ONE;
        }
        Self::from_params(ctx, etype, params)
    }

    pub fn x(&self) -> &Mat3 {
        &self.x
    }

    pub fn x2(&self) -> &Mat3 {
        &self.x2
    }

    pub fn etype(&self) -> &ExponentType {
        &self.etype
    }

    /// The nine defining parameters, recovered from the realized pair.
    pub fn params(&self) -> [Fp; 9] {
        let mut params = [ZERO; 9];
        for i in 0..3 {
            params[3 * i + i] = self.x.0[i][i];
        }
        for (i, j) in UPPER {
            params[3 * i + j] = self.x.0[i][j];
        }
        for (i, j) in LOWER {
            params[3 * i + j] = self.x2.0[i][j];
        }
        params
    }

    /// Composite transform acting as `self` after `earlier`. Not available
    /// for the corrected p = 2 action, whose witnesses are found by direct
    /// search instead.
    pub fn compose(&self, earlier: &IsoTransform) -> Result<IsoTransform> {
        if self.etype != earlier.etype {
            return Err(Error::ContextMismatch);
        }
        if case_tag(&self.ctx, &self.etype) == CaseTag::P2Special {
            return Err(Error::Internal(
                "composition is not defined for the corrected action".into(),
            ));
        }
        IsoTransform::from_parts(
            self.ctx,
            self.etype,
            self.x.mul(&earlier.x, &self.ctx),
            self.x2.mul(&earlier.x2, &self.ctx),
        )
    }
}

/// Applies the transform: `det(X)^-1 X2 w X^t`, plus the correction term for
/// the p = 2 special case.
pub fn apply(t: &IsoTransform, w: &CharMatrix) -> Result<CharMatrix> {
    if t.ctx != w.ctx || t.etype != w.etype {
        return Err(Error::ContextMismatch);
    }
    let ctx = &w.ctx;
    let det_inv = ctx.inv(t.x.det(ctx))?;
    let mut out = t.x2.mul(&w.w, ctx).mul(&t.x.transpose(), ctx).scale(det_inv, ctx);
    if w.tag() == CaseTag::P2Special {
        out.0[1][0] = ctx.add(out.0[1][0], ctx.mul(t.x.0[1][1], t.x.0[1][2]));
        out.0[2][0] = ctx.add(out.0[2][0], ctx.mul(t.x.0[2][1], t.x.0[2][2]));
    }
    Ok(CharMatrix::new(w.ctx, w.etype, out))
}

/// Exact number of transforms for the tag.
pub fn transform_count(ctx: &PrimeContext, etype: &ExponentType) -> Result<u64> {
    let p = ctx.p() as u64;
    let units = p - 1;
    let gl2 = (p * p - 1) * (p * p - p);
    Ok(match case_tag(ctx, etype) {
        CaseTag::Strict => units.pow(3) * p.pow(6),
        CaseTag::Top | CaseTag::Bottom => gl2 * units * p.pow(4),
        CaseTag::Equal => (p.pow(3) - 1) * (p.pow(3) - p) * (p.pow(3) - p * p),
        CaseTag::P2Special => 6 * 16,
        CaseTag::P2Tiny => return Err(Error::TinyCase),
    })
}

pub const DEFAULT_TRANSFORM_CAP: u64 = 100_000_000;

/// Streams every valid transform exactly once.
pub fn enumerate_transforms(
    ctx: PrimeContext,
    etype: ExponentType,
    cap: u64,
) -> Result<impl Iterator<Item = IsoTransform>> {
    let count = transform_count(&ctx, &etype)?;
    if count > cap {
        return Err(Error::Infeasible(format!(
            "{count} transforms exceed the cap {cap}"
        )));
    }
    let tag = case_tag(&ctx, &etype);
    let p = ctx.p();
    let raw = (p as u64).pow(if tag == CaseTag::P2Special { 8 } else { 9 });
    Ok((0..raw).filter_map(move |mut code| {
        let mut params = [ZERO; 9];
        let slots: &[usize] = if tag == CaseTag::P2Special {
            params[0] = ONE;
            &[1, 2, 3, 4, 5, 6, 7, 8]
        } else {
            &[0, 1, 2, 3, 4, 5, 6, 7, 8]
        };
        for &s in slots {
            params[s] = Fp((code % p as u64) as u32);
            code /= p as u64;
        }
        IsoTransform::from_params(ctx, etype, params).ok()
    }))
}

/// Transforms whose generated group of actions has the same orbits as the
/// full set: single-parameter diagonal and elementary transforms. Small
/// parameter spaces are enumerated in full instead.
pub fn generating_transforms(ctx: PrimeContext, etype: ExponentType) -> Result<Vec<IsoTransform>> {
    let count = transform_count(&ctx, &etype)?;
    if count <= 4096 {
        return Ok(enumerate_transforms(ctx, etype, DEFAULT_TRANSFORM_CAP)?.collect());
    }
    let mut gens = Vec::new();
    let diag_slots: &[usize] = if case_tag(&ctx, &etype) == CaseTag::P2Special {
        &[4, 8]
    } else {
        &[0, 4, 8]
    };
    for &slot in diag_slots {
        for a in ctx.units().skip(1) {
            let mut params = [ZERO; 9];
            for i in 0..3 {
                params[3 * i + i] = ONE;
            }
            params[slot] = a;
            gens.push(IsoTransform::from_params(ctx, etype, params)?);
        }
    }
    for (i, j) in UPPER.into_iter().chain(LOWER) {
        for c in ctx.units() {
            let mut params = [ZERO; 9];
            for d in 0..3 {
                params[3 * d + d] = ONE;
            }
            params[3 * i + j] = c;
            gens.push(IsoTransform::from_params(ctx, etype, params)?);
        }
    }
    Ok(gens)
}

/// Decides whether two matrices lie in the same orbit, returning a witness
/// transform. A single application suffices: the relation realizes group
/// isomorphism, so it is already transitive.
pub fn same_orbit(w1: &CharMatrix, w2: &CharMatrix, cap: u64) -> Result<Option<IsoTransform>> {
    if w1.ctx != w2.ctx || w1.etype != w2.etype {
        return Err(Error::ContextMismatch);
    }
    for t in enumerate_transforms(w1.ctx, w1.etype, cap)? {
        if apply(&t, w1)?.w == w2.w {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

const ORBIT_SPACE_MAX_P: u32 = 5;

fn check_orbit_feasible(ctx: &PrimeContext) -> Result<()> {
    if ctx.p() > ORBIT_SPACE_MAX_P {
        return Err(Error::Infeasible(format!(
            "orbit enumeration over p^9 matrices is capped at p <= {ORBIT_SPACE_MAX_P}, got {}",
            ctx.p()
        )));
    }
    Ok(())
}

/// Lexicographically least matrix in the orbit of `w` (row-major order),
/// computed by breadth-first closure under the generating set.
pub fn orbit_key(w: &CharMatrix) -> Result<Mat3> {
    check_orbit_feasible(&w.ctx)?;
    let gens = generating_transforms(w.ctx, w.etype)?;
    let p = w.ctx.p();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut best = w.w.index(p);
    seen.insert(best);
    queue.push_back(w.w);
    while let Some(cur) = queue.pop_front() {
        let cm = CharMatrix::new(w.ctx, w.etype, cur);
        for g in &gens {
            let next = apply(g, &cm)?.w;
            let idx = next.index(p);
            if seen.insert(idx) {
                best = best.min(idx);
                queue.push_back(next);
            }
        }
    }
    Ok(Mat3::from_index(p, best))
}

/// Partition of the full p^9 matrix space into orbits.
pub struct OrbitPartition {
    p: u32,
    /// Canonical (least) member index of each matrix's orbit.
    canon: Vec<u32>,
    /// (canonical member index, orbit size), ordered by canonical index.
    orbits: Vec<(u32, usize)>,
}

impl OrbitPartition {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn canonical(&self, idx: u32) -> u32 {
        self.canon[idx as usize]
    }

    pub fn canonical_of(&self, w: &Mat3) -> u32 {
        self.canonical(w.index(self.p))
    }

    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    /// (canonical member, size) pairs ordered by canonical member.
    pub fn orbits(&self) -> &[(u32, usize)] {
        &self.orbits
    }

    pub fn members(&self, canonical: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.canon.len() as u32).filter(move |&i| self.canon[i as usize] == canonical)
    }
}

/// Computes the orbit partition of the whole matrix space under the action.
pub fn orbit_partition(ctx: PrimeContext, etype: ExponentType) -> Result<OrbitPartition> {
    check_orbit_feasible(&ctx)?;
    let tag = case_tag(&ctx, &etype);
    if tag == CaseTag::P2Tiny {
        return Err(Error::TinyCase);
    }
    let p = ctx.p();
    let n = space_size(p) as usize;
    let gens = generating_transforms(ctx, etype)?;
    let mut uf = UnionFind::new(n);
    let mut targets: Vec<u32> = Vec::new();
    for g in &gens {
        // Edge generation is embarrassingly parallel; the union pass stays
        // sequential.
        (0..n as u32)
            .into_par_iter()
            .map(|idx| {
                let w = CharMatrix::new(ctx, etype, Mat3::from_index(p, idx));
                apply(g, &w).expect("compatible").w.index(p)
            })
            .collect_into_vec(&mut targets);
        for (idx, &t) in targets.iter().enumerate() {
            uf.union(idx, t as usize);
        }
    }
    let mut canon = vec![u32::MAX; n];
    let mut first: HashMap<usize, u32> = HashMap::new();
    for idx in 0..n {
        let root = uf.find(idx);
        let c = *first.entry(root).or_insert(idx as u32);
        canon[idx] = c;
    }
    let mut sizes: HashMap<u32, usize> = HashMap::new();
    for &c in &canon {
        *sizes.entry(c).or_insert(0) += 1;
    }
    let mut orbits: Vec<(u32, usize)> = sizes.into_iter().collect();
    orbits.sort_unstable();
    Ok(OrbitPartition { p, canon, orbits })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn et(m1: u32, m2: u32, m3: u32) -> ExponentType {
        ExponentType::new(m1, m2, m3).unwrap()
    }

    #[test]
    fn tags() {
        assert_eq!(case_tag(&ctx(3), &et(3, 2, 1)), CaseTag::Strict);
        assert_eq!(case_tag(&ctx(2), &et(3, 1, 1)), CaseTag::P2Special);
        assert_eq!(case_tag(&ctx(2), &et(1, 1, 1)), CaseTag::P2Tiny);
        assert_eq!(case_tag(&ctx(2), &et(2, 2, 1)), CaseTag::Bottom);
        assert_eq!(case_tag(&ctx(2), &et(2, 2, 2)), CaseTag::Equal);
        assert_eq!(case_tag(&ctx(3), &et(1, 1, 1)), CaseTag::Equal);
        assert_eq!(case_tag(&ctx(3), &et(2, 1, 1)), CaseTag::Top);
        assert!(ExponentType::new(1, 2, 3).is_err());
    }

    #[test]
    fn masks_realize_per_tag() {
        // Strict: X upper-triangular, X2 lower-triangular.
        let c = ctx(3);
        let e = et(3, 2, 1);
        let params: [Fp; 9] = std::array::from_fn(|i| Fp([1, 2, 1, 2, 1, 2, 1, 2, 2][i]));
        let t = IsoTransform::from_params(c, e, params).unwrap();
        assert_eq!(t.x().0[1][0], ZERO);
        assert_eq!(t.x().0[2][0], ZERO);
        assert_eq!(t.x().0[2][1], ZERO);
        assert_eq!(t.x2().0[1][0], Fp(2));
        assert_eq!(t.x2().0[0][1], ZERO);
        // Equal: X2 = X in full.
        let e = et(2, 2, 2);
        let params_eq: [Fp; 9] = std::array::from_fn(|i| Fp([1, 2, 1, 0, 1, 2, 1, 2, 2][i]));
        let t = IsoTransform::from_params(c, e, params_eq).unwrap();
        assert_eq!(t.x(), t.x2());
        // P2Special shape from the theorem statement.
        let c2 = ctx(2);
        let e2 = et(3, 1, 1);
        let params2: [Fp; 9] = std::array::from_fn(|i| Fp([1, 1, 1, 1, 1, 0, 1, 0, 1][i]));
        let t = IsoTransform::from_params(c2, e2, params2).unwrap();
        assert_eq!(t.x().0[0], [ONE, ONE, ONE]);
        assert_eq!(t.x().0[1][0], ZERO);
        assert_eq!(t.x2().0[0], [ONE, ZERO, ZERO]);
        assert_eq!(t.x2().0[1][0], ONE);
        // x11 != 1 is rejected.
        let mut bad = params2;
        bad[0] = ZERO;
        assert!(IsoTransform::from_params(c2, e2, bad).is_err());
    }

    #[test]
    fn identity_fixes_everything() {
        for (p, m) in [(2, (3, 2, 1)), (2, (3, 1, 1)), (3, (2, 1, 1)), (3, (1, 1, 1)), (5, (2, 2, 1))] {
            let c = ctx(p);
            let e = et(m.0, m.1, m.2);
            let id = IsoTransform::identity(c, e).unwrap();
            for idx in (0..space_size(p) as u32).step_by(131) {
                let w = CharMatrix::new(c, e, Mat3::from_index(p, idx));
                assert_eq!(apply(&id, &w).unwrap().w, w.w);
            }
        }
    }

    #[test]
    fn strict_mask_kills_lower_param() {
        // (2,1) of X vanishes when m1 > m2, while X2 keeps it.
        let c = ctx(3);
        let e = et(3, 2, 1);
        let mut params = [ZERO; 9];
        for i in 0..3 {
            params[3 * i + i] = ONE;
        }
        params[3] = Fp(2); // x21
        let t = IsoTransform::from_params(c, e, params).unwrap();
        assert_eq!(t.x().0[1][0], ZERO);
        assert_eq!(t.x2().0[1][0], Fp(2));
    }

    #[test]
    fn p2_special_correction_on_zero_matrix() {
        let c = ctx(2);
        let e = et(2, 1, 1);
        let mut params = [ZERO; 9];
        params[0] = ONE;
        params[4] = ONE; // x22
        params[5] = ONE; // x23
        params[8] = ONE; // x33
        let t = IsoTransform::from_params(c, e, params).unwrap();
        let w = CharMatrix::new(c, e, Mat3::zero());
        let out = apply(&t, &w).unwrap();
        assert_eq!(out.w, Mat3::from_i64(&c, [[0, 0, 0], [1, 0, 0], [0, 0, 0]]));
    }

    #[test]
    fn counts_match_enumeration() {
        let cases = [
            (2u32, (3u32, 2u32, 1u32), 64u64),      // diagonal forced to 1
            (2, (2, 1, 1), 96),                     // |GL2(2)| * 2^4
            (2, (2, 2, 2), 168),                    // |GL3(2)|
            (3, (1, 1, 1), 11232),                  // |GL3(3)|
            (3, (3, 2, 1), 8 * 729),
            (3, (2, 1, 1), 48 * 2 * 81),
            (3, (2, 2, 1), 48 * 2 * 81),
        ];
        for (p, m, want) in cases {
            let c = ctx(p);
            let e = et(m.0, m.1, m.2);
            assert_eq!(transform_count(&c, &e).unwrap(), want, "p={p} m={m:?}");
            let got = enumerate_transforms(c, e, DEFAULT_TRANSFORM_CAP).unwrap().count() as u64;
            assert_eq!(got, want, "enumerated p={p} m={m:?}");
        }
        assert!(matches!(
            transform_count(&ctx(2), &et(1, 1, 1)),
            Err(Error::TinyCase)
        ));
    }

    #[test]
    fn scalar_invariance_odd_p() {
        // X = c*I sends w to c^-1 w, so scalar multiples share an orbit.
        let c = ctx(5);
        for m in [(3, 2, 1), (2, 1, 1), (2, 2, 1), (1, 1, 1)] {
            let e = et(m.0, m.1, m.2);
            let mut params = [ZERO; 9];
            for i in 0..3 {
                params[3 * i + i] = Fp(2);
            }
            let t = IsoTransform::from_params(c, e, params).unwrap();
            let w = CharMatrix::new(c, e, Mat3::from_i64(&c, [[1, 2, 0], [0, 3, 1], [4, 0, 2]]));
            let out = apply(&t, &w).unwrap();
            let inv2 = c.inv(Fp(2)).unwrap();
            assert_eq!(out.w, w.w.scale(inv2, &c));
        }
    }

    #[test]
    fn rank_invariance_except_correction() {
        let c = ctx(3);
        let e = et(2, 1, 1);
        for t in enumerate_transforms(c, e, DEFAULT_TRANSFORM_CAP).unwrap().take(500) {
            for idx in (0..space_size(3) as u32).step_by(977) {
                let w = CharMatrix::new(c, e, Mat3::from_index(3, idx));
                let out = apply(&t, &w).unwrap();
                assert_eq!(out.w.rank(&c), w.w.rank(&c));
            }
        }
    }

    #[test]
    fn inverse_exists_exhaustively_p2() {
        let c = ctx(2);
        let e = et(2, 1, 1);
        let all: Vec<IsoTransform> =
            enumerate_transforms(c, e, DEFAULT_TRANSFORM_CAP).unwrap().collect();
        for t in &all {
            for idx in 0..512u32 {
                let w = CharMatrix::new(c, e, Mat3::from_index(2, idx));
                let moved = apply(t, &w).unwrap();
                assert!(
                    all.iter().any(|s| apply(s, &moved).unwrap().w == w.w),
                    "no inverse for {t:?} at {idx}"
                );
            }
        }
    }

    #[test]
    fn generator_closure_matches_full_enumeration_p2() {
        // The generating-set policy must induce the same partition as the
        // full transform set on every p = 2 tag with a matrix action.
        for m in [(3, 2, 1), (3, 2, 2), (2, 2, 1), (2, 2, 2), (2, 1, 1)] {
            let c = ctx(2);
            let e = et(m.0, m.1, m.2);
            let part = orbit_partition(c, e).unwrap();
            let full: Vec<IsoTransform> =
                enumerate_transforms(c, e, DEFAULT_TRANSFORM_CAP).unwrap().collect();
            for idx in 0..512u32 {
                let w = CharMatrix::new(c, e, Mat3::from_index(2, idx));
                for t in &full {
                    let out = apply(t, &w).unwrap();
                    assert_eq!(
                        part.canonical(idx),
                        part.canonical(out.w.index(2)),
                        "orbit split at m={m:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn orbit_sizes_sum_to_space() {
        for (p, m) in [(2, (2, 1, 1)), (2, (2, 2, 2)), (3, (3, 2, 1)), (3, (1, 1, 1))] {
            let c = ctx(p);
            let e = et(m.0, m.1, m.2);
            let part = orbit_partition(c, e).unwrap();
            let total: usize = part.orbits().iter().map(|&(_, s)| s).sum();
            assert_eq!(total as u64, space_size(p));
        }
    }

    #[test]
    fn same_orbit_examples_equal_p3() {
        let c = ctx(3);
        let e = et(1, 1, 1);
        let id3 = CharMatrix::new(c, e, Mat3::identity());
        let with_eta = CharMatrix::new(c, e, Mat3::from_diag([ONE, ONE, Fp(2)]));
        // diag(1,1,eta) reduces to the identity class.
        assert!(same_orbit(&id3, &with_eta, DEFAULT_TRANSFORM_CAP).unwrap().is_some());
        // Different nu for diag(1,nu,0) stay apart.
        let k1_1 = CharMatrix::new(c, e, Mat3::from_diag([ONE, ONE, ZERO]));
        let k1_eta = CharMatrix::new(c, e, Mat3::from_diag([ONE, Fp(2), ZERO]));
        assert!(same_orbit(&k1_1, &k1_eta, DEFAULT_TRANSFORM_CAP).unwrap().is_none());
        // Identity witness on equal inputs.
        let witness = same_orbit(&id3, &id3, DEFAULT_TRANSFORM_CAP).unwrap().unwrap();
        assert_eq!(apply(&witness, &id3).unwrap().w, id3.w);
    }

    #[test]
    fn action_composes_within_orbits() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for (p, m) in [(2u32, (3, 2, 1)), (3, (2, 2, 1)), (3, (1, 1, 1))] {
            let c = ctx(p);
            let e = et(m.0, m.1, m.2);
            let part = orbit_partition(c, e).unwrap();
            for _ in 0..2000 {
                let sample = |rng: &mut rand_chacha::ChaCha8Rng| loop {
                    let params: [Fp; 9] = std::array::from_fn(|i| {
                        if i == 0 && case_tag(&c, &e) == CaseTag::P2Special {
                            ONE
                        } else {
                            Fp(rng.gen_range(0..p))
                        }
                    });
                    if let Ok(t) = IsoTransform::from_params(c, e, params) {
                        return t;
                    }
                };
                let t1 = sample(&mut rng);
                let t2 = sample(&mut rng);
                let idx = rng.gen_range(0..space_size(p) as u32);
                let w = CharMatrix::new(c, e, Mat3::from_index(p, idx));
                let moved = apply(&t2, &apply(&t1, &w).unwrap()).unwrap();
                assert_eq!(part.canonical(idx), part.canonical(moved.w.index(p)));
            }
        }
    }
}
