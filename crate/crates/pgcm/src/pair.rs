//! Canonical forms of 2x2 matrices over F_p under congruence and
//! sub-congruence.
//!
//! Congruence relates A and P^t A P for invertible P; sub-congruence allows
//! an extra scalar: lambda P^t A P. The transversals realized here are the
//! building blocks of the 3x3 classification:
//!
//! * invertible, odd p (four types): [[0,1],[-1,0]], [[nu1,1],[-1,0]],
//!   diag(1,nu2), [[1,1],[-1,r]] with nu in {1,eta}, r in 1..p-2; under
//!   sub-congruence nu1 collapses to 1,
//! * invertible, p = 2 (three types): I, [[0,1],[1,0]], [[1,0],[1,1]],
//! * singular (three types): [[0,1],[0,0]], diag(0,nu), 0; under
//!   sub-congruence (or p = 2) nu collapses to 1.
//!
//! Every canonicalization returns a witness (P, lambda) with
//! `lambda P^t A P = representative`, checked before returning.

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeContext, ONE, ZERO};
use crate::mat::Mat2;
use crate::report::{VerificationReport, Violation};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum PairRelation {
    Congruence,
    Subcongruence,
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Lemma {
    /// Invertible transversal, odd p.
    L21,
    /// Invertible transversal, p = 2.
    L22,
    /// Singular transversal, any p.
    L23,
}

/// Label of one transversal member: lemma, type index within the lemma's
/// list, and the parameter (nu or r) when the type carries one.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct PairLabel {
    pub lemma: Lemma,
    pub type_index: u8,
    pub param: Option<Fp>,
}

impl PairLabel {
    fn new(lemma: Lemma, type_index: u8) -> Self {
        PairLabel { lemma, type_index, param: None }
    }

    fn with(lemma: Lemma, type_index: u8, param: Fp) -> Self {
        PairLabel { lemma, type_index, param: Some(param) }
    }

    /// The table matrix for this label.
    pub fn representative(&self, ctx: &PrimeContext) -> Result<Mat2> {
        let one = ONE;
        let m1 = ctx.neg(one);
        let need = |p: &Option<Fp>| p.ok_or_else(|| Error::InvalidLabel(format!("{self:?}")));
        Ok(match (self.lemma, self.type_index) {
            (Lemma::L21, 1) => Mat2([[ZERO, one], [m1, ZERO]]),
            (Lemma::L21, 2) => Mat2([[need(&self.param)?, one], [m1, ZERO]]),
            (Lemma::L21, 3) => Mat2::from_diag(one, need(&self.param)?),
            (Lemma::L21, 4) => Mat2([[one, one], [m1, need(&self.param)?]]),
            (Lemma::L22, 1) => Mat2::identity(),
            (Lemma::L22, 2) => Mat2([[ZERO, one], [one, ZERO]]),
            (Lemma::L22, 3) => Mat2([[one, ZERO], [one, one]]),
            (Lemma::L23, 1) => Mat2([[ZERO, one], [ZERO, ZERO]]),
            (Lemma::L23, 2) => Mat2::from_diag(ZERO, need(&self.param)?),
            (Lemma::L23, 3) => Mat2::zero(),
            _ => return Err(Error::InvalidLabel(format!("{self:?}"))),
        })
    }
}

/// Canonicalization result: `lambda * p^t * A * p == rep`.
#[derive(Clone, Debug)]
pub struct PairCanon {
    pub label: PairLabel,
    pub rep: Mat2,
    pub p: Mat2,
    pub lambda: Fp,
}

fn congruate(ctx: &PrimeContext, a: &Mat2, p: &Mat2) -> Mat2 {
    p.transpose().mul(a, ctx).mul(p, ctx)
}

/// All transversal members for the relation, invertible stratum first, then
/// singular, in the lemmas' list order.
pub fn enumerate_pair_transversal(ctx: &PrimeContext, rel: PairRelation) -> Vec<PairLabel> {
    let mut out = Vec::new();
    if ctx.is_two() {
        for t in 1..=3 {
            out.push(PairLabel::new(Lemma::L22, t));
        }
        out.push(PairLabel::new(Lemma::L23, 1));
        out.push(PairLabel::with(Lemma::L23, 2, ONE));
        out.push(PairLabel::new(Lemma::L23, 3));
        return out;
    }
    let eta = ctx.eta().expect("odd p");
    let nus = [ONE, eta];
    out.push(PairLabel::new(Lemma::L21, 1));
    match rel {
        PairRelation::Congruence => {
            for nu in nus {
                out.push(PairLabel::with(Lemma::L21, 2, nu));
            }
        }
        PairRelation::Subcongruence => out.push(PairLabel::with(Lemma::L21, 2, ONE)),
    }
    for nu in nus {
        out.push(PairLabel::with(Lemma::L21, 3, nu));
    }
    for r in 1..=(ctx.p() - 2) {
        out.push(PairLabel::with(Lemma::L21, 4, Fp(r)));
    }
    out.push(PairLabel::new(Lemma::L23, 1));
    match rel {
        PairRelation::Congruence => {
            for nu in nus {
                out.push(PairLabel::with(Lemma::L23, 2, nu));
            }
        }
        PairRelation::Subcongruence => out.push(PairLabel::with(Lemma::L23, 2, ONE)),
    }
    out.push(PairLabel::new(Lemma::L23, 3));
    out
}

/// Canonicalizes `a` under the relation, returning the transversal member,
/// its label and the witness. For p = 2 sub-congruence degenerates to
/// congruence (lambda is forced to 1).
pub fn canonical_pair(ctx: &PrimeContext, a: &Mat2, rel: PairRelation) -> Result<PairCanon> {
    let rel = if ctx.is_two() { PairRelation::Congruence } else { rel };
    let canon = if a.det(ctx) == ZERO {
        singular(ctx, a, rel)?
    } else if ctx.is_two() {
        invertible_f2(ctx, a)?
    } else {
        invertible_odd(ctx, a, rel)?
    };
    // Soundness: the witness equation holds exactly.
    let got = congruate(ctx, a, &canon.p).scale(canon.lambda, ctx);
    if got != canon.rep || canon.rep != canon.label.representative(ctx)? {
        return Err(Error::Internal(format!(
            "pair witness broken: {:?} -> {:?} claimed {:?}",
            a, got, canon.rep
        )));
    }
    Ok(canon)
}

/// Lemma 2.3 reduction, following the proof's P1..P4 steps.
fn singular(ctx: &PrimeContext, a: &Mat2, rel: PairRelation) -> Result<PairCanon> {
    if a.is_zero() {
        return Ok(PairCanon {
            label: PairLabel::new(Lemma::L23, 3),
            rep: Mat2::zero(),
            p: Mat2::identity(),
            lambda: ONE,
        });
    }
    let mut p_acc = Mat2::identity();
    let mut cur = *a;
    // Swap exactly when the second column vanishes.
    if cur.0[0][1] == ZERO && cur.0[1][1] == ZERO {
        let p1 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
        cur = congruate(ctx, &cur, &p1);
        p_acc = p_acc.mul(&p1, ctx);
    }
    // rank 1: first column is k times the second.
    let k = if cur.0[0][1] != ZERO {
        ctx.div(cur.0[0][0], cur.0[0][1])?
    } else {
        ctx.div(cur.0[1][0], cur.0[1][1])?
    };
    let p2 = Mat2([[ONE, ZERO], [ctx.neg(k), ONE]]);
    cur = congruate(ctx, &cur, &p2);
    p_acc = p_acc.mul(&p2, ctx);
    let b = cur.0[0][1];
    if b != ZERO {
        let binv = ctx.inv(b)?;
        let p3 = Mat2([[binv, ctx.neg(ctx.mul(binv, cur.0[1][1]))], [ZERO, ONE]]);
        p_acc = p_acc.mul(&p3, ctx);
        let rep = Mat2([[ZERO, ONE], [ZERO, ZERO]]);
        return Ok(PairCanon { label: PairLabel::new(Lemma::L23, 1), rep, p: p_acc, lambda: ONE });
    }
    let c = cur.0[1][1];
    debug_assert!(c != ZERO);
    match rel {
        PairRelation::Congruence => {
            let nu = if ctx.is_square(c) { ONE } else { ctx.eta()? };
            let x = ctx.sqrt(ctx.div(nu, c)?)?;
            let p4 = Mat2::from_diag(ONE, x);
            p_acc = p_acc.mul(&p4, ctx);
            Ok(PairCanon {
                label: PairLabel::with(Lemma::L23, 2, nu),
                rep: Mat2::from_diag(ZERO, nu),
                p: p_acc,
                lambda: ONE,
            })
        }
        PairRelation::Subcongruence => Ok(PairCanon {
            label: PairLabel::with(Lemma::L23, 2, ONE),
            rep: Mat2::from_diag(ZERO, ONE),
            p: p_acc,
            lambda: ctx.inv(c)?,
        }),
    }
}

fn gl2_f2(ctx: &PrimeContext) -> Vec<Mat2> {
    (0..16u32)
        .map(|i| Mat2::from_index(2, i))
        .filter(|m| m.det(ctx) != ZERO)
        .collect()
}

/// Lemma 2.2: exhaustive over the six invertible matrices.
fn invertible_f2(ctx: &PrimeContext, a: &Mat2) -> Result<PairCanon> {
    for t in 1..=3u8 {
        let label = PairLabel::new(Lemma::L22, t);
        let rep = label.representative(ctx)?;
        for p in gl2_f2(ctx) {
            if congruate(ctx, a, &p) == rep {
                return Ok(PairCanon { label, rep, p, lambda: ONE });
            }
        }
    }
    Err(Error::Internal(format!("F_2 matrix {a:?} matched no invertible class")))
}

/// Diagonalizes an invertible symmetric 2x2 by congruence.
fn diagonalize2(ctx: &PrimeContext, s: &Mat2) -> (Mat2, [Fp; 2]) {
    debug_assert!(s.is_symmetric());
    if s.0[0][0] != ZERO {
        let f = ctx.div(s.0[0][1], s.0[0][0]).unwrap();
        let p = Mat2([[ONE, ctx.neg(f)], [ZERO, ONE]]);
        let d = congruate(ctx, s, &p);
        (p, [d.0[0][0], d.0[1][1]])
    } else if s.0[1][1] != ZERO {
        let swap = Mat2([[ZERO, ONE], [ONE, ZERO]]);
        let s2 = congruate(ctx, s, &swap);
        let (p2, d) = diagonalize2(ctx, &s2);
        (swap.mul(&p2, ctx), d)
    } else {
        // [[0,b],[b,0]]: the basis e1+e2, e1-e2 diagonalizes (p odd here).
        let p = Mat2([[ONE, ONE], [ONE, ctx.neg(ONE)]]);
        let d = congruate(ctx, s, &p);
        (p, [d.0[0][0], d.0[1][1]])
    }
}

/// Lemma 2.1 reduction for invertible matrices over odd p.
fn invertible_odd(ctx: &PrimeContext, a: &Mat2, rel: PairRelation) -> Result<PairCanon> {
    let eta = ctx.eta()?;
    let half = ctx.inv(Fp(2))?;
    let skew = ctx.mul(half, ctx.sub(a.0[0][1], a.0[1][0]));
    if skew == ZERO {
        // Symmetric invertible: type (3), classes split by det mod squares.
        let (p0, d) = diagonalize2(ctx, a);
        let det_sq = ctx.is_square(ctx.mul(d[0], d[1]));
        let (p1, nu2) = if det_sq {
            if ctx.is_square(d[0]) {
                let p1 = Mat2::from_diag(
                    ctx.sqrt(ctx.inv(d[0])?)?,
                    ctx.sqrt(ctx.inv(d[1])?)?,
                );
                (p1, ONE)
            } else {
                // Both entries non-square: go through diag(eta,eta), then an
                // isotropic-style basis sends it to the identity.
                let pa = Mat2::from_diag(
                    ctx.sqrt(ctx.div(eta, d[0])?)?,
                    ctx.sqrt(ctx.div(eta, d[1])?)?,
                );
                let target = ctx.inv(eta)?;
                let (u0, u1) = solve_sum_of_squares(ctx, target)?;
                let pb = Mat2([[u0, ctx.neg(u1)], [u1, u0]]);
                (pa.mul(&pb, ctx), ONE)
            }
        } else {
            let (p_swap, dd) = if ctx.is_square(d[0]) {
                (Mat2::identity(), d)
            } else {
                (Mat2([[ZERO, ONE], [ONE, ZERO]]), [d[1], d[0]])
            };
            let scale = Mat2::from_diag(
                ctx.sqrt(ctx.inv(dd[0])?)?,
                ctx.sqrt(ctx.div(eta, dd[1])?)?,
            );
            (p_swap.mul(&scale, ctx), eta)
        };
        let p = p0.mul(&p1, ctx);
        return Ok(PairCanon {
            label: PairLabel::with(Lemma::L21, 3, nu2),
            rep: Mat2::from_diag(ONE, nu2),
            p,
            lambda: ONE,
        });
    }

    // Normalize the skew coefficient to 1, then classify the symmetric part
    // under the determinant-one stabilizer.
    let p0 = Mat2::from_diag(ONE, ctx.inv(skew)?);
    let a1 = congruate(ctx, a, &p0);
    let s1 = a1.add(&a1.transpose(), ctx).scale(half, ctx);
    debug_assert_eq!(ctx.sub(a1.0[0][1], a1.0[1][0]), ctx.el(2));
    if s1.is_zero() {
        return Ok(PairCanon {
            label: PairLabel::new(Lemma::L21, 1),
            rep: Mat2([[ZERO, ONE], [ctx.neg(ONE), ZERO]]),
            p: p0,
            lambda: ONE,
        });
    }
    let det_s = s1.det(ctx);
    if det_s == ZERO {
        // Rank-1 symmetric part mu * v v^t.
        let (mu, v) = if s1.0[0][0] != ZERO {
            (s1.0[0][0], [ONE, ctx.div(s1.0[0][1], s1.0[0][0])?])
        } else {
            (s1.0[1][1], [ctx.div(s1.0[0][1], s1.0[1][1])?, ONE])
        };
        // SL2 move putting the form on the first coordinate.
        let p1 = if v[0] != ZERO {
            Mat2([[ONE, ctx.neg(ctx.div(v[1], v[0])?)], [ZERO, ONE]])
        } else {
            Mat2([[ZERO, ctx.neg(ONE)], [ONE, ZERO]])
        };
        let vp = if v[0] != ZERO { v[0] } else { v[1] };
        let mu2 = ctx.mul(mu, ctx.mul(vp, vp));
        let (p2, lambda, nu1) = match rel {
            PairRelation::Congruence => {
                let nu1 = if ctx.is_square(mu2) { ONE } else { eta };
                let sc = ctx.sqrt(ctx.div(nu1, mu2)?)?;
                (Mat2::from_diag(sc, ctx.inv(sc)?), ONE, nu1)
            }
            PairRelation::Subcongruence => {
                (Mat2::from_diag(ONE, mu2), ctx.inv(mu2)?, ONE)
            }
        };
        let p = p0.mul(&p1, ctx).mul(&p2, ctx);
        return Ok(PairCanon {
            label: PairLabel::with(Lemma::L21, 2, nu1),
            rep: Mat2([[nu1, ONE], [ctx.neg(ONE), ZERO]]),
            p,
            lambda,
        });
    }
    // Rank-2 symmetric part: determinant r is a full invariant under the
    // det-1 stabilizer, and r != -1 because A is invertible.
    let r = det_s;
    if ctx.add(r, ONE) == ZERO {
        return Err(Error::Internal("invertible matrix with det(S)+1 = 0".into()));
    }
    let u = represent_one(ctx, &s1)?;
    let su = [
        ctx.add(ctx.mul(s1.0[0][0], u[0]), ctx.mul(s1.0[0][1], u[1])),
        ctx.add(ctx.mul(s1.0[1][0], u[0]), ctx.mul(s1.0[1][1], u[1])),
    ];
    let v = [ctx.neg(su[1]), su[0]];
    let d0 = ctx.sub(ctx.mul(u[0], v[1]), ctx.mul(u[1], v[0]));
    let d0inv = ctx.inv(d0)?;
    let p1 = Mat2([
        [u[0], ctx.mul(v[0], d0inv)],
        [u[1], ctx.mul(v[1], d0inv)],
    ]);
    let p = p0.mul(&p1, ctx);
    Ok(PairCanon {
        label: PairLabel::with(Lemma::L21, 4, r),
        rep: Mat2([[ONE, ONE], [ctx.neg(ONE), r]]),
        p,
        lambda: ONE,
    })
}

/// Deterministic vector with u^t S u = 1 for invertible symmetric S.
/// Completing the square keeps this near-constant time; every invertible
/// binary form over F_p represents 1.
fn represent_one(ctx: &PrimeContext, s: &Mat2) -> Result<[Fp; 2]> {
    if s.0[0][0] == ZERO && s.0[1][1] == ZERO {
        // [[0,b],[b,0]]: q(u) = 2b u0 u1.
        let b2 = ctx.mul(Fp(2), s.0[0][1]);
        return Ok([ctx.inv(b2)?, ONE]);
    }
    let swapped = s.0[0][0] == ZERO;
    let (a, b, det) = if swapped {
        (s.0[1][1], s.0[0][1], s.det(ctx))
    } else {
        (s.0[0][0], s.0[0][1], s.det(ctx))
    };
    // q = a (u0 + (b/a) u1)^2 + (det/a) u1^2.
    let boa = ctx.div(b, a)?;
    let doa = ctx.div(det, a)?;
    for u1 in ctx.elements() {
        let rest = ctx.sub(ONE, ctx.mul(doa, ctx.mul(u1, u1)));
        let wsq = ctx.div(rest, a)?;
        if ctx.is_square(wsq) {
            let w = ctx.sqrt(wsq)?;
            let u0 = ctx.sub(w, ctx.mul(boa, u1));
            return Ok(if swapped { [u1, u0] } else { [u0, u1] });
        }
    }
    Err(Error::Internal("binary form represents no 1".into()))
}

/// Least x with eta(x^2 + y^2) achievable; returns (x, y) with
/// x^2 + y^2 = target.
fn solve_sum_of_squares(ctx: &PrimeContext, target: Fp) -> Result<(Fp, Fp)> {
    for y in ctx.elements() {
        let rest = ctx.sub(target, ctx.mul(y, y));
        if ctx.is_square(rest) {
            return Ok((ctx.sqrt(rest)?, y));
        }
    }
    Err(Error::Internal("element is not a sum of two squares".into()))
}

const PAIR_VERIFY_MAX_P: u32 = 13;

/// Exhaustively partitions all 2x2 matrices into orbits of the relation and
/// checks the transversal: one member per orbit, orbit count equals the
/// enumerated label count, and `canonical_pair` agrees with the partition.
pub fn verify_pair_transversal(ctx: &PrimeContext, rel: PairRelation) -> Result<VerificationReport> {
    if ctx.p() > PAIR_VERIFY_MAX_P {
        return Err(Error::Infeasible(format!(
            "pair transversal verification capped at p <= {PAIR_VERIFY_MAX_P}, got {}",
            ctx.p()
        )));
    }
    let start = Instant::now();
    let p = ctx.p();
    let n = (p as usize).pow(4);
    let mut uf = UnionFind::new(n);

    let mut gens: Vec<Mat2> = Vec::new();
    for c in ctx.units() {
        gens.push(Mat2([[ONE, c], [ZERO, ONE]]));
        gens.push(Mat2([[ONE, ZERO], [c, ONE]]));
        if c != ONE {
            gens.push(Mat2::from_diag(c, ONE));
            gens.push(Mat2::from_diag(ONE, c));
        }
    }
    let lambdas: Vec<Fp> = match rel {
        PairRelation::Congruence => vec![ONE],
        PairRelation::Subcongruence => ctx.units().collect(),
    };
    for idx in 0..n as u32 {
        let a = Mat2::from_index(p, idx);
        for g in &gens {
            for &l in &lambdas {
                let b = congruate(ctx, &a, g).scale(l, ctx);
                uf.union(idx as usize, b.index(p) as usize);
            }
        }
        if rel == PairRelation::Subcongruence {
            for &l in &lambdas {
                uf.union(idx as usize, a.scale(l, ctx).index(p) as usize);
            }
        }
    }

    let mut orbit_members: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for idx in 0..n {
        orbit_members.entry(uf.find(idx)).or_default().push(idx as u32);
    }
    let mut violations = Vec::new();

    let transversal = enumerate_pair_transversal(ctx, rel);
    let mut rep_root: BTreeMap<usize, Vec<PairLabel>> = BTreeMap::new();
    for label in &transversal {
        let rep = label.representative(ctx)?;
        rep_root
            .entry(uf.find(rep.index(p) as usize))
            .or_default()
            .push(*label);
    }
    for (root, members) in &orbit_members {
        match rep_root.get(root).map(Vec::len).unwrap_or(0) {
            1 => {}
            0 => violations.push(Violation {
                matrix: Mat2::from_index(p, members[0]).to_literal(),
                detail: "orbit contains no transversal member".into(),
            }),
            k => violations.push(Violation {
                matrix: Mat2::from_index(p, members[0]).to_literal(),
                detail: format!("orbit contains {k} transversal members"),
            }),
        }
    }
    // canonical_pair must land every matrix in its own orbit, on the orbit's
    // transversal member.
    for idx in 0..n as u32 {
        let a = Mat2::from_index(p, idx);
        let canon = canonical_pair(ctx, &a, rel)?;
        if uf.find(canon.rep.index(p) as usize) != uf.find(idx as usize) {
            violations.push(Violation {
                matrix: a.to_literal(),
                detail: format!("canonical rep {:?} escapes the orbit", canon.rep),
            });
        }
    }

    // Deterministic order: by least member.
    let mut sized: Vec<(u32, usize)> = orbit_members
        .values()
        .map(|m| (*m.iter().min().unwrap(), m.len()))
        .collect();
    sized.sort_unstable();
    Ok(VerificationReport {
        orbit_count: sized.len(),
        orbit_sizes: sized.into_iter().map(|(_, s)| s).collect(),
        violations,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Plain union-find with path halving.
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so the representative is deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn zero_matrix_is_fixed() {
        for p in [2u32, 3, 5] {
            let c = ctx(p);
            let canon = canonical_pair(&c, &Mat2::zero(), PairRelation::Congruence).unwrap();
            assert_eq!(canon.label, PairLabel::new(Lemma::L23, 3));
            assert_eq!(canon.p, Mat2::identity());
            assert_eq!(canon.lambda, ONE);
        }
    }

    #[test]
    fn skew_type_example() {
        let f5 = ctx(5);
        let a = Mat2::from_i64(&f5, [[0, 1], [4, 0]]);
        let canon = canonical_pair(&f5, &a, PairRelation::Congruence).unwrap();
        assert_eq!(canon.label, PairLabel::new(Lemma::L21, 1));
        assert_eq!(canon.rep, Mat2::from_i64(&f5, [[0, 1], [-1, 0]]));
    }

    #[test]
    fn diag_scaling_example() {
        // diag(1,3) over F_5: det 3 is a non-square, so nu2 = eta = 2.
        let f5 = ctx(5);
        let a = Mat2::from_diag(ONE, Fp(3));
        let canon = canonical_pair(&f5, &a, PairRelation::Congruence).unwrap();
        assert_eq!(canon.label, PairLabel::with(Lemma::L21, 3, Fp(2)));
    }

    #[test]
    fn idempotent_on_representatives() {
        for p in [2u32, 3, 5, 7] {
            let c = ctx(p);
            for rel in [PairRelation::Congruence, PairRelation::Subcongruence] {
                for label in enumerate_pair_transversal(&c, rel) {
                    let rep = label.representative(&c).unwrap();
                    let canon = canonical_pair(&c, &rep, rel).unwrap();
                    assert_eq!(canon.label, label, "p={p} {label:?}");
                    assert_eq!(canon.rep, rep);
                }
            }
        }
    }

    #[test]
    fn orbit_invariance_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for p in [3u32, 5, 7, 11] {
            let c = ctx(p);
            for rel in [PairRelation::Congruence, PairRelation::Subcongruence] {
                for _ in 0..1000 {
                    let a = Mat2::from_index(p, rng.gen_range(0..(p * p * p * p)));
                    let q = loop {
                        let q = Mat2::from_index(p, rng.gen_range(0..(p * p * p * p)));
                        if q.det(&c) != ZERO {
                            break q;
                        }
                    };
                    let lambda = match rel {
                        PairRelation::Congruence => ONE,
                        PairRelation::Subcongruence => Fp(rng.gen_range(1..p)),
                    };
                    let b = congruate(&c, &a, &q).scale(lambda, &c);
                    let ca = canonical_pair(&c, &a, rel).unwrap();
                    let cb = canonical_pair(&c, &b, rel).unwrap();
                    assert_eq!(ca.label, cb.label);
                    assert_eq!(ca.rep, cb.rep);
                }
            }
        }
    }

    #[test]
    fn rank_and_symmetry_preserved() {
        let f7 = ctx(7);
        for idx in 0..2401u32 {
            let a = Mat2::from_index(7, idx);
            let canon = canonical_pair(&f7, &a, PairRelation::Congruence).unwrap();
            assert_eq!(a.rank(&f7), canon.rep.rank(&f7));
            assert_eq!(a.is_symmetric(), canon.rep.is_symmetric());
        }
    }

    #[test]
    fn f2_invertible_three_classes() {
        let f2 = ctx(2);
        let report = verify_pair_transversal(&f2, PairRelation::Congruence).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        // 3 invertible classes + [[0,1],[0,0]] + diag(0,1) + 0.
        assert_eq!(report.orbit_count, 6);
    }

    #[test]
    fn f3_singular_nonzero_classes() {
        let f3 = ctx(3);
        let report = verify_pair_transversal(&f3, PairRelation::Congruence).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        // Count singular-nonzero orbits through canonical labels.
        let mut labels = std::collections::BTreeSet::new();
        for idx in 0..81u32 {
            let a = Mat2::from_index(3, idx);
            if a.det(&f3) == ZERO && !a.is_zero() {
                labels.insert(canonical_pair(&f3, &a, PairRelation::Congruence).unwrap().label);
            }
        }
        assert_eq!(labels.len(), 3);
    }

    #[test]
    fn f5_invertible_congruence_count() {
        let f5 = ctx(5);
        // 1 + 2 + 2 + (p-2) = 8 invertible classes at p = 5.
        let mut labels = std::collections::BTreeSet::new();
        for idx in 0..625u32 {
            let a = Mat2::from_index(5, idx);
            if a.det(&f5) != ZERO {
                labels.insert(canonical_pair(&f5, &a, PairRelation::Congruence).unwrap().label);
            }
        }
        assert_eq!(labels.len(), 8);
        let report = verify_pair_transversal(&f5, PairRelation::Congruence).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.orbit_count, 8 + 4);
    }

    #[test]
    fn feasibility_cap() {
        let c = ctx(17);
        assert!(matches!(
            verify_pair_transversal(&c, PairRelation::Congruence),
            Err(Error::Infeasible(_))
        ));
    }
}
