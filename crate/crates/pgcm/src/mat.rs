//! Dense 2x2 and 3x3 matrices over F_p.
//!
//! Fixed-size value types only; everything the classification needs is
//! multiply, transpose, determinant, rank and the 3x3 adjugate. Matrices do
//! not carry their context, so every operation takes the [`PrimeContext`].

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeContext, ONE, ZERO};
use std::fmt;

#[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
pub struct Mat2(pub [[Fp; 2]; 2]);

#[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
pub struct Mat3(pub [[Fp; 3]; 3]);

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_literal())
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_literal())
    }
}

macro_rules! common_impl {
    ($ty:ident, $n:literal) => {
        impl $ty {
            pub const N: usize = $n;

            pub fn zero() -> Self {
                Self::default()
            }

            pub fn identity() -> Self {
                let mut m = Self::default();
                for i in 0..$n {
                    m.0[i][i] = ONE;
                }
                m
            }

            /// Builds a matrix from signed entries, reducing mod p. The
            /// tables write -1 for p-1.
            pub fn from_i64(ctx: &PrimeContext, rows: [[i64; $n]; $n]) -> Self {
                let mut m = Self::default();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = ctx.el(rows[i][j]);
                    }
                }
                m
            }

            pub fn transpose(&self) -> Self {
                let mut m = Self::default();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = self.0[j][i];
                    }
                }
                m
            }

            pub fn mul(&self, other: &Self, ctx: &PrimeContext) -> Self {
                let mut m = Self::default();
                for i in 0..$n {
                    for j in 0..$n {
                        let mut acc = ZERO;
                        for k in 0..$n {
                            acc = ctx.add(acc, ctx.mul(self.0[i][k], other.0[k][j]));
                        }
                        m.0[i][j] = acc;
                    }
                }
                m
            }

            pub fn add(&self, other: &Self, ctx: &PrimeContext) -> Self {
                let mut m = Self::default();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = ctx.add(self.0[i][j], other.0[i][j]);
                    }
                }
                m
            }

            pub fn sub(&self, other: &Self, ctx: &PrimeContext) -> Self {
                let mut m = Self::default();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = ctx.sub(self.0[i][j], other.0[i][j]);
                    }
                }
                m
            }

            pub fn scale(&self, c: Fp, ctx: &PrimeContext) -> Self {
                let mut m = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = ctx.mul(c, m.0[i][j]);
                    }
                }
                m
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|r| r.iter().all(|e| *e == ZERO))
            }

            pub fn is_symmetric(&self) -> bool {
                *self == self.transpose()
            }

            /// Rank by Gaussian elimination with first-nonzero pivoting in
            /// deterministic column order.
            pub fn rank(&self, ctx: &PrimeContext) -> usize {
                let mut a = self.0;
                let mut rank = 0usize;
                for col in 0..$n {
                    let pivot = (rank..$n).find(|&r| a[r][col] != ZERO);
                    let Some(pr) = pivot else { continue };
                    a.swap(rank, pr);
                    let inv = ctx.inv(a[rank][col]).expect("pivot nonzero");
                    for r in (rank + 1)..$n {
                        if a[r][col] != ZERO {
                            let f = ctx.mul(a[r][col], inv);
                            for c in col..$n {
                                a[r][c] = ctx.sub(a[r][c], ctx.mul(f, a[rank][c]));
                            }
                        }
                    }
                    rank += 1;
                    if rank == $n {
                        break;
                    }
                }
                rank
            }

            pub fn is_invertible(&self, ctx: &PrimeContext) -> bool {
                self.det(ctx) != ZERO
            }

            /// Row-major literal: rows separated by `;`, entries by `,`.
            pub fn to_literal(&self) -> String {
                self.0
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| e.0.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect::<Vec<_>>()
                    .join(";")
            }

            pub fn parse(ctx: &PrimeContext, s: &str) -> Result<Self> {
                let rows: Vec<&str> = s.trim().split(';').collect();
                if rows.len() != $n {
                    return Err(Error::Parse(format!(
                        "expected {} rows separated by ';', got {}",
                        $n,
                        rows.len()
                    )));
                }
                let mut m = Self::default();
                for (i, row) in rows.iter().enumerate() {
                    let cells: Vec<&str> = row.split(',').collect();
                    if cells.len() != $n {
                        return Err(Error::Parse(format!(
                            "row {} has {} entries, expected {}",
                            i + 1,
                            cells.len(),
                            $n
                        )));
                    }
                    for (j, cell) in cells.iter().enumerate() {
                        let v: i64 = cell
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad entry {cell:?}")))?;
                        m.0[i][j] = ctx.el(v);
                    }
                }
                Ok(m)
            }
        }
    };
}

common_impl!(Mat2, 2);
common_impl!(Mat3, 3);

impl Mat2 {
    pub fn det(&self, ctx: &PrimeContext) -> Fp {
        let a = &self.0;
        ctx.sub(ctx.mul(a[0][0], a[1][1]), ctx.mul(a[0][1], a[1][0]))
    }

    pub fn from_diag(d0: Fp, d1: Fp) -> Self {
        let mut m = Self::default();
        m.0[0][0] = d0;
        m.0[1][1] = d1;
        m
    }

    /// Row-major index in `[0, p^4)`.
    pub fn index(&self, p: u32) -> u32 {
        let mut idx = 0u32;
        for i in 0..2 {
            for j in 0..2 {
                idx = idx * p + self.0[i][j].0;
            }
        }
        idx
    }

    pub fn from_index(p: u32, mut idx: u32) -> Mat2 {
        let mut m = Mat2::default();
        for i in (0..2).rev() {
            for j in (0..2).rev() {
                m.0[i][j] = Fp(idx % p);
                idx /= p;
            }
        }
        m
    }
}

impl Mat3 {
    pub fn det(&self, ctx: &PrimeContext) -> Fp {
        let a = &self.0;
        let mut acc = ZERO;
        // Cofactor expansion along the first row.
        for j in 0..3 {
            let (c1, c2) = ((j + 1) % 3, (j + 2) % 3);
            let minor = ctx.sub(
                ctx.mul(a[1][c1], a[2][c2]),
                ctx.mul(a[1][c2], a[2][c1]),
            );
            acc = ctx.add(acc, ctx.mul(a[0][j], minor));
        }
        acc
    }

    /// Adjugate: `A * adj(A) = det(A) * I` for every A, singular included.
    pub fn adjugate(&self, ctx: &PrimeContext) -> Mat3 {
        let a = &self.0;
        let mut m = Mat3::default();
        for i in 0..3 {
            for j in 0..3 {
                let (r1, r2) = ((j + 1) % 3, (j + 2) % 3);
                let (c1, c2) = ((i + 1) % 3, (i + 2) % 3);
                // Cofactor C_{ji} without sign bookkeeping: the cyclic index
                // choice bakes the sign in.
                m.0[i][j] = ctx.sub(
                    ctx.mul(a[r1][c1], a[r2][c2]),
                    ctx.mul(a[r1][c2], a[r2][c1]),
                );
            }
        }
        m
    }

    /// Inverse via adjugate; `None` when singular.
    pub fn inverse(&self, ctx: &PrimeContext) -> Option<Mat3> {
        let d = self.det(ctx);
        if d == ZERO {
            return None;
        }
        let dinv = ctx.inv(d).ok()?;
        Some(self.adjugate(ctx).scale(dinv, ctx))
    }

    pub fn from_diag(d: [Fp; 3]) -> Self {
        let mut m = Self::default();
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    /// Top-left 2x2 block.
    pub fn top_left(&self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[0][1]], [self.0[1][0], self.0[1][1]]])
    }

    /// Bottom-right 2x2 block.
    pub fn bottom_right(&self) -> Mat2 {
        Mat2([[self.0[1][1], self.0[1][2]], [self.0[2][1], self.0[2][2]]])
    }

    /// The corner block on rows/columns {1,3}.
    pub fn corner(&self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[0][2]], [self.0[2][0], self.0[2][2]]])
    }

    /// Row-major index in `[0, p^9)`; inverse of [`Mat3::from_index`].
    pub fn index(&self, p: u32) -> u32 {
        let mut idx = 0u32;
        for i in 0..3 {
            for j in 0..3 {
                idx = idx * p + self.0[i][j].0;
            }
        }
        idx
    }

    pub fn from_index(p: u32, mut idx: u32) -> Mat3 {
        let mut m = Mat3::default();
        for i in (0..3).rev() {
            for j in (0..3).rev() {
                m.0[i][j] = Fp(idx % p);
                idx /= p;
            }
        }
        m
    }
}

/// Number of 3x3 matrices over F_p, i.e. p^9.
pub fn space_size(p: u32) -> u64 {
    (p as u64).pow(9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let f5 = ctx(5);
        let a = Mat3::from_i64(&f5, [[1, 2, 3], [4, 0, 1], [2, 2, 4]]);
        assert_eq!(Mat3::identity().mul(&a, &f5), a);
        assert_eq!(a.mul(&Mat3::identity(), &f5), a);
    }

    #[test]
    fn permutation_square() {
        let f3 = ctx(3);
        let p = Mat3::from_i64(&f3, [[0, 1, 0], [0, 0, 1], [1, 0, 0]]);
        let p2 = Mat3::from_i64(&f3, [[0, 0, 1], [1, 0, 0], [0, 1, 0]]);
        assert_eq!(p.mul(&p, &f3), p2);
    }

    // Independent schoolbook product used as the oracle for mul.
    fn schoolbook(ctx: &PrimeContext, a: &Mat3, b: &Mat3) -> Mat3 {
        let mut out = [[0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc: i64 = 0;
                for k in 0..3 {
                    acc += a.0[i][k].0 as i64 * b.0[k][j].0 as i64;
                }
                out[i][j] = acc;
            }
        }
        Mat3::from_i64(ctx, out)
    }

    #[test]
    fn mul_matches_schoolbook_oracle() {
        let f5 = ctx(5);
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 5) as i64
        };
        for _ in 0..200 {
            let a = Mat3::from_i64(&f5, std::array::from_fn(|_| std::array::from_fn(|_| next())));
            let b = Mat3::from_i64(&f5, std::array::from_fn(|_| std::array::from_fn(|_| next())));
            assert_eq!(a.mul(&b, &f5), schoolbook(&f5, &a, &b));
        }
    }

    #[test]
    fn det_rank_basics() {
        let f7 = ctx(7);
        assert_eq!(Mat3::identity().det(&f7), ONE);
        assert_eq!(Mat3::identity().rank(&f7), 3);
        // (B18) with t != 0 has rank 2.
        for t in 1..7 {
            let b18 = Mat3::from_i64(&f7, [[0, 0, 0], [0, 0, 1], [0, t, 0]]);
            assert_eq!(b18.rank(&f7), 2);
        }
    }

    // Row-reduction oracle with explicit pivot tracking, independent of
    // Mat3::rank's elimination order.
    fn rank_oracle(ctx: &PrimeContext, m: &Mat3) -> usize {
        let mut rows: Vec<[Fp; 3]> = m.0.to_vec();
        let mut rank = 0;
        for col in 0..3 {
            if let Some(r) = (rank..rows.len()).find(|&r| rows[r][col] != ZERO) {
                rows.swap(rank, r);
                let inv = ctx.inv(rows[rank][col]).unwrap();
                for rr in 0..rows.len() {
                    if rr != rank && rows[rr][col] != ZERO {
                        let f = ctx.mul(rows[rr][col], inv);
                        for c in 0..3 {
                            rows[rr][c] = ctx.sub(rows[rr][c], ctx.mul(f, rows[rank][c]));
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_matches_elimination_oracle() {
        let f3 = ctx(3);
        for idx in (0..super::space_size(3) as u32).step_by(197) {
            let m = Mat3::from_index(3, idx);
            assert_eq!(m.rank(&f3), rank_oracle(&f3, &m));
        }
    }

    #[test]
    fn adjugate_identity_and_diag() {
        let f5 = ctx(5);
        assert_eq!(Mat3::identity().adjugate(&f5), Mat3::identity());
        let d = Mat3::from_diag([Fp(1), Fp(2), Fp(3)]);
        let adj = d.adjugate(&f5);
        assert_eq!(adj, Mat3::from_diag([Fp(1), Fp(3), Fp(2)]));
    }

    #[test]
    fn adjugate_law_exhaustive_f2_and_sampled() {
        let f2 = ctx(2);
        for idx in 0..512u32 {
            let a = Mat3::from_index(2, idx);
            let prod = a.mul(&a.adjugate(&f2), &f2);
            let want = Mat3::identity().scale(a.det(&f2), &f2);
            assert_eq!(prod, want);
            assert_eq!(a.adjugate(&f2).mul(&a, &f2), want);
        }
        for p in [3u32, 5, 7] {
            let c = ctx(p);
            let step = (space_size(p) / 3000).max(1) as usize;
            for idx in (0..space_size(p) as u64).step_by(step) {
                let a = Mat3::from_index(p, idx as u32);
                let want = Mat3::identity().scale(a.det(&c), &c);
                assert_eq!(a.mul(&a.adjugate(&c), &c), want);
            }
        }
    }

    #[test]
    fn adjugate_vs_elimination_inverse() {
        let f7 = ctx(7);
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(99);
            ((state >> 33) % 7) as i64
        };
        let mut seen = 0;
        while seen < 100 {
            let a = Mat3::from_i64(&f7, std::array::from_fn(|_| std::array::from_fn(|_| next())));
            let d = a.det(&f7);
            if d == ZERO {
                continue;
            }
            seen += 1;
            let inv = a.inverse(&f7).unwrap();
            assert_eq!(a.mul(&inv, &f7), Mat3::identity());
            assert_eq!(a.adjugate(&f7), inv.scale(d, &f7));
        }
    }

    #[test]
    fn det_multiplicative_transpose_involutive() {
        let f5 = ctx(5);
        let mut state = 17u64;
        let mut next = || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            ((state >> 33) % 5) as i64
        };
        for _ in 0..300 {
            let a = Mat3::from_i64(&f5, std::array::from_fn(|_| std::array::from_fn(|_| next())));
            let b = Mat3::from_i64(&f5, std::array::from_fn(|_| std::array::from_fn(|_| next())));
            assert_eq!(a.mul(&b, &f5).det(&f5), f5.mul(a.det(&f5), b.det(&f5)));
            assert_eq!(a.transpose().transpose(), a);
            assert_eq!(a.transpose().det(&f5), a.det(&f5));
            if a.is_invertible(&f5) && b.is_invertible(&f5) {
                let c = a.mul(&b, &f5);
                assert_eq!(c.rank(&f5), 3);
            }
        }
    }

    #[test]
    fn rank_invariant_under_invertible_factors() {
        let f3 = ctx(3);
        let p = Mat3::from_i64(&f3, [[1, 1, 0], [0, 1, 0], [2, 0, 1]]);
        let q = Mat3::from_i64(&f3, [[0, 1, 0], [1, 0, 0], [0, 2, 1]]);
        assert!(p.is_invertible(&f3) && q.is_invertible(&f3));
        for idx in (0..space_size(3) as u32).step_by(311) {
            let a = Mat3::from_index(3, idx);
            let b = p.mul(&a, &f3).mul(&q, &f3);
            assert_eq!(a.rank(&f3), b.rank(&f3));
        }
    }

    #[test]
    fn literal_round_trip() {
        let f3 = ctx(3);
        let m = Mat3::parse(&f3, "0,0,0;0,0,1;0,2,0").unwrap();
        assert_eq!(m.to_literal(), "0,0,0;0,0,1;0,2,0");
        assert_eq!(m.0[2][1], Fp(2));
        assert!(Mat3::parse(&f3, "1,2;3,4").is_err());
        assert!(Mat3::parse(&f3, "1,2,x;0,0,0;0,0,0").is_err());
        // Negative entries reduce mod p.
        let n = Mat3::parse(&f3, "-1,0,0;0,0,0;0,0,0").unwrap();
        assert_eq!(n.0[0][0], Fp(2));
    }

    #[test]
    fn index_round_trip() {
        for p in [2u32, 3, 5] {
            for idx in (0..space_size(p) as u32).step_by(97) {
                assert_eq!(Mat3::from_index(p, idx).index(p), idx);
            }
        }
    }
}
