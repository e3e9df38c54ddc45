//! Textual presentations for groups in the hypothesis class.
//!
//! Grammar (statements separated by `;` or newlines):
//!
//! ```text
//! p=2  m=1,1,1
//! [a2,a3] = x
//! [a3,a1] = a1^2 * a2^2
//! a3^2 = 1
//! ```
//!
//! Atoms are `a1, a2, a3, x, y, z`; a power `ai^n` may appear in a relation
//! only when it is central, i.e. p^mi divides n. Commutator left-hand sides
//! `[ai,aj]` may carry an exponent. Chained equalities (`[a1,a2]=a1^2=a2^2`)
//! are allowed. Relations are solved as linear equations over F_p for the
//! rows of the characteristic matrix; the presentation must pin all three
//! rows uniquely.

use super::GroupSpec;
use crate::action::ExponentType;
use crate::error::{Error, Result};
use crate::field::{Fp, PrimeContext, ZERO};
use crate::mat::Mat3;

/// Value of a word in G': a constant vector in the (x, y, z) basis plus a
/// linear combination of the three unknown matrix rows.
#[derive(Copy, Clone, Debug)]
struct LinExpr {
    con: [Fp; 3],
    coef: [Fp; 3],
}

impl LinExpr {
    fn zero() -> Self {
        LinExpr { con: [ZERO; 3], coef: [ZERO; 3] }
    }

    fn add(&mut self, ctx: &PrimeContext, other: &LinExpr) {
        for k in 0..3 {
            self.con[k] = ctx.add(self.con[k], other.con[k]);
            self.coef[k] = ctx.add(self.coef[k], other.coef[k]);
        }
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Presentation(msg.into())
}

struct Parser {
    ctx: PrimeContext,
    pm: [u64; 3],
}

impl Parser {
    /// `ai^n` with p^mi | n contributes (n / p^mi) * row_i.
    fn gen_power(&self, idx: usize, n: u64) -> Result<LinExpr> {
        let pm = self.pm[idx];
        if n % pm != 0 {
            return Err(parse_err(format!(
                "a{}^{} is not central (needs exponent divisible by {})",
                idx + 1,
                n,
                pm
            )));
        }
        let k = self.ctx.el((n / pm) as i64);
        let mut e = LinExpr::zero();
        e.coef[idx] = k;
        Ok(e)
    }

    fn central(&self, idx: usize, n: i64) -> LinExpr {
        let mut e = LinExpr::zero();
        e.con[idx] = self.ctx.el(n);
        e
    }

    fn commutator(&self, left: &str, right: &str) -> Result<LinExpr> {
        let sides = [left.trim(), right.trim()];
        let idx = |s: &str| -> Result<usize> {
            match s {
                "a1" => Ok(0),
                "a2" => Ok(1),
                "a3" => Ok(2),
                _ => Err(parse_err(format!("bad commutator entry {s:?}"))),
            }
        };
        let (i, j) = (idx(sides[0])?, idx(sides[1])?);
        // x = [a2,a3], y = [a3,a1], z = [a1,a2]; swapped arguments invert.
        let (slot, sign) = match (i, j) {
            (1, 2) => (0, 1),
            (2, 1) => (0, -1),
            (2, 0) => (1, 1),
            (0, 2) => (1, -1),
            (0, 1) => (2, 1),
            (1, 0) => (2, -1),
            _ => return Err(parse_err(format!("commutator [{left},{right}] is trivial"))),
        };
        Ok(self.central(slot, sign))
    }

    fn factor(&self, s: &str) -> Result<LinExpr> {
        let s = s.trim();
        if s == "1" {
            return Ok(LinExpr::zero());
        }
        let (atom, exp) = match s.find('^') {
            Some(i) => {
                let n: i64 = s[i + 1..]
                    .parse()
                    .map_err(|_| parse_err(format!("bad exponent in {s:?}")))?;
                (&s[..i], n)
            }
            None => (s, 1),
        };
        if let Some(inner) = atom.strip_prefix('[').and_then(|a| a.strip_suffix(']')) {
            let (l, r) = inner
                .split_once(',')
                .ok_or_else(|| parse_err(format!("bad commutator {atom:?}")))?;
            let base = self.commutator(l, r)?;
            let mut out = LinExpr::zero();
            let k = self.ctx.el(exp);
            for t in 0..3 {
                out.con[t] = self.ctx.mul(base.con[t], k);
            }
            return Ok(out);
        }
        match atom {
            "x" => Ok(self.central(0, exp)),
            "y" => Ok(self.central(1, exp)),
            "z" => Ok(self.central(2, exp)),
            "a1" | "a2" | "a3" => {
                if exp < 0 {
                    return Err(parse_err("negative generator powers are not supported"));
                }
                let idx = (atom.as_bytes()[1] - b'1') as usize;
                self.gen_power(idx, exp as u64)
            }
            _ => Err(parse_err(format!("unknown atom {atom:?}"))),
        }
    }

    fn word(&self, s: &str) -> Result<LinExpr> {
        let mut out = LinExpr::zero();
        // Factors are separated by '*' or whitespace; commutator atoms keep
        // their bracket-internal comma.
        let normalized = s.replace('*', " ");
        for part in normalized.split_whitespace() {
            out.add(&self.ctx, &self.factor(part)?);
        }
        Ok(out)
    }
}

/// Parses a presentation into the concrete group it defines.
pub fn parse_presentation(input: &str) -> Result<GroupSpec> {
    let mut p: Option<u32> = None;
    let mut m: Option<[u32; 3]> = None;
    let mut relations: Vec<String> = Vec::new();
    for stmt in input.split([';', '\n']) {
        let stmt = stmt.trim();
        if stmt.is_empty() || stmt.starts_with('#') {
            continue;
        }
        if let Some(v) = stmt.strip_prefix("p=") {
            p = Some(v.trim().parse().map_err(|_| parse_err("bad p"))?);
        } else if let Some(v) = stmt.strip_prefix("m=") {
            let parts: Vec<u32> = v
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| parse_err("bad m")))
                .collect::<Result<_>>()?;
            if parts.len() != 3 {
                return Err(parse_err("m needs three entries"));
            }
            m = Some([parts[0], parts[1], parts[2]]);
        } else {
            relations.push(stmt.to_string());
        }
    }
    let p = p.ok_or_else(|| parse_err("missing p=<prime>"))?;
    let m = m.ok_or_else(|| parse_err("missing m=<m1>,<m2>,<m3>"))?;
    let ctx = PrimeContext::new(p)?;
    let etype = ExponentType::new(m[0], m[1], m[2])?;
    let pm = [
        (p as u64).pow(m[0]),
        (p as u64).pow(m[1]),
        (p as u64).pow(m[2]),
    ];
    let parser = Parser { ctx, pm };

    // Collect linear equations over the nine row unknowns w[i][t]:
    // columns 3*i + t.
    let mut rows: Vec<[Fp; 10]> = Vec::new();
    for rel in &relations {
        let sides: Vec<LinExpr> =
            rel.split('=').map(|s| parser.word(s)).collect::<Result<_>>()?;
        if sides.len() < 2 {
            return Err(parse_err(format!("relation {rel:?} has no '='")));
        }
        for pair in sides.windows(2) {
            let (l, r) = (&pair[0], &pair[1]);
            for t in 0..3 {
                let mut row = [ZERO; 10];
                for i in 0..3 {
                    row[3 * i + t] = ctx.sub(r.coef[i], l.coef[i]);
                }
                row[9] = ctx.sub(l.con[t], r.con[t]);
                rows.push(row);
            }
        }
    }

    // Gaussian elimination over F_p; the system must be uniquely solvable.
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut mat = rows;
    let mut rank = 0usize;
    for col in 0..9 {
        let Some(pr) = (rank..mat.len()).find(|&r| mat[r][col] != ZERO) else {
            continue;
        };
        mat.swap(rank, pr);
        let inv = ctx.inv(mat[rank][col])?;
        for c in 0..10 {
            mat[rank][c] = ctx.mul(mat[rank][c], inv);
        }
        for r in 0..mat.len() {
            if r != rank && mat[r][col] != ZERO {
                let f = mat[r][col];
                for c in 0..10 {
                    mat[r][c] = ctx.sub(mat[r][c], ctx.mul(f, mat[rank][c]));
                }
            }
        }
        pivot_rows.push(rank);
        pivot_cols.push(col);
        rank += 1;
    }
    for r in rank..mat.len() {
        if mat[r][9] != ZERO {
            return Err(parse_err("relations are inconsistent"));
        }
    }
    if rank != 9 {
        return Err(parse_err(format!(
            "relations determine only {rank} of 9 matrix entries"
        )));
    }
    let mut w = Mat3::zero();
    for (r, col) in pivot_rows.iter().zip(&pivot_cols) {
        w.0[col / 3][col % 3] = mat[*r][9];
    }
    GroupSpec::new(ctx, etype, w)
}

/// The ten order-64 reference presentations, transcribed relation-for-
/// relation (a = a1, b = a2, c = a3; the extra letters are the commutators
/// x, y, z themselves).
pub const S_PRESENTATIONS: [&str; 10] = [
    "p=2; m=1,1,1; a1^2=1; a2^2=1; a3^2=1",
    "p=2; m=1,1,1; a1^2=1; a2^2=1; [a1,a2]=a3^2",
    "p=2; m=1,1,1; [a3,a1]=a1^2*a2^2; [a1,a2]=a2^2; a3^2=1",
    "p=2; m=1,1,1; [a3,a1]=a1^2*a2^2; [a1,a2]=a1^2; a3^2=1",
    "p=2; m=1,1,1; [a1,a2]=a1^2=a2^2; a3^2=1",
    "p=2; m=1,1,1; [a1,a2]=a1^2=a2^2=a3^2",
    "p=2; m=1,1,1; [a3,a1]=a1^2; [a1,a2]=a3^2; a2^2=1",
    "p=2; m=1,1,1; [a3,a1]=a1^2; [a1,a2]=a2^2=a3^2",
    "p=2; m=1,1,1; [a3,a1]=a1^2*a2^2; [a1,a2]=a1^2=a3^2",
    "p=2; m=1,1,1; [a2,a3]=a1^2*a2^2; [a3,a1]=a2^2*a3^2; [a1,a2]=a3^2",
];

/// Parsed reference groups for the order-64 classification.
pub fn s_reference_specs() -> Result<Vec<GroupSpec>> {
    S_PRESENTATIONS.iter().map(|s| parse_presentation(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ONE;

    #[test]
    fn tiny_presentations_solve_to_expected_matrices() {
        let specs = s_reference_specs().unwrap();
        let expect: [[[i64; 3]; 3]; 10] = [
            [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 0, 0], [0, 0, 1]],
            [[0, 1, 1], [0, 0, 1], [0, 0, 0]],
            [[0, 0, 1], [0, 1, 1], [0, 0, 0]],
            [[0, 0, 1], [0, 0, 1], [0, 0, 0]],
            [[0, 0, 1], [0, 0, 1], [0, 0, 1]],
            [[0, 1, 0], [0, 0, 0], [0, 0, 1]],
            [[0, 1, 0], [0, 0, 1], [0, 0, 1]],
            [[0, 0, 1], [0, 1, 1], [0, 0, 1]],
            [[1, 1, 1], [0, 1, 1], [0, 0, 1]],
        ];
        let ctx = PrimeContext::new(2).unwrap();
        for (k, spec) in specs.iter().enumerate() {
            assert_eq!(spec.w, Mat3::from_i64(&ctx, expect[k]), "S{}", k + 1);
        }
    }

    #[test]
    fn grammar_example_with_higher_exponents() {
        // Type-(1) metahamiltonian group at p = 3, m = (2,1,1): the relation
        // [a1,a3] = a2^(eta*p) resolves through the inverse-commutator sign.
        let spec = parse_presentation(
            "p=3; m=2,1,1\n[a2,a3]=a1^9\n[a1,a3]=a2^6\n[a1,a2]=a3^3",
        )
        .unwrap();
        assert_eq!(spec.w, Mat3::identity());
        let report = super::super::verify_consistency(&spec).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_presentation("m=1,1,1; a1^2=1").is_err());
        assert!(parse_presentation("p=2; m=1,1,1; a1^3=1").is_err());
        assert!(parse_presentation("p=2; m=1,1,1; a1^2=q").is_err());
        // Underdetermined: no relation for a3^2.
        assert!(parse_presentation("p=2; m=1,1,1; a1^2=1; a2^2=1").is_err());
        // Inconsistent.
        assert!(parse_presentation(
            "p=2; m=1,1,1; a1^2=1; a1^2=x; a2^2=1; a3^2=1"
        )
        .is_err());
    }

    #[test]
    fn chained_equalities() {
        let spec =
            parse_presentation("p=2; m=1,1,1; [a1,a2]=a1^2=a2^2=a3^2").unwrap();
        assert_eq!(spec.w.0[0][2], ONE);
        assert_eq!(spec.w.0[1][2], ONE);
        assert_eq!(spec.w.0[2][2], ONE);
    }
}
