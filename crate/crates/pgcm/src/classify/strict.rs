//! Strict case m1 > m2 > m3: row operations may only push earlier rows into
//! later ones and column operations later columns into earlier ones, so a
//! pivot clears downwards in its column and leftwards along its row.
//! Processing columns right to left with topmost pivots yields a matrix with
//! at most one nonzero per row and column; the cell pattern picks the family
//! and a diagonal scaling pins the parameters.

use super::Reducer;
use crate::action::{CharMatrix, IsoTransform};
use crate::error::{Error, Result};
use crate::family::{FamilyLabel, Series};
use crate::field::{Fp, ONE, ZERO};
use crate::PrimeContext;

pub(super) fn classify(w: &CharMatrix) -> Result<(FamilyLabel, IsoTransform)> {
    let ctx = w.ctx;
    let mut red = Reducer::new(w)?;

    let mut pivot_rows: Vec<usize> = Vec::new();
    for col in (0..3).rev() {
        let Some(row) = (0..3)
            .find(|r| !pivot_rows.contains(r) && red.cur.0[*r][col] != ZERO)
        else {
            continue;
        };
        let pivot = red.cur.0[row][col];
        let inv = ctx.inv(pivot)?;
        // Below in the column, then left along the row; the order keeps the
        // column ops from touching anything but the pivot row.
        for r in (row + 1)..3 {
            let v = red.cur.0[r][col];
            if v != ZERO {
                red.row_op(r, row, ctx.neg(ctx.mul(v, inv)))?;
            }
        }
        for c in 0..col {
            let v = red.cur.0[row][c];
            if v != ZERO {
                red.col_op(c, col, ctx.neg(ctx.mul(v, inv)))?;
            }
        }
        pivot_rows.push(row);
    }

    let mut cells: Vec<(usize, usize)> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if red.cur.0[i][j] != ZERO {
                cells.push((i, j));
            }
        }
    }
    let (label, diag) = normalize_pattern(&ctx, &red.cur, &cells)?;
    red.diag_op(diag)?;
    Ok((label, red.acc))
}

/// Family of a reduced cell pattern plus the diagonal scaling reaching the
/// table representative. Entry (i,j) scales by d_i d_j / (d_1 d_2 d_3).
fn normalize_pattern(
    ctx: &PrimeContext,
    cur: &crate::mat::Mat3,
    cells: &[(usize, usize)],
) -> Result<(FamilyLabel, [Fp; 3])> {
    let v = |i: usize, j: usize| cur.0[i][j];
    let nu_of = |prod: Fp| -> Result<Fp> {
        if ctx.is_square(prod) {
            Ok(ONE)
        } else {
            ctx.eta()
        }
    };
    // Knob of an off-diagonal cell: the diagonal index its factor 1/d_k uses.
    let knob = |(i, j): (usize, usize)| 3 - i - j;

    match cells {
        [] => Ok((FamilyLabel::plain(Series::C, 10), [ONE; 3])),
        [(i, j)] => {
            let (i, j) = (*i, *j);
            let index = match (i, j) {
                (0, 0) => 1,
                (0, 1) => 2,
                (0, 2) => 3,
                (1, 0) => 4,
                (1, 1) => 5,
                (1, 2) => 6,
                (2, 2) => 7,
                (2, 1) => 8,
                (2, 0) => 9,
                _ => unreachable!(),
            };
            let mut d = [ONE; 3];
            if i == j {
                d[(i + 1) % 3] = v(i, j);
            } else {
                d[knob((i, j))] = v(i, j);
            }
            Ok((FamilyLabel::plain(Series::C, index), d))
        }
        [c1, c2] => {
            let (a, b) = (*c1, *c2);
            match (a, b) {
                // Transposed pairs share one knob: the t-families.
                ((1, 2), (2, 1)) => {
                    let d = [v(1, 2), ONE, ONE];
                    let t = ctx.div(v(2, 1), v(1, 2))?;
                    Ok((FamilyLabel::with_t(Series::B, 18, t), d))
                }
                ((0, 2), (2, 0)) => {
                    let d = [ONE, v(2, 0), ONE];
                    let t = ctx.div(v(0, 2), v(2, 0))?;
                    Ok((FamilyLabel::with_t(Series::B, 14, t), d))
                }
                ((0, 1), (1, 0)) => {
                    let d = [ONE, ONE, v(1, 0)];
                    let t = ctx.div(v(0, 1), v(1, 0))?;
                    Ok((FamilyLabel::with_t(Series::B, 16, t), d))
                }
                // Two diagonal cells: the nu-families. With s^2 = vi vj / nu
                // the choice d_i = d_k = s, d_j = vi sends (i,i) to 1 and
                // (j,j) to nu.
                ((0, 0), (1, 1)) | ((0, 0), (2, 2)) | ((1, 1), (2, 2)) => {
                    let (index, (i, j)) = match (a, b) {
                        ((0, 0), (1, 1)) => (1, (0, 1)),
                        ((0, 0), (2, 2)) => (6, (0, 2)),
                        _ => (17, (1, 2)),
                    };
                    let (vi, vj) = (v(i, i), v(j, j));
                    let nu = nu_of(ctx.mul(vi, vj))?;
                    let s = ctx.sqrt(ctx.div(ctx.mul(vi, vj), nu)?)?;
                    let k = 3 - i - j;
                    let mut d = [ONE; 3];
                    d[i] = s;
                    d[k] = s;
                    d[j] = vi;
                    Ok((FamilyLabel::with_nu(Series::B, index, nu), d))
                }
                // Mixed or independent pairs: both cells normalize to 1.
                _ => {
                    let index = match (a, b) {
                        ((0, 0), (1, 2)) => 2,
                        ((0, 2), (1, 1)) => 3,
                        ((0, 1), (1, 2)) => 4,
                        ((0, 2), (2, 1)) => 5,
                        ((0, 0), (2, 1)) => 7,
                        ((0, 1), (2, 2)) => 8,
                        ((1, 1), (2, 0)) => 9,
                        ((1, 2), (2, 0)) => 10,
                        ((1, 0), (2, 2)) => 11,
                        ((1, 0), (2, 1)) => 12,
                        ((0, 1), (2, 0)) => 13,
                        ((0, 2), (1, 0)) => 15,
                        _ => {
                            return Err(Error::Internal(format!(
                                "unmatched rank-2 pattern {a:?} {b:?}"
                            )))
                        }
                    };
                    let mut d = [ONE; 3];
                    let (diag_cell, off_cell) = if a.0 == a.1 { (Some(a), b) } else if b.0 == b.1 {
                        (Some(b), a)
                    } else {
                        (None, a)
                    };
                    match diag_cell {
                        Some(dc) => {
                            // The off-diagonal knob coincides with the
                            // diagonal index; fix the off cell first.
                            let k = knob(off_cell);
                            debug_assert_eq!(k, dc.0);
                            d[k] = v(off_cell.0, off_cell.1);
                            let others: Vec<usize> = (0..3).filter(|&t| t != k).collect();
                            d[others[0]] = ctx.mul(d[k], v(dc.0, dc.1));
                            d[others[1]] = ONE;
                        }
                        None => {
                            let (k1, k2) = (knob(a), knob(b));
                            debug_assert_ne!(k1, k2);
                            d[k1] = v(a.0, a.1);
                            d[k2] = v(b.0, b.1);
                        }
                    }
                    Ok((FamilyLabel::plain(Series::B, index), d))
                }
            }
        }
        [c1, c2, c3] => {
            let cols = [c1.1, c2.1, c3.1];
            debug_assert_eq!([c1.0, c2.0, c3.0], [0, 1, 2]);
            match cols {
                [0, 1, 2] => {
                    // A1: nu1, nu2 from the quadratic characters of the
                    // pairwise products.
                    let (v1, v2, v3) = (v(0, 0), v(1, 1), v(2, 2));
                    let nu1 = nu_of(ctx.mul(v1, v2))?;
                    let nu2 = nu_of(ctx.mul(v1, v3))?;
                    let big = ctx.div(ctx.mul(v1, ctx.mul(v2, v3)), ctx.mul(nu1, nu2))?;
                    let mut d = [
                        ctx.sqrt(ctx.div(big, v1)?)?,
                        ctx.sqrt(ctx.div(ctx.mul(nu1, big), v2)?)?,
                        ctx.sqrt(ctx.div(ctx.mul(nu2, big), v3)?)?,
                    ];
                    // The square roots only pin d1 d2 d3 up to sign.
                    if ctx.mul(d[0], ctx.mul(d[1], d[2])) != big {
                        d[0] = ctx.neg(d[0]);
                    }
                    Ok((FamilyLabel::with_nu12(Series::A, 1, nu1, nu2), d))
                }
                [0, 2, 1] => {
                    let d = [v(1, 2), ctx.mul(v(1, 2), v(0, 0)), ONE];
                    let t = ctx.div(v(2, 1), v(1, 2))?;
                    Ok((FamilyLabel::with_t(Series::A, 2, t), d))
                }
                [2, 1, 0] => {
                    let d = [ctx.mul(v(2, 0), v(1, 1)), v(2, 0), ONE];
                    let t = ctx.div(v(0, 2), v(2, 0))?;
                    Ok((FamilyLabel::with_t(Series::A, 3, t), d))
                }
                [2, 0, 1] => Ok((
                    FamilyLabel::plain(Series::A, 4),
                    [v(2, 1), v(0, 2), v(1, 0)],
                )),
                [1, 2, 0] => Ok((
                    FamilyLabel::plain(Series::A, 5),
                    [v(1, 2), v(2, 0), v(0, 1)],
                )),
                [1, 0, 2] => {
                    let d = [ctx.mul(v(1, 0), v(2, 2)), ONE, v(1, 0)];
                    let t = ctx.div(v(0, 1), v(1, 0))?;
                    Ok((FamilyLabel::with_t(Series::A, 6, t), d))
                }
                _ => Err(Error::Internal(format!("unmatched rank-3 pattern {cols:?}"))),
            }
        }
        _ => Err(Error::Internal(format!(
            "reduction left {} cells standing",
            cells.len()
        ))),
    }
}
