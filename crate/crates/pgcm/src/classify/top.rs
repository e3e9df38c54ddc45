//! Top case m1 > m2 = m3: the transforms are a shared scalar x11 with a
//! shared invertible 2x2 block Y, free row operations from the first row
//! and free column operations into the first column. The first row's shape
//! splits the space into three types:
//!
//! * (a) first row (w11, 0, 0), w11 nonzero: strip to diag(1, W) and
//!   classify W by 2x2 congruence;
//! * (b) first row zero: diag(0, W) with W classified by sub-congruence
//!   when invertible, and explicit rank-1 / rank-0 sub-splits otherwise;
//! * (c) (w12, w13) nonzero: normalize the first row to (0, 0, 1) and walk
//!   the explicit operation chains of the w22-split.

use super::Reducer;
use crate::action::{CharMatrix, IsoTransform};
use crate::error::{Error, Result};
use crate::family::{FamilyLabel, Series};
use crate::field::{Fp, PrimeContext, ONE, ZERO};
use crate::mat::Mat2;
use crate::pair::{canonical_pair, Lemma, PairCanon, PairRelation};

pub(super) fn classify(w: &CharMatrix) -> Result<(FamilyLabel, IsoTransform)> {
    let ctx = w.ctx;
    let mut red = Reducer::new(w)?;
    let first_row = red.cur.0[0];

    if first_row[1] != ZERO || first_row[2] != ZERO {
        classify_type_c(&ctx, &mut red)
    } else if first_row[0] != ZERO {
        classify_type_a(&ctx, &mut red)
    } else {
        classify_type_b(&ctx, &mut red)
    }
}

/// Block transform diag(x11, Y) shared by X and X2.
fn block_params(x11: Fp, y: &Mat2) -> [Fp; 9] {
    [x11, ZERO, ZERO, ZERO, y.0[0][0], y.0[0][1], ZERO, y.0[1][0], y.0[1][1]]
}

fn block_step(red: &mut Reducer, x11: Fp, y: &Mat2) -> Result<()> {
    red.step_params(block_params(x11, y))
}

/// Sends diag(c, W) to diag(1, rep) given the pair witness
/// lambda P^t W P = rep: the block transform uses Y = det(P)^-1 P^t with
/// x11 balancing the determinant twist.
fn pair_witness_block(
    ctx: &PrimeContext,
    red: &mut Reducer,
    canon: &PairCanon,
    zero_corner: bool,
) -> Result<()> {
    let p = canon.p;
    let det = p.det(ctx);
    if zero_corner {
        // diag(0, W) -> diag(0, lambda P^t W P): x11 eats lambda det(P).
        let x11 = ctx.inv(ctx.mul(canon.lambda, det))?;
        block_step(red, x11, &p.transpose())
    } else {
        // diag(1, W) -> diag(1, P^t W P) (lambda = 1 under congruence):
        // Y = det(P)^-1 P^t, x11 = det(Y).
        debug_assert_eq!(canon.lambda, ONE);
        let dinv = ctx.inv(det)?;
        let y = p.transpose().scale(dinv, ctx);
        let x11 = y.det(ctx);
        block_step(red, x11, &y)
    }
}

fn classify_type_a(
    ctx: &PrimeContext,
    red: &mut Reducer,
) -> Result<(FamilyLabel, IsoTransform)> {
    let w00 = red.cur.0[0][0];
    let inv = ctx.inv(w00)?;
    for r in 1..3 {
        let v = red.cur.0[r][0];
        if v != ZERO {
            red.row_op(r, 0, ctx.neg(ctx.mul(v, inv)))?;
        }
    }
    // Scale the corner to 1; the block absorbs w11.
    block_step(red, ctx.inv(w00)?, &Mat2::identity())?;
    let block = red.cur.bottom_right();
    let canon = canonical_pair(ctx, &block, PairRelation::Congruence)?;
    pair_witness_block(ctx, red, &canon, false)?;
    let label = match (canon.label.lemma, canon.label.type_index) {
        (Lemma::L21, 1) => FamilyLabel::plain(Series::D, 1),
        (Lemma::L21, 2) => FamilyLabel::with_nu(Series::D, 2, canon.label.param.unwrap()),
        (Lemma::L21, 3) => FamilyLabel::with_nu(Series::D, 3, canon.label.param.unwrap()),
        (Lemma::L21, 4) => FamilyLabel::with_r(Series::D, 4, canon.label.param.unwrap()),
        (Lemma::L22, 1) => FamilyLabel::plain(Series::D, 6),
        (Lemma::L22, 2) => FamilyLabel::plain(Series::D, 5),
        (Lemma::L22, 3) => FamilyLabel::plain(Series::D, 7),
        (Lemma::L23, 1) => FamilyLabel::plain(Series::E, 8),
        (Lemma::L23, 2) => FamilyLabel::with_nu(Series::E, 9, canon.label.param.unwrap()),
        (Lemma::L23, 3) => FamilyLabel::plain(Series::F, 1),
        other => return Err(Error::Internal(format!("type (a) hit {other:?}"))),
    };
    Ok((label, red.acc))
}

fn classify_type_b(
    ctx: &PrimeContext,
    red: &mut Reducer,
) -> Result<(FamilyLabel, IsoTransform)> {
    let block = red.cur.bottom_right();
    match block.rank(ctx) {
        2 => {
            // Clear the first column against the invertible block.
            let c = [red.cur.0[1][0], red.cur.0[2][0]];
            if c != [ZERO, ZERO] {
                let inv = block_inverse(ctx, &block)?;
                // W (x12, x13)^t = -c.
                let rhs = [ctx.neg(c[0]), ctx.neg(c[1])];
                let x12 = ctx.add(ctx.mul(inv.0[0][0], rhs[0]), ctx.mul(inv.0[0][1], rhs[1]));
                let x13 = ctx.add(ctx.mul(inv.0[1][0], rhs[0]), ctx.mul(inv.0[1][1], rhs[1]));
                let mut params = red.identity_params();
                params[1] = x12;
                params[2] = x13;
                red.step_params(params)?;
            }
            let canon = canonical_pair(ctx, &block, PairRelation::Subcongruence)?;
            pair_witness_block(ctx, red, &canon, true)?;
            let label = match (canon.label.lemma, canon.label.type_index) {
                (Lemma::L21, 1) => FamilyLabel::plain(Series::E, 1),
                (Lemma::L21, 2) => FamilyLabel::plain(Series::E, 2),
                (Lemma::L21, 3) => FamilyLabel::with_nu(Series::E, 3, canon.label.param.unwrap()),
                (Lemma::L21, 4) => FamilyLabel::with_r(Series::E, 4, canon.label.param.unwrap()),
                (Lemma::L22, 1) => FamilyLabel::plain(Series::E, 6),
                (Lemma::L22, 2) => FamilyLabel::plain(Series::E, 5),
                (Lemma::L22, 3) => FamilyLabel::plain(Series::E, 7),
                other => return Err(Error::Internal(format!("type (b) rank 2 hit {other:?}"))),
            };
            Ok((label, red.acc))
        }
        1 => {
            let canon = canonical_pair(ctx, &block, PairRelation::Subcongruence)?;
            pair_witness_block(ctx, red, &canon, true)?;
            match (canon.label.lemma, canon.label.type_index) {
                (Lemma::L23, 1) => {
                    // Block [[0,1],[0,0]]: clear (1,0) through column 2.
                    red.col_op(0, 2, ctx.neg(red.cur.0[1][0]))?;
                    let v = red.cur.0[2][0];
                    if v != ZERO {
                        block_step(red, ONE, &Mat2::from_diag(v, ONE))?;
                        Ok((FamilyLabel::plain(Series::E, 10), red.acc))
                    } else {
                        Ok((FamilyLabel::plain(Series::F, 2), red.acc))
                    }
                }
                (Lemma::L23, 2) => {
                    // Block diag(0,1): clear (2,0) through column 2.
                    red.col_op(0, 2, ctx.neg(red.cur.0[2][0]))?;
                    let v = red.cur.0[1][0];
                    if v != ZERO {
                        block_step(red, ONE, &Mat2::from_diag(v, v))?;
                        Ok((FamilyLabel::plain(Series::E, 11), red.acc))
                    } else {
                        Ok((FamilyLabel::plain(Series::F, 3), red.acc))
                    }
                }
                other => Err(Error::Internal(format!("type (b) rank 1 hit {other:?}"))),
            }
        }
        0 => {
            let c = [red.cur.0[1][0], red.cur.0[2][0]];
            if c == [ZERO, ZERO] {
                return Ok((FamilyLabel::plain(Series::F, 5), red.acc));
            }
            // Rotate the column onto its first coordinate, then scale to 1.
            let y = if c[0] != ZERO {
                Mat2([[ONE, ZERO], [ctx.neg(ctx.div(c[1], c[0])?), ONE]])
            } else {
                Mat2([[ZERO, ONE], [ctx.neg(ONE), ZERO]])
            };
            block_step(red, ONE, &y)?;
            let v = red.cur.0[1][0];
            debug_assert!(v != ZERO);
            block_step(red, ONE, &Mat2::from_diag(v, ONE))?;
            Ok((FamilyLabel::plain(Series::F, 4), red.acc))
        }
        _ => unreachable!(),
    }
}

fn block_inverse(ctx: &PrimeContext, m: &Mat2) -> Result<Mat2> {
    let det = m.det(ctx);
    let inv = ctx.inv(det)?;
    Ok(Mat2([
        [ctx.mul(m.0[1][1], inv), ctx.neg(ctx.mul(m.0[0][1], inv))],
        [ctx.neg(ctx.mul(m.0[1][0], inv)), ctx.mul(m.0[0][0], inv)],
    ]))
}

fn classify_type_c(
    ctx: &PrimeContext,
    red: &mut Reducer,
) -> Result<(FamilyLabel, IsoTransform)> {
    // Normalize the first row to (0, 0, 1).
    let (w01, w02) = (red.cur.0[0][1], red.cur.0[0][2]);
    let y = if w02 != ZERO {
        Mat2([[ONE, ctx.neg(ctx.div(w01, w02)?)], [ZERO, ONE]])
    } else {
        Mat2([[ZERO, ctx.neg(ONE)], [ONE, ZERO]])
    };
    block_step(red, ONE, &y)?;
    let s = red.cur.0[0][2];
    debug_assert!(s != ZERO && red.cur.0[0][1] == ZERO);
    block_step(red, ONE, &Mat2::from_diag(s, ONE))?;
    red.col_op(0, 2, ctx.neg(red.cur.0[0][0]))?;
    debug_assert_eq!(red.cur.0[0], [ZERO, ZERO, ONE]);

    let w11 = red.cur.0[1][1];
    if w11 != ZERO {
        // (c1): w22 != 0 in the paper's indexing.
        let c = ctx.neg(ctx.div(red.cur.0[2][1], w11)?);
        block_step(red, ONE, &Mat2([[ONE, ZERO], [c, ONE]]))?;
        red.col_op(0, 1, ctx.neg(ctx.div(red.cur.0[1][0], w11)?))?;
        red.row_op(1, 0, ctx.neg(red.cur.0[1][2]))?;
        red.row_op(2, 0, ctx.neg(red.cur.0[2][2]))?;
        // diag(1, 1, w11) fixes the two corner ones and rescales (1,1).
        red.diag_op([ONE, ONE, w11])?;
        let t = red.cur.0[2][0];
        if t != ZERO {
            Ok((FamilyLabel::with_t(Series::D, 8, t), red.acc))
        } else {
            Ok((FamilyLabel::plain(Series::E, 12), red.acc))
        }
    } else {
        // (c2): split on the surviving (2,1) and (3,2) entries.
        let c10 = red.cur.0[1][0];
        let c21 = red.cur.0[2][1];
        match (c10 != ZERO, c21 != ZERO) {
            (true, true) => {
                red.col_op(0, 1, ctx.neg(ctx.div(red.cur.0[2][0], c21)?))?;
                red.row_op(1, 0, ctx.neg(red.cur.0[1][2]))?;
                red.row_op(2, 0, ctx.neg(red.cur.0[2][2]))?;
                red.diag_op([c21, ONE, c10])?;
                Ok((FamilyLabel::plain(Series::D, 9), red.acc))
            }
            (false, true) => {
                red.col_op(0, 1, ctx.neg(ctx.div(red.cur.0[2][0], c21)?))?;
                red.row_op(1, 0, ctx.neg(red.cur.0[1][2]))?;
                red.row_op(2, 0, ctx.neg(red.cur.0[2][2]))?;
                red.diag_op([c21, ONE, ONE])?;
                Ok((FamilyLabel::plain(Series::E, 13), red.acc))
            }
            (true, false) => {
                let c = ctx.neg(ctx.div(red.cur.0[2][0], c10)?);
                block_step(red, ONE, &Mat2([[ONE, ZERO], [c, ONE]]))?;
                red.row_op(1, 0, ctx.neg(red.cur.0[1][2]))?;
                red.row_op(2, 0, ctx.neg(red.cur.0[2][2]))?;
                red.diag_op([ONE, ONE, c10])?;
                Ok((FamilyLabel::plain(Series::E, 14), red.acc))
            }
            (false, false) => {
                red.row_op(1, 0, ctx.neg(red.cur.0[1][2]))?;
                red.row_op(2, 0, ctx.neg(red.cur.0[2][2]))?;
                let t = red.cur.0[2][0];
                if t != ZERO {
                    Ok((FamilyLabel::with_t(Series::E, 15, t), red.acc))
                } else {
                    Ok((FamilyLabel::plain(Series::F, 6), red.acc))
                }
            }
        }
    }
}
