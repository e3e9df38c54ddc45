//! The minimal and maximal index of A1-subgroups, and metahamiltonian
//! status.
//!
//! Three methods, kept deliberately independent so they can cross-check:
//!
//! * TABLE: the per-family property lists, resolved for the concrete
//!   exponent type (conditional rows split on m1 = m2 + 1 and on whether
//!   -nu or -r is a square);
//! * ORBIT_SEARCH: the rank criteria evaluated literally over the whole
//!   orbit — i_min depends on the best top-left 2x2 block any orbit member
//!   achieves, i_max on the bottom-right block and the zero-corner
//!   condition;
//! * ORACLE: exhaustive A1-subgroup enumeration in the concrete group.

use crate::action::{orbit_partition, CaseTag, CharMatrix, ExponentType};
use crate::classify;
use crate::error::{Error, Result};
use crate::family::{enumerate_families, FamilyLabel, Series};
use crate::field::{Fp, PrimeContext, ZERO};
use crate::group::{self, GroupSpec};
use crate::mat::Mat3;
use serde::Serialize;

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Method {
    Table,
    OrbitSearch,
    Oracle,
}

/// Index invariants: the minimal and maximal index of an A1-subgroup are
/// p^i_min and p^i_max, with m3 <= i_min <= m3+2 and m1 <= i_max <= m1+2.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub i_min: u32,
    pub i_max: u32,
    pub metahamiltonian: bool,
    pub method: Method,
    /// Orbit members witnessing the rank conditions (orbit search only).
    pub witnesses: Vec<String>,
}

fn bounds_check(etype: &ExponentType, i_min: u32, i_max: u32) -> Result<()> {
    let [m1, _, m3] = etype.m();
    if !(m3 <= i_min && i_min <= m3 + 2 && m1 <= i_max && i_max <= m1 + 2) {
        return Err(Error::Internal(format!(
            "invariant bounds violated: i_min={i_min}, i_max={i_max}, m={:?}",
            etype.m()
        )));
    }
    Ok(())
}

/// Full report for a matrix by the requested method.
pub fn invariants(w: &CharMatrix, method: Method) -> Result<InvariantReport> {
    let report = match method {
        Method::Table => {
            let label = if w.tag() == CaseTag::P2Tiny {
                classify::classify_tiny(w)?
            } else {
                classify::classify(w)?.0
            };
            let i_min = imin_table(&w.ctx, &w.etype, &label)?;
            let i_max = imax_table(&w.ctx, &w.etype, &label)?;
            InvariantReport {
                i_min,
                i_max,
                metahamiltonian: metahamiltonian(&w.ctx, &w.etype, &label)?,
                method,
                witnesses: Vec::new(),
            }
        }
        Method::OrbitSearch => {
            let (i_min, wmin) = imin_orbit(w)?;
            let (i_max, wmax) = imax_orbit(w)?;
            let label = classify::classify(w)?.0;
            InvariantReport {
                i_min,
                i_max,
                metahamiltonian: metahamiltonian(&w.ctx, &w.etype, &label)?,
                method,
                witnesses: vec![wmin.to_literal(), wmax.to_literal()],
            }
        }
        Method::Oracle => {
            let spec = GroupSpec::new(w.ctx, w.etype, w.w)?;
            let inv = group::oracle_invariants(&spec)?;
            let meta = group::metahamiltonian_oracle(&spec, group::MetaMode::Necessary)?;
            InvariantReport {
                i_min: inv.i_min,
                i_max: inv.i_max,
                // The oracle's necessary condition is exact together with
                // i_min = m3 and i_max = m1; report the conjunction.
                metahamiltonian: meta
                    && inv.i_min == w.etype.m3()
                    && inv.i_max == w.etype.m1(),
                method,
                witnesses: Vec::new(),
            }
        }
    };
    bounds_check(&w.etype, report.i_min, report.i_max)?;
    Ok(report)
}

/// Orbit-search i_min: m3 if some orbit member has an invertible top-left
/// 2x2 block; else m3+1 if rank(w) >= 2 or some member has a rank-1
/// top-left block; else m3+2.
pub fn imin_orbit(w: &CharMatrix) -> Result<(u32, Mat3)> {
    let ctx = &w.ctx;
    let m3 = w.etype.m3();
    let part = orbit_partition(w.ctx, w.etype)?;
    let canon = part.canonical_of(&w.w);
    let mut best_rank = 0usize;
    let mut witness = w.w;
    for idx in part.members(canon) {
        let m = Mat3::from_index(ctx.p(), idx);
        let r = m.top_left().rank(ctx);
        if r > best_rank {
            best_rank = r;
            witness = m;
            if r == 2 {
                break;
            }
        }
    }
    let value = if best_rank == 2 {
        m3
    } else if w.w.rank(ctx) >= 2 || best_rank == 1 {
        m3 + 1
    } else {
        m3 + 2
    };
    Ok((value, witness))
}

/// Orbit-search i_max: m1+2 if some orbit member has zero bottom-right 2x2
/// block; else m1+1 if some member has a rank-1 bottom-right block, or
/// m1 = m2+1 and some member has zero corner block on rows/columns {1,3};
/// else m1.
pub fn imax_orbit(w: &CharMatrix) -> Result<(u32, Mat3)> {
    let ctx = &w.ctx;
    let [m1, m2, _] = w.etype.m();
    let part = orbit_partition(w.ctx, w.etype)?;
    let canon = part.canonical_of(&w.w);
    let mut zero_br: Option<Mat3> = None;
    let mut rank1_br: Option<Mat3> = None;
    let mut zero_corner: Option<Mat3> = None;
    for idx in part.members(canon) {
        let m = Mat3::from_index(ctx.p(), idx);
        match m.bottom_right().rank(ctx) {
            0 => {
                zero_br = Some(m);
                break;
            }
            1 => rank1_br = rank1_br.or(Some(m)),
            _ => {}
        }
        if m1 == m2 + 1 && m.corner().is_zero() {
            zero_corner = zero_corner.or(Some(m));
        }
    }
    Ok(if let Some(m) = zero_br {
        (m1 + 2, m)
    } else if let Some(m) = rank1_br {
        (m1 + 1, m)
    } else if let Some(m) = zero_corner {
        (m1 + 1, m)
    } else {
        (m1, w.w)
    })
}

fn eval_nu(label: &FamilyLabel) -> Result<Fp> {
    match label.params.nu {
        Some(v) if v != ZERO => Ok(v),
        _ => Err(Error::InvalidLabel(format!("{label} has no nu"))),
    }
}

fn minus_is_square(ctx: &PrimeContext, v: Fp) -> bool {
    ctx.is_square(ctx.neg(v))
}

/// TABLE i_min: the groupings of the per-family property theorems.
pub fn imin_table(_ctx: &PrimeContext, etype: &ExponentType, label: &FamilyLabel) -> Result<u32> {
    let m3 = etype.m3();
    let i = label.index;
    let delta = match label.series {
        Series::A => 0,
        Series::B => match i {
            1..=4 | 15 | 16 => 0,
            5..=14 | 17 | 18 => 1,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::C => match i {
            1..=6 => 1,
            7..=10 => 2,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::D => match i {
            2..=4 | 6..=9 => 0,
            1 | 5 => 1,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::E => match i {
            8 | 9 | 12..=15 => 0,
            1..=7 | 10 | 11 => 1,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::F => match i {
            1..=4 | 6 => 1,
            5 => 2,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::G => 0,
        Series::H => match i {
            1..=7 | 12 | 13 => 0,
            8..=11 | 14 | 15 => 1,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::I => match i {
            2 | 3 | 6 => 1,
            1 | 4 | 5 => 2,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::J | Series::K => 0,
        Series::L => match i {
            2 | 3 => 1,
            1 => 2,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::M => match i {
            2..=7 => 0,
            1 => 1,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::N => match i {
            5 | 6 | 10 | 12 | 13 => 0,
            1..=4 | 7..=9 | 11 => 1,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::O => 1,
        Series::P | Series::Q => 0,
        Series::R => match i {
            1 | 2 => 1,
            3 => 2,
            _ => return Err(Error::InvalidLabel(label.to_string())),
        },
        Series::S => 0,
    };
    Ok(m3 + delta)
}

/// TABLE i_max with the conditional splits evaluated for the context.
pub fn imax_table(ctx: &PrimeContext, etype: &ExponentType, label: &FamilyLabel) -> Result<u32> {
    let [m1, m2, _] = etype.m();
    let close = m1 == m2 + 1;
    let i = label.index;
    let bad = || Error::InvalidLabel(label.to_string());
    let delta = match label.series {
        Series::A => match i {
            1 | 2 => 0,
            3..=6 => 1,
            _ => return Err(bad()),
        },
        Series::B => match i {
            13..=16 => 2,
            1..=12 => 1,
            18 => {
                if close {
                    1
                } else {
                    0
                }
            }
            17 => 0,
            _ => return Err(bad()),
        },
        Series::C => match i {
            1..=4 | 9 | 10 => 2,
            5..=8 => 1,
            _ => return Err(bad()),
        },
        Series::D => match i {
            1..=7 => 0,
            8 | 9 => 1,
            _ => return Err(bad()),
        },
        Series::E => match i {
            14 | 15 => 2,
            8..=13 => 1,
            1 | 2 | 5 | 6 => {
                if close {
                    1
                } else {
                    0
                }
            }
            3 => {
                if close && minus_is_square(ctx, eval_nu(label)?) {
                    1
                } else {
                    0
                }
            }
            4 => {
                let r = label.params.r.ok_or_else(bad)?;
                if close && minus_is_square(ctx, r) {
                    1
                } else {
                    0
                }
            }
            7 => 0,
            _ => return Err(bad()),
        },
        Series::F => match i {
            1 | 4 | 5 | 6 => 2,
            2 | 3 => 1,
            _ => return Err(bad()),
        },
        Series::G => match i {
            1 | 2 | 5 | 6 | 8 | 9 => 1,
            3 => {
                if minus_is_square(ctx, eval_nu(label)?) {
                    1
                } else {
                    0
                }
            }
            4 => {
                let r = label.params.r.ok_or_else(bad)?;
                if minus_is_square(ctx, r) {
                    1
                } else {
                    0
                }
            }
            7 => 0,
            _ => return Err(bad()),
        },
        Series::H => match i {
            1 | 2 | 5 | 6 | 10 | 13 | 15 => 2,
            3 => {
                if minus_is_square(ctx, eval_nu(label)?) {
                    2
                } else {
                    1
                }
            }
            4 => {
                let r = label.params.r.ok_or_else(bad)?;
                if minus_is_square(ctx, r) {
                    2
                } else {
                    1
                }
            }
            7..=9 | 11 | 12 | 14 => 1,
            _ => return Err(bad()),
        },
        Series::I => match i {
            2..=6 => 2,
            1 => 1,
            _ => return Err(bad()),
        },
        Series::J => 1,
        Series::K => match i {
            1 => {
                if minus_is_square(ctx, eval_nu(label)?) {
                    2
                } else {
                    1
                }
            }
            3..=5 => 2,
            6 => {
                let r = label.params.r.ok_or_else(bad)?;
                if minus_is_square(ctx, r) {
                    2
                } else {
                    1
                }
            }
            2 => 1,
            _ => return Err(bad()),
        },
        Series::L => 2,
        Series::M => match i {
            1..=3 => 0,
            4..=7 => 1,
            _ => return Err(bad()),
        },
        Series::N => match i {
            11..=13 => 2,
            1 | 2 => {
                if m1 == 2 {
                    1
                } else {
                    0
                }
            }
            3 => 0,
            4..=10 => 1,
            _ => return Err(bad()),
        },
        Series::O => 2,
        Series::P => 1,
        Series::Q => match i {
            1 | 2 | 5 => 2,
            3 | 4 => 1,
            _ => return Err(bad()),
        },
        Series::R => 2,
        Series::S => match i {
            1 | 2 | 5 | 6 => 2,
            3 | 4 | 7..=9 => 1,
            10 => 0,
            _ => return Err(bad()),
        },
    };
    Ok(m1 + delta)
}

/// Metahamiltonian exactly for the surviving cases of the classification:
/// D3/D4 at m1 = m2+1 with -nu (resp. -r) a non-square, D7 at m1 = m2+1,
/// G3/G4/G7 at m2 = m3+1 with the same character conditions, M3 at m1 = 2,
/// and S10.
pub fn metahamiltonian(
    ctx: &PrimeContext,
    etype: &ExponentType,
    label: &FamilyLabel,
) -> Result<bool> {
    let [m1, m2, m3] = etype.m();
    let i = label.index;
    Ok(match label.series {
        Series::D => match i {
            3 => m1 == m2 + 1 && !minus_is_square(ctx, eval_nu(label)?),
            4 => {
                let r = label.params.r.ok_or_else(|| Error::InvalidLabel(label.to_string()))?;
                m1 == m2 + 1 && !minus_is_square(ctx, r)
            }
            7 => m1 == m2 + 1,
            _ => false,
        },
        Series::G => match i {
            3 => m2 == m3 + 1 && !minus_is_square(ctx, eval_nu(label)?),
            4 => {
                let r = label.params.r.ok_or_else(|| Error::InvalidLabel(label.to_string()))?;
                m2 == m3 + 1 && !minus_is_square(ctx, r)
            }
            7 => m2 == m3 + 1,
            _ => false,
        },
        Series::M => i == 3 && m1 == 2,
        Series::S => i == 10,
        _ => false,
    })
}

/// One resolved row per enumerated family.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyRow {
    pub label: FamilyLabel,
    pub i_min: u32,
    pub i_max: u32,
    pub metahamiltonian: bool,
}

pub fn property_table(ctx: &PrimeContext, etype: &ExponentType) -> Result<Vec<PropertyRow>> {
    let mut rows = Vec::new();
    for label in enumerate_families(ctx, etype)? {
        let i_min = imin_table(ctx, etype, &label)?;
        let i_max = imax_table(ctx, etype, &label)?;
        let meta = metahamiltonian(ctx, etype, &label)?;
        if meta && (i_min != etype.m3() || i_max != etype.m1()) {
            return Err(Error::Internal(format!(
                "{label} claims metahamiltonian with i_min={i_min}, i_max={i_max}"
            )));
        }
        bounds_check(etype, i_min, i_max)?;
        rows.push(PropertyRow { label, i_min, i_max, metahamiltonian: meta });
    }
    Ok(rows)
}
