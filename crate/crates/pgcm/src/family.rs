//! Labeled families of characteristic matrices: the classification targets.
//!
//! Every family is a fixed 3x3 template over {0, 1, -1} plus at most two
//! parameters drawn from {1, eta} (written nu, nu1, nu2), F_p^* (t) or
//! {1, ..., p-2} (r). Labels serialize as e.g. `B18[t=2]`, `K1[nu=eta]`,
//! `A1[nu1=1,nu2=eta]`, `S10`.

use crate::action::{case_tag, CaseTag, CharMatrix, ExponentType};
use crate::error::{Error, Result};
use crate::field::{Fp, PrimeContext, ONE};
use crate::mat::Mat3;
use serde::Serialize;
use std::fmt;

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub enum Series {
    A, B, C, D, E, F, G, H, I, J, K, L, M, N, O, P, Q, R, S,
}

impl Series {
    pub const ALL: [Series; 19] = [
        Series::A, Series::B, Series::C, Series::D, Series::E, Series::F,
        Series::G, Series::H, Series::I, Series::J, Series::K, Series::L,
        Series::M, Series::N, Series::O, Series::P, Series::Q, Series::R,
        Series::S,
    ];

    pub fn letter(&self) -> char {
        (b'A' + *self as u8) as char
    }

    fn from_letter(c: char) -> Option<Series> {
        let off = (c as u8).checked_sub(b'A')?;
        Series::ALL.get(off as usize).copied()
    }

    /// Number of families in the series.
    pub fn count(&self) -> u8 {
        match self {
            Series::A => 6,
            Series::B => 18,
            Series::C => 10,
            Series::D => 9,
            Series::E => 15,
            Series::F => 6,
            Series::G => 9,
            Series::H => 15,
            Series::I => 6,
            Series::J => 5,
            Series::K => 6,
            Series::L => 3,
            Series::M => 7,
            Series::N => 13,
            Series::O => 3,
            Series::P => 4,
            Series::Q => 5,
            Series::R => 3,
            Series::S => 10,
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Optional parameters of a family instance.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Default, Serialize)]
pub struct FamilyParams {
    pub nu1: Option<Fp>,
    pub nu2: Option<Fp>,
    pub nu: Option<Fp>,
    pub t: Option<Fp>,
    pub r: Option<Fp>,
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct FamilyLabel {
    pub series: Series,
    pub index: u8,
    pub params: FamilyParams,
}

impl FamilyLabel {
    pub fn plain(series: Series, index: u8) -> Self {
        FamilyLabel { series, index, params: FamilyParams::default() }
    }

    pub fn with_nu(series: Series, index: u8, nu: Fp) -> Self {
        FamilyLabel { series, index, params: FamilyParams { nu: Some(nu), ..Default::default() } }
    }

    pub fn with_t(series: Series, index: u8, t: Fp) -> Self {
        FamilyLabel { series, index, params: FamilyParams { t: Some(t), ..Default::default() } }
    }

    pub fn with_r(series: Series, index: u8, r: Fp) -> Self {
        FamilyLabel { series, index, params: FamilyParams { r: Some(r), ..Default::default() } }
    }

    pub fn with_nu12(series: Series, index: u8, nu1: Fp, nu2: Fp) -> Self {
        FamilyLabel {
            series,
            index,
            params: FamilyParams { nu1: Some(nu1), nu2: Some(nu2), ..Default::default() },
        }
    }

    /// True when the label mentions eta, in which case output should print
    /// eta's value next to it.
    pub fn references_eta(&self) -> bool {
        let p = &self.params;
        [p.nu1, p.nu2, p.nu].iter().any(|v| matches!(v, Some(x) if *x != ONE))
    }

    /// Parses the `B18[t=2]` grammar. `eta` is resolved via the context.
    pub fn parse(ctx: &PrimeContext, s: &str) -> Result<FamilyLabel> {
        let bad = || Error::InvalidLabel(s.to_string());
        let s = s.trim();
        let (head, params_str) = match s.find('[') {
            Some(i) => {
                if !s.ends_with(']') {
                    return Err(bad());
                }
                (&s[..i], Some(&s[i + 1..s.len() - 1]))
            }
            None => (s, None),
        };
        let mut chars = head.chars();
        let series = chars.next().and_then(Series::from_letter).ok_or_else(bad)?;
        let index: u8 = chars.as_str().parse().map_err(|_| bad())?;
        if index == 0 || index > series.count() {
            return Err(bad());
        }
        let mut params = FamilyParams::default();
        if let Some(ps) = params_str {
            for item in ps.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(bad)?;
                let value = match v.trim() {
                    "eta" => ctx.eta()?,
                    n => ctx.el(n.parse::<i64>().map_err(|_| bad())?),
                };
                match k.trim() {
                    "nu" => params.nu = Some(value),
                    "nu1" => params.nu1 = Some(value),
                    "nu2" => params.nu2 = Some(value),
                    "t" => params.t = Some(value),
                    "r" => params.r = Some(value),
                    _ => return Err(bad()),
                }
            }
        }
        Ok(FamilyLabel { series, index, params })
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.series, self.index)?;
        let mut parts = Vec::new();
        let fmt_nu = |v: Fp| if v == ONE { "1".to_string() } else { "eta".to_string() };
        if let Some(v) = self.params.nu1 {
            parts.push(format!("nu1={}", fmt_nu(v)));
        }
        if let Some(v) = self.params.nu2 {
            parts.push(format!("nu2={}", fmt_nu(v)));
        }
        if let Some(v) = self.params.nu {
            parts.push(format!("nu={}", fmt_nu(v)));
        }
        if let Some(v) = self.params.t {
            parts.push(format!("t={}", v.0));
        }
        if let Some(v) = self.params.r {
            parts.push(format!("r={}", v.0));
        }
        if !parts.is_empty() {
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

/// Template cell of a family matrix.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum Cell {
    Z,
    P1,
    M1,
    Nu,
    Nu1,
    Nu2,
    T,
    R,
}

use Cell::*;

/// Which primes a family exists for.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum PRange {
    Odd,
    Two,
    Both,
}

fn prange(series: Series, index: u8) -> PRange {
    match series {
        Series::A | Series::B | Series::C | Series::F | Series::I => PRange::Both,
        Series::D | Series::G => match index {
            1..=4 => PRange::Odd,
            5..=7 => PRange::Two,
            _ => PRange::Both,
        },
        Series::E | Series::H => match index {
            1..=4 => PRange::Odd,
            5..=7 => PRange::Two,
            _ => PRange::Both,
        },
        Series::J | Series::K | Series::L => PRange::Odd,
        Series::M | Series::N | Series::O | Series::P | Series::Q | Series::R | Series::S => {
            PRange::Two
        }
    }
}

#[rustfmt::skip]
fn template(series: Series, index: u8) -> Option<[[Cell; 3]; 3]> {
    let t = match (series, index) {
        (Series::A, 1) => [[P1,Z,Z],[Z,Nu1,Z],[Z,Z,Nu2]],
        (Series::A, 2) => [[P1,Z,Z],[Z,Z,P1],[Z,T,Z]],
        (Series::A, 3) => [[Z,Z,T],[Z,P1,Z],[P1,Z,Z]],
        (Series::A, 4) => [[Z,Z,P1],[P1,Z,Z],[Z,P1,Z]],
        (Series::A, 5) => [[Z,P1,Z],[Z,Z,P1],[P1,Z,Z]],
        (Series::A, 6) => [[Z,T,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::B, 1) => [[P1,Z,Z],[Z,Nu,Z],[Z,Z,Z]],
        (Series::B, 2) => [[P1,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::B, 3) => [[Z,Z,P1],[Z,P1,Z],[Z,Z,Z]],
        (Series::B, 4) => [[Z,P1,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::B, 5) => [[Z,Z,P1],[Z,Z,Z],[Z,P1,Z]],
        (Series::B, 6) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Nu]],
        (Series::B, 7) => [[P1,Z,Z],[Z,Z,Z],[Z,P1,Z]],
        (Series::B, 8) => [[Z,P1,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::B, 9) => [[Z,Z,Z],[Z,P1,Z],[P1,Z,Z]],
        (Series::B, 10) => [[Z,Z,Z],[Z,Z,P1],[P1,Z,Z]],
        (Series::B, 11) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::B, 12) => [[Z,Z,Z],[P1,Z,Z],[Z,P1,Z]],
        (Series::B, 13) => [[Z,P1,Z],[Z,Z,Z],[P1,Z,Z]],
        (Series::B, 14) => [[Z,Z,T],[Z,Z,Z],[P1,Z,Z]],
        (Series::B, 15) => [[Z,Z,P1],[P1,Z,Z],[Z,Z,Z]],
        (Series::B, 16) => [[Z,T,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::B, 17) => [[Z,Z,Z],[Z,P1,Z],[Z,Z,Nu]],
        (Series::B, 18) => [[Z,Z,Z],[Z,Z,P1],[Z,T,Z]],
        (Series::C, 1) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::C, 2) => [[Z,P1,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::C, 3) => [[Z,Z,P1],[Z,Z,Z],[Z,Z,Z]],
        (Series::C, 4) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::C, 5) => [[Z,Z,Z],[Z,P1,Z],[Z,Z,Z]],
        (Series::C, 6) => [[Z,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::C, 7) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::C, 8) => [[Z,Z,Z],[Z,Z,Z],[Z,P1,Z]],
        (Series::C, 9) => [[Z,Z,Z],[Z,Z,Z],[P1,Z,Z]],
        (Series::C, 10) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::D, 1) => [[P1,Z,Z],[Z,Z,P1],[Z,M1,Z]],
        (Series::D, 2) => [[P1,Z,Z],[Z,Nu,P1],[Z,M1,Z]],
        (Series::D, 3) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,Nu]],
        (Series::D, 4) => [[P1,Z,Z],[Z,P1,P1],[Z,M1,R]],
        (Series::D, 5) => [[P1,Z,Z],[Z,Z,P1],[Z,P1,Z]],
        (Series::D, 6) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::D, 7) => [[P1,Z,Z],[Z,P1,Z],[Z,P1,P1]],
        (Series::D, 8) => [[Z,Z,P1],[Z,P1,Z],[T,Z,Z]],
        (Series::D, 9) => [[Z,Z,P1],[P1,Z,Z],[Z,P1,Z]],
        (Series::E, 1) => [[Z,Z,Z],[Z,Z,P1],[Z,M1,Z]],
        (Series::E, 2) => [[Z,Z,Z],[Z,P1,P1],[Z,M1,Z]],
        (Series::E, 3) => [[Z,Z,Z],[Z,P1,Z],[Z,Z,Nu]],
        (Series::E, 4) => [[Z,Z,Z],[Z,P1,P1],[Z,M1,R]],
        (Series::E, 5) => [[Z,Z,Z],[Z,Z,P1],[Z,P1,Z]],
        (Series::E, 6) => [[Z,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::E, 7) => [[Z,Z,Z],[Z,P1,Z],[Z,P1,P1]],
        (Series::E, 8) => [[P1,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::E, 9) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Nu]],
        (Series::E, 10) => [[Z,Z,Z],[Z,Z,P1],[P1,Z,Z]],
        (Series::E, 11) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::E, 12) => [[Z,Z,P1],[Z,P1,Z],[Z,Z,Z]],
        (Series::E, 13) => [[Z,Z,P1],[Z,Z,Z],[Z,P1,Z]],
        (Series::E, 14) => [[Z,Z,P1],[P1,Z,Z],[Z,Z,Z]],
        (Series::E, 15) => [[Z,Z,P1],[Z,Z,Z],[T,Z,Z]],
        (Series::F, 1) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::F, 2) => [[Z,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::F, 3) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::F, 4) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::F, 5) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::F, 6) => [[Z,Z,P1],[Z,Z,Z],[Z,Z,Z]],
        (Series::G, 1) => [[Z,M1,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::G, 2) => [[Nu,M1,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::G, 3) => [[P1,Z,Z],[Z,Nu,Z],[Z,Z,P1]],
        (Series::G, 4) => [[P1,M1,Z],[P1,R,Z],[Z,Z,P1]],
        (Series::G, 5) => [[Z,P1,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::G, 6) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::G, 7) => [[P1,P1,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::G, 8) => [[P1,Z,Z],[Z,Z,P1],[Z,T,Z]],
        (Series::G, 9) => [[Z,P1,Z],[Z,Z,P1],[P1,Z,Z]],
        (Series::H, 1) => [[Z,M1,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::H, 2) => [[P1,M1,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::H, 3) => [[P1,Z,Z],[Z,Nu,Z],[Z,Z,Z]],
        (Series::H, 4) => [[P1,M1,Z],[P1,R,Z],[Z,Z,Z]],
        (Series::H, 5) => [[Z,P1,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::H, 6) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,Z]],
        (Series::H, 7) => [[P1,P1,Z],[Z,P1,Z],[Z,Z,Z]],
        (Series::H, 8) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::H, 9) => [[Z,Z,Z],[Z,Nu,Z],[Z,Z,P1]],
        (Series::H, 10) => [[Z,Z,Z],[P1,Z,Z],[Z,P1,Z]],
        (Series::H, 11) => [[Z,Z,Z],[Z,P1,Z],[P1,Z,Z]],
        (Series::H, 12) => [[P1,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::H, 13) => [[Z,P1,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::H, 14) => [[Z,Z,Z],[Z,Z,P1],[P1,Z,Z]],
        (Series::H, 15) => [[Z,Z,Z],[Z,Z,P1],[Z,T,Z]],
        (Series::I, 1) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::I, 2) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::I, 3) => [[Z,Z,Z],[Z,P1,Z],[Z,Z,Z]],
        (Series::I, 4) => [[Z,Z,Z],[Z,Z,Z],[P1,Z,Z]],
        (Series::I, 5) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::I, 6) => [[Z,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::J, 1) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::J, 2) => [[P1,Z,Z],[Z,Z,P1],[Z,M1,Z]],
        (Series::J, 3) => [[P1,Z,Z],[Z,Nu,P1],[Z,M1,Z]],
        (Series::J, 4) => [[P1,Z,Z],[Z,P1,P1],[Z,M1,R]],
        (Series::J, 5) => [[Z,Z,P1],[Z,P1,P1],[P1,M1,Z]],
        (Series::K, 1) => [[P1,Z,Z],[Z,Nu,Z],[Z,Z,Z]],
        (Series::K, 2) => [[P1,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::K, 3) => [[Z,Z,P1],[Z,Z,Z],[Z,P1,Z]],
        (Series::K, 4) => [[Z,Z,Z],[Z,Z,P1],[Z,M1,Z]],
        (Series::K, 5) => [[Z,Z,Z],[Z,P1,P1],[Z,M1,Z]],
        (Series::K, 6) => [[Z,Z,Z],[Z,P1,P1],[Z,M1,R]],
        (Series::L, 1) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::L, 2) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::L, 3) => [[Z,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::M, 1) => [[P1,Z,Z],[Z,Z,P1],[Z,P1,Z]],
        (Series::M, 2) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::M, 3) => [[P1,Z,Z],[Z,P1,Z],[Z,P1,P1]],
        (Series::M, 4) => [[Z,Z,P1],[Z,P1,Z],[P1,Z,Z]],
        (Series::M, 5) => [[Z,Z,P1],[P1,Z,Z],[Z,P1,Z]],
        (Series::M, 6) => [[Z,Z,P1],[Z,P1,Z],[P1,P1,Z]],
        (Series::M, 7) => [[Z,P1,P1],[Z,P1,Z],[P1,P1,Z]],
        (Series::N, 1) => [[Z,Z,Z],[Z,Z,P1],[Z,P1,Z]],
        (Series::N, 2) => [[Z,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::N, 3) => [[Z,Z,Z],[Z,P1,Z],[Z,P1,P1]],
        (Series::N, 4) => [[Z,Z,Z],[Z,P1,P1],[P1,P1,P1]],
        (Series::N, 5) => [[P1,Z,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::N, 6) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::N, 7) => [[Z,Z,Z],[Z,Z,P1],[P1,Z,Z]],
        (Series::N, 8) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,P1]],
        (Series::N, 9) => [[Z,Z,Z],[P1,Z,P1],[Z,Z,P1]],
        (Series::N, 10) => [[Z,Z,P1],[Z,Z,Z],[Z,P1,Z]],
        (Series::N, 11) => [[Z,Z,P1],[P1,Z,Z],[Z,Z,Z]],
        (Series::N, 12) => [[Z,Z,P1],[Z,Z,Z],[P1,Z,Z]],
        (Series::N, 13) => [[Z,Z,P1],[P1,Z,Z],[P1,Z,Z]],
        (Series::O, 1) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::O, 2) => [[Z,Z,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::O, 3) => [[Z,Z,Z],[P1,Z,Z],[P1,Z,Z]],
        (Series::P, 1) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,P1]],
        (Series::P, 2) => [[P1,Z,Z],[Z,P1,Z],[Z,P1,P1]],
        (Series::P, 3) => [[P1,P1,P1],[Z,P1,Z],[Z,Z,P1]],
        (Series::P, 4) => [[P1,Z,P1],[Z,Z,P1],[Z,P1,Z]],
        (Series::Q, 1) => [[P1,Z,Z],[Z,P1,Z],[Z,Z,Z]],
        (Series::Q, 2) => [[Z,P1,Z],[P1,Z,Z],[Z,Z,Z]],
        (Series::Q, 3) => [[P1,Z,Z],[P1,P1,Z],[Z,Z,Z]],
        (Series::Q, 4) => [[Z,Z,P1],[Z,P1,Z],[Z,Z,Z]],
        (Series::Q, 5) => [[Z,P1,Z],[Z,Z,P1],[Z,Z,Z]],
        (Series::R, 1) => [[Z,P1,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::R, 2) => [[P1,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::R, 3) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        // Characteristic matrices of the ten order-64 reference groups.
        (Series::S, 1) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,Z]],
        (Series::S, 2) => [[Z,Z,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::S, 3) => [[Z,P1,P1],[Z,Z,P1],[Z,Z,Z]],
        (Series::S, 4) => [[Z,Z,P1],[Z,P1,P1],[Z,Z,Z]],
        (Series::S, 5) => [[Z,Z,P1],[Z,Z,P1],[Z,Z,Z]],
        (Series::S, 6) => [[Z,Z,P1],[Z,Z,P1],[Z,Z,P1]],
        (Series::S, 7) => [[Z,P1,Z],[Z,Z,Z],[Z,Z,P1]],
        (Series::S, 8) => [[Z,P1,Z],[Z,Z,P1],[Z,Z,P1]],
        (Series::S, 9) => [[Z,Z,P1],[Z,P1,P1],[Z,Z,P1]],
        (Series::S, 10) => [[P1,P1,P1],[Z,P1,P1],[Z,Z,P1]],
        _ => return None,
    };
    Some(t)
}

/// Series attached to a case tag (for p = 2 the Equal tag switches tables).
pub fn tag_series(tag: CaseTag, two: bool) -> &'static [Series] {
    match tag {
        CaseTag::Strict => &[Series::A, Series::B, Series::C],
        CaseTag::Top => &[Series::D, Series::E, Series::F],
        CaseTag::Bottom => &[Series::G, Series::H, Series::I],
        CaseTag::Equal if two => &[Series::P, Series::Q, Series::R],
        CaseTag::Equal => &[Series::J, Series::K, Series::L],
        CaseTag::P2Special => &[Series::M, Series::N, Series::O],
        CaseTag::P2Tiny => &[Series::S],
    }
}

fn valid_for(ctx: &PrimeContext, etype: &ExponentType, series: Series, index: u8) -> bool {
    let tag = case_tag(ctx, etype);
    if !tag_series(tag, ctx.is_two()).contains(&series) {
        return false;
    }
    match prange(series, index) {
        PRange::Both => true,
        PRange::Odd => !ctx.is_two(),
        PRange::Two => ctx.is_two(),
    }
}

/// The table matrix with parameters substituted.
pub fn representative(
    ctx: &PrimeContext,
    etype: &ExponentType,
    label: &FamilyLabel,
) -> Result<CharMatrix> {
    let bad = || Error::InvalidLabel(format!("{label} is invalid for p={} m={:?}", ctx.p(), etype.m()));
    if !valid_for(ctx, etype, label.series, label.index) {
        return Err(bad());
    }
    let tpl = template(label.series, label.index).ok_or_else(bad)?;
    let check_nu = |v: Option<Fp>| -> Result<Fp> {
        let v = v.ok_or_else(bad)?;
        if v == ONE || (!ctx.is_two() && v == ctx.eta()?) {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let mut m = Mat3::zero();
    let mut used = FamilyParams::default();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = match tpl[i][j] {
                Z => ctx.el(0),
                P1 => ONE,
                M1 => ctx.neg(ONE),
                Nu => {
                    used.nu = Some(check_nu(label.params.nu)?);
                    used.nu.unwrap()
                }
                Nu1 => {
                    used.nu1 = Some(check_nu(label.params.nu1)?);
                    used.nu1.unwrap()
                }
                Nu2 => {
                    used.nu2 = Some(check_nu(label.params.nu2)?);
                    used.nu2.unwrap()
                }
                T => {
                    let v = label.params.t.ok_or_else(bad)?;
                    if v.0 == 0 {
                        return Err(bad());
                    }
                    used.t = Some(v);
                    v
                }
                R => {
                    let v = label.params.r.ok_or_else(bad)?;
                    if v.0 == 0 || v == ctx.neg(ONE) {
                        return Err(bad());
                    }
                    used.r = Some(v);
                    v
                }
            };
        }
    }
    if used != label.params {
        // Extraneous parameters are rejected rather than ignored.
        return Err(bad());
    }
    Ok(CharMatrix::new(*ctx, *etype, m))
}

/// Every family instance for the context, in table order; nu ranges over
/// {1, eta}, t over F_p^*, r over 1..p-2 (so r-families vanish at p = 2).
pub fn enumerate_families(ctx: &PrimeContext, etype: &ExponentType) -> Result<Vec<FamilyLabel>> {
    let tag = case_tag(ctx, etype);
    let mut out = Vec::new();
    let nus: Vec<Fp> = if ctx.is_two() { vec![ONE] } else { vec![ONE, ctx.eta()?] };
    let ts: Vec<Fp> = ctx.units().collect();
    let rs: Vec<Fp> = (1..=ctx.p().saturating_sub(2)).map(Fp).collect();
    for &series in tag_series(tag, ctx.is_two()) {
        for index in 1..=series.count() {
            if !valid_for(ctx, etype, series, index) {
                continue;
            }
            let tpl = template(series, index).expect("catalog complete");
            let cells: Vec<Cell> = tpl.iter().flatten().copied().collect();
            let has = |c: Cell| cells.contains(&c);
            let mut instances = vec![FamilyLabel::plain(series, index)];
            let expand = |instances: Vec<FamilyLabel>, values: &[Fp], set: fn(&mut FamilyParams, Fp)| {
                let mut next = Vec::new();
                for base in instances {
                    for &v in values {
                        let mut label = base;
                        set(&mut label.params, v);
                        next.push(label);
                    }
                }
                next
            };
            if has(Nu1) {
                instances = expand(instances, &nus, |p, v| p.nu1 = Some(v));
            }
            if has(Nu2) {
                instances = expand(instances, &nus, |p, v| p.nu2 = Some(v));
            }
            if has(Nu) {
                instances = expand(instances, &nus, |p, v| p.nu = Some(v));
            }
            if has(T) {
                instances = expand(instances, &ts, |p, v| p.t = Some(v));
            }
            if has(R) {
                instances = expand(instances, &rs, |p, v| p.r = Some(v));
            }
            out.extend(instances);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ZERO;

    fn ctx(p: u32) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn et(m1: u32, m2: u32, m3: u32) -> ExponentType {
        ExponentType::new(m1, m2, m3).unwrap()
    }

    #[test]
    fn representative_examples() {
        let f3 = ctx(3);
        let b18 = representative(&f3, &et(3, 2, 1), &FamilyLabel::with_t(Series::B, 18, ONE)).unwrap();
        assert_eq!(b18.w, Mat3::from_i64(&f3, [[0, 0, 0], [0, 0, 1], [0, 1, 0]]));
        let j2 = representative(&f3, &et(1, 1, 1), &FamilyLabel::plain(Series::J, 2)).unwrap();
        assert_eq!(j2.w, Mat3::from_i64(&f3, [[1, 0, 0], [0, 0, 1], [0, 2, 0]]));
        let l1 = representative(&f3, &et(1, 1, 1), &FamilyLabel::plain(Series::L, 1)).unwrap();
        assert!(l1.w.is_zero());
    }

    #[test]
    fn rejects_invalid_labels() {
        let f3 = ctx(3);
        // Wrong tag for the series.
        assert!(representative(&f3, &et(3, 2, 1), &FamilyLabel::plain(Series::J, 1)).is_err());
        // Missing parameter.
        assert!(representative(&f3, &et(3, 2, 1), &FamilyLabel::plain(Series::B, 18)).is_err());
        // t = 0.
        assert!(representative(&f3, &et(3, 2, 1), &FamilyLabel::with_t(Series::B, 18, ZERO)).is_err());
        // r = p-1 is excluded.
        assert!(representative(&f3, &et(2, 1, 1), &FamilyLabel::with_r(Series::D, 4, Fp(2))).is_err());
        // nu must be 1 or eta.
        assert!(representative(&f3, &et(2, 1, 1), &FamilyLabel::with_nu(Series::D, 3, ZERO)).is_err());
        // Extraneous parameter.
        assert!(representative(&f3, &et(3, 2, 1), &FamilyLabel::with_t(Series::C, 10, ONE)).is_err());
        // Odd-only family at p = 2.
        let f2 = ctx(2);
        assert!(representative(&f2, &et(3, 2, 2), &FamilyLabel::plain(Series::D, 1)).is_err());
        assert!(representative(&f2, &et(3, 2, 2), &FamilyLabel::plain(Series::D, 6)).is_ok());
    }

    #[test]
    fn label_grammar_round_trip() {
        let f5 = ctx(5);
        for s in ["B18[t=2]", "K1[nu=eta]", "S10", "A1[nu1=1,nu2=eta]", "D4[r=3]", "J3[nu=1]"] {
            let label = FamilyLabel::parse(&f5, s).unwrap();
            assert_eq!(label.to_string(), s, "round trip failed");
        }
        assert!(FamilyLabel::parse(&f5, "B19").is_err());
        assert!(FamilyLabel::parse(&f5, "Z1").is_err());
        assert!(FamilyLabel::parse(&f5, "B18[q=1]").is_err());
        // eta resolves through the context.
        let label = FamilyLabel::parse(&f5, "K1[nu=eta]").unwrap();
        assert_eq!(label.params.nu, Some(Fp(2)));
    }

    #[test]
    fn enumeration_counts() {
        // p = 2 tables are fixed-size.
        let f2 = ctx(2);
        assert_eq!(enumerate_families(&f2, &et(2, 1, 1)).unwrap().len(), 23);
        assert_eq!(enumerate_families(&f2, &et(2, 2, 2)).unwrap().len(), 12);
        assert_eq!(enumerate_families(&f2, &et(1, 1, 1)).unwrap().len(), 10);
        assert_eq!(enumerate_families(&f2, &et(3, 2, 1)).unwrap().len(), 34);
        assert_eq!(enumerate_families(&f2, &et(3, 2, 2)).unwrap().len(), 22);
        assert_eq!(enumerate_families(&f2, &et(2, 2, 1)).unwrap().len(), 22);
        // Odd p: counted from the tables.
        let f3 = ctx(3);
        assert_eq!(enumerate_families(&f3, &et(3, 2, 1)).unwrap().len(), 46);
        assert_eq!(enumerate_families(&f3, &et(2, 1, 1)).unwrap().len(), 30);
        assert_eq!(enumerate_families(&f3, &et(2, 2, 1)).unwrap().len(), 30);
        assert_eq!(enumerate_families(&f3, &et(1, 1, 1)).unwrap().len(), 16);
        let f5 = ctx(5);
        assert_eq!(enumerate_families(&f5, &et(3, 2, 1)).unwrap().len(), 58);
        assert_eq!(enumerate_families(&f5, &et(2, 1, 1)).unwrap().len(), 38);
        assert_eq!(enumerate_families(&f5, &et(2, 2, 1)).unwrap().len(), 38);
        assert_eq!(enumerate_families(&f5, &et(1, 1, 1)).unwrap().len(), 20);
    }

    #[test]
    fn every_enumerated_family_instantiates() {
        for (p, m) in [
            (2u32, (3u32, 2u32, 1u32)),
            (2, (3, 2, 2)),
            (2, (2, 2, 1)),
            (2, (2, 1, 1)),
            (2, (2, 2, 2)),
            (2, (1, 1, 1)),
            (3, (3, 2, 1)),
            (3, (2, 1, 1)),
            (3, (2, 2, 1)),
            (3, (1, 1, 1)),
            (5, (3, 2, 1)),
        ] {
            let c = ctx(p);
            let e = et(m.0, m.1, m.2);
            let labels = enumerate_families(&c, &e).unwrap();
            let mut reps = std::collections::BTreeSet::new();
            for label in &labels {
                let rep = representative(&c, &e, label).unwrap();
                assert!(reps.insert(rep.w.index(p)), "duplicate representative for {label}");
            }
        }
    }
}
