//! Deterministic canonicalization of a characteristic matrix to its labeled
//! family, with a witness transform.
//!
//! Three mechanisms cover the six case tags:
//!
//! * constructive reduction pipelines for Strict / Top / Equal (odd p), and
//!   Bottom by conjugating through the Top case with the fixed cyclic
//!   permutation;
//! * orbit lookup tables for the two p = 2 table cases (M/N/O and P/Q/R),
//!   where the action space has 512 matrices;
//! * brute-force group isomorphism against the ten reference presentations
//!   for p = 2, m = (1,1,1), which has no matrix action.
//!
//! `classify` re-checks its own witness on every call: the returned
//! transform must map the input exactly onto the family representative.

mod equal;
mod strict;
mod top;

use crate::action::{
    apply, case_tag, enumerate_transforms, orbit_partition, CaseTag, CharMatrix, ExponentType,
    IsoTransform, DEFAULT_TRANSFORM_CAP,
};
use crate::error::{Error, Result};
use crate::family::{enumerate_families, representative, FamilyLabel, Series};
use crate::field::{Fp, PrimeContext};
use crate::group::{self, presentation};
use crate::mat::{space_size, Mat3};
use crate::report::{VerificationReport, Violation};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

/// Shared state of the reduction pipelines: the current matrix plus the
/// accumulated witness.
pub(crate) struct Reducer {
    pub ctx: PrimeContext,
    pub etype: ExponentType,
    pub cur: Mat3,
    pub acc: IsoTransform,
}

impl Reducer {
    pub fn new(w: &CharMatrix) -> Result<Reducer> {
        Ok(Reducer {
            ctx: w.ctx,
            etype: w.etype,
            cur: w.w,
            acc: IsoTransform::identity(w.ctx, w.etype)?,
        })
    }

    pub fn identity_params(&self) -> [Fp; 9] {
        let mut params = [crate::field::ZERO; 9];
        for i in 0..3 {
            params[3 * i + i] = crate::field::ONE;
        }
        params
    }

    pub fn step(&mut self, t: IsoTransform) -> Result<()> {
        let moved = apply(&t, &CharMatrix::new(self.ctx, self.etype, self.cur))?;
        self.cur = moved.w;
        self.acc = t.compose(&self.acc)?;
        Ok(())
    }

    pub fn step_params(&mut self, params: [Fp; 9]) -> Result<()> {
        self.step(IsoTransform::from_params(self.ctx, self.etype, params)?)
    }

    /// Row operation: row `dst` += c * row `src` (dst > src), realized on
    /// the X2 side.
    pub fn row_op(&mut self, dst: usize, src: usize, c: Fp) -> Result<()> {
        debug_assert!(dst > src);
        if c == crate::field::ZERO {
            return Ok(());
        }
        let mut params = self.identity_params();
        params[3 * dst + src] = c;
        self.step_params(params)
    }

    /// Column operation: column `dst` += c * column `src` (dst < src),
    /// realized on the X side.
    pub fn col_op(&mut self, dst: usize, src: usize, c: Fp) -> Result<()> {
        debug_assert!(dst < src);
        if c == crate::field::ZERO {
            return Ok(());
        }
        let mut params = self.identity_params();
        params[3 * dst + src] = c;
        self.step_params(params)
    }

    pub fn diag_op(&mut self, d: [Fp; 3]) -> Result<()> {
        let mut params = self.identity_params();
        for i in 0..3 {
            params[3 * i + i] = d[i];
        }
        self.step_params(params)
    }
}

/// Classifies `w`, returning its family label and a witness transform that
/// maps `w` exactly onto the family representative.
pub fn classify(w: &CharMatrix) -> Result<(FamilyLabel, IsoTransform)> {
    let tag = w.tag();
    let (label, witness) = match tag {
        CaseTag::Strict => strict::classify(w)?,
        CaseTag::Top => top::classify(w)?,
        CaseTag::Bottom => classify_bottom(w)?,
        CaseTag::Equal if !w.ctx.is_two() => equal::classify(w)?,
        CaseTag::Equal | CaseTag::P2Special => classify_p2_lookup(w)?,
        CaseTag::P2Tiny => return Err(Error::TinyCase),
    };
    // Soundness check, always on.
    let rep = representative(&w.ctx, &w.etype, &label)?;
    let got = apply(&witness, w)?;
    if got.w != rep.w {
        return Err(Error::Internal(format!(
            "witness maps {:?} to {:?}, but {} has representative {:?}",
            w.w, got.w, label, rep.w
        )));
    }
    Ok((label, witness))
}

/// The cyclic permutation conjugating the Bottom action into the Top action.
fn cyclic_p(ctx: &PrimeContext) -> Mat3 {
    Mat3::from_i64(ctx, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
}

/// Formal Top exponent type used for the conjugated classification; the
/// pipelines depend only on the case tag.
fn formal_top_etype() -> ExponentType {
    ExponentType::new(3, 2, 2).expect("valid")
}

/// m1 = m2 > m3: conjugate by the cyclic permutation, transpose, classify in
/// the Top case and mirror the label back (D->G, E->H, F->I, same index and
/// parameters).
fn classify_bottom(w: &CharMatrix) -> Result<(FamilyLabel, IsoTransform)> {
    let ctx = &w.ctx;
    let p = cyclic_p(ctx);
    let v = p.mul(&w.w.transpose(), ctx).mul(&p.transpose(), ctx);
    let top_w = CharMatrix::new(w.ctx, formal_top_etype(), v);
    let (top_label, top_t) = top::classify(&top_w)?;
    let series = match top_label.series {
        Series::D => Series::G,
        Series::E => Series::H,
        Series::F => Series::I,
        s => return Err(Error::Internal(format!("unexpected Top series {s}"))),
    };
    let label = FamilyLabel { series, index: top_label.index, params: top_label.params };
    // Undo the conjugation on the witness: X = P^t X2' P, X2 = P^t X' P.
    let x = p.transpose().mul(top_t.x2(), ctx).mul(&p, ctx);
    let x2 = p.transpose().mul(top_t.x(), ctx).mul(&p, ctx);
    let witness = IsoTransform::from_parts(w.ctx, w.etype, x, x2)?;
    Ok((label, witness))
}

/// Key for the p = 2 lookup caches.
#[derive(PartialEq, Eq, Hash, Clone, Copy)]
enum P2Case {
    Special,
    Equal,
}

struct P2Table {
    /// Canonical orbit member -> family label.
    labels: HashMap<u32, FamilyLabel>,
}

fn p2_tables() -> &'static Mutex<HashMap<P2Case, &'static P2Table>> {
    static TABLES: OnceLock<Mutex<HashMap<P2Case, &'static P2Table>>> = OnceLock::new();
    TABLES.get_or_init(|| Mutex::new(HashMap::new()))
}

fn p2_table(w: &CharMatrix) -> Result<&'static P2Table> {
    let case = match w.tag() {
        CaseTag::P2Special => P2Case::Special,
        CaseTag::Equal => P2Case::Equal,
        _ => return Err(Error::Internal("not a p = 2 table case".into())),
    };
    let mut guard = p2_tables().lock().expect("table lock");
    if let Some(t) = guard.get(&case) {
        return Ok(t);
    }
    let partition = orbit_partition(w.ctx, w.etype)?;
    let mut labels: HashMap<u32, FamilyLabel> = HashMap::new();
    for label in enumerate_families(&w.ctx, &w.etype)? {
        let rep = representative(&w.ctx, &w.etype, &label)?;
        let canon = partition.canonical_of(&rep.w);
        if labels.insert(canon, label).is_some() {
            return Err(Error::Internal(format!(
                "two table representatives share an orbit near {label}"
            )));
        }
    }
    if labels.len() != partition.orbit_count() {
        return Err(Error::Internal(format!(
            "{} table entries for {} orbits",
            labels.len(),
            partition.orbit_count()
        )));
    }
    let mut full: HashMap<u32, FamilyLabel> = HashMap::new();
    for idx in 0..space_size(2) as u32 {
        full.insert(idx, labels[&partition.canonical(idx)]);
    }
    let table: &'static P2Table = Box::leak(Box::new(P2Table { labels: full }));
    guard.insert(case, table);
    Ok(table)
}

/// p = 2 table cases: orbit lookup plus a direct witness search (the action
/// realizes isomorphism, so one application reaches the representative).
fn classify_p2_lookup(w: &CharMatrix) -> Result<(FamilyLabel, IsoTransform)> {
    let table = p2_table(w)?;
    let label = table.labels[&w.w.index(2)];
    let rep = representative(&w.ctx, &w.etype, &label)?;
    for t in enumerate_transforms(w.ctx, w.etype, DEFAULT_TRANSFORM_CAP)? {
        if apply(&t, w)?.w == rep.w {
            return Ok((label, t));
        }
    }
    Err(Error::Internal(format!(
        "no single transform maps {:?} onto its representative {label}",
        w.w
    )))
}

/// Classification for p = 2, m = (1,1,1): build the concrete order-64 group
/// and identify it among the ten reference groups by brute-force
/// isomorphism.
pub fn classify_tiny(w: &CharMatrix) -> Result<FamilyLabel> {
    if w.tag() != CaseTag::P2Tiny {
        return Err(Error::Internal("classify_tiny requires p = 2, m = (1,1,1)".into()));
    }
    static TABLE: OnceLock<std::result::Result<Vec<u8>, Error>> = OnceLock::new();
    let table = TABLE
        .get_or_init(|| {
            let refs = presentation::s_reference_specs()?;
            // The ten references must be pairwise non-isomorphic.
            for i in 0..refs.len() {
                for j in (i + 1)..refs.len() {
                    if group::brute_isomorphic(&refs[i], &refs[j])?.is_some() {
                        return Err(Error::Internal(format!(
                            "reference groups S{} and S{} are isomorphic",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
            let ctx = PrimeContext::new(2)?;
            let etype = ExponentType::new(1, 1, 1)?;
            let classes: Vec<u8> = (0..512u32)
                .into_par_iter()
                .map(|idx| {
                    let spec = group::GroupSpec::new(ctx, etype, Mat3::from_index(2, idx))
                        .expect("order 64");
                    for (k, r) in refs.iter().enumerate() {
                        if group::brute_isomorphic(&spec, r).expect("feasible").is_some() {
                            return k as u8 + 1;
                        }
                    }
                    u8::MAX
                })
                .collect();
            if classes.iter().any(|&c| c == u8::MAX) {
                return Err(Error::Internal(
                    "an order-64 group matched none of the ten references".into(),
                ));
            }
            Ok(classes)
        })
        .as_ref()
        .map_err(Clone::clone)?;
    let idx = w.w.index(2) as usize;
    Ok(FamilyLabel::plain(Series::S, table[idx]))
}

/// Exhaustively partitions the p^9 matrix space and checks the table:
/// orbit count = enumerated family count, one representative per orbit, and
/// `classify` agrees with the partition on every matrix.
pub fn verify_transversal(ctx: &PrimeContext, etype: &ExponentType) -> Result<VerificationReport> {
    if case_tag(ctx, etype) == CaseTag::P2Tiny {
        return Err(Error::TinyCase);
    }
    let start = Instant::now();
    let p = ctx.p();
    let n = space_size(p) as u32;
    let partition = orbit_partition(*ctx, *etype)?;
    let mut violations: Vec<Violation> = Vec::new();

    let families = enumerate_families(ctx, etype)?;
    let mut rep_of: HashMap<u32, FamilyLabel> = HashMap::new();
    for label in &families {
        let rep = representative(ctx, etype, label)?;
        let canon = partition.canonical_of(&rep.w);
        if let Some(prev) = rep_of.insert(canon, *label) {
            violations.push(Violation {
                matrix: rep.w.to_literal(),
                detail: format!("representatives {prev} and {label} share an orbit"),
            });
        }
    }
    if partition.orbit_count() != families.len() {
        violations.push(Violation {
            matrix: String::new(),
            detail: format!(
                "{} orbits vs {} enumerated families",
                partition.orbit_count(),
                families.len()
            ),
        });
    }
    for &(canon, _) in partition.orbits() {
        if !rep_of.contains_key(&canon) {
            violations.push(Violation {
                matrix: Mat3::from_index(p, canon).to_literal(),
                detail: "orbit contains no table representative".into(),
            });
        }
    }

    // classify() must agree with the orbit partition everywhere.
    let mismatches: Vec<Violation> = (0..n)
        .into_par_iter()
        .filter_map(|idx| {
            let w = CharMatrix::new(*ctx, *etype, Mat3::from_index(p, idx));
            let canon = partition.canonical(idx);
            match classify(&w) {
                Ok((label, _)) => {
                    let expected = rep_of.get(&canon);
                    if expected != Some(&label) {
                        Some(Violation {
                            matrix: w.w.to_literal(),
                            detail: format!(
                                "classified as {label}, orbit table says {:?}",
                                expected.map(|l| l.to_string())
                            ),
                        })
                    } else {
                        None
                    }
                }
                Err(e) => Some(Violation {
                    matrix: w.w.to_literal(),
                    detail: format!("classify failed: {e}"),
                }),
            }
        })
        .collect();
    violations.extend(mismatches.into_iter().take(25));

    let orbit_sizes: Vec<usize> = partition.orbits().iter().map(|&(_, s)| s).collect();
    Ok(VerificationReport {
        orbit_count: partition.orbit_count(),
        orbit_sizes,
        violations,
        elapsed: start.elapsed().as_secs_f64(),
    })
}
