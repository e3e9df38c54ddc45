//! Ground-truth oracle: the concrete group G(p, m, w) of order
//! p^(m1+m2+m3+3).
//!
//! Elements are kept in the normal form a1^i1 a2^i2 a3^i3 x^e1 y^e2 z^e3
//! with x = [a2,a3], y = [a3,a1], z = [a1,a2] central of order p and
//! a_k^(p^mk) = x^(w_k1) y^(w_k2) z^(w_k3). Multiplication is collection in
//! a class-2 group: moving a1^j1 past a2^i2, a3^i3 and a2^j2 past a3^i3
//! contributes x^(-i3 j2) y^(i3 j1) z^(-i2 j1), then component sums carry
//! into the w-rows. The commutator convention is [g,h] = g^-1 h^-1 g h.

pub mod presentation;

use crate::action::{CharMatrix, ExponentType};
use crate::error::{Error, Result};
use crate::field::{Fp, PrimeContext, ONE, ZERO};
use crate::mat::Mat3;
use crate::report::CheckReport;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};

/// Feasibility caps for the oracle's exhaustive operations.
#[derive(Copy, Clone, Debug)]
pub struct GroupCaps {
    /// Largest order for which a group is constructed at all.
    pub order: u32,
    /// Largest order for materialized A1-subgroup enumeration.
    pub a1: u32,
    /// Largest order for full subgroup-lattice enumeration.
    pub lattice: u32,
    /// Largest order for brute-force isomorphism search.
    pub iso: u32,
}

impl Default for GroupCaps {
    fn default() -> Self {
        // order: 3^8 element-level work; a1: 3^6 / 2^9; lattice: 2^6; iso: 2^9.
        GroupCaps { order: 6561, a1: 729, lattice: 64, iso: 512 }
    }
}

/// Concrete group determined by (p, exponent type, characteristic matrix).
#[derive(Copy, Clone, Debug)]
pub struct GroupSpec {
    pub ctx: PrimeContext,
    pub etype: ExponentType,
    pub w: Mat3,
    pm: [u32; 3],
    order: u32,
    caps: GroupCaps,
}

/// Group element in normal form; `i[k] < p^mk`, `e` reduced mod p.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroupElement {
    pub i: [u32; 3],
    pub e: [Fp; 3],
}

/// A subgroup as a canonical sorted element-code set plus the generators it
/// was built from.
#[derive(Clone, Debug)]
pub struct SubgroupHandle {
    pub elements: Vec<u32>,
    pub generators: Vec<GroupElement>,
}

impl SubgroupHandle {
    pub fn order(&self) -> u32 {
        self.elements.len() as u32
    }

    pub fn contains(&self, code: u32) -> bool {
        self.elements.binary_search(&code).is_ok()
    }
}

impl GroupSpec {
    pub fn new(ctx: PrimeContext, etype: ExponentType, w: Mat3) -> Result<Self> {
        Self::with_caps(ctx, etype, w, GroupCaps::default())
    }

    pub fn with_caps(
        ctx: PrimeContext,
        etype: ExponentType,
        w: Mat3,
        caps: GroupCaps,
    ) -> Result<Self> {
        let p = ctx.p() as u64;
        let m = etype.m();
        let mut order: u64 = p.pow(3);
        let mut pm = [0u32; 3];
        for k in 0..3 {
            let f = p
                .checked_pow(m[k])
                .ok_or(Error::OrderCap(u64::MAX, caps.order as u64))?;
            order = order
                .checked_mul(f)
                .ok_or(Error::OrderCap(u64::MAX, caps.order as u64))?;
            pm[k] = f as u32;
        }
        if order > caps.order as u64 {
            return Err(Error::OrderCap(order, caps.order as u64));
        }
        Ok(GroupSpec { ctx, etype, w, pm, order: order as u32, caps })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn caps(&self) -> GroupCaps {
        self.caps
    }

    pub fn power_exponents(&self) -> [u32; 3] {
        self.pm
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { i: [0; 3], e: [ZERO; 3] }
    }

    /// The generator a_(k+1), k in 0..3.
    pub fn gen_a(&self, k: usize) -> GroupElement {
        let mut g = self.identity();
        g.i[k] = 1;
        g
    }

    /// The central basis x, y, z of G'.
    pub fn gen_central(&self, k: usize) -> GroupElement {
        let mut g = self.identity();
        g.e[k] = ONE;
        g
    }

    pub fn encode(&self, g: &GroupElement) -> u32 {
        let p = self.ctx.p();
        let mut code = 0u32;
        for k in 0..3 {
            code = code * self.pm[k] + g.i[k];
        }
        for k in 0..3 {
            code = code * p + g.e[k].0;
        }
        code
    }

    pub fn decode(&self, mut code: u32) -> GroupElement {
        let p = self.ctx.p();
        let mut g = self.identity();
        for k in (0..3).rev() {
            g.e[k] = Fp(code % p);
            code /= p;
        }
        for k in (0..3).rev() {
            g.i[k] = code % self.pm[k];
            code /= self.pm[k];
        }
        g
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(|c| self.decode(c))
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let ctx = &self.ctx;
        let p64 = ctx.p() as u64;
        // Collection: x^(-i3 j2) y^(i3 j1) z^(-i2 j1).
        let red = |a: u32, b: u32| Fp(((a as u64 * b as u64) % p64) as u32);
        let cx = ctx.neg(red(g.i[2], h.i[1]));
        let cy = red(g.i[2], h.i[0]);
        let cz = ctx.neg(red(g.i[1], h.i[0]));
        let mut e = [
            ctx.add(ctx.add(g.e[0], h.e[0]), cx),
            ctx.add(ctx.add(g.e[1], h.e[1]), cy),
            ctx.add(ctx.add(g.e[2], h.e[2]), cz),
        ];
        let mut i = [0u32; 3];
        for k in 0..3 {
            let s = g.i[k] + h.i[k];
            if s >= self.pm[k] {
                i[k] = s - self.pm[k];
                for t in 0..3 {
                    e[t] = ctx.add(e[t], self.w.0[k][t]);
                }
            } else {
                i[k] = s;
            }
        }
        GroupElement { i, e }
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        let mut j = [0u32; 3];
        for k in 0..3 {
            j[k] = (self.pm[k] - g.i[k]) % self.pm[k];
        }
        let probe = GroupElement { i: j, e: [ZERO; 3] };
        let prod = self.mul(g, &probe);
        debug_assert_eq!(prod.i, [0; 3]);
        let e = [
            self.ctx.neg(prod.e[0]),
            self.ctx.neg(prod.e[1]),
            self.ctx.neg(prod.e[2]),
        ];
        let inv = GroupElement { i: j, e };
        debug_assert_eq!(self.mul(g, &inv), self.identity());
        inv
    }

    pub fn pow(&self, g: &GroupElement, mut n: u64) -> GroupElement {
        let mut acc = self.identity();
        let mut base = *g;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// [g,h] = g^-1 h^-1 g h.
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let gi = self.inv(g);
        let hi = self.inv(h);
        self.mul(&self.mul(&gi, &hi), &self.mul(g, h))
    }

    /// Order of g (a power of p).
    pub fn order_of(&self, g: &GroupElement) -> u64 {
        let p = self.ctx.p() as u64;
        let mut t = *g;
        let mut ord = 1u64;
        while t != self.identity() {
            t = self.pow(&t, p);
            ord *= p;
        }
        ord
    }

    /// Order of g G' in G/G'.
    pub fn coset_order(&self, g: &GroupElement) -> u64 {
        let mut ord = 1u64;
        for k in 0..3 {
            let gcd = gcd_u64(g.i[k] as u64, self.pm[k] as u64);
            ord = ord.max(self.pm[k] as u64 / gcd);
        }
        ord
    }

    pub fn in_derived(&self, g: &GroupElement) -> bool {
        g.i == [0; 3]
    }

    pub fn in_frattini(&self, g: &GroupElement) -> bool {
        let p = self.ctx.p();
        g.i.iter().all(|&ik| ik % p == 0)
    }

    /// Image of g in G/Phi(G), identified with F_p^3.
    pub fn frattini_coords(&self, g: &GroupElement) -> [Fp; 3] {
        let p = self.ctx.p();
        [Fp(g.i[0] % p), Fp(g.i[1] % p), Fp(g.i[2] % p)]
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        gcd_u64(b % a, a)
    }
}

/// Deterministic generator for sampled checks.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self, bound: u32) -> u32 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 33) % bound as u64) as u32
    }
}

const FULL_ASSOC_LIMIT: u32 = 256;
const ASSOC_SAMPLES: u32 = 100_000;

/// Structural checks of the presentation: group axioms, Phi(G) <= Z(G),
/// G' elementary abelian of order p^3, d(G) = 3 and the G/G' type.
pub fn verify_consistency(spec: &GroupSpec) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let ctx = &spec.ctx;
    let id = spec.identity();

    let mut ok = true;
    for g in spec.elements() {
        if spec.mul(&g, &id) != g || spec.mul(&id, &g) != g || spec.mul(&g, &spec.inv(&g)) != id {
            ok = false;
            break;
        }
    }
    report.push("identity_and_inverses", ok, format!("order {}", spec.order()));

    let assoc_ok = if spec.order() <= FULL_ASSOC_LIMIT {
        let all: Vec<GroupElement> = spec.elements().collect();
        let mut ok = true;
        'outer: for a in &all {
            for b in &all {
                let ab = spec.mul(a, b);
                for c in &all {
                    if spec.mul(&ab, c) != spec.mul(a, &spec.mul(b, c)) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        report.push("associativity", ok, "exhaustive");
        ok
    } else {
        let mut rng = Lcg(0);
        let mut ok = true;
        for _ in 0..ASSOC_SAMPLES {
            let a = spec.decode(rng.next(spec.order()));
            let b = spec.decode(rng.next(spec.order()));
            let c = spec.decode(rng.next(spec.order()));
            if spec.mul(&spec.mul(&a, &b), &c) != spec.mul(&a, &spec.mul(&b, &c)) {
                ok = false;
                break;
            }
        }
        report.push("associativity", ok, format!("{ASSOC_SAMPLES} sampled triples"));
        ok
    };
    if !assoc_ok {
        return Ok(report);
    }

    // Defining commutators.
    let a = [spec.gen_a(0), spec.gen_a(1), spec.gen_a(2)];
    let xyz = [spec.gen_central(0), spec.gen_central(1), spec.gen_central(2)];
    let comm_ok = spec.commutator(&a[1], &a[2]) == xyz[0]
        && spec.commutator(&a[2], &a[0]) == xyz[1]
        && spec.commutator(&a[0], &a[1]) == xyz[2];
    report.push("defining_commutators", comm_ok, "x=[a2,a3], y=[a3,a1], z=[a1,a2]");

    // Power relations a_k^(p^mk) = w-row.
    let mut pow_ok = true;
    for k in 0..3 {
        let got = spec.pow(&a[k], spec.pm[k] as u64);
        let want = GroupElement { i: [0; 3], e: spec.w.0[k] };
        if got != want {
            pow_ok = false;
        }
    }
    report.push("power_relations", pow_ok, "a_k^(p^mk) matches the matrix row");

    // G' = <x,y,z> is C_p^3 and central.
    let derived = subgroup_closure(spec, &xyz)?;
    let p3 = ctx.p().pow(3);
    let mut central = true;
    for &code in &derived.elements {
        let g = spec.decode(code);
        if (0..3).any(|k| spec.commutator(&g, &a[k]) != id) {
            central = false;
            break;
        }
    }
    let exp_p = derived
        .elements
        .iter()
        .all(|&c| spec.pow(&spec.decode(c), ctx.p() as u64) == id);
    report.push(
        "derived_subgroup",
        derived.order() == p3 && central && exp_p,
        format!(
            "|G'| = {} (want {p3}), central: {central}, exponent p: {exp_p}",
            derived.order()
        ),
    );

    // Phi(G) <= Z(G) and d(G) = 3.
    let mut phi_gens = vec![xyz[0], xyz[1], xyz[2]];
    for k in 0..3 {
        phi_gens.push(spec.pow(&a[k], ctx.p() as u64));
    }
    let phi = subgroup_closure(spec, &phi_gens)?;
    let mut phi_central = true;
    for &code in &phi.elements {
        let g = spec.decode(code);
        if (0..3).any(|k| spec.commutator(&g, &a[k]) != id) {
            phi_central = false;
            break;
        }
    }
    let d = spec.order() / phi.order();
    report.push(
        "frattini_central_and_rank",
        phi_central && d == p3,
        format!("|G/Phi| = {d} (want {p3}), Phi central: {phi_central}"),
    );

    // G/G' type.
    let mut type_ok = true;
    for k in 0..3 {
        if spec.coset_order(&a[k]) != spec.pm[k] as u64 {
            type_ok = false;
        }
    }
    let index_ok = spec.order() as u64
        == spec.pm.iter().map(|&v| v as u64).product::<u64>() * p3 as u64;
    report.push(
        "abelianization_type",
        type_ok && index_ok,
        format!("type ({}, {}, {})", spec.pm[0], spec.pm[1], spec.pm[2]),
    );
    Ok(report)
}

/// Closure under products by the generators; worklist algorithm.
pub fn subgroup_closure(spec: &GroupSpec, gens: &[GroupElement]) -> Result<SubgroupHandle> {
    let mut seen = vec![false; spec.order() as usize];
    let mut queue = vec![spec.identity()];
    seen[spec.encode(&spec.identity()) as usize] = true;
    let mut head = 0;
    while head < queue.len() {
        let cur = queue[head];
        head += 1;
        for g in gens {
            let next = spec.mul(&cur, g);
            let code = spec.encode(&next) as usize;
            if !seen[code] {
                seen[code] = true;
                queue.push(next);
            }
        }
    }
    let mut elements: Vec<u32> = queue.iter().map(|g| spec.encode(g)).collect();
    elements.sort_unstable();
    Ok(SubgroupHandle { elements, generators: gens.to_vec() })
}

/// Normality by conjugating every subgroup element by the three generators
/// (they generate G, so this suffices).
pub fn is_normal(spec: &GroupSpec, h: &SubgroupHandle) -> bool {
    let a = [spec.gen_a(0), spec.gen_a(1), spec.gen_a(2)];
    for &code in &h.elements {
        let el = spec.decode(code);
        for g in &a {
            // el^g = el * [el, g]; commutators are central.
            let conj = spec.mul(&el, &spec.commutator(&el, g));
            if !h.contains(spec.encode(&conj)) {
                return false;
            }
        }
    }
    true
}

/// Two-generator subgroup of the class-2 group, materialized as a sorted
/// code set: H = { g^a h^b c : a, b < p, c in Phi(H) } with
/// Phi(H) = <g^p, h^p, [g,h]> central.
struct TwoGen {
    g: GroupElement,
    h: GroupElement,
    com: GroupElement,
    codes: Vec<u32>,
}

impl TwoGen {
    fn build(spec: &GroupSpec, g: GroupElement, h: GroupElement, com: GroupElement) -> TwoGen {
        let p = spec.ctx.p() as u64;
        let gp = spec.pow(&g, p);
        let hp = spec.pow(&h, p);
        // Phi(H) is abelian (inside Phi(G) <= Z(G)).
        let mut phi: HashSet<u32> = HashSet::new();
        let o_gp = spec.order_of(&gp);
        let o_hp = spec.order_of(&hp);
        let mut acc_a = spec.identity();
        for _ in 0..o_gp {
            let mut acc_b = acc_a;
            for _ in 0..o_hp {
                let mut acc_c = acc_b;
                for _ in 0..p {
                    phi.insert(spec.encode(&acc_c));
                    acc_c = spec.mul(&acc_c, &com);
                }
                acc_b = spec.mul(&acc_b, &hp);
            }
            acc_a = spec.mul(&acc_a, &gp);
        }
        let phi_elems: Vec<GroupElement> = phi.iter().map(|&c| spec.decode(c)).collect();
        let mut codes = Vec::with_capacity(phi.len() * (p * p) as usize);
        let mut ga = spec.identity();
        for _ in 0..p {
            let mut gahb = ga;
            for _ in 0..p {
                for c in &phi_elems {
                    codes.push(spec.encode(&spec.mul(&gahb, c)));
                }
                gahb = spec.mul(&gahb, &h);
            }
            ga = spec.mul(&ga, &g);
        }
        codes.sort_unstable();
        codes.dedup();
        TwoGen { g, h, com, codes }
    }

    fn contains(&self, code: u32) -> bool {
        self.codes.binary_search(&code).is_ok()
    }
}

/// Lines in F_p^3 written as canonical normal vectors (first nonzero = 1);
/// their orthogonal complements run over all 2-dimensional subspaces.
fn plane_normals(p: u32) -> Vec<[Fp; 3]> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                let v = [Fp(a), Fp(b), Fp(c)];
                if v == [ZERO; 3] {
                    continue;
                }
                let first = v.iter().find(|x| **x != ZERO).unwrap();
                if *first == ONE {
                    out.push(v);
                }
            }
        }
    }
    out
}

fn plane_basis(ctx: &PrimeContext, n: [Fp; 3]) -> [[Fp; 3]; 2] {
    let dot = |u: &[Fp; 3], v: &[Fp; 3]| {
        ctx.add(ctx.add(ctx.mul(u[0], v[0]), ctx.mul(u[1], v[1])), ctx.mul(u[2], v[2]))
    };
    let mut basis: Vec<[Fp; 3]> = Vec::new();
    for a in 0..ctx.p() {
        for b in 0..ctx.p() {
            for c in 0..ctx.p() {
                let v = [Fp(a), Fp(b), Fp(c)];
                if v == [ZERO; 3] || dot(&n, &v) != ZERO {
                    continue;
                }
                if basis.is_empty() {
                    basis.push(v);
                } else {
                    let b0 = basis[0];
                    let multiple = ctx
                        .elements()
                        .any(|s| [ctx.mul(s, b0[0]), ctx.mul(s, b0[1]), ctx.mul(s, b0[2])] == v);
                    if !multiple {
                        return [basis[0], v];
                    }
                }
            }
        }
    }
    unreachable!("a plane has a two-element basis")
}

/// Visits every A1-subgroup of the group: plane by plane in G/Phi(G), all
/// lifts of a fixed basis by Phi(G) elements, keeping the non-commuting
/// pairs. Every A1-subgroup is 2-generated with Frattini image a full plane,
/// so the sweep is exhaustive (with repetition).
fn scan_a1<F>(spec: &GroupSpec, mut visit: F) -> Result<()>
where
    F: FnMut(&TwoGen) -> bool,
{
    let ctx = &spec.ctx;
    let phi: Vec<GroupElement> = spec.elements().filter(|g| spec.in_frattini(g)).collect();
    for n in plane_normals(ctx.p()) {
        let [b1, b2] = plane_basis(ctx, n);
        let g0 = GroupElement { i: [b1[0].0, b1[1].0, b1[2].0], e: [ZERO; 3] };
        let h0 = GroupElement { i: [b2[0].0, b2[1].0, b2[2].0], e: [ZERO; 3] };
        for f1 in &phi {
            let g = spec.mul(&g0, f1);
            for f2 in &phi {
                let h = spec.mul(&h0, f2);
                let com = spec.commutator(&g, &h);
                if com == spec.identity() {
                    continue;
                }
                let tg = TwoGen::build(spec, g, h, com);
                if !visit(&tg) {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Materialized list of all A1-subgroups, deduplicated by element set.
pub fn enumerate_a1(spec: &GroupSpec) -> Result<Vec<SubgroupHandle>> {
    if spec.order() > spec.caps.a1 {
        return Err(Error::OrderCap(spec.order() as u64, spec.caps.a1 as u64));
    }
    let p = spec.ctx.p() as u64;
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::new();
    scan_a1(spec, |tg| {
        // The A1 criterion, computed honestly: d(H) = 2 and |H'| = p.
        let phi_h = tg.codes.len() as u64 / (p * p);
        debug_assert_eq!(tg.codes.len() as u64, phi_h * p * p);
        debug_assert_eq!(spec.order_of(&tg.com), p);
        if seen.insert(tg.codes.clone()) {
            out.push(SubgroupHandle { elements: tg.codes.clone(), generators: vec![tg.g, tg.h] });
        }
        true
    })?;
    Ok(out)
}

/// Min/max index exponents of A1-subgroups, with witness generators.
pub struct OracleInvariants {
    pub i_min: u32,
    pub i_max: u32,
    pub min_witness: [GroupElement; 2],
    pub max_witness: [GroupElement; 2],
}

pub fn oracle_invariants(spec: &GroupSpec) -> Result<OracleInvariants> {
    let p = spec.ctx.p();
    let mut best: Option<OracleInvariants> = None;
    scan_a1(spec, |tg| {
        let index = spec.order() / tg.codes.len() as u32;
        let exp = log_p(index, p);
        match &mut best {
            None => {
                best = Some(OracleInvariants {
                    i_min: exp,
                    i_max: exp,
                    min_witness: [tg.g, tg.h],
                    max_witness: [tg.g, tg.h],
                })
            }
            Some(b) => {
                if exp < b.i_min {
                    b.i_min = exp;
                    b.min_witness = [tg.g, tg.h];
                }
                if exp > b.i_max {
                    b.i_max = exp;
                    b.max_witness = [tg.g, tg.h];
                }
            }
        }
        true
    })?;
    best.ok_or_else(|| Error::Internal("no A1-subgroup found".into()))
}

fn log_p(mut n: u32, p: u32) -> u32 {
    let mut e = 0;
    while n > 1 {
        debug_assert_eq!(n % p, 0);
        n /= p;
        e += 1;
    }
    e
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum MetaMode {
    /// Every non-normal subgroup is abelian (full lattice walk).
    Full,
    /// Necessary condition: every A1-subgroup is normal and contains G'.
    Necessary,
}

pub fn metahamiltonian_oracle(spec: &GroupSpec, mode: MetaMode) -> Result<bool> {
    match mode {
        MetaMode::Necessary => {
            let xyz: Vec<u32> = (0..3).map(|k| spec.encode(&spec.gen_central(k))).collect();
            let a = [spec.gen_a(0), spec.gen_a(1), spec.gen_a(2)];
            let ctx = &spec.ctx;
            let phi: Vec<GroupElement> =
                spec.elements().filter(|g| spec.in_frattini(g)).collect();
            let normals = plane_normals(ctx.p());
            let failed = AtomicBool::new(false);
            // Planes are independent; parallelize across them.
            normals.par_iter().for_each(|&n| {
                if failed.load(Ordering::Relaxed) {
                    return;
                }
                let [b1, b2] = plane_basis(ctx, n);
                let g0 = GroupElement { i: [b1[0].0, b1[1].0, b1[2].0], e: [ZERO; 3] };
                let h0 = GroupElement { i: [b2[0].0, b2[1].0, b2[2].0], e: [ZERO; 3] };
                for f1 in &phi {
                    if failed.load(Ordering::Relaxed) {
                        return;
                    }
                    let g = spec.mul(&g0, f1);
                    for f2 in &phi {
                        let h = spec.mul(&h0, f2);
                        let com = spec.commutator(&g, &h);
                        if com == spec.identity() {
                            continue;
                        }
                        let tg = TwoGen::build(spec, g, h, com);
                        let ok = xyz.iter().all(|&c| tg.contains(c))
                            && a.iter().all(|ak| {
                                tg.contains(spec.encode(&spec.commutator(&tg.g, ak)))
                                    && tg.contains(spec.encode(&spec.commutator(&tg.h, ak)))
                            });
                        if !ok {
                            failed.store(true, Ordering::Relaxed);
                            return;
                        }
                    }
                }
            });
            Ok(!failed.load(Ordering::Relaxed))
        }
        MetaMode::Full => {
            let subs = all_subgroups(spec)?;
            for h in &subs {
                let abelian = h.generators.iter().enumerate().all(|(i, u)| {
                    h.generators[i + 1..]
                        .iter()
                        .all(|v| spec.commutator(u, v) == spec.identity())
                });
                if !abelian && !is_normal(spec, h) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Every subgroup, by layered closure: repeatedly extend known subgroups by
/// one generator, deduplicating by element set and skipping coset repeats.
pub fn all_subgroups(spec: &GroupSpec) -> Result<Vec<SubgroupHandle>> {
    if spec.order() > spec.caps.lattice {
        return Err(Error::OrderCap(spec.order() as u64, spec.caps.lattice as u64));
    }
    let trivial = subgroup_closure(spec, &[])?;
    let mut known: BTreeMap<Vec<u32>, SubgroupHandle> = BTreeMap::new();
    known.insert(trivial.elements.clone(), trivial.clone());
    let mut frontier = vec![trivial];
    while let Some(h) = frontier.pop() {
        let mut covered = vec![false; spec.order() as usize];
        for &c in &h.elements {
            covered[c as usize] = true;
        }
        for code in 0..spec.order() {
            if covered[code as usize] {
                continue;
            }
            let g = spec.decode(code);
            let mut gens = h.generators.clone();
            gens.push(g);
            let k = subgroup_closure(spec, &gens)?;
            // <H, g'> = <H, g> for every g' in the coset Hg.
            for &c in &h.elements {
                let hg = spec.mul(&spec.decode(c), &g);
                covered[spec.encode(&hg) as usize] = true;
            }
            if !known.contains_key(&k.elements) {
                known.insert(k.elements.clone(), k.clone());
                frontier.push(k);
            }
        }
    }
    Ok(known.into_values().collect())
}

/// Searches for an isomorphism as a triple of generator images in `b`,
/// pruned by element orders and by spanning G/Phi(G). Returns the images of
/// (a1, a2, a3) when the groups are isomorphic.
pub fn brute_isomorphic(a: &GroupSpec, b: &GroupSpec) -> Result<Option<[GroupElement; 3]>> {
    if a.ctx != b.ctx || a.etype != b.etype {
        return Err(Error::ContextMismatch);
    }
    if a.order() > a.caps.iso {
        return Err(Error::OrderCap(a.order() as u64, a.caps.iso as u64));
    }
    // Cheap invariant first: element-order histogram.
    let histogram = |s: &GroupSpec| {
        let mut h: BTreeMap<u64, u32> = BTreeMap::new();
        for g in s.elements() {
            *h.entry(s.order_of(&g)).or_insert(0) += 1;
        }
        h
    };
    if histogram(a) != histogram(b) {
        return Ok(None);
    }

    let ctx = &a.ctx;
    let gens_a = [a.gen_a(0), a.gen_a(1), a.gen_a(2)];
    let orders_a: Vec<u64> = gens_a.iter().map(|g| a.order_of(g)).collect();
    let candidates: Vec<Vec<GroupElement>> = (0..3)
        .map(|k| {
            b.elements()
                .filter(|g| b.coset_order(g) == a.pm[k] as u64 && b.order_of(g) == orders_a[k])
                .collect()
        })
        .collect();
    let rank2 = |u: &[Fp; 3], v: &[Fp; 3]| -> bool {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if ctx.sub(ctx.mul(u[i], v[j]), ctx.mul(u[j], v[i])) != ZERO {
                    return true;
                }
            }
        }
        false
    };
    for g1 in &candidates[0] {
        let c1 = b.frattini_coords(g1);
        let p1 = b.pow(g1, a.pm[0] as u64);
        for g2 in &candidates[1] {
            let c2 = b.frattini_coords(g2);
            if !rank2(&c1, &c2) {
                continue;
            }
            let p2 = b.pow(g2, a.pm[1] as u64);
            let zp = b.commutator(g1, g2);
            for g3 in &candidates[2] {
                let c3 = b.frattini_coords(g3);
                if Mat3([c1, c2, c3]).det(ctx) == ZERO {
                    continue;
                }
                let xp = b.commutator(g2, g3);
                let yp = b.commutator(g3, g1);
                let p3 = b.pow(g3, a.pm[2] as u64);
                let word = |row: [Fp; 3]| {
                    let gx = b.pow(&xp, row[0].0 as u64);
                    let gy = b.pow(&yp, row[1].0 as u64);
                    let gz = b.pow(&zp, row[2].0 as u64);
                    b.mul(&b.mul(&gx, &gy), &gz)
                };
                if p1 == word(a.w.0[0]) && p2 == word(a.w.0[1]) && p3 == word(a.w.0[2]) {
                    return Ok(Some([*g1, *g2, *g3]));
                }
            }
        }
    }
    Ok(None)
}

/// Reads a characteristic matrix off the group: finds the first generating
/// triple matching the type of G/G' and expresses a_i^(p^mi) in the basis
/// of commutators the triple defines.
pub fn extract_char_matrix(spec: &GroupSpec) -> Result<CharMatrix> {
    let ctx = &spec.ctx;
    let candidates: Vec<Vec<GroupElement>> = (0..3)
        .map(|k| {
            spec.elements()
                .filter(|g| spec.coset_order(g) == spec.pm[k] as u64)
                .collect()
        })
        .collect();
    let rank2 = |u: &[Fp; 3], v: &[Fp; 3]| -> bool {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if ctx.sub(ctx.mul(u[i], v[j]), ctx.mul(u[j], v[i])) != ZERO {
                    return true;
                }
            }
        }
        false
    };
    for g1 in &candidates[0] {
        let c1 = spec.frattini_coords(g1);
        for g2 in &candidates[1] {
            let c2 = spec.frattini_coords(g2);
            if !rank2(&c1, &c2) {
                continue;
            }
            for g3 in &candidates[2] {
                let c3 = spec.frattini_coords(g3);
                if Mat3([c1, c2, c3]).det(ctx) == ZERO {
                    continue;
                }
                let x = spec.commutator(g2, g3);
                let y = spec.commutator(g3, g1);
                let z = spec.commutator(g1, g2);
                // Coordinates of the new basis inside G' (natural basis).
                let basis = Mat3([x.e, y.e, z.e]);
                let Some(inv) = basis.inverse(ctx) else {
                    return Err(Error::Internal(
                        "commutators of a generating triple must span G'".into(),
                    ));
                };
                let mut w = Mat3::zero();
                for (k, g) in [g1, g2, g3].iter().enumerate() {
                    let pw = spec.pow(g, spec.pm[k] as u64);
                    debug_assert!(spec.in_derived(&pw));
                    let row = Mat3([pw.e, [ZERO; 3], [ZERO; 3]]).mul(&inv, ctx);
                    w.0[k] = row.0[0];
                }
                return Ok(CharMatrix::new(spec.ctx, spec.etype, w));
            }
        }
    }
    Err(Error::Internal("no generating triple of the required type".into()))
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

    fn spec(p: u32, m: (u32, u32, u32), w: [[i64; 3]; 3]) -> GroupSpec {
        let c = ctx(p);
        GroupSpec::new(c, et(m.0, m.1, m.2), Mat3::from_i64(&c, w)).unwrap()
    }

    #[test]
    fn defining_commutator_convention() {
        let s = spec(3, (1, 1, 1), [[0; 3]; 3]);
        let com = s.commutator(&s.gen_a(1), &s.gen_a(2));
        assert_eq!(com, s.gen_central(0));
    }

    #[test]
    fn power_relation_example() {
        let s = spec(3, (2, 1, 1), [[1, 0, 2], [0, 1, 0], [0, 0, 1]]);
        let a1 = s.gen_a(0);
        let almost = s.pow(&a1, 8);
        let full = s.mul(&almost, &a1);
        assert_eq!(full, GroupElement { i: [0; 3], e: [Fp(1), Fp(0), Fp(2)] });
    }

    #[test]
    fn consistency_small_specs() {
        for (p, m, w) in [
            (2, (1, 1, 1), [[0i64; 3]; 3]),
            (2, (2, 1, 1), [[0, 0, 1], [1, 0, 0], [0, 0, 0]]),
            (3, (1, 1, 1), [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
            (3, (2, 1, 1), [[1, 0, 0], [0, 1, 0], [0, 0, 2]]),
        ] {
            let s = spec(p, m, w);
            let report = verify_consistency(&s).unwrap();
            assert!(report.passed(), "p={p} m={m:?}: {:?}", report.checks);
        }
    }

    #[test]
    fn all_tiny_specs_consistent() {
        // Every one of the 512 matrices yields a consistent order-64 group.
        let c = ctx(2);
        for idx in 0..512u32 {
            let s = GroupSpec::new(c, et(1, 1, 1), Mat3::from_index(2, idx)).unwrap();
            assert_eq!(s.order(), 64);
            let report = verify_consistency(&s).unwrap();
            assert!(report.passed(), "idx {idx}: {:?}", report.checks);
        }
    }

    #[test]
    fn closure_basics() {
        let s = spec(3, (1, 1, 1), [[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(subgroup_closure(&s, &[]).unwrap().order(), 1);
        let derived = subgroup_closure(
            &s,
            &[s.gen_central(0), s.gen_central(1), s.gen_central(2)],
        )
        .unwrap();
        assert_eq!(derived.order(), 27);
        assert!(is_normal(&s, &derived));
        let h = subgroup_closure(&s, &[s.gen_a(1), s.gen_a(2)]).unwrap();
        let index = s.order() / h.order();
        assert!(index == 3 || index == 9 || index == 27, "index {index}");
    }

    #[test]
    fn a1_enumeration_and_zero_matrix_invariants() {
        let s = spec(3, (1, 1, 1), [[0; 3]; 3]);
        let subs = enumerate_a1(&s).unwrap();
        assert!(!subs.is_empty());
        for h in &subs {
            let com = s.commutator(&h.generators[0], &h.generators[1]);
            assert_ne!(com, s.identity());
            assert_eq!(s.order_of(&com), 3);
            assert_eq!(h.order() % 9, 0);
        }
        // L1 = zero matrix: minimal A1 index is p^(m3+2).
        let inv = oracle_invariants(&s).unwrap();
        assert_eq!(inv.i_min, 3);
    }

    #[test]
    fn extract_round_trip_consistent() {
        let c = ctx(2);
        for idx in [0u32, 1, 7, 73, 100, 300, 511] {
            let s = GroupSpec::new(c, et(1, 1, 1), Mat3::from_index(2, idx)).unwrap();
            let w2 = extract_char_matrix(&s).unwrap();
            let s2 = GroupSpec::new(c, et(1, 1, 1), w2.w).unwrap();
            assert!(brute_isomorphic(&s, &s2).unwrap().is_some(), "idx {idx}");
        }
    }

    #[test]
    fn brute_isomorphic_reflexive() {
        let s = spec(2, (2, 1, 1), [[0, 0, 1], [1, 0, 0], [0, 0, 0]]);
        let witness = brute_isomorphic(&s, &s).unwrap().unwrap();
        let x = s.commutator(&witness[1], &witness[2]);
        assert_eq!(s.order_of(&x), 2);
    }

    #[test]
    fn order_cap_respected() {
        let c = ctx(3);
        assert!(matches!(
            GroupSpec::new(c, et(4, 4, 1), Mat3::zero()),
            Err(Error::OrderCap(_, _))
        ));
    }
}
