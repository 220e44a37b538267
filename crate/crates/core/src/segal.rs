//! System categories `C̄(⟨m₁⟩,…,⟨mₙ⟩)` over `Λ(W)`: objects `C_⟨S⟩` indexed by
//! tuples of basepoint-free subsets, with gluing isomorphisms `ρ`.

use crate::ecat::{level_diagonal, EMor, Level};
use crate::fincat::{isos, Cat, Partition};
use crate::report::{Refusal, Report};
use crate::simplicial::{circle_map, grid, nerve, TruncSSet};
use crate::sdot::{WeqSub, BUDGET};
use crate::wald::{Smc, WaldCat};
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::HashMap;

/// Index data for a context `(⟨m₁⟩,…,⟨mₙ⟩)`. A subset of `⟨m⟩ \ {0}` is a
/// bitmask, bit `e−1` standing for element `e`; tuples are numbered in mixed
/// radix with the first coordinate most significant.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub dims: Vec<usize>,
    pub tuples: Vec<Vec<u32>>,
    stride: Vec<u32>,
    /// `(tuple, coordinate, T)`; `U` is the complement of `T` in `S_i`.
    pub rho_keys: Vec<(u32, usize, u32)>,
    /// Dense lookup for `rho_keys`, slot `(x·n + i)·2^max + T`.
    rho_index: Vec<u32>,
    width: u32,
    /// Tuples by total cardinality, so every proper part comes first.
    pub order: Vec<u32>,
}

fn submasks(s: u32) -> impl Iterator<Item = u32> {
    (0..=s).filter(move |t| t & !s == 0)
}

impl Ctx {
    pub fn new(dims: &[usize]) -> Ctx {
        let mut tuples: Vec<Vec<u32>> = vec![vec![]];
        for &m in dims {
            tuples = tuples.into_iter().flat_map(|t| (0..1u32 << m).map(move |s| [t.clone(), vec![s]].concat())).collect();
        }
        let mut stride = vec![1u32; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] << dims[i + 1];
        }
        let width = 1u32 << dims.iter().copied().max().unwrap_or(0);
        let mut rho_keys = Vec::new();
        for (x, t) in tuples.iter().enumerate() {
            for (i, &s) in t.iter().enumerate() {
                for tt in submasks(s) {
                    rho_keys.push((x as u32, i, tt));
                }
            }
        }
        let mut rho_index = vec![u32::MAX; tuples.len() * dims.len() * width as usize];
        for (k, &(x, i, t)) in rho_keys.iter().enumerate() {
            rho_index[(x as usize * dims.len() + i) * width as usize + t as usize] = k as u32;
        }
        let mut order: Vec<u32> = (0..tuples.len() as u32).collect();
        order.sort_by_key(|&x| (tuples[x as usize].iter().map(|s| s.count_ones()).sum::<u32>(), x));
        Ctx { dims: dims.to_vec(), tuples, stride, rho_keys, rho_index, width, order }
    }

    pub fn n_tuples(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuple(&self, t: &[u32]) -> Option<u32> {
        if t.len() != self.dims.len() || t.iter().zip(&self.dims).any(|(&s, &m)| s >> m != 0) {
            return None;
        }
        Some(t.iter().zip(&self.stride).map(|(&s, &k)| s * k).sum())
    }

    /// `⟨S⌈_i T⟩`.
    pub fn with(&self, x: u32, i: usize, t: u32) -> u32 {
        x - self.tuples[x as usize][i] * self.stride[i] + t * self.stride[i]
    }

    pub fn rho(&self, x: u32, i: usize, t: u32) -> u32 {
        self.rho_index[(x as usize * self.dims.len() + i) * self.width as usize + t as usize]
    }

    pub fn has_empty(&self, x: u32) -> bool {
        self.tuples[x as usize].contains(&0)
    }

    pub fn is_singleton(&self, x: u32) -> bool {
        self.tuples[x as usize].iter().all(|&s| s.count_ones() == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegalSystem {
    pub context: Vec<usize>,
    /// `C_⟨S⟩` per tuple.
    pub obj: Vec<u32>,
    /// `ρ_{⟨S⟩,i,T,U}` per entry of [`Ctx::rho_keys`].
    pub rho: Vec<u32>,
}

/// The constant-`e` system with identity gluing maps.
pub fn basepoint_system(s: &Smc, ctx: &Ctx) -> SegalSystem {
    let e = s.unit();
    SegalSystem { context: ctx.dims.clone(), obj: vec![e; ctx.n_tuples()], rho: vec![s.w.id(e); ctx.rho_keys.len()] }
}

pub fn validate_segal_system(s: &Smc, sys: &SegalSystem) -> Report {
    let ctx = Ctx::new(&sys.context);
    validate_in(s, &ctx, sys)
}

fn validate_in(s: &Smc, ctx: &Ctx, sys: &SegalSystem) -> Report {
    let w = s.w;
    let mut r = Report::new();
    if sys.obj.len() != ctx.n_tuples() || sys.rho.len() != ctx.rho_keys.len() {
        r.structural("table-shape", format!("{} objects, {} gluing maps for context {:?}", sys.obj.len(), sys.rho.len(), ctx.dims));
        return r;
    }
    for (x, &o) in sys.obj.iter().enumerate() {
        if o as usize >= w.n_obj() {
            r.structural("dangling-object", format!("{:?} -> {o}", ctx.tuples[x]));
        }
    }
    for (k, &f) in sys.rho.iter().enumerate() {
        if !w.has_mor(f) {
            r.structural("dangling-morphism", format!("rho {:?} -> {f}", ctx.rho_keys[k]));
        }
    }
    if !r.is_clean() {
        return r;
    }
    let c = |x: u32| sys.obj[x as usize];
    let rho = |x: u32, i: usize, t: u32| sys.rho[ctx.rho(x, i, t) as usize];
    let name = |x: u32| format!("{:?}", ctx.tuples[x as usize]);
    let mut typed = vec![true; ctx.rho_keys.len()];
    for (k, &(x, i, t)) in ctx.rho_keys.iter().enumerate() {
        let u = ctx.tuples[x as usize][i] & !t;
        let (ct, cu) = (c(ctx.with(x, i, t)), c(ctx.with(x, i, u)));
        let f = sys.rho[k];
        match s.obj(ct, cu) {
            None if w.wedge_in_bound(ct, cu) => {
                typed[k] = false;
                r.bound("rho-typing", format!("no wedge for {} split {i}:{t:b}", name(x)));
            }
            None => {
                typed[k] = false;
                r.truncated("rho-typing", format!("no wedge for {} split {i}:{t:b}", name(x)));
            }
            Some(src) => {
                if w.src(f) != src || w.tgt(f) != c(x) {
                    typed[k] = false;
                    r.structural("rho-typing", format!("{} split {i}:{t:b}", name(x)));
                }
            }
        }
    }
    if r.structural_count > 0 {
        return r;
    }
    let ok = |x: u32, i: usize, t: u32| typed[ctx.rho(x, i, t) as usize];
    for (k, &(x, i, t)) in ctx.rho_keys.iter().enumerate() {
        if typed[k] {
            r.expect(s.inv(sys.rho[k]).is_some(), "rho-iso", || format!("{} split {i}:{t:b}", name(x)));
        }
    }
    for x in 0..ctx.n_tuples() as u32 {
        if ctx.has_empty(x) {
            r.expect(c(x) == s.unit(), "pointedness-1", || name(x));
        }
    }
    for (k, &(x, i, t)) in ctx.rho_keys.iter().enumerate() {
        let si = ctx.tuples[x as usize][i];
        if ctx.has_empty(x) || t == 0 || t == si {
            r.expect(sys.rho[k] == w.id(c(x)), "pointedness-2", || format!("{} split {i}:{t:b}", name(x)));
        }
    }
    macro_rules! get {
        ($e:expr, $law:expr, $wit:expr) => {
            match $e {
                Some(v) => v,
                None => {
                    r.truncated($law, $wit);
                    continue;
                }
            }
        };
    }
    for &(x, i, t) in &ctx.rho_keys {
        let u = ctx.tuples[x as usize][i] & !t;
        if !ok(x, i, t) || !ok(x, i, u) {
            continue;
        }
        let g = get!(s.gamma(c(ctx.with(x, i, t)), c(ctx.with(x, i, u))), "symmetry", name(x));
        r.expect(rho(x, i, t) == w.c(rho(x, i, u), g), "symmetry", || format!("{} split {i}:{t:b}", name(x)));
    }
    for x in 0..ctx.n_tuples() as u32 {
        for i in 0..ctx.dims.len() {
            let si = ctx.tuples[x as usize][i];
            for t in submasks(si) {
                for u in submasks(si & !t) {
                    let v = si & !t & !u;
                    let (tu, uv) = (ctx.with(x, i, t | u), ctx.with(x, i, u | v));
                    if !(ok(x, i, t | u) && ok(tu, i, t) && ok(x, i, t) && ok(uv, i, u)) {
                        continue;
                    }
                    let (ct, cu, cv) = (c(ctx.with(x, i, t)), c(ctx.with(x, i, u)), c(ctx.with(x, i, v)));
                    let wit = || format!("{} in {i}: {t:b}|{u:b}|{v:b}", name(x));
                    let lm = get!(s.mor(rho(tu, i, t), w.id(cv)), "associativity", wit());
                    let rm = get!(s.mor(w.id(ct), rho(uv, i, u)), "associativity", wit());
                    let a = get!(s.alpha(ct, cu, cv), "associativity", wit());
                    let lhs = w.c(rho(x, i, t | u), lm);
                    let rhs = w.c(rho(x, i, t), w.c(rm, a));
                    r.expect(lhs == rhs, "associativity", wit);
                }
            }
        }
    }
    for x in 0..ctx.n_tuples() as u32 {
        for i in 0..ctx.dims.len() {
            for j in 0..ctx.dims.len() {
                if i == j {
                    continue;
                }
                let (si, sj) = (ctx.tuples[x as usize][i], ctx.tuples[x as usize][j]);
                for t in submasks(si) {
                    let u = si & !t;
                    for v in submasks(sj) {
                        let ww = sj & !v;
                        let at = |a: u32, b: u32| ctx.with(ctx.with(x, i, a), j, b);
                        let (tv, uv, tw, uw) = (c(at(t, v)), c(at(u, v)), c(at(t, ww)), c(at(u, ww)));
                        let (jv, jw, it, iu) = (ctx.with(x, j, v), ctx.with(x, j, ww), ctx.with(x, i, t), ctx.with(x, i, u));
                        if !(ok(x, j, v) && ok(jv, i, t) && ok(jw, i, t) && ok(x, i, t) && ok(it, j, v) && ok(iu, j, v)) {
                            continue;
                        }
                        let wit = || format!("{} in {i},{j}: {t:b}|{u:b}, {v:b}|{ww:b}", name(x));
                        let sh1 = get!(s.shuffle(tv, uv, tw, uw), "coherence", wit());
                        let top = get!(s.mor(rho(jv, i, t), rho(jw, i, t)), "coherence", wit());
                        let lhs = w.c(rho(x, j, v), w.c(top, sh1));
                        let g = get!(s.gamma(uv, tw), "coherence", wit());
                        let idg = get!(s.mor(w.id(tv), g), "coherence", wit());
                        let twist = get!(s.mor(idg, w.id(uw)), "coherence", wit());
                        let sh2 = get!(s.shuffle(tv, tw, uv, uw), "coherence", wit());
                        let bot = get!(s.mor(rho(it, j, v), rho(iu, j, v)), "coherence", wit());
                        let rhs = w.c(rho(x, i, t), w.c(bot, w.c(sh2, twist)));
                        r.expect(lhs == rhs, "coherence", wit);
                    }
                }
            }
        }
    }
    r
}

pub fn segal_cost(s: &Smc, ctx: &Ctx) -> u128 {
    let nonempty = (0..ctx.n_tuples() as u32).filter(|&x| !ctx.has_empty(x)).count();
    (s.w.n_obj() as u128).saturating_pow(nonempty as u32)
}

#[derive(Clone, Debug, Default)]
pub struct SegalEnum {
    pub systems: Vec<SegalSystem>,
    /// Branches cut because a wedge was missing from the fixture.
    pub absent: u64,
    pub rejected: u64,
}

struct Search<'a, 'b> {
    s: &'b Smc<'a>,
    ctx: &'b Ctx,
    todo: Vec<u32>,
    sys: SegalSystem,
    isos: HashMap<(u32, u32), Vec<u32>>,
    out: SegalEnum,
}

impl Search<'_, '_> {
    fn set(&mut self, x: u32, i: usize, t: u32, f: u32) {
        let k = self.ctx.rho(x, i, t);
        self.sys.rho[k as usize] = f;
    }

    fn get(&self, x: u32, i: usize, t: u32) -> u32 {
        self.sys.rho[self.ctx.rho(x, i, t) as usize]
    }

    fn go(&mut self, pos: usize) {
        let (s, ctx) = (self.s, self.ctx);
        let w = s.w;
        if pos == self.todo.len() {
            if validate_in(s, ctx, &self.sys).is_ok() {
                self.out.systems.push(self.sys.clone());
            } else {
                self.out.rejected += 1;
            }
            return;
        }
        let x = self.todo[pos];
        let tuple = ctx.tuples[x as usize].clone();
        if ctx.is_singleton(x) {
            for o in 0..w.n_obj() as u32 {
                self.sys.obj[x as usize] = o;
                for (i, &si) in tuple.iter().enumerate() {
                    self.set(x, i, 0, w.id(o));
                    self.set(x, i, si, w.id(o));
                }
                self.go(pos + 1);
            }
            return;
        }
        let i = tuple.iter().position(|s| s.count_ones() >= 2).unwrap();
        let t = tuple[i] & tuple[i].wrapping_neg();
        let u = tuple[i] & !t;
        let (ct, cu) = (self.sys.obj[ctx.with(x, i, t) as usize], self.sys.obj[ctx.with(x, i, u) as usize]);
        let Some(wedge) = s.obj(ct, cu) else {
            self.out.absent += 1;
            return;
        };
        for p in 0..w.n_obj() as u32 {
            let thetas = self.isos.entry((wedge, p)).or_insert_with(|| isos(w, wedge, p)).clone();
            'theta: for theta in thetas {
                self.sys.obj[x as usize] = p;
                for (k, &sk) in tuple.iter().enumerate() {
                    self.set(x, k, 0, w.id(p));
                    self.set(x, k, sk, w.id(p));
                }
                self.set(x, i, t, theta);
                match s.gamma(cu, ct) {
                    Some(g) => self.set(x, i, u, w.c(theta, g)),
                    None => continue 'theta,
                }
                for (j, &sj) in tuple.iter().enumerate() {
                    if j == i || sj.count_ones() < 2 {
                        continue;
                    }
                    for v in submasks(sj) {
                        let ww = sj & !v;
                        if v == 0 || ww == 0 {
                            continue;
                        }
                        let Some(f) = self.forced(x, i, t, u, j, v, ww) else { continue 'theta };
                        self.set(x, j, v, f);
                    }
                }
                self.go(pos + 1);
            }
        }
    }

    /// `ρ_{⟨S⟩,j,V,W}` from the coherence square against the chosen split in
    /// coordinate `i`.
    #[allow(clippy::too_many_arguments)]
    fn forced(&self, x: u32, i: usize, t: u32, u: u32, j: usize, v: u32, ww: u32) -> Option<u32> {
        let (s, ctx) = (self.s, self.ctx);
        let w = s.w;
        let c = |y: u32| self.sys.obj[y as usize];
        let at = |a: u32, b: u32| ctx.with(ctx.with(x, i, a), j, b);
        let (tv, uv, tw, uw) = (c(at(t, v)), c(at(u, v)), c(at(t, ww)), c(at(u, ww)));
        let (jv, jw, it, iu) = (ctx.with(x, j, v), ctx.with(x, j, ww), ctx.with(x, i, t), ctx.with(x, i, u));
        let twist = s.mor(s.mor(w.id(tv), s.gamma(uv, tw)?)?, w.id(uw))?;
        let bot = s.mor(self.get(it, j, v), self.get(iu, j, v))?;
        let rhs = w.c(self.get(x, i, t), w.c(bot, w.c(s.shuffle(tv, tw, uv, uw)?, twist)));
        let top = s.mor(s.inv(self.get(jv, i, t))?, s.inv(self.get(jw, i, t))?)?;
        Some(w.c(rhs, w.c(s.inv(s.shuffle(tv, uv, tw, uw)?)?, top)))
    }
}

/// Every system over the context: singleton tuples are free, each larger tuple
/// chooses an object and one gluing isomorphism, the remaining gluing maps are
/// forced by symmetry and coherence, and every candidate is validated.
pub fn enumerate_segal(s: &Smc, dims: &[usize]) -> Result<SegalEnum, Refusal> {
    enumerate_segal_with(s, dims, BUDGET)
}

pub fn enumerate_segal_with(s: &Smc, dims: &[usize], budget: u128) -> Result<SegalEnum, Refusal> {
    let ctx = Ctx::new(dims);
    let estimate = segal_cost(s, &ctx);
    if estimate > budget || dims.iter().any(|&m| m > 2) {
        return Err(Refusal { what: format!("system category {dims:?}"), estimate, budget });
    }
    let mut search = Search {
        s,
        ctx: &ctx,
        todo: ctx.order.iter().copied().filter(|&x| !ctx.has_empty(x)).collect(),
        sys: basepoint_system(s, &ctx),
        isos: HashMap::new(),
        out: SegalEnum::default(),
    };
    search.go(0);
    let mut out = search.out;
    out.systems.sort();
    out.systems.dedup();
    Ok(out)
}

/// System morphisms `a → b`: components on singleton tuples are free, the
/// others are forced through the gluing maps, then all squares are checked.
pub fn segal_morphisms(s: &Smc, ctx: &Ctx, a: &SegalSystem, b: &SegalSystem, weq_only: bool) -> Vec<Vec<u32>> {
    fn go(s: &Smc, ctx: &Ctx, a: &SegalSystem, b: &SegalSystem, weq_only: bool, pos: usize, comp: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let w = s.w;
        if pos == ctx.order.len() {
            if morphism_ok(s, ctx, a, b, comp) {
                out.push(comp.clone());
            }
            return;
        }
        let x = ctx.order[pos];
        let (ax, bx) = (a.obj[x as usize], b.obj[x as usize]);
        if ctx.has_empty(x) {
            comp[x as usize] = w.id(ax);
            go(s, ctx, a, b, weq_only, pos + 1, comp, out);
            return;
        }
        let tuple = &ctx.tuples[x as usize];
        if ctx.is_singleton(x) {
            for &f in w.hom(ax, bx).iter() {
                if !weq_only || w.is_weq(f) {
                    comp[x as usize] = f;
                    go(s, ctx, a, b, weq_only, pos + 1, comp, out);
                }
            }
            return;
        }
        let i = tuple.iter().position(|s| s.count_ones() >= 2).unwrap();
        let t = tuple[i] & tuple[i].wrapping_neg();
        let u = tuple[i] & !t;
        let k = ctx.rho(x, i, t) as usize;
        let forced = (|| {
            let fu = s.mor(comp[ctx.with(x, i, t) as usize], comp[ctx.with(x, i, u) as usize])?;
            Some(w.c(b.rho[k], w.c(fu, s.inv(a.rho[k])?)))
        })();
        if let Some(f) = forced {
            if !weq_only || w.is_weq(f) {
                comp[x as usize] = f;
                go(s, ctx, a, b, weq_only, pos + 1, comp, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut comp = vec![0; ctx.n_tuples()];
    go(s, ctx, a, b, weq_only, 0, &mut comp, &mut out);
    out
}

fn morphism_ok(s: &Smc, ctx: &Ctx, a: &SegalSystem, b: &SegalSystem, comp: &[u32]) -> bool {
    let w = s.w;
    (0..ctx.n_tuples() as u32).all(|x| !ctx.has_empty(x) || comp[x as usize] == w.id(a.obj[x as usize]))
        && ctx.rho_keys.iter().enumerate().all(|(k, &(x, i, t))| {
            let u = ctx.tuples[x as usize][i] & !t;
            let fu = s.mor(comp[ctx.with(x, i, t) as usize], comp[ctx.with(x, i, u) as usize]);
            fu.is_some_and(|fu| w.comp(comp[x as usize], a.rho[k]) == w.comp(b.rho[k], fu))
        })
}

pub fn validate_system_morphism(s: &Smc, a: &SegalSystem, b: &SegalSystem, comp: &[u32]) -> Report {
    let ctx = Ctx::new(&a.context);
    let w = s.w;
    let mut r = Report::new();
    if comp.len() != ctx.n_tuples() || a.context != b.context {
        r.structural("table-shape", format!("{} components", comp.len()));
        return r;
    }
    for (x, &f) in comp.iter().enumerate() {
        if !w.has_mor(f) || w.src(f) != a.obj[x] || w.tgt(f) != b.obj[x] {
            r.structural("component-typing", format!("{:?}", ctx.tuples[x]));
        }
    }
    if !r.is_clean() {
        return r;
    }
    for x in 0..ctx.n_tuples() as u32 {
        if ctx.has_empty(x) {
            r.expect(comp[x as usize] == w.id(a.obj[x as usize]), "unit-component", || format!("{:?}", ctx.tuples[x as usize]));
        }
    }
    for (k, &(x, i, t)) in ctx.rho_keys.iter().enumerate() {
        let u = ctx.tuples[x as usize][i] & !t;
        match s.mor(comp[ctx.with(x, i, t) as usize], comp[ctx.with(x, i, u) as usize]) {
            Some(fu) => r.expect(w.comp(comp[x as usize], a.rho[k]) == w.comp(b.rho[k], fu), "rho-naturality", || {
                format!("{:?} split {i}:{t:b}", ctx.tuples[x as usize])
            }),
            None => {
                r.truncated("rho-naturality", format!("{:?}", ctx.tuples[x as usize]));
                false
            }
        };
    }
    r
}

// ---------------------------------------------------------------------------
// Levels

#[derive(Default)]
struct Mors {
    src: Vec<u32>,
    tgt: Vec<u32>,
    comps: Vec<Vec<u32>>,
    index: HashMap<(u32, u32, Vec<u32>), u32>,
}

/// `C̄(⟨m₁⟩,…,⟨mₙ⟩)` with morphisms materialized on demand; with `weq_only`
/// the subcategory of componentwise weak equivalences.
pub struct SegalLevel<'s> {
    pub smc: &'s Smc<'s>,
    pub ctx: Ctx,
    pub systems: Vec<SegalSystem>,
    index: HashMap<SegalSystem, u32>,
    weq_only: bool,
    sig: Vec<Vec<u32>>,
    base: u32,
    mors: RefCell<Mors>,
    homs: RefCell<HashMap<(u32, u32), Vec<u32>>>,
}

impl<'s> SegalLevel<'s> {
    pub fn new(smc: &'s Smc<'s>, dims: &[usize], weq_only: bool) -> Result<Self, Refusal> {
        let systems = enumerate_segal(smc, dims)?.systems;
        Ok(Self::from_systems(smc, dims, systems, weq_only))
    }

    pub fn from_systems(smc: &'s Smc<'s>, dims: &[usize], systems: Vec<SegalSystem>, weq_only: bool) -> Self {
        let ctx = Ctx::new(dims);
        let index: HashMap<SegalSystem, u32> = systems.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
        let base = index[&basepoint_system(smc, &ctx)];
        let w = smc.w;
        let sig = if weq_only {
            let n = w.n_obj() as u32;
            let mut p = Partition::new(n as usize);
            for x in 0..n {
                for y in 0..n {
                    if w.hom(x, y).iter().any(|&f| w.is_weq(f)) {
                        p.union(x, y);
                    }
                }
            }
            systems.iter().map(|d| d.obj.iter().map(|&x| p.find(x)).collect()).collect()
        } else {
            vec![]
        };
        SegalLevel {
            smc,
            ctx,
            systems,
            index,
            weq_only,
            sig,
            base,
            mors: RefCell::new(Mors::default()),
            homs: RefCell::new(HashMap::new()),
        }
    }

    pub fn lookup(&self, d: &SegalSystem) -> Option<u32> {
        self.index.get(d).copied()
    }

    pub fn system(&self, x: u32) -> &SegalSystem {
        &self.systems[x as usize]
    }

    pub fn comps(&self, f: u32) -> Vec<u32> {
        self.mors.borrow().comps[f as usize].clone()
    }

    pub fn intern(&self, s: u32, t: u32, comps: Vec<u32>) -> u32 {
        let mut m = self.mors.borrow_mut();
        let key = (s, t, comps);
        if let Some(&f) = m.index.get(&key) {
            return f;
        }
        let f = m.src.len() as u32;
        m.src.push(s);
        m.tgt.push(t);
        m.comps.push(key.2.clone());
        m.index.insert(key, f);
        f
    }

    pub fn basepoint(&self) -> u32 {
        self.base
    }
}

impl Cat for SegalLevel<'_> {
    fn n_obj(&self) -> usize {
        self.systems.len()
    }
    fn src(&self, f: u32) -> u32 {
        self.mors.borrow().src[f as usize]
    }
    fn tgt(&self, f: u32) -> u32 {
        self.mors.borrow().tgt[f as usize]
    }
    fn id(&self, x: u32) -> u32 {
        let w = self.smc.w;
        let comps = self.systems[x as usize].obj.iter().map(|&o| w.id(o)).collect();
        self.intern(x, x, comps)
    }
    fn comp(&self, g: u32, f: u32) -> Option<u32> {
        let w = self.smc.w;
        let (s, t, comps) = {
            let m = self.mors.borrow();
            if m.tgt[f as usize] != m.src[g as usize] {
                return None;
            }
            let comps: Vec<u32> = m.comps[g as usize].iter().zip(&m.comps[f as usize]).map(|(&b, &a)| w.c(b, a)).collect();
            (m.src[f as usize], m.tgt[g as usize], comps)
        };
        Some(self.intern(s, t, comps))
    }
    fn has_mor(&self, f: u32) -> bool {
        (f as usize) < self.mors.borrow().src.len()
    }
    fn hom(&self, x: u32, y: u32) -> Cow<'_, [u32]> {
        if let Some(h) = self.homs.borrow().get(&(x, y)) {
            return Cow::Owned(h.clone());
        }
        let h: Vec<u32> = if self.weq_only && self.sig[x as usize] != self.sig[y as usize] {
            vec![]
        } else {
            segal_morphisms(self.smc, &self.ctx, &self.systems[x as usize], &self.systems[y as usize], self.weq_only)
                .into_iter()
                .map(|c| self.intern(x, y, c))
                .collect()
        };
        self.homs.borrow_mut().insert((x, y), h.clone());
        Cow::Owned(h)
    }
    fn obj_name(&self, x: u32) -> String {
        let w = self.smc.w;
        let names: Vec<String> = self.systems[x as usize].obj.iter().map(|&o| w.obj_name(o)).collect();
        format!("[{}]", names.join(","))
    }
}

// ---------------------------------------------------------------------------
// Functoriality

/// How a structure map reads the target system off the source: per target
/// tuple the source tuple (or `None` for `e`), per target gluing key the
/// source key (or `None` for an identity).
#[derive(Clone, Debug)]
pub struct SegalMap {
    pub tuple: Vec<Option<u32>>,
    pub rho: Vec<Option<u32>>,
}

/// Reindexing by preimages along pointed maps `cᵢ: ⟨mᵢ⟩ → ⟨nᵢ⟩` attached to
/// source coordinates by `q`; a target coordinate outside the image reads the
/// added coordinate `⟨1⟩` through `extra[j]: ⟨1⟩ → ⟨n_j⟩`.
pub fn pointed_action(maps: &[Vec<usize>], q: &[usize], extra: &HashMap<usize, Vec<usize>>, src: &Ctx, tgt: &Ctx) -> SegalMap {
    let pre = |c: &[usize], s: u32| -> u32 {
        (1..c.len()).filter(|&e| c[e] != 0 && s & (1 << (c[e] - 1)) != 0).fold(0, |acc, e| acc | 1 << (e - 1))
    };
    let source_of = |t: &[u32]| -> Option<Vec<u32>> {
        let mut sv = vec![0; src.dims.len()];
        for (j, &sj) in t.iter().enumerate() {
            match q.iter().position(|&qq| qq == j) {
                Some(k) => sv[k] = pre(&maps[k], sj),
                None => {
                    if pre(&extra[&j], sj) != 1 {
                        return None;
                    }
                }
            }
        }
        Some(sv)
    };
    let tuple: Vec<Option<u32>> = tgt.tuples.iter().map(|t| source_of(t).map(|sv| src.tuple(&sv).unwrap())).collect();
    let rho = tgt
        .rho_keys
        .iter()
        .map(|&(x, j, t)| {
            let sx = tuple[x as usize]?;
            let k = q.iter().position(|&qq| qq == j)?;
            Some(src.rho(sx, k, pre(&maps[k], t)))
        })
        .collect();
    SegalMap { tuple, rho }
}

/// The action of an `E` morphism, through the circle maps of its `β`'s.
pub fn segal_action(f: &EMor, src: &Ctx, tgt: &Ctx) -> SegalMap {
    let maps: Vec<Vec<usize>> = (0..f.src.len()).map(|k| circle_map(&f.betas[f.q[k]])).collect();
    let extra = (0..f.tgt.len()).filter(|&j| f.preimage(j).is_none()).map(|j| (j, circle_map(&f.betas[j]))).collect();
    pointed_action(&maps, &f.q, &extra, src, tgt)
}

pub fn act_system(s: &Smc, tgt: &Ctx, m: &SegalMap, sys: &SegalSystem) -> SegalSystem {
    let w = s.w;
    let e = s.unit();
    let obj: Vec<u32> = m.tuple.iter().map(|x| x.map_or(e, |x| sys.obj[x as usize])).collect();
    let rho = tgt.rho_keys.iter().zip(&m.rho).map(|(&(x, _, _), k)| k.map_or(w.id(obj[x as usize]), |k| sys.rho[k as usize])).collect();
    SegalSystem { context: tgt.dims.clone(), obj, rho }
}

pub fn act_system_comps(s: &Smc, m: &SegalMap, comps: &[u32]) -> Vec<u32> {
    let ide = s.w.id(s.unit());
    m.tuple.iter().map(|x| x.map_or(ide, |x| comps[x as usize])).collect()
}

pub fn act_segal(s: &Smc, f: &EMor, sys: &SegalSystem) -> SegalSystem {
    let (src, tgt) = (Ctx::new(&f.src), Ctx::new(&f.tgt));
    act_system(s, &tgt, &segal_action(f, &src, &tgt), sys)
}

/// The functor induced by pointed maps `cᵢ: ⟨mᵢ⟩ → ⟨nᵢ⟩`, given by values.
pub fn segal_functoriality(s: &Smc, maps: &[Vec<usize>], sys: &SegalSystem) -> SegalSystem {
    let tgt_dims: Vec<usize> = maps.iter().map(|c| c.iter().copied().max().unwrap_or(0)).collect();
    segal_functoriality_to(s, maps, &tgt_dims, sys)
}

pub fn segal_functoriality_to(s: &Smc, maps: &[Vec<usize>], tgt_dims: &[usize], sys: &SegalSystem) -> SegalSystem {
    let src = Ctx::new(&sys.context);
    let tgt = Ctx::new(tgt_dims);
    let q: Vec<usize> = (0..maps.len()).collect();
    act_system(s, &tgt, &pointed_action(maps, &q, &HashMap::new(), &src, &tgt), sys)
}

pub fn permute_segal(s: &Smc, sigma: &[usize], sys: &SegalSystem) -> SegalSystem {
    act_segal(s, &EMor::perm(&sys.context, sigma), sys)
}

/// The extension isomorphism to the context with `⟨1⟩` appended.
pub fn segal_extend(s: &Smc, sys: &SegalSystem) -> SegalSystem {
    act_segal(s, &EMor::iota(&sys.context), sys)
}

/// Inverse of [`segal_extend`]: keep the tuples whose last entry is `{1}`.
pub fn segal_restrict(sys: &SegalSystem) -> SegalSystem {
    let n = sys.context.len() - 1;
    let (big, small) = (Ctx::new(&sys.context), Ctx::new(&sys.context[..n]));
    let lift = |x: u32| {
        let mut t = small.tuples[x as usize].clone();
        t.push(1);
        big.tuple(&t).unwrap()
    };
    let obj = (0..small.n_tuples() as u32).map(|x| sys.obj[lift(x) as usize]).collect();
    let rho = small.rho_keys.iter().map(|&(x, i, t)| sys.rho[big.rho(lift(x), i, t) as usize]).collect();
    SegalSystem { context: small.dims, obj, rho }
}

impl Level for SegalLevel<'_> {
    type Map = SegalMap;

    fn base_obj(&self) -> u32 {
        self.base
    }

    fn structure_map(&self, f: &EMor, tgt: &Self) -> SegalMap {
        segal_action(f, &self.ctx, &tgt.ctx)
    }

    fn push_obj(&self, m: &SegalMap, tgt: &Self, x: u32) -> u32 {
        tgt.lookup(&act_system(self.smc, &tgt.ctx, m, self.system(x))).expect("structure map leaves the level")
    }

    fn push_mor(&self, m: &SegalMap, tgt: &Self, g: u32) -> u32 {
        let (s, t) = (self.push_obj(m, tgt, self.src(g)), self.push_obj(m, tgt, self.tgt(g)));
        tgt.intern(s, t, act_system_comps(self.smc, m, &self.comps(g)))
    }
}

/// `K_SMC` at level `n`, truncated at `d`: the diagonal nerve of
/// `q ↦ w C̄(⟨q⟩,…,⟨q⟩)`; for `n = 0` the nerve of `w C̄(⟨1⟩)`.
pub fn segal_k_level<'s>(s: &'s Smc<'s>, n: usize, d: usize) -> Result<TruncSSet, Refusal> {
    if n == 0 {
        let lv = SegalLevel::new(s, &[1], true)?;
        let base = lv.basepoint();
        return Ok(nerve(&lv, d, Some(base)));
    }
    let mut levels = HashMap::new();
    for q in grid(&vec![d; n]) {
        let lv = SegalLevel::new(s, &q, true)?;
        levels.insert(q, lv);
    }
    Ok(level_diagonal(&levels, n, d))
}

/// `w C` as a category, for comparison with the level-0 nerve.
pub fn weq_nerve<W: WaldCat + ?Sized>(w: &W, d: usize) -> TruncSSet {
    nerve(&WeqSub(w), d, Some(w.zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecat::{e_compose, e_hom};
    use crate::fixtures::{fixture_pointed_sets, fixture_vect_f2};
    use crate::simplicial::validate_simplicial;
    use crate::wald::{default_wedge_choice, lambda};

    /// All object tables and all invertible correctly typed gluing maps
    /// (identities where a split is trivial), filtered by the validator.
    fn brute(s: &Smc, dims: &[usize]) -> Vec<SegalSystem> {
        let ctx = Ctx::new(dims);
        let free: Vec<u32> = (0..ctx.n_tuples() as u32).filter(|&x| !ctx.has_empty(x)).collect();
        let mut out = Vec::new();
        let mut sys = basepoint_system(s, &ctx);
        fn objs(s: &Smc, ctx: &Ctx, free: &[u32], t: usize, sys: &mut SegalSystem, out: &mut Vec<SegalSystem>) {
            if t == free.len() {
                rhos(s, ctx, 0, sys, out);
                return;
            }
            for o in 0..s.w.n_obj() as u32 {
                sys.obj[free[t] as usize] = o;
                objs(s, ctx, free, t + 1, sys, out);
            }
        }
        fn rhos(s: &Smc, ctx: &Ctx, k: usize, sys: &mut SegalSystem, out: &mut Vec<SegalSystem>) {
            let w = s.w;
            if k == ctx.rho_keys.len() {
                if validate_in(s, ctx, sys).is_ok() {
                    out.push(sys.clone());
                }
                return;
            }
            let (x, i, t) = ctx.rho_keys[k];
            let si = ctx.tuples[x as usize][i];
            let cx = sys.obj[x as usize];
            if ctx.has_empty(x) || t == 0 || t == si {
                sys.rho[k] = w.id(cx);
                rhos(s, ctx, k + 1, sys, out);
                return;
            }
            let (ct, cu) = (sys.obj[ctx.with(x, i, t) as usize], sys.obj[ctx.with(x, i, si & !t) as usize]);
            let Some(src) = s.obj(ct, cu) else { return };
            for f in isos(w, src, cx) {
                sys.rho[k] = f;
                rhos(s, ctx, k + 1, sys, out);
            }
        }
        objs(s, &ctx, &free, 0, &mut sys, &mut out);
        out.sort();
        out
    }

    #[test]
    fn small_contexts() {
        let p3 = fixture_pointed_sets(3);
        let s = lambda(&p3, default_wedge_choice(&p3));
        assert_eq!(enumerate_segal(&s, &[0]).unwrap().systems.len(), 1);
        assert_eq!(enumerate_segal(&s, &[1]).unwrap().systems.len(), p3.n_obj());
        assert_eq!(enumerate_segal(&s, &[2]).unwrap().systems.len(), 229);
        let base = basepoint_system(&s, &Ctx::new(&[2, 1]));
        assert!(validate_segal_system(&s, &base).is_ok());
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let p3 = fixture_pointed_sets(3);
        let s = lambda(&p3, default_wedge_choice(&p3));
        let p2 = fixture_pointed_sets(2);
        let s2 = lambda(&p2, default_wedge_choice(&p2));
        let v2 = fixture_vect_f2(2);
        let sv = lambda(&v2, default_wedge_choice(&v2));
        for dims in [vec![1], vec![2]] {
            assert_eq!(enumerate_segal(&s, &dims).unwrap().systems, brute(&s, &dims), "P(3) {dims:?}");
        }
        for dims in [vec![1], vec![2], vec![1, 1], vec![2, 1], vec![1, 2]] {
            assert_eq!(enumerate_segal(&s2, &dims).unwrap().systems, brute(&s2, &dims), "P(2) {dims:?}");
            assert_eq!(enumerate_segal(&sv, &dims).unwrap().systems, brute(&sv, &dims), "Vect {dims:?}");
        }
    }

    #[test]
    fn breaking_symmetry_is_caught() {
        let p3 = fixture_pointed_sets(3);
        let s = lambda(&p3, default_wedge_choice(&p3));
        let all = enumerate_segal(&s, &[2]).unwrap().systems;
        let ctx = Ctx::new(&[2]);
        let top = ctx.tuple(&[3]).unwrap();
        let sys = all.iter().find(|y| p3.size(y.obj[top as usize]) == Some(2)).unwrap();
        let k = ctx.rho(top, 0, 2) as usize;
        let mut bad = sys.clone();
        let x = sys.obj[top as usize];
        let twist = isos(&p3, x, x).into_iter().find(|&g| g != p3.id(x)).unwrap();
        bad.rho[k] = p3.c(twist, bad.rho[k]);
        let r = validate_segal_system(&s, &bad);
        assert!(r.has_failure("symmetry"), "{r}");
    }

    #[test]
    fn functoriality() {
        let p2 = fixture_pointed_sets(2);
        let s = lambda(&p2, default_wedge_choice(&p2));
        let s2 = enumerate_segal(&s, &[2]).unwrap().systems;
        let s1: std::collections::HashSet<_> = enumerate_segal(&s, &[1]).unwrap().systems.into_iter().collect();
        let ctx2 = Ctx::new(&[2]);
        for sys in &s2 {
            assert_eq!(&segal_functoriality(&s, &[vec![0, 1, 2]], sys), sys);
            let collapsed = segal_functoriality(&s, &[vec![0, 1, 1]], sys);
            assert_eq!(collapsed.obj[1], sys.obj[ctx2.tuple(&[3]).unwrap() as usize]);
            assert!(s1.contains(&collapsed));
        }
        let a = enumerate_segal(&s, &[1, 2]).unwrap().systems;
        let b: std::collections::HashSet<_> = enumerate_segal(&s, &[2, 1]).unwrap().systems.into_iter().collect();
        assert_eq!(a.len(), b.len());
        for sys in &a {
            let t = permute_segal(&s, &[1, 0], sys);
            assert!(b.contains(&t));
            assert_eq!(&permute_segal(&s, &[1, 0], &t), sys);
        }
        // Structure maps compose, and fix the basepoint system.
        let objs = [vec![1], vec![2], vec![1, 1]];
        let mut cache = HashMap::new();
        for m in &objs {
            cache.insert(m.clone(), enumerate_segal(&s, m).unwrap().systems);
        }
        for a in &objs {
            for b in &objs {
                let levb: std::collections::HashSet<_> = cache[b].iter().collect();
                for f in e_hom(a, b) {
                    let base = basepoint_system(&s, &Ctx::new(a));
                    assert_eq!(act_segal(&s, &f, &base), basepoint_system(&s, &Ctx::new(b)));
                    for sys in &cache[a] {
                        assert!(levb.contains(&act_segal(&s, &f, sys)));
                    }
                    for c in &objs {
                        for g in e_hom(b, c) {
                            let gf = e_compose(&g, &f).unwrap();
                            for sys in &cache[a] {
                                assert_eq!(act_segal(&s, &gf, sys), act_segal(&s, &g, &act_segal(&s, &f, sys)));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extension_round_trip() {
        let p3 = fixture_pointed_sets(3);
        let s = lambda(&p3, default_wedge_choice(&p3));
        for dims in [vec![1], vec![2]] {
            let base = enumerate_segal(&s, &dims).unwrap().systems;
            let mut ext_dims = dims.clone();
            ext_dims.push(1);
            let ext: std::collections::HashSet<_> = enumerate_segal(&s, &ext_dims).unwrap().systems.into_iter().collect();
            assert_eq!(base.len(), ext.len());
            for sys in &base {
                let e = segal_extend(&s, sys);
                assert!(ext.contains(&e));
                assert_eq!(&segal_restrict(&e), sys);
            }
        }
    }

    #[test]
    fn weq_levels_and_k_levels() {
        let p2 = fixture_pointed_sets(2);
        let s = lambda(&p2, default_wedge_choice(&p2));
        let lv = SegalLevel::new(&s, &[2], true).unwrap();
        // Weak equivalences of systems are the systems over the weak equivalences.
        let full = SegalLevel::new(&s, &[2], false).unwrap();
        for x in 0..lv.n_obj() as u32 {
            for y in 0..lv.n_obj() as u32 {
                let a: Vec<Vec<u32>> = lv.hom(x, y).iter().map(|&f| lv.comps(f)).collect();
                let b: Vec<Vec<u32>> =
                    full.hom(x, y).iter().filter(|&&f| full.comps(f).iter().all(|&g| p2.is_weq(g))).map(|&f| full.comps(f)).collect();
                assert_eq!(a, b);
            }
        }
        let k0 = segal_k_level(&s, 0, 2).unwrap();
        assert!(validate_simplicial(&k0).is_ok());
        assert_eq!(k0.counts, weq_nerve(&p2, 2).counts);
        let k1 = segal_k_level(&s, 1, 2).unwrap();
        assert!(validate_simplicial(&k1).is_ok());
        assert_eq!(k1.counts[0], 1);
    }
}
