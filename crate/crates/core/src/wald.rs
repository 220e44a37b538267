//! Waldhausen structures on explicit categories, cubical cofibrancy, exact
//! and multiexact functors, wedge choices, the symmetric monoidal category
//! `Λ(W)` and the distributivity isomorphisms of a multiexact functor.

use crate::fincat::{find_pushout, inverse, is_pushout_square, mediate, product_category, validate_functor, Cat, Cocone, FinCat, Functor};
use crate::report::Report;
pub use crate::simplicial::grid;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::HashMap;

/// A category with a zero object and chosen cofibrations and weak
/// equivalences. Level categories implement this as well as fixtures.
pub trait WaldCat: Cat {
    fn zero(&self) -> u32;
    fn is_cof(&self, f: u32) -> bool;
    fn is_weq(&self, f: u32) -> bool;

    fn pushout(&self, f: u32, g: u32) -> Option<Cocone> {
        find_pushout(self, f, g)
    }

    /// Whether the fixture promises a pushout for the span `f, g` with `f` a
    /// cofibration.
    fn span_in_bound(&self, _f: u32, _g: u32) -> bool {
        true
    }

    fn wedge_in_bound(&self, _x: u32, _y: u32) -> bool {
        true
    }

    fn initial(&self, x: u32) -> u32 {
        self.hom(self.zero(), x)[0]
    }

    fn to_zero(&self, x: u32) -> u32 {
        self.hom(x, self.zero())[0]
    }

    fn zero_map(&self, x: u32, y: u32) -> u32 {
        self.c(self.initial(y), self.to_zero(x))
    }
}

#[derive(Debug)]
pub struct WaldStruct {
    pub name: String,
    pub cat: FinCat,
    pub zero: u32,
    pub cof: Vec<bool>,
    pub weq: Vec<bool>,
    /// Object sizes (cardinality, dimension) used to decide which pushouts the
    /// truncated fixture is expected to contain.
    pub sizes: Option<Vec<u32>>,
    pub bound: Option<u32>,
    memo: RefCell<HashMap<(u32, u32), Option<Cocone>>>,
}

impl Clone for WaldStruct {
    fn clone(&self) -> Self {
        WaldStruct {
            name: self.name.clone(),
            cat: self.cat.clone(),
            zero: self.zero,
            cof: self.cof.clone(),
            weq: self.weq.clone(),
            sizes: self.sizes.clone(),
            bound: self.bound,
            memo: RefCell::new(HashMap::new()),
        }
    }
}

impl WaldStruct {
    pub fn new(name: impl Into<String>, cat: FinCat, zero: u32, cof: Vec<bool>, weq: Vec<bool>) -> WaldStruct {
        WaldStruct { name: name.into(), cat, zero, cof, weq, sizes: None, bound: None, memo: RefCell::new(HashMap::new()) }
    }

    /// Weak equivalences are the isomorphisms.
    pub fn with_iso_weqs(name: impl Into<String>, cat: FinCat, zero: u32, cof: Vec<bool>) -> WaldStruct {
        let weq = cat.morphisms().map(|f| inverse(&cat, f).is_some()).collect();
        WaldStruct::new(name, cat, zero, cof, weq)
    }

    pub fn bounded(mut self, sizes: Vec<u32>, bound: u32) -> WaldStruct {
        self.sizes = Some(sizes);
        self.bound = Some(bound);
        self
    }

    pub fn size(&self, x: u32) -> Option<u32> {
        self.sizes.as_ref().map(|s| s[x as usize])
    }

    /// Drops memoized pushouts; needed after editing the tables in place.
    pub fn forget_pushouts(&self) {
        self.memo.borrow_mut().clear();
    }
}

impl Cat for WaldStruct {
    fn n_obj(&self) -> usize {
        self.cat.n_obj()
    }
    fn src(&self, f: u32) -> u32 {
        self.cat.src(f)
    }
    fn tgt(&self, f: u32) -> u32 {
        self.cat.tgt(f)
    }
    fn id(&self, x: u32) -> u32 {
        self.cat.id(x)
    }
    fn comp(&self, g: u32, f: u32) -> Option<u32> {
        self.cat.comp(g, f)
    }
    fn has_mor(&self, f: u32) -> bool {
        self.cat.has_mor(f)
    }
    fn hom(&self, x: u32, y: u32) -> Cow<'_, [u32]> {
        Cow::Borrowed(self.cat.hom_slice(x, y))
    }
    fn obj_name(&self, x: u32) -> String {
        self.cat.obj_name(x)
    }
    fn mor_name(&self, f: u32) -> String {
        self.cat.mor_name(f)
    }
}

impl WaldCat for WaldStruct {
    fn zero(&self) -> u32 {
        self.zero
    }
    fn is_cof(&self, f: u32) -> bool {
        self.cof[f as usize]
    }
    fn is_weq(&self, f: u32) -> bool {
        self.weq[f as usize]
    }
    fn pushout(&self, f: u32, g: u32) -> Option<Cocone> {
        if let Some(c) = self.memo.borrow().get(&(f, g)) {
            return *c;
        }
        let c = find_pushout(&self.cat, f, g);
        self.memo.borrow_mut().insert((f, g), c);
        c
    }
    fn span_in_bound(&self, f: u32, g: u32) -> bool {
        match (&self.sizes, self.bound) {
            (Some(s), Some(b)) => {
                let (x, y, z) = (self.src(f) as usize, self.tgt(f) as usize, self.tgt(g) as usize);
                s[y] + s[z] <= b + s[x]
            }
            _ => true,
        }
    }
    fn wedge_in_bound(&self, x: u32, y: u32) -> bool {
        match (&self.sizes, self.bound) {
            (Some(s), Some(b)) => s[x as usize] + s[y as usize] <= b,
            _ => true,
        }
    }
}

pub fn validate_waldhausen(w: &WaldStruct) -> Report {
    let c = &w.cat;
    let mut r = Report::new();
    if w.cof.len() != c.n_mor() || w.weq.len() != c.n_mor() || w.zero as usize >= c.n_obj() {
        r.structural("table-shape", "cofibration/weq flags or basepoint do not fit the category");
        return r;
    }
    for x in c.objects() {
        let ok = c.hom_slice(w.zero, x).len() == 1 && c.hom_slice(x, w.zero).len() == 1;
        r.expect(ok, "pointed", || format!("{} is not initial and terminal relative to {}", c.obj_name(w.zero), c.obj_name(x)));
    }
    if !r.is_ok() {
        return r;
    }
    for (name, set) in [("cofibration", &w.cof), ("weak-equivalence", &w.weq)] {
        for x in c.objects() {
            r.expect(set[c.id(x) as usize], &format!("{name}-identity"), || c.obj_name(x));
        }
        for f in c.morphisms().filter(|&f| set[f as usize]) {
            for &g in c.out_of(c.tgt(f)) {
                if set[g as usize] {
                    let h = c.c(g, f);
                    r.expect(set[h as usize], "composition-closure", || {
                        format!("{name}s {} then {} compose to {}", c.mor_name(f), c.mor_name(g), c.mor_name(h))
                    });
                }
            }
        }
    }
    let inv: Vec<Option<u32>> = c.morphisms().map(|f| inverse(c, f)).collect();
    for f in c.morphisms() {
        if inv[f as usize].is_some() {
            r.expect(w.cof[f as usize] && w.weq[f as usize], "isomorphisms", || c.mor_name(f));
        }
    }
    for x in c.objects() {
        let z = w.initial(x);
        r.expect(w.cof[z as usize], "zero-cofibration", || c.obj_name(x));
    }
    // Axiom (3), then the gluing axiom on every span whose pushout exists.
    let weq_out: Vec<Vec<u32>> =
        c.objects().map(|x| c.out_of(x).iter().copied().filter(|&f| w.weq[f as usize]).collect()).collect();
    for f in c.morphisms().filter(|&f| w.cof[f as usize]) {
        let x = c.src(f);
        for &g in c.out_of(x) {
            let span = || format!("{} <- {} -> {}", c.mor_name(f), c.obj_name(x), c.mor_name(g));
            let Some(po) = w.pushout(f, g) else {
                if w.span_in_bound(f, g) {
                    r.fail("pushout-existence", span());
                } else {
                    r.truncated("pushout-existence", span());
                }
                continue;
            };
            r.expect(w.cof[po.l2 as usize], "cobase-change", span);
            for &a in &weq_out[x as usize] {
                let x2 = c.tgt(a);
                for &b in &weq_out[c.tgt(f) as usize] {
                    let y2 = c.tgt(b);
                    let bf = c.c(b, f);
                    for &f2 in c.hom_slice(x2, y2) {
                        if !w.cof[f2 as usize] || c.c(f2, a) != bf {
                            continue;
                        }
                        for &cc in &weq_out[c.tgt(g) as usize] {
                            let z2 = c.tgt(cc);
                            let cg = c.c(cc, g);
                            for &g2 in c.hom_slice(x2, z2) {
                                if c.c(g2, a) != cg {
                                    continue;
                                }
                                let Some(po2) = w.pushout(f2, g2) else {
                                    r.truncated("gluing", span());
                                    continue;
                                };
                                let m = mediate(c, po.l1, po.l2, c.c(po2.l1, b), c.c(po2.l2, cc));
                                r.expect(m.is_some_and(|m| w.weq[m as usize]), "gluing", || {
                                    format!("{} via {}, {}, {}", span(), c.mor_name(a), c.mor_name(b), c.mor_name(cc))
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Cubical cofibrancy

struct Colim {
    legs: Vec<(u32, u32)>,
    kind: ColimKind,
}

enum ColimKind {
    Single(u32),
    Push { l1: u32, l2: u32, top0: u32, right: Box<Colim> },
}

enum CubeErr {
    Absent { in_bound: bool, what: String },
    NoMediator,
}

fn leg(c: &Colim, mask: u32) -> u32 {
    c.legs.iter().find(|p| p.0 == mask).map(|p| p.1).expect("vertex outside the punctured cube")
}

fn mediate_colim<W: WaldCat + ?Sized>(w: &W, col: &Colim, target: &dyn Fn(u32) -> u32) -> Option<u32> {
    match &col.kind {
        ColimKind::Single(m) => Some(target(*m)),
        ColimKind::Push { l1, l2, top0, right } => {
            let r = mediate_colim(w, right, target)?;
            mediate(w, *l1, *l2, target(*top0), r)
        }
    }
}

/// Colimit of the punctured cube spanned by `bits` over `base`, built from
/// iterated pushouts.
fn punctured_colim<W: WaldCat + ?Sized>(
    w: &W,
    bits: &[u32],
    base: u32,
    vert: &dyn Fn(u32) -> u32,
    edge: &dyn Fn(u32, u32) -> u32,
) -> Result<Colim, CubeErr> {
    if bits.len() == 1 {
        let x = vert(base);
        return Ok(Colim { legs: vec![(base, w.id(x))], kind: ColimKind::Single(base) });
    }
    let (b, rest) = bits.split_last().unwrap();
    let all_rest: u32 = rest.iter().fold(0, |a, &t| a | (1 << t));
    let top0 = base | all_rest;
    let l0 = punctured_colim(w, rest, base, vert, edge)?;
    let l1c = punctured_colim(w, rest, base | (1 << b), vert, edge)?;
    let u = mediate_colim(w, &l0, &|m| edge(m, top0)).ok_or(CubeErr::NoMediator)?;
    let v = mediate_colim(w, &l0, &|m| w.c(leg(&l1c, m | (1 << b)), edge(m, m | (1 << b)))).ok_or(CubeErr::NoMediator)?;
    let po = w.pushout(u, v).ok_or_else(|| CubeErr::Absent {
        in_bound: w.span_in_bound(u, v),
        what: format!("{} <- {} -> {}", w.mor_name(u), w.obj_name(w.src(u)), w.mor_name(v)),
    })?;
    let mut legs: Vec<(u32, u32)> = l0.legs.iter().map(|&(m, _)| (m, w.c(po.l1, edge(m, top0)))).collect();
    legs.push((top0, po.l1));
    legs.extend(l1c.legs.iter().map(|&(m, l)| (m, w.c(po.l2, l))));
    Ok(Colim { legs, kind: ColimKind::Push { l1: po.l1, l2: po.l2, top0, right: Box::new(l1c) } })
}

/// Checks a diagram `[m₁]×…×[mₙ] → W` for cubical cofibrancy. `vertex(v)` is
/// the object at `v` and `map(u, v)` the morphism for `u ≤ v`.
pub fn check_cubical<W: WaldCat + ?Sized>(
    w: &W,
    dims: &[usize],
    vertex: &dyn Fn(&[usize]) -> u32,
    map: &dyn Fn(&[usize], &[usize]) -> u32,
    r: &mut Report,
) -> bool {
    let before = (r.violation_count, r.out_of_bound_count);
    let verts = grid(dims);
    for u in &verts {
        for v in &verts {
            if u != v && u.iter().zip(v).all(|(a, b)| a <= b) {
                let f = map(u, v);
                r.expect(w.is_cof(f), "cube-cofibration", || format!("{u:?} -> {v:?}"));
            }
        }
    }
    let n = dims.len();
    for v in &verts {
        let free: Vec<usize> = (0..n).filter(|&k| v[k] < dims[k]).collect();
        for sub in 1u32..(1 << free.len()) {
            if sub.count_ones() < 2 {
                continue;
            }
            let coords: Vec<usize> = (0..free.len()).filter(|&t| sub & (1 << t) != 0).map(|t| free[t]).collect();
            let at = |mask: u32| -> Vec<usize> {
                let mut p = v.clone();
                for (t, &k) in coords.iter().enumerate() {
                    if mask & (1 << t) != 0 {
                        p[k] += 1;
                    }
                }
                p
            };
            let vert = |m: u32| vertex(&at(m));
            let edge = |a: u32, b: u32| map(&at(a), &at(b));
            let bits: Vec<u32> = (0..coords.len() as u32).collect();
            let top = (1u32 << coords.len()) - 1;
            let witness = || format!("unit cube at {v:?} in directions {coords:?}");
            match punctured_colim(w, &bits, 0, &vert, &edge) {
                Ok(col) => {
                    let corner = mediate_colim(w, &col, &|m| edge(m, top));
                    r.expect(corner.is_some_and(|f| w.is_cof(f)), "cube-corner", witness);
                }
                Err(CubeErr::Absent { in_bound: true, what }) => r.bound("cube-corner", format!("{}: {what}", witness())),
                Err(CubeErr::Absent { in_bound: false, what }) => r.truncated("cube-corner", format!("{}: {what}", witness())),
                Err(CubeErr::NoMediator) => r.fail("cube-corner", format!("{}: no mediating map", witness())),
            }
        }
    }
    (r.violation_count, r.out_of_bound_count) == before
}


// ---------------------------------------------------------------------------
// Multiexact functors

/// A functor `A₁×…×A_k → B` tabulated on objects and morphisms. Tuples are
/// numbered in mixed radix with the first slot most significant, matching
/// [`product_category`].
#[derive(Clone, Debug)]
pub struct KFunctor {
    pub name: String,
    pub n_obj: Vec<usize>,
    pub n_mor: Vec<usize>,
    pub obj: Vec<u32>,
    pub mor: Vec<u32>,
}

fn join(v: &[u32], radix: &[usize]) -> usize {
    v.iter().zip(radix).fold(0, |acc, (&x, &r)| acc * r + x as usize)
}

/// Every tuple in `0..r₁ × … × 0..r_k`, lexicographically.
pub fn tuples(radix: &[usize]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &r in radix {
        out = out.into_iter().flat_map(|p| (0..r as u32).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

impl KFunctor {
    pub fn from_fn(
        name: impl Into<String>,
        sources: &[&FinCat],
        on_obj: impl Fn(&[u32]) -> u32,
        on_mor: impl Fn(&[u32]) -> u32,
    ) -> KFunctor {
        let n_obj: Vec<usize> = sources.iter().map(|c| c.n_obj()).collect();
        let n_mor: Vec<usize> = sources.iter().map(|c| c.n_mor()).collect();
        let obj = tuples(&n_obj).iter().map(|t| on_obj(t)).collect();
        let mor = tuples(&n_mor).iter().map(|t| on_mor(t)).collect();
        KFunctor { name: name.into(), n_obj, n_mor, obj, mor }
    }

    /// The identity of a single category.
    pub fn identity(c: &FinCat) -> KFunctor {
        KFunctor::from_fn("id", &[c], |x| x[0], |f| f[0])
    }

    pub fn arity(&self) -> usize {
        self.n_obj.len()
    }

    pub fn ob(&self, xs: &[u32]) -> u32 {
        self.obj[join(xs, &self.n_obj)]
    }

    pub fn mo(&self, fs: &[u32]) -> u32 {
        self.mor[join(fs, &self.n_mor)]
    }
}

/// A natural transformation between functors of the same arity, one
/// component per tuple of objects.
#[derive(Clone, Debug)]
pub struct KNatTrans {
    pub name: String,
    pub n_obj: Vec<usize>,
    pub comp: Vec<u32>,
}

impl KNatTrans {
    pub fn from_fn(name: impl Into<String>, n_obj: &[usize], at: impl Fn(&[u32]) -> u32) -> KNatTrans {
        KNatTrans { name: name.into(), n_obj: n_obj.to_vec(), comp: tuples(n_obj).iter().map(|t| at(t)).collect() }
    }

    pub fn identity(f: &KFunctor, tgt: &FinCat) -> KNatTrans {
        KNatTrans::from_fn("id", &f.n_obj, |xs| tgt.id(f.ob(xs)))
    }

    pub fn at(&self, xs: &[u32]) -> u32 {
        self.comp[join(xs, &self.n_obj)]
    }
}

/// Typing and naturality of `mu: f ⇒ g` on every tuple of morphisms.
pub fn validate_k_nat_trans(mu: &KNatTrans, f: &KFunctor, g: &KFunctor, srcs: &[&WaldStruct], tgt: &WaldStruct) -> Report {
    let mut r = Report::new();
    if mu.n_obj != f.n_obj || mu.n_obj != g.n_obj {
        r.structural("arity", format!("{:?} vs {:?}, {:?}", mu.n_obj, f.n_obj, g.n_obj));
        return r;
    }
    for xs in tuples(&mu.n_obj) {
        let m = mu.at(&xs);
        if !tgt.has_mor(m) || tgt.src(m) != f.ob(&xs) || tgt.tgt(m) != g.ob(&xs) {
            r.structural("component-typing", format!("{xs:?}"));
        }
    }
    if !r.is_clean() {
        return r;
    }
    let n_mor: Vec<usize> = srcs.iter().map(|c| c.cat.n_mor()).collect();
    for fs in tuples(&n_mor) {
        let a: Vec<u32> = fs.iter().zip(srcs).map(|(&m, c)| c.src(m)).collect();
        let b: Vec<u32> = fs.iter().zip(srcs).map(|(&m, c)| c.tgt(m)).collect();
        let ok = tgt.comp(mu.at(&b), f.mo(&fs)) == tgt.comp(g.mo(&fs), mu.at(&a));
        r.expect(ok, "naturality", || format!("{fs:?}"));
    }
    r
}

/// Exactness of `f` in each slot and cubical cofibrancy on tuples of
/// cofibrations.
pub fn validate_k_exact(f: &KFunctor, srcs: &[&WaldStruct], tgt: &WaldStruct) -> Report {
    let mut r = Report::new();
    let k = f.arity();
    if srcs.len() != k
        || srcs.iter().zip(&f.n_obj).any(|(s, &n)| s.n_obj() != n)
        || srcs.iter().zip(&f.n_mor).any(|(s, &n)| s.cat.n_mor() != n)
        || f.obj.iter().any(|&x| x as usize >= tgt.n_obj())
        || f.mor.iter().any(|&m| m as usize >= tgt.cat.n_mor())
    {
        r.structural("table-shape", format!("{} does not fit its source and target", f.name));
        return r;
    }
    if k == 0 {
        r.tick();
        return r;
    }
    let cats: Vec<&FinCat> = srcs.iter().map(|s| &s.cat).collect();
    let prod = product_category(&cats);
    r.merge(validate_functor(&Functor { source: &prod, target: &tgt.cat, obj_map: f.obj.clone(), mor_map: f.mor.clone() }));
    if !r.is_ok() {
        return r;
    }
    for xs in tuples(&f.n_obj) {
        if xs.iter().zip(srcs).any(|(&x, s)| x == s.zero) {
            r.expect(f.ob(&xs) == tgt.zero, "basepoint", || format!("{xs:?}"));
        }
    }
    for i in 0..k {
        let others: Vec<usize> = (0..k).map(|j| if j == i { 1 } else { f.n_obj[j] }).collect();
        for rest in tuples(&others) {
            let ids = |slot_mor: u32| -> Vec<u32> {
                (0..k).map(|j| if j == i { slot_mor } else { srcs[j].id(rest[j]) }).collect()
            };
            let s = srcs[i];
            for m in s.cat.morphisms() {
                let fm = f.mo(&ids(m));
                if s.cof[m as usize] {
                    r.expect(tgt.cof[fm as usize], "preserves-cofibrations", || format!("slot {i}, {}, {rest:?}", s.mor_name(m)));
                }
                if s.weq[m as usize] {
                    r.expect(tgt.weq[fm as usize], "preserves-weqs", || format!("slot {i}, {}, {rest:?}", s.mor_name(m)));
                }
            }
            for a in s.cat.morphisms().filter(|&a| s.cof[a as usize]) {
                for &b in s.cat.out_of(s.src(a)) {
                    if !s.span_in_bound(a, b) {
                        continue;
                    }
                    let Some(po) = s.pushout(a, b) else { continue };
                    let ok = is_pushout_square(tgt, f.mo(&ids(a)), f.mo(&ids(b)), f.mo(&ids(po.l1)), f.mo(&ids(po.l2)));
                    r.expect(ok, "preserves-pushouts", || {
                        format!("slot {i}, {} and {}, {rest:?}", s.mor_name(a), s.mor_name(b))
                    });
                }
            }
        }
    }
    if k >= 2 {
        let cofs: Vec<Vec<u32>> =
            srcs.iter().map(|s| s.cat.morphisms().filter(|&m| s.cof[m as usize]).collect()).collect();
        let radix: Vec<usize> = cofs.iter().map(|c| c.len()).collect();
        for pick in tuples(&radix) {
            let fs: Vec<u32> = pick.iter().enumerate().map(|(i, &p)| cofs[i][p as usize]).collect();
            let dims = vec![1; k];
            let vertex = |v: &[usize]| {
                let xs: Vec<u32> = (0..k).map(|i| if v[i] == 0 { srcs[i].src(fs[i]) } else { srcs[i].tgt(fs[i]) }).collect();
                f.ob(&xs)
            };
            let map = |u: &[usize], v: &[usize]| {
                let ms: Vec<u32> = (0..k)
                    .map(|i| match (u[i], v[i]) {
                        (0, 1) => fs[i],
                        (0, _) => srcs[i].id(srcs[i].src(fs[i])),
                        _ => srcs[i].id(srcs[i].tgt(fs[i])),
                    })
                    .collect();
                f.mo(&ms)
            };
            check_cubical(tgt, &dims, &vertex, &map, &mut r);
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Wedges and Λ

/// A chosen pushout square `X ← ∗ → Y` for each pair of objects: apex
/// `X∨Y` with `ι₁ = l1` and `ι₂ = l2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WedgeChoice {
    pub n: usize,
    pub table: Vec<Option<Cocone>>,
}

impl WedgeChoice {
    pub fn get(&self, x: u32, y: u32) -> Option<Cocone> {
        self.table[x as usize * self.n + y as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Option<Cocone>) {
        self.table[x as usize * self.n + y as usize] = c;
    }
}

pub fn default_wedge_choice<W: WaldCat + ?Sized>(w: &W) -> WedgeChoice {
    let n = w.n_obj();
    let z = w.zero();
    let mut table = Vec::with_capacity(n * n);
    for x in 0..n as u32 {
        for y in 0..n as u32 {
            let c = if y == z {
                Some(Cocone { apex: x, l1: w.id(x), l2: w.initial(x) })
            } else if x == z {
                Some(Cocone { apex: y, l1: w.initial(y), l2: w.id(y) })
            } else {
                w.pushout(w.initial(x), w.initial(y))
            };
            table.push(c);
        }
    }
    WedgeChoice { n, table }
}

pub fn validate_wedge_choice<W: WaldCat + ?Sized>(w: &W, om: &WedgeChoice) -> Report {
    let mut r = Report::new();
    let n = w.n_obj();
    if om.n != n || om.table.len() != n * n {
        r.structural("table-shape", "wedge table does not match the category");
        return r;
    }
    let z = w.zero();
    for x in 0..n as u32 {
        for y in 0..n as u32 {
            let pair = || format!("({}, {})", w.obj_name(x), w.obj_name(y));
            match om.get(x, y) {
                None => {
                    if w.wedge_in_bound(x, y) {
                        r.fail("wedge-missing", pair());
                    } else {
                        r.truncated("wedge-missing", pair());
                    }
                }
                Some(c) => {
                    let typed = c.apex < n as u32
                        && w.src(c.l1) == x
                        && w.tgt(c.l1) == c.apex
                        && w.src(c.l2) == y
                        && w.tgt(c.l2) == c.apex;
                    if !typed {
                        r.structural("wedge-typing", pair());
                        continue;
                    }
                    r.expect(is_pushout_square(w, w.initial(x), w.initial(y), c.l1, c.l2), "wedge-pushout", pair);
                    if y == z {
                        r.expect(c.apex == x && c.l1 == w.id(x), "wedge-unit", pair);
                    }
                    if x == z {
                        r.expect(c.apex == y && c.l2 == w.id(y), "wedge-unit", pair);
                    }
                }
            }
        }
    }
    r
}

/// `Λ(W, ω)`: the category of `W` with `∨`, `α`, `γ` and the projections,
/// all obtained from universal properties and memoized.
pub struct Smc<'a> {
    pub w: &'a WaldStruct,
    pub wedge: WedgeChoice,
    mors: RefCell<FxHashMap<(u32, u32), Option<u32>>>,
    inv: RefCell<FxHashMap<u32, Option<u32>>>,
    coh: RefCell<FxHashMap<(u8, [u32; 4]), Option<u32>>>,
}

pub fn lambda(w: &WaldStruct, wedge: WedgeChoice) -> Smc<'_> {
    Smc { w, wedge, mors: RefCell::default(), inv: RefCell::default(), coh: RefCell::default() }
}

impl<'a> Smc<'a> {
    fn memo(&self, key: (u8, [u32; 4]), f: impl FnOnce() -> Option<u32>) -> Option<u32> {
        if let Some(v) = self.coh.borrow().get(&key) {
            return *v;
        }
        let v = f();
        self.coh.borrow_mut().insert(key, v);
        v
    }

    pub fn unit(&self) -> u32 {
        self.w.zero
    }

    pub fn obj(&self, x: u32, y: u32) -> Option<u32> {
        self.wedge.get(x, y).map(|c| c.apex)
    }

    pub fn i1(&self, x: u32, y: u32) -> Option<u32> {
        self.wedge.get(x, y).map(|c| c.l1)
    }

    pub fn i2(&self, x: u32, y: u32) -> Option<u32> {
        self.wedge.get(x, y).map(|c| c.l2)
    }

    /// `f ∨ g`.
    pub fn mor(&self, f: u32, g: u32) -> Option<u32> {
        if let Some(v) = self.mors.borrow().get(&(f, g)) {
            return *v;
        }
        let w = self.w;
        let v = (|| {
            let a = self.wedge.get(w.src(f), w.src(g))?;
            let b = self.wedge.get(w.tgt(f), w.tgt(g))?;
            mediate(w, a.l1, a.l2, w.c(b.l1, f), w.c(b.l2, g))
        })();
        self.mors.borrow_mut().insert((f, g), v);
        v
    }

    pub fn inv(&self, f: u32) -> Option<u32> {
        if let Some(v) = self.inv.borrow().get(&f) {
            return *v;
        }
        let v = inverse(self.w, f);
        self.inv.borrow_mut().insert(f, v);
        v
    }

    /// `α: (X∨Y)∨Z → X∨(Y∨Z)`.
    pub fn alpha(&self, x: u32, y: u32, z: u32) -> Option<u32> {
        self.memo((0, [x, y, z, 0]), || self.alpha_raw(x, y, z))
    }

    fn alpha_raw(&self, x: u32, y: u32, z: u32) -> Option<u32> {
        let w = self.w;
        let xy = self.wedge.get(x, y)?;
        let l = self.wedge.get(xy.apex, z)?;
        let yz = self.wedge.get(y, z)?;
        let rr = self.wedge.get(x, yz.apex)?;
        let on_xy = mediate(w, xy.l1, xy.l2, rr.l1, w.c(rr.l2, yz.l1))?;
        mediate(w, l.l1, l.l2, on_xy, w.c(rr.l2, yz.l2))
    }

    /// `γ: X∨Y → Y∨X`.
    pub fn gamma(&self, x: u32, y: u32) -> Option<u32> {
        self.memo((1, [x, y, 0, 0]), || self.gamma_raw(x, y))
    }

    fn gamma_raw(&self, x: u32, y: u32) -> Option<u32> {
        let a = self.wedge.get(x, y)?;
        let b = self.wedge.get(y, x)?;
        mediate(self.w, a.l1, a.l2, b.l2, b.l1)
    }

    pub fn pi1(&self, x: u32, y: u32) -> Option<u32> {
        self.memo((2, [x, y, 0, 0]), || {
            let a = self.wedge.get(x, y)?;
            mediate(self.w, a.l1, a.l2, self.w.id(x), self.w.zero_map(y, x))
        })
    }

    pub fn pi2(&self, x: u32, y: u32) -> Option<u32> {
        self.memo((3, [x, y, 0, 0]), || {
            let a = self.wedge.get(x, y)?;
            mediate(self.w, a.l1, a.l2, self.w.zero_map(x, y), self.w.id(y))
        })
    }

    /// The canonical `(a∨(b∨c))∨d → (a∨b)∨(c∨d)`, namely
    /// `α_{a∨b,c,d} ∘ (α⁻¹_{a,b,c} ∨ id_d)`.
    pub fn shuffle(&self, a: u32, b: u32, c: u32, d: u32) -> Option<u32> {
        self.memo((4, [a, b, c, d]), || self.shuffle_raw(a, b, c, d))
    }

    fn shuffle_raw(&self, a: u32, b: u32, c: u32, d: u32) -> Option<u32> {
        let ab = self.obj(a, b)?;
        let t = self.alpha(ab, c, d)?;
        let s = self.inv(self.alpha(a, b, c)?)?;
        Some(self.w.c(t, self.mor(s, self.w.id(d))?))
    }
}

/// Checks every symmetric monoidal law on all in-bound instances.
pub fn validate_smc(s: &Smc) -> Report {
    let w = s.w;
    let c = &w.cat;
    let mut r = Report::new();
    let z = w.zero;
    let n = c.n_obj() as u32;
    let id = |x: u32| c.id(x);
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
    for x in 0..n {
        r.expect(s.obj(x, z) == Some(x) && s.obj(z, x) == Some(x), "unit", || c.obj_name(x));
    }
    for f in c.morphisms() {
        r.expect(s.mor(f, id(z)) == Some(f) && s.mor(id(z), f) == Some(f), "unit", || c.mor_name(f));
    }
    for x in 0..n {
        for y in 0..n {
            let xy = get!(s.obj(x, y), "tensor-identity", format!("({x},{y})"));
            r.expect(s.mor(id(x), id(y)) == Some(id(xy)), "tensor-identity", || format!("({x},{y})"));
            let g = get!(s.gamma(x, y), "gamma", format!("({x},{y})"));
            let g2 = get!(s.gamma(y, x), "gamma", format!("({y},{x})"));
            r.expect(c.comp(g2, g) == Some(id(xy)), "gamma-involution", || format!("({x},{y})"));
            if x == z || y == z {
                r.expect(g == id(xy), "unit", || format!("gamma({x},{y})"));
            }
            let (p1, p2) = (s.pi1(x, y), s.pi2(x, y));
            let (i1, i2) = (s.i1(x, y).unwrap(), s.i2(x, y).unwrap());
            let ok = p1.is_some_and(|p| c.comp(p, i1) == Some(id(x))) && p2.is_some_and(|p| c.comp(p, i2) == Some(id(y)));
            r.expect(ok, "projections", || format!("({x},{y})"));
        }
    }
    // ∨ is a bifunctor: functorial in each variable and satisfying interchange.
    for y in 0..n {
        for f in c.morphisms() {
            for &f2 in c.out_of(c.tgt(f)) {
                let lhs = get!(s.mor(c.c(f2, f), id(y)), "tensor-composition", format!("{f2}.{f} with {y}"));
                let a = get!(s.mor(f, id(y)), "tensor-composition", format!("{f} with {y}"));
                let b = get!(s.mor(f2, id(y)), "tensor-composition", format!("{f2} with {y}"));
                r.expect(c.comp(b, a) == Some(lhs), "tensor-composition", || format!("({f2}.{f}) v id{y}"));
                let lhs = get!(s.mor(id(y), c.c(f2, f)), "tensor-composition", format!("{y} with {f2}.{f}"));
                let a = get!(s.mor(id(y), f), "tensor-composition", format!("{y} with {f}"));
                let b = get!(s.mor(id(y), f2), "tensor-composition", format!("{y} with {f2}"));
                r.expect(c.comp(b, a) == Some(lhs), "tensor-composition", || format!("id{y} v ({f2}.{f})"));
            }
        }
    }
    for f in c.morphisms() {
        for g in c.morphisms() {
            let Some(fg) = s.mor(f, g) else {
                if s.obj(c.src(f), c.src(g)).is_some() && s.obj(c.tgt(f), c.tgt(g)).is_some() {
                    r.fail("tensor-morphism", format!("{} v {}", c.mor_name(f), c.mor_name(g)));
                }
                continue;
            };
            let a = get!(s.mor(f, id(c.tgt(g))), "interchange", format!("{f},{g}"));
            let b = get!(s.mor(id(c.src(f)), g), "interchange", format!("{f},{g}"));
            let a2 = get!(s.mor(id(c.tgt(f)), g), "interchange", format!("{f},{g}"));
            let b2 = get!(s.mor(f, id(c.src(g))), "interchange", format!("{f},{g}"));
            r.expect(c.comp(a, b) == Some(fg) && c.comp(a2, b2) == Some(fg), "interchange", || {
                format!("{} v {}", c.mor_name(f), c.mor_name(g))
            });
            let gm = get!(s.gamma(c.src(f), c.src(g)), "gamma-natural", String::new());
            let gt = get!(s.gamma(c.tgt(f), c.tgt(g)), "gamma-natural", String::new());
            let gf = get!(s.mor(g, f), "gamma-natural", format!("{g},{f}"));
            r.expect(c.comp(gt, fg) == c.comp(gf, gm), "gamma-natural", || format!("{} v {}", c.mor_name(f), c.mor_name(g)));
        }
    }
    // α: invertible, natural in each variable, unital.
    for x in 0..n {
        for y in 0..n {
            for t in 0..n {
                let a = get!(s.alpha(x, y, t), "alpha", format!("({x},{y},{t})"));
                r.expect(s.inv(a).is_some(), "alpha-iso", || format!("({x},{y},{t})"));
                if x == z || y == z || t == z {
                    r.expect(c.is_identity(a), "unit", || format!("alpha({x},{y},{t})"));
                }
            }
        }
    }
    for f in c.morphisms() {
        let (x, x2) = (c.src(f), c.tgt(f));
        for y in 0..n {
            for t in 0..n {
                let wit = || format!("{} with ({y},{t})", c.mor_name(f));
                let a1 = get!(s.alpha(x, y, t), "alpha-natural", wit());
                let a2 = get!(s.alpha(x2, y, t), "alpha-natural", wit());
                let lhs = get!(s.mor(f, id(y)).and_then(|m| s.mor(m, id(t))), "alpha-natural", wit());
                let rhs = get!(s.obj(y, t).and_then(|yt| s.mor(f, id(yt))), "alpha-natural", wit());
                r.expect(c.comp(a2, lhs) == c.comp(rhs, a1), "alpha-natural", wit);
                let (a1, a2) = (get!(s.alpha(y, x, t), "alpha-natural", wit()), get!(s.alpha(y, x2, t), "alpha-natural", wit()));
                let lhs = get!(s.mor(id(y), f).and_then(|m| s.mor(m, id(t))), "alpha-natural", wit());
                let rhs = get!(s.mor(f, id(t)).and_then(|m| s.mor(id(y), m)), "alpha-natural", wit());
                r.expect(c.comp(a2, lhs) == c.comp(rhs, a1), "alpha-natural", wit);
                let (a1, a2) = (get!(s.alpha(y, t, x), "alpha-natural", wit()), get!(s.alpha(y, t, x2), "alpha-natural", wit()));
                let lhs = get!(s.obj(y, t).and_then(|yt| s.mor(id(yt), f)), "alpha-natural", wit());
                let rhs = get!(s.mor(id(t), f).and_then(|m| s.mor(id(y), m)), "alpha-natural", wit());
                r.expect(c.comp(a2, lhs) == c.comp(rhs, a1), "alpha-natural", wit);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for x in 0..n {
                // Hexagon: α_{b,x,a} ∘ γ_{a,b∨x} ∘ α_{a,b,x} = (id_b∨γ_{a,x}) ∘ α_{b,a,x} ∘ (γ_{a,b}∨id_x).
                let wit = || format!("({a},{b},{x})");
                let bx = get!(s.obj(b, x), "hexagon", wit());
                let lhs = get!(
                    (|| Some(c.c(s.alpha(b, x, a)?, c.c(s.gamma(a, bx)?, s.alpha(a, b, x)?))))(),
                    "hexagon",
                    wit()
                );
                let rhs = get!(
                    (|| {
                        let g1 = s.mor(id(b), s.gamma(a, x)?)?;
                        let g2 = s.mor(s.gamma(a, b)?, id(x))?;
                        Some(c.c(g1, c.c(s.alpha(b, a, x)?, g2)))
                    })(),
                    "hexagon",
                    wit()
                );
                r.expect(lhs == rhs, "hexagon", wit);
                for d in 0..n {
                    let wit = || format!("({a},{b},{x},{d})");
                    let v = (|| {
                        let ab = s.obj(a, b)?;
                        let xd = s.obj(x, d)?;
                        let bx = s.obj(b, x)?;
                        let lhs = c.c(s.alpha(a, b, xd)?, s.alpha(ab, x, d)?);
                        let t1 = s.mor(s.alpha(a, b, x)?, id(d))?;
                        let t3 = s.mor(id(a), s.alpha(b, x, d)?)?;
                        let rhs = c.c(t3, c.c(s.alpha(a, bx, d)?, t1));
                        Some(lhs == rhs)
                    })();
                    let ok = get!(v, "pentagon", wit());
                    r.expect(ok, "pentagon", wit);
                }
            }
        }
    }
    r
}

/// Whether `f ∨ g` is a weak equivalence whenever `f` and `g` are.
pub fn check_weq_closed(s: &Smc) -> Report {
    let w = s.w;
    let mut r = Report::new();
    let weqs: Vec<u32> = w.cat.morphisms().filter(|&f| w.weq[f as usize]).collect();
    for &f in &weqs {
        for &g in &weqs {
            match s.mor(f, g) {
                Some(h) => {
                    r.expect(w.weq[h as usize], "weq-tensor", || format!("{} v {}", w.mor_name(f), w.mor_name(g)));
                }
                None => r.truncated("weq-tensor", format!("{f},{g}")),
            }
        }
    }
    r
}

/// For two wedge choices the identity functor is strong symmetric monoidal
/// with coherence maps `θ: X∨Y → X∨'Y` the mediating isomorphisms.
pub fn check_wedge_equivalence(s: &Smc, t: &Smc) -> Report {
    let w = s.w;
    let c = &w.cat;
    let n = c.n_obj() as u32;
    let mut r = Report::new();
    let theta = |x: u32, y: u32| -> Option<u32> {
        let a = s.wedge.get(x, y)?;
        let b = t.wedge.get(x, y)?;
        mediate(w, a.l1, a.l2, b.l1, b.l2)
    };
    for x in 0..n {
        for y in 0..n {
            let Some(th) = theta(x, y) else {
                r.truncated("theta", format!("({x},{y})"));
                continue;
            };
            r.expect(inverse(w, th).is_some(), "theta-iso", || format!("({x},{y})"));
            if let (Some(g), Some(g2), Some(th2)) = (s.gamma(x, y), t.gamma(x, y), theta(y, x)) {
                r.expect(c.comp(th2, g) == c.comp(g2, th), "theta-gamma", || format!("({x},{y})"));
            }
            for z in 0..n {
                let v = (|| {
                    let xy2 = t.obj(x, y)?;
                    let yz2 = t.obj(y, z)?;
                    // θ ∘ (θ ∨ id) then α′ versus θ ∘ (id ∨ θ) ∘ α.
                    let l = c.c(t.alpha(x, y, z)?, c.c(theta(xy2, z)?, s.mor(theta(x, y)?, c.id(z))?));
                    let rr = c.c(theta(x, yz2)?, c.c(s.mor(c.id(x), theta(y, z)?)?, s.alpha(x, y, z)?));
                    Some(l == rr)
                })();
                match v {
                    Some(ok) => {
                        r.expect(ok, "theta-alpha", || format!("({x},{y},{z})"));
                    }
                    None => r.truncated("theta-alpha", format!("({x},{y},{z})")),
                }
            }
        }
    }
    for f in c.morphisms() {
        for g in c.morphisms() {
            let v = (|| {
                let a = theta(c.src(f), c.src(g))?;
                let b = theta(c.tgt(f), c.tgt(g))?;
                Some(c.comp(b, s.mor(f, g)?) == c.comp(t.mor(f, g)?, a))
            })();
            if let Some(ok) = v {
                r.expect(ok, "theta-natural", || format!("{f},{g}"));
            }
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Distributivity data of a multiexact functor

/// The isomorphisms `δᵢ: F(…cᵢ…) ∨ F(…cᵢ′…) → F(…cᵢ∨cᵢ′…)` of a multiexact
/// functor, each the mediating map of `F(…ι₁…)` and `F(…ι₂…)`.
pub struct KLinear<'a> {
    pub f: &'a KFunctor,
    pub src: Vec<&'a Smc<'a>>,
    pub tgt: &'a Smc<'a>,
    memo: RefCell<HashMap<(usize, Vec<u32>, u32, u32), Option<u32>>>,
}

pub fn lambda_on_multiexact<'a>(f: &'a KFunctor, src: Vec<&'a Smc<'a>>, tgt: &'a Smc<'a>) -> KLinear<'a> {
    KLinear { f, src, tgt, memo: RefCell::new(HashMap::new()) }
}

impl<'a> KLinear<'a> {
    fn ids(&self, xs: &[u32]) -> Vec<u32> {
        xs.iter().enumerate().map(|(j, &x)| self.src[j].w.id(x)).collect()
    }

    /// `F` on a morphism in slot `i`, identities of `xs` elsewhere.
    pub fn slot_mor(&self, i: usize, xs: &[u32], m: u32) -> u32 {
        let mut v = self.ids(xs);
        v[i] = m;
        self.f.mo(&v)
    }

    pub fn at(&self, i: usize, xs: &[u32], x: u32) -> u32 {
        let mut v = xs.to_vec();
        v[i] = x;
        self.f.ob(&v)
    }

    pub fn delta(&self, i: usize, xs: &[u32], c: u32, c2: u32) -> Option<u32> {
        let mut key = xs.to_vec();
        key[i] = 0;
        let key = (i, key, c, c2);
        if let Some(v) = self.memo.borrow().get(&key) {
            return *v;
        }
        let v = (|| {
            let sw = self.src[i].wedge.get(c, c2)?;
            let tw = self.tgt.wedge.get(self.at(i, xs, c), self.at(i, xs, c2))?;
            let mut base = xs.to_vec();
            base[i] = sw.apex;
            mediate(self.tgt.w, tw.l1, tw.l2, self.slot_mor(i, &base, sw.l1), self.slot_mor(i, &base, sw.l2))
        })();
        self.memo.borrow_mut().insert(key, v);
        v
    }
}

pub fn validate_klinear(kl: &KLinear) -> Report {
    let f = kl.f;
    let k = f.arity();
    let b = kl.tgt;
    let bc = &b.w.cat;
    let mut r = Report::new();
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
    for xs in tuples(&f.n_obj) {
        if xs.iter().enumerate().any(|(j, &x)| x == kl.src[j].unit()) {
            r.expect(f.ob(&xs) == b.unit(), "basepoint", || format!("{xs:?}"));
            r.expect(f.mo(&kl.ids(&xs)) == bc.id(b.unit()), "basepoint", || format!("{xs:?}"));
        }
    }
    for i in 0..k {
        let a = kl.src[i];
        let ac = &a.w.cat;
        let na = f.n_obj[i] as u32;
        let others: Vec<usize> = (0..k).map(|j| if j == i { 1 } else { f.n_obj[j] }).collect();
        for xs in tuples(&others) {
            let rest_unit = xs.iter().enumerate().any(|(j, &x)| j != i && x == kl.src[j].unit());
            for c in 0..na {
                for c2 in 0..na {
                    let wit = || format!("slot {i}, ({c},{c2}), {xs:?}");
                    let d = get!(kl.delta(i, &xs, c, c2), "delta", wit());
                    r.expect(inverse(b.w, d).is_some(), "delta-iso", wit);
                    if rest_unit || c == a.unit() || c2 == a.unit() {
                        r.expect(bc.is_identity(d), "delta-unit", wit);
                    }
                    // (2) symmetry
                    let v = (|| {
                        let d2 = kl.delta(i, &xs, c2, c)?;
                        let g = b.gamma(kl.at(i, &xs, c), kl.at(i, &xs, c2))?;
                        let fg = kl.slot_mor(i, &xs, a.gamma(c, c2)?);
                        Some(bc.comp(d2, g) == bc.comp(fg, d))
                    })();
                    let ok = get!(v, "delta-gamma", wit());
                    r.expect(ok, "delta-gamma", wit);
                    // (1) associativity
                    for c3 in 0..na {
                        let wit = || format!("slot {i}, ({c},{c2},{c3}), {xs:?}");
                        let v = (|| {
                            let (f1, f2, f3) = (kl.at(i, &xs, c), kl.at(i, &xs, c2), kl.at(i, &xs, c3));
                            let cc2 = a.obj(c, c2)?;
                            let c23 = a.obj(c2, c3)?;
                            let lhs = bc.c(
                                kl.slot_mor(i, &xs, a.alpha(c, c2, c3)?),
                                bc.c(kl.delta(i, &xs, cc2, c3)?, b.mor(kl.delta(i, &xs, c, c2)?, bc.id(f3))?),
                            );
                            let rhs = bc.c(
                                kl.delta(i, &xs, c, c23)?,
                                bc.c(b.mor(bc.id(f1), kl.delta(i, &xs, c2, c3)?)?, b.alpha(f1, f2, f3)?),
                            );
                            Some(lhs == rhs)
                        })();
                        let ok = get!(v, "delta-alpha", wit());
                        r.expect(ok, "delta-alpha", wit);
                    }
                }
            }
            // Naturality of δᵢ in slot i.
            for m in ac.morphisms() {
                for m2 in ac.morphisms() {
                    let wit = || format!("slot {i}, {} and {}, {xs:?}", ac.mor_name(m), ac.mor_name(m2));
                    let v = (|| {
                        let d = kl.delta(i, &xs, ac.src(m), ac.src(m2))?;
                        let d2 = kl.delta(i, &xs, ac.tgt(m), ac.tgt(m2))?;
                        let top = kl.slot_mor(i, &xs, a.mor(m, m2)?);
                        let side = b.mor(kl.slot_mor(i, &xs, m), kl.slot_mor(i, &xs, m2))?;
                        Some(bc.comp(top, d) == bc.comp(d2, side))
                    })();
                    if let Some(ok) = v {
                        r.expect(ok, "delta-natural", wit);
                    }
                }
            }
        }
        // Naturality of δᵢ in every other slot.
        for j in (0..k).filter(|&j| j != i) {
            let others: Vec<usize> = (0..k).map(|t| if t == i || t == j { 1 } else { f.n_obj[t] }).collect();
            for xs in tuples(&others) {
                for g in kl.src[j].w.cat.morphisms() {
                    for c in 0..na {
                        for c2 in 0..na {
                            let v = (|| {
                                let gs = kl.src[j].w;
                                let mut lo = xs.clone();
                                lo[j] = gs.src(g);
                                let mut hi = xs.clone();
                                hi[j] = gs.tgt(g);
                                let d = kl.delta(i, &lo, c, c2)?;
                                let d2 = kl.delta(i, &hi, c, c2)?;
                                let mut v1 = kl.ids(&lo);
                                v1[j] = g;
                                v1[i] = a.w.id(a.obj(c, c2)?);
                                let top = f.mo(&v1);
                                v1[i] = a.w.id(c);
                                let s1 = f.mo(&v1);
                                v1[i] = a.w.id(c2);
                                let s2 = f.mo(&v1);
                                Some(bc.comp(top, d) == bc.comp(d2, b.mor(s1, s2)?))
                            })();
                            if let Some(ok) = v {
                                r.expect(ok, "delta-natural", || format!("slot {i} along slot {j} map {g}, ({c},{c2})"));
                            }
                        }
                    }
                }
            }
        }
    }
    // (3) compatibility of δᵢ and δⱼ.
    for i in 0..k {
        for j in i + 1..k {
            let (ai, aj) = (kl.src[i], kl.src[j]);
            let others: Vec<usize> = (0..k).map(|t| if t == i || t == j { 1 } else { f.n_obj[t] }).collect();
            for xs in tuples(&others) {
                for t in 0..f.n_obj[i] as u32 {
                    for u in 0..f.n_obj[i] as u32 {
                        for v in 0..f.n_obj[j] as u32 {
                            for w2 in 0..f.n_obj[j] as u32 {
                                let wit = || format!("slots {i},{j}: ({t},{u}) x ({v},{w2}), {xs:?}");
                                let res = (|| {
                                    let at = |p: u32, q: u32| {
                                        let mut z = xs.clone();
                                        z[i] = p;
                                        z[j] = q;
                                        z
                                    };
                                    let tu = ai.obj(t, u)?;
                                    let vw = aj.obj(v, w2)?;
                                    let (tv, uv, tw, uw) = (f.ob(&at(t, v)), f.ob(&at(u, v)), f.ob(&at(t, w2)), f.ob(&at(u, w2)));
                                    let lhs = bc.c(
                                        kl.delta(j, &at(tu, 0), v, w2)?,
                                        bc.c(b.mor(kl.delta(i, &at(0, v), t, u)?, kl.delta(i, &at(0, w2), t, u)?)?, b.shuffle(tv, uv, tw, uw)?),
                                    );
                                    let sw = b.mor(bc.id(tv), b.gamma(uv, tw)?)?;
                                    let sw = b.mor(sw, bc.id(uw))?;
                                    let rhs = bc.c(
                                        kl.delta(i, &at(0, vw), t, u)?,
                                        bc.c(
                                            b.mor(kl.delta(j, &at(t, 0), v, w2)?, kl.delta(j, &at(u, 0), v, w2)?)?,
                                            bc.c(b.shuffle(tv, tw, uv, uw)?, sw),
                                        ),
                                    );
                                    Some(lhs == rhs)
                                })();
                                let ok = get!(res, "delta-delta", wit());
                                r.expect(ok, "delta-delta", wit);
                            }
                        }
                    }
                }
            }
        }
    }
    r
}

/// `G ∘ (F₁,…,F_l)` as a functor on the concatenated slots.
pub fn compose_kfunctors(g: &KFunctor, fs: &[&KFunctor]) -> KFunctor {
    let n_obj: Vec<usize> = fs.iter().flat_map(|f| f.n_obj.clone()).collect();
    let n_mor: Vec<usize> = fs.iter().flat_map(|f| f.n_mor.clone()).collect();
    let split = |v: &[u32], objs: bool| -> Vec<u32> {
        let mut out = Vec::new();
        let mut at = 0;
        for f in fs {
            let k = f.arity();
            let part = &v[at..at + k];
            out.push(if objs { f.ob(part) } else { f.mo(part) });
            at += k;
        }
        out
    };
    let obj = tuples(&n_obj).iter().map(|t| g.ob(&split(t, true))).collect();
    let mor = tuples(&n_mor).iter().map(|t| g.mo(&split(t, false))).collect();
    let names: Vec<&str> = fs.iter().map(|f| f.name.as_str()).collect();
    KFunctor { name: format!("{}({})", g.name, names.join(",")), n_obj, n_mor, obj, mor }
}

/// Checks that the distributivity maps of a composite are the composites
/// `G(…δ^{Fᵢ}ⱼ…) ∘ δ^G_i`.
pub fn check_composite_delta(h: &KLinear, g: &KLinear, fs: &[&KLinear]) -> Report {
    let mut r = Report::new();
    let bc = &h.tgt.w.cat;
    let mut offset = 0;
    for (i, fi) in fs.iter().enumerate() {
        let ki = fi.f.arity();
        for j in 0..ki {
            let s = offset + j;
            let na = h.f.n_obj[s] as u32;
            let others: Vec<usize> = (0..h.f.arity()).map(|t| if t == s { 1 } else { h.f.n_obj[t] }).collect();
            for xs in tuples(&others) {
                for c in 0..na {
                    for c2 in 0..na {
                        let Some(direct) = h.delta(s, &xs, c, c2) else { continue };
                        let composite = (|| {
                            let outer: Vec<u32> =
                                fs.iter().enumerate().map(|(t, f)| f.f.ob(&xs[offset_of(fs, t)..offset_of(fs, t) + f.f.arity()])).collect();
                            let part = &xs[offset..offset + ki];
                            let di = fi.delta(j, part, c, c2)?;
                            let dg = g.delta(i, &outer, fi.at(j, part, c), fi.at(j, part, c2))?;
                            Some(bc.c(g.slot_mor(i, &outer, di), dg))
                        })();
                        r.expect(composite == Some(direct), "composite-delta", || format!("slot {s}, ({c},{c2}), {xs:?}"));
                    }
                }
            }
        }
        offset += ki;
    }
    r
}

fn offset_of(fs: &[&KLinear], t: usize) -> usize {
    fs[..t].iter().map(|f| f.f.arity()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::isos;
    use crate::fixtures::{fixture_vect_f2, smash_square, smash_with_sphere, PointedSets};

    #[test]
    fn fixtures_satisfy_the_axioms_within_bound() {
        let p3 = PointedSets::new(3);
        let r = validate_waldhausen(&p3.ws);
        assert!(r.is_ok(), "{r}");
        assert!(r.bounded_count > 0);
        assert!(validate_waldhausen(&fixture_vect_f2(2)).is_ok());
        let t = PointedSets::new(0);
        assert!(validate_waldhausen(&t.ws).is_clean());
    }

    #[test]
    fn dropping_a_cofibration_is_caught() {
        let p3 = PointedSets::new(3);
        let mut w = p3.ws.clone();
        let f = p3.mor(p3.obj(0b001), p3.obj(0b011), |e| e);
        w.cof[f as usize] = false;
        let r = validate_waldhausen(&w);
        assert!(r.has_failure("composition-closure") || r.has_failure("cobase-change"), "{r}");
    }

    #[test]
    fn cubical_cofibrancy_examples() {
        let p = PointedSets::new(3);
        let w = &p.ws;
        let mut r = Report::new();
        assert!(check_cubical(w, &[1, 1], &|_| w.zero, &|_, _| w.id(w.zero), &mut r));
        let inc = |a: u32, b: u32| p.mor(p.obj(a), p.obj(b), |e| e);
        let masks = [[0b001, 0b011], [0b101, 0b111]];
        let vertex = |v: &[usize]| p.obj(masks[v[0]][v[1]]);
        let map = |u: &[usize], v: &[usize]| inc(masks[u[0]][u[1]], masks[v[0]][v[1]]);
        assert!(check_cubical(w, &[1, 1], &vertex, &map, &mut r), "{r}");
        // A square whose corner map identifies two points is not cofibrant.
        let vertex = |v: &[usize]| p.obj([[0b001, 0b011], [0b011, 0b011]][v[0]][v[1]]);
        let map = |u: &[usize], v: &[usize]| {
            let (a, b) = (vertex(u), vertex(v));
            p.mor(a, b, |e| e)
        };
        let mut r2 = Report::new();
        assert!(!check_cubical(w, &[1, 1], &vertex, &map, &mut r2));
        assert!(r2.has_failure("cube-corner"));
        let single = |v: &[usize]| p.obj([0b001, 0b011][v[0]]);
        let smap = |u: &[usize], v: &[usize]| inc([0b001, 0b011][u[0]], [0b001, 0b011][v[0]]);
        assert!(check_cubical(w, &[1], &single, &smap, &mut r));
    }

    #[test]
    fn default_wedges() {
        let p = PointedSets::new(2);
        let om = default_wedge_choice(&p.ws);
        for x in 0..4 {
            let c = om.get(x, 0).unwrap();
            assert_eq!((c.apex, c.l1), (x, p.ws.id(x)));
        }
        assert_eq!(om.get(0, 0).unwrap().apex, 0);
        let c = om.get(p.obj(0b01), p.obj(0b10)).unwrap();
        assert_eq!(p.elems(c.apex).len() + 1, 3);
        assert!(validate_wedge_choice(&p.ws, &om).is_ok());
        let mut bad = om.clone();
        let x = p.obj(0b01);
        bad.set(x, 0, Some(Cocone { apex: p.obj(0b11), l1: p.mor(x, p.obj(0b11), |e| e), l2: p.ws.initial(p.obj(0b11)) }));
        assert!(validate_wedge_choice(&p.ws, &bad).has_failure("wedge"));
    }

    /// Same squares as `om`, with every apex relabelled by its last automorphism.
    fn twisted(w: &WaldStruct, om: &WedgeChoice) -> WedgeChoice {
        let mut t = om.clone();
        for x in 0..w.n_obj() as u32 {
            for y in 0..w.n_obj() as u32 {
                if x == w.zero || y == w.zero {
                    continue;
                }
                if let Some(c) = om.get(x, y) {
                    let th = *isos(w, c.apex, c.apex).last().unwrap();
                    t.set(x, y, Some(Cocone { apex: c.apex, l1: w.c(th, c.l1), l2: w.c(th, c.l2) }));
                }
            }
        }
        t
    }

    #[test]
    fn lambda_is_symmetric_monoidal() {
        for w in [PointedSets::new(3).ws, fixture_vect_f2(2)] {
            let s = lambda(&w, default_wedge_choice(&w));
            let r = validate_smc(&s);
            assert!(r.is_ok(), "{}: {r}", w.name);
            assert!(check_weq_closed(&s).is_ok());
            let t = lambda(&w, twisted(&w, &s.wedge));
            assert!(validate_wedge_choice(&w, &t.wedge).is_ok());
            assert!(validate_smc(&t).is_ok());
            let e = check_wedge_equivalence(&s, &t);
            assert!(e.is_ok(), "{e}");
        }
    }

    #[test]
    fn lambda_examples() {
        let p = PointedSets::new(3);
        let s = lambda(&p.ws, default_wedge_choice(&p.ws));
        for f in p.ws.cat.morphisms() {
            assert_eq!(s.mor(f, p.ws.id(0)), Some(f));
        }
        let (x, y) = (p.obj(0b001), p.obj(0b010));
        let g = s.gamma(x, y).unwrap();
        assert_eq!(p.ws.comp(s.gamma(y, x).unwrap(), g), Some(p.ws.id(s.obj(x, y).unwrap())));
        assert!(p.ws.cat.is_identity(s.alpha(x, 0, y).unwrap()));
    }

    #[test]
    fn multiexact_functors() {
        let p3 = PointedSets::new(3);
        let p1 = PointedSets::new(1);
        let id = KFunctor::identity(&p3.ws.cat);
        assert!(validate_k_exact(&id, &[&p3.ws], &p3.ws).is_clean());
        let pick = KFunctor { name: "pick".into(), n_obj: vec![], n_mor: vec![], obj: vec![3], mor: vec![p3.ws.id(3)] };
        assert!(validate_k_exact(&pick, &[], &p3.ws).is_clean());
        let sm = smash_with_sphere(&p3, &p1);
        let r = validate_k_exact(&sm, &[&p3.ws, &p1.ws], &p3.ws);
        assert!(r.is_ok(), "{r}");
        let p2 = PointedSets::new(2);
        let p4 = PointedSets::new(4);
        let sq = smash_square(&p2, &p4);
        let r = validate_k_exact(&sq, &[&p2.ws, &p2.ws], &p4.ws);
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn distributivity_data() {
        let p3 = PointedSets::new(3);
        let s3 = lambda(&p3.ws, default_wedge_choice(&p3.ws));
        let id = KFunctor::identity(&p3.ws.cat);
        let kl = lambda_on_multiexact(&id, vec![&s3], &s3);
        assert!(validate_klinear(&kl).is_ok());
        for x in 0..8 {
            for y in 0..8 {
                if let Some(d) = kl.delta(0, &[0], x, y) {
                    assert!(p3.ws.cat.is_identity(d));
                }
            }
        }
        let p1 = PointedSets::new(1);
        let s1 = lambda(&p1.ws, default_wedge_choice(&p1.ws));
        let sm = smash_with_sphere(&p3, &p1);
        let kl = lambda_on_multiexact(&sm, vec![&s3, &s1], &s3);
        let r = validate_klinear(&kl);
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn smash_square_and_composites() {
        use crate::fixtures::smash_functor;
        let p1 = PointedSets::new(1);
        let p2 = PointedSets::new(2);
        let p4 = PointedSets::new(4);
        let (s1, s2, s4) = (
            lambda(&p1.ws, default_wedge_choice(&p1.ws)),
            lambda(&p2.ws, default_wedge_choice(&p2.ws)),
            lambda(&p4.ws, default_wedge_choice(&p4.ws)),
        );
        let sq = smash_square(&p2, &p4);
        let r = validate_klinear(&lambda_on_multiexact(&sq, vec![&s2, &s2], &s4));
        assert!(r.is_ok(), "{r}");

        let g = smash_functor(&p1, &p2, &p2, |_, y| y);
        let f1 = smash_functor(&p1, &p1, &p1, |_, _| 1);
        let f2 = KFunctor::identity(&p2.ws.cat);
        let h = compose_kfunctors(&g, &[&f1, &f2]);
        assert!(validate_k_exact(&h, &[&p1.ws, &p1.ws, &p2.ws], &p2.ws).is_ok());
        let kg = lambda_on_multiexact(&g, vec![&s1, &s2], &s2);
        let kf1 = lambda_on_multiexact(&f1, vec![&s1, &s1], &s1);
        let kf2 = lambda_on_multiexact(&f2, vec![&s2], &s2);
        let kh = lambda_on_multiexact(&h, vec![&s1, &s1, &s2], &s2);
        assert!(validate_klinear(&kh).is_ok());
        let r = check_composite_delta(&kh, &kg, &[&kf1, &kf2]);
        assert!(r.is_ok() && r.checked > 0, "{r}");
    }
}
