//! Explicit finite categories and the handful of universal constructions the
//! rest of the crate needs.
//!
//! Morphisms carry global ids, so composition is one flat table. Objects and
//! morphisms are `u32` indices; labels exist only for reports and fixtures.

use crate::report::Report;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, HashSet};

pub const NONE: u32 = u32::MAX;

/// Read access to a category whose morphisms are numbered. Implemented by
/// [`FinCat`] and by lazily materialized level categories.
pub trait Cat {
    fn n_obj(&self) -> usize;
    fn src(&self, f: u32) -> u32;
    fn tgt(&self, f: u32) -> u32;
    fn id(&self, x: u32) -> u32;
    fn comp(&self, g: u32, f: u32) -> Option<u32>;
    fn hom(&self, x: u32, y: u32) -> Cow<'_, [u32]>;

    /// Whether `f` names a morphism at all.
    fn has_mor(&self, _f: u32) -> bool {
        true
    }

    /// `g ∘ f`, for pairs already known to be composable.
    fn c(&self, g: u32, f: u32) -> u32 {
        match self.comp(g, f) {
            Some(h) => h,
            None => panic!("no composite recorded for {g} after {f}"),
        }
    }

    fn obj_name(&self, x: u32) -> String {
        format!("#{x}")
    }

    fn mor_name(&self, f: u32) -> String {
        format!("m{f}")
    }
}

#[derive(Clone, Debug)]
enum Comp {
    Dense { m: usize, t: Vec<u32> },
    Sparse(HashMap<(u32, u32), u32>),
}

const DENSE_LIMIT: usize = 3000;

#[derive(Clone, Debug)]
pub struct FinCat {
    pub obj_labels: Vec<String>,
    pub mor_labels: Vec<String>,
    src: Vec<u32>,
    tgt: Vec<u32>,
    ident: Vec<u32>,
    comp: Comp,
    homs: Vec<Vec<u32>>,
    outs: Vec<Vec<u32>>,
}

impl FinCat {
    /// Builds a category from its tables, calling `compose(g, f)` once for every
    /// pair with `tgt f = src g`.
    pub fn build(
        obj_labels: Vec<String>,
        mor_labels: Vec<String>,
        src: Vec<u32>,
        tgt: Vec<u32>,
        ident: Vec<u32>,
        mut compose: impl FnMut(u32, u32) -> u32,
    ) -> FinCat {
        let mut c = FinCat::skeleton(obj_labels, mor_labels, src, tgt, ident);
        let m = c.src.len();
        for f in 0..m as u32 {
            let y = c.tgt[f as usize];
            for gi in 0..c.outs[y as usize].len() {
                let g = c.outs[y as usize][gi];
                let h = compose(g, f);
                c.set_comp(g, f, h);
            }
        }
        c
    }

    /// Tables without any composites recorded.
    fn skeleton(
        obj_labels: Vec<String>,
        mor_labels: Vec<String>,
        src: Vec<u32>,
        tgt: Vec<u32>,
        ident: Vec<u32>,
    ) -> FinCat {
        let n = obj_labels.len();
        let m = src.len();
        let mut homs = vec![Vec::new(); n * n];
        let mut outs = vec![Vec::new(); n];
        for f in 0..m {
            let (s, t) = (src[f] as usize, tgt[f] as usize);
            if s < n && t < n {
                homs[s * n + t].push(f as u32);
                outs[s].push(f as u32);
            }
        }
        let comp = if m <= DENSE_LIMIT {
            Comp::Dense { m, t: vec![NONE; m * m] }
        } else {
            Comp::Sparse(HashMap::new())
        };
        FinCat { obj_labels, mor_labels, src, tgt, ident, comp, homs, outs }
    }

    pub fn terminal() -> FinCat {
        FinCat::build(vec!["*".into()], vec!["id*".into()], vec![0], vec![0], vec![0], |_, _| 0)
    }

    pub fn empty() -> FinCat {
        FinCat::build(vec![], vec![], vec![], vec![], vec![], |_, _| NONE)
    }

    pub fn discrete(n: usize) -> FinCat {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let ml = (0..n).map(|i| format!("id{i}")).collect();
        let ids: Vec<u32> = (0..n as u32).collect();
        FinCat::build(labels, ml, ids.clone(), ids.clone(), ids, |g, _| g)
    }

    /// The thin category of a preorder given by `leq` (which must be reflexive
    /// and transitive).
    pub fn poset(labels: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> FinCat {
        let n = labels.len();
        let mut pairs = Vec::new();
        let mut at = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                if leq(x, y) {
                    at.insert((x as u32, y as u32), pairs.len() as u32);
                    pairs.push((x as u32, y as u32));
                }
            }
        }
        let ml = pairs
            .iter()
            .map(|&(x, y)| format!("{}<={}", labels[x as usize], labels[y as usize]))
            .collect();
        let src = pairs.iter().map(|p| p.0).collect();
        let tgt = pairs.iter().map(|p| p.1).collect();
        let ident = (0..n as u32).map(|x| at[&(x, x)]).collect();
        FinCat::build(labels, ml, src, tgt, ident, |g, f| at[&(pairs[f as usize].0, pairs[g as usize].1)])
    }

    /// The ordinal `[m] = {0 < 1 < … < m}`.
    pub fn ordinal(m: usize) -> FinCat {
        FinCat::poset((0..=m).map(|i| i.to_string()).collect(), |a, b| a <= b)
    }

    pub fn n_mor(&self) -> usize {
        self.src.len()
    }

    pub fn objects(&self) -> std::ops::Range<u32> {
        0..self.obj_labels.len() as u32
    }

    pub fn morphisms(&self) -> std::ops::Range<u32> {
        0..self.src.len() as u32
    }

    pub fn hom_slice(&self, x: u32, y: u32) -> &[u32] {
        &self.homs[x as usize * self.obj_labels.len() + y as usize]
    }

    /// All morphisms with source `x`.
    pub fn out_of(&self, x: u32) -> &[u32] {
        &self.outs[x as usize]
    }

    pub fn is_identity(&self, f: u32) -> bool {
        self.ident.get(self.src[f as usize] as usize) == Some(&f)
    }

    pub fn set_comp(&mut self, g: u32, f: u32, h: u32) {
        match &mut self.comp {
            Comp::Dense { m, t } => t[g as usize * *m + f as usize] = h,
            Comp::Sparse(map) => {
                if h == NONE {
                    map.remove(&(g, f));
                } else {
                    map.insert((g, f), h);
                }
            }
        }
    }

    pub fn set_identity(&mut self, x: u32, f: u32) {
        self.ident[x as usize] = f;
    }

    /// Every recorded `(g, f, g∘f)`.
    pub fn composition_entries(&self) -> Vec<(u32, u32, u32)> {
        let mut v = Vec::new();
        match &self.comp {
            Comp::Dense { m, t } => {
                for g in 0..*m {
                    for f in 0..*m {
                        let h = t[g * m + f];
                        if h != NONE {
                            v.push((g as u32, f as u32, h));
                        }
                    }
                }
            }
            Comp::Sparse(map) => {
                v.extend(map.iter().map(|(&(g, f), &h)| (g, f, h)));
                v.sort_unstable();
            }
        }
        v
    }

    /// The inverse of `f`, if `f` is an isomorphism.
    pub fn inverse(&self, f: u32) -> Option<u32> {
        inverse(self, f)
    }

    pub fn to_raw(&self) -> RawCat {
        let ml = &self.mor_labels;
        RawCat {
            objects: self.obj_labels.clone(),
            morphisms: (0..self.n_mor())
                .map(|f| RawMor {
                    id: ml[f].clone(),
                    src: self.obj_labels[self.src[f] as usize].clone(),
                    tgt: self.obj_labels[self.tgt[f] as usize].clone(),
                })
                .collect(),
            identities: self
                .objects()
                .map(|x| (self.obj_labels[x as usize].clone(), ml[self.ident[x as usize] as usize].clone()))
                .collect(),
            composition: self
                .composition_entries()
                .into_iter()
                .map(|(g, f, h)| [ml[g as usize].clone(), ml[f as usize].clone(), ml[h as usize].clone()])
                .collect(),
        }
    }
}

impl Cat for FinCat {
    fn n_obj(&self) -> usize {
        self.obj_labels.len()
    }
    fn src(&self, f: u32) -> u32 {
        self.src[f as usize]
    }
    fn tgt(&self, f: u32) -> u32 {
        self.tgt[f as usize]
    }
    fn id(&self, x: u32) -> u32 {
        self.ident[x as usize]
    }
    fn comp(&self, g: u32, f: u32) -> Option<u32> {
        let h = match &self.comp {
            Comp::Dense { m, t } => *t.get(g as usize * *m + f as usize)?,
            Comp::Sparse(map) => *map.get(&(g, f))?,
        };
        (h != NONE).then_some(h)
    }
    fn has_mor(&self, f: u32) -> bool {
        (f as usize) < self.src.len()
    }
    fn hom(&self, x: u32, y: u32) -> Cow<'_, [u32]> {
        Cow::Borrowed(self.hom_slice(x, y))
    }
    fn obj_name(&self, x: u32) -> String {
        self.obj_labels.get(x as usize).cloned().unwrap_or_else(|| format!("#{x}"))
    }
    fn mor_name(&self, f: u32) -> String {
        self.mor_labels.get(f as usize).cloned().unwrap_or_else(|| format!("m{f}"))
    }
}

// ---------------------------------------------------------------------------
// JSON tables

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMor {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCat {
    pub objects: Vec<String>,
    pub morphisms: Vec<RawMor>,
    pub identities: BTreeMap<String, String>,
    pub composition: Vec<[String; 3]>,
}

impl RawCat {
    /// Resolves names. Dangling references come back as structural issues and
    /// no category is produced.
    pub fn resolve(&self) -> (Option<FinCat>, Report) {
        let mut r = Report::new();
        let mut oid = HashMap::new();
        for (i, o) in self.objects.iter().enumerate() {
            if oid.insert(o.as_str(), i as u32).is_some() {
                r.structural("duplicate-object", o.clone());
            }
        }
        let mut mid = HashMap::new();
        let (mut src, mut tgt) = (Vec::new(), Vec::new());
        for (i, m) in self.morphisms.iter().enumerate() {
            if mid.insert(m.id.as_str(), i as u32).is_some() {
                r.structural("duplicate-morphism", m.id.clone());
            }
            for (end, v) in [(&m.src, &mut src), (&m.tgt, &mut tgt)] {
                match oid.get(end.as_str()) {
                    Some(&x) => v.push(x),
                    None => {
                        r.structural("dangling-object", format!("{} mentions {end}", m.id));
                        v.push(NONE);
                    }
                }
            }
        }
        let mut ident = vec![NONE; self.objects.len()];
        for (o, f) in &self.identities {
            match (oid.get(o.as_str()), mid.get(f.as_str())) {
                (Some(&x), Some(&g)) => ident[x as usize] = g,
                _ => r.structural("dangling-identity", format!("{o} -> {f}")),
            }
        }
        for (x, &f) in ident.iter().enumerate() {
            if f == NONE {
                r.structural("missing-identity", self.objects[x].clone());
            }
        }
        let mut triples = Vec::new();
        for [g, f, h] in &self.composition {
            match (mid.get(g.as_str()), mid.get(f.as_str()), mid.get(h.as_str())) {
                (Some(&g), Some(&f), Some(&h)) => triples.push((g, f, h)),
                _ => r.structural("dangling-composite", format!("{g} . {f} = {h}")),
            }
        }
        if !r.is_ok() {
            return (None, r);
        }
        let ml = self.morphisms.iter().map(|m| m.id.clone()).collect();
        let mut c = FinCat::skeleton(self.objects.clone(), ml, src, tgt, ident);
        for (g, f, h) in triples {
            c.set_comp(g, f, h);
        }
        (Some(c), r)
    }
}

// ---------------------------------------------------------------------------
// Validation

/// Checks every category law exhaustively. The report is empty iff `c` is a
/// category.
pub fn validate_fincat(c: &FinCat) -> Report {
    let mut r = Report::new();
    let n = c.n_obj() as u32;
    let m = c.n_mor() as u32;
    for f in c.morphisms() {
        if c.src(f) >= n || c.tgt(f) >= n {
            r.structural("dangling-object", c.mor_name(f));
        }
    }
    for x in c.objects() {
        if c.id(x) >= m {
            r.structural("dangling-identity", c.obj_name(x));
        }
    }
    for (g, f, h) in c.composition_entries() {
        if g >= m || f >= m || h >= m {
            r.structural("dangling-composite", format!("{g} . {f} = {h}"));
        } else if c.tgt(f) != c.src(g) {
            r.fail("composition-domain", format!("{} . {} recorded but not composable", c.mor_name(g), c.mor_name(f)));
        }
    }
    if !r.is_ok() {
        return r;
    }
    for x in c.objects() {
        let i = c.id(x);
        r.expect(c.src(i) == x && c.tgt(i) == x, "identity-typing", || c.obj_name(x));
    }
    for f in c.morphisms() {
        for &g in c.out_of(c.tgt(f)) {
            match c.comp(g, f) {
                None => {
                    r.fail("composition-closure", format!("{} . {} missing", c.mor_name(g), c.mor_name(f)));
                }
                Some(h) => {
                    r.expect(c.src(h) == c.src(f) && c.tgt(h) == c.tgt(g), "composition-closure", || {
                        format!("{} . {} = {} has the wrong ends", c.mor_name(g), c.mor_name(f), c.mor_name(h))
                    });
                }
            }
        }
    }
    if !r.is_ok() {
        return r;
    }
    for f in c.morphisms() {
        let (s, t) = (c.src(f), c.tgt(f));
        r.expect(c.comp(c.id(t), f) == Some(f), "left-identity", || c.mor_name(f));
        r.expect(c.comp(f, c.id(s)) == Some(f), "right-identity", || c.mor_name(f));
    }
    for f in c.morphisms() {
        for &g in c.out_of(c.tgt(f)) {
            let gf = c.c(g, f);
            for &h in c.out_of(c.tgt(g)) {
                let a = c.c(c.c(h, g), f);
                let b = c.c(h, gf);
                r.expect(a == b, "associativity", || {
                    format!("{} . {} . {}", c.mor_name(h), c.mor_name(g), c.mor_name(f))
                });
            }
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Functors and natural transformations between explicit categories

#[derive(Clone, Debug)]
pub struct Functor<'a> {
    pub source: &'a FinCat,
    pub target: &'a FinCat,
    pub obj_map: Vec<u32>,
    pub mor_map: Vec<u32>,
}

pub fn validate_functor(fun: &Functor) -> Report {
    let (a, b) = (fun.source, fun.target);
    let mut r = Report::new();
    if fun.obj_map.len() != a.n_obj() || fun.mor_map.len() != a.n_mor() {
        r.structural("functor-size", "table length does not match the source");
        return r;
    }
    for f in a.morphisms() {
        let g = fun.mor_map[f as usize];
        if g as usize >= b.n_mor() {
            r.structural("dangling-morphism", a.mor_name(f));
            continue;
        }
        r.expect(
            b.src(g) == fun.obj_map[a.src(f) as usize] && b.tgt(g) == fun.obj_map[a.tgt(f) as usize],
            "functor-ends",
            || a.mor_name(f),
        );
    }
    if !r.is_ok() {
        return r;
    }
    for x in a.objects() {
        r.expect(fun.mor_map[a.id(x) as usize] == b.id(fun.obj_map[x as usize]), "functor-identity", || a.obj_name(x));
    }
    for (g, f, h) in a.composition_entries() {
        let lhs = b.comp(fun.mor_map[g as usize], fun.mor_map[f as usize]);
        r.expect(lhs == Some(fun.mor_map[h as usize]), "functor-composition", || {
            format!("{} . {}", a.mor_name(g), a.mor_name(f))
        });
    }
    r
}

#[derive(Clone, Debug)]
pub struct NatTrans<'a> {
    pub source: &'a Functor<'a>,
    pub target: &'a Functor<'a>,
    pub components: Vec<u32>,
}

pub fn validate_nat_trans(t: &NatTrans) -> Report {
    let (f, g) = (t.source, t.target);
    let (a, b) = (f.source, f.target);
    let mut r = Report::new();
    for x in a.objects() {
        let c = t.components[x as usize];
        r.expect(
            b.src(c) == f.obj_map[x as usize] && b.tgt(c) == g.obj_map[x as usize],
            "component-ends",
            || a.obj_name(x),
        );
    }
    if !r.is_ok() {
        return r;
    }
    for h in a.morphisms() {
        let (x, y) = (a.src(h), a.tgt(h));
        let lhs = b.comp(t.components[y as usize], f.mor_map[h as usize]);
        let rhs = b.comp(g.mor_map[h as usize], t.components[x as usize]);
        r.expect(lhs.is_some() && lhs == rhs, "naturality", || a.mor_name(h));
    }
    r
}

// ---------------------------------------------------------------------------
// Products and arrow categories

/// Product of finitely many categories. Objects and morphisms are numbered in
/// mixed radix with the first factor most significant; the empty product is
/// the terminal category.
pub fn product_category(cs: &[&FinCat]) -> FinCat {
    if cs.is_empty() {
        return FinCat::terminal();
    }
    let no: Vec<usize> = cs.iter().map(|c| c.n_obj()).collect();
    let nm: Vec<usize> = cs.iter().map(|c| c.n_mor()).collect();
    let tot_o: usize = no.iter().product();
    let tot_m: usize = nm.iter().product();
    let split = |mut i: usize, radix: &[usize]| -> Vec<u32> {
        let mut v = vec![0u32; radix.len()];
        for k in (0..radix.len()).rev() {
            v[k] = (i % radix[k]) as u32;
            i /= radix[k];
        }
        v
    };
    let join = |v: &[u32], radix: &[usize]| -> u32 {
        let mut i = 0usize;
        for k in 0..radix.len() {
            i = i * radix[k] + v[k] as usize;
        }
        i as u32
    };
    let mut obj_labels = Vec::with_capacity(tot_o);
    for i in 0..tot_o {
        let v = split(i, &no);
        let parts: Vec<String> = v.iter().zip(cs).map(|(&x, c)| c.obj_name(x)).collect();
        obj_labels.push(format!("({})", parts.join(",")));
    }
    let mut mor_labels = Vec::with_capacity(tot_m);
    let (mut src, mut tgt) = (Vec::with_capacity(tot_m), Vec::with_capacity(tot_m));
    for i in 0..tot_m {
        let v = split(i, &nm);
        let parts: Vec<String> = v.iter().zip(cs).map(|(&f, c)| c.mor_name(f)).collect();
        mor_labels.push(format!("({})", parts.join(",")));
        let s: Vec<u32> = v.iter().zip(cs).map(|(&f, c)| c.src(f)).collect();
        let t: Vec<u32> = v.iter().zip(cs).map(|(&f, c)| c.tgt(f)).collect();
        src.push(join(&s, &no));
        tgt.push(join(&t, &no));
    }
    let ident = (0..tot_o)
        .map(|i| {
            let v = split(i, &no);
            let ids: Vec<u32> = v.iter().zip(cs).map(|(&x, c)| c.id(x)).collect();
            join(&ids, &nm)
        })
        .collect();
    FinCat::build(obj_labels, mor_labels, src, tgt, ident, |g, f| {
        let (gv, fv) = (split(g as usize, &nm), split(f as usize, &nm));
        let h: Vec<u32> = (0..cs.len()).map(|k| cs[k].c(gv[k], fv[k])).collect();
        join(&h, &nm)
    })
}

/// `Ar[m₁] × … × Ar[mₙ]` with its object labels.
#[derive(Clone, Debug)]
pub struct ArTuple {
    pub shape: Vec<usize>,
    pub cat: FinCat,
    pub labels: Vec<Vec<(usize, usize)>>,
    index: HashMap<Vec<(usize, usize)>, u32>,
}

impl ArTuple {
    pub fn new(shape: &[usize]) -> ArTuple {
        let factors: Vec<FinCat> = shape.iter().map(|&m| ar_single(m)).collect();
        let refs: Vec<&FinCat> = factors.iter().collect();
        let cat = product_category(&refs);
        let per: Vec<Vec<(usize, usize)>> = shape.iter().map(|&m| ar_pairs(m)).collect();
        let mut labels = Vec::with_capacity(cat.n_obj());
        let mut index = HashMap::new();
        for i in 0..cat.n_obj() {
            let mut rem = i;
            let mut lab = vec![(0, 0); shape.len()];
            for k in (0..shape.len()).rev() {
                let r = per[k].len();
                lab[k] = per[k][rem % r];
                rem /= r;
            }
            index.insert(lab.clone(), i as u32);
            labels.push(lab);
        }
        ArTuple { shape: shape.to_vec(), cat, labels, index }
    }

    pub fn object(&self, label: &[(usize, usize)]) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn n_obj(&self) -> usize {
        self.labels.len()
    }
}

fn ar_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..=m {
        for j in i..=m {
            v.push((i, j));
        }
    }
    v
}

fn ar_single(m: usize) -> FinCat {
    let pairs = ar_pairs(m);
    let labels = pairs.iter().map(|(i, j)| format!("{i}{j}")).collect();
    FinCat::poset(labels, |a, b| pairs[a].0 <= pairs[b].0 && pairs[a].1 <= pairs[b].1)
}

/// The category of arrows `Ar[m]`.
pub fn arrow_category(m: usize) -> ArTuple {
    ArTuple::new(&[m])
}

// ---------------------------------------------------------------------------
// Pushouts

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cocone {
    pub apex: u32,
    /// `Y → P`, from the target of the first span leg.
    pub l1: u32,
    /// `Z → P`, from the target of the second span leg.
    pub l2: u32,
}

/// Per object `Q`, the number of pairs `(a: Y→Q, b: Z→Q)` with `a∘f = b∘g`.
fn cocone_counts<C: Cat + ?Sized>(c: &C, f: u32, g: u32) -> Vec<usize> {
    let (y, z) = (c.tgt(f), c.tgt(g));
    let mut out = Vec::with_capacity(c.n_obj());
    let mut bucket: HashMap<u32, usize> = HashMap::new();
    for q in 0..c.n_obj() as u32 {
        bucket.clear();
        for &b in c.hom(z, q).iter() {
            *bucket.entry(c.c(b, g)).or_insert(0) += 1;
        }
        let mut n = 0;
        for &a in c.hom(y, q).iter() {
            n += bucket.get(&c.c(a, f)).copied().unwrap_or(0);
        }
        out.push(n);
    }
    out
}

/// Whether `h ↦ (h∘l1, h∘l2)` is injective on every `hom(P, Q)`. Together with
/// matching cardinalities this is the universal property.
fn legs_separate<C: Cat + ?Sized>(c: &C, p: u32, l1: u32, l2: u32, counts: &[usize]) -> bool {
    let mut seen = HashSet::new();
    for q in 0..c.n_obj() as u32 {
        let hs = c.hom(p, q);
        if hs.len() != counts[q as usize] {
            return false;
        }
        seen.clear();
        for &h in hs.iter() {
            if !seen.insert((c.c(h, l1), c.c(h, l2))) {
                return false;
            }
        }
    }
    true
}

/// Exhaustive pushout search for the span `Y ←f− X −g→ Z`. Among universal
/// cocones the one with the smallest apex, then the smallest `(l1, l2)`, wins.
pub fn find_pushout<C: Cat + ?Sized>(c: &C, f: u32, g: u32) -> Option<Cocone> {
    debug_assert_eq!(c.src(f), c.src(g));
    let (y, z) = (c.tgt(f), c.tgt(g));
    let counts = cocone_counts(c, f, g);
    let n = c.n_obj() as u32;
    for p in 0..n {
        if (0..n).any(|q| c.hom(p, q).len() != counts[q as usize]) {
            continue;
        }
        let mut by_bg: HashMap<u32, Vec<u32>> = HashMap::new();
        for &b in c.hom(z, p).iter() {
            by_bg.entry(c.c(b, g)).or_default().push(b);
        }
        for &a in c.hom(y, p).iter() {
            if let Some(bs) = by_bg.get(&c.c(a, f)) {
                for &b in bs {
                    if legs_separate(c, p, a, b, &counts) {
                        return Some(Cocone { apex: p, l1: a, l2: b });
                    }
                }
            }
        }
    }
    None
}

/// Whether the commuting square `h∘f = k∘g` (with `f: X→Y`, `g: X→Z`,
/// `h: Y→P`, `k: Z→P`) is a pushout.
pub fn is_pushout_square<C: Cat + ?Sized>(c: &C, f: u32, g: u32, h: u32, k: u32) -> bool {
    if c.comp(h, f) != c.comp(k, g) || c.comp(h, f).is_none() {
        return false;
    }
    let is_id = |m: u32| c.id(c.src(m)) == m;
    // A square with two parallel identity sides is a pushout in any category.
    if (is_id(f) && is_id(k)) || (is_id(g) && is_id(h)) {
        return true;
    }
    let counts = cocone_counts(c, f, g);
    legs_separate(c, c.tgt(h), h, k, &counts)
}

/// The unique `u: P → Q` with `u∘l1 = a` and `u∘l2 = b`, if any.
pub fn mediate<C: Cat + ?Sized>(c: &C, l1: u32, l2: u32, a: u32, b: u32) -> Option<u32> {
    let p = c.tgt(l1);
    let q = c.tgt(a);
    c.hom(p, q).iter().copied().find(|&u| c.comp(u, l1) == Some(a) && c.comp(u, l2) == Some(b))
}

pub fn inverse<C: Cat + ?Sized>(c: &C, f: u32) -> Option<u32> {
    let (x, y) = (c.src(f), c.tgt(f));
    let (ix, iy) = (c.id(x), c.id(y));
    c.hom(y, x).iter().copied().find(|&g| c.comp(g, f) == Some(ix) && c.comp(f, g) == Some(iy))
}

pub fn isos<C: Cat + ?Sized>(c: &C, x: u32, y: u32) -> Vec<u32> {
    c.hom(x, y).iter().copied().filter(|&f| inverse(c, f).is_some()).collect()
}

// ---------------------------------------------------------------------------
// Partitions

fn find(p: &mut [u32], x: u32) -> u32 {
    let mut r = x;
    while p[r as usize] != r {
        r = p[r as usize];
    }
    let mut x = x;
    while p[x as usize] != r {
        let nx = p[x as usize];
        p[x as usize] = r;
        x = nx;
    }
    r
}

fn union(p: &mut [u32], a: u32, b: u32) -> bool {
    let (ra, rb) = (find(p, a), find(p, b));
    if ra == rb {
        return false;
    }
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    p[hi as usize] = lo;
    true
}

fn classes(mut p: Vec<u32>) -> Vec<Vec<u32>> {
    let n = p.len() as u32;
    let mut by: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for x in 0..n {
        let r = find(&mut p, x);
        by.entry(r).or_default().push(x);
    }
    by.into_values().collect()
}

/// Partition of the objects into isomorphism classes, each sorted, ordered by
/// least member.
pub fn iso_classes<C: Cat + ?Sized>(c: &C) -> Vec<Vec<u32>> {
    let n = c.n_obj() as u32;
    let mut p: Vec<u32> = (0..n).collect();
    for x in 0..n {
        for y in x + 1..n {
            if find(&mut p, x) != find(&mut p, y) && c.hom(x, y).iter().any(|&f| inverse(c, f).is_some()) {
                union(&mut p, x, y);
            }
        }
    }
    classes(p)
}

/// Partition under the equivalence generated by the existence of a morphism.
pub fn connected_components<C: Cat + ?Sized>(c: &C) -> Vec<Vec<u32>> {
    let n = c.n_obj() as u32;
    let mut p: Vec<u32> = (0..n).collect();
    for x in 0..n {
        for y in 0..n {
            if x != y && !c.hom(x, y).is_empty() {
                union(&mut p, x, y);
            }
        }
    }
    classes(p)
}

/// Union-find helper shared with the level modules.
pub(crate) struct Partition(Vec<u32>);

impl Partition {
    pub fn new(n: usize) -> Self {
        Partition((0..n as u32).collect())
    }
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        union(&mut self.0, a, b)
    }
    pub fn find(&mut self, a: u32) -> u32 {
        find(&mut self.0, a)
    }
}

// ---------------------------------------------------------------------------
// Based categories

#[derive(Clone, Debug)]
pub struct BasedCat {
    pub cat: FinCat,
    pub base: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasedOp {
    Wedge,
    Smash,
}

/// Disjoint union of categories, objects and morphisms concatenated in order.
pub fn coproduct(cs: &[&FinCat]) -> FinCat {
    let (mut ol, mut ml, mut src, mut tgt, mut ident) = (vec![], vec![], vec![], vec![], vec![]);
    let mut off = Vec::new();
    let (mut oo, mut mo) = (0u32, 0u32);
    for (k, c) in cs.iter().enumerate() {
        off.push((oo, mo));
        ol.extend(c.obj_labels.iter().map(|s| format!("{s}.{k}")));
        ml.extend(c.mor_labels.iter().map(|s| format!("{s}.{k}")));
        src.extend(c.morphisms().map(|f| c.src(f) + oo));
        tgt.extend(c.morphisms().map(|f| c.tgt(f) + oo));
        ident.extend(c.objects().map(|x| c.id(x) + mo));
        oo += c.n_obj() as u32;
        mo += c.n_mor() as u32;
    }
    let owner: Vec<usize> = cs.iter().enumerate().flat_map(|(k, c)| std::iter::repeat_n(k, c.n_mor())).collect();
    FinCat::build(ol, ml, src, tgt, ident, |g, f| {
        let k = owner[f as usize];
        let mo = off[k].1;
        cs[k].c(g - mo, f - mo) + mo
    })
}

/// Collapses the full subcategory on `collapse` to a single base object by an
/// explicit identification table. Composites that would only exist freely
/// after gluing are refused rather than invented.
pub fn collapse_to_base(c: &FinCat, collapse: &[bool]) -> Result<BasedCat, String> {
    let Some(b0) = collapse.iter().position(|&b| b) else {
        return Err("nothing to collapse".into());
    };
    let m = c.n_mor();
    let mut p = Partition::new(m);
    let id0 = c.id(b0 as u32);
    for f in c.morphisms() {
        if collapse[c.src(f) as usize] && collapse[c.tgt(f) as usize] {
            p.union(f, id0);
        }
    }
    let entries = c.composition_entries();
    loop {
        let mut seen: HashMap<(u32, u32), u32> = HashMap::new();
        let mut changed = false;
        for &(g, f, h) in &entries {
            let key = (p.find(g), p.find(f));
            let hv = p.find(h);
            match seen.get(&key) {
                Some(&prev) if prev != hv => {
                    p.union(prev, hv);
                    changed = true;
                }
                Some(_) => {}
                None => {
                    seen.insert(key, hv);
                }
            }
        }
        if !changed {
            break;
        }
    }
    // quotient objects: base first, then survivors in order
    let mut qobj = vec![0u32; c.n_obj()];
    let mut ol = vec!["*".to_string()];
    for x in c.objects() {
        if !collapse[x as usize] {
            qobj[x as usize] = ol.len() as u32;
            ol.push(c.obj_name(x));
        }
    }
    let mut rep_of: BTreeMap<u32, u32> = BTreeMap::new();
    for f in c.morphisms() {
        let r = p.find(f);
        rep_of.entry(r).or_insert(f);
    }
    let reps: Vec<u32> = rep_of.values().copied().collect();
    let qid: HashMap<u32, u32> = rep_of.keys().enumerate().map(|(i, &r)| (r, i as u32)).collect();
    let mut qs = Vec::new();
    let mut qt = Vec::new();
    for &f in &reps {
        qs.push(qobj[c.src(f) as usize]);
        qt.push(qobj[c.tgt(f) as usize]);
    }
    for f in c.morphisms() {
        let q = qid[&p.find(f)] as usize;
        if qobj[c.src(f) as usize] != qs[q] || qobj[c.tgt(f) as usize] != qt[q] {
            return Err(format!("identification merges morphisms with different ends at {}", c.mor_name(f)));
        }
    }
    let mut table: HashMap<(u32, u32), u32> = HashMap::new();
    for &(g, f, h) in &entries {
        let key = (qid[&p.find(g)], qid[&p.find(f)]);
        table.insert(key, qid[&p.find(h)]);
    }
    let ident: Vec<u32> = (0..ol.len())
        .map(|qx| {
            if qx == 0 {
                qid[&p.find(id0)]
            } else {
                let x = qobj.iter().position(|&v| v as usize == qx).unwrap() as u32;
                qid[&p.find(c.id(x))]
            }
        })
        .collect();
    let ml: Vec<String> = reps.iter().map(|&f| c.mor_name(f)).collect();
    let nq = reps.len() as u32;
    for f in 0..nq {
        for g in 0..nq {
            if qt[f as usize] == qs[g as usize] && !table.contains_key(&(g, f)) {
                return Err(format!("composite {} . {} exists only freely", ml[g as usize], ml[f as usize]));
            }
        }
    }
    let cat = FinCat::build(ol, ml, qs, qt, ident, |g, f| table[&(g, f)]);
    Ok(BasedCat { cat, base: 0 })
}

/// Wedge (glue the base objects) or smash (collapse every object with a base
/// coordinate) of based categories.
pub fn based_wedge_smash(cs: &[BasedCat], op: BasedOp) -> Result<BasedCat, String> {
    if cs.is_empty() {
        return Ok(BasedCat { cat: FinCat::terminal(), base: 0 });
    }
    match op {
        BasedOp::Wedge => {
            let refs: Vec<&FinCat> = cs.iter().map(|b| &b.cat).collect();
            let u = coproduct(&refs);
            let mut collapse = vec![false; u.n_obj()];
            let mut off = 0usize;
            for b in cs {
                collapse[off + b.base as usize] = true;
                off += b.cat.n_obj();
            }
            collapse_to_base(&u, &collapse)
        }
        BasedOp::Smash => {
            let refs: Vec<&FinCat> = cs.iter().map(|b| &b.cat).collect();
            let prod = product_category(&refs);
            let no: Vec<usize> = cs.iter().map(|b| b.cat.n_obj()).collect();
            let collapse: Vec<bool> = (0..prod.n_obj())
                .map(|mut i| {
                    let mut hit = false;
                    for k in (0..no.len()).rev() {
                        if (i % no[k]) as u32 == cs[k].base {
                            hit = true;
                        }
                        i /= no[k];
                    }
                    hit
                })
                .collect();
            collapse_to_base(&prod, &collapse)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> FinCat {
        FinCat::ordinal(2)
    }

    #[test]
    fn terminal_and_ordinals_are_categories() {
        assert!(validate_fincat(&FinCat::terminal()).is_clean());
        assert!(validate_fincat(&two()).is_clean());
        assert!(validate_fincat(&FinCat::empty()).is_clean());
    }

    #[test]
    fn redirected_composite_is_caught() {
        let mut c = two();
        let f01 = c.hom_slice(0, 1)[0];
        let f12 = c.hom_slice(1, 2)[0];
        let id0 = c.id(0);
        c.set_comp(f12, f01, id0);
        let r = validate_fincat(&c);
        assert!(!r.is_ok());
        assert!(r.has_failure("composition-closure"));
    }

    #[test]
    fn arrow_category_counts() {
        // brute-force count of pairs ij <= i'j'
        for m in 0..4usize {
            let a = arrow_category(m);
            let pairs: Vec<(usize, usize)> = (0..=m).flat_map(|i| (i..=m).map(move |j| (i, j))).collect();
            let mors = pairs
                .iter()
                .flat_map(|p| pairs.iter().map(move |q| (p, q)))
                .filter(|(p, q)| p.0 <= q.0 && p.1 <= q.1)
                .count();
            assert_eq!(a.n_obj(), (m + 1) * (m + 2) / 2);
            assert_eq!(a.cat.n_mor(), mors);
        }
        assert_eq!(arrow_category(1).cat.n_mor(), 6);
        assert_eq!(arrow_category(2).cat.n_mor(), 20);
    }

    #[test]
    fn products() {
        let t = product_category(&[]);
        assert_eq!((t.n_obj(), t.n_mor()), (1, 1));
        let a1 = arrow_category(1).cat;
        let p = product_category(&[&a1, &a1]);
        assert_eq!((p.n_obj(), p.n_mor()), (9, 36));
        assert!(validate_fincat(&p).is_clean());
        let term = FinCat::terminal();
        let q = product_category(&[&two(), &term]);
        assert_eq!((q.n_obj(), q.n_mor()), (two().n_obj(), two().n_mor()));
    }

    #[test]
    fn components_and_isos() {
        assert_eq!(iso_classes(&FinCat::discrete(3)).len(), 3);
        assert_eq!(connected_components(&FinCat::discrete(2)).len(), 2);
        assert_eq!(connected_components(&two()).len(), 1);
        let u = coproduct(&[&FinCat::ordinal(1), &FinCat::terminal()]);
        assert_eq!(connected_components(&u).len(), 2);
    }

    #[test]
    fn pushout_in_a_poset_is_a_join() {
        // in a lattice the pushout of x <- z -> y is the join
        let labels: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        // 0 bottom, 1 and 2 incomparable, 3 top
        let c = FinCat::poset(labels, |a, b| a == b || a == 0 || b == 3);
        let f = c.hom_slice(0, 1)[0];
        let g = c.hom_slice(0, 2)[0];
        let p = find_pushout(&c, f, g).unwrap();
        assert_eq!(p.apex, 3);
    }

    #[test]
    fn wedge_and_smash_of_arrows() {
        let a = BasedCat { cat: FinCat::ordinal(1), base: 0 };
        let w = based_wedge_smash(&[a.clone(), a.clone()], BasedOp::Wedge).unwrap();
        assert_eq!(w.cat.n_obj(), 3);
        assert!(validate_fincat(&w.cat).is_clean());
        let s = based_wedge_smash(&[a.clone(), a.clone()], BasedOp::Smash).unwrap();
        assert_eq!(s.cat.n_obj(), 2);
        assert_eq!(s.cat.n_mor(), 3);
        assert!(validate_fincat(&s.cat).is_clean());
        let t = BasedCat { cat: FinCat::terminal(), base: 0 };
        let z = based_wedge_smash(&[t, a], BasedOp::Smash).unwrap();
        assert_eq!((z.cat.n_obj(), z.cat.n_mor()), (1, 1));
    }

    #[test]
    fn raw_round_trip_and_dangling_ids() {
        let c = two();
        let raw = c.to_raw();
        let (back, r) = raw.resolve();
        assert!(r.is_ok());
        assert!(validate_fincat(&back.unwrap()).is_clean());
        let mut bad = raw.clone();
        bad.morphisms[0].tgt = "nowhere".into();
        let (none, r) = bad.resolve();
        assert!(none.is_none());
        assert!(r.structural_count > 0 && r.violation_count == 0);
    }
}
