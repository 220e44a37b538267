//! The multisimplicial construction `S⁽ⁿ⁾`: diagrams `Ar[m₁]×…×Ar[mₙ] → C`
//! with zero diagonal, cubically cofibrant flag and cofiber squares, their
//! levels as Waldhausen categories, and the structure maps along `E`.

use crate::ecat::{level_diagonal, EMor, Level};
use crate::fincat::{isos, is_pushout_square, Cat, Cocone, Partition};
use crate::report::{Refusal, Report};
use crate::simplicial::{nerve, TruncSSet};
use crate::wald::{check_cubical, grid, WaldCat};
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

/// Default cost budget for enumerations.
pub const BUDGET: u128 = 10_000_000;

pub type Label = Vec<(usize, usize)>;

fn pairs(m: usize) -> Vec<(usize, usize)> {
    (0..=m).flat_map(|i| (i..=m).map(move |j| (i, j))).collect()
}

/// The poset `Ar[m₁]×…×Ar[mₙ]`, objects in mixed radix with the first
/// coordinate most significant, and its covering relations.
#[derive(Clone, Debug)]
pub struct Shape {
    pub dims: Vec<usize>,
    pub labels: Vec<Label>,
    index: HashMap<Label, u32>,
    pub edges: Vec<(u32, u32)>,
    edge_of: HashMap<(u32, u32), u32>,
    pub incoming: Vec<Vec<u32>>,
    pub outgoing: Vec<Vec<u32>>,
    /// Zero objects, then the rest by i-vector (last coordinate most
    /// significant), then by j-vector. Edges between nonzero objects go
    /// forward in this order.
    pub order: Vec<u32>,
}

impl Shape {
    pub fn new(dims: &[usize]) -> Shape {
        let mut labels: Vec<Label> = vec![vec![]];
        for &m in dims {
            labels = labels.into_iter().flat_map(|l| pairs(m).into_iter().map(move |p| [l.clone(), vec![p]].concat())).collect();
        }
        let index: HashMap<Label, u32> = labels.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect();
        let mut edges = Vec::new();
        for (a, l) in labels.iter().enumerate() {
            for k in 0..dims.len() {
                let (i, j) = l[k];
                let mut up = l.clone();
                if j < dims[k] {
                    up[k] = (i, j + 1);
                    edges.push((a as u32, index[&up]));
                }
                if i < j {
                    up[k] = (i + 1, j);
                    edges.push((a as u32, index[&up]));
                }
            }
        }
        let edge_of = edges.iter().enumerate().map(|(e, &p)| (p, e as u32)).collect();
        let mut incoming = vec![vec![]; labels.len()];
        let mut outgoing = vec![vec![]; labels.len()];
        for (e, &(s, t)) in edges.iter().enumerate() {
            outgoing[s as usize].push(e as u32);
            incoming[t as usize].push(e as u32);
        }
        let mut sh = Shape { dims: dims.to_vec(), labels, index, edges, edge_of, incoming, outgoing, order: vec![] };
        let mut order: Vec<u32> = (0..sh.n_obj() as u32).collect();
        order.sort_by_key(|&a| {
            let l = &sh.labels[a as usize];
            let is: Vec<usize> = l.iter().rev().map(|p| p.0).collect();
            let js: Vec<usize> = l.iter().map(|p| p.1).collect();
            (!sh.is_zero(a), is, js)
        });
        sh.order = order;
        sh
    }

    pub fn n_obj(&self) -> usize {
        self.labels.len()
    }

    pub fn obj(&self, l: &[(usize, usize)]) -> Option<u32> {
        self.index.get(l).copied()
    }

    pub fn edge(&self, a: u32, b: u32) -> Option<u32> {
        self.edge_of.get(&(a, b)).copied()
    }

    pub fn is_zero(&self, a: u32) -> bool {
        self.labels[a as usize].iter().any(|&(i, j)| i == j)
    }

    pub fn is_flag(&self, a: u32) -> bool {
        self.labels[a as usize].iter().all(|&(i, j)| i == 0 && j >= 1)
    }

    pub fn n_nonzero(&self) -> usize {
        (0..self.n_obj() as u32).filter(|&a| !self.is_zero(a)).count()
    }

    /// Grid dimensions of the flag, or `None` when the flag is empty.
    pub fn flag_dims(&self) -> Option<Vec<usize>> {
        self.dims.iter().map(|&m| m.checked_sub(1)).collect()
    }

    pub fn flag_obj(&self, v: &[usize]) -> u32 {
        let l: Label = v.iter().map(|&j| (0, j + 1)).collect();
        self.index[&l]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SdotDiagram {
    pub obj: Vec<u32>,
    /// One morphism per covering edge of the shape.
    pub edge: Vec<u32>,
}

pub fn zero_diagram<W: WaldCat + ?Sized>(w: &W, sh: &Shape) -> SdotDiagram {
    let z = w.zero();
    SdotDiagram { obj: vec![z; sh.n_obj()], edge: vec![w.id(z); sh.edges.len()] }
}

fn arrow_in<C: Cat + ?Sized>(c: &C, sh: &Shape, obj: &[u32], edge: &[u32], a: u32, b: u32) -> u32 {
    let lb = &sh.labels[b as usize];
    let mut cur = sh.labels[a as usize].clone();
    let mut at = a;
    let mut f = c.id(obj[a as usize]);
    let step = |cur: &Label, at: &mut u32, f: &mut u32| {
        let nxt = sh.index[cur];
        *f = c.c(edge[sh.edge_of[&(*at, nxt)] as usize], *f);
        *at = nxt;
    };
    for k in 0..cur.len() {
        debug_assert!(cur[k].0 <= lb[k].0 && cur[k].1 <= lb[k].1);
        while cur[k].1 < lb[k].1 {
            cur[k].1 += 1;
            step(&cur, &mut at, &mut f);
        }
        while cur[k].0 < lb[k].0 {
            cur[k].0 += 1;
            step(&cur, &mut at, &mut f);
        }
    }
    f
}

/// The morphism `A(a) → A(b)` for `a ≤ b`.
pub fn arrow<C: Cat + ?Sized>(c: &C, sh: &Shape, d: &SdotDiagram, a: u32, b: u32) -> u32 {
    arrow_in(c, sh, &d.obj, &d.edge, a, b)
}

pub fn validate_sdot<W: WaldCat + ?Sized>(w: &W, sh: &Shape, d: &SdotDiagram) -> Report {
    let mut r = Report::new();
    if d.obj.len() != sh.n_obj() || d.edge.len() != sh.edges.len() {
        r.structural("table-shape", format!("{} objects, {} edges for shape {:?}", d.obj.len(), d.edge.len(), sh.dims));
        return r;
    }
    for (a, &x) in d.obj.iter().enumerate() {
        if x as usize >= w.n_obj() {
            r.structural("dangling-object", format!("{:?} -> {x}", sh.labels[a]));
        }
    }
    for (e, &f) in d.edge.iter().enumerate() {
        let (s, t) = sh.edges[e];
        if !w.has_mor(f) {
            r.structural("dangling-morphism", format!("edge {e} -> {f}"));
        } else if w.src(f) != d.obj[s as usize] || w.tgt(f) != d.obj[t as usize] {
            r.structural("edge-typing", format!("{:?} -> {:?}", sh.labels[s as usize], sh.labels[t as usize]));
        }
    }
    if !r.is_clean() {
        return r;
    }
    for a in 0..sh.n_obj() as u32 {
        if sh.is_zero(a) {
            r.expect(d.obj[a as usize] == w.zero(), "sdot-zero", || format!("{:?}", sh.labels[a as usize]));
        }
    }
    // Elementary squares: two distinct covering steps out of `a` that meet.
    for a in 0..sh.n_obj() as u32 {
        let outs = &sh.outgoing[a as usize];
        for (x, &e1) in outs.iter().enumerate() {
            for &e2 in &outs[x + 1..] {
                let (b1, b2) = (sh.edges[e1 as usize].1, sh.edges[e2 as usize].1);
                let top: Label = sh.labels[b1 as usize]
                    .iter()
                    .zip(&sh.labels[b2 as usize])
                    .map(|(p, q)| (p.0.max(q.0), p.1.max(q.1)))
                    .collect();
                let Some(c) = sh.obj(&top) else { continue };
                let (Some(f1), Some(f2)) = (sh.edge(b1, c), sh.edge(b2, c)) else { continue };
                let l = w.c(d.edge[f1 as usize], d.edge[e1 as usize]);
                let rr = w.c(d.edge[f2 as usize], d.edge[e2 as usize]);
                r.expect(l == rr, "sdot-commute", || format!("square at {:?}", sh.labels[a as usize]));
            }
        }
    }
    if let Some(dims) = sh.flag_dims() {
        let vertex = |v: &[usize]| d.obj[sh.flag_obj(v) as usize];
        let map = |u: &[usize], v: &[usize]| arrow(w, sh, d, sh.flag_obj(u), sh.flag_obj(v));
        check_cubical(w, &dims, &vertex, &map, &mut r);
    }
    for a in 0..sh.n_obj() as u32 {
        if sh.is_zero(a) {
            continue;
        }
        let la = &sh.labels[a as usize];
        for k in 0..sh.dims.len() {
            let (i, j) = la[k];
            for rr in j + 1..=sh.dims[k] {
                let with = |p: (usize, usize)| {
                    let mut l = la.clone();
                    l[k] = p;
                    sh.index[&l]
                };
                let (ir, jj, jr) = (with((i, rr)), with((j, j)), with((j, rr)));
                let f = arrow(w, sh, d, a, ir);
                let g = arrow(w, sh, d, a, jj);
                let h = arrow(w, sh, d, ir, jr);
                let kk = arrow(w, sh, d, jj, jr);
                r.expect(is_pushout_square(w, f, g, h, kk), "sdot-pushout", || format!("{la:?} in coordinate {k} up to {rr}"));
            }
        }
    }
    r
}

pub fn sdot_cost<W: WaldCat + ?Sized>(w: &W, sh: &Shape) -> u128 {
    (w.n_obj() as u128).saturating_pow(sh.n_nonzero() as u32)
}

#[derive(Clone, Debug, Default)]
pub struct SdotEnum {
    pub diagrams: Vec<SdotDiagram>,
    /// Cofibers the category failed to provide.
    pub absent: u64,
    /// Candidates built from flags that failed validation.
    pub rejected: u64,
}

struct Search<'a, W: WaldCat + ?Sized> {
    w: &'a W,
    sh: &'a Shape,
    nz: Vec<u32>,
    obj: Vec<u32>,
    edge: Vec<u32>,
    lam: Vec<u32>,
    isos: HashMap<(u32, u32), Vec<u32>>,
    out: SdotEnum,
}

impl<'a, W: WaldCat + ?Sized> Search<'a, W> {
    fn place(&mut self, a: u32, x: u32) {
        let (w, sh) = (self.w, self.sh);
        self.obj[a as usize] = x;
        for &e in &sh.incoming[a as usize] {
            if sh.is_zero(sh.edges[e as usize].0) {
                self.edge[e as usize] = w.initial(x);
            }
        }
        for &e in &sh.outgoing[a as usize] {
            if sh.is_zero(sh.edges[e as usize].1) {
                self.edge[e as usize] = w.to_zero(x);
            }
        }
    }

    fn go(&mut self, pos: usize) {
        let (w, sh) = (self.w, self.sh);
        if pos == self.nz.len() {
            let d = SdotDiagram { obj: self.obj.clone(), edge: self.edge.clone() };
            if validate_sdot(w, sh, &d).is_ok() {
                self.out.diagrams.push(d);
            } else {
                self.out.rejected += 1;
            }
            return;
        }
        let a = self.nz[pos];
        let inc: Vec<u32> = sh.incoming[a as usize].iter().copied().filter(|&e| !sh.is_zero(sh.edges[e as usize].0)).collect();
        if sh.is_flag(a) {
            for x in 0..w.n_obj() as u32 {
                self.place(a, x);
                self.lam[a as usize] = w.id(x);
                self.flag_edges(pos, a, &inc, 0);
            }
            return;
        }
        let la = &sh.labels[a as usize];
        let k = la.iter().position(|p| p.0 > 0).unwrap();
        let lab = |p: (usize, usize)| {
            let mut l = la.clone();
            l[k] = p;
            sh.index[&l]
        };
        let (a0, a1) = (lab((0, la[k].0)), lab((0, la[k].1)));
        let f = arrow_in(w, sh, &self.obj, &self.edge, a0, a1);
        let Some(q) = w.pushout(f, w.to_zero(self.obj[a0 as usize])) else {
            self.out.absent += 1;
            return;
        };
        let rho = |b: u32| {
            let l: Label = sh.labels[b as usize].iter().map(|&(_, j)| (0, j)).collect();
            sh.index[&l]
        };
        let base = w.c(q.l1, self.lam[a1 as usize]);
        for p in 0..w.n_obj() as u32 {
            let thetas = self.isos.entry((q.apex, p)).or_insert_with(|| isos(w, q.apex, p)).clone();
            'theta: for theta in thetas {
                let lam_a = w.c(theta, base);
                self.place(a, p);
                self.lam[a as usize] = lam_a;
                for &e in &inc {
                    let b = sh.edges[e as usize].0;
                    let fl = arrow_in(w, sh, &self.obj, &self.edge, rho(b), rho(a));
                    let want = w.c(lam_a, fl);
                    let lb = self.lam[b as usize];
                    let Some(h) = w.hom(self.obj[b as usize], p).iter().copied().find(|&h| w.c(h, lb) == want) else {
                        continue 'theta;
                    };
                    self.edge[e as usize] = h;
                }
                self.go(pos + 1);
            }
        }
    }

    fn flag_edges(&mut self, pos: usize, a: u32, inc: &[u32], t: usize) {
        let (w, sh) = (self.w, self.sh);
        if t == inc.len() {
            self.go(pos + 1);
            return;
        }
        let e = inc[t];
        let b = sh.edges[e as usize].0;
        let x = self.obj[a as usize];
        let cands: Vec<u32> = w.hom(self.obj[b as usize], x).iter().copied().filter(|&h| w.is_cof(h)).collect();
        'h: for h in cands {
            self.edge[e as usize] = h;
            for &e2 in &inc[..t] {
                let b2 = sh.edges[e2 as usize].0;
                let meet: Label =
                    sh.labels[b as usize].iter().zip(&sh.labels[b2 as usize]).map(|(p, q)| (p.0.min(q.0), p.1.min(q.1))).collect();
                let c = sh.index[&meet];
                if sh.is_zero(c) {
                    continue;
                }
                let l = w.c(h, self.edge[sh.edge_of[&(c, b)] as usize]);
                let r = w.c(self.edge[e2 as usize], self.edge[sh.edge_of[&(c, b2)] as usize]);
                if l != r {
                    continue 'h;
                }
            }
            self.flag_edges(pos, a, inc, t + 1);
        }
    }
}

/// Every diagram of the level, found by choosing a cofibrant flag and then
/// every cofiber with every isomorphism onto a representative object.
pub fn enumerate_sdot<W: WaldCat + ?Sized>(w: &W, sh: &Shape) -> Result<SdotEnum, Refusal> {
    enumerate_sdot_with(w, sh, BUDGET)
}

pub fn enumerate_sdot_with<W: WaldCat + ?Sized>(w: &W, sh: &Shape, budget: u128) -> Result<SdotEnum, Refusal> {
    let estimate = sdot_cost(w, sh);
    if estimate > budget {
        return Err(Refusal { what: format!("S-dot level {:?}", sh.dims), estimate, budget });
    }
    let z = w.zero();
    let mut s = Search {
        w,
        sh,
        nz: sh.order.iter().copied().filter(|&a| !sh.is_zero(a)).collect(),
        obj: vec![z; sh.n_obj()],
        edge: vec![w.id(z); sh.edges.len()],
        lam: vec![w.id(z); sh.n_obj()],
        isos: HashMap::new(),
        out: SdotEnum::default(),
    };
    s.go(0);
    let mut out = s.out;
    out.diagrams.sort();
    out.diagrams.dedup();
    Ok(out)
}

/// Natural transformations `a ⇒ b`, as component vectors, optionally with
/// every component a weak equivalence.
pub fn sdot_morphisms<W: WaldCat + ?Sized>(w: &W, sh: &Shape, a: &SdotDiagram, b: &SdotDiagram, weq_only: bool) -> Vec<Vec<u32>> {
    fn go<W: WaldCat + ?Sized>(
        w: &W,
        sh: &Shape,
        a: &SdotDiagram,
        b: &SdotDiagram,
        weq_only: bool,
        rank: &[usize],
        pos: usize,
        comp: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == sh.order.len() {
            out.push(comp.clone());
            return;
        }
        let x = sh.order[pos];
        let (ax, bx) = (a.obj[x as usize], b.obj[x as usize]);
        for &f in w.hom(ax, bx).iter() {
            if weq_only && !w.is_weq(f) {
                continue;
            }
            let done = |y: u32| rank[y as usize] < pos;
            let natural = sh.incoming[x as usize].iter().chain(&sh.outgoing[x as usize]).all(|&e| {
                let (s, t) = sh.edges[e as usize];
                let (cs, ct) = if s == x { (f, comp[t as usize]) } else { (comp[s as usize], f) };
                !(done(s) || done(t)) || w.comp(ct, a.edge[e as usize]) == w.comp(b.edge[e as usize], cs)
            });
            if natural {
                comp[x as usize] = f;
                go(w, sh, a, b, weq_only, rank, pos + 1, comp, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut comp = vec![0; sh.n_obj()];
    let mut rank = vec![0; sh.n_obj()];
    for (p, &x) in sh.order.iter().enumerate() {
        rank[x as usize] = p;
    }
    go(w, sh, a, b, weq_only, &rank, 0, &mut comp, &mut out);
    out
}

pub fn validate_sdot_morphism<W: WaldCat + ?Sized>(w: &W, sh: &Shape, a: &SdotDiagram, b: &SdotDiagram, comp: &[u32]) -> Report {
    let mut r = Report::new();
    if comp.len() != sh.n_obj() {
        r.structural("table-shape", format!("{} components", comp.len()));
        return r;
    }
    for (x, &f) in comp.iter().enumerate() {
        if !w.has_mor(f) || w.src(f) != a.obj[x] || w.tgt(f) != b.obj[x] {
            r.structural("component-typing", format!("{:?}", sh.labels[x]));
        }
    }
    if !r.is_clean() {
        return r;
    }
    for (e, &(s, t)) in sh.edges.iter().enumerate() {
        let l = w.c(comp[t as usize], a.edge[e]);
        let rr = w.c(b.edge[e], comp[s as usize]);
        r.expect(l == rr, "naturality", || format!("{:?} -> {:?}", sh.labels[s as usize], sh.labels[t as usize]));
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

/// A level `S⁽ⁿ⁾_m C` as a category whose morphisms are materialized on
/// demand. With `weq_only` it is the subcategory of weak equivalences.
pub struct SdotLevel<'a, W: WaldCat + ?Sized> {
    pub base: &'a W,
    pub shape: Shape,
    pub diagrams: Vec<SdotDiagram>,
    index: HashMap<SdotDiagram, u32>,
    weq_only: bool,
    sig: Vec<Vec<u32>>,
    zero: u32,
    mors: RefCell<Mors>,
    homs: RefCell<HashMap<(u32, u32), Vec<u32>>>,
    pushouts: RefCell<HashMap<(u32, u32), Option<Cocone>>>,
}

impl<'a, W: WaldCat + ?Sized> SdotLevel<'a, W> {
    pub fn new(base: &'a W, dims: &[usize], weq_only: bool) -> Result<Self, Refusal> {
        let shape = Shape::new(dims);
        let diagrams = enumerate_sdot(base, &shape)?.diagrams;
        Ok(Self::from_diagrams(base, shape, diagrams, weq_only))
    }

    pub fn from_diagrams(base: &'a W, shape: Shape, diagrams: Vec<SdotDiagram>, weq_only: bool) -> Self {
        let index: HashMap<SdotDiagram, u32> = diagrams.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
        let zero = index[&zero_diagram(base, &shape)];
        let sig = if weq_only {
            let n = base.n_obj() as u32;
            let mut p = Partition::new(n as usize);
            for x in 0..n {
                for y in 0..n {
                    if base.hom(x, y).iter().any(|&f| base.is_weq(f)) {
                        p.union(x, y);
                    }
                }
            }
            diagrams.iter().map(|d| d.obj.iter().map(|&x| p.find(x)).collect()).collect()
        } else {
            vec![]
        };
        SdotLevel {
            base,
            shape,
            diagrams,
            index,
            weq_only,
            sig,
            zero,
            mors: RefCell::new(Mors::default()),
            homs: RefCell::new(HashMap::new()),
            pushouts: RefCell::new(HashMap::new()),
        }
    }

    pub fn lookup(&self, d: &SdotDiagram) -> Option<u32> {
        self.index.get(d).copied()
    }

    pub fn diagram(&self, x: u32) -> &SdotDiagram {
        &self.diagrams[x as usize]
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

    pub fn n_mor_seen(&self) -> usize {
        self.mors.borrow().src.len()
    }
}

impl<W: WaldCat + ?Sized> Cat for SdotLevel<'_, W> {
    fn n_obj(&self) -> usize {
        self.diagrams.len()
    }
    fn src(&self, f: u32) -> u32 {
        self.mors.borrow().src[f as usize]
    }
    fn tgt(&self, f: u32) -> u32 {
        self.mors.borrow().tgt[f as usize]
    }
    fn id(&self, x: u32) -> u32 {
        let comps = self.diagrams[x as usize].obj.iter().map(|&o| self.base.id(o)).collect();
        self.intern(x, x, comps)
    }
    fn comp(&self, g: u32, f: u32) -> Option<u32> {
        let (s, t, comps) = {
            let m = self.mors.borrow();
            if m.tgt[f as usize] != m.src[g as usize] {
                return None;
            }
            let comps: Vec<u32> =
                m.comps[g as usize].iter().zip(&m.comps[f as usize]).map(|(&b, &a)| self.base.c(b, a)).collect();
            (m.src[f as usize], m.tgt[g as usize], comps)
        };
        Some(self.intern(s, t, comps))
    }
    fn has_mor(&self, f: u32) -> bool {
        (f as usize) < self.n_mor_seen()
    }
    fn hom(&self, x: u32, y: u32) -> Cow<'_, [u32]> {
        if let Some(h) = self.homs.borrow().get(&(x, y)) {
            return Cow::Owned(h.clone());
        }
        let h: Vec<u32> = if self.weq_only && self.sig[x as usize] != self.sig[y as usize] {
            vec![]
        } else {
            sdot_morphisms(self.base, &self.shape, &self.diagrams[x as usize], &self.diagrams[y as usize], self.weq_only)
                .into_iter()
                .map(|c| self.intern(x, y, c))
                .collect()
        };
        self.homs.borrow_mut().insert((x, y), h.clone());
        Cow::Owned(h)
    }
    fn obj_name(&self, x: u32) -> String {
        let names: Vec<String> = self.diagrams[x as usize].obj.iter().map(|&o| self.base.obj_name(o)).collect();
        format!("[{}]", names.join(","))
    }
}

impl<W: WaldCat + ?Sized> WaldCat for SdotLevel<'_, W> {
    fn zero(&self) -> u32 {
        self.zero
    }

    /// `[1]×flag` is cubically cofibrant in the base.
    fn is_cof(&self, f: u32) -> bool {
        let Some(dims) = self.shape.flag_dims() else { return true };
        let (s, t) = (self.src(f), self.tgt(f));
        let comps = self.comps(f);
        let (a, b) = (&self.diagrams[s as usize], &self.diagrams[t as usize]);
        let sh = &self.shape;
        let w = self.base;
        let mut full = vec![1];
        full.extend(&dims);
        let vertex = |v: &[usize]| {
            let o = sh.flag_obj(&v[1..]) as usize;
            if v[0] == 0 { a.obj[o] } else { b.obj[o] }
        };
        let map = |u: &[usize], v: &[usize]| {
            let (p, q) = (sh.flag_obj(&u[1..]), sh.flag_obj(&v[1..]));
            match (u[0], v[0]) {
                (0, 0) => arrow(w, sh, a, p, q),
                (1, 1) => arrow(w, sh, b, p, q),
                _ => w.c(arrow(w, sh, b, p, q), comps[p as usize]),
            }
        };
        let mut r = Report::new();
        check_cubical(w, &full, &vertex, &map, &mut r) && r.is_ok()
    }

    fn is_weq(&self, f: u32) -> bool {
        self.comps(f).iter().all(|&g| self.base.is_weq(g))
    }

    fn pushout(&self, f: u32, g: u32) -> Option<Cocone> {
        if let Some(p) = self.pushouts.borrow().get(&(f, g)) {
            return *p;
        }
        let p = crate::fincat::find_pushout(self, f, g);
        self.pushouts.borrow_mut().insert((f, g), p);
        p
    }
}

/// The subcategory of weak equivalences.
pub struct WeqSub<'a, W: WaldCat + ?Sized>(pub &'a W);

impl<W: WaldCat + ?Sized> Cat for WeqSub<'_, W> {
    fn n_obj(&self) -> usize {
        self.0.n_obj()
    }
    fn src(&self, f: u32) -> u32 {
        self.0.src(f)
    }
    fn tgt(&self, f: u32) -> u32 {
        self.0.tgt(f)
    }
    fn id(&self, x: u32) -> u32 {
        self.0.id(x)
    }
    fn comp(&self, g: u32, f: u32) -> Option<u32> {
        self.0.comp(g, f)
    }
    fn hom(&self, x: u32, y: u32) -> Cow<'_, [u32]> {
        Cow::Owned(self.0.hom(x, y).iter().copied().filter(|&f| self.0.is_weq(f)).collect())
    }
}

// ---------------------------------------------------------------------------
// Structure maps

/// For each target object, the source object it reads from, or `None` where
/// the value is the zero object.
pub fn action_map(f: &EMor, src: &Shape, tgt: &Shape) -> Vec<Option<u32>> {
    tgt.labels
        .iter()
        .map(|t| {
            let mut s = vec![(0, 0); f.src.len()];
            for (j, &(a, b)) in t.iter().enumerate() {
                let v = (f.betas[j].at(a), f.betas[j].at(b));
                match f.preimage(j) {
                    Some(k) => s[k] = v,
                    None if v == (0, 1) => {}
                    None => return None,
                }
            }
            src.obj(&s)
        })
        .collect()
}

pub fn act_diagram<W: WaldCat + ?Sized>(w: &W, src: &Shape, tgt: &Shape, map: &[Option<u32>], d: &SdotDiagram) -> SdotDiagram {
    let z = w.zero();
    let obj = map.iter().map(|m| m.map_or(z, |s| d.obj[s as usize])).collect();
    let edge = tgt
        .edges
        .iter()
        .map(|&(t1, t2)| match (map[t1 as usize], map[t2 as usize]) {
            (Some(s1), Some(s2)) => arrow(w, src, d, s1, s2),
            (None, Some(s2)) => w.initial(d.obj[s2 as usize]),
            (Some(s1), None) => w.to_zero(d.obj[s1 as usize]),
            (None, None) => w.id(z),
        })
        .collect();
    SdotDiagram { obj, edge }
}

pub fn act_comps<W: WaldCat + ?Sized>(w: &W, map: &[Option<u32>], comps: &[u32]) -> Vec<u32> {
    let idz = w.id(w.zero());
    map.iter().map(|m| m.map_or(idz, |s| comps[s as usize])).collect()
}

pub fn act_sdot<W: WaldCat + ?Sized>(w: &W, f: &EMor, d: &SdotDiagram) -> SdotDiagram {
    let (src, tgt) = (Shape::new(&f.src), Shape::new(&f.tgt));
    act_diagram(w, &src, &tgt, &action_map(f, &src, &tgt), d)
}

/// The extension isomorphism `S⁽ⁿ⁾_m → S⁽ⁿ⁺¹⁾_{m,1}`.
pub fn extend_sdot<W: WaldCat + ?Sized>(w: &W, dims: &[usize], d: &SdotDiagram) -> SdotDiagram {
    act_sdot(w, &EMor::iota(dims), d)
}

/// Inverse of [`extend_sdot`]: restrict to `01` in the last coordinate.
pub fn restrict_sdot(sh_ext: &Shape, d: &SdotDiagram) -> SdotDiagram {
    let n = sh_ext.dims.len() - 1;
    let sh = Shape::new(&sh_ext.dims[..n]);
    let lift = |a: u32| {
        let mut l = sh.labels[a as usize].clone();
        l.push((0, 1));
        sh_ext.index[&l]
    };
    let obj = (0..sh.n_obj() as u32).map(|a| d.obj[lift(a) as usize]).collect();
    let edge = sh.edges.iter().map(|&(s, t)| d.edge[sh_ext.edge_of[&(lift(s), lift(t))] as usize]).collect();
    SdotDiagram { obj, edge }
}

pub fn permute_sdot<W: WaldCat + ?Sized>(w: &W, dims: &[usize], sigma: &[usize], d: &SdotDiagram) -> SdotDiagram {
    act_sdot(w, &EMor::perm(dims, sigma), d)
}

/// Compares `S_{m₁}` applied to the level `S_{m₂} C` with `S⁽²⁾_{m₁,m₂} C`
/// by currying.
pub fn iterated_agreement<W: WaldCat + ?Sized>(w: &W, m1: usize, m2: usize) -> Result<Report, Refusal> {
    let inner = SdotLevel::new(w, &[m2], false)?;
    let outer_shape = Shape::new(&[m1]);
    let outer = enumerate_sdot(&inner, &outer_shape)?;
    let direct_shape = Shape::new(&[m1, m2]);
    let direct = enumerate_sdot(w, &direct_shape)?;
    let idx: HashMap<&SdotDiagram, usize> = direct.diagrams.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut r = Report::new();
    let mut hit = HashSet::new();
    let sh2 = &direct_shape;
    for d in &outer.diagrams {
        let level_comps: Vec<Vec<u32>> = d.edge.iter().map(|&f| inner.comps(f)).collect();
        let obj = sh2.labels.iter().map(|l| inner.diagram(d.obj[outer_shape.index[&l[..1]] as usize]).obj[inner.shape.index[&l[1..]] as usize]).collect();
        let edge = sh2
            .edges
            .iter()
            .map(|&(s, t)| {
                let (ls, lt) = (&sh2.labels[s as usize], &sh2.labels[t as usize]);
                let (o1, i1) = (outer_shape.index[&ls[..1]], inner.shape.index[&ls[1..]]);
                if ls[0] != lt[0] {
                    let e = outer_shape.edge_of[&(o1, outer_shape.index[&lt[..1]])];
                    level_comps[e as usize][i1 as usize]
                } else {
                    let e = inner.shape.edge_of[&(i1, inner.shape.index[&lt[1..]])];
                    inner.diagram(d.obj[o1 as usize]).edge[e as usize]
                }
            })
            .collect();
        let curried = SdotDiagram { obj, edge };
        let valid = validate_sdot(w, sh2, &curried).is_ok();
        r.expect(valid, "curried-valid", || format!("{curried:?}"));
        match idx.get(&curried) {
            Some(&i) => {
                r.expect(hit.insert(i), "curry-injective", || format!("{curried:?}"));
            }
            None => r.fail("curry-lands", format!("{curried:?}")),
        }
    }
    r.expect(outer.diagrams.len() == direct.diagrams.len(), "curry-count", || {
        format!("{} iterated, {} direct", outer.diagrams.len(), direct.diagrams.len())
    });
    r.note(format!("({m1},{m2}): {} iterated, {} direct", outer.diagrams.len(), direct.diagrams.len()));
    Ok(r)
}

// ---------------------------------------------------------------------------
// K-theory levels

impl<W: WaldCat + ?Sized> Level for SdotLevel<'_, W> {
    type Map = Vec<Option<u32>>;

    fn base_obj(&self) -> u32 {
        self.zero
    }

    fn structure_map(&self, f: &EMor, tgt: &Self) -> Self::Map {
        action_map(f, &self.shape, &tgt.shape)
    }

    fn push_obj(&self, m: &Self::Map, tgt: &Self, x: u32) -> u32 {
        let d = act_diagram(self.base, &self.shape, &tgt.shape, m, self.diagram(x));
        tgt.lookup(&d).expect("structure map leaves the level")
    }

    fn push_mor(&self, m: &Self::Map, tgt: &Self, g: u32) -> u32 {
        let (s, t) = (self.push_obj(m, tgt, self.src(g)), self.push_obj(m, tgt, self.tgt(g)));
        tgt.intern(s, t, act_comps(self.base, m, &self.comps(g)))
    }
}

/// The `n`-fold Waldhausen K-theory space truncated at simplicial degree `d`:
/// the diagonal of `(p, q₁,…,qₙ) ↦ N_p(w S⁽ⁿ⁾_{q} C)`; for `n = 0` the nerve
/// of `wC`.
pub fn wald_k_level<W: WaldCat + ?Sized>(w: &W, n: usize, d: usize) -> Result<TruncSSet, Refusal> {
    if n == 0 {
        return Ok(nerve(&WeqSub(w), d, Some(w.zero())));
    }
    let mut levels = HashMap::new();
    for q in grid(&vec![d; n]) {
        let lv = SdotLevel::new(w, &q, true)?;
        levels.insert(q, lv);
    }
    Ok(level_diagonal(&levels, n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecat::{e_compose, EMor};
    use crate::fixtures::{fixture_pointed_sets, fixture_vect_f2};
    use crate::simplicial::{validate_simplicial, Monotone};

    /// Brute force: every assignment of objects to nonzero entries and of
    /// morphisms to edges between them, filtered by the validator.
    fn brute<W: WaldCat + ?Sized>(w: &W, sh: &Shape) -> Vec<SdotDiagram> {
        let z = w.zero();
        let nz: Vec<u32> = (0..sh.n_obj() as u32).filter(|&a| !sh.is_zero(a)).collect();
        let mut out = Vec::new();
        let mut objs = vec![z; sh.n_obj()];
        fn objects<W: WaldCat + ?Sized>(w: &W, sh: &Shape, nz: &[u32], t: usize, objs: &mut Vec<u32>, out: &mut Vec<SdotDiagram>) {
            if t == nz.len() {
                let z = w.zero();
                let mut edge = vec![w.id(z); sh.edges.len()];
                let inner: Vec<usize> = (0..sh.edges.len())
                    .filter(|&e| {
                        let (s, t) = sh.edges[e];
                        match (sh.is_zero(s), sh.is_zero(t)) {
                            (true, true) => false,
                            (true, false) => {
                                edge[e] = w.initial(objs[t as usize]);
                                false
                            }
                            (false, true) => {
                                edge[e] = w.to_zero(objs[s as usize]);
                                false
                            }
                            (false, false) => true,
                        }
                    })
                    .collect();
                edges(w, sh, &inner, 0, objs, &mut edge, out);
                return;
            }
            for x in 0..w.n_obj() as u32 {
                objs[nz[t] as usize] = x;
                objects(w, sh, nz, t + 1, objs, out);
            }
        }
        fn edges<W: WaldCat + ?Sized>(w: &W, sh: &Shape, inner: &[usize], t: usize, objs: &[u32], edge: &mut Vec<u32>, out: &mut Vec<SdotDiagram>) {
            if t == inner.len() {
                let d = SdotDiagram { obj: objs.to_vec(), edge: edge.clone() };
                if validate_sdot(w, sh, &d).is_ok() {
                    out.push(d);
                }
                return;
            }
            let (s, tt) = sh.edges[inner[t]];
            for &f in w.hom(objs[s as usize], objs[tt as usize]).iter() {
                edge[inner[t]] = f;
                edges(w, sh, inner, t + 1, objs, edge, out);
            }
        }
        objects(w, sh, &nz, 0, &mut objs, &mut out);
        out.sort();
        out
    }

    #[test]
    fn small_levels() {
        let p2 = fixture_pointed_sets(2);
        assert_eq!(enumerate_sdot(&p2, &Shape::new(&[0])).unwrap().diagrams.len(), 1);
        let s1 = enumerate_sdot(&p2, &Shape::new(&[1])).unwrap();
        assert_eq!(s1.diagrams.len(), 4);
        let p3 = fixture_pointed_sets(3);
        assert_eq!(enumerate_sdot(&p3, &Shape::new(&[2])).unwrap().diagrams.len(), 229);
        let big = enumerate_sdot(&p3, &Shape::new(&[2, 2]));
        assert!(matches!(big, Err(Refusal { estimate, budget, .. }) if estimate > budget));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let p2 = fixture_pointed_sets(2);
        let p3 = fixture_pointed_sets(3);
        let v2 = fixture_vect_f2(2);
        for dims in [vec![1], vec![2], vec![1, 1], vec![2, 1], vec![1, 2]] {
            let sh = Shape::new(&dims);
            assert_eq!(enumerate_sdot(&p2, &sh).unwrap().diagrams, brute(&p2, &sh), "P(2) {dims:?}");
        }
        for dims in [vec![1], vec![1, 1], vec![2]] {
            let sh = Shape::new(&dims);
            assert_eq!(enumerate_sdot(&v2, &sh).unwrap().diagrams, brute(&v2, &sh), "Vect {dims:?}");
        }
        for dims in [vec![1], vec![1, 1]] {
            let sh = Shape::new(&dims);
            assert_eq!(enumerate_sdot(&p3, &sh).unwrap().diagrams, brute(&p3, &sh), "P(3) {dims:?}");
        }
    }

    #[test]
    fn faces_and_simplicial_identities() {
        let p2 = fixture_pointed_sets(2);
        let s1 = enumerate_sdot(&p2, &Shape::new(&[1])).unwrap().diagrams;
        let z0 = zero_diagram(&p2, &Shape::new(&[0]));
        for i in 0..=1 {
            let f = EMor::simplicial_at(&[1], 0, Monotone::coface(1, i));
            for d in &s1 {
                assert_eq!(act_sdot(&p2, &f, d), z0);
            }
        }
        let sh2 = Shape::new(&[2]);
        let s2 = enumerate_sdot(&p2, &sh2).unwrap().diagrams;
        let face = |q: usize, i: usize| EMor::simplicial_at(&[q], 0, Monotone::coface(q, i));
        for d in &s2 {
            for j in 0..=2 {
                for i in 0..j {
                    // d_i d_j = d_{j-1} d_i
                    let a = act_sdot(&p2, &face(1, i), &act_sdot(&p2, &face(2, j), d));
                    let b = act_sdot(&p2, &face(1, j - 1), &act_sdot(&p2, &face(2, i), d));
                    assert_eq!(a, b);
                }
            }
        }
        let s1set: HashSet<_> = s1.iter().collect();
        for d in &s2 {
            for i in 0..=2 {
                assert!(s1set.contains(&act_sdot(&p2, &face(2, i), d)));
            }
        }
    }

    #[test]
    fn extension_and_permutation() {
        let p2 = fixture_pointed_sets(2);
        for dims in [vec![1], vec![2], vec![1, 1]] {
            let sh = Shape::new(&dims);
            let mut ext_dims = dims.clone();
            ext_dims.push(1);
            let sh_ext = Shape::new(&ext_dims);
            let base = enumerate_sdot(&p2, &sh).unwrap().diagrams;
            let ext = enumerate_sdot(&p2, &sh_ext).unwrap().diagrams;
            assert_eq!(base.len(), ext.len());
            let ext_set: HashSet<_> = ext.iter().collect();
            for d in &base {
                let e = extend_sdot(&p2, &dims, d);
                assert!(ext_set.contains(&e));
                assert_eq!(&restrict_sdot(&sh_ext, &e), d);
            }
            assert_eq!(extend_sdot(&p2, &dims, &zero_diagram(&p2, &sh)), zero_diagram(&p2, &sh_ext));
        }
        let a = enumerate_sdot(&p2, &Shape::new(&[1, 2])).unwrap().diagrams;
        let b: HashSet<_> = enumerate_sdot(&p2, &Shape::new(&[2, 1])).unwrap().diagrams.into_iter().collect();
        assert_eq!(a.len(), b.len());
        for d in &a {
            let s = permute_sdot(&p2, &[1, 2], &[1, 0], d);
            assert!(b.contains(&s));
            assert_eq!(&permute_sdot(&p2, &[2, 1], &[1, 0], &s), d);
        }
        let sq = enumerate_sdot(&p2, &Shape::new(&[1, 1])).unwrap().diagrams;
        let swap = EMor::perm(&[1, 1], &[1, 0]);
        let twice = e_compose(&swap, &swap).unwrap();
        assert!(twice.is_identity());
        for d in &sq {
            assert_eq!(&act_sdot(&p2, &twice, d), d);
            assert_eq!(act_sdot(&p2, &swap, &act_sdot(&p2, &swap, d)), d.clone());
        }
    }

    #[test]
    fn structure_maps_compose() {
        // Acting by a composite equals acting twice, for every pair in a small window.
        let p2 = fixture_pointed_sets(2);
        let objs = [vec![1], vec![2], vec![1, 1]];
        let mut cache: HashMap<Vec<usize>, Vec<SdotDiagram>> = HashMap::new();
        for m in &objs {
            cache.insert(m.clone(), enumerate_sdot(&p2, &Shape::new(m)).unwrap().diagrams);
        }
        for a in &objs {
            for b in &objs {
                for c in &objs {
                    for f in crate::ecat::e_hom(a, b) {
                        for g in crate::ecat::e_hom(b, c) {
                            let gf = e_compose(&g, &f).unwrap();
                            for d in &cache[a] {
                                assert_eq!(act_sdot(&p2, &gf, d), act_sdot(&p2, &g, &act_sdot(&p2, &f, d)));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn levels_are_waldhausen_categories() {
        let p2 = fixture_pointed_sets(2);
        let lv = SdotLevel::new(&p2, &[1], false).unwrap();
        // S₁C is C again.
        assert_eq!(lv.n_obj(), p2.n_obj());
        let mut n = 0;
        for x in 0..lv.n_obj() as u32 {
            for y in 0..lv.n_obj() as u32 {
                for f in lv.hom(x, y).iter() {
                    n += 1;
                    let c = lv.comps(*f);
                    let k = lv.shape.obj(&[(0, 1)]).unwrap();
                    assert_eq!(lv.is_cof(*f), p2.is_cof(c[k as usize]));
                }
            }
        }
        assert_eq!(n, p2.cat.n_mor());
    }

    #[test]
    fn iterated_levels_agree() {
        let p2 = fixture_pointed_sets(2);
        for (m1, m2) in [(0, 2), (1, 1), (2, 1), (1, 2)] {
            let r = iterated_agreement(&p2, m1, m2).unwrap();
            assert!(r.is_ok(), "{r}");
        }
    }

    #[test]
    fn k_levels_are_simplicial() {
        let p2 = fixture_pointed_sets(2);
        let k0 = wald_k_level(&p2, 0, 2).unwrap();
        assert!(validate_simplicial(&k0).is_ok());
        assert_eq!(k0.counts[0], p2.n_obj());
        let k1 = wald_k_level(&p2, 1, 2).unwrap();
        assert!(validate_simplicial(&k1).is_ok());
        assert_eq!(k1.counts[0], 1);
        // The 1-simplices are pairs (object of S₁, weak equivalence chain of length 1).
        let ws1: usize = (0..p2.n_obj() as u32).map(|x| (0..p2.n_obj() as u32).map(|y| WeqSub(&p2).hom(x, y).len()).sum::<usize>()).sum();
        assert_eq!(k1.counts[1], ws1);
    }
}
