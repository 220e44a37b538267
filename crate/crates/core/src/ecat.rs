//! The indexing category `E`: objects are tuples `(m₁,…,m_r)` and a morphism
//! is an injection `q` of coordinates together with Δᵒᵖ maps, coordinates
//! outside the image of `q` being read as `[1]`.

use crate::fincat::Cat;
use crate::report::Report;
use crate::simplicial::{all_monotone, chain_degen, chain_face, diagonal, grid, Chains, Monotone, MultiSSet, TruncSSet};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EMor {
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    /// `q[k]` is the target coordinate of source coordinate `k`.
    pub q: Vec<usize>,
    /// `betas[j]: [tgt[j]] → [src[q⁻¹(j)]]` in Δ, or into `[1]` off the image.
    pub betas: Vec<Monotone>,
}

impl EMor {
    pub fn identity(m: &[usize]) -> EMor {
        EMor { src: m.to_vec(), tgt: m.to_vec(), q: (0..m.len()).collect(), betas: m.iter().map(|&v| Monotone::identity(v)).collect() }
    }

    /// `(ι_r, id)`: append a coordinate `[1]`.
    pub fn iota(m: &[usize]) -> EMor {
        let mut tgt = m.to_vec();
        tgt.push(1);
        let mut betas: Vec<Monotone> = m.iter().map(|&v| Monotone::identity(v)).collect();
        betas.push(Monotone::identity(1));
        EMor { src: m.to_vec(), tgt, q: (0..m.len()).collect(), betas }
    }

    /// `(σ, id)`: coordinate `k` moves to position `sigma[k]`.
    pub fn perm(m: &[usize], sigma: &[usize]) -> EMor {
        let mut tgt = vec![0; m.len()];
        for (k, &j) in sigma.iter().enumerate() {
            tgt[j] = m[k];
        }
        EMor { src: m.to_vec(), tgt: tgt.clone(), q: sigma.to_vec(), betas: tgt.iter().map(|&v| Monotone::identity(v)).collect() }
    }

    /// `(id, β̂)` with one Δ map per coordinate.
    pub fn simplicial(betas: Vec<Monotone>) -> EMor {
        let src = betas.iter().map(|b| b.m).collect();
        let tgt = betas.iter().map(|b| b.n()).collect();
        EMor { src, tgt, q: (0..betas.len()).collect(), betas }
    }

    /// `(id, β̂)` acting in coordinate `k` only.
    pub fn simplicial_at(m: &[usize], k: usize, beta: Monotone) -> EMor {
        let mut betas: Vec<Monotone> = m.iter().map(|&v| Monotone::identity(v)).collect();
        betas[k] = beta;
        EMor::simplicial(betas)
    }

    pub fn preimage(&self, j: usize) -> Option<usize> {
        self.q.iter().position(|&t| t == j)
    }

    pub fn is_valid(&self) -> bool {
        let s = self.tgt.len();
        let mut seen = vec![false; s];
        for &j in &self.q {
            if j >= s || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        self.q.len() == self.src.len()
            && self.betas.len() == s
            && (0..s).all(|j| {
                let b = &self.betas[j];
                let want = self.preimage(j).map_or(1, |k| self.src[k]);
                b.m == want && b.n() == self.tgt[j] && b.map.windows(2).all(|w| w[0] <= w[1]) && b.map.iter().all(|&v| v <= b.m)
            })
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.tgt && self.q.iter().enumerate().all(|(k, &j)| k == j) && self.betas.iter().all(|b| b.is_identity())
    }
}

/// `g ∘ f`, or `None` if the ends do not match.
pub fn e_compose(g: &EMor, f: &EMor) -> Option<EMor> {
    if f.tgt != g.src {
        return None;
    }
    let q = f.q.iter().map(|&j| g.q[j]).collect();
    let betas = (0..g.tgt.len())
        .map(|l| match g.preimage(l) {
            Some(j) => f.betas[j].after(&g.betas[l]),
            None => g.betas[l].clone(),
        })
        .collect();
    Some(EMor { src: f.src.clone(), tgt: g.tgt.clone(), q, betas })
}

/// Normal form: the insertions `ι`, then one permutation, then `(id, β̂)`,
/// leaving out identity pieces. Folding the list from `f.src` gives back `f`.
pub fn e_factorize(f: &EMor) -> Vec<EMor> {
    let (r, s) = (f.src.len(), f.tgt.len());
    let mut out = Vec::new();
    let mut cur = f.src.clone();
    for _ in r..s {
        out.push(EMor::iota(&cur));
        cur.push(1);
    }
    let mut sigma = f.q.clone();
    sigma.extend((0..s).filter(|j| !f.q.contains(j)));
    let p = EMor::perm(&cur, &sigma);
    if !p.is_identity() {
        out.push(p);
    }
    let b = EMor::simplicial(f.betas.clone());
    if !b.is_identity() {
        out.push(b);
    }
    out
}

/// Composite of `path` starting from the identity of `src`.
pub fn e_fold(src: &[usize], path: &[EMor]) -> Option<EMor> {
    path.iter().try_fold(EMor::identity(src), |acc, g| e_compose(g, &acc))
}

/// Composite of a path of morphisms, first element applied first.
pub fn e_compose_path(path: &[EMor]) -> Option<EMor> {
    let mut it = path.iter();
    let mut acc = it.next()?.clone();
    for g in it {
        acc = e_compose(g, &acc)?;
    }
    Some(acc)
}

/// Concatenation `f₁ ⊙ f₂` (block sum of injections, betas side by side).
pub fn e_concat(fs: &[&EMor]) -> EMor {
    let mut out = EMor { src: vec![], tgt: vec![], q: vec![], betas: vec![] };
    for f in fs {
        let off = out.tgt.len();
        out.src.extend(&f.src);
        out.q.extend(f.q.iter().map(|&j| j + off));
        out.tgt.extend(&f.tgt);
        out.betas.extend(f.betas.iter().cloned());
    }
    out
}

/// Objects of the window: tuples of length `≤ r` with entries `≤ d`.
pub fn window_objects(r: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..r {
        let mut next = Vec::new();
        for t in &layer {
            for v in 0..=d {
                let mut u: Vec<usize> = t.clone();
                u.push(v);
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn injections(r: usize, s: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, r: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == r {
            out.push(cur.clone());
            return;
        }
        for j in 0..s {
            if !cur.contains(&j) {
                cur.push(j);
                go(k + 1, r, s, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, r, s, &mut Vec::new(), &mut out);
    out
}

/// Every morphism between two window objects.
pub fn e_hom(src: &[usize], tgt: &[usize]) -> Vec<EMor> {
    let mut out = Vec::new();
    if src.len() > tgt.len() {
        return out;
    }
    for q in injections(src.len(), tgt.len()) {
        let choices: Vec<Vec<Monotone>> = (0..tgt.len())
            .map(|j| {
                let m = q.iter().position(|&t| t == j).map_or(1, |k| src[k]);
                all_monotone(tgt[j], m)
            })
            .collect();
        let mut idx = vec![0usize; tgt.len()];
        loop {
            let betas = (0..tgt.len()).map(|j| choices[j][idx[j]].clone()).collect();
            out.push(EMor { src: src.to_vec(), tgt: tgt.to_vec(), q: q.clone(), betas });
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    out
}

/// Generators of the window: insertions, permutations, and `(id, β̂)` changing
/// a single coordinate by a non-identity map.
pub fn window_generators(r: usize, d: usize) -> Vec<EMor> {
    let mut out = Vec::new();
    for m in window_objects(r, d) {
        if m.len() < r {
            out.push(EMor::iota(&m));
        }
        for sigma in injections(m.len(), m.len()) {
            if sigma.iter().enumerate().any(|(k, &j)| k != j) {
                out.push(EMor::perm(&m, &sigma));
            }
        }
        for k in 0..m.len() {
            for n in 0..=d {
                for b in all_monotone(n, m[k]) {
                    if !b.is_identity() {
                        out.push(EMor::simplicial_at(&m, k, b));
                    }
                }
            }
        }
    }
    out
}

/// A level category of a functor out of `E` with its structure maps.
pub trait Level: Cat {
    type Map;
    fn base_obj(&self) -> u32;
    fn structure_map(&self, f: &EMor, tgt: &Self) -> Self::Map;
    fn push_obj(&self, m: &Self::Map, tgt: &Self, x: u32) -> u32;
    fn push_mor(&self, m: &Self::Map, tgt: &Self, g: u32) -> u32;
}

/// The diagonal of `(p, q₁,…,qₙ) ↦ N_p(level(q))`, truncated at `d`. `levels`
/// must hold every `q` in `[0,d]ⁿ`.
pub fn level_diagonal<L: Level>(levels: &HashMap<Vec<usize>, L>, n: usize, d: usize) -> TruncSSet {
    let chains: HashMap<Vec<usize>, Chains> = levels.iter().map(|(q, lv)| (q.clone(), Chains::build(lv, d))).collect();
    let mut ms = MultiSSet { r: n + 1, d, ..Default::default() };
    let mut base = HashMap::new();
    for q in grid(&vec![d; n]) {
        let (lv, ch) = (&levels[&q], &chains[&q]);
        let mut pushes = Vec::new();
        for k in 0..n {
            if q[k] > 0 {
                pushes.extend((0..=q[k]).map(|i| (true, k, i, Monotone::coface(q[k], i))));
            }
            if q[k] < d {
                pushes.extend((0..=q[k]).map(|i| (false, k, i, Monotone::codegeneracy(q[k], i))));
            }
        }
        let pushes: Vec<_> = pushes
            .into_iter()
            .map(|(is_face, k, i, beta)| {
                let f = EMor::simplicial_at(&q, k, beta);
                let tl = &levels[&f.tgt];
                (is_face, k, i, f.tgt.clone(), lv.structure_map(&f, tl))
            })
            .collect();
        for p in 0..=d {
            let mut idx = vec![p];
            idx.extend(&q);
            ms.counts.insert(idx.clone(), ch.count(p));
            let z = lv.base_obj();
            let bch: Vec<u32> = if p == 0 { vec![z] } else { vec![lv.id(z); p] };
            base.insert(idx.clone(), ch.lookup(p, &bch).expect("basepoint chain"));
            if p > 0 {
                for i in 0..=p {
                    let t = ch.chains[p].iter().map(|s| ch.lookup(p - 1, &chain_face(lv, s, p, i)).unwrap()).collect();
                    ms.faces.insert((idx.clone(), 0, i), t);
                }
            }
            if p < d {
                for i in 0..=p {
                    let t = ch.chains[p].iter().map(|s| ch.lookup(p + 1, &chain_degen(lv, s, p, i)).unwrap()).collect();
                    ms.degens.insert((idx.clone(), 0, i), t);
                }
            }
            for (is_face, k, i, tq, m) in &pushes {
                let (tl, tch) = (&levels[tq], &chains[tq]);
                let t: Vec<u32> = ch.chains[p]
                    .iter()
                    .map(|s| {
                        let image: Vec<u32> = if p == 0 {
                            vec![lv.push_obj(m, tl, s[0])]
                        } else {
                            s.iter().map(|&g| lv.push_mor(m, tl, g)).collect()
                        };
                        tch.lookup(p, &image).expect("structure map leaves the nerve")
                    })
                    .collect();
                let key = (idx.clone(), k + 1, *i);
                if *is_face {
                    ms.faces.insert(key, t);
                } else {
                    ms.degens.insert(key, t);
                }
            }
        }
    }
    ms.base = Some(base);
    diagonal(&ms, d).expect("all levels present")
}

// ---------------------------------------------------------------------------
// Windows of E_*-categories

/// Replaces the image of one object under the functor induced by one
/// morphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPatch {
    pub mor: EMor,
    pub object: u32,
    pub image: u32,
}

/// A level with an optional [`WindowPatch`] applied to its induced functors.
pub struct Patched<L> {
    pub inner: L,
    pub patch: Option<WindowPatch>,
}

impl<L: Level> Cat for Patched<L> {
    fn n_obj(&self) -> usize {
        self.inner.n_obj()
    }
    fn src(&self, f: u32) -> u32 {
        self.inner.src(f)
    }
    fn tgt(&self, f: u32) -> u32 {
        self.inner.tgt(f)
    }
    fn id(&self, x: u32) -> u32 {
        self.inner.id(x)
    }
    fn comp(&self, g: u32, f: u32) -> Option<u32> {
        self.inner.comp(g, f)
    }
    fn has_mor(&self, f: u32) -> bool {
        self.inner.has_mor(f)
    }
    fn hom(&self, x: u32, y: u32) -> std::borrow::Cow<'_, [u32]> {
        self.inner.hom(x, y)
    }
    fn obj_name(&self, x: u32) -> String {
        self.inner.obj_name(x)
    }
}

impl<L: Level> Level for Patched<L> {
    type Map = (L::Map, Option<(u32, u32)>);
    fn base_obj(&self) -> u32 {
        self.inner.base_obj()
    }
    fn structure_map(&self, f: &EMor, tgt: &Self) -> Self::Map {
        let hit = self.patch.as_ref().filter(|p| p.mor == *f).map(|p| (p.object, p.image));
        (self.inner.structure_map(f, &tgt.inner), hit)
    }
    fn push_obj(&self, m: &Self::Map, tgt: &Self, x: u32) -> u32 {
        match m.1 {
            Some((o, image)) if o == x => image,
            _ => self.inner.push_obj(&m.0, &tgt.inner, x),
        }
    }
    fn push_mor(&self, m: &Self::Map, tgt: &Self, g: u32) -> u32 {
        self.inner.push_mor(&m.0, &tgt.inner, g)
    }
}


fn sorted_keys<L>(levels: &HashMap<Vec<usize>, L>) -> Vec<&Vec<usize>> {
    let mut keys: Vec<&Vec<usize>> = levels.keys().collect();
    keys.sort();
    keys
}

/// Objects whose morphisms are compared: all of them in small levels, else
/// only endomorphisms.
const SMALL_LEVEL: usize = 16;

/// Functoriality of the induced maps over every composable pair of window
/// morphisms, the condition that a tuple with an entry `0` has the one-point
/// value, and preservation of basepoints. Permutations are among the pairs,
/// so the permutation action is checked as well.
pub fn validate_estar_window<L: Level>(levels: &HashMap<Vec<usize>, L>) -> Report {
    let mut r = Report::new();
    let keys = sorted_keys(levels);
    for &a in &keys {
        let lv = &levels[a];
        if a.contains(&0) {
            let z = lv.base_obj();
            r.expect(lv.n_obj() == 1 && lv.hom(z, z).len() == 1, "basepoint-level", || format!("{a:?}"));
        }
    }
    for &a in &keys {
        let la = &levels[a];
        let n = la.n_obj() as u32;
        let mut mors: Vec<u32> = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x == y || n as usize <= SMALL_LEVEL {
                    mors.extend(la.hom(x, y).iter());
                }
            }
        }
        for &b in &keys {
            let lb = &levels[b];
            let homs_ab = e_hom(a, b);
            for f in &homs_ab {
                let mf = la.structure_map(f, lb);
                r.expect(la.push_obj(&mf, lb, la.base_obj()) == lb.base_obj(), "basepoint-preserved", || format!("{f:?}"));
                for &c in &keys {
                    let lc = &levels[c];
                    for g in e_hom(b, c) {
                        let gf = e_compose(&g, f).expect("composable");
                        let (mg, mgf) = (lb.structure_map(&g, lc), la.structure_map(&gf, lc));
                        let wit = || format!("{g:?} after {f:?}");
                        for x in 0..n {
                            let two = lb.push_obj(&mg, lc, la.push_obj(&mf, lb, x));
                            if !r.expect(two == la.push_obj(&mgf, lc, x), "functoriality", wit) {
                                break;
                            }
                        }
                        for &h in &mors {
                            let two = lb.push_mor(&mg, lc, la.push_mor(&mf, lb, h));
                            if !r.expect(two == la.push_mor(&mgf, lc, h), "functoriality", wit) {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    r
}

/// A `k`-ary morphism `X₁ × … × X_k → Y` given on objects by `on_obj(contexts,
/// objects)`: basepoints go to the basepoint and the naturality rectangle
/// `F(X₁(f₁)x₁,…) = Y(f₁⊙…⊙f_k)F(x₁,…)` holds for every tuple of window
/// morphisms between levels present in the sources.
pub fn validate_multimorphism<L: Level, M: Level>(
    srcs: &[&HashMap<Vec<usize>, L>],
    tgt: &HashMap<Vec<usize>, M>,
    on_obj: impl Fn(&[&Vec<usize>], &[u32]) -> u32,
) -> Report {
    let mut r = Report::new();
    let keys: Vec<Vec<&Vec<usize>>> = srcs.iter().map(|l| sorted_keys(l)).collect();
    let radix: Vec<usize> = keys.iter().map(|k| k.len()).collect();
    let concat = |ctxs: &[&Vec<usize>]| -> Vec<usize> { ctxs.iter().flat_map(|c| c.iter().copied()).collect() };
    for pick in crate::wald::tuples(&radix) {
        let a: Vec<&Vec<usize>> = pick.iter().enumerate().map(|(i, &p)| keys[i][p as usize]).collect();
        let Some(ya) = tgt.get(&concat(&a)) else { continue };
        let ls: Vec<&L> = a.iter().enumerate().map(|(i, c)| &srcs[i][*c]).collect();
        let objs: Vec<Vec<u32>> = crate::wald::tuples(&ls.iter().map(|l| l.n_obj()).collect::<Vec<_>>());
        for xs in &objs {
            if ls.iter().zip(xs).any(|(l, &x)| x == l.base_obj()) {
                r.expect(on_obj(&a, xs) == ya.base_obj(), "multimorphism-basepoint", || format!("{a:?} {xs:?}"));
            }
        }
        for pick_b in crate::wald::tuples(&radix) {
            let b: Vec<&Vec<usize>> = pick_b.iter().enumerate().map(|(i, &p)| keys[i][p as usize]).collect();
            let Some(yb) = tgt.get(&concat(&b)) else { continue };
            let lb: Vec<&L> = b.iter().enumerate().map(|(i, c)| &srcs[i][*c]).collect();
            let homs: Vec<Vec<EMor>> = a.iter().zip(&b).map(|(x, y)| e_hom(x, y)).collect();
            for choice in crate::wald::tuples(&homs.iter().map(|h| h.len()).collect::<Vec<_>>()) {
                let fs: Vec<&EMor> = choice.iter().enumerate().map(|(i, &c)| &homs[i][c as usize]).collect();
                let maps: Vec<L::Map> = fs.iter().enumerate().map(|(i, f)| ls[i].structure_map(f, lb[i])).collect();
                let big = e_concat(&fs);
                let my = ya.structure_map(&big, yb);
                for xs in &objs {
                    let pushed: Vec<u32> = xs.iter().enumerate().map(|(i, &x)| ls[i].push_obj(&maps[i], lb[i], x)).collect();
                    let ok = on_obj(&b, &pushed) == ya.push_obj(&my, yb, on_obj(&a, xs));
                    r.expect(ok, "multimorphism-natural", || format!("{big:?} at {xs:?}"));
                }
            }
        }
    }
    r
}

/// `β^j: [q] → [1]`, sending `0,…,j−1` to 0 and `j,…,q` to 1.
pub fn beta_j(q: usize, j: usize) -> Monotone {
    Monotone::new(1, (0..=q).map(|i| usize::from(i >= j)).collect()).expect("monotone")
}

/// The generator `(ι_p, (id,…,id, β̂^j)): ([q]^p) → ([q]^{p+1})`.
pub fn structure_emor(p: usize, q: usize, j: usize) -> EMor {
    let mut f = EMor::iota(&vec![q; p]);
    f.tgt[p] = q;
    f.betas[p] = beta_j(q, j);
    f
}

/// Level `p` of the spectrum at simplicial degree `q`: the value at `([q]^p)`.
pub fn spectrum_level<L>(levels: &HashMap<Vec<usize>, L>, p: usize, q: usize) -> Option<&L> {
    levels.get(&vec![q; p])
}

/// The structure map for the wedge summand `j ∈ {1,…,q}` of `IX(p) ∧ S¹_q`.
pub fn structure_map<L: Level>(levels: &HashMap<Vec<usize>, L>, p: usize, q: usize, j: usize) -> Option<L::Map> {
    let f = structure_emor(p, q, j);
    Some(levels.get(&f.src)?.structure_map(&f, levels.get(&f.tgt)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_mor(len: usize, d: usize) -> impl Strategy<Value = EMor> {
        (proptest::collection::vec(0..=d, len), proptest::collection::vec(0..=d, len), 0usize..1000).prop_map(
            move |(src, tgt_extra, pick)| {
                let tgt: Vec<usize> = tgt_extra;
                let homs = e_hom(&src, &tgt);
                homs[pick % homs.len()].clone()
            },
        )
    }

    #[test]
    fn identities_and_generators() {
        let m = vec![2, 1];
        let f = EMor::iota(&m);
        assert!(f.is_valid());
        assert_eq!(e_compose(&f, &EMor::identity(&m)), Some(f.clone()));
        assert_eq!(e_compose(&EMor::identity(&f.tgt), &f), Some(f.clone()));
        let b = Monotone::new(2, vec![0, 2]).unwrap();
        let g = EMor::simplicial(vec![b.clone(), Monotone::identity(1), Monotone::identity(1)]);
        let both = EMor { src: m.clone(), tgt: vec![1, 1, 1], q: vec![0, 1], betas: g.betas.clone() };
        assert_eq!(e_compose(&g, &f), Some(both));
        let lone = EMor { src: vec![1], tgt: vec![2, 1], q: vec![1], betas: vec![Monotone::new(1, vec![0, 0, 1]).unwrap(), Monotone::identity(1)] };
        assert!(lone.is_valid());
        let gens = e_factorize(&lone);
        assert_eq!(gens.len(), 3);
        assert_eq!(e_compose_path(&gens), Some(lone));
        assert!(e_factorize(&EMor::identity(&m)).is_empty());
        let one = e_factorize(&EMor::iota(&[2]));
        assert_eq!(one, vec![EMor::iota(&[2])]);
    }

    #[test]
    fn window_homs_are_valid() {
        for s in window_objects(2, 2) {
            for t in window_objects(2, 2) {
                for f in e_hom(&s, &t) {
                    assert!(f.is_valid(), "{f:?}");
                }
            }
        }
        assert_eq!(e_hom(&[1], &[1]).len(), 3);
        assert_eq!(window_objects(2, 1).len(), 7);
    }

    use crate::fixtures::fixture_pointed_sets;
    use crate::sdot::{extend_sdot, SdotLevel};
    use crate::segal::SegalLevel;
    use crate::wald::{default_wedge_choice, lambda};

    fn sdot_window<'a>(w: &'a crate::wald::WaldStruct, r: usize, d: usize) -> HashMap<Vec<usize>, SdotLevel<'a, crate::wald::WaldStruct>> {
        window_objects(r, d).into_iter().map(|m| (m.clone(), SdotLevel::new(w, &m, false).unwrap())).collect()
    }

    #[test]
    fn windows_of_both_constructions() {
        let w = fixture_pointed_sets(2);
        let levels = sdot_window(&w, 2, 1);
        let r = validate_estar_window(&levels);
        assert!(r.is_clean() && r.checked > 1000, "{r}");
        let s = lambda(&w, default_wedge_choice(&w));
        let seg: HashMap<Vec<usize>, SegalLevel> =
            window_objects(2, 1).into_iter().map(|m| (m.clone(), SegalLevel::new(&s, &m, false).unwrap())).collect();
        let r = validate_estar_window(&seg);
        assert!(r.is_clean() && r.checked > 1000, "{r}");
    }

    #[test]
    fn corrupted_induced_functor_is_caught() {
        let w = fixture_pointed_sets(2);
        let swap = EMor::perm(&[1, 1], &[1, 0]);
        let levels: HashMap<Vec<usize>, Patched<_>> = sdot_window(&w, 2, 1)
            .into_iter()
            .map(|(k, l)| {
                let patch = (k == [1, 1]).then(|| WindowPatch { mor: swap.clone(), object: l.n_obj() as u32 - 1, image: 0 });
                (k, Patched { inner: l, patch })
            })
            .collect();
        let r = validate_estar_window(&levels);
        assert!(r.has_failure("functoriality"));
        assert!(r.violations.iter().any(|i| i.witness.contains("q: [1, 0]")), "{r}");
    }

    #[test]
    fn spectrum_structure_maps() {
        let w = fixture_pointed_sets(2);
        let levels = sdot_window(&w, 2, 2);
        assert_eq!(spectrum_level(&levels, 0, 3).unwrap().n_obj(), w.cat.n_obj());
        for q in 1..=2 {
            for j in 1..=q {
                let f = structure_emor(1, q, j);
                assert!(f.is_valid());
                let m = structure_map(&levels, 1, q, j).unwrap();
                let (a, b) = (&levels[&f.src], &levels[&f.tgt]);
                let path = e_factorize(&f);
                for x in 0..a.n_obj() as u32 {
                    let mut cur = (&f.src, x);
                    for g in &path {
                        let (l, t) = (&levels[cur.0], &levels[&g.tgt]);
                        cur = (&g.tgt, l.push_obj(&l.structure_map(g, t), t, cur.1));
                    }
                    assert_eq!(cur.1, a.push_obj(&m, b, x));
                }
            }
        }
        let f = structure_emor(0, 1, 1);
        assert_eq!(f, EMor::iota(&[]));
        let (a, b) = (&levels[&vec![]], &levels[&vec![1]]);
        let m = structure_map(&levels, 0, 1, 1).unwrap();
        let x = a.base_obj();
        assert_eq!(b.diagram(a.push_obj(&m, b, x)), &extend_sdot(&w, &[], a.diagram(x)));
        assert_eq!(beta_j(3, 2).map, vec![0, 0, 1, 1]);
    }

    #[test]
    fn identity_and_constant_multimorphisms() {
        let w = fixture_pointed_sets(2);
        let levels = sdot_window(&w, 1, 2);
        let r = validate_multimorphism(&[&levels], &levels, |_, xs| xs[0]);
        assert!(r.is_clean() && r.checked > 0, "{r}");
        let none: [&HashMap<Vec<usize>, SdotLevel<crate::wald::WaldStruct>>; 0] = [];
        let r = validate_multimorphism(&none, &levels, |_, _| 0);
        assert!(r.is_clean() && r.checked == 1, "{r}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn composition_is_associative(f in arb_mor(2, 2), pick_g in 0usize..1000, pick_h in 0usize..1000, t1 in proptest::collection::vec(0usize..=2, 2), t2 in proptest::collection::vec(0usize..=2, 2)) {
            let gs = e_hom(&f.tgt, &t1);
            let g = &gs[pick_g % gs.len()];
            let hs = e_hom(&t1, &t2);
            let h = &hs[pick_h % hs.len()];
            let a = e_compose(h, &e_compose(g, &f).unwrap()).unwrap();
            let b = e_compose(&e_compose(h, g).unwrap(), &f).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn factorization_round_trips(f in arb_mor(2, 2)) {
            let path = e_factorize(&f);
            prop_assert!(path.iter().all(|g| g.is_valid()));
            prop_assert!(path.len() <= 2 + f.tgt.len() - f.src.len());
            prop_assert_eq!(e_fold(&f.src, &path), Some(f));
        }
    }
}
