//! Truncated simplicial sets, the simplicial circle, nerves and diagonals.

use crate::fincat::Cat;
use crate::report::Report;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A monotone map `β: [n] → [m]` in Δ, stored by its values. Read backwards it
/// is the Δᵒᵖ morphism `β̂: [m] → [n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monotone {
    pub m: usize,
    pub map: Vec<usize>,
}

impl Monotone {
    pub fn new(m: usize, map: Vec<usize>) -> Option<Monotone> {
        let ok = !map.is_empty() && map.windows(2).all(|w| w[0] <= w[1]) && map.iter().all(|&v| v <= m);
        ok.then_some(Monotone { m, map })
    }

    pub fn identity(m: usize) -> Monotone {
        Monotone { m, map: (0..=m).collect() }
    }

    /// Source `[n]` of β in Δ.
    pub fn n(&self) -> usize {
        self.map.len() - 1
    }

    pub fn is_identity(&self) -> bool {
        self.n() == self.m && self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn at(&self, i: usize) -> usize {
        self.map[i]
    }

    /// `self ∘ other` in Δ.
    pub fn after(&self, other: &Monotone) -> Monotone {
        assert_eq!(other.m, self.n(), "monotone maps not composable");
        Monotone { m: self.m, map: other.map.iter().map(|&t| self.map[t]).collect() }
    }

    /// Coface `δ_i: [q−1] → [q]` skipping `i`.
    pub fn coface(q: usize, i: usize) -> Monotone {
        Monotone { m: q, map: (0..q).map(|t| if t < i { t } else { t + 1 }).collect() }
    }

    /// Codegeneracy `σ_i: [q+1] → [q]` hitting `i` twice.
    pub fn codegeneracy(q: usize, i: usize) -> Monotone {
        Monotone { m: q, map: (0..=q + 1).map(|t| if t <= i { t } else { t - 1 }).collect() }
    }
}

/// Every monotone `[n] → [m]`, in lexicographic order of values.
pub fn all_monotone(n: usize, m: usize) -> Vec<Monotone> {
    fn go(pos: usize, lo: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Monotone>) {
        if pos > n {
            out.push(Monotone { m, map: cur.clone() });
            return;
        }
        for v in lo..=m {
            cur.push(v);
            go(pos + 1, v, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, 0, n, m, &mut Vec::new(), &mut out);
    out
}

/// The pointed map `β*: ⟨m⟩ → ⟨n⟩` of the simplicial circle: `i ↦ j` when
/// `β(j−1) < i ≤ β(j)`, and to the basepoint otherwise.
pub fn circle_map(beta: &Monotone) -> Vec<usize> {
    let n = beta.n();
    let mut out = vec![0; beta.m + 1];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        for j in 1..=n {
            if beta.at(j - 1) < i && i <= beta.at(j) {
                *o = j;
            }
        }
    }
    out
}

/// `(β∘γ)* = γ*∘β*` for all composable monotone maps between `[0],…,[max]`.
pub fn check_circle_contravariance(max: usize) -> Report {
    let mut r = Report::new();
    for p in 0..=max {
        for n in 0..=max {
            for m in 0..=max {
                for g in all_monotone(p, n) {
                    for b in all_monotone(n, m) {
                        let (cb, cg) = (circle_map(&b), circle_map(&g));
                        let rhs: Vec<usize> = cb.iter().map(|&v| cg[v]).collect();
                        r.expect(circle_map(&b.after(&g)) == rhs, "circle-contravariance", || format!("{b:?} after {g:?}"));
                    }
                }
            }
        }
    }
    r
}

/// Circle level `S¹_q = ⟨q⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleLevel {
    pub q: usize,
}

impl CircleLevel {
    pub fn len(&self) -> usize {
        self.q + 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn basepoint(&self) -> usize {
        0
    }
}

// ---------------------------------------------------------------------------

/// A simplicial set known up to dimension `dim_bound`. `faces[k][i]` maps
/// `X_k → X_{k−1}` and `degens[k][i]` maps `X_k → X_{k+1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TruncSSet {
    pub dim_bound: usize,
    pub counts: Vec<usize>,
    pub faces: Vec<Vec<Vec<u32>>>,
    pub degens: Vec<Vec<Vec<u32>>>,
    pub base: Option<Vec<u32>>,
}

impl TruncSSet {
    pub fn face(&self, k: usize, i: usize, x: u32) -> u32 {
        self.faces[k][i][x as usize]
    }
    pub fn degen(&self, k: usize, i: usize, x: u32) -> u32 {
        self.degens[k][i][x as usize]
    }
}

pub fn validate_simplicial(x: &TruncSSet) -> Report {
    let mut r = Report::new();
    let d = x.dim_bound;
    if x.counts.len() != d + 1 || x.faces.len() != d + 1 || x.degens.len() != d + 1 {
        r.structural("table-shape", "per-dimension tables missing");
        return r;
    }
    for k in 0..=d {
        let want_f = if k == 0 { 0 } else { k + 1 };
        let want_s = if k < d { k + 1 } else { 0 };
        if x.faces[k].len() != want_f || x.degens[k].len() != want_s {
            r.structural("table-shape", format!("dimension {k}"));
            continue;
        }
        for (i, t) in x.faces[k].iter().enumerate() {
            if t.len() != x.counts[k] || t.iter().any(|&v| v as usize >= x.counts[k - 1]) {
                r.structural("dangling-simplex", format!("d_{i} on dimension {k}"));
            }
        }
        for (i, t) in x.degens[k].iter().enumerate() {
            if t.len() != x.counts[k] || t.iter().any(|&v| v as usize >= x.counts[k + 1]) {
                r.structural("dangling-simplex", format!("s_{i} on dimension {k}"));
            }
        }
    }
    if !r.is_ok() {
        return r;
    }
    for k in 2..=d {
        for j in 1..=k {
            for i in 0..j {
                for s in 0..x.counts[k] as u32 {
                    let a = x.face(k - 1, i, x.face(k, j, s));
                    let b = x.face(k - 1, j - 1, x.face(k, i, s));
                    r.expect(a == b, "face-face", || format!("d{i}d{j} on {k}-simplex {s}"));
                }
            }
        }
    }
    for k in 0..d {
        for j in 0..=k {
            for i in 0..=k + 1 {
                for s in 0..x.counts[k] as u32 {
                    let lhs = x.face(k + 1, i, x.degen(k, j, s));
                    let rhs = if i == j || i == j + 1 {
                        s
                    } else if i < j {
                        x.degen(k - 1, j - 1, x.face(k, i, s))
                    } else {
                        x.degen(k - 1, j, x.face(k, i - 1, s))
                    };
                    r.expect(lhs == rhs, "face-degeneracy", || format!("d{i}s{j} on {k}-simplex {s}"));
                }
            }
        }
    }
    for k in 0..d.saturating_sub(1) {
        for j in 0..=k {
            for i in 0..=j {
                for s in 0..x.counts[k] as u32 {
                    let a = x.degen(k + 1, i, x.degen(k, j, s));
                    let b = x.degen(k + 1, j + 1, x.degen(k, i, s));
                    r.expect(a == b, "degeneracy-degeneracy", || format!("s{i}s{j} on {k}-simplex {s}"));
                }
            }
        }
    }
    if let Some(base) = &x.base {
        if base.len() != d + 1 {
            r.structural("basepoint", "one basepoint per dimension required");
            return r;
        }
        for k in 0..=d {
            for (i, t) in x.faces[k].iter().enumerate() {
                r.expect(t[base[k] as usize] == base[k - 1], "basepoint", || format!("d{i} in dimension {k}"));
            }
            for (i, t) in x.degens[k].iter().enumerate() {
                r.expect(t[base[k] as usize] == base[k + 1], "basepoint", || format!("s{i} in dimension {k}"));
            }
        }
    }
    r
}

/// The circle truncated at `d`, all structure maps coming from [`circle_map`].
pub fn circle(d: usize) -> TruncSSet {
    let mut x = TruncSSet { dim_bound: d, ..Default::default() };
    for k in 0..=d {
        x.counts.push(k + 1);
        let faces = if k == 0 {
            vec![]
        } else {
            (0..=k).map(|i| circle_map(&Monotone::coface(k, i)).into_iter().map(|v| v as u32).collect()).collect()
        };
        x.faces.push(faces);
        let degens = if k < d {
            (0..=k).map(|i| circle_map(&Monotone::codegeneracy(k, i)).into_iter().map(|v| v as u32).collect()).collect()
        } else {
            vec![]
        };
        x.degens.push(degens);
    }
    x.base = Some(vec![0; d + 1]);
    x
}

/// Composable chains of a category up to length `d`, with their index.
#[derive(Clone, Debug, Default)]
pub struct Chains {
    /// `chains[k]` lists `k`-simplices; a 0-simplex is `[x]` (an object), a
    /// `k`-simplex with `k ≥ 1` is `[f₁,…,f_k]` with `tgt fᵢ = src fᵢ₊₁`.
    pub chains: Vec<Vec<Vec<u32>>>,
    pub index: Vec<HashMap<Vec<u32>, u32>>,
}

impl Chains {
    pub fn build<C: Cat + ?Sized>(c: &C, d: usize) -> Chains {
        let n = c.n_obj() as u32;
        let mut outs: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
        for x in 0..n {
            for y in 0..n {
                outs[x as usize].extend(c.hom(x, y).iter().copied());
            }
        }
        let mut chains = vec![(0..n).map(|x| vec![x]).collect::<Vec<_>>()];
        if d >= 1 {
            chains.push(outs.iter().flatten().map(|&f| vec![f]).collect());
        }
        for k in 2..=d {
            let mut next = Vec::new();
            for ch in &chains[k - 1] {
                let last = *ch.last().unwrap();
                for &g in &outs[c.tgt(last) as usize] {
                    let mut v = ch.clone();
                    v.push(g);
                    next.push(v);
                }
            }
            chains.push(next);
        }
        let index = chains
            .iter()
            .map(|lv| lv.iter().enumerate().map(|(i, ch)| (ch.clone(), i as u32)).collect())
            .collect();
        Chains { chains, index }
    }

    pub fn count(&self, k: usize) -> usize {
        self.chains[k].len()
    }

    pub fn lookup(&self, k: usize, ch: &[u32]) -> Option<u32> {
        self.index[k].get(ch).copied()
    }
}

/// `d_i` on a chain: drop an end or compose an inner pair.
pub fn chain_face<C: Cat + ?Sized>(c: &C, ch: &[u32], k: usize, i: usize) -> Vec<u32> {
    if k == 1 {
        let f = ch[0];
        return vec![if i == 0 { c.tgt(f) } else { c.src(f) }];
    }
    let mut v = Vec::with_capacity(k - 1);
    for (t, &f) in ch.iter().enumerate() {
        if i == 0 && t == 0 || i == k && t == k - 1 {
            continue;
        }
        if i > 0 && i < k && t == i {
            let prev = v.pop().unwrap();
            v.push(c.c(f, prev));
            continue;
        }
        v.push(f);
    }
    v
}

/// `s_i` on a chain: insert an identity.
pub fn chain_degen<C: Cat + ?Sized>(c: &C, ch: &[u32], k: usize, i: usize) -> Vec<u32> {
    if k == 0 {
        return vec![c.id(ch[0])];
    }
    let obj = if i == 0 { c.src(ch[0]) } else { c.tgt(ch[i - 1]) };
    let mut v = ch.to_vec();
    v.insert(i, c.id(obj));
    v
}

/// The nerve of `c` truncated at `d`, optionally based at the identity chains
/// of `base`.
pub fn nerve<C: Cat + ?Sized>(c: &C, d: usize, base: Option<u32>) -> TruncSSet {
    let ch = Chains::build(c, d);
    nerve_from_chains(c, &ch, d, base)
}

pub fn nerve_from_chains<C: Cat + ?Sized>(c: &C, ch: &Chains, d: usize, base: Option<u32>) -> TruncSSet {
    let mut x = TruncSSet { dim_bound: d, ..Default::default() };
    for k in 0..=d {
        x.counts.push(ch.count(k));
        let mut faces = Vec::new();
        if k > 0 {
            for i in 0..=k {
                faces.push(ch.chains[k].iter().map(|s| ch.lookup(k - 1, &chain_face(c, s, k, i)).unwrap()).collect());
            }
        }
        x.faces.push(faces);
        let mut degens = Vec::new();
        if k < d {
            for i in 0..=k {
                degens.push(ch.chains[k].iter().map(|s| ch.lookup(k + 1, &chain_degen(c, s, k, i)).unwrap()).collect());
            }
        }
        x.degens.push(degens);
    }
    x.base = base.map(|b| {
        (0..=d)
            .map(|k| {
                let s: Vec<u32> = if k == 0 { vec![b] } else { vec![c.id(b); k] };
                ch.lookup(k, &s).unwrap()
            })
            .collect()
    });
    x
}

// ---------------------------------------------------------------------------

/// Multisimplicial data in `r` directions, stored sparsely on the cube of
/// multi-indices with entries `≤ d`.
#[derive(Clone, Debug, Default)]
pub struct MultiSSet {
    pub r: usize,
    pub d: usize,
    pub counts: HashMap<Vec<usize>, usize>,
    /// `(index, direction, i)` → table for `d_i` in that direction.
    pub faces: HashMap<(Vec<usize>, usize, usize), Vec<u32>>,
    pub degens: HashMap<(Vec<usize>, usize, usize), Vec<u32>>,
    pub base: Option<HashMap<Vec<usize>, u32>>,
}

/// The diagonal `q ↦ X(q,…,q)`, structure maps applied in every direction in
/// turn (they commute, so the order is immaterial for valid input).
pub fn diagonal(x: &MultiSSet, d: usize) -> Result<TruncSSet, String> {
    let r = x.r;
    let count = |m: &Vec<usize>| x.counts.get(m).copied().ok_or_else(|| format!("missing level {m:?}"));
    let mut out = TruncSSet { dim_bound: d, ..Default::default() };
    for q in 0..=d {
        let diag = vec![q; r];
        out.counts.push(count(&diag)?);
        let mut faces = Vec::new();
        if q > 0 {
            for i in 0..=q {
                let mut table: Vec<u32> = (0..out.counts[q] as u32).collect();
                let mut idx = diag.clone();
                for dir in 0..r {
                    let t = x.faces.get(&(idx.clone(), dir, i)).ok_or_else(|| format!("missing face {idx:?}/{dir}/{i}"))?;
                    for v in table.iter_mut() {
                        *v = t[*v as usize];
                    }
                    idx[dir] -= 1;
                }
                faces.push(table);
            }
        }
        out.faces.push(faces);
        let mut degens = Vec::new();
        if q < d {
            for i in 0..=q {
                let mut table: Vec<u32> = (0..out.counts[q] as u32).collect();
                let mut idx = diag.clone();
                for dir in 0..r {
                    let t = x.degens.get(&(idx.clone(), dir, i)).ok_or_else(|| format!("missing degeneracy {idx:?}/{dir}/{i}"))?;
                    for v in table.iter_mut() {
                        *v = t[*v as usize];
                    }
                    idx[dir] += 1;
                }
                degens.push(table);
            }
        }
        out.degens.push(degens);
    }
    if let Some(b) = &x.base {
        let mut v = Vec::new();
        for q in 0..=d {
            v.push(*b.get(&vec![q; r]).ok_or("missing basepoint")?);
        }
        out.base = Some(v);
    }
    Ok(out)
}

/// Views a simplicial set as multisimplicial data in one direction.
pub fn as_multi(x: &TruncSSet) -> MultiSSet {
    let mut m = MultiSSet { r: 1, d: x.dim_bound, ..Default::default() };
    for k in 0..=x.dim_bound {
        m.counts.insert(vec![k], x.counts[k]);
        for (i, t) in x.faces[k].iter().enumerate() {
            m.faces.insert((vec![k], 0, i), t.clone());
        }
        for (i, t) in x.degens[k].iter().enumerate() {
            m.degens.insert((vec![k], 0, i), t.clone());
        }
    }
    m.base = x.base.as_ref().map(|b| b.iter().enumerate().map(|(k, &v)| (vec![k], v)).collect());
    m
}

/// External product `X ⊠ Y`, a bisimplicial set with levels `X_p × Y_q`.
pub fn external_product(x: &TruncSSet, y: &TruncSSet) -> MultiSSet {
    let d = x.dim_bound.min(y.dim_bound);
    let mut m = MultiSSet { r: 2, d, ..Default::default() };
    for p in 0..=d {
        for q in 0..=d {
            let ny = y.counts[q];
            m.counts.insert(vec![p, q], x.counts[p] * ny);
            let pair = |a: u32, b: u32, ny: usize| (a as usize * ny + b as usize) as u32;
            for i in 0..x.faces[p].len() {
                let t = (0..x.counts[p] * ny).map(|s| pair(x.faces[p][i][s / ny], (s % ny) as u32, ny)).collect();
                m.faces.insert((vec![p, q], 0, i), t);
            }
            for i in 0..y.faces[q].len() {
                let nyy = y.counts[q - 1];
                let t = (0..x.counts[p] * ny).map(|s| pair((s / ny) as u32, y.faces[q][i][s % ny], nyy)).collect();
                m.faces.insert((vec![p, q], 1, i), t);
            }
            if p < d {
                for i in 0..x.degens[p].len() {
                    let t = (0..x.counts[p] * ny).map(|s| pair(x.degens[p][i][s / ny], (s % ny) as u32, ny)).collect();
                    m.degens.insert((vec![p, q], 0, i), t);
                }
            }
            if q < d {
                for i in 0..y.degens[q].len() {
                    let nyy = y.counts[q + 1];
                    let t = (0..x.counts[p] * ny).map(|s| pair((s / ny) as u32, y.degens[q][i][s % ny], nyy)).collect();
                    m.degens.insert((vec![p, q], 1, i), t);
                }
            }
        }
    }
    m
}

/// All points of `[m₁]×…×[mₙ]` in lexicographic order.
pub fn grid(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &m in dims {
        out = out.into_iter().flat_map(|p| (0..=m).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{product_category, FinCat};

    /// Independent model of the circle as Δ[1]/∂Δ[1]: the `q`-simplex `i` is
    /// the map `[q] → [1]` with exactly `i` zeros; constant maps are the
    /// basepoint.
    fn quotient_oracle(beta: &Monotone) -> Vec<usize> {
        let n = beta.n();
        (0..=beta.m)
            .map(|i| {
                if i == 0 {
                    return 0;
                }
                let zeros = (0..=n).filter(|&t| beta.at(t) < i).count();
                if zeros == 0 || zeros == n + 1 {
                    0
                } else {
                    zeros
                }
            })
            .collect()
    }

    #[test]
    fn circle_map_examples() {
        assert_eq!(circle_map(&Monotone::identity(3)), vec![0, 1, 2, 3]);
        assert_eq!(circle_map(&Monotone::new(2, vec![0, 2]).unwrap()), vec![0, 1, 1]);
        assert_eq!(circle_map(&Monotone::new(2, vec![1, 2]).unwrap()), vec![0, 0, 1]);
    }

    #[test]
    fn circle_map_matches_quotient_model() {
        for n in 0..=3 {
            for m in 0..=3 {
                for b in all_monotone(n, m) {
                    assert_eq!(circle_map(&b), quotient_oracle(&b), "{b:?}");
                }
            }
        }
    }

    #[test]
    fn circle_map_is_contravariant() {
        for p in 0..=3 {
            for n in 0..=3 {
                for m in 0..=3 {
                    for g in all_monotone(p, n) {
                        for b in all_monotone(n, m) {
                            let bg = b.after(&g);
                            let lhs = circle_map(&bg);
                            let (cb, cg) = (circle_map(&b), circle_map(&g));
                            let rhs: Vec<usize> = cb.iter().map(|&v| cg[v]).collect();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn circle_and_nerves_are_simplicial() {
        assert!(validate_simplicial(&circle(3)).is_clean());
        let t = nerve(&FinCat::terminal(), 3, Some(0));
        assert!(validate_simplicial(&t).is_clean());
        assert_eq!(t.counts, vec![1, 1, 1, 1]);
        let a = nerve(&FinCat::ordinal(1), 1, None);
        assert_eq!(a.counts, vec![2, 3]);
        let deg: usize = a.degens[0].iter().map(|t| t.len()).sum();
        assert_eq!(deg, 2);
        let disc = nerve(&FinCat::discrete(3), 2, None);
        assert_eq!(disc.counts, vec![3, 3, 3]);
    }

    #[test]
    fn mutated_face_is_reported() {
        let mut x = nerve(&FinCat::ordinal(2), 2, None);
        x.faces[2][1][0] = (x.faces[2][1][0] + 1) % x.counts[1] as u32;
        let r = validate_simplicial(&x);
        assert!(!r.is_ok());
    }

    #[test]
    fn nerve_of_product_counts() {
        let a = FinCat::ordinal(1);
        let b = FinCat::ordinal(2);
        let p = product_category(&[&a, &b]);
        let (na, nb, np) = (nerve(&a, 2, None), nerve(&b, 2, None), nerve(&p, 2, None));
        for k in 0..=2 {
            assert_eq!(np.counts[k], na.counts[k] * nb.counts[k]);
        }
    }

    #[test]
    fn diagonal_of_external_product_is_levelwise_product() {
        let a = nerve(&FinCat::ordinal(1), 2, None);
        let b = circle(2);
        let m = external_product(&a, &b);
        let dg = diagonal(&m, 2).unwrap();
        for q in 0..=2 {
            assert_eq!(dg.counts[q], a.counts[q] * b.counts[q]);
        }
        assert!(validate_simplicial(&dg).is_ok());
        let one = diagonal(&as_multi(&b), 2).unwrap();
        assert_eq!(one, b);
    }
}
