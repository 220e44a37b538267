//! Built-in Waldhausen categories: pointed finite sets and F₂ vector spaces,
//! both truncated by size, and smash products between pointed sets.

use crate::fincat::{Cat, FinCat};
use crate::wald::{KFunctor, KNatTrans, WaldStruct};
use std::collections::HashMap;

/// Pointed subsets of `{∗,1,…,N}` with all based maps.
#[derive(Clone, Debug)]
pub struct PointedSets {
    pub n: usize,
    pub ws: WaldStruct,
    masks: Vec<u32>,
    by_mask: HashMap<u32, u32>,
    maps: Vec<(u32, u32, Vec<u8>)>,
    index: HashMap<(u32, u32, Vec<u8>), u32>,
}

fn elems_of(mask: u32) -> Vec<u8> {
    (1..=31u8).filter(|&e| mask & (1 << (e - 1)) != 0).collect()
}

fn set_label(mask: u32) -> String {
    let mut parts = vec!["*".to_string()];
    parts.extend(elems_of(mask).iter().map(|e| e.to_string()));
    format!("{{{}}}", parts.join(","))
}

impl PointedSets {
    pub fn new(n: usize) -> PointedSets {
        assert!(n <= 6, "pointed sets fixture is meant to stay small");
        let mut masks: Vec<u32> = (0..1u32 << n).collect();
        masks.sort_by_key(|&m| (m.count_ones(), m));
        let by_mask: HashMap<u32, u32> = masks.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        let mut maps = Vec::new();
        let mut index = HashMap::new();
        for (x, &mx) in masks.iter().enumerate() {
            let ex = elems_of(mx);
            for (y, &my) in masks.iter().enumerate() {
                let mut targets = vec![0u8];
                targets.extend(elems_of(my));
                let mut img = vec![0usize; ex.len()];
                loop {
                    let v: Vec<u8> = img.iter().map(|&i| targets[i]).collect();
                    index.insert((x as u32, y as u32, v.clone()), maps.len() as u32);
                    maps.push((x as u32, y as u32, v));
                    let mut k = 0;
                    while k < img.len() {
                        img[k] += 1;
                        if img[k] < targets.len() {
                            break;
                        }
                        img[k] = 0;
                        k += 1;
                    }
                    if k == img.len() {
                        break;
                    }
                }
            }
        }
        let obj_labels: Vec<String> = masks.iter().map(|&m| set_label(m)).collect();
        let mor_labels = maps
            .iter()
            .map(|(x, y, v)| {
                let ex = elems_of(masks[*x as usize]);
                let body: Vec<String> = ex.iter().zip(v).map(|(a, b)| format!("{a}>{}", if *b == 0 { "*".into() } else { b.to_string() })).collect();
                format!("{}->{}[{}]", obj_labels[*x as usize], obj_labels[*y as usize], body.join(" "))
            })
            .collect();
        let src = maps.iter().map(|m| m.0).collect();
        let tgt = maps.iter().map(|m| m.1).collect();
        let ident = masks
            .iter()
            .enumerate()
            .map(|(x, &m)| index[&(x as u32, x as u32, elems_of(m))])
            .collect();
        let apply = |f: &(u32, u32, Vec<u8>), e: u8| -> u8 {
            if e == 0 {
                return 0;
            }
            let ex = elems_of(masks[f.0 as usize]);
            f.2[ex.iter().position(|&a| a == e).expect("element outside the domain")]
        };
        let cat = FinCat::build(obj_labels, mor_labels, src, tgt, ident, |g, f| {
            let (fm, gm) = (&maps[f as usize], &maps[g as usize]);
            let v: Vec<u8> = fm.2.iter().map(|&e| apply(gm, e)).collect();
            index[&(fm.0, gm.1, v)]
        });
        let cof = maps
            .iter()
            .map(|(_, _, v)| {
                let mut seen = v.clone();
                seen.sort_unstable();
                seen.dedup();
                !v.contains(&0) && seen.len() == v.len()
            })
            .collect();
        let sizes = masks.iter().map(|m| m.count_ones()).collect();
        let ws = WaldStruct::with_iso_weqs(format!("pointed_sets({n})"), cat, 0, cof).bounded(sizes, n as u32);
        PointedSets { n, ws, masks, by_mask, maps, index }
    }

    pub fn obj(&self, mask: u32) -> u32 {
        self.by_mask[&mask]
    }

    pub fn mask(&self, x: u32) -> u32 {
        self.masks[x as usize]
    }

    pub fn elems(&self, x: u32) -> Vec<u8> {
        elems_of(self.mask(x))
    }

    /// Image of `e` (0 for the basepoint) under morphism `f`.
    pub fn apply(&self, f: u32, e: u8) -> u8 {
        if e == 0 {
            return 0;
        }
        let (x, _, v) = &self.maps[f as usize];
        let ex = self.elems(*x);
        v[ex.iter().position(|&a| a == e).expect("element outside the domain")]
    }

    pub fn mor(&self, x: u32, y: u32, f: impl Fn(u8) -> u8) -> u32 {
        let v: Vec<u8> = self.elems(x).into_iter().map(f).collect();
        self.index[&(x, y, v)]
    }
}

pub fn fixture_pointed_sets(n: usize) -> WaldStruct {
    PointedSets::new(n).ws
}

/// Finite-dimensional F₂ vector spaces of dimension at most `N`, one object
/// per dimension, morphisms all matrices.
#[derive(Clone, Debug)]
pub struct VectF2 {
    pub n: usize,
    pub ws: WaldStruct,
    /// `(rows, cols, bits)`; entry `(r, c)` is bit `r*cols + c`.
    pub mats: Vec<(u32, u32, u32)>,
}

fn mat_mul(a: (u32, u32, u32), b: (u32, u32, u32)) -> (u32, u32, u32) {
    let (ar, ac, ab) = a;
    let (br, bc, bb) = b;
    assert_eq!(ac, br);
    let mut out = 0u32;
    for r in 0..ar {
        for c in 0..bc {
            let mut s = 0;
            for k in 0..ac {
                s ^= ((ab >> (r * ac + k)) & 1) & ((bb >> (k * bc + c)) & 1);
            }
            out |= s << (r * bc + c);
        }
    }
    (ar, bc, out)
}

fn rank(m: (u32, u32, u32)) -> u32 {
    let (rows, cols, bits) = m;
    let mut rs: Vec<u32> = (0..rows).map(|r| (bits >> (r * cols)) & ((1 << cols) - 1)).collect();
    let mut rk = 0;
    for c in 0..cols {
        if let Some(p) = (rk as usize..rs.len()).find(|&i| rs[i] & (1 << c) != 0) {
            rs.swap(rk as usize, p);
            for i in 0..rs.len() {
                if i != rk as usize && rs[i] & (1 << c) != 0 {
                    rs[i] ^= rs[rk as usize];
                }
            }
            rk += 1;
        }
    }
    rk
}

impl VectF2 {
    pub fn new(n: usize) -> VectF2 {
        assert!(n <= 3, "vector space fixture is meant to stay small");
        let mut mats = Vec::new();
        let mut index = HashMap::new();
        for src in 0..=n as u32 {
            for tgt in 0..=n as u32 {
                for bits in 0..1u32 << (src * tgt) {
                    index.insert((tgt, src, bits), mats.len() as u32);
                    mats.push((tgt, src, bits));
                }
            }
        }
        let obj_labels = (0..=n).map(|d| format!("F2^{d}")).collect();
        let mor_labels = mats.iter().map(|(r, c, b)| format!("F2^{c}->F2^{r}#{b}")).collect();
        let src = mats.iter().map(|m| m.1).collect();
        let tgt = mats.iter().map(|m| m.0).collect();
        let ident = (0..=n as u32)
            .map(|d| {
                let bits = (0..d).fold(0u32, |a, i| a | (1 << (i * d + i)));
                index[&(d, d, bits)]
            })
            .collect();
        let cat = FinCat::build(obj_labels, mor_labels, src, tgt, ident, |g, f| {
            index[&mat_mul(mats[g as usize], mats[f as usize])]
        });
        let cof = mats.iter().map(|&m| rank(m) == m.1).collect();
        let sizes = (0..=n as u32).collect();
        let ws = WaldStruct::with_iso_weqs(format!("vect_f2({n})"), cat, 0, cof).bounded(sizes, n as u32);
        VectF2 { n, ws, mats }
    }
}

pub fn fixture_vect_f2(n: usize) -> WaldStruct {
    VectF2::new(n).ws
}

/// `X ∧ Y` for pointed sets, with `(x, y) ↦ enc(x, y)` identifying the product
/// of non-basepoint elements with a subset of the target's elements.
pub fn smash_functor(a: &PointedSets, b: &PointedSets, c: &PointedSets, enc: impl Fn(u8, u8) -> u8) -> KFunctor {
    let smash_mask = |x: u32, y: u32| -> u32 {
        let mut m = 0;
        for ex in a.elems(x) {
            for ey in b.elems(y) {
                m |= 1 << (enc(ex, ey) - 1);
            }
        }
        m
    };
    let on_obj = |v: &[u32]| c.obj(smash_mask(v[0], v[1]));
    let decode = |e: u8| -> (u8, u8) {
        for ex in 1..=a.n as u8 {
            for ey in 1..=b.n as u8 {
                if enc(ex, ey) == e {
                    return (ex, ey);
                }
            }
        }
        panic!("element {e} is not in the image of the encoding")
    };
    let on_mor = |v: &[u32]| {
        let (f, g) = (v[0], v[1]);
        let x = c.obj(smash_mask(a.ws.src(f), b.ws.src(g)));
        let y = c.obj(smash_mask(a.ws.tgt(f), b.ws.tgt(g)));
        c.mor(x, y, |e| {
            let (ex, ey) = decode(e);
            let (fx, gy) = (a.apply(f, ex), b.apply(g, ey));
            if fx == 0 || gy == 0 {
                0
            } else {
                enc(fx, gy)
            }
        })
    };
    KFunctor::from_fn("smash", &[&a.ws.cat, &b.ws.cat], on_obj, on_mor)
}

/// `P(N) × P(1) → P(N)`, the smash with the two-point set.
pub fn smash_with_sphere(a: &PointedSets, s0: &PointedSets) -> KFunctor {
    assert_eq!(s0.n, 1);
    smash_functor(a, s0, a, |x, _| x)
}

/// `P(2) × P(2) → P(4)` with `(x, y) ↦ 2(x−1)+y`.
pub fn smash_square(p2: &PointedSets, p4: &PointedSets) -> KFunctor {
    assert_eq!((p2.n, p4.n), (2, 4));
    smash_functor(p2, p2, p4, |x, y| 2 * (x - 1) + y)
}

/// `(X, Y) ↦ Y ∧ X` on `P(2) × P(2) → P(4)`, the source of the twist.
pub fn smash_square_swapped(p2: &PointedSets, p4: &PointedSets) -> KFunctor {
    let mut f = smash_functor(p2, p2, p4, |x, y| 2 * (y - 1) + x);
    f.name = "smash-swapped".into();
    f
}

/// The twist `X ∧ Y → Y ∧ X` from [`smash_square`] to [`smash_square_swapped`].
pub fn smash_twist(p2: &PointedSets, p4: &PointedSets) -> KNatTrans {
    let f = smash_square(p2, p4);
    let g = smash_square_swapped(p2, p4);
    KNatTrans::from_fn("twist", &f.n_obj, |xs| {
        p4.mor(f.ob(xs), g.ob(xs), |e| {
            let (x, y) = ((e - 1) / 2 + 1, (e - 1) % 2 + 1);
            2 * (y - 1) + x
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{iso_classes, validate_fincat};

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |a, i| a * (n - i) / (i + 1))
    }

    /// Number of based maps between pointed subsets of {∗,1..N}.
    fn based_map_count(n: u64) -> u64 {
        let mut t = 0;
        for a in 0..=n {
            for b in 0..=n {
                t += binom(n, a) * binom(n, b) * (b + 1).pow(a as u32);
            }
        }
        t
    }

    #[test]
    fn pointed_set_counts() {
        for n in 1..=3 {
            let p = PointedSets::new(n);
            assert_eq!(p.ws.cat.n_obj(), 1 << n);
            assert_eq!(p.ws.cat.n_mor() as u64, based_map_count(n as u64));
        }
        assert_eq!(PointedSets::new(1).ws.cat.n_mor(), 5);
        assert_eq!(PointedSets::new(3).ws.cat.n_mor(), 406);
    }

    #[test]
    fn fixtures_are_categories() {
        for n in 0..=3 {
            assert!(validate_fincat(&PointedSets::new(n).ws.cat).is_clean());
        }
        for n in 0..=2 {
            assert!(validate_fincat(&VectF2::new(n).ws.cat).is_clean());
        }
    }

    #[test]
    fn vect_counts() {
        let v = VectF2::new(2);
        let c = &v.ws.cat;
        assert_eq!(c.hom_slice(1, 1).len(), 2);
        assert_eq!(c.hom_slice(2, 2).len(), 16);
        let invertible = c.hom_slice(2, 2).iter().filter(|&&f| v.ws.weq[f as usize]).count();
        assert_eq!(invertible, 6);
        let inj12 = c.hom_slice(1, 2).iter().filter(|&&f| v.ws.cof[f as usize]).count();
        assert_eq!(inj12, 3);
    }

    #[test]
    fn iso_classes_follow_cardinality() {
        let p = PointedSets::new(2);
        let sizes: Vec<usize> = iso_classes(&p.ws.cat).iter().map(|c| c.len()).collect();
        assert_eq!(sizes, vec![1, 2, 1]);
    }
}
