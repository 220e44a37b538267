//! The comparison `φ` from systems over `Λ(W)` to `S⁽ⁿ⁾` diagrams, its
//! naturality in `E` and in multiexact functors, and the π₀ and K₀
//! diagnostics.

use crate::ecat::{window_generators, window_objects, EMor};
use crate::fincat::{connected_components, iso_classes, Cat};
use crate::report::{Refusal, Report};
use crate::sdot::{act_comps, act_diagram, action_map, arrow, enumerate_sdot, validate_sdot, validate_sdot_morphism, SdotDiagram, SdotLevel, Shape};
use crate::segal::{
    act_system, act_system_comps, enumerate_segal_with, segal_action, segal_morphisms, validate_segal_system, validate_system_morphism, Ctx,
    SegalLevel, SegalSystem,
};
use crate::simplicial::circle_map;
use crate::wald::{tuples, KLinear, KNatTrans, Smc, WaldCat, WaldStruct};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

/// `(i, j] = {i+1,…,j}` as a bitmask.
pub fn interval(i: usize, j: usize) -> u32 {
    ((1u32 << j) - 1) & !((1u32 << i) - 1)
}

/// Shape and context of the same dimensions, with the tuple
/// `⟨(i₁,j₁],…,(iₙ,jₙ]⟩` of every shape object.
#[derive(Clone, Debug)]
pub struct PhiIndex {
    pub ctx: Ctx,
    pub shape: Shape,
    pub tuple: Vec<u32>,
}

impl PhiIndex {
    pub fn new(dims: &[usize]) -> PhiIndex {
        let ctx = Ctx::new(dims);
        let shape = Shape::new(dims);
        let tuple = shape
            .labels
            .iter()
            .map(|l| ctx.tuple(&l.iter().map(|&(i, j)| interval(i, j)).collect::<Vec<_>>()).unwrap())
            .collect();
        PhiIndex { ctx, shape, tuple }
    }
}

/// `A` on `(i,j) → (i′,j′)` in coordinate `k` at the object `a`:
/// `π₂ ∘ ρ⁻¹ ∘ ρ ∘ ι₁` through `C_{(i,j]} ∨ C_{(j,j′]}`, `C_{(i,j′]}` and
/// `C_{(i,i′]} ∨ C_{(i′,j′]}`.
fn step(s: &Smc, px: &PhiIndex, sys: &SegalSystem, a: u32, k: usize, to: (usize, usize)) -> Result<u32, String> {
    let w = s.w;
    let ctx = &px.ctx;
    let (i, j) = px.shape.labels[a as usize][k];
    let (i2, j2) = to;
    let x = px.tuple[a as usize];
    let c = |y: u32| sys.obj[y as usize];
    let at = |lo: usize, hi: usize| ctx.with(x, k, interval(lo, hi));
    let big = at(i, j2);
    let wit = |what: &str| format!("{what} at {:?}, coordinate {k} to {to:?}", px.shape.labels[a as usize]);
    let i1 = s.i1(c(x), c(at(j, j2))).ok_or_else(|| wit("no wedge for the inclusion"))?;
    let glue = sys.rho[ctx.rho(big, k, interval(i, j)) as usize];
    let split = s.inv(sys.rho[ctx.rho(big, k, interval(i, i2)) as usize]).ok_or_else(|| wit("gluing map not invertible"))?;
    let p2 = s.pi2(c(at(i, i2)), c(at(i2, j2))).ok_or_else(|| wit("no wedge for the projection"))?;
    w.comp(glue, i1)
        .and_then(|f| w.comp(split, f))
        .and_then(|f| w.comp(p2, f))
        .ok_or_else(|| wit("composite not typed"))
}

/// `φ` on objects: the diagram with entries `C_{⟨(i₁,j₁],…,(iₙ,jₙ]⟩}` and the
/// composite above on every covering edge.
pub fn phi_diagram(s: &Smc, px: &PhiIndex, sys: &SegalSystem) -> Result<SdotDiagram, String> {
    let sh = &px.shape;
    let obj = px.tuple.iter().map(|&x| sys.obj[x as usize]).collect();
    let mut edge = Vec::with_capacity(sh.edges.len());
    for &(a, b) in &sh.edges {
        let (la, lb) = (&sh.labels[a as usize], &sh.labels[b as usize]);
        let k = (0..la.len()).find(|&k| la[k] != lb[k]).unwrap();
        edge.push(step(s, px, sys, a, k, lb[k])?);
    }
    Ok(SdotDiagram { obj, edge })
}

/// `φ` on a system morphism: the component at `ij` is the component at
/// `⟨(i,j]⟩`.
pub fn phi_morphism(px: &PhiIndex, comps: &[u32]) -> Vec<u32> {
    px.tuple.iter().map(|&x| comps[x as usize]).collect()
}

#[derive(Clone, Debug)]
pub struct PhiResult {
    pub diagram: Option<SdotDiagram>,
    pub report: Report,
}

/// `φ` on one system, with the checks that it is well defined: direct
/// composites agree with composites of covering edges, the two orders of
/// moving in different coordinates agree, and the output is an `S⁽ⁿ⁾` object.
pub fn phi_object(s: &Smc, sys: &SegalSystem) -> PhiResult {
    let px = PhiIndex::new(&sys.context);
    phi_object_in(s, &px, sys)
}

pub fn phi_object_in(s: &Smc, px: &PhiIndex, sys: &SegalSystem) -> PhiResult {
    let w = s.w;
    let sh = &px.shape;
    let mut r = Report::new();
    let d = match phi_diagram(s, px, sys) {
        Ok(d) => d,
        Err(e) => {
            r.bound("phi-wedge", e);
            return PhiResult { diagram: None, report: r };
        }
    };
    for a in 0..sh.n_obj() as u32 {
        let la = &sh.labels[a as usize];
        for k in 0..la.len() {
            let (i, j) = la[k];
            for i2 in i..=sh.dims[k] {
                for j2 in j.max(i2)..=sh.dims[k] {
                    if i2 + j2 - i - j < 2 {
                        continue;
                    }
                    let mut lb = la.clone();
                    lb[k] = (i2, j2);
                    let b = sh.obj(&lb).unwrap();
                    match step(s, px, sys, a, k, (i2, j2)) {
                        Ok(f) => {
                            r.expect(f == arrow(w, sh, &d, a, b), "phi-composite", || format!("{la:?} -> {lb:?}"));
                        }
                        Err(e) => r.bound("phi-composite", e),
                    }
                }
            }
        }
        for k in 0..la.len() {
            for l in k + 1..la.len() {
                for &ek in &sh.outgoing[a as usize] {
                    for &el in &sh.outgoing[a as usize] {
                        let (bk, bl) = (sh.edges[ek as usize].1, sh.edges[el as usize].1);
                        let (lk, ll) = (&sh.labels[bk as usize], &sh.labels[bl as usize]);
                        if lk[k] == la[k] || lk[l] != la[l] || ll[l] == la[l] || ll[k] != la[k] {
                            continue;
                        }
                        let mut top = la.clone();
                        top[k] = lk[k];
                        top[l] = ll[l];
                        let t = sh.obj(&top).unwrap();
                        let via_k = w.comp(d.edge[sh.edge(bk, t).unwrap() as usize], d.edge[ek as usize]);
                        let via_l = w.comp(d.edge[sh.edge(bl, t).unwrap() as usize], d.edge[el as usize]);
                        r.expect(via_k.is_some() && via_k == via_l, "phi-factorization", || format!("{la:?} -> {top:?}"));
                    }
                }
            }
        }
    }
    let v = validate_sdot(w, sh, &d);
    r.merge(v);
    PhiResult { diagram: Some(d), report: r }
}

/// Identity, weak-equivalence preservation and naturality of `φ` on one
/// system morphism `a → b`.
pub fn check_phi_morphism(s: &Smc, px: &PhiIndex, a: &SegalSystem, b: &SegalSystem, comps: &[u32]) -> Report {
    let w = s.w;
    let mut r = Report::new();
    let (Ok(da), Ok(db)) = (phi_diagram(s, px, a), phi_diagram(s, px, b)) else {
        r.bound("phi-wedge", "endpoint outside the fixture");
        return r;
    };
    let t = phi_morphism(px, comps);
    r.merge(validate_sdot_morphism(w, &px.shape, &da, &db, &t));
    if comps.iter().all(|&f| w.is_weq(f)) {
        r.expect(t.iter().all(|&f| w.is_weq(f)), "phi-weq", || format!("{comps:?}"));
    }
    if a == b && comps.iter().zip(&a.obj).all(|(&f, &x)| f == w.id(x)) {
        r.expect(t.iter().zip(&da.obj).all(|(&f, &x)| f == w.id(x)), "phi-identity", || format!("{comps:?}"));
    }
    r
}

/// Systems of a context with their images and a set of morphisms on which
/// functors are compared.
struct Sample {
    px: PhiIndex,
    systems: Vec<SegalSystem>,
    images: Vec<SdotDiagram>,
    morphisms: Vec<(usize, usize, Vec<u32>)>,
}

/// All morphisms are compared when a context has at most this many systems,
/// otherwise every automorphism of every system.
pub const FULL_HOMS: usize = 256;

fn sample(s: &Smc, dims: &[usize], budget: u128, r: &mut Report) -> Option<Sample> {
    let e = match enumerate_segal_with(s, dims, budget) {
        Ok(e) => e,
        Err(refusal) => {
            r.bound("enumeration", refusal.to_string());
            return None;
        }
    };
    let px = PhiIndex::new(dims);
    let mut images = Vec::with_capacity(e.systems.len());
    for sys in &e.systems {
        match phi_diagram(s, &px, sys) {
            Ok(d) => images.push(d),
            Err(err) => {
                r.bound("phi-wedge", err);
                return None;
            }
        }
    }
    let n = e.systems.len();
    let mut morphisms = Vec::new();
    for a in 0..n {
        let targets: Vec<usize> = if n <= FULL_HOMS { (0..n).collect() } else { vec![a] };
        for b in targets {
            for m in segal_morphisms(s, &px.ctx, &e.systems[a], &e.systems[b], n > FULL_HOMS) {
                morphisms.push((a, b, m));
            }
        }
    }
    Some(Sample { px, systems: e.systems, images, morphisms })
}

/// `(β*)⁻¹(i,j] = (β(i),β(j)]` for every `0 ≤ i ≤ j ≤ n`.
fn preimage_identity(beta: &crate::simplicial::Monotone) -> bool {
    let c = circle_map(beta);
    let n = beta.n();
    (0..=n).all(|i| {
        (i..=n).all(|j| {
            let ij = interval(i, j);
            let pre = (1..c.len()).filter(|&e| c[e] != 0 && ij & (1 << (c[e] - 1)) != 0).fold(0, |acc, e| acc | 1 << (e - 1));
            pre == interval(beta.at(i), beta.at(j))
        })
    })
}

/// Both ways around the square `S⁽⁾(f) ∘ φ = φ ∘ Λ̄(f)` for every generator
/// of the window, on every system of the source context and on the sampled
/// morphisms.
pub fn check_e_naturality(s: &Smc, r_max: usize, d_max: usize, budget: u128) -> Report {
    let w = s.w;
    let mut r = Report::new();
    let mut samples: HashMap<Vec<usize>, Option<Sample>> = HashMap::new();
    let mut gens = window_generators(r_max, d_max);
    gens.sort_by(|a, b| (&a.src, &a.tgt).cmp(&(&b.src, &b.tgt)).then_with(|| a.cmp(b)));
    let mut n_systems = 0usize;
    let mut n_morphisms = 0usize;
    for f in &gens {
        if f.q == (0..f.src.len()).collect::<Vec<_>>() && f.src.len() == f.tgt.len() {
            for (k, beta) in f.betas.iter().enumerate() {
                r.expect(preimage_identity(beta), "preimage-identity", || format!("{f:?} coordinate {k}"));
            }
        }
        if !samples.contains_key(&f.src) {
            let smp = sample(s, &f.src, budget, &mut r);
            if let Some(smp) = &smp {
                n_systems += smp.systems.len();
                n_morphisms += smp.morphisms.len();
            }
            samples.insert(f.src.clone(), smp);
        }
        let Some(src) = &samples[&f.src] else { continue };
        let tgt = PhiIndex::new(&f.tgt);
        let smap = segal_action(f, &src.px.ctx, &tgt.ctx);
        let amap = action_map(f, &src.px.shape, &tgt.shape);
        let name = || format!("{:?} -> {:?} (q {:?})", f.src, f.tgt, f.q);
        for (n, sys) in src.systems.iter().enumerate() {
            let lhs = act_diagram(w, &src.px.shape, &tgt.shape, &amap, &src.images[n]);
            match phi_diagram(s, &tgt, &act_system(s, &tgt.ctx, &smap, sys)) {
                Ok(rhs) => {
                    r.expect(lhs == rhs, "e-naturality-object", || format!("{} on system {n}", name()));
                }
                Err(e) => r.bound("phi-wedge", e),
            }
        }
        for (a, b, comps) in &src.morphisms {
            let lhs = act_comps(w, &amap, &phi_morphism(&src.px, comps));
            let rhs = phi_morphism(&tgt, &act_system_comps(s, &smap, comps));
            r.expect(lhs == rhs, "e-naturality-morphism", || format!("{} on {a} -> {b}", name()));
        }
    }
    r.note(format!("{} generators, {} systems, {} morphisms", gens.len(), n_systems, n_morphisms));
    r
}

/// One naturality instance for a single generator, for targeted use.
pub fn check_e_generator(s: &Smc, f: &EMor, sys: &SegalSystem) -> Report {
    let w = s.w;
    let mut r = Report::new();
    let (src, tgt) = (PhiIndex::new(&f.src), PhiIndex::new(&f.tgt));
    let pushed = act_system(s, &tgt.ctx, &segal_action(f, &src.ctx, &tgt.ctx), sys);
    match (phi_diagram(s, &src, sys), phi_diagram(s, &tgt, &pushed)) {
        (Ok(d), Ok(rhs)) => {
            let lhs = act_diagram(w, &src.shape, &tgt.shape, &action_map(f, &src.shape, &tgt.shape), &d);
            r.expect(lhs == rhs, "e-naturality-object", || format!("{f:?}"));
        }
        (Err(e), _) | (_, Err(e)) => r.bound("phi-wedge", e),
    }
    r
}

// ---------------------------------------------------------------------------
// Multiexact functors

/// Splits a tuple of the concatenated context into its slot parts.
fn split<T: Clone>(v: &[T], lens: &[usize]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut at = 0;
    for &n in lens {
        out.push(v[at..at + n].to_vec());
        at += n;
    }
    out
}

/// `Λ̄F` on a tuple of systems: `D_{⟨S₁⟩⊙…⊙⟨S_k⟩} = F(C¹_⟨S₁⟩,…,C^k_⟨S_k⟩)`
/// with gluing maps `F(…ρ…) ∘ δ`.
pub fn lambda_bar(kl: &KLinear, systems: &[&SegalSystem]) -> Result<SegalSystem, String> {
    let lens: Vec<usize> = systems.iter().map(|s| s.context.len()).collect();
    let dims: Vec<usize> = systems.iter().flat_map(|s| s.context.clone()).collect();
    let ctx = Ctx::new(&dims);
    let slots: Vec<Ctx> = systems.iter().map(|s| Ctx::new(&s.context)).collect();
    let parts = |x: u32| -> Vec<u32> {
        split(&ctx.tuples[x as usize], &lens).iter().zip(&slots).map(|(t, c)| c.tuple(t).unwrap()).collect()
    };
    let objs = |xs: &[u32]| -> Vec<u32> { xs.iter().zip(systems).map(|(&x, s)| s.obj[x as usize]).collect() };
    let obj: Vec<u32> = (0..ctx.n_tuples() as u32).map(|x| kl.f.ob(&objs(&parts(x)))).collect();
    let mut rho = Vec::with_capacity(ctx.rho_keys.len());
    for &(x, i, t) in &ctx.rho_keys {
        let xs = parts(x);
        let (mut slot, mut local) = (0, i);
        while local >= lens[slot] {
            local -= lens[slot];
            slot += 1;
        }
        let sc = &slots[slot];
        let sys = systems[slot];
        let u = sc.tuples[xs[slot] as usize][local] & !t;
        let (ct, cu) = (sys.obj[sc.with(xs[slot], local, t) as usize], sys.obj[sc.with(xs[slot], local, u) as usize]);
        let here = objs(&xs);
        let delta = kl.delta(slot, &here, ct, cu).ok_or_else(|| format!("no distributivity map at {:?} slot {slot}", ctx.tuples[x as usize]))?;
        let f_rho = kl.slot_mor(slot, &here, sys.rho[sc.rho(xs[slot], local, t) as usize]);
        rho.push(kl.tgt.w.comp(f_rho, delta).ok_or_else(|| format!("gluing map not typed at {:?}", ctx.tuples[x as usize]))?);
    }
    Ok(SegalSystem { context: dims, obj, rho })
}

/// `S⁽⁾F` on a tuple of diagrams: entries `F(A¹(l₁),…,A^k(l_k))`.
pub fn sdot_apply(kl: &KLinear, shapes: &[&Shape], diagrams: &[&SdotDiagram]) -> SdotDiagram {
    let lens: Vec<usize> = shapes.iter().map(|s| s.dims.len()).collect();
    let dims: Vec<usize> = shapes.iter().flat_map(|s| s.dims.clone()).collect();
    let sh = Shape::new(&dims);
    let parts = |a: u32| -> Vec<u32> {
        split(&sh.labels[a as usize], &lens).iter().zip(shapes).map(|(l, s)| s.obj(l).unwrap()).collect()
    };
    let objs = |xs: &[u32]| -> Vec<u32> { xs.iter().zip(diagrams).map(|(&x, d)| d.obj[x as usize]).collect() };
    let obj = (0..sh.n_obj() as u32).map(|a| kl.f.ob(&objs(&parts(a)))).collect();
    let edge = sh
        .edges
        .iter()
        .map(|&(a, b)| {
            let (pa, pb) = (parts(a), parts(b));
            let slot = (0..pa.len()).find(|&t| pa[t] != pb[t]).unwrap();
            let e = shapes[slot].edge(pa[slot], pb[slot]).unwrap();
            kl.slot_mor(slot, &objs(&pa), diagrams[slot].edge[e as usize])
        })
        .collect();
    SdotDiagram { obj, edge }
}

/// Per-slot enumeration over the window, cached by context.
fn slot_systems<'s>(
    s: &Smc,
    cache: &'s mut HashMap<Vec<usize>, Result<Vec<SegalSystem>, Refusal>>,
    dims: &[usize],
    budget: u128,
) -> &'s Result<Vec<SegalSystem>, Refusal> {
    cache.entry(dims.to_vec()).or_insert_with(|| enumerate_segal_with(s, dims, budget).map(|e| e.systems))
}

/// Every tuple of systems over every tuple of window contexts, one slot per
/// source of `kl`.
fn system_tuples(kl: &KLinear, r_max: usize, d_max: usize, budget: u128, r: &mut Report) -> Vec<Vec<SegalSystem>> {
    let k = kl.src.len();
    let objs = window_objects(r_max, d_max);
    let mut out = Vec::new();
    let mut caches: Vec<HashMap<Vec<usize>, Result<Vec<SegalSystem>, Refusal>>> = (0..k).map(|_| HashMap::new()).collect();
    for pick in tuples(&vec![objs.len(); k]) {
        let mut per_slot = Vec::new();
        for (slot, &p) in pick.iter().enumerate() {
            match slot_systems(kl.src[slot], &mut caches[slot], &objs[p as usize], budget) {
                Ok(v) => per_slot.push(v.clone()),
                Err(e) => {
                    r.bound("enumeration", e.to_string());
                    per_slot.clear();
                    break;
                }
            }
        }
        if per_slot.len() != k {
            continue;
        }
        for idx in tuples(&per_slot.iter().map(|v| v.len()).collect::<Vec<_>>()) {
            out.push(idx.iter().enumerate().map(|(slot, &i)| per_slot[slot][i as usize].clone()).collect());
        }
    }
    out
}

/// `φ_D ∘ Λ̄F = S⁽⁾F ∘ (φ_{C₁}×…×φ_{C_k})` on every tuple of systems over the
/// window contexts.
pub fn check_multinaturality(kl: &KLinear, r_max: usize, d_max: usize, budget: u128) -> Report {
    let mut r = Report::new();
    let all = system_tuples(kl, r_max, d_max, budget, &mut r);
    for syss in &all {
        let refs: Vec<&SegalSystem> = syss.iter().collect();
        let wit = || format!("{:?}", syss.iter().map(|s| &s.context).collect::<Vec<_>>());
        let top = match lambda_bar(kl, &refs) {
            Ok(t) => t,
            Err(e) => {
                r.bound("lambda-bar", e);
                continue;
            }
        };
        let v = validate_segal_system(kl.tgt, &top);
        r.expect(v.is_ok(), "lambda-bar-system", || format!("{} {v}", wit()));
        let pxs: Vec<PhiIndex> = syss.iter().map(|s| PhiIndex::new(&s.context)).collect();
        let mut lower = Vec::new();
        for ((sys, px), smc) in syss.iter().zip(&pxs).zip(&kl.src) {
            match phi_diagram(smc, px, sys) {
                Ok(d) => lower.push(d),
                Err(e) => r.bound("phi-wedge", e),
            }
        }
        let px = PhiIndex::new(&top.context);
        let upper = match phi_diagram(kl.tgt, &px, &top) {
            Ok(d) => d,
            Err(e) => {
                r.bound("phi-wedge", e);
                continue;
            }
        };
        if lower.len() != syss.len() {
            continue;
        }
        let shapes: Vec<&Shape> = pxs.iter().map(|p| &p.shape).collect();
        let other = sdot_apply(kl, &shapes, &lower.iter().collect::<Vec<_>>());
        r.expect(upper == other, "multinaturality", wit);
    }
    r.note(format!("{} system tuples", all.len()));
    r
}

/// For `mu: F ⇒ G`, `φ_D ∘ Λ̄mu` equals `S⁽⁾mu ∘ (φ×…×φ)` componentwise, and
/// both are morphisms of the expected type.
pub fn check_modification(mu: &KNatTrans, kf: &KLinear, kg: &KLinear, r_max: usize, d_max: usize, budget: u128) -> Report {
    let w = kf.tgt.w;
    let mut r = Report::new();
    let all = system_tuples(kf, r_max, d_max, budget, &mut r);
    for syss in &all {
        let refs: Vec<&SegalSystem> = syss.iter().collect();
        let wit = || format!("{:?}", syss.iter().map(|s| &s.context).collect::<Vec<_>>());
        let (Ok(df), Ok(dg)) = (lambda_bar(kf, &refs), lambda_bar(kg, &refs)) else {
            r.bound("lambda-bar", wit());
            continue;
        };
        let lens: Vec<usize> = syss.iter().map(|s| s.context.len()).collect();
        let slots: Vec<Ctx> = syss.iter().map(|s| Ctx::new(&s.context)).collect();
        let ctx = Ctx::new(&df.context);
        let lam_mu: Vec<u32> = (0..ctx.n_tuples())
            .map(|x| {
                let xs: Vec<u32> = split(&ctx.tuples[x], &lens)
                    .iter()
                    .zip(&slots)
                    .zip(syss)
                    .map(|((t, c), s)| s.obj[c.tuple(t).unwrap() as usize])
                    .collect();
                mu.at(&xs)
            })
            .collect();
        let v = validate_system_morphism(kf.tgt, &df, &dg, &lam_mu);
        r.expect(v.is_ok(), "lambda-bar-morphism", || format!("{} {v}", wit()));
        let px = PhiIndex::new(&df.context);
        let upper = phi_morphism(&px, &lam_mu);
        let pxs: Vec<PhiIndex> = syss.iter().map(|s| PhiIndex::new(&s.context)).collect();
        let mut lower = Vec::new();
        for ((sys, p), smc) in syss.iter().zip(&pxs).zip(&kf.src) {
            if let Ok(d) = phi_diagram(smc, p, sys) {
                lower.push(d);
            }
        }
        if lower.len() != syss.len() {
            r.bound("phi-wedge", wit());
            continue;
        }
        let sh = &px.shape;
        let shapes: Vec<&Shape> = pxs.iter().map(|p| &p.shape).collect();
        let other: Vec<u32> = sh
            .labels
            .iter()
            .map(|l| {
                let xs: Vec<u32> =
                    split(l, &lens).iter().zip(&shapes).zip(&lower).map(|((lp, s), d)| d.obj[s.obj(lp).unwrap() as usize]).collect();
                mu.at(&xs)
            })
            .collect();
        r.expect(upper == other, "modification", wit);
        let (Ok(a), Ok(b)) = (phi_diagram(kf.tgt, &px, &df), phi_diagram(kg.tgt, &px, &dg)) else {
            r.bound("phi-wedge", wit());
            continue;
        };
        let v = validate_sdot_morphism(w, sh, &a, &b, &other);
        r.expect(v.is_ok(), "whiskered-natural", || format!("{} {v}", wit()));
    }
    r.note(format!("{} system tuples", all.len()));
    r
}

// ---------------------------------------------------------------------------
// Components and K₀

/// Whether every cofibration has a retraction.
pub fn cofibrations_split(w: &WaldStruct) -> Result<(), String> {
    for f in w.cat.morphisms() {
        if w.is_cof(f) && !w.hom(w.tgt(f), w.src(f)).iter().any(|&g| w.comp(g, f) == Some(w.id(w.src(f)))) {
            return Err(format!("cofibration {} has no retraction", w.mor_name(f)));
        }
    }
    Ok(())
}

/// Compares components of the weak-equivalence subcategories of the system
/// category at `⟨m⟩` and of `S_m W` along `φ`.
pub fn pi0_comparison(s: &Smc, m: usize) -> Report {
    let w = s.w;
    let mut r = Report::new();
    if let Err(e) = cofibrations_split(w) {
        r.skip(e);
        return r;
    }
    let (seg, sd) = match (SegalLevel::new(s, &[m], true), SdotLevel::new(w, &[m], true)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            r.bound("enumeration", e.to_string());
            return r;
        }
    };
    let px = PhiIndex::new(&[m]);
    let mut image = Vec::with_capacity(seg.n_obj());
    for x in 0..seg.n_obj() as u32 {
        let d = match phi_diagram(s, &px, seg.system(x)) {
            Ok(d) => d,
            Err(e) => {
                r.bound("phi-wedge", e);
                return r;
            }
        };
        match sd.lookup(&d) {
            Some(y) => image.push(y),
            None => {
                r.fail("phi-lands", format!("system {x}"));
                return r;
            }
        }
        r.tick();
    }
    let (cs, cd) = (connected_components(&seg), connected_components(&sd));
    let comp_of = |cls: &[Vec<u32>], n: usize| {
        let mut v = vec![0usize; n];
        for (i, c) in cls.iter().enumerate() {
            for &x in c {
                v[x as usize] = i;
            }
        }
        v
    };
    let (ks, kd) = (comp_of(&cs, seg.n_obj()), comp_of(&cd, sd.n_obj()));
    let mut induced: Vec<Option<usize>> = vec![None; cs.len()];
    for (x, &y) in image.iter().enumerate() {
        let slot = &mut induced[ks[x]];
        let ok = slot.is_none_or(|c| c == kd[y as usize]);
        r.expect(ok, "pi0-well-defined", || format!("component {}", ks[x]));
        *slot = Some(kd[y as usize]);
    }
    let hit: BTreeSet<usize> = induced.iter().flatten().copied().collect();
    r.expect(hit.len() == cs.len(), "pi0-injective", || format!("{} components onto {} images", cs.len(), hit.len()));
    r.expect(hit.len() == cd.len(), "pi0-surjective", || format!("{} of {} components hit", hit.len(), cd.len()));
    let objects: BTreeSet<u32> = image.iter().copied().collect();
    r.note(format!(
        "m = {m}: {} systems in {} components, {} diagrams in {} components, {} diagrams in the image",
        seg.n_obj(),
        cs.len(),
        sd.n_obj(),
        cd.len(),
        objects.len()
    ));
    r
}

/// Rank and torsion of a finitely generated abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbGroup {
    pub rank: usize,
    pub torsion: Vec<i128>,
}

/// Generators (iso classes) and relations of the K₀ presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Presentation {
    pub generators: Vec<Vec<u32>>,
    pub relations: Vec<Vec<i128>>,
}

/// Invariant factors of an integer matrix, in divisibility order, zeros
/// dropped.
pub fn smith_diagonal(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            let (pi, pj) = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| (i == t || j == t) && a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs())
                .unwrap();
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

pub fn k0_presentation<W: WaldCat + ?Sized>(w: &W) -> Result<Presentation, Refusal> {
    let generators = iso_classes(w);
    let mut class = vec![0usize; w.n_obj()];
    for (i, c) in generators.iter().enumerate() {
        for &x in c {
            class[x as usize] = i;
        }
    }
    let n = generators.len();
    let mut rels: BTreeSet<Vec<i128>> = BTreeSet::new();
    let mut zero = vec![0; n];
    zero[class[w.zero() as usize]] = 1;
    rels.insert(zero);
    let sh = Shape::new(&[2]);
    let (a01, a02, a12) = (sh.obj(&[(0, 1)]).unwrap(), sh.obj(&[(0, 2)]).unwrap(), sh.obj(&[(1, 2)]).unwrap());
    for d in enumerate_sdot(w, &sh)?.diagrams {
        let mut v = vec![0; n];
        v[class[d.obj[a02 as usize] as usize]] += 1;
        v[class[d.obj[a01 as usize] as usize]] -= 1;
        v[class[d.obj[a12 as usize] as usize]] -= 1;
        if v.iter().any(|&e| e != 0) {
            rels.insert(v);
        }
    }
    Ok(Presentation { generators, relations: rels.into_iter().collect() })
}

/// `K₀` as the group on iso classes modulo `[∗] = 0` and
/// `[A₀₂] = [A₀₁] + [A₁₂]` for every object of `S₂`.
pub fn k0<W: WaldCat + ?Sized>(w: &W) -> Result<AbGroup, Refusal> {
    let p = k0_presentation(w)?;
    Ok(quotient(p.generators.len(), p.relations))
}

/// `ℤⁿ` modulo the span of `relations`.
pub fn quotient(n: usize, relations: Vec<Vec<i128>>) -> AbGroup {
    let diag = smith_diagonal(relations);
    AbGroup { rank: n - diag.len(), torsion: diag.into_iter().filter(|&d| d > 1).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_pointed_sets, fixture_vect_f2, smash_square, smash_square_swapped, smash_twist, smash_with_sphere, PointedSets};
    use crate::sdot::BUDGET;
    use crate::segal::enumerate_segal;
    use crate::wald::{default_wedge_choice, lambda, lambda_on_multiexact, KFunctor};
    use proptest::prelude::*;

    #[test]
    fn intervals() {
        assert_eq!(interval(0, 0), 0);
        assert_eq!(interval(0, 2), 0b11);
        assert_eq!(interval(1, 3), 0b110);
    }

    #[test]
    fn flag_of_a_wedge() {
        let p = PointedSets::new(3);
        let w = &p.ws;
        let s = lambda(w, default_wedge_choice(w));
        let (x, y) = (p.obj(0b1), p.obj(0b10));
        let xy = s.obj(x, y).unwrap();
        let ctx = Ctx::new(&[2]);
        let mut sys = crate::segal::basepoint_system(&s, &ctx);
        let (c1, c2, c12) = (ctx.tuple(&[1]).unwrap(), ctx.tuple(&[2]).unwrap(), ctx.tuple(&[3]).unwrap());
        sys.obj[c1 as usize] = x;
        sys.obj[c2 as usize] = y;
        sys.obj[c12 as usize] = xy;
        for (k, &(t, _, _)) in ctx.rho_keys.iter().enumerate() {
            sys.rho[k] = w.id(sys.obj[t as usize]);
        }
        let g = s.gamma(y, x).unwrap();
        sys.rho[ctx.rho(c12, 0, 0b10) as usize] = g;
        assert!(validate_segal_system(&s, &sys).is_ok());
        let res = phi_object(&s, &sys);
        assert!(res.report.is_clean(), "{}", res.report);
        let d = res.diagram.unwrap();
        let sh = Shape::new(&[2]);
        let at = |l: &[(usize, usize)]| sh.obj(l).unwrap();
        assert_eq!(d.obj[at(&[(0, 1)]) as usize], x);
        assert_eq!(d.obj[at(&[(0, 2)]) as usize], xy);
        assert_eq!(d.obj[at(&[(1, 2)]) as usize], y);
        assert_eq!(d.edge[sh.edge(at(&[(0, 1)]), at(&[(0, 2)])).unwrap() as usize], s.i1(x, y).unwrap());
        assert_eq!(d.edge[sh.edge(at(&[(0, 2)]), at(&[(1, 2)])).unwrap() as usize], s.pi2(x, y).unwrap());
    }

    #[test]
    fn phi_is_well_defined_on_pointed_sets() {
        let w = fixture_pointed_sets(3);
        let s = lambda(&w, default_wedge_choice(&w));
        for dims in [vec![1], vec![2], vec![1, 1], vec![2, 1]] {
            let e = enumerate_segal(&s, &dims).unwrap();
            let px = PhiIndex::new(&dims);
            for sys in &e.systems {
                let res = phi_object_in(&s, &px, sys);
                assert!(res.report.is_clean(), "{dims:?}: {}", res.report);
            }
        }
    }

    #[test]
    fn phi_on_morphisms() {
        let w = fixture_vect_f2(2);
        let s = lambda(&w, default_wedge_choice(&w));
        let ctx = Ctx::new(&[2]);
        let px = PhiIndex::new(&[2]);
        let sys = enumerate_segal(&s, &[2]).unwrap().systems;
        for a in sys.iter().step_by(7) {
            for b in sys.iter().step_by(5) {
                for m in segal_morphisms(&s, &ctx, a, b, false) {
                    let r = check_phi_morphism(&s, &px, a, b, &m);
                    assert!(r.is_clean(), "{r}");
                    for c in sys.iter().step_by(11) {
                        for m2 in segal_morphisms(&s, &ctx, b, c, false) {
                            let comp: Vec<u32> = m.iter().zip(&m2).map(|(&f, &g)| w.c(g, f)).collect();
                            let lhs = phi_morphism(&px, &comp);
                            let (p1, p2) = (phi_morphism(&px, &m), phi_morphism(&px, &m2));
                            let rhs: Vec<u32> = p1.iter().zip(&p2).map(|(&f, &g)| w.c(g, f)).collect();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extension_of_phi() {
        use crate::sdot::extend_sdot;
        use crate::segal::segal_restrict;
        let w = fixture_pointed_sets(3);
        let s = lambda(&w, default_wedge_choice(&w));
        let px = PhiIndex::new(&[2, 1]);
        let px2 = PhiIndex::new(&[2]);
        for sys in enumerate_segal(&s, &[2, 1]).unwrap().systems {
            let big = phi_diagram(&s, &px, &sys).unwrap();
            let small = phi_diagram(&s, &px2, &segal_restrict(&sys)).unwrap();
            assert_eq!(extend_sdot(&w, &[2], &small), big);
        }
    }

    #[test]
    fn naturality_on_small_windows() {
        for w in [fixture_pointed_sets(2), fixture_vect_f2(2)] {
            let s = lambda(&w, default_wedge_choice(&w));
            let r = check_e_naturality(&s, 2, 1, BUDGET);
            assert!(r.is_clean() && r.checked > 0, "{r}");
        }
        let w = fixture_pointed_sets(3);
        let s = lambda(&w, default_wedge_choice(&w));
        let swap = EMor::perm(&[1, 1], &[1, 0]);
        for sys in enumerate_segal(&s, &[1, 1]).unwrap().systems {
            assert!(check_e_generator(&s, &swap, &sys).is_clean());
        }
    }

    #[test]
    fn multinaturality_and_modification() {
        let p1 = PointedSets::new(1);
        let p2 = PointedSets::new(2);
        let p3 = PointedSets::new(3);
        let p4 = PointedSets::new(4);
        let (s1, s2, s3, s4) = (
            lambda(&p1.ws, default_wedge_choice(&p1.ws)),
            lambda(&p2.ws, default_wedge_choice(&p2.ws)),
            lambda(&p3.ws, default_wedge_choice(&p3.ws)),
            lambda(&p4.ws, default_wedge_choice(&p4.ws)),
        );
        let id = KFunctor::identity(&p3.ws.cat);
        let kid = lambda_on_multiexact(&id, vec![&s3], &s3);
        let r = check_multinaturality(&kid, 1, 2, BUDGET);
        assert!(r.is_clean() && r.checked > 0, "{r}");
        let r = check_modification(&KNatTrans::identity(&id, &p3.ws.cat), &kid, &kid, 1, 1, BUDGET);
        assert!(r.is_clean() && r.checked > 0, "{r}");

        let sm = smash_with_sphere(&p3, &p1);
        let ksm = lambda_on_multiexact(&sm, vec![&s3, &s1], &s3);
        let r = check_multinaturality(&ksm, 1, 1, BUDGET);
        assert!(r.is_clean() && r.checked > 0, "{r}");

        let (f, g) = (smash_square(&p2, &p4), smash_square_swapped(&p2, &p4));
        let mu = smash_twist(&p2, &p4);
        assert!(crate::wald::validate_k_nat_trans(&mu, &f, &g, &[&p2.ws, &p2.ws], &p4.ws).is_ok());
        let (kf, kg) = (lambda_on_multiexact(&f, vec![&s2, &s2], &s4), lambda_on_multiexact(&g, vec![&s2, &s2], &s4));
        let r = check_multinaturality(&kf, 1, 2, BUDGET);
        assert!(r.is_clean() && r.checked > 0, "{r}");
        let r = check_modification(&mu, &kf, &kg, 1, 2, BUDGET);
        assert!(r.is_clean() && r.checked > 0, "{r}");
    }

    #[test]
    fn smash_is_a_multimorphism_of_windows() {
        use crate::ecat::validate_multimorphism;
        let (p1, p2) = (PointedSets::new(1), PointedSets::new(2));
        let (s1, s2) = (lambda(&p1.ws, default_wedge_choice(&p1.ws)), lambda(&p2.ws, default_wedge_choice(&p2.ws)));
        let sm = smash_with_sphere(&p2, &p1);
        let kl = lambda_on_multiexact(&sm, vec![&s2, &s1], &s2);
        let (r, d) = (1, 2);
        let sd = |ws| -> HashMap<Vec<usize>, SdotLevel<WaldStruct>> {
            window_objects(r, d).into_iter().map(|m| (m.clone(), SdotLevel::new(ws, &m, false).unwrap())).collect()
        };
        let (x1, x2) = (sd(&p2.ws), sd(&p1.ws));
        let y: HashMap<Vec<usize>, SdotLevel<WaldStruct>> =
            window_objects(2 * r, d).into_iter().map(|m| (m.clone(), SdotLevel::new(&p2.ws, &m, false).unwrap())).collect();
        let rep = validate_multimorphism(&[&x1, &x2], &y, |ctxs, xs| {
            let (a, b) = (&x1[ctxs[0]], &x2[ctxs[1]]);
            let shapes = [&Shape::new(ctxs[0]), &Shape::new(ctxs[1])];
            let d = sdot_apply(&kl, &shapes, &[a.diagram(xs[0]), b.diagram(xs[1])]);
            let key: Vec<usize> = ctxs.iter().flat_map(|c| c.iter().copied()).collect();
            y[&key].lookup(&d).expect("image is an S-object")
        });
        assert!(rep.is_clean() && rep.checked > 0, "{rep}");

        let sg = |s| -> HashMap<Vec<usize>, SegalLevel> {
            window_objects(r, d).into_iter().map(|m| (m.clone(), SegalLevel::new(s, &m, false).unwrap())).collect()
        };
        let (z1, z2) = (sg(&s2), sg(&s1));
        let yz: HashMap<Vec<usize>, SegalLevel> =
            window_objects(2 * r, d).into_iter().map(|m| (m.clone(), SegalLevel::new(&s2, &m, false).unwrap())).collect();
        let rep = validate_multimorphism(&[&z1, &z2], &yz, |ctxs, xs| {
            let top = lambda_bar(&kl, &[z1[ctxs[0]].system(xs[0]), z2[ctxs[1]].system(xs[1])]).unwrap();
            yz[&top.context].lookup(&top).expect("image is a system")
        });
        assert!(rep.is_clean() && rep.checked > 0, "{rep}");
    }

    #[test]
    fn constant_functor() {
        let p2 = PointedSets::new(2);
        let s2 = lambda(&p2.ws, default_wedge_choice(&p2.ws));
        let x = p2.obj(0b11);
        let k = KFunctor::from_fn("const", &[], |_| x, |_| p2.ws.id(x));
        let kl = lambda_on_multiexact(&k, vec![], &s2);
        let top = lambda_bar(&kl, &[]).unwrap();
        assert_eq!(top.obj, vec![x]);
        let r = check_multinaturality(&kl, 1, 1, BUDGET);
        assert!(r.is_clean() && r.checked == 2, "{r}");
    }

    #[test]
    fn components() {
        for w in [fixture_pointed_sets(3), fixture_vect_f2(2)] {
            let s = lambda(&w, default_wedge_choice(&w));
            for m in 0..=2 {
                let r = pi0_comparison(&s, m);
                assert!(r.is_clean(), "{} m={m}: {r}", w.name);
            }
            let r = pi0_comparison(&s, 1);
            let classes = iso_classes(&w).len();
            assert!(r.notes[0].contains(&format!("in {classes} components")), "{:?}", r.notes);
        }
    }

    #[test]
    fn k0_of_fixtures() {
        for w in [fixture_pointed_sets(3), fixture_vect_f2(2)] {
            assert_eq!(k0(&w).unwrap(), AbGroup { rank: 1, torsion: vec![] });
        }
        let t = fixture_pointed_sets(1);
        let p = k0_presentation(&t).unwrap();
        assert_eq!(p.generators.len(), 2);
    }

    #[test]
    fn smith_examples() {
        assert_eq!(smith_diagonal(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
        assert_eq!(quotient(2, vec![vec![2, 0]]), AbGroup { rank: 1, torsion: vec![2] });
        assert_eq!(quotient(1, vec![]), AbGroup { rank: 1, torsion: vec![] });
        assert_eq!(quotient(3, vec![vec![1, 0, 0], vec![0, 1, -1], vec![0, 2, -2]]), AbGroup { rank: 1, torsion: vec![] });
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }

    fn det(m: &[Vec<i128>]) -> i128 {
        if m.is_empty() {
            return 1;
        }
        (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum()
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n).filter(|b| b.count_ones() as usize == k).map(|b| (0..n).filter(|&i| b >> i & 1 == 1).collect()).collect()
    }

    /// The `k`-th determinantal divisor: gcd of all `k×k` minors.
    fn divisor(a: &[Vec<i128>], k: usize) -> i128 {
        let cols = a[0].len();
        let mut g = 0;
        for rs in subsets(a.len(), k) {
            for cs in subsets(cols, k) {
                let m: Vec<Vec<i128>> = rs.iter().map(|&i| cs.iter().map(|&j| a[i][j]).collect()).collect();
                g = gcd(g, det(&m));
            }
        }
        g
    }

    proptest! {
        #[test]
        fn smith_matches_determinantal_divisors(a in prop::collection::vec(prop::collection::vec(-6i128..=6, 3), 1..=4)) {
            let d = smith_diagonal(a.clone());
            for w in d.windows(2) {
                prop_assert_eq!(w[1] % w[0], 0);
            }
            let mut prod = 1;
            for k in 1..=a.len().min(3) {
                let dk = divisor(&a, k);
                if k <= d.len() {
                    prod *= d[k - 1];
                    prop_assert_eq!(prod, dk);
                } else {
                    prop_assert_eq!(dk, 0);
                }
            }
        }
    }
}
