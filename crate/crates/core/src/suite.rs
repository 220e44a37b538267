//! Fixture files, planted faults, and the check suite behind the CLI.

use crate::compare::{
    check_e_naturality, check_modification, check_multinaturality, cofibrations_split, k0, phi_object_in,
    pi0_comparison, PhiIndex,
};
use crate::ecat::{validate_estar_window, window_objects, EMor, Level, Patched, WindowPatch};
use crate::fincat::{iso_classes, isos, validate_fincat, Cat, Cocone, FinCat, RawCat};
use crate::fixtures::{smash_square, smash_square_swapped, smash_twist, smash_with_sphere, PointedSets, VectF2};
use crate::report::{Report, Verdict};
use crate::sdot::{enumerate_sdot, extend_sdot, iterated_agreement, restrict_sdot, wald_k_level, SdotLevel, Shape, BUDGET};
use crate::segal::{enumerate_segal, segal_extend, segal_k_level, segal_restrict, validate_segal_system, Ctx, SegalSystem};
use crate::simplicial::{check_circle_contravariance, validate_simplicial};
use crate::wald::{
    default_wedge_choice, lambda, lambda_on_multiexact, validate_k_exact, validate_klinear, validate_smc,
    validate_waldhausen, validate_wedge_choice, KFunctor, KNatTrans, Smc, WaldCat, WaldStruct, WedgeChoice,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

pub const FIXTURE_SCHEMA: &str = "multik-fixture/1";
pub const REPORT_SCHEMA: &str = "multik-report/1";

/// Enumeration budget for E-naturality windows. `([2],[2])` over four-element
/// pointed sets needs about 8⁹ candidates.
pub const WINDOW_BUDGET: u128 = 1 << 28;

/// Built-in families the fixture was generated from. Family-specific checks
/// (the smash product) only run while the data still matches the family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    PointedSets { n: usize },
    VectF2 { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    /// Per object, in the order of `category.objects`.
    pub sizes: Vec<u32>,
    pub max: u32,
}

/// `left ∨ right` with its two legs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawWedge {
    pub left: String,
    pub right: String,
    pub apex: String,
    pub inl: String,
    pub inr: String,
}

/// A Segal system by names; `objects` and `rho` follow the tuple and gluing-key
/// numbering of the context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSystem {
    pub context: Vec<usize>,
    pub objects: Vec<String>,
    pub rho: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub quantity: String,
    pub value: u64,
    /// How the value was obtained independently of this code.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub category: RawCat,
    pub basepoint: String,
    pub cofibrations: Vec<String>,
    pub weqs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Bound>,
    /// Chosen wedges. Absent means the smallest-identifier pushouts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge: Option<Vec<RawWedge>>,
    #[serde(default)]
    pub systems: Vec<RawSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_patch: Option<WindowPatch>,
    pub split: bool,
    #[serde(default)]
    pub expected: Vec<Expectation>,
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |a, i| a * (n - i) / (i + 1))
}

fn falling(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |a, i| a * (n - i))
}

/// Injective `F₂`-linear maps `F₂^a → F₂^c`.
fn f2_injections(a: u32, c: u32) -> u64 {
    (0..a).map(|i| (1u64 << c) - (1 << i)).product()
}

fn expect(quantity: &str, value: u64, source: &str) -> Expectation {
    Expectation { quantity: quantity.into(), value, source: source.into() }
}

fn pointed_sets_expected(n: u64) -> Vec<Expectation> {
    let pairs = |f: &dyn Fn(u64, u64) -> u64| (0..=n).flat_map(|a| (0..=n).map(move |b| (a, b))).map(|(a, b)| f(a, b)).sum();
    vec![
        expect("objects", 1 << n, "subsets of {1..N}"),
        expect("morphisms", pairs(&|a, b| binom(n, a) * binom(n, b) * (b + 1).pow(a as u32)), "sum of (b+1)^a over subset pairs"),
        expect("iso-classes", n + 1, "one class per cardinality"),
        expect(
            "s2-objects",
            pairs(&|a, c| if a <= c { binom(n, a) * binom(n, c) * falling(c, a) * binom(n, c - a) * falling(c - a, c - a) } else { 0 }),
            "injections X -> Z times bijections from Z/X onto a subset of matching size",
        ),
        expect("k0-rank", 1, "cardinality is the only additive invariant"),
        expect("k0-torsion", 0, "cardinality is the only additive invariant"),
    ]
}

fn vect_f2_expected(n: u32) -> Vec<Expectation> {
    let gl = |d: u32| f2_injections(d, d);
    vec![
        expect("objects", n as u64 + 1, "one object per dimension"),
        expect("morphisms", (0..=n).flat_map(|a| (0..=n).map(move |b| 1u64 << (a * b))).sum(), "sum of 2^(ab) over dimension pairs"),
        expect("iso-classes", n as u64 + 1, "one class per dimension"),
        expect(
            "s2-objects",
            (0..=n).flat_map(|c| (0..=c).map(move |a| f2_injections(a, c) * gl(c - a))).sum(),
            "injections F2^a -> F2^c times |GL(c-a)|",
        ),
        expect("k0-rank", 1, "dimension is the only additive invariant"),
        expect("k0-torsion", 0, "dimension is the only additive invariant"),
    ]
}

/// Systems over `⟨2⟩` whose two singletons are both nonzero, in enumeration
/// order; they are the ones whose symmetry law has content.
fn sample_systems(s: &Smc, count: usize) -> Vec<SegalSystem> {
    let ctx = Ctx::new(&[2]);
    let (t1, t2) = (ctx.tuple(&[1]).unwrap() as usize, ctx.tuple(&[2]).unwrap() as usize);
    let z = s.w.zero();
    let mut out: Vec<SegalSystem> = enumerate_segal(s, &[2])
        .map(|e| e.systems)
        .unwrap_or_default()
        .into_iter()
        .filter(|sys| sys.obj[t1] != z && sys.obj[t2] != z)
        .take(count)
        .collect();
    out.push(crate::segal::basepoint_system(s, &Ctx::new(&[1, 1])));
    out
}

fn names_of<C: Cat + ?Sized>(c: &C, fs: impl Iterator<Item = u32>) -> Vec<String> {
    fs.map(|f| c.mor_name(f)).collect()
}

impl Fixture {
    pub fn from_wald(ws: &WaldStruct, family: Option<Family>, wedge: &WedgeChoice, systems: &[SegalSystem]) -> Fixture {
        let c = &ws.cat;
        let wedges = (0..c.n_obj() as u32)
            .flat_map(|x| (0..c.n_obj() as u32).map(move |y| (x, y)))
            .filter_map(|(x, y)| {
                wedge.get(x, y).map(|k| RawWedge {
                    left: c.obj_name(x),
                    right: c.obj_name(y),
                    apex: c.obj_name(k.apex),
                    inl: c.mor_name(k.l1),
                    inr: c.mor_name(k.l2),
                })
            })
            .collect();
        let bound = match (&ws.sizes, ws.bound) {
            (Some(sizes), Some(max)) => Some(Bound { sizes: sizes.clone(), max }),
            _ => None,
        };
        Fixture {
            schema: FIXTURE_SCHEMA.into(),
            name: ws.name.clone(),
            family,
            category: c.to_raw(),
            basepoint: c.obj_name(ws.zero),
            cofibrations: names_of(c, c.morphisms().filter(|&f| ws.cof[f as usize])),
            weqs: names_of(c, c.morphisms().filter(|&f| ws.weq[f as usize])),
            bound,
            wedge: Some(wedges),
            systems: systems
                .iter()
                .map(|s| RawSystem {
                    context: s.context.clone(),
                    objects: s.obj.iter().map(|&x| c.obj_name(x)).collect(),
                    rho: names_of(c, s.rho.iter().copied()),
                })
                .collect(),
            window_patch: None,
            split: cofibrations_split(ws).is_ok(),
            expected: Vec::new(),
        }
    }

    /// Pointed subsets of `{∗,1,…,N}`, `1 ≤ N ≤ 4`.
    pub fn pointed_sets(n: usize) -> Fixture {
        assert!((1..=4).contains(&n), "pointed sets fixture needs 1 <= N <= 4");
        let p = PointedSets::new(n);
        let s = lambda(&p.ws, default_wedge_choice(&p.ws));
        let mut f = Fixture::from_wald(&p.ws, Some(Family::PointedSets { n }), &s.wedge, &sample_systems(&s, 3));
        f.expected = pointed_sets_expected(n as u64);
        f
    }

    /// `F₂^0,…,F₂^N` with all matrices, `1 ≤ N ≤ 2`.
    pub fn vect_f2(n: usize) -> Fixture {
        assert!((1..=2).contains(&n), "vector space fixture needs 1 <= N <= 2");
        let v = VectF2::new(n);
        let s = lambda(&v.ws, default_wedge_choice(&v.ws));
        let mut f = Fixture::from_wald(&v.ws, Some(Family::VectF2 { n }), &s.wedge, &sample_systems(&s, 3));
        f.expected = vect_f2_expected(n as u32);
        f
    }

    /// `pointed_sets(N)` / `vect_f2(N)` (also `pointed_sets:N`), or `None`.
    pub fn builtin(name: &str) -> Option<Fixture> {
        let name = name.trim();
        let (kind, n) = if let Some(rest) = name.strip_suffix(')') {
            rest.split_once('(')?
        } else {
            name.split_once(':')?
        };
        let n: usize = n.trim().parse().ok()?;
        match kind.trim() {
            "pointed_sets" | "pointed-sets" if (1..=4).contains(&n) => Some(Fixture::pointed_sets(n)),
            "vect_f2" | "vect-f2" if (1..=2).contains(&n) => Some(Fixture::vect_f2(n)),
            _ => None,
        }
    }

    /// A built-in name or a path to a fixture file.
    pub fn load(arg: &str) -> Result<Fixture, String> {
        if !Path::new(arg).exists() {
            if let Some(f) = Fixture::builtin(arg) {
                return Ok(f);
            }
        }
        let text = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
        let f: Fixture = serde_json::from_str(&text).map_err(|e| format!("{arg}: {e}"))?;
        if f.schema != FIXTURE_SCHEMA {
            return Err(format!("{arg}: schema {:?}, expected {FIXTURE_SCHEMA:?}", f.schema));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixtures serialize") + "\n"
    }

    pub fn resolve_category(&self) -> (Option<FinCat>, Report) {
        self.category.resolve()
    }

    /// Attaches the Waldhausen data to a resolved category.
    pub fn wald(&self, cat: FinCat) -> Result<WaldStruct, Report> {
        let mut r = Report::new();
        let objs: HashMap<String, u32> = cat.objects().map(|x| (cat.obj_name(x), x)).collect();
        let mors: HashMap<String, u32> = cat.morphisms().map(|f| (cat.mor_name(f), f)).collect();
        let zero = objs.get(&self.basepoint).copied();
        if zero.is_none() {
            r.structural("dangling-basepoint", self.basepoint.clone());
        }
        let mut flags = |names: &[String], what: &str| {
            let mut v = vec![false; cat.n_mor()];
            for n in names {
                match mors.get(n) {
                    Some(&f) => v[f as usize] = true,
                    None => r.structural(format!("dangling-{what}"), n.clone()),
                }
            }
            v
        };
        let cof = flags(&self.cofibrations, "cofibration");
        let weq = flags(&self.weqs, "weq");
        if let Some(b) = &self.bound {
            if b.sizes.len() != cat.n_obj() {
                r.structural("bound-sizes", format!("{} sizes for {} objects", b.sizes.len(), cat.n_obj()));
            }
        }
        if !r.is_ok() {
            return Err(r);
        }
        let w = WaldStruct::new(self.name.clone(), cat, zero.unwrap(), cof, weq);
        Ok(match &self.bound {
            Some(b) => w.bounded(b.sizes.clone(), b.max),
            None => w,
        })
    }

    pub fn wedge_choice(&self, w: &WaldStruct) -> Result<WedgeChoice, Report> {
        let Some(list) = &self.wedge else {
            return Ok(default_wedge_choice(w));
        };
        let c = &w.cat;
        let mut r = Report::new();
        let objs: HashMap<String, u32> = c.objects().map(|x| (c.obj_name(x), x)).collect();
        let mors: HashMap<String, u32> = c.morphisms().map(|f| (c.mor_name(f), f)).collect();
        let n = c.n_obj();
        let mut om = WedgeChoice { n, table: vec![None; n * n] };
        for e in list {
            let found = (objs.get(&e.left), objs.get(&e.right), objs.get(&e.apex), mors.get(&e.inl), mors.get(&e.inr));
            match found {
                (Some(&x), Some(&y), Some(&apex), Some(&l1), Some(&l2)) => {
                    if om.get(x, y).is_some() {
                        r.structural("duplicate-wedge", format!("({}, {})", e.left, e.right));
                    }
                    om.set(x, y, Some(Cocone { apex, l1, l2 }));
                }
                _ => r.structural("dangling-wedge", format!("({}, {}) -> {}", e.left, e.right, e.apex)),
            }
        }
        if r.is_ok() {
            Ok(om)
        } else {
            Err(r)
        }
    }

    pub fn segal_systems(&self, w: &WaldStruct) -> Result<Vec<SegalSystem>, Report> {
        let c = &w.cat;
        let mut r = Report::new();
        let objs: HashMap<String, u32> = c.objects().map(|x| (c.obj_name(x), x)).collect();
        let mors: HashMap<String, u32> = c.morphisms().map(|f| (c.mor_name(f), f)).collect();
        let mut out = Vec::new();
        for (k, s) in self.systems.iter().enumerate() {
            let obj: Option<Vec<u32>> = s.objects.iter().map(|o| objs.get(o).copied()).collect();
            let rho: Option<Vec<u32>> = s.rho.iter().map(|f| mors.get(f).copied()).collect();
            match (obj, rho) {
                (Some(obj), Some(rho)) => out.push(SegalSystem { context: s.context.clone(), obj, rho }),
                _ => r.structural("dangling-system", format!("system {k}")),
            }
        }
        if r.is_ok() {
            Ok(out)
        } else {
            Err(r)
        }
    }

    fn expected(&self, quantity: &str) -> Option<u64> {
        self.expected.iter().find(|e| e.quantity == quantity).map(|e| e.value)
    }

    /// Whether the category, structure and wedges are exactly those of the
    /// family the fixture names.
    fn matches_family(&self) -> bool {
        let fresh = match self.family {
            Some(Family::PointedSets { n }) if (1..=4).contains(&n) => Fixture::pointed_sets(n),
            Some(Family::VectF2 { n }) if (1..=2).contains(&n) => Fixture::vect_f2(n),
            _ => return false,
        };
        (&fresh.category, &fresh.basepoint, &fresh.cofibrations, &fresh.weqs, &fresh.bound, &fresh.wedge)
            == (&self.category, &self.basepoint, &self.cofibrations, &self.weqs, &self.bound, &self.wedge)
    }
}

// ---------------------------------------------------------------------------
// Mutations

pub const MUTATIONS: [&str; 5] = ["drop-cofibration", "corrupt-composition", "break-rho-symmetry", "corrupt-wedge", "corrupt-structure-map"];

/// The check each mutation is built to trip.
pub fn mutation_target(kind: &str) -> Option<&'static str> {
    Some(match kind {
        "drop-cofibration" => "waldhausen",
        "corrupt-composition" => "category",
        "break-rho-symmetry" => "segal-samples",
        "corrupt-wedge" => "wedges",
        "corrupt-structure-map" => "estar-window",
        _ => return None,
    })
}

/// A copy of `fx` with one planted fault. Refuses kinds that have nothing to
/// act on, and fixtures that do not load in the first place.
pub fn mutate(fx: &Fixture, kind: &str) -> Result<Fixture, String> {
    if mutation_target(kind).is_none() {
        return Err(format!("unknown mutation kind {kind:?}; expected one of {}", MUTATIONS.join(", ")));
    }
    let refuse = |why: &str| Err(format!("cannot apply {kind} to {}: {why}", fx.name));
    let (cat, r) = fx.resolve_category();
    let Some(cat) = cat.filter(|c| r.is_ok() && validate_fincat(c).is_ok()) else {
        return refuse("the category does not load");
    };
    let Ok(w) = fx.wald(cat) else {
        return refuse("the Waldhausen data does not load");
    };
    let mut out = fx.clone();
    out.name = format!("{}+{kind}", fx.name);
    match kind {
        "drop-cofibration" => {
            let z = w.zero();
            let Some(x) = (0..w.n_obj() as u32).find(|&x| x != z) else {
                return refuse("no nonzero object");
            };
            let victim = w.mor_name(w.initial(x));
            if !out.cofibrations.contains(&victim) {
                return refuse("the zero map is already not a cofibration");
            }
            out.cofibrations.retain(|n| *n != victim);
        }
        "corrupt-composition" => {
            // Redirect one recorded composite to a morphism with other ends.
            let c = &w.cat;
            let entry = out.category.composition.iter().position(|[g, f, _]| {
                let (g, f) = (c.morphisms().find(|&m| c.mor_name(m) == *g), c.morphisms().find(|&m| c.mor_name(m) == *f));
                matches!((g, f), (Some(g), Some(f)) if !c.is_identity(g) && !c.is_identity(f))
            });
            let Some(k) = entry else {
                return refuse("no composite of two non-identities");
            };
            let [g, f, _] = out.category.composition[k].clone();
            let (g, f) = (
                c.morphisms().find(|&m| c.mor_name(m) == g).unwrap(),
                c.morphisms().find(|&m| c.mor_name(m) == f).unwrap(),
            );
            let Some(other) = c.morphisms().find(|&m| (c.src(m), c.tgt(m)) != (c.src(f), c.tgt(g))) else {
                return refuse("every morphism has the same ends");
            };
            out.category.composition[k][2] = c.mor_name(other);
        }
        "break-rho-symmetry" => {
            let Ok(systems) = fx.segal_systems(&w) else {
                return refuse("the sample systems do not load");
            };
            let Ok(om) = fx.wedge_choice(&w) else {
                return refuse("the wedges do not load");
            };
            let s = lambda(&w, om);
            let mut done = false;
            'found: for (k, sys) in systems.iter().enumerate() {
                let ctx = Ctx::new(&sys.context);
                for (key, &(x, i, t)) in ctx.rho_keys.iter().enumerate() {
                    let whole = ctx.tuples[x as usize][i];
                    if t == 0 || t == whole || ctx.has_empty(x) {
                        continue;
                    }
                    let (a, b) = (sys.obj[ctx.with(x, i, t) as usize], sys.obj[ctx.with(x, i, whole & !t) as usize]);
                    let Some(src) = s.obj(a, b) else { continue };
                    let rho = sys.rho[key];
                    // Precompose with an automorphism of the source that changes rho.
                    for aut in isos(&w, src, src) {
                        let twisted = w.c(rho, aut);
                        if twisted != rho {
                            out.systems[k].rho[key] = w.mor_name(twisted);
                            done = true;
                            break 'found;
                        }
                    }
                }
            }
            if !done {
                return refuse("no sample system has a gluing map with a nontrivial twist");
            }
        }
        "corrupt-wedge" => {
            let (z, zname) = (w.zero(), w.obj_name(w.zero()));
            let wedges = out.wedge.get_or_insert_with(|| {
                let om = default_wedge_choice(&w);
                Fixture::from_wald(&w, None, &om, &[]).wedge.unwrap()
            });
            let Some(e) = wedges.iter_mut().find(|e| e.right == zname && e.left != zname) else {
                return refuse("no wedge with the zero object");
            };
            let x = w.cat.objects().find(|&x| w.obj_name(x) == e.left).unwrap();
            let Some(y) = (0..w.n_obj() as u32).find(|&y| y != x && y != z) else {
                return refuse("no third object to move the apex to");
            };
            e.apex = w.obj_name(y);
        }
        "corrupt-structure-map" => {
            let level = match SdotLevel::new(&w, &[1, 1], false) {
                Ok(l) => l,
                Err(e) => return Err(format!("cannot apply {kind} to {}: {e}", fx.name)),
            };
            let last = level.n_obj() as u32 - 1;
            let base = level.base_obj();
            let swap = EMor::perm(&[1, 1], &[1, 0]);
            let image = level.push_obj(&level.structure_map(&swap, &level), &level, last);
            if last == base || image == base {
                return refuse("the two-by-one level has no nonzero diagram");
            }
            out.window_patch = Some(WindowPatch { mor: swap, object: last, image: base });
        }
        _ => unreachable!(),
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Suite

/// Every check with the checks it needs, in execution order.
pub const CHECKS: [(&str, &[&str]); 17] = [
    ("category", &[]),
    ("waldhausen", &["category"]),
    ("wedges", &["waldhausen"]),
    ("smc", &["wedges"]),
    ("k-linear", &["smc"]),
    ("segal-samples", &["smc"]),
    ("splitness", &["waldhausen"]),
    ("counts", &["waldhausen"]),
    ("estar-window", &["waldhausen"]),
    ("phi", &["segal-samples"]),
    ("iterated", &["waldhausen"]),
    ("extension", &["smc"]),
    ("e-naturality", &["phi", "estar-window"]),
    ("multinaturality", &["k-linear", "phi"]),
    ("pi0", &["phi", "splitness"]),
    ("k0", &["waldhausen"]),
    ("k-levels", &["smc"]),
];

/// The structural validators; `multik validate` runs these.
pub const VALIDATORS: [&str; 7] = ["category", "waldhausen", "wedges", "smc", "k-linear", "segal-samples", "estar-window"];

pub const PHI_CONTEXTS: [&[usize]; 4] = [&[1], &[2], &[1, 1], &[2, 1]];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub verdict: Verdict,
    pub report: Report,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: u64,
    pub fail: u64,
    pub indeterminate: u64,
    pub skipped: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub schema: String,
    pub fixture: String,
    pub summary: Summary,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        std::fs::write(path, self.to_json()).map_err(|e| format!("{}: {e}", path.display()))
    }
}

struct Runner<'a> {
    want: BTreeSet<&'static str>,
    done: BTreeMap<&'static str, Report>,
    timings: &'a mut Vec<(String, std::time::Duration)>,
}

impl Runner<'_> {
    fn passed(&self, name: &str) -> bool {
        self.done.get(name).is_some_and(|r| matches!(r.verdict(), Verdict::Pass | Verdict::Indeterminate))
    }

    fn step(&mut self, name: &'static str, f: impl FnOnce() -> Report) {
        if !self.want.contains(name) {
            return;
        }
        let deps = CHECKS.iter().find(|c| c.0 == name).expect("known check").1;
        let blocked: Vec<&str> = deps.iter().copied().filter(|d| !self.passed(d)).collect();
        let r = if blocked.is_empty() {
            let t = std::time::Instant::now();
            let r = f();
            self.timings.push((name.to_string(), t.elapsed()));
            r
        } else {
            let mut r = Report::new();
            r.skip(format!("needs {}", blocked.join(", ")));
            r
        };
        self.done.insert(name, r);
    }
}

fn patched_window<'w>(w: &'w WaldStruct, patch: &Option<WindowPatch>) -> HashMap<Vec<usize>, Patched<SdotLevel<'w, WaldStruct>>> {
    window_objects(2, 1)
        .into_iter()
        .map(|m| {
            let l = SdotLevel::new(w, &m, false).expect("small window levels enumerate");
            (m, Patched { inner: l, patch: patch.clone() })
        })
        .collect()
}

fn refused(r: &mut Report, law: &str, e: impl std::fmt::Display) {
    r.bound(law, e.to_string());
}

fn check_counts(fx: &Fixture, w: &WaldStruct) -> Report {
    let mut r = Report::new();
    let mut actual: BTreeMap<&str, u64> = BTreeMap::new();
    actual.insert("objects", w.n_obj() as u64);
    actual.insert("morphisms", w.cat.n_mor() as u64);
    actual.insert("iso-classes", iso_classes(w).len() as u64);
    if fx.expected("s2-objects").is_some() {
        match enumerate_sdot(w, &Shape::new(&[2])) {
            Ok(e) => {
                actual.insert("s2-objects", e.diagrams.len() as u64);
            }
            Err(e) => refused(&mut r, "s2-objects", e),
        }
    }
    for e in &fx.expected {
        if e.quantity.starts_with("k0-") {
            continue;
        }
        match actual.get(e.quantity.as_str()) {
            Some(&v) => {
                r.expect(v == e.value, &e.quantity, || format!("expected {}, found {v}", e.value));
            }
            None if e.quantity == "s2-objects" => {}
            None => r.structural("unknown-quantity", e.quantity.clone()),
        }
    }
    r.note(actual.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", "));
    r
}

fn check_k_linear(fx: &Fixture, s: &Smc) -> Report {
    let w = s.w;
    let id = KFunctor::identity(&w.cat);
    let mut r = validate_klinear(&lambda_on_multiexact(&id, vec![s], s));
    r.note("identity functor");
    if let (Some(Family::PointedSets { n }), true) = (&fx.family, fx.matches_family()) {
        let (pn, p1) = (PointedSets::new(*n), PointedSets::new(1));
        let s1 = lambda(&p1.ws, default_wedge_choice(&p1.ws));
        let sm = smash_with_sphere(&pn, &p1);
        r.merge(validate_k_exact(&sm, &[w, &p1.ws], w));
        r.merge(validate_klinear(&lambda_on_multiexact(&sm, vec![s, &s1], s)));
        r.note(format!("smash P({n}) x P(1) -> P({n})"));
    }
    r
}

fn check_samples(systems: &[SegalSystem], s: &Smc) -> Report {
    let mut r = Report::new();
    for sys in systems {
        r.merge(validate_segal_system(s, sys));
    }
    r.note(format!("{} sample systems", systems.len()));
    r
}

fn check_phi(s: &Smc, samples: &[SegalSystem]) -> Report {
    let mut r = Report::new();
    for dims in PHI_CONTEXTS {
        let px = PhiIndex::new(dims);
        match enumerate_segal(s, dims) {
            Ok(e) => {
                for sys in &e.systems {
                    r.merge(phi_object_in(s, &px, sys).report);
                }
                r.note(format!("{dims:?}: {} systems", e.systems.len()));
            }
            Err(e) => refused(&mut r, "phi-enumeration", e),
        }
    }
    for sys in samples {
        r.merge(phi_object_in(s, &PhiIndex::new(&sys.context), sys).report);
    }
    r
}

fn check_iterated(w: &WaldStruct) -> Report {
    let mut r = Report::new();
    for (m1, m2) in [(1, 1), (2, 1), (1, 2)] {
        match iterated_agreement(w, m1, m2) {
            Ok(x) => r.merge(x),
            Err(e) => refused(&mut r, "iterated-enumeration", e),
        }
    }
    r
}

/// `S⁽ⁿ⁾ ≅ S⁽ⁿ⁺¹⁾(…,1)` and `C̄(…) ≅ C̄(…,⟨1⟩)`: the extension lands in the
/// enumerated target, restriction undoes it, and the two sides have equal size.
fn check_extension(s: &Smc) -> Report {
    let w = s.w;
    let mut r = Report::new();
    for dims in [vec![1], vec![2], vec![1, 1]] {
        let mut ext = dims.clone();
        ext.push(1);
        let (sh, sh_ext) = (Shape::new(&dims), Shape::new(&ext));
        match (enumerate_sdot(w, &sh), enumerate_sdot(w, &sh_ext)) {
            (Ok(a), Ok(b)) => {
                let big: HashSet<_> = b.diagrams.iter().collect();
                for d in &a.diagrams {
                    let e = extend_sdot(w, &dims, d);
                    r.expect(big.contains(&e), "sdot-extension-lands", || format!("{dims:?}: {d:?}"));
                    r.expect(restrict_sdot(&sh_ext, &e) == *d, "sdot-round-trip", || format!("{dims:?}: {d:?}"));
                }
                r.expect(a.diagrams.len() == b.diagrams.len(), "sdot-count", || {
                    format!("{dims:?}: {} vs {}", a.diagrams.len(), b.diagrams.len())
                });
            }
            (Err(e), _) | (_, Err(e)) => refused(&mut r, "sdot-enumeration", e),
        }
        match (enumerate_segal(s, &dims), enumerate_segal(s, &ext)) {
            (Ok(a), Ok(b)) => {
                let big: HashSet<_> = b.systems.iter().collect();
                for sys in &a.systems {
                    let e = segal_extend(s, sys);
                    r.expect(big.contains(&e), "segal-extension-lands", || format!("{dims:?}: {sys:?}"));
                    r.expect(segal_restrict(&e) == *sys, "segal-round-trip", || format!("{dims:?}: {sys:?}"));
                }
                r.expect(a.systems.len() == b.systems.len(), "segal-count", || {
                    format!("{dims:?}: {} vs {}", a.systems.len(), b.systems.len())
                });
            }
            (Err(e), _) | (_, Err(e)) => refused(&mut r, "segal-enumeration", e),
        }
    }
    r
}

/// Multinaturality of `φ` for a named functor: `smash` (pointed-sets
/// fixtures only, with the twist modification) or `identity`.
pub fn multinat_for(fx: &Fixture, s: &Smc, functor: &str) -> Result<Report, String> {
    let w = s.w;
    let mut r = Report::new();
    match functor {
        "smash" => {
            let n = match (&fx.family, fx.matches_family()) {
                (Some(Family::PointedSets { n }), true) => *n,
                _ => return Err(format!("{} is not an unmodified pointed-sets fixture; smash is unavailable", fx.name)),
            };
            let (pn, p1) = (PointedSets::new(n), PointedSets::new(1));
            let s1 = lambda(&p1.ws, default_wedge_choice(&p1.ws));
            let sm = smash_with_sphere(&pn, &p1);
            r.merge(check_multinaturality(&lambda_on_multiexact(&sm, vec![s, &s1], s), 1, 1, BUDGET));
            r.note(format!("smash P({n}) x P(1) -> P({n}), slot window (1, 1)"));
            let (p2, p4) = (PointedSets::new(2), PointedSets::new(4));
            let (s2, s4) = (lambda(&p2.ws, default_wedge_choice(&p2.ws)), lambda(&p4.ws, default_wedge_choice(&p4.ws)));
            let (f, g, mu) = (smash_square(&p2, &p4), smash_square_swapped(&p2, &p4), smash_twist(&p2, &p4));
            let (kf, kg) = (lambda_on_multiexact(&f, vec![&s2, &s2], &s4), lambda_on_multiexact(&g, vec![&s2, &s2], &s4));
            r.merge(check_modification(&mu, &kf, &kg, 1, 1, BUDGET));
            r.note("twist X ^ Y -> Y ^ X on P(2) x P(2) -> P(4), slot window (1, 1)");
        }
        "identity" => {
            let id = KFunctor::identity(&w.cat);
            let kid = lambda_on_multiexact(&id, vec![s], s);
            r.merge(check_multinaturality(&kid, 1, 2, BUDGET));
            r.merge(check_modification(&KNatTrans::identity(&id, &w.cat), &kid, &kid, 1, 2, BUDGET));
            r.note("identity functor and identity transformation, window (1, 2)");
        }
        _ => return Err(format!("unknown functor {functor:?}; expected smash or identity")),
    }
    Ok(r)
}

fn check_multinat(fx: &Fixture, s: &Smc) -> Report {
    multinat_for(fx, s, "smash").or_else(|_| multinat_for(fx, s, "identity")).expect("identity is always available")
}

/// The Waldhausen structure and wedges of a fixture, or the report of the
/// first stage that did not validate.
pub fn load_structure(fx: &Fixture) -> Result<(WaldStruct, WedgeChoice), Report> {
    let (cat, mut r) = fx.resolve_category();
    let Some(cat) = cat else { return Err(r) };
    r.merge(validate_fincat(&cat));
    if !r.is_ok() {
        return Err(r);
    }
    let w = fx.wald(cat)?;
    let r = validate_waldhausen(&w);
    if !r.is_ok() {
        return Err(r);
    }
    let om = fx.wedge_choice(&w)?;
    let r = validate_wedge_choice(&w, &om);
    if !r.is_ok() {
        return Err(r);
    }
    Ok((w, om))
}

fn check_k0(fx: &Fixture, w: &WaldStruct) -> Report {
    let mut r = Report::new();
    match k0(w) {
        Ok(g) => {
            r.tick();
            let torsion = g.torsion.iter().filter(|&&t| t > 1).count() as u64;
            if let Some(v) = fx.expected("k0-rank") {
                r.expect(g.rank as u64 == v, "k0-rank", || format!("expected {v}, found {}", g.rank));
            }
            if let Some(v) = fx.expected("k0-torsion") {
                r.expect(torsion == v, "k0-torsion", || format!("expected {v} factors, found {:?}", g.torsion));
            }
            r.note(format!("rank {}, torsion {:?}", g.rank, g.torsion));
        }
        Err(e) => refused(&mut r, "k0-enumeration", e),
    }
    r
}

fn check_k_levels(s: &Smc) -> Report {
    let mut r = Report::new();
    match wald_k_level(s.w, 1, 2) {
        Ok(x) => r.merge(validate_simplicial(&x)),
        Err(e) => refused(&mut r, "wald-level", e),
    }
    match segal_k_level(s, 1, 2) {
        Ok(x) => r.merge(validate_simplicial(&x)),
        Err(e) => refused(&mut r, "segal-level", e),
    }
    r.merge(check_circle_contravariance(3));
    r
}

/// Runs `checks` (all when `None`) plus whatever they depend on, in
/// dependency order. Checks whose prerequisites did not pass are skipped.
/// Only the requested checks are reported, sorted by name.
pub fn run_suite(fx: &Fixture, checks: Option<&[String]>) -> Result<SuiteReport, String> {
    let (report, _) = run_suite_timed(fx, checks)?;
    Ok(report)
}

/// [`run_suite`] with wall-clock time per executed check. Timings stay out of
/// the report so that reports are reproducible byte for byte.
pub fn run_suite_timed(fx: &Fixture, checks: Option<&[String]>) -> Result<(SuiteReport, Vec<(String, std::time::Duration)>), String> {
    let requested: BTreeSet<&'static str> = match checks {
        None => CHECKS.iter().map(|c| c.0).collect(),
        Some(list) => {
            let mut out = BTreeSet::new();
            for name in list {
                match CHECKS.iter().find(|c| c.0 == name) {
                    Some(c) => {
                        out.insert(c.0);
                    }
                    None => return Err(format!("unknown check {name:?}")),
                }
            }
            out
        }
    };
    let mut want = requested.clone();
    for (name, deps) in CHECKS.iter().rev() {
        if want.contains(name) {
            want.extend(deps.iter().copied());
        }
    }
    let mut timings = Vec::new();
    let mut run = Runner { want, done: BTreeMap::new(), timings: &mut timings };

    let (cat, resolved) = fx.resolve_category();
    run.step("category", || {
        let mut r = resolved;
        if fx.schema != FIXTURE_SCHEMA {
            r.structural("schema", fx.schema.clone());
        }
        if let Some(c) = &cat {
            r.merge(validate_fincat(c));
        }
        r
    });
    let wald = match (run.passed("category"), cat) {
        (true, Some(c)) => Some(fx.wald(c)),
        _ => None,
    };
    run.step("waldhausen", || match wald.as_ref().unwrap() {
        Ok(w) => validate_waldhausen(w),
        Err(e) => e.clone(),
    });
    let w = wald.as_ref().and_then(|x| x.as_ref().ok()).filter(|_| run.passed("waldhausen"));
    let wedge = w.filter(|_| run.want.contains("wedges")).map(|w| fx.wedge_choice(w));
    run.step("wedges", || match wedge.as_ref().unwrap() {
        Ok(om) => validate_wedge_choice(w.unwrap(), om),
        Err(e) => e.clone(),
    });
    let smc = match (w, wedge.as_ref()) {
        (Some(w), Some(Ok(om))) if run.passed("wedges") => Some(lambda(w, om.clone())),
        _ => None,
    };
    run.step("smc", || validate_smc(smc.as_ref().unwrap()));
    let s = smc.as_ref().filter(|_| run.passed("smc"));
    run.step("k-linear", || check_k_linear(fx, s.unwrap()));
    let samples = w.map(|w| fx.segal_systems(w));
    run.step("segal-samples", || match samples.as_ref().unwrap() {
        Ok(v) => check_samples(v, s.unwrap()),
        Err(e) => e.clone(),
    });
    run.step("splitness", || {
        let mut r = Report::new();
        let split = cofibrations_split(w.unwrap());
        r.expect(split.is_ok() == fx.split, "splitness-flag", || {
            format!("declared {}, found {}", fx.split, split.as_ref().err().cloned().unwrap_or_else(|| "split".into()))
        });
        r
    });
    run.step("counts", || check_counts(fx, w.unwrap()));
    run.step("estar-window", || validate_estar_window(&patched_window(w.unwrap(), &fx.window_patch)));
    run.step("phi", || check_phi(s.unwrap(), samples.as_ref().unwrap().as_ref().unwrap()));
    run.step("iterated", || check_iterated(w.unwrap()));
    run.step("extension", || check_extension(s.unwrap()));
    run.step("e-naturality", || check_e_naturality(s.unwrap(), 2, 2, WINDOW_BUDGET));
    run.step("multinaturality", || check_multinat(fx, s.unwrap()));
    run.step("pi0", || {
        let mut r = Report::new();
        for m in 1..=2 {
            r.merge(pi0_comparison(s.unwrap(), m));
        }
        r
    });
    run.step("k0", || check_k0(fx, w.unwrap()));
    run.step("k-levels", || check_k_levels(s.unwrap()));

    let mut summary = Summary::default();
    let mut out = Vec::new();
    for (name, report) in run.done {
        if !requested.contains(name) {
            continue;
        }
        let verdict = report.verdict();
        match verdict {
            Verdict::Pass => summary.pass += 1,
            Verdict::Fail => summary.fail += 1,
            Verdict::Indeterminate => summary.indeterminate += 1,
            Verdict::Skipped => summary.skipped += 1,
        }
        out.push(CheckResult { name: name.to_string(), verdict, report });
    }
    let report = SuiteReport { schema: REPORT_SCHEMA.into(), fixture: fx.name.clone(), summary, checks: out };
    Ok((report, timings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        assert_eq!(Fixture::builtin("pointed_sets(2)").unwrap().name, "pointed_sets(2)");
        assert_eq!(Fixture::builtin("vect-f2:1").unwrap().name, "vect_f2(1)");
        assert!(Fixture::builtin("pointed_sets(5)").is_none());
        assert!(Fixture::builtin("nonsense").is_none());
    }

    #[test]
    fn fixtures_round_trip_through_json() {
        for fx in [Fixture::pointed_sets(2), Fixture::vect_f2(1)] {
            let back: Fixture = serde_json::from_str(&fx.to_json()).unwrap();
            assert_eq!(back, fx);
            let (cat, r) = back.resolve_category();
            assert!(r.is_ok());
            let w = back.wald(cat.unwrap()).unwrap();
            let om = back.wedge_choice(&w).unwrap();
            assert_eq!(om, default_wedge_choice(&w));
            assert!(back.matches_family());
        }
    }

    #[test]
    fn expected_counts_match_small_cases() {
        // P(1) by hand: objects {∗}, {∗,1}; hom sizes 1, 1, 1, 2; S₂ objects
        // ∗↪∗↠∗, ∗↪{∗,1}↠{∗,1}, {∗,1}↪{∗,1}↠∗.
        let e = pointed_sets_expected(1);
        assert_eq!((e[0].value, e[1].value, e[3].value), (2, 5, 3));
        let v = vect_f2_expected(1);
        assert_eq!((v[0].value, v[1].value, v[3].value), (2, 5, 3));
        assert_eq!(pointed_sets_expected(3)[1].value, 406);
        assert_eq!(pointed_sets_expected(3)[3].value, 229);
        assert_eq!(vect_f2_expected(2)[1].value, 31);
        assert_eq!(vect_f2_expected(2)[3].value, 18);
    }

    fn only_failure(r: &SuiteReport) -> Vec<&str> {
        r.checks.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.name.as_str()).collect()
    }

    #[test]
    fn every_mutation_trips_its_own_check_on_small_fixtures() {
        let checks: Vec<String> = VALIDATORS.iter().map(|s| s.to_string()).collect();
        for fx in [Fixture::pointed_sets(2), Fixture::vect_f2(1)] {
            let clean = run_suite(&fx, Some(&checks)).unwrap();
            assert!(clean.ok() && clean.summary.pass == VALIDATORS.len() as u64, "{}", clean.to_json());
            for kind in MUTATIONS {
                let m = match mutate(&fx, kind) {
                    Ok(m) => m,
                    Err(e) => {
                        // P(1)-sized data has no room for some faults.
                        assert!(fx.name == "vect_f2(1)", "{e}");
                        continue;
                    }
                };
                let r = run_suite(&m, Some(&checks)).unwrap();
                assert_eq!(only_failure(&r), vec![mutation_target(kind).unwrap()], "{kind} on {}", fx.name);
            }
        }
    }

    #[test]
    fn empty_check_list_is_an_empty_report() {
        let r = run_suite(&Fixture::vect_f2(1), Some(&[])).unwrap();
        assert!(r.checks.is_empty() && r.ok());
        assert!(run_suite(&Fixture::vect_f2(1), Some(&["nope".to_string()])).is_err());
    }

    #[test]
    fn unknown_mutation_is_refused() {
        assert!(mutate(&Fixture::vect_f2(1), "flip-everything").is_err());
    }
}
