//! Exhaustive checks of the fixed-point and trace laws over small universes.
//!
//! Every law is an equation between two functions, checked extensionally:
//! both sides are evaluated at every point of their common domain for every
//! combination of monotone functions drawn from the configured universe of
//! wire types. Fixed points go through a [`FixpointOperator`], so a broken
//! operator can be substituted and the suite shown to reject it.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{BaseType, DomainError, FixpointOperator, LValue, MonotoneFn, Signature, Tuple, Ty};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawError {
    #[error("enumerating monotone maps {dom} -> {cod} scans more than {budget} candidates")]
    BudgetExceeded { dom: String, cod: String, budget: u64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawConfig {
    /// Wire types that each single-wire slot of a law ranges over.
    pub universe: Vec<Ty>,
    /// Candidate rows scanned per function-space enumeration.
    pub enum_budget: u64,
    /// Function combinations checked per universe instance.
    pub case_budget: u64,
    /// Random combinations drawn for a universe instance over budget.
    pub samples: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            universe: vec![BaseType::unit(), BaseType::bool()],
            enum_budget: 1_000_000,
            case_budget: 1_000_000,
            samples: 2000,
            seed: 0,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Least fixed points chosen adversarially: the last fixed point in
/// enumeration order. Agrees with [`crate::domain::Kleene`] whenever the
/// fixed point is unique.
#[derive(Debug, Clone, Copy, Default)]
pub struct LastFixedPoint;

impl FixpointOperator for LastFixedPoint {
    fn fix(&self, sig: &Signature, f: &dyn Fn(&[LValue]) -> Tuple) -> Result<Tuple, DomainError> {
        let n = sig
            .cardinality()
            .ok_or_else(|| DomainError::CapExceeded("signature too large".into()))?;
        (0..n)
            .rev()
            .map(|i| sig.tuple_at(i))
            .find(|t| &f(t) == t)
            .ok_or(DomainError::IterationBound { bound: n })
    }
}

fn lower_covers(sig: &Signature, index: usize) -> Vec<usize> {
    let t = sig.tuple_at(index);
    (0..t.len())
        .filter(|&i| !t[i].is_bot())
        .map(|i| {
            let mut down = t.clone();
            down[i] = LValue::Bot;
            sig.index_of(&down)
        })
        .collect()
}

/// Visit every monotone table `dom -> cod` in a fixed order. Rows are
/// assigned in order of increasing definedness, so each row only has to
/// dominate the images of its lower covers.
fn for_each_monotone(
    dom: &Signature,
    cod: &Signature,
    budget: u64,
    visit: &mut dyn FnMut(&[usize]),
) -> Result<(), LawError> {
    let over = || LawError::BudgetExceeded {
        dom: dom.to_string(),
        cod: cod.to_string(),
        budget,
    };
    let n_dom = dom.cardinality().ok_or_else(over)?;
    let n_cod = cod.cardinality().ok_or_else(over)?;
    let cod_tuples: Vec<Tuple> = cod.tuples().collect();
    let below: Vec<Vec<bool>> = cod_tuples
        .iter()
        .map(|x| {
            cod_tuples
                .iter()
                .map(|y| x.iter().zip(y).all(|(a, b)| a.leq(*b)))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..n_dom).collect();
    order.sort_by_key(|&i| (dom.tuple_at(i).iter().filter(|v| !v.is_bot()).count(), i));
    let covers: Vec<Vec<usize>> = (0..n_dom).map(|i| lower_covers(dom, i)).collect();

    struct Walk<'a> {
        order: &'a [usize],
        covers: &'a [Vec<usize>],
        below: &'a [Vec<bool>],
        n_cod: usize,
        rows: Vec<usize>,
        scanned: u64,
        budget: u64,
    }
    fn go(w: &mut Walk<'_>, depth: usize, visit: &mut dyn FnMut(&[usize])) -> bool {
        if depth == w.order.len() {
            visit(&w.rows);
            return true;
        }
        let at = w.order[depth];
        for cand in 0..w.n_cod {
            w.scanned += 1;
            if w.scanned > w.budget {
                return false;
            }
            if w.covers[at].iter().all(|&c| w.below[w.rows[c]][cand]) {
                w.rows[at] = cand;
                if !go(w, depth + 1, visit) {
                    return false;
                }
            }
        }
        true
    }
    let mut walk = Walk {
        order: &order,
        covers: &covers,
        below: &below,
        n_cod,
        rows: vec![0; n_dom],
        scanned: 0,
        budget,
    };
    if go(&mut walk, 0, visit) {
        Ok(())
    } else {
        Err(over())
    }
}

/// All monotone total functions `dom -> cod`, each exactly once, in a
/// deterministic order.
pub fn enumerate_monotone(dom: &Signature, cod: &Signature, budget: u64) -> Result<Vec<MonotoneFn>, LawError> {
    let cod_tuples: Vec<Tuple> = cod.tuples().collect();
    let mut tables = Vec::new();
    for_each_monotone(dom, cod, budget, &mut |rows| tables.push(rows.to_vec()))?;
    tables
        .into_iter()
        .map(|rows| {
            let rows = rows.into_iter().map(|r| cod_tuples[r].clone()).collect();
            MonotoneFn::from_table(dom.clone(), cod.clone(), rows).map_err(LawError::from)
        })
        .collect()
}

/// A random monotone table `dom -> cod`, built one output wire at a time.
///
/// For a flat output wire, the points sent to each atom form disjoint
/// up-sets. Points are visited in order of increasing definedness; a point
/// above an atom-valued point inherits that atom, and an atom may only be
/// chosen freely if no compatible point already holds a different atom.
pub fn random_monotone<R: Rng + ?Sized>(dom: &Signature, cod: &Signature, rng: &mut R) -> Result<MonotoneFn, LawError> {
    let n_dom = dom
        .cardinality()
        .ok_or_else(|| DomainError::CapExceeded(format!("{dom} -> {cod} too large to sample")))?;
    let points: Vec<Tuple> = dom.tuples().collect();
    let mut order: Vec<usize> = (0..n_dom).collect();
    order.sort_by_key(|&i| (points[i].iter().filter(|v| !v.is_bot()).count(), i));
    let covers: Vec<Vec<usize>> = (0..n_dom).map(|i| lower_covers(dom, i)).collect();
    let compatible = |p: &Tuple, q: &Tuple| p.iter().zip(q).all(|(x, y)| x.is_bot() || y.is_bot() || x == y);
    let mut rows = vec![Vec::with_capacity(cod.len()); n_dom];
    for ty in cod.wires() {
        let mut col = vec![LValue::Bot; n_dom];
        for (k, &p) in order.iter().enumerate() {
            if let Some(&c) = covers[p].iter().find(|&&c| !col[c].is_bot()) {
                col[p] = col[c];
                continue;
            }
            if rng.gen_bool(0.5) {
                continue;
            }
            let allowed: Vec<u32> = (0..ty.size() as u32)
                .filter(|&atom| {
                    order[..k]
                        .iter()
                        .all(|&q| col[q].is_bot() || col[q] == LValue::Val(atom) || !compatible(&points[p], &points[q]))
                })
                .collect();
            if let Some(&atom) = allowed.choose(rng) {
                col[p] = LValue::Val(atom);
            }
        }
        for (row, v) in rows.iter_mut().zip(col) {
            row.push(v);
        }
    }
    Ok(MonotoneFn::from_table(dom.clone(), cod.clone(), rows)?)
}

pub fn count_monotone(dom: &Signature, cod: &Signature, budget: u64) -> Result<u64, LawError> {
    let mut n = 0u64;
    for_each_monotone(dom, cod, budget, &mut |_| n += 1)?;
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Law {
    NaturalityA,
    NaturalityX,
    Bekic,
    Yanking,
    Vanishing,
    VanishingPair,
    Sliding,
    Superposing,
}

impl Law {
    pub const ALL: [Law; 8] = [
        Law::NaturalityA,
        Law::NaturalityX,
        Law::Bekic,
        Law::Yanking,
        Law::Vanishing,
        Law::VanishingPair,
        Law::Sliding,
        Law::Superposing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::NaturalityA => "naturality-a",
            Law::NaturalityX => "naturality-x",
            Law::Bekic => "bekic",
            Law::Yanking => "yanking",
            Law::Vanishing => "vanishing",
            Law::VanishingPair => "vanishing-pair",
            Law::Sliding => "sliding",
            Law::Superposing => "superposing",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Law::NaturalityA => "mu_b x. f(g(b), x) = mu(f) . g",
            Law::NaturalityX => "mu_a x. g(f(a, x)) = g . (mu_a y. f(a, g(y)))",
            Law::Bekic => "mu_a (x, y). (f, g) = (h(a), mu(g)(a, h(a)))",
            Law::Yanking => "Tr(swap) = id",
            Law::Vanishing => "Tr over no wires of f = f",
            Law::VanishingPair => "Tr over X*Y = Tr_X . Tr_Y",
            Law::Sliding => "Tr_X((id * g) . f) = Tr_Y(f . (id * g))",
            Law::Superposing => "Tr_X(g * f) = g * Tr_X(f)",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point where the two sides of a law disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub universe: String,
    /// Named function tables, e.g. `("f", "(_, _) -> (_)\n...")`.
    pub functions: Vec<(String, String)>,
    pub at: String,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "universe {}", self.universe)?;
        for (name, table) in &self.functions {
            writeln!(f, "{name}:")?;
            for line in table.lines() {
                writeln!(f, "  {line}")?;
            }
        }
        write!(f, "at {}: left {} right {}", self.at, self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawResult {
    pub law: Law,
    /// Universe instances swept.
    pub universes: usize,
    /// Function combinations checked, summed over universes.
    pub cases: u64,
    /// Universe instances checked through pointwise sections rather than
    /// whole functions.
    pub sectioned: Vec<String>,
    /// Universe instances over budget, checked on random samples instead.
    pub sampled: Vec<String>,
    pub sampled_cases: u64,
    pub counterexample: Option<Counterexample>,
}

impl LawResult {
    fn new(law: Law) -> Self {
        LawResult {
            law,
            universes: 0,
            cases: 0,
            sectioned: Vec::new(),
            sampled: Vec::new(),
            sampled_cases: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub results: Vec<LawResult>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(LawResult::passed)
    }

    pub fn get(&self, law: Law) -> Option<&LawResult> {
        self.results.iter().find(|r| r.law == law)
    }

    pub fn caught_by(&self) -> Vec<Law> {
        self.results.iter().filter(|r| !r.passed()).map(|r| r.law).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            let verdict = if r.passed() { "pass" } else { "FAIL" };
            s.push_str(&format!(
                "{:<15} {verdict}  universes={} cases={}",
                r.law.name(),
                r.universes,
                r.cases
            ));
            if !r.sectioned.is_empty() {
                s.push_str(&format!(" sectioned={}", r.sectioned.len()));
            }
            if !r.sampled.is_empty() {
                s.push_str(&format!(" sampled={}/{}", r.sampled.len(), r.sampled_cases));
            }
            s.push('\n');
            if let Some(cx) = &r.counterexample {
                for line in cx.to_string().lines() {
                    s.push_str(&format!("    {line}\n"));
                }
            }
        }
        s
    }
}

fn sig(tys: &[&Ty]) -> Signature {
    Signature::new(tys.iter().map(|t| (*t).clone()).collect())
}

fn cat(parts: &[&[LValue]]) -> Tuple {
    parts.concat()
}

fn universe_name(slots: &[(&str, &Ty)]) -> String {
    let parts: Vec<String> = slots.iter().map(|(n, t)| format!("{n}={}", t.name())).collect();
    parts.join(" ")
}

/// All assignments of universe types to `n` slots, in lexicographic order.
fn assignments(universe: &[Ty], n: usize) -> Vec<Vec<Ty>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                universe.iter().map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    p
                })
            })
            .collect()
    })
}

/// Check `cases` combinations, possibly in parallel, and return the first
/// failing index in order together with its witness.
fn sweep<C: Send>(
    cases: usize,
    threads: usize,
    check: &(dyn Fn(usize) -> Result<Option<C>, DomainError> + Sync),
) -> Result<Option<(usize, C)>, DomainError> {
    let threads = threads.clamp(1, cases.max(1));
    let first_bad = AtomicUsize::new(usize::MAX);
    let found: Mutex<Vec<(usize, C)>> = Mutex::new(Vec::new());
    let error: Mutex<Option<DomainError>> = Mutex::new(None);
    let chunk = cases.div_ceil(threads);
    std::thread::scope(|s| {
        for t in 0..threads {
            let (first_bad, found, error) = (&first_bad, &found, &error);
            s.spawn(move || {
                for i in t * chunk..((t + 1) * chunk).min(cases) {
                    if i > first_bad.load(Ordering::Relaxed) {
                        return;
                    }
                    match check(i) {
                        Ok(None) => {}
                        Ok(Some(c)) => {
                            first_bad.fetch_min(i, Ordering::Relaxed);
                            found.lock().unwrap().push((i, c));
                            return;
                        }
                        Err(e) => {
                            *error.lock().unwrap() = Some(e);
                            first_bad.fetch_min(i, Ordering::Relaxed);
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = error.into_inner().unwrap() {
        return Err(e);
    }
    let mut found = found.into_inner().unwrap();
    found.sort_by_key(|(i, _)| *i);
    Ok(found.into_iter().next())
}

/// Fixed point of `x ↦ f(a, x)` projected onto the trailing `x.len()` wires
/// of `f`'s output, followed by the remaining leading output wires.
fn trace_at(
    op: &dyn FixpointOperator,
    f: &dyn Fn(&[LValue]) -> Tuple,
    a: &[LValue],
    x: &Signature,
) -> Result<Tuple, DomainError> {
    let fixed = op.fix(x, &|xv: &[LValue]| {
        let out = f(&cat(&[a, xv]));
        out[out.len() - xv.len()..].to_vec()
    })?;
    let mut out = f(&cat(&[a, &fixed]));
    out.truncate(out.len() - x.len());
    Ok(out)
}

enum Cases {
    Product(Vec<Vec<MonotoneFn>>),
    Sampled(Vec<Vec<MonotoneFn>>),
}

struct Sweep<'a> {
    cfg: &'a LawConfig,
    rng: ChaCha8Rng,
    result: LawResult,
}

impl<'a> Sweep<'a> {
    fn new(law: Law, cfg: &'a LawConfig) -> Self {
        Sweep {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            result: LawResult::new(law),
        }
    }

    /// Function combinations for one universe instance: the full product
    /// of the enumerated spaces when within budget, otherwise a seeded
    /// random sample of combinations.
    fn spaces(&mut self, universe: &str, spaces: &[(&Signature, &Signature)]) -> Result<Cases, LawError> {
        let mut out = Vec::new();
        for (dom, cod) in spaces {
            match enumerate_monotone(dom, cod, self.cfg.enum_budget) {
                Ok(fs) => out.push(Some(fs)),
                Err(LawError::BudgetExceeded { .. }) => out.push(None),
                Err(e) => return Err(e),
            }
        }
        let cases = out
            .iter()
            .map(|fs| fs.as_ref().map(|fs| fs.len() as u128))
            .try_fold(1u128, |acc, n| n.map(|n| acc.saturating_mul(n)));
        if cases.is_some_and(|n| n <= self.cfg.case_budget as u128) {
            return Ok(Cases::Product(out.into_iter().flatten().collect()));
        }
        self.result.sampled.push(universe.to_string());
        let mut combos = Vec::with_capacity(self.cfg.samples);
        for _ in 0..self.cfg.samples {
            let combo = spaces
                .iter()
                .zip(&out)
                .map(|((dom, cod), fs)| match fs {
                    Some(fs) => Ok(fs[self.rng.gen_range(0..fs.len())].clone()),
                    None => random_monotone(dom, cod, &mut self.rng),
                })
                .collect::<Result<Vec<_>, _>>()?;
            combos.push(combo);
        }
        Ok(Cases::Sampled(combos))
    }

    /// Check every combination in `cases`; `check` gets one function per
    /// space and returns the first disagreeing point with both sides.
    fn run(
        &mut self,
        universe: String,
        names: &[&str],
        cases: &Cases,
        check: &(dyn Fn(&[&MonotoneFn]) -> Result<Option<(String, String, String)>, DomainError> + Sync),
    ) -> Result<(), LawError> {
        let (count, sampled) = match cases {
            Cases::Product(spaces) => (spaces.iter().map(Vec::len).product(), false),
            Cases::Sampled(combos) => (combos.len(), true),
        };
        let pick = |mut i: usize| -> Vec<&MonotoneFn> {
            match cases {
                Cases::Product(spaces) => {
                    let mut picked = Vec::with_capacity(spaces.len());
                    for fs in spaces.iter().rev() {
                        picked.push(&fs[i % fs.len()]);
                        i /= fs.len();
                    }
                    picked.reverse();
                    picked
                }
                Cases::Sampled(combos) => combos[i].iter().collect(),
            }
        };
        self.result.universes += 1;
        if sampled {
            self.result.sampled_cases += count as u64;
        } else {
            self.result.cases += count as u64;
        }
        if self.result.counterexample.is_some() {
            return Ok(());
        }
        let hit = sweep(count, self.cfg.threads, &|i| check(&pick(i)))?;
        if let Some((i, (at, left, right))) = hit {
            let fs = pick(i);
            self.result.counterexample = Some(Counterexample {
                universe,
                functions: names.iter().zip(fs).map(|(n, f)| (n.to_string(), f.show_table())).collect(),
                at,
                left,
                right,
            });
        }
        Ok(())
    }
}

/// First point of `dom` where `left` and `right` differ.
fn compare(
    dom: &Signature,
    cod: &Signature,
    mut left: impl FnMut(&[LValue]) -> Result<Tuple, DomainError>,
    mut right: impl FnMut(&[LValue]) -> Result<Tuple, DomainError>,
) -> Result<Option<(String, String, String)>, DomainError> {
    for p in dom.tuples() {
        let (l, r) = (left(&p)?, right(&p)?);
        if l != r {
            return Ok(Some((dom.show(&p), cod.show(&l), cod.show(&r))));
        }
    }
    Ok(None)
}

/// `μ_b x. f(g(b), x) = μ(f) ∘ g` for `f : A × X → X`, `g : B → A`.
pub fn check_naturality_a(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::NaturalityA, cfg);
    for tys in assignments(&cfg.universe, 3) {
        let (a, x, b) = (&tys[0], &tys[1], &tys[2]);
        let name = universe_name(&[("A", a), ("X", x), ("B", b)]);
        let (sa, sx, sb) = (sig(&[a]), sig(&[x]), sig(&[b]));
        let fdom = sa.concat(&sx);
        let spaces = sw.spaces(&name, &[(&fdom, &sx), (&sb, &sa)])?;
        sw.run(name, &["f", "g"], &spaces, &|fs| {
            let (f, g) = (fs[0], fs[1]);
            let mu_f = |av: &[LValue]| op.fix(&sx, &|xv: &[LValue]| f.apply(&cat(&[av, xv])));
            let composite = |bx: &[LValue]| f.apply(&cat(&[&g.apply(&bx[..1]), &bx[1..]]));
            compare(
                &sb,
                &sx,
                |bv| op.fix(&sx, &|xv: &[LValue]| composite(&cat(&[bv, xv]))),
                |bv| mu_f(&g.apply(bv)),
            )
        })?;
    }
    Ok(sw.result)
}

/// `μ_a x. g(f(a, x)) = g ∘ (μ_a y. f(a, g(y)))` for `f : A × X → Y`, `g : Y → X`.
pub fn check_naturality_x(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::NaturalityX, cfg);
    for tys in assignments(&cfg.universe, 3) {
        let (a, x, y) = (&tys[0], &tys[1], &tys[2]);
        let name = universe_name(&[("A", a), ("X", x), ("Y", y)]);
        let (sa, sx, sy) = (sig(&[a]), sig(&[x]), sig(&[y]));
        let fdom = sa.concat(&sx);
        let spaces = sw.spaces(&name, &[(&fdom, &sy), (&sy, &sx)])?;
        sw.run(name, &["f", "g"], &spaces, &|fs| {
            let (f, g) = (fs[0], fs[1]);
            compare(
                &sa,
                &sx,
                |av| op.fix(&sx, &|xv: &[LValue]| g.apply(&f.apply(&cat(&[av, xv])))),
                |av| {
                    let y = op.fix(&sy, &|yv: &[LValue]| f.apply(&cat(&[av, &g.apply(yv)])))?;
                    Ok(g.apply(&y))
                },
            )
        })?;
    }
    Ok(sw.result)
}

/// Simultaneous versus nested fixed points for `f : A × X × Y → X` and
/// `g : A × X × Y → Y`.
///
/// Both sides at a point `a` depend only on the sections `f(a, -, -)` and
/// `g(a, -, -)`, and every pair of monotone maps `X × Y → X`, `X × Y → Y`
/// arises as such a pair of sections. When the whole function space is over
/// budget the sweep runs over section pairs instead, which covers the same
/// set of equations.
pub fn check_bekic(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::Bekic, cfg);
    for tys in assignments(&cfg.universe, 3) {
        let (a, x, y) = (&tys[0], &tys[1], &tys[2]);
        let name = universe_name(&[("A", a), ("X", x), ("Y", y)]);
        let (sx, sy) = (sig(&[x]), sig(&[y]));
        let xy = sx.concat(&sy);
        let full_dom = sig(&[a]).concat(&xy);
        let full_fits = |n: Result<u64, LawError>| n.ok().map(|n| n as u128);
        let fits = match (
            full_fits(count_monotone(&full_dom, &sx, cfg.enum_budget)),
            full_fits(count_monotone(&full_dom, &sy, cfg.enum_budget)),
        ) {
            (Some(nf), Some(ng)) => nf * ng <= cfg.case_budget as u128,
            _ => false,
        };
        let sa = if fits {
            sig(&[a])
        } else {
            sw.result.sectioned.push(name.clone());
            Signature::empty()
        };
        let dom = sa.concat(&xy);
        let spaces = sw.spaces(&name, &[(&dom, &sx), (&dom, &sy)])?;
        sw.run(name, &["f", "g"], &spaces, &|fs| {
            let (f, g) = (fs[0], fs[1]);
            let mu_g = |av: &[LValue], xv: &[LValue]| op.fix(&sy, &|yv: &[LValue]| g.apply(&cat(&[av, xv, yv])));
            compare(
                &sa,
                &xy,
                |av| {
                    op.fix(&xy, &|p: &[LValue]| {
                        let arg = cat(&[av, p]);
                        cat(&[&f.apply(&arg), &g.apply(&arg)])
                    })
                },
                |av| {
                    let h = op.fix(&sx, &|xv: &[LValue]| {
                        let yv = mu_g(av, xv).expect("fixed point exists");
                        f.apply(&cat(&[av, xv, &yv]))
                    })?;
                    let yv = mu_g(av, &h)?;
                    Ok(cat(&[&h, &yv]))
                },
            )
        })?;
    }
    Ok(sw.result)
}

fn yanking(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::Yanking, cfg);
    for a in &cfg.universe {
        let name = universe_name(&[("A", a)]);
        let sa = sig(&[a]);
        let swap = |t: &[LValue]| vec![t[1], t[0]];
        let id = MonotoneFn::identity(sa.clone()).tabulate()?;
        sw.run(name, &["id"], &Cases::Product(vec![vec![id]]), &|fs| {
            compare(&sa, &sa, |av| trace_at(op, &swap, av, &sa), |av| Ok(fs[0].apply(av)))
        })?;
    }
    Ok(sw.result)
}

fn vanishing(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::Vanishing, cfg);
    let none = Signature::empty();
    for tys in assignments(&cfg.universe, 2) {
        let (a, b) = (&tys[0], &tys[1]);
        let name = universe_name(&[("A", a), ("B", b)]);
        let (sa, sb) = (sig(&[a]), sig(&[b]));
        let spaces = sw.spaces(&name, &[(&sa, &sb)])?;
        sw.run(name, &["f"], &spaces, &|fs| {
            let f = fs[0];
            compare(&sa, &sb, |av| trace_at(op, &|t| f.apply(t), av, &none), |av| Ok(f.apply(av)))
        })?;
    }
    Ok(sw.result)
}

fn vanishing_pair(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::VanishingPair, cfg);
    for tys in assignments(&cfg.universe, 4) {
        let (a, b, x, y) = (&tys[0], &tys[1], &tys[2], &tys[3]);
        let name = universe_name(&[("A", a), ("B", b), ("X", x), ("Y", y)]);
        let (sa, sb, sx, sy) = (sig(&[a]), sig(&[b]), sig(&[x]), sig(&[y]));
        let xy = sx.concat(&sy);
        let dom = sa.concat(&xy);
        let cod = sb.concat(&xy);
        let spaces = sw.spaces(&name, &[(&dom, &cod)])?;
        sw.run(name, &["f"], &spaces, &|fs| {
            let f = |t: &[LValue]| fs[0].apply(t);
            let inner = |ax: &[LValue]| trace_at(op, &f, ax, &sy).expect("fixed point exists");
            compare(&sa, &sb, |av| trace_at(op, &f, av, &xy), |av| trace_at(op, &inner, av, &sx))
        })?;
    }
    Ok(sw.result)
}

fn sliding(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::Sliding, cfg);
    for tys in assignments(&cfg.universe, 4) {
        let (a, b, x, y) = (&tys[0], &tys[1], &tys[2], &tys[3]);
        let name = universe_name(&[("A", a), ("B", b), ("X", x), ("Y", y)]);
        let (sa, sb, sx, sy) = (sig(&[a]), sig(&[b]), sig(&[x]), sig(&[y]));
        let fdom = sa.concat(&sx);
        let fcod = sb.concat(&sy);
        let spaces = sw.spaces(&name, &[(&fdom, &fcod), (&sy, &sx)])?;
        sw.run(name, &["f", "g"], &spaces, &|fs| {
            let (f, g) = (fs[0], fs[1]);
            // (id_B × g) ∘ f : A × X → B × X
            let post = |ax: &[LValue]| {
                let by = f.apply(ax);
                cat(&[&by[..1], &g.apply(&by[1..])])
            };
            // f ∘ (id_A × g) : A × Y → B × Y
            let pre = |ay: &[LValue]| f.apply(&cat(&[&ay[..1], &g.apply(&ay[1..])]));
            compare(&sa, &sb, |av| trace_at(op, &post, av, &sx), |av| trace_at(op, &pre, av, &sy))
        })?;
    }
    Ok(sw.result)
}

fn superposing(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawResult, LawError> {
    let mut sw = Sweep::new(Law::Superposing, cfg);
    for tys in assignments(&cfg.universe, 5) {
        let (c, d, a, b, x) = (&tys[0], &tys[1], &tys[2], &tys[3], &tys[4]);
        let name = universe_name(&[("C", c), ("D", d), ("A", a), ("B", b), ("X", x)]);
        let (sc, sd, sa, sb, sx) = (sig(&[c]), sig(&[d]), sig(&[a]), sig(&[b]), sig(&[x]));
        let fdom = sa.concat(&sx);
        let fcod = sb.concat(&sx);
        let spaces = sw.spaces(&name, &[(&fdom, &fcod), (&sc, &sd)])?;
        let ca = sc.concat(&sa);
        let db = sd.concat(&sb);
        sw.run(name, &["f", "g"], &spaces, &|fs| {
            let (f, g) = (fs[0], fs[1]);
            let both = |cax: &[LValue]| cat(&[&g.apply(&cax[..1]), &f.apply(&cax[1..])]);
            let f_fn = |t: &[LValue]| f.apply(t);
            compare(
                &ca,
                &db,
                |cav| trace_at(op, &both, cav, &sx),
                |cav| Ok(cat(&[&g.apply(&cav[..1]), &trace_at(op, &f_fn, &cav[1..], &sx)?])),
            )
        })?;
    }
    Ok(sw.result)
}

/// Yanking, vanishing (over no wires and over a pair of wires), sliding and
/// superposing for the trace built from `op`.
pub fn check_derived_trace_axioms(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<Vec<LawResult>, LawError> {
    Ok(vec![
        yanking(op, cfg)?,
        vanishing(op, cfg)?,
        vanishing_pair(op, cfg)?,
        sliding(op, cfg)?,
        superposing(op, cfg)?,
    ])
}

pub fn check_all(op: &dyn FixpointOperator, cfg: &LawConfig) -> Result<LawReport, LawError> {
    let mut results = vec![
        check_naturality_a(op, cfg)?,
        check_naturality_x(op, cfg)?,
        check_bekic(op, cfg)?,
    ];
    results.extend(check_derived_trace_axioms(op, cfg)?);
    Ok(LawReport { results })
}
