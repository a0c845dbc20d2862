//! Lifted flat domains and the fixed-point machinery built on them.
//!
//! A wire carries an [`LValue`]: either `Bot` or the index of an atom of its
//! [`BaseType`]. Tuples of wires are ordered pointwise, and every monotone
//! endomap on such a product has a least fixed point reachable by Kleene
//! iteration from the all-`Bot` tuple in at most `wires + 1` applications.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Shared handle to a base type.
pub type Ty = Arc<BaseType>;

/// A tuple of wire values.
pub type Tuple = Vec<LValue>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("base type `{0}` has no values")]
    EmptyBaseType(String),
    #[error("base type `{ty}` lists atom `{atom}` twice")]
    DuplicateAtom { ty: String, atom: String },
    #[error("signature error: expected {expected} wires, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("signature error: expected `{expected}`, found `{found}`")]
    TypeMismatch { expected: String, found: String },
    #[error("value index {index} is not an atom of `{ty}`")]
    NotConforming { ty: String, index: u32 },
    #[error("unknown atom `{atom}` for type `{ty}`")]
    UnknownAtom { ty: String, atom: String },
    #[error("not exhaustively checkable: {0}")]
    CapExceeded(String),
    #[error("table has {found} rows, domain has {expected} tuples")]
    TableSize { expected: usize, found: usize },
    #[error("function is not monotone: {lower:?} <= {upper:?} but images are not ordered")]
    NotMonotone { lower: Tuple, upper: Tuple },
    #[error("Kleene chain did not stabilise within {bound} applications")]
    IterationBound { bound: usize },
    #[error("Kleene chain is not ascending at step {step}")]
    ChainNotAscending { step: usize },
    #[error("malformed split: {0}")]
    Split(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseKind {
    Bool,
    Unit,
    IntRange { lo: i64, hi: i64 },
    Enum,
}

/// A finite, ordered universe of atoms carried by a wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseType {
    name: String,
    values: Vec<String>,
    kind: BaseKind,
}

impl BaseType {
    pub fn new_enum(name: impl Into<String>, values: Vec<String>) -> Result<Ty, DomainError> {
        Self::build(name.into(), values, BaseKind::Enum)
    }

    fn build(name: String, values: Vec<String>, kind: BaseKind) -> Result<Ty, DomainError> {
        if values.is_empty() {
            return Err(DomainError::EmptyBaseType(name));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(DomainError::DuplicateAtom {
                    ty: name,
                    atom: v.clone(),
                });
            }
        }
        Ok(Arc::new(BaseType { name, values, kind }))
    }

    pub fn bool() -> Ty {
        Arc::new(BaseType {
            name: "bool".into(),
            values: vec!["0".into(), "1".into()],
            kind: BaseKind::Bool,
        })
    }

    /// The singleton type `{0}`; its lifting is the two-point domain.
    pub fn unit() -> Ty {
        Arc::new(BaseType {
            name: "unit".into(),
            values: vec!["0".into()],
            kind: BaseKind::Unit,
        })
    }

    /// Integers `lo..=hi`.
    pub fn int_range(lo: i64, hi: i64) -> Result<Ty, DomainError> {
        let name = format!("int[{lo}..{hi}]");
        if hi < lo {
            return Err(DomainError::EmptyBaseType(name));
        }
        let values = (lo..=hi).map(|v| v.to_string()).collect();
        Self::build(name, values, BaseKind::IntRange { lo, hi })
    }

    /// An enumerated type named `name` with atoms `a0, a1, ...`; handy for
    /// building test universes of a given size.
    pub fn sized(name: impl Into<String>, n: usize) -> Result<Ty, DomainError> {
        Self::new_enum(name, (0..n).map(|i| format!("a{i}")).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &BaseKind {
        &self.kind
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn atom_index(&self, atom: &str) -> Result<u32, DomainError> {
        self.values
            .iter()
            .position(|v| v == atom)
            .map(|i| i as u32)
            .ok_or_else(|| DomainError::UnknownAtom {
                ty: self.name.clone(),
                atom: atom.to_string(),
            })
    }

    pub fn atom(&self, index: u32) -> Option<&str> {
        self.values.get(index as usize).map(String::as_str)
    }

    /// Integer carried by atom `index` for integer ranges.
    pub fn int_value(&self, index: u32) -> Option<i64> {
        match self.kind {
            BaseKind::IntRange { lo, .. } if (index as usize) < self.values.len() => {
                Some(lo + index as i64)
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: LValue) -> bool {
        match v {
            LValue::Bot => true,
            LValue::Val(i) => (i as usize) < self.values.len(),
        }
    }

    /// Parse `_`/`bot` as bottom, anything else as an atom.
    pub fn parse_lvalue(&self, text: &str) -> Result<LValue, DomainError> {
        match text {
            "_" | "bot" => Ok(LValue::Bot),
            atom => self.atom_index(atom).map(LValue::Val),
        }
    }

    /// Render with `bot_token` standing for bottom.
    pub fn show(&self, v: LValue, bot_token: &str) -> String {
        match v {
            LValue::Bot => bot_token.to_string(),
            LValue::Val(i) => self.atom(i).unwrap_or("?").to_string(),
        }
    }

    /// Every element of the lifted type, `Bot` first.
    pub fn lifted_values(&self) -> impl Iterator<Item = LValue> + '_ {
        std::iter::once(LValue::Bot).chain((0..self.values.len() as u32).map(LValue::Val))
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// An element of a lifted flat domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LValue {
    Bot,
    Val(u32),
}

impl LValue {
    /// `Bot` is below everything; distinct values are incomparable.
    pub fn leq(self, other: LValue) -> bool {
        self == LValue::Bot || self == other
    }

    pub fn is_bot(self) -> bool {
        self == LValue::Bot
    }

    /// Position in the lifted enumeration order (`Bot` = 0).
    pub fn code(self) -> usize {
        match self {
            LValue::Bot => 0,
            LValue::Val(i) => i as usize + 1,
        }
    }

    pub fn from_code(code: usize) -> LValue {
        if code == 0 {
            LValue::Bot
        } else {
            LValue::Val((code - 1) as u32)
        }
    }
}

/// Typed comparison: both values must come from the same lifted base type.
pub fn leq(ty_x: &BaseType, x: LValue, ty_y: &BaseType, y: LValue) -> Result<bool, DomainError> {
    if ty_x != ty_y {
        return Err(DomainError::TypeMismatch {
            expected: ty_x.name.clone(),
            found: ty_y.name.clone(),
        });
    }
    for v in [x, y] {
        if !ty_x.contains(v) {
            return Err(not_conforming(ty_x, v));
        }
    }
    Ok(x.leq(y))
}

/// Pointwise order on tuples.
pub fn tuple_leq(t1: &[LValue], t2: &[LValue]) -> Result<bool, DomainError> {
    if t1.len() != t2.len() {
        return Err(DomainError::Arity {
            expected: t1.len(),
            found: t2.len(),
        });
    }
    Ok(leq_unchecked(t1, t2))
}

pub(crate) fn leq_unchecked(t1: &[LValue], t2: &[LValue]) -> bool {
    t1.iter().zip(t2).all(|(a, b)| a.leq(*b))
}

fn not_conforming(ty: &BaseType, v: LValue) -> DomainError {
    DomainError::NotConforming {
        ty: ty.name.clone(),
        index: match v {
            LValue::Val(i) => i,
            LValue::Bot => 0,
        },
    }
}

/// Limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumCap {
    pub max_values: usize,
    pub max_wires: usize,
}

impl Default for EnumCap {
    fn default() -> Self {
        EnumCap {
            max_values: 8,
            max_wires: 4,
        }
    }
}

/// Ordered list of wire types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    wires: Vec<Ty>,
}

impl Signature {
    pub fn new(wires: Vec<Ty>) -> Self {
        Signature { wires }
    }

    pub fn empty() -> Self {
        Signature { wires: Vec::new() }
    }

    pub fn repeat(ty: &Ty, n: usize) -> Self {
        Signature {
            wires: vec![ty.clone(); n],
        }
    }

    pub fn wires(&self) -> &[Ty] {
        &self.wires
    }

    pub fn len(&self) -> usize {
        self.wires.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wires.is_empty()
    }

    pub fn concat(&self, other: &Signature) -> Signature {
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().cloned());
        Signature { wires }
    }

    pub fn split_at(&self, mid: usize) -> (Signature, Signature) {
        let (a, b) = self.wires.split_at(mid);
        (Signature::new(a.to_vec()), Signature::new(b.to_vec()))
    }

    pub fn bottom(&self) -> Tuple {
        vec![LValue::Bot; self.wires.len()]
    }

    pub fn conforms(&self, t: &[LValue]) -> Result<(), DomainError> {
        if t.len() != self.wires.len() {
            return Err(DomainError::Arity {
                expected: self.wires.len(),
                found: t.len(),
            });
        }
        for (ty, v) in self.wires.iter().zip(t) {
            if !ty.contains(*v) {
                return Err(not_conforming(ty, *v));
            }
        }
        Ok(())
    }

    /// Number of tuples in the lifted product, if it fits in a `usize`.
    pub fn cardinality(&self) -> Option<usize> {
        self.wires
            .iter()
            .try_fold(1usize, |acc, ty| acc.checked_mul(ty.size() + 1))
    }

    pub fn check_cap(&self, cap: &EnumCap) -> Result<(), DomainError> {
        if self.wires.len() > cap.max_wires {
            return Err(DomainError::CapExceeded(format!(
                "{} wires exceed the cap of {}",
                self.wires.len(),
                cap.max_wires
            )));
        }
        if let Some(ty) = self.wires.iter().find(|ty| ty.size() > cap.max_values) {
            return Err(DomainError::CapExceeded(format!(
                "type `{}` has {} values, cap is {}",
                ty.name,
                ty.size(),
                cap.max_values
            )));
        }
        Ok(())
    }

    /// Mixed-radix index of `t`; the first wire is the most significant digit.
    pub fn index_of(&self, t: &[LValue]) -> usize {
        self.wires
            .iter()
            .zip(t)
            .fold(0, |acc, (ty, v)| acc * (ty.size() + 1) + v.code())
    }

    pub fn tuple_at(&self, mut index: usize) -> Tuple {
        let mut t = vec![LValue::Bot; self.wires.len()];
        for (slot, ty) in t.iter_mut().zip(&self.wires).rev() {
            let radix = ty.size() + 1;
            *slot = LValue::from_code(index % radix);
            index /= radix;
        }
        t
    }

    /// All tuples in lexicographic order (`Bot` before atoms).
    pub fn tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        let n = self.cardinality().expect("signature too large to enumerate");
        (0..n).map(move |i| self.tuple_at(i))
    }

    pub fn random_tuple<R: Rng + ?Sized>(&self, rng: &mut R, bot_weight: f64) -> Tuple {
        self.wires
            .iter()
            .map(|ty| {
                if rng.gen_bool(bot_weight) {
                    LValue::Bot
                } else {
                    LValue::Val(rng.gen_range(0..ty.size() as u32))
                }
            })
            .collect()
    }

    /// Show a tuple as space-separated atoms, `_` for bottom.
    pub fn show(&self, t: &[LValue]) -> String {
        let cells: Vec<String> = self
            .wires
            .iter()
            .zip(t)
            .map(|(ty, v)| ty.show(*v, "_"))
            .collect();
        format!("({})", cells.join(", "))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.wires.iter().map(|t| t.name()).collect();
        write!(f, "({})", names.join(", "))
    }
}

type CodeFn = dyn Fn(&[LValue]) -> Tuple + Send + Sync;

#[derive(Clone)]
enum Repr {
    Table(Arc<[Tuple]>),
    Code(Arc<CodeFn>),
}

/// A total function between lifted products, stored either as an explicit
/// table indexed by [`Signature::index_of`] or as executable code.
#[derive(Clone)]
pub struct MonotoneFn {
    dom: Signature,
    cod: Signature,
    repr: Repr,
}

impl fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            Repr::Table(_) => "table",
            Repr::Code(_) => "code",
        };
        write!(f, "MonotoneFn({} -> {}, {repr})", self.dom, self.cod)
    }
}

impl MonotoneFn {
    pub fn from_table(dom: Signature, cod: Signature, rows: Vec<Tuple>) -> Result<Self, DomainError> {
        let expected = dom
            .cardinality()
            .ok_or_else(|| DomainError::CapExceeded("domain too large for a table".into()))?;
        if rows.len() != expected {
            return Err(DomainError::TableSize {
                expected,
                found: rows.len(),
            });
        }
        for row in &rows {
            cod.conforms(row)?;
        }
        Ok(MonotoneFn {
            dom,
            cod,
            repr: Repr::Table(rows.into()),
        })
    }

    pub fn from_fn<F>(dom: Signature, cod: Signature, f: F) -> Self
    where
        F: Fn(&[LValue]) -> Tuple + Send + Sync + 'static,
    {
        MonotoneFn {
            dom,
            cod,
            repr: Repr::Code(Arc::new(f)),
        }
    }

    pub fn identity(sig: Signature) -> Self {
        MonotoneFn::from_fn(sig.clone(), sig, |t| t.to_vec())
    }

    pub fn dom(&self) -> &Signature {
        &self.dom
    }

    pub fn cod(&self) -> &Signature {
        &self.cod
    }

    pub fn is_table(&self) -> bool {
        matches!(self.repr, Repr::Table(_))
    }

    pub fn table_rows(&self) -> Option<&[Tuple]> {
        match &self.repr {
            Repr::Table(rows) => Some(rows),
            Repr::Code(_) => None,
        }
    }

    /// Apply without conformance checks; the caller guarantees `t` conforms to `dom`.
    pub fn apply(&self, t: &[LValue]) -> Tuple {
        match &self.repr {
            Repr::Table(rows) => rows[self.dom.index_of(t)].clone(),
            Repr::Code(f) => f(t),
        }
    }

    pub fn try_apply(&self, t: &[LValue]) -> Result<Tuple, DomainError> {
        self.dom.conforms(t)?;
        let out = self.apply(t);
        self.cod.conforms(&out)?;
        Ok(out)
    }

    /// Materialise as an explicit table.
    pub fn tabulate(&self) -> Result<MonotoneFn, DomainError> {
        if self.is_table() {
            return Ok(self.clone());
        }
        if self.dom.cardinality().is_none() {
            return Err(DomainError::CapExceeded("domain too large for a table".into()));
        }
        let rows = self.dom.tuples().map(|t| self.apply(&t)).collect();
        MonotoneFn::from_table(self.dom.clone(), self.cod.clone(), rows)
    }

    /// First input (in enumeration order) on which the two functions differ.
    pub fn first_difference(&self, other: &MonotoneFn) -> Result<Option<Tuple>, DomainError> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(DomainError::TypeMismatch {
                expected: format!("{} -> {}", self.dom, self.cod),
                found: format!("{} -> {}", other.dom, other.cod),
            });
        }
        if self.dom.cardinality().is_none() {
            return Err(DomainError::CapExceeded("domain too large to compare".into()));
        }
        Ok(self.dom.tuples().find(|t| self.apply(t) != other.apply(t)))
    }

    pub fn table_eq(&self, other: &MonotoneFn) -> bool {
        matches!(self.first_difference(other), Ok(None))
    }

    /// Sequential composition `other ∘ self`.
    pub fn then(&self, other: &MonotoneFn) -> Result<MonotoneFn, DomainError> {
        if self.cod != other.dom {
            return Err(DomainError::TypeMismatch {
                expected: other.dom.to_string(),
                found: self.cod.to_string(),
            });
        }
        let (f, g) = (self.clone(), other.clone());
        Ok(MonotoneFn::from_fn(self.dom.clone(), other.cod.clone(), move |t| {
            g.apply(&f.apply(t))
        }))
    }

    /// Parallel product `self × other`.
    pub fn product(&self, other: &MonotoneFn) -> MonotoneFn {
        let (f, g) = (self.clone(), other.clone());
        let split = self.dom.len();
        MonotoneFn::from_fn(
            self.dom.concat(&other.dom),
            self.cod.concat(&other.cod),
            move |t| {
                let mut out = f.apply(&t[..split]);
                out.extend(g.apply(&t[split..]));
                out
            },
        )
    }

    /// Render as `input -> output` lines.
    pub fn show_table(&self) -> String {
        let mut s = String::new();
        for t in self.dom.tuples() {
            let out = self.apply(&t);
            s.push_str(&format!("{} -> {}\n", self.dom.show(&t), self.cod.show(&out)));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Monotonicity {
    Monotone,
    Violation { lower: Tuple, upper: Tuple },
}

impl Monotonicity {
    pub fn holds(&self) -> bool {
        matches!(self, Monotonicity::Monotone)
    }
}

/// Exhaustive monotonicity check.
///
/// Only covering pairs (one coordinate raised from `Bot` to an atom) are
/// examined; the full order is their transitive closure.
pub fn is_monotone(f: &MonotoneFn, cap: &EnumCap) -> Result<Monotonicity, DomainError> {
    f.dom.check_cap(cap)?;
    for t in f.dom.tuples() {
        let image = f.apply(&t);
        for (i, ty) in f.dom.wires.iter().enumerate() {
            if !t[i].is_bot() {
                continue;
            }
            for v in 0..ty.size() as u32 {
                let mut up = t.clone();
                up[i] = LValue::Val(v);
                if !leq_unchecked(&image, &f.apply(&up)) {
                    return Ok(Monotonicity::Violation { lower: t, upper: up });
                }
            }
        }
    }
    Ok(Monotonicity::Monotone)
}

/// Randomised monotonicity check for functions too large to enumerate.
pub fn spot_check_monotone<R: Rng + ?Sized>(f: &MonotoneFn, samples: usize, rng: &mut R) -> Monotonicity {
    for _ in 0..samples {
        let upper = f.dom.random_tuple(rng, 0.2);
        let lower: Tuple = upper
            .iter()
            .map(|v| if rng.gen_bool(0.5) { LValue::Bot } else { *v })
            .collect();
        if !leq_unchecked(&f.apply(&lower), &f.apply(&upper)) {
            return Monotonicity::Violation { lower, upper };
        }
    }
    Monotonicity::Monotone
}

/// Number of random samples used when monotonicity cannot be enumerated.
pub const DEFAULT_SPOT_CHECKS: usize = 1000;

/// Stabilisation bounds for a product of `wires` lifted flat domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightBound {
    pub wires: usize,
}

impl HeightBound {
    pub fn for_signature(sig: &Signature) -> Self {
        HeightBound { wires: sig.len() }
    }

    /// Certified cap on Kleene applications: every non-final step raises a coordinate.
    pub fn certified(&self) -> usize {
        self.wires + 1
    }

    /// Product of per-wire height bounds (2 per lifted flat wire).
    pub fn product(&self) -> u128 {
        1u128.checked_shl(self.wires as u32).unwrap_or(u128::MAX)
    }
}

/// Outcome of a Kleene iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KleeneRun {
    pub value: Tuple,
    /// Applications of the function performed, including the confirming one.
    pub applications: usize,
    /// Strict rises in the chain before it became stationary.
    pub rises: usize,
}

/// Iterate `step` from the all-`Bot` tuple of length `width` until two
/// consecutive iterates agree. Refuses to go past `width + 1` applications
/// and reports a descending step instead of looping.
pub fn kleene<F>(width: usize, mut step: F) -> Result<KleeneRun, DomainError>
where
    F: FnMut(&[LValue]) -> Tuple,
{
    let bound = width + 1;
    let mut x = vec![LValue::Bot; width];
    for applications in 1..=bound {
        let next = step(&x);
        if next == x {
            return Ok(KleeneRun {
                value: x,
                applications,
                rises: applications - 1,
            });
        }
        if !leq_unchecked(&x, &next) {
            return Err(DomainError::ChainNotAscending { step: applications });
        }
        x = next;
    }
    Err(DomainError::IterationBound { bound })
}

/// A rule choosing a fixed point for each endomap. [`Kleene`] is the
/// reference; alternative operators exist so the law checks can be shown
/// to reject wrong ones.
pub trait FixpointOperator: Sync {
    fn fix(&self, sig: &Signature, f: &dyn Fn(&[LValue]) -> Tuple) -> Result<Tuple, DomainError>;
}

/// Least fixed point by Kleene iteration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kleene;

impl FixpointOperator for Kleene {
    fn fix(&self, sig: &Signature, f: &dyn Fn(&[LValue]) -> Tuple) -> Result<Tuple, DomainError> {
        kleene(sig.len(), f).map(|run| run.value)
    }
}

fn require_monotone(f: &MonotoneFn) -> Result<(), DomainError> {
    let cap = EnumCap::default();
    if f.dom.check_cap(&cap).is_ok() {
        if let Monotonicity::Violation { lower, upper } = is_monotone(f, &cap)? {
            return Err(DomainError::NotMonotone { lower, upper });
        }
    }
    Ok(())
}

/// Least fixed point of an endomap, with iteration statistics.
pub fn lfp_run(f: &MonotoneFn) -> Result<KleeneRun, DomainError> {
    if f.dom != f.cod {
        return Err(DomainError::TypeMismatch {
            expected: f.dom.to_string(),
            found: f.cod.to_string(),
        });
    }
    require_monotone(f)?;
    kleene(f.dom.len(), |t| f.apply(t))
}

pub fn lfp(f: &MonotoneFn) -> Result<Tuple, DomainError> {
    lfp_run(f).map(|run| run.value)
}

fn check_split(f: &MonotoneFn, a_len: usize) -> Result<(Signature, Signature), DomainError> {
    if a_len > f.dom.len() {
        return Err(DomainError::Split(format!(
            "parameter part of {a_len} wires exceeds domain {}",
            f.dom
        )));
    }
    let (a, x) = f.dom.split_at(a_len);
    Ok((a, x))
}

/// Build a function from `dom` to `cod` from a closure, tabulating it when
/// the domain is small enough.
fn materialise<F>(dom: Signature, cod: Signature, f: F) -> Result<MonotoneFn, DomainError>
where
    F: Fn(&[LValue]) -> Result<Tuple, DomainError> + Send + Sync + 'static,
{
    if dom.check_cap(&EnumCap::default()).is_ok() {
        let rows = dom.tuples().map(|t| f(&t)).collect::<Result<Vec<_>, _>>()?;
        MonotoneFn::from_table(dom, cod, rows)
    } else {
        Ok(MonotoneFn::from_fn(dom, cod, move |t| {
            f(t).expect("fixed point of a monotone function must exist")
        }))
    }
}

/// `μ(f)`: for `f : A × X → X`, the map `a ↦ lfp(x ↦ f(a, x))`.
pub fn local_lfp(f: &MonotoneFn, a_len: usize) -> Result<MonotoneFn, DomainError> {
    local_lfp_with(&Kleene, f, a_len)
}

pub fn local_lfp_with<O>(op: &O, f: &MonotoneFn, a_len: usize) -> Result<MonotoneFn, DomainError>
where
    O: FixpointOperator + Clone + Send + 'static,
{
    let (a, x) = check_split(f, a_len)?;
    if x != f.cod {
        return Err(DomainError::Split(format!(
            "fed-back part {x} does not match codomain {}",
            f.cod
        )));
    }
    require_monotone(f)?;
    let (f, op) = (f.clone(), op.clone());
    let xs = x.clone();
    materialise(a, x, move |a_val| {
        let section = |xv: &[LValue]| {
            let mut arg = a_val.to_vec();
            arg.extend_from_slice(xv);
            f.apply(&arg)
        };
        op.fix(&xs, &section)
    })
}

/// Feedback of the trailing `x_len` wires of `f : A × X → B × X`.
pub fn trace(f: &MonotoneFn, x_len: usize) -> Result<MonotoneFn, DomainError> {
    trace_with(&Kleene, f, x_len)
}

pub fn trace_with<O>(op: &O, f: &MonotoneFn, x_len: usize) -> Result<MonotoneFn, DomainError>
where
    O: FixpointOperator + Clone + Send + 'static,
{
    if x_len > f.dom.len() || x_len > f.cod.len() {
        return Err(DomainError::Split(format!(
            "cannot feed back {x_len} wires of {} -> {}",
            f.dom, f.cod
        )));
    }
    let a_len = f.dom.len() - x_len;
    let b_len = f.cod.len() - x_len;
    let (a, x) = f.dom.split_at(a_len);
    let (b, x_out) = f.cod.split_at(b_len);
    if x != x_out {
        return Err(DomainError::Split(format!(
            "fed-back input wires {x} do not match output wires {x_out}"
        )));
    }
    require_monotone(f)?;
    let (f, op) = (f.clone(), op.clone());
    materialise(a, b, move |a_val| {
        let arg = |xv: &[LValue]| {
            let mut arg = a_val.to_vec();
            arg.extend_from_slice(xv);
            arg
        };
        let section = |xv: &[LValue]| f.apply(&arg(xv))[b_len..].to_vec();
        let fixed = op.fix(&x, &section)?;
        let mut out = f.apply(&arg(&fixed));
        out.truncate(b_len);
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Ty {
        BaseType::bool()
    }

    fn v(i: u32) -> LValue {
        LValue::Val(i)
    }

    const BOT: LValue = LValue::Bot;

    fn por(x: LValue, y: LValue) -> LValue {
        match (x, y) {
            (LValue::Val(1), _) | (_, LValue::Val(1)) => v(1),
            (LValue::Val(0), LValue::Val(0)) => v(0),
            _ => BOT,
        }
    }

    fn unary(f: impl Fn(LValue) -> LValue + Send + Sync + 'static) -> MonotoneFn {
        let s = Signature::new(vec![b()]);
        MonotoneFn::from_fn(s.clone(), s, move |t| vec![f(t[0])])
    }

    #[test]
    fn leq_examples() {
        assert!(BOT.leq(v(1)));
        assert!(v(0).leq(v(0)));
        assert!(!v(0).leq(v(1)));
        let (bt, ut) = (BaseType::bool(), BaseType::unit());
        assert!(matches!(leq(&bt, BOT, &ut, v(0)), Err(DomainError::TypeMismatch { .. })));
        assert_eq!(leq(&bt, BOT, &bt, v(1)), Ok(true));
    }

    #[test]
    fn tuple_leq_examples() {
        assert_eq!(tuple_leq(&[BOT, BOT], &[v(1), v(0)]), Ok(true));
        assert_eq!(tuple_leq(&[v(1), BOT], &[v(1), v(0)]), Ok(true));
        assert_eq!(tuple_leq(&[v(1), v(0)], &[v(0), v(0)]), Ok(false));
        assert!(tuple_leq(&[v(1)], &[v(1), v(0)]).is_err());
    }

    #[test]
    fn empty_and_duplicate_types_rejected() {
        assert!(matches!(BaseType::new_enum("e", vec![]), Err(DomainError::EmptyBaseType(_))));
        assert!(matches!(
            BaseType::new_enum("e", vec!["a".into(), "a".into()]),
            Err(DomainError::DuplicateAtom { .. })
        ));
        assert!(BaseType::int_range(3, 2).is_err());
    }

    #[test]
    fn tuple_indexing_round_trips() {
        let s = Signature::new(vec![b(), BaseType::unit(), BaseType::int_range(0, 2).unwrap()]);
        assert_eq!(s.cardinality(), Some(3 * 2 * 4));
        for (i, t) in s.tuples().enumerate() {
            assert_eq!(s.index_of(&t), i);
        }
        assert_eq!(s.tuple_at(0), vec![BOT; 3]);
    }

    #[test]
    fn monotonicity_examples() {
        let cap = EnumCap::default();
        let p = MonotoneFn::from_fn(
            Signature::repeat(&b(), 2),
            Signature::new(vec![b()]),
            |t| vec![por(t[0], t[1])],
        );
        assert!(is_monotone(&p, &cap).unwrap().holds());
        let bad = unary(|x| if x == v(0) { v(0) } else { v(1) });
        assert_eq!(
            is_monotone(&bad, &cap).unwrap(),
            Monotonicity::Violation {
                lower: vec![BOT],
                upper: vec![v(0)]
            }
        );
        let id = MonotoneFn::identity(Signature::repeat(&b(), 3));
        assert!(is_monotone(&id, &cap).unwrap().holds());
        let big = MonotoneFn::identity(Signature::repeat(&b(), 5));
        assert!(matches!(is_monotone(&big, &cap), Err(DomainError::CapExceeded(_))));
    }

    #[test]
    fn lfp_examples() {
        assert_eq!(lfp(&unary(|x| por(v(1), x))).unwrap(), vec![v(1)]);
        assert_eq!(lfp(&unary(|x| x)).unwrap(), vec![BOT]);
        assert_eq!(lfp(&unary(|x| por(v(0), x))).unwrap(), vec![BOT]);
    }

    #[test]
    fn lfp_of_empty_signature() {
        let f = MonotoneFn::identity(Signature::empty());
        let run = lfp_run(&f).unwrap();
        assert!(run.value.is_empty());
        assert_eq!(run.applications, 1);
    }

    #[test]
    fn lfp_refuses_non_monotone() {
        let bad = unary(|x| if x == BOT { v(1) } else { v(0) });
        assert!(matches!(lfp(&bad), Err(DomainError::NotMonotone { .. })));
        // Bypassing the monotonicity check: the chain bound still stops it.
        let err = kleene(1, |t| vec![if t[0] == BOT { v(1) } else { v(0) }]).unwrap_err();
        assert_eq!(err, DomainError::ChainNotAscending { step: 2 });
    }

    #[test]
    fn local_lfp_examples() {
        let s2 = Signature::repeat(&b(), 2);
        let s1 = Signature::new(vec![b()]);
        let f = MonotoneFn::from_fn(s2.clone(), s1.clone(), |t| vec![por(t[0], t[1])]);
        let mu = local_lfp(&f, 1).unwrap();
        assert_eq!(mu.apply(&[BOT]), vec![BOT]);
        assert_eq!(mu.apply(&[v(0)]), vec![BOT]);
        assert_eq!(mu.apply(&[v(1)]), vec![v(1)]);

        let proj_a = MonotoneFn::from_fn(s2.clone(), s1.clone(), |t| vec![t[0]]);
        assert!(local_lfp(&proj_a, 1).unwrap().table_eq(&MonotoneFn::identity(s1.clone())));

        let proj_x = MonotoneFn::from_fn(s2.clone(), s1.clone(), |t| vec![t[1]]);
        let mu = local_lfp(&proj_x, 1).unwrap();
        assert!(s1.tuples().all(|a| mu.apply(&a) == vec![BOT]));

        assert!(matches!(local_lfp(&proj_x, 3), Err(DomainError::Split(_))));
        assert!(matches!(local_lfp(&proj_x, 0), Err(DomainError::Split(_))));
    }

    #[test]
    fn trace_examples() {
        let s2 = Signature::repeat(&b(), 2);
        let s1 = Signature::new(vec![b()]);
        let swap = MonotoneFn::from_fn(s2.clone(), s2.clone(), |t| vec![t[1], t[0]]);
        assert!(trace(&swap, 1).unwrap().table_eq(&MonotoneFn::identity(s1.clone())));

        let konst = MonotoneFn::from_fn(s2.clone(), s2.clone(), |t| vec![t[0], v(1)]);
        assert!(trace(&konst, 1).unwrap().table_eq(&MonotoneFn::identity(s1.clone())));

        let dup_x = MonotoneFn::from_fn(s2.clone(), s2.clone(), |t| vec![t[1], t[1]]);
        let tr = trace(&dup_x, 1).unwrap();
        assert!(s1.tuples().all(|a| tr.apply(&a) == vec![BOT]));

        let mismatched = MonotoneFn::from_fn(
            s2.clone(),
            Signature::new(vec![b(), BaseType::unit()]),
            |t| vec![t[0], BOT],
        );
        assert!(matches!(trace(&mismatched, 1), Err(DomainError::Split(_))));
    }

    #[test]
    fn height_bounds() {
        let h = HeightBound { wires: 3 };
        assert_eq!(h.certified(), 4);
        assert_eq!(h.product(), 8);
        assert_eq!(HeightBound { wires: 0 }.product(), 1);
    }
}
