//! Builtin gates and user gate tables.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::domain::{
    is_monotone, BaseKind, BaseType, DomainError, EnumCap, LValue, MonotoneFn, Monotonicity,
    Signature, Tuple, Ty,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("unknown gate `{0}`")]
    Unknown(String),
    #[error("gate `{gate}` expects {expected} inputs, got {found}")]
    Arity {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("gate `{gate}`: type mismatch, {detail}")]
    Type { gate: String, detail: String },
    #[error("gate `{gate}`: {detail}")]
    Param { gate: String, detail: String },
    #[error("table `{name}` is missing the row for {row}")]
    MissingRow { name: String, row: String },
    #[error("table `{name}` defines the row for {row} twice")]
    DuplicateRow { name: String, row: String },
    #[error("table `{name}` is not monotone: {lower} <= {upper} but images are not ordered")]
    NotMonotone {
        name: String,
        lower: String,
        upper: String,
    },
    #[error("gate `{0}` is already defined")]
    Redefined(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    StrictLift,
    PrimitiveTable,
    Wiring,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Builtin {
    Not,
    And,
    Or,
    Xor,
    Mux,
    Por,
    Pand,
    Add,
    Inc,
    Eq,
    Lt,
    Id,
    Dup,
    Drop,
    Swap,
    Const(LValue),
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Not => "not",
            Builtin::And => "and",
            Builtin::Or => "or",
            Builtin::Xor => "xor",
            Builtin::Mux => "mux",
            Builtin::Por => "por",
            Builtin::Pand => "pand",
            Builtin::Add => "add",
            Builtin::Inc => "inc",
            Builtin::Eq => "eq",
            Builtin::Lt => "lt",
            Builtin::Id => "id",
            Builtin::Dup => "dup",
            Builtin::Drop => "drop",
            Builtin::Swap => "swap",
            Builtin::Const(_) => "const",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "not" => Builtin::Not,
            "and" => Builtin::And,
            "or" => Builtin::Or,
            "xor" => Builtin::Xor,
            "mux" => Builtin::Mux,
            "por" => Builtin::Por,
            "pand" => Builtin::Pand,
            "add" => Builtin::Add,
            "inc" => Builtin::Inc,
            "eq" => Builtin::Eq,
            "lt" => Builtin::Lt,
            "id" => Builtin::Id,
            "dup" => Builtin::Dup,
            "drop" => Builtin::Drop,
            "swap" => Builtin::Swap,
            "const" => Builtin::Const(LValue::Bot),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GateOp {
    Builtin(Builtin),
    Table(String),
}

/// A registered gate: an operation instantiated at concrete wire types.
#[derive(Debug, Clone)]
pub struct GateDef {
    pub op: GateOp,
    pub kind: GateKind,
    pub func: MonotoneFn,
}

impl PartialEq for GateDef {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op
            && self.kind == other.kind
            && self.func.dom() == other.func.dom()
            && self.func.cod() == other.func.cod()
            && self.func.table_rows() == other.func.table_rows()
    }
}

impl Eq for GateDef {}

impl GateDef {
    pub fn name(&self) -> &str {
        match &self.op {
            GateOp::Builtin(b) => b.name(),
            GateOp::Table(n) => n,
        }
    }

    pub fn inputs(&self) -> &Signature {
        self.func.dom()
    }

    pub fn outputs(&self) -> &Signature {
        self.func.cod()
    }

    pub fn apply(&self, args: &[LValue]) -> Tuple {
        self.func.apply(args)
    }

    /// Whether the gate maps `Bot`-free inputs to `Bot`-free outputs.
    pub fn is_total(&self) -> bool {
        match self.kind {
            GateKind::StrictLift | GateKind::Wiring => match &self.op {
                GateOp::Builtin(Builtin::Const(v)) => !v.is_bot(),
                _ => true,
            },
            GateKind::PrimitiveTable => match self.func.dom().cardinality() {
                Some(_) => self
                    .func
                    .dom()
                    .tuples()
                    .filter(|t| t.iter().all(|v| !v.is_bot()))
                    .all(|t| self.func.apply(&t).iter().all(|v| !v.is_bot())),
                None => false,
            },
        }
    }
}

impl fmt::Display for GateDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {}", self.name(), self.func.dom(), self.func.cod())
    }
}

/// Extend a function on atoms to lifted tuples, returning all-`Bot` as
/// soon as any input is `Bot`.
pub fn strict_lift<G>(dom: Signature, cod: Signature, g: G) -> MonotoneFn
where
    G: Fn(&[u32]) -> Vec<u32> + Send + Sync + 'static,
{
    let width = cod.len();
    MonotoneFn::from_fn(dom, cod, move |t| {
        let atoms: Option<Vec<u32>> = t
            .iter()
            .map(|v| match v {
                LValue::Val(i) => Some(*i),
                LValue::Bot => None,
            })
            .collect();
        match atoms {
            Some(a) => g(&a).into_iter().map(LValue::Val).collect(),
            None => vec![LValue::Bot; width],
        }
    })
}

const ZERO: LValue = LValue::Val(0);
const ONE: LValue = LValue::Val(1);

/// Parallel or: `1` as soon as either input is `1`.
pub fn por(x: LValue, y: LValue) -> LValue {
    match (x, y) {
        (ONE, _) | (_, ONE) => ONE,
        (ZERO, ZERO) => ZERO,
        _ => LValue::Bot,
    }
}

/// Parallel and, the dual of [`por`].
pub fn pand(x: LValue, y: LValue) -> LValue {
    match (x, y) {
        (ZERO, _) | (_, ZERO) => ZERO,
        (ONE, ONE) => ONE,
        _ => LValue::Bot,
    }
}

fn sig(tys: &[&Ty]) -> Signature {
    Signature::new(tys.iter().map(|t| (*t).clone()).collect())
}

fn def(op: Builtin, kind: GateKind, func: MonotoneFn) -> GateDef {
    GateDef {
        op: GateOp::Builtin(op),
        kind,
        func,
    }
}

fn bool_binary(op: Builtin, g: fn(u32, u32) -> u32) -> GateDef {
    let b = BaseType::bool();
    def(
        op,
        GateKind::StrictLift,
        strict_lift(sig(&[&b, &b]), sig(&[&b]), move |a| vec![g(a[0], a[1])]),
    )
}

pub fn not_gate() -> GateDef {
    let b = BaseType::bool();
    def(
        Builtin::Not,
        GateKind::StrictLift,
        strict_lift(sig(&[&b]), sig(&[&b]), |a| vec![1 - a[0]]),
    )
}

pub fn and_gate() -> GateDef {
    bool_binary(Builtin::And, |x, y| x & y)
}

pub fn or_gate() -> GateDef {
    bool_binary(Builtin::Or, |x, y| x | y)
}

pub fn xor_gate() -> GateDef {
    bool_binary(Builtin::Xor, |x, y| x ^ y)
}

pub fn por_gate() -> GateDef {
    let b = BaseType::bool();
    def(
        Builtin::Por,
        GateKind::PrimitiveTable,
        MonotoneFn::from_fn(sig(&[&b, &b]), sig(&[&b]), |t| vec![por(t[0], t[1])]),
    )
}

pub fn pand_gate() -> GateDef {
    let b = BaseType::bool();
    def(
        Builtin::Pand,
        GateKind::PrimitiveTable,
        MonotoneFn::from_fn(sig(&[&b, &b]), sig(&[&b]), |t| vec![pand(t[0], t[1])]),
    )
}

/// Strict multiplexer `mux(sel, a, b)`: `a` when `sel = 0`, `b` when `sel = 1`.
pub fn mux_gate(ty: &Ty) -> GateDef {
    let b = BaseType::bool();
    def(
        Builtin::Mux,
        GateKind::StrictLift,
        strict_lift(sig(&[&b, ty, ty]), sig(&[ty]), |a| {
            vec![if a[0] == 0 { a[1] } else { a[2] }]
        }),
    )
}

/// Modular addition on an integer range; atoms are offsets from `lo`.
pub fn add_gate(ty: &Ty) -> Result<GateDef, GateError> {
    let (lo, n) = int_params("add", ty)?;
    Ok(def(
        Builtin::Add,
        GateKind::StrictLift,
        strict_lift(sig(&[ty, ty]), sig(&[ty]), move |a| {
            let total = (a[0] as i64 + lo) + (a[1] as i64 + lo);
            vec![(total - lo).rem_euclid(n) as u32]
        }),
    ))
}

/// Successor modulo the size of an integer range.
pub fn inc_gate(ty: &Ty) -> Result<GateDef, GateError> {
    let (_, n) = int_params("inc", ty)?;
    Ok(def(
        Builtin::Inc,
        GateKind::StrictLift,
        strict_lift(sig(&[ty]), sig(&[ty]), move |a| {
            vec![((a[0] as i64 + 1) % n) as u32]
        }),
    ))
}

pub fn eq_gate(ty: &Ty) -> GateDef {
    let b = BaseType::bool();
    def(
        Builtin::Eq,
        GateKind::StrictLift,
        strict_lift(sig(&[ty, ty]), sig(&[&b]), |a| vec![(a[0] == a[1]) as u32]),
    )
}

pub fn lt_gate(ty: &Ty) -> Result<GateDef, GateError> {
    int_params("lt", ty)?;
    let b = BaseType::bool();
    Ok(def(
        Builtin::Lt,
        GateKind::StrictLift,
        strict_lift(sig(&[ty, ty]), sig(&[&b]), |a| vec![(a[0] < a[1]) as u32]),
    ))
}

fn int_params(gate: &str, ty: &Ty) -> Result<(i64, i64), GateError> {
    match ty.kind() {
        BaseKind::IntRange { lo, hi } => Ok((*lo, hi - lo + 1)),
        _ => Err(GateError::Type {
            gate: gate.into(),
            detail: format!("expected an integer range, found `{ty}`"),
        }),
    }
}

pub fn identity_gate(ty: &Ty) -> GateDef {
    def(
        Builtin::Id,
        GateKind::Wiring,
        MonotoneFn::identity(sig(&[ty])),
    )
}

/// Diagonal: copies its input onto two outputs.
pub fn dup_gate(ty: &Ty) -> GateDef {
    def(
        Builtin::Dup,
        GateKind::Wiring,
        MonotoneFn::from_fn(sig(&[ty]), sig(&[ty, ty]), |t| vec![t[0], t[0]]),
    )
}

/// Augmentation: a wire into the empty product.
pub fn drop_gate(ty: &Ty) -> GateDef {
    def(
        Builtin::Drop,
        GateKind::Wiring,
        MonotoneFn::from_fn(sig(&[ty]), Signature::empty(), |_| Vec::new()),
    )
}

pub fn swap_gate(a: &Ty, b: &Ty) -> GateDef {
    def(
        Builtin::Swap,
        GateKind::Wiring,
        MonotoneFn::from_fn(sig(&[a, b]), sig(&[b, a]), |t| vec![t[1], t[0]]),
    )
}

/// Nullary constant.
pub fn const_gate(ty: &Ty, value: LValue) -> Result<GateDef, GateError> {
    if !ty.contains(value) {
        return Err(GateError::Param {
            gate: "const".into(),
            detail: format!("value is not an atom of `{ty}`"),
        });
    }
    Ok(def(
        Builtin::Const(value),
        GateKind::Wiring,
        MonotoneFn::from_fn(Signature::empty(), sig(&[ty]), move |_| vec![value]),
    ))
}

/// The wiring gates over one type: identity, diagonal, discard, swap, and
/// one constant per atom.
pub fn wiring_gates(ty: &Ty) -> Vec<GateDef> {
    let mut gates = vec![
        identity_gate(ty),
        dup_gate(ty),
        drop_gate(ty),
        swap_gate(ty, ty),
    ];
    gates.extend(
        (0..ty.size() as u32).map(|i| const_gate(ty, LValue::Val(i)).expect("atom in range")),
    );
    gates
}

/// Build a user gate from explicit rows. Every input tuple (including those
/// with `Bot` cells) must appear exactly once, and the result must be monotone.
pub fn table_gate(
    name: &str,
    dom: Signature,
    cod: Signature,
    rows: Vec<(Tuple, Tuple)>,
) -> Result<GateDef, GateError> {
    let n = dom
        .cardinality()
        .ok_or_else(|| GateError::Domain(DomainError::CapExceeded("table domain too large".into())))?;
    let mut slots: Vec<Option<Tuple>> = vec![None; n];
    for (input, output) in rows {
        dom.conforms(&input)?;
        cod.conforms(&output)?;
        let slot = &mut slots[dom.index_of(&input)];
        if slot.is_some() {
            return Err(GateError::DuplicateRow {
                name: name.into(),
                row: dom.show(&input),
            });
        }
        *slot = Some(output);
    }
    let mut table = Vec::with_capacity(n);
    for (i, slot) in slots.into_iter().enumerate() {
        match slot {
            Some(out) => table.push(out),
            None => {
                return Err(GateError::MissingRow {
                    name: name.into(),
                    row: dom.show(&dom.tuple_at(i)),
                })
            }
        }
    }
    let func = MonotoneFn::from_table(dom, cod, table)?;
    let gate = GateDef {
        op: GateOp::Table(name.into()),
        kind: GateKind::PrimitiveTable,
        func,
    };
    check_registered(&gate)?;
    Ok(gate)
}

fn check_registered(gate: &GateDef) -> Result<(), GateError> {
    let cap = EnumCap::default();
    if gate.inputs().check_cap(&cap).is_err() {
        return Ok(());
    }
    match is_monotone(&gate.func, &cap)? {
        Monotonicity::Monotone => Ok(()),
        Monotonicity::Violation { lower, upper } => Err(GateError::NotMonotone {
            name: gate.name().into(),
            lower: gate.inputs().show(&lower),
            upper: gate.inputs().show(&upper),
        }),
    }
}

/// Named gates available to netlists: the builtin catalog plus user tables.
#[derive(Debug, Clone, Default)]
pub struct GateLibrary {
    tables: BTreeMap<String, Arc<GateDef>>,
}

impl GateLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_table(&mut self, gate: GateDef) -> Result<Arc<GateDef>, GateError> {
        let name = gate.name().to_string();
        if Builtin::from_name(&name).is_some() || self.tables.contains_key(&name) {
            return Err(GateError::Redefined(name));
        }
        check_registered(&gate)?;
        let gate = Arc::new(gate);
        self.tables.insert(name, gate.clone());
        Ok(gate)
    }

    pub fn table(&self, name: &str) -> Option<&Arc<GateDef>> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = &Arc<GateDef>> {
        self.tables.values()
    }

    /// Resolve `name` applied to arguments of the given types. Polymorphic
    /// builtins take their instance from the argument types; `const` takes
    /// its type and value from `constant`.
    pub fn instantiate(
        &self,
        name: &str,
        args: &[Ty],
        constant: Option<(Ty, LValue)>,
    ) -> Result<GateDef, GateError> {
        if let Some(gate) = self.tables.get(name) {
            expect_types(name, gate.inputs().wires(), args)?;
            return Ok((**gate).clone());
        }
        let builtin = Builtin::from_name(name).ok_or_else(|| GateError::Unknown(name.into()))?;
        let b = BaseType::bool();
        let gate = match builtin {
            Builtin::Not => fixed(name, not_gate(), args)?,
            Builtin::And => fixed(name, and_gate(), args)?,
            Builtin::Or => fixed(name, or_gate(), args)?,
            Builtin::Xor => fixed(name, xor_gate(), args)?,
            Builtin::Por => fixed(name, por_gate(), args)?,
            Builtin::Pand => fixed(name, pand_gate(), args)?,
            Builtin::Mux => {
                arity(name, 3, args)?;
                let g = mux_gate(&args[1]);
                expect_types(name, &[b, args[1].clone(), args[1].clone()], args)?;
                g
            }
            Builtin::Add => {
                arity(name, 2, args)?;
                expect_types(name, &[args[0].clone(), args[0].clone()], args)?;
                add_gate(&args[0])?
            }
            Builtin::Inc => {
                arity(name, 1, args)?;
                inc_gate(&args[0])?
            }
            Builtin::Eq => {
                arity(name, 2, args)?;
                expect_types(name, &[args[0].clone(), args[0].clone()], args)?;
                eq_gate(&args[0])
            }
            Builtin::Lt => {
                arity(name, 2, args)?;
                expect_types(name, &[args[0].clone(), args[0].clone()], args)?;
                lt_gate(&args[0])?
            }
            Builtin::Id => {
                arity(name, 1, args)?;
                identity_gate(&args[0])
            }
            Builtin::Dup => {
                arity(name, 1, args)?;
                dup_gate(&args[0])
            }
            Builtin::Drop => {
                arity(name, 1, args)?;
                drop_gate(&args[0])
            }
            Builtin::Swap => {
                arity(name, 2, args)?;
                swap_gate(&args[0], &args[1])
            }
            Builtin::Const(_) => {
                arity(name, 0, args)?;
                let (ty, v) = constant.ok_or_else(|| GateError::Param {
                    gate: name.into(),
                    detail: "missing `ty` and `val` parameters".into(),
                })?;
                const_gate(&ty, v)?
            }
        };
        Ok(gate)
    }
}

fn arity(name: &str, expected: usize, args: &[Ty]) -> Result<(), GateError> {
    if args.len() != expected {
        return Err(GateError::Arity {
            gate: name.into(),
            expected,
            found: args.len(),
        });
    }
    Ok(())
}

fn expect_types(name: &str, expected: &[Ty], args: &[Ty]) -> Result<(), GateError> {
    arity(name, expected.len(), args)?;
    for (i, (e, a)) in expected.iter().zip(args).enumerate() {
        if e != a {
            return Err(GateError::Type {
                gate: name.into(),
                detail: format!("argument {i} expects `{e}`, found `{a}`"),
            });
        }
    }
    Ok(())
}

fn fixed(name: &str, gate: GateDef, args: &[Ty]) -> Result<GateDef, GateError> {
    expect_types(name, gate.inputs().wires(), args)?;
    Ok(gate)
}
