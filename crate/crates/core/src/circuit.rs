//! Structural circuit representation.
//!
//! A [`Circuit`] stores gates, delays and feedback loops exactly as written;
//! semantically equal circuits are generally distinct values. Feedback only
//! arises through [`LoopWire`]s created by [`Circuit::trace_loop`] (or the
//! netlist `loop` declaration), and node inputs may only read from earlier
//! nodes, so every cycle is attributable to a loop wire.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{BaseType, LValue, Signature, Ty};
use crate::gates::{Builtin, GateDef, GateKind, GateOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Input(usize),
    Node { node: usize, port: usize },
    Loop(usize),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Input(i) => write!(f, "input:{i}"),
            Source::Node { node, port } => write!(f, "node:{node}.{port}"),
            Source::Loop(j) => write!(f, "loop:{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutPort {
    pub name: String,
    pub ty: Ty,
    pub source: Option<Source>,
}

/// A fed-back wire: readable anywhere, driven by `source`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopWire {
    pub ty: Ty,
    pub source: Option<Source>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelayKind {
    /// Previous value of the input, `init` at tick 0.
    Unit,
    /// `s@d`: the input `d` ticks ago, with `d` ranging over `d_min..=d_max`.
    Var { d_min: u32, d_max: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayNode {
    pub ty: Ty,
    pub kind: DelayKind,
    /// Value read before time 0.
    pub init: LValue,
}

impl DelayNode {
    pub fn unit(ty: Ty, init: LValue) -> Self {
        DelayNode {
            ty,
            kind: DelayKind::Unit,
            init,
        }
    }

    pub fn var(ty: Ty, d_min: u32, d_max: u32, init: LValue) -> Self {
        DelayNode {
            ty,
            kind: DelayKind::Var { d_min, d_max },
            init,
        }
    }

    /// Type of the delay-amount port, `int[d_min..d_max]`.
    pub fn amount_type(&self) -> Option<Ty> {
        match self.kind {
            DelayKind::Unit => None,
            DelayKind::Var { d_min, d_max } => BaseType::int_range(d_min as i64, d_max as i64).ok(),
        }
    }

    /// Longest look-back, i.e. the history length this node needs.
    pub fn depth(&self) -> usize {
        match self.kind {
            DelayKind::Unit => 1,
            DelayKind::Var { d_max, .. } => d_max as usize,
        }
    }

    /// Whether the output never depends on the current tick's `s`.
    pub fn is_strict_delay(&self) -> bool {
        match self.kind {
            DelayKind::Unit => true,
            DelayKind::Var { d_min, .. } => d_min >= 1,
        }
    }

    pub fn inputs(&self) -> Signature {
        let mut wires = vec![self.ty.clone()];
        wires.extend(self.amount_type());
        Signature::new(wires)
    }

    pub fn outputs(&self) -> Signature {
        Signature::new(vec![self.ty.clone()])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Gate(Arc<GateDef>),
    Delay(DelayNode),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInst {
    pub kind: NodeKind,
    pub inputs: Vec<Option<Source>>,
}

impl NodeInst {
    pub fn input_sig(&self) -> Signature {
        match &self.kind {
            NodeKind::Gate(g) => g.inputs().clone(),
            NodeKind::Delay(d) => d.inputs(),
        }
    }

    pub fn output_sig(&self) -> Signature {
        match &self.kind {
            NodeKind::Gate(g) => g.outputs().clone(),
            NodeKind::Delay(d) => d.outputs(),
        }
    }

    pub fn output_count(&self) -> usize {
        match &self.kind {
            NodeKind::Gate(g) => g.outputs().len(),
            NodeKind::Delay(_) => 1,
        }
    }

    /// Input ports output `port` depends on within the current tick.
    fn port_dependencies(&self, port: usize) -> Vec<usize> {
        match &self.kind {
            NodeKind::Delay(d) => {
                let mut deps = Vec::new();
                if !d.is_strict_delay() {
                    deps.push(0);
                }
                if matches!(d.kind, DelayKind::Var { .. }) {
                    deps.push(1);
                }
                deps
            }
            NodeKind::Gate(g) => match (&g.op, g.kind) {
                (GateOp::Builtin(Builtin::Swap), _) => vec![1 - port],
                (GateOp::Builtin(Builtin::Id | Builtin::Dup), _) => vec![0],
                (_, GateKind::Wiring) if g.inputs().is_empty() => Vec::new(),
                _ => (0..g.inputs().len()).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    UnconnectedPort,
    TypeMismatch,
    DanglingSource,
    ForwardReference,
    BadDelay,
    DuplicatePortName,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::UnconnectedPort => "unconnected port",
            DiagnosticKind::TypeMismatch => "type mismatch",
            DiagnosticKind::DanglingSource => "dangling source",
            DiagnosticKind::ForwardReference => "forward reference",
            DiagnosticKind::BadDelay => "bad delay",
            DiagnosticKind::DuplicatePortName => "duplicate port name",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub node: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(n) => write!(f, "{} at node {n}: {}", self.kind, self.message),
            None => write!(f, "{}: {}", self.kind, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("signature mismatch: {0}")]
    Signature(String),
    #[error("invalid circuit: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// A wire in the dependency graph used by [`Circuit::is_contractive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum WireRef {
    Node { node: usize, port: usize },
    Loop(usize),
}

impl fmt::Display for WireRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireRef::Node { node, port } => write!(f, "node:{node}.{port}"),
            WireRef::Loop(j) => write!(f, "loop:{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Contractivity {
    Contractive,
    /// A cycle of wires with no strict delay on it, in dependency order.
    DelayFreeCycle(Vec<WireRef>),
}

impl Contractivity {
    pub fn holds(&self) -> bool {
        matches!(self, Contractivity::Contractive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    pub inputs: Vec<Port>,
    pub outputs: Vec<OutPort>,
    pub nodes: Vec<NodeInst>,
    pub loops: Vec<LoopWire>,
}

fn default_ports(prefix: &str, sig: &Signature) -> Vec<Port> {
    sig.wires()
        .iter()
        .enumerate()
        .map(|(i, ty)| Port {
            name: format!("{prefix}{i}"),
            ty: ty.clone(),
        })
        .collect()
}

fn single_node(kind: NodeKind, ins: Signature, outs: Signature) -> Circuit {
    let inputs = default_ports("i", &ins);
    let outputs = default_ports("o", &outs)
        .into_iter()
        .enumerate()
        .map(|(port, p)| OutPort {
            name: p.name,
            ty: p.ty,
            source: Some(Source::Node { node: 0, port }),
        })
        .collect();
    Circuit {
        inputs,
        outputs,
        nodes: vec![NodeInst {
            kind,
            inputs: (0..ins.len()).map(|i| Some(Source::Input(i))).collect(),
        }],
        loops: Vec::new(),
    }
}

/// Make names unique by appending `_1`, `_2`, ... to later duplicates.
fn uniquify(names: &mut [String]) {
    let mut seen: HashSet<String> = HashSet::new();
    for i in 0..names.len() {
        if seen.contains(&names[i]) {
            let base = names[i].clone();
            let mut k = 1;
            while seen.contains(&format!("{base}_{k}")) || names[i + 1..].contains(&format!("{base}_{k}")) {
                k += 1;
            }
            names[i] = format!("{base}_{k}");
        }
        seen.insert(names[i].clone());
    }
}

impl Circuit {
    pub fn empty() -> Self {
        Circuit::default()
    }

    /// Identity on `sig`.
    pub fn identity(sig: &Signature) -> Self {
        Circuit {
            inputs: default_ports("i", sig),
            outputs: default_ports("o", sig)
                .into_iter()
                .enumerate()
                .map(|(i, p)| OutPort {
                    name: p.name,
                    ty: p.ty,
                    source: Some(Source::Input(i)),
                })
                .collect(),
            nodes: Vec::new(),
            loops: Vec::new(),
        }
    }

    /// A single gate with its ports exposed.
    pub fn gate(def: GateDef) -> Self {
        let (ins, outs) = (def.inputs().clone(), def.outputs().clone());
        single_node(NodeKind::Gate(Arc::new(def)), ins, outs)
    }

    /// A single delay with its ports exposed.
    pub fn delay(node: DelayNode) -> Self {
        let (ins, outs) = (node.inputs(), node.outputs());
        single_node(NodeKind::Delay(node), ins, outs)
    }

    pub fn in_sig(&self) -> Signature {
        Signature::new(self.inputs.iter().map(|p| p.ty.clone()).collect())
    }

    pub fn out_sig(&self) -> Signature {
        Signature::new(self.outputs.iter().map(|p| p.ty.clone()).collect())
    }

    pub fn has_delays(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n.kind, NodeKind::Delay(_)))
    }

    /// Rename ports; `None` keeps the current names.
    pub fn with_port_names(mut self, inputs: Option<&[&str]>, outputs: Option<&[&str]>) -> Self {
        if let Some(names) = inputs {
            for (p, n) in self.inputs.iter_mut().zip(names) {
                p.name = n.to_string();
            }
        }
        if let Some(names) = outputs {
            for (p, n) in self.outputs.iter_mut().zip(names) {
                p.name = n.to_string();
            }
        }
        self
    }

    /// Type carried by a source, if the source exists.
    pub fn source_type(&self, s: Source) -> Option<Ty> {
        match s {
            Source::Input(i) => self.inputs.get(i).map(|p| p.ty.clone()),
            Source::Node { node, port } => self
                .nodes
                .get(node)
                .and_then(|n| n.output_sig().wires().get(port).cloned()),
            Source::Loop(j) => self.loops.get(j).map(|l| l.ty.clone()),
        }
    }

    /// Check well-formedness; an empty list means the circuit is valid.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let check_edge = |out: &mut Vec<Diagnostic>, node: Option<usize>, what: String, src: Option<Source>, ty: &Ty, reader: Option<usize>| {
            let Some(src) = src else {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnconnectedPort,
                    node,
                    message: format!("{what} has no source"),
                });
                return;
            };
            match self.source_type(src) {
                None => out.push(Diagnostic {
                    kind: DiagnosticKind::DanglingSource,
                    node,
                    message: format!("{what} reads missing {src}"),
                }),
                Some(found) if &found != ty => out.push(Diagnostic {
                    kind: DiagnosticKind::TypeMismatch,
                    node,
                    message: format!("{what} expects `{ty}` but {src} carries `{found}`"),
                }),
                Some(_) => {}
            }
            if let (Some(reader), Source::Node { node: from, .. }) = (reader, src) {
                if from >= reader {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::ForwardReference,
                        node,
                        message: format!("{what} reads {src}; feedback must go through a loop wire"),
                    });
                }
            }
        };

        for (i, node) in self.nodes.iter().enumerate() {
            if let NodeKind::Delay(d) = &node.kind {
                if let DelayKind::Var { d_min, d_max } = d.kind {
                    if d_min > d_max {
                        out.push(Diagnostic {
                            kind: DiagnosticKind::BadDelay,
                            node: Some(i),
                            message: format!("min {d_min} exceeds max {d_max}"),
                        });
                        continue;
                    }
                }
                if !d.ty.contains(d.init) {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::BadDelay,
                        node: Some(i),
                        message: format!("init value is not an atom of `{}`", d.ty),
                    });
                }
            }
            let sig = node.input_sig();
            if sig.len() != node.inputs.len() {
                out.push(Diagnostic {
                    kind: DiagnosticKind::TypeMismatch,
                    node: Some(i),
                    message: format!("expects {} inputs, has {}", sig.len(), node.inputs.len()),
                });
                continue;
            }
            for (p, (src, ty)) in node.inputs.iter().zip(sig.wires()).enumerate() {
                check_edge(&mut out, Some(i), format!("input {p}"), *src, ty, Some(i));
            }
        }
        for (j, l) in self.loops.iter().enumerate() {
            check_edge(&mut out, None, format!("loop {j}"), l.source, &l.ty, None);
        }
        for (k, o) in self.outputs.iter().enumerate() {
            check_edge(&mut out, None, format!("output {k} `{}`", o.name), o.source, &o.ty, None);
        }
        for (kind, names) in [
            ("input", self.inputs.iter().map(|p| &p.name).collect::<Vec<_>>()),
            ("output", self.outputs.iter().map(|p| &p.name).collect()),
        ] {
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::DuplicatePortName,
                        node: None,
                        message: format!("{kind} `{n}` declared twice"),
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let diags = self.diagnostics();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(diags))
        }
    }

    fn shifted(&self, inputs: impl Fn(usize) -> Source, node_offset: usize, loop_offset: usize) -> impl Fn(Option<Source>) -> Option<Source> {
        let inputs: Vec<Source> = (0..self.inputs.len()).map(inputs).collect();
        move |s| {
            s.map(|s| match s {
                Source::Input(i) => inputs[i],
                Source::Node { node, port } => Source::Node {
                    node: node + node_offset,
                    port,
                },
                Source::Loop(j) => Source::Loop(j + loop_offset),
            })
        }
    }

    fn append(&mut self, other: &Circuit, remap: impl Fn(Option<Source>) -> Option<Source>) {
        self.nodes.extend(other.nodes.iter().map(|n| NodeInst {
            kind: n.kind.clone(),
            inputs: n.inputs.iter().map(|s| remap(*s)).collect(),
        }));
        self.loops.extend(other.loops.iter().map(|l| LoopWire {
            ty: l.ty.clone(),
            source: remap(l.source),
        }));
    }

    /// Sequential composition: `self` feeds `next`.
    pub fn compose(&self, next: &Circuit) -> Result<Circuit, CircuitError> {
        if self.out_sig() != next.in_sig() {
            return Err(CircuitError::Signature(format!(
                "cannot feed outputs {} into inputs {}",
                self.out_sig(),
                next.in_sig()
            )));
        }
        self.validate()?;
        next.validate()?;
        let feeds: Vec<Source> = self.outputs.iter().map(|o| o.source.expect("validated")).collect();
        let remap = next.shifted(|i| feeds[i], self.nodes.len(), self.loops.len());
        let mut c = Circuit {
            inputs: self.inputs.clone(),
            outputs: Vec::new(),
            nodes: self.nodes.clone(),
            loops: self.loops.clone(),
        };
        c.append(next, &remap);
        c.outputs = next
            .outputs
            .iter()
            .map(|o| OutPort {
                name: o.name.clone(),
                ty: o.ty.clone(),
                source: remap(o.source),
            })
            .collect();
        Ok(c)
    }

    /// Parallel composition. Clashing port names from `other` get a suffix.
    pub fn tensor(&self, other: &Circuit) -> Circuit {
        let n_in = self.inputs.len();
        let remap = other.shifted(|i| Source::Input(n_in + i), self.nodes.len(), self.loops.len());
        let mut c = self.clone();
        c.append(other, &remap);
        c.inputs.extend(other.inputs.iter().cloned());
        c.outputs.extend(other.outputs.iter().map(|o| OutPort {
            name: o.name.clone(),
            ty: o.ty.clone(),
            source: remap(o.source),
        }));
        let mut names: Vec<String> = c.inputs.iter().map(|p| p.name.clone()).collect();
        uniquify(&mut names);
        for (p, n) in c.inputs.iter_mut().zip(names) {
            p.name = n;
        }
        let mut names: Vec<String> = c.outputs.iter().map(|p| p.name.clone()).collect();
        uniquify(&mut names);
        for (p, n) in c.outputs.iter_mut().zip(names) {
            p.name = n;
        }
        c
    }

    /// Feed the last `k` outputs back into the last `k` inputs.
    pub fn trace_loop(&self, k: usize) -> Result<Circuit, CircuitError> {
        let (n, m) = (self.inputs.len(), self.outputs.len());
        if k > n || k > m {
            return Err(CircuitError::Signature(format!(
                "cannot loop {k} wires of a circuit with {n} inputs and {m} outputs"
            )));
        }
        let looped_in = self.in_sig().split_at(n - k).1;
        let looped_out = self.out_sig().split_at(m - k).1;
        if looped_in != looped_out {
            return Err(CircuitError::Signature(format!(
                "looped outputs {looped_out} do not match looped inputs {looped_in}"
            )));
        }
        let base = self.loops.len();
        let remap = |s: Option<Source>| {
            s.map(|s| match s {
                Source::Input(i) if i >= n - k => Source::Loop(base + i - (n - k)),
                other => other,
            })
        };
        let mut c = Circuit {
            inputs: self.inputs[..n - k].to_vec(),
            outputs: Vec::new(),
            nodes: self
                .nodes
                .iter()
                .map(|node| NodeInst {
                    kind: node.kind.clone(),
                    inputs: node.inputs.iter().map(|s| remap(*s)).collect(),
                })
                .collect(),
            loops: self
                .loops
                .iter()
                .map(|l| LoopWire {
                    ty: l.ty.clone(),
                    source: remap(l.source),
                })
                .collect(),
        };
        c.loops.extend(self.outputs[m - k..].iter().map(|o| LoopWire {
            ty: o.ty.clone(),
            source: remap(o.source),
        }));
        c.outputs = self.outputs[..m - k]
            .iter()
            .map(|o| OutPort {
                name: o.name.clone(),
                ty: o.ty.clone(),
                source: remap(o.source),
            })
            .collect();
        Ok(c)
    }

    fn wire_of(s: Source) -> Option<WireRef> {
        match s {
            Source::Input(_) => None,
            Source::Node { node, port } => Some(WireRef::Node { node, port }),
            Source::Loop(j) => Some(WireRef::Loop(j)),
        }
    }

    /// Same-tick dependencies of a wire.
    fn wire_dependencies(&self, w: WireRef) -> Vec<WireRef> {
        match w {
            WireRef::Loop(j) => self.loops[j].source.and_then(Self::wire_of).into_iter().collect(),
            WireRef::Node { node, port } => {
                let inst = &self.nodes[node];
                inst.port_dependencies(port)
                    .into_iter()
                    .filter_map(|p| inst.inputs.get(p).copied().flatten().and_then(Self::wire_of))
                    .collect()
            }
        }
    }

    fn all_wires(&self) -> Vec<WireRef> {
        let mut wires: Vec<WireRef> = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(node, n)| (0..n.output_count()).map(move |port| WireRef::Node { node, port }))
            .collect();
        wires.extend((0..self.loops.len()).map(WireRef::Loop));
        wires
    }

    /// Whether every cycle passes through a strict delay (a unit delay or
    /// a variable delay with minimum at least 1). The delay-amount input of
    /// a variable delay always counts as a same-tick dependency.
    pub fn is_contractive(&self) -> Contractivity {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let wires = self.all_wires();
        let index = |w: WireRef| wires.iter().position(|x| *x == w).expect("known wire");
        let mut mark = vec![Mark::New; wires.len()];
        for start in 0..wires.len() {
            if mark[start] != Mark::New {
                continue;
            }
            // iterative DFS keeping the active path for witness extraction
            let mut path: Vec<(usize, Vec<WireRef>)> = vec![(start, self.wire_dependencies(wires[start]))];
            mark[start] = Mark::Active;
            while let Some((w, deps)) = path.last_mut() {
                let w = *w;
                match deps.pop() {
                    Some(d) => {
                        let di = index(d);
                        match mark[di] {
                            Mark::New => {
                                mark[di] = Mark::Active;
                                path.push((di, self.wire_dependencies(d)));
                            }
                            Mark::Active => {
                                let pos = path.iter().position(|(x, _)| *x == di).expect("on path");
                                // the path runs from dependents to dependencies; reverse for data-flow order
                                let mut cycle: Vec<WireRef> = path[pos..].iter().map(|(x, _)| wires[*x]).collect();
                                cycle.reverse();
                                return Contractivity::DelayFreeCycle(cycle);
                            }
                            Mark::Done => {}
                        }
                    }
                    None => {
                        mark[w] = Mark::Done;
                        path.pop();
                    }
                }
            }
        }
        Contractivity::Contractive
    }

    /// Stable structural dump for tooling.
    pub fn dump(&self) -> CircuitDump {
        let src = |s: &Option<Source>| s.map(|s| s.to_string()).unwrap_or_else(|| "unconnected".into());
        CircuitDump {
            inputs: self
                .inputs
                .iter()
                .map(|p| PortDump {
                    name: p.name.clone(),
                    ty: p.ty.name().to_string(),
                    source: None,
                })
                .collect(),
            loops: self
                .loops
                .iter()
                .map(|l| PortDump {
                    name: String::new(),
                    ty: l.ty.name().to_string(),
                    source: Some(src(&l.source)),
                })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| {
                    let (kind, op, params) = match &n.kind {
                        NodeKind::Gate(g) => {
                            let kind = match g.kind {
                                GateKind::StrictLift => "strict_lift",
                                GateKind::PrimitiveTable => "primitive_table",
                                GateKind::Wiring => "wiring",
                            };
                            let params = match &g.op {
                                GateOp::Builtin(Builtin::Const(v)) => {
                                    vec![format!("val={}", g.outputs().wires()[0].show(*v, "bot"))]
                                }
                                _ => Vec::new(),
                            };
                            (kind, g.name().to_string(), params)
                        }
                        NodeKind::Delay(d) => {
                            let init = format!("init={}", d.ty.show(d.init, "bot"));
                            match d.kind {
                                DelayKind::Unit => ("delay", "delay".to_string(), vec![init]),
                                DelayKind::Var { d_min, d_max } => (
                                    "delay",
                                    "vardelay".to_string(),
                                    vec![format!("min={d_min}"), format!("max={d_max}"), init],
                                ),
                            }
                        }
                    };
                    NodeDump {
                        id,
                        kind,
                        op,
                        params,
                        in_types: n.input_sig().wires().iter().map(|t| t.name().to_string()).collect(),
                        out_types: n.output_sig().wires().iter().map(|t| t.name().to_string()).collect(),
                        inputs: n.inputs.iter().map(src).collect(),
                    }
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|o| PortDump {
                    name: o.name.clone(),
                    ty: o.ty.name().to_string(),
                    source: Some(src(&o.source)),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitDump {
    pub inputs: Vec<PortDump>,
    pub loops: Vec<PortDump>,
    pub nodes: Vec<NodeDump>,
    pub outputs: Vec<PortDump>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PortDump {
    #[serde(skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeDump {
    pub id: usize,
    pub kind: &'static str,
    pub op: String,
    pub params: Vec<String>,
    pub in_types: Vec<String>,
    pub out_types: Vec<String>,
    pub inputs: Vec<String>,
}

impl CircuitDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serialises")
    }
}

/// Incremental construction of a [`Circuit`].
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    circuit: Circuit,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, name: &str, ty: Ty) -> Source {
        self.circuit.inputs.push(Port {
            name: name.into(),
            ty,
        });
        Source::Input(self.circuit.inputs.len() - 1)
    }

    /// Add a node; returns its index. Output `p` is `Source::Node { node, port: p }`.
    pub fn node(&mut self, kind: NodeKind, inputs: Vec<Option<Source>>) -> usize {
        self.circuit.nodes.push(NodeInst { kind, inputs });
        self.circuit.nodes.len() - 1
    }

    pub fn gate(&mut self, def: GateDef, inputs: &[Source]) -> usize {
        self.node(NodeKind::Gate(Arc::new(def)), inputs.iter().copied().map(Some).collect())
    }

    pub fn delay(&mut self, node: DelayNode, inputs: &[Source]) -> usize {
        self.node(NodeKind::Delay(node), inputs.iter().copied().map(Some).collect())
    }

    /// Declare a loop wire whose driver is set later with [`Self::close_loop`].
    pub fn loop_wire(&mut self, ty: Ty) -> Source {
        self.circuit.loops.push(LoopWire { ty, source: None });
        Source::Loop(self.circuit.loops.len() - 1)
    }

    pub fn close_loop(&mut self, wire: Source, driver: Source) {
        if let Source::Loop(j) = wire {
            self.circuit.loops[j].source = Some(driver);
        }
    }

    pub fn output(&mut self, name: &str, source: Source) {
        let ty = self
            .circuit
            .source_type(source)
            .unwrap_or_else(BaseType::unit);
        self.circuit.outputs.push(OutPort {
            name: name.into(),
            ty,
            source: Some(source),
        });
    }

    pub fn output_typed(&mut self, name: &str, ty: Ty, source: Option<Source>) {
        self.circuit.outputs.push(OutPort {
            name: name.into(),
            ty,
            source,
        });
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Finish without validating.
    pub fn finish_unchecked(self) -> Circuit {
        self.circuit
    }

    pub fn finish(self) -> Result<Circuit, CircuitError> {
        self.circuit.validate()?;
        Ok(self.circuit)
    }
}
