//! Denotation of delay-free circuits.
//!
//! Every node output and every loop wire is one coordinate of a single
//! "all wires" tuple. One propagation step recomputes each coordinate from
//! the previous tuple; the circuit's value is the least fixed point of that
//! step, reached by Kleene iteration in at most `wires + 1` steps. Circuits
//! without loop wires are also evaluated in topological order as a fast path.

use std::sync::Arc;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, DelayNode, NodeKind, Source};
use crate::domain::{kleene, DomainError, KleeneRun, LValue, MonotoneFn, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("circuit contains delay nodes; use the causal engine")]
    HasDelays,
    #[error("circuit contains loop wires; topological evaluation needs an acyclic circuit")]
    HasLoops,
    #[error("inputs do not conform: {0}")]
    Inputs(DomainError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A validated circuit with its wire layout precomputed.
#[derive(Debug, Clone)]
pub struct Plan {
    circuit: Circuit,
    node_offset: Vec<usize>,
    loop_offset: usize,
    width: usize,
}

impl Plan {
    pub fn new(circuit: &Circuit) -> Result<Self, EvalError> {
        circuit.validate()?;
        let mut node_offset = Vec::with_capacity(circuit.nodes.len());
        let mut width = 0;
        for n in &circuit.nodes {
            node_offset.push(width);
            width += n.output_count();
        }
        let loop_offset = width;
        width += circuit.loops.len();
        Ok(Plan {
            circuit: circuit.clone(),
            node_offset,
            loop_offset,
            width,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Number of coordinates in the all-wires tuple.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn read(&self, s: Source, inputs: &[LValue], wires: &[LValue]) -> LValue {
        match s {
            Source::Input(i) => inputs[i],
            Source::Node { node, port } => wires[self.node_offset[node] + port],
            Source::Loop(j) => wires[self.loop_offset + j],
        }
    }

    fn read_opt(&self, s: &Option<Source>, inputs: &[LValue], wires: &[LValue]) -> LValue {
        self.read(s.expect("validated circuit"), inputs, wires)
    }

    /// Offset of a node's first output in the all-wires tuple.
    pub fn node_offset(&self, node: usize) -> usize {
        self.node_offset[node]
    }

    pub fn loop_offset(&self, j: usize) -> usize {
        self.loop_offset + j
    }

    /// One propagation step. `delay(node, s, d)` gives the output of a
    /// delay node from its current `s` and (for variable delays) `d` inputs.
    pub fn propagate<D>(&self, inputs: &[LValue], wires: &[LValue], delay: &mut D) -> Tuple
    where
        D: FnMut(usize, &DelayNode, LValue, Option<LValue>) -> LValue,
    {
        let mut next = Vec::with_capacity(self.width);
        let mut args = Vec::new();
        for (i, node) in self.circuit.nodes.iter().enumerate() {
            args.clear();
            args.extend(node.inputs.iter().map(|s| self.read_opt(s, inputs, wires)));
            match &node.kind {
                NodeKind::Gate(g) => next.extend(g.apply(&args)),
                NodeKind::Delay(d) => next.push(delay(i, d, args[0], args.get(1).copied())),
            }
        }
        for l in &self.circuit.loops {
            next.push(self.read_opt(&l.source, inputs, wires));
        }
        next
    }

    /// Least fixed point of [`Self::propagate`].
    pub fn settle<D>(&self, inputs: &[LValue], mut delay: D) -> Result<KleeneRun, DomainError>
    where
        D: FnMut(usize, &DelayNode, LValue, Option<LValue>) -> LValue,
    {
        kleene(self.width, |w| self.propagate(inputs, w, &mut delay))
    }

    pub fn outputs(&self, inputs: &[LValue], wires: &[LValue]) -> Tuple {
        self.circuit
            .outputs
            .iter()
            .map(|o| self.read_opt(&o.source, inputs, wires))
            .collect()
    }

    /// Single pass in node order; exact when there are no loop wires,
    /// since nodes only read from earlier nodes.
    pub fn topological(&self, inputs: &[LValue]) -> Result<Tuple, EvalError> {
        if !self.circuit.loops.is_empty() {
            return Err(EvalError::HasLoops);
        }
        if self.circuit.has_delays() {
            return Err(EvalError::HasDelays);
        }
        let mut wires = vec![LValue::Bot; self.width];
        for (i, node) in self.circuit.nodes.iter().enumerate() {
            let args: Vec<LValue> = node.inputs.iter().map(|s| self.read_opt(s, inputs, &wires)).collect();
            if let NodeKind::Gate(g) = &node.kind {
                let off = self.node_offset[i];
                for (k, v) in g.apply(&args).into_iter().enumerate() {
                    wires[off + k] = v;
                }
            }
        }
        Ok(wires)
    }

    fn check_inputs(&self, inputs: &[LValue]) -> Result<(), EvalError> {
        self.circuit.in_sig().conforms(inputs).map_err(EvalError::Inputs)
    }

    fn no_delays(&self, _: usize, _: &DelayNode, _: LValue, _: Option<LValue>) -> LValue {
        unreachable!("delay nodes are rejected before evaluation")
    }

    /// Outputs via the all-wires least fixed point.
    pub fn eval_fixed_point(&self, inputs: &[LValue]) -> Result<Tuple, EvalError> {
        if self.circuit.has_delays() {
            return Err(EvalError::HasDelays);
        }
        self.check_inputs(inputs)?;
        let run = self.settle(inputs, |i, d, s, k| self.no_delays(i, d, s, k))?;
        Ok(self.outputs(inputs, &run.value))
    }

    pub fn eval(&self, inputs: &[LValue]) -> Result<Tuple, EvalError> {
        if self.circuit.loops.is_empty() && !self.circuit.has_delays() {
            self.check_inputs(inputs)?;
            let wires = self.topological(inputs)?;
            return Ok(self.outputs(inputs, &wires));
        }
        self.eval_fixed_point(inputs)
    }
}

/// The function computed by a delay-free circuit.
pub fn denote(c: &Circuit) -> Result<MonotoneFn, EvalError> {
    if c.has_delays() {
        return Err(EvalError::HasDelays);
    }
    let plan = Arc::new(Plan::new(c)?);
    let p = plan.clone();
    Ok(MonotoneFn::from_fn(c.in_sig(), c.out_sig(), move |t| {
        p.eval(t).expect("validated delay-free circuit evaluates")
    }))
}

pub fn eval_comb(c: &Circuit, inputs: &[LValue]) -> Result<Tuple, EvalError> {
    Plan::new(c)?.eval(inputs)
}

/// Reference path: always the all-wires least fixed point.
pub fn eval_fixed_point(c: &Circuit, inputs: &[LValue]) -> Result<Tuple, EvalError> {
    Plan::new(c)?.eval_fixed_point(inputs)
}
