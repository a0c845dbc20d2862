//! Sequential semantics.
//!
//! A stream prefix of length `n` is a [`PrefixTrace`] with `n` ticks. Each
//! tick is settled as the least fixed point of the circuit's propagation
//! step, with delay outputs read from frozen history (or, for a variable
//! delay at distance 0, from the current tick's input). Settled delay
//! inputs are then committed and never revised, so the simulation of a
//! prefix is always the prefix of a longer simulation.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, DelayKind, DelayNode, NodeKind};
use crate::domain::{leq_unchecked, DomainError, LValue, Signature, Tuple};
use crate::eval::{EvalError, Plan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("input trace has {got} ticks, {needed} requested")]
    InputTooShort { needed: usize, got: usize },
    #[error("input trace signature {found} does not match circuit inputs {expected}")]
    Signature { expected: String, found: String },
    #[error("tick {tick} does not conform: {source}")]
    Tick { tick: usize, source: DomainError },
    #[error("delay amount {amount} outside {d_min}..={d_max}")]
    DelayRange { amount: u64, d_min: u32, d_max: u32 },
    #[error("tick settling failed: {0}")]
    Settle(DomainError),
}

/// A finite stream prefix: one tuple per tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTrace {
    signature: Signature,
    ticks: Vec<Tuple>,
}

impl PrefixTrace {
    pub fn new(signature: Signature) -> Self {
        PrefixTrace {
            signature,
            ticks: Vec::new(),
        }
    }

    pub fn from_ticks(signature: Signature, ticks: Vec<Tuple>) -> Result<Self, SimError> {
        let mut trace = PrefixTrace::new(signature);
        for t in ticks {
            trace.push(t)?;
        }
        Ok(trace)
    }

    /// Append a tick; earlier ticks are never modified.
    pub fn push(&mut self, tick: Tuple) -> Result<(), SimError> {
        self.signature.conforms(&tick).map_err(|source| SimError::Tick {
            tick: self.ticks.len(),
            source,
        })?;
        self.ticks.push(tick);
        Ok(())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn ticks(&self) -> &[Tuple] {
        &self.ticks
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Restriction to the first `n` ticks.
    pub fn prefix(&self, n: usize) -> PrefixTrace {
        PrefixTrace {
            signature: self.signature.clone(),
            ticks: self.ticks[..n.min(self.ticks.len())].to_vec(),
        }
    }

    /// Extend with all-`Bot` ticks up to length `n`.
    pub fn padded(&self, n: usize) -> PrefixTrace {
        let mut t = self.clone();
        while t.ticks.len() < n {
            t.ticks.push(self.signature.bottom());
        }
        t
    }

    /// Pointwise order on traces of equal length.
    pub fn leq(&self, other: &PrefixTrace) -> bool {
        self.ticks.len() == other.ticks.len()
            && self.ticks.iter().zip(&other.ticks).all(|(a, b)| leq_unchecked(a, b))
    }

    /// First `(tick, port)` holding `Bot`.
    pub fn first_bot(&self) -> Option<(usize, usize)> {
        self.ticks
            .iter()
            .enumerate()
            .find_map(|(t, row)| row.iter().position(|v| v.is_bot()).map(|p| (t, p)))
    }
}

/// Past settled values of a delay input, most recent first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    values: VecDeque<LValue>,
    cap: usize,
}

impl History {
    pub fn new(cap: usize) -> Self {
        History {
            values: VecDeque::with_capacity(cap),
            cap,
        }
    }

    pub fn commit(&mut self, v: LValue) {
        if self.cap == 0 {
            return;
        }
        if self.values.len() == self.cap {
            self.values.pop_back();
        }
        self.values.push_front(v);
    }

    /// The value committed `k` ticks ago (`k >= 1`).
    pub fn ago(&self, k: usize) -> Option<LValue> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }
}

/// Output of a delay node at tick `t`.
///
/// `current_d` is the delay-amount input as an atom of `int[d_min..d_max]`,
/// so `Val(i)` means a look-back of `d_min + i` ticks.
pub fn delay_step(
    node: &DelayNode,
    current_s: LValue,
    current_d: Option<LValue>,
    history: &History,
    t: u64,
) -> Result<LValue, SimError> {
    match node.kind {
        DelayKind::Unit => Ok(if t == 0 {
            node.init
        } else {
            history.ago(1).unwrap_or(node.init)
        }),
        DelayKind::Var { d_min, d_max } => {
            let amount = match current_d {
                None | Some(LValue::Bot) => return Ok(LValue::Bot),
                Some(LValue::Val(i)) => d_min as u64 + i as u64,
            };
            if amount > d_max as u64 {
                return Err(SimError::DelayRange { amount, d_min, d_max });
            }
            if amount == 0 {
                Ok(current_s)
            } else if t >= amount {
                Ok(history.ago(amount as usize).unwrap_or(node.init))
            } else {
                Ok(node.init)
            }
        }
    }
}

/// What a single [`SimState::step`] computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickReport {
    pub outputs: Tuple,
    /// The settled all-wires assignment.
    pub wires: Tuple,
    /// Kleene applications used to settle the tick.
    pub iterations: usize,
}

/// Running simulation of one circuit.
#[derive(Debug, Clone)]
pub struct SimState {
    plan: Arc<Plan>,
    histories: Vec<Option<History>>,
    t: u64,
}

impl SimState {
    pub fn new(c: &Circuit) -> Result<Self, SimError> {
        Ok(Self::from_plan(Arc::new(Plan::new(c)?)))
    }

    pub fn from_plan(plan: Arc<Plan>) -> Self {
        let histories = plan
            .circuit()
            .nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Delay(d) => Some(History::new(d.depth())),
                NodeKind::Gate(_) => None,
            })
            .collect();
        SimState { plan, histories, t: 0 }
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    /// Current tick number (ticks already taken).
    pub fn tick(&self) -> u64 {
        self.t
    }

    pub fn history(&self, node: usize) -> Option<&History> {
        self.histories.get(node).and_then(Option::as_ref)
    }

    pub fn max_history_len(&self) -> usize {
        self.histories.iter().flatten().map(History::len).max().unwrap_or(0)
    }

    /// The value a delay node produces this tick given current wires.
    fn delay_output(&self, node: usize, d: &DelayNode, s: LValue, k: Option<LValue>) -> Result<LValue, SimError> {
        let h = self.histories[node].as_ref().expect("delay node has history");
        delay_step(d, s, k, h, self.t)
    }

    /// Settle one tick and commit delay inputs.
    pub fn step(&mut self, inputs: &[LValue]) -> Result<TickReport, SimError> {
        self.plan
            .circuit()
            .in_sig()
            .conforms(inputs)
            .map_err(|source| SimError::Tick {
                tick: self.t as usize,
                source,
            })?;
        let mut failure = None;
        let run = self
            .plan
            .settle(inputs, |i, d, s, k| match self.delay_output(i, d, s, k) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    LValue::Bot
                }
            })
            .map_err(SimError::Settle)?;
        if let Some(e) = failure {
            return Err(e);
        }
        let circuit = self.plan.circuit();
        for (i, node) in circuit.nodes.iter().enumerate() {
            if let NodeKind::Delay(_) = node.kind {
                let s = self
                    .plan
                    .read(node.inputs[0].expect("validated circuit"), inputs, &run.value);
                self.histories[i].as_mut().expect("delay node has history").commit(s);
            }
        }
        self.t += 1;
        Ok(TickReport {
            outputs: self.plan.outputs(inputs, &run.value),
            wires: run.value,
            iterations: run.applications,
        })
    }
}

fn check_trace(c: &Circuit, inputs: &PrefixTrace, ticks: usize) -> Result<(), SimError> {
    if inputs.signature() != &c.in_sig() {
        return Err(SimError::Signature {
            expected: c.in_sig().to_string(),
            found: inputs.signature().to_string(),
        });
    }
    if inputs.len() < ticks {
        return Err(SimError::InputTooShort {
            needed: ticks,
            got: inputs.len(),
        });
    }
    Ok(())
}

/// Run `ticks` ticks; also returns the per-tick Kleene application counts.
pub fn simulate_with_stats(
    c: &Circuit,
    inputs: &PrefixTrace,
    ticks: usize,
) -> Result<(PrefixTrace, Vec<usize>), SimError> {
    check_trace(c, inputs, ticks)?;
    let mut state = SimState::new(c)?;
    run(&mut state, inputs, ticks)
}

fn run(state: &mut SimState, inputs: &PrefixTrace, ticks: usize) -> Result<(PrefixTrace, Vec<usize>), SimError> {
    let mut out = PrefixTrace::new(state.plan.circuit().out_sig());
    let mut iterations = Vec::with_capacity(ticks);
    for tick in &inputs.ticks()[..ticks] {
        let report = state.step(tick)?;
        iterations.push(report.iterations);
        out.push(report.outputs)?;
    }
    Ok((out, iterations))
}

pub fn simulate(c: &Circuit, inputs: &PrefixTrace, ticks: usize) -> Result<PrefixTrace, SimError> {
    simulate_with_stats(c, inputs, ticks).map(|(t, _)| t)
}

/// Simulate many traces against one precomputed plan.
#[derive(Debug, Clone)]
pub struct Simulator {
    plan: Arc<Plan>,
}

impl Simulator {
    pub fn new(c: &Circuit) -> Result<Self, SimError> {
        Ok(Simulator {
            plan: Arc::new(Plan::new(c)?),
        })
    }

    pub fn circuit(&self) -> &Circuit {
        self.plan.circuit()
    }

    pub fn run(&self, inputs: &PrefixTrace, ticks: usize) -> Result<PrefixTrace, SimError> {
        check_trace(self.plan.circuit(), inputs, ticks)?;
        let mut state = SimState::from_plan(self.plan.clone());
        run(&mut state, inputs, ticks).map(|(t, _)| t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalityOptions {
    /// Randomly weakened input traces used for the monotonicity check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CausalityOptions {
    fn default() -> Self {
        CausalityOptions { samples: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Causality {
    Causal,
    /// Simulating only the first `length` ticks disagrees with the full run.
    PrefixMismatch { length: usize },
    /// A pointwise smaller input produced an output that is not smaller.
    NotMonotone { lower: PrefixTrace, upper: PrefixTrace },
}

impl Causality {
    pub fn holds(&self) -> bool {
        matches!(self, Causality::Causal)
    }
}

/// Re-simulate every prefix and compare with the truncated full run, then
/// check monotonicity in the input on randomly weakened traces.
pub fn check_causality(
    c: &Circuit,
    inputs: &PrefixTrace,
    ticks: usize,
    opts: &CausalityOptions,
) -> Result<Causality, SimError> {
    let sim = Simulator::new(c)?;
    let full = sim.run(inputs, ticks)?;
    for n in 0..ticks {
        if sim.run(&inputs.prefix(n), n)? != full.prefix(n) {
            return Ok(Causality::PrefixMismatch { length: n });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let upper = inputs.prefix(ticks);
    for _ in 0..opts.samples {
        let rows = upper
            .ticks()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| if rng.gen_bool(0.3) { LValue::Bot } else { *v })
                    .collect()
            })
            .collect();
        let lower = PrefixTrace::from_ticks(upper.signature().clone(), rows)?;
        if !sim.run(&lower, ticks)?.leq(&full) {
            return Ok(Causality::NotMonotone { lower, upper });
        }
    }
    Ok(Causality::Causal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, Source};
    use crate::domain::{BaseType, Ty};
    use crate::gates::{const_gate, not_gate, por_gate};

    const BOT: LValue = LValue::Bot;

    fn v(i: u32) -> LValue {
        LValue::Val(i)
    }

    fn b() -> Ty {
        BaseType::bool()
    }

    fn bools(sig_len: usize, rows: &[&[LValue]]) -> PrefixTrace {
        PrefixTrace::from_ticks(
            Signature::repeat(&b(), sig_len),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn empty_trace(n: usize) -> PrefixTrace {
        PrefixTrace::from_ticks(Signature::empty(), vec![Vec::new(); n]).unwrap()
    }

    #[test]
    fn unit_delay_step() {
        let d = DelayNode::unit(b(), v(0));
        let h = History::new(1);
        assert_eq!(delay_step(&d, v(1), None, &h, 0).unwrap(), v(0));
    }

    #[test]
    fn var_delay_step() {
        let d = DelayNode::var(b(), 1, 4, BOT);
        let mut h = History::new(4);
        // s(0..5) = 0, 0, 0, 1, 0 ; at t = 5 the most recent is s(4)
        for s in [v(0), v(0), v(0), v(1), v(0)] {
            h.commit(s);
        }
        // d = 2 is atom index 1 of int[1..4]
        assert_eq!(delay_step(&d, v(0), Some(v(1)), &h, 5).unwrap(), v(1));
        assert_eq!(delay_step(&d, v(0), Some(BOT), &h, 5).unwrap(), BOT);
        assert!(matches!(
            delay_step(&d, v(0), Some(v(4)), &h, 5),
            Err(SimError::DelayRange { amount: 5, .. })
        ));
        // looking before time 0 yields init
        let d = DelayNode::var(b(), 0, 3, v(1));
        assert_eq!(delay_step(&d, v(0), Some(v(3)), &History::new(3), 2).unwrap(), v(1));
        // distance 0 reads the current input
        assert_eq!(delay_step(&d, v(0), Some(v(0)), &History::new(3), 2).unwrap(), v(0));
    }

    fn toggle() -> Circuit {
        // x := delay(init=0)(not(x))
        let mut cb = CircuitBuilder::new();
        let l = cb.loop_wire(b());
        let d = cb.delay(DelayNode::unit(b(), v(0)), &[l]);
        let n = cb.gate(not_gate(), &[Source::Node { node: d, port: 0 }]);
        cb.close_loop(l, Source::Node { node: n, port: 0 });
        cb.output("x", Source::Node { node: d, port: 0 });
        cb.finish().unwrap()
    }

    #[test]
    fn toggle_alternates() {
        let out = simulate(&toggle(), &empty_trace(5), 5).unwrap();
        let expected: Vec<Tuple> = [0, 1, 0, 1, 0].iter().map(|&x| vec![v(x)]).collect();
        assert_eq!(out.ticks(), expected.as_slice());
    }

    #[test]
    fn por_loop_every_tick() {
        let mut cb = CircuitBuilder::new();
        let l = cb.loop_wire(b());
        let k = cb.gate(const_gate(&b(), v(1)).unwrap(), &[]);
        let p = cb.gate(por_gate(), &[Source::Node { node: k, port: 0 }, l]);
        cb.close_loop(l, Source::Node { node: p, port: 0 });
        cb.output("out", Source::Node { node: p, port: 0 });
        let out = simulate(&cb.finish().unwrap(), &empty_trace(4), 4).unwrap();
        assert!(out.ticks().iter().all(|t| t == &vec![v(1)]));
    }

    #[test]
    fn identity_and_shift() {
        let input = bools(1, &[&[v(1)], &[v(0)], &[BOT], &[v(1)]]);
        let id = Circuit::identity(&Signature::new(vec![b()]));
        assert_eq!(simulate(&id, &input, 3).unwrap(), input.prefix(3));
        let delay = Circuit::delay(DelayNode::unit(b(), BOT));
        let out = simulate(&delay, &input, 4).unwrap();
        assert_eq!(out.ticks(), &[vec![BOT], vec![v(1)], vec![v(0)], vec![BOT]]);
    }

    #[test]
    fn short_input_is_an_error() {
        let id = Circuit::identity(&Signature::new(vec![b()]));
        let input = bools(1, &[&[v(1)]]);
        assert_eq!(
            simulate(&id, &input, 2).unwrap_err(),
            SimError::InputTooShort { needed: 2, got: 1 }
        );
        assert_eq!(simulate(&id, &input.padded(2), 2).unwrap().ticks()[1], vec![BOT]);
    }

    #[test]
    fn identity_loop_per_tick_is_bottom() {
        let mut cb = CircuitBuilder::new();
        let l = cb.loop_wire(b());
        cb.close_loop(l, l);
        cb.output("l", l);
        let out = simulate(&cb.finish().unwrap(), &empty_trace(3), 3).unwrap();
        assert!(out.ticks().iter().all(|t| t == &vec![BOT]));
    }

    #[test]
    fn history_is_bounded() {
        let mut h = History::new(2);
        for i in 0..10 {
            h.commit(v(i % 2));
            assert!(h.len() <= 2);
        }
        assert_eq!(h.ago(1), Some(v(1)));
        assert_eq!(h.ago(2), Some(v(0)));
        assert_eq!(h.ago(0), None);
    }

    #[test]
    fn causality_of_simple_circuits() {
        let input = bools(1, &[&[v(1)], &[v(0)], &[v(0)], &[v(1)], &[BOT]]);
        let opts = CausalityOptions::default();
        let not = Circuit::gate(not_gate());
        assert!(check_causality(&not, &input, 5, &opts).unwrap().holds());
        let d = Circuit::delay(DelayNode::unit(b(), v(0)));
        let chain = d.compose(&d).unwrap();
        assert!(check_causality(&chain, &input, 5, &opts).unwrap().holds());
    }
}
