//! Totality and equivalence checks over finite horizons.
//!
//! Both checks quantify over input traces up to a horizon `T`, so a
//! positive verdict only holds up to `T`. Exhaustive search walks the tree
//! of input prefixes depth first in lexicographic order, sharing simulation
//! state between siblings; witnesses are minimal in (tick, lexicographic
//! input order).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, Contractivity, NodeKind, WireRef};
use crate::domain::{EnumCap, LValue, Signature, Tuple};
use crate::sim::{PrefixTrace, SimError, SimState, Simulator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("not exhaustively checkable: {0}")]
    CapExceeded(String),
    #[error("signature mismatch: {0}")]
    Signature(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Randomized { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisLimits {
    /// Largest number of full-length input traces exhaustive search may cover.
    pub max_traces: u128,
    pub cap: EnumCap,
}

impl Default for AnalysisLimits {
    fn default() -> Self {
        AnalysisLimits {
            max_traces: 1 << 20,
            cap: EnumCap::default(),
        }
    }
}

/// Choices for one tick: every tuple over `sig`, optionally with `Bot`s,
/// in lexicographic order.
fn tick_alphabet(sig: &Signature, with_bot: bool) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = vec![Vec::new()];
    for ty in sig.wires() {
        let values: Vec<LValue> = if with_bot {
            ty.lifted_values().collect()
        } else {
            (0..ty.size() as u32).map(LValue::Val).collect()
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut t = prefix.clone();
                    t.push(*v);
                    t
                })
            })
            .collect();
    }
    out
}

fn check_exhaustive(sig: &Signature, horizon: usize, with_bot: bool, limits: &AnalysisLimits) -> Result<Vec<Tuple>, AnalysisError> {
    sig.wires()
        .iter()
        .find(|ty| ty.size() > limits.cap.max_values)
        .map_or(Ok(()), |ty| {
            Err(AnalysisError::CapExceeded(format!(
                "input type `{ty}` has {} values, cap is {}",
                ty.size(),
                limits.cap.max_values
            )))
        })?;
    let per_tick: u128 = sig
        .wires()
        .iter()
        .map(|ty| ty.size() as u128 + with_bot as u128)
        .product();
    let total = per_tick.checked_pow(horizon as u32).unwrap_or(u128::MAX);
    if total > limits.max_traces {
        return Err(AnalysisError::CapExceeded(format!(
            "{per_tick}^{horizon} input traces exceed the limit of {}",
            limits.max_traces
        )));
    }
    Ok(tick_alphabet(sig, with_bot))
}

/// A deviation found at `tick` while following `inputs`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Found<W> {
    tick: usize,
    inputs: Vec<Tuple>,
    what: W,
}

/// Depth-first walk over input prefixes. `visit` advances the per-branch
/// state by one tick and reports a deviation, if any, at that tick.
fn search<S: Clone, W>(
    root: S,
    alphabet: &[Tuple],
    horizon: usize,
    visit: &mut dyn FnMut(&mut S, &Tuple) -> Result<Option<W>, AnalysisError>,
    traces: &mut u64,
) -> Result<Option<Found<W>>, AnalysisError> {
    let mut best: Option<Found<W>> = None;
    let mut path: Vec<Tuple> = Vec::new();
    fn go<S: Clone, W>(
        state: &S,
        depth: usize,
        alphabet: &[Tuple],
        horizon: usize,
        limit: &mut usize,
        path: &mut Vec<Tuple>,
        best: &mut Option<Found<W>>,
        visit: &mut dyn FnMut(&mut S, &Tuple) -> Result<Option<W>, AnalysisError>,
        traces: &mut u64,
    ) -> Result<(), AnalysisError> {
        if depth == horizon {
            *traces += 1;
            return Ok(());
        }
        for letter in alphabet {
            if depth >= *limit {
                return Ok(());
            }
            let mut next = state.clone();
            path.push(letter.clone());
            if let Some(what) = visit(&mut next, letter)? {
                *best = Some(Found {
                    tick: depth,
                    inputs: path.clone(),
                    what,
                });
                // only strictly earlier ticks can improve on this witness
                *limit = depth;
            } else {
                go(&next, depth + 1, alphabet, horizon, limit, path, best, visit, traces)?;
            }
            path.pop();
        }
        Ok(())
    }
    let mut limit = horizon;
    go(&root, 0, alphabet, horizon, &mut limit, &mut path, &mut best, visit, traces)?;
    Ok(best)
}

fn random_trace(rng: &mut ChaCha8Rng, sig: &Signature, horizon: usize, bot_weight: f64) -> PrefixTrace {
    let rows = (0..horizon).map(|_| sig.random_tuple(rng, bot_weight)).collect();
    PrefixTrace::from_ticks(sig.clone(), rows).expect("random tuples conform")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Totality {
    /// Every `Bot`-free input trace up to the horizon gave `Bot`-free outputs.
    Total,
    NotTotal {
        inputs: PrefixTrace,
        tick: usize,
        port: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalityReport {
    pub horizon: usize,
    pub strategy: Strategy,
    pub traces_checked: u64,
    pub verdict: Totality,
}

impl TotalityReport {
    pub fn is_total(&self) -> bool {
        self.verdict == Totality::Total
    }
}

/// Check that `Bot`-free inputs give `Bot`-free outputs for `horizon` ticks.
pub fn check_totality(
    c: &Circuit,
    horizon: usize,
    strategy: Strategy,
    limits: &AnalysisLimits,
) -> Result<TotalityReport, AnalysisError> {
    let sig = c.in_sig();
    let mut traces = 0u64;
    let verdict = match strategy {
        Strategy::Exhaustive => {
            let alphabet = check_exhaustive(&sig, horizon, false, limits)?;
            let root = SimState::new(c)?;
            let found = search(
                root,
                &alphabet,
                horizon,
                &mut |state: &mut SimState, letter: &Tuple| {
                    let out = state.step(letter)?.outputs;
                    Ok(out.iter().position(|v| v.is_bot()))
                },
                &mut traces,
            )?;
            match found {
                None => Totality::Total,
                Some(f) => Totality::NotTotal {
                    inputs: PrefixTrace::from_ticks(sig, f.inputs)?,
                    tick: f.tick,
                    port: f.what,
                },
            }
        }
        Strategy::Randomized { samples, seed } => {
            let sim = Simulator::new(c)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best: Option<(usize, usize, PrefixTrace)> = None;
            for _ in 0..samples {
                let input = random_trace(&mut rng, &sig, horizon, 0.0);
                traces += 1;
                if let Some((tick, port)) = sim.run(&input, horizon)?.first_bot() {
                    if best.as_ref().map_or(true, |(t, _, _)| tick < *t) {
                        best = Some((tick, port, input.prefix(tick + 1)));
                    }
                }
            }
            match best {
                None => Totality::Total,
                Some((tick, port, inputs)) => Totality::NotTotal { inputs, tick, port },
            }
        }
    };
    Ok(TotalityReport {
        horizon,
        strategy,
        traces_checked: traces,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Distinguished {
        inputs: PrefixTrace,
        tick: usize,
        left: Tuple,
        right: Tuple,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivReport {
    pub horizon: usize,
    pub strategy: Strategy,
    pub traces_checked: u64,
    pub verdict: Equivalence,
}

impl EquivReport {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Equivalence::Equivalent
    }
}

/// Compare two circuits tick for tick on input traces that may contain `Bot`.
pub fn check_equiv(
    c1: &Circuit,
    c2: &Circuit,
    horizon: usize,
    strategy: Strategy,
    limits: &AnalysisLimits,
) -> Result<EquivReport, AnalysisError> {
    if c1.in_sig() != c2.in_sig() || c1.out_sig() != c2.out_sig() {
        return Err(AnalysisError::Signature(format!(
            "{} -> {} vs {} -> {}",
            c1.in_sig(),
            c1.out_sig(),
            c2.in_sig(),
            c2.out_sig()
        )));
    }
    let sig = c1.in_sig();
    let mut traces = 0u64;
    let verdict = match strategy {
        Strategy::Exhaustive => {
            let alphabet = check_exhaustive(&sig, horizon, true, limits)?;
            let root = (SimState::new(c1)?, SimState::new(c2)?);
            let found = search(
                root,
                &alphabet,
                horizon,
                &mut |(s1, s2): &mut (SimState, SimState), letter: &Tuple| {
                    let left = s1.step(letter)?.outputs;
                    let right = s2.step(letter)?.outputs;
                    Ok((left != right).then_some((left, right)))
                },
                &mut traces,
            )?;
            match found {
                None => Equivalence::Equivalent,
                Some(f) => Equivalence::Distinguished {
                    inputs: PrefixTrace::from_ticks(sig, f.inputs)?,
                    tick: f.tick,
                    left: f.what.0,
                    right: f.what.1,
                },
            }
        }
        Strategy::Randomized { samples, seed } => {
            let (sim1, sim2) = (Simulator::new(c1)?, Simulator::new(c2)?);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best: Option<Equivalence> = None;
            let mut best_tick = usize::MAX;
            for _ in 0..samples {
                let bot_weight = if rng.gen_bool(0.5) { 0.0 } else { 0.25 };
                let input = random_trace(&mut rng, &sig, horizon, bot_weight);
                traces += 1;
                let (o1, o2) = (sim1.run(&input, horizon)?, sim2.run(&input, horizon)?);
                if let Some(tick) = (0..horizon).find(|&t| o1.ticks()[t] != o2.ticks()[t]) {
                    if tick < best_tick {
                        best_tick = tick;
                        best = Some(Equivalence::Distinguished {
                            inputs: input.prefix(tick + 1),
                            tick,
                            left: o1.ticks()[tick].clone(),
                            right: o2.ticks()[tick].clone(),
                        });
                    }
                }
            }
            best.unwrap_or(Equivalence::Equivalent)
        }
    };
    Ok(EquivReport {
        horizon,
        strategy,
        traces_checked: traces,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guarantee {
    /// Contractive, with total gates and `Bot`-free delay inits: total.
    Guaranteed,
    NotContractive(Vec<WireRef>),
    /// The circuit has a partial gate or a `Bot` delay init.
    Precondition(String),
}

impl Guarantee {
    pub fn holds(&self) -> bool {
        matches!(self, Guarantee::Guaranteed)
    }
}

/// Static totality argument: composition preserves totality and only
/// feedback can break it, so a contractive circuit built from total gates
/// and `Bot`-free delay inits is total.
pub fn totality_guarantee(c: &Circuit) -> Result<Guarantee, AnalysisError> {
    c.validate().map_err(|e| AnalysisError::Sim(SimError::Eval(e.into())))?;
    for (i, node) in c.nodes.iter().enumerate() {
        match &node.kind {
            NodeKind::Gate(g) if !g.is_total() => {
                return Ok(Guarantee::Precondition(format!("node {i}: gate `{}` is not total", g.name())));
            }
            NodeKind::Delay(d) if d.init.is_bot() => {
                return Ok(Guarantee::Precondition(format!("node {i}: delay init is bot")));
            }
            _ => {}
        }
    }
    Ok(match c.is_contractive() {
        Contractivity::Contractive => Guarantee::Guaranteed,
        Contractivity::DelayFreeCycle(cycle) => Guarantee::NotContractive(cycle),
    })
}

fn show_trace(c_sig: &Signature, t: &PrefixTrace) -> Vec<Vec<String>> {
    t.ticks()
        .iter()
        .map(|row| c_sig.wires().iter().zip(row).map(|(ty, v)| ty.show(*v, "_")).collect())
        .collect()
}

fn show_tuple(sig: &Signature, row: &[LValue]) -> Vec<String> {
    sig.wires().iter().zip(row).map(|(ty, v)| ty.show(*v, "_")).collect()
}

#[derive(Serialize)]
struct WitnessJson {
    inputs: Vec<Vec<String>>,
    tick: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    port: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ReportJson {
    check: &'static str,
    verdict: &'static str,
    horizon: usize,
    strategy: Strategy,
    traces_checked: u64,
    note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
}

impl TotalityReport {
    /// Machine-readable report; port names come from `c`.
    pub fn to_json(&self, c: &Circuit) -> String {
        let (verdict, witness) = match &self.verdict {
            Totality::Total => ("total", None),
            Totality::NotTotal { inputs, tick, port } => (
                "not_total",
                Some(WitnessJson {
                    inputs: show_trace(&c.in_sig(), inputs),
                    tick: *tick,
                    port: Some(c.outputs[*port].name.clone()),
                    left: None,
                    right: None,
                }),
            ),
        };
        serde_json::to_string_pretty(&ReportJson {
            check: "totality",
            verdict,
            horizon: self.horizon,
            strategy: self.strategy,
            traces_checked: self.traces_checked,
            note: format!("up to horizon {}", self.horizon),
            witness,
        })
        .expect("report serialises")
    }
}

impl EquivReport {
    pub fn to_json(&self, c: &Circuit) -> String {
        let (verdict, witness) = match &self.verdict {
            Equivalence::Equivalent => ("equivalent", None),
            Equivalence::Distinguished {
                inputs,
                tick,
                left,
                right,
            } => (
                "distinguished",
                Some(WitnessJson {
                    inputs: show_trace(&c.in_sig(), inputs),
                    tick: *tick,
                    port: None,
                    left: Some(show_tuple(&c.out_sig(), left)),
                    right: Some(show_tuple(&c.out_sig(), right)),
                }),
            ),
        };
        serde_json::to_string_pretty(&ReportJson {
            check: "equiv",
            verdict,
            horizon: self.horizon,
            strategy: self.strategy,
            traces_checked: self.traces_checked,
            note: format!("up to horizon {}", self.horizon),
            witness,
        })
        .expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, DelayNode, Source};
    use crate::domain::{BaseType, Ty};
    use crate::gates::{and_gate, not_gate, por_gate, xor_gate};

    const BOT: LValue = LValue::Bot;

    fn v(i: u32) -> LValue {
        LValue::Val(i)
    }

    fn b() -> Ty {
        BaseType::bool()
    }

    fn limits() -> AnalysisLimits {
        AnalysisLimits::default()
    }

    /// acc := delay(init=0)(xor(a, acc)), output acc.
    fn accumulator(init: LValue) -> Circuit {
        let mut cb = CircuitBuilder::new();
        let a = cb.input("a", b());
        let l = cb.loop_wire(b());
        let d = cb.delay(DelayNode::unit(b(), init), &[l]);
        let acc = Source::Node { node: d, port: 0 };
        let x = cb.gate(xor_gate(), &[a, acc]);
        cb.close_loop(l, Source::Node { node: x, port: 0 });
        cb.output("acc", acc);
        cb.finish().unwrap()
    }

    #[test]
    fn accumulator_is_total() {
        let c = accumulator(v(0));
        let r = check_totality(&c, 8, Strategy::Exhaustive, &limits()).unwrap();
        assert!(r.is_total());
        assert_eq!(r.traces_checked, 256);
        assert!(totality_guarantee(&c).unwrap().holds());
    }

    #[test]
    fn identity_loop_not_total_at_tick_zero() {
        let mut cb = CircuitBuilder::new();
        let a = cb.input("a", b());
        let l = cb.loop_wire(b());
        cb.close_loop(l, l);
        let g = cb.gate(and_gate(), &[a, l]);
        cb.output("o", Source::Node { node: g, port: 0 });
        let c = cb.finish().unwrap();
        let r = check_totality(&c, 4, Strategy::Exhaustive, &limits()).unwrap();
        match r.verdict {
            Totality::NotTotal { tick, port, inputs } => {
                assert_eq!((tick, port), (0, 0));
                assert_eq!(inputs.ticks(), &[vec![v(0)]]);
            }
            Totality::Total => panic!("loop of a bare wire is bottom"),
        }
        assert!(!totality_guarantee(&c).unwrap().holds());
    }

    #[test]
    fn bot_init_delay_not_total() {
        let c = Circuit::delay(DelayNode::unit(b(), BOT));
        let r = check_totality(&c, 2, Strategy::Exhaustive, &limits()).unwrap();
        assert!(matches!(r.verdict, Totality::NotTotal { tick: 0, port: 0, .. }));
        assert!(matches!(totality_guarantee(&c).unwrap(), Guarantee::Precondition(_)));
        let json = r.to_json(&c);
        assert!(json.contains("\"verdict\": \"not_total\""), "{json}");
        assert!(json.contains("up to horizon 2"));
    }

    #[test]
    fn witness_is_minimal_in_tick() {
        // Bot appears at tick 2 when a = 1 at tick 0, else never;
        // a shallower witness must win over lexicographically earlier deeper ones.
        let mut cb = CircuitBuilder::new();
        let a = cb.input("a", b());
        let d1 = cb.delay(DelayNode::unit(b(), v(0)), &[a]);
        let d2 = cb.delay(DelayNode::unit(b(), v(0)), &[Source::Node { node: d1, port: 0 }]);
        // por(not(d2), bottom loop) is bottom exactly when d2 = 1
        let l = cb.loop_wire(b());
        cb.close_loop(l, l);
        let n = cb.gate(not_gate(), &[Source::Node { node: d2, port: 0 }]);
        let m = cb.gate(por_gate(), &[Source::Node { node: n, port: 0 }, l]);
        cb.output("o", Source::Node { node: m, port: 0 });
        let c = cb.finish().unwrap();
        let r = check_totality(&c, 5, Strategy::Exhaustive, &limits()).unwrap();
        match r.verdict {
            Totality::NotTotal { tick, inputs, .. } => {
                assert_eq!(tick, 2);
                assert_eq!(inputs.ticks(), &[vec![v(1)], vec![v(0)], vec![v(0)]]);
            }
            Totality::Total => panic!(),
        }
    }

    #[test]
    fn not_versus_identity() {
        let not = Circuit::gate(not_gate());
        let id = Circuit::identity(&Signature::new(vec![b()]));
        let r = check_equiv(&not, &id, 3, Strategy::Exhaustive, &limits()).unwrap();
        match r.verdict {
            Equivalence::Distinguished { tick, inputs, left, right } => {
                assert_eq!(tick, 0);
                assert_eq!(inputs.ticks(), &[vec![v(0)]]);
                assert_eq!((left, right), (vec![v(1)], vec![v(0)]));
            }
            Equivalence::Equivalent => panic!(),
        }
        let r = check_equiv(&not, &not.clone(), 3, Strategy::Exhaustive, &limits()).unwrap();
        assert!(r.is_equivalent());
        assert_eq!(r.traces_checked, 27);
        assert!(check_equiv(&not, &Circuit::gate(and_gate()), 3, Strategy::Exhaustive, &limits()).is_err());
    }

    #[test]
    fn randomized_strategies() {
        let not = Circuit::gate(not_gate());
        let id = Circuit::identity(&Signature::new(vec![b()]));
        let s = Strategy::Randomized { samples: 50, seed: 7 };
        assert!(!check_equiv(&not, &id, 4, s, &limits()).unwrap().is_equivalent());
        assert!(check_totality(&accumulator(v(1)), 8, s, &limits()).unwrap().is_total());
    }

    #[test]
    fn exhaustive_cap() {
        let mut cb = CircuitBuilder::new();
        let a = cb.input("a", b());
        let bb = cb.input("b", b());
        let g = cb.gate(por_gate(), &[a, bb]);
        cb.output("o", Source::Node { node: g, port: 0 });
        let c = cb.finish().unwrap();
        let tight = AnalysisLimits { max_traces: 100, ..Default::default() };
        assert!(matches!(
            check_totality(&c, 8, Strategy::Exhaustive, &tight),
            Err(AnalysisError::CapExceeded(_))
        ));
    }

    #[test]
    fn totality_is_monotone_in_horizon() {
        let c = accumulator(v(0));
        for h in 0..=6 {
            assert!(check_totality(&c, h, Strategy::Exhaustive, &limits()).unwrap().is_total());
        }
    }
}
