//! Random circuits for property tests and acceptance sweeps.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Circuit, CircuitBuilder, DelayKind, DelayNode, NodeInst, NodeKind, Source};
use crate::domain::{BaseType, LValue, Ty};
use crate::gates::{
    and_gate, const_gate, dup_gate, identity_gate, mux_gate, not_gate, or_gate, pand_gate, por_gate, swap_gate,
    xor_gate, GateDef,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delays {
    None,
    Unit,
    /// Unit delays and variable delays with time-varying amounts.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenOptions {
    pub max_inputs: usize,
    pub max_nodes: usize,
    pub max_loops: usize,
    pub max_outputs: usize,
    pub delays: Delays,
    /// Close every loop through a strict delay so the result is contractive.
    pub contractive: bool,
    /// Only gates total on `Bot`-free inputs, and `Bot`-free delay inits.
    pub total: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_inputs: 2,
            max_nodes: 6,
            max_loops: 2,
            max_outputs: 2,
            delays: Delays::Mixed,
            contractive: false,
            total: false,
        }
    }
}

fn b() -> Ty {
    BaseType::bool()
}

fn bool_gate<R: Rng + ?Sized>(rng: &mut R, total: bool) -> GateDef {
    let pick = rng.gen_range(0..if total { 11 } else { 12 });
    match pick {
        0 => not_gate(),
        1 => and_gate(),
        2 => or_gate(),
        3 => xor_gate(),
        4 => por_gate(),
        5 => pand_gate(),
        6 => mux_gate(&b()),
        7 => dup_gate(&b()),
        8 => swap_gate(&b(), &b()),
        9 => identity_gate(&b()),
        10 => const_gate(&b(), LValue::Val(rng.gen_range(0..2))).expect("bool atom"),
        _ => const_gate(&b(), LValue::Bot).expect("bottom constant"),
    }
}

fn init<R: Rng + ?Sized>(rng: &mut R, total: bool) -> LValue {
    if !total && rng.gen_bool(0.2) {
        LValue::Bot
    } else {
        LValue::Val(rng.gen_range(0..2))
    }
}

/// Pick `n` sources, preferring recent ones so that circuits get some depth.
fn pick_sources<R: Rng + ?Sized>(rng: &mut R, pool: &[Source], n: usize) -> Vec<Source> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                pool[pool.len() - 1 - rng.gen_range(0..pool.len().min(3))]
            } else {
                *pool.choose(rng).expect("non-empty pool")
            }
        })
        .collect()
}

/// Variable delay whose amount is chosen per tick by `select`, between two
/// constants in `[d_min, d_max]`.
fn var_delay<R: Rng + ?Sized>(cb: &mut CircuitBuilder, rng: &mut R, s: Source, select: Source, strict: bool, total: bool) -> Source {
    let d_min = if strict { 1 } else { rng.gen_range(0..2) };
    let d_max = d_min + rng.gen_range(1..3);
    let node = DelayNode::var(b(), d_min, d_max, init(rng, total));
    let amount = node.amount_type().expect("variable delay");
    let span = d_max - d_min + 1;
    let k0 = cb.gate(const_gate(&amount, LValue::Val(rng.gen_range(0..span))).expect("in range"), &[]);
    let k1 = cb.gate(const_gate(&amount, LValue::Val(rng.gen_range(0..span))).expect("in range"), &[]);
    let m = cb.gate(
        mux_gate(&amount),
        &[select, Source::Node { node: k0, port: 0 }, Source::Node { node: k1, port: 0 }],
    );
    let d = cb.delay(node, &[s, Source::Node { node: m, port: 0 }]);
    Source::Node { node: d, port: 0 }
}

/// A random validated circuit over boolean wires.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, opts: &GenOptions) -> Circuit {
    let mut cb = CircuitBuilder::new();
    let n_inputs = rng.gen_range(0..=opts.max_inputs);
    let inputs: Vec<Source> = (0..n_inputs).map(|i| cb.input(&format!("i{i}"), b())).collect();
    let loops: Vec<Source> = (0..rng.gen_range(0..=opts.max_loops)).map(|_| cb.loop_wire(b())).collect();
    let mut pool: Vec<Source> = inputs.iter().chain(&loops).copied().collect();
    if pool.is_empty() {
        let k = cb.gate(const_gate(&b(), LValue::Val(rng.gen_range(0..2))).expect("bool atom"), &[]);
        pool.push(Source::Node { node: k, port: 0 });
    }
    // amount selectors must not depend on loops when contractivity is required
    let mut selectors: Vec<Source> = inputs.clone();
    if selectors.is_empty() {
        let k = cb.gate(const_gate(&b(), LValue::Val(rng.gen_range(0..2))).expect("bool atom"), &[]);
        selectors.push(Source::Node { node: k, port: 0 });
    }
    for _ in 0..rng.gen_range(1..=opts.max_nodes.max(1)) {
        let roll: f64 = rng.gen();
        let out = if opts.delays != Delays::None && roll < 0.3 {
            let s = pick_sources(rng, &pool, 1)[0];
            if opts.delays == Delays::Mixed && rng.gen_bool(0.4) {
                let sel = if opts.contractive {
                    *selectors.choose(rng).expect("non-empty")
                } else {
                    pick_sources(rng, &pool, 1)[0]
                };
                vec![var_delay(&mut cb, rng, s, sel, false, opts.total)]
            } else {
                let d = cb.delay(DelayNode::unit(b(), init(rng, opts.total)), &[s]);
                vec![Source::Node { node: d, port: 0 }]
            }
        } else {
            let g = bool_gate(rng, opts.total);
            let args = pick_sources(rng, &pool, g.inputs().len());
            let outs = g.outputs().len();
            let node = cb.gate(g, &args);
            (0..outs).map(|port| Source::Node { node, port }).collect()
        };
        pool.extend(out);
    }
    for &l in &loops {
        let driver = pick_sources(rng, &pool, 1)[0];
        let driver = if opts.contractive {
            if opts.delays == Delays::Mixed && rng.gen_bool(0.4) {
                let sel = *selectors.choose(rng).expect("non-empty");
                var_delay(&mut cb, rng, driver, sel, true, opts.total)
            } else {
                let d = cb.delay(DelayNode::unit(b(), init(rng, opts.total)), &[driver]);
                Source::Node { node: d, port: 0 }
            }
        } else {
            driver
        };
        cb.close_loop(l, driver);
    }
    let n_out = rng.gen_range(1..=opts.max_outputs.max(1));
    for (i, s) in pick_sources(rng, &pool, n_out).into_iter().enumerate() {
        cb.output(&format!("o{i}"), s);
    }
    cb.finish().expect("generated circuits are well formed")
}

/// A delay-free circuit `A × X -> B × X` together with `k = |X| >= 1`,
/// with at most four input wires so that its denotation can be tabulated.
pub fn random_feedback_body<R: Rng + ?Sized>(rng: &mut R) -> (Circuit, usize) {
    let k = rng.gen_range(1..=2);
    let a = rng.gen_range(0..=(4 - k).min(2));
    let opts = GenOptions {
        max_inputs: a + k,
        max_loops: 1,
        delays: Delays::None,
        ..GenOptions::default()
    };
    loop {
        let c = random_circuit(rng, &opts);
        if c.inputs.len() < k || c.outputs.len() < k {
            continue;
        }
        return (c, k);
    }
}

/// Replace every unit delay by a variable delay whose amount is pinned to 1.
pub fn unit_to_vardelay<R: Rng + ?Sized>(c: &Circuit, rng: &mut R) -> Circuit {
    let mut map = Vec::with_capacity(c.nodes.len());
    let mut nodes: Vec<NodeInst> = Vec::new();
    let remap = |s: Option<Source>, map: &[usize]| {
        s.map(|s| match s {
            Source::Node { node, port } => Source::Node { node: map[node], port },
            other => other,
        })
    };
    for inst in &c.nodes {
        let inputs: Vec<Option<Source>> = inst.inputs.iter().map(|s| remap(*s, &map)).collect();
        match &inst.kind {
            NodeKind::Delay(d) if d.kind == DelayKind::Unit => {
                let d_min = rng.gen_range(0..2);
                let d_max = rng.gen_range(1..4).max(d_min);
                let var = DelayNode::var(d.ty.clone(), d_min, d_max, d.init);
                let amount = var.amount_type().expect("variable delay");
                let pinned = const_gate(&amount, LValue::Val(1 - d_min)).expect("1 is in range");
                nodes.push(NodeInst {
                    kind: NodeKind::Gate(Arc::new(pinned)),
                    inputs: Vec::new(),
                });
                let k = nodes.len() - 1;
                nodes.push(NodeInst {
                    kind: NodeKind::Delay(var),
                    inputs: vec![inputs[0], Some(Source::Node { node: k, port: 0 })],
                });
            }
            kind => nodes.push(NodeInst {
                kind: kind.clone(),
                inputs,
            }),
        }
        map.push(nodes.len() - 1);
    }
    let mut out = c.clone();
    out.nodes = nodes;
    for l in &mut out.loops {
        l.source = remap(l.source, &map);
    }
    for o in &mut out.outputs {
        o.source = remap(o.source, &map);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn contractive_option_is_honoured() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let opts = GenOptions {
            contractive: true,
            total: true,
            ..GenOptions::default()
        };
        for _ in 0..200 {
            let c = random_circuit(&mut rng, &opts);
            assert!(c.is_contractive().holds());
        }
    }

    #[test]
    fn delay_free_option() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (c, k) = random_feedback_body(&mut rng);
            assert!(!c.has_delays());
            assert!(c.inputs.len() <= 4 && c.inputs.len() >= k);
        }
    }

    #[test]
    fn twins_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = GenOptions {
            delays: Delays::Unit,
            ..GenOptions::default()
        };
        for _ in 0..100 {
            let c = random_circuit(&mut rng, &opts);
            let twin = unit_to_vardelay(&c, &mut rng);
            twin.validate().unwrap();
            assert_eq!(twin.in_sig(), c.in_sig());
        }
    }
}
