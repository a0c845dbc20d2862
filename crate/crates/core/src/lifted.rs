//! The fixed-point laws restated for sequential circuits.
//!
//! Each function slot of a law is filled by a random monotone table gate
//! followed by optional unit delays on its outputs. Both sides of the law
//! are assembled from these boxes with `compose`, `tensor` and
//! `trace_loop`, and compared as stream functions with [`check_equiv`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{check_equiv, AnalysisError, AnalysisLimits, Equivalence, Strategy};
use crate::circuit::{Circuit, CircuitError, DelayNode, OutPort, Source};
use crate::domain::{LValue, Signature, Ty};
use crate::gates::{swap_gate, table_gate, GateError};
use crate::laws::{random_monotone, Law, LawConfig, LawError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftedError {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedResult {
    pub law: Law,
    pub instances: usize,
    /// Instances whose boxes contain at least one delay.
    pub with_delays: usize,
    /// Both sides of the first failing instance, with the verdict.
    pub failure: Option<(Circuit, Circuit, Equivalence)>,
}

impl LiftedResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Outputs pick inputs by index; indices may repeat or be dropped.
fn wiring(sig: &Signature, picks: &[usize]) -> Circuit {
    let mut c = Circuit::identity(sig);
    c.outputs = picks
        .iter()
        .enumerate()
        .map(|(j, &i)| OutPort {
            name: format!("o{j}"),
            ty: sig.wires()[i].clone(),
            source: Some(Source::Input(i)),
        })
        .collect();
    c
}

/// `Tr_k(c ; copy the last k outputs)`, the fixed point of the last `k`
/// outputs of `c : A × X -> X`.
fn mu(c: &Circuit, k: usize) -> Result<Circuit, CircuitError> {
    let out = c.out_sig();
    let picks: Vec<usize> = (0..out.len()).chain(out.len() - k..out.len()).collect();
    c.compose(&wiring(&out, &picks))?.trace_loop(k)
}

struct Boxes<'a> {
    rng: ChaCha8Rng,
    universe: &'a [Ty],
    delays: usize,
}

impl Boxes<'_> {
    fn ty(&mut self) -> Ty {
        self.universe.choose(&mut self.rng).expect("non-empty universe").clone()
    }

    /// A random monotone table `dom -> cod`, each output possibly delayed.
    fn make(&mut self, name: &str, dom: &[&Ty], cod: &[&Ty]) -> Result<Circuit, LiftedError> {
        let dom = Signature::new(dom.iter().map(|t| (*t).clone()).collect());
        let cod = Signature::new(cod.iter().map(|t| (*t).clone()).collect());
        let f = random_monotone(&dom, &cod, &mut self.rng)?;
        let rows = dom.tuples().map(|t| (t.clone(), f.apply(&t))).collect();
        let mut c = Circuit::gate(table_gate(name, dom, cod.clone(), rows)?);
        let mut stage = Circuit::empty();
        for ty in cod.wires() {
            let wire = if self.rng.gen_bool(0.5) {
                self.delays += 1;
                let init = match self.rng.gen_range(0..=ty.size()) {
                    0 => LValue::Bot,
                    k => LValue::Val(k as u32 - 1),
                };
                Circuit::delay(DelayNode::unit(ty.clone(), init))
            } else {
                Circuit::identity(&Signature::new(vec![ty.clone()]))
            };
            stage = stage.tensor(&wire);
        }
        c = c.compose(&stage)?;
        Ok(c)
    }
}

fn one(t: &Ty) -> Signature {
    Signature::new(vec![t.clone()])
}

/// Left and right sides of one random instance of `law`.
fn instance(law: Law, bx: &mut Boxes<'_>) -> Result<(Circuit, Circuit), LiftedError> {
    Ok(match law {
        Law::NaturalityA => {
            let (a, x, b) = (bx.ty(), bx.ty(), bx.ty());
            let f = bx.make("f", &[&a, &x], &[&x])?;
            let g = bx.make("g", &[&b], &[&a])?;
            let left = mu(&g.tensor(&Circuit::identity(&one(&x))).compose(&f)?, 1)?;
            let right = g.compose(&mu(&f, 1)?)?;
            (left, right)
        }
        Law::NaturalityX => {
            let (a, x, y) = (bx.ty(), bx.ty(), bx.ty());
            let f = bx.make("f", &[&a, &x], &[&y])?;
            let g = bx.make("g", &[&y], &[&x])?;
            let left = mu(&f.compose(&g)?, 1)?;
            let inner = Circuit::identity(&one(&a)).tensor(&g).compose(&f)?;
            let right = mu(&inner, 1)?.compose(&g)?;
            (left, right)
        }
        Law::Bekic => {
            let (a, x, y) = (bx.ty(), bx.ty(), bx.ty());
            let f = bx.make("f", &[&a, &x, &y], &[&x])?;
            let g = bx.make("g", &[&a, &x, &y], &[&y])?;
            let axy = Signature::new(vec![a.clone(), x.clone(), y.clone()]);
            let both = wiring(&axy, &[0, 1, 2, 0, 1, 2]).compose(&f.tensor(&g))?;
            let left = mu(&both, 2)?;
            let ax = Signature::new(vec![a.clone(), x.clone()]);
            let mu_g = mu(&g, 1)?;
            let k = wiring(&ax, &[0, 1, 0, 1])
                .compose(&Circuit::identity(&ax).tensor(&mu_g))?
                .compose(&f)?;
            let h = mu(&k, 1)?;
            let xa = Signature::new(vec![x.clone(), a.clone()]);
            let right = wiring(&one(&a), &[0, 0])
                .compose(&h.tensor(&Circuit::identity(&one(&a))))?
                .compose(&wiring(&xa, &[0, 1, 0]))?
                .compose(&Circuit::identity(&one(&x)).tensor(&mu_g))?;
            (left, right)
        }
        _ => {
            let (a, x) = (bx.ty(), bx.ty());
            let f = bx.make("f", &[&a], &[&x])?;
            let yank = Circuit::gate(swap_gate(&x, &x)).trace_loop(1)?;
            (f.compose(&yank)?, f)
        }
    })
}

/// Check naturality in both arguments, Bekič and yanking on `instances`
/// random circuit instances each, exhaustively up to `horizon`.
pub fn check_lifted_laws(cfg: &LawConfig, instances: usize, horizon: usize) -> Result<Vec<LiftedResult>, LiftedError> {
    let limits = AnalysisLimits::default();
    let mut results = Vec::new();
    for (i, law) in [Law::NaturalityA, Law::NaturalityX, Law::Bekic, Law::Yanking].into_iter().enumerate() {
        let mut bx = Boxes {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64)),
            universe: &cfg.universe,
            delays: 0,
        };
        let mut result = LiftedResult {
            law,
            instances: 0,
            with_delays: 0,
            failure: None,
        };
        for _ in 0..instances {
            let before = bx.delays;
            let (left, right) = instance(law, &mut bx)?;
            result.instances += 1;
            result.with_delays += usize::from(bx.delays > before);
            let report = check_equiv(&left, &right, horizon, Strategy::Exhaustive, &limits)?;
            if !report.is_equivalent() {
                result.failure = Some((left, right, report.verdict));
                break;
            }
        }
        results.push(result);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BaseType;

    #[test]
    fn lifted_laws_hold_on_short_horizons() {
        let cfg = LawConfig::default();
        for r in check_lifted_laws(&cfg, 6, 3).unwrap() {
            assert!(r.passed(), "{}: {:?}", r.law, r.failure);
            assert_eq!(r.instances, 6);
        }
    }

    #[test]
    fn mu_of_a_delayed_not_toggles() {
        let b = BaseType::bool();
        let sb = Signature::new(vec![b.clone()]);
        let rows = sb.tuples().map(|t| (t.clone(), vec![match t[0] {
            LValue::Val(v) => LValue::Val(1 - v),
            LValue::Bot => LValue::Bot,
        }])).collect();
        let not = Circuit::gate(table_gate("n", sb.clone(), sb.clone(), rows).unwrap())
            .compose(&Circuit::delay(DelayNode::unit(b, LValue::Val(0))))
            .unwrap();
        let toggle = mu(&not, 1).unwrap();
        assert!(toggle.in_sig().is_empty());
        let out = crate::sim::simulate(&toggle, &crate::sim::PrefixTrace::new(Signature::empty()).padded(4), 4).unwrap();
        let vals: Vec<LValue> = out.ticks().iter().map(|r| r[0]).collect();
        assert_eq!(vals, [0, 1, 0, 1].map(LValue::Val));
    }
}
