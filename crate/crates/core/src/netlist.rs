//! Textual netlists: parser and canonical printer.
//!
//! ```text
//! type color = enum { red, green };
//! table pick(bool, color) -> (color) { 0 red -> red; ... }
//! input a: bool;
//! loop l: bool;
//! let x = por(a, l);
//! let y, z = dup(x);
//! let k = const(ty=bool, val=1);
//! let q = delay(init=0)(y);
//! l <- z;
//! output o = q;
//! ```
//!
//! Nodes may only read wires defined earlier; feedback goes through `loop`
//! declarations closed with `<-`. The full grammar is in the README.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, DelayKind, DelayNode, NodeKind, Source};
use crate::domain::{BaseKind, BaseType, LValue, Ty};
use crate::gates::{GateDef, GateLibrary, GateOp, table_gate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// One or more located errors; syntax errors stop parsing at the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetlistError(pub Vec<ParseError>);

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ParseError::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for NetlistError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Bot,
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Bot => f.write_str("`_`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: [&str; 6] = ["type", "table", "input", "loop", "let", "output"];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(1, &mut i);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            let word: String = chars[start..i].iter().collect();
            out.push((if word == "_" { Tok::Bot } else { Tok::Ident(word) }, pos));
        } else if c.is_ascii_digit() || (c == '-' && next.is_some_and(|n| n.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Number(chars[start..i].iter().collect()), pos));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let punct = ["->", "<-", ".."]
                .into_iter()
                .find(|p| *p == two)
                .or_else(|| ["(", ")", "{", "}", "[", "]", ",", ";", ":", "="].into_iter().find(|p| p.starts_with(c)));
            match punct {
                Some(p) => {
                    advance(p.len(), &mut i);
                    out.push((Tok::Punct(p), pos));
                }
                None => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

enum Param {
    Type(Ty),
    Atom(Tok, Pos),
}

struct Call {
    name: String,
    pos: Pos,
    params: Vec<(String, Param, Pos)>,
    args: Vec<(String, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    types: HashMap<String, Ty>,
    lib: GateLibrary,
    wires: HashMap<String, (Source, Ty)>,
    loops: Vec<(String, Pos, bool)>,
    node_pos: Vec<Pos>,
    cb: CircuitBuilder,
}

type PResult<T> = Result<T, ParseError>;

fn err<T>(pos: Pos, message: impl Into<String>) -> PResult<T> {
    Err(ParseError {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn expect(&mut self, p: &str) -> PResult<Pos> {
        if self.is(p) {
            Ok(self.bump().1)
        } else {
            err(self.pos(), format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => err(pos, format!("expected {what}, found {t}")),
        }
    }

    fn fresh_name(&mut self, what: &str) -> PResult<(String, Pos)> {
        let (name, pos) = self.ident(what)?;
        if KEYWORDS.contains(&name.as_str()) {
            return err(pos, format!("`{name}` is a keyword"));
        }
        if self.wires.contains_key(&name) {
            return err(pos, format!("wire `{name}` is already defined"));
        }
        Ok((name, pos))
    }

    fn number(&mut self) -> PResult<(i64, Pos)> {
        match self.bump() {
            (Tok::Number(s), pos) => s
                .parse()
                .map(|n| (n, pos))
                .or_else(|_| err(pos, format!("number `{s}` out of range"))),
            (t, pos) => err(pos, format!("expected a number, found {t}")),
        }
    }

    fn type_expr(&mut self) -> PResult<Ty> {
        let (name, pos) = self.ident("a type")?;
        match name.as_str() {
            "int" => {
                self.expect("[")?;
                let (lo, _) = self.number()?;
                self.expect("..")?;
                let (hi, _) = self.number()?;
                self.expect("]")?;
                BaseType::int_range(lo, hi).or_else(|e| err(pos, e.to_string()))
            }
            "enum" => err(pos, "enum types must be declared with `type`"),
            _ => match self.types.get(&name) {
                Some(t) => Ok(t.clone()),
                None => err(pos, format!("unknown type `{name}`")),
            },
        }
    }

    fn type_list(&mut self) -> PResult<Vec<Ty>> {
        self.expect("(")?;
        let mut tys = Vec::new();
        if !self.is(")") {
            tys.push(self.type_expr()?);
            while self.is(",") {
                self.bump();
                tys.push(self.type_expr()?);
            }
        }
        self.expect(")")?;
        Ok(tys)
    }

    fn atom(&mut self, ty: &Ty) -> PResult<LValue> {
        let (tok, pos) = self.bump();
        atom_value(ty, &tok, pos)
    }

    fn type_decl(&mut self) -> PResult<()> {
        let (name, pos) = self.ident("a type name")?;
        if self.types.contains_key(&name) || name == "int" || name == "enum" {
            return err(pos, format!("type `{name}` is already defined"));
        }
        self.expect("=")?;
        let ty = if matches!(self.peek(), Tok::Ident(s) if s == "enum") {
            self.bump();
            self.expect("{")?;
            let mut atoms = Vec::new();
            loop {
                match self.bump() {
                    (Tok::Ident(s) | Tok::Number(s), p) => {
                        if s == "bot" {
                            return err(p, "`bot` is reserved for the undefined value");
                        }
                        atoms.push(s);
                    }
                    (t, p) => return err(p, format!("expected an atom, found {t}")),
                }
                if self.is(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect("}")?;
            BaseType::new_enum(name.clone(), atoms).or_else(|e| err(pos, e.to_string()))?
        } else {
            self.type_expr()?
        };
        self.expect(";")?;
        self.types.insert(name, ty);
        Ok(())
    }

    fn table_decl(&mut self) -> PResult<()> {
        let (name, pos) = self.ident("a table name")?;
        let dom = self.type_list()?;
        self.expect("->")?;
        let cod = self.type_list()?;
        self.expect("{")?;
        let mut rows = Vec::new();
        while !self.is("}") {
            let input = dom.iter().map(|t| self.atom(t)).collect::<PResult<Vec<_>>>()?;
            self.expect("->")?;
            let output = cod.iter().map(|t| self.atom(t)).collect::<PResult<Vec<_>>>()?;
            self.expect(";")?;
            rows.push((input, output));
        }
        self.expect("}")?;
        let gate = table_gate(
            &name,
            crate::domain::Signature::new(dom),
            crate::domain::Signature::new(cod),
            rows,
        )
        .or_else(|e| err(pos, e.to_string()))?;
        self.lib.register_table(gate).or_else(|e| err(pos, e.to_string()))?;
        Ok(())
    }

    fn wire(&self, name: &str, pos: Pos) -> PResult<(Source, Ty)> {
        match self.wires.get(name) {
            Some(w) => Ok(w.clone()),
            None => err(
                pos,
                format!("unknown wire `{name}` (wires must be defined before use; use `loop` for feedback)"),
            ),
        }
    }

    fn call(&mut self) -> PResult<Call> {
        let (name, pos) = self.ident("a gate name")?;
        let mut params = Vec::new();
        let mut args = Vec::new();
        let has_params = self.is("(")
            && matches!(self.toks.get(self.at + 1), Some((Tok::Ident(_), _)))
            && matches!(self.toks.get(self.at + 2), Some((Tok::Punct("="), _)));
        if has_params {
            self.bump();
            loop {
                let (key, kpos) = self.ident("a parameter name")?;
                self.expect("=")?;
                let value = if key == "ty" {
                    Param::Type(self.type_expr()?)
                } else {
                    let (t, p) = self.bump();
                    Param::Atom(t, p)
                };
                params.push((key, value, kpos));
                if self.is(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(")")?;
        }
        if !has_params || self.is("(") {
            self.expect("(")?;
            if !self.is(")") {
                loop {
                    args.push(self.ident("a wire name")?);
                    if self.is(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(")")?;
        }
        Ok(Call {
            name,
            pos,
            params,
            args,
        })
    }

    /// Instantiate a call as a node; returns its output types.
    fn instantiate(&mut self, call: Call) -> PResult<(usize, Vec<Ty>)> {
        let args = call
            .args
            .iter()
            .map(|(n, p)| self.wire(n, *p))
            .collect::<PResult<Vec<_>>>()?;
        let (sources, tys): (Vec<Source>, Vec<Ty>) = args.into_iter().unzip();
        let mut params: HashMap<String, (Param, Pos)> = HashMap::new();
        for (k, v, p) in call.params {
            if params.insert(k.clone(), (v, p)).is_some() {
                return err(p, format!("parameter `{k}` given twice"));
            }
        }
        let allowed: &[&str] = match call.name.as_str() {
            "delay" => &["init"],
            "vardelay" => &["min", "max", "init"],
            "const" => &["ty", "val"],
            _ => &[],
        };
        if let Some((k, (_, p))) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return err(*p, format!("gate `{}` has no parameter `{k}`", call.name));
        }
        let atom_param = |params: &HashMap<String, (Param, Pos)>, key: &str, ty: &Ty| -> PResult<Option<LValue>> {
            match params.get(key) {
                None => Ok(None),
                Some((Param::Atom(t, p), _)) => atom_value(ty, t, *p).map(Some),
                Some((Param::Type(_), p)) => err(*p, format!("parameter `{key}` expects a value")),
            }
        };
        let int_param = |params: &HashMap<String, (Param, Pos)>, key: &str| -> PResult<u32> {
            match params.get(key) {
                Some((Param::Atom(Tok::Number(s), p), _)) => {
                    s.parse().or_else(|_| err(*p, format!("`{key}` must be a natural number")))
                }
                Some((_, p)) => err(*p, format!("`{key}` must be a natural number")),
                None => err(call.pos, format!("`{}` needs parameter `{key}`", call.name)),
            }
        };
        let arity = |n: usize| -> PResult<()> {
            if sources.len() != n {
                return err(
                    call.pos,
                    format!("gate `{}` expects {n} inputs, got {}", call.name, sources.len()),
                );
            }
            Ok(())
        };
        let (kind, outs) = match call.name.as_str() {
            "delay" => {
                arity(1)?;
                let init = atom_param(&params, "init", &tys[0])?.unwrap_or(LValue::Bot);
                let node = DelayNode::unit(tys[0].clone(), init);
                (NodeKind::Delay(node), vec![tys[0].clone()])
            }
            "vardelay" => {
                arity(2)?;
                let (d_min, d_max) = (int_param(&params, "min")?, int_param(&params, "max")?);
                if d_max < d_min {
                    return err(call.pos, "`max` must not be below `min`");
                }
                let init = atom_param(&params, "init", &tys[0])?.unwrap_or(LValue::Bot);
                let node = DelayNode::var(tys[0].clone(), d_min, d_max, init);
                let amount = node.amount_type().expect("variable delay");
                if tys[1] != amount {
                    return err(
                        call.args[1].1,
                        format!("delay amount must have type {}, found {}", amount, tys[1]),
                    );
                }
                (NodeKind::Delay(node), vec![tys[0].clone()])
            }
            name => {
                let constant = if name == "const" {
                    let ty = match params.get("ty") {
                        Some((Param::Type(t), _)) => t.clone(),
                        _ => return err(call.pos, "`const` needs parameter `ty`"),
                    };
                    let v = atom_param(&params, "val", &ty)?
                        .ok_or_else(|| ParseError {
                            line: call.pos.line,
                            col: call.pos.col,
                            message: "`const` needs parameter `val`".into(),
                        })?;
                    Some((ty, v))
                } else {
                    None
                };
                let gate = self
                    .lib
                    .instantiate(name, &tys, constant)
                    .or_else(|e| err(call.pos, e.to_string()))?;
                let outs = gate.outputs().wires().to_vec();
                (NodeKind::Gate(Arc::new(gate)), outs)
            }
        };
        let node = self.cb.node(kind, sources.into_iter().map(Some).collect());
        self.node_pos.push(call.pos);
        Ok((node, outs))
    }

    fn statement(&mut self) -> PResult<()> {
        let (tok, pos) = (self.peek().clone(), self.pos());
        let Tok::Ident(word) = tok else {
            return err(pos, format!("expected a statement, found {tok}"));
        };
        match word.as_str() {
            "type" => {
                self.bump();
                self.type_decl()
            }
            "table" => {
                self.bump();
                self.table_decl()
            }
            "input" => {
                self.bump();
                let (name, _) = self.fresh_name("an input name")?;
                self.expect(":")?;
                let ty = self.type_expr()?;
                self.expect(";")?;
                let s = self.cb.input(&name, ty.clone());
                self.wires.insert(name, (s, ty));
                Ok(())
            }
            "loop" => {
                self.bump();
                let (name, npos) = self.fresh_name("a loop name")?;
                self.expect(":")?;
                let ty = self.type_expr()?;
                self.expect(";")?;
                let s = self.cb.loop_wire(ty.clone());
                self.wires.insert(name.clone(), (s, ty));
                self.loops.push((name, npos, false));
                Ok(())
            }
            "let" => {
                self.bump();
                let mut names = vec![self.fresh_name("a wire name")?];
                while self.is(",") {
                    self.bump();
                    names.push(self.fresh_name("a wire name")?);
                }
                self.expect("=")?;
                let call = self.call()?;
                let cpos = call.pos;
                let (node, outs) = self.instantiate(call)?;
                if outs.len() != names.len() {
                    return err(
                        cpos,
                        format!("gate has {} outputs but {} names are bound", outs.len(), names.len()),
                    );
                }
                for (port, ((name, npos), ty)) in names.into_iter().zip(outs).enumerate() {
                    if self.wires.contains_key(&name) {
                        return err(npos, format!("wire `{name}` is already defined"));
                    }
                    self.wires.insert(name, (Source::Node { node, port }, ty));
                }
                self.expect(";")?;
                Ok(())
            }
            "output" => {
                self.bump();
                let (name, _) = self.ident("an output name")?;
                self.expect("=")?;
                let (w, wpos) = self.ident("a wire name")?;
                let (s, ty) = self.wire(&w, wpos)?;
                self.expect(";")?;
                self.cb.output_typed(&name, ty, Some(s));
                Ok(())
            }
            _ if matches!(self.toks.get(self.at + 1), Some((Tok::Punct("<-"), _))) => {
                let (name, npos) = self.ident("a loop name")?;
                self.bump();
                let (w, wpos) = self.ident("a wire name")?;
                let (driver, dty) = self.wire(&w, wpos)?;
                self.expect(";")?;
                let Some(idx) = self.loops.iter().position(|(n, _, _)| *n == name) else {
                    return err(npos, format!("`{name}` is not a loop"));
                };
                if self.loops[idx].2 {
                    return err(npos, format!("loop `{name}` is already closed"));
                }
                let (s, lty) = self.wire(&name, npos)?;
                if lty != dty {
                    return err(wpos, format!("loop `{name}` has type {lty} but `{w}` has type {dty}"));
                }
                self.loops[idx].2 = true;
                self.cb.close_loop(s, driver);
                Ok(())
            }
            _ => {
                let call = self.call()?;
                let cpos = call.pos;
                let (_, outs) = self.instantiate(call)?;
                if !outs.is_empty() {
                    return err(cpos, format!("gate has {} outputs; bind them with `let`", outs.len()));
                }
                self.expect(";")?;
                Ok(())
            }
        }
    }
}

fn atom_value(ty: &Ty, tok: &Tok, pos: Pos) -> PResult<LValue> {
    let text = match tok {
        Tok::Bot => return Ok(LValue::Bot),
        Tok::Ident(s) if s == "bot" => return Ok(LValue::Bot),
        Tok::Ident(s) | Tok::Number(s) => s,
        t => return err(pos, format!("expected a value of type {ty}, found {t}")),
    };
    ty.atom_index(text)
        .map(LValue::Val)
        .or_else(|_| err(pos, format!("`{text}` is not a value of type {ty}")))
}

/// Parse and validate a netlist.
pub fn parse_netlist(src: &str) -> Result<Circuit, NetlistError> {
    let one = |e: ParseError| NetlistError(vec![e]);
    let toks = lex(src).map_err(one)?;
    let mut types = HashMap::new();
    types.insert("bool".to_string(), BaseType::bool());
    types.insert("unit".to_string(), BaseType::unit());
    let mut p = Parser {
        toks,
        at: 0,
        types,
        lib: GateLibrary::new(),
        wires: HashMap::new(),
        loops: Vec::new(),
        node_pos: Vec::new(),
        cb: CircuitBuilder::new(),
    };
    while p.peek() != &Tok::Eof {
        p.statement().map_err(one)?;
    }
    let end = p.pos();
    let mut errors: Vec<ParseError> = p
        .loops
        .iter()
        .filter(|(_, _, closed)| !closed)
        .map(|(name, pos, _)| ParseError {
            line: pos.line,
            col: pos.col,
            message: format!("loop `{name}` is never closed with `<-`"),
        })
        .collect();
    if !errors.is_empty() {
        return Err(NetlistError(errors));
    }
    let node_pos = p.node_pos;
    match p.cb.finish() {
        Ok(c) => Ok(c),
        Err(CircuitError::Invalid(diags)) => {
            errors.extend(diags.into_iter().map(|d| {
                let pos = d.node.and_then(|n| node_pos.get(n).copied()).unwrap_or(end);
                ParseError {
                    line: pos.line,
                    col: pos.col,
                    message: d.to_string(),
                }
            }));
            Err(NetlistError(errors))
        }
        Err(e) => Err(NetlistError(vec![ParseError {
            line: end.line,
            col: end.col,
            message: e.to_string(),
        }])),
    }
}

fn type_ref(ty: &Ty) -> String {
    match ty.kind() {
        BaseKind::Enum => ty.name().to_string(),
        _ => ty.to_string(),
    }
}

fn atom_text(ty: &Ty, v: LValue) -> String {
    ty.show(v, "bot")
}

/// A prefix `p` such that no port name is `p` followed by a digit.
fn free_prefix(base: &str, taken: &[&str]) -> String {
    let mut p = base.to_string();
    while taken
        .iter()
        .any(|n| n.strip_prefix(p.as_str()).is_some_and(|rest| rest.starts_with(|c: char| c.is_ascii_digit())))
    {
        p.push('_');
    }
    p
}

/// Canonical text for a valid circuit. Internal wires are named after
/// their position (`n<node>_<port>`, `l<loop>`), so printing is
/// deterministic and `parse_netlist(&print_netlist(c)) == c`.
pub fn print_netlist(c: &Circuit) -> String {
    let ports: Vec<&str> = c.inputs.iter().map(|p| p.name.as_str()).collect();
    let np = free_prefix("n", &ports);
    let lp = free_prefix("l", &ports);
    let name = |s: Source| match s {
        Source::Input(i) => c.inputs[i].name.clone(),
        Source::Node { node, port } => format!("{np}{node}_{port}"),
        Source::Loop(j) => format!("{lp}{j}"),
    };
    let src = |s: &Option<Source>| name(s.expect("printing requires a valid circuit"));

    let mut enums: Vec<Ty> = Vec::new();
    let mut tables: Vec<&GateDef> = Vec::new();
    let note = |ty: &Ty, enums: &mut Vec<Ty>| {
        if *ty.kind() == BaseKind::Enum && !enums.contains(ty) {
            enums.push(ty.clone());
        }
    };
    for p in &c.inputs {
        note(&p.ty, &mut enums);
    }
    for l in &c.loops {
        note(&l.ty, &mut enums);
    }
    for n in &c.nodes {
        for ty in n.input_sig().wires().iter().chain(n.output_sig().wires()) {
            note(ty, &mut enums);
        }
        if let NodeKind::Gate(g) = &n.kind {
            if let GateOp::Builtin(crate::gates::Builtin::Const(_)) = g.op {
                note(&g.outputs().wires()[0], &mut enums);
            }
            if matches!(g.op, GateOp::Table(_)) && !tables.iter().any(|t| t.name() == g.name()) {
                tables.push(g);
            }
        }
    }
    for o in &c.outputs {
        note(&o.ty, &mut enums);
    }

    let mut out = String::new();
    for ty in &enums {
        out.push_str(&format!("type {} = enum {{ {} }};\n", ty.name(), ty.values().join(", ")));
    }
    if !enums.is_empty() {
        out.push('\n');
    }
    for g in &tables {
        let dom: Vec<String> = g.inputs().wires().iter().map(type_ref).collect();
        let cod: Vec<String> = g.outputs().wires().iter().map(type_ref).collect();
        out.push_str(&format!("table {}({}) -> ({}) {{\n", g.name(), dom.join(", "), cod.join(", ")));
        for t in g.inputs().tuples() {
            let image = g.apply(&t);
            let cells = |sig: &crate::domain::Signature, t: &[LValue]| -> Vec<String> {
                sig.wires().iter().zip(t).map(|(ty, v)| atom_text(ty, *v)).collect()
            };
            let mut parts = cells(g.inputs(), &t);
            parts.push("->".into());
            parts.extend(cells(g.outputs(), &image));
            out.push_str(&format!("  {};\n", parts.join(" ")));
        }
        out.push_str("}\n\n");
    }
    for p in &c.inputs {
        out.push_str(&format!("input {}: {};\n", p.name, type_ref(&p.ty)));
    }
    for (j, l) in c.loops.iter().enumerate() {
        out.push_str(&format!("loop {lp}{j}: {};\n", type_ref(&l.ty)));
    }
    for (i, n) in c.nodes.iter().enumerate() {
        let args: Vec<String> = n.inputs.iter().map(src).collect();
        let call = match &n.kind {
            NodeKind::Gate(g) => match &g.op {
                GateOp::Builtin(crate::gates::Builtin::Const(v)) => {
                    let ty = &g.outputs().wires()[0];
                    format!("const(ty={}, val={})", type_ref(ty), atom_text(ty, *v))
                }
                _ => format!("{}({})", g.name(), args.join(", ")),
            },
            NodeKind::Delay(d) => match d.kind {
                DelayKind::Unit => format!("delay(init={})({})", atom_text(&d.ty, d.init), args.join(", ")),
                DelayKind::Var { d_min, d_max } => format!(
                    "vardelay(min={d_min}, max={d_max}, init={})({})",
                    atom_text(&d.ty, d.init),
                    args.join(", ")
                ),
            },
        };
        let outs: Vec<String> = (0..n.output_count())
            .map(|port| name(Source::Node { node: i, port }))
            .collect();
        if outs.is_empty() {
            out.push_str(&format!("{call};\n"));
        } else {
            out.push_str(&format!("let {} = {call};\n", outs.join(", ")));
        }
    }
    for (j, l) in c.loops.iter().enumerate() {
        out.push_str(&format!("{lp}{j} <- {};\n", src(&l.source)));
    }
    for o in &c.outputs {
        out.push_str(&format!("output {} = {};\n", o.name, src(&o.source)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_comb;
    use crate::generate::{random_circuit, GenOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const POR_LOOP: &str = "\
# parallel-or with its output fed back
loop l: bool;
let one = const(ty=bool, val=1);
let x = por(one, l);
let out, back = dup(x);
l <- back;
output o = out;
";

    #[test]
    fn por_loop_parses_and_outputs_one() {
        let c = parse_netlist(POR_LOOP).unwrap();
        assert_eq!((c.inputs.len(), c.outputs.len()), (0, 1));
        assert_eq!(eval_comb(&c, &[]).unwrap(), vec![LValue::Val(1)]);
        let printed = print_netlist(&c);
        assert_eq!(parse_netlist(&printed).unwrap(), c);
        assert_eq!(print_netlist(&parse_netlist(&printed).unwrap()), printed);
    }

    #[test]
    fn vardelay_and_params() {
        let src = "input s: bool;\nlet d = const(ty=int[1..4], val=2);\nlet y = vardelay(min=1, max=4, init=0)(s, d);\noutput y = y;\n";
        let c = parse_netlist(src).unwrap();
        assert!(matches!(
            &c.nodes[1].kind,
            NodeKind::Delay(DelayNode { kind: DelayKind::Var { d_min: 1, d_max: 4 }, .. })
        ));
        assert_eq!(parse_netlist(&print_netlist(&c)).unwrap(), c);
    }

    #[test]
    fn tables_and_enums_round_trip() {
        let src = "\
type color = enum { red, green };
table pick(bool, color) -> (color) {
  bot bot -> bot; bot red -> bot; bot green -> bot;
  0 _ -> _; 0 red -> red; 0 green -> green;
  1 bot -> green; 1 red -> green; 1 green -> green;
}
input s: bool;
input c: color;
let o = pick(s, c);
drop(c);
output o = o;
";
        let c = parse_netlist(src).unwrap();
        let printed = print_netlist(&c);
        assert!(printed.contains("type color = enum { red, green };"), "{printed}");
        assert_eq!(parse_netlist(&printed).unwrap(), c);
    }

    fn error_at(src: &str) -> (usize, usize, String) {
        let e = parse_netlist(src).unwrap_err();
        (e.0[0].line, e.0[0].col, e.0[0].message.clone())
    }

    #[test]
    fn located_errors() {
        let (l, c, m) = error_at("input a: bool;\nlet x = not(a;\n");
        assert_eq!((l, c), (2, 14), "{m}");
        assert!(m.contains("expected `)`"));
        let (l, c, m) = error_at("input a: bool;\nlet x = frob(a);\n");
        assert_eq!((l, c), (2, 9));
        assert!(m.contains("unknown gate"));
        let (l, _, m) = error_at("input a: bool;\nlet x = and(a);\n");
        assert_eq!(l, 2);
        assert!(m.contains("expects 2 inputs"), "{m}");
        let (l, _, m) = error_at("input a: int[0..2];\nlet x = not(a);\n");
        assert_eq!(l, 2);
        assert!(m.contains("type"), "{m}");
        let (l, _, m) = error_at("let x = not(y);\n");
        assert_eq!(l, 1);
        assert!(m.contains("unknown wire"));
        let (l, _, m) = error_at("loop l: bool;\noutput o = l;\n");
        assert_eq!(l, 1);
        assert!(m.contains("never closed"));
        let (_, _, m) = error_at("input a: bool;\nlet x = delay(init=2)(a);\n");
        assert!(m.contains("not a value"), "{m}");
        let (l, c, _) = error_at("input a: bool;\n  $\n");
        assert_eq!((l, c), (2, 3));
    }

    #[test]
    fn printer_avoids_port_name_clashes() {
        let src = "input n0_0: bool;\ninput l0: bool;\nloop q: bool;\nlet x = and(n0_0, q);\nq <- x;\noutput o = l0;\n";
        let c = parse_netlist(src).unwrap();
        let printed = print_netlist(&c);
        assert_eq!(parse_netlist(&printed).unwrap(), c, "{printed}");
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let c = random_circuit(&mut rng, &GenOptions::default());
            let printed = print_netlist(&c);
            let back = parse_netlist(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
            assert_eq!(back, c, "{printed}");
            assert_eq!(print_netlist(&back), printed);
        }
    }
}
