//! JSON encodings of morphisms, machines and SSTs.
//!
//! Objects are built on `serde_json::Map`, which keeps keys sorted, so the
//! output is canonical. Naturals are written as JSON numbers when they fit in
//! a `u64` and as decimal strings otherwise; both forms are accepted on input.
//! Symbols are written in rendered form, so a marked `a` is `"a\u{304}"`.

use std::sync::Arc;

use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::machines::{triples, Kind, Lambda, Move, NestedBimachine, TapeSymbol, TwoWayTransducer};
use crate::monoid::{Alphabet, FiniteMonoid, Morphism, Symbol};
use crate::sst::{Matrix, Sst};

const LEFT_END: &str = "⊢";
const RIGHT_END: &str = "⊣";

/// Any machine a file may hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Machine {
    Bimachine(NestedBimachine),
    TwoWay(TwoWayTransducer),
    Sst(Sst),
}

impl Machine {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Machine::Bimachine(b) => b.alphabet(),
            Machine::TwoWay(t) => t.alphabet(),
            Machine::Sst(s) => s.alphabet(),
        }
    }

    pub fn eval(&self, w: &[Symbol]) -> BigUint {
        match self {
            Machine::Bimachine(b) => b.eval(w),
            Machine::TwoWay(t) => t.eval(w),
            Machine::Sst(s) => s.eval(w),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Machine::Bimachine(b) => bimachine_to_json(b),
            Machine::TwoWay(t) => twoway_to_json(t),
            Machine::Sst(s) => sst_to_json(s),
        }
    }

    /// Dispatches on `"model"`; an object without it is read as an SST.
    pub fn from_json(v: &Value) -> Result<Machine> {
        let o = object(v, "machine")?;
        match o.get("model").map(|m| m.as_str()) {
            Some(Some("bimachine")) => Ok(Machine::Bimachine(bimachine_from_json(v)?)),
            Some(Some("twoway")) => Ok(Machine::TwoWay(twoway_from_json(v)?)),
            Some(Some("sst")) | None => Ok(Machine::Sst(sst_from_json(v)?)),
            Some(other) => Err(Error::Json(format!("model: unknown model {other:?}"))),
        }
    }

    pub fn parse(text: &str) -> Result<Machine> {
        Machine::from_json(&serde_json::from_str(text)?)
    }
}

pub fn natural_to_json(n: &BigUint) -> Value {
    match u64::try_from(n) {
        Ok(x) => json!(x),
        Err(_) => json!(n.to_string()),
    }
}

pub fn natural_from_json(v: &Value, field: &str) -> Result<BigUint> {
    match v {
        Value::Number(x) => x.as_u64().map(BigUint::from).ok_or_else(|| bad(field, "not a natural number")),
        Value::String(s) => s.parse().map_err(|_| bad(field, "not a decimal natural")),
        _ => Err(bad(field, "expected a natural number")),
    }
}

fn bad(field: &str, reason: &str) -> Error {
    Error::Json(format!("{field}: {reason}"))
}

fn object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(field, "expected an object"))
}

fn get<'a>(o: &'a Map<String, Value>, key: &str, field: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| bad(&format!("{field}.{key}"), "missing"))
}

fn index(v: &Value, field: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(field, "expected an index"))
}

fn array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(field, "expected an array"))
}

fn string<'a>(v: &'a Value, field: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(field, "expected a string"))
}

fn naturals(v: &Value, field: &str) -> Result<Vec<BigUint>> {
    array(v, field)?.iter().enumerate().map(|(i, x)| natural_from_json(x, &format!("{field}[{i}]"))).collect()
}

pub fn alphabet_to_json(a: &Alphabet) -> Value {
    Value::Array(a.symbols().map(|s| json!(a.render(s))).collect())
}

/// Reads the rendered symbols of an alphabet: the base letters first, then
/// each marked copy in symbol order.
pub fn alphabet_from_json(v: &Value, field: &str) -> Result<Alphabet> {
    let names = array(v, field)?
        .iter()
        .enumerate()
        .map(|(i, x)| string(x, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let base: Vec<char> =
        names.iter().take_while(|s| s.chars().count() == 1).map(|s| s.chars().next().unwrap()).collect();
    let mut alphabet = Alphabet::new(base).map_err(|e| bad(field, &e.to_string()))?;
    while alphabet.len() < names.len() {
        alphabet = alphabet.marked().map_err(|e| bad(field, &e.to_string()))?;
    }
    if alphabet.len() != names.len() {
        return Err(bad(field, "symbols are not a base alphabet followed by its marked copies"));
    }
    for (s, name) in names.iter().enumerate() {
        if alphabet.render(s) != *name {
            return Err(bad(&format!("{field}[{s}]"), &format!("expected {:?}, found {name:?}", alphabet.render(s))));
        }
    }
    Ok(alphabet)
}

fn symbol(a: &Alphabet, v: &Value, field: &str) -> Result<Symbol> {
    let s = string(v, field)?;
    a.parse_symbol(s).map_err(|_| bad(field, &format!("unknown letter {s:?}")))
}

pub fn morphism_to_json(mu: &Morphism) -> Value {
    let a = mu.alphabet();
    let image: Map<String, Value> = a.symbols().map(|s| (a.render(s), json!(mu.letter(s)))).collect();
    json!({
        "size": mu.monoid().size(),
        "identity": mu.monoid().identity(),
        "table": mu.monoid().rows(),
        "alphabet": alphabet_to_json(a),
        "image": image,
    })
}

pub fn morphism_from_json(v: &Value, field: &str) -> Result<Morphism> {
    let o = object(v, field)?;
    let size = index(get(o, "size", field)?, &format!("{field}.size"))?;
    let identity = index(get(o, "identity", field)?, &format!("{field}.identity"))?;
    let rows = array(get(o, "table", field)?, &format!("{field}.table"))?;
    if rows.len() != size {
        return Err(bad(&format!("{field}.table"), &format!("{} rows for size {size}", rows.len())));
    }
    let mut table = Vec::with_capacity(size);
    for (i, r) in rows.iter().enumerate() {
        let f = format!("{field}.table[{i}]");
        let row = array(r, &f)?.iter().map(|x| index(x, &f)).collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    let monoid = FiniteMonoid::new(table, identity).map_err(|e| bad(&format!("{field}.table"), &e.to_string()))?;
    let alphabet = alphabet_from_json(get(o, "alphabet", field)?, &format!("{field}.alphabet"))?;
    let image_field = format!("{field}.image");
    let image = object(get(o, "image", field)?, &image_field)?;
    let mut images = vec![None; alphabet.len()];
    for (k, x) in image {
        let f = format!("{image_field}.{k}");
        let s = alphabet.parse_symbol(k).map_err(|_| bad(&f, "letter not in the alphabet"))?;
        images[s] = Some(index(x, &f)?);
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(s, m)| m.ok_or_else(|| bad(&format!("{image_field}.{}", alphabet.render(s)), "missing")))
        .collect::<Result<Vec<_>>>()?;
    Morphism::new(alphabet, Arc::new(monoid), images).map_err(|e| bad(&image_field, &e.to_string()))
}

/// λ lists every triple at level ≥ 1 and only the nonzero outputs at level 0.
pub fn bimachine_to_json(b: &NestedBimachine) -> Value {
    let a = b.alphabet();
    let mut lambda = Vec::new();
    for (m, s, n) in triples(b.morphism()) {
        let out = match b.lambda() {
            Lambda::Values(v) => {
                let x = &v[b.index(m, s, n)];
                if *x == BigUint::default() {
                    continue;
                }
                natural_to_json(x)
            }
            Lambda::Calls(c) => json!(c[b.index(m, s, n)]),
        };
        lambda.push(json!({"left": m, "letter": a.render(s), "right": n, "out": out}));
    }
    json!({
        "model": "bimachine",
        "kind": b.kind().name(),
        "level": b.level(),
        "morphism": morphism_to_json(b.morphism()),
        "lambda": lambda,
        "externals": b.externals().iter().map(bimachine_to_json).collect::<Vec<_>>(),
    })
}

pub fn bimachine_from_json(v: &Value) -> Result<NestedBimachine> {
    read_bimachine(v, "machine")
}

fn read_bimachine(v: &Value, field: &str) -> Result<NestedBimachine> {
    let o = object(v, field)?;
    if let Some(m) = o.get("model") {
        if m.as_str() != Some("bimachine") {
            return Err(bad(&format!("{field}.model"), "expected \"bimachine\""));
        }
    }
    let kind = Kind::from_name(string(get(o, "kind", field)?, &format!("{field}.kind"))?)
        .map_err(|e| bad(&format!("{field}.kind"), &e.to_string()))?;
    let level = index(get(o, "level", field)?, &format!("{field}.level"))?;
    let morphism = morphism_from_json(get(o, "morphism", field)?, &format!("{field}.morphism"))?;
    let externals = match o.get("externals") {
        None => Vec::new(),
        Some(e) => array(e, &format!("{field}.externals"))?
            .iter()
            .enumerate()
            .map(|(i, x)| read_bimachine(x, &format!("{field}.externals[{i}]")))
            .collect::<Result<Vec<_>>>()?,
    };
    if (level == 0) != externals.is_empty() {
        return Err(bad(&format!("{field}.level"), &format!("level {level} with {} externals", externals.len())));
    }
    let size = morphism.monoid().size();
    let width = morphism.alphabet().len();
    let mut outs: Vec<Option<&Value>> = vec![None; size * width * size];
    let lambda_field = format!("{field}.lambda");
    for (i, entry) in array(get(o, "lambda", field)?, &lambda_field)?.iter().enumerate() {
        let f = format!("{lambda_field}[{i}]");
        let e = object(entry, &f)?;
        let m = index(get(e, "left", &f)?, &format!("{f}.left"))?;
        let n = index(get(e, "right", &f)?, &format!("{f}.right"))?;
        let s = symbol(morphism.alphabet(), get(e, "letter", &f)?, &format!("{f}.letter"))?;
        if m >= size || n >= size {
            return Err(bad(&f, "monoid element out of range"));
        }
        let slot = &mut outs[(m * width + s) * size + n];
        if slot.is_some() {
            return Err(bad(&f, "triple listed twice"));
        }
        *slot = Some(get(e, "out", &f)?);
    }
    let lambda = if level == 0 {
        let values = outs
            .iter()
            .enumerate()
            .map(|(i, x)| x.map_or(Ok(BigUint::default()), |x| natural_from_json(x, &format!("{lambda_field}#{i}"))))
            .collect::<Result<Vec<_>>>()?;
        Lambda::Values(values)
    } else {
        let mut calls = Vec::with_capacity(outs.len());
        for (m, s, n) in triples(&morphism) {
            let at = || format!("{lambda_field}({m},{},{n})", morphism.alphabet().render(s));
            let x = outs[(m * width + s) * size + n].ok_or_else(|| bad(&at(), "missing at level ≥ 1"))?;
            calls.push(index(x, &at())?);
        }
        Lambda::Calls(calls)
    };
    let b = NestedBimachine::new(kind, morphism, lambda, externals).map_err(|e| bad(field, &e.to_string()))?;
    if b.level() != level {
        return Err(bad(&format!("{field}.level"), &format!("says {level}, externals give {}", b.level())));
    }
    Ok(b)
}

fn tape_name(a: &Alphabet, s: TapeSymbol) -> String {
    match s {
        TapeSymbol::LeftEnd => LEFT_END.into(),
        TapeSymbol::RightEnd => RIGHT_END.into(),
        TapeSymbol::Letter(x) => a.render(x),
    }
}

pub fn twoway_to_json(t: &TwoWayTransducer) -> Value {
    let a = t.alphabet();
    let transitions: Vec<Value> = t
        .transitions()
        .into_iter()
        .map(|(q, s, tr)| {
            json!({
                "state": q,
                "symbol": tape_name(a, s),
                "target": tr.target,
                "move": match tr.direction { Move::Left => "left", Move::Right => "right" },
                "out": natural_to_json(&tr.output),
            })
        })
        .collect();
    json!({
        "model": "twoway",
        "alphabet": alphabet_to_json(a),
        "states": t.states(),
        "initial": t.initial(),
        "final": (0..t.states()).filter(|&q| t.is_final(q)).collect::<Vec<_>>(),
        "transitions": transitions,
    })
}

pub fn twoway_from_json(v: &Value) -> Result<TwoWayTransducer> {
    let field = "machine";
    let o = object(v, field)?;
    let alphabet = alphabet_from_json(get(o, "alphabet", field)?, "machine.alphabet")?;
    if alphabet.letters().iter().any(|c| [LEFT_END, RIGHT_END].contains(&c.to_string().as_str())) {
        return Err(bad("machine.alphabet", "endmarkers are reserved"));
    }
    let states = index(get(o, "states", field)?, "machine.states")?;
    let initial = index(get(o, "initial", field)?, "machine.initial")?;
    let finals = array(get(o, "final", field)?, "machine.final")?
        .iter()
        .map(|x| index(x, "machine.final"))
        .collect::<Result<Vec<_>>>()?;
    let mut t =
        TwoWayTransducer::new(alphabet.clone(), states, initial, &finals).map_err(|e| bad(field, &e.to_string()))?;
    let mut seen = std::collections::HashSet::new();
    for (i, entry) in array(get(o, "transitions", field)?, "machine.transitions")?.iter().enumerate() {
        let f = format!("machine.transitions[{i}]");
        let e = object(entry, &f)?;
        let q = index(get(e, "state", &f)?, &format!("{f}.state"))?;
        let sym = match string(get(e, "symbol", &f)?, &format!("{f}.symbol"))? {
            LEFT_END => TapeSymbol::LeftEnd,
            RIGHT_END => TapeSymbol::RightEnd,
            _ => TapeSymbol::Letter(symbol(&alphabet, get(e, "symbol", &f)?, &format!("{f}.symbol"))?),
        };
        if !seen.insert((q, sym)) {
            return Err(bad(&f, "transition listed twice"));
        }
        let target = index(get(e, "target", &f)?, &format!("{f}.target"))?;
        let direction = match string(get(e, "move", &f)?, &format!("{f}.move"))? {
            "left" => Move::Left,
            "right" => Move::Right,
            other => {
                return Err(bad(&format!("{f}.move"), &format!("expected \"left\" or \"right\", found {other:?}")))
            }
        };
        let out = natural_from_json(get(e, "out", &f)?, &format!("{f}.out"))?;
        t.set_transition(q, sym, target, direction, out).map_err(|e| bad(&f, &e.to_string()))?;
    }
    Ok(t)
}

/// Matrices are dense, rows indexed by the source register.
pub fn sst_to_json(s: &Sst) -> Value {
    let a = s.alphabet();
    let updates: Map<String, Value> = a
        .symbols()
        .map(|x| {
            let rows: Vec<Value> =
                s.update(x).to_dense().iter().map(|r| Value::Array(r.iter().map(natural_to_json).collect())).collect();
            (a.render(x), Value::Array(rows))
        })
        .collect();
    json!({
        "alphabet": alphabet_to_json(a),
        "registers": s.registers(),
        "initial": s.initial().iter().map(natural_to_json).collect::<Vec<_>>(),
        "updates": updates,
        "final": s.output().iter().map(natural_to_json).collect::<Vec<_>>(),
    })
}

pub fn sst_from_json(v: &Value) -> Result<Sst> {
    let field = "sst";
    let o = object(v, field)?;
    let alphabet = alphabet_from_json(get(o, "alphabet", field)?, "sst.alphabet")?;
    let registers = array(get(o, "registers", field)?, "sst.registers")?
        .iter()
        .map(|x| string(x, "sst.registers").map(String::from))
        .collect::<Result<Vec<_>>>()?;
    let initial = naturals(get(o, "initial", field)?, "sst.initial")?;
    let output = naturals(get(o, "final", field)?, "sst.final")?;
    let updates_obj = object(get(o, "updates", field)?, "sst.updates")?;
    if let Some(k) = updates_obj.keys().find(|k| alphabet.parse_symbol(k).is_err()) {
        return Err(bad(&format!("sst.updates.{k}"), "letter not in the alphabet"));
    }
    let mut updates = Vec::with_capacity(alphabet.len());
    for s in alphabet.symbols() {
        let f = format!("sst.updates.{}", alphabet.render(s));
        let rows = array(updates_obj.get(&alphabet.render(s)).ok_or_else(|| bad(&f, "missing"))?, &f)?
            .iter()
            .enumerate()
            .map(|(i, r)| naturals(r, &format!("{f}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        updates.push(Matrix::from_dense(rows).map_err(|e| bad(&f, &e.to_string()))?);
    }
    Sst::new(alphabet, registers, initial, updates, output).map_err(|e| bad(field, &e.to_string()))
}
