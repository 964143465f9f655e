use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{LookaroundSst, Matrix, Sst};
use crate::error::{Error, Result};
use crate::machines::{triples, Kind, Lambda, NestedBimachine};

/// A level-0 bimachine as a lookaround SST with an accumulator and a
/// register pinned to 1.
pub fn bimachine_to_lookaround(b: &NestedBimachine) -> Result<LookaroundSst> {
    let Lambda::Values(values) = b.lambda() else {
        return Err(Error::Unsupported("bimachine_to_lookaround needs a level-0 machine".into()));
    };
    let one = BigUint::one();
    let updates = values
        .iter()
        .map(|v| {
            let mut t = Matrix::zero(2);
            t.add(0, 0, &one);
            t.add(1, 0, v);
            t.add(1, 1, &one);
            t
        })
        .collect();
    LookaroundSst::new(
        b.morphism().clone(),
        vec!["acc".into(), "one".into()],
        vec![BigUint::zero(), one.clone()],
        updates,
        vec![one, BigUint::zero()],
    )
}

/// One compilation step: a bimachine with external pebble functions, each
/// already given as an SST over the marked alphabet, becomes a lookaround
/// SST over the unmarked alphabet.
///
/// For each external `f` there are registers `Sum{f}_x` and `Old{f}_x`:
/// `Old` runs `f` on the unmarked prefix, `Sum` accumulates the runs of `f`
/// on the marked words of the positions already seen that called `f`.
pub fn compile_step(b: &NestedBimachine, externals: &[Sst]) -> Result<LookaroundSst> {
    let Lambda::Calls(calls) = b.lambda() else {
        return Err(Error::Unsupported("compile_step needs a machine with externals".into()));
    };
    if externals.len() != b.externals().len() {
        return Err(Error::MalformedMachine(format!(
            "{} external SSTs for {} externals",
            externals.len(),
            b.externals().len()
        )));
    }
    let alphabet = b.alphabet();
    let marked = alphabet.marked()?;
    for (j, s) in externals.iter().enumerate() {
        if *s.alphabet() != marked {
            return Err(Error::AlphabetMismatch(format!("external SST {j} reads {}, expected {marked}", s.alphabet())));
        }
    }
    // block offsets: Sum block of f at offset[f], Old block right after
    let mut offset = Vec::with_capacity(externals.len());
    let mut registers = Vec::new();
    for (j, s) in externals.iter().enumerate() {
        offset.push(registers.len());
        registers.extend(s.registers().iter().map(|x| format!("Sum{j}_{x}")));
        registers.extend(s.registers().iter().map(|x| format!("Old{j}_{x}")));
    }
    let dim = registers.len();
    let mut initial = vec![BigUint::zero(); dim];
    let mut output = vec![BigUint::zero(); dim];
    for (j, s) in externals.iter().enumerate() {
        let d = s.dim();
        for x in 0..d {
            initial[offset[j] + d + x] = s.initial()[x].clone();
            output[offset[j] + x] = s.output()[x].clone();
        }
    }
    let updates = triples(b.morphism())
        .zip(calls)
        .map(|((_, a, _), &called)| {
            let mut t = Matrix::zero(dim);
            for (j, s) in externals.iter().enumerate() {
                let (o, d) = (offset[j], s.dim());
                let alpha = s.update(a);
                for y in 0..d {
                    for (x, v) in alpha.row(y) {
                        t.add(o + y, o + x, v);
                        t.add(o + d + y, o + d + x, v);
                    }
                }
                if j == called {
                    let beta = s.update(alphabet.mark(a));
                    for y in 0..d {
                        for (x, v) in beta.row(y) {
                            t.add(o + d + y, o + x, v);
                        }
                    }
                }
            }
            t
        })
        .collect();
    LookaroundSst::new(b.morphism().clone(), registers, initial, updates, output)
}

/// Removes lookaround. Register `(x, p, s)` holds the value of `x` assuming
/// the prefix read so far has image `p` and the rest of the input has image
/// `s`; only `p` = the true prefix image is ever nonzero, and the output
/// keeps the `s = 1` copies.
pub fn eliminate_lookaround(la: &LookaroundSst) -> Sst {
    let mu = la.morphism();
    let mon = mu.monoid();
    let size = mon.size();
    let one = mon.identity();
    let d = la.dim();
    let reg = |x: usize, p: usize, s: usize| (x * size + p) * size + s;
    let mut registers = Vec::with_capacity(d * size * size);
    for x in &la.registers {
        for p in 0..size {
            for s in 0..size {
                registers.push(format!("{x}[{p},{s}]"));
            }
        }
    }
    let dim = registers.len();
    let mut initial = vec![BigUint::zero(); dim];
    let mut output = vec![BigUint::zero(); dim];
    for x in 0..d {
        for s in 0..size {
            initial[reg(x, one, s)] = la.initial[x].clone();
        }
        for p in 0..size {
            output[reg(x, p, one)] = la.output[x].clone();
        }
    }
    let updates = mu
        .alphabet()
        .symbols()
        .map(|a| {
            let ma = mu.letter(a);
            let mut t = Matrix::zero(dim);
            for p in 0..size {
                let pa = mon.mul(p, ma);
                for s in 0..size {
                    let src_s = mon.mul(ma, s);
                    let lam = la.update(p, a, s);
                    for y in 0..d {
                        for (x, v) in lam.row(y) {
                            t.add(reg(y, p, src_s), reg(*x, pa, s), v);
                        }
                    }
                }
            }
            t
        })
        .collect();
    Sst::new(mu.alphabet().clone(), registers, initial, updates, output)
        .expect("dimensions are consistent by construction")
}

/// Compiles a nested bimachine of any kind and level into an SST computing
/// the same function. Externals are compiled first and trimmed; marble and
/// blind externals are read as pebble externals that ignore, respectively,
/// everything after the mark or the mark itself.
pub fn compile_pebble(b: &NestedBimachine) -> Result<Sst> {
    if b.level() == 0 {
        return Ok(eliminate_lookaround(&bimachine_to_lookaround(b)?));
    }
    let externals = b
        .externals()
        .iter()
        .map(|e| {
            let s = compile_pebble(e)?.trim();
            match b.kind() {
                Kind::Pebble => Ok(s),
                Kind::Blind => s.lift_ignoring_mark(),
                Kind::Marble => s.lift_prefix_until_mark(),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eliminate_lookaround(&compile_step(b, &externals)?))
}
