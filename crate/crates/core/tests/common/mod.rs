#![allow(dead_code)]

use pebblekit::monoid::Symbol;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every word of length at most `max` over `0..letters`, shortest first.
pub fn all_words(letters: usize, max: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<Symbol>> = vec![vec![]];
    for _ in 0..max {
        layer = layer.iter().flat_map(|w| (0..letters).map(move |a| [w.as_slice(), &[a]].concat())).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub fn random_word(rng: &mut ChaCha8Rng, letters: usize, max: usize) -> Vec<Symbol> {
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| rng.gen_range(0..letters)).collect()
}

/// The forest laws checked on every forest under test: validity, the
/// partition of nodes and positions, span/frontier agreement of values and
/// endpoints, uniqueness of bases, and the frontier-size bound.
pub fn forest_laws(f: &pebblekit::forest::Forest) -> Result<(), String> {
    use pebblekit::forest::NodeKind;
    let mu = f.morphism();
    let monoid = mu.monoid();
    if !f.validate() {
        return Err(format!("{f} does not validate"));
    }
    if !f.partition_check() {
        return Err(format!("{f}: parti does not partition"));
    }
    let w = f.word();
    for id in f.nodes() {
        let span = mu.eval(&w[f.min(id) - 1..f.max(id)]);
        let fr = f.frontier(id);
        if span != f.value(id) || mu.eval(&f.frontier_word(id)) != span {
            return Err(format!("{f}: value mismatch at {}", f.path(id)));
        }
        if fr.first() != Some(&f.min(id)) || fr.last() != Some(&f.max(id)) {
            return Err(format!("{f}: frontier endpoints at {}", f.path(id)));
        }
        if fr.len() > 1 << f.node_height(id) {
            return Err(format!("{f}: frontier too large at {}", f.path(id)));
        }
    }
    let root_dep = f.dependency(f.root());
    for i in f.iterable_nodes() {
        // bases by exhaustive scan
        let candidates: Vec<_> = root_dep
            .iter()
            .copied()
            .filter(|&b| f.kind(b) == NodeKind::Idempotent)
            .filter(|&b| {
                let kids = f.children(b);
                kids[1..kids.len() - 1].iter().any(|&c| f.is_ancestor(c, i))
            })
            .collect();
        let basis = f.basis(i).map_err(|e| e.to_string())?;
        if candidates != [basis] {
            return Err(format!("{f}: bases of {} are {candidates:?}", f.path(i)));
        }
        let t = f.node_type(i).map_err(|e| e.to_string())?;
        if !monoid.is_idempotent(t.e) || t.e != f.value(basis) || t.u.len() > 1 << f.height() {
            return Err(format!("{f}: bad type at {}", f.path(i)));
        }
    }
    Ok(())
}
