//! Group input: JSON files of permutation generators and the built-in
//! examples, resolved to `(G, P, p)` with `P` given or searched.

use fusloc::examples;
use fusloc::fusion::FusionSystem;
use fusloc::group::FiniteGroup;
use fusloc::perm::Perm;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum InputError {
    Parse { line: usize, message: String },
    Cap(String),
    Invalid(String),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Parse { line, message } => write!(f, "ParseError at line {line}: {message}"),
            InputError::Cap(m) => write!(f, "CapExceeded: {m}"),
            InputError::Invalid(m) => write!(f, "invalid input: {m}"),
        }
    }
}

/// Cycles of each generator, points numbered from 0.
type Cycles = Vec<Vec<usize>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    degree: usize,
    generators: Vec<Cycles>,
    #[serde(default)]
    p_generators: Option<Vec<Cycles>>,
}

/// Normalized input, the basis of digests and cache keys. Generators are
/// written as sorted disjoint cycles, each starting at its least point.
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalInput {
    pub degree: usize,
    pub generators: Vec<Cycles>,
    pub p_generators: Vec<Cycles>,
    pub p: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SylowStrategy {
    /// Use `p_generators` from the input, searching only when absent.
    Input,
    /// Always search, ignoring `p_generators`.
    Search,
}

pub struct Loaded {
    pub name: String,
    pub g: FiniteGroup,
    pub p_elems: Vec<usize>,
    pub fusion: FusionSystem,
    pub canonical: CanonicalInput,
    /// `|P|` is the full `p`-part of `|G|`.
    pub sylow: bool,
}

/// Line of the start of generator `i` inside the array under `key`.
fn generator_line(text: &str, key: &str, i: usize) -> usize {
    let needle = format!("\"{key}\"");
    let Some(start) = text.find(&needle) else { return 1 };
    let mut depth = 0usize;
    let mut seen = 0usize;
    for (off, ch) in text[start..].char_indices() {
        match ch {
            '[' => {
                depth += 1;
                if depth == 2 {
                    if seen == i {
                        return text[..start + off].matches('\n').count() + 1;
                    }
                    seen += 1;
                }
            }
            ']' => {
                if depth <= 1 {
                    break;
                }
                depth -= 1;
            }
            _ => {}
        }
    }
    text[..start].matches('\n').count() + 1
}

fn perms(text: &str, key: &str, degree: usize, gens: &[Cycles]) -> Result<Vec<Perm>, InputError> {
    gens.iter()
        .enumerate()
        .map(|(i, cs)| {
            Perm::from_cycles(degree, cs).map_err(|e| InputError::Parse {
                line: generator_line(text, key, i),
                message: format!("{key}[{i}]: {e}"),
            })
        })
        .collect()
}

fn canonical_cycles(p: &Perm) -> Cycles {
    let mut cs = p.cycles();
    cs.retain(|c| c.len() > 1);
    cs.sort();
    cs
}

fn p_part(mut n: usize, p: u64) -> usize {
    let p = p as usize;
    let mut out = 1;
    while n % p == 0 {
        n /= p;
        out *= p;
    }
    out
}

/// A Sylow `p`-subgroup grown from the trivial group: while `H` is not
/// Sylow, `N_G(H)/H` has an element of order `p`, and the least-index
/// `g ∈ N_G(H) \ H` with `g^p ∈ H` extends `H` to `⟨H, g⟩` of order `p|H|`.
pub fn search_sylow(g: &FiniteGroup, p: u64) -> Vec<usize> {
    let target = p_part(g.order(), p);
    let whole = g.whole();
    let mut h = g.trivial();
    while h.count_ones(..) < target {
        let n = g.normalizer(&whole, &h);
        let next = n
            .ones()
            .find(|&x| !h.contains(x) && h.contains(g.pow(x, p)))
            .expect("a p-subgroup below Sylow order has a p-element in its normalizer quotient");
        let mut gens: Vec<usize> = h.ones().collect();
        gens.push(next);
        h = g.closure(&gens);
    }
    h.ones().collect()
}

fn assemble(
    name: String,
    g: FiniteGroup,
    p_elems: Vec<usize>,
    p: u64,
) -> Result<Loaded, InputError> {
    if p_elems.len() > 64 {
        return Err(InputError::Cap(format!("|P| = {} exceeds the 64-element limit", p_elems.len())));
    }
    let sub = g.set_of(&p_elems);
    let canonical = CanonicalInput {
        degree: g.degree(),
        generators: g.generators().iter().map(canonical_cycles).collect(),
        p_generators: g.generators_of(&sub).into_iter().map(|i| canonical_cycles(g.elem(i))).collect(),
        p,
    };
    let fusion = FusionSystem::from_group(&g, &p_elems, p).map_err(|e| InputError::Invalid(e.to_string()))?;
    let sylow = p_elems.len() == p_part(g.order(), p);
    Ok(Loaded { name, g, p_elems, fusion, canonical, sylow })
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn generate(degree: usize, gens: &[Perm], cap: usize) -> Result<FiniteGroup, InputError> {
    FiniteGroup::generate_capped(degree, gens, cap).map_err(|e| match e {
        fusloc::Error::ClosureTooLarge { cap } => InputError::Cap(format!("|G| exceeds --cap-elements {cap}")),
        e => InputError::Invalid(e.to_string()),
    })
}

/// Parses a group file. Syntax errors carry serde's line; bad cycles carry
/// the line where the offending generator starts.
pub fn load_file(
    name: String,
    text: &str,
    p: u64,
    strategy: SylowStrategy,
    cap: usize,
) -> Result<Loaded, InputError> {
    if !is_prime(p) {
        return Err(InputError::Invalid(format!("{p} is not prime")));
    }
    let file: GroupFile =
        serde_json::from_str(text).map_err(|e| InputError::Parse { line: e.line(), message: e.to_string() })?;
    if file.degree == 0 {
        return Err(InputError::Parse { line: 1, message: "degree must be positive".into() });
    }
    let gens = perms(text, "generators", file.degree, &file.generators)?;
    let g = generate(file.degree, &gens, cap)?;
    let p_elems = match (&file.p_generators, strategy) {
        (Some(pg), SylowStrategy::Input) => {
            let idx = perms(text, "p_generators", file.degree, pg)?
                .iter()
                .map(|x| g.index_of(x).ok_or_else(|| InputError::Invalid(format!("P generator {x:?} is not in G"))))
                .collect::<Result<Vec<_>, _>>()?;
            g.closure(&idx).ones().collect()
        }
        _ => search_sylow(&g, p),
    };
    assemble(name, g, p_elems, p)
}

pub const SLOW_EXAMPLES: &[&str] = &["A6/D8"];
pub const EXAMPLES: &[&str] = &["C2", "C2xC2", "C4", "D8", "S4/D8", "A4/V4", "S4/V4", "A6/D8"];

pub fn load_example(name: &str, slow: bool, prime: Option<u64>, cap: usize) -> Result<Loaded, InputError> {
    if SLOW_EXAMPLES.contains(&name) && !slow {
        return Err(InputError::Invalid(format!("example {name} needs --slow")));
    }
    let inst = examples::by_name(name)
        .ok_or_else(|| InputError::Invalid(format!("unknown example {name}; known: {}", EXAMPLES.join(", "))))?;
    if prime.is_some_and(|p| p != inst.p) {
        return Err(InputError::Invalid(format!("example {name} is defined at p = {}", inst.p)));
    }
    if inst.g.order() > cap {
        return Err(InputError::Cap(format!("|G| = {} exceeds --cap-elements {cap}", inst.g.order())));
    }
    assemble(name.to_string(), inst.g, inst.p_elems, inst.p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sylow_search_finds_full_p_parts() {
        for (name, p, order) in [("S4/D8", 2, 8), ("A4/V4", 2, 4), ("S4/D8", 3, 3), ("A6/D8", 2, 8), ("A6/D8", 3, 9)] {
            let inst = examples::by_name(name).unwrap();
            let h = search_sylow(&inst.g, p);
            assert_eq!(h.len(), order, "{name} p={p}");
            assert!(inst.g.is_subgroup(&inst.g.set_of(&h)));
        }
    }

    #[test]
    fn bad_cycle_reports_its_line() {
        let text = "{\n  \"degree\": 4,\n  \"generators\": [\n    [[0, 1]],\n    [[0, 1, 7]]\n  ]\n}\n";
        match load_file("x".into(), text, 2, SylowStrategy::Input, 1000) {
            Err(InputError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{:?}", other.err()),
        }
    }

    #[test]
    fn syntax_error_reports_its_line() {
        let text = "{\n  \"degree\": 4,\n  \"generators\": [[[0, 1]],\n ]\n}\n";
        assert!(matches!(
            load_file("x".into(), text, 2, SylowStrategy::Input, 1000),
            Err(InputError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let text = r#"{"degree": 5, "generators": [[[0, 1]], [[0, 1, 2, 3, 4]]]}"#;
        assert!(matches!(load_file("x".into(), text, 2, SylowStrategy::Input, 100), Err(InputError::Cap(_))));
        let ok = load_file("x".into(), text, 2, SylowStrategy::Input, 120).unwrap();
        assert!(ok.sylow);
        assert_eq!(ok.p_elems.len(), 8);
    }
}
