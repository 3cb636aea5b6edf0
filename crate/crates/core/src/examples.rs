//! Built-in desk instances `(G, P, p)`.

use crate::error::Result;
use crate::fusion::FusionSystem;
use crate::group::FiniteGroup;
use crate::perm::Perm;

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: &'static str,
    pub g: FiniteGroup,
    /// Indices in `g` of the elements of `P`.
    pub p_elems: Vec<usize>,
    pub p: u64,
    pub fusion: FusionSystem,
}

fn perms(n: usize, gens: &[&[&[usize]]]) -> Vec<Perm> {
    gens.iter()
        .map(|cs| Perm::from_cycles(n, &cs.iter().map(|c| c.to_vec()).collect::<Vec<_>>()).unwrap())
        .collect()
}

/// Builds an instance from generators of `G` and of `P ≤ G`.
pub fn instance(name: &'static str, n: usize, g_gens: &[Perm], p_gens: &[Perm], p: u64) -> Result<Instance> {
    let g = FiniteGroup::generate(n, g_gens)?;
    let idx: Vec<usize> = p_gens.iter().map(|x| g.index_of(x).expect("P generator outside G")).collect();
    let p_elems: Vec<usize> = g.closure(&idx).ones().collect();
    let fusion = FusionSystem::from_group(&g, &p_elems, p)?;
    Ok(Instance { name, g, p_elems, p, fusion })
}

fn trivial(name: &'static str, n: usize, gens: &[&[&[usize]]]) -> Instance {
    let ps = perms(n, gens);
    instance(name, n, &ps, &ps, 2).unwrap()
}

pub fn c2() -> Instance {
    trivial("C2", 2, &[&[&[0, 1]]])
}

pub fn c2xc2() -> Instance {
    trivial("C2xC2", 4, &[&[&[0, 1]], &[&[2, 3]]])
}

pub fn c4() -> Instance {
    trivial("C4", 4, &[&[&[0, 1, 2, 3]]])
}

pub fn d8() -> Instance {
    trivial("D8", 4, &[&[&[0, 1, 2, 3]], &[&[0, 2]]])
}

pub fn s4_d8() -> Instance {
    let g = perms(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
    let p = perms(4, &[&[&[0, 1, 2, 3]], &[&[0, 2]]]);
    instance("S4/D8", 4, &g, &p, 2).unwrap()
}

pub fn a4_v4() -> Instance {
    let g = perms(4, &[&[&[0, 1, 2]], &[&[0, 1], &[2, 3]]]);
    let p = perms(4, &[&[&[0, 1], &[2, 3]], &[&[0, 2], &[1, 3]]]);
    instance("A4/V4", 4, &g, &p, 2).unwrap()
}

pub fn a6_d8() -> Instance {
    let g = perms(6, &[&[&[0, 1, 2]], &[&[1, 2, 3, 4, 5]]]);
    let p = perms(6, &[&[&[0, 1, 2, 3], &[4, 5]], &[&[1, 3], &[4, 5]]]);
    instance("A6/D8", 6, &g, &p, 2).unwrap()
}

/// The normal Klein four subgroup of `S4`: not Sylow, and `Aut_{S4}(V4) ≅ S3`.
pub fn s4_v4() -> Instance {
    let g = perms(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
    let p = perms(4, &[&[&[0, 1], &[2, 3]], &[&[0, 2], &[1, 3]]]);
    instance("S4/V4", 4, &g, &p, 2).unwrap()
}

/// `⟨(0 1)⟩` inside `S4`: not Sylow, but its fusion system is trivial.
pub fn s4_c2() -> Instance {
    let g = perms(4, &[&[&[0, 1]], &[&[0, 1, 2, 3]]]);
    let p = perms(4, &[&[&[0, 1]]]);
    instance("S4/C2", 4, &g, &p, 2).unwrap()
}

/// The instances used by the acceptance suites, excluding the slow one.
pub fn desk() -> Vec<Instance> {
    vec![c2(), c2xc2(), c4(), d8(), s4_d8(), a4_v4()]
}

pub fn by_name(name: &str) -> Option<Instance> {
    Some(match name {
        "C2" => c2(),
        "C2xC2" => c2xc2(),
        "C4" => c4(),
        "D8" => d8(),
        "S4/D8" => s4_d8(),
        "A4/V4" => a4_v4(),
        "A6/D8" => a6_d8(),
        "S4/V4" => s4_v4(),
        "S4/C2" => s4_c2(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_orders() {
        for (inst, g, p) in [
            (c2(), 2, 2),
            (c2xc2(), 4, 4),
            (c4(), 4, 4),
            (d8(), 8, 8),
            (s4_d8(), 24, 8),
            (a4_v4(), 12, 4),
            (a6_d8(), 360, 8),
            (s4_v4(), 24, 4),
            (s4_c2(), 24, 2),
        ] {
            assert_eq!((inst.g.order(), inst.p_elems.len()), (g, p), "{}", inst.name);
        }
    }
}
