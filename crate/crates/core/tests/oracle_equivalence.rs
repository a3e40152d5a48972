use mcrt_core::format::write_graph;
use mcrt_core::mapbuild::{build_bruteforce, build_fast, spot_check, EdgeFlags};
use mcrt_core::seed::{below, rng, unit_closed_open};
use mcrt_core::walkgen::{sample_walk, EncodingWalk, Positions, StepLaw};
use proptest::prelude::*;

fn bytes(g: &mcrt_core::MatedCrtGraph) -> Vec<u8> {
    let mut out = Vec::new();
    write_graph(&mut out, g).unwrap();
    out
}

fn random_law(i: u64) -> StepLaw {
    match i % 4 {
        0 => StepLaw::uipt(),
        1 => StepLaw::four_direction(),
        _ => {
            let mut r = rng(1000 + i);
            StepLaw::gaussian(0.05 + 1.9 * unit_closed_open(&mut r)).unwrap()
        }
    }
}

#[test]
fn fast_matches_bruteforce_on_random_walks() {
    let mut r = rng(7);
    for i in 0..600u64 {
        let k = 1 + below(&mut r, 3);
        let cells = 2 + below(&mut r, 199);
        let extra = below(&mut r, k);
        let walk = sample_walk(&random_law(i), cells * k + extra, i).unwrap();
        let fast = build_fast(&walk, k).unwrap();
        let slow = build_bruteforce(&walk, k).unwrap();
        assert_eq!(bytes(&fast), bytes(&slow), "walk {i}, k {k}, {cells} cells");
        fast.check_invariants().unwrap();
    }
}

#[test]
fn flat_walk_relates_everything() {
    // All minima tie, so with <= every pair is related through both coordinates.
    let walk = EncodingWalk::from_integer_positions(&[0; 7], &[0; 7]).unwrap();
    let g = build_fast(&walk, 1).unwrap();
    assert_eq!(g.num_adjacent_pairs(), 15);
    assert_eq!(g.edge(0, 5), Some(EdgeFlags::all()));
    assert_eq!(bytes(&g), bytes(&build_bruteforce(&walk, 1).unwrap()));
}

/// The adjacency predicate evaluated straight from positions.
fn predicate(c: &[f64], k: usize, x1: usize, x2: usize) -> bool {
    let min = |a: usize, b: usize| c[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
    let hi = min(x1 * k, (x1 + 1) * k).max(min(x2 * k, (x2 + 1) * k));
    hi <= min((x1 + 1) * k, x2 * k)
}

#[test]
fn doubled_cell_size_satisfies_the_predicate() {
    for seed in 0..40u64 {
        let law = random_law(seed);
        let walk = sample_walk(&law, 360, seed).unwrap();
        let (l, r) = match walk.positions() {
            Positions::Integer { l, r } => (
                l.into_iter().map(|v| v as f64).collect::<Vec<_>>(),
                r.into_iter().map(|v| v as f64).collect::<Vec<_>>(),
            ),
            Positions::Real { l, r } => (l, r),
        };
        for k in [1usize, 2, 3] {
            let g = build_fast(&walk, 2 * k as u64).unwrap();
            let m = g.m_cells();
            for u in 0..m {
                for v in u + 1..m {
                    let mut want = EdgeFlags::empty();
                    if predicate(&l, 2 * k, u, v) {
                        want |= EdgeFlags::L;
                    }
                    if predicate(&r, 2 * k, u, v) {
                        want |= EdgeFlags::R;
                    }
                    let got = g.edge(u as u32, v as u32).unwrap_or(EdgeFlags::empty());
                    assert_eq!(got, want, "seed {seed}, cell size {}, pair ({u}, {v})", 2 * k);
                }
            }
        }
    }
}

#[test]
fn spot_check_on_a_large_graph() {
    let walk = sample_walk(&StepLaw::gaussian(1.2).unwrap(), 400_000, 5).unwrap();
    let g = build_fast(&walk, 2).unwrap();
    assert_eq!(spot_check(&g, &walk, 20_000, 1).unwrap(), 20_000);
}

proptest! {
    #[test]
    fn arbitrary_integer_walks(steps in prop::collection::vec((-2i64..=2, -2i64..=2), 2..120), k in 1u64..=3) {
        prop_assume!(steps.len() as u64 >= 2 * k);
        let (dl, dr): (Vec<_>, Vec<_>) = steps.into_iter().unzip();
        let walk = EncodingWalk::from_integer_increments(dl, dr, "test", 0).unwrap();
        prop_assert_eq!(bytes(&build_fast(&walk, k).unwrap()), bytes(&build_bruteforce(&walk, k).unwrap()));
    }

    #[test]
    fn arbitrary_real_walks(steps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..120), k in 1u64..=3) {
        prop_assume!(steps.len() as u64 >= 2 * k);
        let (dl, dr): (Vec<_>, Vec<_>) = steps.into_iter().unzip();
        let walk = EncodingWalk::from_real_increments(dl, dr, "test", 0).unwrap();
        prop_assert_eq!(bytes(&build_fast(&walk, k).unwrap()), bytes(&build_bruteforce(&walk, k).unwrap()));
    }
}
