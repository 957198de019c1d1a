mod common;

use std::collections::HashSet;

use common::*;
use nhcross::constructions::*;
use nhcross::geometry::{check_general_position, family_crossing_counts};
use nhcross::homotopy::{curve_word, double_coset_member, validate_nonhomotopic, winding_number, Letter, ReducedWord};

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn check_family(f: &LoopFamily) -> Vec<ReducedWord> {
    assert!(check_general_position(&f.curves, &f.plane).is_empty());
    let words: Vec<ReducedWord> = f.curves.iter().map(|c| curve_word(c, &f.plane).unwrap()).collect();
    let distinct: HashSet<&ReducedWord> = words.iter().collect();
    assert_eq!(distinct.len(), words.len(), "words must be pairwise distinct");
    words
}

#[test]
fn winding_loops_small() {
    for k in 1..=4u64 {
        let f = gen_winding_loops(k).unwrap();
        assert_eq!(f.len(), 2 * k as usize + 1);
        check_family(&f);
        let centre = &f.plane.punctures()[0];
        let mut windings: Vec<i64> = f.curves.iter().map(|c| winding_number(c, centre).unwrap()).collect();
        windings.sort();
        assert_eq!(windings, (-(k as i64)..=k as i64).collect::<Vec<_>>());
        for c in &f.curves {
            let w = oracle_winding(c, centre);
            assert_eq!(oracle_self_crossings(c), (w.unsigned_abs() as usize).saturating_sub(1));
        }
        let counts = family_crossing_counts(&f.curves).unwrap();
        assert_eq!(counts.max_self(), (k as usize).saturating_sub(1));
    }
    let f = gen_winding_loops(1).unwrap();
    for i in 0..3 {
        for j in i + 1..3 {
            assert_eq!(oracle_pair_crossings(&f.curves[i], &f.curves[j]), 0);
        }
    }
    assert!(gen_winding_loops(0).is_err());
}

#[test]
fn elementary_loop_counts() {
    for n in 2..=6 {
        for k in 1..=n {
            let f = gen_elementary_loops(n, k).unwrap();
            let want: usize = 2 * (0..k).map(|j| binom(n - 1, j)).sum::<usize>();
            assert_eq!(f.len(), want, "n = {n}, k = {k}");
            check_family(&f);
            for i in 0..f.len() {
                for j in i + 1..f.len() {
                    assert!(oracle_pair_crossings(&f.curves[i], &f.curves[j]) < k);
                }
            }
        }
    }
    let one = gen_elementary_loops(4, 2).unwrap().len() - gen_elementary_loops(4, 1).unwrap().len();
    assert_eq!(one, 6);
    let f = gen_elementary_loops(8, 2).unwrap();
    assert_eq!(f.len(), 16);
    assert!(family_crossing_counts(&f.curves).unwrap().max_pair() <= 1);
    assert!(gen_elementary_loops(1, 1).is_err());
    assert!(gen_elementary_loops(3, 4).is_err());
    assert!(gen_elementary_loops(3, 0).is_err());
}

#[test]
fn elementary_words_are_increasing_products() {
    let f = gen_elementary_loops(4, 4).unwrap();
    for w in check_family(&f) {
        let gens: Vec<usize> = w.letters().iter().map(|l| l.gen).collect();
        assert!(w.letters().iter().all(|l| *l == Letter::new(l.gen, 1)), "{w}");
        assert!(gens.windows(2).all(|p| p[0] < p[1]), "{w}");
    }
}

/// All products of `j` factors drawn from `pieces`, reduced.
fn products(pieces: &[ReducedWord], j: usize) -> HashSet<ReducedWord> {
    let mut out: HashSet<ReducedWord> = [ReducedWord::empty()].into_iter().collect();
    for _ in 0..j {
        out = out.iter().flat_map(|w| pieces.iter().map(move |p| w.concat(p))).collect();
    }
    out
}

#[test]
fn concatenated_loops() {
    let g1g2 = ReducedWord::parse("g1 g2").unwrap();
    let g1 = ReducedWord::parse("g1").unwrap();
    let f = gen_concatenated_loops(2, 4).unwrap();
    assert_eq!(f.len(), 16);
    let words = check_family(&f);
    let want = products(&[g1.clone(), g1g2.clone()], 4);
    assert_eq!(words.iter().cloned().collect::<HashSet<_>>(), want);
    assert!(words.iter().all(|w| w.len() >= 4));

    let f = gen_concatenated_loops(2, 3).unwrap();
    assert_eq!(f.len(), 8);
    check_family(&f);
    let counts = family_crossing_counts(&f.curves).unwrap();
    assert!(counts.max_pair() <= 18);
    assert!(counts.max_self() <= 18);

    let f = gen_concatenated_loops(3, 3).unwrap();
    assert_eq!(f.len(), 64);
    check_family(&f);
    assert!(family_crossing_counts(&f.curves).unwrap().max_pair() <= 27);

    assert!(gen_concatenated_loops(2, 2).is_err());
    assert!(gen_concatenated_loops(1, 3).is_err());
}

#[test]
fn upper_bound_three_vertices() {
    let g = gen_upperbound_multigraph(3, 20).unwrap();
    assert_eq!(g.edge_count(), 20);
    assert!(g.general_position_violations().is_empty());
    assert!(validate_nonhomotopic(&g).unwrap().is_empty());
    let cr = crossing_number(&g).unwrap() as f64;
    assert!(cr <= 30.0 * (400.0 / 3.0) * (20.0f64 / 3.0).log2().powi(2));
    let (k, _) = case_a_parameters(20);
    assert!(cr < (k * (20 + 190)) as f64);
}

#[test]
fn upper_bound_disjoint_copies() {
    let g = gen_upperbound_multigraph(9, 45).unwrap();
    assert_eq!(g.vertex_count(), 9);
    assert_eq!(g.edge_count(), 45);
    assert!(validate_nonhomotopic(&g).unwrap().is_empty());
    let g0 = gen_upperbound_multigraph(3, 15).unwrap();
    assert!(crossing_number(&g).unwrap() <= 3 * crossing_number(&g0).unwrap());
    // edges from different copies never cross
    let counts = family_crossing_counts(&g.curves()).unwrap();
    let copy = |e: usize| g.edges()[e].u / 3;
    for (i, j, c) in counts.pairs() {
        if c > 0 {
            assert_eq!(copy(i), copy(j));
        }
    }
    let g = gen_upperbound_multigraph(11, 50).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (11, 50));
    assert!(validate_nonhomotopic(&g).unwrap().is_empty());
}

#[test]
fn upper_bound_two_vertices() {
    let g = gen_upperbound_multigraph(2, 16).unwrap();
    assert_eq!(g.edge_count(), 16);
    assert!(g.edges().iter().all(|e| e.u == 0 && e.v == 0));
    assert!(validate_nonhomotopic(&g).unwrap().is_empty());
    let keys: Vec<ReducedWord> = (0..16).map(|e| g.homotopy_key(e).unwrap().2).collect();
    for i in 0..16 {
        for j in i + 1..16 {
            assert!(!double_coset_member(&keys[i], &keys[j], 1, 1), "{i} {j}");
        }
    }
}

#[test]
fn upper_bound_parameter_errors() {
    assert!(matches!(gen_upperbound_multigraph(3, 12), Err(ConstructionError::ParameterOutOfRange(_))));
    assert!(matches!(gen_upperbound_multigraph(1, 30), Err(ConstructionError::ParameterOutOfRange(_))));
    assert!(gen_upperbound_multigraph(3, 13).is_ok());
}

#[test]
fn loose_extremal() {
    for n in [1usize, 2, 3, 5] {
        let g = gen_loose_extremal(n).unwrap();
        assert_eq!(g.vertex_count(), n);
        assert_eq!(g.edge_count(), (3 * n).saturating_sub(3));
        assert!(g.general_position_violations().is_empty());
        assert!(validate_nonhomotopic(&g).unwrap().is_empty());
        let cs = g.curves();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                assert_eq!(oracle_pair_crossings(&cs[i], &cs[j]), 0, "n = {n}: {i} {j}");
            }
        }
        if n >= 2 {
            assert!(oracle_self_crossings(&cs[cs.len() - 1]) >= 1);
        }
    }
    assert!(gen_loose_extremal(0).is_err());
}

#[test]
fn bouquets() {
    let g = gen_disjoint_bouquets(2, 4).unwrap();
    assert_eq!(g.edge_count(), 4);
    let centre = &g.vertices()[1].point;
    let mut ws: Vec<i64> = g.edges().iter().map(|e| winding_number(&e.curve, centre).unwrap().abs()).collect();
    ws.sort();
    assert_eq!(ws, vec![1, 2, 3, 4]);

    let g = gen_disjoint_bouquets(4, 8).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (4, 8));
    let cs = g.curves();
    for i in 0..4 {
        for j in 4..8 {
            assert_eq!(oracle_pair_crossings(&cs[i], &cs[j]), 0);
        }
    }
    assert!(family_crossing_counts(&g.curves()).unwrap().crossing_pairs() < 16);

    for (n, m) in [(6usize, 12usize), (2, 6), (4, 20)] {
        let g = gen_disjoint_bouquets(n, m).unwrap();
        assert!(validate_nonhomotopic(&g).unwrap().is_empty());
        assert!(family_crossing_counts(&g.curves()).unwrap().crossing_pairs() < m * m / n);
    }
    assert!(gen_disjoint_bouquets(3, 6).is_err());
    assert!(gen_disjoint_bouquets(4, 6).is_err());
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(gen_elementary_loops(4, 3).unwrap(), gen_elementary_loops(4, 3).unwrap());
    assert_eq!(gen_upperbound_multigraph(3, 20).unwrap(), gen_upperbound_multigraph(3, 20).unwrap());
    assert_eq!(gen_loose_extremal(6).unwrap(), gen_loose_extremal(6).unwrap());
}
