use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use toric_renyi::ed::{ed_ground_state, Layout};
use toric_renyi::fermion::{solve_chain, string_expectation, x_string, z_string, StringFactor};

fn random_string(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<StringFactor> {
    let len = rng.gen_range(1..=6);
    let mut factors: Vec<StringFactor> = (0..len)
        .map(|_| {
            let l = rng.gen_range(0..n);
            if rng.gen_bool(0.5) {
                StringFactor::X(l)
            } else {
                StringFactor::Z(l)
            }
        })
        .collect();
    let xs = factors
        .iter()
        .filter(|f| matches!(f, StringFactor::X(_)))
        .count();
    if xs % 2 == 1 {
        factors.pop();
        if !factors
            .iter()
            .filter(|f| matches!(f, StringFactor::X(_)))
            .count()
            .is_multiple_of(2)
        {
            factors.push(StringFactor::X(rng.gen_range(0..n)));
        }
    }
    factors
}

#[test]
fn strings_agree_with_exact_diagonalization() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    for n in [6, 8, 10] {
        for lambda in [0.3, 1.0, 1.7] {
            let chain = solve_chain(n, lambda).unwrap();
            let ed = ed_ground_state(Layout::Chain { n }, lambda).unwrap();
            let energy_gap = (ed.energy - chain.energy()).abs();
            assert!(
                energy_gap < 1e-10,
                "energy N={n} λ={lambda}: {energy_gap:e}"
            );
            for _ in 0..200 {
                let factors = random_string(&mut rng, n);
                let f = string_expectation(&chain, &factors).unwrap().value();
                let e = ed.expectation(&factors);
                assert!(
                    (f - e).abs() < 1e-10,
                    "{factors:?} N={n} λ={lambda}: {f} vs {e}"
                );
            }
        }
    }
}

#[test]
fn magnetization_and_strings_on_chain_of_eight() {
    let chain = solve_chain(8, 1.0).unwrap();
    let ed = ed_ground_state(Layout::Chain { n: 8 }, 1.0).unwrap();
    for l in 0..8 {
        assert!((chain.magnetization() - ed.expectation(&[StringFactor::Z(l)])).abs() < 1e-10);
    }
    let sites = [0, 3, 4, 7];
    let e = ed.expectation(&sites.map(StringFactor::X));
    assert!((x_string(&chain, &sites) - e).abs() < 1e-10);
    let zs: Vec<_> = (0..5).map(StringFactor::Z).collect();
    assert!((z_string(&chain, 5) - ed.expectation(&zs)).abs() < 1e-10);
}

#[test]
fn lanczos_path_on_chain_of_twelve() {
    let chain = solve_chain(12, 0.7).unwrap();
    let ed = ed_ground_state(Layout::Chain { n: 12 }, 0.7).unwrap();
    assert!((ed.energy - chain.energy()).abs() < 1e-10);
    let sites = [1, 2, 6, 11];
    assert!((x_string(&chain, &sites) - ed.expectation(&sites.map(StringFactor::X))).abs() < 1e-10);
}
