//! The velocity model checked against slow, independent references: a
//! brute-force velocity enumeration, Gaussian moments by direct summation,
//! and the equilibrium as an explicit Hermite tensor contraction.

use d2q37::model::{Macros, VelocityModel, NPOP};
use proptest::prelude::*;

fn model() -> VelocityModel {
    VelocityModel::d2q37().unwrap()
}

/// Every integer vector with components in [-3, 3] and an allowed norm.
fn brute_force_velocities() -> Vec<[i32; 2]> {
    let allowed = [0, 1, 2, 4, 5, 8, 9, 10];
    let mut v = Vec::new();
    for cx in -3..=3 {
        for cy in -3..=3 {
            if allowed.contains(&(cx * cx + cy * cy)) {
                v.push([cx, cy]);
            }
        }
    }
    v
}

fn double_factorial(n: i32) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

/// `E[x^a y^b]` for an isotropic Gaussian of variance `t0`.
fn gaussian_moment(a: i32, b: i32, t0: f64) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    double_factorial(a - 1) * double_factorial(b - 1) * t0.powi((a + b) / 2)
}

#[test]
fn velocity_set_matches_enumeration() {
    let m = model();
    let mut ours = m.velocities().to_vec();
    let mut reference = brute_force_velocities();
    ours.sort();
    reference.sort();
    assert_eq!(ours, reference);
    assert_eq!(m.npop(), 37);
}

#[test]
fn listed_moment_conditions_hold_by_direct_summation() {
    let m = model();
    let conditions = [
        (0, 0),
        (2, 0),
        (4, 0),
        (2, 2),
        (6, 0),
        (4, 2),
        (8, 0),
        (6, 2),
        (4, 4),
    ];
    for (a, b) in conditions {
        let sum: f64 = m
            .velocities()
            .iter()
            .zip(m.weights())
            .map(|(c, w)| w * (c[0] as f64).powi(a) * (c[1] as f64).powi(b))
            .sum();
        let want = gaussian_moment(a, b, m.t0());
        assert!((sum - want).abs() < 1e-12, "cx^{a} cy^{b}: {sum} vs {want}");
    }
}

#[test]
fn all_monomials_through_order_eight_are_gaussian() {
    // odd moments vanish by symmetry, the rest follow from the listed ones
    let m = model();
    for a in 0..=8 {
        for b in 0..=(8 - a) {
            let sum: f64 = m
                .velocities()
                .iter()
                .zip(m.weights())
                .map(|(c, w)| w * (c[0] as f64).powi(a) * (c[1] as f64).powi(b))
                .sum();
            let want = gaussian_moment(a, b, m.t0());
            assert!((sum - want).abs() < 1e-12, "cx^{a} cy^{b}: {sum} vs {want}");
        }
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The three ways to split four slots into two pairs.
const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

/// Sum over single pairs `(i, j)` of `delta(idx_i, idx_j) * prod_{k != i, j} v[idx_k]`.
fn one_delta_terms(idx: &[usize], v: [f64; 2]) -> f64 {
    let n = idx.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let rest: f64 = (0..n)
                .filter(|&k| k != i && k != j)
                .map(|k| v[idx[k]])
                .product();
            s += delta(idx[i], idx[j]) * rest;
        }
    }
    s
}

fn two_delta_terms(idx: &[usize]) -> f64 {
    PAIRINGS
        .iter()
        .map(|p| delta(idx[p[0].0], idx[p[0].1]) * delta(idx[p[1].0], idx[p[1].1]))
        .sum()
}

fn hermite(idx: &[usize], c: [f64; 2], t0: f64) -> f64 {
    let plain: f64 = idx.iter().map(|&a| c[a]).product();
    match idx.len() {
        0 | 1 => plain,
        2 | 3 => plain - t0 * one_delta_terms(idx, c),
        4 => plain - t0 * one_delta_terms(idx, c) + t0 * t0 * two_delta_terms(idx),
        _ => unreachable!(),
    }
}

fn coefficient(idx: &[usize], m: &Macros, t0: f64) -> f64 {
    let u = [m.ux, m.uy];
    let g = (m.temp / t0 - 1.0) * t0;
    let plain: f64 = idx.iter().map(|&a| u[a]).product();
    let val = match idx.len() {
        0 | 1 => plain,
        2 | 3 => plain + g * one_delta_terms(idx, u),
        4 => plain + g * one_delta_terms(idx, u) + g * g * two_delta_terms(idx),
        _ => unreachable!(),
    };
    m.rho * val
}

/// `w_i * sum_n a^(n) : H^(n)(c_i) / (n! t0^n)`, summing over every index tuple.
fn tensor_equilibrium(model: &VelocityModel, m: &Macros) -> Vec<f64> {
    let t0 = model.t0();
    model
        .velocities()
        .iter()
        .zip(model.weights())
        .map(|(c, w)| {
            let c = [c[0] as f64, c[1] as f64];
            let mut total = 0.0;
            let mut fact = 1.0;
            for n in 0..=4usize {
                if n > 0 {
                    fact *= n as f64;
                }
                let mut sum = 0.0;
                for code in 0..(1usize << n) {
                    let idx: Vec<usize> = (0..n).map(|k| (code >> k) & 1).collect();
                    sum += coefficient(&idx, m, t0) * hermite(&idx, c, t0);
                }
                total += sum / (fact * t0.powi(n as i32));
            }
            w * total
        })
        .collect()
}

#[test]
fn equilibrium_at_rest_is_the_weight_table() {
    let m = model();
    let f = tensor_equilibrium(&m, &Macros::new(1.0, 0.0, 0.0, m.t0()));
    for (a, b) in f.iter().zip(m.weights()) {
        assert!((a - b).abs() < 1e-16);
    }
}

fn macros_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.5f64..2.0, -0.1f64..0.1, -0.1f64..0.1, 0.8f64..1.2)
}

proptest! {
    #[test]
    fn closed_form_equilibrium_matches_tensor_contraction((rho, ux, uy, theta) in macros_strategy()) {
        let model = model();
        let m = Macros::new(rho, ux, uy, theta * model.t0());
        let ours = model.equilibrium(&m);
        let reference = tensor_equilibrium(&model, &m);
        for p in 0..NPOP {
            prop_assert!(
                (ours[p] - reference[p]).abs() < 1e-14 * rho,
                "p={} ours={} reference={}", p, ours[p], reference[p]
            );
        }
    }

    #[test]
    fn equilibrium_reproduces_its_macros((rho, ux, uy, theta) in macros_strategy()) {
        let model = model();
        let m = Macros::new(rho, ux, uy, theta * model.t0());
        let back = model.macros(&model.equilibrium(&m)).unwrap();
        prop_assert!((back.rho - rho).abs() < 1e-12);
        prop_assert!((back.ux - ux).abs() < 1e-12);
        prop_assert!((back.uy - uy).abs() < 1e-12);
        prop_assert!((back.temp - m.temp).abs() < 1e-12);
    }

    #[test]
    fn collide_conserves_on_random_populations(
        f in prop::array::uniform32(0.01f64..1.0),
        g in prop::array::uniform5(0.01f64..1.0),
        omega in 0.05f64..1.95,
    ) {
        let model = model();
        let mut pops = [0.0; NPOP];
        pops[..32].copy_from_slice(&f);
        pops[32..].copy_from_slice(&g);
        let out = model.collide_site(&pops, omega).unwrap();
        let moments = |f: &[f64; NPOP]| {
            let mut acc = [0.0; 4];
            for (p, c) in model.velocities().iter().enumerate() {
                let (cx, cy) = (c[0] as f64, c[1] as f64);
                acc[0] += f[p];
                acc[1] += cx * f[p];
                acc[2] += cy * f[p];
                acc[3] += (cx * cx + cy * cy) * f[p];
            }
            acc
        };
        let (a, b) = (moments(&pops), moments(&out));
        prop_assert!((a[0] - b[0]).abs() / a[0] < 1e-11);
        prop_assert!((a[1] - b[1]).abs() < 1e-11);
        prop_assert!((a[2] - b[2]).abs() < 1e-11);
        prop_assert!((a[3] - b[3]).abs() / a[3] < 1e-11);
    }
}

#[test]
fn dumped_table_satisfies_the_moment_conditions() {
    let m = model();
    let mut buf = Vec::new();
    m.write_table(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<(i32, i32, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 37);
    let t0: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# t0 "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    for (a, b) in [
        (0, 0),
        (2, 0),
        (4, 0),
        (2, 2),
        (6, 0),
        (4, 2),
        (8, 0),
        (6, 2),
        (4, 4),
    ] {
        let sum: f64 = rows
            .iter()
            .map(|&(cx, cy, w)| w * (cx as f64).powi(a) * (cy as f64).powi(b))
            .sum();
        assert!((sum - gaussian_moment(a, b, t0)).abs() < 1e-12);
    }
}
