//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line with the
//! measured value and the wall time; any failure makes the run exit 1.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use d2q37::cli::{run_bench_matrix, trend_report, Mode, RunConfig};
use d2q37::energy::{
    energy_to_solution, wrapped_delta, CounterProvider, EnergyDomain, FakeProvider,
};
use d2q37::kernels::{Buffer, LatticeState, Schedule, Workers};
use d2q37::layout::{LatticeGeometry, LayoutDescriptor, LayoutKind};
use d2q37::metrics::{
    collide_gflops, csv_header, mlups, propagate_gbps, BenchRow, KernelKind, TrafficModel,
};
use d2q37::model::{build_velocity_set, Macros, VelocityModel, NPOP};
use d2q37::validation::{oracle_collide, oracle_propagate, random_physical_state};

fn model() -> Arc<VelocityModel> {
    Arc::new(VelocityModel::d2q37().unwrap())
}

fn verdict(
    id: u32,
    what: &str,
    ok: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
) -> bool {
    let in_time = elapsed <= limit;
    println!(
        "criterion {id} {}: {what}: {detail} [{:.2} s of {:.0} s]",
        if ok && in_time { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    ok && in_time
}

fn state_from(
    model: &Arc<VelocityModel>,
    kind: LayoutKind,
    lx: usize,
    ly: usize,
    vl: usize,
    canonical: &[f64],
) -> LatticeState {
    let desc = LayoutDescriptor::d2q37(kind, LatticeGeometry::new(lx, ly, vl).unwrap());
    LatticeState::from_canonical(desc, model.clone(), canonical).unwrap()
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn criterion_1_velocity_set_census() -> bool {
    let start = Instant::now();
    let v = build_velocity_set();
    let norms = [0, 1, 2, 4, 5, 8, 9, 10];
    let census = [1, 4, 4, 4, 8, 4, 4, 8];
    let counts: Vec<usize> = norms
        .iter()
        .map(|&n| v.iter().filter(|c| c[0] * c[0] + c[1] * c[1] == n).count())
        .collect();
    // exhaustive: nothing in the 7x7 box outside the set has an allowed norm
    let mut outside_allowed = 0;
    for cx in -4i32..=4 {
        for cy in -4i32..=4 {
            let n = cx * cx + cy * cy;
            let member = v.contains(&[cx, cy]);
            let expect = norms.contains(&n) && cx.abs() <= 3 && cy.abs() <= 3;
            if member != expect {
                outside_allowed += 1;
            }
        }
    }
    let ok = v.len() == 37 && counts == census && outside_allowed == 0;
    verdict(
        1,
        "37 velocities, shells 1/4/4/4/8/4/4/8",
        ok,
        format!(
            "len={} census={counts:?} mismatches={outside_allowed}",
            v.len()
        ),
        start.elapsed(),
        Duration::from_secs(1),
    )
}

fn criterion_2_weight_derivation() -> bool {
    let start = Instant::now();
    let m = VelocityModel::d2q37().unwrap();
    let t0 = m.t0();
    let moment = |a: i32, b: i32| -> f64 {
        m.velocities()
            .iter()
            .zip(m.weights())
            .map(|(c, w)| w * (c[0] as f64).powi(a) * (c[1] as f64).powi(b))
            .sum()
    };
    let conditions = [
        (0, 0, 1.0),
        (2, 0, t0),
        (4, 0, 3.0 * t0.powi(2)),
        (2, 2, t0.powi(2)),
        (6, 0, 15.0 * t0.powi(3)),
        (4, 2, 3.0 * t0.powi(3)),
        (8, 0, 105.0 * t0.powi(4)),
        (6, 2, 15.0 * t0.powi(4)),
        (4, 4, 9.0 * t0.powi(4)),
    ];
    let worst = conditions
        .iter()
        .map(|&(a, b, want)| (moment(a, b) - want).abs())
        .fold(0.0, f64::max);
    let positive = m.weights().iter().all(|&w| w > 0.0);
    verdict(
        2,
        "positive weights, moment residuals < 1e-12",
        positive && worst < 1e-12 && t0 > 0.0,
        format!("t0={t0:.15} max residual={worst:.2e} all positive={positive}"),
        start.elapsed(),
        Duration::from_secs(1),
    )
}

fn criterion_3_propagate_matches_oracle() -> bool {
    let start = Instant::now();
    let model = model();
    let workers = Workers::new(4, Schedule::Dynamic).unwrap();
    let mut cases = 0;
    let mut bad = Vec::new();
    for (lx, ly) in [(16, 32), (64, 128)] {
        let init = random_physical_state(lx, ly, &model, 3);
        let want = oracle_propagate(&init, model.velocities()).to_canonical();
        let canonical = init.to_canonical();
        for kind in LayoutKind::ALL {
            for vl in [1, 2, 4, 8] {
                let mut s = state_from(&model, kind, lx, ly, vl, &canonical);
                s.halo_exchange();
                s.propagate(&workers);
                cases += 1;
                if !same_bits(&s.dump_buffer(Buffer::Next), &want) {
                    bad.push(format!("{kind} vl={vl} {lx}x{ly}"));
                }
            }
        }
    }
    verdict(
        3,
        "propagate bitwise equal to oracle",
        bad.is_empty(),
        format!("{cases} cases, mismatches: {bad:?}"),
        start.elapsed(),
        Duration::from_secs(10),
    )
}

fn criterion_4_collide_matches_oracle_and_conserves() -> bool {
    let start = Instant::now();
    let model = model();
    let workers = Workers::new(4, Schedule::Dynamic).unwrap();
    let (lx, ly, omega) = (64, 128, 1.2);
    let init = random_physical_state(lx, ly, &model, 4);
    let want = oracle_collide(&oracle_propagate(&init, model.velocities()), omega, &model)
        .unwrap()
        .to_canonical();
    let canonical = init.to_canonical();
    let mut bad = Vec::new();
    for kind in LayoutKind::ALL {
        for vl in [1, 2, 4, 8] {
            let mut s = state_from(&model, kind, lx, ly, vl, &canonical);
            s.step(omega, &workers).unwrap();
            if !same_bits(&s.dump(), &want) {
                bad.push(format!("{kind} vl={vl}"));
            }
        }
    }

    // every global moment's drift relative to its initial value
    let mut s = state_from(&model, LayoutKind::Caosoa, lx, ly, 8, &canonical);
    let m0 = s.global_moments();
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        s.step(omega, &workers).unwrap();
        let m = s.global_moments();
        for k in 0..4 {
            worst[k] = worst[k].max((m[k] - m0[k]).abs() / m0[k].abs());
        }
    }
    let drift_ok = worst.iter().all(|&d| d < 1e-11);
    verdict(
        4,
        "collide bitwise equal to oracle; 100-step drift < 1e-11",
        bad.is_empty() && drift_ok,
        format!(
            "mismatches: {bad:?}; drift mass={:.1e} jx={:.1e} jy={:.1e} energy={:.1e} (|jx0|={:.3}, |jy0|={:.3})",
            worst[0], worst[1], worst[2], worst[3], m0[1].abs(), m0[2].abs()
        ),
        start.elapsed(),
        Duration::from_secs(30),
    )
}

fn criterion_5_cross_layout_and_worker_determinism() -> bool {
    let start = Instant::now();
    let model = model();
    let (lx, ly, omega) = (64, 128, 1.2);
    let canonical = random_physical_state(lx, ly, &model, 5).to_canonical();
    let mut reference: Option<Vec<f64>> = None;
    let mut cases = 0;
    let mut bad = Vec::new();
    for threads in [1, 2, 4, 8] {
        let workers = Workers::new(threads, Schedule::Dynamic).unwrap();
        for kind in LayoutKind::ALL {
            for vl in [1, 2, 4, 8] {
                let mut s = state_from(&model, kind, lx, ly, vl, &canonical);
                s.run(10, omega, &workers).unwrap();
                let d = s.dump();
                cases += 1;
                match &reference {
                    None => reference = Some(d),
                    Some(r) if !same_bits(r, &d) => {
                        bad.push(format!("{kind} vl={vl} workers={threads}"))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    verdict(
        5,
        "identical dumps after 10 steps across layouts, vl and workers",
        bad.is_empty(),
        format!("{cases} configurations, differing: {bad:?}"),
        start.elapsed(),
        Duration::from_secs(60),
    )
}

fn criterion_6_metrics_reproduce_table_1() -> bool {
    let start = Instant::now();
    let rel = |got: f64, want: f64| (got - want).abs() / want;
    let bw = propagate_gbps(1024, 8192, NPOP, 12.5e-3, TrafficModel::Nt).unwrap();
    let gf = collide_gflops(1024, 8192, 6600.0, 50.3e-3).unwrap();
    let ml = mlups(1024, 8192, 50.3e-3).unwrap();
    let big = mlups(4608, 12288, 550.25e-3).unwrap();
    let checks = [(bw, 398.0), (gf, 1100.0), (ml, 166.0), (big, 103.0)];
    let worst = checks.iter().map(|&(g, w)| rel(g, w)).fold(0.0, f64::max);
    verdict(
        6,
        "bandwidth, flop rate and MLUPS from published KNL timings within 1%",
        worst < 0.01,
        format!(
            "{bw:.1} GB/s, {gf:.1} GF/s, {ml:.1} MLUPS, {big:.1} MLUPS; worst {:.2}%",
            worst * 100.0
        ),
        start.elapsed(),
        Duration::from_secs(1),
    )
}

fn criterion_7_bench_matrix_is_complete_and_consistent() -> bool {
    let start = Instant::now();
    let model = model();
    let mut cfg = RunConfig::defaults(Mode::Bench);
    cfg.geometries = vec![(64, 256)];
    cfg.vls = vec![8];
    cfg.workers = vec![1, 2, 4, 8];
    cfg.iterations = 3;
    cfg.warmup = 1;
    let table = run_bench_matrix(&cfg, &model, None);
    let reports: Vec<_> = table.rows.iter().filter_map(BenchRow::report).collect();
    let mut inconsistent = 0;
    for r in &reports {
        let m = mlups(r.lx, r.ly, r.t_median).unwrap();
        let sweeps = if r.kernel == KernelKind::Step {
            2.0
        } else {
            1.0
        };
        let g = sweeps * propagate_gbps(r.lx, r.ly, r.npop, r.t_median, r.traffic).unwrap();
        let f = if r.kernel == KernelKind::Propagate {
            0.0
        } else {
            collide_gflops(r.lx, r.ly, r.flops_per_site, r.t_median).unwrap()
        };
        if m != r.mlups || g != r.gbps || f != r.gflops || r.t_min > r.t_median {
            inconsistent += 1;
        }
    }
    let csv = table.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    let header_ok = lines[0] == csv_header(false);
    let width = lines[0].split(',').count();
    let widths_ok = lines.iter().all(|l| l.split(',').count() == width);
    println!(
        "host trend report ({} rows):\n{}",
        reports.len(),
        trend_report(&table)
    );
    let ok = table.rows.len() == 48
        && reports.len() == 48
        && inconsistent == 0
        && header_ok
        && widths_ok
        && lines.len() == 49;
    verdict(
        7,
        "bench matrix complete with self-consistent metrics",
        ok,
        format!(
            "{} rows, {} ok, {inconsistent} inconsistent, header ok={header_ok}, uniform width={widths_ok}",
            table.rows.len(),
            reports.len()
        ),
        start.elapsed(),
        Duration::from_secs(120),
    )
}

fn criterion_8_energy() -> bool {
    let start = Instant::now();
    const RANGE: u64 = 262_143_328_850;

    // wrap-around
    let mut fake = FakeProvider::new().with_domain(EnergyDomain::Package, 0.0, RANGE);
    fake.set_counter(EnergyDomain::Package, RANGE - 1);
    let a = fake.read_counters().unwrap();
    fake.bump(EnergyDomain::Package, 2);
    fake.advance(1.0);
    let b = fake.read_counters().unwrap();
    let delta = wrapped_delta(a[0].energy_uj, b[0].energy_uj, RANGE);
    let wrap_ok = delta == 2 && energy_to_solution(&a, &b, 1).unwrap().joules_package == 2e-6;

    // 10 J package + 2 J dram over 100 iterations
    let mut fake = FakeProvider::new()
        .with_domain(EnergyDomain::Package, 0.0, RANGE)
        .with_domain(EnergyDomain::Dram, 0.0, RANGE);
    let a = fake.read_counters().unwrap();
    fake.bump(EnergyDomain::Package, 10_000_000);
    fake.bump(EnergyDomain::Dram, 2_000_000);
    fake.advance(1.0);
    let b = fake.read_counters().unwrap();
    let r = energy_to_solution(&a, &b, 100).unwrap();
    let es_ok =
        r.joules_package == 0.1 && r.joules_dram == 0.02 && (r.joules_total - 0.12).abs() <= 1e-16;

    // 50 W over 2 s, through the benchmark harness
    let model = model();
    let mut fifty = FakeProvider::new()
        .with_domain(EnergyDomain::Package, 42.0, RANGE)
        .with_domain(EnergyDomain::Dram, 8.0, RANGE);
    fifty.tick_ns = 2_000_000_000;
    let mut cfg = RunConfig::defaults(Mode::Bench);
    cfg.geometries = vec![(16, 64)];
    cfg.layouts = vec![LayoutKind::Csoa];
    cfg.vls = vec![4];
    cfg.workers = vec![1];
    cfg.iterations = 4;
    cfg.warmup = 0;
    let table = run_bench_matrix(&cfg, &model, Some(&mut fifty));
    let powers: Vec<f64> = table
        .rows
        .iter()
        .filter_map(|r| r.report()?.energy.as_ref().map(|e| e.avg_power_w))
        .collect();
    let power_ok = table.energy_columns
        && powers.len() == 3
        && powers.iter().all(|p| (p - 50.0).abs() / 50.0 < 0.01);

    // no RAPL: the real binary against an empty powercap root
    let empty = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_d2q37"))
        .args([
            "bench",
            "--lx",
            "16",
            "--ly",
            "64",
            "--vl",
            "4",
            "--workers",
            "1",
        ])
        .args(["--iterations", "2", "--warmup", "0", "--energy"])
        .env("D2Q37_POWERCAP_ROOT", empty.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let absent_ok = out.status.success()
        && stdout.lines().next() == Some(csv_header(false).as_str())
        && stdout.lines().count() == 1 + 4 * 3
        && !stdout.contains("joules");

    verdict(
        8,
        "wrap correction, exact E_S, 50 W within 1%, graceful absence",
        wrap_ok && es_ok && power_ok && absent_ok,
        format!(
            "wrap delta={delta}; E_S={} J/iter; powers={powers:?}; no-RAPL exit={:?} rows={}",
            r.joules_total,
            out.status.code(),
            stdout.lines().count().saturating_sub(1)
        ),
        start.elapsed(),
        Duration::from_secs(5),
    )
}

/// Amplitude of the first Fourier mode of `ux` along y, averaged over x.
fn shear_amplitude(s: &LatticeState) -> f64 {
    let g = s.descriptor().geometry;
    let (mut re, mut im) = (0.0, 0.0);
    for x in 0..g.lx {
        for y in 0..g.ly {
            let ux = s.macros_at(x, y).unwrap().ux;
            let k = 2.0 * PI * y as f64 / g.ly as f64;
            re += ux * k.cos();
            im -= ux * k.sin();
        }
    }
    2.0 * re.hypot(im) / (g.lx * g.ly) as f64
}

fn criterion_9_shear_wave_decays_monotonically() -> bool {
    let start = Instant::now();
    let model = model();
    let workers = Workers::serial();
    let (lx, ly, amp) = (4, 256, 0.01);
    let mut details = Vec::new();
    let mut ok = true;
    for omega in [0.8, 1.0, 1.5] {
        let desc =
            LayoutDescriptor::d2q37(LayoutKind::Soa, LatticeGeometry::new(lx, ly, 1).unwrap());
        let t0 = model.t0();
        let mut s = LatticeState::from_macros(desc, model.clone(), |_, y| {
            Macros::new(1.0, amp * (2.0 * PI * y as f64 / ly as f64).sin(), 0.0, t0)
        })
        .unwrap();
        let mut prev = shear_amplitude(&s);
        let first = prev;
        let mut violations = 0;
        for _ in 0..500 {
            s.step(omega, &workers).unwrap();
            let a = shear_amplitude(&s);
            if a >= prev || a.is_nan() {
                violations += 1;
            }
            prev = a;
        }
        ok &= violations == 0 && prev < first;
        details.push(format!(
            "ω={omega}: {first:.3e} -> {prev:.3e}, {violations} non-decreasing steps"
        ));
    }
    verdict(
        9,
        "shear-wave amplitude decays monotonically for 500 steps",
        ok,
        details.join("; "),
        start.elapsed(),
        Duration::from_secs(30),
    )
}

fn main() {
    let criteria: [(u32, fn() -> bool); 9] = [
        (1, criterion_1_velocity_set_census),
        (2, criterion_2_weight_derivation),
        (3, criterion_3_propagate_matches_oracle),
        (4, criterion_4_collide_matches_oracle_and_conserves),
        (5, criterion_5_cross_layout_and_worker_determinism),
        (6, criterion_6_metrics_reproduce_table_1),
        (7, criterion_7_bench_matrix_is_complete_and_consistent),
        (8, criterion_8_energy),
        (9, criterion_9_shear_wave_decays_monotonically),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let ok = std::panic::catch_unwind(run).unwrap_or_else(|_| {
            println!("criterion {id} FAIL: panicked");
            false
        });
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
