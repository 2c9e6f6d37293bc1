//! Acceptance battery. Runs without the test harness so that every criterion
//! prints exactly one PASS/FAIL line, even when everything passes.
//!
//! Two criteria cannot be met by the scheme as specified. They are reported
//! as FAIL, and the run exits successfully only if their measured values
//! match the documented explanation. Any other failure makes the run exit
//! nonzero.

use std::process::ExitCode;
use std::time::Instant;

use lswg::mesh::MeshKind;
use lswg::system::solver::is_cholesky_factorizable;
use lswg::system::{apply_cauchy_bc, solve, Discretization, SolverMethod, SolverOptions};
use lswg::verify::oracle::{commutativity_defect, default_tagging, error_equation_residual};
use lswg::verify::study::level_size;
use lswg::verify::{
    convergence_study, energy_error, l2_error, observed_rate, projection_error, sample_solution, solution_quadratic,
    solution_s2, solution_s3, solution_s5, solve_level, weak_laplacian_error, ErrorReport, Gamma2, MeshSource,
    StudyConfig,
};
use lswg::wgcore::{energy_norm, WgConfig};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
    /// Set when a failure is known and explained; holds whether the
    /// measurements agree with that explanation.
    documented: Option<bool>,
}

fn direct() -> SolverOptions {
    SolverOptions { method: SolverMethod::Direct, tol: 1e-10, max_iter: None }
}

fn study(
    sol: &lswg::verify::ManufacturedSolution,
    kind: MeshKind,
    levels: &[u32],
    m: usize,
    k2: f64,
) -> Vec<ErrorReport> {
    let cfg = StudyConfig { wg: WgConfig::new(m, k2).unwrap(), gamma2: Gamma2::Left, solver: direct() };
    convergence_study(sol, &MeshSource::Family(kind), levels, &cfg).unwrap_or_else(|(_, e)| panic!("study failed: {e}"))
}

fn disc(kind: MeshKind, n: usize, m: usize, k2: f64) -> Discretization {
    let mesh = default_tagging(&kind.generate(n)).unwrap();
    Discretization::new(mesh, WgConfig::new(m, k2).unwrap()).unwrap()
}

fn c1_commutativity() -> Outcome {
    let mut worst: f64 = 0.0;
    for kind in [MeshKind::TriUniform, MeshKind::Pentagon] {
        for m in 2..=4 {
            let d = disc(kind, 2, m, 10.0);
            worst = worst.max(commutativity_defect(&d, 100, 7 + m as u64).unwrap());
        }
    }
    Outcome {
        passed: worst <= 1e-9,
        detail: format!("max |Δ_w Q_h w - Q0 Δw| = {worst:.2e} over 600 polynomials (tol 1e-9)"),
        documented: None,
    }
}

fn c2_spd() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut count = 0;
    for kind in [MeshKind::TriUniform, MeshKind::TriFigure, MeshKind::Pentagon] {
        for level in 1..=6 {
            for m in 2..=4 {
                for k2 in [10.0, 1e6] {
                    let d = disc(kind, level_size(level), m, k2);
                    let (a, b) = d.assemble(|_| 0.0);
                    let r = apply_cauchy_bc(&a, &b, &d, |_| 0.0, |_, _| 0.0).unwrap();
                    let sym = r.matrix.symmetry_defect() / r.matrix.max_abs();
                    worst = worst.max(sym);
                    if sym > 1e-12 || !is_cholesky_factorizable(&r.matrix) {
                        failures.push(format!("{kind} l{level} m{m} k²={k2}"));
                    }
                    count += 1;
                }
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{count} reduced matrices, max relative asymmetry {worst:.1e}, Cholesky failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
        documented: None,
    }
}

fn c3_error_equation() -> Outcome {
    let d = disc(MeshKind::TriUniform, 4, 2, 10.0);
    let r = error_equation_residual(&d).unwrap();
    let passed = r.plain <= 1e-8;
    Outcome {
        passed,
        detail: format!(
            "relative residual of a(e_h,v) + s(Q_h u,v) = {:.2e} (tol 1e-8); with the normal-flux projection term included {:.2e}",
            r.plain, r.corrected
        ),
        // The identity holds exactly once the flux-projection term is kept.
        documented: (!passed).then_some(r.corrected <= 1e-8),
    }
}

fn c4_exactness() -> Outcome {
    let sol = solution_quadratic();
    let mut worst_rel: f64 = 0.0;
    let mut worst_col: f64 = 0.0;
    for kind in [MeshKind::TriUniform, MeshKind::TriFigure, MeshKind::Pentagon] {
        let cfg = StudyConfig { wg: WgConfig::new(2, 10.0).unwrap(), gamma2: Gamma2::Left, solver: direct() };
        let (rep, d, u_h) = solve_level(&sol, &kind.generate(4), 3, &cfg).unwrap();
        let qh = d.interpolate(&*sol.u, &*sol.grad_u).unwrap();
        let e = energy_error(&u_h, &sol, &d).unwrap();
        worst_rel = worst_rel.max(e / (1.0 + energy_norm(&qh, &d).unwrap()));
        worst_col = worst_col.max(rep.l2_err).max(rep.wlap_err).max(rep.energy_err);
        debug_assert_eq!(rep.l2_err, l2_error(&u_h, &*sol.u, &d).unwrap());
        debug_assert_eq!(rep.wlap_err, weak_laplacian_error(&u_h, &*sol.lap_u, &d).unwrap());
    }
    Outcome {
        passed: worst_rel <= 1e-8 && worst_col <= 1e-8,
        detail: format!("u = x²+y², m = 2, three families: energy/(1+|||Q_h u|||) = {worst_rel:.1e}, max error column {worst_col:.1e}"),
        documented: None,
    }
}

fn last_rates(r: &[ErrorReport]) -> (f64, f64) {
    let l = r.last().unwrap();
    (l.l2_rate.unwrap_or(f64::NAN), l.wlap_rate.unwrap_or(f64::NAN))
}

fn c5_smooth_rates() -> Outcome {
    let s2 = solution_s2();
    let (l2a, wa) = last_rates(&study(&s2, MeshKind::TriUniform, &[4, 5, 6], 2, 10.0));
    let (l2b, wb) = last_rates(&study(&s2, MeshKind::TriUniform, &[4, 5, 6], 3, 10.0));
    Outcome {
        passed: l2a >= 2.0 && wa >= 0.8 && l2b >= 3.5 && wb >= 1.7,
        detail: format!(
            "levels 5→6: m=2 l2 {l2a:.2} (≥2.0) wlap {wa:.2} (≥0.8); m=3 l2 {l2b:.2} (≥3.5) wlap {wb:.2} (≥1.7)"
        ),
        documented: None,
    }
}

fn c6_high_wavenumber() -> Outcome {
    let s2 = solution_s2();
    let (l2, wl) = last_rates(&study(&s2, MeshKind::TriUniform, &[4, 5, 6], 3, 1e6));
    let d = disc(MeshKind::TriUniform, level_size(6), 3, 1e6);
    let (a, b) = d.assemble(|p| s2.source(1e6, p));
    let r = apply_cauchy_bc(&a, &b, &d, |p| s2.value(p), |p, n| s2.flux(p, n)).unwrap();
    let n = r.matrix.dim;
    let cap = (20.0 * (n as f64).sqrt()) as usize;
    let opts = SolverOptions { method: SolverMethod::CgJacobi, tol: 1e-10, max_iter: Some(cap) };
    let cg = solve(&r.matrix, &r.rhs, &opts);
    let cg_ok = cg.is_ok();
    let cg_text = match &cg {
        Ok((_, rep)) => format!("CG {} iterations (cap {cap}, N = {n})", rep.iterations),
        Err(e) => format!("CG failed ({e}), N = {n}"),
    };
    let direct_ok = solve(&r.matrix, &r.rhs, &direct()).is_ok();
    Outcome {
        passed: l2 >= 2.0 && wl >= 1.8 && (cg_ok || direct_ok),
        detail: format!(
            "k²=1e6, m=3, levels 5→6: l2 {l2:.2} (≥2.0) wlap {wl:.2} (≥1.8); {cg_text}; direct ok: {direct_ok}"
        ),
        documented: None,
    }
}

fn c7_oscillatory() -> Outcome {
    let s3 = solution_s3();
    let r = study(&s3, MeshKind::TriUniform, &[3, 4, 5, 6, 7], 3, 10.0);
    let at = |lvl: u32| r.iter().find(|x| x.grid_level == lvl).unwrap();
    let (l2, wl) = (at(5).l2_rate.unwrap(), at(5).wlap_rate.unwrap());
    let passed = l2 >= 2.5 && wl >= 1.5;
    let tail: Vec<String> = r.iter().skip(1).map(|x| format!("{:.1}", x.l2_rate.unwrap())).collect();
    // Energy-norm theory only guarantees order m - 1 in L2 for the Cauchy
    // problem; with data on the whole boundary the rate is m + 1.
    let full = {
        let cfg = StudyConfig { wg: WgConfig::new(3, 10.0).unwrap(), gamma2: Gamma2::None, solver: direct() };
        convergence_study(&s3, &MeshSource::Family(MeshKind::TriUniform), &[5, 6], &cfg).unwrap()[1].l2_rate.unwrap()
    };
    let settled = at(7).l2_rate.unwrap();
    Outcome {
        passed,
        detail: format!(
            "s3, m=3, levels 4→5: l2 {l2:.2} (≥2.5) wlap {wl:.2} (≥1.5); l2 rates by level {}; same run with data on all of ∂Ω: l2 {full:.2}",
            tail.join(", ")
        ),
        documented: (!passed).then_some(wl >= 1.5 && settled >= 1.7 && full >= 3.5),
    }
}

fn c8_internal_layer() -> Outcome {
    let s5 = solution_s5();
    let cfg = StudyConfig { wg: WgConfig::new(4, 1e6).unwrap(), gamma2: Gamma2::Left, solver: direct() };
    let (rep, d, u_h) = solve_level(&s5, &MeshKind::TriUniform.generate(32), 6, &cfg).unwrap();
    let pts = sample_solution(&u_h, &*s5.u, &d, 4).unwrap();
    let finite =
        pts.iter().all(|p| p.u_h.is_finite() && p.exact.is_finite()) && u_h.coeffs.iter().all(|c| c.is_finite());
    let max = pts.iter().map(|p| p.error().abs()).fold(0.0, f64::max);
    let mut far: Vec<f64> = pts.iter().filter(|p| (p.point.x - 0.5).abs() > 0.2).map(|p| p.error().abs()).collect();
    far.sort_by(f64::total_cmp);
    let p99 = far[((far.len() as f64 * 0.99).ceil() as usize).min(far.len()) - 1];
    Outcome {
        passed: finite && p99 <= 0.1 * max && rep.l2_err.is_finite(),
        detail: format!(
            "s5, m=4, k²=1e6, n=32: {} samples, max |u-u_h| {max:.2e}, p99 away from layer {p99:.2e} ({:.2}% of max), all finite: {finite}",
            pts.len(),
            100.0 * p99 / max
        ),
        documented: None,
    }
}

fn c9_projection_slope() -> Outcome {
    let s2 = solution_s2();
    let mut lines = Vec::new();
    let mut ok = true;
    for m in 2..=4 {
        let errs: Vec<(f64, f64)> = (3..=6)
            .map(|l| {
                let d = disc(MeshKind::TriUniform, level_size(l), m, 10.0);
                (d.mesh.h, projection_error(&*s2.u, &d).unwrap())
            })
            .collect();
        let rates: Vec<f64> = errs.windows(2).map(|w| observed_rate(w[0].1, w[1].1, w[0].0, w[1].0).unwrap()).collect();
        ok &= rates.iter().all(|&r| r >= m as f64 + 0.7);
        lines.push(format!("m={m}: {}", rates.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")));
    }
    Outcome { passed: ok, detail: format!("||u - Q0 u|| rates (≥ m+0.7): {}", lines.join("; ")), documented: None }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("commutativity", c1_commutativity),
        ("spd", c2_spd),
        ("error equation", c3_error_equation),
        ("polynomial exactness", c4_exactness),
        ("smooth rates", c5_smooth_rates),
        ("high wavenumber", c6_high_wavenumber),
        ("oscillatory rates", c7_oscillatory),
        ("internal layer", c8_internal_layer),
        ("projection slope", c9_projection_slope),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let note = match o.documented {
            Some(true) => " [known limitation, see README]",
            Some(false) => " [known limitation, but measurements disagree with its explanation]",
            None => "",
        };
        println!("criterion {}: {tag} {name}: {}{note} ({secs:.1}s)", i + 1, o.detail);
        if o.passed {
            passed += 1;
        } else if o.documented != Some(true) {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed}/9 criteria passed, {unexpected} unexpected failures");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
