//! Registered verification experiments. Each one draws its inputs from a
//! seeded [`LabRng`], compares a lab quantity with an independent oracle and
//! returns a [`Report`]. Every tolerance is a named, overridable config entry
//! (`tol.<name>`); the defaults are listed next to each experiment.

use crate::clock::{conditioned_expectation, ClockSystem};
use crate::error::{LabError, Result};
use crate::fermion::{
    cycle_boundary_sign, cycle_from_rotations, cycle_shift_defect, dirac_mode_propagator, dirac_small_tau_limit,
    dirac_tau_errors, complex_mass, fermionic_cycle, fswap, gamma_set, parity_pair_correlator,
    parity_weighted_trace, FermionLayout,
};
use crate::fock::anomaly_scan;
use crate::gaussian::{
    feynman_propagator_grid, occupation, tau_mode_correlator, truncated_fock_pair_correlator, Point,
};
use crate::modes::{signed_indices, ModeGrid};
use crate::operator::{c, Operator, I, ONE, ZERO};
use crate::phi4::{
    one_loop_channel, phi4_first_order_2to2, tau_sweep, Channel, Process, Regulators, ScatteringGrid,
};
use crate::random::LabRng;
use crate::reference::{heisenberg, schrodinger_expectation, FreeLatticeEd, LatticePhi4};
use crate::report::{Case, ExperimentConfig, Report};
use crate::scm::{
    build_constraints, chain_grid, classical_flow_bracket, classify, dirac_bracket, equal_time_bracket_reconstruction,
    poisson_bracket, ConstraintClass, LinearObservable,
};
use crate::spacetime::{
    build_R, build_R_on, causality_witness, marginal, power_and_pseudoentropy, reduce_to_region,
    renyi_pseudo_entropy,
};
use crate::timeslab::{build_action, constraint_expectation, trace_theorem_lhs, trace_theorem_rhs, SliceLayout};
use crate::wick::{enumerate_pairings, vacuum_bubble_check};
use nalgebra::DMatrix;
use std::f64::consts::PI;

pub const EXPERIMENTS: [&str; 12] = [
    "paw-conditioning",
    "trace-theorem",
    "constraint-theorem",
    "st-state-marginals",
    "causality-witness",
    "pseudo-entropy",
    "anomaly-scan",
    "dirac-nogo",
    "propagator",
    "smatrix",
    "dirac-propagator",
    "fswap-cycle",
];

/// Largest sliced Hilbert space the operator-level experiments will build.
pub const SLICED_DIM_CAP: usize = 1024;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let cases = match cfg.experiment.as_str() {
        "paw-conditioning" => paw_conditioning(cfg)?,
        "trace-theorem" => trace_theorem(cfg)?,
        "constraint-theorem" => constraint_theorem(cfg)?,
        "st-state-marginals" => st_state_marginals(cfg)?,
        "causality-witness" => causality(cfg)?,
        "pseudo-entropy" => pseudo_entropy(cfg)?,
        "anomaly-scan" => anomaly(cfg)?,
        "dirac-nogo" => dirac_nogo(cfg)?,
        "propagator" => propagator(cfg)?,
        "smatrix" => smatrix(cfg)?,
        "dirac-propagator" => dirac_propagator(cfg)?,
        "fswap-cycle" => fswap_cycle(cfg)?,
        other => return Err(LabError::UnknownExperiment(other.to_string())),
    };
    Ok(Report::assemble(cfg, cases))
}

fn check_sliced(d: usize, n: usize) -> Result<()> {
    let size = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if size > SLICED_DIM_CAP {
        return Err(LabError::CapExceeded {
            size,
            cap: SLICED_DIM_CAP,
        });
    }
    Ok(())
}

fn rng(cfg: &ExperimentConfig) -> LabRng {
    LabRng::seed(cfg.seed)
}

fn slices_between(cfg: &ExperimentConfig, lo: usize, hi: usize) -> Result<(usize, usize)> {
    let a = cfg.get("n_min", lo)?;
    let b = cfg.get("n_max_slices", hi)?;
    if a == 0 || a > b {
        return Err(LabError::Config(format!("need 1 ≤ n_min ≤ n_max_slices, got {a}..{b}")));
    }
    Ok((a, b))
}

/// tol.match = 1e-12
fn paw_conditioning(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let cases: usize = cfg.get("cases", 50)?;
    let d: usize = cfg.get("d", 3)?;
    let n: usize = cfg.get("n", 6)?;
    let eps: f64 = cfg.get("eps", 0.3)?;
    let tol = cfg.tolerance("match", 1e-12)?;
    let mut rng = rng(cfg);
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let h = rng.hermitian(d);
        let psi = rng.ket(d);
        let o = rng.hermitian(d);
        let t = rng.index(n);
        let cs = ClockSystem::new(n, eps, h.clone(), psi.clone())?;
        let value = conditioned_expectation(&cs, &o, t)?;
        let oracle = schrodinger_expectation(&h, &psi, &o, eps * t as f64);
        out.push(Case::new(format!("case-{i:03}"), value, oracle, tol).input("t", t));
    }
    Ok(out)
}

fn random_insertions(rng: &mut LabRng, d: usize, n: usize, max: usize) -> Vec<(Operator, usize)> {
    let k = rng.index(max.min(n) + 1);
    let mut slices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.index(n - i);
        slices.swap(i, j);
    }
    slices[..k].iter().map(|&s| (rng.operator(d), s)).collect()
}

/// tol.identity = 1e-10
fn trace_theorem(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let cases: usize = cfg.get("cases", 50)?;
    let dims: Vec<usize> = cfg.get_list("d", &[2, 3])?;
    let (n_lo, n_hi) = slices_between(cfg, 1, 5)?;
    let max_ins: usize = cfg.get("insertions", 3)?;
    let eps: f64 = cfg.get("eps", 0.2)?;
    let tol = cfg.tolerance("identity", 1e-10)?;
    for &d in &dims {
        check_sliced(d, n_hi)?;
    }
    let mut rng = rng(cfg);
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let d = dims[rng.index(dims.len())];
        let n = n_lo + rng.index(n_hi - n_lo + 1);
        let h = rng.hermitian(d);
        let ins = random_insertions(&mut rng, d, n, max_ins);
        let qa = build_action(&SliceLayout::new(d, n, eps)?, &h)?;
        let lhs = trace_theorem_lhs(&qa, &ins)?;
        let rhs = trace_theorem_rhs(&qa, &ins)?;
        out.push(
            Case::new(format!("case-{i:03}"), lhs, rhs, tol)
                .input("d", d)
                .input("n", n)
                .input("insertions", ins.len()),
        );
    }
    Ok(out)
}

/// tol.constraint = 1e-10
fn constraint_theorem(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let cases: usize = cfg.get("cases", 50)?;
    let dims: Vec<usize> = cfg.get_list("d", &[2, 3])?;
    let (n_lo, n_hi) = slices_between(cfg, 2, 5)?;
    let eps: f64 = cfg.get("eps", 0.2)?;
    let tol = cfg.tolerance("constraint", 1e-10)?;
    for &d in &dims {
        check_sliced(d, n_hi)?;
    }
    let mut rng = rng(cfg);
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let d = dims[rng.index(dims.len())];
        let n = n_lo + rng.index(n_hi - n_lo + 1);
        let with_boundary = i % 2 == 1;
        let h = rng.hermitian(d);
        let o = rng.operator(d);
        let qa = build_action(&SliceLayout::new(d, n, eps)?, &h)?;
        let value = if with_boundary {
            let t = rng.index(n - 1);
            let (q, qp) = (rng.ket(d), rng.ket(d));
            constraint_expectation(&qa, &o, t, Some((&q, &qp)))?
        } else {
            let t = rng.index(n);
            constraint_expectation(&qa, &o, t, None)?
        };
        out.push(
            Case::new(format!("case-{i:03}"), value, ZERO, tol)
                .input("d", d)
                .input("n", n)
                .input("boundary", with_boundary),
        );
    }
    Ok(out)
}

/// tol.marginal = 1e-12, tol.region = 1e-10
fn st_state_marginals(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let cases: usize = cfg.get("cases", 10)?;
    let d: usize = cfg.get("d", 2)?;
    let n: usize = cfg.get("n", 4)?;
    let eps: f64 = cfg.get("eps", 0.35)?;
    let tol_m = cfg.tolerance("marginal", 1e-12)?;
    let tol_r = cfg.tolerance("region", 1e-10)?;
    check_sliced(d, n)?;
    check_sliced(4, n)?;
    let mut rng = rng(cfg);
    let mut out = Vec::new();
    for i in 0..cases {
        let psi = rng.ket(d);
        let h = rng.hermitian(d);
        let st = build_R(&psi, &h, eps, n)?;
        for t in 0..n {
            let evolved = st.evolved(t).projector();
            let diff = marginal(&st, t)?.max_abs_diff(&evolved);
            out.push(Case::real(format!("case-{i:03}/marginal-{t}"), diff, 0.0, tol_m));
        }
        // Two-site slices: the equal-time single-site reduction is a density matrix.
        let layout = SliceLayout::with_sites(vec![2, 2], n, eps)?;
        let psi2 = rng.ket(4);
        let h2 = rng.hermitian(4);
        let st2 = build_R_on(&layout, &psi2, &h2)?;
        let t = rng.index(n);
        let site = rng.index(2);
        let reg = reduce_to_region(&st2, &[(t, site)])?;
        let key = format!("case-{i:03}/region");
        out.push(Case::real(format!("{key}/hermiticity"), reg.hermiticity_deviation, 0.0, tol_r));
        let min_eig = reg.reduced.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        out.push(Case::real(format!("{key}/negativity"), min_eig.min(0.0), 0.0, tol_r));
        out.push(Case::new(format!("{key}/trace"), reg.reduced.trace(), ONE, tol_r));
    }
    Ok(out)
}

/// tol.commutator = 1e-10
fn causality(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let cases: usize = cfg.get("cases", 20)?;
    let d: usize = cfg.get("d", 2)?;
    let n: usize = cfg.get("n", 4)?;
    let eps: f64 = cfg.get("eps", 0.35)?;
    let tol = cfg.tolerance("commutator", 1e-10)?;
    if n < 2 {
        return Err(LabError::Config("causality-witness needs n ≥ 2".into()));
    }
    check_sliced(d, n)?;
    let mut rng = rng(cfg);
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let psi = rng.ket(d);
        let h = rng.hermitian(d);
        let a = rng.hermitian(d);
        let b = rng.hermitian(d);
        let t = 1 + rng.index(n - 1);
        let st = build_R(&psi, &h, eps, n)?;
        let value = causality_witness(&st, &a, &b, t)?;
        let bh = heisenberg(&h, &b, eps * t as f64);
        let oracle = (&bh * &a).sandwich(&psi, &psi) - (&a * &bh).sandwich(&psi, &psi);
        out.push(Case::new(format!("case-{i:03}"), value, oracle, tol).input("t", t));
    }
    Ok(out)
}

/// tol.trace = 1e-10
fn pseudo_entropy(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let cases: usize = cfg.get("cases", 5)?;
    let d: usize = cfg.get("d", 2)?;
    let n: usize = cfg.get("n", 4)?;
    let eps: f64 = cfg.get("eps", 0.35)?;
    let k_max: u32 = cfg.get("k_max", 6)?;
    let tol = cfg.tolerance("trace", 1e-10)?;
    check_sliced(d, n)?;
    let mut rng = rng(cfg);
    let mut out = Vec::new();
    for i in 0..cases {
        let psi = rng.ket(d);
        let h = rng.hermitian(d);
        let st = build_R(&psi, &h, eps, n)?;
        for k in 1..=k_max {
            let (_, tr) = power_and_pseudoentropy(&st, k)?;
            out.push(Case::new(format!("case-{i:03}/trace-k{k}"), tr, ONE, tol));
            if k >= 2 {
                let s = renyi_pseudo_entropy(tr, k)?;
                out.push(Case::new(format!("case-{i:03}/entropy-k{k}"), s, ZERO, tol));
            }
        }
    }
    Ok(out)
}

/// tol.normal = 1e-9, tol.contraction = 1e-12, tol.ratio = 0.05
fn anomaly(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let ns: Vec<usize> = cfg.get_list("n_list", &[8, 16, 32, 64])?;
    let t_total: f64 = cfg.get("t_total", 4.0)?;
    let n0: i64 = cfg.get("n0", 1)?;
    let slice: usize = cfg.get("slice", 0)?;
    let tol_n = cfg.tolerance("normal", 1e-9)?;
    let tol_c = cfg.tolerance("contraction", 1e-12)?;
    let tol_r = cfg.tolerance("ratio", 0.05)?;
    let rows = anomaly_scan(&ns, t_total, n0, slice)?;
    let mut out = Vec::new();
    for row in &rows {
        let key = format!("n-{:05}", row.n);
        out.push(Case::new(format!("{key}/normal-ordered"), row.normal.extended, row.normal.standard, tol_n));
        out.push(Case::real(
            format!("{key}/contraction"),
            row.anti.internal_contraction,
            row.n as f64 / t_total,
            tol_c,
        ));
    }
    for a in &rows {
        if let Some(b) = rows.iter().find(|b| b.n == 2 * a.n) {
            let observed = b.anti.mismatch() / a.anti.mismatch();
            let predicted = b.predicted_mismatch(t_total) / a.predicted_mismatch(t_total);
            out.push(
                Case::real(format!("ratio-{:05}-{:05}", b.n, a.n), observed, predicted, tol_r)
                    .input("n", a.n)
                    .input("asymptotic", 2.0),
            );
        }
    }
    Ok(out)
}

/// tol.bracket = 1e-12, tol.delta = 1e-12, tol.flow = 1e-10
fn dirac_nogo(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let l: usize = cfg.get("sites", 4)?;
    let mass: f64 = cfg.get("mass", 0.8)?;
    let t_box: f64 = cfg.get("t_box", 10.0)?;
    let off: Vec<i64> = cfg.get_list("off_shell_n0", &[1, 2, -1])?;
    let tol_b = cfg.tolerance("bracket", 1e-12)?;
    let tol_d = cfg.tolerance("delta", 1e-12)?;
    let tol_f = cfg.tolerance("flow", 1e-10)?;
    let grid = chain_grid(l, mass, t_box, &off)?;
    let cs = build_constraints(&grid);
    let classes = classify(&cs);
    let m = grid.len();
    let mut out = Vec::new();
    for (i, cls) in classes.iter().enumerate() {
        let key = format!("mode-{i:03}");
        let (a, s) = (LinearObservable::a(m, i), LinearObservable::a_star(m, i));
        let db = dirac_bracket(&a, &s, &cs)?;
        if grid.modes[i].is_on_shell() {
            let ok = cls.class == ConstraintClass::IdenticallyZero;
            out.push(Case::real(format!("{key}/class"), ok as u8 as f64, 1.0, 0.0).input("on_shell", true));
            out.push(Case::new(format!("{key}/dirac"), db, -I, 0.0));
            out.push(Case::new(format!("{key}/poisson"), poisson_bracket(&a, &s), -I, 0.0));
        } else {
            let ok = cls.class == ConstraintClass::SecondClass;
            out.push(Case::real(format!("{key}/class"), ok as u8 as f64, 1.0, 0.0).input("on_shell", false));
            out.push(Case::new(format!("{key}/dirac"), db, ZERO, tol_b));
        }
    }
    let t: f64 = cfg.get("t", 0.3)?;
    for x in 0..l {
        for y in 0..l {
            let v = equal_time_bracket_reconstruction(&grid, x, y, t, t)?;
            let delta = if x == y { ONE } else { ZERO };
            out.push(Case::new(format!("equal-time-{x}-{y}"), v, delta, tol_d));
        }
    }
    let dt: f64 = cfg.get("dt", 0.7)?;
    for y in 0..l {
        let v = equal_time_bracket_reconstruction(&grid, 0, y, t + dt, t)?;
        let oracle = classical_flow_bracket(l, mass, dt, 0, y);
        out.push(Case::new(format!("unequal-time-0-{y}"), v, c(oracle, 0.0), tol_f).input("dt", dt));
    }
    Ok(out)
}

/// tol.fock = 1e-8, tol.order = 0.05, tol.feynman = 0.02
fn propagator(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    let mut rng = rng(cfg);

    // Pair correlator against a truncated Fock trace.
    let samples: usize = cfg.get("lambda_samples", 20)?;
    let re_min: f64 = cfg.get("lambda_re_min", 0.6)?;
    let re_max: f64 = cfg.get("lambda_re_max", 3.0)?;
    let im_max: f64 = cfg.get("lambda_im_max", 1.0)?;
    let n_max: usize = cfg.get("n_max", 40)?;
    let tol_fock = cfg.tolerance("fock", 1e-8)?;
    for i in 0..samples {
        let im = if i % 4 == 0 { 0.0 } else { rng.uniform(-im_max, im_max) };
        let lam = c(rng.uniform(re_min, re_max), im);
        let brute = truncated_fock_pair_correlator(lam, n_max);
        out.push(
            Case::new(format!("fock-{i:03}"), occupation(lam)?, brute, tol_fock)
                .input("lambda_re", lam.re)
                .input("lambda_im", lam.im),
        );
    }

    // τ·⟨a†a⟩ on an off-shell mode: first-order approach to i/(Δ + iεᵢ).
    let tau0: f64 = cfg.get("tau0", 1e-2)?;
    let steps: usize = cfg.get("tau_steps", 4)?;
    let eps_i: f64 = cfg.get("eps_i", 0.05)?;
    let tol_order = cfg.tolerance("order", 0.05)?;
    let mut grid = ModeGrid::empty(10.0, 4.0, 1.0)?;
    let p = grid.push_indexed(3, vec![1]);
    let gap = grid.modes[p].gap();
    let target = I / c(gap, eps_i);
    let mut errs = Vec::with_capacity(steps);
    for k in 0..steps {
        let tau = tau0 / 2f64.powi(k as i32);
        errs.push((tau_mode_correlator(&grid, tau, eps_i, p, p)? * tau - target).norm());
    }
    for k in 1..steps {
        out.push(Case::real(format!("order-{k}"), errs[k] / errs[k - 1], 0.5, tol_order).input("gap", gap));
    }

    // Grid Feynman propagator against exact diagonalization of a 2-site chain.
    let sites: usize = cfg.get("sites", 2)?;
    let mass: f64 = cfg.get("mass", 1.0)?;
    let t_box: f64 = cfg.get("t_box", 800.0)?;
    let window: i64 = cfg.get("freq_window", 131_072)?;
    let tau_f: f64 = cfg.get("tau_feynman", 1e-5)?;
    let eps_f: f64 = cfg.get("eps_i_feynman", 0.01)?;
    let ed_nmax: usize = cfg.get("ed_n_max", 12)?;
    let times: Vec<f64> = cfg.get_list("times", &[0.5, -0.5, 1.2])?;
    let tol_f = cfg.tolerance("feynman", 0.02)?;
    let n0s: Vec<i64> = (-window..window).collect();
    let fgrid = ModeGrid::product(t_box, sites as f64, mass, &n0s, &[signed_indices(sites)])?;
    let ed = FreeLatticeEd::new(sites, mass, ed_nmax)?;
    for (i, &dt) in times.iter().enumerate() {
        for x in 0..sites {
            let v = feynman_propagator_grid(
                &fgrid,
                tau_f,
                eps_f,
                Point { t: dt, x: x as f64 },
                Point { t: 0.0, x: 0.0 },
            )?;
            let oracle = ed.time_ordered_phi(x, 0, dt);
            // Relative comparison: propagator values are O(0.1).
            let case = Case::new(format!("feynman-{i}-{x}"), v / oracle.norm(), oracle / oracle.norm(), tol_f)
                .input("dt", dt)
                .input("x", x);
            out.push(case);
        }
    }
    Ok(out)
}

fn double_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (2 * k - 1) as f64).product()
}

/// tol.volume = 0.01, tol.oracle = 0.02, tol.slope = 0.01, tol.loop = 0.05,
/// tol.bubble = 1e-10
fn smatrix(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let lam: f64 = cfg.get("lambda", 0.3)?;
    let t_box: f64 = cfg.get("t_box", 40.0)?;
    let window: i64 = cfg.get("freq_window", 64)?;
    let eps_i: f64 = cfg.get("eps_i", 0.05)?;
    let tau0: f64 = cfg.get("tau0", 1e-2)?;
    let steps: usize = cfg.get("tau_steps", 3)?;
    let grid = ScatteringGrid::new(2.0 * PI, 3, 2, 1.0, t_box, window)?;
    let (p1, p2, k1, k2) = ([1, 0], [-1, 0], [0, 1], [0, -1]);
    let mut out = Vec::new();

    let sweep = tau_sweep(tau0, steps, |tau| {
        phi4_first_order_2to2(&grid, Regulators { tau, eps_i }, lam, &p1, &p2, &k1, &k2)
    })?;
    let volume = c(0.0, -lam * grid.spacetime_volume());
    out.push(Case::new("first-order/volume", sweep.extrapolated, volume, cfg.tolerance("volume", 0.01)?));
    let modes = vec![p1.to_vec(), p2.to_vec(), k1.to_vec(), k2.to_vec()];
    let lat = LatticePhi4::new(grid.l_box, grid.sites, grid.dim, grid.mass, modes)?;
    let dyson = lat.first_order(&lat.phi4(lam), grid.t_box, &[0, 1], &[2, 3]);
    out.push(Case::new("first-order/dyson", sweep.extrapolated, dyson, cfg.tolerance("oracle", 0.02)?));
    out.push(Case::real("first-order/slope", sweep.slope, 0.0, cfg.tolerance("slope", 0.01)?));

    let reg = Regulators { tau: tau0, eps_i };
    let violating = phi4_first_order_2to2(&grid, reg, lam, &p1, &p2, &k1, &[1, 1])?;
    out.push(Case::new("first-order/violating", violating, ZERO, 0.0));
    let free = phi4_first_order_2to2(&grid, reg, 0.0, &p1, &p2, &k1, &k2)?;
    out.push(Case::new("first-order/free", free, ZERO, 0.0));

    for n in 1..=5 {
        let count = enumerate_pairings(2 * n)?.len() as f64;
        out.push(Case::real(format!("pairings-{n}"), count, double_factorial(n), 0.0));
    }

    let mut rng = rng(cfg);
    let g = rng.ginibre(5);
    let prop = (&g + g.transpose()) * c(0.25, 0.0);
    let chk = vacuum_bubble_check(&prop, &[0, 1, 2, 3], &[3, 4], 2)?;
    let scale = 1.0 + chk.linked[2].norm();
    out.push(Case::real("bubbles", chk.max_mismatch() / scale, 0.0, cfg.tolerance("bubble", 1e-10)?));

    if cfg.get("second_order", true)? {
        let t2: f64 = cfg.get("t_box_loop", 2000.0)?;
        let w2: i64 = cfg.get("freq_window_loop", 12_800)?;
        let reg2 = Regulators {
            tau: cfg.get("tau_loop", 1e-6)?,
            eps_i: cfg.get("eps_i_loop", 0.01)?,
        };
        let g2 = ScatteringGrid::new(2.0 * PI, 3, 2, 1.0, t2, w2)?;
        let proc_ = Process::two_to_two(&p1, &p2, &k1, &k2);
        let amp = one_loop_channel(&g2, reg2, lam, &proc_, Channel::T)?;
        let mut modes = proc_.incoming.clone();
        modes.extend(proc_.outgoing.clone());
        let internal: Vec<Vec<i64>> = g2.spatial_modes().into_iter().filter(|n| !modes.contains(n)).collect();
        let n_int = internal.len();
        modes.extend(internal);
        let lat2 = LatticePhi4::new(g2.l_box, g2.sites, g2.dim, g2.mass, modes)?;
        let int: Vec<usize> = (4..4 + n_int).collect();
        let mut v = lat2.vertex(lam / 2.0, &[&[0], &[2], &int, &int]);
        v.extend(lat2.vertex(lam / 2.0, &[&[1], &[3], &int, &int]));
        let rate = lat2.second_order_rate(&v, &[0, 1], &[2, 3])?;
        let ours = amp / c(g2.t_box, 0.0);
        let tol = cfg.tolerance("loop", 0.05)?;
        out.push(Case::new("second-order/t-channel", ours / rate.norm(), rate / rate.norm(), tol));
    }
    Ok(out)
}

/// tol.order = 0.05, tol.clifford = 1e-14, tol.limit = 1e-12, tol.dense = 1e-10
fn dirac_propagator(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let p: Vec<f64> = cfg.get_list("p", &[0.4, 0.0, 0.0, 0.0])?;
    let p: [f64; 4] = p
        .try_into()
        .map_err(|_| LabError::Config("p needs four components".into()))?;
    let m: f64 = cfg.get("mass", 1.0)?;
    let eps_i: f64 = cfg.get("eps_i", 1e-3)?;
    let tau0: f64 = cfg.get("tau0", 1e-2)?;
    let steps: usize = cfg.get("tau_steps", 4)?;
    let mut out = Vec::new();

    let g = gamma_set();
    out.push(Case::real("clifford", g.clifford_defect(), 0.0, cfg.tolerance("clifford", 1e-14)?));

    let taus: Vec<f64> = (0..steps).map(|k| tau0 / 2f64.powi(k as i32)).collect();
    let errs = dirac_tau_errors(p, m, eps_i, &taus)?;
    let tol_o = cfg.tolerance("order", 0.05)?;
    for k in 1..errs.len() {
        out.push(Case::real(format!("order-{k}"), errs[k] / errs[k - 1], 0.5, tol_o).input("tau", taus[k]));
    }

    let tol_l = cfg.tolerance("limit", 1e-12)?;
    let lim = dirac_small_tau_limit(p, m, eps_i);
    let mc = complex_mass(m, eps_i);
    let check = (g.slash(p) - DMatrix::identity(4, 4) * mc) * lim;
    let defect = (check - DMatrix::identity(4, 4) * I).camax();
    out.push(Case::real("limit-inverse", defect, 0.0, tol_l));

    // Dense parity-weighted traces on 2⁶ states.
    let tol_d = cfg.tolerance("dense", 1e-10)?;
    let mut rng = rng(cfg);
    let six = FermionLayout::new(1, 6)?;
    let tau: f64 = cfg.get("tau_dense", 0.7)?;
    let h = rng.ginibre(6) * c(0.4, 0.0);
    let s = six.quadratic(&h)?;
    let analytic = parity_pair_correlator(&(&h * c(0.0, -tau)))?;
    for i in 0..6 {
        for j in 0..6 {
            let ins = [six.annihilator(i)?, six.creator(j)?];
            let v = parity_weighted_trace(six, &s, tau, &ins)?;
            out.push(Case::new(format!("parity-{i}-{j}"), v, analytic[(i, j)], tol_d));
        }
    }

    // The propagator is the parity-weighted trace of the discrete Dirac action.
    let four = FermionLayout::new(1, 4)?;
    let pa: Vec<f64> = cfg.get_list("p_action", &[0.3, 0.2, -0.1, 0.5])?;
    let pa: [f64; 4] = pa
        .try_into()
        .map_err(|_| LabError::Config("p_action needs four components".into()))?;
    let m_a: f64 = cfg.get("mass_action", 0.8)?;
    let tau_a: f64 = cfg.get("tau_action", 0.05)?;
    let eps_a: f64 = cfg.get("eps_i_action", 0.1)?;
    let hd = &g.gamma[0] * (g.slash(pa) - DMatrix::identity(4, 4) * complex_mass(m_a, eps_a));
    let sd = four.quadratic(&hd)?;
    let prop = dirac_mode_propagator(pa, m_a, tau_a, eps_a)? * &g.gamma[0];
    for i in 0..4 {
        for j in 0..4 {
            let ins = [four.annihilator(i)?, four.creator(j)?];
            let v = parity_weighted_trace(four, &sd, tau_a, &ins)?;
            out.push(Case::new(format!("action-{i}-{j}"), v, prop[(i, j)], tol_d));
        }
    }
    Ok(out)
}

/// tol.cycle = 1e-12
fn fswap_cycle(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let n: usize = cfg.get("n", 3)?;
    let m: usize = cfg.get("m", 2)?;
    let tol = cfg.tolerance("cycle", 1e-12)?;
    let mut out = Vec::new();

    let printed = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let f = fswap();
    for (r, row) in printed.iter().enumerate() {
        for (col, &v) in row.iter().enumerate() {
            out.push(Case::new(format!("fswap-{r}{col}"), f.get(r, col), c(v, 0.0), 0.0));
        }
    }
    let sq = &f * &f;
    out.push(Case::real("fswap-square", sq.max_abs_diff(&Operator::diag(&[1.0, -1.0, -1.0, 1.0])), 0.0, tol));
    let pair = FermionLayout::new(2, 1)?;
    out.push(Case::real("fswap-is-pair-cycle", fermionic_cycle(pair).max_abs_diff(&f), 0.0, tol));

    let layout = FermionLayout::new(n, m)?;
    let u = fermionic_cycle(layout);
    out.push(Case::real("shift", cycle_shift_defect(layout, &u)?, 0.0, tol).input("n", n).input("m", m));
    out.push(Case::real("rotations", u.max_abs_diff(&cycle_from_rotations(layout)?), 0.0, tol));
    out.push(Case::real("parity", u.commutator(&layout.parity()).norm(), 0.0, tol));
    out.push(Case::real("unitary", u.unitarity_defect(), 0.0, tol));

    // Boundary sign read off from U c_{N−1,0} U† = s·c_{0,0}.
    let last = layout.annihilator(layout.index(n - 1, 0))?;
    let first = layout.annihilator(layout.index(0, 0))?;
    let moved = &(&u * &last) * &u.adjoint();
    let s = (&first.adjoint() * &moved).trace() / (&first.adjoint() * &first).trace();
    out.push(Case::new("boundary-sign", s, c(cycle_boundary_sign(n), 0.0), tol));

    let total = layout.total_modes();
    let mut worst = 0.0f64;
    let id = Operator::identity(layout.parity().dims());
    for a in 0..total {
        let ca = layout.annihilator(a)?;
        for b in 0..total {
            let cb = layout.annihilator(b)?;
            let expect = if a == b { id.clone() } else { Operator::zeros(id.dims()) };
            worst = worst.max(ca.anticommutator(&cb.adjoint()).max_abs_diff(&expect));
            worst = worst.max(ca.anticommutator(&cb).norm());
        }
    }
    out.push(Case::real("anticommutators", worst, 0.0, tol));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment_is_an_error() {
        let cfg = ExperimentConfig::new("no-such-thing");
        assert!(matches!(run(&cfg), Err(LabError::UnknownExperiment(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let mut cfg = ExperimentConfig::new("trace-theorem");
        cfg.set("d", 3).set("n_max_slices", 9);
        assert!(matches!(run(&cfg), Err(LabError::CapExceeded { .. })));
    }

    #[test]
    fn trace_theorem_defaults_pass() {
        let r = run(&ExperimentConfig::new("trace-theorem")).unwrap();
        assert!(r.summary.all_pass);
        assert!(r.summary.max_err < 1e-10);
        assert_eq!(r.cases.len(), 50);
    }
}
