use qvac::bogoliubov::{
    dressed_from_coproducts, dressed_ops_closed, dressed_ops_conjugated, generator, PairSpec, SqueezeSet,
};
use qvac::entangle::{
    bell_structure_check, sector_entanglement_entropy, sector_entropy_closed, wn_analytic, wn_from_state,
};
use qvac::fock::{commutator, expectation, FockSpace, ModeId, OpExpr, Operator, Sector, StateVector};
use qvac::hopf::{casimir, casimir_q, q_number, sector_isolation_matrix, DoubledSpace, Ladder, QParam, H_FUNDAMENTAL};
use qvac::thermo::{
    bose_einstein, entropy_operator, free_energy, hamiltonian_eps, hamiltonian_sector, mode_entropy,
    stationary_epsilon, total_entropy_expr, ThermoParams,
};
use qvac::vacuum::{
    dressed_number_expectation, dressed_number_on, epsilon_vacuum, overlap_vacua, reconstruct_minkowski,
    required_cutoff,
};
use rayon::prelude::*;

use crate::config::{Experiment, RunConfig};
use crate::error::Result;
use crate::report::{Cell, Invariant, Manifest, ReportRecord};

/// Operator identities on the safe subspace.
pub const OPERATOR_TOL: f64 = 1e-10;
/// Conjugation, annihilation and reconstruction checks.
pub const STATE_TOL: f64 = 1e-8;
/// Stationary point against Bose–Einstein.
pub const STATIONARITY_TOL: f64 = 1e-8;
/// Dressed number expectation and entropy cross-checks.
pub const EXPECTATION_TOL: f64 = 1e-6;
/// Closed-form W_n and overlap values.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Fitted overlap decay rate.
pub const SLOPE_TOL: f64 = 1e-6;

/// Named checks with the truncation leak that accompanied each one.
#[derive(Default)]
struct Checks(Vec<(Invariant, f64)>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, value: f64, tol: f64, leaked: f64) {
        self.0.push((Invariant::at_most(name, value, tol), leaked));
    }

    fn into_report(self, experiment: Experiment, cfg: &RunConfig) -> Result<ReportRecord> {
        let rows = self
            .0
            .iter()
            .map(|(inv, leak)| {
                vec![inv.name.as_str().into(), inv.value.into(), inv.tolerance.into(), (*leak).into(), inv.pass.into()]
            })
            .collect();
        record(experiment, cfg, columns(experiment), rows, self.0.into_iter().map(|(inv, _)| inv).collect())
    }
}

fn record(
    experiment: Experiment,
    cfg: &RunConfig,
    columns: &[&str],
    rows: Vec<Vec<Cell>>,
    invariants: Vec<Invariant>,
) -> Result<ReportRecord> {
    Ok(ReportRecord {
        experiment: experiment.name().into(),
        config: cfg.clone(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        invariants,
        manifest: Manifest::for_config(cfg)?,
    })
}

/// Column schema of each experiment's CSV report.
pub fn columns(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::ThermoScan => &[
            "beta",
            "omega",
            "epsilon_star",
            "sinh2_epsilon_star",
            "bose_einstein",
            "abs_delta",
            "dressed_number",
            "dressed_number_delta",
            "free_energy",
            "pass",
        ],
        Experiment::OverlapScaling => &["n_pairs", "overlap", "closed_form", "abs_delta", "pass"],
        Experiment::VerifyAll => &["experiment", "check", "value", "tolerance", "pass"],
        _ => &["check", "value", "tolerance", "leaked_norm", "pass"],
    }
}

pub fn run_experiment(experiment: Experiment, cfg: &RunConfig) -> Result<ReportRecord> {
    cfg.check_for(experiment)?;
    match experiment {
        Experiment::AlgebraCheck => algebra_check(cfg),
        Experiment::BogoliubovCheck => bogoliubov_check(cfg),
        Experiment::VacuumCheck => vacuum_check(cfg),
        Experiment::ThermoScan => thermo_scan(cfg),
        Experiment::EntangleReport => entangle_report(cfg),
        Experiment::OverlapScaling => overlap_scaling(cfg),
        Experiment::VerifyAll => verify_all(cfg),
    }
}

fn algebra_check(cfg: &RunConfig) -> Result<ReportRecord> {
    let c = &cfg.algebra;
    let mode = ModeId::particle(0, Sector::Plus);
    let s = FockSpace::uniform(vec![mode], c.cutoff)?;
    let mask = s.safe_mask(c.margin, None)?;
    let a = Operator::annihilation(&s, &mode)?;
    let ad = Operator::creation(&s, &mode)?;
    let n = Operator::number(&s, &mode)?;
    let mut ck = Checks::default();
    ck.push("ccr [a,a+]=1", commutator(&a, &ad)?.max_abs_diff_on(&Operator::identity(&s), &mask)?, OPERATOR_TOL, 0.0);
    ck.push("[N,a]=-a", commutator(&n, &a)?.max_abs_diff_on(&a.scale_real(-1.0), &mask)?, OPERATOR_TOL, 0.0);
    ck.push("[N,a+]=a+", commutator(&n, &ad)?.max_abs_diff_on(&ad, &mask)?, OPERATOR_TOL, 0.0);
    ck.push("creation is the adjoint", ad.max_abs_diff(&a.adjoint())?, 0.0, 0.0);
    let cas = casimir(&s)?;
    ck.push("casimir vanishes", cas.max_abs_on(&mask), OPERATOR_TOL, 0.0);
    ck.push("casimir is central", commutator(&cas, &a)?.max_abs_on(&mask), OPERATOR_TOL, 0.0);

    let d = DoubledSpace::new(&s)?;
    let dmask = d.space().safe_mask(c.margin, None)?;
    for &q in c.q.values() {
        let qp = QParam::from_q(q)?;
        ck.push(format!("casimir_q equals casimir q={q}"), casimir_q(&s, qp)?.max_abs_diff(&cas)?, OPERATOR_TOL, 0.0);
        let dq = d.coproduct_deformed(qp, &mode, Ladder::Annihilation)?;
        let dq_dag = d.coproduct_deformed(qp, &mode, Ladder::Creation)?;
        ck.push(format!("deformed coproduct adjoint q={q}"), dq_dag.max_abs_diff(&dq.adjoint())?, 0.0, 0.0);
        let expect = Operator::identity(d.space()).scale_real(q_number(2.0, qp));
        ck.push(
            format!("homomorphism [2]_q q={q}"),
            commutator(&dq, &dq_dag)?.max_abs_diff_on(&expect, &dmask)?,
            OPERATOR_TOL,
            0.0,
        );
    }
    let undeformed = d.coproduct_deformed(QParam::from_q(1.0)?, &mode, Ladder::Annihilation)?;
    ck.push("q=1 gives the plain coproduct", undeformed.max_abs_diff(&d.coproduct_plain(&a)?)?, 0.0, 0.0);
    let cross = commutator(&d.lift(&a, Sector::Plus)?, &d.lift(&ad, Sector::Minus)?)?;
    ck.push("sectors commute", cross.max_abs(), 0.0, 0.0);
    let h = d.coproduct_scalar(H_FUNDAMENTAL);
    ck.push("coproduct of H is 1", h.max_abs_diff(&Operator::identity(d.space()))?, 0.0, 0.0);
    ck.into_report(Experiment::AlgebraCheck, cfg)
}

fn bogoliubov_check(cfg: &RunConfig) -> Result<ReportRecord> {
    let c = &cfg.bogoliubov;
    let mut ck = Checks::default();
    let base = FockSpace::uniform(
        vec![ModeId::particle(0, Sector::Plus), ModeId::antiparticle(0, Sector::Plus)],
        c.bridge_cutoff,
    )?;
    let doubled = DoubledSpace::new(&base)?;
    for &eps in c.bridge_epsilon.values() {
        let iso = sector_isolation_matrix(QParam::from_epsilon(eps)?)?;
        ck.push(
            format!("isolation determinant eps={eps}"),
            (iso.determinant - 2.0 * (2.0 * eps).sinh()).abs(),
            1e-12,
            0.0,
        );
        for sector in [Sector::Plus, Sector::Minus] {
            let pair = PairSpec::new(0, 0, sector, eps);
            let bridged = dressed_from_coproducts(&doubled, &pair)?;
            let closed = &dressed_ops_closed(doubled.space(), &SqueezeSet::new(vec![pair])?)?[0];
            let gap = bridged.d.max_abs_diff(&closed.d)?.max(bridged.dbar_dag.max_abs_diff(&closed.dbar_dag)?);
            let sign = if sector == Sector::Plus { '+' } else { '-' };
            ck.push(format!("coproduct bridge eps={eps} sector={sign}"), gap, OPERATOR_TOL, 0.0);
        }
    }
    let singular = dressed_from_coproducts(&doubled, &PairSpec::new(0, 0, Sector::Plus, 0.0));
    let rejected = matches!(singular, Err(qvac::Error::Validation(_)));
    ck.push("singular isolation rejected eps=0", if rejected { 0.0 } else { 1.0 }, 0.0, 0.0);

    let eps = c.epsilon;
    let set = SqueezeSet::single(0, eps);
    let pair = set.pairs()[0];
    let s = set.space(c.cutoff)?;
    let mask = s.safe_mask(c.margin, None)?;
    let g = generator(&s, &set)?;
    ck.push(format!("generator anti-hermitian eps={eps}"), g.anti_hermiticity_defect(), 1e-14, 0.0);
    let dressed = pair.dressed();
    for (label, op, closed) in
        [("d", OpExpr::a(pair.d_mode()), &dressed.d), ("dbar+", OpExpr::a_dag(pair.dbar_mode()), &dressed.dbar_dag)]
    {
        let (conj, rep) = dressed_ops_conjugated(&s, &set, &op, &mask, cfg.tolerance)?;
        ck.push(
            format!("conjugation {label} eps={eps}"),
            conj.max_abs_diff_on(&closed.build(&s)?, &mask)?,
            STATE_TOL,
            rep.leaked_norm,
        );
    }
    let ops = &dressed_ops_closed(&s, &set)?[0];
    ck.push(
        format!("dressed ccr eps={eps}"),
        commutator(&ops.d, &ops.d_dag())?.max_abs_diff_on(&Operator::identity(&s), &mask)?,
        OPERATOR_TOL,
        0.0,
    );
    ck.push(
        format!("dressed modes commute eps={eps}"),
        commutator(&ops.d, &ops.dbar())?.max_abs_on(&mask),
        OPERATOR_TOL,
        0.0,
    );
    ck.into_report(Experiment::BogoliubovCheck, cfg)
}

fn vacuum_check(cfg: &RunConfig) -> Result<ReportRecord> {
    let mut ck = Checks::default();
    let cutoff = cfg.cutoff();
    for m in &cfg.momenta {
        let (p, eps) = (m.label, m.epsilon);
        let set = SqueezeSet::momentum(p, eps);
        let space = set.space(cutoff)?;
        let vp = epsilon_vacuum(&space, &set, cfg.tolerance)?;
        let leak = vp.truncation.leaked_norm;
        ck.push(format!("truncation leak p={p}"), leak, vp.leak_budget(), leak);
        ck.push(format!("annihilation d(eps)|0(eps)> p={p}"), vp.max_annihilation_residual()?, STATE_TOL, leak);
        let rec = reconstruct_minkowski(&vp)?;
        ck.push(format!("reconstruction infidelity p={p}"), 1.0 - rec.fidelity, STATE_TOL, leak);
        ck.push(format!("normalization Z=cosh^2 p={p}"), (rec.z - eps.cosh().powi(2)).abs(), 1e-12, leak);
        let mut worst: f64 = 0.0;
        for i in 0..set.len() {
            let (nd, nb) = dressed_number_expectation(&vp, i)?;
            let s2 = eps.sinh().powi(2);
            worst = worst.max((nd - s2).abs()).max((nb - s2).abs());
        }
        ck.push(format!("dressed numbers sinh^2 p={p}"), worst, OPERATOR_TOL, 0.0);

        let hs = set.space(cfg.vacuum.hamiltonian_cutoff.max(cutoff))?;
        let hv = epsilon_vacuum(&hs, &set, cfg.tolerance)?;
        let omega = m.omega;
        let h = hamiltonian_eps(&hs, &set, |_| omega)?;
        ck.push(
            format!("H_eps annihilates |0(eps)> p={p}"),
            h.apply(&hv.dressed)?.norm(),
            STATE_TOL,
            hv.truncation.leaked_norm,
        );
        let split = hamiltonian_sector(&hs, &set, Sector::Plus, |_| omega)?.sub(&hamiltonian_sector(
            &hs,
            &set,
            Sector::Minus,
            |_| omega,
        )?)?;
        ck.push(format!("H_eps = H+ - H- p={p}"), h.max_abs_diff(&split)?, 1e-12, 0.0);
    }
    ck.into_report(Experiment::VacuumCheck, cfg)
}

struct ThermoRow {
    beta: f64,
    omega: f64,
    eps: f64,
    sinh2: f64,
    n_be: f64,
    number: f64,
    free_energy: f64,
}

fn thermo_point(beta: f64, omega: f64) -> Result<ThermoRow> {
    let tp = ThermoParams::new(beta, omega)?;
    let eps = stationary_epsilon(tp)?;
    let set = SqueezeSet::single(0, eps);
    let space = set.space(2)?;
    let (number, _) = dressed_number_on(&StateVector::vacuum(&space), &set.pairs()[0])?;
    Ok(ThermoRow {
        beta,
        omega,
        eps,
        sinh2: eps.sinh().powi(2),
        n_be: bose_einstein(tp)?,
        number,
        free_energy: free_energy(eps, tp)?,
    })
}

fn thermo_scan(cfg: &RunConfig) -> Result<ReportRecord> {
    let points: Vec<(f64, f64)> =
        cfg.thermo.beta.values().iter().flat_map(|&b| cfg.thermo.omega.values().iter().map(move |&w| (b, w))).collect();
    // rayon keeps input order in the collected vector
    let results: Vec<ThermoRow> = points.par_iter().map(|&(b, w)| thermo_point(b, w)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    for r in results {
        let delta = (r.sinh2 - r.n_be).abs();
        let number_delta = (r.number - r.n_be).abs();
        let tag = format!("beta={} omega={}", r.beta, r.omega);
        let stat = Invariant::at_most(format!("stationarity {tag}"), delta, STATIONARITY_TOL);
        let num = Invariant::at_most(format!("dressed number {tag}"), number_delta, EXPECTATION_TOL);
        rows.push(vec![
            r.beta.into(),
            r.omega.into(),
            r.eps.into(),
            r.sinh2.into(),
            r.n_be.into(),
            delta.into(),
            r.number.into(),
            number_delta.into(),
            r.free_energy.into(),
            (stat.pass && num.pass).into(),
        ]);
        invariants.push(stat);
        invariants.push(num);
    }
    record(Experiment::ThermoScan, cfg, columns(Experiment::ThermoScan), rows, invariants)
}

fn entangle_report(cfg: &RunConfig) -> Result<ReportRecord> {
    let mut ck = Checks::default();
    let tol = cfg.tolerance;
    let e = &cfg.entangle;
    for &eps in e.epsilon.values() {
        let set = SqueezeSet::single(0, eps);
        let space = set.space(required_cutoff(eps, tol))?;
        let vp = epsilon_vacuum(&space, &set, tol)?;
        let leak = vp.truncation.leaked_norm;
        let closed = mode_entropy(eps);
        let reduced = sector_entanglement_entropy(&vp)?;
        let operator = expectation(&entropy_operator(&space, &set, Sector::Plus)?, &vp.minkowski)?.re;
        ck.push(format!("entropy operator vs closed eps={eps}"), (operator - closed).abs(), EXPECTATION_TOL, leak);
        ck.push(format!("entropy reduced vs closed eps={eps}"), (reduced - closed).abs(), EXPECTATION_TOL, leak);
        ck.push(format!("entropy operator vs reduced eps={eps}"), (operator - reduced).abs(), EXPECTATION_TOL, leak);

        let t2 = eps.tanh().powi(2);
        let ana = wn_analytic(&set, e.max_n);
        let w = &ana.aggregated;
        let ratio = w.windows(2).map(|p| (p[1] / p[0] - t2).abs()).fold(0.0, f64::max);
        ck.push(format!("W_n ratio tanh^2 eps={eps}"), ratio, CLOSED_FORM_TOL, 0.0);
        let partial: f64 = w.iter().sum();
        let expect = 1.0 - t2.powi(e.max_n as i32 + 1);
        ck.push(format!("W_n partial sum n<={} eps={eps}", e.max_n), (partial - expect).abs(), CLOSED_FORM_TOL, 0.0);
        let increasing = w.windows(2).filter(|p| p[1] > p[0]).count();
        ck.push(format!("W_n decreasing eps={eps}"), increasing as f64, 0.0, 0.0);
        let emp = wn_from_state(&vp)?;
        let dev = w.iter().zip(&emp.aggregated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ck.push(format!("W_n empirical vs analytic eps={eps}"), dev, STATE_TOL, leak);
    }

    let cutoff = cfg.cutoff();
    for m in &cfg.momenta {
        let (p, eps) = (m.label, m.epsilon);
        let set = SqueezeSet::momentum(p, eps);
        let vp = epsilon_vacuum(&set.space(cutoff)?, &set, tol)?;
        let leak = vp.truncation.leaked_norm;
        let gap = (sector_entanglement_entropy(&vp)? - sector_entropy_closed(&set)).abs();
        ck.push(format!("sector entropy p={p}"), gap, EXPECTATION_TOL, leak);
        ck.push(format!("bell infidelity n=1 p={p}"), 1.0 - bell_structure_check(&vp)?, STATE_TOL, leak);
        let emp = wn_from_state(&vp)?;
        let ana = wn_analytic(&set, emp.aggregated.len().saturating_sub(1));
        let dev = emp
            .configurations
            .iter()
            .map(|(k, w)| (w - ana.configurations.get(k).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max);
        ck.push(format!("W_n configurations empirical vs analytic p={p}"), dev, STATE_TOL, leak);
    }

    let eps = e.conjugation_epsilon;
    let set = SqueezeSet::momentum(0, eps);
    let space = set.space(e.conjugation_cutoff)?;
    let mask = space.safe_mask(e.conjugation_margin, None)?;
    let s_total = total_entropy_expr(&set)?;
    let (conj, rep) = dressed_ops_conjugated(&space, &set, &s_total, &mask, tol)?;
    ck.push(
        format!("entropy operator invariant under G eps={eps}"),
        conj.max_abs_diff_on(&s_total.build(&space)?, &mask)?,
        STATE_TOL,
        rep.leaked_norm,
    );
    ck.into_report(Experiment::EntangleReport, cfg)
}

fn overlap_scaling(cfg: &RunConfig) -> Result<ReportRecord> {
    let o = &cfg.overlap;
    let cutoff = required_cutoff(o.epsilon.abs().max(o.epsilon_prime.abs()), cfg.tolerance);
    let values = overlap_vacua(o.epsilon, o.epsilon_prime, o.n_pairs, cutoff, cfg.tolerance)?;
    let per_pair = 1.0 / (o.epsilon - o.epsilon_prime).cosh();
    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let k = i + 1;
        let closed = per_pair.powi(k as i32);
        let inv = Invariant::at_most(format!("overlap k={k}"), (v - closed).abs(), CLOSED_FORM_TOL);
        rows.push(vec![k.into(), v.into(), closed.into(), inv.value.into(), inv.pass.into()]);
        invariants.push(inv);
    }
    let slope = log_slope(&values);
    invariants.push(Invariant::at_most(
        "log slope = -ln cosh(eps - eps')",
        (slope + per_pair.ln().abs()).abs(),
        SLOPE_TOL,
    ));
    record(Experiment::OverlapScaling, cfg, columns(Experiment::OverlapScaling), rows, invariants)
}

/// Least-squares slope of `ln values[k-1]` against `k`.
pub fn log_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let xs: Vec<f64> = (1..=values.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn verify_all(cfg: &RunConfig) -> Result<ReportRecord> {
    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    for exp in Experiment::ALL.into_iter().filter(|e| *e != Experiment::VerifyAll) {
        let found = match run_experiment(exp, cfg) {
            Ok(r) => r.invariants,
            Err(crate::error::CliError::Core(err @ qvac::Error::Numeric { .. })) => {
                vec![Invariant::at_most(format!("run failed: {err}"), 1.0, 0.0)]
            }
            Err(other) => return Err(other),
        };
        for inv in found {
            rows.push(vec![
                exp.name().into(),
                inv.name.as_str().into(),
                inv.value.into(),
                inv.tolerance.into(),
                inv.pass.into(),
            ]);
            invariants.push(Invariant { name: format!("{exp}: {}", inv.name), ..inv });
        }
    }
    record(Experiment::VerifyAll, cfg, columns(Experiment::VerifyAll), rows, invariants)
}
