//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use qvac::bogoliubov::{dressed_from_coproducts, dressed_ops_closed, dressed_ops_conjugated, PairSpec, SqueezeSet};
use qvac::entangle::{bell_structure_check, sector_entanglement_entropy, wn_analytic, wn_from_state};
use qvac::fock::{
    commutator, expectation, partial_trace, von_neumann_entropy, FockSpace, ModeId, OpExpr, Operator, Sector,
    StateVector,
};
use qvac::hopf::{casimir, casimir_q, q_number, DoubledSpace, Ladder, QParam};
use qvac::thermo::{
    bose_einstein, entropy_operator, hamiltonian_eps, hamiltonian_sector, mode_entropy, stationary_epsilon,
    total_entropy_expr, ThermoParams,
};
use qvac::vacuum::{
    dressed_number_on, epsilon_vacuum, minkowski_in_dressed_basis, overlap_vacua, reconstruct_minkowski,
    required_cutoff,
};
use qvac_cli::experiments::log_slope;

const TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{} [{:.2} s]", out.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail = format!("{} exceeds {:.0} s", out.detail, limit.as_secs_f64());
        }
    }
    out
}

fn algebra_suite() -> Outcome {
    let m = ModeId::particle(0, Sector::Plus);
    let s = FockSpace::uniform(vec![m], 16).unwrap();
    let mask = s.safe_mask(2, None).unwrap();
    let a = Operator::annihilation(&s, &m).unwrap();
    let ad = Operator::creation(&s, &m).unwrap();
    let n = Operator::number(&s, &m).unwrap();
    let ccr = commutator(&a, &ad).unwrap().max_abs_diff_on(&Operator::identity(&s), &mask).unwrap();
    let na = commutator(&n, &a).unwrap().max_abs_diff_on(&a.scale_real(-1.0), &mask).unwrap();
    let nad = commutator(&n, &ad).unwrap().max_abs_diff_on(&ad, &mask).unwrap();
    let c = casimir(&s).unwrap();
    let mut cas = c.max_abs_on(&mask);
    for q in [0.5, 2.0, std::f64::consts::E] {
        cas = cas.max(casimir_q(&s, QParam::from_q(q).unwrap()).unwrap().max_abs_on(&mask));
    }
    let worst = ccr.max(na).max(nad).max(cas);
    check(worst < TOL, format!("max identity defect {worst:e} at cutoff 16"))
}

fn coproduct_homomorphism() -> Outcome {
    let m = ModeId::particle(0, Sector::Plus);
    let d = DoubledSpace::new(&FockSpace::uniform(vec![m], 8).unwrap()).unwrap();
    let mask = d.space().safe_mask(2, None).unwrap();
    let mut worst: f64 = 0.0;
    for q in [0.5, 1.0, 2.0, std::f64::consts::E] {
        let q = QParam::from_q(q).unwrap();
        let a = d.coproduct_deformed(q, &m, Ladder::Annihilation).unwrap();
        let ad = d.coproduct_deformed(q, &m, Ladder::Creation).unwrap();
        let expect = Operator::identity(d.space()).scale_real(q_number(2.0, q));
        worst = worst.max(commutator(&a, &ad).unwrap().max_abs_diff_on(&expect, &mask).unwrap());
    }
    let plain = d.coproduct_plain(&Operator::annihilation(d.base(), &m).unwrap()).unwrap();
    let q1 = d.coproduct_deformed(QParam::from_q(1.0).unwrap(), &m, Ladder::Annihilation).unwrap();
    let exact = q1 == plain;
    check(worst < TOL && exact, format!("max defect {worst:e}; q=1 equals plain coproduct: {exact}"))
}

fn bogoliubov_bridge() -> Outcome {
    let base =
        FockSpace::uniform(vec![ModeId::particle(0, Sector::Plus), ModeId::antiparticle(0, Sector::Plus)], 3).unwrap();
    let doubled = DoubledSpace::new(&base).unwrap();
    let mut worst: f64 = 0.0;
    for eps in [0.1, 0.5] {
        for sector in [Sector::Plus, Sector::Minus] {
            let pair = PairSpec::new(0, 0, sector, eps);
            let bridged = dressed_from_coproducts(&doubled, &pair).unwrap();
            let closed = &dressed_ops_closed(doubled.space(), &SqueezeSet::new(vec![pair]).unwrap()).unwrap()[0];
            worst = worst
                .max(bridged.d.max_abs_diff(&closed.d).unwrap())
                .max(bridged.dbar_dag.max_abs_diff(&closed.dbar_dag).unwrap());
        }
    }
    let rejected = matches!(
        dressed_from_coproducts(&doubled, &PairSpec::new(0, 0, Sector::Plus, 0.0)),
        Err(qvac::Error::Validation(_))
    );
    check(worst < TOL && rejected, format!("max entry gap {worst:e}; eps=0 rejected: {rejected}"))
}

fn conjugation_oracle() -> Outcome {
    let set = SqueezeSet::single(0, 0.3);
    let s = set.space(20).unwrap();
    let mask = s.safe_mask(4, None).unwrap();
    let p = set.pairs()[0];
    let (conj, _) = dressed_ops_conjugated(&s, &set, &OpExpr::a(p.d_mode()), &mask, TOL).unwrap();
    let gap = conj.max_abs_diff_on(&p.dressed().d.build(&s).unwrap(), &mask).unwrap();
    check(gap < 1e-8, format!("|G d G^-1 - closed form| = {gap:e}"))
}

fn vacuum_suite() -> Outcome {
    let eps = 0.3;
    let set = SqueezeSet::momentum(0, eps);
    let space = set.space(16).unwrap();
    let vp = epsilon_vacuum(&space, &set, TOL).unwrap();
    let residual = vp.max_annihilation_residual().unwrap();
    let rec = reconstruct_minkowski(&vp).unwrap();
    let z_gap = (rec.z - eps.cosh().powi(2)).abs();
    check(
        space.dim() == 83521 && residual < 1e-8 && rec.fidelity > 1.0 - 1e-8 && z_gap < 1e-12,
        format!("dim {}, residual {residual:e}, fidelity 1-{:e}, Z gap {z_gap:e}", space.dim(), 1.0 - rec.fidelity),
    )
}

fn thermal_law() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_number: f64 = 0.0;
    let mut points = 0;
    for beta in [0.2, 0.5, 1.0, 2.0, 5.0] {
        for omega in [0.5, 1.0, 2.0] {
            let tp = ThermoParams::new(beta, omega).unwrap();
            let eps = stationary_epsilon(tp).unwrap();
            let n_be = bose_einstein(tp).unwrap();
            worst = worst.max((eps.sinh().powi(2) - n_be).abs());
            let set = SqueezeSet::single(0, eps);
            let vac = StateVector::vacuum(&set.space(2).unwrap());
            let (nd, _) = dressed_number_on(&vac, &set.pairs()[0]).unwrap();
            worst_number = worst_number.max((nd - n_be).abs());
            points += 1;
        }
    }
    check(
        points == 15 && worst < 1e-8 && worst_number < 1e-6,
        format!("{points} points, max |sinh^2 eps* - n_BE| {worst:e}, dressed number gap {worst_number:e}"),
    )
}

fn entropy_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for eps in [0.2, 0.5, 1.0] {
        let set = SqueezeSet::single(0, eps);
        let space = set.space(required_cutoff(eps, TOL)).unwrap();
        let vp = epsilon_vacuum(&space, &set, TOL).unwrap();
        let closed = mode_entropy(eps);
        let op = expectation(&entropy_operator(&space, &set, Sector::Plus).unwrap(), &vp.minkowski).unwrap().re;
        let (psi, _) = minkowski_in_dressed_basis(&space, &set, TOL).unwrap();
        let rho = partial_trace(&psi.normalized(), &[set.pairs()[0].d_mode()]).unwrap();
        let vn = von_neumann_entropy(&rho).unwrap();
        let reduced = sector_entanglement_entropy(&vp).unwrap();
        for (x, y) in [(op, vn), (vn, closed), (op, closed), (reduced, closed)] {
            worst = worst.max((x - y).abs());
        }
    }
    let set = SqueezeSet::momentum(0, 0.3);
    let space = set.space(6).unwrap();
    let mask = space.safe_mask(4, None).unwrap();
    let s_total = total_entropy_expr(&set).unwrap();
    let (conj, _) = dressed_ops_conjugated(&space, &set, &s_total, &mask, TOL).unwrap();
    let invariance = conj.max_abs_diff_on(&s_total.build(&space).unwrap(), &mask).unwrap();
    check(
        worst < 1e-6 && invariance < 1e-8,
        format!("max pairwise entropy gap {worst:e}, S conjugation defect {invariance:e}"),
    )
}

fn hamiltonian_contract() -> Outcome {
    let set = SqueezeSet::momentum(0, 0.3);
    let space = set.space(20).unwrap();
    let vp = epsilon_vacuum(&space, &set, TOL).unwrap();
    let h = hamiltonian_eps(&space, &set, |_| 1.0).unwrap();
    let residual = h.apply(&vp.dressed).unwrap().norm();
    let plus = hamiltonian_sector(&space, &set, Sector::Plus, |_| 1.0).unwrap();
    let minus = hamiltonian_sector(&space, &set, Sector::Minus, |_| 1.0).unwrap();
    let split = h.max_abs_diff(&plus.sub(&minus).unwrap()).unwrap();
    check(residual < 1e-8 && split < 1e-12, format!("|H_eps|0(eps)>| = {residual:e}, |H_eps - (H+ - H-)| = {split:e}"))
}

fn entanglement_suite() -> Outcome {
    let eps: f64 = 0.5;
    let t2 = eps.tanh().powi(2);
    let single = SqueezeSet::single(0, eps);
    let n_max = 12;
    let ana = wn_analytic(&single, n_max);
    let w = &ana.aggregated;
    let ratio = w.windows(2).map(|p| (p[1] / p[0] - t2).abs()).fold(0.0, f64::max);
    let sum_gap = (w.iter().sum::<f64>() - (1.0 - t2.powi(n_max as i32 + 1))).abs();
    let space = single.space(required_cutoff(eps, TOL)).unwrap();
    let vp = epsilon_vacuum(&space, &single, TOL).unwrap();
    let emp = wn_from_state(&vp).unwrap();
    let emp_gap = w.iter().zip(&emp.aggregated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let both = SqueezeSet::momentum(0, eps);
    let vp2 = epsilon_vacuum(&both.space(required_cutoff(eps, TOL)).unwrap(), &both, TOL).unwrap();
    let bell = bell_structure_check(&vp2).unwrap();
    check(
        ratio < TOL && sum_gap < TOL && emp_gap < 1e-8 && (bell - 1.0).abs() < 1e-8,
        format!(
            "ratio gap {ratio:e}, partial sum gap {sum_gap:e}, empirical gap {emp_gap:e}, Bell fidelity 1-{:e}",
            1.0 - bell
        ),
    )
}

fn inequivalence_proxy() -> Outcome {
    let (eps, eps_prime, k) = (1.0f64, 0.0, 10);
    let values = overlap_vacua(eps, eps_prime, k, required_cutoff(eps, TOL), TOL).unwrap();
    let per_pair = 1.0 / (eps - eps_prime).cosh();
    let worst = values.iter().enumerate().map(|(i, v)| (v - per_pair.powi(i as i32 + 1)).abs()).fold(0.0, f64::max);
    let slope = log_slope(&values);
    let slope_gap = (slope + (eps - eps_prime).cosh().ln()).abs();
    check(worst < TOL && slope_gap < 1e-6, format!("max overlap gap {worst:e}, slope {slope} (gap {slope_gap:e})"))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_qvac");
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let root = std::env::temp_dir().join(format!("qvac-acceptance-{}", std::process::id()));
    let mut outputs = Vec::new();
    let mut codes = Vec::new();
    for run in ["a", "b"] {
        let dir = root.join(run);
        let status = Command::new(bin)
            .args(["verify-all", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&dir)
            .output()
            .expect("run qvac");
        codes.push(status.status.code());
        outputs.push(std::fs::read(dir.join("verify-all.csv")).unwrap_or_default());
    }
    let _ = std::fs::remove_dir_all(&root);
    let identical = !outputs[0].is_empty() && outputs[0] == outputs[1];
    check(
        identical && codes.iter().all(|c| *c == Some(0)),
        format!("exit codes {codes:?}, byte-identical reports: {identical}"),
    )
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<(&str, Outcome)> = vec![
        ("algebra suite", timed(secs(5), algebra_suite)),
        ("deformed coproduct homomorphism", timed(None, coproduct_homomorphism)),
        ("coproduct to Bogoliubov bridge", timed(None, bogoliubov_bridge)),
        ("conjugation oracle", timed(secs(30), conjugation_oracle)),
        ("vacuum suite", timed(secs(120), vacuum_suite)),
        ("thermal variational law", timed(secs(10), thermal_law)),
        ("entropy triple consistency", timed(None, entropy_consistency)),
        ("H_eps contract", timed(None, hamiltonian_contract)),
        ("entanglement suite", timed(None, entanglement_suite)),
        ("inequivalence proxy", timed(None, inequivalence_proxy)),
        ("determinism", timed(None, determinism)),
    ];
    for (i, (name, out)) in criteria.iter().enumerate() {
        println!("criterion {:>2} {}: {} - {}", i + 1, if out.pass { "PASS" } else { "FAIL" }, name, out.detail);
    }
    let failed: Vec<usize> = criteria.iter().enumerate().filter(|(_, (_, o))| !o.pass).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
