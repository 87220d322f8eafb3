//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use siegel_core::eisenstein::{eisenstein_qexp, local_density_coeff};
use siegel_core::exactnum::residue_mod_pm;
use siegel_core::fourier::window_indices;
use siegel_core::genus::partition_into_genera;
use siegel_core::lambda::{automorphism_count, enumerate_classes, enumerate_classes_scaled, enumerate_forms};
use siegel_core::padic::{
    audit_singular, candidate_genera, direct_limit_coefficient, empirical_limit, fit_and_verify, FitConfig,
};
use siegel_core::theta::{genus_theta, theta_series, verify_rank_decomposition};
use siegel_core::{HalfIntegralMatrix, QExpansion, Rational, VerificationReport, WeightSequence, WeightTarget};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn form(text: &str) -> HalfIntegralMatrix {
    HalfIntegralMatrix::parse(text).expect("valid matrix text")
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// Independent oracles.

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = +1/2`) by the Akiyama–Tanigawa transform.
fn bernoulli_table(n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut a: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(ratio(1, m as i64 + 1));
        for j in (1..=m).rev() {
            a[j - 1] = Rational::from_integer(BigInt::from(j)) * (&a[j - 1] - &a[j]);
        }
        out.push(a[0].clone());
    }
    out
}

/// `Σ_{d | t} d^e` by trial division.
fn divisor_power_sum(e: u32, t: u64) -> BigInt {
    (1..=t).filter(|d| t.is_multiple_of(*d)).map(|d| BigInt::from(d).pow(e)).sum()
}

fn box_automorphisms(s: &HalfIntegralMatrix) -> u64 {
    let n = s.size();
    let g: Vec<Vec<i64>> = s.rows();
    let det = s.det2() as i64;
    let adj_diag: Vec<i64> = (0..n)
        .map(|i| {
            let idx: Vec<usize> = (0..n).filter(|&x| x != i).collect();
            match idx.len() {
                0 => 1,
                1 => g[idx[0]][idx[0]],
                _ => g[idx[0]][idx[0]] * g[idx[1]][idx[1]] - g[idx[0]][idx[1]] * g[idx[1]][idx[0]],
            }
        })
        .collect();
    let quad = |u: &[i64], v: &[i64]| -> i64 { (0..n).map(|i| (0..n).map(|j| u[i] * g[i][j] * v[j]).sum::<i64>()).sum() };
    // Column j of an automorphism has norm g[j][j]; then u_i^2 det ≤ g[j][j] adj_ii.
    let candidates: Vec<Vec<Vec<i64>>> = (0..n)
        .map(|j| {
            let bounds: Vec<i64> = (0..n).map(|i| ((g[j][j] * adj_diag[i]) as f64 / det as f64).sqrt().floor() as i64 + 1).collect();
            let mut out = Vec::new();
            let mut u = vec![0i64; n];
            fn walk(i: usize, u: &mut Vec<i64>, bounds: &[i64], out: &mut Vec<Vec<i64>>, keep: &dyn Fn(&[i64]) -> bool) {
                if i == u.len() {
                    if keep(u) {
                        out.push(u.clone());
                    }
                    return;
                }
                for x in -bounds[i]..=bounds[i] {
                    u[i] = x;
                    walk(i + 1, u, bounds, out, keep);
                }
            }
            walk(0, &mut u, &bounds, &mut out, &|u| quad(u, u) == g[j][j]);
            out
        })
        .collect();
    let mut count = 0;
    let mut chosen: Vec<&Vec<i64>> = Vec::new();
    fn extend<'a>(
        chosen: &mut Vec<&'a Vec<i64>>,
        candidates: &'a [Vec<Vec<i64>>],
        g: &[Vec<i64>],
        quad: &dyn Fn(&[i64], &[i64]) -> i64,
        count: &mut u64,
    ) {
        let j = chosen.len();
        if j == candidates.len() {
            *count += 1;
            return;
        }
        for c in &candidates[j] {
            if chosen.iter().enumerate().all(|(i, u)| quad(u, c) == g[i][j]) {
                chosen.push(c);
                extend(chosen, candidates, g, quad, count);
                chosen.pop();
            }
        }
    }
    extend(&mut chosen, &candidates, &g, &quad, &mut count);
    count
}

// ---------------------------------------------------------------------------
// Shared pipeline runs.

struct Runs {
    degree_one: VerificationReport,
    degree_two: VerificationReport,
    times: (Duration, Duration),
}

fn level_seven_target() -> WeightTarget {
    WeightTarget::new(7, 2, 0, false).expect("valid target")
}

fn pipeline() -> Result<Runs, String> {
    let target = level_seven_target();
    let genera = candidate_genera(&target).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let degree_one = fit_and_verify(&FitConfig::new(target, 1, 50, 3), &genera).map_err(|e| e.to_string())?;
    let t1 = t0.elapsed();
    let t0 = Instant::now();
    let degree_two = fit_and_verify(&FitConfig::new(target, 2, 8, 2), &genera).map_err(|e| e.to_string())?;
    Ok(Runs { degree_one, degree_two, times: (t1, t0.elapsed()) })
}

// ---------------------------------------------------------------------------
// Criteria.

fn rank_decomposition() -> Outcome {
    let start = Instant::now();
    let mut forms = Vec::new();
    for r in 1..=2 {
        let dets: Vec<u64> = (1..=12).collect();
        forms.extend(enumerate_forms(r, &dets, 1).map_err(|e| e.to_string())?);
    }
    let mut checked = 0;
    for s in &forms {
        for n in 1..=3 {
            let f = theta_series(s, n, 6).map_err(|e| e.to_string())?;
            for r in 1..=n {
                let rep = verify_rank_decomposition(&f, r, 6).map_err(|e| e.to_string())?;
                ensure(rep.passed, || format!("{s} n={n} r={r}: {:?}", rep.mismatches))?;
                checked += rep.checked;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("{} forms, {checked} rank-filtered indices, zero residual, {elapsed:.1?}", forms.len()))
}

fn degree_one_limit() -> Outcome {
    let target = level_seven_target();
    let seq = WeightSequence::linear(target, 3).map_err(|e| e.to_string())?;
    let lim = empirical_limit(&seq, 1, 50, |k, n, b| eisenstein_qexp(k as u32, n, b)).map_err(|e| e.to_string())?;
    // The limit is the 7-deprived weight-2 series 1 − 2/((1 − p)B_2/2) Σ σ*(t) q^t.
    let b = bernoulli_table(2);
    let p = BigInt::from(7);
    let scale = ratio(-2, 1) / ((Rational::one() - Rational::from_integer(p.clone())) * &b[2] / ratio(2, 1));
    let mut compared = 0;
    for m in 1..=3u32 {
        let modulus = p.pow(m);
        let zero = lim.residue(&HalfIntegralMatrix::diagonal(&[0]), m).cloned();
        ensure(zero == Some(BigInt::one()), || format!("constant term at m={m}: {zero:?}"))?;
        for t in 1..=50u64 {
            let mut s = divisor_power_sum(1, t);
            if t % 7 == 0 {
                s -= divisor_power_sum(1, t / 7) * 7;
            }
            let value = &scale * Rational::from_integer(s);
            ensure(value.denom().is_one(), || "oracle value not integral".into())?;
            let want = value.numer().mod_floor(&modulus);
            let got = lim.residue(&HalfIntegralMatrix::diagonal(&[t as i64]), m);
            ensure(got == Some(&want), || format!("t={t} m={m}: got {got:?}, want {want}"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} residues equal mod 7^m for m ≤ 3, t ≤ 50"))
}

fn describe_rungs(r: &VerificationReport) -> String {
    r.rungs
        .iter()
        .map(|g| {
            let fitted: Vec<&str> = g.fitted.iter().map(|f| f.residue.as_str()).collect();
            format!("m={} ã≡{:?} exp {:?}≥{}", g.m, fitted, g.achieved_exponent, g.target_exponent)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn flagship(runs: &Result<Runs, String>) -> Outcome {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    for (label, r, limit) in [
        ("n=1 B=50", &runs.degree_one, runs.times.0),
        ("n=2 B=8", &runs.degree_two, runs.times.1),
    ] {
        for g in &r.rungs {
            ensure(g.achieved_exponent.at_least(g.target_exponent as i64), || {
                format!("{label} rung {}: exponent {:?} < {}", g.m, g.achieved_exponent, g.target_exponent)
            })?;
        }
        ensure(r.coherent.iter().all(|&c| c), || format!("{label}: fitted coefficients not coherent"))?;
        ensure(r.passed, || format!("{label}: failed stage {:?}", r.failed_stage))?;
        ensure(limit < Duration::from_secs(600), || format!("{label}: took {limit:?}"))?;
    }
    Ok(format!(
        "n=1: {} ({} held out, {:.1?}); n=2: {} ({} held out, {:.1?})",
        describe_rungs(&runs.degree_one),
        runs.degree_one.held_out,
        runs.times.0,
        describe_rungs(&runs.degree_two),
        runs.degree_two.held_out,
        runs.times.1
    ))
}

fn excluded_genera_vanish(runs: &Result<Runs, String>) -> Outcome {
    let target = level_seven_target();
    let seq = WeightSequence::linear(target, 2).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    // Level not dividing 7.
    for (name, text) in [
        ("D4 (level 2)", "4; 2 -1 0 0; -1 2 -1 -1; 0 -1 2 0; 0 -1 0 2"),
        ("A4 (level 5, character of 5)", "4; 2 -1 0 0; -1 2 -1 0; 0 -1 2 -1; 0 0 -1 2"),
    ] {
        let ladder = direct_limit_coefficient(&form(text), &seq).map_err(|e| e.to_string())?;
        ensure(ladder.vanishes(), || format!("{name}: residues {:?}", ladder.residues))?;
        notes.push(format!("{name} → 0"));
    }
    // Every rank-4 form of level 7 has square determinant, so the mismatched
    // character needs a prime p ≡ 1 mod 4. At p = 13, j = 0 a determinant-13
    // form carries the character of 13.
    let t13 = WeightTarget::new(13, 2, 0, false).map_err(|e| e.to_string())?;
    let seq13 = WeightSequence::linear(t13, 2).map_err(|e| e.to_string())?;
    let s13 = form("4; 2 1 1 1; 1 2 1 1; 1 1 2 1; 1 1 1 4");
    ensure(s13.level().map_err(|e| e.to_string())? == 13, || "det-13 form has wrong level".into())?;
    let ladder = direct_limit_coefficient(&s13, &seq13).map_err(|e| e.to_string())?;
    ensure(ladder.vanishes(), || format!("det-13 form: residues {:?}", ladder.residues))?;
    notes.push("det-13 form with character of 13 at p=13 → 0".into());
    // Enlarged dictionary at p = 13: the character-13 genus fits to 0.
    let classes = enumerate_classes(4, 13, 169).map_err(|e| e.to_string())?;
    let genera = partition_into_genera(&classes).map_err(|e| e.to_string())?;
    let rep = fit_and_verify(&FitConfig::new(t13, 1, 40, 2), &genera).map_err(|e| e.to_string())?;
    ensure(rep.passed, || format!("enlarged fit failed at {:?}", rep.failed_stage))?;
    for g in &rep.rungs {
        for (f, genus) in g.fitted.iter().zip(&genera) {
            if genus.character.is_some_and(|c| c.discriminant() != 1) {
                ensure(f.residue == "0", || format!("character-13 genus fitted to {} at m={}", f.residue, g.m))?;
            }
        }
    }
    notes.push(format!("enlarged p=13 fit: {}", describe_rungs(&rep)));
    // Positive control: the level-7 genus ladder matches the fitted coefficient.
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let s7 = form("4; 2 0 1 0; 0 2 0 1; 1 0 4 0; 0 1 0 4");
    let ladder = direct_limit_coefficient(&s7, &seq).map_err(|e| e.to_string())?;
    for (m, r) in ladder.residues.iter().enumerate() {
        let fitted = &runs.degree_one.rungs[m].fitted[0].residue;
        ensure(r.as_ref().map(|x| x.to_string()).as_deref() == Some(fitted.as_str()), || {
            format!("level-7 ladder {r:?} vs fitted {fitted} at m={}", m + 1)
        })?;
    }
    notes.push(format!("level-7 ladder {:?} matches the fit", ladder.residues.iter().flatten().collect::<Vec<_>>()));
    Ok(notes.join("; "))
}

/// `Σ ã_i Θ⁰_i` rebuilt from the report.
fn fitted_series(r: &VerificationReport, rung: usize) -> Result<QExpansion, String> {
    let genera = candidate_genera(&r.config.target).map_err(|e| e.to_string())?;
    let (n, b) = (r.config.degree, r.config.bound);
    let mut f = QExpansion::zero(n, b);
    for (g, coeff) in genera.iter().zip(&r.rungs[rung].fitted) {
        let (_, zero) = genus_theta(g, n, b).map_err(|e| e.to_string())?;
        let x = Rational::try_from(&coeff.exact).map_err(|e| e.to_string())?;
        f = f.add_scaled(&zero, &x).map_err(|e| e.to_string())?;
    }
    Ok(f)
}

fn hecke_fixed_point(runs: &Result<Runs, String>) -> Outcome {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let mut compared = 0;
    for r in [&runs.degree_one, &runs.degree_two] {
        let p = r.config.target.p;
        for (i, rung) in r.rungs.iter().enumerate() {
            ensure(rung.up_check.holds, || format!("library check fails at m={}", rung.m))?;
            let f = fitted_series(r, i)?;
            let c = rung.target_exponent;
            for t in window_indices(r.config.degree, r.config.bound).map_err(|e| e.to_string())?.iter() {
                if t.trace() * p as i64 > r.config.bound {
                    continue;
                }
                let a = f.coeff(&t.scale(p as i64)).map_err(|e| e.to_string())?;
                let b = f.coeff(t).map_err(|e| e.to_string())?;
                ensure(residue_mod_pm(&a, p, c) == residue_mod_pm(&b, p, c) && residue_mod_pm(&a, p, c).is_some(), || {
                    format!("a(pT) ≢ a(T) at {t}, m={}", rung.m)
                })?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} admissible (T, pT) pairs congruent mod 7^c(m) across both runs"))
}

fn singularity_audit(runs: &Result<Runs, String>) -> Outcome {
    let mut detections = 0;
    let mut synthetic = 0;
    for (k, n, p, e) in [(4u32, 1usize, 5u64, 1u32), (6, 1, 7, 1), (20, 1, 5, 2), (4, 2, 5, 1), (10, 2, 11, 1)] {
        let f = eisenstein_qexp(k, n, 10 / n as i64).map_err(|x| x.to_string())?;
        let audit = audit_singular(&f, k as u64, p, e).map_err(|x| x.to_string())?;
        let top = audit.last().expect("nonempty audit");
        ensure(top.rank.is_some(), || format!("E_{k} degree {n} not singular mod {p}^{e}"))?;
        ensure(audit.iter().all(|a| a.consistent), || format!("contradiction for E_{k} mod {p}^{e}"))?;
        detections += audit.iter().filter(|a| a.rank.is_some()).count();
        synthetic += 1;
    }
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let mut windows = 0;
    for r in [&runs.degree_one, &runs.degree_two] {
        for g in &r.rungs {
            ensure(g.audit.iter().all(|a| a.consistent), || format!("pipeline contradiction at weight {}", g.weight))?;
            detections += g.audit.iter().filter(|a| a.rank.is_some()).count();
            windows += 1;
        }
    }
    Ok(format!("{synthetic} synthetic singular forms and {windows} pipeline windows; {detections} detections, no contradiction"))
}

fn eisenstein_dual_path() -> Outcome {
    let mut compared = 0;
    for k in [4u32, 6, 44] {
        let e = eisenstein_qexp(k, 2, 6).map_err(|x| x.to_string())?;
        for t in window_indices(2, 6).map_err(|x| x.to_string())?.iter().filter(|t| t.rank() == 2) {
            let a = e.coeff(t).map_err(|x| x.to_string())?;
            let b = local_density_coeff(t, k).map_err(|x| x.to_string())?;
            ensure(a == b, || format!("k={k} {t}: closed form {a} vs densities {b}"))?;
            compared += 1;
        }
    }
    let bern = bernoulli_table(44);
    for k in [4u32, 6, 44] {
        let e = eisenstein_qexp(k, 1, 20).map_err(|x| x.to_string())?;
        for t in 1..=20u64 {
            let want = ratio(-2 * k as i64, 1) / &bern[k as usize] * Rational::from_integer(divisor_power_sum(k - 1, t));
            let idx = HalfIntegralMatrix::diagonal(&[t as i64]);
            let got = e.coeff(&idx).map_err(|x| x.to_string())?;
            ensure(got == want, || format!("degree 1, k={k}, t={t}: {got} vs {want}"))?;
            let dens = local_density_coeff(&idx, k).map_err(|x| x.to_string())?;
            ensure(dens == want, || format!("rank-1 density, k={k}, t={t}: {dens} vs {want}"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} coefficients agree exactly"))
}

fn quadratic_kernel() -> Outcome {
    let forms = [
        "1; 2",
        "1; 6",
        "2; 2 1; 1 2",
        "2; 2 0; 0 2",
        "2; 2 1; 1 4",
        "2; 2 3; 3 6",
        "3; 2 1 0; 1 2 1; 0 1 2",
        "3; 2 0 0; 0 2 0; 0 0 2",
        "3; 2 1 0; 1 2 0; 0 0 2",
        "3; 2 1 1; 1 4 1; 1 1 6",
    ];
    let mut counts = Vec::new();
    for text in forms {
        let s = form(text);
        let fast = automorphism_count(&s).map_err(|e| e.to_string())?;
        let slow = box_automorphisms(&s);
        ensure(fast == slow, || format!("{text}: {fast} vs exhaustive {slow}"))?;
        counts.push(fast);
    }
    let mut sizes = Vec::new();
    for p in [3u64, 5, 7] {
        let a = enumerate_classes_scaled(2, p, u64::MAX, 1).map_err(|e| e.to_string())?;
        let b = enumerate_classes_scaled(2, p, u64::MAX, 2).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("rank 2, level | {p}: {} classes vs {} with doubled bounds", a.len(), b.len()))?;
        sizes.push(a.len());
    }
    Ok(format!("automorphism counts {counts:?} match; rank-2 class counts {sizes:?} stable for p = 3, 5, 7"))
}

fn main() {
    let started = Instant::now();
    let runs = catch_unwind(pipeline).unwrap_or_else(|_| Err("pipeline panicked".into()));
    let criteria: Vec<Criterion> = vec![
        ("rank decomposition of theta series", Box::new(rank_decomposition)),
        ("degree-1 limit equals the deprived series", Box::new(degree_one_limit)),
        ("flagship fit and held-out verification", Box::new(|| flagship(&runs))),
        ("excluded genera have vanishing limits", Box::new(|| excluded_genera_vanish(&runs))),
        ("U(p) fixes the fitted combination", Box::new(|| hecke_fixed_point(&runs))),
        ("singularity audit", Box::new(|| singularity_audit(&runs))),
        ("Eisenstein dual path", Box::new(eisenstein_dual_path)),
        ("quadratic-form kernel", Box::new(quadratic_kernel)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({:.1?})", i + 1, t.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({:.1?})", i + 1, t.elapsed());
            }
        }
    }
    println!("acceptance: {} of {} criteria passed in {:.1?}", criteria.len() - failed, criteria.len(), started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
