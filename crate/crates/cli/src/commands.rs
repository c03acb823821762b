use std::collections::BTreeMap;
use std::io::BufRead;
use std::time::Instant;

use anticyc_core::iwasawa::{
    fit_invariants, fit_invariants_from, invariants_of, layer_sequence, parity_audit, ElementaryLambdaModule,
    ParityVerdict,
};
use anticyc_core::linalg::{
    charpoly, intertwiner_solve, intertwines, mat_pow_zeta, orbit_block_construct, random_principal_matrix,
    rank_divisibility_check, Intertwiner, PadicMatrix, RankVerdict,
};
use anticyc_core::metacyclic::{MetacyclicError, MetacyclicGroup};
use anticyc_core::PadicRing;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::model::{ModelFile, ZetaSpec};
use crate::records::ClassGroupRecord;
use crate::report::{Check, Report, Verdict};

pub const DEFAULT_PRECISION: u32 = 4;
pub const DEFAULT_TRIALS: usize = 200;
pub const MAX_CAMPAIGN_RANK: usize = 6;

#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub precision: u32,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            precision: DEFAULT_PRECISION,
            seed: 0,
        }
    }
}

fn finish(mut report: Report, start: Instant) -> Report {
    report.elapsed = start.elapsed();
    report
}

fn matrix_json(m: &PadicMatrix) -> serde_json::Value {
    json!(m
        .rows()
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

/// Searches every `G(p, u)` in the grid for an automorphism sending `τ`
/// into `A₁τ⁻¹`, and counts `|Aut G|`.
pub fn cmd_verify_lemma1(grid: &[(u64, u32)], settings: &Settings) -> Report {
    let start = Instant::now();
    let mut report = Report::new("verify-lemma1", settings.seed);
    for &(p, u) in grid {
        let subject = format!("G({p},{u})");
        let group = match MetacyclicGroup::new(p, u) {
            Ok(g) => g,
            Err(e) => return finish(report.reject(format!("{subject}: {e}")), start),
        };
        let outcome = group
            .enumerate_automorphisms()
            .and_then(|auts| Ok((auts.len(), group.find_inverting_automorphism()?)));
        let check = match outcome {
            Err(e @ MetacyclicError::SearchSpaceTooLarge(_)) => {
                Check::new(subject, Verdict::Skipped, format!("size guard: {e}"))
            }
            Err(e) => return finish(report.reject(format!("{subject}: {e}")), start),
            Ok((count, None)) => {
                report.count("automorphisms", count as u64);
                Check::new(subject, Verdict::Pass, format!("{count} automorphisms, 0 inverting"))
                    .with_data(json!({"p": p, "u": u, "automorphisms": count, "inverting": 0}))
            }
            Ok((count, Some(w))) => {
                report.count("automorphisms", count as u64);
                report.count("inverting", 1);
                Check::new(subject, Verdict::Fail, format!("inverting automorphism {}", w.images))
                    .with_data(json!({"p": p, "u": u, "automorphisms": count, "witness": w.images.to_string()}))
            }
        };
        report.push(check);
    }
    finish(report, start)
}

/// `(p, u)` for every `p` in `primes` and `1 ≤ u ≤ u_max`.
pub fn metacyclic_grid(primes: &[u64], u_max: u32) -> Vec<(u64, u32)> {
    primes
        .iter()
        .flat_map(|&p| (1..=u_max).map(move |u| (p, u)))
        .collect()
}

#[derive(Default)]
struct TrialTally {
    witnesses: u64,
    vacuous: u64,
    undetermined: u64,
    draws: u64,
    violation: Option<(usize, PadicMatrix, PadicMatrix)>,
}

/// Random necessity trials for `r ≡ 0 mod d` plus constructed orbit
/// controls for every `r` divisible by `d`.
pub fn cmd_lemma2_campaign(p: u64, ranks: &[usize], zeta: &ZetaSpec, trials: usize, settings: &Settings) -> Report {
    let start = Instant::now();
    let mut report = Report::new("lemma2-campaign", settings.seed);
    let d = match PadicRing::new(p, settings.precision)
        .map_err(|e| e.to_string())
        .and_then(|ring| zeta.resolve_with_order(&ring))
    {
        Ok((_, d)) => d,
        Err(e) => return finish(report.reject(e), start),
    };
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > MAX_CAMPAIGN_RANK) {
        return finish(
            report.reject(format!("rank {r} outside 1..={MAX_CAMPAIGN_RANK}")),
            start,
        );
    }
    for &r in ranks {
        // det(M - I) = p^r det(A) for M = I + pA, so N must exceed r
        let precision = settings.precision.max(r as u32 + 1);
        let ring = match PadicRing::new(p, precision) {
            Ok(r) => r,
            Err(e) => return finish(report.reject(e.to_string()), start),
        };
        let zeta_exp = match zeta.resolve(&ring) {
            Ok(z) => z,
            Err(e) => return finish(report.reject(e), start),
        };
        let results: Vec<_> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
                rng.set_stream(((r as u64) << 32) | t as u64);
                let (m, draws) = random_principal_matrix(&ring, r, &mut rng)?;
                Ok::<_, anticyc_core::linalg::LinalgError>((m.clone(), draws, rank_divisibility_check(&m, &zeta_exp, d)?))
            })
            .collect();
        let mut tally = TrialTally::default();
        for result in results {
            let (m, draws, verdict) = match result {
                Ok(x) => x,
                Err(e) => return finish(report.reject(format!("r={r}: {e}")), start),
            };
            tally.draws += draws as u64;
            match verdict {
                RankVerdict::Consistent { .. } => tally.witnesses += 1,
                RankVerdict::Vacuous => tally.vacuous += 1,
                RankVerdict::Undetermined { .. } => tally.undetermined += 1,
                RankVerdict::Violation { witness, .. } => {
                    tally.witnesses += 1;
                    tally.violation.get_or_insert((r, m, witness));
                }
            }
        }
        report.count("trials", trials as u64);
        report.count("witnesses", tally.witnesses);
        report.count("undetermined", tally.undetermined);
        report.count("draws", tally.draws);
        let data = json!({
            "p": p, "r": r, "d": d, "zeta": zeta, "trials": trials, "precision": ring.precision(),
            "witnesses": tally.witnesses, "vacuous": tally.vacuous, "undetermined": tally.undetermined,
        });
        let subject = format!("random r={r}");
        let check = if let Some((_, m, w)) = tally.violation {
            Check::new(subject, Verdict::Fail, format!("intertwiner exists with r={r} ≢ 0 mod {d}"))
                .with_data(json!({"summary": data, "m": matrix_json(&m), "witness": matrix_json(&w)}))
        } else if tally.undetermined > 0 {
            Check::new(
                subject,
                Verdict::Inconclusive,
                format!("{} of {trials} trials undetermined", tally.undetermined),
            )
            .with_data(data)
        } else {
            Check::new(
                subject,
                Verdict::Pass,
                format!("{trials} trials: {} witnesses, {} without intertwiner", tally.witnesses, tally.vacuous),
            )
            .with_data(data)
        };
        report.push(check);
        if r % d as usize == 0 {
            report.push(orbit_control(p, r, d, zeta, settings));
        }
    }
    finish(report, start)
}

/// Constructed control of rank `r = d·s`, at precision `max(N, r + 1)` so
/// that `det(M - I) ≢ 0` is visible.
pub fn orbit_control(p: u64, r: usize, d: u32, zeta: &ZetaSpec, settings: &Settings) -> Check {
    let s = r / d as usize;
    let precision = settings.precision.max(r as u32 + 1);
    let subject = format!("orbit control d={d} s={s}");
    let run = || -> Result<(bool, bool, bool), String> {
        let ring = PadicRing::new(p, precision).map_err(|e| e.to_string())?;
        let zeta = zeta.resolve(&ring)?;
        let (m, dm) = orbit_block_construct(&ring, d, s, &zeta).map_err(|e| e.to_string())?;
        let constructed = intertwines(&m, &dm, &zeta).map_err(|e| e.to_string())?;
        let resolved = match intertwiner_solve(&m, &zeta).map_err(|e| e.to_string())? {
            Intertwiner::Witness(w) => intertwines(&m, &w, &zeta).map_err(|e| e.to_string())?,
            _ => false,
        };
        let mz = mat_pow_zeta(&m, &zeta).map_err(|e| e.to_string())?;
        Ok((constructed, resolved, charpoly(&m) == charpoly(&mz)))
    };
    let data = json!({"p": p, "d": d, "s": s, "r": r, "precision": precision});
    match run() {
        Ok((true, true, true)) => Check::new(
            subject,
            Verdict::Pass,
            format!("M^ζ·D = D·M verified, re-solved witness found, charpoly(M^ζ) = charpoly(M) (N={precision})"),
        )
        .with_data(data),
        Ok((c, w, cp)) => Check::new(
            subject,
            Verdict::Fail,
            format!("constructed={c} resolved={w} charpoly_equal={cp}"),
        )
        .with_data(data),
        Err(e) => Check::new(subject, Verdict::Fail, e).with_data(data),
    }
}

/// Layer exponents `e_0..e_{n_max}` of an elementary module and the fitted
/// invariants, compared against the structure.
pub fn cmd_growth(p: u64, module_spec: &str, n_max: u32, settings: &Settings) -> Report {
    let start = Instant::now();
    let mut report = Report::new("growth", settings.seed);
    let module = match ElementaryLambdaModule::parse(p, module_spec) {
        Ok(m) => m,
        Err(e) => return finish(report.reject(e.to_string()), start),
    };
    if n_max < 3 {
        return finish(report.reject("need n_max ≥ 3 (at least 4 layers) to fit"), start);
    }
    let seq = match layer_sequence(&module, n_max) {
        Ok(s) => s,
        Err(e) => return finish(report.reject(e.to_string()), start),
    };
    let (lambda, mu) = invariants_of(&module);
    let table = seq.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
    let check = match fit_invariants(&seq, p) {
        Ok(fit) => {
            let data = json!({
                "module": module.to_string(), "p": p, "e": seq,
                "lambda": fit.lambda, "mu": fit.mu, "nu": fit.nu, "stable_from": fit.stable_from,
                "expected_lambda": lambda, "expected_mu": mu,
            });
            let verdict = if (fit.lambda, fit.mu) == (lambda, mu) {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            Check::new(
                module.to_string(),
                verdict,
                format!("e = {table}; fitted {fit}; structure λ={lambda} μ={mu}"),
            )
            .with_data(data)
        }
        Err(e) => Check::new(module.to_string(), Verdict::Inconclusive, format!("e = {table}; {e}"))
            .with_data(json!({"module": module.to_string(), "p": p, "e": seq})),
    };
    report.push(check);
    finish(report, start)
}

/// Validates a model, then checks `r ≡ s mod d`.
pub fn cmd_audit_parity(model: &ModelFile, settings: &Settings) -> Report {
    let start = Instant::now();
    let mut report = Report::new("audit-parity", settings.seed);
    let gamma = match model.to_model(settings.precision) {
        Ok(g) => g,
        Err(e) => return finish(report.reject(e), start),
    };
    let coinv = gamma.coinvariants().map(|c| c.to_string()).unwrap_or_default();
    let subject = format!("model r={} d={}", gamma.rank(), gamma.d());
    let input = serde_json::to_value(model).expect("model serializes");
    let check = match parity_audit(&gamma) {
        Err(e) => return finish(report.reject(e.to_string()), start),
        Ok(v @ ParityVerdict::Consistent { .. }) => Check::new(subject, Verdict::Pass, v.to_string()),
        Ok(v @ ParityVerdict::Vacuous { .. }) => Check::new(subject, Verdict::Pass, v.to_string()),
        Ok(v @ ParityVerdict::Undetermined { .. }) => Check::new(subject, Verdict::Inconclusive, v.to_string()),
        Ok(ParityVerdict::Violation { r, s, d, witness }) => Check::new(
            subject,
            Verdict::Fail,
            format!("violation: r={r} ≢ s={s} mod {d}"),
        )
        .with_data(json!({"input": input.clone(), "witness": matrix_json(&witness)})),
    };
    let check = if check.data.is_null() {
        check.with_data(json!({"input": input, "coinvariants": coinv}))
    } else {
        check
    };
    report.push(check);
    finish(report, start)
}

/// Reads a model file and audits it; unreadable or malformed files are
/// input errors.
pub fn cmd_audit_parity_file(path: &std::path::Path, settings: &Settings) -> Report {
    let parsed = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))
        .and_then(|text| serde_json::from_str::<ModelFile>(&text).map_err(|e| format!("{}: {e}", path.display())));
    match parsed {
        Ok(model) => cmd_audit_parity(&model, settings),
        Err(e) => Report::new("audit-parity", settings.seed).reject(e),
    }
}

/// Checks non-cyclicity for records whose hypotheses are asserted, and the
/// parity of λ fitted per label.
pub fn cmd_check_records<R: BufRead>(input: R, settings: &Settings) -> Report {
    let start = Instant::now();
    let mut report = Report::new("check-records", settings.seed);
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => return finish(report.reject(format!("line {}: {e}", i + 1)), start),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match ClassGroupRecord::parse_line(trimmed) {
            Ok((rec, unknown)) => {
                for k in unknown {
                    log::warn!("line {}: ignoring unknown key {k:?}", i + 1);
                }
                records.push((i + 1, rec));
            }
            Err(e) => return finish(report.reject(format!("line {}: {e}", i + 1)), start),
        }
    }
    report.count("records", records.len() as u64);

    for (line, rec) in &records {
        let subject = format!("line {line} {} n={}", rec.label, rec.n);
        let data = json!({"line": line, "record": rec});
        let check = if rec.n == 0 {
            Check::new(subject, Verdict::Skipped, "not applicable (n = 0)")
        } else if !rec.flags.all_hold() {
            Check::new(subject, Verdict::Skipped, "skipped (hypotheses not asserted)")
        } else if rec.is_cyclic() {
            Check::new(
                subject,
                Verdict::Fail,
                format!("contradiction: A = {:?} is cyclic at n = {} with all hypotheses", rec.inv, rec.n),
            )
        } else {
            Check::new(subject, Verdict::Pass, format!("non-cyclic: {:?}", rec.inv))
        };
        report.push(check.with_data(data));
    }

    let mut by_label: BTreeMap<&str, Vec<&ClassGroupRecord>> = BTreeMap::new();
    for (_, rec) in &records {
        if !rec.label.is_empty() {
            by_label.entry(rec.label.as_str()).or_default().push(rec);
        }
    }
    for (label, mut recs) in by_label {
        recs.sort_by_key(|r| r.n);
        let p = recs[0].p;
        if recs.iter().any(|r| r.p != p) {
            return finish(report.reject(format!("label {label:?} mixes primes")), start);
        }
        if recs.windows(2).any(|w| w[0].n == w[1].n) {
            return finish(report.reject(format!("label {label:?} repeats a layer")), start);
        }
        let subject = format!("growth {label}");
        let ns: Vec<u32> = recs.iter().map(|r| r.n).collect();
        let contiguous = ns.windows(2).all(|w| w[1] == w[0] + 1);
        if recs.len() < 4 || !contiguous {
            report.push(Check::new(
                subject,
                Verdict::Skipped,
                format!("need ≥ 4 contiguous layers, have n = {ns:?}"),
            ));
            continue;
        }
        let e: Vec<u64> = recs.iter().map(|r| r.size_exponent()).collect();
        let fit = match fit_invariants_from(ns[0] as usize, &e, p) {
            Ok(f) => f,
            Err(err) => {
                report.push(Check::new(subject, Verdict::Skipped, format!("e = {e:?}: {err}")));
                continue;
            }
        };
        let data = json!({"label": label, "p": p, "n": ns, "e": e,
                          "lambda": fit.lambda, "mu": fit.mu, "nu": fit.nu, "stable_from": fit.stable_from});
        let nonsplit = recs.iter().all(|r| r.flags.p_nonsplit == Some(true));
        let check = if !nonsplit {
            Check::new(subject, Verdict::Skipped, format!("fitted {fit}; parity not checked (p_nonsplit not asserted)"))
        } else if fit.lambda % 2 == 0 {
            Check::new(subject, Verdict::Pass, format!("fitted {fit}; λ ≡ 0 mod 2"))
        } else {
            Check::new(subject, Verdict::Fail, format!("contradiction: fitted {fit} has odd λ with p non-split"))
        };
        report.push(check.with_data(data));
    }
    finish(report, start)
}
