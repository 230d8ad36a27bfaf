//! Built-in verification suites: the small-instance QP oracle against the
//! SMO solver, the 45-case link-adaptation golden table, and the CQI table's
//! printed values.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cqi::CqiTable;
use crate::link::{decide, ChannelState, PowerConfig, Situation};
use crate::phy::Scheme;
use crate::sinr::SinrEstimate;
use crate::svm::oracle::solve_dual_exact;
use crate::svm::{train_binary, Feature, KernelParams, SmoSettings};

#[derive(Debug, Clone)]
pub struct SelfTestLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Hand-written expectation per (recognized scheme, i_s): effective level,
/// next modulation, situation. One row per cell of the decision table.
pub const GOLDEN_DECISIONS: [(Scheme, usize, usize, Scheme, Situation); 45] = {
    use Scheme::{Qam16, Qam64, Qpsk};
    use Situation::{Coordinated, LessSinr, MoreSinr};
    [
        (Qpsk, 1, 1, Qpsk, Coordinated),
        (Qpsk, 2, 2, Qpsk, Coordinated),
        (Qpsk, 3, 3, Qpsk, Coordinated),
        (Qpsk, 4, 4, Qpsk, Coordinated),
        (Qpsk, 5, 5, Qpsk, Coordinated),
        (Qpsk, 6, 6, Qpsk, Coordinated),
        (Qpsk, 7, 7, Qam16, MoreSinr),
        (Qpsk, 8, 8, Qam16, MoreSinr),
        (Qpsk, 9, 9, Qam16, MoreSinr),
        (Qpsk, 10, 10, Qam64, MoreSinr),
        (Qpsk, 11, 11, Qam64, MoreSinr),
        (Qpsk, 12, 12, Qam64, MoreSinr),
        (Qpsk, 13, 13, Qam64, MoreSinr),
        (Qpsk, 14, 14, Qam64, MoreSinr),
        (Qpsk, 15, 15, Qam64, MoreSinr),
        (Qam16, 1, 7, Qam16, LessSinr),
        (Qam16, 2, 7, Qam16, LessSinr),
        (Qam16, 3, 7, Qam16, LessSinr),
        (Qam16, 4, 7, Qam16, LessSinr),
        (Qam16, 5, 7, Qam16, LessSinr),
        (Qam16, 6, 7, Qam16, LessSinr),
        (Qam16, 7, 7, Qam16, Coordinated),
        (Qam16, 8, 8, Qam16, Coordinated),
        (Qam16, 9, 9, Qam16, Coordinated),
        (Qam16, 10, 10, Qam64, MoreSinr),
        (Qam16, 11, 11, Qam64, MoreSinr),
        (Qam16, 12, 12, Qam64, MoreSinr),
        (Qam16, 13, 13, Qam64, MoreSinr),
        (Qam16, 14, 14, Qam64, MoreSinr),
        (Qam16, 15, 15, Qam64, MoreSinr),
        (Qam64, 1, 10, Qam64, LessSinr),
        (Qam64, 2, 10, Qam64, LessSinr),
        (Qam64, 3, 10, Qam64, LessSinr),
        (Qam64, 4, 10, Qam64, LessSinr),
        (Qam64, 5, 10, Qam64, LessSinr),
        (Qam64, 6, 10, Qam64, LessSinr),
        (Qam64, 7, 10, Qam64, LessSinr),
        (Qam64, 8, 10, Qam64, LessSinr),
        (Qam64, 9, 10, Qam64, LessSinr),
        (Qam64, 10, 10, Qam64, Coordinated),
        (Qam64, 11, 11, Qam64, Coordinated),
        (Qam64, 12, 12, Qam64, Coordinated),
        (Qam64, 13, 13, Qam64, Coordinated),
        (Qam64, 14, 14, Qam64, Coordinated),
        (Qam64, 15, 15, Qam64, Coordinated),
    ]
};

/// Check the SMO solver against the exhaustive QP oracle.
pub fn qp_oracle_check(datasets: usize, seed: u64) -> SelfTestLine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut failures = 0usize;
    for case in 0..datasets {
        let n = rng.random_range(3..=8);
        let mut feats: Vec<Feature> = Vec::with_capacity(n);
        let mut labels: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            feats.push([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            labels.push(if rng.random::<bool>() { 1.0 } else { -1.0 });
        }
        labels[0] = 1.0;
        labels[1] = -1.0;
        let c = [1.0, 10.0, 100.0][case % 3];
        let params = KernelParams::new(0.8, c).unwrap();
        let oracle = solve_dual_exact(&feats, &labels, &params).expect("oracle solves");
        match train_binary(&feats, &labels, &params, &SmoSettings::default()) {
            Ok(out) => {
                let gap = (out.dual_objective - oracle.objective).abs();
                worst_gap = worst_gap.max(gap);
                worst_kkt = worst_kkt.max(out.kkt_gap);
                if gap > 1e-4 || out.kkt_gap > 1e-3 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    SelfTestLine {
        name: "qp-oracle".into(),
        passed: failures == 0,
        detail: format!(
            "{datasets} datasets, worst objective gap {worst_gap:.2e}, worst KKT {worst_kkt:.2e}, {failures} failures"
        ),
    }
}

/// Check `decide` against the 45-row golden table.
pub fn decision_table_check() -> SelfTestLine {
    let table = CqiTable::builtin();
    let cfg = PowerConfig {
        p_max: 1e9, // exercise the rule, not the clamps
        ..PowerConfig::default()
    };
    let channel = ChannelState {
        gain: 1.0,
        interference_plus_noise: 0.01,
    };
    let mut failures = Vec::new();
    for &(recognized, i_s, level, scheme, situation) in GOLDEN_DECISIONS.iter() {
        let est = SinrEstimate {
            sinr_db: table.row(i_s).sinr_min_db + 0.05,
            signal_power: 1.0,
            error_power: 0.0,
            level_index: i_s,
        };
        let d = decide(table, recognized, &est, channel, 0.5, &cfg).unwrap();
        let expected_rate =
            table.row(level).spectral_efficiency / scheme.bits_per_symbol() as f64;
        let expected_power = crate::link::min_power_for_level(
            table,
            level,
            channel.gain,
            channel.interference_plus_noise,
        )
        .unwrap();
        if d.level_used != level
            || d.scheme != scheme
            || d.situation != situation
            || d.coding_rate != expected_rate
            || (d.tx_power - expected_power).abs() > 1e-12
        {
            failures.push(format!("{recognized}/{i_s}"));
        }
    }
    SelfTestLine {
        name: "decision-table".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "45/45 cells match".into()
        } else {
            format!("mismatched cells: {}", failures.join(" "))
        },
    }
}

/// Check the CQI table's printed values.
pub fn cqi_table_check() -> SelfTestLine {
    let t = CqiTable::builtin();
    let mut ok = true;
    let mut notes = Vec::new();
    let expect = |ok: &mut bool, notes: &mut Vec<String>, cond: bool, what: &str| {
        if !cond {
            *ok = false;
            notes.push(what.to_string());
        }
    };
    expect(&mut ok, &mut notes, t.rows().len() == 15, "row count");
    expect(&mut ok, &mut notes, t.row(1).sinr_min_db == -6.7, "row 1 floor");
    expect(&mut ok, &mut notes, t.row(8).spectral_efficiency == 1.9141, "row 8 eff");
    expect(&mut ok, &mut notes, t.row(14).spectral_efficiency == 4.1152, "row 14 eff");
    expect(&mut ok, &mut notes, t.row(15).sinr_min_db == 22.7, "row 15 floor");
    expect(
        &mut ok,
        &mut notes,
        crate::link::coding_rate(t, 8, Scheme::Qam16) == 0.478525,
        "coding_rate(8, 16QAM)",
    );
    SelfTestLine {
        name: "cqi-table".into(),
        passed: ok,
        detail: if ok {
            "verbatim values present".into()
        } else {
            notes.join(", ")
        },
    }
}

/// Run all suites.
pub fn run_selftest() -> Vec<SelfTestLine> {
    vec![
        qp_oracle_check(40, 0x0_5e1f),
        decision_table_check(),
        cqi_table_check(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for line in run_selftest() {
            assert!(line.passed, "{}: {}", line.name, line.detail);
        }
    }
}
