//! CSV rendering of closed-loop frame records.

use std::fmt::Write as _;

use crate::util::fmt6;

use super::closed_loop::{FrameRecord, UserFrameRecord};

fn user_columns(prefix: &str) -> String {
    [
        "true_mod",
        "recognized",
        "sinr_db",
        "true_sinr_db",
        "level",
        "next_mod",
        "coding_rate",
        "tx_power",
        "next_power",
        "situation",
        "amc_success",
        "clamped",
        "converged",
        "rate_bound",
        "goodput",
        "channel_gain",
    ]
    .iter()
    .map(|c| format!("{prefix}_{c}"))
    .collect::<Vec<_>>()
    .join(",")
}

fn push_user(out: &mut String, u: &UserFrameRecord) {
    let opt_scheme = |s: &Option<crate::phy::Scheme>| {
        s.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
    };
    let opt_bool =
        |b: &Option<bool>| b.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
    let situation = u
        .situation
        .map(|s| s.to_string())
        .unwrap_or_else(|| "-".into());
    let _ = write!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        u.true_scheme,
        opt_scheme(&u.recognized),
        fmt6(u.sinr_db),
        fmt6(u.true_sinr_db),
        u.level,
        u.decision_scheme,
        fmt6(u.coding_rate),
        fmt6(u.tx_power),
        fmt6(u.next_power),
        situation,
        opt_bool(&u.amc_success),
        u.clamped,
        u.converged,
        fmt6(u.rate_bound),
        fmt6(u.goodput),
        fmt6(u.channel_gain),
    );
}

/// One row per frame; per-user columns prefixed `u1_` / `u2_`.
pub fn closed_loop_csv(records: &[FrameRecord]) -> String {
    let mut out = format!(
        "frame,{},{},c_sum_bound,c_sum_goodput\n",
        user_columns("u1"),
        user_columns("u2")
    );
    for r in records {
        let _ = write!(out, "{},", r.frame);
        push_user(&mut out, &r.users[0]);
        out.push(',');
        push_user(&mut out, &r.users[1]);
        let bound = r.users[0].rate_bound + r.users[1].rate_bound;
        let good = r.users[0].goodput + r.users[1].goodput;
        let _ = writeln!(out, ",{},{}", fmt6(bound), fmt6(good));
    }
    out
}
