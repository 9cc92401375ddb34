//! Comma-separated output with a mandatory header row and 15 significant
//! digits. Trailing `#` lines carry run metadata and are skipped by gnuplot.

use std::fmt::Write;

use super::{ContinuationRow, NfRow, SimulationRun, SweepRow};

/// A float with 15 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.14e}")
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn simulation(run: &SimulationRun) -> String {
    let rec = &run.record;
    let mut out = String::from("t,q1,q2,p1,p2,r,dH,so2_momentum\n");
    for i in 0..rec.times.len() {
        let s = rec.states[i];
        let cells = [rec.times[i], s.q1, s.q2, s.p1, s.p2, rec.radius[i], rec.energy[i], rec.so2_momentum[i]];
        let line: Vec<String> = cells.iter().map(|v| num(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    writeln!(
        out,
        "# termination={} steps={} max_r={} eps={} q1_0={} nua1_0={} dt={}",
        rec.termination,
        rec.steps,
        num(rec.max_r),
        num(run.eps),
        num(run.q1_0),
        num(run.nua1_0),
        num(run.dt)
    )
    .unwrap();
    out
}

pub fn sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from("Pe,max_r,max_real_part,termination\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", num(r.pe), num(r.max_r), num(r.max_real_part), r.termination).unwrap();
    }
    out
}

pub fn continuation(rows: &[ContinuationRow]) -> String {
    let mut out = String::from("Pe,q1,q2,p1,p2,re1,re2,re3,re4,max_real_part,iterations,status\n");
    for r in rows {
        let state = r.state.map(|s| s.to_array().map(num).join(",")).unwrap_or_else(|| ",,,".into());
        let re = r
            .eigenvalues
            .map(|ev| ev.map(|z| num(z.re)).join(","))
            .unwrap_or_else(|| ",,,".into());
        let status = r.error.clone().unwrap_or_else(|| "converged".into()).replace(',', ";");
        writeln!(out, "{},{state},{re},{},{},{status}", num(r.pe), num(r.max_real_part), r.iterations).unwrap();
    }
    out
}

pub fn nf_table(rows: &[NfRow]) -> String {
    let mut out = String::from("eps,T_ratio,Tnf4_ratio,r4,Tnf6_ratio,r6,Tnf8_ratio,r8\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.eps),
            num(r.t_ratio),
            num(r.tnf_ratio[0]),
            opt(r.order[0]),
            num(r.tnf_ratio[1]),
            opt(r.order[1]),
            num(r.tnf_ratio[2]),
            opt(r.order[2])
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333333333e-1");
        assert_eq!(num(-2.5), "-2.50000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
        let back: f64 = num(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn nf_table_layout() {
        let rows = [NfRow {
            eps: 1e-4,
            t_ratio: 0.5,
            tnf_ratio: [0.1, 0.2, 0.3],
            order: [Some(4.0), None, Some(8.0)],
        }];
        let text = nf_table(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "eps,T_ratio,Tnf4_ratio,r4,Tnf6_ratio,r6,Tnf8_ratio,r8");
        assert_eq!(lines.next().unwrap().split(',').count(), 8);
        assert!(text.contains(",,"));
    }
}
